//! Composition `S1 ×_R S2` of two systems with respect to a gauged relation,
//! and the state-feedback relation built on top of it.

use alloc::vec::Vec;
use core::fmt::Debug;

use crate::dec::Gauge;
use crate::error::{Error, Result};
use crate::relation::{AcParams, GaugedRelation, InputMetric};
use crate::system::{FiniteSystem, TransitionSystem};

/// Lazy view of `S1 ×_R S2` over pair states and pair inputs.
///
/// A pair `(x1', x2')` is a successor of `(x1, x2)` under `(u1, u2)` iff both
/// factors move, the source tuple lies in `R(e(x1, x2))` and the target pair
/// lies in `R_X(κ + β e(x1, x2) + λ d(u1, u2))`, where `e` is the state
/// gauge. Exact composition is the case `κ = β = λ = 0` with `{0, ∞}` gauges.
pub struct Composition<'a, S1: TransitionSystem, S2: TransitionSystem> {
    left: &'a S1,
    right: &'a S2,
    rel: GaugedRelation<S1::State, S2::State, S1::Input, S2::Input>,
    params: AcParams,
    metric: InputMetric<S1::Input, S2::Input>,
    inputs: Vec<(S1::Input, S2::Input)>,
}

impl<'a, S1, S2> Composition<'a, S1, S2>
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    pub fn new(
        left: &'a S1,
        right: &'a S2,
        rel: GaugedRelation<S1::State, S2::State, S1::Input, S2::Input>,
        params: AcParams,
        metric: InputMetric<S1::Input, S2::Input>,
    ) -> Self {
        let mut inputs = Vec::new();
        for a in left.inputs() {
            for b in right.inputs() {
                inputs.push((a.clone(), b.clone()));
            }
        }
        Composition {
            left,
            right,
            rel,
            params,
            metric,
            inputs,
        }
    }

    pub fn relation(&self) -> &GaugedRelation<S1::State, S2::State, S1::Input, S2::Input> {
        &self.rel
    }

    pub fn params(&self) -> &AcParams {
        &self.params
    }
}

impl<S1, S2> TransitionSystem for Composition<'_, S1, S2>
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    type State = (S1::State, S2::State);
    type Input = (S1::Input, S2::Input);

    fn initial_states(&self) -> Vec<Self::State> {
        let mut out = Vec::new();
        let rights = self.right.initial_states();
        for a in self.left.initial_states() {
            for b in &rights {
                if self.rel.state_gauge(&a, b).within(self.params.kappa) {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn inputs(&self) -> &[Self::Input] {
        &self.inputs
    }

    fn contains(&self, x: &Self::State) -> bool {
        self.left.contains(&x.0)
            && self.right.contains(&x.1)
            && self.rel.state_gauge(&x.0, &x.1).is_finite()
    }

    fn post(&self, x: &Self::State, u: &Self::Input) -> Vec<Self::State> {
        let Gauge::Finite(e) = self.rel.state_gauge(&x.0, &x.1) else {
            return Vec::new();
        };
        if !self.rel.gauge(&x.0, &x.1, &u.0, &u.1).within(e) {
            return Vec::new();
        }
        let bound = self.params.bound(e, self.metric.eval(&u.0, &u.1));
        let p1 = self.left.post(&x.0, &u.0);
        if p1.is_empty() {
            return Vec::new();
        }
        let p2 = self.right.post(&x.1, &u.1);
        let mut out = Vec::new();
        for a in &p1 {
            for b in &p2 {
                if self.rel.state_gauge(a, b).within(bound) {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        out
    }

    fn enumerate(&self) -> Option<Vec<Self::State>> {
        let (xs1, xs2) = (self.left.enumerate()?, self.right.enumerate()?);
        let mut out = Vec::new();
        for a in &xs1 {
            for b in &xs2 {
                if self.rel.state_gauge(a, b).is_finite() {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        Some(out)
    }
}

/// Materialized reachable part of a composition.
#[derive(Clone, Debug)]
pub struct Composed<X1, X2, U1, U2> {
    pub system: FiniteSystem<(X1, X2), (U1, U2)>,
    /// The initial set `(X10 × X20) ∩ R_X(κ)` was empty.
    pub vacuous: bool,
}

/// Builds the reachable part of `S1 ×_R S2` breadth-first from its initial
/// states. Every materialized state is checked to have a finite state gauge.
pub fn compose<S1, S2>(
    left: &S1,
    right: &S2,
    rel: &GaugedRelation<S1::State, S2::State, S1::Input, S2::Input>,
    params: &AcParams,
    metric: &InputMetric<S1::Input, S2::Input>,
) -> Result<Composed<S1::State, S2::State, S1::Input, S2::Input>>
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    let view = Composition::new(left, right, rel.clone(), *params, metric.clone());
    let system = FiniteSystem::reachable(&view);
    for (a, b) in system.state_list() {
        if !rel.state_gauge(a, b).is_finite() {
            return Err(Error::Internal(alloc::format!(
                "composed state ({a:?}, {b:?}) is outside the relation"
            )));
        }
    }
    Ok(Composed {
        vacuous: system.is_empty(),
        system,
    })
}

/// `R_C(ε)`: relates `((x̂_C, x̂), x)` under `((û_C, û), u)` with the gauge of
/// `R` on `(x̂, x, û, u)` whenever `(x̂_C, x̂)` is in the exact relation's
/// state projection, and never otherwise.
pub fn stacked_relation<Xc, Uc, Xh, Uh, X, U>(
    exact: &GaugedRelation<Xc, Xh, Uc, Uh>,
    rel: &GaugedRelation<Xh, X, Uh, U>,
) -> GaugedRelation<(Xc, Xh), X, (Uc, Uh), U>
where
    Xc: Clone + Ord + Debug + 'static,
    Uc: Clone + Ord + Debug + 'static,
    Xh: Clone + Ord + Debug + 'static,
    Uh: Clone + Ord + Debug + 'static,
    X: Clone + Ord + Debug + 'static,
    U: Clone + Ord + Debug + 'static,
{
    let mut inputs1 = Vec::new();
    for a in exact.inputs1() {
        for b in exact.inputs2() {
            inputs1.push((a.clone(), b.clone()));
        }
    }
    let (ex, r) = (exact.clone(), rel.clone());
    let (ex2, r2) = (exact.clone(), rel.clone());
    GaugedRelation::new(rel.kappa(), inputs1, rel.inputs2().to_vec(), move |xs: &(Xc, Xh), x: &X, us: &(Uc, Uh), u: &U| {
        if ex.state_gauge(&xs.0, &xs.1).within(ex.kappa()) {
            r.gauge(&xs.1, x, &us.1, u)
        } else {
            Gauge::Infinite
        }
    })
    .expect("kappa inherited from a valid relation")
    .with_state_gauge(move |xs: &(Xc, Xh), x: &X| {
        if ex2.state_gauge(&xs.0, &xs.1).within(ex2.kappa()) {
            r2.state_gauge(&xs.1, x)
        } else {
            Gauge::Infinite
        }
    })
}

/// `d_C((û_C, û), u) = d(û, u)`.
pub fn stacked_metric<Uc, Uh, U>(d: &InputMetric<Uh, U>) -> InputMetric<(Uc, Uh), U>
where
    Uc: Clone + Ord + 'static,
    Uh: Clone + Ord + 'static,
    U: Clone + Ord + 'static,
{
    let d = d.clone();
    InputMetric::new(move |us: &(Uc, Uh), u: &U| d.eval(&us.1, u))
}
