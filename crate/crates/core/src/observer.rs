//! Set-valued state observers driven by an observation abstraction `Š`.
//!
//! The runtime observer tracks candidate abstract states together with an
//! error bound each: the true plant state is within `b` of at least one
//! candidate `(x̌, b)` in the gauge of `Ř`. Bounds evolve as
//! `b' = κ' + β' b + λ' ď(u, ǔ)` and are rounded up to a finite menu so that
//! the reachable observer is finite.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::vec::Vec;
use core::fmt::{self, Debug};

use crate::dec::{Dec, Gauge};
use crate::error::{Error, Result};
use crate::powerset::{LiftedState, Powerset};
use crate::relation::{AcParams, GaugedRelation, InputMetric};
use crate::system::{FiniteSystem, Outputs, TransitionSystem};

/// Candidate abstract states with their error bounds. Never empty.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ObserverState<Xc: Ord> {
    cands: BTreeMap<Xc, Dec>,
}

impl<Xc: Ord + Clone> ObserverState<Xc> {
    pub fn new(cands: BTreeMap<Xc, Dec>) -> Option<Self> {
        (!cands.is_empty()).then_some(ObserverState { cands })
    }

    pub fn candidates(&self) -> &BTreeMap<Xc, Dec> {
        &self.cands
    }

    pub fn len(&self) -> usize {
        self.cands.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bound(&self, xc: &Xc) -> Option<Dec> {
        self.cands.get(xc).copied()
    }

    /// The candidate set without bounds.
    pub fn support(&self) -> LiftedState<Xc> {
        self.cands.keys().cloned().collect()
    }

    /// Largest candidate bound.
    pub fn max_bound(&self) -> Dec {
        self.cands.values().copied().max().unwrap_or(Dec::ZERO)
    }

    /// Whether some candidate's bound covers the plant state `x`.
    pub fn tracks<X, U, Uc>(&self, x: &X, rel: &GaugedRelation<X, Xc, U, Uc>) -> bool
    where
        X: Clone + Ord + Debug + 'static,
        U: Clone + Ord + Debug + 'static,
        Xc: Debug + 'static,
        Uc: Clone + Ord + Debug + 'static,
    {
        self.cands
            .iter()
            .any(|(xc, b)| rel.state_gauge(x, xc).within(*b))
    }
}

impl<Xc: Ord + Debug> Debug for ObserverState<Xc> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (xc, b)) in self.cands.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{xc:?}@{b}")?;
        }
        f.write_str("}")
    }
}

/// Rounds bounds up to a finite menu: the orbit of `κ'` under
/// `b ↦ κ' + β' b + λ' d_max` for `depth` steps, the orbit's limit, and an
/// optional larger cap. Bounds that start at `κ'` never exceed the limit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundQuantizer {
    levels: Vec<Dec>,
}

impl BoundQuantizer {
    pub fn new(params: &AcParams, d_max: Dec, depth: usize, cap: Option<Dec>) -> Result<Self> {
        let drive = params.kappa + params.lambda * d_max;
        let limit = drive
            .div_ceil(Dec::ONE - params.beta)
            .ok_or_else(|| Error::Usage("bound menu needs beta < 1".into()))?;
        let mut levels = Vec::new();
        let mut b = params.kappa;
        for _ in 0..=depth {
            if b >= limit {
                break;
            }
            levels.push(b);
            b = drive + params.beta * b;
        }
        levels.push(limit);
        if let Some(c) = cap {
            if c < limit {
                return Err(Error::Usage(format!(
                    "bound cap {c} is below the contraction limit {limit}"
                )));
            }
            if c > limit {
                levels.push(c);
            }
        }
        levels.dedup();
        Ok(BoundQuantizer { levels })
    }

    /// Single-level menu `{b}`: every bound becomes `b`.
    pub fn constant(b: Dec) -> Self {
        BoundQuantizer { levels: alloc::vec![b] }
    }

    pub fn levels(&self) -> &[Dec] {
        &self.levels
    }

    /// Smallest level `>= b`.
    pub fn quantize(&self, b: Dec) -> Result<Dec> {
        self.levels
            .iter()
            .copied()
            .find(|l| *l >= b)
            .ok_or_else(|| Error::Internal(format!("bound {b} exceeds the largest level")))
    }
}

/// Answers the plant-side existence questions an observer update needs.
pub trait OutputOracle {
    type PlantInput: Clone + Ord + Debug + 'static;
    type AbsState: Clone + Ord + Debug + 'static;
    type AbsInput: Clone + Ord + Debug + 'static;
    type Output: Clone + Ord + Debug + 'static;

    /// Outputs of initial plant states within `κ'` of `xc0`.
    fn initial_outputs(&self, xc0: &Self::AbsState) -> BTreeSet<Self::Output>;

    /// Outputs `H(x')` over plant states `x` with `(x, xc, u, uc) ∈ Ř(b)` and
    /// successors `x' ∈ r(x, u)` with `(x', xc_next) ∈ Ř_X(b_next)`.
    fn step_outputs(
        &self,
        xc: &Self::AbsState,
        b: Dec,
        u: &Self::PlantInput,
        uc: &Self::AbsInput,
        xc_next: &Self::AbsState,
        b_next: Dec,
    ) -> BTreeSet<Self::Output>;
}

/// [`OutputOracle`] for explicit plants, by enumeration.
pub struct EnumeratedOutputs<P: TransitionSystem, Xc, Uc> {
    plant: P,
    states: Vec<P::State>,
    rel: GaugedRelation<P::State, Xc, P::Input, Uc>,
}

impl<P, Xc, Uc> EnumeratedOutputs<P, Xc, Uc>
where
    P: Outputs,
    P::State: 'static,
    P::Input: 'static,
    Xc: Clone + Ord + Debug + 'static,
    Uc: Clone + Ord + Debug + 'static,
{
    pub fn new(plant: P, rel: GaugedRelation<P::State, Xc, P::Input, Uc>) -> Result<Self> {
        let states = plant
            .enumerate()
            .ok_or_else(|| Error::Capability("plant states are not enumerable".into()))?;
        Ok(EnumeratedOutputs { plant, states, rel })
    }
}

impl<P, Xc, Uc> OutputOracle for EnumeratedOutputs<P, Xc, Uc>
where
    P: Outputs,
    P::State: 'static,
    P::Input: 'static,
    P::Output: Clone + Ord + Debug + 'static,
    Xc: Clone + Ord + Debug + 'static,
    Uc: Clone + Ord + Debug + 'static,
{
    type PlantInput = P::Input;
    type AbsState = Xc;
    type AbsInput = Uc;
    type Output = P::Output;

    fn initial_outputs(&self, xc0: &Xc) -> BTreeSet<P::Output> {
        self.plant
            .initial_states()
            .iter()
            .filter(|x| self.rel.state_gauge(x, xc0).within(self.rel.kappa()))
            .map(|x| self.plant.output(x))
            .collect()
    }

    fn step_outputs(&self, xc: &Xc, b: Dec, u: &P::Input, uc: &Uc, xc_next: &Xc, b_next: Dec) -> BTreeSet<P::Output> {
        let mut out = BTreeSet::new();
        for x in &self.states {
            if !self.rel.gauge(x, xc, u, uc).within(b) {
                continue;
            }
            for x2 in self.plant.post(x, u) {
                if self.rel.state_gauge(&x2, xc_next).within(b_next) {
                    out.insert(self.plant.output(&x2));
                }
            }
        }
        out
    }
}

/// Runtime observer over an abstraction `A` and an output oracle.
pub struct Observer<A, O>
where
    A: TransitionSystem,
    O: OutputOracle<AbsState = A::State, AbsInput = A::Input>,
{
    abs: A,
    oracle: O,
    params: AcParams,
    dcheck: InputMetric<O::PlantInput, A::Input>,
    quant: BoundQuantizer,
}

type Branches<Y, Xc> = BTreeMap<Y, ObserverState<Xc>>;

impl<A, O> Observer<A, O>
where
    A: TransitionSystem,
    A::State: 'static,
    A::Input: 'static,
    O: OutputOracle<AbsState = A::State, AbsInput = A::Input>,
{
    pub fn new(
        abs: A,
        oracle: O,
        params: AcParams,
        dcheck: InputMetric<O::PlantInput, A::Input>,
        quant: BoundQuantizer,
    ) -> Self {
        Observer {
            abs,
            oracle,
            params,
            dcheck,
            quant,
        }
    }

    pub fn abstraction(&self) -> &A {
        &self.abs
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn params(&self) -> &AcParams {
        &self.params
    }

    pub fn quantizer(&self) -> &BoundQuantizer {
        &self.quant
    }

    /// Initial abstract states consistent with the first output.
    pub fn init(&self, y0: &O::Output) -> Result<ObserverState<A::State>> {
        let b0 = self.quant.quantize(self.params.kappa)?;
        let mut init = self.abs.initial_states();
        init.sort();
        let cands: BTreeMap<_, _> = init
            .into_iter()
            .filter(|xc| self.oracle.initial_outputs(xc).contains(y0))
            .map(|xc| (xc, b0))
            .collect();
        ObserverState::new(cands)
            .ok_or_else(|| Error::Inconsistent(format!("no initial abstract state explains output {y0:?}")))
    }

    /// One update after applying `u` (seen by the abstraction as `uc`) and
    /// observing `y`.
    pub fn update(
        &self,
        st: &ObserverState<A::State>,
        u: &O::PlantInput,
        uc: &A::Input,
        y: &O::Output,
    ) -> Result<ObserverState<A::State>> {
        let mut branches = self.branches(st, u, uc)?;
        branches.remove(y).ok_or_else(|| {
            Error::Inconsistent(format!("output {y:?} is impossible from {st:?} under {u:?}"))
        })
    }

    /// Successor observer state for every output that can occur.
    pub fn branches(
        &self,
        st: &ObserverState<A::State>,
        u: &O::PlantInput,
        uc: &A::Input,
    ) -> Result<Branches<O::Output, A::State>> {
        let dv = self.dcheck.eval(u, uc);
        let mut acc: BTreeMap<O::Output, BTreeMap<A::State, Dec>> = BTreeMap::new();
        for (xc, b) in st.candidates() {
            let nb = self.quant.quantize(self.params.bound(*b, dv))?;
            for xn in self.abs.post(xc, uc) {
                for y in self.oracle.step_outputs(xc, *b, u, uc, &xn, nb) {
                    let slot = acc.entry(y).or_default().entry(xn.clone()).or_insert(nb);
                    *slot = (*slot).min(nb);
                }
            }
        }
        Ok(acc
            .into_iter()
            .map(|(y, c)| (y, ObserverState { cands: c }))
            .collect())
    }

    /// Reachable observer over all outputs, where each plant input `u` is
    /// paired with the abstraction input `witness[u]`. Fails with a
    /// capability error beyond `max_states`.
    pub fn system(
        &self,
        witness: &BTreeMap<O::PlantInput, A::Input>,
        max_states: usize,
    ) -> Result<FiniteSystem<ObserverState<A::State>, A::Input>> {
        let mut ys = BTreeSet::new();
        for xc in self.abs.initial_states() {
            ys.extend(self.oracle.initial_outputs(&xc));
        }
        let mut init = Vec::new();
        for y in &ys {
            init.push(self.init(y)?);
        }
        init.sort();
        init.dedup();
        let mut seen: BTreeSet<ObserverState<A::State>> = init.iter().cloned().collect();
        let mut order = init.clone();
        let mut queue: VecDeque<ObserverState<A::State>> = init.iter().cloned().collect();
        let mut trans = Vec::new();
        while let Some(st) = queue.pop_front() {
            for (u, uc) in witness {
                for (_, next) in self.branches(&st, u, uc)? {
                    if seen.insert(next.clone()) {
                        if seen.len() > max_states {
                            return Err(Error::Capability(format!(
                                "observer exceeds {max_states} states"
                            )));
                        }
                        order.push(next.clone());
                        queue.push_back(next.clone());
                    }
                    trans.push((st.clone(), uc.clone(), next));
                }
            }
        }
        let mut inputs: Vec<A::Input> = witness.values().cloned().collect();
        inputs.sort();
        inputs.dedup();
        FiniteSystem::new(order, init, inputs, trans)
    }
}

/// `R'(ε)`: `(x, x̃, u, ǔ)` with gauge `min_{x̌ ∈ x̃} Ř(x, x̌, u, ǔ)`.
pub fn observer_relation<X, Xc, U, Uc>(
    rel: &GaugedRelation<X, Xc, U, Uc>,
) -> GaugedRelation<X, LiftedState<Xc>, U, Uc>
where
    X: Clone + Ord + Debug + 'static,
    Xc: Clone + Ord + Debug + 'static,
    U: Clone + Ord + Debug + 'static,
    Uc: Clone + Ord + Debug + 'static,
{
    let (r1, r2) = (rel.clone(), rel.clone());
    GaugedRelation::new(
        rel.kappa(),
        rel.inputs1().to_vec(),
        rel.inputs2().to_vec(),
        move |x: &X, xs: &LiftedState<Xc>, u: &U, uc: &Uc| {
            xs.iter()
                .map(|xc| r1.gauge(x, xc, u, uc))
                .min()
                .unwrap_or(Gauge::Infinite)
        },
    )
    .expect("kappa inherited from a valid relation")
    .with_state_gauge(move |x: &X, xs: &LiftedState<Xc>| {
        xs.iter()
            .map(|xc| r2.state_gauge(x, xc))
            .min()
            .unwrap_or(Gauge::Infinite)
    })
}

/// The observer over all subsets, for explicit plants: a set moves under
/// `ǔ` to any nonempty subset of the abstract successors `x̌'` of its members
/// that some plant transition `x → x'` justifies, i.e. with
/// `(x, x̌, u, ǔ) ∈ Ř(ε)` and `(x', x̌') ∈ Ř_X(κ' + β'ε + λ'ď(u, ǔ))` for
/// some `ε >= κ'`. Subsets are enumerated, so keep `Š` small.
pub fn subset_observer<P, A>(
    plant: &P,
    abs: &A,
    rel: &GaugedRelation<P::State, A::State, P::Input, A::Input>,
    params: &AcParams,
    dcheck: &InputMetric<P::Input, A::Input>,
) -> Result<Powerset<A::State, A::Input>>
where
    P: TransitionSystem + Clone + 'static,
    A: TransitionSystem + Clone + 'static,
{
    let states = plant
        .enumerate()
        .ok_or_else(|| Error::Capability("plant states are not enumerable".into()))?;
    let (plant, inner, rel, p, dcheck) = (plant.clone(), abs.clone(), rel.clone(), *params, dcheck.clone());
    let inputs = plant.inputs().to_vec();
    let justify = move |xs: &LiftedState<A::State>, uc: &A::Input| {
        let mut out = BTreeSet::new();
        for xc in xs.iter() {
            for xn in inner.post(xc, uc) {
                if out.contains(&xn) {
                    continue;
                }
                let justified = states.iter().any(|x| {
                    inputs.iter().any(|u| {
                        let Gauge::Finite(g) = rel.gauge(x, xc, u, uc) else {
                            return false;
                        };
                        let dv = dcheck.eval(u, uc);
                        plant.post(x, u).iter().any(|x2| match rel.state_gauge(x2, &xn) {
                            Gauge::Infinite => false,
                            // with β' > 0 a large enough ε covers any finite gauge
                            Gauge::Finite(s) => p.beta > Dec::ZERO || s <= p.bound(g, dv),
                        })
                    })
                });
                if justified {
                    out.insert(xn);
                }
            }
        }
        out
    };
    Ok(Powerset::new(
        abs.enumerate(),
        abs.initial_states(),
        abs.inputs().to_vec(),
        justify,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check_acsr;
    use crate::system::{FinitePlant, FiniteSystem};
    use alloc::vec;

    fn d(s: &str) -> Dec {
        s.parse().unwrap()
    }

    // Plant on 0..4 with output x / 2; abstraction keeps x / 2 exactly.
    fn setup() -> (FinitePlant<u8, char, u8>, FiniteSystem<u8, char>, GaugedRelation<u8, u8, char, char>) {
        let sys = FiniteSystem::new(
            vec![0, 1, 2, 3],
            vec![0, 1],
            vec!['a'],
            vec![(0, 'a', 2), (1, 'a', 3), (2, 'a', 0), (3, 'a', 0), (3, 'a', 1)],
        )
        .unwrap();
        let outs = (0..4).map(|x| (x, x / 2)).collect();
        let plant = FinitePlant::new(sys, &outs).unwrap();
        let abs = FiniteSystem::new(vec![0, 1], vec![0], vec!['a'], vec![(0, 'a', 1), (1, 'a', 0)]).unwrap();
        let rel = GaugedRelation::new(d("0.1"), vec!['a'], vec!['a'], |x: &u8, xc: &u8, _: &char, _: &char| {
            if x / 2 == *xc {
                Gauge::Finite(Dec::from_int((x % 2) as i64))
            } else {
                Gauge::Infinite
            }
        })
        .unwrap();
        (plant, abs, rel)
    }

    #[test]
    fn quantizer_menu_follows_the_contraction_orbit() {
        let p = AcParams::new(d("0.05"), d("0.5"), Dec::ZERO).unwrap();
        let q = BoundQuantizer::new(&p, Dec::ZERO, 2, Some(d("0.2"))).unwrap();
        assert_eq!(q.levels(), &[d("0.05"), d("0.075"), d("0.0875"), d("0.1"), d("0.2")]);
        assert_eq!(q.quantize(d("0.076")).unwrap(), d("0.0875"));
        assert!(q.quantize(d("0.3")).is_err());
        assert!(BoundQuantizer::new(&p, Dec::ZERO, 2, Some(d("0.09"))).is_err());
    }

    #[test]
    fn updates_prune_by_output_and_keep_the_plant_tracked() {
        let (plant, abs, rel) = setup();
        let p = AcParams::new(d("0.1"), d("0.5"), Dec::ZERO).unwrap();
        let q = BoundQuantizer::new(&p, Dec::ZERO, 0, Some(Dec::ONE)).unwrap();
        let oracle = EnumeratedOutputs::new(&plant, rel.clone()).unwrap();
        let obs = Observer::new(&abs, oracle, p, InputMetric::zero(), q);
        let s0 = obs.init(&0).unwrap();
        assert_eq!(s0.support(), LiftedState::singleton(0));
        assert!(obs.init(&1).is_err());
        // state 0 tracked at bound 0.1, state 1 (gauge 1) is not
        assert!(s0.tracks(&0, &rel));
        assert!(!s0.tracks(&1, &rel));
        let b = obs.branches(&s0, &'a', &'a').unwrap();
        assert_eq!(b.keys().copied().collect::<Vec<_>>(), vec![1]);
        assert!(obs.update(&s0, &'a', &'a', &0).is_err());
    }

    #[test]
    fn observer_relation_is_an_acsr_to_the_subset_observer() {
        let (plant, abs, _) = setup();
        let exact = GaugedRelation::exact(vec!['a'], vec!['a'], |x: &u8, xc: &u8, _: &char, _: &char| x / 2 == *xc);
        let p = AcParams::new(Dec::ZERO, d("0.5"), Dec::ZERO).unwrap();
        let sys = plant.system().clone();
        let tilde = subset_observer(&sys, &abs, &exact, &p, &InputMetric::zero()).unwrap();
        let r2 = observer_relation(&exact);
        let v = check_acsr(&sys, &tilde, &r2, &p, &InputMetric::zero(), None).unwrap();
        assert!(v.ok(), "{:?}", v.counterexample);
    }
}
