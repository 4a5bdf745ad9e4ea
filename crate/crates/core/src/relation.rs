//! Parameterized relations `R(ε)` stored as gauge functions, input metrics
//! and contraction parameters.
//!
//! A tuple `(x1, x2, u1, u2)` belongs to `R(ε)` iff `ε >= gauge(x1, x2, u1, u2)`,
//! so `R(ε) ⊆ R(ε')` for `ε <= ε'` holds by construction. Gauges are clamped
//! below by `κ`, the lower end of the ε-domain.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::fmt::{self, Debug};

use crate::dec::{Dec, Gauge};
use crate::error::{Error, Result};

type GaugeFn<X1, X2, U1, U2> = dyn Fn(&X1, &X2, &U1, &U2) -> Gauge;
type StateGaugeFn<X1, X2> = dyn Fn(&X1, &X2) -> Gauge;

/// An ε-parameterized relation over `X1 × X2 × U1 × U2`.
pub struct GaugedRelation<X1, X2, U1, U2> {
    kappa: Dec,
    inputs1: Vec<U1>,
    inputs2: Vec<U2>,
    gauge: Rc<GaugeFn<X1, X2, U1, U2>>,
    state_gauge: Option<Rc<StateGaugeFn<X1, X2>>>,
}

impl<X1, X2, U1: Clone, U2: Clone> Clone for GaugedRelation<X1, X2, U1, U2> {
    fn clone(&self) -> Self {
        GaugedRelation {
            kappa: self.kappa,
            inputs1: self.inputs1.clone(),
            inputs2: self.inputs2.clone(),
            gauge: self.gauge.clone(),
            state_gauge: self.state_gauge.clone(),
        }
    }
}

impl<X1, X2, U1: Debug, U2: Debug> Debug for GaugedRelation<X1, X2, U1, U2> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugedRelation")
            .field("kappa", &self.kappa)
            .field("inputs1", &self.inputs1)
            .field("inputs2", &self.inputs2)
            .finish_non_exhaustive()
    }
}

impl<X1, X2, U1, U2> GaugedRelation<X1, X2, U1, U2>
where
    X1: Clone + Ord + Debug + 'static,
    X2: Clone + Ord + Debug + 'static,
    U1: Clone + Ord + Debug + 'static,
    U2: Clone + Ord + Debug + 'static,
{
    /// `inputs1`/`inputs2` are the input sets the state projection `R_X`
    /// minimizes over.
    pub fn new(
        kappa: Dec,
        inputs1: Vec<U1>,
        inputs2: Vec<U2>,
        gauge: impl Fn(&X1, &X2, &U1, &U2) -> Gauge + 'static,
    ) -> Result<Self> {
        if kappa.is_negative() {
            return Err(Error::Invalid(format!("kappa must be nonnegative, got {kappa}")));
        }
        Ok(GaugedRelation {
            kappa,
            inputs1,
            inputs2,
            gauge: Rc::new(gauge),
            state_gauge: None,
        })
    }

    /// Exact relation (`κ = 0`, gauge in `{0, ∞}`).
    pub fn exact(
        inputs1: Vec<U1>,
        inputs2: Vec<U2>,
        related: impl Fn(&X1, &X2, &U1, &U2) -> bool + 'static,
    ) -> Self {
        Self::new(Dec::ZERO, inputs1, inputs2, move |a, b, c, d| {
            if related(a, b, c, d) {
                Gauge::Finite(Dec::ZERO)
            } else {
                Gauge::Infinite
            }
        })
        .expect("zero kappa is valid")
    }

    /// Relation given by an explicit table; absent tuples have gauge `∞`.
    pub fn from_table(
        kappa: Dec,
        inputs1: Vec<U1>,
        inputs2: Vec<U2>,
        table: BTreeMap<(X1, X2, U1, U2), Gauge>,
    ) -> Result<Self> {
        for (i, (k, g)) in table.iter().enumerate() {
            if let Gauge::Finite(d) = g {
                if d.is_negative() {
                    return Err(Error::Invalid(format!("entries[{i}]: negative gauge for {k:?}")));
                }
            }
            if !inputs1.contains(&k.2) {
                return Err(Error::Invalid(format!("entries[{i}]: unknown u1 {:?}", k.2)));
            }
            if !inputs2.contains(&k.3) {
                return Err(Error::Invalid(format!("entries[{i}]: unknown u2 {:?}", k.3)));
            }
        }
        let mut by_state: BTreeMap<(X1, X2), Gauge> = BTreeMap::new();
        for ((a, b, _, _), g) in &table {
            let e = by_state.entry((a.clone(), b.clone())).or_insert(Gauge::Infinite);
            *e = (*e).min(*g);
        }
        let mut rel = Self::new(kappa, inputs1, inputs2, move |a, b, c, d| {
            table
                .get(&(a.clone(), b.clone(), c.clone(), d.clone()))
                .copied()
                .unwrap_or(Gauge::Infinite)
        })?;
        rel.state_gauge = Some(Rc::new(move |a: &X1, b: &X2| {
            by_state
                .get(&(a.clone(), b.clone()))
                .copied()
                .unwrap_or(Gauge::Infinite)
        }));
        Ok(rel)
    }

    /// Replaces the default state projection (a minimum over all input
    /// pairs) by a closed form. The caller guarantees both agree.
    pub fn with_state_gauge(mut self, f: impl Fn(&X1, &X2) -> Gauge + 'static) -> Self {
        self.state_gauge = Some(Rc::new(f));
        self
    }

    pub fn kappa(&self) -> Dec {
        self.kappa
    }

    pub fn inputs1(&self) -> &[U1] {
        &self.inputs1
    }

    pub fn inputs2(&self) -> &[U2] {
        &self.inputs2
    }

    /// Minimal ε with `(x1, x2, u1, u2) ∈ R(ε)`; never below `κ`.
    pub fn gauge(&self, x1: &X1, x2: &X2, u1: &U1, u2: &U2) -> Gauge {
        (self.gauge)(x1, x2, u1, u2).at_least(self.kappa)
    }

    /// Membership in `R(eps)`. Fails for `eps < κ`.
    pub fn member(&self, eps: Dec, x1: &X1, x2: &X2, u1: &U1, u2: &U2) -> Result<bool> {
        self.check_eps(eps)?;
        Ok(self.gauge(x1, x2, u1, u2).within(eps))
    }

    /// `e(x1, x2)`: minimal ε with `(x1, x2) ∈ R_X(ε)`.
    pub fn state_gauge(&self, x1: &X1, x2: &X2) -> Gauge {
        if let Some(f) = &self.state_gauge {
            return f(x1, x2).at_least(self.kappa);
        }
        let mut best = Gauge::Infinite;
        for u1 in &self.inputs1 {
            for u2 in &self.inputs2 {
                best = best.min(self.gauge(x1, x2, u1, u2));
            }
        }
        best
    }

    /// Membership in the state projection `R_X(eps)`.
    pub fn state_member(&self, eps: Dec, x1: &X1, x2: &X2) -> Result<bool> {
        self.check_eps(eps)?;
        Ok(self.state_gauge(x1, x2).within(eps))
    }

    /// Finitely related tuples over the given state lists, in lexicographic
    /// order. Used for serialization.
    pub fn tabulate(&self, states1: &[X1], states2: &[X2]) -> Vec<(X1, X2, U1, U2, Dec)> {
        let mut out = Vec::new();
        for a in states1 {
            for b in states2 {
                if !self.state_gauge(a, b).is_finite() {
                    continue;
                }
                for c in &self.inputs1 {
                    for d in &self.inputs2 {
                        if let Gauge::Finite(g) = self.gauge(a, b, c, d) {
                            out.push((a.clone(), b.clone(), c.clone(), d.clone(), g));
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    fn check_eps(&self, eps: Dec) -> Result<()> {
        if eps < self.kappa {
            return Err(Error::Domain(format!(
                "epsilon {eps} below the relation's lower bound {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// A map `d: U1 × U2 → ℝ≥0` weighting input mismatch.
pub struct InputMetric<U1, U2> {
    f: Rc<dyn Fn(&U1, &U2) -> Dec>,
}

impl<U1, U2> Clone for InputMetric<U1, U2> {
    fn clone(&self) -> Self {
        InputMetric { f: self.f.clone() }
    }
}

impl<U1, U2> Debug for InputMetric<U1, U2> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("InputMetric")
    }
}

impl<U1: Clone + Ord + 'static, U2: Clone + Ord + 'static> InputMetric<U1, U2> {
    pub fn new(f: impl Fn(&U1, &U2) -> Dec + 'static) -> Self {
        InputMetric { f: Rc::new(f) }
    }

    pub fn zero() -> Self {
        Self::new(|_, _| Dec::ZERO)
    }

    /// Table-backed metric; absent pairs are 0. Rejects negative entries.
    pub fn from_table(table: BTreeMap<(U1, U2), Dec>) -> Result<Self> {
        if let Some(((_, _), v)) = table.iter().find(|(_, v)| v.is_negative()) {
            return Err(Error::Invalid(format!("metric value {v} is negative")));
        }
        Ok(Self::new(move |a, b| {
            table.get(&(a.clone(), b.clone())).copied().unwrap_or(Dec::ZERO)
        }))
    }

    pub fn eval(&self, u1: &U1, u2: &U2) -> Dec {
        (self.f)(u1, u2)
    }
}

/// Contraction parameters `(κ, β, λ)` with `κ, λ >= 0` and `0 <= β < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AcParams {
    pub kappa: Dec,
    pub beta: Dec,
    pub lambda: Dec,
}

impl AcParams {
    pub fn new(kappa: Dec, beta: Dec, lambda: Dec) -> Result<Self> {
        if kappa.is_negative() || lambda.is_negative() {
            return Err(Error::Usage(format!(
                "kappa and lambda must be nonnegative (got {kappa}, {lambda})"
            )));
        }
        if beta.is_negative() || beta >= Dec::ONE {
            return Err(Error::Usage(format!("beta must lie in [0, 1), got {beta}")));
        }
        Ok(AcParams { kappa, beta, lambda })
    }

    /// Parameters of an exact (alternating) simulation relation.
    pub const fn exact() -> Self {
        AcParams {
            kappa: Dec::ZERO,
            beta: Dec::ZERO,
            lambda: Dec::ZERO,
        }
    }

    /// `κ + β·eps + λ·d`.
    pub fn bound(&self, eps: Dec, d: Dec) -> Dec {
        self.kappa + self.beta * eps + self.lambda * d
    }

    /// `(κ + κ', max{β, β'}, max{λ, λ'})`.
    pub fn composite(&self, other: &AcParams) -> AcParams {
        AcParams {
            kappa: self.kappa + other.kappa,
            beta: self.beta.max(other.beta),
            lambda: self.lambda.max(other.lambda),
        }
    }
}

impl fmt::Display for AcParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.kappa, self.beta, self.lambda)
    }
}

/// Quantifier structure of a composed gauge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessMode {
    /// `∃ middle state, ∃ middle input`: the composite gauge is the minimum
    /// of component sums.
    Existential,
    /// `∀ right member ∃ middle ∃ left member`, which needs set-valued
    /// states; see [`crate::lift::lift_relation_r`].
    ForallExists,
}

/// Chains `R1 ⊆ X1 × X2 × U1 × U2` and `R2 ⊆ X2 × X3 × U2 × U3` through the
/// enumerated `middle` states. The result has `κ = κ1 + κ2`.
pub fn compose_gauges<X1, X2, X3, U1, U2, U3>(
    r1: &GaugedRelation<X1, X2, U1, U2>,
    r2: &GaugedRelation<X2, X3, U2, U3>,
    middle: Vec<X2>,
    mode: WitnessMode,
) -> Result<GaugedRelation<X1, X3, U1, U3>>
where
    X1: Clone + Ord + Debug + 'static,
    X2: Clone + Ord + Debug + 'static,
    X3: Clone + Ord + Debug + 'static,
    U1: Clone + Ord + Debug + 'static,
    U2: Clone + Ord + Debug + 'static,
    U3: Clone + Ord + Debug + 'static,
{
    if mode == WitnessMode::ForallExists {
        return Err(Error::Usage(
            "forall-exists composition needs set-valued states; use lift_relation_r".into(),
        ));
    }
    if r1.inputs2() != r2.inputs1() {
        return Err(Error::Usage("middle input sets of the two relations differ".into()));
    }
    let a = r1.clone();
    let b = r2.clone();
    GaugedRelation::new(
        r1.kappa() + r2.kappa(),
        r1.inputs1().to_vec(),
        r2.inputs2().to_vec(),
        move |x1, x3, u1, u3| {
            let mut best = Gauge::Infinite;
            for x2 in &middle {
                for u2 in a.inputs2() {
                    let g1 = a.gauge(x1, x2, u1, u2);
                    if g1 >= best {
                        continue;
                    }
                    best = best.min(g1 + b.gauge(x2, x3, u2, u3));
                }
            }
            best
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn d(s: &str) -> Dec {
        s.parse().unwrap()
    }

    fn dist_rel(kappa: &str) -> GaugedRelation<i64, i64, u8, u8> {
        GaugedRelation::new(d(kappa), vec![0, 1], vec![0, 1], |a: &i64, b: &i64, u: &u8, v: &u8| {
            if u != v {
                return Gauge::Infinite;
            }
            Gauge::Finite(Dec::from_int((a - b).abs()))
        })
        .unwrap()
    }

    #[test]
    fn gauge_is_clamped_to_kappa() {
        let r = dist_rel("0.5");
        assert_eq!(r.gauge(&3, &3, &0, &0), Gauge::Finite(d("0.5")));
        assert_eq!(r.gauge(&3, &5, &0, &0), Gauge::Finite(d("2")));
        assert_eq!(r.gauge(&3, &5, &0, &1), Gauge::Infinite);
    }

    #[test]
    fn member_rejects_eps_below_kappa() {
        let r = dist_rel("0.5");
        assert!(matches!(r.member(d("0.4"), &0, &0, &0, &0), Err(Error::Domain(_))));
        assert!(r.member(d("0.5"), &0, &0, &0, &0).unwrap());
        assert!(!r.member(d("1.5"), &0, &2, &0, &0).unwrap());
        assert!(r.member(d("2"), &0, &2, &0, &0).unwrap());
    }

    #[test]
    fn state_gauge_minimizes_over_input_pairs() {
        let r = GaugedRelation::new(Dec::ZERO, vec![0u8, 1], vec![0u8, 1], |_: &u8, _: &u8, u: &u8, v: &u8| {
            Gauge::Finite(Dec::from_int(3 - (*u as i64) - (*v as i64)))
        })
        .unwrap();
        assert_eq!(r.state_gauge(&0, &0), Gauge::Finite(Dec::from_int(1)));
    }

    #[test]
    fn table_relation_defaults_to_infinity() {
        let mut t = BTreeMap::new();
        t.insert((1u8, 2u8, 'a', 'b'), Gauge::Finite(d("0.2")));
        let r = GaugedRelation::from_table(d("0.1"), vec!['a'], vec!['b'], t).unwrap();
        assert_eq!(r.gauge(&1, &2, &'a', &'b'), Gauge::Finite(d("0.2")));
        assert_eq!(r.state_gauge(&1, &2), Gauge::Finite(d("0.2")));
        assert_eq!(r.state_gauge(&2, &2), Gauge::Infinite);
        let mut bad = BTreeMap::new();
        bad.insert((1u8, 2u8, 'z', 'b'), Gauge::Finite(d("0.2")));
        assert!(GaugedRelation::from_table(d("0.1"), vec!['a'], vec!['b'], bad).is_err());
    }

    #[test]
    fn composition_sums_best_witnesses() {
        let r1 = dist_rel("0.5");
        let r2 = dist_rel("1");
        let c = compose_gauges(&r1, &r2, vec![0, 1, 2, 3], WitnessMode::Existential).unwrap();
        assert_eq!(c.kappa(), d("1.5"));
        // 0 -> 1 -> 3 costs max(0.5,1) + max(1,2) = 3; 0 -> 2 -> 3 costs 2 + 1 = 3
        assert_eq!(c.gauge(&0, &3, &0, &0), Gauge::Finite(Dec::from_int(3)));
        assert_eq!(c.gauge(&0, &0, &0, &0), Gauge::Finite(d("1.5")));
        assert_eq!(c.gauge(&0, &3, &0, &1), Gauge::Infinite);
        let e = compose_gauges(&r1, &r2, vec![], WitnessMode::ForallExists).unwrap_err();
        assert!(matches!(e, Error::Usage(_)));
    }

    #[test]
    fn params_validation_and_composite() {
        assert!(AcParams::new(d("0.1"), Dec::ONE, Dec::ZERO).is_err());
        assert!(AcParams::new(d("-0.1"), Dec::ZERO, Dec::ZERO).is_err());
        let p = AcParams::new(d("0.005"), d("0.5"), Dec::ZERO).unwrap();
        let q = AcParams::new(d("0.05"), d("0.5"), Dec::ZERO).unwrap();
        let c = p.composite(&q);
        assert_eq!((c.kappa, c.beta, c.lambda), (d("0.055"), d("0.5"), Dec::ZERO));
        assert_eq!(p.bound(d("0.1"), d("3")), d("0.055"));
    }
}
