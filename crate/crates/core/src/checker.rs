//! Deciding whether a gauged relation is a `(κ, β, λ)`-contractive
//! (alternating) simulation relation, plus the side conditions used by the
//! output-feedback synthesis.
//!
//! The step condition quantifies over every `ε >= κ`. Both its premise
//! membership and the contracted bound `κ + βε + λd` are monotone in `ε`, so
//! it suffices to check each related pair at its own minimal level
//! `max(κ, e(x1, x2))`: a witness found there works verbatim for all larger ε.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::dec::{Dec, Gauge};
use crate::error::{Error, Result};
use crate::relation::{AcParams, GaugedRelation, InputMetric};
use crate::system::{Outputs, TransitionSystem};

/// Which step condition to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    /// `∀x1' ∃x2'`: the right system simulates the left one.
    Simulation,
    /// `∀x2' ∃x1'`: the left system can steer the right one.
    Alternating,
    /// Both of the above with one shared right input.
    Bisimulation,
}

/// The first failing condition found by a check.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Counterexample<X1, X2, U1> {
    /// No initial right state within `κ` of this initial left state.
    Init { x1: X1 },
    /// No admissible right input for `u1` at the pair `(x1, x2)` at level `eps`.
    Step { x1: X1, x2: X2, u1: U1, eps: Dec },
}

/// Outcome of a relation check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict<X1, X2, U1> {
    pub counterexample: Option<Counterexample<X1, X2, U1>>,
    /// `true` when pairs were drawn from a sampling adapter rather than
    /// enumerated exhaustively.
    pub sampled: bool,
    pub pairs_checked: usize,
}

impl<X1, X2, U1> Verdict<X1, X2, U1> {
    pub fn ok(&self) -> bool {
        self.counterexample.is_none()
    }
}

type Rel<S1, S2> = GaugedRelation<
    <S1 as TransitionSystem>::State,
    <S2 as TransitionSystem>::State,
    <S1 as TransitionSystem>::Input,
    <S2 as TransitionSystem>::Input,
>;
type Metric<S1, S2> = InputMetric<<S1 as TransitionSystem>::Input, <S2 as TransitionSystem>::Input>;
type Pairs<S1, S2> = Vec<(<S1 as TransitionSystem>::State, <S2 as TransitionSystem>::State)>;

/// Checks Def.-style acSR conditions from `s1` to `s2`.
///
/// `pairs = None` enumerates every finitely related pair and needs both
/// systems to be explicit; otherwise only the given sample is checked and the
/// verdict is flagged as sampled.
pub fn check_acsr<S1, S2>(
    s1: &S1,
    s2: &S2,
    r: &Rel<S1, S2>,
    p: &AcParams,
    d: &Metric<S1, S2>,
    pairs: Option<Pairs<S1, S2>>,
) -> Result<Verdict<S1::State, S2::State, S1::Input>>
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    check_relation(Kind::Simulation, s1, s2, r, p, d, pairs)
}

/// Checks acASR conditions from `s1` to `s2`; see [`check_acsr`].
pub fn check_acasr<S1, S2>(
    s1: &S1,
    s2: &S2,
    r: &Rel<S1, S2>,
    p: &AcParams,
    d: &Metric<S1, S2>,
    pairs: Option<Pairs<S1, S2>>,
) -> Result<Verdict<S1::State, S2::State, S1::Input>>
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    check_relation(Kind::Alternating, s1, s2, r, p, d, pairs)
}

pub fn check_relation<S1, S2>(
    kind: Kind,
    s1: &S1,
    s2: &S2,
    r: &Rel<S1, S2>,
    p: &AcParams,
    d: &Metric<S1, S2>,
    pairs: Option<Pairs<S1, S2>>,
) -> Result<Verdict<S1::State, S2::State, S1::Input>>
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    let sampled = pairs.is_some();
    let pairs = match pairs {
        Some(v) => v,
        None => related_pairs(s1, s2, r)?,
    };

    let mut init: Vec<S1::State> = s1.initial_states();
    init.sort();
    for x1 in init {
        if !init_holds(s2, r, p, &x1) {
            return Ok(Verdict {
                counterexample: Some(Counterexample::Init { x1 }),
                sampled,
                pairs_checked: 0,
            });
        }
    }

    let mut worst: Option<Counterexample<S1::State, S2::State, S1::Input>> = None;
    let mut checked = 0;
    for (x1, x2) in pairs {
        let e = match r.state_gauge(&x1, &x2) {
            Gauge::Finite(e) => e.max(p.kappa),
            Gauge::Infinite => continue,
        };
        checked += 1;
        if let Some(u1) = first_failing_input(kind, s1, s2, r, p, d, &x1, &x2, e) {
            let cand = Counterexample::Step { x1, x2, u1, eps: e };
            if worst.as_ref().is_none_or(|w| cand < *w) {
                worst = Some(cand);
            }
        }
    }
    Ok(Verdict {
        counterexample: worst,
        sampled,
        pairs_checked: checked,
    })
}

/// All pairs of an explicit product with finite state gauge.
pub fn related_pairs<S1, S2>(s1: &S1, s2: &S2, r: &Rel<S1, S2>) -> Result<Pairs<S1, S2>>
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    let (Some(xs1), Some(xs2)) = (s1.enumerate(), s2.enumerate()) else {
        return Err(Error::Capability(
            "exhaustive check needs explicit systems; supply sampled pairs".into(),
        ));
    };
    let mut out = Vec::new();
    for a in &xs1 {
        for b in &xs2 {
            if r.state_gauge(a, b).is_finite() {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    Ok(out)
}

/// Initial condition for one left initial state.
pub fn init_holds<S2, X1, U1>(
    s2: &S2,
    r: &GaugedRelation<X1, S2::State, U1, S2::Input>,
    p: &AcParams,
    x1: &X1,
) -> bool
where
    S2: TransitionSystem,
    X1: Clone + Ord + Debug + 'static,
    U1: Clone + Ord + Debug + 'static,
    S2::State: 'static,
    S2::Input: 'static,
{
    s2.initial_states()
        .iter()
        .any(|x2| r.state_gauge(x1, x2).within(p.kappa))
}

/// Step condition for one pair, one left input and one level `eps`.
/// Vacuously true when the pair is not in `R_X(eps)` or `u1` is disabled.
#[allow(clippy::too_many_arguments)]
pub fn step_holds<S1, S2>(
    kind: Kind,
    s1: &S1,
    s2: &S2,
    r: &Rel<S1, S2>,
    p: &AcParams,
    d: &Metric<S1, S2>,
    x1: &S1::State,
    x2: &S2::State,
    u1: &S1::Input,
    eps: Dec,
) -> bool
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    if !r.state_gauge(x1, x2).within(eps) {
        return true;
    }
    let post1 = s1.post(x1, u1);
    if post1.is_empty() {
        return true;
    }
    input_admissible::<S1, S2>(kind, s2, r, p, d, x1, x2, u1, &post1, eps).is_some()
}

/// Re-evaluates the single condition a counterexample names.
#[allow(clippy::too_many_arguments)]
pub fn replay<S1, S2>(
    kind: Kind,
    s1: &S1,
    s2: &S2,
    r: &Rel<S1, S2>,
    p: &AcParams,
    d: &Metric<S1, S2>,
    cex: &Counterexample<S1::State, S2::State, S1::Input>,
) -> bool
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    match cex {
        Counterexample::Init { x1 } => init_holds(s2, r, p, x1),
        Counterexample::Step { x1, x2, u1, eps } => {
            step_holds(kind, s1, s2, r, p, d, x1, x2, u1, *eps)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn first_failing_input<S1, S2>(
    kind: Kind,
    s1: &S1,
    s2: &S2,
    r: &Rel<S1, S2>,
    p: &AcParams,
    d: &Metric<S1, S2>,
    x1: &S1::State,
    x2: &S2::State,
    eps: Dec,
) -> Option<S1::Input>
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    let mut inputs = s1.inputs().to_vec();
    inputs.sort();
    for u1 in inputs {
        let post1 = s1.post(x1, &u1);
        if post1.is_empty() {
            continue;
        }
        if input_admissible::<S1, S2>(kind, s2, r, p, d, x1, x2, &u1, &post1, eps).is_none() {
            return Some(u1);
        }
    }
    None
}

/// Smallest right input that discharges the step condition, if any.
#[allow(clippy::too_many_arguments)]
fn input_admissible<S1, S2>(
    kind: Kind,
    s2: &S2,
    r: &Rel<S1, S2>,
    p: &AcParams,
    d: &Metric<S1, S2>,
    x1: &S1::State,
    x2: &S2::State,
    u1: &S1::Input,
    post1: &[S1::State],
    eps: Dec,
) -> Option<S2::Input>
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    let mut inputs = s2.inputs().to_vec();
    inputs.sort();
    'inputs: for u2 in inputs {
        if !r.gauge(x1, x2, u1, &u2).within(eps) {
            continue;
        }
        let post2 = s2.post(x2, &u2);
        if post2.is_empty() {
            continue;
        }
        let bound = p.bound(eps, d.eval(u1, &u2));
        if kind != Kind::Alternating {
            for a in post1 {
                if !post2.iter().any(|b| r.state_gauge(a, b).within(bound)) {
                    continue 'inputs;
                }
            }
        }
        if kind != Kind::Simulation {
            for b in &post2 {
                if !post1.iter().any(|a| r.state_gauge(a, b).within(bound)) {
                    continue 'inputs;
                }
            }
        }
        return Some(u2);
    }
    None
}

/// Result of a uniform-witness condition: either one right input per left
/// input that works for every related pair, or a left input for which each
/// candidate is blocked by some pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessVerdict<X1, X2, U1, U2> {
    pub witnesses: BTreeMap<U1, U2>,
    /// The failing left input and, per rejected right input, the smallest
    /// pair that rules it out.
    pub failure: Option<(U1, Vec<(U2, X1, X2)>)>,
    pub sampled: bool,
}

impl<X1, X2, U1, U2> WitnessVerdict<X1, X2, U1, U2> {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// `∀u1 ∃u2 ∀(x1, x2) ∈ R_X(ε): u1 ∈ U1(x1) ⇒ (x1, x2, u1, u2) ∈ R(ε)`.
///
/// This is the common shape of the controller-input condition on `R̂_C`,
/// and the input-matching conditions on `R(ε)` and `Ř(ε)`. Each pair is
/// tested at its own minimal level, which yields witnesses independent of
/// both the state pair and ε.
pub fn check_uniform_witness<S1, X2, U2>(
    s1: &S1,
    r: &GaugedRelation<S1::State, X2, S1::Input, U2>,
    pairs: Vec<(S1::State, X2)>,
    sampled: bool,
) -> WitnessVerdict<S1::State, X2, S1::Input, U2>
where
    S1: TransitionSystem,
    S1::State: 'static,
    S1::Input: 'static,
    X2: Clone + Ord + Debug + 'static,
    U2: Clone + Ord + Debug + 'static,
{
    let mut pairs: Vec<(S1::State, X2, Dec)> = pairs
        .into_iter()
        .filter_map(|(a, b)| r.state_gauge(&a, &b).finite().map(|e| (a, b, e)))
        .collect();
    pairs.sort();
    let mut u1s = r.inputs1().to_vec();
    u1s.sort();
    let mut u2s = r.inputs2().to_vec();
    u2s.sort();
    let mut witnesses = BTreeMap::new();
    for u1 in u1s {
        let relevant: Vec<&(S1::State, X2, Dec)> = pairs
            .iter()
            .filter(|(a, _, _)| !s1.post(a, &u1).is_empty())
            .collect();
        let mut blockers = Vec::new();
        let mut found = None;
        for u2 in &u2s {
            match relevant
                .iter()
                .find(|(a, b, e)| !r.gauge(a, b, &u1, u2).within(*e))
            {
                Some((a, b, _)) => blockers.push((u2.clone(), a.clone(), b.clone())),
                None => {
                    found = Some(u2.clone());
                    break;
                }
            }
        }
        match found {
            Some(u2) => {
                witnesses.insert(u1, u2);
            }
            None => {
                return WitnessVerdict {
                    witnesses,
                    failure: Some((u1, blockers)),
                    sampled,
                }
            }
        }
    }
    WitnessVerdict {
        witnesses,
        failure: None,
        sampled,
    }
}

/// `d̄(û, ǔ) >= d(û, u) + ď(u, ǔ)` for all input triples; returns the
/// smallest violating triple.
pub fn check_metric_bound<A, B, C>(
    ua: &[A],
    ub: &[B],
    uc: &[C],
    d: &InputMetric<A, B>,
    dcheck: &InputMetric<B, C>,
    dbar: &InputMetric<A, C>,
) -> Option<(A, B, C)>
where
    A: Clone + Ord + 'static,
    B: Clone + Ord + 'static,
    C: Clone + Ord + 'static,
{
    let mut bad = Vec::new();
    for a in ua {
        for b in ub {
            for c in uc {
                if dbar.eval(a, c) < d.eval(a, b) + dcheck.eval(b, c) {
                    bad.push((a.clone(), b.clone(), c.clone()));
                }
            }
        }
    }
    bad.into_iter().min()
}

/// Two plant states related to the same abstract state at level `eps` but
/// with different outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputClash<X, Xc> {
    pub abstract_state: Xc,
    pub first: X,
    pub second: X,
}

/// Output consistency at level `eps` over the given `(x, x̌)` pairs.
/// Returns the lexicographically smallest clash.
pub fn check_output_consistency<P, Xc, Uc>(
    plant: &P,
    r: &GaugedRelation<P::State, Xc, P::Input, Uc>,
    eps: Dec,
    pairs: Vec<(P::State, Xc)>,
) -> Result<Option<OutputClash<P::State, Xc>>>
where
    P: Outputs,
    P::State: 'static,
    P::Input: 'static,
    Xc: Clone + Ord + Debug + 'static,
    Uc: Clone + Ord + Debug + 'static,
{
    if eps < r.kappa() {
        return Err(Error::Domain(format!("epsilon {eps} below kappa {}", r.kappa())));
    }
    let mut groups: BTreeMap<Xc, BTreeSet<P::State>> = BTreeMap::new();
    for (x, xc) in pairs {
        if r.state_gauge(&x, &xc).within(eps) {
            groups.entry(xc).or_default().insert(x);
        }
    }
    for (xc, members) in groups {
        let members: Vec<P::State> = members.into_iter().collect();
        let ys: Vec<P::Output> = members.iter().map(|x| plant.output(x)).collect();
        for i in 0..members.len() {
            if let Some(j) = (i + 1..members.len()).find(|&j| ys[j] != ys[i]) {
                return Ok(Some(OutputClash {
                    abstract_state: xc,
                    first: members[i].clone(),
                    second: members[j].clone(),
                }));
            }
        }
    }
    Ok(None)
}

/// Gauge table keyed by `(x1, x2, u1, u2)`.
pub type GaugeTable<X1, X2, U1, U2> = BTreeMap<(X1, X2, U1, U2), Dec>;

/// Largest sub-relation of a finite candidate table satisfying the step
/// condition for the given kind and parameters.
///
/// Pairs failing the step condition lose their lowest-gauge tuples, which
/// raises their level; this repeats until every remaining pair passes.
/// Removal only ever raises gauges, so the result is the greatest such
/// fixpoint below the candidate. The initial condition is not enforced.
pub fn maximal_relation<S1, S2>(
    kind: Kind,
    s1: &S1,
    s2: &S2,
    candidate: GaugeTable<S1::State, S2::State, S1::Input, S2::Input>,
    p: &AcParams,
    d: &Metric<S1, S2>,
) -> Result<GaugeTable<S1::State, S2::State, S1::Input, S2::Input>>
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    let mut table: GaugeTable<_, _, _, _> = candidate
        .into_iter()
        .map(|(k, g)| (k, g.max(p.kappa)))
        .collect();
    loop {
        let r = relation_from(&table, s1, s2, p.kappa)?;
        let pairs: BTreeSet<(S1::State, S2::State)> =
            table.keys().map(|(a, b, _, _)| (a.clone(), b.clone())).collect();
        let mut removed = false;
        for (x1, x2) in pairs {
            let Gauge::Finite(e) = r.state_gauge(&x1, &x2) else {
                continue;
            };
            if first_failing_input(kind, s1, s2, &r, p, d, &x1, &x2, e).is_some() {
                table.retain(|(a, b, _, _), g| !(*a == x1 && *b == x2 && *g == e));
                removed = true;
            }
        }
        if !removed {
            return Ok(table);
        }
    }
}

/// Wraps a gauge table as a relation over the systems' input sets.
pub fn relation_from<S1, S2>(
    table: &GaugeTable<S1::State, S2::State, S1::Input, S2::Input>,
    s1: &S1,
    s2: &S2,
    kappa: Dec,
) -> Result<Rel<S1, S2>>
where
    S1: TransitionSystem,
    S2: TransitionSystem,
    S1::State: 'static,
    S2::State: 'static,
    S1::Input: 'static,
    S2::Input: 'static,
{
    let t = table
        .iter()
        .map(|(k, g)| (k.clone(), Gauge::Finite(*g)))
        .collect();
    GaugedRelation::from_table(kappa, s1.inputs().to_vec(), s2.inputs().to_vec(), t)
}
