//! Random small instances of the full pipeline: specification, control
//! abstraction, plant with outputs and observation abstraction over one
//! input alphabet, with relations that pass their checks.
//!
//! All four systems refine a common random base system: each base state is
//! split into copies, and a copy moves to some copies of every base
//! successor. Pairs of copies of one base state are therefore mutually
//! simulating, which makes valid relations common. Candidate gauge tables
//! over same-base pairs (plus a few random ones) are pruned to their
//! largest valid sub-table, and instances whose initial conditions then
//! fail are discarded.
//!
//! Relations are identity on inputs and their gauge does not depend on the
//! input. By default the observation relation is a bisimulation and the
//! plant's initial set is closed under "related to an initial state of both
//! abstractions"; [`Options`] can relax either.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checker::{check_acasr, check_acsr, check_relation, maximal_relation, relation_from, GaugeTable, Kind, Verdict};
use crate::compose::{compose, stacked_metric, stacked_relation};
use crate::dec::Dec;
use crate::error::{Error, Result};
use crate::lift::{lift_relation_r, lift_relation_rc, closed_loop_metric, closed_loop_relation, EnumeratedChain};
use crate::observer::{subset_observer, observer_relation};
use crate::powerset::lift;
use crate::relation::{AcParams, GaugedRelation, InputMetric};
use crate::system::{FinitePlant, FiniteSystem, TransitionSystem};

pub type Sys = FiniteSystem<u8, u8>;
pub type Rel = GaugedRelation<u8, u8, u8, u8>;
pub type Metric = InputMetric<u8, u8>;

/// Shape of generated instances.
#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub states: usize,
    pub inputs: usize,
    pub base_states: usize,
    /// Condition the observation relation is pruned to.
    pub observer_kind: Kind,
    /// Add chain-related plant states to the initial set.
    pub close_initial: bool,
    /// Every base state enables every input, hence so does every state of
    /// every system.
    pub total: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            states: 5,
            inputs: 3,
            base_states: 3,
            observer_kind: Kind::Bisimulation,
            close_initial: true,
            total: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Toy {
    pub spec: Sys,
    pub cabs: Sys,
    pub plant: FinitePlant<u8, u8, u8>,
    pub oabs: Sys,
    /// Exact, from `spec` to `cabs`.
    pub rc: Rel,
    /// From `cabs` to the plant, alternating.
    pub r: Rel,
    /// From the plant to `oabs`.
    pub rcheck: Rel,
    pub params: AcParams,
    pub params_check: AcParams,
    pub d: Metric,
    pub dcheck: Metric,
    /// `d̄(û, ǔ) = max_u d(û, u) + ď(u, ǔ)`.
    pub dbar: Metric,
}

impl Toy {
    pub fn plant_system(&self) -> &Sys {
        self.plant.system()
    }

    pub fn composite(&self) -> AcParams {
        self.params.composite(&self.params_check)
    }

    pub fn inputs(&self) -> Vec<u8> {
        self.spec.inputs().to_vec()
    }
}

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn below(&mut self, n: usize) -> usize {
        (self.rng.next_u32() as usize) % n
    }

    fn chance(&mut self, num: u32, den: u32) -> bool {
        self.rng.next_u32() % den < num
    }

    fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        xs[self.below(xs.len())]
    }

    /// Nonempty random subset.
    fn subset<T: Copy>(&mut self, xs: &[T]) -> Vec<T> {
        loop {
            let s: Vec<T> = xs.iter().copied().filter(|_| self.chance(1, 2)).collect();
            if !s.is_empty() {
                return s;
            }
        }
    }

    fn level(&mut self, steps: &[i64]) -> Dec {
        Dec::new(self.pick(steps), 1)
    }
}

/// Edge list form, kept so initial sets can be changed afterwards.
#[derive(Clone)]
struct Raw {
    states: Vec<u8>,
    initial: Vec<u8>,
    edges: Vec<(u8, u8, u8)>,
    base: Vec<usize>,
}

impl Raw {
    fn build(&self, inputs: &[u8]) -> Result<Sys> {
        FiniteSystem::new(self.states.clone(), self.initial.clone(), inputs.to_vec(), self.edges.clone())
    }
}

fn base_system(g: &mut Gen, n: usize, inputs: &[u8], total: bool) -> (Vec<u8>, Vec<(u8, u8, u8)>) {
    let states: Vec<u8> = (0..n as u8).collect();
    let initial = g.subset(&states);
    let mut edges = Vec::new();
    for &x in &states {
        for &u in inputs {
            if total || g.chance(3, 4) {
                for y in g.subset(&states) {
                    edges.push((x, u, y));
                }
            }
        }
    }
    (initial, edges)
}

fn refine(g: &mut Gen, n_base: usize, base_init: &[u8], base_edges: &[(u8, u8, u8)], max: usize) -> Raw {
    let mut copies = alloc::vec![1usize; n_base];
    let mut total = n_base;
    while total < max && g.chance(2, 3) {
        let b = g.below(n_base);
        copies[b] += 1;
        total += 1;
    }
    let mut of_base: Vec<Vec<u8>> = Vec::new();
    let mut base = Vec::new();
    let mut next = 0u8;
    for (b, &k) in copies.iter().enumerate() {
        of_base.push((next..next + k as u8).collect());
        for _ in 0..k {
            base.push(b);
        }
        next += k as u8;
    }
    let states: Vec<u8> = (0..next).collect();
    let mut initial = Vec::new();
    for &b in base_init {
        initial.extend(g.subset(&of_base[b as usize]));
    }
    let mut edges = Vec::new();
    for &c in &states {
        let b = base[c as usize] as u8;
        let mut by_input: BTreeMap<u8, Vec<u8>> = BTreeMap::new();
        for &(x, u, y) in base_edges {
            if x == b {
                by_input.entry(u).or_default().push(y);
            }
        }
        for (u, succ) in by_input {
            for y in succ {
                for t in g.subset(&of_base[y as usize]) {
                    edges.push((c, u, t));
                }
            }
            if g.chance(1, 10) {
                edges.push((c, u, g.pick(&states)));
            }
        }
    }
    edges.sort();
    edges.dedup();
    Raw {
        states,
        initial,
        edges,
        base,
    }
}

fn candidate(g: &mut Gen, a: &Raw, b: &Raw, inputs: &[u8], kappa: Dec, exact: bool) -> GaugeTable<u8, u8, u8, u8> {
    let mut t = BTreeMap::new();
    for &x in &a.states {
        for &y in &b.states {
            let same = a.base[x as usize] == b.base[y as usize];
            if !(same || g.chance(1, 8)) {
                continue;
            }
            let gauge = if exact { Dec::ZERO } else { kappa + g.level(&[0, 0, 1, 2, 3]) };
            for &u in inputs {
                t.insert((x, y, u, u), gauge);
            }
        }
    }
    t
}

fn metric(g: &mut Gen, inputs: &[u8]) -> BTreeMap<(u8, u8), Dec> {
    let mut t = BTreeMap::new();
    for &a in inputs {
        for &b in inputs {
            t.insert((a, b), g.level(&[0, 0, 1, 2]));
        }
    }
    t
}

fn params(g: &mut Gen) -> Result<AcParams> {
    let kappa = g.level(&[0, 1, 2]);
    let beta = Dec::new(g.pick(&[0, 25, 50]), 2);
    let lambda = Dec::new(g.pick(&[0, 5, 10]), 1);
    AcParams::new(kappa, beta, lambda)
}

fn attempt(g: &mut Gen, opt: Options) -> Result<Option<Toy>> {
    let m = 1 + g.below(opt.inputs);
    let inputs: Vec<u8> = (0..m as u8).collect();
    let nb = 1 + g.below(opt.base_states.min(opt.states));
    let (binit, bedges) = base_system(g, nb, &inputs, opt.total);
    let spec = refine(g, nb, &binit, &bedges, opt.states);
    let cabs = refine(g, nb, &binit, &bedges, opt.states);
    let mut plant = refine(g, nb, &binit, &bedges, opt.states);
    let oabs = refine(g, nb, &binit, &bedges, opt.states);

    let (p, pc) = (params(g)?, params(g)?);
    let (dt, dct) = (metric(g, &inputs), metric(g, &inputs));
    let mut dbt = BTreeMap::new();
    for &a in &inputs {
        for &b in &inputs {
            let worst = inputs.iter().map(|u| dt[&(a, *u)] + dct[&(*u, b)]).max().unwrap_or(Dec::ZERO);
            dbt.insert((a, b), worst);
        }
    }
    let d = InputMetric::from_table(dt)?;
    let dcheck = InputMetric::from_table(dct)?;
    let dbar = InputMetric::from_table(dbt)?;

    let spec_s = spec.build(&inputs)?;
    let cabs_s = cabs.build(&inputs)?;
    let oabs_s = oabs.build(&inputs)?;
    let plant_s0 = plant.build(&inputs)?;

    let ex = AcParams::exact();
    let t = candidate(g, &spec, &cabs, &inputs, Dec::ZERO, true);
    let t = maximal_relation(Kind::Alternating, &spec_s, &cabs_s, t, &ex, &InputMetric::zero())?;
    let rc = relation_from(&t, &spec_s, &cabs_s, Dec::ZERO)?;

    let t = candidate(g, &cabs, &plant, &inputs, p.kappa, false);
    let t = maximal_relation(Kind::Alternating, &cabs_s, &plant_s0, t, &p, &d)?;
    let r = relation_from(&t, &cabs_s, &plant_s0, p.kappa)?;

    let t = candidate(g, &plant, &oabs, &inputs, pc.kappa, false);
    let t = maximal_relation(opt.observer_kind, &plant_s0, &oabs_s, t, &pc, &dcheck)?;
    let rcheck = relation_from(&t, &plant_s0, &oabs_s, pc.kappa)?;

    // close the plant's initial set
    let mut init: BTreeSet<u8> = plant.initial.iter().copied().collect();
    for &x in plant.states.iter().filter(|_| opt.close_initial) {
        let from_cabs = cabs.initial.iter().any(|h| r.state_gauge(h, &x).within(p.kappa));
        let to_oabs = oabs.initial.iter().any(|o| rcheck.state_gauge(&x, o).within(pc.kappa));
        if from_cabs && to_oabs {
            init.insert(x);
        }
    }
    plant.initial = init.into_iter().collect();
    let plant_s = plant.build(&inputs)?;

    let ok = check_relation(Kind::Alternating, &spec_s, &cabs_s, &rc, &ex, &InputMetric::zero(), None)?.ok()
        && check_relation(Kind::Alternating, &cabs_s, &plant_s, &r, &p, &d, None)?.ok()
        && check_relation(opt.observer_kind, &plant_s, &oabs_s, &rcheck, &pc, &dcheck, None)?.ok();
    if !ok {
        return Ok(None);
    }
    let outputs: BTreeMap<u8, u8> = plant.states.iter().map(|&x| (x, g.below(2) as u8)).collect();
    Ok(Some(Toy {
        spec: spec_s,
        cabs: cabs_s,
        plant: FinitePlant::new(plant_s, &outputs)?,
        oabs: oabs_s,
        rc,
        r,
        rcheck,
        params: p,
        params_check: pc,
        d,
        dcheck,
        dbar,
    }))
}

/// Maximum number of discarded drafts before giving up.
pub const ATTEMPTS: usize = 500;

/// Deterministic in `seed`.
pub fn generate(seed: u64, opt: Options) -> Result<Toy> {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    for _ in 0..ATTEMPTS {
        if let Some(t) = attempt(&mut g, opt)? {
            return Ok(t);
        }
    }
    Err(Error::Internal(alloc::format!("seed {seed}: no valid instance in {ATTEMPTS} drafts")))
}

/// One derived relation and its checker verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub name: &'static str,
    /// Debug rendering of the counterexample, if any.
    pub failure: Option<String>,
}

fn outcome<X: Debug, Y: Debug, U: Debug>(name: &'static str, v: Verdict<X, Y, U>) -> Outcome {
    Outcome {
        name,
        failure: v.counterexample.map(|c| alloc::format!("{c:?}")),
    }
}

/// Builds every derived relation of the synthesis chain for `t` and checks
/// each against its derived system with the matching parameters:
/// state-feedback composition to plant, plant to observer, lifted
/// specification to lifted abstraction, lifted abstraction to observer,
/// lifted state-feedback controller to observer, and output-feedback
/// controller to plant.
pub fn check_constructions(t: &Toy) -> Result<Vec<Outcome>> {
    let comp = t.composite();
    let exact = AcParams::exact();
    let zero = InputMetric::zero();
    let tilde = subset_observer(t.plant_system(), &t.oabs, &t.rcheck, &t.params_check, &t.dcheck)?;
    let chain = lift_relation_r(
        EnumeratedChain::new(t.plant_system(), t.r.clone(), t.rcheck.clone())?,
        t.params.kappa,
        t.params_check.kappa,
        t.inputs(),
        t.inputs(),
    );
    let (lspec, lcabs) = (lift(&t.spec), lift(&t.cabs));
    let lrc = lift_relation_rc(&t.rc);
    let mut out = Vec::new();

    let sc = compose(&t.spec, &t.cabs, &t.rc, &exact, &zero)?;
    let r1 = stacked_relation(&t.rc, &t.r);
    out.push(outcome(
        "state-feedback controller to plant",
        check_acasr(&sc.system, t.plant_system(), &r1, &t.params, &stacked_metric(&t.d), None)?,
    ));

    let r2 = observer_relation(&t.rcheck);
    out.push(outcome(
        "plant to observer",
        check_acsr(t.plant_system(), &tilde, &r2, &t.params_check, &t.dcheck, None)?,
    ));

    out.push(outcome(
        "lifted specification to lifted abstraction",
        check_acasr(&lspec, &lcabs, &lrc, &exact, &zero, None)?,
    ));

    out.push(outcome(
        "lifted abstraction to observer",
        check_acasr(&lcabs, &tilde, &chain, &comp, &t.dbar, None)?,
    ));

    let lsc = compose(&lspec, &lcabs, &lrc, &exact, &zero)?;
    let r3 = stacked_relation(&lrc, &chain);
    out.push(outcome(
        "lifted controller to observer",
        check_acasr(&lsc.system, &tilde, &r3, &comp, &stacked_metric(&t.dbar), None)?,
    ));

    let sbar = compose(&lsc.system, &tilde, &r3, &comp, &stacked_metric(&t.dbar))?;
    let r4 = closed_loop_relation(&t.r, &t.rcheck, sbar.system.inputs().to_vec());
    out.push(outcome(
        "output-feedback controller to plant",
        check_acasr(&sbar.system, t.plant_system(), &r4, &comp, &closed_loop_metric(&t.dbar), None)?,
    ));
    Ok(out)
}
