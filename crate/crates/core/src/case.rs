//! Built-in networked control example: a planar linear plant behind two
//! lossy channels, its grid abstractions, specification, and relations.
//!
//! The plant is `ξ' = Aξ + Bu` with `A = diag(0.5, 0.25)`,
//! `B = (3.6056, 3.9051)` and the measured output `y = rd_ℤ(Cξ)`,
//! `C = (2.7042, 2.2535)`. Two channel bits ride along: `ξ3 = 1` marks a
//! step whose input was lost (the update is `Aξ`), `ξ4 = 1` marks a lost
//! measurement (the output reads 0). Losses never occur twice in a row.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dec::{Dec, Gauge};
use crate::error::Result;
use crate::lift::{lift_relation_r, ChainOracle, Controller, ControllerParts};
use crate::observer::{BoundQuantizer, Observer, OutputOracle};
use crate::powerset::LiftedState;
use crate::relation::{AcParams, GaugedRelation, InputMetric};
use crate::system::{FiniteSystem, Outputs, TransitionSystem};

pub const A: [Dec; 2] = [Dec::new(5, 1), Dec::new(25, 2)];
pub const B: [Dec; 2] = [Dec::new(36056, 4), Dec::new(39051, 4)];
pub const C: [Dec; 2] = [Dec::new(27042, 4), Dec::new(22535, 4)];
pub const U_LOW: Dec = Dec::new(32, 3);
pub const U_HIGH: Dec = Dec::new(64, 3);
/// Upper edge of the abstracted box `[0, 0.4]²`.
pub const BOX: Dec = Dec::new(4, 1);
/// Grid spacing of the control abstraction.
pub const FINE: Dec = Dec::new(1, 2);
/// Grid spacing of the observation abstraction.
pub const COARSE: Dec = Dec::new(1, 1);

pub fn inputs() -> Vec<Dec> {
    vec![U_LOW, U_HIGH]
}

/// Plant or abstract state `(ξ1, ξ2, ξ3, ξ4)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaseState {
    pub xi1: Dec,
    pub xi2: Dec,
    pub xi3: bool,
    pub xi4: bool,
}

impl CaseState {
    pub const ORIGIN: CaseState = CaseState {
        xi1: Dec::ZERO,
        xi2: Dec::ZERO,
        xi3: false,
        xi4: false,
    };

    pub fn new(xi1: Dec, xi2: Dec, xi3: bool, xi4: bool) -> Self {
        CaseState { xi1, xi2, xi3, xi4 }
    }

    pub fn bits(&self) -> (bool, bool) {
        (self.xi3, self.xi4)
    }

    /// `C ξ`.
    pub fn yc(&self) -> Dec {
        C[0] * self.xi1 + C[1] * self.xi2
    }

    /// Sup-norm distance of the continuous parts, `None` if the channel bits
    /// differ.
    pub fn distance(&self, other: &CaseState) -> Option<Dec> {
        (self.bits() == other.bits()).then(|| (self.xi1 - other.xi1).abs().max((self.xi2 - other.xi2).abs()))
    }
}

impl fmt::Debug for CaseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {} {} {}]", self.xi1, self.xi2, self.xi3 as u8, self.xi4 as u8)
    }
}

impl fmt::Display for CaseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Channel bit patterns reachable in one step from `(ξ3, ξ4)`.
pub fn channel_successors(bits: (bool, bool)) -> Vec<(bool, bool)> {
    let mut out = Vec::with_capacity(4);
    for d3 in [false, true] {
        for d4 in [false, true] {
            if (d3 && bits.0) || (d4 && bits.1) {
                continue;
            }
            out.push((d3, d4));
        }
    }
    out
}

/// Continuous update into a state with channel bits `next`: the input is
/// dropped when `next.0` is set.
pub fn flow(xi: (Dec, Dec), u: Dec, next: (bool, bool)) -> (Dec, Dec) {
    let v = if next.0 { Dec::ZERO } else { u };
    (A[0] * xi.0 + B[0] * v, A[1] * xi.1 + B[1] * v)
}

/// `rd_ℤ(y_c)`, rounding halves away from zero.
pub fn quantize_output(yc: Dec) -> i64 {
    yc.round_int()
}

/// The plant with output map `H(ξ) = 0` if `ξ4 = 1`, else `rd_ℤ(Cξ)`.
#[derive(Clone, Debug)]
pub struct CasePlant {
    inputs: Vec<Dec>,
}

impl Default for CasePlant {
    fn default() -> Self {
        CasePlant { inputs: inputs() }
    }
}

impl CasePlant {
    pub fn new() -> Self {
        Self::default()
    }

    /// The unique successor entering channel bits `next`.
    pub fn step(&self, x: &CaseState, u: Dec, next: (bool, bool)) -> CaseState {
        let (a, b) = flow((x.xi1, x.xi2), u, next);
        CaseState::new(a, b, next.0, next.1)
    }
}

impl TransitionSystem for CasePlant {
    type State = CaseState;
    type Input = Dec;

    fn initial_states(&self) -> Vec<CaseState> {
        vec![CaseState::ORIGIN]
    }

    fn inputs(&self) -> &[Dec] {
        &self.inputs
    }

    fn contains(&self, _: &CaseState) -> bool {
        true
    }

    fn post(&self, x: &CaseState, u: &Dec) -> Vec<CaseState> {
        if !self.inputs.contains(u) {
            return Vec::new();
        }
        channel_successors(x.bits())
            .into_iter()
            .map(|n| self.step(x, *u, n))
            .collect()
    }
}

impl Outputs for CasePlant {
    type Output = i64;

    fn output(&self, x: &CaseState) -> i64 {
        if x.xi4 {
            0
        } else {
            quantize_output(x.yc())
        }
    }
}

/// Grid abstraction over `[0, 0.4]²` with the plant's channel structure.
/// Successors are rounded to the grid; an input whose rounded successor
/// leaves the box is disabled at that state.
#[derive(Clone, Debug)]
pub struct GridAbstraction {
    spacing: Dec,
    inputs: Vec<Dec>,
}

impl GridAbstraction {
    pub fn new(spacing: Dec) -> Self {
        GridAbstraction {
            spacing,
            inputs: inputs(),
        }
    }

    /// Control abstraction `Ŝ`, spacing 0.01.
    pub fn control() -> Self {
        Self::new(FINE)
    }

    /// Observation abstraction `Š`, spacing 0.1.
    pub fn observation() -> Self {
        Self::new(COARSE)
    }

    pub fn spacing(&self) -> Dec {
        self.spacing
    }

    pub fn round(&self, v: Dec) -> Dec {
        v.round_to_multiple(self.spacing)
    }

    /// Grid coordinates `0, s, 2s, …, 0.4`.
    pub fn axis(&self) -> Vec<Dec> {
        let mut out = Vec::new();
        let mut v = Dec::ZERO;
        while v <= BOX {
            out.push(v);
            v += self.spacing;
        }
        out
    }

    fn on_grid(&self, v: Dec) -> bool {
        v >= Dec::ZERO && v <= BOX && self.round(v) == v
    }
}

impl TransitionSystem for GridAbstraction {
    type State = CaseState;
    type Input = Dec;

    fn initial_states(&self) -> Vec<CaseState> {
        vec![CaseState::ORIGIN]
    }

    fn inputs(&self) -> &[Dec] {
        &self.inputs
    }

    fn contains(&self, x: &CaseState) -> bool {
        self.on_grid(x.xi1) && self.on_grid(x.xi2)
    }

    fn post(&self, x: &CaseState, u: &Dec) -> Vec<CaseState> {
        if !self.inputs.contains(u) {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(4);
        for n in channel_successors(x.bits()) {
            let (a, b) = flow((x.xi1, x.xi2), *u, n);
            let (a, b) = (self.round(a), self.round(b));
            if a.is_negative() || b.is_negative() || a > BOX || b > BOX {
                return Vec::new();
            }
            out.push(CaseState::new(a, b, n.0, n.1));
        }
        out.sort();
        out
    }

    fn enumerate(&self) -> Option<Vec<CaseState>> {
        let axis = self.axis();
        let mut out = Vec::with_capacity(axis.len() * axis.len() * 4);
        for a in &axis {
            for b in &axis {
                for (d3, d4) in [(false, false), (false, true), (true, false), (true, true)] {
                    out.push(CaseState::new(*a, *b, d3, d4));
                }
            }
        }
        Some(out)
    }
}

/// The specification: the part of the control abstraction reachable from the
/// origin when the origin applies 0.064 and every other state 0.032.
pub fn spec() -> FiniteSystem<CaseState, Dec> {
    let cabs = GridAbstraction::control();
    let policy = move |x: &CaseState| if *x == CaseState::ORIGIN { U_HIGH } else { U_LOW };
    let restricted = Restricted { inner: cabs, policy };
    FiniteSystem::reachable(&restricted)
}

struct Restricted<F> {
    inner: GridAbstraction,
    policy: F,
}

impl<F: Fn(&CaseState) -> Dec> TransitionSystem for Restricted<F> {
    type State = CaseState;
    type Input = Dec;

    fn initial_states(&self) -> Vec<CaseState> {
        self.inner.initial_states()
    }

    fn inputs(&self) -> &[Dec] {
        self.inner.inputs()
    }

    fn contains(&self, x: &CaseState) -> bool {
        self.inner.contains(x)
    }

    fn post(&self, x: &CaseState, u: &Dec) -> Vec<CaseState> {
        if *u == (self.policy)(x) {
            self.inner.post(x, u)
        } else {
            Vec::new()
        }
    }
}

/// Relation parameters of the control and observation relations.
pub fn cabs_params() -> AcParams {
    AcParams::new(Dec::new(5, 3), Dec::new(5, 1), Dec::ZERO).expect("valid constants")
}

pub fn oabs_params() -> AcParams {
    AcParams::new(Dec::new(5, 2), Dec::new(5, 1), Dec::ZERO).expect("valid constants")
}

/// Equal bits, equal inputs, sup-distance gauge floored at `kappa`.
pub fn distance_relation(kappa: Dec) -> GaugedRelation<CaseState, CaseState, Dec, Dec> {
    GaugedRelation::new(kappa, inputs(), inputs(), |a: &CaseState, b: &CaseState, u: &Dec, v: &Dec| {
        match a.distance(b) {
            Some(d) if u == v => Gauge::Finite(d),
            _ => Gauge::Infinite,
        }
    })
    .expect("valid constants")
    .with_state_gauge(move |a, b| a.distance(b).map_or(Gauge::Infinite, |d| Gauge::Finite(d.max(kappa))))
}

/// `R(ε)` from the control abstraction to the plant: equal bits, equal
/// inputs, sup-distance at most ε.
pub fn cabs_relation() -> GaugedRelation<CaseState, CaseState, Dec, Dec> {
    distance_relation(cabs_params().kappa)
}

/// `Ř(ε)` from the plant to the observation abstraction.
pub fn oabs_relation() -> GaugedRelation<CaseState, CaseState, Dec, Dec> {
    distance_relation(oabs_params().kappa)
}

/// `R̂_C`: identity on states and inputs.
pub fn spec_relation() -> GaugedRelation<CaseState, CaseState, Dec, Dec> {
    GaugedRelation::exact(inputs(), inputs(), |a: &CaseState, b: &CaseState, u: &Dec, v: &Dec| a == b && u == v)
        .with_state_gauge(|a, b| if a == b { Gauge::Finite(Dec::ZERO) } else { Gauge::Infinite })
}

pub fn zero_metric() -> InputMetric<Dec, Dec> {
    InputMetric::zero()
}

/// Sampling adapter: every abstract state paired with plant states on the
/// 0.0025 sub-grid within `radius` (matching bits).
pub fn sample_pairs(abs: &GridAbstraction, radius: Dec) -> Vec<(CaseState, CaseState)> {
    let step = Dec::new(25, 4);
    let mut offsets = Vec::new();
    let mut o = Dec::ZERO - radius;
    while o <= radius {
        offsets.push(o);
        o += step;
    }
    // ball corners, in case the radius is off the sub-grid
    offsets.push(radius);
    offsets.push(Dec::ZERO - radius);
    offsets.sort();
    offsets.dedup();
    let mut out = Vec::new();
    for xa in abs.enumerate().unwrap_or_default() {
        for da in &offsets {
            for db in &offsets {
                out.push((xa, CaseState::new(xa.xi1 + *da, xa.xi2 + *db, xa.xi3, xa.xi4)));
            }
        }
    }
    out
}

/// Radius `κ / (1 − β)`: the level every related pair contracts to.
pub fn sample_radius(p: &AcParams) -> Dec {
    p.kappa.div_ceil(Dec::ONE - p.beta).expect("beta < 1")
}

/// `(x̂, x)` pairs for checking the control relation.
pub fn cabs_samples() -> Vec<(CaseState, CaseState)> {
    sample_pairs(&GridAbstraction::control(), sample_radius(&cabs_params()))
}

/// `(x, x̌)` pairs for checking the observation relation.
pub fn oabs_samples() -> Vec<(CaseState, CaseState)> {
    sample_pairs(&GridAbstraction::observation(), sample_radius(&oabs_params()))
        .into_iter()
        .map(|(a, x)| (x, a))
        .collect()
}

/// Interval bounds `[lo, hi]` per coordinate.
type Boxed = [(Dec, Dec); 2];

fn ball(x: &CaseState, r: Dec) -> Boxed {
    [(x.xi1 - r, x.xi1 + r), (x.xi2 - r, x.xi2 + r)]
}

fn image(b: Boxed, u: Dec, next: (bool, bool)) -> Boxed {
    let lo = flow((b[0].0, b[1].0), u, next);
    let hi = flow((b[0].1, b[1].1), u, next);
    [(lo.0, hi.0), (lo.1, hi.1)]
}

fn meet(a: Boxed, b: Boxed) -> Option<Boxed> {
    let c = [(a[0].0.max(b[0].0), a[0].1.min(b[0].1)), (a[1].0.max(b[1].0), a[1].1.min(b[1].1))];
    (c[0].0 <= c[0].1 && c[1].0 <= c[1].1).then_some(c)
}

/// Observer queries answered by interval arithmetic on the plant.
#[derive(Clone, Debug, Default)]
pub struct CaseOutputs;

impl OutputOracle for CaseOutputs {
    type PlantInput = Dec;
    type AbsState = CaseState;
    type AbsInput = Dec;
    type Output = i64;

    fn initial_outputs(&self, xc0: &CaseState) -> BTreeSet<i64> {
        let kappa = oabs_params().kappa;
        match CaseState::ORIGIN.distance(xc0) {
            Some(d) if d <= kappa => BTreeSet::from([CasePlant::new().output(&CaseState::ORIGIN)]),
            _ => BTreeSet::new(),
        }
    }

    fn step_outputs(&self, xc: &CaseState, b: Dec, u: &Dec, uc: &Dec, next: &CaseState, nb: Dec) -> BTreeSet<i64> {
        let bits = next.bits();
        if u != uc || !channel_successors(xc.bits()).contains(&bits) {
            return BTreeSet::new();
        }
        let Some(region) = meet(image(ball(xc, b), *u, bits), ball(next, nb)) else {
            return BTreeSet::new();
        };
        if next.xi4 {
            return BTreeSet::from([0]);
        }
        // C has positive entries, so y_c is monotone on the box
        let lo = C[0] * region[0].0 + C[1] * region[1].0;
        let hi = C[0] * region[0].1 + C[1] * region[1].1;
        (quantize_output(lo)..=quantize_output(hi)).collect()
    }
}

/// Chain queries for `𝐑` between the control abstraction and the observer.
///
/// With sup-distance gauges, `min_{‖x − x̂‖ ≤ ε1} ‖x − x̌‖ = max(0, ‖x̂ − x̌‖ − ε1)`,
/// so the total `ε1 + max(κ', …)` never decreases in `ε1` and the split at
/// `ε1 = κ` is optimal.
#[derive(Clone, Debug, Default)]
pub struct CaseChain;

impl ChainOracle for CaseChain {
    type CabsState = CaseState;
    type CabsInput = Dec;
    type PlantInput = Dec;
    type ObsState = CaseState;
    type ObsInput = Dec;

    fn plant_inputs(&self) -> Vec<Dec> {
        inputs()
    }

    fn split_points(&self, _: &LiftedState<CaseState>, uh: &Dec, u: &Dec) -> Vec<Dec> {
        if uh == u {
            vec![cabs_params().kappa]
        } else {
            Vec::new()
        }
    }

    fn observer_split(&self, xs: &LiftedState<CaseState>, uh: &Dec, u: &Dec, xc: &CaseState, uc: &Dec, eps1: Dec) -> Gauge {
        if uh != u || u != uc {
            return Gauge::Infinite;
        }
        xs.iter()
            .filter_map(|h| h.distance(xc))
            .map(|d| (d - eps1).max(Dec::ZERO).max(oabs_params().kappa))
            .min()
            .map_or(Gauge::Infinite, Gauge::Finite)
    }
}

pub type CaseObserver = Observer<GridAbstraction, CaseOutputs>;
pub type CaseController<'a> = Controller<'a, FiniteSystem<CaseState, Dec>, GridAbstraction, GridAbstraction, CaseOutputs>;

/// Every witness map of the example is the identity on inputs.
pub fn identity_inputs() -> BTreeMap<Dec, Dec> {
    inputs().into_iter().map(|u| (u, u)).collect()
}

/// Observer over the coarse grid. Bounds are rounded up to `{κ', limit}`
/// with `depth = 0`; deeper menus are accepted.
pub fn observer(depth: usize) -> Result<CaseObserver> {
    let p = oabs_params();
    let quant = BoundQuantizer::new(&p, Dec::ZERO, depth, None)?;
    Ok(Observer::new(GridAbstraction::observation(), CaseOutputs, p, zero_metric(), quant))
}

/// Specification, control abstraction and relations wired for the
/// controller.
pub fn controller_parts() -> ControllerParts<FiniteSystem<CaseState, Dec>, GridAbstraction, Dec, CaseState, Dec> {
    ControllerParts {
        spec: spec(),
        cabs: GridAbstraction::control(),
        rc: spec_relation(),
        chain: lift_relation_r(CaseChain, cabs_params().kappa, oabs_params().kappa, inputs(), inputs()),
        params: cabs_params().composite(&oabs_params()),
        dbar: zero_metric(),
        spec_to_cabs: identity_inputs(),
        cabs_to_plant: identity_inputs(),
        plant_to_obs: identity_inputs(),
    }
}

pub fn controller(obs: &CaseObserver) -> CaseController<'_> {
    Controller::new(controller_parts(), obs)
}
