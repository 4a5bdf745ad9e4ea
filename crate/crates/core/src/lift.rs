//! Relations between lifted (set-valued) systems and the synthesized
//! output-feedback controller.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::dec::{Dec, Gauge};
use crate::error::{Error, Result};
use crate::observer::{Observer, ObserverState, OutputOracle};
use crate::powerset::LiftedState;
use crate::relation::{AcParams, GaugedRelation, InputMetric};
use crate::system::{FiniteSystem, TransitionSystem};

/// `𝐑̂_C`: `(x̂_Cs, x̂s, û_C, û)` is related iff every `x̂ ∈ x̂s` has some
/// `x̂_C ∈ x̂_Cs` with `(x̂_C, x̂, û_C, û) ∈ R̂_C`.
pub fn lift_relation_rc<Xc, Xh, Uc, Uh>(
    rc: &GaugedRelation<Xc, Xh, Uc, Uh>,
) -> GaugedRelation<LiftedState<Xc>, LiftedState<Xh>, Uc, Uh>
where
    Xc: Clone + Ord + Debug + 'static,
    Xh: Clone + Ord + Debug + 'static,
    Uc: Clone + Ord + Debug + 'static,
    Uh: Clone + Ord + Debug + 'static,
{
    let r = rc.clone();
    GaugedRelation::exact(
        rc.inputs1().to_vec(),
        rc.inputs2().to_vec(),
        move |cs: &LiftedState<Xc>, hs: &LiftedState<Xh>, uc: &Uc, uh: &Uh| {
            hs.iter()
                .all(|h| cs.iter().any(|c| r.gauge(c, h, uc, uh).within(r.kappa())))
        },
    )
}

/// Plant-side queries behind the chained relation `𝐑`.
pub trait ChainOracle {
    type CabsState: Clone + Ord + Debug + 'static;
    type CabsInput: Clone + Ord + Debug + 'static;
    type PlantInput: Clone + Ord + Debug + 'static;
    type ObsState: Clone + Ord + Debug + 'static;
    type ObsInput: Clone + Ord + Debug + 'static;

    fn plant_inputs(&self) -> Vec<Self::PlantInput>;

    /// Levels `ε1 >= κ` that contain the optimal split of `𝐑`'s gauge for
    /// this set and input pair; every value `R` attains is always enough.
    fn split_points(&self, xs: &LiftedState<Self::CabsState>, uh: &Self::CabsInput, u: &Self::PlantInput) -> Vec<Dec>;

    /// `min Ř(x, x̌, u, ǔ)` over plant states `x` with
    /// `(x̂, x, û, u) ∈ R(eps1)` for some `x̂ ∈ xs`.
    fn observer_split(
        &self,
        xs: &LiftedState<Self::CabsState>,
        uh: &Self::CabsInput,
        u: &Self::PlantInput,
        xc: &Self::ObsState,
        uc: &Self::ObsInput,
        eps1: Dec,
    ) -> Gauge;
}

/// [`ChainOracle`] for explicit plants, by enumeration.
pub struct EnumeratedChain<Xh, Uh, X, U, Xc, Uc> {
    states: Vec<X>,
    inputs: Vec<U>,
    r: GaugedRelation<Xh, X, Uh, U>,
    rc: GaugedRelation<X, Xc, U, Uc>,
}

impl<Xh, Uh, X, U, Xc, Uc> EnumeratedChain<Xh, Uh, X, U, Xc, Uc>
where
    X: Clone + Ord + Debug + 'static,
    U: Clone + Ord + Debug + 'static,
{
    pub fn new<P>(plant: &P, r: GaugedRelation<Xh, X, Uh, U>, rc: GaugedRelation<X, Xc, U, Uc>) -> Result<Self>
    where
        P: TransitionSystem<State = X, Input = U>,
    {
        let states = plant
            .enumerate()
            .ok_or_else(|| Error::Capability("plant states are not enumerable".into()))?;
        Ok(EnumeratedChain {
            states,
            inputs: plant.inputs().to_vec(),
            r,
            rc,
        })
    }
}

impl<Xh, Uh, X, U, Xc, Uc> ChainOracle for EnumeratedChain<Xh, Uh, X, U, Xc, Uc>
where
    Xh: Clone + Ord + Debug + 'static,
    Uh: Clone + Ord + Debug + 'static,
    X: Clone + Ord + Debug + 'static,
    U: Clone + Ord + Debug + 'static,
    Xc: Clone + Ord + Debug + 'static,
    Uc: Clone + Ord + Debug + 'static,
{
    type CabsState = Xh;
    type CabsInput = Uh;
    type PlantInput = U;
    type ObsState = Xc;
    type ObsInput = Uc;

    fn plant_inputs(&self) -> Vec<U> {
        self.inputs.clone()
    }

    fn split_points(&self, xs: &LiftedState<Xh>, uh: &Uh, u: &U) -> Vec<Dec> {
        let mut out: Vec<Dec> = xs
            .iter()
            .flat_map(|h| self.states.iter().filter_map(move |x| self.r.gauge(h, x, uh, u).finite()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn observer_split(&self, xs: &LiftedState<Xh>, uh: &Uh, u: &U, xc: &Xc, uc: &Uc, eps1: Dec) -> Gauge {
        self.states
            .iter()
            .filter(|x| xs.iter().any(|h| self.r.gauge(h, x, uh, u).within(eps1)))
            .map(|x| self.rc.gauge(x, xc, u, uc))
            .min()
            .unwrap_or(Gauge::Infinite)
    }
}

/// The chained relation `𝐑(ε)` between lifted `Ŝ` and the observer:
/// `(x̂s, x̃, û, ǔ)` has the least `ε1 + ε2` such that some plant input `u`
/// makes every `x̌ ∈ x̃` reachable from some `x̂ ∈ x̂s` through a plant state
/// `x` with `R(x̂, x, û, u) <= ε1` and `Ř(x, x̌, u, ǔ) <= ε2`. The split is
/// shared by all members of `x̃`.
pub fn lift_relation_r<C>(
    oracle: C,
    kappa: Dec,
    kappa_check: Dec,
    cabs_inputs: Vec<C::CabsInput>,
    obs_inputs: Vec<C::ObsInput>,
) -> GaugedRelation<LiftedState<C::CabsState>, LiftedState<C::ObsState>, C::CabsInput, C::ObsInput>
where
    C: ChainOracle + 'static,
{
    GaugedRelation::new(
        kappa + kappa_check,
        cabs_inputs,
        obs_inputs,
        move |xs: &LiftedState<C::CabsState>, xcs: &LiftedState<C::ObsState>, uh: &C::CabsInput, uc: &C::ObsInput| {
            let mut best = Gauge::Infinite;
            for u in oracle.plant_inputs() {
                for e1 in oracle.split_points(xs, uh, &u) {
                    let mut e2 = Gauge::Finite(kappa_check);
                    for xc in xcs.iter() {
                        e2 = e2.max(oracle.observer_split(xs, uh, &u, xc, uc, e1));
                        if !e2.is_finite() {
                            break;
                        }
                    }
                    if let Gauge::Finite(e2) = e2 {
                        best = best.min(Gauge::Finite(e1 + e2));
                    }
                }
            }
            best
        },
    )
    .expect("sum of nonnegative kappas")
}

/// States whose c-abstraction and observer components can be read as sets.
pub trait SplitState {
    type Cabs;
    type Obs;
    fn cabs_members(&self) -> Vec<&Self::Cabs>;
    fn obs_members(&self) -> Vec<&Self::Obs>;
}

impl<Xc: Ord + Clone, Xh: Ord + Clone, Xo: Ord + Clone> SplitState
    for ((LiftedState<Xc>, LiftedState<Xh>), LiftedState<Xo>)
{
    type Cabs = Xh;
    type Obs = Xo;
    fn cabs_members(&self) -> Vec<&Xh> {
        self.0 .1.iter().collect()
    }
    fn obs_members(&self) -> Vec<&Xo> {
        self.1.iter().collect()
    }
}

/// `𝐑̄_C(ε)` from a closed-loop controller state to the plant: the gauge is
/// `min_{x̂ ∈ x̂s} R(x̂, x, û, u) + min_{x̌ ∈ x̃} Ř(x, x̌, u, ǔ)`.
pub fn closed_loop_relation<S, Uc, Uh, Uo, X, U>(
    r: &GaugedRelation<S::Cabs, X, Uh, U>,
    rc: &GaugedRelation<X, S::Obs, U, Uo>,
    controller_inputs: Vec<((Uc, Uh), Uo)>,
) -> GaugedRelation<S, X, ((Uc, Uh), Uo), U>
where
    S: SplitState + Clone + Ord + Debug + 'static,
    S::Cabs: Clone + Ord + Debug + 'static,
    S::Obs: Clone + Ord + Debug + 'static,
    Uc: Clone + Ord + Debug + 'static,
    Uh: Clone + Ord + Debug + 'static,
    Uo: Clone + Ord + Debug + 'static,
    X: Clone + Ord + Debug + 'static,
    U: Clone + Ord + Debug + 'static,
{
    let (r, rc) = (r.clone(), rc.clone());
    let kappa = r.kappa() + rc.kappa();
    GaugedRelation::new(
        kappa,
        controller_inputs,
        r.inputs2().to_vec(),
        move |s: &S, x: &X, us: &((Uc, Uh), Uo), u: &U| {
            let a = s
                .cabs_members()
                .into_iter()
                .map(|h| r.gauge(h, x, &us.0 .1, u))
                .min()
                .unwrap_or(Gauge::Infinite);
            let b = s
                .obs_members()
                .into_iter()
                .map(|o| rc.gauge(x, o, u, &us.1))
                .min()
                .unwrap_or(Gauge::Infinite);
            a + b
        },
    )
    .expect("sum of nonnegative kappas")
}

/// `d̄_C(((û_C, û), ǔ), u) = d̄(û, ǔ)`.
pub fn closed_loop_metric<Uc, Uh, Uo, U>(dbar: &InputMetric<Uh, Uo>) -> InputMetric<((Uc, Uh), Uo), U>
where
    Uc: Clone + Ord + 'static,
    Uh: Clone + Ord + 'static,
    Uo: Clone + Ord + 'static,
    U: Clone + Ord + 'static,
{
    let d = dbar.clone();
    InputMetric::new(move |us: &((Uc, Uh), Uo), _: &U| d.eval(&us.0 .1, &us.1))
}

/// State of the synthesized controller: the specification and c-abstraction
/// sets together with the observer's bounded candidates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ControllerState<Xc: Ord, Xh: Ord, Xo: Ord> {
    pub spec: LiftedState<Xc>,
    pub cabs: LiftedState<Xh>,
    pub obs: ObserverState<Xo>,
}

impl<Xc: Ord + Clone, Xh: Ord + Clone, Xo: Ord + Clone> SplitState for ControllerState<Xc, Xh, Xo> {
    type Cabs = Xh;
    type Obs = Xo;
    fn cabs_members(&self) -> Vec<&Xh> {
        self.cabs.iter().collect()
    }
    fn obs_members(&self) -> Vec<&Xo> {
        self.obs.candidates().keys().collect()
    }
}

/// Inputs chosen by the controller in one state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Actuation<Uc, Uh, U, Uo> {
    pub spec: Uc,
    pub cabs: Uh,
    pub plant: U,
    pub obs: Uo,
}

impl<Uc: Clone, Uh: Clone, U, Uo: Clone> Actuation<Uc, Uh, U, Uo> {
    /// The input as seen by the closed-loop composition.
    pub fn composite(&self) -> ((Uc, Uh), Uo) {
        ((self.spec.clone(), self.cabs.clone()), self.obs.clone())
    }
}

/// Everything the controller needs besides the observer.
pub struct ControllerParts<Sc: TransitionSystem, Sh: TransitionSystem, U, Xo: Ord, Uo> {
    pub spec: Sc,
    pub cabs: Sh,
    /// Exact relation `R̂_C` from the specification to `Ŝ`.
    pub rc: GaugedRelation<Sc::State, Sh::State, Sc::Input, Sh::Input>,
    /// The chained relation `𝐑`.
    pub chain: GaugedRelation<LiftedState<Sh::State>, LiftedState<Xo>, Sh::Input, Uo>,
    /// Composite parameters of `R` and `Ř`.
    pub params: AcParams,
    pub dbar: InputMetric<Sh::Input, Uo>,
    pub spec_to_cabs: BTreeMap<Sc::Input, Sh::Input>,
    pub cabs_to_plant: BTreeMap<Sh::Input, U>,
    pub plant_to_obs: BTreeMap<U, Uo>,
}

type CState<Sc, Sh, A> = ControllerState<
    <Sc as TransitionSystem>::State,
    <Sh as TransitionSystem>::State,
    <A as TransitionSystem>::State,
>;
type CAct<Sc, Sh, O, A> = Actuation<
    <Sc as TransitionSystem>::Input,
    <Sh as TransitionSystem>::Input,
    <O as OutputOracle>::PlantInput,
    <A as TransitionSystem>::Input,
>;
type CInput<Sc, Sh, A> = (
    (<Sc as TransitionSystem>::Input, <Sh as TransitionSystem>::Input),
    <A as TransitionSystem>::Input,
);

/// Output-feedback controller `𝐒̄_C` evaluated on demand.
///
/// From a state it applies the smallest specification input enabled at
/// every specification member, maps it through the witness maps, and on
/// output `y'` moves to: the observer update; the posts of `x̂s` that chain
/// to some new candidate within `κ + κ' + β e + λ d̄`, where `e` is the
/// current `𝐑` level; and the specification posts related to those.
pub struct Controller<'a, Sc, Sh, A, O>
where
    Sc: TransitionSystem,
    Sh: TransitionSystem,
    A: TransitionSystem,
    O: OutputOracle<AbsState = A::State, AbsInput = A::Input>,
{
    parts: ControllerParts<Sc, Sh, O::PlantInput, A::State, A::Input>,
    observer: &'a Observer<A, O>,
}

/// Reachable part of the controller over all outputs.
#[derive(Clone, Debug)]
pub struct Synthesis<S, I, Y> {
    /// Transitions labelled with the deployed composite input.
    pub system: FiniteSystem<S, I>,
    /// Initial state index for every initial output with a covered candidate.
    pub initial_by_output: BTreeMap<Y, usize>,
    /// Per state index, the successor index for every possible output.
    pub by_output: Vec<BTreeMap<Y, usize>>,
    /// Distinct observer components among the controller states.
    pub observer_states: usize,
}

impl<'a, Sc, Sh, A, O> Controller<'a, Sc, Sh, A, O>
where
    Sc: TransitionSystem,
    Sh: TransitionSystem,
    A: TransitionSystem,
    Sc::State: 'static,
    Sc::Input: 'static,
    Sh::State: 'static,
    Sh::Input: 'static,
    A::State: 'static,
    A::Input: 'static,
    O: OutputOracle<AbsState = A::State, AbsInput = A::Input>,
{
    pub fn new(parts: ControllerParts<Sc, Sh, O::PlantInput, A::State, A::Input>, observer: &'a Observer<A, O>) -> Self {
        Controller { parts, observer }
    }

    pub fn parts(&self) -> &ControllerParts<Sc, Sh, O::PlantInput, A::State, A::Input> {
        &self.parts
    }

    pub fn observer(&self) -> &Observer<A, O> {
        self.observer
    }

    /// Initial controller state after the first output.
    pub fn initial(&self, y0: &O::Output) -> Result<CState<Sc, Sh, A>> {
        self.try_initial(y0)?
            .ok_or_else(|| Error::Coverage(format!("no initial abstract state chains to an observer candidate for {y0:?}")))
    }

    /// Like [`Controller::initial`], but `None` when no candidate is covered.
    ///
    /// Only initial c-abstraction states with a related initial
    /// specification state are used, and observer candidates none of them
    /// chains to at level `κ + κ'` are dropped: those can only track plant
    /// states outside the relation's initial guarantee.
    pub fn try_initial(&self, y0: &O::Output) -> Result<Option<CState<Sc, Sh, A>>> {
        let obs = self.observer.init(y0)?;
        let level = self.parts.chain.kappa();
        let spec0 = self.parts.spec.initial_states();
        let k = self.parts.rc.kappa();
        let mut cabs0 = self.parts.cabs.initial_states();
        cabs0.retain(|h| spec0.iter().any(|c| self.parts.rc.state_gauge(c, h).within(k)));
        cabs0.sort();
        let chains = |h: &Sh::State, o: &A::State| {
            self.parts
                .chain
                .state_gauge(&LiftedState::singleton(h.clone()), &LiftedState::singleton(o.clone()))
                .within(level)
        };
        let cands: BTreeMap<A::State, Dec> = obs
            .candidates()
            .iter()
            .filter(|(o, _)| cabs0.iter().any(|h| chains(h, o)))
            .map(|(o, b)| (o.clone(), *b))
            .collect();
        let Some(obs) = ObserverState::new(cands) else {
            return Ok(None);
        };
        let support = obs.support();
        cabs0.retain(|h| support.iter().any(|o| chains(h, o)));
        let cabs = LiftedState::new(cabs0.into_iter().collect())
            .ok_or_else(|| Error::Internal("covering initial set vanished".into()))?;
        if !self.parts.chain.state_gauge(&cabs, &support).within(level) {
            return Err(Error::Coverage(format!(
                "initial set {cabs:?} does not cover observer state {obs:?} at {level}"
            )));
        }
        let spec = self.related_spec(spec0, &cabs)?;
        Ok(Some(ControllerState { spec, cabs, obs }))
    }

    /// Inputs applied in `st`.
    pub fn actuation(&self, st: &CState<Sc, Sh, A>) -> Result<CAct<Sc, Sh, O, A>> {
        let mut inputs = self.parts.spec.inputs().to_vec();
        inputs.sort();
        let spec = inputs
            .into_iter()
            .find(|uc| st.spec.iter().all(|x| !self.parts.spec.post(x, uc).is_empty()))
            .ok_or_else(|| Error::Internal(format!("no specification input is enabled on all of {:?}", st.spec)))?;
        let cabs = lookup(&self.parts.spec_to_cabs, &spec)?;
        let plant = lookup(&self.parts.cabs_to_plant, &cabs)?;
        let obs = lookup(&self.parts.plant_to_obs, &plant)?;
        Ok(Actuation { spec, cabs, plant, obs })
    }

    /// Successor after observing `y`.
    pub fn step(&self, st: &CState<Sc, Sh, A>, y: &O::Output) -> Result<CState<Sc, Sh, A>> {
        let act = self.actuation(st)?;
        let obs = self.observer.update(&st.obs, &act.plant, &act.obs, y)?;
        self.advance(st, &act, obs)
    }

    /// Successor for every output that can occur.
    pub fn branches(&self, st: &CState<Sc, Sh, A>) -> Result<BTreeMap<O::Output, CState<Sc, Sh, A>>> {
        let act = self.actuation(st)?;
        let mut out = BTreeMap::new();
        for (y, obs) in self.observer.branches(&st.obs, &act.plant, &act.obs)? {
            out.insert(y, self.advance(st, &act, obs)?);
        }
        Ok(out)
    }

    /// `𝐑` level of the pair (c-abstraction set, observer candidates).
    pub fn level(&self, st: &CState<Sc, Sh, A>) -> Gauge {
        self.parts.chain.state_gauge(&st.cabs, &st.obs.support())
    }

    fn advance(
        &self,
        st: &CState<Sc, Sh, A>,
        act: &CAct<Sc, Sh, O, A>,
        obs: ObserverState<A::State>,
    ) -> Result<CState<Sc, Sh, A>> {
        let support = st.obs.support();
        let Gauge::Finite(e) = self.level(st) else {
            return Err(Error::Coverage(format!("{:?} is not related to {:?}", st.cabs, st.obs)));
        };
        if !self.parts.chain.gauge(&st.cabs, &support, &act.cabs, &act.obs).within(e) {
            return Err(Error::Coverage(format!(
                "inputs ({:?}, {:?}) exceed level {e} at {:?}",
                act.cabs, act.obs, st.cabs
            )));
        }
        let bound = self.parts.params.bound(e, self.parts.dbar.eval(&act.cabs, &act.obs));
        let next_support = obs.support();
        let mut posts = BTreeSet::new();
        for h in st.cabs.iter() {
            posts.extend(self.parts.cabs.post(h, &act.cabs));
        }
        let kept: BTreeSet<Sh::State> = posts
            .into_iter()
            .filter(|h| {
                let hs = LiftedState::singleton(h.clone());
                next_support
                    .iter()
                    .any(|o| self.parts.chain.state_gauge(&hs, &LiftedState::singleton(o.clone())).within(bound))
            })
            .collect();
        let cabs = LiftedState::new(kept)
            .ok_or_else(|| Error::Coverage(format!("no successor of {:?} covers {obs:?}", st.cabs)))?;
        if !self.parts.chain.state_gauge(&cabs, &next_support).within(bound) {
            return Err(Error::Coverage(format!(
                "{cabs:?} does not cover {obs:?} within {bound}"
            )));
        }
        let mut spec_posts = Vec::new();
        for c in st.spec.iter() {
            spec_posts.extend(self.parts.spec.post(c, &act.spec));
        }
        let spec = self.related_spec(spec_posts, &cabs)?;
        Ok(ControllerState { spec, cabs, obs })
    }

    fn related_spec(&self, candidates: Vec<Sc::State>, cabs: &LiftedState<Sh::State>) -> Result<LiftedState<Sc::State>> {
        let k = self.parts.rc.kappa();
        let kept: BTreeSet<Sc::State> = candidates
            .into_iter()
            .filter(|c| cabs.iter().any(|h| self.parts.rc.state_gauge(c, h).within(k)))
            .collect();
        for h in cabs.iter() {
            if !kept.iter().any(|c| self.parts.rc.state_gauge(c, h).within(k)) {
                return Err(Error::Coverage(format!("abstract state {h:?} has no related specification state")));
            }
        }
        LiftedState::new(kept).ok_or_else(|| Error::Coverage("empty specification set".into()))
    }

    /// Breadth-first closure over all outputs from every consistent initial
    /// output; initial outputs without covered candidates are skipped.
    /// Fails with a capability error beyond `max_states`.
    #[allow(clippy::type_complexity)]
    pub fn synthesize(&self, max_states: usize) -> Result<Synthesis<CState<Sc, Sh, A>, CInput<Sc, Sh, A>, O::Output>> {
        let mut ys = BTreeSet::new();
        for xc in self.observer.abstraction().initial_states() {
            ys.extend(self.observer.oracle().initial_outputs(&xc));
        }
        let mut index: BTreeMap<CState<Sc, Sh, A>, usize> = BTreeMap::new();
        let mut order = Vec::new();
        let mut initial = Vec::new();
        let mut initial_by_output = BTreeMap::new();
        for y in &ys {
            let Some(s) = self.try_initial(y)? else {
                continue;
            };
            if !index.contains_key(&s) {
                index.insert(s.clone(), order.len());
                order.push(s.clone());
            }
            initial_by_output.insert(y.clone(), index[&s]);
            initial.push(s);
        }
        if order.is_empty() {
            return Err(Error::Coverage("no initial output has a covered observer candidate".into()));
        }
        let mut queue: VecDeque<usize> = (0..order.len()).collect();
        let mut by_output: Vec<BTreeMap<O::Output, usize>> = Vec::new();
        let mut trans = Vec::new();
        let mut inputs = BTreeSet::new();
        while let Some(i) = queue.pop_front() {
            let st = order[i].clone();
            let act = self.actuation(&st)?.composite();
            inputs.insert(act.clone());
            let mut row = BTreeMap::new();
            for (y, next) in self.branches(&st)? {
                let j = match index.get(&next) {
                    Some(j) => *j,
                    None => {
                        if order.len() >= max_states {
                            return Err(Error::Capability(format!("controller exceeds {max_states} states")));
                        }
                        index.insert(next.clone(), order.len());
                        order.push(next.clone());
                        queue.push_back(order.len() - 1);
                        order.len() - 1
                    }
                };
                row.insert(y, j);
                trans.push((st.clone(), act.clone(), next));
            }
            if by_output.len() <= i {
                by_output.resize(i + 1, BTreeMap::new());
            }
            by_output[i] = row;
        }
        by_output.resize(order.len(), BTreeMap::new());
        let observer_states = order.iter().map(|s| &s.obs).collect::<BTreeSet<_>>().len();
        let system = FiniteSystem::new(order, initial, inputs.into_iter().collect(), trans)?;
        Ok(Synthesis {
            system,
            initial_by_output,
            by_output,
            observer_states,
        })
    }
}

fn lookup<K: Ord + Debug, V: Clone>(map: &BTreeMap<K, V>, k: &K) -> Result<V> {
    map.get(k)
        .cloned()
        .ok_or_else(|| Error::Coverage(format!("no witness input for {k:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check_acasr;
    use crate::compose::{compose, stacked_metric};
    use crate::powerset::lift;
    use crate::system::FiniteSystem;
    use alloc::vec;

    fn d(s: &str) -> Dec {
        s.parse().unwrap()
    }

    fn fork() -> FiniteSystem<u8, char> {
        FiniteSystem::new(vec![0, 1, 2], vec![0], vec!['a'], vec![(0, 'a', 1), (0, 'a', 2), (1, 'a', 0), (2, 'a', 0)]).unwrap()
    }

    fn same() -> GaugedRelation<u8, u8, char, char> {
        GaugedRelation::exact(vec!['a'], vec!['a'], |a: &u8, b: &u8, u: &char, v: &char| a == b && u == v)
    }

    #[test]
    fn lifted_exact_relation_needs_every_member_covered() {
        let r = lift_relation_rc(&same());
        let s12: LiftedState<u8> = [1, 2].into_iter().collect();
        assert!(r.gauge(&s12, &LiftedState::singleton(1), &'a', &'a').is_finite());
        assert!(!r.gauge(&LiftedState::singleton(1), &s12, &'a', &'a').is_finite());
    }

    #[test]
    fn lifted_exact_relation_is_an_asr_between_lifted_systems() {
        let s = fork();
        let l = lift(&s);
        let r = lift_relation_rc(&same());
        let v = check_acasr(&l, &l, &r, &AcParams::exact(), &InputMetric::zero(), None).unwrap();
        assert!(v.ok(), "{:?}", v.counterexample);
    }

    #[test]
    fn chained_gauge_takes_the_best_shared_split() {
        // plant states 0..3 on a line; R and Ř measure distance
        let plant = FiniteSystem::new(vec![0u8, 1, 2, 3], vec![0], vec!['a'], vec![(0, 'a', 0)]).unwrap();
        let dist = |k: &'static str| {
            GaugedRelation::new(d(k), vec!['a'], vec!['a'], |a: &u8, b: &u8, _: &char, _: &char| {
                Gauge::Finite(Dec::from_int((*a as i64 - *b as i64).abs()))
            })
            .unwrap()
        };
        let chain = EnumeratedChain::new(&plant, dist("0"), dist("0")).unwrap();
        let big = lift_relation_r(chain, Dec::ZERO, Dec::ZERO, vec!['a'], vec!['a']);
        let xs = LiftedState::singleton(0u8);
        // x̌ = 3 from x̂ = 0: any split of 3
        assert_eq!(big.gauge(&xs, &LiftedState::singleton(3), &'a', &'a'), Gauge::Finite(Dec::from_int(3)));
        // {1, 3} from {0}: ε1 = 1 reaches x = 1, then Ř needs 2 for x̌ = 3
        let xcs: LiftedState<u8> = [1, 3].into_iter().collect();
        assert_eq!(big.gauge(&xs, &xcs, &'a', &'a'), Gauge::Finite(Dec::from_int(3)));
        let pair: LiftedState<u8> = [0, 3].into_iter().collect();
        assert_eq!(big.gauge(&pair, &xcs, &'a', &'a'), Gauge::Finite(Dec::from_int(1)));
    }

    #[test]
    fn lifted_controller_shape_on_identity_chain() {
        let s = fork();
        let l = lift(&s);
        let rc = lift_relation_rc(&same());
        let chain = EnumeratedChain::new(&s, same(), same()).unwrap();
        let big = lift_relation_r(chain, Dec::ZERO, Dec::ZERO, vec!['a'], vec!['a']);
        let sc = compose(&l, &l, &rc, &AcParams::exact(), &InputMetric::zero()).unwrap();
        let r3 = crate::compose::stacked_relation(&rc, &big);
        let dc = stacked_metric::<char, char, char>(&InputMetric::zero());
        let v = check_acasr(&sc.system, &l, &r3, &AcParams::exact(), &dc, None).unwrap();
        assert!(v.ok(), "{:?}", v.counterexample);
    }
}
