//! Subcommand implementations. Each returns `Ok(true)` on success and
//! `Ok(false)` when a check ran to completion and failed.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::Serialize;
use symctl_core::case::{self, CasePlant, CaseState, GridAbstraction};
use symctl_core::checker::{check_relation, check_uniform_witness, related_pairs, Counterexample, Kind, Verdict};
use symctl_core::compose::compose;
use symctl_core::lift::Controller;
use symctl_core::observer::{BoundQuantizer, EnumeratedOutputs, Observer, ObserverState};
use symctl_core::powerset::{lift, LiftedState, Powerset};
use symctl_core::simulate::{convergence, run, Channel, Dropouts, SeededChoice, BAND};
use symctl_core::{AcParams, Dec, Error as CoreError, FiniteSystem, InputMetric, TransitionSystem};

use crate::bundle::{Bundle, CandidateDoc, Source};
use crate::error::{CliError, Result, StageExt};
use crate::formats::{
    read_json, to_json, write_file, MetricArg, MetricDoc, Num, ParamsDoc, Rel, RelationDoc, Sys, SystemDoc,
};
use crate::model::{verify_case, ConditionReport, FilesSource, Witnesses};
use crate::trace;

/// Observer state count of the published example.
pub const REFERENCE_OBSERVER_STATES: usize = 10;
/// Controller state count of the published example.
pub const REFERENCE_CONTROLLER_STATES: usize = 27;

/// Default cap on explored states.
pub const MAX_STATES: usize = 100_000;

/// Largest system `lift` expands into all subsets.
pub const MAX_LIFT_BASE: usize = 8;

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| CliError::Usage(format!("missing {flag}")))
}

fn label(p: &Path) -> String {
    p.display().to_string()
}

fn load_system(p: &Path) -> Result<Sys> {
    SystemDoc::load(p)?.to_system(&label(p))
}

fn load_relation(p: &Path, left: &Sys, right: &Sys) -> Result<Rel> {
    RelationDoc::load(p)?.to_relation(&label(p), left, right)
}

fn same_kappa(rel: &Rel, p: &AcParams, what: &str) -> Result<()> {
    if rel.kappa() == p.kappa {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{what}: relation kappa {} differs from parameter kappa {}",
            rel.kappa(),
            p.kappa
        )))
    }
}

// ---- check-sr / check-asr ----

#[derive(Serialize)]
#[serde(tag = "condition", rename_all = "lowercase")]
enum CounterDoc {
    Init { x1: String },
    Step { x1: String, x2: String, u1: String, eps: Num },
}

#[derive(Serialize)]
struct CheckOut {
    relation: &'static str,
    holds: bool,
    sampled: bool,
    pairs_checked: usize,
    params: ParamsDoc,
    counterexample: Option<CounterDoc>,
}

fn check_out<X1: Display, X2: Display, U1: Display>(kind: Kind, p: &AcParams, v: Verdict<X1, X2, U1>) -> CheckOut {
    CheckOut {
        relation: match kind {
            Kind::Simulation => "simulation",
            Kind::Alternating => "alternating simulation",
            Kind::Bisimulation => "bisimulation",
        },
        holds: v.ok(),
        sampled: v.sampled,
        pairs_checked: v.pairs_checked,
        params: (*p).into(),
        counterexample: v.counterexample.map(|c| match c {
            Counterexample::Init { x1 } => CounterDoc::Init { x1: x1.to_string() },
            Counterexample::Step { x1, x2, u1, eps } => CounterDoc::Step {
                x1: x1.to_string(),
                x2: x2.to_string(),
                u1: u1.to_string(),
                eps: Num(eps),
            },
        }),
    }
}

pub struct CheckArgs {
    pub builtin: bool,
    pub left: Option<PathBuf>,
    pub right: Option<PathBuf>,
    pub relation: Option<PathBuf>,
    pub kappa: Option<Dec>,
    pub beta: Option<Dec>,
    pub lambda: Option<Dec>,
    pub metric: Option<MetricArg>,
}

impl CheckArgs {
    fn params(&self, default: AcParams) -> Result<AcParams> {
        Ok(AcParams::new(
            self.kappa.unwrap_or(default.kappa),
            self.beta.unwrap_or(default.beta),
            self.lambda.unwrap_or(default.lambda),
        )?)
    }
}

pub fn check(kind: Kind, a: &CheckArgs) -> Result<bool> {
    let out = if a.builtin {
        check_case(kind, a)?
    } else {
        let left = load_system(need(&a.left, "--left")?)?;
        let right = load_system(need(&a.right, "--right")?)?;
        let rel = load_relation(need(&a.relation, "--relation")?, &left, &right)?;
        let p = a.params(AcParams::new(rel.kappa(), Dec::ZERO, Dec::ZERO)?)?;
        same_kappa(&rel, &p, "--kappa")?;
        let table = a.metric.clone().unwrap_or(MetricArg::Zero).load(left.inputs(), right.inputs())?;
        let d = InputMetric::from_table(table)?;
        check_out(kind, &p, check_relation(kind, &left, &right, &rel, &p, &d, None)?)
    };
    print!("{}", to_json(&out));
    Ok(out.holds)
}

/// The control relation for `check-asr`, the observation relation for
/// `check-sr`, each on the sampling adapter at the chosen radius.
fn check_case(kind: Kind, a: &CheckArgs) -> Result<CheckOut> {
    if a.left.is_some() || a.right.is_some() || a.relation.is_some() {
        return Err(CliError::Usage("--builtin takes no system or relation files".into()));
    }
    if matches!(a.metric, Some(MetricArg::File(_))) {
        return Err(CliError::Usage("--builtin only supports --metric zero".into()));
    }
    let zero = case::zero_metric();
    match kind {
        Kind::Alternating => {
            let p = a.params(case::cabs_params())?;
            let abs = GridAbstraction::control();
            let pairs = case::sample_pairs(&abs, case::sample_radius(&p));
            let v = check_relation(kind, &abs, &CasePlant::new(), &case::distance_relation(p.kappa), &p, &zero, Some(pairs))?;
            Ok(check_out(kind, &p, v))
        }
        _ => {
            let p = a.params(case::oabs_params())?;
            let abs = GridAbstraction::observation();
            let pairs = case::sample_pairs(&abs, case::sample_radius(&p)).into_iter().map(|(a, x)| (x, a)).collect();
            let v = check_relation(kind, &CasePlant::new(), &abs, &case::distance_relation(p.kappa), &p, &zero, Some(pairs))?;
            Ok(check_out(kind, &p, v))
        }
    }
}

// ---- compose ----

#[derive(Serialize)]
struct PairDoc {
    id: String,
    left: String,
    right: String,
}

#[derive(Serialize)]
struct ComposeOut {
    params: ParamsDoc,
    /// No initial pair is related.
    vacuous: bool,
    system: SystemDoc,
    states: Vec<PairDoc>,
    inputs: Vec<PairDoc>,
}

pub struct ComposeArgs {
    pub left: PathBuf,
    pub right: PathBuf,
    pub relation: PathBuf,
    pub params: AcParams,
    pub metric: MetricArg,
    pub out: Option<PathBuf>,
}

pub fn compose_cmd(a: &ComposeArgs) -> Result<bool> {
    let left = load_system(&a.left)?;
    let right = load_system(&a.right)?;
    let rel = load_relation(&a.relation, &left, &right)?;
    same_kappa(&rel, &a.params, "--params")?;
    let d = InputMetric::from_table(a.metric.load(left.inputs(), right.inputs())?)?;
    let c = compose(&left, &right, &rel, &a.params, &d)?;
    let sys = &c.system;
    let out = ComposeOut {
        params: a.params.into(),
        vacuous: c.vacuous,
        system: SystemDoc::from_system(sys, |i, _| format!("q{i}"), |i, _| format!("v{i}")),
        states: pair_legend(sys.state_list(), "q"),
        inputs: pair_legend(sys.inputs(), "v"),
    };
    emit(a.out.as_deref(), &to_json(&out))?;
    Ok(true)
}

fn pair_legend(items: &[(String, String)], prefix: &str) -> Vec<PairDoc> {
    items
        .iter()
        .enumerate()
        .map(|(i, (l, r))| PairDoc {
            id: format!("{prefix}{i}"),
            left: l.clone(),
            right: r.clone(),
        })
        .collect()
}

// ---- observer ----

#[derive(Serialize)]
struct ObserverLegend {
    id: String,
    candidates: Vec<CandidateDoc>,
}

#[derive(Serialize)]
struct ObserverOut {
    params: ParamsDoc,
    /// Bound levels candidates are rounded up to.
    levels: Vec<Num>,
    system: SystemDoc,
    legend: Vec<ObserverLegend>,
}

pub struct ObserverArgs {
    pub plant: String,
    pub oabs: Option<PathBuf>,
    pub relation: Option<PathBuf>,
    pub params: Option<AcParams>,
    pub metric: Option<MetricArg>,
    pub depth: usize,
    pub max_states: usize,
    pub out: Option<PathBuf>,
}

fn observer_out<Xc: Clone + Ord + std::fmt::Debug + Display, U: Display + Clone + Ord + std::fmt::Debug>(
    params: &AcParams,
    quant: &BoundQuantizer,
    sys: &FiniteSystem<ObserverState<Xc>, U>,
) -> ObserverOut {
    ObserverOut {
        params: (*params).into(),
        levels: quant.levels().iter().map(|l| Num(*l)).collect(),
        system: SystemDoc::from_system(sys, |i, _| format!("o{i}"), |_, u| u.to_string()),
        legend: sys
            .state_list()
            .iter()
            .enumerate()
            .map(|(i, st)| ObserverLegend {
                id: format!("o{i}"),
                candidates: candidates(st),
            })
            .collect(),
    }
}

fn candidates<Xc: Ord + Clone + Display>(st: &ObserverState<Xc>) -> Vec<CandidateDoc> {
    st.candidates()
        .iter()
        .map(|(x, b)| CandidateDoc {
            state: x.to_string(),
            bound: Num(*b),
        })
        .collect()
}

pub fn observer_cmd(a: &ObserverArgs) -> Result<bool> {
    let out = if a.plant == "builtin:case" {
        if a.oabs.is_some() || a.relation.is_some() || a.params.is_some() || a.metric.is_some() {
            return Err(CliError::Usage(
                "--plant builtin:case uses the built-in abstraction, relation, parameters and metric".into(),
            ));
        }
        let obs = case::observer(a.depth)?;
        let sys = obs.system(&case::identity_inputs(), a.max_states)?;
        observer_out(obs.params(), obs.quantizer(), &sys)
    } else {
        let path = PathBuf::from(a.plant.strip_prefix("file:").unwrap_or(&a.plant));
        let plant = SystemDoc::load(&path)?.to_plant(&label(&path))?;
        let oabs = load_system(need(&a.oabs, "--oabs")?)?;
        let rel = load_relation(need(&a.relation, "--relation")?, plant.system(), &oabs)?;
        let params = *need(&a.params, "--params")?;
        same_kappa(&rel, &params, "--params")?;
        let table = a.metric.clone().unwrap_or(MetricArg::Zero).load(plant.inputs(), oabs.inputs())?;
        let d_max = table.values().copied().max().unwrap_or(Dec::ZERO);
        let dcheck = InputMetric::from_table(table)?;
        let w = check_uniform_witness(plant.system(), &rel, related_pairs(plant.system(), &oabs, &rel)?, false);
        if let Some(f) = &w.failure {
            return Err(CliError::Core(CoreError::Condition {
                condition: crate::model::PLANT_WITNESS,
                counterexample: format!("{f:?}"),
            }));
        }
        let quant = BoundQuantizer::new(&params, d_max, a.depth, None)?;
        let obs = Observer::new(oabs, EnumeratedOutputs::new(plant, rel)?, params, dcheck, quant);
        let sys = obs.system(&w.witnesses, a.max_states)?;
        observer_out(&params, obs.quantizer(), &sys)
    };
    emit(a.out.as_deref(), &to_json(&out))?;
    Ok(true)
}

// ---- lift ----

/// Lifted system restricted to the largest successor per input, starting
/// from the full initial set.
struct MaximalLift(Powerset<String, String>, LiftedState<String>);

impl TransitionSystem for MaximalLift {
    type State = LiftedState<String>;
    type Input = String;

    fn initial_states(&self) -> Vec<LiftedState<String>> {
        vec![self.1.clone()]
    }

    fn inputs(&self) -> &[String] {
        self.0.inputs()
    }

    fn contains(&self, x: &LiftedState<String>) -> bool {
        self.0.contains(x)
    }

    fn post(&self, x: &LiftedState<String>, u: &String) -> Vec<LiftedState<String>> {
        self.0.maximal_post(x, u).into_iter().collect()
    }
}

#[derive(Serialize)]
struct SetDoc {
    id: String,
    members: Vec<String>,
}

#[derive(Serialize)]
struct LiftOut {
    system: SystemDoc,
    legend: Vec<SetDoc>,
}

pub fn lift_cmd(system: &Path, maximal: bool, out: Option<&Path>) -> Result<bool> {
    let sys = load_system(system)?;
    let lifted = if maximal {
        let init: std::collections::BTreeSet<String> = sys.initial_states().into_iter().collect();
        let Some(init) = LiftedState::new(init) else {
            return Err(CliError::Usage("the system has no initial state".into()));
        };
        FiniteSystem::reachable(&MaximalLift(lift(&sys), init))
    } else {
        if sys.len() > MAX_LIFT_BASE {
            return Err(CliError::Usage(format!(
                "{} states: full lifting is limited to {MAX_LIFT_BASE}; use --maximal",
                sys.len()
            )));
        }
        FiniteSystem::reachable(&lift(&sys))
    };
    let doc = LiftOut {
        system: SystemDoc::from_system(&lifted, |i, _| format!("l{i}"), |_, u| u.clone()),
        legend: lifted
            .state_list()
            .iter()
            .enumerate()
            .map(|(i, s)| SetDoc {
                id: format!("l{i}"),
                members: s.iter().cloned().collect(),
            })
            .collect(),
    };
    emit(out, &to_json(&doc))?;
    Ok(true)
}

// ---- synth ----

pub struct SynthArgs {
    pub builtin: bool,
    pub spec: Option<PathBuf>,
    pub cabs: Option<PathBuf>,
    pub oabs: Option<PathBuf>,
    pub plant: Option<PathBuf>,
    pub rel_c: Option<PathBuf>,
    pub rel_chat: Option<PathBuf>,
    pub rel_o: Option<PathBuf>,
    pub params_c: Option<AcParams>,
    pub params_o: Option<AcParams>,
    pub metric_c: Option<MetricArg>,
    pub metric_o: Option<MetricArg>,
    pub dbar: Option<PathBuf>,
    pub depth: usize,
    pub max_states: usize,
    pub out: Option<PathBuf>,
}

impl SynthArgs {
    fn any_file(&self) -> bool {
        [&self.spec, &self.cabs, &self.oabs, &self.plant, &self.rel_c, &self.rel_chat, &self.rel_o, &self.dbar]
            .iter()
            .any(|p| p.is_some())
            || self.params_c.is_some()
            || self.params_o.is_some()
            || self.metric_c.is_some()
            || self.metric_o.is_some()
    }

    fn files(&self) -> Result<FilesSource> {
        let metric = |m: &Option<MetricArg>| -> Result<MetricDoc> {
            match m {
                None | Some(MetricArg::Zero) => Ok(MetricDoc { entries: Vec::new() }),
                Some(MetricArg::File(p)) => read_json(p),
            }
        };
        Ok(FilesSource {
            spec: SystemDoc::load(need(&self.spec, "--spec")?)?,
            cabs: SystemDoc::load(need(&self.cabs, "--cabs")?)?,
            oabs: SystemDoc::load(need(&self.oabs, "--oabs")?)?,
            plant: SystemDoc::load(need(&self.plant, "--plant")?)?,
            rel_c: RelationDoc::load(need(&self.rel_c, "--rel-c")?)?,
            rel_chat: RelationDoc::load(need(&self.rel_chat, "--rel-chat")?)?,
            rel_o: RelationDoc::load(need(&self.rel_o, "--rel-o")?)?,
            params_c: (*need(&self.params_c, "--params-c")?).into(),
            params_o: (*need(&self.params_o, "--params-o")?).into(),
            metric_c: metric(&self.metric_c)?,
            metric_o: metric(&self.metric_o)?,
            dbar: self.dbar.as_deref().map(read_json).transpose()?,
        })
    }
}

/// Every synthesized state must chain its abstraction set to its observer
/// candidates.
fn coverage<Sc, Sh, A, O>(ctl: &Controller<'_, Sc, Sh, A, O>, states: &[symctl_core::lift::ControllerState<Sc::State, Sh::State, A::State>]) -> Result<()>
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
    O: symctl_core::observer::OutputOracle<AbsState = A::State, AbsInput = A::Input>,
{
    for (i, st) in states.iter().enumerate() {
        if !ctl.level(st).is_finite() {
            return Err(CliError::Core(CoreError::Internal(format!("controller state {i} is not covered: {st:?}"))));
        }
    }
    Ok(())
}

pub fn synth_cmd(a: &SynthArgs) -> Result<bool> {
    let bundle = if a.builtin {
        if a.any_file() {
            return Err(CliError::Usage("--builtin takes no model files or parameters".into()));
        }
        synth_case(a.depth, a.max_states)?.0
    } else {
        let files = a.files()?;
        let model = files.model("--")?;
        let w = model.verify().and_then(|v| v.require()).stage("verification")?;
        if !model.observation_is_bisimulation()? {
            eprintln!("note: the observation relation is not a bisimulation; coverage may fail");
        }
        let obs = model.observer(a.depth)?;
        let ctl = Controller::new(model.parts(&w)?, &obs);
        let syn = ctl.synthesize(a.max_states).stage("synthesis")?;
        coverage(&ctl, syn.system.state_list())?;
        let source = Source::Files {
            depth: a.depth,
            files: Box::new(files),
        };
        Bundle::build(source, &ctl, &syn)?
    };
    emit(a.out.as_deref(), &to_json(&bundle))?;
    Ok(true)
}

struct CaseSynthesis {
    reports: Vec<ConditionReport>,
    closed_loop_observer: usize,
    controller_states: usize,
}

/// Verifies the built-in example's side conditions and synthesizes its
/// controller.
fn synth_case(depth: usize, max_states: usize) -> Result<(Bundle, CaseSynthesis)> {
    let verified = verify_case().stage("verification")?;
    let reports = verified.reports.clone();
    let w = verified.require().stage("verification")?;
    let obs = case::observer(depth).stage("observer")?;
    let ctl = case::controller(&obs);
    let parts = ctl.parts();
    if w.spec_to_cabs != parts.spec_to_cabs || w.cabs_to_plant != parts.cabs_to_plant || w.plant_to_obs != parts.plant_to_obs {
        return Err(CliError::Core(CoreError::Internal("verified witness maps differ from the built-in ones".into())));
    }
    let syn = ctl.synthesize(max_states).stage("synthesis")?;
    coverage(&ctl, syn.system.state_list()).stage("synthesis")?;
    let source = Source::Builtin {
        name: "case".into(),
        depth,
    };
    let bundle = Bundle::build(source, &ctl, &syn)?;
    let info = CaseSynthesis {
        reports,
        closed_loop_observer: syn.observer_states,
        controller_states: syn.system.len(),
    };
    Ok((bundle, info))
}

// ---- simulate ----

pub struct SimulateArgs {
    pub controller: PathBuf,
    pub steps: usize,
    pub seed: Option<u64>,
    pub dropouts: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// One line per step, two bits each: input lost, measurement lost.
pub fn read_schedule(path: &Path) -> Result<Vec<(bool, bool)>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bits: Vec<char> = line.chars().filter(|c| !c.is_whitespace() && *c != ',').collect();
        match bits.as_slice() {
            [a @ ('0' | '1'), b @ ('0' | '1')] => out.push((*a == '1', *b == '1')),
            _ => {
                return Err(CliError::format(
                    label(path),
                    format!("line {}: expected two bits, got {line:?}", i + 1),
                ))
            }
        }
    }
    Ok(out)
}

fn untracked<X, U, Uc, Y>(trace: &[symctl_core::simulate::Record<X, U, Uc, Y>]) -> Result<()> {
    match trace.iter().find(|r| !r.tracked) {
        Some(r) => Err(CliError::Core(CoreError::Internal(format!(
            "step {}: no observer candidate covers the plant state",
            r.k
        )))),
        None => Ok(()),
    }
}

pub fn simulate_cmd(a: &SimulateArgs) -> Result<bool> {
    let bundle = Bundle::load(&a.controller)?;
    let mut csv = Vec::new();
    match &bundle.source {
        Source::Builtin { name, depth } => {
            if name != "case" {
                return Err(CliError::format(label(&a.controller), format!("source: unknown builtin {name:?}")));
            }
            let dropouts = match (&a.dropouts, a.seed) {
                (Some(p), _) => Dropouts::Schedule(read_schedule(p)?),
                (None, Some(s)) => Dropouts::Seeded(s),
                (None, None) => Dropouts::None,
            };
            let obs = case::observer(*depth)?;
            let ctl = case::controller(&obs);
            check_witnesses(&bundle, &ctl.parts().spec_to_cabs, &ctl.parts().cabs_to_plant, &ctl.parts().plant_to_obs, &a.controller)?;
            let tr = run(&ctl, &CasePlant::new(), &case::oabs_relation(), &mut Channel::new(dropouts), a.steps)
                .stage("simulation")?;
            bundle.check_trace(&tr)?;
            trace::write_case(&mut csv, &tr)?;
            emit(a.out.as_deref(), &String::from_utf8(csv).expect("csv is utf-8"))?;
            untracked(&tr)?;
        }
        Source::Files { depth, files } => {
            if a.dropouts.is_some() {
                return Err(CliError::Usage("--dropouts applies to the built-in example only".into()));
            }
            let model = files.model("bundle source ")?;
            let w = Witnesses {
                spec_to_cabs: bundle.witness.spec_to_cabs.clone(),
                cabs_to_plant: bundle.witness.cabs_to_plant.clone(),
                plant_to_obs: bundle.witness.plant_to_obs.clone(),
            };
            let obs = model.observer(*depth)?;
            let ctl = Controller::new(model.parts(&w)?, &obs);
            let mut env = SeededChoice::new(a.seed.unwrap_or(0));
            let tr = run(&ctl, &model.plant, &model.rcheck, &mut env, a.steps).stage("simulation")?;
            bundle.check_trace(&tr)?;
            trace::write_generic(&mut csv, &tr)?;
            emit(a.out.as_deref(), &String::from_utf8(csv).expect("csv is utf-8"))?;
            untracked(&tr)?;
        }
    }
    Ok(true)
}

fn check_witnesses<A: Display, B: Display, C: Display, D: Display>(
    bundle: &Bundle,
    a: &BTreeMap<A, B>,
    b: &BTreeMap<B, C>,
    c: &BTreeMap<C, D>,
    path: &Path,
) -> Result<()> {
    let w = &bundle.witness;
    if w.spec_to_cabs != Bundle::witness_from(a) || w.cabs_to_plant != Bundle::witness_from(b) || w.plant_to_obs != Bundle::witness_from(c) {
        return Err(CliError::format(label(path), "witness: maps differ from the built-in example"));
    }
    Ok(())
}

// ---- export ----

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Plant,
    Cabs,
    Oabs,
    Spec,
    Relations,
}

#[derive(Serialize)]
struct RelationsOut {
    /// Exact, specification to control abstraction.
    spec_to_cabs: RelationDoc,
    /// Control abstraction to the exported plant part; only gauges up to
    /// the contraction radius are listed.
    cabs_to_plant: RelationDoc,
    /// Exported plant part to observation abstraction, same restriction.
    plant_to_oabs: RelationDoc,
    params_c: ParamsDoc,
    params_o: ParamsDoc,
}

/// Plant states reachable within `depth` steps, with outputs.
fn plant_part(depth: usize) -> (SystemDoc, bool) {
    let plant = CasePlant::new();
    let (sys, cut) = FiniteSystem::reachable_bounded(&plant, depth);
    let mut doc = SystemDoc::from_display(&sys);
    doc.outputs = Some(
        sys.state_list()
            .iter()
            .map(|x| (x.to_string(), symctl_core::Outputs::output(&plant, x).to_string()))
            .collect(),
    );
    (doc, cut)
}

fn within(mut doc: RelationDoc, radius: Dec) -> RelationDoc {
    doc.entries.retain(|e| e.gauge.0 <= radius);
    doc
}

pub fn export_cmd(part: Part, depth: usize, out: Option<&Path>) -> Result<bool> {
    let text = match part {
        Part::Spec => to_json(&SystemDoc::from_display(&case::spec())),
        Part::Cabs => to_json(&SystemDoc::from_display(&FiniteSystem::reachable(&GridAbstraction::control()))),
        Part::Oabs => to_json(&SystemDoc::from_display(&FiniteSystem::reachable(&GridAbstraction::observation()))),
        Part::Plant => {
            let (doc, cut) = plant_part(depth);
            if cut {
                eprintln!("note: plant states beyond depth {depth} are omitted");
            }
            to_json(&doc)
        }
        Part::Relations => {
            let spec: Vec<CaseState> = case::spec().state_list().to_vec();
            let cabs = FiniteSystem::reachable(&GridAbstraction::control());
            let oabs = FiniteSystem::reachable(&GridAbstraction::observation());
            let (plant, _) = FiniteSystem::reachable_bounded(&CasePlant::new(), depth);
            let (pc, po) = (case::cabs_params(), case::oabs_params());
            let out = RelationsOut {
                spec_to_cabs: RelationDoc::from_relation(&case::spec_relation(), &spec, &spec),
                cabs_to_plant: within(
                    RelationDoc::from_relation(&case::cabs_relation(), cabs.state_list(), plant.state_list()),
                    case::sample_radius(&pc),
                ),
                plant_to_oabs: within(
                    RelationDoc::from_relation(&case::oabs_relation(), plant.state_list(), oabs.state_list()),
                    case::sample_radius(&po),
                ),
                params_c: pc.into(),
                params_o: po.into(),
            };
            to_json(&out)
        }
    };
    emit(out, &text)?;
    Ok(true)
}

// ---- repro ----

pub struct ReproArgs {
    pub out: PathBuf,
    pub seed: u64,
    pub steps: usize,
    pub depth: usize,
    pub max_states: usize,
}

#[derive(Serialize)]
struct ObserverCount {
    /// Distinct observer components among controller states.
    closed_loop: usize,
    /// Observer reachable under every input.
    open_loop: usize,
    reference: usize,
}

#[derive(Serialize)]
struct ControllerCount {
    count: usize,
    reference: usize,
    coverage: bool,
}

#[derive(Serialize)]
struct SimulationReport {
    seed: u64,
    steps: usize,
    /// First step in the band without dropouts.
    clean_entry: Option<usize>,
    clean_longest_excursion: usize,
    /// First step in the band with seeded dropouts.
    entry: Option<usize>,
    longest_excursion: usize,
    dropouts: usize,
    untracked: usize,
    max_observer_candidates: usize,
    max_controller_candidates: usize,
    /// Steps with more controller than observer candidates.
    controller_exceeds_observer: usize,
    controller_below_observer: usize,
}

#[derive(Serialize)]
struct Report {
    params: ParamsDoc,
    conditions: Vec<ConditionReport>,
    levels: Vec<Num>,
    observer_states: ObserverCount,
    controller_states: ControllerCount,
    simulation: Option<SimulationReport>,
}

fn render_report(r: &Report) -> String {
    let p = &r.params;
    let mut s = String::new();
    s += &format!("composite parameters: ({}, {}, {})\n", p.kappa.0, p.beta.0, p.lambda.0);
    for c in &r.conditions {
        let how = if c.sampled { "sampled" } else { "exhaustive" };
        s += &format!("condition {}: {} ({how})\n", c.name, if c.holds { "holds" } else { "FAILS" });
    }
    let o = &r.observer_states;
    s += &format!(
        "observer states: {} in closed loop ({:+} vs reference {}), {} under all inputs\n",
        o.closed_loop,
        o.closed_loop as i64 - o.reference as i64,
        o.reference,
        o.open_loop
    );
    let c = &r.controller_states;
    s += &format!(
        "controller states: {} ({:+} vs reference {}), coverage {}\n",
        c.count,
        c.count as i64 - c.reference as i64,
        c.reference,
        if c.coverage { "holds at every state" } else { "FAILS" }
    );
    match &r.simulation {
        None => s += "simulation: skipped\n",
        Some(m) => {
            let step = |e: Option<usize>| e.map_or("never".to_string(), |k| format!("step {k}"));
            s += &format!(
                "convergence without dropouts: enters [{}, {}) at {}, longest excursion {}\n",
                BAND.0,
                BAND.1,
                step(m.clean_entry),
                m.clean_longest_excursion
            );
            s += &format!(
                "convergence with seed {} ({} dropouts in {} steps): enters at {}, longest excursion {}\n",
                m.seed,
                m.dropouts,
                m.steps,
                step(m.entry),
                m.longest_excursion
            );
            s += &format!(
                "max candidates: observer {}, controller {}; untracked steps {}\n",
                m.max_observer_candidates, m.max_controller_candidates, m.untracked
            );
            s += &format!(
                "controller above observer at {} steps, below at {}\n",
                m.controller_exceeds_observer, m.controller_below_observer
            );
        }
    }
    s
}

pub fn repro_cmd(a: &ReproArgs) -> Result<bool> {
    std::fs::create_dir_all(&a.out).map_err(|source| CliError::Io {
        path: a.out.clone(),
        source,
    })?;
    let file = |name: &str| a.out.join(name);

    let (bundle, info) = synth_case(a.depth, a.max_states)?;
    write_file(&file("conditions.json"), &to_json(&info.reports))?;
    write_file(&file("controller.json"), &to_json(&bundle))?;
    write_file(&file("spec.json"), &to_json(&SystemDoc::from_display(&case::spec())))?;

    let obs = case::observer(a.depth).stage("observer")?;
    let open = obs.system(&case::identity_inputs(), a.max_states).stage("observer")?;
    write_file(&file("observer.json"), &to_json(&observer_out(obs.params(), obs.quantizer(), &open)))?;

    let simulation = if a.steps == 0 {
        let stale = file("trace.csv");
        if stale.exists() {
            std::fs::remove_file(&stale).map_err(|source| CliError::Io { path: stale, source })?;
        }
        None
    } else {
        let ctl = case::controller(&obs);
        let (plant, rel) = (CasePlant::new(), case::oabs_relation());
        let clean = run(&ctl, &plant, &rel, &mut Channel::new(Dropouts::None), a.steps).stage("simulation")?;
        let tr = run(&ctl, &plant, &rel, &mut Channel::new(Dropouts::Seeded(a.seed)), a.steps).stage("simulation")?;
        bundle.check_trace(&tr).stage("simulation")?;
        let mut csv = Vec::new();
        trace::write_case(&mut csv, &tr)?;
        write_file(&file("trace.csv"), &String::from_utf8(csv).expect("csv is utf-8"))?;
        let yc = |t: &[symctl_core::simulate::Record<CaseState, Dec, Dec, i64>]| t.iter().map(|r| r.state.yc()).collect::<Vec<_>>();
        let c0 = convergence(&yc(&clean));
        let c1 = convergence(&yc(&tr));
        Some(SimulationReport {
            seed: a.seed,
            steps: a.steps,
            clean_entry: c0.entry,
            clean_longest_excursion: c0.longest_excursion,
            entry: c1.entry,
            longest_excursion: c1.longest_excursion,
            dropouts: tr.iter().filter(|r| r.state.xi3 || r.state.xi4).count(),
            untracked: tr.iter().chain(&clean).filter(|r| !r.tracked).count(),
            max_observer_candidates: tr.iter().map(|r| r.n_obs).max().unwrap_or(0),
            max_controller_candidates: tr.iter().map(|r| r.n_ctrl).max().unwrap_or(0),
            controller_exceeds_observer: tr.iter().filter(|r| r.n_ctrl > r.n_obs).count(),
            controller_below_observer: tr.iter().filter(|r| r.n_ctrl < r.n_obs).count(),
        })
    };

    let report = Report {
        params: bundle.params,
        conditions: info.reports,
        levels: obs.quantizer().levels().iter().map(|l| Num(*l)).collect(),
        observer_states: ObserverCount {
            closed_loop: info.closed_loop_observer,
            open_loop: open.len(),
            reference: REFERENCE_OBSERVER_STATES,
        },
        controller_states: ControllerCount {
            count: info.controller_states,
            reference: REFERENCE_CONTROLLER_STATES,
            coverage: true,
        },
        simulation,
    };
    write_file(&file("report.json"), &to_json(&report))?;
    let text = render_report(&report);
    write_file(&file("report.txt"), &text)?;
    print!("{text}");
    Ok(true)
}
