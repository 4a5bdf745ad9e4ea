//! Controller bundles: the synthesized transition table with its legend,
//! witness maps and parameters, plus the inputs it was built from.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;

use serde::{Deserialize, Serialize};
use symctl_core::lift::{Controller, ControllerState, Synthesis};
use symctl_core::observer::OutputOracle;
use symctl_core::simulate::Record;
use symctl_core::{Dec, Error as CoreError, TransitionSystem};

use crate::error::{CliError, Result};
use crate::formats::{read_json, Num, ParamsDoc};
use crate::model::FilesSource;

pub const FORMAT: &str = "symctl-controller/1";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    /// A built-in model by name.
    Builtin { name: String, depth: usize },
    Files { depth: usize, files: Box<FilesSource> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDoc {
    pub spec_to_cabs: BTreeMap<String, String>,
    pub cabs_to_plant: BTreeMap<String, String>,
    pub plant_to_obs: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateDoc {
    pub state: String,
    pub bound: Num,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDoc {
    pub spec: String,
    pub cabs: String,
    pub plant: String,
    pub obs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub id: String,
    pub spec: Vec<String>,
    pub cabs: Vec<String>,
    pub obs: Vec<CandidateDoc>,
    pub input: InputDoc,
    /// Measured output to successor id.
    pub next: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub format: String,
    pub source: Source,
    pub params: ParamsDoc,
    pub witness: WitnessDoc,
    pub observer_states: usize,
    /// First measured output to initial state id.
    pub initial: BTreeMap<String, String>,
    pub states: Vec<StateDoc>,
}

fn render<K: Display, V: Display>(m: &BTreeMap<K, V>) -> BTreeMap<String, String> {
    m.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

pub fn state_id(i: usize) -> String {
    format!("c{i}")
}

type Syn<Sc, Sh, A, O> = Synthesis<
    ControllerState<<Sc as TransitionSystem>::State, <Sh as TransitionSystem>::State, <A as TransitionSystem>::State>,
    (
        (<Sc as TransitionSystem>::Input, <Sh as TransitionSystem>::Input),
        <A as TransitionSystem>::Input,
    ),
    <O as OutputOracle>::Output,
>;

impl Bundle {
    pub fn build<Sc, Sh, A, O>(source: Source, ctl: &Controller<'_, Sc, Sh, A, O>, syn: &Syn<Sc, Sh, A, O>) -> Result<Self>
    where
        Sc: TransitionSystem,
        Sh: TransitionSystem,
        A: TransitionSystem,
        Sc::State: Display + 'static,
        Sc::Input: Display + 'static,
        Sh::State: Display + 'static,
        Sh::Input: Display + 'static,
        A::State: Display + 'static,
        A::Input: Display + 'static,
        O: OutputOracle<AbsState = A::State, AbsInput = A::Input>,
        O::PlantInput: Display,
        O::Output: Display,
    {
        let mut states = Vec::with_capacity(syn.system.len());
        for (i, st) in syn.system.state_list().iter().enumerate() {
            let act = ctl.actuation(st)?;
            states.push(StateDoc {
                id: state_id(i),
                spec: st.spec.iter().map(|x| x.to_string()).collect(),
                cabs: st.cabs.iter().map(|x| x.to_string()).collect(),
                obs: st
                    .obs
                    .candidates()
                    .iter()
                    .map(|(x, b)| CandidateDoc {
                        state: x.to_string(),
                        bound: Num(*b),
                    })
                    .collect(),
                input: InputDoc {
                    spec: act.spec.to_string(),
                    cabs: act.cabs.to_string(),
                    plant: act.plant.to_string(),
                    obs: act.obs.to_string(),
                },
                next: syn.by_output[i].iter().map(|(y, j)| (y.to_string(), state_id(*j))).collect(),
            });
        }
        let parts = ctl.parts();
        Ok(Bundle {
            format: FORMAT.into(),
            source,
            params: parts.params.into(),
            witness: WitnessDoc {
                spec_to_cabs: render(&parts.spec_to_cabs),
                cabs_to_plant: render(&parts.cabs_to_plant),
                plant_to_obs: render(&parts.plant_to_obs),
            },
            observer_states: syn.observer_states,
            initial: syn.initial_by_output.iter().map(|(y, j)| (y.to_string(), state_id(*j))).collect(),
            states,
        })
    }

    /// Reads and structurally validates a bundle.
    pub fn load(path: &Path) -> Result<Self> {
        let b: Bundle = read_json(path)?;
        b.validate(&path.display().to_string())?;
        Ok(b)
    }

    fn validate(&self, file: &str) -> Result<()> {
        let bad = |m: String| CliError::format(file, m);
        if self.format != FORMAT {
            return Err(bad(format!("format: expected {FORMAT:?}, got {:?}", self.format)));
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.id != state_id(i) {
                return Err(bad(format!("states[{i}].id: expected {:?}, got {:?}", state_id(i), s.id)));
            }
            if s.obs.is_empty() || s.cabs.is_empty() || s.spec.is_empty() {
                return Err(bad(format!("states[{i}]: empty component")));
            }
            for (y, to) in &s.next {
                if self.index(to).is_none() {
                    return Err(bad(format!("states[{i}].next[{y:?}]: unknown state {to:?}")));
                }
            }
        }
        for (y, to) in &self.initial {
            if self.index(to).is_none() {
                return Err(bad(format!("initial[{y:?}]: unknown state {to:?}")));
            }
        }
        Ok(())
    }

    fn index(&self, id: &str) -> Option<usize> {
        let i: usize = id.strip_prefix('c')?.parse().ok()?;
        (i < self.states.len()).then_some(i)
    }

    pub fn witness_from<K: Display, V: Display>(m: &BTreeMap<K, V>) -> BTreeMap<String, String> {
        render(m)
    }

    /// Follows the table along a trace of the rebuilt controller and fails
    /// at the first step where the two disagree.
    pub fn check_trace<X, U: Display, Uc: Display, Y: Display>(&self, trace: &[Record<X, U, Uc, Y>]) -> Result<()> {
        let mut cur: Option<usize> = None;
        for r in trace {
            let y = r.output.to_string();
            let to = match cur {
                None => self.initial.get(&y),
                Some(i) => self.states[i].next.get(&y),
            };
            let disagree = |what: String| {
                CliError::Core(CoreError::Internal(format!("step {}: bundle disagrees with the controller: {what}", r.k)))
            };
            let i = to
                .and_then(|id| self.index(id))
                .ok_or_else(|| disagree(format!("no successor for output {y}")))?;
            let s = &self.states[i];
            let bound = s.obs.iter().map(|c| c.bound.0).max().unwrap_or(Dec::ZERO);
            if s.obs.len() != r.n_obs
                || s.cabs.len() != r.n_ctrl
                || bound != r.bound
                || s.input.plant != r.input.to_string()
                || s.input.spec != r.spec_input.to_string()
            {
                return Err(disagree(format!("state {} does not match", s.id)));
            }
            cur = Some(i);
        }
        Ok(())
    }
}
