//! Synthesis inputs (the built-in example or a set of files), their side
//! conditions, and the controller wiring built from them.

use std::collections::BTreeMap;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};
use symctl_core::case::{self, CasePlant, GridAbstraction};
use symctl_core::checker::{
    check_acasr, check_acsr, check_metric_bound, check_relation, check_uniform_witness, related_pairs, Kind, Verdict,
    WitnessVerdict,
};
use symctl_core::lift::{lift_relation_r, ControllerParts, EnumeratedChain};
use symctl_core::observer::{BoundQuantizer, EnumeratedOutputs, Observer};
use symctl_core::{AcParams, Dec, Error as CoreError, InputMetric, TransitionSystem};

use crate::error::{CliError, Result};
use crate::formats::{Metric, MetricDoc, ParamsDoc, Plant, Rel, RelationDoc, Sys, SystemDoc};

pub const SPEC_RELATION: &str = "specification relation";
pub const CONTROL_RELATION: &str = "control relation";
pub const OBSERVATION_RELATION: &str = "observation relation";
pub const SPEC_WITNESS: &str = "specification input witness";
pub const METRIC_BOUND: &str = "metric bound";
pub const CONTROL_WITNESS: &str = "abstraction input witness";
pub const PLANT_WITNESS: &str = "plant input witness";

/// Outcome of one side condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub name: &'static str,
    pub holds: bool,
    /// Checked on a sample of plant states rather than exhaustively.
    pub sampled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs_checked: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

fn from_verdict<X: Debug, Y: Debug, U: Debug>(name: &'static str, v: &Verdict<X, Y, U>) -> ConditionReport {
    ConditionReport {
        name,
        holds: v.ok(),
        sampled: v.sampled,
        pairs_checked: Some(v.pairs_checked),
        counterexample: v.counterexample.as_ref().map(|c| format!("{c:?}")),
    }
}

fn from_witness<X1: Debug, X2: Debug, U1: Debug, U2: Debug>(
    name: &'static str,
    v: &WitnessVerdict<X1, X2, U1, U2>,
) -> ConditionReport {
    ConditionReport {
        name,
        holds: v.ok(),
        sampled: v.sampled,
        pairs_checked: None,
        counterexample: v.failure.as_ref().map(|f| format!("{f:?}")),
    }
}

/// Input maps `û_C → û → u → ǔ`.
#[derive(Clone, Debug, Default)]
pub struct Witnesses<Uc, Uh, U, Uo> {
    pub spec_to_cabs: BTreeMap<Uc, Uh>,
    pub cabs_to_plant: BTreeMap<Uh, U>,
    pub plant_to_obs: BTreeMap<U, Uo>,
}

pub struct Verified<Uc, Uh, U, Uo> {
    pub reports: Vec<ConditionReport>,
    pub witnesses: Witnesses<Uc, Uh, U, Uo>,
}

impl<Uc, Uh, U, Uo> Verified<Uc, Uh, U, Uo> {
    /// Fails with the first condition that does not hold.
    pub fn require(self) -> Result<Witnesses<Uc, Uh, U, Uo>> {
        match self.reports.iter().find(|r| !r.holds) {
            Some(r) => Err(CliError::Core(CoreError::Condition {
                condition: r.name,
                counterexample: r.counterexample.clone().unwrap_or_default(),
            })),
            None => Ok(self.witnesses),
        }
    }
}

/// Every side condition of the built-in example. Plant-side checks run on
/// the sampling adapter.
pub fn verify_case() -> Result<Verified<Dec, Dec, Dec, Dec>> {
    let spec = case::spec();
    let cabs = GridAbstraction::control();
    let oabs = GridAbstraction::observation();
    let plant = CasePlant::new();
    let zero = case::zero_metric();
    let mut reports = Vec::new();

    let v = check_acasr(&spec, &cabs, &case::spec_relation(), &AcParams::exact(), &zero, None)?;
    reports.push(from_verdict(SPEC_RELATION, &v));
    let v = check_acasr(&cabs, &plant, &case::cabs_relation(), &case::cabs_params(), &zero, Some(case::cabs_samples()))?;
    reports.push(from_verdict(CONTROL_RELATION, &v));
    let v = check_acsr(&plant, &oabs, &case::oabs_relation(), &case::oabs_params(), &zero, Some(case::oabs_samples()))?;
    reports.push(from_verdict(OBSERVATION_RELATION, &v));

    let pairs = related_pairs(&spec, &cabs, &case::spec_relation())?;
    let w7 = check_uniform_witness(&spec, &case::spec_relation(), pairs, false);
    reports.push(from_witness(SPEC_WITNESS, &w7));
    let u = case::inputs();
    let bad = check_metric_bound(&u, &u, &u, &zero, &zero, &zero);
    reports.push(metric_report(bad));
    let w9 = check_uniform_witness(&cabs, &case::cabs_relation(), case::cabs_samples(), true);
    reports.push(from_witness(CONTROL_WITNESS, &w9));
    let w10 = check_uniform_witness(&plant, &case::oabs_relation(), case::oabs_samples(), true);
    reports.push(from_witness(PLANT_WITNESS, &w10));

    Ok(Verified {
        reports,
        witnesses: Witnesses {
            spec_to_cabs: w7.witnesses,
            cabs_to_plant: w9.witnesses,
            plant_to_obs: w10.witnesses,
        },
    })
}

fn metric_report<T: Debug>(bad: Option<T>) -> ConditionReport {
    ConditionReport {
        name: METRIC_BOUND,
        holds: bad.is_none(),
        sampled: false,
        pairs_checked: None,
        counterexample: bad.map(|t| format!("{t:?}")),
    }
}

/// Synthesis inputs given as files. Embedded verbatim in controller
/// bundles so a bundle can be replayed on its own.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilesSource {
    pub spec: SystemDoc,
    pub cabs: SystemDoc,
    pub oabs: SystemDoc,
    pub plant: SystemDoc,
    /// From the control abstraction to the plant.
    pub rel_c: RelationDoc,
    /// Exact, from the specification to the control abstraction.
    pub rel_chat: RelationDoc,
    /// From the plant to the observation abstraction.
    pub rel_o: RelationDoc,
    pub params_c: ParamsDoc,
    pub params_o: ParamsDoc,
    pub metric_c: MetricDoc,
    pub metric_o: MetricDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dbar: Option<MetricDoc>,
}

pub struct FileModel {
    pub spec: Sys,
    pub cabs: Sys,
    pub oabs: Sys,
    pub plant: Plant,
    pub r: Rel,
    pub rc: Rel,
    pub rcheck: Rel,
    pub params_c: AcParams,
    pub params_o: AcParams,
    pub d: Metric,
    pub dcheck: Metric,
    pub dbar: Metric,
    /// `d̄` was given rather than derived, so the metric bound must be checked.
    pub dbar_given: bool,
}

impl FilesSource {
    /// Validates every part; `prefix` names where the parts came from in
    /// error messages.
    pub fn model(&self, prefix: &str) -> Result<FileModel> {
        let at = |part: &str| format!("{prefix}{part}");
        let spec = self.spec.to_system(&at("spec"))?;
        let cabs = self.cabs.to_system(&at("cabs"))?;
        let oabs = self.oabs.to_system(&at("oabs"))?;
        let plant = self.plant.to_plant(&at("plant"))?;
        let ps = plant.system();
        let r = self.rel_c.to_relation(&at("rel-c"), &cabs, ps)?;
        let rc = self.rel_chat.to_relation(&at("rel-chat"), &spec, &cabs)?;
        if rc.kappa() != Dec::ZERO || self.rel_chat.entries.iter().any(|e| e.gauge.0 != Dec::ZERO) {
            return Err(CliError::format(at("rel-chat"), "the specification relation must be exact (all gauges 0)"));
        }
        let rcheck = self.rel_o.to_relation(&at("rel-o"), ps, &oabs)?;
        let params_c = self.params_c.params()?;
        let params_o = self.params_o.params()?;
        for (name, rel, p) in [("rel-c", &r, &params_c), ("rel-o", &rcheck, &params_o)] {
            if rel.kappa() != p.kappa {
                return Err(CliError::format(
                    at(name),
                    format!("kappa {} differs from the parameter kappa {}", rel.kappa(), p.kappa),
                ));
            }
        }
        let d_table = self.metric_c.to_table(&at("metric-c"), cabs.inputs(), ps.inputs())?;
        let dc_table = self.metric_o.to_table(&at("metric-o"), ps.inputs(), oabs.inputs())?;
        let dbar_table = match &self.dbar {
            Some(m) => m.to_table(&at("dbar"), cabs.inputs(), oabs.inputs())?,
            None => derived_dbar(&d_table, &dc_table, cabs.inputs(), ps.inputs(), oabs.inputs()),
        };
        Ok(FileModel {
            d: InputMetric::from_table(d_table)?,
            dcheck: InputMetric::from_table(dc_table)?,
            dbar: InputMetric::from_table(dbar_table)?,
            dbar_given: self.dbar.is_some(),
            spec,
            cabs,
            oabs,
            plant,
            r,
            rc,
            rcheck,
            params_c,
            params_o,
        })
    }
}

/// `d̄(û, ǔ) = max_u d(û, u) + ď(u, ǔ)`, the least metric satisfying the metric bound.
fn derived_dbar(
    d: &BTreeMap<(String, String), Dec>,
    dc: &BTreeMap<(String, String), Dec>,
    uh: &[String],
    u: &[String],
    uo: &[String],
) -> BTreeMap<(String, String), Dec> {
    let get = |t: &BTreeMap<(String, String), Dec>, a: &String, b: &String| {
        t.get(&(a.clone(), b.clone())).copied().unwrap_or(Dec::ZERO)
    };
    let mut out = BTreeMap::new();
    for a in uh {
        for c in uo {
            let m = u.iter().map(|b| get(d, a, b) + get(dc, b, c)).max().unwrap_or(Dec::ZERO);
            if m != Dec::ZERO {
                out.insert((a.clone(), c.clone()), m);
            }
        }
    }
    out
}

pub type FileOracle = EnumeratedOutputs<Plant, String, String>;
pub type FileObserver = Observer<Sys, FileOracle>;
pub type FileParts = ControllerParts<Sys, Sys, String, String, String>;

impl FileModel {
    /// All side conditions, checked exhaustively.
    pub fn verify(&self) -> Result<Verified<String, String, String, String>> {
        let ps = self.plant.system();
        let zero = InputMetric::zero();
        let mut reports = Vec::new();
        let v = check_acasr(&self.spec, &self.cabs, &self.rc, &AcParams::exact(), &zero, None)?;
        reports.push(from_verdict(SPEC_RELATION, &v));
        let v = check_acasr(&self.cabs, ps, &self.r, &self.params_c, &self.d, None)?;
        reports.push(from_verdict(CONTROL_RELATION, &v));
        let v = check_acsr(ps, &self.oabs, &self.rcheck, &self.params_o, &self.dcheck, None)?;
        reports.push(from_verdict(OBSERVATION_RELATION, &v));

        let w7 = check_uniform_witness(&self.spec, &self.rc, related_pairs(&self.spec, &self.cabs, &self.rc)?, false);
        reports.push(from_witness(SPEC_WITNESS, &w7));
        let bad = self.dbar_given.then(|| {
            check_metric_bound(self.cabs.inputs(), ps.inputs(), self.oabs.inputs(), &self.d, &self.dcheck, &self.dbar)
        });
        reports.push(metric_report(bad.flatten()));
        let w9 = check_uniform_witness(&self.cabs, &self.r, related_pairs(&self.cabs, ps, &self.r)?, false);
        reports.push(from_witness(CONTROL_WITNESS, &w9));
        let w10 = check_uniform_witness(ps, &self.rcheck, related_pairs(ps, &self.oabs, &self.rcheck)?, false);
        reports.push(from_witness(PLANT_WITNESS, &w10));
        Ok(Verified {
            reports,
            witnesses: Witnesses {
                spec_to_cabs: w7.witnesses,
                cabs_to_plant: w9.witnesses,
                plant_to_obs: w10.witnesses,
            },
        })
    }

    /// Whether the observation relation is also a bisimulation, which the
    /// chained relation relies on.
    pub fn observation_is_bisimulation(&self) -> Result<bool> {
        let v = check_relation(
            Kind::Bisimulation,
            self.plant.system(),
            &self.oabs,
            &self.rcheck,
            &self.params_o,
            &self.dcheck,
            None,
        )?;
        Ok(v.ok())
    }

    pub fn observer(&self, depth: usize) -> Result<FileObserver> {
        let ps = self.plant.system();
        let d_max = ps
            .inputs()
            .iter()
            .flat_map(|u| self.oabs.inputs().iter().map(move |v| self.dcheck.eval(u, v)))
            .max()
            .unwrap_or(Dec::ZERO);
        let quant = BoundQuantizer::new(&self.params_o, d_max, depth, None)?;
        let oracle = EnumeratedOutputs::new(self.plant.clone(), self.rcheck.clone())?;
        Ok(Observer::new(self.oabs.clone(), oracle, self.params_o, self.dcheck.clone(), quant))
    }

    pub fn parts(&self, w: &Witnesses<String, String, String, String>) -> Result<FileParts> {
        let chain = EnumeratedChain::new(self.plant.system(), self.r.clone(), self.rcheck.clone())?;
        Ok(ControllerParts {
            spec: self.spec.clone(),
            cabs: self.cabs.clone(),
            rc: self.rc.clone(),
            chain: lift_relation_r(
                chain,
                self.params_c.kappa,
                self.params_o.kappa,
                self.cabs.inputs().to_vec(),
                self.oabs.inputs().to_vec(),
            ),
            params: self.params_c.composite(&self.params_o),
            dbar: self.dbar.clone(),
            spec_to_cabs: w.spec_to_cabs.clone(),
            cabs_to_plant: w.cabs_to_plant.clone(),
            plant_to_obs: w.plant_to_obs.clone(),
        })
    }
}
