//! JSON file formats: systems, plants, gauged relations, input metrics and
//! parameter triples. Identifiers are strings; decimals are JSON numbers read
//! digit for digit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde::de::{DeserializeOwned, Error as _};
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use symctl_core::{AcParams, Dec, FinitePlant, FiniteSystem, Gauge, GaugedRelation, InputMetric, TransitionSystem};

use crate::error::{CliError, Result};

pub type Sys = FiniteSystem<String, String>;
pub type Plant = FinitePlant<String, String, String>;
pub type Rel = GaugedRelation<String, String, String, String>;
pub type Metric = InputMetric<String, String>;

/// Decimal stored exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Num(pub Dec);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_json::Number::from_str(&self.0.to_string())
            .map_err(S::Error::custom)?
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::String(s) => s,
            other => return Err(D::Error::custom(format!("expected a decimal, got {other}"))),
        };
        text.parse::<Dec>().map(Num).map_err(D::Error::custom)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path.display().to_string(), e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialize");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub inputs: Vec<String>,
    /// `"<state>|<input>"` to successor list.
    pub trans: BTreeMap<String, Vec<String>>,
    /// Output per state; required for plants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<BTreeMap<String, String>>,
}

fn unique<'a>(file: &str, field: &str, what: &str, ids: &'a [String]) -> Result<BTreeSet<&'a str>> {
    let mut seen = BTreeSet::new();
    for (i, s) in ids.iter().enumerate() {
        if s.contains('|') {
            return Err(CliError::format(file, format!("{field}[{i}]: {what} {s:?} contains '|'")));
        }
        if !seen.insert(s.as_str()) {
            return Err(CliError::format(file, format!("{field}[{i}]: duplicate {what} {s:?}")));
        }
    }
    Ok(seen)
}

impl SystemDoc {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Validates and builds the system; `file` prefixes error paths.
    pub fn to_system(&self, file: &str) -> Result<Sys> {
        let bad = |m: String| CliError::format(file, m);
        let states = unique(file, "states", "state", &self.states)?;
        let inputs = unique(file, "inputs", "input", &self.inputs)?;
        for (i, s) in self.initial.iter().enumerate() {
            if !states.contains(s.as_str()) {
                return Err(bad(format!("initial[{i}]: unknown state {s:?}")));
            }
        }
        let mut edges = Vec::new();
        for (key, succ) in &self.trans {
            let Some((x, u)) = key.split_once('|') else {
                return Err(bad(format!("trans[{key:?}]: key must be \"<state>|<input>\"")));
            };
            if !states.contains(x) {
                return Err(bad(format!("trans[{key:?}]: unknown state {x:?}")));
            }
            if !inputs.contains(u) {
                return Err(bad(format!("trans[{key:?}]: unknown input {u:?}")));
            }
            for (j, y) in succ.iter().enumerate() {
                if !states.contains(y.as_str()) {
                    return Err(bad(format!("trans[{key:?}][{j}]: unknown state {y:?}")));
                }
                edges.push((x.to_string(), u.to_string(), y.clone()));
            }
        }
        Ok(FiniteSystem::new(self.states.clone(), self.initial.clone(), self.inputs.clone(), edges)?)
    }

    /// Like [`SystemDoc::to_system`] but also requires an output per state.
    pub fn to_plant(&self, file: &str) -> Result<Plant> {
        let sys = self.to_system(file)?;
        let Some(outputs) = &self.outputs else {
            return Err(CliError::format(file, "outputs: a plant needs an output per state"));
        };
        for k in outputs.keys() {
            if sys.index_of(k).is_none() {
                return Err(CliError::format(file, format!("outputs[{k:?}]: unknown state")));
            }
        }
        for s in sys.state_list() {
            if !outputs.contains_key(s) {
                return Err(CliError::format(file, format!("outputs: no output for state {s:?}")));
            }
        }
        Ok(FinitePlant::new(sys, outputs)?)
    }

    /// Renders any finite system, naming states and inputs by index.
    pub fn from_system<S, I>(
        sys: &FiniteSystem<S, I>,
        state_name: impl Fn(usize, &S) -> String,
        input_name: impl Fn(usize, &I) -> String,
    ) -> Self
    where
        S: Clone + Ord + std::fmt::Debug,
        I: Clone + Ord + std::fmt::Debug,
    {
        let states: Vec<String> = sys.state_list().iter().enumerate().map(|(i, s)| state_name(i, s)).collect();
        let inputs: Vec<String> = sys.inputs().iter().enumerate().map(|(i, u)| input_name(i, u)).collect();
        let mut trans = BTreeMap::new();
        for i in 0..sys.len() {
            for (k, u) in inputs.iter().enumerate() {
                let succ = sys.post_idx(i, k);
                if !succ.is_empty() {
                    trans.insert(format!("{}|{u}", states[i]), succ.iter().map(|&j| states[j].clone()).collect());
                }
            }
        }
        SystemDoc {
            initial: sys.initial_indices().iter().map(|&i| states[i].clone()).collect(),
            states,
            inputs,
            trans,
            outputs: None,
        }
    }

    /// Renders a system whose states and inputs print as identifiers.
    pub fn from_display<S, I>(sys: &FiniteSystem<S, I>) -> Self
    where
        S: Clone + Ord + std::fmt::Debug + Display,
        I: Clone + Ord + std::fmt::Debug + Display,
    {
        Self::from_system(sys, |_, s| s.to_string(), |_, u| u.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub x1: String,
    pub x2: String,
    pub u1: String,
    pub u2: String,
    pub gauge: Num,
}

/// Gauge table; absent tuples are unrelated at every level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    pub kappa: Num,
    pub entries: Vec<EntryDoc>,
}

impl RelationDoc {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Validates entries against the two systems and builds the relation.
    pub fn to_relation(&self, file: &str, left: &Sys, right: &Sys) -> Result<Rel> {
        let bad = |m: String| CliError::format(file, m);
        let kappa = self.kappa.0;
        if kappa.is_negative() {
            return Err(bad(format!("kappa: {kappa} is negative")));
        }
        let mut table = BTreeMap::new();
        for (i, e) in self.entries.iter().enumerate() {
            let checks = [
                ("x1", &e.x1, left.index_of(&e.x1).is_some(), "state"),
                ("x2", &e.x2, right.index_of(&e.x2).is_some(), "state"),
                ("u1", &e.u1, left.input_index(&e.u1).is_some(), "input"),
                ("u2", &e.u2, right.input_index(&e.u2).is_some(), "input"),
            ];
            for (field, v, ok, what) in checks {
                if !ok {
                    return Err(bad(format!("entries[{i}].{field}: unknown {what} {v:?}")));
                }
            }
            let g = e.gauge.0;
            if g < kappa {
                return Err(bad(format!("entries[{i}].gauge: {g} is below kappa {kappa}")));
            }
            let key = (e.x1.clone(), e.x2.clone(), e.u1.clone(), e.u2.clone());
            if table.insert(key, Gauge::Finite(g)).is_some() {
                return Err(bad(format!("entries[{i}]: duplicate tuple")));
            }
        }
        Ok(GaugedRelation::from_table(kappa, left.inputs().to_vec(), right.inputs().to_vec(), table)?)
    }

    /// Finite part of a relation over explicit state lists.
    pub fn from_relation<X1, X2, U1, U2>(rel: &GaugedRelation<X1, X2, U1, U2>, xs1: &[X1], xs2: &[X2]) -> Self
    where
        X1: Clone + Ord + std::fmt::Debug + Display + 'static,
        X2: Clone + Ord + std::fmt::Debug + Display + 'static,
        U1: Clone + Ord + std::fmt::Debug + Display + 'static,
        U2: Clone + Ord + std::fmt::Debug + Display + 'static,
    {
        RelationDoc {
            kappa: Num(rel.kappa()),
            entries: rel
                .tabulate(xs1, xs2)
                .into_iter()
                .map(|(a, b, u, v, g)| EntryDoc {
                    x1: a.to_string(),
                    x2: b.to_string(),
                    u1: u.to_string(),
                    u2: v.to_string(),
                    gauge: Num(g),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricEntry {
    pub u1: String,
    pub u2: String,
    pub d: Num,
}

/// Input metric table; absent pairs weigh 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDoc {
    pub entries: Vec<MetricEntry>,
}

impl MetricDoc {
    pub fn to_table(&self, file: &str, left: &[String], right: &[String]) -> Result<BTreeMap<(String, String), Dec>> {
        let bad = |m: String| CliError::format(file, m);
        let mut table = BTreeMap::new();
        for (i, e) in self.entries.iter().enumerate() {
            if !left.contains(&e.u1) {
                return Err(bad(format!("entries[{i}].u1: unknown input {:?}", e.u1)));
            }
            if !right.contains(&e.u2) {
                return Err(bad(format!("entries[{i}].u2: unknown input {:?}", e.u2)));
            }
            if e.d.0.is_negative() {
                return Err(bad(format!("entries[{i}].d: {} is negative", e.d.0)));
            }
            if table.insert((e.u1.clone(), e.u2.clone()), e.d.0).is_some() {
                return Err(bad(format!("entries[{i}]: duplicate pair")));
            }
        }
        Ok(table)
    }
}

/// `zero` or a metric file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricArg {
    Zero,
    File(std::path::PathBuf),
}

impl FromStr for MetricArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(if s == "zero" { MetricArg::Zero } else { MetricArg::File(s.into()) })
    }
}

impl MetricArg {
    pub fn load(&self, left: &[String], right: &[String]) -> Result<BTreeMap<(String, String), Dec>> {
        match self {
            MetricArg::Zero => Ok(BTreeMap::new()),
            MetricArg::File(p) => {
                let doc: MetricDoc = read_json(p)?;
                doc.to_table(&p.display().to_string(), left, right)
            }
        }
    }
}

pub fn metric_doc(table: &BTreeMap<(String, String), Dec>) -> MetricDoc {
    MetricDoc {
        entries: table
            .iter()
            .map(|((a, b), d)| MetricEntry {
                u1: a.clone(),
                u2: b.clone(),
                d: Num(*d),
            })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub kappa: Num,
    pub beta: Num,
    pub lambda: Num,
}

impl From<AcParams> for ParamsDoc {
    fn from(p: AcParams) -> Self {
        ParamsDoc {
            kappa: Num(p.kappa),
            beta: Num(p.beta),
            lambda: Num(p.lambda),
        }
    }
}

impl ParamsDoc {
    pub fn params(&self) -> Result<AcParams> {
        Ok(AcParams::new(self.kappa.0, self.beta.0, self.lambda.0)?)
    }
}

pub fn parse_dec(s: &str) -> std::result::Result<Dec, String> {
    s.parse::<Dec>().map_err(|e| e.to_string())
}

/// `κ,β,λ`, validated.
pub fn parse_params(s: &str) -> std::result::Result<AcParams, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [k, b, l] = parts.as_slice() else {
        return Err(format!("expected kappa,beta,lambda, got {s:?}"));
    };
    AcParams::new(parse_dec(k)?, parse_dec(b)?, parse_dec(l)?).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> SystemDoc {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn systems_round_trip() {
        let d = doc(r#"{"states":["a","b"],"initial":["a"],"inputs":["u"],"trans":{"a|u":["b"],"b|u":["a","b"]}}"#);
        let sys = d.to_system("s.json").unwrap();
        assert_eq!(sys.post_idx(1, 0), &[0, 1]);
        assert_eq!(SystemDoc::from_display(&sys), d);
    }

    #[test]
    fn loader_names_the_first_violation() {
        let d = doc(r#"{"states":["a"],"initial":["a"],"inputs":["u"],"trans":{"a|u":["a","q"]}}"#);
        let e = d.to_system("s.json").unwrap_err().to_string();
        assert_eq!(e, r#"s.json: trans["a|u"][1]: unknown state "q""#);
        let d = doc(r#"{"states":["a","a"],"initial":[],"inputs":[],"trans":{}}"#);
        assert!(d.to_system("s").unwrap_err().to_string().contains("states[1]: duplicate state"));
        let d = doc(r#"{"states":["a"],"initial":["a"],"inputs":["u"],"trans":{"au":["a"]}}"#);
        assert!(d.to_system("s").unwrap_err().to_string().contains("key must be"));
        let d = doc(r#"{"states":["a"],"initial":["a"],"inputs":["u"],"trans":{}}"#);
        assert!(d.to_plant("p").unwrap_err().to_string().contains("outputs"));
    }

    #[test]
    fn decimals_are_exact() {
        let r: RelationDoc = serde_json::from_str(r#"{"kappa":0.1,"entries":[{"x1":"a","x2":"a","u1":"u","u2":"u","gauge":"0.3"}]}"#).unwrap();
        assert_eq!(r.kappa.0, "0.1".parse().unwrap());
        assert_eq!(r.entries[0].gauge.0, "0.3".parse().unwrap());
        let out = serde_json::to_string(&ParamsDoc::from(AcParams::new(Dec::new(55, 3), Dec::new(5, 1), Dec::ZERO).unwrap())).unwrap();
        assert_eq!(out, r#"{"kappa":0.055,"beta":0.5,"lambda":0}"#);
    }

    #[test]
    fn relations_reject_gauges_below_kappa() {
        let sys = doc(r#"{"states":["a"],"initial":["a"],"inputs":["u"],"trans":{"a|u":["a"]}}"#).to_system("s").unwrap();
        let r: RelationDoc = serde_json::from_str(r#"{"kappa":0.1,"entries":[{"x1":"a","x2":"a","u1":"u","u2":"u","gauge":0.05}]}"#).unwrap();
        assert!(r.to_relation("r", &sys, &sys).unwrap_err().to_string().contains("entries[0].gauge"));
        let r: RelationDoc = serde_json::from_str(r#"{"kappa":0,"entries":[{"x1":"a","x2":"b","u1":"u","u2":"u","gauge":0}]}"#).unwrap();
        assert!(r.to_relation("r", &sys, &sys).unwrap_err().to_string().contains("entries[0].x2"));
    }

    #[test]
    fn params_parse_and_validate() {
        assert!(parse_params("0.005,0.5,0").is_ok());
        assert!(parse_params("0.005,1,0").is_err());
        assert!(parse_params("0.005,0.5").is_err());
    }
}
