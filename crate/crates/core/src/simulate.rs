//! Closed-loop runs of a plant under a synthesized controller.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::case::CaseState;
use crate::dec::Dec;
use crate::error::{Error, Result};
use crate::lift::Controller;
use crate::observer::OutputOracle;
use crate::relation::GaugedRelation;
use crate::system::{Outputs, TransitionSystem};

/// Resolves the plant's nondeterminism.
pub trait Environment<X: Clone, U> {
    fn initial(&mut self, xs: &[X]) -> Result<X> {
        xs.first()
            .cloned()
            .ok_or_else(|| Error::Invalid("plant has no initial state".into()))
    }

    fn choose(&mut self, k: usize, x: &X, u: &U, successors: &[X]) -> Result<X>;
}

/// Uniform seeded choice among successors.
pub struct SeededChoice {
    rng: ChaCha8Rng,
}

impl SeededChoice {
    pub fn new(seed: u64) -> Self {
        SeededChoice {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl<X: Clone + Debug, U: Debug> Environment<X, U> for SeededChoice {
    fn initial(&mut self, xs: &[X]) -> Result<X> {
        if xs.is_empty() {
            return Err(Error::Invalid("plant has no initial state".into()));
        }
        Ok(xs[self.rng.next_u32() as usize % xs.len()].clone())
    }

    fn choose(&mut self, k: usize, x: &X, u: &U, successors: &[X]) -> Result<X> {
        if successors.is_empty() {
            return Err(Error::Inconsistent(format!("step {k}: {u:?} is blocked at {x:?}")));
        }
        Ok(successors[self.rng.next_u32() as usize % successors.len()].clone())
    }
}

/// Where channel losses come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dropouts {
    None,
    /// Each channel drops with probability 1/4 per step, except right after
    /// a drop on the same channel.
    Seeded(u64),
    /// Per step: (controller→plant lost, plant→controller lost).
    Schedule(Vec<(bool, bool)>),
}

/// Drives the built-in plant's channel bits.
pub struct Channel {
    source: Dropouts,
    rng: ChaCha8Rng,
}

impl Channel {
    pub fn new(source: Dropouts) -> Self {
        let seed = match source {
            Dropouts::Seeded(s) => s,
            _ => 0,
        };
        Channel {
            source,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn event(&mut self, k: usize, x: &CaseState) -> Result<(bool, bool)> {
        match &self.source {
            Dropouts::None => Ok((false, false)),
            Dropouts::Seeded(_) => {
                // two draws per step keep the stream aligned across masks
                let a = self.rng.next_u32() < u32::MAX / 4;
                let b = self.rng.next_u32() < u32::MAX / 4;
                Ok((a && !x.xi3, b && !x.xi4))
            }
            Dropouts::Schedule(s) => {
                let e = s.get(k).copied().unwrap_or((false, false));
                if (e.0 && x.xi3) || (e.1 && x.xi4) {
                    return Err(Error::Invalid(format!(
                        "schedule line {}: consecutive dropout on the same channel",
                        k + 1
                    )));
                }
                Ok(e)
            }
        }
    }
}

impl Environment<CaseState, Dec> for Channel {
    fn choose(&mut self, k: usize, x: &CaseState, u: &Dec, successors: &[CaseState]) -> Result<CaseState> {
        let bits = self.event(k, x)?;
        successors
            .iter()
            .find(|s| s.bits() == bits)
            .copied()
            .ok_or_else(|| Error::Inconsistent(format!("step {k}: no successor of {x:?} under {u} with bits {bits:?}")))
    }
}

/// One step of a closed-loop trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record<X, U, Uc, Y> {
    pub k: usize,
    pub state: X,
    pub output: Y,
    /// Input applied at this step.
    pub input: U,
    /// Specification input chosen at this step.
    pub spec_input: Uc,
    pub n_obs: usize,
    pub n_ctrl: usize,
    /// Largest observer candidate bound.
    pub bound: Dec,
    /// Some candidate's bound covers the true state.
    pub tracked: bool,
}

type Trace<P, Sc> = Vec<
    Record<
        <P as TransitionSystem>::State,
        <P as TransitionSystem>::Input,
        <Sc as TransitionSystem>::Input,
        <P as Outputs>::Output,
    >,
>;

/// Runs `steps` plant transitions; the trace has `steps + 1` records.
///
/// Each step measures `y`, updates the controller, applies its input and
/// lets the environment pick the plant successor. Tracking against `rel` is
/// recorded per step rather than enforced.
pub fn run<P, Sc, Sh, A, O, E>(
    ctrl: &Controller<'_, Sc, Sh, A, O>,
    plant: &P,
    rel: &GaugedRelation<P::State, A::State, P::Input, A::Input>,
    env: &mut E,
    steps: usize,
) -> Result<Trace<P, Sc>>
where
    P: Outputs<Input = O::PlantInput, Output = O::Output>,
    P::State: 'static,
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
    E: Environment<P::State, P::Input>,
{
    let mut x = env.initial(&plant.initial_states())?;
    let mut y = plant.output(&x);
    let mut st = ctrl
        .initial(&y)
        .map_err(|e| at_step(0, e, format!("{x:?}")))?;
    let mut trace = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let act = ctrl
            .actuation(&st)
            .map_err(|e| at_step(k, e, format!("{x:?} / {st:?}")))?;
        trace.push(Record {
            k,
            state: x.clone(),
            output: y.clone(),
            input: act.plant.clone(),
            spec_input: act.spec.clone(),
            n_obs: st.obs.len(),
            n_ctrl: st.cabs.len(),
            bound: st.obs.max_bound(),
            tracked: st.obs.tracks(&x, rel),
        });
        if k == steps {
            break;
        }
        let succ = plant.post(&x, &act.plant);
        x = env.choose(k, &x, &act.plant, &succ)?;
        y = plant.output(&x);
        st = ctrl
            .step(&st, &y)
            .map_err(|e| at_step(k + 1, e, format!("{x:?} / {st:?}")))?;
    }
    Ok(trace)
}

fn at_step(k: usize, e: Error, dump: String) -> Error {
    let wrap = |m: String| format!("step {k}: {m}; state {dump}");
    match e {
        Error::Domain(m) => Error::Domain(wrap(m)),
        Error::Invalid(m) => Error::Invalid(wrap(m)),
        Error::Parse(m) => Error::Parse(wrap(m)),
        Error::Usage(m) => Error::Usage(wrap(m)),
        Error::Capability(m) => Error::Capability(wrap(m)),
        Error::Inconsistent(m) => Error::Inconsistent(wrap(m)),
        Error::Coverage(m) => Error::Coverage(wrap(m)),
        Error::Internal(m) => Error::Internal(wrap(m)),
        other => other,
    }
}

/// Lower and upper edge of the band reported as output 1.
pub const BAND: (Dec, Dec) = (Dec::new(5, 1), Dec::new(15, 1));

pub fn in_band(yc: Dec) -> bool {
    yc >= BAND.0 && yc < BAND.1
}

/// Convergence summary of a `y_c` series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergence {
    /// First step inside the band.
    pub entry: Option<usize>,
    /// Longest run of steps outside the band after the first entry.
    pub longest_excursion: usize,
}

pub fn convergence(yc: &[Dec]) -> Convergence {
    let entry = yc.iter().position(|v| in_band(*v));
    let mut longest = 0;
    if let Some(e) = entry {
        let mut run = 0;
        for v in &yc[e..] {
            if in_band(*v) {
                run = 0;
            } else {
                run += 1;
                longest = longest.max(run);
            }
        }
    }
    Convergence {
        entry,
        longest_excursion: longest,
    }
}

/// Whether no channel bit is set at two consecutive steps.
pub fn no_consecutive_drops(states: &[CaseState]) -> bool {
    states
        .windows(2)
        .all(|w| !(w[0].xi3 && w[1].xi3) && !(w[0].xi4 && w[1].xi4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn seeded_channel_respects_the_no_repeat_rule() {
        let mut ch = Channel::new(Dropouts::Seeded(7));
        let mut x = CaseState::ORIGIN;
        let mut seen = Vec::new();
        for k in 0..200 {
            let bits = ch.event(k, &x).unwrap();
            x = CaseState::new(Dec::ZERO, Dec::ZERO, bits.0, bits.1);
            seen.push(x);
        }
        assert!(no_consecutive_drops(&seen));
        assert!(seen.iter().any(|s| s.xi3) && seen.iter().any(|s| s.xi4));
    }

    #[test]
    fn schedule_violations_are_rejected() {
        let mut ch = Channel::new(Dropouts::Schedule(vec![(true, false), (true, false)]));
        let x = ch.event(0, &CaseState::ORIGIN).unwrap();
        let after = CaseState::new(Dec::ZERO, Dec::ZERO, x.0, x.1);
        assert!(ch.event(1, &after).is_err());
    }

    #[test]
    fn convergence_tracks_entry_and_excursions() {
        let d = |s: &str| s.parse::<Dec>().unwrap();
        let c = convergence(&[d("0"), d("1.2"), d("0.4"), d("0.3"), d("1")]);
        assert_eq!(c.entry, Some(1));
        assert_eq!(c.longest_excursion, 2);
        assert!(!in_band(d("1.5")));
        assert!(in_band(d("0.5")));
    }
}
