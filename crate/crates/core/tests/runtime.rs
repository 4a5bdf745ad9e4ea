//! The on-demand controller against the construction over all subsets.

use std::collections::BTreeMap;

use proptest::prelude::*;
use symctl_core::compose::{compose, stacked_metric, stacked_relation, Composition};
use symctl_core::lift::{lift_relation_r, lift_relation_rc, Controller, ControllerParts, ControllerState, EnumeratedChain};
use symctl_core::observer::{subset_observer, BoundQuantizer, EnumeratedOutputs, Observer};
use symctl_core::powerset::lift;
use symctl_core::simulate::{run, Environment, SeededChoice};
use symctl_core::toy::{generate, Options, Toy};
use symctl_core::{AcParams, Dec, InputMetric, Result, TransitionSystem};

type ToyObserver = Observer<symctl_core::toy::Sys, EnumeratedOutputs<symctl_core::FinitePlant<u8, u8, u8>, u8, u8>>;

fn toy(seed: u64) -> Toy {
    generate(seed, Options { total: true, ..Options::default() }).unwrap()
}

fn observer(t: &Toy) -> ToyObserver {
    let dmax = t
        .inputs()
        .iter()
        .flat_map(|a| t.inputs().into_iter().map(move |b| t.dcheck.eval(a, &b)))
        .max()
        .unwrap();
    let quant = BoundQuantizer::new(&t.params_check, dmax, 0, None).unwrap();
    let oracle = EnumeratedOutputs::new(t.plant.clone(), t.rcheck.clone()).unwrap();
    Observer::new(t.oabs.clone(), oracle, t.params_check, t.dcheck.clone(), quant)
}

fn parts(t: &Toy) -> ControllerParts<symctl_core::toy::Sys, symctl_core::toy::Sys, u8, u8, u8> {
    let id: BTreeMap<u8, u8> = t.inputs().into_iter().map(|u| (u, u)).collect();
    let chain = EnumeratedChain::new(t.plant_system(), t.r.clone(), t.rcheck.clone()).unwrap();
    ControllerParts {
        spec: t.spec.clone(),
        cabs: t.cabs.clone(),
        rc: t.rc.clone(),
        chain: lift_relation_r(chain, t.params.kappa, t.params_check.kappa, t.inputs(), t.inputs()),
        params: t.composite(),
        dbar: t.dbar.clone(),
        spec_to_cabs: id.clone(),
        cabs_to_plant: id.clone(),
        plant_to_obs: id,
    }
}

/// Plant initial states related to initial states of both abstractions.
fn guaranteed_starts(t: &Toy) -> Vec<u8> {
    let p = t.plant_system();
    p.initial_states()
        .into_iter()
        .filter(|x| {
            let cabs = t.cabs.initial_states().into_iter().any(|h| {
                t.r.state_gauge(&h, x).within(t.params.kappa)
                    && t.spec.initial_states().iter().any(|c| t.rc.state_gauge(c, &h).within(Dec::ZERO))
            });
            let obs = t.oabs.initial_states().iter().any(|o| t.rcheck.state_gauge(x, o).within(t.params_check.kappa));
            cabs && obs
        })
        .collect()
}

struct StartIn(Vec<u8>, SeededChoice);

impl Environment<u8, u8> for StartIn {
    fn initial(&mut self, _: &[u8]) -> Result<u8> {
        Environment::<u8, u8>::initial(&mut self.1, &self.0)
    }

    fn choose(&mut self, k: usize, x: &u8, u: &u8, xs: &[u8]) -> Result<u8> {
        self.1.choose(k, x, u, xs)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn runtime_controller_is_a_subsystem_of_the_subset_construction(seed in any::<u64>()) {
        let t = toy(seed);
        let obs = observer(&t);
        let ctl = Controller::new(parts(&t), &obs);
        let syn = ctl.synthesize(10_000).unwrap();

        let tilde = subset_observer(t.plant_system(), &t.oabs, &t.rcheck, &t.params_check, &t.dcheck).unwrap();
        let lrc = lift_relation_rc(&t.rc);
        let sc = compose(&lift(&t.spec), &lift(&t.cabs), &lrc, &AcParams::exact(), &InputMetric::zero()).unwrap();
        let r3 = stacked_relation(&lrc, &ctl.parts().chain);
        let view = Composition::new(&sc.system, &tilde, r3, t.composite(), stacked_metric(&t.dbar));
        let proj = |s: &ControllerState<u8, u8, u8>| ((s.spec.clone(), s.cabs.clone()), s.obs.support());

        let init = view.initial_states();
        for &i in syn.system.initial_indices() {
            prop_assert!(init.contains(&proj(syn.system.state(i))), "{:?}", syn.system.state(i));
        }
        for (i, k, j) in syn.system.edges() {
            let u = &syn.system.inputs()[k];
            let (a, b) = (syn.system.state(i), syn.system.state(j));
            prop_assert!(view.post(&proj(a), u).contains(&proj(b)), "{a:?} -{u:?}-> {b:?}");
        }
    }

    #[test]
    fn runtime_observer_tracks_the_plant(seed in any::<u64>(), run_seed in 0u64..1000) {
        let t = toy(seed);
        let obs = observer(&t);
        let ctl = Controller::new(parts(&t), &obs);
        let starts = guaranteed_starts(&t);
        prop_assert!(!starts.is_empty());
        let trace = run(&ctl, &t.plant, &t.rcheck, &mut StartIn(starts, SeededChoice::new(run_seed)), 20).unwrap();
        for r in &trace {
            prop_assert!(r.tracked, "step {}: {:?}", r.k, r.state);
        }
    }
}

#[test]
fn zero_steps_record_only_the_first_measurement() {
    let t = toy(3);
    let obs = observer(&t);
    let ctl = Controller::new(parts(&t), &obs);
    let trace = run(&ctl, &t.plant, &t.rcheck, &mut StartIn(guaranteed_starts(&t), SeededChoice::new(0)), 0).unwrap();
    assert_eq!(trace.len(), 1);
    assert_eq!(trace[0].k, 0);
}
