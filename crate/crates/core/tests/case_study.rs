//! The built-in networked control example end to end.

use symctl_core::case::*;
use symctl_core::checker::{check_acasr, check_acsr, check_metric_bound, check_uniform_witness};
use symctl_core::powerset::LiftedState;
use symctl_core::simulate::{convergence, in_band, no_consecutive_drops, run, Channel, Dropouts};
use symctl_core::{Dec, Gauge, InputMetric, TransitionSystem};

fn d(s: &str) -> Dec {
    s.parse().unwrap()
}

#[test]
fn control_relation_passes_on_samples() {
    let v = check_acasr(
        &GridAbstraction::control(),
        &CasePlant::new(),
        &cabs_relation(),
        &cabs_params(),
        &zero_metric(),
        Some(cabs_samples()),
    )
    .unwrap();
    assert!(v.ok(), "{:?}", v.counterexample);
    assert!(v.sampled);
    assert!(v.pairs_checked > 500_000);
}

#[test]
fn observation_relation_passes_on_samples() {
    let v = check_acsr(
        &CasePlant::new(),
        &GridAbstraction::observation(),
        &oabs_relation(),
        &oabs_params(),
        &zero_metric(),
        Some(oabs_samples()),
    )
    .unwrap();
    assert!(v.ok(), "{:?}", v.counterexample);
    assert!(v.pairs_checked > 600_000);
}

#[test]
fn input_conditions_hold_with_identity_witnesses() {
    let sp = spec();
    let cabs = GridAbstraction::control();
    let pairs: Vec<_> = sp.state_list().iter().map(|x| (*x, *x)).collect();
    let w = check_uniform_witness(&sp, &spec_relation(), pairs, false);
    assert!(w.ok(), "{:?}", w.failure);
    assert_eq!(w.witnesses, identity_inputs());

    let w = check_uniform_witness(&cabs, &cabs_relation(), cabs_samples(), true);
    assert!(w.ok(), "{:?}", w.failure);
    assert_eq!(w.witnesses, identity_inputs());

    let w = check_uniform_witness(&CasePlant::new(), &oabs_relation(), oabs_samples(), true);
    assert!(w.ok(), "{:?}", w.failure);
    assert_eq!(w.witnesses, identity_inputs());

    let u = inputs();
    let z = InputMetric::zero();
    assert_eq!(check_metric_bound(&u, &u, &u, &z, &z, &zero_metric()), None);
}

#[test]
fn specification_starts_high_and_holds_low() {
    let sp = spec();
    assert_eq!(sp.initial_states(), vec![CaseState::ORIGIN]);
    assert_eq!(sp.enabled(&CaseState::ORIGIN), vec![U_HIGH]);
    let hold = CaseState::new(d("0.23"), d("0.17"), false, false);
    assert!(sp.contains(&hold));
    assert_eq!(sp.enabled(&hold), vec![U_LOW]);
    assert!(in_band(hold.yc()));
    for x in sp.state_list() {
        assert!(sp.contains(x) && GridAbstraction::control().contains(x));
    }
}

#[test]
fn chained_gauge_splits_at_the_control_grid() {
    let chain = controller_parts().chain;
    let at = |a: &str, b: &str| CaseState::new(d(a), d(b), false, false);
    let xs = LiftedState::singleton(at("0.2", "0.2"));
    assert_eq!(chain.gauge(&xs, &LiftedState::singleton(at("0.2", "0.2")), &U_LOW, &U_LOW), Gauge::Finite(d("0.055")));
    assert_eq!(chain.gauge(&xs, &LiftedState::singleton(at("0.3", "0.2")), &U_LOW, &U_LOW), Gauge::Finite(d("0.1")));
    assert_eq!(chain.gauge(&xs, &LiftedState::singleton(at("0.3", "0.2")), &U_LOW, &U_HIGH), Gauge::Infinite);
    let other_bits = CaseState::new(d("0.2"), d("0.2"), true, false);
    assert_eq!(chain.gauge(&xs, &LiftedState::singleton(other_bits), &U_LOW, &U_LOW), Gauge::Infinite);
}

#[test]
fn synthesis_is_finite_and_covered() {
    let obs = observer(0).unwrap();
    let ctl = controller(&obs);
    let p = ctl.parts().params;
    assert_eq!((p.kappa, p.beta, p.lambda), (d("0.055"), d("0.5"), Dec::ZERO));
    let syn = ctl.synthesize(10_000).unwrap();
    assert!(syn.observer_states <= 20);
    let rc = spec_relation();
    for st in syn.system.state_list() {
        assert!(ctl.level(st).is_finite(), "{st:?}");
        for h in st.cabs.iter() {
            assert!(st.spec.iter().any(|c| rc.state_gauge(c, h).is_finite()), "{st:?}");
        }
    }
    for (i, row) in syn.by_output.iter().enumerate() {
        assert!(!row.is_empty(), "state {i} has no successor");
    }
}

#[test]
fn closed_loop_converges_and_stays_tracked() {
    let obs = observer(0).unwrap();
    let ctl = controller(&obs);
    let plant = CasePlant::new();
    let rel = oabs_relation();
    let clean = run(&ctl, &plant, &rel, &mut Channel::new(Dropouts::None), 30).unwrap();
    let yc: Vec<Dec> = clean.iter().map(|r| r.state.yc()).collect();
    let c = convergence(&yc);
    assert!(c.entry.is_some_and(|k| k <= 20) && c.longest_excursion == 0, "{c:?}");

    for seed in 0..5 {
        let tr = run(&ctl, &plant, &rel, &mut Channel::new(Dropouts::Seeded(seed)), 50).unwrap();
        let states: Vec<CaseState> = tr.iter().map(|r| r.state).collect();
        assert!(no_consecutive_drops(&states));
        assert!(tr.iter().all(|r| r.tracked && r.n_ctrl >= r.n_obs));
        assert_eq!(tr, run(&ctl, &plant, &rel, &mut Channel::new(Dropouts::Seeded(seed)), 50).unwrap());
    }
}

#[test]
fn scheduled_dropouts_drive_the_channel_bits() {
    let obs = observer(0).unwrap();
    let ctl = controller(&obs);
    let schedule = vec![(false, false), (true, false), (false, true), (false, false)];
    let tr = run(&ctl, &CasePlant::new(), &oabs_relation(), &mut Channel::new(Dropouts::Schedule(schedule)), 4).unwrap();
    let bits: Vec<(bool, bool)> = tr.iter().map(|r| r.state.bits()).collect();
    assert_eq!(bits, vec![(false, false), (false, false), (true, false), (false, true), (false, false)]);
    assert_eq!(tr[3].output, 0);
}
