//! Composition results checked on random small instances.

use proptest::prelude::*;
use symctl_core::checker::{check_acasr, check_acsr, Kind, Verdict};
use symctl_core::compose::{compose, stacked_metric, stacked_relation};
use symctl_core::lift::{lift_relation_r, lift_relation_rc, closed_loop_metric, closed_loop_relation, EnumeratedChain};
use symctl_core::observer::{subset_observer, observer_relation};
use symctl_core::powerset::{lift, LiftedState, Powerset};
use symctl_core::toy::{generate, Options, Toy};
use symctl_core::{AcParams, Dec, GaugedRelation, InputMetric, TransitionSystem};

const CASES: u32 = 200;

type Lifted = LiftedState<u8>;

fn toy(seed: u64) -> Toy {
    generate(seed, Options::default()).unwrap()
}

fn observer(t: &Toy) -> Powerset<u8, u8> {
    subset_observer(t.plant_system(), &t.oabs, &t.rcheck, &t.params_check, &t.dcheck).unwrap()
}

fn chain(t: &Toy) -> GaugedRelation<Lifted, Lifted, u8, u8> {
    let c = EnumeratedChain::new(t.plant_system(), t.r.clone(), t.rcheck.clone()).unwrap();
    lift_relation_r(c, t.params.kappa, t.params_check.kappa, t.inputs(), t.inputs())
}

fn report<X: std::fmt::Debug, Y: std::fmt::Debug, U: std::fmt::Debug>(v: Verdict<X, Y, U>) -> Result<(), TestCaseError> {
    prop_assert!(v.ok(), "{:?}", v.counterexample);
    Ok(())
}

fn chained_check(t: &Toy) -> Verdict<Lifted, Lifted, u8> {
    check_acasr(&lift(&t.cabs), &observer(t), &chain(t), &t.composite(), &t.dbar, None).unwrap()
}

fn closed_loop_check(t: &Toy) -> Verdict<((Lifted, Lifted), Lifted), u8, ((u8, u8), u8)> {
    let comp = t.composite();
    let lrc = lift_relation_rc(&t.rc);
    let sc = compose(&lift(&t.spec), &lift(&t.cabs), &lrc, &AcParams::exact(), &InputMetric::zero()).unwrap();
    let r3 = stacked_relation(&lrc, &chain(t));
    let sbar = compose(&sc.system, &observer(t), &r3, &comp, &stacked_metric(&t.dbar)).unwrap();
    let r4 = closed_loop_relation(&t.r, &t.rcheck, sbar.system.inputs().to_vec());
    check_acasr(&sbar.system, t.plant_system(), &r4, &comp, &closed_loop_metric(&t.dbar), None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn state_feedback_composition_keeps_the_plant_relation(seed in any::<u64>()) {
        let t = toy(seed);
        let sc = compose(&t.spec, &t.cabs, &t.rc, &AcParams::exact(), &InputMetric::zero()).unwrap();
        let rel = stacked_relation(&t.rc, &t.r);
        report(check_acasr(&sc.system, t.plant_system(), &rel, &t.params, &stacked_metric(&t.d), None).unwrap())?;
    }

    #[test]
    fn observer_simulates_the_plant(seed in any::<u64>()) {
        let t = toy(seed);
        let rel = observer_relation(&t.rcheck);
        report(check_acsr(t.plant_system(), &observer(&t), &rel, &t.params_check, &t.dcheck, None).unwrap())?;
    }

    #[test]
    fn lifted_exact_relation_is_alternating(seed in any::<u64>()) {
        let t = toy(seed);
        let v = check_acasr(&lift(&t.spec), &lift(&t.cabs), &lift_relation_rc(&t.rc), &AcParams::exact(), &InputMetric::zero(), None).unwrap();
        report(v)?;
    }

    #[test]
    fn chained_relation_reaches_the_observer(seed in any::<u64>()) {
        report(chained_check(&toy(seed)))?;
    }

    #[test]
    fn lifted_controller_relates_to_the_observer(seed in any::<u64>()) {
        let t = toy(seed);
        let lrc = lift_relation_rc(&t.rc);
        let sc = compose(&lift(&t.spec), &lift(&t.cabs), &lrc, &AcParams::exact(), &InputMetric::zero()).unwrap();
        let r3 = stacked_relation(&lrc, &chain(&t));
        report(check_acasr(&sc.system, &observer(&t), &r3, &t.composite(), &stacked_metric(&t.dbar), None).unwrap())?;
    }

    #[test]
    fn output_feedback_controller_relates_to_the_plant(seed in any::<u64>()) {
        report(closed_loop_check(&toy(seed)))?;
    }
}

#[test]
fn composite_parameters_take_sum_and_maxima() {
    let d = |s: &str| s.parse::<Dec>().unwrap();
    let a = AcParams::new(d("0.005"), d("0.5"), Dec::ZERO).unwrap();
    let b = AcParams::new(d("0.05"), d("0.25"), d("1")).unwrap();
    let c = a.composite(&b);
    assert_eq!((c.kappa, c.beta, c.lambda), (d("0.055"), d("0.5"), d("1")));
}

#[test]
fn instances_are_not_degenerate() {
    let (mut beta, mut lambda, mut nondet, mut multi) = (0, 0, 0, 0);
    for seed in 0..100 {
        let t = toy(seed);
        beta += (t.params.beta > Dec::ZERO && t.params_check.beta > Dec::ZERO) as usize;
        lambda += (t.params.lambda > Dec::ZERO) as usize;
        let p = t.plant_system();
        nondet += p.state_list().iter().any(|x| t.inputs().iter().any(|u| p.post(x, u).len() > 1)) as usize;
        multi += (t.inputs().len() > 1 && p.len() > 2) as usize;
    }
    assert!(beta > 20 && lambda > 20 && nondet > 25 && multi > 10, "{beta} {lambda} {nondet} {multi}");
}

// Without bisimilarity the chained relation can fail: an observer set may
// contain abstract successors that no plant successor of the chosen witness
// reaches, and no successor of the lifted abstraction covers them.
#[test]
fn chained_relation_needs_a_bisimilar_observation_relation() {
    let sim = Options { observer_kind: Kind::Simulation, ..Options::default() };
    let failing = (0..100).filter(|&s| !chained_check(&generate(s, sim).unwrap()).ok()).count();
    assert!(failing > 0);
}

// An initial controller state may be justified through a plant state that is
// not initial; without closing the plant's initial set the initial
// condition fails.
#[test]
fn closed_loop_relation_needs_a_closed_initial_set() {
    let open = Options { close_initial: false, ..Options::default() };
    let failing = (0..100).filter(|&s| !closed_loop_check(&generate(s, open).unwrap()).ok()).count();
    assert!(failing > 0);
}
