//! Algebraic invariants of the numeric and relation layers.

use proptest::prelude::*;
use symctl_core::checker::{check_relation, maximal_relation, relation_from, Kind};
use symctl_core::powerset::nonempty_subsets;
use symctl_core::{AcParams, Dec, FiniteSystem, Gauge, GaugedRelation, InputMetric};

fn dec() -> impl Strategy<Value = Dec> {
    (-10_000_000i64..10_000_000).prop_map(|m| Dec::new(m, 6))
}

fn nonneg() -> impl Strategy<Value = Dec> {
    (0i64..1000).prop_map(|m| Dec::new(m, 3))
}

fn params() -> impl Strategy<Value = AcParams> {
    (0i64..30, 0i64..100, 0i64..20)
        .prop_map(|(k, b, l)| AcParams::new(Dec::new(k, 2), Dec::new(b, 2), Dec::new(l, 1)).unwrap())
}

/// Random system on states `0..n` over inputs `0..m`.
fn system(n: u8, m: u8) -> impl Strategy<Value = FiniteSystem<u8, u8>> {
    let edges = proptest::collection::vec((0..n, 0..m, 0..n), 0..(n as usize * m as usize * 2));
    (edges, proptest::collection::btree_set(0..n, 1..=n as usize)).prop_map(move |(e, init)| {
        FiniteSystem::new((0..n).collect(), init.into_iter().collect(), (0..m).collect(), e).unwrap()
    })
}

type Table = std::collections::BTreeMap<(u8, u8, u8, u8), Dec>;

fn table(n1: u8, n2: u8, m: u8) -> impl Strategy<Value = Table> {
    proptest::collection::btree_map((0..n1, 0..n2, 0..m, 0..m), (0i64..6).prop_map(|k| Dec::new(k, 1)), 0..40)
}

proptest! {
    #[test]
    fn decimal_text_round_trips(a in dec()) {
        prop_assert_eq!(a.to_string().parse::<Dec>().unwrap(), a);
    }

    #[test]
    fn sums_are_exact(a in dec(), b in dec(), c in dec()) {
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!(a + b - b, a);
    }

    #[test]
    fn rounding_lands_within_half_a_step(a in dec(), k in 1i64..100) {
        let step = Dec::new(k, 3);
        let r = a.round_to_multiple(step);
        prop_assert!((r - a).abs() * Dec::from_int(2) <= step);
        prop_assert_eq!(r.round_to_multiple(step), r);
    }

    #[test]
    fn ceiling_division_never_undershoots(a in nonneg(), b in (1i64..1000).prop_map(|m| Dec::new(m, 3))) {
        let q = a.div_ceil(b).unwrap();
        // exact on raw mantissas: q is the least multiple of 1e-12 with q * b >= a
        let scale = Dec::ONE.raw() as i128;
        let (q, a, b) = (q.raw() as i128, a.raw() as i128, b.raw() as i128);
        prop_assert!(q * b >= a * scale);
        prop_assert!((q - 1) * b < a * scale);
    }

    #[test]
    fn bound_grows_with_level_and_input_distance(p in params(), e in nonneg(), f in nonneg(), x in nonneg(), y in nonneg()) {
        let (lo, hi) = (e.min(f), e.max(f));
        let (dl, dh) = (x.min(y), x.max(y));
        prop_assert!(p.bound(lo, dl) <= p.bound(hi, dh));
        prop_assert!(p.bound(lo, dl) >= p.kappa);
    }

    #[test]
    fn state_gauge_is_the_least_input_gauge(t in table(3, 3, 2), k in 0i64..3) {
        let kappa = Dec::new(k, 1);
        let entries = t.iter().map(|(key, g)| (*key, Gauge::Finite(*g))).collect();
        let r = GaugedRelation::from_table(kappa, vec![0u8, 1], vec![0u8, 1], entries).unwrap();
        for a in 0..3u8 {
            for b in 0..3u8 {
                let s = r.state_gauge(&a, &b);
                let mut least = Gauge::Infinite;
                for u in 0..2u8 {
                    for v in 0..2u8 {
                        let g = r.gauge(&a, &b, &u, &v);
                        prop_assert!(s <= g);
                        prop_assert!(!g.is_finite() || g >= Gauge::Finite(kappa));
                        least = least.min(g);
                        // membership is upward closed in epsilon
                        if r.member(kappa + Dec::new(2, 1), &a, &b, &u, &v).unwrap() {
                            prop_assert!(r.member(kappa + Dec::new(5, 1), &a, &b, &u, &v).unwrap());
                        }
                    }
                }
                prop_assert_eq!(s, least);
            }
        }
    }

    #[test]
    fn maximal_relations_pass_their_own_check(
        s1 in system(3, 2),
        s2 in system(3, 2),
        t in table(3, 3, 2),
        p in params(),
        kind in prop_oneof![Just(Kind::Simulation), Just(Kind::Alternating), Just(Kind::Bisimulation)],
    ) {
        let z = InputMetric::zero();
        let m = maximal_relation(kind, &s1, &s2, t.clone(), &p, &z).unwrap();
        for (key, g) in &m {
            prop_assert!(t.contains_key(key));
            prop_assert!(*g >= p.kappa);
        }
        let r = relation_from(&m, &s1, &s2, p.kappa).unwrap();
        let v = check_relation(kind, &s1, &s2, &r, &p, &z, None).unwrap();
        // the initial condition is not part of the fixpoint
        let step_ok = match v.counterexample {
            None => true,
            Some(symctl_core::checker::Counterexample::Init { .. }) => true,
            Some(_) => false,
        };
        prop_assert!(step_ok, "{:?}", v.counterexample);
    }

    #[test]
    fn subset_enumeration_is_complete(n in 0usize..8) {
        let base: std::collections::BTreeSet<usize> = (0..n).collect();
        let subs = nonempty_subsets(&base);
        prop_assert_eq!(subs.len(), (1usize << n) - 1);
        prop_assert!(subs.windows(2).all(|w| w[0] < w[1]));
    }
}
