use num_bigint::BigInt;
use proptest::prelude::*;

use toricgen::chow::{self, ChowEngine, DivisorMonomial};
use toricgen::construct::{self, ConstructionPlan};
use toricgen::fan::{self, build_family_fan, star_subdivide};
use toricgen::genus;
use toricgen::{FamilyParams, Fan};

fn family() -> impl Strategy<Value = FamilyParams> {
    (3usize..=7)
        .prop_flat_map(|n| (Just(n), 2..n, -5i64..=5, -5i64..=5))
        .prop_map(|(n, eps, a, b)| FamilyParams::new(n, eps, a, b).unwrap())
}

fn certified(fan: &Fan) -> bool {
    fan::is_regular(fan).passed() && fan::facet_pairing_complete(fan).complete()
}

/// Identity with `ops` elementary row additions `(target, source, factor)`.
fn unimodular(dim: usize, ops: &[(usize, usize, i64)]) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| (0..dim).map(|j| BigInt::from(u8::from(i == j))).collect())
        .collect();
    for &(t, s, c) in ops {
        let (t, s) = (t % dim, s % dim);
        if t == s {
            continue;
        }
        let src = m[s].clone();
        for (x, y) in m[t].iter_mut().zip(src) {
            *x += c * y;
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn family_fans_are_certified_and_match_closed_form(p in family()) {
        let fan = build_family_fan(p).unwrap();
        prop_assert_eq!(fan.rays().len(), p.n + 3);
        prop_assert_eq!(fan.max_cones().len(), (p.n - p.eps + 1) * p.eps * 2);
        prop_assert!(certified(&fan));
        let engine = ChowEngine::new(&fan).unwrap();
        prop_assert_eq!(engine.milnor_genus().unwrap(), genus::family_genus(p).unwrap());
        prop_assert_eq!(engine.euler_characteristic().unwrap(), BigInt::from(fan.max_cones().len()));
    }

    #[test]
    fn point_blowup_changes_genus_by_delta(p in family(), pick in any::<prop::sample::Index>()) {
        let fan = build_family_fan(p).unwrap();
        let site = fan.max_cones()[pick.index(fan.max_cones().len())].clone();
        let sub = star_subdivide(&fan, &site).unwrap();
        prop_assert!(certified(&sub.fan));
        prop_assert_eq!(sub.fan.max_cones().len(), fan.max_cones().len() + p.n - 1);
        let change = chow::milnor_genus(&sub.fan).unwrap() - chow::milnor_genus(&fan).unwrap();
        prop_assert_eq!(change, genus::point_blowup_delta(p.n as u64).unwrap());
    }

    #[test]
    fn edge_blowup_adds_twice_b(p in family().prop_filter("odd n", |p| p.n % 2 == 1)) {
        let fan = build_family_fan(p).unwrap();
        let sub = star_subdivide(&fan, &p.edge_cone()).unwrap();
        prop_assert!(certified(&sub.fan));
        let mut ray = vec![BigInt::from(1); p.n];
        ray[p.n - 1] = BigInt::from(0);
        prop_assert_eq!(sub.fan.ray(sub.new_ray.unwrap()).coords(), &ray[..]);
        prop_assert_eq!(sub.fan.max_cones().len(), fan.max_cones().len() + 2 * (p.n - 2));
        prop_assert_eq!(chow::milnor_genus(&sub.fan).unwrap(), genus::edge_blowup_genus(p).unwrap());
    }

    #[test]
    fn unimodular_images_keep_every_number(
        p in family(),
        ops in prop::collection::vec((0usize..8, 0usize..8, -3i64..=3), 0..20),
    ) {
        let fan = build_family_fan(p).unwrap();
        let moved = fan.transformed(&unimodular(p.n, &ops)).unwrap();
        prop_assert!(certified(&moved));
        let (a, b) = (ChowEngine::new(&fan).unwrap(), ChowEngine::new(&moved).unwrap());
        prop_assert_eq!(a.milnor_genus().unwrap(), b.milnor_genus().unwrap());
        let mono = DivisorMonomial::from_factors(&vec![p.v(p.eps); p.n]);
        prop_assert_eq!(a.intersection_number(&mono).unwrap().value, b.intersection_number(&mono).unwrap().value);
    }

    #[test]
    fn fan_json_round_trips(p in family(), blow in any::<bool>()) {
        let mut fan = build_family_fan(p).unwrap();
        if blow {
            let site = fan.max_cones()[0].clone();
            fan = star_subdivide(&fan, &site).unwrap().fan;
        }
        prop_assert_eq!(Fan::from_json(&fan.to_json()).unwrap(), fan);
    }

    #[test]
    fn plans_verify_and_round_trip(n in 1u64..3000) {
        let plan = construct::construct(n).unwrap();
        let report = construct::verify_plan(&plan, false);
        prop_assert!(report.passed(), "{:?}", report.checks);
        prop_assert_eq!(&ConstructionPlan::from_json(&plan.to_json()).unwrap(), &plan);
        prop_assert_eq!(plan.final_genus, BigInt::from(plan.target.magnitude));
    }
}

#[test]
fn seeds_do_not_change_results() {
    let fan = build_family_fan(FamilyParams::new(6, 4, -2, 3).unwrap()).unwrap();
    let a = ChowEngine::with_seeds(&fan, &[1, 2]).unwrap().milnor_genus().unwrap();
    let b = ChowEngine::with_seeds(&fan, &[99, 12345, 7]).unwrap().milnor_genus().unwrap();
    assert_eq!(a, b);
    assert!(ChowEngine::with_seeds(&fan, &[5]).is_err());
    assert!(ChowEngine::with_seeds(&fan, &[5, 5]).is_err());
}

#[test]
fn materialized_plans_match_predictions() {
    for n in 1..=10 {
        let plan = construct::construct(n).unwrap();
        let fan = construct::materialize(&plan, construct::DEFAULT_CONE_CAP, fan::DEFAULT_MAX_DIM).unwrap();
        assert_eq!(BigInt::from(fan.max_cones().len()), plan.predicted_cones(), "n = {n}");
        assert_eq!(BigInt::from(fan.rays().len()), plan.predicted_rays(), "n = {n}");
        assert!(certified(&fan), "n = {n}");
    }
}

#[test]
fn blown_up_fans_keep_lexicographic_sites() {
    let base = build_family_fan(FamilyParams::new(4, 2, 1, 1).unwrap()).unwrap();
    let first = base.max_cones().iter().min().unwrap().clone();
    let once = construct::blow_up_points(base.clone(), 1).unwrap();
    assert!(!once.max_cones().contains(&first));
    let twice = construct::blow_up_points(base, 2).unwrap();
    assert_eq!(twice.rays().len(), 9);
    assert!(certified(&twice));
}

#[test]
fn materialize_respects_dimension_cap() {
    let plan = construct::construct(9).unwrap();
    assert!(matches!(
        construct::materialize(&plan, construct::DEFAULT_CONE_CAP, 8),
        Err(toricgen::Error::Size { .. })
    ));
    assert!(matches!(construct::materialize(&plan, 10, 64), Err(toricgen::Error::Size { .. })));
}
