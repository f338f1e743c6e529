use facloc::objectives::{cost_mc, cost_sc, opt_max_cost, opt_social_cost};
use facloc::{
    expected_distance, point_on_segment_at_distance, Agent, Lottery, Mechanism, MechanismSpec,
    Norm, Point, Profile,
};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

fn point(d: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(coord(), d).prop_map(|v| Point::new(v).unwrap())
}

fn profile(n: std::ops::RangeInclusive<usize>, d: usize) -> impl Strategy<Value = Profile> {
    prop::collection::vec(point(d), n).prop_map(|pts| Profile::new(pts).unwrap())
}

fn lottery(d: usize) -> impl Strategy<Value = Lottery> {
    prop::collection::vec((0.01..1.0f64, point(d)), 1..6).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.0).sum();
        Lottery::new(atoms.into_iter().map(|(w, p)| (w / total, p)).collect()).unwrap()
    })
}

/// Plain, weighted and transformed 2-D norms.
fn norm2() -> impl Strategy<Value = Norm> {
    let p = prop_oneof![Just(1.0), Just(f64::INFINITY), 1.0..6.0f64];
    (p, 0u8..3, 0.2..3.0f64, 0.2..3.0f64, -1.0..1.0f64).prop_map(|(p, kind, a, b, c)| {
        let base = Norm::lp(p).unwrap();
        match kind {
            0 => base,
            1 => base.with_weights(vec![a, b]).unwrap(),
            _ => base.with_transform(vec![a, c, 0.0, b]).unwrap(),
        }
    })
}

fn mechanism() -> impl Strategy<Value = MechanismSpec> {
    prop_oneof![
        (1usize..=3).prop_map(|i| MechanismSpec::Dictator(Agent(i))),
        Just(MechanismSpec::RandMed),
        Just(MechanismSpec::RandCenter),
        (-5.0..5.0f64).prop_map(|a| MechanismSpec::Separate2Dictator { a }),
        Just(MechanismSpec::CoordinateMedian),
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonical_form_is_idempotent(lot in lottery(2)) {
        let again = Lottery::new(lot.atoms().iter().map(|a| (a.weight, a.point.clone())).collect()).unwrap();
        prop_assert_eq!(&again, &lot);
        let total: f64 = lot.atoms().iter().map(|a| a.weight).sum();
        prop_assert!(close(total, 1.0, 1e-12));
    }

    #[test]
    fn centroid_dominance(lot in lottery(2), x in point(2), norm in norm2()) {
        let lhs = norm.dist(&x, &lot.centroid());
        let rhs = expected_distance(&x, &lot, &norm).unwrap();
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn norm_axioms(u in point(2), v in point(2), c in -5.0..5.0f64, norm in norm2()) {
        let nu = norm.eval(u.coords());
        let nv = norm.eval(v.coords());
        prop_assert!(norm.eval(u.add(&v).coords()) <= nu + nv + 1e-9 * (1.0 + nu + nv));
        prop_assert!(close(norm.eval(u.scale(c).coords()), c.abs() * nu, 1e-12));
        prop_assert!(nu >= 0.0);
    }

    #[test]
    fn segment_point_round_trip(a in point(2), b in point(2), t in 0.0..=1.0f64, norm in norm2()) {
        let len = norm.dist(&a, &b);
        prop_assume!(len > 1e-6);
        let y = point_on_segment_at_distance(&a, &b, t * len, &norm).unwrap();
        prop_assert!(close(norm.dist(&a, &y), t * len, 1e-9));
        prop_assert!(close(norm.dist(&y, &b), (1.0 - t) * len, 1e-9));
    }

    #[test]
    fn unanimity_everywhere(mech in mechanism(), z in point(2), n in 3usize..6) {
        let out = mech.apply(&Profile::unanimous(&z, n).unwrap(), &Norm::euclidean()).unwrap();
        prop_assert_eq!(out, Lottery::degenerate(z));
    }

    #[test]
    fn translation_covariance(p in profile(2..=5, 2), shift in point(2)) {
        for mech in [MechanismSpec::RandMed, MechanismSpec::RandCenter, MechanismSpec::CoordinateMedian] {
            let a = mech.apply(&p.translate(&shift), &Norm::euclidean()).unwrap();
            let b = mech.apply(&p, &Norm::euclidean()).unwrap().translate(&shift);
            prop_assert!(a.discrepancy(&b) <= 1e-9 * (1.0 + shift.max_abs() + 10.0), "{} {}", a, b);
        }
    }

    #[test]
    fn social_cost_is_linear_and_max_cost_dominates(lot in lottery(2), p in profile(1..=5, 2), norm in norm2()) {
        let sc = cost_sc(&lot, &p, &norm).unwrap();
        let by_atom: f64 = lot
            .atoms()
            .iter()
            .map(|a| a.weight * p.points().iter().map(|x| norm.dist(x, &a.point)).sum::<f64>())
            .sum();
        prop_assert!(close(sc, by_atom, 1e-12));
        let mc = cost_mc(&lot, &p, &norm).unwrap();
        for x in p.points() {
            prop_assert!(mc >= expected_distance(x, &lot, &norm).unwrap() - 1e-12 * (1.0 + mc));
        }
        prop_assert!(mc <= sc + 1e-12 * (1.0 + sc));
    }

    #[test]
    fn separate_2dictator_support(p in profile(3..=5, 2), a in -5.0..5.0f64) {
        let out = MechanismSpec::Separate2Dictator { a }.apply(&p, &Norm::euclidean()).unwrap();
        let x1 = &p.points()[0];
        if !out.is_degenerate() {
            let w = out.atoms().iter().find(|at| at.point == *x1).map(|at| at.weight);
            prop_assert!(w.is_some_and(|w| close(w, 2.0 / 3.0, 1e-12)));
        }
        let on = |b: &Point| out.points().all(|y| {
            let n = Norm::euclidean();
            n.dist(x1, y) + n.dist(y, b) - n.dist(x1, b) <= 1e-9 * (1.0 + n.dist(x1, b))
        });
        prop_assert!(on(&p.points()[1]) || on(&p.points()[2]));
    }

    #[test]
    fn dictator_ignores_others(p in profile(2..=5, 2), moved in point(2)) {
        let mech = MechanismSpec::Dictator(Agent(1));
        let out = mech.apply(&p, &Norm::euclidean()).unwrap();
        let other = mech.apply(&p.with_report(Agent(2), moved), &Norm::euclidean()).unwrap();
        prop_assert_eq!(out, other);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn certified_optima_bound_every_point(p in profile(2..=5, 2), norm in norm2(), probes in prop::collection::vec(point(2), 8)) {
        let sc = opt_social_cost(&p, &norm, 20_000).unwrap();
        let mc = opt_max_cost(&p, &norm, 20_000).unwrap();
        for y in &probes {
            let at_sc: f64 = p.points().iter().map(|x| norm.dist(x, y)).sum();
            let at_mc = p.points().iter().map(|x| norm.dist(x, y)).fold(0.0, f64::max);
            prop_assert!(at_sc >= sc.value - sc.certified_gap - 1e-9 * (1.0 + at_sc));
            prop_assert!(at_mc >= mc.value - mc.certified_gap - 1e-9 * (1.0 + at_mc));
        }
        // the reported values are attained at the reported points
        let at: f64 = p.points().iter().map(|x| norm.dist(x, &sc.point)).sum();
        prop_assert!(close(at, sc.value, 1e-12));
        prop_assert!(mc.value >= p.diameter(&norm).0 / 2.0 - 1e-9 * (1.0 + mc.value));
    }
}
