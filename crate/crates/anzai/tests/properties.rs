//! Property tests for the representation-level invariants.

use num_complex::Complex64;
use proptest::prelude::*;

use anzai::base::{BaseFunction, BaseKind, BasePoint, BaseSystem};
use anzai::cohomology::{compute_report, solve_continuous};
use anzai::expectations::{
    expectations_equal, f_a, f_a_matrix_oracle, t_map, ExpectationMatrix,
};
use anzai::skew::{CircleCocycle, SkewSystem};
use anzai::spectral::{fejer_riesz_scalar, AnalyticFactor, LaurentPoly};
use anzai::torus::TorusObservable;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn cx() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn zinf_fn() -> impl Strategy<Value = BaseFunction> {
    (
        proptest::collection::vec((-20i64..20, cx()), 0..5),
        cx(),
    )
        .prop_map(|(window, limit)| BaseFunction::zinf(window, limit))
}

fn circle_fn() -> impl Strategy<Value = BaseFunction> {
    proptest::collection::vec((-6i64..6, cx()), 0..5)
        .prop_map(BaseFunction::circle)
}

fn cyclic_fn(n: usize) -> impl Strategy<Value = BaseFunction> {
    proptest::collection::vec(cx(), n).prop_map(BaseFunction::cyclic)
}

fn zinf_observable() -> impl Strategy<Value = TorusObservable> {
    proptest::collection::btree_map(-4i64..=4, zinf_fn(), 1..5).prop_map(|slots| {
        TorusObservable::new(BaseKind::ZInf, slots).expect("consistent variants")
    })
}

fn unimodular() -> impl Strategy<Value = Complex64> {
    (0.0..1.0f64).prop_map(anzai::util::unit_exp)
}

fn psd_trace_one(k: usize) -> impl Strategy<Value = ExpectationMatrix> {
    proptest::collection::vec(cx(), k * k).prop_map(move |g| {
        let mut m = vec![Complex64::new(0.0, 0.0); k * k];
        for i in 0..k {
            for j in 0..k {
                let mut s = Complex64::new(0.0, 0.0);
                for l in 0..k {
                    s += g[i * k + l] * g[j * k + l].conj();
                }
                m[i * k + j] = s;
            }
        }
        let mut trace: f64 = (0..k).map(|i| m[i * k + i].re).sum();
        if trace < 1e-6 {
            for i in 0..k {
                m[i * k + i] += ONE;
            }
            trace += k as f64;
        }
        for (i, v) in m.iter_mut().enumerate() {
            *v /= trace;
            if i % (k + 1) == 0 {
                *v = Complex64::new(v.re, 0.0);
            }
        }
        let tr: f64 = (0..k).map(|i| m[i * k + i].re).sum();
        let last = (k - 1) * k + (k - 1);
        m[last] = Complex64::new(m[last].re + (1.0 - tr), 0.0);
        ExpectationMatrix::new(k, m).expect("Gram matrices are admissible")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integration_is_invariant_under_pullback(g in zinf_fn()) {
        let sys = BaseSystem::zinf_shift();
        let pulled = sys.pullback(&g).unwrap();
        prop_assert_eq!(sys.integrate(&pulled).unwrap(), sys.integrate(&g).unwrap());
    }

    #[test]
    fn integration_is_invariant_under_pullback_circle(g in circle_fn()) {
        let sys = BaseSystem::golden_rotation();
        let pulled = sys.pullback(&g).unwrap();
        prop_assert_eq!(sys.integrate(&pulled).unwrap(), sys.integrate(&g).unwrap());
    }

    #[test]
    fn integration_is_invariant_under_pullback_cyclic(g in cyclic_fn(5)) {
        let sys = BaseSystem::cyclic_shift(5).unwrap();
        let pulled = sys.pullback(&g).unwrap();
        prop_assert_eq!(sys.integrate(&pulled).unwrap(), sys.integrate(&g).unwrap());
    }

    #[test]
    fn pullback_matches_pointwise_composition(g in circle_fn(), t in 0.0..1.0f64) {
        let sys = BaseSystem::golden_rotation();
        let x = BasePoint::circle(t);
        let lhs = sys.evaluate(&sys.pullback(&g).unwrap(), &x).unwrap();
        let rhs = sys.evaluate(&g, &sys.apply_theta(&x).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn pullback_is_multiplicative(a in zinf_fn(), b in zinf_fn()) {
        let sys = BaseSystem::zinf_shift();
        let lhs = sys.pullback(&a.mul(&b).unwrap()).unwrap();
        let rhs = sys.pullback(&a).unwrap().mul(&sys.pullback(&b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_is_multiplicative_circle(a in circle_fn(), b in circle_fn(), t in 0.0..1.0f64) {
        // Phases compose as e^{2πi(j+k)α} vs e^{2πijα}·e^{2πikα}, so the
        // identity holds at rounding level rather than bitwise.
        let sys = BaseSystem::golden_rotation();
        let lhs = sys.pullback(&a.mul(&b).unwrap()).unwrap();
        let rhs = sys.pullback(&a).unwrap().mul(&sys.pullback(&b).unwrap()).unwrap();
        let x = BasePoint::circle(t);
        let lv = sys.evaluate(&lhs, &x).unwrap();
        let rv = sys.evaluate(&rhs, &x).unwrap();
        prop_assert!((lv - rv).norm() < 1e-12);
    }

    #[test]
    fn periodic_expectation_is_idempotent_module_map(
        h in zinf_observable(),
        g in zinf_fn(),
        n in 1i64..5,
    ) {
        let e = h.periodic_expectation(n).unwrap();
        prop_assert_eq!(e.periodic_expectation(n).unwrap(), e.clone());
        // Module law over the range, representation-level exact.
        let g_obs = TorusObservable::monomial(2 * n, g);
        let lhs = g_obs.mul(&h).unwrap().periodic_expectation(n).unwrap();
        let rhs = g_obs.mul(&e).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn dual_rotation_at_full_turn_is_identity(h in zinf_observable(), n in 1i64..6) {
        prop_assert_eq!(h.dual_rotation(n, n).unwrap(), h.clone());
    }

    #[test]
    fn fourier_round_trip_recovers_coefficients(h in zinf_observable()) {
        let sys = BaseSystem::zinf_shift();
        let pts: Vec<BasePoint> = (-8..=8).map(BasePoint::zint).chain([BasePoint::infinity()]).collect();
        for n in -5..=5 {
            let (rec, direct) =
                anzai::torus::reconstruct_slot_values(&sys, &h, pts.clone(), n).unwrap();
            for (a, b) in rec.iter().zip(direct.iter()) {
                prop_assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn birkhoff_agrees_with_exact_cesaro(
        h in zinf_observable(),
        z in unimodular(),
        n in 1u64..40,
    ) {
        let sys = SkewSystem::new(
            BaseSystem::zinf_shift(),
            CircleCocycle::zinf([(0, Complex64::new(-1.0, 0.0))], ONE).unwrap(),
        )
        .unwrap();
        let exact = sys.cesaro_average(&h, n).unwrap();
        for x in [BasePoint::zint(-9), BasePoint::zint(3), BasePoint::infinity()] {
            let a = exact.evaluate(&sys.base, &x, z).unwrap();
            let b = sys.birkhoff_average(&h, &x, z, n).unwrap();
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn fejer_riesz_residual_on_random_positive_inputs(
        coeffs in proptest::collection::vec(cx(), 1..9),
    ) {
        let r = AnalyticFactor::new(coeffs);
        let q = r.modulus_squared();
        let q = LaurentPoly::from_pairs(q.coeff_pairs().map(|(k, c)| {
            if k == 0 { (k, c + Complex64::new(1e-3, 0.0)) } else { (k, c) }
        }));
        let f = fejer_riesz_scalar(&q, 1e-9).unwrap();
        prop_assert!(f.residual < 1e-8, "residual {}", f.residual);
        for root in &f.roots {
            prop_assert!(root.norm() > 1.0 + 1e-9);
        }
        // Coefficient bound from the uniform estimate.
        let sup = q.range_on_grid(4096).1;
        for a in f.factor.coeffs() {
            prop_assert!(a.norm() <= sup.sqrt() + 1e-8);
        }
    }

    #[test]
    fn f_a_matches_matrix_path(
        a in psd_trace_one(3),
        p in proptest::collection::btree_map(-7i64..=7, cx(), 1..6),
    ) {
        let p = LaurentPoly::from_pairs(p);
        let fast = f_a(&a, &p).unwrap();
        let oracle = f_a_matrix_oracle(&a, &p).unwrap();
        let span = fast.degree().max(oracle.degree()) as i64;
        for l in -span..=span {
            prop_assert!((fast.coeff(l) - oracle.coeff(l)).norm() < 1e-12);
        }
    }

    #[test]
    fn equal_traces_mean_equal_expectations(a in psd_trace_one(2), b in psd_trace_one(2)) {
        let fast = expectations_equal(&a, &b).unwrap();
        let mut brute = true;
        for l in 0..=4i64 {
            let chi = LaurentPoly::from_pairs([(l, ONE)]);
            let fa = f_a(&a, &chi).unwrap();
            let fb = f_a(&b, &chi).unwrap();
            let span = fa.degree().max(fb.degree()) as i64;
            for m in -span..=span {
                if (fa.coeff(m) - fb.coeff(m)).norm() > 1e-10 {
                    brute = false;
                }
            }
        }
        prop_assert_eq!(fast, brute);
    }

    #[test]
    fn t_is_contractive(h in zinf_observable()) {
        let sys = SkewSystem::new(
            BaseSystem::zinf_shift(),
            CircleCocycle::zinf([(0, Complex64::new(-1.0, 0.0))], ONE).unwrap(),
        )
        .unwrap();
        let report = compute_report(&sys, 4).unwrap();
        let t = t_map(&sys, &report, &h).unwrap();
        if !t.coeffs.is_empty() {
            let expanded = t.expand(&report).unwrap();
            let sup_t = expanded.sup_on_grid(&sys.base, 24, 12).unwrap();
            let sup_h = h.sup_on_grid(&sys.base, 24, 12).unwrap();
            prop_assert!(sup_t <= sup_h + 1e-9, "{} vs {}", sup_t, sup_h);
        }
    }

    #[test]
    fn cohomology_subgroup_law_on_random_cyclic_cocycles(
        values in proptest::collection::vec(0.0..1.0f64, 4),
        n1 in 1i64..5,
        n2 in 1i64..5,
    ) {
        let base = BaseSystem::cyclic_shift(4).unwrap();
        let f = CircleCocycle::cyclic(
            values.iter().map(|t| anzai::util::unit_exp(*t)).collect(),
        )
        .unwrap();
        let sys = SkewSystem::new(base, f).unwrap();
        let s1 = solve_continuous(&sys, n1).unwrap();
        let s2 = solve_continuous(&sys, n2).unwrap();
        if s1.exists() && s2.exists() {
            let s12 = solve_continuous(&sys, n1 + n2).unwrap();
            prop_assert!(s12.exists(), "levels {} and {} solve but {} does not", n1, n2, n1 + n2);
            let w1 = s1.witness.unwrap();
            let w2 = s2.witness.unwrap();
            let w12 = s12.witness.unwrap();
            for r in 0..4u64 {
                let x = BasePoint::cyclic(r);
                let prod = w1.evaluate(&sys.base, &x).unwrap() * w2.evaluate(&sys.base, &x).unwrap();
                let direct = w12.evaluate(&sys.base, &x).unwrap();
                prop_assert!((prod - direct).norm() < 1e-10);
            }
        }
    }
}
