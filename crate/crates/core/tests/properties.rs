use elliptic_lab::analysis::{
    asymptotics, halton, kelvin_transform, kelvin_weight, power_fit, sphere_potential_average,
};
use elliptic_lab::bvp1d::{comparison_check, sci, solve_radial_dirichlet, RadialGrid, RadialProfile, SolveConfig};
use elliptic_lab::funcs::{xi_closed_form, FSpec, PhiSpec};
use elliptic_lab::quad::{integrate_tail_monotone, Status};
use proptest::prelude::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn kelvin_transform_is_an_involution(n in 3usize..7, c in 0.1f64..10.0, q in -3.0f64..1.0, lo in -6.0f64..-1.0, hi in 1.0f64..6.0) {
        let grid = RadialGrid::geometric(lo.exp2(), hi.exp2(), 97, n).unwrap();
        let u = RadialProfile::sample(grid, |r| c * r.powf(q) + 1.0).unwrap();
        let back = kelvin_transform(&kelvin_transform(&u, n).unwrap(), n).unwrap();
        for ((r0, r1), (v0, v1)) in u.nodes().iter().zip(back.nodes()).zip(u.values().iter().zip(back.values())) {
            prop_assert!(rel(*r1, *r0) < 1e-14);
            prop_assert!(rel(*v1, *v0) < 1e-12);
        }
    }

    #[test]
    fn kelvin_weight_is_an_involution_and_pointwise_exact(
        n in 3usize..7, p in 0.0f64..3.0, alpha in -8.0f64..2.0, beta in -8.0f64..2.0, r in 0.01f64..100.0,
    ) {
        let k = -2.0 - n as f64 - p * (n as f64 - 2.0);
        for phi in [
            PhiSpec::Power { alpha },
            PhiSpec::PowerSplit { alpha, beta },
            PhiSpec::PowerLog { alpha, beta: beta.abs() + 0.1 },
        ] {
            let star = kelvin_weight(&phi, n, p).unwrap();
            prop_assert!(rel(star.value(r), r.powf(k) * phi.value(1.0 / r)) < 1e-12);
            let back = kelvin_weight(&star, n, p).unwrap();
            for s in [0.3, 1.0, 4.0, r] {
                prop_assert!(rel(back.value(s), phi.value(s)) < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_average_is_max_radius_potential(n in 3usize..7, r in 0.05f64..20.0, x in 0.05f64..20.0) {
        prop_assume!(rel(x, r) > 1e-3);
        let v = sphere_potential_average(n, r, x).unwrap();
        prop_assert!(rel(v, r.max(x).powf(2.0 - n as f64)) < 1e-8);
    }

    #[test]
    fn closed_form_satisfies_the_equation(n in 3usize..7, p in 0.05f64..3.0, t in 0.05f64..0.95, r in 0.01f64..100.0) {
        // Admissible alpha lies strictly between -N - p(N-2) and -2.
        let lo = -(n as f64) - p * (n as f64 - 2.0);
        let alpha = lo + t * (-2.0 - lo);
        let xi = xi_closed_form(n, p, alpha).unwrap();
        let lhs = xi.neg_laplacian(n, r);
        let rhs = r.powf(alpha) * xi.eval(r).powf(-p);
        prop_assert!(rel(lhs, rhs) < 1e-10);
        prop_assert!(xi.c > 0.0);
    }

    #[test]
    fn asymptotics_exact_on_harmonic_plus_constant(a in 0.0f64..3.0, b in 0.0f64..3.0, c in -1.0f64..1.0) {
        // r u = a + b r + c r^2 near 0 and u = b + a / r + c / r^2 far out.
        let grid = RadialGrid::nested_symmetric(2f64.powi(14), 8, 3).unwrap();
        let u = RadialProfile::sample(grid, |r| a / r + b + c * 1e-3 * (r / (1.0 + r * r))).unwrap();
        let est = asymptotics(&u, 3).unwrap();
        prop_assert!((est.a_hat - a).abs() < 1e-6 * (1.0 + a), "a_hat {} vs {}", est.a_hat, a);
        prop_assert!((est.b_hat - b).abs() < 1e-6 * (1.0 + b), "b_hat {} vs {}", est.b_hat, b);
    }

    #[test]
    fn power_fit_recovers_exact_powers(c in 0.1f64..10.0, q in -3.0f64..3.0) {
        let grid = RadialGrid::geometric(0.01, 100.0, 200, 3).unwrap();
        let u = RadialProfile::sample(grid, |r| c * r.powf(q)).unwrap();
        let (cf, qf) = power_fit(&u, 0.1, 10.0).unwrap();
        prop_assert!(rel(cf, c) < 1e-10 && (qf - q).abs() < 1e-10);
    }

    #[test]
    fn halton_points_lie_in_the_unit_cube(count in 1usize..200, dim in 1usize..6, skip in 0u64..1000) {
        let pts = halton(count, dim, skip).unwrap();
        prop_assert_eq!(pts.len(), count);
        for x in &pts {
            prop_assert_eq!(x.len(), dim);
            prop_assert!(x.iter().all(|v| (0.0..1.0).contains(v)));
        }
        prop_assert_eq!(halton(count, dim, skip).unwrap(), pts);
    }

    #[test]
    fn csv_round_trip_is_bit_exact(vals in prop::collection::vec(1e-300f64..1e300, 16..40)) {
        let grid = RadialGrid::geometric(0.5, 2.0, vals.len(), 3).unwrap();
        let u = RadialProfile::new(grid, vals).unwrap();
        let back = RadialProfile::from_csv(&u.to_csv(), 3).unwrap();
        prop_assert_eq!(back.values(), u.values());
        prop_assert_eq!(back.nodes(), u.nodes());
    }

    #[test]
    fn sci_parses_back(x in prop::num::f64::NORMAL) {
        prop_assert_eq!(sci(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn power_tail_integral_value(alpha in -6.0f64..-2.2, r0 in 0.5f64..4.0) {
        let rep = integrate_tail_monotone(&PhiSpec::Power { alpha }, r0).unwrap();
        prop_assert_eq!(rep.status, Status::Finite);
        let exact = r0.powf(alpha + 2.0) / (-alpha - 2.0);
        prop_assert!(rel(rep.value.unwrap(), exact) < 1e-8);
    }
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn larger_boundary_data_gives_larger_solutions(g1 in 0.0f64..2.0, dg in 0.0f64..2.0, alpha in -4.0f64..0.0, p in 0.2f64..2.0) {
        let grid = RadialGrid::geometric(0.1, 10.0, 200, 3).unwrap();
        let f = FSpec::Power { p };
        let w = move |r: f64| r.powf(alpha);
        let cfg = SolveConfig::default();
        let lo = solve_radial_dirichlet(3, &w, &f, &grid, (g1, g1), &cfg).unwrap();
        let hi = solve_radial_dirichlet(3, &w, &f, &grid, (g1 + dg, g1 + dg), &cfg).unwrap();
        prop_assert!(comparison_check(&hi.profile, &lo.profile, 1e-9).unwrap());
    }
}
