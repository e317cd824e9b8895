use adaptive_rbf::dynamics::{JointState, RobotParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = RobotParams> {
    (0.1f64..5.0, 0.1f64..5.0, 0.1f64..2.0, 0.1f64..2.0, 0.0f64..10.0)
        .prop_map(|(m1, m2, l1, l2, g)| RobotParams { m1, m2, l1, l2, g })
}

fn angle() -> impl Strategy<Value = f64> {
    -10.0f64..10.0
}

fn rate() -> impl Strategy<Value = f64> {
    -20.0f64..20.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn mass_matrix_is_symmetric_positive_definite(p in params(), q1 in angle(), q2 in angle()) {
        let m = p.mass_matrix([q1, q2]);
        prop_assert_eq!(m.0[0][1], m.0[1][0]);
        let (lo, hi) = m.sym_eigenvalues();
        prop_assert!(lo > 0.0 && hi >= lo);
    }

    #[test]
    fn mdot_minus_two_c_is_skew(
        p in params(), q1 in angle(), q2 in angle(),
        v1 in rate(), v2 in rate(), z1 in -5.0f64..5.0, z2 in -5.0f64..5.0,
    ) {
        let n = p.mass_matrix_dot([q1, q2], [v1, v2]) - p.coriolis_matrix([q1, q2], [v1, v2]) * 2.0;
        prop_assert!(n.quad_form([z1, z2]).abs() <= 1e-10);
    }

    #[test]
    fn forward_inverts_inverse_dynamics(
        p in params(), q1 in angle(), q2 in angle(), v1 in rate(), v2 in rate(),
        a1 in -50.0f64..50.0, a2 in -50.0f64..50.0,
    ) {
        let tau = p.inverse_dynamics([q1, q2], [v1, v2], [a1, a2]);
        let acc = p.forward_dynamics(&JointState::new([q1, q2], [v1, v2]), tau).unwrap();
        let scale = 1.0 + a1.abs().max(a2.abs());
        prop_assert!((acc[0] - a1).abs() <= 1e-8 * scale, "{:?} vs {:?}", acc, [a1, a2]);
        prop_assert!((acc[1] - a2).abs() <= 1e-8 * scale, "{:?} vs {:?}", acc, [a1, a2]);
    }

    #[test]
    fn mass_matrix_dot_matches_central_difference(
        p in params(), q1 in angle(), q2 in angle(), v1 in -3.0f64..3.0, v2 in -3.0f64..3.0,
    ) {
        let h = 1e-6;
        let plus = p.mass_matrix([q1 + h * v1, q2 + h * v2]);
        let minus = p.mass_matrix([q1 - h * v1, q2 - h * v2]);
        let analytic = p.mass_matrix_dot([q1, q2], [v1, v2]);
        for i in 0..2 {
            for j in 0..2 {
                let fd = (plus.0[i][j] - minus.0[i][j]) / (2.0 * h);
                prop_assert!((fd - analytic.0[i][j]).abs() < 1e-6 * (1.0 + analytic.0[i][j].abs()));
            }
        }
    }

    #[test]
    fn gravity_is_gradient_of_potential(p in params(), q1 in angle(), q2 in angle()) {
        // U = (m1 + m2) g l1 sin q1 + m2 g l2 sin(q1 + q2)
        let u = |a: f64, b: f64| (p.m1 + p.m2) * p.g * p.l1 * a.sin() + p.m2 * p.g * p.l2 * (a + b).sin();
        let h = 1e-6;
        let g = p.gravity_vector([q1, q2]);
        let d1 = (u(q1 + h, q2) - u(q1 - h, q2)) / (2.0 * h);
        let d2 = (u(q1, q2 + h) - u(q1, q2 - h)) / (2.0 * h);
        prop_assert!((g[0] - d1).abs() < 1e-6 * (1.0 + g[0].abs()));
        prop_assert!((g[1] - d2).abs() < 1e-6 * (1.0 + g[1].abs()));
    }
}

#[test]
fn kinetic_energy_matches_quadratic_form() {
    let p = RobotParams::default();
    let s = JointState::new([0.3, 1.1], [0.7, -0.4]);
    let m = p.mass_matrix(s.q);
    assert!((p.kinetic_energy(&s) - 0.5 * m.quad_form(s.qdot)).abs() < 1e-15);
}

#[test]
fn spec_examples() {
    let p = RobotParams::default();
    let m = p.mass_matrix([0.0, std::f64::consts::FRAC_PI_2]);
    assert!((m.0[0][0] - 3.0).abs() < 1e-15 && (m.0[0][1] - 1.0).abs() < 1e-15 && m.0[1][1] == 1.0);
    assert_eq!(p.mass_matrix([0.0, 0.0]).0, [[5.0, 2.0], [2.0, 1.0]]);
    let g = p.gravity_vector([0.0, 0.0]);
    assert!((g[0] - 29.4).abs() < 1e-12 && (g[1] - 9.8).abs() < 1e-12);
    let still = JointState::new([0.4, -0.9], [0.0, 0.0]);
    let acc = p.forward_dynamics(&still, p.gravity_vector(still.q)).unwrap();
    assert!(acc[0].abs() < 1e-12 && acc[1].abs() < 1e-12);
}
