use nls_homoclinic::plane::*;
use nls_homoclinic::{Error, Params};
use proptest::prelude::*;

/// Parameters with αω < β and margin.
fn resonant() -> impl Strategy<Value = Params> {
    (0.55..1.45f64, 0.2..1.5f64, 0.1..0.9f64)
        .prop_map(|(w, a, frac)| Params::new(w, a, a * w / frac, 1e-3))
}

#[test]
fn leading_saddle_and_center_eigenvalues() {
    for p in [
        Params::new(0.8, 1.0, 2.0, 1e-3),
        Params::new(1.2, 0.5, 3.0, 1e-3),
    ] {
        let ts = (p.alpha * p.omega / p.beta).acos();
        // ∂θ̇/∂j = −2 and ∂j̇/∂θ = −2βω sin θ give λ² = 4βω sin θ.
        let lam2 = 4.0 * p.beta * p.omega * ts.sin();
        let pts = leading_fixed_points(&p).unwrap();
        for f in &pts {
            assert!(f.residual < 1e-14);
            let expect = if f.theta > 0.0 { lam2 } else { -lam2 };
            let got = f.eigen_closed[0] * f.eigen_closed[0];
            assert!((got.re - expect).abs() < 1e-12 && got.im.abs() < 1e-12);
            assert!(f.eigen_mismatch() < 1e-6);
        }
        assert_eq!(pts[1].kind, FixedPointKind::SaddleQStar);
        assert!((pts[1].theta - ts).abs() < 1e-15);
    }
}

#[test]
fn epsilon_fixed_points_are_equilibria() {
    for eps in [1e-2, 1e-3, 1e-4] {
        let p = Params::new(0.8, 1.0, 2.0, eps);
        let pts = fixed_points(&p).unwrap();
        assert_eq!(pts.len(), 3);
        for f in &pts {
            let (di, dth) = plane_rhs(
                PlaneState {
                    j: f.action - p.omega * p.omega,
                    theta: f.theta,
                },
                &p,
            )
            .unwrap();
            assert!(
                di.abs() < 1e-12 && dth.abs() < 1e-9,
                "{:?}: {di} {dth}",
                f.kind
            );
            assert!(f.eigen_mismatch() < 1e-6f64.max(10.0 * eps * eps));
        }
        let q = pts
            .iter()
            .find(|f| f.kind == FixedPointKind::SaddleQ)
            .unwrap();
        assert!((q.action - p.omega * p.omega).abs() < 10.0 * eps.sqrt());
        assert!((q.theta - p.theta_star().unwrap()).abs() < 10.0 * eps.sqrt());
    }
}

#[test]
fn unperturbed_flow_rotates() {
    let p = Params::new(0.9, 1.0, 2.0, 0.0);
    let s0 = PlaneState {
        j: 0.07,
        theta: 0.4,
    };
    let tr = integrate_plane(s0, (0.0, 5.0), 1e-3, 100, PlaneSystem::Full, &p);
    for (t, s) in tr.times.iter().zip(&tr.states) {
        assert!((s.j - s0.j).abs() < 1e-15);
        assert!((s.theta - (s0.theta - 2.0 * s0.j * t)).abs() < 1e-11);
    }
}

#[test]
fn full_and_rescaled_systems_agree() {
    let p = Params::new(0.8, 1.0, 2.0, 1e-4);
    let se = p.epsilon.sqrt();
    let (j0, th0, tau) = (0.4, 0.5, 3.0);
    let r = integrate_plane(
        PlaneState { j: j0, theta: th0 },
        (0.0, tau),
        1e-3,
        1,
        PlaneSystem::Rescaled,
        &p,
    );
    let f = integrate_plane(
        PlaneState {
            j: se * j0,
            theta: th0,
        },
        (0.0, tau / se),
        1e-3 / se,
        1,
        PlaneSystem::Full,
        &p,
    );
    let (a, b) = (r.states.last().unwrap(), f.states.last().unwrap());
    assert!((a.j - b.j / se).abs() < 1e-10);
    assert!((a.theta - b.theta).abs() < 1e-10);
}

#[test]
fn rescaled_approaches_leading_order() {
    let start = PlaneState { j: 0.3, theta: 0.2 };
    let gap = |eps: f64| {
        let p = Params::new(0.8, 1.0, 2.0, eps);
        let a = integrate_plane(start, (0.0, 2.0), 1e-3, 1, PlaneSystem::Rescaled, &p);
        let b = integrate_plane(start, (0.0, 2.0), 1e-3, 1, PlaneSystem::Leading, &p);
        let (x, y) = (a.states.last().unwrap(), b.states.last().unwrap());
        (x.j - y.j).abs().max((x.theta - y.theta).abs())
    };
    let ratio = gap(1e-4) / gap(1e-6);
    assert!((ratio - 10.0).abs() < 1.0, "ratio {ratio}");
}

#[test]
fn full_system_halts_at_zero_action() {
    let p = Params::new(0.8, 1.0, 2.0, 1e-3);
    let tr = integrate_plane(
        PlaneState {
            j: -0.5,
            theta: 0.0,
        },
        (0.0, 1.0),
        1e-2,
        1,
        PlaneSystem::Full,
        &p,
    );
    assert!(tr.halted.is_none());
    let tr = integrate_plane(
        PlaneState {
            j: -0.65,
            theta: 0.0,
        },
        (0.0, 1.0),
        1e-2,
        1,
        PlaneSystem::Full,
        &p,
    );
    assert!(tr.halted.is_some());
}

#[test]
fn non_resonant_parameters_are_refused() {
    let p = Params::new(0.8, 3.0, 2.0, 1e-3);
    assert!(matches!(p.theta_star(), Err(Error::Domain(_))));
    assert!(leading_fixed_points(&p).is_err());
    assert!(fish_polyline(&p, 10, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn leading_flow_conserves_hamiltonian(p in resonant(), u in 0.1..0.9f64) {
        // start on the θ-axis between the center and the saddle
        let ts = p.theta_star().unwrap();
        let th0 = -ts + u * 2.0 * ts;
        let tr = integrate_plane(PlaneState { j: 0.0, theta: th0 }, (0.0, 5.0), 1e-3, 50, PlaneSystem::Leading, &p);
        let h0 = fish_hamiltonian(0.0, th0, &p);
        for s in &tr.states {
            prop_assert!((fish_hamiltonian(s.j, s.theta, &p) - h0).abs() < 1e-9);
        }
    }

    #[test]
    fn fish_is_a_level_set(p in resonant()) {
        let ts = p.theta_star().unwrap();
        let level = fish_hamiltonian(0.0, ts, &p);
        let head = fish_head(&p).unwrap();
        prop_assert!(head < -ts && head > ts - 2.0 * std::f64::consts::PI);
        prop_assert!((fish_hamiltonian(0.0, head, &p) - level).abs() < 1e-12);
        for (th, u, s) in fish_polyline(&p, 41, 0.0).unwrap() {
            prop_assert!((fish_hamiltonian(u, th, &p) - level).abs() < 1e-12);
            prop_assert!((u + s).abs() < 1e-12);
        }
    }

    #[test]
    fn fish_rhs_is_hamiltonian(p in resonant(), j in -1.0..1.0f64, th in -3.0..3.0f64) {
        // j' = ∂ℋ/∂θ, θ' = −∂ℋ/∂j
        let h = 1e-6;
        let dh_dth = (fish_hamiltonian(j, th + h, &p) - fish_hamiltonian(j, th - h, &p)) / (2.0 * h);
        let dh_dj = (fish_hamiltonian(j + h, th, &p) - fish_hamiltonian(j - h, th, &p)) / (2.0 * h);
        let (dj, dth) = fish_rhs(j, th, &p);
        prop_assert!((dj - dh_dth).abs() < 1e-7);
        prop_assert!((dth + dh_dj).abs() < 1e-7);
    }

    #[test]
    fn eig2_matches_trace_and_determinant(m in prop::array::uniform4(-3.0..3.0f64)) {
        let a = [[m[0], m[1]], [m[2], m[3]]];
        let e = eig2(a);
        prop_assert!(((e[0] + e[1]).re - (m[0] + m[3])).abs() < 1e-12);
        prop_assert!(((e[0] * e[1]).re - (m[0] * m[3] - m[1] * m[2])).abs() < 1e-10);
    }
}
