use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use nls_homoclinic::field::{grid, SpectralField};
use nls_homoclinic::integrable::{
    plane_wave, two_pair_at, two_pair_ratio, two_pair_w, u_fields, v_fields, DarbouxData,
};
use nls_homoclinic::melnikov::*;
use nls_homoclinic::Params;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn one_pair_matches_independent_prototype() {
    // numpy prototype: 16-node panels, T = 40, N = 128
    let m =
        melnikov_one_pair(&Params::new(0.8, 0.0, 0.0, 0.0), &QuadratureSpec::default()).unwrap();
    let want = [-6.69670053, -6.43913512, 8.04891891];
    for (a, b) in m.m.iter().zip(want) {
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
    assert!(rel(m.kappa().unwrap(), 0.8036449214606022) < 1e-8);
    assert!(m.quadrature.refine_window < 1e-8, "{:?}", m.quadrature);
    assert!(m.quadrature.refine_grid < 1e-8, "{:?}", m.quadrature);
}

#[test]
fn kappa_values_at_other_frequencies() {
    let table = kappa_curve(&[0.6, 0.7, 0.9], &QuadratureSpec::default());
    for (r, want) in table.iter().zip([0.9254, 0.8605, 0.7536]) {
        assert!(r.flag.is_none(), "{:?}", r.flag);
        assert!((r.kappa.unwrap() - want).abs() < 1e-4, "{:?}", r.kappa);
    }
}

#[test]
fn one_pair_independent_of_backlund_angle() {
    let q = QuadratureSpec::default();
    let even = melnikov_one_pair(&Params::new(0.75, 0.0, 0.0, 0.0), &q).unwrap();
    for vt in [0.9, 2.4] {
        let d = DarbouxData::new(0.75, 0.0, vt).unwrap();
        let m = melnikov_one_pair_for(&d, &q).unwrap();
        for (a, b) in m.m.iter().zip(even.m) {
            assert!(rel(*a, b) < 1e-10);
        }
    }
}

#[test]
fn one_pair_independent_of_time_shift() {
    let q = QuadratureSpec::default();
    let a =
        melnikov_one_pair_for(&DarbouxData::new(0.7, 0.0, 0.0).unwrap().even(false), &q).unwrap();
    let b =
        melnikov_one_pair_for(&DarbouxData::new(0.7, 3.0, 0.0).unwrap().even(false), &q).unwrap();
    for (x, y) in a.m.iter().zip(b.m) {
        assert!(rel(*x, y) < 1e-9);
    }
}

#[test]
fn kappa_closure_on_grid() {
    let omegas: Vec<f64> = (0..5).map(|i| 0.55 + 0.1 * i as f64).collect();
    for r in kappa_curve(&omegas, &QuadratureSpec::default()) {
        let m = r.m1.unwrap();
        let alpha = r.alpha.unwrap();
        let bc = alpha * phase_ratio(r.omega, r.delta_gamma);
        let m1 = m[0] + alpha * m[1] + bc * m[2];
        assert!(m1.abs() < 1e-8, "ω = {}: M₁ = {m1:e}", r.omega);
        // any β ≥ |β cos γ| works; take γ from it and check d̃
        let beta = 2.0 * bc.abs() + 1.0;
        let gamma = (bc / beta).acos();
        let p = Params::new(r.omega, alpha, beta, 0.0);
        let d = second_distance(entry_phase(gamma, r.delta_gamma), r.delta_gamma, &p);
        assert!(d.abs() < 1e-8, "d̃ = {d:e}");
    }
}

#[test]
fn kappa_stable_under_refinement() {
    let fine = QuadratureSpec {
        t_max_factor: 60.0,
        nodes_per_unit: 96,
        x_grid: 256,
    };
    let omegas = [0.58, 0.77, 0.93];
    let a = kappa_curve(&omegas, &QuadratureSpec::default());
    let b = kappa_curve(&omegas, &fine);
    for (x, y) in a.iter().zip(&b) {
        assert!(rel(x.kappa.unwrap(), y.kappa.unwrap()) < 1e-4);
    }
}

#[test]
fn one_pair_existence_roots() {
    let grid = ExistenceGrid::OnePair {
        omegas: vec![0.6, 0.8, 0.9],
        beta: 3.0,
    };
    for (om, _, r) in existence_surface_report(&grid, &QuadratureSpec::default()) {
        let s = r.unwrap();
        assert!(s.max_residual() < 1e-8, "ω = {om}: {:?}", s.residuals);
        assert!(s.condition < 1e6, "{}", s.condition);
        assert!(s.note.is_none());
        assert!(s.alpha * om < s.beta);
    }
}

#[test]
fn one_pair_no_root_is_reported() {
    let m =
        melnikov_one_pair(&Params::new(0.8, 0.0, 0.0, 0.0), &QuadratureSpec::default()).unwrap();
    assert!(solve_one_pair(&m, 0.1).is_err());
}

#[test]
fn two_pair_matches_independent_prototype() {
    let q = QuadratureSpec::default();
    for (om, dr, chi, beta) in [
        (1.2, 1.0, 0.5092149011698028, 46.990977863993294),
        (1.3, 0.5, 0.4509493225698737, 55.92620490821363),
    ] {
        let m = melnikov_two_pairs(&Params::new(om, 0.0, 0.0, 0.0), dr, &q).unwrap();
        let s = m.surface().unwrap();
        assert!(rel(s.chi_tilde, chi) < 1e-7, "{} vs {chi}", s.chi_tilde);
        assert!(rel(s.beta, beta) < 1e-6, "{} vs {beta}", s.beta);
        assert!(m.quadrature.certified());
    }
}

#[test]
fn two_pair_degenerate_at_zero_shift() {
    let m = melnikov_two_pairs(
        &Params::new(1.2, 0.0, 0.0, 0.0),
        0.0,
        &QuadratureSpec::default(),
    )
    .unwrap();
    assert!(m.m[0][3].abs() < 1e-10 && m.m[1][3].abs() < 1e-10);
    assert!(m.surface().is_err());
}

#[test]
fn two_pair_gauge_invariance() {
    let q = QuadratureSpec::default();
    let a = melnikov_two_pairs_for(&two_pair_data_gauge(1.25, 0.8, 0.0).unwrap(), &q).unwrap();
    let b = melnikov_two_pairs_for(&two_pair_data_gauge(1.25, 0.8, 1.0).unwrap(), &q).unwrap();
    assert!((b.delta_rho - 0.8).abs() < 1e-12);
    let scale = a.m.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    for (x, y) in a.m.iter().flatten().zip(b.m.iter().flatten()) {
        assert!((x - y).abs() < 1e-8 * scale);
    }
    let (sa, sb) = (a.surface().unwrap(), b.surface().unwrap());
    assert!(rel(sa.chi_tilde, sb.chi_tilde) < 1e-8);
}

#[test]
fn two_pair_ratio_free_of_gamma() {
    let d = two_pair_data(1.2, 0.6).unwrap();
    let p = Params::new(1.2, 0.0, 0.0, 0.0).with_wave(1.2, 0.7);
    for (t, x) in [(-0.4, 0.3), (0.1, 2.0), (0.9, 5.5)] {
        let via_q = two_pair_at(t, x, &d, &p).unwrap() / plane_wave(t, &p);
        assert!((via_q - two_pair_ratio(t, x, &d).unwrap()).norm() < 1e-13);
    }
}

/// Second row rebuilt from (u, v) directly, with its own quadrature.
#[test]
fn second_row_from_scratch() {
    let (om, dr) = (1.2, 1.0);
    let d = two_pair_data(om, dr).unwrap();
    let (nu, nuh) = (d.nu, d.nu_hat.unwrap());
    let (nb, th0h) = (nu.conj(), d.theta0_hat.unwrap());
    let n = 128;
    let xs = grid(n);
    let rule = GaussLegendre::new(20).unwrap();
    let (lo, hi) = (
        -(45.0) / 2.0 / d.sigma_hat.unwrap(),
        45.0 / 2.0 / d.sigma_hat.unwrap(),
    );
    let panels = 200;
    let h = (hi - lo) / panels as f64;
    let mut row = [C64::default(); 4];
    for i in 0..panels {
        let a = lo + i as f64 * h;
        for (&z, &w) in rule.nodes().zip(rule.weights()) {
            let t = a + 0.5 * h * (z + 1.0);
            let wt = 0.5 * h * w * 2.0 * PI / n as f64;
            let pvals: Vec<C64> = xs
                .iter()
                .map(|&x| {
                    let tau = d.tau(t);
                    let y = x + d.vartheta - d.theta0 + PI / 2.0;
                    let (s, th) = (1.0 / tau.cosh(), tau.tanh());
                    let s0 = d.theta0.sin();
                    let base = ((2.0 * d.theta0).cos()
                        - C64::i() * (2.0 * d.theta0).sin() * th
                        - s0 * s * y.cos())
                        / (1.0 + s0 * s * y.cos());
                    let (w1, w2) = two_pair_w(t, x, &d).unwrap();
                    base + w2 * th0h.sin() / w1
                })
                .collect();
            let pf = SpectralField::from_values(pvals).unwrap();
            let pxx = pf.derivative(2);
            for (k, &x) in xs.iter().enumerate() {
                let (u1, u2) = u_fields(t, x, &d);
                let (v1, v2) = v_fields(t, x, &d).unwrap();
                let nn = u1.norm_sqr() + u2.norm_sqr();
                let g11 = (nuh - nu) * u1.norm_sqr() + (nuh - nb) * u2.norm_sqr();
                let g22 = (nuh - nb) * u1.norm_sqr() + (nuh - nu) * u2.norm_sqr();
                let g12 = (nb - nu) * u1 * u2.conj();
                let g21 = (nb - nu) * u1.conj() * u2;
                let big = [(g11 * v1 + g12 * v2) / nn, (g21 * v1 + g22 * v2) / nn];
                let vv = big[0].norm_sqr() + big[1].norm_sqr();
                let (a1, a2) = (big[1].conj() / vv, big[0].conj() / vv);
                let (pv, pxv) = (pf.values()[k], pxx.values()[k]);
                row[0] += wt * om * om * (a2 * a2 * pxv - a1 * a1 * pxv.conj());
                row[1] += wt * om * om * (a1 * a1 * pv.conj() - a2 * a2 * pv);
                row[2] += wt * om * (a2 * a2 - a1 * a1);
                row[3] += wt * C64::i() * om * (a2 * a2 + a1 * a1);
            }
        }
    }
    let m = melnikov_two_pairs(
        &Params::new(om, 0.0, 0.0, 0.0),
        dr,
        &QuadratureSpec::default(),
    )
    .unwrap();
    for (a, b) in row.iter().zip(m.m[1]) {
        assert!((a.re - b).abs() < 1e-7 * (1.0 + b.abs()), "{a} vs {b}");
        assert!(a.im.abs() < 1e-9);
    }
}

#[test]
fn two_pair_existence_and_closure() {
    let grid = ExistenceGrid::TwoPair {
        omegas: vec![1.15, 1.3],
        delta_rhos: vec![0.5, 1.5],
    };
    for (om, dr, r) in existence_surface_report(&grid, &QuadratureSpec::default()) {
        let s = r.unwrap();
        assert!(s.max_residual() < 1e-6, "({om}, {dr:?}): {:?}", s.residuals);
        assert!(s.condition < 1e6, "{}", s.condition);
        assert!(s.alpha > 0.0 && s.alpha * om < s.beta, "{s:?}");
    }
}

#[test]
fn surface_table_flags_and_refinement() {
    let coarse = surface_two_pairs(&[1.2, 1.35], &[0.0, 1.0], &QuadratureSpec::default());
    assert_eq!(coarse.len(), 4);
    assert!(coarse[0].flag.is_some() && coarse[2].flag.is_some());
    let fine = QuadratureSpec {
        t_max_factor: 60.0,
        nodes_per_unit: 96,
        x_grid: 256,
    };
    let refined = surface_two_pairs(&[1.2, 1.35], &[1.0], &fine);
    for (a, b) in [(&coarse[1], &refined[0]), (&coarse[3], &refined[1])] {
        assert!(a.flag.is_none(), "{:?}", a.flag);
        assert!(rel(a.chi_tilde.unwrap(), b.chi_tilde.unwrap()) < 1e-3);
        assert!(rel(a.beta_out.unwrap(), b.beta_out.unwrap()) < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn distance_is_hamiltonian_difference(
        om in 0.55f64..1.45, al in 0.0f64..3.0, be in 0.0f64..5.0,
        th0 in -7.0f64..7.0, th1 in -7.0f64..7.0,
    ) {
        let p = Params::new(om, al, be, 0.0);
        let a = second_distance(th0, th1, &p);
        let b = second_distance_hamiltonian(th0, th1, &p);
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn distance_linear_without_forcing(om in 0.55f64..1.45, al in 0.0f64..3.0, th0 in -7.0f64..7.0, th1 in -7.0f64..7.0) {
        let p = Params::new(om, al, 0.0, 0.0);
        prop_assert!((second_distance(th0, th1, &p) - 2.0 * om * al * om * th1).abs() < 1e-12 * (1.0 + th1.abs()));
    }

    #[test]
    fn constraint_zeroes_distance(om in 0.55f64..0.98, al in 0.1f64..3.0, extra in 1.0f64..4.0) {
        let dg = delta_gamma_one(om);
        let bc = al * phase_ratio(om, dg);
        let beta = bc.abs() * extra;
        let gamma = (bc / beta).acos();
        let p = Params::new(om, al, beta, 0.0);
        prop_assert!(second_distance(entry_phase(gamma, dg), dg, &p).abs() < 1e-10);
    }
}
