use nls_homoclinic::field::{sup_diff, SpectralField};
use nls_homoclinic::linearization::*;
use nls_homoclinic::Params;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

/// Right-hand side of q_t for the perturbed equation.
fn pnls_rhs(q: &SpectralField, p: &Params) -> SpectralField {
    let qxx = q.derivative(2);
    let w2 = p.omega * p.omega;
    let v = q
        .values()
        .iter()
        .zip(qxx.values())
        .map(|(&u, &uxx)| {
            -C64::i() * (uxx + 2.0 * (u.norm_sqr() - w2) * u)
                + p.epsilon * (uxx - p.alpha * u + p.beta)
        })
        .collect();
    SpectralField::from_values(v).unwrap()
}

fn zero_mean(amps: &[(f64, f64)]) -> SpectralField {
    let n = 32;
    let mut modes = vec![C64::new(0.0, 0.0); n];
    for (i, &(a, b)) in amps.iter().enumerate() {
        let k = i as i64 / 2 + 1;
        let k = if i % 2 == 0 { k } else { -k };
        modes[k.rem_euclid(n as i64) as usize] = C64::new(a, b);
    }
    SpectralField::from_modes(modes).unwrap()
}

fn small_field() -> impl Strategy<Value = SpectralField> {
    prop::collection::vec((-0.05..0.05f64, -0.05..0.05f64), 1..8).prop_map(|a| zero_mean(&a))
}

fn params() -> impl Strategy<Value = Params> {
    (0.55..1.45f64, 0.2..1.5f64, 0.5..3.0f64, 0.0..0.05f64)
        .prop_filter("degenerate ω", |t| (t.0 - 1.0).abs() > 0.02)
        .prop_map(|(w, a, b, e)| Params::new(w, a, b, e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn resonance_coords_round_trip(p in params(), f in small_field(), r in 0.7..1.3f64, th in -3.0..3.0f64) {
        let q = &SpectralField::constant(32, C64::from_polar(r * p.omega, th)).unwrap() + &f.scale(C64::from_polar(1.0, th));
        let c = to_resonance_coords(&q, &p).unwrap();
        prop_assert!((c.j - (q.mean_abs2() - p.omega * p.omega)).abs() < 1e-14);
        prop_assert!(c.f.mean().norm() < 1e-15);
        let back = from_resonance_coords(&c, &p).unwrap();
        prop_assert!(sup_diff(back.values(), q.values()) < 1e-13);
    }

    #[test]
    fn l_epsilon_is_the_derivative_of_the_flow(p in params(), f in small_field()) {
        let base = SpectralField::constant(32, C64::new(p.omega, 0.0)).unwrap();
        let h = 1e-5;
        let plus = pnls_rhs(&(&base + &(&f * h)), &p);
        let minus = pnls_rhs(&(&base - &(&f * h)), &p);
        let fd = &(&plus - &minus) * (0.5 / h);
        let l = l_epsilon_apply(&f, &p);
        prop_assert!(sup_diff(fd.values(), l.values()) < 1e-8);
    }

    #[test]
    fn coordinate_equations_reproduce_the_flow(p in params(), f in small_field(), jj in -0.05..0.05f64, th in -3.0..3.0f64) {
        let c = ResonanceCoords { j: jj, theta: th, f };
        let rho = c.rho(&p).unwrap();
        let q = from_resonance_coords(&c, &p).unwrap();
        let big_f = pnls_rhs(&q, &p);
        let n = q.grid_size() as f64;

        let i_dot: f64 = q.values().iter().zip(big_f.values()).map(|(u, v)| 2.0 * (u.conj() * v).re).sum::<f64>() / n;
        let rot = C64::from_polar(1.0, -th);
        let th_dot = (big_f.mean() * rot).im / rho;

        let i = jj + p.omega * p.omega;
        let nt = nonlinear_terms(&c, &p).unwrap();
        let want_i = p.epsilon * (-2.0 * p.alpha * i + 2.0 * p.beta * i.sqrt() * th.cos() + nt.r2_j);
        let want_th = -2.0 * jj - p.epsilon * p.beta * th.sin() / i.sqrt() + nt.r2_theta;
        prop_assert!((i_dot - want_i).abs() < 1e-12, "{i_dot} vs {want_i}");
        prop_assert!((th_dot - want_th).abs() < 1e-12, "{th_dot} vs {want_th}");

        let mut fr: Vec<C64> = big_f.scale(rot).modes().to_vec();
        fr[0] = C64::new(0.0, 0.0);
        let f_dot = &SpectralField::from_modes(fr).unwrap() - &c.f.scale(C64::new(0.0, th_dot));
        let lin = &l_epsilon_apply(&c.f, &p) + &v_epsilon_apply(&c, &p);
        let want_f = &lin - &(&nt.n2 + &nt.n3).scale(C64::i());
        prop_assert!(sup_diff(f_dot.values(), want_f.values()) < 1e-12);
    }

    #[test]
    fn split_then_merge(p in params(), f in small_field()) {
        let s = eigen_split(&f, &p).unwrap();
        let back = eigen_merge(&s, &p).unwrap();
        prop_assert!(sup_diff(back.values(), f.values()) < 1e-14);
        for &k in &s.ks {
            prop_assert!((s.h.mode(k) + s.h.mode(-k)).norm() < 1e-14);
        }
    }

    #[test]
    fn split_recovers_eigen_coordinates(p in params(), a in -1.0..1.0f64, b in -1.0..1.0f64) {
        for k in unstable_modes(p.omega).unwrap() {
            let g = &eigenfunction(k, true, p.omega, 32).unwrap() * a;
            let g = &g + &(&eigenfunction(k, false, p.omega, 32).unwrap() * b);
            let s = eigen_split(&g, &p).unwrap();
            let idx = s.ks.iter().position(|&x| x == k).unwrap();
            prop_assert!((s.xi_plus[idx] - a).abs() < 1e-13 && (s.xi_minus[idx] - b).abs() < 1e-13);
            prop_assert!(s.h.sup_norm() < 1e-13);
        }
    }

    #[test]
    fn projected_coupling_matches_split_of_v(p in params(), a in -1.0..1.0f64, b in -1.0..1.0f64, jj in -0.1..0.1f64, th in -3.0..3.0f64) {
        for k in unstable_modes(p.omega).unwrap() {
            let f = &(&eigenfunction(k, true, p.omega, 32).unwrap() * a) + &(&eigenfunction(k, false, p.omega, 32).unwrap() * b);
            let c = ResonanceCoords { j: jj, theta: th, f };
            let s = eigen_split(&v_epsilon_apply(&c, &p), &p).unwrap();
            let idx = s.ks.iter().position(|&x| x == k).unwrap();
            let (vp, vm) = projected_coupling(k, (a, b), jj, th, &p);
            prop_assert!((s.xi_plus[idx] - vp).abs() < 1e-12, "{} vs {vp}", s.xi_plus[idx]);
            prop_assert!((s.xi_minus[idx] - vm).abs() < 1e-12);
        }
    }
}

#[test]
fn mode_blocks_have_the_listed_eigenvalues() {
    for p in [
        Params::new(0.8, 1.0, 2.0, 1e-2),
        Params::new(1.3, 0.4, 2.0, 0.0),
    ] {
        let spec = spectrum_l_epsilon(&p, 8).unwrap();
        for s in &spec {
            let m = mode_matrix(s.k, &p);
            let half = 0.5 * (m[0][0] + m[1][1]);
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let root = (half * half - det).sqrt();
            let (e1, e2) = (half + root, half - root);
            let d = ((e1 - s.mu_plus).norm().max((e2 - s.mu_minus).norm()))
                .min((e1 - s.mu_minus).norm().max((e2 - s.mu_plus).norm()));
            assert!(d < 1e-12, "k = {}: {d}", s.k);
            assert_eq!(s.real_pair, ((s.k * s.k) as f64) < 4.0 * p.omega * p.omega);
        }
    }
}

#[test]
fn unstable_eigenfunctions() {
    for w in [0.8, 1.2] {
        let p = Params::new(w, 1.0, 2.0, 1e-2);
        let spec = spectrum_l_epsilon(&p, 4).unwrap();
        for k in unstable_modes(w).unwrap() {
            assert!(spec[(k - 1) as usize].mu_plus.re > 0.0);
            for (plus, mu) in [
                (true, spec[(k - 1) as usize].mu_plus),
                (false, spec[(k - 1) as usize].mu_minus),
            ] {
                let e = eigenfunction(k, plus, w, 32).unwrap();
                let le = l_epsilon_apply(&e, &p);
                assert!(sup_diff(le.values(), e.scale(mu).values()) < 1e-12);
            }
        }
    }
    assert_eq!(unstable_modes(0.8).unwrap(), vec![1]);
    assert_eq!(unstable_modes(1.2).unwrap(), vec![1, 2]);
    assert!(unstable_modes(1.5).is_err());
}

#[test]
fn nonlinear_terms_vanish_on_the_plane() {
    let p = Params::new(0.8, 1.0, 2.0, 1e-2);
    let c = ResonanceCoords {
        j: 0.03,
        theta: 0.4,
        f: SpectralField::zeros(16).unwrap(),
    };
    let nt = nonlinear_terms(&c, &p).unwrap();
    assert_eq!(nt.r2_j, 0.0);
    assert!(nt.r2_theta.abs() < 1e-16);
    assert!(nt.n2.sup_norm() < 1e-16 && nt.n3.sup_norm() < 1e-16);
}
