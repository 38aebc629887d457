use std::f64::consts::PI;

use nls_homoclinic::field::{grid, sup_diff};
use nls_homoclinic::integrable::*;
use nls_homoclinic::{Params, SpectralField};
use num_complex::Complex64 as C64;

fn wave(a: f64, gamma: f64) -> Params {
    Params::new(a, 1.0, 2.0, 0.0).with_wave(a, gamma)
}

fn plane_field(n: usize, p: &Params) -> SpectralField {
    SpectralField::constant(n, plane_wave(0.0, p)).unwrap()
}

fn lambda_grid() -> Vec<C64> {
    let mut v: Vec<C64> = (0..50)
        .map(|j| C64::new(0.0, 1.2 * j as f64 / 49.0))
        .collect();
    v.extend((0..50).map(|j| C64::new(-1.0 + 2.0 * j as f64 / 49.0, 0.0)));
    v
}

#[test]
fn plane_wave_discriminant_matches_closed_form() {
    for a in [0.8, 1.2] {
        let p = wave(a, 0.3);
        let q = plane_field(64, &p);
        for l in lambda_grid() {
            let m = zs_transfer(&q, l).unwrap();
            assert!(
                (m.trace() - plane_wave_discriminant(a, l)).norm() < 1e-8,
                "a={a} λ={l}"
            );
            assert!((m.det() - 1.0).norm() < 1e-10);
        }
    }
}

#[test]
fn discriminant_is_real_on_real_axis_for_plane_wave() {
    let p = wave(0.8, 0.3);
    let q = plane_field(32, &p);
    for l in [0.2, 0.7] {
        let d1 = floquet_discriminant(&q, C64::new(l, 0.1)).unwrap();
        let d2 = floquet_discriminant(&q, C64::new(l, -0.1)).unwrap();
        assert!((d1 - d2.conj()).norm() < 1e-9);
    }
}

#[test]
fn critical_points_at_double_points() {
    let region = SearchRegion::ImaginaryAxis {
        y_min: 0.05,
        y_max: 1.2,
        samples: 60,
    };
    let p = wave(0.8, 0.3);
    let found = critical_points(&plane_field(32, &p), &region).unwrap();
    let sigma = (0.64f64 - 0.25).sqrt();
    assert!(found
        .iter()
        .any(|c| c.converged && (c.lambda - C64::new(0.0, sigma)).norm() < 1e-8));
    let p = wave(1.2, 0.3);
    let found = critical_points(&plane_field(32, &p), &region).unwrap();
    for s in [(1.44f64 - 0.25).sqrt(), (1.44f64 - 1.0).sqrt()] {
        assert!(
            found
                .iter()
                .any(|c| c.converged && (c.lambda - C64::new(0.0, s)).norm() < 1e-8),
            "{s}: {found:?}"
        );
    }
}

#[test]
fn critical_point_moves_little_under_small_perturbation() {
    let p = wave(0.8, 0.3);
    let sigma = (0.64f64 - 0.25).sqrt();
    let seeds = SearchRegion::Seeds(vec![C64::new(0.0, sigma + 0.01)]);
    let q = SpectralField::from_fn(32, |x| plane_wave(0.0, &p) + 1e-6 * x.cos()).unwrap();
    let c = &critical_points(&q, &seeds).unwrap()[0];
    assert!(c.converged);
    assert!((c.lambda - C64::new(0.0, sigma)).norm() < 1e-3);
}

#[test]
fn one_pair_asymptotic_phase() {
    let p = wave(0.8, 0.3);
    let d = DarbouxData::new(0.8, 0.4, 1.1).unwrap();
    for future in [true, false] {
        let tau = if future { 40.0 } else { -40.0 };
        let t = (tau + d.rho) / (2.0 * d.sigma);
        let q = homoclinic_one_pair(t, 64, &d, &p).unwrap();
        let lim = plane_wave(t, &p) * asymptotic_phase(&d, 1, future);
        assert!(q.values().iter().all(|v| (v - lim).norm() < 1e-12));
    }
}

#[test]
fn two_pair_asymptotic_phase() {
    let p = wave(1.2, 0.3);
    let d = DarbouxData::new(1.2, 0.4, 1.1)
        .unwrap()
        .with_second(-0.7, 0.5)
        .unwrap();
    for future in [true, false] {
        let s = if future { 1.0 } else { -1.0 };
        // both |τ| and |τ̂| at least 40
        let t = s
            * ((40.0 + d.rho.abs()) / (2.0 * d.sigma))
                .max((40.0 + d.rho_hat.abs()) / (4.0 * d.sigma_hat.unwrap()));
        let q = homoclinic_two_pair(t, 64, &d, &p).unwrap();
        let lim = plane_wave(t, &p) * asymptotic_phase(&d, 2, future);
        assert!(q.values().iter().all(|v| (v - lim).norm() < 1e-10));
    }
}

fn nls_residual(f: impl Fn(f64) -> SpectralField, t: f64, omega: f64) -> f64 {
    let h = 1e-4;
    let d = |h: f64| {
        let a = f(t + h);
        let b = f(t - h);
        &(&a - &b) * (0.5 / h)
    };
    let (d1, d2) = (d(h), d(h / 2.0));
    let qt = &(&d2 * (4.0 / 3.0)) - &(&d1 * (1.0 / 3.0));
    let q = f(t);
    let qxx = q.derivative(2);
    let i = C64::new(0.0, 1.0);
    q.values()
        .iter()
        .zip(qt.values())
        .zip(qxx.values())
        .map(|((&v, &vt), &vxx)| (i * vt - vxx - 2.0 * (v.norm_sqr() - omega * omega) * v).norm())
        .fold(0.0, f64::max)
}

#[test]
fn homoclinic_orbits_solve_nls() {
    let p = Params {
        omega: 0.75,
        ..wave(0.8, 0.3)
    };
    let d = DarbouxData::new(0.8, 0.4, 1.1).unwrap();
    for t in [-1.0, 0.0, 0.7] {
        let r = nls_residual(|s| homoclinic_one_pair(s, 64, &d, &p).unwrap(), t, p.omega);
        assert!(r < 1e-6, "one pair t={t}: {r}");
    }
    let p = wave(1.2, 0.3);
    let d = DarbouxData::new(1.2, 0.4, 1.1)
        .unwrap()
        .with_second(-0.7, 0.5)
        .unwrap();
    for t in [-1.0, 0.0, 0.7] {
        let r = nls_residual(|s| homoclinic_two_pair(s, 64, &d, &p).unwrap(), t, p.omega);
        assert!(r < 1e-5, "two pair t={t}: {r}");
    }
}

#[test]
fn even_restrictions_give_even_orbits() {
    let p = wave(0.8, 0.3);
    let n = 64;
    let reflect =
        |f: &SpectralField| -> Vec<C64> { (0..n).map(|m| f.values()[(n - m) % n]).collect() };
    for flip in [false, true] {
        let d = DarbouxData::new(0.8, 0.4, 0.0).unwrap().even(flip);
        let q = homoclinic_one_pair(0.3, n, &d, &p).unwrap();
        assert!(sup_diff(q.values(), &reflect(&q)) < 1e-12);
    }
    let p = wave(1.2, 0.3);
    for (f1, f2) in [(false, false), (false, true), (true, false), (true, true)] {
        let d = DarbouxData::new(1.2, 0.4, 0.0)
            .unwrap()
            .even(f1)
            .with_second(-0.7, 0.0)
            .unwrap()
            .even_hat(f2)
            .unwrap();
        let q = homoclinic_two_pair(0.3, n, &d, &p).unwrap();
        assert!(sup_diff(q.values(), &reflect(&q)) < 1e-12);
    }
}

#[test]
fn transform_amplitude_bound() {
    let p = wave(0.8, 0.3);
    let d = DarbouxData::new(0.8, 0.4, 1.1).unwrap();
    for t in [-3.0, 0.0, 2.0] {
        let q = one_pair_via_transform(t, 64, &d, &p).unwrap();
        assert!(q.sup_norm() <= 0.8 + 2.0 * d.sigma + 1e-12);
    }
}

#[test]
fn bd_transform_matches_closed_form_on_fine_grid() {
    let p = wave(0.8, 0.3);
    let d = DarbouxData::new(0.8, 0.4, 1.1).unwrap();
    for j in 0..20 {
        let tau = -5.0 + 10.0 * j as f64 / 19.0;
        let t = (tau + d.rho) / (2.0 * d.sigma);
        let a = one_pair_via_transform(t, 256, &d, &p).unwrap();
        let b = homoclinic_one_pair(t, 256, &d, &p).unwrap();
        assert!(sup_diff(a.values(), b.values()) < 1e-10);
    }
}

#[test]
fn generic_gradient_matches_finite_differences() {
    let p = wave(0.8, 0.3);
    let d = DarbouxData::new(0.8, 0.4, 1.1).unwrap();
    let n = 64;
    let q = homoclinic_one_pair(0.2, n, &d, &p).unwrap();
    let g = melnikov_vector_generic(&q, d.nu).unwrap();
    let h = 1e-6;
    let w = 2.0 * PI / n as f64;
    let scale = g.sup_norm();
    for m in [0usize, 7, 20, 41] {
        for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            let bump = |s: f64| {
                let mut v = q.values().to_vec();
                v[m] += s * h * dir;
                SpectralField::from_values(v).unwrap()
            };
            let fd = (zs_transfer(&bump(1.0), d.nu).unwrap().trace()
                - zs_transfer(&bump(-1.0), d.nu).unwrap().trace())
                / (2.0 * h);
            let an = w * (g.dq[m] * dir + g.dqbar[m] * dir.conj());
            assert!((fd - an).norm() < 1e-4 * w * scale, "m={m}: {fd} vs {an}");
        }
    }
}

#[test]
fn discriminant_constant_along_nls_flow() {
    let p = wave(0.8, 0.3);
    let d = DarbouxData::new(0.8, 0.4, 1.1).unwrap();
    let q = homoclinic_one_pair(-0.4, 128, &d, &p).unwrap();
    let qxx = q.derivative(2);
    let qdot: Vec<C64> = q
        .values()
        .iter()
        .zip(qxx.values())
        .map(|(&v, &vxx)| {
            -C64::new(0.0, 1.0) * (vxx + 2.0 * (v.norm_sqr() - p.omega * p.omega) * v)
        })
        .collect();
    for lam in [d.nu, C64::new(0.3, 0.2)] {
        let g = melnikov_vector_generic(&q, lam).unwrap();
        assert!(g.pair(&qdot).norm() < 1e-8);
    }
}

#[test]
fn plane_wave_gradient_from_bloch_functions() {
    // at λ = 0 the Bloch functions give δΔ/δq = i√(Δ²−4)/W (ψ₂⁺ψ₂⁻, −ψ₁⁺ψ₁⁻) with √(Δ²−4) = ζ⁺ − ζ⁻
    let a = 0.8;
    let p = wave(a, 0.3);
    let n = 32;
    let q = plane_field(n, &p);
    let lam = C64::new(0.0, 0.0);
    let g = melnikov_vector_generic(&q, lam).unwrap();
    let k = a;
    let zp = C64::from_polar(1.0, 2.0 * PI * k);
    let root = zp - zp.conj();
    for (m, x) in grid(n).into_iter().enumerate() {
        let pp = bloch(0.0, x, lam, true, &p);
        let pm = bloch(0.0, x, lam, false, &p);
        let w = pp[0] * pm[1] - pp[1] * pm[0];
        let expect = C64::new(0.0, 1.0) * root / w;
        assert!((g.dq[m] - expect * pp[1] * pm[1]).norm() < 1e-8);
        assert!((g.dqbar[m] + expect * pp[0] * pm[0]).norm() < 1e-8);
    }
}

fn relative_sup(a: &MelnikovVector, b: &MelnikovVector) -> f64 {
    let scale = b.sup_norm();
    a.dq.iter()
        .zip(&b.dq)
        .chain(a.dqbar.iter().zip(&b.dqbar))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

#[test]
fn explicit_one_pair_vector_matches_generic() {
    let p = wave(0.8, 0.3);
    let d = DarbouxData::new(0.8, 0.4, 1.1).unwrap();
    for t in [-0.5, 0.3] {
        let q = homoclinic_one_pair(t, 128, &d, &p).unwrap();
        let g = melnikov_vector_generic(&q, d.nu).unwrap();
        let e = melnikov_vector_explicit(t, 128, &d, &p, VectorKind::OnePair).unwrap();
        assert!(relative_sup(&e, &g) < 1e-6, "{}", relative_sup(&e, &g));
    }
}

#[test]
fn explicit_two_pair_vectors_match_generic() {
    let p = wave(1.2, 0.3);
    let d = DarbouxData::new(1.2, 0.4, 1.1)
        .unwrap()
        .with_second(-0.7, 0.5)
        .unwrap();
    let t = 0.3;
    let q = homoclinic_two_pair(t, 128, &d, &p).unwrap();
    for (lam, kind) in [
        (d.nu, VectorKind::TwoPairNu),
        (d.nu_hat.unwrap(), VectorKind::TwoPairNuHat),
    ] {
        let g = melnikov_vector_generic(&q, lam).unwrap();
        let e = melnikov_vector_explicit(t, 128, &d, &p, kind).unwrap();
        assert!(
            relative_sup(&e, &g) < 1e-6,
            "{kind:?}: {}",
            relative_sup(&e, &g)
        );
    }
}

#[test]
fn s_fields_independent_of_plane_wave_phase() {
    let d = DarbouxData::new(1.2, 0.4, 1.1)
        .unwrap()
        .with_second(-0.7, 0.5)
        .unwrap();
    let pre = ExplicitPrefactors::new(&d);
    for x in [0.0, 2.0, 5.0] {
        let p0 = wave(1.2, 0.3);
        let p1 = wave(1.2, 1.3);
        let a = explicit_vector_at(0.2, x, &d, &p0, VectorKind::TwoPairNu, &pre).unwrap();
        let b = explicit_vector_at(0.2, x, &d, &p1, VectorKind::TwoPairNu, &pre).unwrap();
        // only the q_c factors carry γ
        let r = C64::from_polar(1.0, 1.0);
        assert!((a[0] - b[0] * r.conj()).norm() < 1e-12);
        assert!((a[1] - b[1] * r).norm() < 1e-12);
    }
}
