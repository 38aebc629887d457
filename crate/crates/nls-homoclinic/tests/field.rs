use std::f64::consts::PI;

use nls_homoclinic::field::{grid, index_of, wavenumber, SpectralField};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn naive_dft(v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let k = wavenumber(i, n) as f64;
            v.iter()
                .enumerate()
                .map(|(m, x)| x * C64::from_polar(1.0, -k * 2.0 * PI * m as f64 / n as f64))
                .sum::<C64>()
                / n as f64
        })
        .collect()
}

fn values(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
}

fn sized() -> impl Strategy<Value = Vec<C64>> {
    prop_oneof![values(8), values(16), values(32)]
}

/// Trigonometric polynomial with |k| < `band`.
fn trig(band: i64) -> impl Strategy<Value = Vec<(i64, C64)>> {
    prop::collection::vec((-band + 1..band, -1.0..1.0f64, -1.0..1.0f64), 1..6)
        .prop_map(|v| v.into_iter().map(|(k, a, b)| (k, C64::new(a, b))).collect())
}

fn eval(terms: &[(i64, C64)], x: f64) -> C64 {
    terms
        .iter()
        .map(|(k, c)| c * C64::from_polar(1.0, *k as f64 * x))
        .sum()
}

proptest! {
    #[test]
    fn modes_match_direct_sum(v in sized()) {
        let f = SpectralField::from_values(v.clone()).unwrap();
        let d = naive_dft(&v);
        for (a, b) in f.modes().iter().zip(&d) {
            prop_assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn parseval(v in sized()) {
        let f = SpectralField::from_values(v).unwrap();
        let s: f64 = f.modes().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((s - f.mean_abs2()).abs() < 1e-13);
        prop_assert!((f.sobolev_norm(0) - s.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn modes_to_values_round_trip(v in sized()) {
        let f = SpectralField::from_values(v.clone()).unwrap();
        let g = SpectralField::from_modes(f.modes().to_vec()).unwrap();
        for (a, b) in g.values().iter().zip(&v) {
            prop_assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_trig_polynomial(t in trig(8), order in 1u32..4) {
        let f = SpectralField::from_fn(32, |x| eval(&t, x)).unwrap();
        let d = f.derivative(order);
        for (x, v) in grid(32).iter().zip(d.values()) {
            let exact: C64 = t.iter().map(|(k, c)| c * C64::new(0.0, *k as f64).powu(order) * C64::from_polar(1.0, *k as f64 * x)).sum();
            prop_assert!((v - exact).norm() < 1e-10 * 8f64.powi(order as i32));
        }
    }

    #[test]
    fn resampling_interpolates_band_limited_data(t in trig(8), up in 0usize..3) {
        let m = 16 << up;
        let f = SpectralField::from_fn(16, |x| eval(&t, x)).unwrap();
        let g = f.resample(m).unwrap();
        for (x, v) in grid(m).iter().zip(g.values()) {
            prop_assert!((v - eval(&t, *x)).norm() < 1e-12);
        }
        let back = g.resample(16).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn product_convolves_modes(a in trig(4), b in trig(4)) {
        let fa = SpectralField::from_fn(32, |x| eval(&a, x)).unwrap();
        let fb = SpectralField::from_fn(32, |x| eval(&b, x)).unwrap();
        let p = fa.product(&fb);
        for k in -8..8i64 {
            let direct: C64 = a.iter().flat_map(|(ka, ca)| b.iter().filter(move |(kb, _)| ka + kb == k).map(move |(_, cb)| ca * cb)).sum();
            prop_assert!((p.mode(k) - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn conj_reflects_modes(v in sized()) {
        let f = SpectralField::from_values(v).unwrap();
        let n = f.grid_size() as i64;
        let g = f.conj();
        for k in -n / 2 + 1..n / 2 {
            prop_assert!((g.mode(k) - f.mode(-k).conj()).norm() < 1e-14);
        }
    }
}

#[test]
fn sobolev_norm_of_single_mode() {
    for k in [-5i64, 0, 3, 7] {
        let f = SpectralField::from_fn(32, |x| C64::from_polar(1.0, k as f64 * x)).unwrap();
        for s in 0..4 {
            let exact = (1.0 + (k * k) as f64).powf(s as f64 / 2.0);
            assert!((f.sobolev_norm(s) - exact).abs() < 1e-12 * exact);
        }
    }
}

#[test]
fn tail_fraction_extremes() {
    let low = SpectralField::from_fn(64, |x| C64::new(x.cos(), 0.0)).unwrap();
    assert!(low.tail_fraction(1.0 / 3.0) < 1e-15);
    let high = SpectralField::from_fn(64, |x| C64::from_polar(1.0, 30.0 * x)).unwrap();
    assert!((high.tail_fraction(1.0 / 3.0) - 1.0).abs() < 1e-14);
}

#[test]
fn mode_lookup_and_band() {
    let n = 16;
    for i in 0..n {
        assert_eq!(index_of(wavenumber(i, n), n), i);
    }
    let f = SpectralField::from_fn(n, |x| C64::from_polar(2.0, 3.0 * x)).unwrap();
    assert!((f.mode(3) - 2.0).norm() < 1e-14);
    assert_eq!(f.mode(8), C64::new(0.0, 0.0));
    assert!((f.mean()).norm() < 1e-15);
}

#[test]
fn non_power_of_two_is_rejected() {
    assert!(SpectralField::zeros(12).is_err());
    assert!(SpectralField::from_values(vec![C64::new(1.0, 0.0); 24]).is_err());
    assert!(SpectralField::zeros(16).unwrap().resample(20).is_err());
}
