//! Periodic complex fields on [0, 2π) and their Fourier coefficients.
//!
//! Convention: `q(x) = Σ q̂(k) e^{ikx}` with `k ∈ {−N/2, …, N/2−1}`, so the
//! spatial mean is exactly `q̂(0)`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place forward transform, normalised so the output holds `q̂(k)`.
pub fn forward_in_place(buf: &mut [C64]) {
    let n = buf.len();
    plan(n, false).process(buf);
    let s = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= s;
    }
}

/// In-place inverse transform: Fourier coefficients back to grid values.
pub fn inverse_in_place(buf: &mut [C64]) {
    plan(buf.len(), true).process(buf);
}

/// Uniform grid `x_m = 2πm/N`.
pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|m| 2.0 * PI * m as f64 / n as f64).collect()
}

/// Wavenumber stored at FFT index `i`.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT index of wavenumber `k` (taken modulo N).
#[inline]
pub fn index_of(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "grid size {n} is not a power of two"
        )));
    }
    Ok(())
}

/// Grid samples together with their Fourier coefficients (FFT ordering).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    values: Vec<C64>,
    modes: Vec<C64>,
}

impl SpectralField {
    pub fn from_values(values: Vec<C64>) -> Result<Self> {
        check_size(values.len())?;
        let mut modes = values.clone();
        forward_in_place(&mut modes);
        Ok(SpectralField { values, modes })
    }

    pub fn from_modes(modes: Vec<C64>) -> Result<Self> {
        check_size(modes.len())?;
        let mut values = modes.clone();
        inverse_in_place(&mut values);
        Ok(SpectralField { values, modes })
    }

    /// Samples `f(x_m)` on the N-point grid.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        check_size(n)?;
        Self::from_values(grid(n).into_iter().map(f).collect())
    }

    pub fn constant(n: usize, c: C64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::constant(n, C64::new(0.0, 0.0))
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn modes(&self) -> &[C64] {
        &self.modes
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// `q̂(k)`, zero outside the resolved band.
    pub fn mode(&self, k: i64) -> C64 {
        let n = self.grid_size() as i64;
        if k < -n / 2 || k >= n / 2 {
            return C64::new(0.0, 0.0);
        }
        self.modes[index_of(k, self.grid_size())]
    }

    /// Spatial mean `⟨q⟩ = q̂(0)`.
    pub fn mean(&self) -> C64 {
        self.modes[0]
    }

    /// `(Σ (1+k²)^n |q̂(k)|²)^{1/2}`.
    pub fn sobolev_norm(&self, n: u32) -> f64 {
        let len = self.grid_size();
        self.modes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = wavenumber(i, len) as f64;
                (1.0 + k * k).powi(n as i32) * c.norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Grid mean of `|q|²`, i.e. `⟨|q|²⟩`.
    pub fn mean_abs2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.grid_size() as f64
    }

    /// Spectral derivative `∂_x^order`; the unpaired Nyquist mode is dropped for odd orders.
    pub fn derivative(&self, order: u32) -> SpectralField {
        let n = self.grid_size();
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = wavenumber(i, n);
                if order % 2 == 1 && k == -(n as i64) / 2 {
                    return C64::new(0.0, 0.0);
                }
                c * C64::new(0.0, k as f64).powu(order)
            })
            .collect();
        SpectralField::from_modes(modes).expect("size already checked")
    }

    /// Band-limited resampling onto `m` points (zero padding or truncation).
    pub fn resample(&self, m: usize) -> Result<SpectralField> {
        check_size(m)?;
        let n = self.grid_size();
        let mut out = vec![C64::new(0.0, 0.0); m];
        let half = (n.min(m) / 2) as i64;
        for i in 0..n {
            let k = wavenumber(i, n);
            if k > -half && k < half {
                out[index_of(k, m)] += self.modes[i];
            } else if k == -half {
                if m > n {
                    // split the Nyquist coefficient symmetrically
                    out[index_of(-half, m)] += self.modes[i] * 0.5;
                    out[index_of(half, m)] += self.modes[i] * 0.5;
                } else {
                    out[index_of(-half, m)] += self.modes[i];
                }
            }
        }
        SpectralField::from_modes(out)
    }

    /// Fraction of the L² energy carried by the top `frac` of the band.
    pub fn tail_fraction(&self, frac: f64) -> f64 {
        let n = self.grid_size();
        let cut = ((n as f64 / 2.0) * (1.0 - frac)).floor() as i64;
        let (mut tail, mut total) = (0.0, 0.0);
        for (i, c) in self.modes.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            if wavenumber(i, n).abs() > cut {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (tail / total).sqrt()
        }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> SpectralField {
        SpectralField::from_values(self.values.iter().map(|&v| f(v)).collect())
            .expect("size already checked")
    }

    pub fn conj(&self) -> SpectralField {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, s: C64) -> SpectralField {
        self.map(|v| v * s)
    }

    /// Pointwise product.
    pub fn product(&self, other: &SpectralField) -> SpectralField {
        SpectralField::from_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
        .expect("size already checked")
    }

    /// CSV with columns `x, re, im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,re,im\n");
        for (x, v) in grid(self.grid_size()).iter().zip(&self.values) {
            s.push_str(&format!("{x:.17e},{:.17e},{:.17e}\n", v.re, v.im));
        }
        s
    }

    /// JSON list of `{k, re, im}` in increasing k.
    pub fn modes_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Mode {
            k: i64,
            re: f64,
            im: f64,
        }
        let n = self.grid_size() as i64;
        let list: Vec<Mode> = (-n / 2..n / 2)
            .map(|k| {
                let c = self.mode(k);
                Mode {
                    k,
                    re: c.re,
                    im: c.im,
                }
            })
            .collect();
        serde_json::to_value(list).expect("plain data")
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let modes = self
            .modes
            .iter()
            .zip(&rhs.modes)
            .map(|(a, b)| a + b)
            .collect();
        SpectralField::from_modes(modes).expect("size already checked")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let modes = self
            .modes
            .iter()
            .zip(&rhs.modes)
            .map(|(a, b)| a - b)
            .collect();
        SpectralField::from_modes(modes).expect("size already checked")
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(C64::new(rhs, 0.0))
    }
}

/// Recomputes the modes from the samples.
pub fn fft_forward(field: &SpectralField) -> Result<SpectralField> {
    SpectralField::from_values(field.values().to_vec())
}

pub fn sobolev_norm(field: &SpectralField, n: u32) -> f64 {
    field.sobolev_norm(n)
}

pub fn spatial_mean(field: &SpectralField) -> C64 {
    field.mean()
}

/// Sup-norm distance between two sample vectors.
pub fn sup_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn constant_field_has_only_mean() {
        let f = SpectralField::constant(16, c(1.5, -0.5)).unwrap();
        assert!((f.mode(0) - c(1.5, -0.5)).norm() < 1e-15);
        for k in 1..8 {
            assert!(f.mode(k).norm() < 1e-15);
            assert!(f.mode(-k).norm() < 1e-15);
        }
    }

    #[test]
    fn cosine_splits_into_two_modes() {
        let f = SpectralField::from_fn(32, |x| c(x.cos(), 0.0)).unwrap();
        assert!((f.mode(1) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((f.mode(-1) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((f.sobolev_norm(1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert!(matches!(
            SpectralField::from_values(vec![c(0.0, 0.0); 12]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn mean_of_exponential_vanishes() {
        let f = SpectralField::from_fn(16, |x| C64::from_polar(1.0, x)).unwrap();
        assert!(f.mean().norm() < 1e-15);
    }

    #[test]
    fn second_derivative_of_cos2x() {
        let f = SpectralField::from_fn(32, |x| c((2.0 * x).cos(), 0.0)).unwrap();
        let d = f.derivative(2);
        for (x, v) in grid(32).iter().zip(d.values()) {
            assert!((v - c(-4.0 * (2.0 * x).cos(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn resample_is_exact_for_band_limited() {
        let f = SpectralField::from_fn(16, |x| c(x.sin(), (3.0 * x).cos())).unwrap();
        let g = f.resample(64).unwrap();
        for (x, v) in grid(64).iter().zip(g.values()) {
            assert!((v - c(x.sin(), (3.0 * x).cos())).norm() < 1e-13);
        }
        let back = g.resample(16).unwrap();
        assert!(sup_diff(back.values(), f.values()) < 1e-13);
    }
}
