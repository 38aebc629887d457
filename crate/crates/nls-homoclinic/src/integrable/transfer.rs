//! Zakharov-Shabat transfer matrices `ψ_x = i[[λ, q], [q̄, −λ]]ψ` over one period.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpectralField;

pub type Mat2 = [[C64; 2]; 2];

pub fn identity() -> Mat2 {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    [[o, z], [z, o]]
}

pub fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn det(a: &Mat2) -> C64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn inverse(a: &Mat2) -> Mat2 {
    let d = det(a);
    [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
}

fn max_entry_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

fn max_entry(a: &Mat2) -> f64 {
    a.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransferMatrix {
    pub entries: Mat2,
    /// Step-halving disagreement relative to `1 + max|M_ij|`.
    pub halving_error: f64,
}

impl TransferMatrix {
    pub fn trace(&self) -> C64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn det(&self) -> C64 {
        det(&self.entries)
    }
}

/// RK4 steps across `[0, 2π]` used for an N-point field.
pub fn step_count(n: usize) -> usize {
    (8 * n).max(2048)
}

/// Tolerance for the step-halving check.
pub const HALVING_TOL: f64 = 1e-8;

fn generator(lambda: C64, q: C64) -> Mat2 {
    let i = C64::new(0.0, 1.0);
    [[i * lambda, i * q], [i * q.conj(), -i * lambda]]
}

fn axpy(a: &Mat2, s: C64, b: &Mat2) -> Mat2 {
    let mut c = *a;
    for r in 0..2 {
        for k in 0..2 {
            c[r][k] += s * b[r][k];
        }
    }
    c
}

/// Integrates over samples `qf` (2S points covering one period) with `S / stride` steps,
/// recording `M` every `record` steps.
fn integrate(qf: &[C64], lambda: C64, stride: usize, record: usize) -> Vec<Mat2> {
    let len = qf.len();
    let steps = len / (2 * stride);
    let h = 2.0 * PI / steps as f64;
    let mut m = identity();
    let mut out = vec![m];
    for j in 0..steps {
        let i0 = 2 * stride * j;
        let u0 = generator(lambda, qf[i0]);
        let um = generator(lambda, qf[i0 + stride]);
        let u1 = generator(lambda, qf[(i0 + 2 * stride) % len]);
        let hc = C64::new(h, 0.0);
        let k1 = matmul(&u0, &m);
        let k2 = matmul(&um, &axpy(&m, hc * 0.5, &k1));
        let k3 = matmul(&um, &axpy(&m, hc * 0.5, &k2));
        let k4 = matmul(&u1, &axpy(&m, hc, &k3));
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] += hc / 6.0 * (k1[r][c] + 2.0 * k2[r][c] + 2.0 * k3[r][c] + k4[r][c]);
            }
        }
        if (j + 1) % record == 0 {
            out.push(m);
        }
    }
    out
}

fn fine_samples(q: &SpectralField) -> Result<Vec<C64>> {
    Ok(q.resample(2 * step_count(q.grid_size()))?.into_values())
}

/// `M(2π)` with an accuracy check against a run at twice the step.
pub fn zs_transfer(q: &SpectralField, lambda: C64) -> Result<TransferMatrix> {
    let qf = fine_samples(q)?;
    let steps = step_count(q.grid_size());
    let fine = *integrate(&qf, lambda, 1, steps).last().expect("non-empty");
    let coarse = *integrate(&qf, lambda, 2, steps / 2)
        .last()
        .expect("non-empty");
    let err = max_entry_diff(&fine, &coarse) / (1.0 + max_entry(&fine));
    if !err.is_finite() || err > HALVING_TOL {
        return Err(Error::Accuracy(format!(
            "transfer matrix at λ = {lambda}: step-halving disagreement {err:.3e}"
        )));
    }
    Ok(TransferMatrix {
        entries: fine,
        halving_error: err,
    })
}

/// `M(2π)` without the halving check; used inside derivative stencils.
pub fn zs_transfer_unchecked(q: &SpectralField, lambda: C64) -> Result<Mat2> {
    let qf = fine_samples(q)?;
    let steps = step_count(q.grid_size());
    Ok(*integrate(&qf, lambda, 1, steps).last().expect("non-empty"))
}

/// `M(x_m)` at every grid point, `m = 0..=N`.
pub fn zs_path(q: &SpectralField, lambda: C64) -> Result<Vec<Mat2>> {
    let n = q.grid_size();
    let qf = fine_samples(q)?;
    let steps = step_count(n);
    Ok(integrate(&qf, lambda, 1, steps / n))
}

pub fn floquet_discriminant(q: &SpectralField, lambda: C64) -> Result<C64> {
    Ok(zs_transfer(q, lambda)?.trace())
}

/// `2cos(2π√(a²+λ²))`; even in the root so the branch is immaterial.
pub fn plane_wave_discriminant(a: f64, lambda: C64) -> C64 {
    2.0 * (2.0 * PI * (a * a + lambda * lambda).sqrt()).cos()
}

/// Second derivative by a 5-point stencil at `h` and `h/2`, Richardson-combined.
pub fn second_derivative(f: impl Fn(C64) -> C64, z: C64, h: f64) -> C64 {
    let d = |h: f64| {
        let hc = C64::new(h, 0.0);
        (-f(z + 2.0 * hc) + 16.0 * f(z + hc) - 30.0 * f(z) + 16.0 * f(z - hc) - f(z - 2.0 * hc))
            / (12.0 * h * h)
    };
    let (a, b) = (d(h), d(h / 2.0));
    (16.0 * b - a) / 15.0
}

fn circle_point(j: usize, m: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)
}

/// First and second derivatives from samples `f(z + r e^{2πij/m})`, `j = 0..m`.
pub fn cauchy_from_samples(vals: &[C64], r: f64) -> (C64, C64) {
    let m = vals.len();
    let (mut d1, mut d2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for (j, v) in vals.iter().enumerate() {
        let e = circle_point(j, m);
        d1 += v / e;
        d2 += v / (e * e);
    }
    (d1 / (m as f64 * r), 2.0 * d2 / (m as f64 * r * r))
}

/// First and second derivatives of an entire function by the trapezoidal Cauchy integral.
pub fn cauchy_derivatives(f: impl Fn(C64) -> C64, z: C64, r: f64, m: usize) -> (C64, C64) {
    let vals: Vec<C64> = (0..m).map(|j| f(z + r * circle_point(j, m))).collect();
    cauchy_from_samples(&vals, r)
}

#[derive(Debug, Clone, Serialize)]
pub enum SearchRegion {
    /// Seeds from sign changes of `Re d/dy Δ(iy)` on a uniform y-grid.
    ImaginaryAxis {
        y_min: f64,
        y_max: f64,
        samples: usize,
    },
    Seeds(Vec<C64>),
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub seed: C64,
    pub lambda: C64,
    /// `|∂Δ/∂λ|` at `lambda`.
    pub residual: f64,
    pub delta: C64,
    pub iterations: usize,
    pub converged: bool,
}

const CAUCHY_RADIUS: f64 = 0.02;
const CAUCHY_POINTS: usize = 16;

fn newton_critical(q: &SpectralField, seed: C64) -> Result<CriticalPoint> {
    let delta = |l: C64| zs_transfer_unchecked(q, l).map(|m| m[0][0] + m[1][1]);
    let eval = |l: C64| -> Result<(C64, C64)> {
        let vals: Vec<C64> = (0..CAUCHY_POINTS)
            .map(|j| delta(l + CAUCHY_RADIUS * circle_point(j, CAUCHY_POINTS)))
            .collect::<Result<_>>()?;
        Ok(cauchy_from_samples(&vals, CAUCHY_RADIUS))
    };
    let mut lambda = seed;
    let mut residual = f64::INFINITY;
    for it in 1..=40 {
        let (d1, d2) = eval(lambda)?;
        residual = d1.norm();
        if residual < 1e-11 {
            return Ok(CriticalPoint {
                seed,
                lambda,
                residual,
                delta: delta(lambda)?,
                iterations: it,
                converged: true,
            });
        }
        let step = d1 / d2;
        if !step.is_finite() || step.norm() > 0.5 {
            break;
        }
        lambda -= step;
        if step.norm() < 1e-14 * (1.0 + lambda.norm()) {
            let (d1, _) = eval(lambda)?;
            residual = d1.norm();
            return Ok(CriticalPoint {
                seed,
                lambda,
                residual,
                delta: delta(lambda)?,
                iterations: it,
                converged: residual < 1e-9,
            });
        }
    }
    Ok(CriticalPoint {
        seed,
        lambda,
        residual,
        delta: C64::new(f64::NAN, f64::NAN),
        iterations: 40,
        converged: false,
    })
}

/// Newton on `∂Δ/∂λ` from each seed; divergent seeds are returned with `converged = false`.
pub fn critical_points(q: &SpectralField, region: &SearchRegion) -> Result<Vec<CriticalPoint>> {
    let seeds = match region {
        SearchRegion::Seeds(s) => s.clone(),
        &SearchRegion::ImaginaryAxis {
            y_min,
            y_max,
            samples,
        } => {
            if samples < 3 || y_min >= y_max {
                return Err(Error::Config("empty imaginary-axis search region".into()));
            }
            let ys: Vec<f64> = (0..samples)
                .map(|j| y_min + (y_max - y_min) * j as f64 / (samples - 1) as f64)
                .collect();
            let vals: Vec<C64> = ys
                .iter()
                .map(|&y| zs_transfer_unchecked(q, C64::new(0.0, y)).map(|m| m[0][0] + m[1][1]))
                .collect::<Result<_>>()?;
            let slope: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).re).collect();
            slope
                .windows(2)
                .enumerate()
                .filter(|(_, w)| w[0] * w[1] < 0.0)
                .map(|(j, _)| C64::new(0.0, ys[j + 1]))
                .collect()
        }
    };
    let mut found: Vec<CriticalPoint> = Vec::new();
    for s in seeds {
        let c = newton_critical(q, s)?;
        if c.converged
            && found
                .iter()
                .any(|f| f.converged && (f.lambda - c.lambda).norm() < 1e-7)
        {
            continue;
        }
        found.push(c);
    }
    Ok(found)
}
