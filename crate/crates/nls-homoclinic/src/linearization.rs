//! Coordinates centred on the resonance circle, the linear operator `L_ε`
//! and the split of a zero-mean field into its unstable eigen-directions.
//!
//! `q = (ρ + f) e^{iθ}` with `⟨f⟩ = 0`, `I = ρ² + ⟨|f|²⟩`, `J = I − ω²`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{index_of, wavenumber, SpectralField};
use crate::params::Params;

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceCoords {
    pub j: f64,
    pub theta: f64,
    pub f: SpectralField,
}

impl ResonanceCoords {
    /// `ρ = √(J + ω² − ⟨|f|²⟩)`; configurations with a nonpositive radicand are rejected.
    pub fn rho(&self, p: &Params) -> Result<f64> {
        let r2 = self.j + p.omega * p.omega - self.f.mean_abs2();
        if r2 <= 0.0 {
            return Err(Error::Domain(format!("ρ² = {r2} is not positive")));
        }
        Ok(r2.sqrt())
    }
}

pub fn to_resonance_coords(q: &SpectralField, p: &Params) -> Result<ResonanceCoords> {
    let m = q.mean();
    let rho = m.norm();
    if rho <= 1e-13 * (1.0 + q.sup_norm()) {
        return Err(Error::CoordinateSingularity("⟨q⟩ = 0, θ undefined".into()));
    }
    let theta = m.arg();
    let rot = C64::from_polar(1.0, -theta);
    let mut modes: Vec<C64> = q.modes().iter().map(|c| c * rot).collect();
    modes[0] = C64::new(0.0, 0.0);
    let f = SpectralField::from_modes(modes)?;
    let j = rho * rho + f.mean_abs2() - p.omega * p.omega;
    Ok(ResonanceCoords { j, theta, f })
}

pub fn from_resonance_coords(c: &ResonanceCoords, p: &Params) -> Result<SpectralField> {
    let rho = c.rho(p)?;
    let rot = C64::from_polar(1.0, c.theta);
    let mut modes: Vec<C64> = c.f.modes().iter().map(|v| v * rot).collect();
    modes[0] = rot * rho;
    SpectralField::from_modes(modes)
}

/// Quadratic and cubic remainders of the `(J, θ, f)` equations.
#[derive(Debug, Clone)]
pub struct NonlinearTerms {
    pub r2_j: f64,
    pub r2_theta: f64,
    pub n2: SpectralField,
    pub n3: SpectralField,
}

fn grid_mean(v: impl Iterator<Item = C64>, n: usize) -> C64 {
    v.sum::<C64>() / n as f64
}

pub fn nonlinear_terms(c: &ResonanceCoords, p: &Params) -> Result<NonlinearTerms> {
    let rho = c.rho(p)?;
    let f = c.f.values();
    let n = f.len();
    let i = c.j + p.omega * p.omega;
    let mf2 = c.f.mean_abs2();

    let fx2: f64 =
        c.f.modes()
            .iter()
            .enumerate()
            .map(|(idx, m)| (wavenumber(idx, n) as f64).powi(2) * m.norm_sqr())
            .sum();
    let inv_gap = 1.0 / (i - mf2).sqrt() - 1.0 / i.sqrt();
    let bs = p.epsilon * p.beta * c.theta.sin();

    let r2_j = -2.0 * fx2 + 2.0 * p.beta * c.theta.cos() * ((i - mf2).sqrt() - i.sqrt());

    let m_re2 = grid_mean(f.iter().map(|v| (v + v.conj()).powu(2)), n).re;
    let m_cub = grid_mean(f.iter().map(|v| v.norm_sqr() * (v + v.conj())), n).re;
    let r2_theta = -m_re2 - m_cub / rho - bs * inv_gap;

    let m_f2 = grid_mean(f.iter().map(|v| v * v), n);
    let n2 = SpectralField::from_values(
        f.iter()
            .map(|v| 2.0 * rho * (2.0 * (v.norm_sqr() - mf2) + (v * v - m_f2)))
            .collect(),
    )?;

    let m_mix = grid_mean(
        f.iter()
            .map(|v| v * v + v.conj() * v.conj() + 6.0 * v.norm_sqr()),
        n,
    );
    let m_abs2f = grid_mean(f.iter().map(|v| v.norm_sqr() * v), n);
    let n3 = SpectralField::from_values(
        f.iter()
            .map(|&v| {
                -m_mix * v + 2.0 * (v.norm_sqr() * v - m_abs2f)
                    - m_cub / rho * v
                    - 2.0 * mf2 * v.conj()
                    - bs * inv_gap * v
            })
            .collect(),
    )?;

    Ok(NonlinearTerms {
        r2_j,
        r2_theta,
        n2,
        n3,
    })
}

/// First-order coupling `V_ε f = −2iJ(f + f̄) + iεβ f sin θ/√(J+ω²)`.
pub fn v_epsilon_apply(c: &ResonanceCoords, p: &Params) -> SpectralField {
    let b = p.epsilon * p.beta * c.theta.sin() / (c.j + p.omega * p.omega).sqrt();
    c.f.map(|v| C64::new(0.0, -2.0 * c.j) * (v + v.conj()) + C64::new(0.0, b) * v)
}

/// The 2×2 block of `L_ε` on `(f̂(k), conj f̂(−k))`.
pub fn mode_matrix(k: i64, p: &Params) -> [[C64; 2]; 2] {
    let k2 = (k * k) as f64;
    let w2 = p.omega * p.omega;
    let damp = -p.epsilon * (p.alpha + k2);
    [
        [C64::new(damp, k2 - 2.0 * w2), C64::new(0.0, -2.0 * w2)],
        [C64::new(0.0, 2.0 * w2), C64::new(damp, -k2 + 2.0 * w2)],
    ]
}

/// `L_ε f = −i f_xx + ε(−αf + f_xx) − 2iω²(f + f̄)`, applied mode by mode.
pub fn l_epsilon_apply(f: &SpectralField, p: &Params) -> SpectralField {
    let n = f.grid_size();
    let m = f.modes();
    let out = (0..n)
        .map(|i| {
            let k = wavenumber(i, n);
            let b = mode_matrix(k, p);
            b[0][0] * m[i] + b[0][1] * m[index_of(-k, n)].conj()
        })
        .collect();
    SpectralField::from_modes(out).expect("size already checked")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSpectrum {
    pub k: i64,
    pub mu_plus: C64,
    pub mu_minus: C64,
    /// Both eigenvalues real (`k² < 4ω²`).
    pub real_pair: bool,
}

/// `μ_k^± = −ε(α + k²) ± k√(4ω² − k²)` for `k = 1..=k_max`.
pub fn spectrum_l_epsilon(p: &Params, k_max: i64) -> Result<Vec<ModeSpectrum>> {
    if k_max < 2 {
        return Err(Error::Config("k_max must be at least 2".into()));
    }
    Ok((1..=k_max)
        .map(|k| {
            let kf = k as f64;
            let rad = 4.0 * p.omega * p.omega - kf * kf;
            let root = kf * C64::new(rad, 0.0).sqrt();
            let shift = -p.epsilon * (p.alpha + kf * kf);
            ModeSpectrum {
                k,
                mu_plus: shift + root,
                mu_minus: shift - root,
                real_pair: rad > 0.0,
            }
        })
        .collect())
}

/// `e^{±iϑ_k} = (k ∓ i√(4ω² − k²))/(2ω)`.
pub fn eigen_phase(k: i64, omega: f64) -> (C64, C64) {
    let kf = k as f64;
    let s = (4.0 * omega * omega - kf * kf).sqrt();
    (
        C64::new(kf, -s) / (2.0 * omega),
        C64::new(kf, s) / (2.0 * omega),
    )
}

/// `e_k^± = e^{±iϑ_k} cos kx` on an N-point grid.
pub fn eigenfunction(k: i64, plus: bool, omega: f64, n: usize) -> Result<SpectralField> {
    let (ep, em) = eigen_phase(k, omega);
    let e = if plus { ep } else { em };
    SpectralField::from_fn(n, |x| e * (k as f64 * x).cos())
}

/// `(c_k, c_k^+, c_k^−)` of the projected coupling terms.
pub fn split_constants(k: i64, omega: f64) -> (f64, f64, f64) {
    let kf = k as f64;
    let s = (4.0 * omega * omega - kf * kf).sqrt();
    (
        kf / s,
        (2.0 * omega * omega - kf * kf) / (kf * s),
        2.0 * omega * omega / (kf * s),
    )
}

/// `(V_k^+ ξ, V_k^− ξ)` on the eigen-coordinates, for a plane point `(J, θ)`.
pub fn projected_coupling(k: i64, xi: (f64, f64), j: f64, theta: f64, p: &Params) -> (f64, f64) {
    let (ck, cp, cm) = split_constants(k, p.omega);
    let b = p.epsilon * p.beta * theta.sin() / (j + p.omega * p.omega).sqrt();
    let (xp, xm) = xi;
    (
        2.0 * ck * j * (xp + xm) + b * (cp * xp - cm * xm),
        -2.0 * ck * j * (xp + xm) + b * (cm * xp - cp * xm),
    )
}

/// `g = Σ ξ_k^± e_k^± + h` with real ξ and `⟨h cos kx⟩ = 0` for the split modes.
#[derive(Debug, Clone)]
pub struct EigenSplit {
    pub ks: Vec<i64>,
    pub xi_plus: Vec<f64>,
    pub xi_minus: Vec<f64>,
    pub h: SpectralField,
}

/// Number of unstable modes for this ω: 1 below ω = 1, 2 above.
pub fn unstable_modes(omega: f64) -> Result<Vec<i64>> {
    if (omega - 1.0).abs() < 1e-12 {
        return Err(Error::Domain(
            "ω = 1: the k = 2 eigenvalue is degenerate".into(),
        ));
    }
    if omega <= 0.5 || omega >= 1.5 {
        return Err(Error::Domain(format!("ω = {omega} outside (1/2, 3/2)")));
    }
    Ok(if omega < 1.0 { vec![1] } else { vec![1, 2] })
}

/// Splits the cos kx coefficient `c = ĝ(k) + ĝ(−k) = ξ⁺e^{iϑ_k} + ξ⁻e^{−iϑ_k}` into real parts.
pub fn xi_pair(c: C64, k: i64, omega: f64) -> (f64, f64) {
    let kf = k as f64;
    let s = (4.0 * omega * omega - kf * kf).sqrt();
    let sum = 2.0 * omega * c.re / kf;
    let diff = 2.0 * omega * c.im / s;
    (0.5 * (sum - diff), 0.5 * (sum + diff))
}

pub fn eigen_split(g: &SpectralField, p: &Params) -> Result<EigenSplit> {
    let ks = unstable_modes(p.omega)?;
    let n = g.grid_size();
    let mut modes = g.modes().to_vec();
    let (mut xp, mut xm) = (Vec::new(), Vec::new());
    for &k in &ks {
        let c = g.mode(k) + g.mode(-k);
        let (a, b) = xi_pair(c, k, p.omega);
        xp.push(a);
        xm.push(b);
        let (ep, em) = eigen_phase(k, p.omega);
        let half = 0.5 * (a * ep + b * em);
        modes[index_of(k, n)] -= half;
        modes[index_of(-k, n)] -= half;
    }
    Ok(EigenSplit {
        ks,
        xi_plus: xp,
        xi_minus: xm,
        h: SpectralField::from_modes(modes)?,
    })
}

pub fn eigen_merge(s: &EigenSplit, p: &Params) -> Result<SpectralField> {
    let n = s.h.grid_size();
    let mut modes = s.h.modes().to_vec();
    for (idx, &k) in s.ks.iter().enumerate() {
        let (ep, em) = eigen_phase(k, p.omega);
        let half = 0.5 * (s.xi_plus[idx] * ep + s.xi_minus[idx] * em);
        modes[index_of(k, n)] += half;
        modes[index_of(-k, n)] += half;
    }
    SpectralField::from_modes(modes)
}
