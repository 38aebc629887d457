//! Plane waves, Bloch functions, the Bäcklund-Darboux transform and the explicit
//! homoclinic orbits built from it.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{grid, SpectralField};
use crate::params::Params;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Double-point data and Bäcklund parameters for the plane wave of amplitude `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarbouxData {
    pub a: f64,
    pub sigma: f64,
    pub nu: C64,
    pub theta0: f64,
    pub sigma_hat: Option<f64>,
    pub nu_hat: Option<C64>,
    pub theta0_hat: Option<f64>,
    pub rho: f64,
    pub vartheta: f64,
    pub rho_hat: f64,
    pub vartheta_hat: f64,
}

impl DarbouxData {
    pub fn new(a: f64, rho: f64, vartheta: f64) -> Result<Self> {
        if !(a > 0.5 && a < 1.5) || (a - 1.0).abs() < 1e-12 {
            return Err(Error::Domain(format!(
                "amplitude a = {a} outside (1/2,1) ∪ (1,3/2)"
            )));
        }
        let sigma = (a * a - 0.25).sqrt();
        let (sigma_hat, nu_hat, theta0_hat) = if a > 1.0 {
            let s = (a * a - 1.0).sqrt();
            (Some(s), Some(C64::new(0.0, s)), Some(s.atan2(1.0)))
        } else {
            (None, None, None)
        };
        Ok(DarbouxData {
            a,
            sigma,
            nu: C64::new(0.0, sigma),
            theta0: sigma.atan2(0.5),
            sigma_hat,
            nu_hat,
            theta0_hat,
            rho,
            vartheta,
            rho_hat: 0.0,
            vartheta_hat: 0.0,
        })
    }

    pub fn with_second(mut self, rho_hat: f64, vartheta_hat: f64) -> Result<Self> {
        if self.nu_hat.is_none() {
            return Err(Error::Domain(
                "second double point needs a ∈ (1, 3/2)".into(),
            ));
        }
        self.rho_hat = rho_hat;
        self.vartheta_hat = vartheta_hat;
        Ok(self)
    }

    /// Sets `ϑ − ϑ₀ + π/2 = 0` (`flip = false`) or `π`, making the one-pair orbit even in x.
    pub fn even(mut self, flip: bool) -> Self {
        self.vartheta = self.theta0 - FRAC_PI_2 + if flip { PI } else { 0.0 };
        self
    }

    /// Same restriction on the second-stage angle.
    pub fn even_hat(mut self, flip: bool) -> Result<Self> {
        let t = self
            .theta0_hat
            .ok_or_else(|| Error::Domain("second double point needs a ∈ (1, 3/2)".into()))?;
        self.vartheta_hat = t - FRAC_PI_2 + if flip { PI } else { 0.0 };
        Ok(self)
    }

    pub fn pairs(&self) -> usize {
        if self.nu_hat.is_some() {
            2
        } else {
            1
        }
    }

    pub fn tau(&self, t: f64) -> f64 {
        2.0 * self.sigma * t - self.rho
    }

    pub fn tau_hat(&self, t: f64) -> f64 {
        4.0 * self.sigma_hat.unwrap_or(f64::NAN) * t - self.rho_hat
    }

    pub fn hat(&self) -> Result<(f64, C64, f64)> {
        match (self.sigma_hat, self.nu_hat, self.theta0_hat) {
            (Some(s), Some(n), Some(t)) => Ok((s, n, t)),
            _ => Err(Error::Domain(
                "second double point needs a ∈ (1, 3/2)".into(),
            )),
        }
    }
}

/// Phase `θ(t) = −[2(a² − ω²)t + γ]` of the plane wave.
pub fn plane_phase(t: f64, p: &Params) -> f64 {
    -(2.0 * (p.amplitude * p.amplitude - p.omega * p.omega) * t + p.gamma)
}

/// `q_c = a e^{iθ(t)}`.
pub fn plane_wave(t: f64, p: &Params) -> C64 {
    C64::from_polar(p.amplitude, plane_phase(t, p))
}

/// Bloch function `ψ^±(t, x, λ)` of the plane wave; `plus` selects the sign.
pub fn bloch(t: f64, x: f64, lambda: C64, plus: bool, p: &Params) -> [C64; 2] {
    let a = p.amplitude;
    let k = (a * a + lambda * lambda).sqrt();
    let th = plane_phase(t, p);
    let s = if plus { 1.0 } else { -1.0 };
    let e = (s * I * (2.0 * lambda * k * t + k * x)).exp();
    [
        a * C64::from_polar(1.0, th / 2.0) * e,
        (s * k - lambda) * C64::from_polar(1.0, -th / 2.0) * e,
    ]
}

/// `c⁺ψ⁺ + c⁻ψ⁻` at λ with `c⁺/c⁻ = e^{ρ+iϑ}`, `c⁻ = 1`.
pub fn bloch_combination(
    t: f64,
    x: f64,
    lambda: C64,
    rho: f64,
    vartheta: f64,
    p: &Params,
) -> [C64; 2] {
    let cp = C64::from_polar(rho.exp(), vartheta);
    let a = bloch(t, x, lambda, true, p);
    let b = bloch(t, x, lambda, false, p);
    [cp * a[0] + b[0], cp * a[1] + b[1]]
}

/// `G(λ; ν, φ) ψ` with `G = Γ diag(λ−ν, λ−ν̄) Γ⁻¹`, `Γ = [[φ₁, −φ̄₂], [φ₂, φ̄₁]]`.
pub fn gauge_apply(lambda: C64, nu: C64, phi: [C64; 2], psi: [C64; 2]) -> [C64; 2] {
    let [p1, p2] = phi;
    let n = p1.norm_sqr() + p2.norm_sqr();
    let (d1, d2) = (lambda - nu, lambda - nu.conj());
    let g11 = (p1 * d1 * p1.conj() + p2.conj() * d2 * p2) / n;
    let g12 = (p1 * d1 * p2.conj() - p2.conj() * d2 * p1) / n;
    let g21 = (p2 * d1 * p1.conj() - p1.conj() * d2 * p2) / n;
    let g22 = (p2 * d1 * p2.conj() + p1.conj() * d2 * p1) / n;
    [g11 * psi[0] + g12 * psi[1], g21 * psi[0] + g22 * psi[1]]
}

fn darboux_term(nu: C64, phi: [C64; 2]) -> Result<C64> {
    let n = phi[0].norm_sqr() + phi[1].norm_sqr();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Singular("|φ₁|² + |φ₂|² vanishes".into()));
    }
    Ok(2.0 * (nu - nu.conj()) * phi[0] * phi[1].conj() / n)
}

/// `Q = q + 2(ν−ν̄) φ₁φ̄₂/(|φ₁|²+|φ₂|²)` pointwise on the grid.
pub fn bd_transform(q: &SpectralField, nu: C64, phi: &[[C64; 2]]) -> Result<SpectralField> {
    if phi.len() != q.grid_size() {
        return Err(Error::Config("φ must be sampled on the field grid".into()));
    }
    let vals = q
        .values()
        .iter()
        .zip(phi)
        .map(|(&v, &f)| darboux_term(nu, f).map(|d| v + d))
        .collect::<Result<Vec<_>>>()?;
    SpectralField::from_values(vals)
}

/// `P = Q/q_c` for the one-pair orbit; free of `γ` and of `a − ω`.
pub fn one_pair_ratio(t: f64, x: f64, d: &DarbouxData) -> C64 {
    let tau = d.tau(t);
    let y = x + d.vartheta - d.theta0 + FRAC_PI_2;
    let s = 1.0 / tau.cosh();
    let (s0, c2, s2) = (
        d.theta0.sin(),
        (2.0 * d.theta0).cos(),
        (2.0 * d.theta0).sin(),
    );
    (c2 - I * s2 * tau.tanh() - s0 * s * y.cos()) / (1.0 + s0 * s * y.cos())
}

/// Closed-form one-pair orbit at a single point.
pub fn one_pair_at(t: f64, x: f64, d: &DarbouxData, p: &Params) -> C64 {
    plane_wave(t, p) * one_pair_ratio(t, x, d)
}

/// `(𝒲₁, 𝒲₂)` of the two-pair formula.
pub fn two_pair_w(t: f64, x: f64, d: &DarbouxData) -> Result<(f64, C64)> {
    let (_, _, th0h) = d.hat()?;
    let tau = d.tau(t);
    let tauh = d.tau_hat(t);
    let y = x + d.vartheta - d.theta0 + FRAC_PI_2;
    let yh = 2.0 * x + d.vartheta_hat - th0h + FRAC_PI_2;
    let (s, tt) = (1.0 / tau.cosh(), tau.tanh());
    let (sh, th) = (1.0 / tauh.cosh(), tauh.tanh());
    let (s0, c0) = d.theta0.sin_cos();
    let (s0h, c0h) = th0h.sin_cos();
    let s20 = (2.0 * d.theta0).sin();
    let s20h = (2.0 * th0h).sin();
    let a = 1.0 + s0 * s * y.cos();
    let ah = 1.0 + s0h * sh * yh.cos();
    let w1 = (s0h * s0h * a * a + s20 * s20 * s * s * (1.0 - (2.0 * y).cos()) / 8.0) * ah
        - 0.5 * s20 * s20h * s * sh * a * y.sin() * yh.sin()
        + s0 * s0 * (1.0 + 2.0 * s0 * s * y.cos() + (y.cos().powi(2) - c0 * c0) * s * s) * ah
        - 2.0 * s0h * s0 * (c0h * c0 * th * tt + (s0 + s * y.cos()) * (s0h + sh * yh.cos())) * a;
    let base = C64::new(s0h + sh * yh.cos(), 0.0);
    let w2 = (-2.0 * s0h * s0h * a * a + s20 * s20 * s * s * (1.0 - (2.0 * y).cos()) / 4.0)
        * (base + I * c0h * th)
        + 2.0 * s0 * s0 * (C64::new(-c0 * tt, s0 + s * y.cos())).powu(2) * (base - I * c0h * th)
        + 2.0
            * s0
            * C64::new(s0 + s * y.cos(), c0 * tt)
            * (2.0 * s0h * a * ah - s20 * c0h * s * sh * y.sin() * yh.sin());
    Ok((w1, w2))
}

/// `P̃ = Q̃/q_c = P + 𝒲₂ sin ϑ̂₀/𝒲₁`.
pub fn two_pair_ratio(t: f64, x: f64, d: &DarbouxData) -> Result<C64> {
    let (_, _, th0h) = d.hat()?;
    let (w1, w2) = two_pair_w(t, x, d)?;
    if w1.abs() < 1e-300 {
        return Err(Error::Singular(format!("𝒲₁ vanishes at t = {t}, x = {x}")));
    }
    Ok(one_pair_ratio(t, x, d) + w2 * th0h.sin() / w1)
}

/// Closed-form two-pair orbit `Q̃ = q_c P̃` at a single point.
pub fn two_pair_at(t: f64, x: f64, d: &DarbouxData, p: &Params) -> Result<C64> {
    Ok(plane_wave(t, p) * two_pair_ratio(t, x, d)?)
}

/// Two-pair orbit by iterating the transform: `ν` first, then `ν̂` with `Φ̂ = G(ν̂; ν, φ)φ̂`.
pub fn two_pair_iterated_at(t: f64, x: f64, d: &DarbouxData, p: &Params) -> Result<C64> {
    let (_, nuh, _) = d.hat()?;
    let phi = bloch_combination(t, x, d.nu, d.rho, d.vartheta, p);
    let phih = bloch_combination(t, x, nuh, d.rho_hat, d.vartheta_hat, p);
    let big = gauge_apply(nuh, d.nu, phi, phih);
    Ok(plane_wave(t, p) + darboux_term(d.nu, phi)? + darboux_term(nuh, big)?)
}

fn on_grid(n: usize, f: impl Fn(f64) -> Result<C64>) -> Result<SpectralField> {
    SpectralField::from_values(grid(n).into_iter().map(f).collect::<Result<Vec<_>>>()?)
}

pub fn homoclinic_one_pair(t: f64, n: usize, d: &DarbouxData, p: &Params) -> Result<SpectralField> {
    on_grid(n, |x| Ok(one_pair_at(t, x, d, p)))
}

pub fn homoclinic_two_pair(t: f64, n: usize, d: &DarbouxData, p: &Params) -> Result<SpectralField> {
    on_grid(n, |x| two_pair_at(t, x, d, p))
}

pub fn homoclinic_two_pair_iterated(
    t: f64,
    n: usize,
    d: &DarbouxData,
    p: &Params,
) -> Result<SpectralField> {
    on_grid(n, |x| two_pair_iterated_at(t, x, d, p))
}

/// One-pair orbit through `bd_transform` applied to Bloch functions at ν.
pub fn one_pair_via_transform(
    t: f64,
    n: usize,
    d: &DarbouxData,
    p: &Params,
) -> Result<SpectralField> {
    let q = SpectralField::constant(n, plane_wave(t, p))?;
    let phi: Vec<[C64; 2]> = grid(n)
        .into_iter()
        .map(|x| bloch_combination(t, x, d.nu, d.rho, d.vartheta, p))
        .collect();
    bd_transform(&q, d.nu, &phi)
}

/// Limiting phase factor `e^{∓2iϑ₀}` (one pair) or `e^{∓2i(ϑ₀+ϑ̂₀)}` (two pairs) as `t → ±∞`.
pub fn asymptotic_phase(d: &DarbouxData, pairs: usize, future: bool) -> C64 {
    let mut ang = d.theta0;
    if pairs == 2 {
        ang += d.theta0_hat.unwrap_or(f64::NAN);
    }
    let s = if future { -1.0 } else { 1.0 };
    C64::from_polar(1.0, 2.0 * s * ang)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sup_diff;

    fn setup(a: f64) -> (DarbouxData, Params) {
        let p = Params::new(a, 1.0, 2.0, 0.0).with_wave(a, 0.3);
        (DarbouxData::new(a, 0.4, 1.1).unwrap(), p)
    }

    #[test]
    fn double_point_angles() {
        let (d, _) = setup(0.8);
        assert!((0.5 + d.nu - C64::from_polar(0.8, d.theta0)).norm() < 1e-15);
        let (d, _) = setup(1.2);
        assert!(
            (1.0 + d.nu_hat.unwrap() - C64::from_polar(1.2, d.theta0_hat.unwrap())).norm() < 1e-15
        );
    }

    #[test]
    fn transform_of_bloch_functions_is_closed_form() {
        let (d, p) = setup(0.8);
        for t in [-2.0, 0.0, 0.5, 3.0] {
            let a = one_pair_via_transform(t, 64, &d, &p).unwrap();
            let b = homoclinic_one_pair(t, 64, &d, &p).unwrap();
            assert!(sup_diff(a.values(), b.values()) < 1e-12);
        }
    }

    #[test]
    fn real_nu_leaves_field_unchanged() {
        let q = SpectralField::constant(8, C64::new(0.5, 0.1)).unwrap();
        let phi = vec![[C64::new(1.0, 0.2), C64::new(-0.3, 0.4)]; 8];
        let out = bd_transform(&q, C64::new(0.7, 0.0), &phi).unwrap();
        assert!(sup_diff(out.values(), q.values()) < 1e-15);
    }

    #[test]
    fn zero_phi_is_singular() {
        let q = SpectralField::constant(8, C64::new(0.5, 0.1)).unwrap();
        let phi = vec![[C64::new(0.0, 0.0); 2]; 8];
        assert!(matches!(
            bd_transform(&q, C64::new(0.0, 0.5), &phi),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn closed_two_pair_matches_iteration() {
        let (d, p) = setup(1.2);
        let d = d.with_second(-0.7, 0.5).unwrap();
        for t in [-2.0, 0.0, 0.5, 3.0] {
            let a = homoclinic_two_pair(t, 64, &d, &p).unwrap();
            let b = homoclinic_two_pair_iterated(t, 64, &d, &p).unwrap();
            assert!(sup_diff(a.values(), b.values()) < 1e-10, "t = {t}");
        }
    }
}
