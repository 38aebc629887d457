//! Gradients `(δF/δq, δF/δq̄)` of `F = Δ(λ_c, q)`: generic via the transfer matrix,
//! explicit along the homoclinic orbits.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::darboux::{plane_wave, DarbouxData};
use super::transfer::{inverse, matmul, plane_wave_discriminant, second_derivative, zs_path};
use crate::error::{Error, Result};
use crate::field::{grid, SpectralField};
use crate::params::Params;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Serialize)]
pub struct MelnikovVector {
    pub dq: Vec<C64>,
    pub dqbar: Vec<C64>,
}

impl MelnikovVector {
    /// `∫ (∂_q F δq + ∂_q̄ F δq̄) dx` by the periodic trapezoid rule.
    pub fn pair(&self, dq: &[C64]) -> C64 {
        let n = self.dq.len();
        let h = 2.0 * std::f64::consts::PI / n as f64;
        self.dq
            .iter()
            .zip(&self.dqbar)
            .zip(dq)
            .map(|((a, b), v)| a * v + b * v.conj())
            .sum::<C64>()
            * h
    }

    pub fn sup_norm(&self) -> f64 {
        self.dq
            .iter()
            .chain(&self.dqbar)
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// `δΔ/δq = i P₂₁`, `δΔ/δq̄ = i P₁₂` with `P(x) = M(x) M(2π) M(x)⁻¹`.
pub fn melnikov_vector_generic(q: &SpectralField, lambda: C64) -> Result<MelnikovVector> {
    let n = q.grid_size();
    let path = zs_path(q, lambda)?;
    let mono = path[n];
    let (mut dq, mut dqbar) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for m in path.iter().take(n) {
        let p = matmul(&matmul(m, &mono), &inverse(m));
        if !(p[1][0].is_finite() && p[0][1].is_finite()) {
            return Err(Error::Singular(format!(
                "monodromy not finite at λ = {lambda}"
            )));
        }
        dq.push(I * p[1][0]);
        dqbar.push(I * p[0][1]);
    }
    Ok(MelnikovVector { dq, dqbar })
}

/// Principal `√(Δ(λ)Δ″(λ))` for the plane wave, with `Δ″` by Richardson 5-point differences (h = 1e-4).
pub fn root_delta_delta2(a: f64, lambda: C64) -> C64 {
    let f = |z: C64| plane_wave_discriminant(a, z);
    (f(lambda) * second_derivative(f, lambda, 1e-4)).sqrt()
}

/// `(u₁, u₂)` along the one-pair orbit.
pub fn u_fields(t: f64, x: f64, d: &DarbouxData) -> (C64, C64) {
    let tau = d.tau(t);
    let z = 0.5 * (x + d.vartheta);
    let (ch, sh) = ((0.5 * tau).cosh(), (0.5 * tau).sinh());
    (
        C64::new(ch * z.cos(), -sh * z.sin()),
        C64::new(-sh * (z - d.theta0).cos(), ch * (z - d.theta0).sin()),
    )
}

/// `(v₁, v₂)` built from the second double point.
pub fn v_fields(t: f64, x: f64, d: &DarbouxData) -> Result<(C64, C64)> {
    let (_, _, th0h) = d.hat()?;
    let tau = d.tau_hat(t);
    let z = x + 0.5 * d.vartheta_hat;
    let (ch, sh) = ((0.5 * tau).cosh(), (0.5 * tau).sinh());
    Ok((
        C64::new(ch * z.cos(), -sh * z.sin()),
        C64::new(-sh * (z - th0h).cos(), ch * (z - th0h).sin()),
    ))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SFields {
    pub u: (C64, C64),
    pub big_v: (C64, C64),
    pub s: (C64, C64),
    pub s_hat: (C64, C64),
}

pub fn s_fields(t: f64, x: f64, d: &DarbouxData) -> Result<SFields> {
    let (_, nuh, _) = d.hat()?;
    let nu = d.nu;
    let (nb, nhb) = (nu.conj(), nuh.conj());
    let (u1, u2) = u_fields(t, x, d);
    let (v1, v2) = v_fields(t, x, d)?;
    let nn = u1.norm_sqr() + u2.norm_sqr();
    let big1 = (((nuh - nu) * u1.norm_sqr() + (nuh - nb) * u2.norm_sqr()) * v1
        + (nb - nu) * u1 * u2.conj() * v2)
        / nn;
    let big2 = ((nb - nu) * u1.conj() * u2 * v1
        + ((nuh - nb) * u1.norm_sqr() + (nuh - nu) * u2.norm_sqr()) * v2)
        / nn;
    let vv = big1.norm_sqr() + big2.norm_sqr();
    let s1 = (((nu - nuh) * big1.norm_sqr() + (nu - nhb) * big2.norm_sqr()) * u2.conj()
        - (nhb - nuh) * big1 * big2.conj() * u1.conj())
        / (nn * vv);
    let s2 = ((nhb - nuh) * big1.conj() * big2 * u2.conj()
        - ((nu - nhb) * big1.norm_sqr() + (nu - nuh) * big2.norm_sqr()) * u1.conj())
        / (nn * vv);
    Ok(SFields {
        u: (u1, u2),
        big_v: (big1, big2),
        s: (s1, s2),
        s_hat: (big2.conj() / vv, big1.conj() / vv),
    })
}

/// Scalar prefactors of the explicit vectors.
#[derive(Debug, Clone, Copy)]
pub struct ExplicitPrefactors {
    pub one_pair: C64,
    pub two_pair_nu: C64,
    pub two_pair_nu_hat: C64,
}

impl ExplicitPrefactors {
    pub fn new(d: &DarbouxData) -> Self {
        let a = d.a;
        let nu = d.nu;
        let root = root_delta_delta2(a, nu);
        let one = 0.25 / (a * a) * I * (nu - nu.conj()) * root;
        let (two_nu, two_hat) = match d.nu_hat {
            Some(nuh) => {
                // the ν̂ vector needs the negative root for agreement with the monodromy gradient
                let root_h = -root_delta_delta2(a, nuh);
                (
                    one / ((nu - nuh) * (nu - nuh.conj())),
                    0.5 / (a * a)
                        * I
                        * (nuh - nuh.conj())
                        * (nuh - nu)
                        * (nuh - nu.conj())
                        * root_h,
                )
            }
            None => (C64::new(f64::NAN, 0.0), C64::new(f64::NAN, 0.0)),
        };
        ExplicitPrefactors {
            one_pair: one,
            two_pair_nu: two_nu,
            two_pair_nu_hat: two_hat,
        }
    }
}

/// Which explicit vector to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VectorKind {
    OnePair,
    TwoPairNu,
    TwoPairNuHat,
}

/// `[δF/δq, δF/δq̄]` at one point of the orbit.
pub fn explicit_vector_at(
    t: f64,
    x: f64,
    d: &DarbouxData,
    p: &Params,
    kind: VectorKind,
    pre: &ExplicitPrefactors,
) -> Result<[C64; 2]> {
    let qc = plane_wave(t, p);
    let (c, a1, a2) = match kind {
        VectorKind::OnePair => {
            let (u1, u2) = u_fields(t, x, d);
            let nn = u1.norm_sqr() + u2.norm_sqr();
            (pre.one_pair / (nn * nn), u1.conj(), u2.conj())
        }
        VectorKind::TwoPairNu => {
            let s = s_fields(t, x, d)?;
            (pre.two_pair_nu, s.s.0, s.s.1)
        }
        VectorKind::TwoPairNuHat => {
            let s = s_fields(t, x, d)?;
            (pre.two_pair_nu_hat, s.s_hat.0, s.s_hat.1)
        }
    };
    // one pair: (q̄_c ū₁², −q_c ū₂²); two pairs: (q̄_c A₂², −q_c A₁²)
    Ok(match kind {
        VectorKind::OnePair => [c * qc.conj() * a1 * a1, -c * qc * a2 * a2],
        _ => [c * qc.conj() * a2 * a2, -c * qc * a1 * a1],
    })
}

pub fn melnikov_vector_explicit(
    t: f64,
    n: usize,
    d: &DarbouxData,
    p: &Params,
    kind: VectorKind,
) -> Result<MelnikovVector> {
    if kind != VectorKind::OnePair && d.nu_hat.is_none() {
        return Err(Error::Domain("two-pair vectors need a ∈ (1, 3/2)".into()));
    }
    let pre = ExplicitPrefactors::new(d);
    let (mut dq, mut dqbar) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for x in grid(n) {
        let [a, b] = explicit_vector_at(t, x, d, p, kind, &pre)?;
        dq.push(a);
        dqbar.push(b);
    }
    Ok(MelnikovVector { dq, dqbar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn prefactor_roots() {
        let d = DarbouxData::new(1.2, 0.0, 0.0).unwrap();
        let r = root_delta_delta2(1.2, d.nu);
        assert!((r - C64::new(8.0 * PI * d.sigma, 0.0)).norm() < 1e-6);
        let rh = root_delta_delta2(1.2, d.nu_hat.unwrap());
        assert!((rh - C64::new(4.0 * PI * d.sigma_hat.unwrap(), 0.0)).norm() < 1e-6);
    }

    #[test]
    fn s_hat_norm_identity() {
        let d = DarbouxData::new(1.2, 0.4, 1.1)
            .unwrap()
            .with_second(-0.7, 0.5)
            .unwrap();
        for x in [0.0, 1.0, 4.0] {
            let s = s_fields(0.3, x, &d).unwrap();
            let vv = s.big_v.0.norm_sqr() + s.big_v.1.norm_sqr();
            let lhs = s.s_hat.0.norm_sqr() + s.s_hat.1.norm_sqr();
            assert!((lhs - 1.0 / vv).abs() < 1e-12 * (1.0 + lhs));
        }
    }
}
