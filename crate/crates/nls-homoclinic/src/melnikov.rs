//! Melnikov integrals along the explicit orbits at `a = ω`, the constraint
//! surfaces `κ(ω)`, `χ̃(ω, Δρ)`, `β(ω, Δρ)` and the second distance `d̃`.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{grid, SpectralField};
use crate::integrable::{one_pair_ratio, s_fields, two_pair_ratio, u_fields, DarbouxData};
use crate::params::Params;
use crate::plane::fish_hamiltonian;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Relative change allowed under doubled window and doubled x-grid.
pub const CERTIFICATE_TOL: f64 = 1e-6;
/// Largest imaginary part tolerated in an integral that should be real.
pub const IMAG_TOL: f64 = 1e-10;
/// Below this the κ / χ̃ / β denominators count as zero.
pub const SINGULAR_TOL: f64 = 1e-10;

/// Time window `t_max_factor` in units of the slowest `τ`, Gauss-Legendre
/// nodes per unit-`τ` panel, trapezoid points in x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub t_max_factor: f64,
    pub nodes_per_unit: usize,
    pub x_grid: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            t_max_factor: 40.0,
            nodes_per_unit: 64,
            x_grid: 128,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max_factor.is_finite() && self.t_max_factor >= 5.0) {
            return Err(Error::Config(format!(
                "quadrature.t_max_factor = {} must be >= 5",
                self.t_max_factor
            )));
        }
        if !(2..=1024).contains(&self.nodes_per_unit) {
            return Err(Error::Config(format!(
                "quadrature.nodes_per_unit = {} outside [2, 1024]",
                self.nodes_per_unit
            )));
        }
        if self.x_grid < 16 || !self.x_grid.is_power_of_two() {
            return Err(Error::Config(format!(
                "quadrature.x_grid = {} must be a power of two >= 16",
                self.x_grid
            )));
        }
        Ok(())
    }

    pub fn doubled_window(self) -> Self {
        QuadratureSpec {
            t_max_factor: 2.0 * self.t_max_factor,
            ..self
        }
    }

    pub fn doubled_grid(self) -> Self {
        QuadratureSpec {
            x_grid: 2 * self.x_grid,
            ..self
        }
    }
}

/// What was integrated and how well it held up under refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeta {
    pub t_lo: f64,
    pub t_hi: f64,
    pub panels: usize,
    pub nodes_per_unit: usize,
    pub x_grid: usize,
    /// `max|ΔM| / max|M|` under doubled window.
    pub refine_window: f64,
    /// Same under doubled x-grid.
    pub refine_grid: f64,
    pub imag_residue: f64,
}

impl QuadratureMeta {
    pub fn estimated_error(&self) -> f64 {
        self.refine_window.max(self.refine_grid)
    }

    pub fn certified(&self) -> bool {
        self.estimated_error() < CERTIFICATE_TOL && self.imag_residue < IMAG_TOL
    }
}

fn gl_rule(n: usize) -> Result<Vec<(f64, f64)>> {
    GaussLegendre::new(n)
        .map(|r| r.into_node_weight_pairs())
        .map_err(|e| Error::Config(format!("Gauss-Legendre rule of degree {n}: {e}")))
}

/// Composite Gauss-Legendre over `[lo, hi]` split into `panels`; panels run in
/// parallel and are summed in index order.
fn integrate_t<const K: usize>(
    lo: f64,
    hi: f64,
    panels: usize,
    rule: &[(f64, f64)],
    f: impl Fn(f64) -> Result<[C64; K]> + Sync,
) -> Result<[C64; K]> {
    let h = (hi - lo) / panels as f64;
    let parts = (0..panels)
        .into_par_iter()
        .map(|i| {
            let mid = lo + (i as f64 + 0.5) * h;
            let mut acc = [C64::default(); K];
            for &(x, w) in rule {
                let v = f(mid + 0.5 * h * x)?;
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += 0.5 * h * w * b;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tot = [C64::default(); K];
    for part in parts {
        for (a, b) in tot.iter_mut().zip(part) {
            *a += b;
        }
    }
    Ok(tot)
}

/// x-integrals of the three one-pair integrands at time `t`.
pub fn one_pair_slice(t: f64, d: &DarbouxData, n: usize) -> Result<[C64; 3]> {
    let om = d.a;
    let xs = grid(n);
    let p = SpectralField::from_values(xs.iter().map(|&x| one_pair_ratio(t, x, d)).collect())?;
    let pxx = p.derivative(2);
    let mut acc = [C64::default(); 3];
    for ((&x, &pv), &pxv) in xs.iter().zip(p.values()).zip(pxx.values()) {
        let (u1, u2) = u_fields(t, x, d);
        let nn = u1.norm_sqr() + u2.norm_sqr();
        let w = 1.0 / (nn * nn);
        let (c1, c2) = (u1.conj().powu(2), u2.conj().powu(2));
        acc[0] += om * om * w * (c1 * pxv - c2 * pxv.conj());
        acc[1] += om * om * w * (c2 * pv.conj() - c1 * pv);
        acc[2] += om * w * (c1 - c2);
    }
    let h = 2.0 * PI / n as f64;
    Ok(acc.map(|v| v * h))
}

/// x-integrals of the four two-pair integrands at time `t`, rows `(S₁,S₂)` and `(Ŝ₁,Ŝ₂)`.
pub fn two_pair_slice(t: f64, d: &DarbouxData, n: usize) -> Result<[C64; 8]> {
    let om = d.a;
    let xs = grid(n);
    let p = SpectralField::from_values(
        xs.iter()
            .map(|&x| two_pair_ratio(t, x, d))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let pxx = p.derivative(2);
    let mut acc = [C64::default(); 8];
    for ((&x, &pv), &pxv) in xs.iter().zip(p.values()).zip(pxx.values()) {
        let s = s_fields(t, x, d)?;
        for (j, (a1, a2)) in [s.s, s.s_hat].into_iter().enumerate() {
            let (b1, b2) = (a1 * a1, a2 * a2);
            acc[4 * j] += om * om * (b2 * pxv - b1 * pxv.conj());
            acc[4 * j + 1] += om * om * (b1 * pv.conj() - b2 * pv);
            acc[4 * j + 2] += om * (b2 - b1);
            acc[4 * j + 3] += I * om * (b2 + b1);
        }
    }
    let h = 2.0 * PI / n as f64;
    Ok(acc.map(|v| v * h))
}

fn one_pair_window(d: &DarbouxData, quad: &QuadratureSpec) -> (f64, f64, usize) {
    let rate = 2.0 * d.sigma;
    let c = d.rho / rate;
    let half = quad.t_max_factor / rate;
    (
        c - half,
        c + half,
        (2.0 * quad.t_max_factor).ceil() as usize,
    )
}

fn two_pair_window(d: &DarbouxData, quad: &QuadratureSpec) -> Result<(f64, f64, usize)> {
    let (sh, _, _) = d.hat()?;
    let rate = (2.0 * d.sigma).min(4.0 * sh);
    let c1 = d.rho / (2.0 * d.sigma);
    let c2 = d.rho_hat / (4.0 * sh);
    let lo = c1.min(c2) - quad.t_max_factor / rate;
    let hi = c1.max(c2) + quad.t_max_factor / rate;
    Ok((lo, hi, ((hi - lo) * rate).ceil() as usize))
}

/// Raw complex one-pair integrals for arbitrary Bäcklund data, no refinement.
pub fn one_pair_integrals(d: &DarbouxData, quad: &QuadratureSpec) -> Result<[C64; 3]> {
    quad.validate()?;
    let (lo, hi, panels) = one_pair_window(d, quad);
    let rule = gl_rule(quad.nodes_per_unit)?;
    integrate_t(lo, hi, panels, &rule, |t| one_pair_slice(t, d, quad.x_grid))
}

/// Raw complex two-pair integrals, row-major 2×4.
pub fn two_pair_integrals(d: &DarbouxData, quad: &QuadratureSpec) -> Result<[C64; 8]> {
    quad.validate()?;
    let (lo, hi, panels) = two_pair_window(d, quad)?;
    let rule = gl_rule(quad.nodes_per_unit)?;
    integrate_t(lo, hi, panels, &rule, |t| two_pair_slice(t, d, quad.x_grid))
}

fn rel_change(a: &[C64], b: &[C64]) -> f64 {
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Integrate, then redo with doubled window and doubled grid; fail if either moves the result.
fn certified<const K: usize>(
    what: &str,
    quad: &QuadratureSpec,
    window: (f64, f64, usize),
    f: impl Fn(&QuadratureSpec) -> Result<[C64; K]>,
) -> Result<([f64; K], QuadratureMeta)> {
    let base = f(quad)?;
    let wide = f(&quad.doubled_window())?;
    let fine = f(&quad.doubled_grid())?;
    let scale = 1.0 + base.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let meta = QuadratureMeta {
        t_lo: window.0,
        t_hi: window.1,
        panels: window.2,
        nodes_per_unit: quad.nodes_per_unit,
        x_grid: quad.x_grid,
        refine_window: rel_change(&base, &wide),
        refine_grid: rel_change(&base, &fine),
        imag_residue: base.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / scale,
    };
    if meta.estimated_error() >= CERTIFICATE_TOL {
        return Err(Error::Convergence {
            what: format!("{what} quadrature (refinement table: window, grid)"),
            history: vec![meta.refine_window, meta.refine_grid],
        });
    }
    if meta.imag_residue >= IMAG_TOL {
        return Err(Error::Accuracy(format!(
            "{what}: imaginary residue {:e} in a real integral",
            meta.imag_residue
        )));
    }
    Ok((base.map(|v| v.re), meta))
}

/// `M^(1), M^(2), M^(3)` with their quadrature certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnePairMelnikov {
    pub omega: f64,
    pub m: [f64; 3],
    pub delta_gamma: f64,
    pub quadrature: QuadratureMeta,
}

impl OnePairMelnikov {
    /// `ωΔγ / (2 sin(Δγ/2))`, the ratio `β cos γ / α` forced by `d̃ = 0`.
    pub fn phase_ratio(&self) -> f64 {
        phase_ratio(self.omega, self.delta_gamma)
    }

    pub fn kappa(&self) -> Result<f64> {
        let s = (0.5 * self.delta_gamma).sin();
        let den = 2.0 * self.m[0] * s;
        if den.abs() < SINGULAR_TOL {
            return Err(Error::Singular(format!(
                "2M^(1) sin(Δγ/2) = {den:e} at ω = {}",
                self.omega
            )));
        }
        Ok(-(2.0 * self.m[1] * s + self.m[2] * self.omega * self.delta_gamma) / den)
    }

    /// `M₁ = M^(1) + αM^(2) + β cos γ M^(3)`.
    pub fn m1(&self, alpha: f64, beta: f64, gamma: f64) -> f64 {
        self.m[0] + alpha * self.m[1] + beta * gamma.cos() * self.m[2]
    }
}

pub fn phase_ratio(omega: f64, delta_gamma: f64) -> f64 {
    omega * delta_gamma / (2.0 * (0.5 * delta_gamma).sin())
}

/// One-pair Melnikov integrals at `a = ω` on the even orbit.
pub fn melnikov_one_pair(p: &Params, quad: &QuadratureSpec) -> Result<OnePairMelnikov> {
    let d = DarbouxData::new(p.omega, 0.0, 0.0)?.even(false);
    melnikov_one_pair_for(&d, quad)
}

/// Same for arbitrary Bäcklund data (`ρ`, `ϑ`); `a` plays the role of `ω`.
pub fn melnikov_one_pair_for(d: &DarbouxData, quad: &QuadratureSpec) -> Result<OnePairMelnikov> {
    let window = one_pair_window(d, quad);
    let (m, quadrature) = certified("one-pair Melnikov", quad, window, |q| {
        one_pair_integrals(d, q)
    })?;
    Ok(OnePairMelnikov {
        omega: d.a,
        m,
        delta_gamma: -4.0 * d.theta0,
        quadrature,
    })
}

/// Closed-form point of the two-pair surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub chi_tilde: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// `M_j^(l)` (row j, column l) with their quadrature certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPairMelnikov {
    pub omega: f64,
    pub delta_rho: f64,
    pub m: [[f64; 4]; 2],
    pub delta_gamma: f64,
    pub quadrature: QuadratureMeta,
}

impl TwoPairMelnikov {
    pub fn phase_ratio(&self) -> f64 {
        phase_ratio(self.omega, self.delta_gamma)
    }

    /// `M_j = M_j^(1) + αM_j^(2) + β cos γ M_j^(3) + β sin γ M_j^(4)`.
    pub fn mj(&self, j: usize, alpha: f64, beta: f64, gamma: f64) -> f64 {
        let r = &self.m[j];
        r[0] + alpha * r[1] + beta * gamma.cos() * r[2] + beta * gamma.sin() * r[3]
    }

    /// `χ̃`, then `α = 1/χ̃`, `β cos γ = αc`, and `β sin γ` from the first row.
    pub fn surface(&self) -> Result<SurfacePoint> {
        let m = &self.m;
        let s = (0.5 * self.delta_gamma).sin();
        if s.abs() < SINGULAR_TOL {
            return Err(Error::Singular(format!("sin(Δ̃γ/2) = {s:e}")));
        }
        let c = self.phase_ratio();
        let den = m[1][0] * m[0][3] - m[0][0] * m[1][3];
        if den.abs() < SINGULAR_TOL || m[0][3].abs() < SINGULAR_TOL {
            return Err(Error::Singular(format!(
                "two-pair denominators ({den:e}, M₁^(4) = {:e}) at ω = {}, Δρ = {}",
                m[0][3], self.omega, self.delta_rho
            )));
        }
        let chi = ((m[0][1] * m[1][3] - m[1][1] * m[0][3])
            + c * (m[0][2] * m[1][3] - m[1][2] * m[0][3]))
            / den;
        if chi.abs() < SINGULAR_TOL {
            return Err(Error::Singular(format!("χ̃ = {chi:e}")));
        }
        let alpha = 1.0 / chi;
        let bc = alpha * c;
        let bs = -(m[0][0] + alpha * (m[0][1] + c * m[0][2])) / m[0][3];
        Ok(SurfacePoint {
            chi_tilde: chi,
            alpha,
            beta: bc.hypot(bs),
            gamma: bs.atan2(bc),
        })
    }
}

/// Bäcklund data for the two-pair integrals in the gauge `ρ = 0`.
pub fn two_pair_data(omega: f64, delta_rho: f64) -> Result<DarbouxData> {
    two_pair_data_gauge(omega, delta_rho, 0.0)
}

/// Same with `ρ` free: `ρ̂ = 2σ̂ρ/σ − Δρ`.
pub fn two_pair_data_gauge(omega: f64, delta_rho: f64, rho: f64) -> Result<DarbouxData> {
    let d = DarbouxData::new(omega, rho, 0.0)?.even(false);
    let (sh, _, _) = d.hat()?;
    d.with_second(2.0 * sh * rho / d.sigma - delta_rho, 0.0)?
        .even_hat(false)
}

pub fn melnikov_two_pairs(
    p: &Params,
    delta_rho: f64,
    quad: &QuadratureSpec,
) -> Result<TwoPairMelnikov> {
    melnikov_two_pairs_for(&two_pair_data(p.omega, delta_rho)?, quad)
}

pub fn melnikov_two_pairs_for(d: &DarbouxData, quad: &QuadratureSpec) -> Result<TwoPairMelnikov> {
    let (sh, _, th0h) = d.hat()?;
    let window = two_pair_window(d, quad)?;
    let (m, quadrature) = certified("two-pair Melnikov", quad, window, |q| {
        two_pair_integrals(d, q)
    })?;
    Ok(TwoPairMelnikov {
        omega: d.a,
        delta_rho: 2.0 * sh * d.rho / d.sigma - d.rho_hat,
        m: [[m[0], m[1], m[2], m[3]], [m[4], m[5], m[6], m[7]]],
        delta_gamma: -4.0 * (d.theta0 + th0h),
        quadrature,
    })
}

/// One row of a κ or χ̃ table; `flag` is set when the point is singular or uncertified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelnikovReport {
    pub omega: f64,
    pub delta_rho: Option<f64>,
    pub m1: Option<[f64; 3]>,
    pub mjl: Option<[[f64; 4]; 2]>,
    pub kappa: Option<f64>,
    pub chi_tilde: Option<f64>,
    pub alpha: Option<f64>,
    pub beta_out: Option<f64>,
    pub gamma: Option<f64>,
    pub delta_gamma: f64,
    pub quadrature: Option<QuadratureMeta>,
    pub flag: Option<String>,
}

impl MelnikovReport {
    fn empty(omega: f64, delta_rho: Option<f64>, delta_gamma: f64) -> Self {
        MelnikovReport {
            omega,
            delta_rho,
            m1: None,
            mjl: None,
            kappa: None,
            chi_tilde: None,
            alpha: None,
            beta_out: None,
            gamma: None,
            delta_gamma,
            quadrature: None,
            flag: None,
        }
    }
}

/// `Δγ = −4ϑ₀` at `a = ω`.
pub fn delta_gamma_one(omega: f64) -> f64 {
    -4.0 * (omega * omega - 0.25).sqrt().atan2(0.5)
}

/// `Δ̃γ = −4(ϑ₀ + ϑ̂₀)` at `a = ω`.
pub fn delta_gamma_two(omega: f64) -> f64 {
    delta_gamma_one(omega) - 4.0 * (omega * omega - 1.0).sqrt().atan2(1.0)
}

/// `(ω, κ(ω), α = 1/κ)` over a grid; singular or uncertified points are flagged, not dropped.
pub fn kappa_curve(omega_grid: &[f64], quad: &QuadratureSpec) -> Vec<MelnikovReport> {
    omega_grid
        .par_iter()
        .map(|&om| {
            let mut r = MelnikovReport::empty(om, None, delta_gamma_one(om));
            let mel = match melnikov_one_pair(&Params::new(om, 0.0, 0.0, 0.0), quad) {
                Ok(m) => m,
                Err(e) => {
                    r.flag = Some(e.to_string());
                    return r;
                }
            };
            r.m1 = Some(mel.m);
            r.quadrature = Some(mel.quadrature);
            match mel.kappa() {
                Ok(k) => {
                    r.kappa = Some(k);
                    if k.abs() < SINGULAR_TOL {
                        r.flag = Some(format!("κ = {k:e}, α = 1/κ undefined"));
                    } else {
                        r.alpha = Some(1.0 / k);
                    }
                }
                Err(e) => r.flag = Some(e.to_string()),
            }
            r
        })
        .collect()
}

/// `(ω, Δρ, χ̃, α, β)` over the product grid, ω-major.
pub fn surface_two_pairs(
    omega_grid: &[f64],
    delta_rho_grid: &[f64],
    quad: &QuadratureSpec,
) -> Vec<MelnikovReport> {
    let pts: Vec<(f64, f64)> = omega_grid
        .iter()
        .flat_map(|&o| delta_rho_grid.iter().map(move |&r| (o, r)))
        .collect();
    pts.par_iter()
        .map(|&(om, dr)| {
            let mut r = MelnikovReport::empty(om, Some(dr), f64::NAN);
            if om > 1.0 {
                r.delta_gamma = delta_gamma_two(om);
            }
            let mel = match melnikov_two_pairs(&Params::new(om, 0.0, 0.0, 0.0), dr, quad) {
                Ok(m) => m,
                Err(e) => {
                    r.flag = Some(e.to_string());
                    return r;
                }
            };
            r.mjl = Some(mel.m);
            r.quadrature = Some(mel.quadrature);
            match mel.surface() {
                Ok(s) => {
                    r.chi_tilde = Some(s.chi_tilde);
                    r.alpha = Some(s.alpha);
                    r.beta_out = Some(s.beta);
                    r.gamma = Some(s.gamma);
                    if !(s.alpha > 0.0 && s.alpha * om < s.beta) {
                        r.flag = Some(format!(
                            "outside the admissible region: α = {}, αω = {}, β = {}",
                            s.alpha,
                            s.alpha * om,
                            s.beta
                        ));
                    }
                }
                Err(e) => r.flag = Some(e.to_string()),
            }
            r
        })
        .collect()
}

/// `d̃ = 2ω[αωθ₁ + β(sin θ₀ − sin(θ₀ + θ₁))]`.
pub fn second_distance(theta0: f64, theta1: f64, p: &Params) -> f64 {
    2.0 * p.omega * (p.alpha * p.omega * theta1 + p.beta * (theta0.sin() - (theta0 + theta1).sin()))
}

/// `ℋ(j, θ₀) − ℋ(j, θ₀ + θ₁)`; independent of `j`.
pub fn second_distance_hamiltonian(theta0: f64, theta1: f64, p: &Params) -> f64 {
    fish_hamiltonian(0.0, theta0, p) - fish_hamiltonian(0.0, theta0 + theta1, p)
}

/// Phase of the orbit on entry to the fish when the plane wave sits at `−γ`: `θ⁰(0) = −γ − Δγ/2`.
pub fn entry_phase(gamma: f64, delta_gamma: f64) -> f64 {
    -gamma - 0.5 * delta_gamma
}

/// A common zero of the Melnikov function(s) and `d̃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceSample {
    pub omega: f64,
    pub delta_rho: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `(M₁, d̃)` or `(M₁, M₂, d̃)`.
    pub residuals: Vec<f64>,
    /// Frobenius condition number of the finite-difference Jacobian.
    pub condition: f64,
    pub iterations: usize,
    pub note: Option<String>,
}

impl ExistenceSample {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

fn fd_jacobian<const K: usize>(f: &impl Fn(&[f64; K]) -> [f64; K], x: &[f64; K]) -> [[f64; K]; K] {
    let mut jac = [[0.0; K]; K];
    for c in 0..K {
        let h = 1e-6 * (1.0 + x[c].abs());
        let (mut xp, mut xm) = (*x, *x);
        xp[c] += h;
        xm[c] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        for r in 0..K {
            jac[r][c] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    jac
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve<const K: usize>(mut a: [[f64; K]; K], mut b: [f64; K]) -> Option<[f64; K]> {
    for c in 0..K {
        let piv = (c..K).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..K {
            let f = a[r][c] / a[c][c];
            for k in c..K {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; K];
    for r in (0..K).rev() {
        let s: f64 = (r + 1..K).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn frobenius_condition<const K: usize>(a: &[[f64; K]; K]) -> f64 {
    let norm = |m: &[[f64; K]; K]| m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let mut inv = [[0.0; K]; K];
    for c in 0..K {
        let mut e = [0.0; K];
        e[c] = 1.0;
        match solve(*a, e) {
            Some(col) => (0..K).for_each(|r| inv[r][c] = col[r]),
            None => return f64::INFINITY,
        }
    }
    norm(a) * norm(&inv)
}

/// Damped Newton with step halving on `‖F‖`; returns the root and the iteration count.
fn damped_newton<const K: usize>(
    f: impl Fn(&[f64; K]) -> [f64; K],
    mut x: [f64; K],
    tol: f64,
) -> Result<([f64; K], usize)> {
    let norm = |v: &[f64; K]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut fx = f(&x);
    let mut history = vec![norm(&fx)];
    for it in 0..60 {
        if norm(&fx) < tol {
            return Ok((x, it));
        }
        let jac = fd_jacobian(&f, &x);
        let step = solve(jac, fx.map(|v| -v))
            .ok_or_else(|| Error::Singular("Jacobian of the existence system".into()))?;
        let mut lam = 1.0;
        loop {
            let mut trial = x;
            for (t, s) in trial.iter_mut().zip(step) {
                *t += lam * s;
            }
            let ft = f(&trial);
            if norm(&ft) < norm(&fx) || lam < 1e-6 {
                x = trial;
                fx = ft;
                break;
            }
            lam *= 0.5;
        }
        history.push(norm(&fx));
    }
    if norm(&fx) < tol {
        return Ok((x, 60));
    }
    Err(Error::Convergence {
        what: "existence-surface Newton".into(),
        history,
    })
}

/// Root `(α, γ)` of `(M₁, d̃)` at fixed `β`, seeded from `α = 1/κ`.
pub fn solve_one_pair(mel: &OnePairMelnikov, beta: f64) -> Result<ExistenceSample> {
    let om = mel.omega;
    let dg = mel.delta_gamma;
    let kappa = mel.kappa()?;
    let alpha0 = 1.0 / kappa;
    let cosg = alpha0 * mel.phase_ratio() / beta;
    if !(cosg.abs() <= 1.0) {
        return Err(Error::Domain(format!(
            "no root at ω = {om}, β = {beta}: β cos γ would need |cos γ| = {:.4} > 1",
            cosg.abs()
        )));
    }
    let sys = |v: &[f64; 2]| {
        let p = Params::new(om, v[0], beta, 0.0);
        [
            mel.m1(v[0], beta, v[1]),
            second_distance(entry_phase(v[1], dg), dg, &p),
        ]
    };
    let (x, iterations) = damped_newton(sys, [alpha0, cosg.acos()], 1e-12)?;
    let res = sys(&x);
    let note = (x[0] * om >= beta).then(|| format!("αω = {} ≥ β", x[0] * om));
    Ok(ExistenceSample {
        omega: om,
        delta_rho: None,
        alpha: x[0],
        beta,
        gamma: x[1],
        residuals: res.to_vec(),
        condition: frobenius_condition(&fd_jacobian(&sys, &x)),
        iterations,
        note,
    })
}

/// Root `(α, β, γ)` of `(M₁, M₂, d̃)`, seeded from the closed-form surface point.
pub fn solve_two_pair(mel: &TwoPairMelnikov) -> Result<ExistenceSample> {
    let s = mel.surface()?;
    let om = mel.omega;
    let dg = mel.delta_gamma;
    let sys = |v: &[f64; 3]| {
        let p = Params::new(om, v[0], v[1], 0.0);
        [
            mel.mj(0, v[0], v[1], v[2]),
            mel.mj(1, v[0], v[1], v[2]),
            second_distance(entry_phase(v[2], dg), dg, &p),
        ]
    };
    let (x, iterations) = damped_newton(sys, [s.alpha, s.beta, s.gamma], 1e-10)?;
    let res = sys(&x);
    let note = (!(x[0] > 0.0 && x[0] * om < x[1])).then(|| {
        format!(
            "outside the admissible region: α = {}, αω = {}, β = {}",
            x[0],
            x[0] * om,
            x[1]
        )
    });
    Ok(ExistenceSample {
        omega: om,
        delta_rho: Some(mel.delta_rho),
        alpha: x[0],
        beta: x[1],
        gamma: x[2],
        residuals: res.to_vec(),
        condition: frobenius_condition(&fd_jacobian(&sys, &x)),
        iterations,
        note,
    })
}

/// Which family of existence roots to sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExistenceGrid {
    OnePair {
        omegas: Vec<f64>,
        beta: f64,
    },
    TwoPair {
        omegas: Vec<f64>,
        delta_rhos: Vec<f64>,
    },
}

/// Solves every grid point; failures come back as `Err` in place.
pub fn existence_surface_report(
    grid: &ExistenceGrid,
    quad: &QuadratureSpec,
) -> Vec<(f64, Option<f64>, Result<ExistenceSample>)> {
    match grid {
        ExistenceGrid::OnePair { omegas, beta } => omegas
            .par_iter()
            .map(|&om| {
                let r = melnikov_one_pair(&Params::new(om, 0.0, 0.0, 0.0), quad)
                    .and_then(|m| solve_one_pair(&m, *beta));
                (om, None, r)
            })
            .collect(),
        ExistenceGrid::TwoPair { omegas, delta_rhos } => {
            let pts: Vec<(f64, f64)> = omegas
                .iter()
                .flat_map(|&o| delta_rhos.iter().map(move |&r| (o, r)))
                .collect();
            pts.par_iter()
                .map(|&(om, dr)| {
                    let r = melnikov_two_pairs(&Params::new(om, 0.0, 0.0, 0.0), dr, quad)
                        .and_then(|m| solve_two_pair(&m));
                    (om, Some(dr), r)
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> QuadratureSpec {
        QuadratureSpec {
            t_max_factor: 30.0,
            nodes_per_unit: 16,
            x_grid: 64,
        }
    }

    #[test]
    fn delta_gamma_matches_data() {
        let d = DarbouxData::new(0.8, 0.0, 0.0).unwrap();
        assert!((delta_gamma_one(0.8) + 4.0 * d.theta0).abs() < 1e-15);
        let d = DarbouxData::new(1.2, 0.0, 0.0).unwrap();
        assert!((delta_gamma_two(1.2) + 4.0 * (d.theta0 + d.theta0_hat.unwrap())).abs() < 1e-15);
    }

    #[test]
    fn zero_shift_zero_distance() {
        let p = Params::new(0.8, 0.7, 2.0, 0.0);
        assert_eq!(second_distance(1.3, 0.0, &p), 0.0);
    }

    #[test]
    fn quadrature_spec_rejects_odd_grid() {
        let q = QuadratureSpec {
            x_grid: 63,
            ..QuadratureSpec::default()
        };
        assert!(q.validate().is_err());
    }

    #[test]
    fn one_pair_integrals_are_real() {
        let d = DarbouxData::new(0.8, 0.0, 0.0).unwrap().even(false);
        let m = one_pair_integrals(&d, &coarse()).unwrap();
        for v in m {
            assert!(v.im.abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn newton_solves_linear_system() {
        let a = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        let x = solve(a, [1.0, 2.0, 3.0]).unwrap();
        for r in 0..3 {
            let s: f64 = (0..3).map(|c| a[r][c] * x[c]).sum();
            assert!((s - [1.0, 2.0, 3.0][r]).abs() < 1e-14);
        }
        assert!(frobenius_condition(&a) > 1.0);
    }
}
