//! Dynamics on the invariant plane of spatially constant states.
//!
//! On the plane `q = √I e^{iθ}` and
//! `İ = ε(−2αI + 2β√I cos θ)`, `θ̇ = −2(I−ω²) − εβ sin θ/√I`.
//! Near the resonance circle `I = ω²` the rescaling `J = √ε j`, `τ = √ε t`
//! gives the "fish" system with Hamiltonian `ℋ = j² + 2ω(−αωθ + β sin θ)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;

/// `J = I − ω²` (or the rescaled `j`) and the unwrapped angle θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneState {
    pub j: f64,
    pub theta: f64,
}

/// `(dI/dt, dθ/dt)` for the full plane equations.
pub fn plane_rhs(s: PlaneState, p: &Params) -> Result<(f64, f64)> {
    let i = s.j + p.omega * p.omega;
    if i <= 0.0 {
        return Err(Error::Domain(format!("I = {i} must be positive")));
    }
    let r = i.sqrt();
    let di = p.epsilon * (-2.0 * p.alpha * i + 2.0 * p.beta * r * s.theta.cos());
    let dth = -2.0 * (i - p.omega * p.omega) - p.epsilon * p.beta * s.theta.sin() / r;
    Ok((di, dth))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    FocusOrigin,
    FocusP,
    SaddleQ,
    CenterPStar,
    SaddleQStar,
}

/// An equilibrium with closed-form and finite-difference eigenvalues.
///
/// For the ε-points `action` is `I`; for the starred points it is `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointInfo {
    pub kind: FixedPointKind,
    pub action: f64,
    pub theta: f64,
    pub eigen_closed: [C64; 2],
    pub eigen_numeric: [C64; 2],
    pub residual: f64,
}

impl FixedPointInfo {
    /// Largest mismatch between the two eigenvalue sets (best pairing).
    pub fn eigen_mismatch(&self) -> f64 {
        pair_distance(self.eigen_closed, self.eigen_numeric)
    }
}

pub fn pair_distance(a: [C64; 2], b: [C64; 2]) -> f64 {
    let d1 = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let d2 = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    d1.min(d2)
}

/// Eigenvalues of a real 2×2 matrix.
pub fn eig2(m: [[f64; 2]; 2]) -> [C64; 2] {
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = C64::new(half_tr * half_tr - det, 0.0).sqrt();
    [half_tr + disc, half_tr - disc]
}

// Cartesian form of the plane equation: q̇ = −2i(|q|²−ω²)q + ε(β − αq).
fn cartesian_rhs(q: C64, p: &Params) -> C64 {
    let r = q.norm_sqr() - p.omega * p.omega;
    C64::new(0.0, -2.0 * r) * q + p.epsilon * (p.beta - p.alpha * q)
}

fn cartesian_jacobian(q: C64, p: &Params) -> [[f64; 2]; 2] {
    let r = q.norm_sqr() - p.omega * p.omega;
    let mi2 = C64::new(0.0, -2.0);
    let du = mi2 * 2.0 * q.re * q + mi2 * r - p.epsilon * p.alpha;
    let dv = mi2 * 2.0 * q.im * q + mi2 * r * C64::i() - C64::i() * p.epsilon * p.alpha;
    [[du.re, dv.re], [du.im, dv.im]]
}

fn fd_jacobian(f: impl Fn(f64, f64) -> (f64, f64), x: f64, y: f64, h: f64) -> [[f64; 2]; 2] {
    let (a1, b1) = f(x + h, y);
    let (a0, b0) = f(x - h, y);
    let (c1, d1) = f(x, y + h);
    let (c0, d0) = f(x, y - h);
    [
        [(a1 - a0) / (2.0 * h), (c1 - c0) / (2.0 * h)],
        [(b1 - b0) / (2.0 * h), (d1 - d0) / (2.0 * h)],
    ]
}

fn newton_cartesian(seed: C64, p: &Params) -> Result<(C64, f64)> {
    let mut q = seed;
    let mut history = Vec::new();
    for _ in 0..60 {
        let f = cartesian_rhs(q, p);
        let res = f.norm();
        history.push(res);
        if res < 1e-14 {
            return Ok((q, res));
        }
        let m = cartesian_jacobian(q, p);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let du = (m[1][1] * f.re - m[0][1] * f.im) / det;
        let dv = (-m[1][0] * f.re + m[0][0] * f.im) / det;
        q -= C64::new(du, dv);
    }
    let res = cartesian_rhs(q, p).norm();
    if res < 1e-12 {
        return Ok((q, res));
    }
    Err(Error::Convergence {
        what: "fixed point Newton".into(),
        history,
    })
}

fn csqrt(x: f64) -> C64 {
    C64::new(x, 0.0).sqrt()
}

/// The three equilibria O_ε, P_ε, Q_ε, Newton-refined from their expansions.
pub fn fixed_points(p: &Params) -> Result<Vec<FixedPointInfo>> {
    if p.epsilon <= 0.0 {
        return Err(Error::Domain("fixed points need ε > 0".into()));
    }
    p.require_resonance()?;
    let (w, a, b, e) = (p.omega, p.alpha, p.beta, p.epsilon);
    let root = (b * b - a * a * w * w).sqrt();

    let seeds = [
        (
            FixedPointKind::FocusOrigin,
            e * e * b * b / (4.0 * w.powi(4)),
            1.0,
        ),
        (FixedPointKind::FocusP, w * w + e * root / (2.0 * w), -1.0),
        (FixedPointKind::SaddleQ, w * w - e * root / (2.0 * w), 1.0),
    ];

    let mut out = Vec::with_capacity(3);
    for (kind, i0, sign) in seeds {
        let c = (a * i0.sqrt() / b).clamp(-1.0, 1.0);
        let th0 = sign * c.acos();
        let (q, residual) = newton_cartesian(C64::from_polar(i0.sqrt(), th0), p)?;
        let i = q.norm_sqr();
        let theta = q.arg();
        let s = theta.sin();
        let ri = i.sqrt();
        let eigen_closed = match kind {
            FixedPointKind::FocusOrigin => {
                let d = C64::i() * csqrt(4.0 * (w * w - i).powi(2) - 4.0 * e * ri * b * s);
                [d - e * a, -d - e * a]
            }
            FixedPointKind::FocusP => {
                let d = C64::i() * e.sqrt() * csqrt(-4.0 * ri * b * s + e * (b * s / ri).powi(2));
                [d - e * a, -d - e * a]
            }
            _ => {
                let d = e.sqrt() * csqrt(4.0 * ri * b * s - e * (b * s / ri).powi(2));
                [d - e * a, -d - e * a]
            }
        };
        let h = 1e-6 * q.norm().max(1e-3);
        let jac = fd_jacobian(
            |u, v| {
                let f = cartesian_rhs(C64::new(u, v), p);
                (f.re, f.im)
            },
            q.re,
            q.im,
            h,
        );
        out.push(FixedPointInfo {
            kind,
            action: i,
            theta,
            eigen_closed,
            eigen_numeric: eig2(jac),
            residual,
        });
    }
    Ok(out)
}

/// Right-hand side of the leading-order fish system in rescaled time.
pub fn fish_rhs(j: f64, theta: f64, p: &Params) -> (f64, f64) {
    (
        2.0 * (-p.alpha * p.omega * p.omega + p.beta * p.omega * theta.cos()),
        -2.0 * j,
    )
}

/// Center P_* and saddle Q_* of the leading-order system.
pub fn leading_fixed_points(p: &Params) -> Result<Vec<FixedPointInfo>> {
    let th = p.theta_star()?;
    let mag = 2.0 * p.omega.sqrt() * (p.beta.powi(2) - (p.alpha * p.omega).powi(2)).powf(0.25);
    let mk = |kind, theta: f64, eig: [C64; 2]| {
        let jac = fd_jacobian(|j, t| fish_rhs(j, t, p), 0.0, theta, 1e-6);
        let (r0, r1) = fish_rhs(0.0, theta, p);
        FixedPointInfo {
            kind,
            action: 0.0,
            theta,
            eigen_closed: eig,
            eigen_numeric: eig2(jac),
            residual: r0.abs().max(r1.abs()),
        }
    };
    Ok(vec![
        mk(
            FixedPointKind::CenterPStar,
            -th,
            [C64::new(0.0, mag), C64::new(0.0, -mag)],
        ),
        mk(
            FixedPointKind::SaddleQStar,
            th,
            [C64::new(mag, 0.0), C64::new(-mag, 0.0)],
        ),
    ])
}

/// `ℋ(j, θ) = j² + 2ω(−αωθ + β sin θ)`.
pub fn fish_hamiltonian(j: f64, theta: f64, p: &Params) -> f64 {
    j * j + 2.0 * p.omega * (-p.alpha * p.omega * theta + p.beta * theta.sin())
}

fn head_residual(theta: f64, th_star: f64, p: &Params) -> f64 {
    p.alpha * p.omega * (theta - th_star) - p.beta * (theta.sin() - th_star.sin())
}

/// The second intersection θ̂ of the singular level set with `j = 0`.
///
/// The residual is monotone on `(θ_* − 2π, −θ_*)` and changes sign there,
/// so plain bisection pins the root to rounding.
pub fn fish_head(p: &Params) -> Result<f64> {
    let ts = p.theta_star()?;
    let g = |t: f64| head_residual(t, ts, p);
    let (mut lo, mut hi) = (ts - 2.0 * PI, -ts);
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo < 0.0 && ghi > 0.0) {
        return Err(Error::Domain(format!(
            "no sign change for the fish head: g({lo}) = {glo}, g({hi}) = {ghi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = if g(lo).abs() < g(hi).abs() { lo } else { hi };
    if !(root > -1.5 * PI && root < 0.0) {
        return Err(Error::Domain(format!(
            "fish head {root} outside (−3π/2, 0)"
        )));
    }
    Ok(root)
}

/// `(φ^u_*(θ), φ^s_*(θ))`, the unstable and stable branches through Q_*.
pub fn separatrix_curves(theta: f64, p: &Params, delta_hat: f64) -> Result<(f64, f64)> {
    let ts = p.theta_star()?;
    let head = fish_head(p)?;
    if theta < head + delta_hat || theta > ts + 2.0 * PI {
        return Err(Error::Domain(format!(
            "θ = {theta} outside [θ̂ + δ̂, θ_* + 2π] = [{}, {}]",
            head + delta_hat,
            ts + 2.0 * PI
        )));
    }
    let rad = 2.0 * p.omega * head_residual(theta, ts, p);
    if rad < -1e-14 {
        return Err(Error::Domain(format!(
            "negative radicand {rad} at θ = {theta}"
        )));
    }
    let d = theta - ts;
    let sign = if d > 0.0 {
        1.0
    } else if d < 0.0 {
        -1.0
    } else {
        0.0
    };
    let u = -sign * rad.max(0.0).sqrt();
    Ok((u, -u))
}

/// Which form of the plane equations to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneSystem {
    /// `(J, θ)` in physical time.
    Full,
    /// `(j, θ)` in τ with the √ε corrections kept.
    Rescaled,
    /// `(j, θ)` in τ, leading order (Hamiltonian).
    Leading,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PlaneState>,
    /// Set when the integration stopped early at `I ≤ 0`.
    pub halted: Option<String>,
}

fn system_rhs(sys: PlaneSystem, s: PlaneState, p: &Params) -> Result<(f64, f64)> {
    match sys {
        PlaneSystem::Full => plane_rhs(s, p),
        PlaneSystem::Leading => Ok(fish_rhs(s.j, s.theta, p)),
        PlaneSystem::Rescaled => {
            let se = p.epsilon.sqrt();
            let i = p.omega * p.omega + se * s.j;
            if i <= 0.0 {
                return Err(Error::Domain(format!("I = {i} must be positive")));
            }
            let r = i.sqrt();
            Ok((
                2.0 * (-p.alpha * i + p.beta * r * s.theta.cos()),
                -2.0 * s.j - se * p.beta * s.theta.sin() / r,
            ))
        }
    }
}

/// Classic RK4 at fixed step `h` from `t0` to `t1`, recording every `stride` steps.
pub fn integrate_plane(
    start: PlaneState,
    t_span: (f64, f64),
    h: f64,
    stride: usize,
    sys: PlaneSystem,
    p: &Params,
) -> Trajectory {
    let (t0, t1) = t_span;
    let steps = ((t1 - t0) / h).round().max(0.0) as usize;
    let stride = stride.max(1);
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![start],
        halted: None,
    };
    let mut s = start;
    let add = |s: PlaneState, k: (f64, f64), c: f64| PlaneState {
        j: s.j + c * k.0,
        theta: s.theta + c * k.1,
    };
    for n in 0..steps {
        let step = || -> Result<PlaneState> {
            let k1 = system_rhs(sys, s, p)?;
            let k2 = system_rhs(sys, add(s, k1, 0.5 * h), p)?;
            let k3 = system_rhs(sys, add(s, k2, 0.5 * h), p)?;
            let k4 = system_rhs(sys, add(s, k3, h), p)?;
            Ok(PlaneState {
                j: s.j + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
                theta: s.theta + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
            })
        };
        match step() {
            Ok(next) => s = next,
            Err(e) => {
                traj.halted = Some(e.to_string());
                return traj;
            }
        }
        if (n + 1) % stride == 0 || n + 1 == steps {
            traj.times.push(t0 + (n + 1) as f64 * h);
            traj.states.push(s);
        }
    }
    traj
}

/// Polyline of the singular level set `ℋ = ℋ(0, θ_*)` (upper and lower branches).
pub fn fish_polyline(p: &Params, samples: usize, delta_hat: f64) -> Result<Vec<(f64, f64, f64)>> {
    let ts = p.theta_star()?;
    let head = fish_head(p)?;
    let (a, b) = (head + delta_hat, ts);
    let mut out = Vec::with_capacity(samples);
    for n in 0..samples {
        let th = a + (b - a) * n as f64 / (samples - 1).max(1) as f64;
        let (u, s) = separatrix_curves(th, p, delta_hat)?;
        out.push((th, u, s));
    }
    Ok(out)
}
