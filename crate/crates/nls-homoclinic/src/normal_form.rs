//! Quadratic normal form `g = f + K(f,f)` removing `Ñ₂ = 2ω[2(|f|²−⟨|f|²⟩) + (f²−⟨f²⟩)]`.
//!
//! `K(f,f) = Σ_{k+l≠0} [K₁ f̂_k f̂_l + K₂(k,l) f̂_k f̌_l + K₂(l,k) f̌_k f̂_l + K₃ f̌_k f̌_l] e^{i(k+l)x}`
//! with `f̌_k = conj f̂(−k)`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{index_of, SpectralField};
use crate::params::Params;

/// Denominators below this are treated as exceptional.
pub const EXCEPTIONAL_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModePairCoeffs {
    pub k: i64,
    pub l: i64,
    pub b: f64,
    pub sigma: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub sigma4: f64,
    #[serde(rename = "K")]
    pub big_k: C64,
    pub k1: C64,
    pub k2_kl: C64,
    pub k2_lk: C64,
    pub k3: C64,
}

#[derive(Debug, Clone, Copy)]
struct Sigmas {
    b: f64,
    s: f64,
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

fn sigmas(k: i64, l: i64, p: &Params) -> Sigmas {
    let (kf, lf) = (k as f64, l as f64);
    let w2 = p.omega * p.omega;
    Sigmas {
        b: -2.0 * w2,
        s: p.epsilon * (2.0 * kf * lf - p.alpha),
        s1: 2.0 * (kf * lf + w2),
        s2: 2.0 * (lf * lf + kf * lf - w2),
        s3: 2.0 * (kf * kf + kf * lf - w2),
        s4: 2.0 * (kf * kf + lf * lf + kf * lf - 3.0 * w2),
    }
}

fn check_pair(k: i64, l: i64) -> Result<()> {
    if k == 0 || l == 0 || k + l == 0 {
        return Err(Error::Domain(format!("mode pair ({k},{l}) excluded")));
    }
    Ok(())
}

fn guard(quantity: &'static str, value: f64, k: i64, l: i64) -> Result<f64> {
    if value.abs() < EXCEPTIONAL_THRESHOLD || !value.is_finite() {
        return Err(Error::Exceptional {
            quantity,
            value,
            k,
            l,
        });
    }
    Ok(value)
}

/// `U`, `V`, `W` and `|U|²−|V|²` of the reduced equation `U K + V K̄ = W`.
pub fn uvw(k: i64, l: i64, p: &Params) -> Result<(f64, C64, C64, f64)> {
    check_pair(k, l)?;
    let Sigmas {
        b,
        s,
        s1,
        s2,
        s3,
        s4,
    } = sigmas(k, l, p);
    let d1 = guard("d1", s1 * s1 + s * s - b * b, k, l)?;
    let d2 = guard("d2", s2 * s2 + s * s - b * b, k, l)?;
    let d3 = guard("d3", s3 * s3 + s * s - b * b, k, l)?;
    let d4 = guard("d4", s4 * s4 + s * s - b * b, k, l)?;
    let u = b * b / d1 + b * b / d2 + b * b / d3 + (s4 * s4 + s * s) / d4;
    let v = -b * C64::new(s1, s) / d1 + b * C64::new(s2, -s) / d2 + b * C64::new(s3, -s) / d3
        - b * C64::new(s4, s) / d4;
    let w = 2.0 * p.omega * (C64::new(s4 * s4 + s * s, 0.0) - b * C64::new(s4, s)) / d4;
    let det = u * u - v.norm_sqr();
    Ok((u, v, w, det))
}

pub fn solve_coeffs(k: i64, l: i64, p: &Params) -> Result<ModePairCoeffs> {
    let (u, v, w, det) = uvw(k, l, p)?;
    let det = guard("|U|²−|V|²", det, k, l)?;
    let Sigmas {
        b,
        s,
        s1,
        s2,
        s3,
        s4,
    } = sigmas(k, l, p);
    let kk = (w * u - w.conj() * v) / det;
    let kc = kk.conj();
    let d1 = s1 * s1 + s * s - b * b;
    let d2 = s2 * s2 + s * s - b * b;
    let d3 = s3 * s3 + s * s - b * b;
    let d4 = s4 * s4 + s * s - b * b;
    let two_w = C64::new(2.0 * p.omega, 0.0);
    Ok(ModePairCoeffs {
        k,
        l,
        b,
        sigma: s,
        sigma1: s1,
        sigma2: s2,
        sigma3: s3,
        sigma4: s4,
        big_k: kk,
        k1: (b * kc - C64::new(s1, -s) * kk) / d1,
        k2_kl: (-b * kk - C64::new(s2, -s) * kc) / d2,
        k2_lk: (-b * kk - C64::new(s3, -s) * kc) / d3,
        k3: (C64::new(s4, -s) * (kk - two_w) - b * (kc - two_w)) / d4,
    })
}

/// Residuals of the four homological equations, using evenness `K_j(−k,−l) = K_j(k,l)`.
pub fn residuals(c: &ModePairCoeffs, omega: f64) -> [C64; 4] {
    let b = c.b;
    let s = c.sigma;
    let w2 = C64::new(2.0 * omega, 0.0);
    [
        C64::new(c.sigma1, s) * c.k1 + b * c.k2_kl + b * c.k2_lk + b * c.k3.conj() + w2,
        -b * c.k1 + C64::new(c.sigma2, s) * c.k2_kl + b * c.k2_lk.conj() + b * c.k3 + w2,
        -b * c.k1 + b * c.k2_kl.conj() + C64::new(c.sigma3, s) * c.k2_lk + b * c.k3 + w2,
        b * c.k1.conj() - b * c.k2_kl - b * c.k2_lk + C64::new(c.sigma4, s) * c.k3,
    ]
}

pub fn max_residual(c: &ModePairCoeffs, omega: f64) -> f64 {
    residuals(c, omega)
        .iter()
        .map(|r| r.norm())
        .fold(0.0, f64::max)
}

/// `D = b/(σ₁−b) − b/(σ₂+b) − b/(σ₃+b) + σ₄/(σ₄−b)`, built from the ε-free parts.
pub fn denominator_d(k: i64, l: i64, omega: f64) -> f64 {
    let p = Params::new(omega, 0.0, 1.0, 0.0);
    let Sigmas {
        b, s1, s2, s3, s4, ..
    } = sigmas(k, l, &p);
    b / (s1 - b) - b / (s2 + b) - b / (s3 + b) + s4 / (s4 - b)
}

/// First-order expansion of `K` in ε.
pub fn leading_order_k(k: i64, l: i64, p: &Params) -> Result<C64> {
    check_pair(k, l)?;
    let Sigmas {
        b, s, s1, s2, s3, ..
    } = sigmas(k, l, p);
    let d = guard("D", denominator_d(k, l, p.omega), k, l)?;
    let e1 = guard("σ₁²−b²", s1 * s1 - b * b, k, l)?;
    let e2 = guard("σ₂²−b²", s2 * s2 - b * b, k, l)?;
    let e3 = guard("σ₃²−b²", s3 * s3 - b * b, k, l)?;
    let sum = 1.0 / e1 + 1.0 / e2 + 1.0 / e3;
    Ok(2.0 * p.omega * (C64::new(1.0, b * s * sum / d)))
}

/// Coefficients for all pairs with `|k|, |l| ≤ k_max`.
#[derive(Debug, Clone)]
pub struct NormalFormTable {
    k_max: i64,
    omega: f64,
    coeffs: Vec<Option<ModePairCoeffs>>,
}

impl NormalFormTable {
    pub fn build(p: &Params, k_max: i64) -> Result<Self> {
        if k_max < 1 {
            return Err(Error::Config("k_max must be positive".into()));
        }
        let width = 2 * k_max + 1;
        let coeffs = (0..width * width)
            .into_par_iter()
            .map(|idx| {
                let k = idx / width - k_max;
                let l = idx % width - k_max;
                if k == 0 || l == 0 || k + l == 0 {
                    Ok(None)
                } else {
                    solve_coeffs(k, l, p).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NormalFormTable {
            k_max,
            omega: p.omega,
            coeffs,
        })
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn get(&self, k: i64, l: i64) -> Option<&ModePairCoeffs> {
        if k.abs() > self.k_max || l.abs() > self.k_max {
            return None;
        }
        let width = 2 * self.k_max + 1;
        self.coeffs[((k + self.k_max) * width + l + self.k_max) as usize].as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModePairCoeffs> {
        self.coeffs.iter().flatten()
    }

    pub fn max_residual(&self) -> f64 {
        self.iter()
            .map(|c| max_residual(c, self.omega))
            .fold(0.0, f64::max)
    }

    fn check_grid(&self, n: usize) -> Result<()> {
        if 4 * self.k_max > n as i64 {
            return Err(Error::Aliasing(format!(
                "k_max = {} exceeds N/4 for N = {n}",
                self.k_max
            )));
        }
        Ok(())
    }

    /// `K(f,f)`, gathered per output mode. The `+N/2` output mode is not representable and is dropped.
    pub fn quadratic(&self, f: &SpectralField) -> Result<SpectralField> {
        let n = f.grid_size();
        self.check_grid(n)?;
        let km = self.k_max;
        let fh = |k: i64| f.modes()[index_of(k, n)];
        let fc = |k: i64| f.modes()[index_of(-k, n)].conj();
        let half = n as i64 / 2;
        let out: Vec<C64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let m = crate::field::wavenumber(i, n);
                let mut acc = C64::new(0.0, 0.0);
                if m == 0 {
                    return acc;
                }
                let lo = (-km).max(m - km);
                let hi = km.min(m + km);
                for k in lo..=hi {
                    let l = m - k;
                    if let Some(c) = self.get(k, l) {
                        acc += c.k1 * fh(k) * fh(l)
                            + c.k2_kl * fh(k) * fc(l)
                            + c.k2_lk * fc(k) * fh(l)
                            + c.k3 * fc(k) * fc(l);
                    }
                }
                // m = −N/2 only collects the pair k = l = −N/4 when k_max = N/4
                debug_assert!(m.abs() <= half);
                acc
            })
            .collect();
        SpectralField::from_modes(out)
    }

    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        Ok(f + &self.quadratic(f)?)
    }

    /// Solves `g = f + K(f,f)` by `f ← g − K(f,f)`.
    pub fn invert(&self, g: &SpectralField, tol: f64, max_iter: usize) -> Result<SpectralField> {
        let mut f = g.clone();
        let mut history = Vec::new();
        for _ in 0..max_iter {
            let next = g - &self.quadratic(&f)?;
            let step = (&next - &f).sobolev_norm(1);
            history.push(step);
            f = next;
            if !step.is_finite() || (history.len() > 3 && step > 2.0 * history[0].max(1e-300)) {
                break;
            }
            if step <= tol * (1.0 + g.sobolev_norm(1)) {
                return Ok(f);
            }
        }
        Err(Error::Convergence {
            what: "normal form inversion".into(),
            history,
        })
    }

    /// Largest observed `‖K(f,f)‖₁/‖f‖₁²` over deterministic probe fields.
    pub fn bilinear_norm_estimate(&self, n: usize, probes: usize, seed: u64) -> Result<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let mut modes = vec![C64::new(0.0, 0.0); n];
            for k in 1..=self.k_max.min(8) {
                let decay = 1.0 / (k * k) as f64;
                for kk in [k, -k] {
                    modes[index_of(kk, n)] =
                        decay * C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                }
            }
            let f = SpectralField::from_modes(modes)?;
            let nf = f.sobolev_norm(1);
            worst = worst.max(self.quadratic(&f)?.sobolev_norm(1) / (nf * nf));
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .iter()
            .map(|c| {
                (
                    format!("{},{}", c.k, c.l),
                    serde_json::to_value(c).expect("plain data"),
                )
            })
            .collect();
        serde_json::Value::Object(map)
    }
}

pub fn default_k_max(n: usize) -> i64 {
    (n / 4) as i64
}

pub fn apply_transform(f: &SpectralField, p: &Params, k_max: i64) -> Result<SpectralField> {
    NormalFormTable::build(p, k_max)?.apply(f)
}

pub fn invert_transform(g: &SpectralField, p: &Params, k_max: i64) -> Result<SpectralField> {
    NormalFormTable::build(p, k_max)?.invert(g, 1e-13, 200)
}

/// Per-ω minima of the scanned denominators.
#[derive(Debug, Clone, Serialize)]
pub struct DenominatorRow {
    pub omega: f64,
    pub min_d: f64,
    pub min_sigma_b: f64,
    pub min_uv: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DenominatorScan {
    pub rows: Vec<DenominatorRow>,
    /// Located zeros `(ω, quantity, k, l)` of any scanned denominator.
    pub flagged: Vec<(f64, String, i64, i64)>,
    /// `max_ω |D(k_max, k_max) − 1|`.
    pub edge_deviation: f64,
}

fn scanned(k: i64, l: i64, omega: f64, p: &Params) -> [f64; 6] {
    let q = Params { omega, ..*p };
    let Sigmas {
        b, s1, s2, s3, s4, ..
    } = sigmas(k, l, &q);
    let uv = uvw(k, l, &q).map(|r| r.3).unwrap_or(0.0);
    [
        denominator_d(k, l, omega),
        s1 * s1 - b * b,
        s2 * s2 - b * b,
        s3 * s3 - b * b,
        s4 * s4 - b * b,
        uv,
    ]
}

const SCAN_NAMES: [&str; 6] = ["D", "σ₁²−b²", "σ₂²−b²", "σ₃²−b²", "σ₄²−b²", "|U|²−|V|²"];

/// Scans `|k|, |l| ≤ k_max` across `omega_grid` (ascending) for vanishing denominators.
pub fn denominator_scan(p: &Params, omega_grid: &[f64], k_max: i64) -> Result<DenominatorScan> {
    if omega_grid.iter().any(|&w| w <= 0.5 || w >= 1.5) {
        return Err(Error::Domain("ω grid must lie in (1/2, 3/2)".into()));
    }
    // (k,l) and (−k,−l) give identical values
    let pairs: Vec<(i64, i64)> = (1..=k_max)
        .flat_map(|k| (-k_max..=k_max).map(move |l| (k, l)))
        .filter(|&(k, l)| l != 0 && k + l != 0)
        .collect();

    let per_pair: Vec<(Vec<[f64; 6]>, Vec<(f64, String, i64, i64)>)> = pairs
        .par_iter()
        .map(|&(k, l)| {
            let vals: Vec<[f64; 6]> = omega_grid.iter().map(|&w| scanned(k, l, w, p)).collect();
            let mut flags = Vec::new();
            for q in 0..6 {
                for i in 0..vals.len() {
                    let a = vals[i][q];
                    if a == 0.0 {
                        flags.push((omega_grid[i], SCAN_NAMES[q].to_string(), k, l));
                    } else if i + 1 < vals.len() && a * vals[i + 1][q] < 0.0 {
                        // D has poles where σ₁ = b etc; only sign changes that are genuine roots count
                        let g = |w: f64| scanned(k, l, w, p)[q];
                        if let Some(root) = bisect(g, omega_grid[i], omega_grid[i + 1]) {
                            flags.push((root, SCAN_NAMES[q].to_string(), k, l));
                        }
                    }
                }
            }
            (vals, flags)
        })
        .collect();

    let rows = omega_grid
        .iter()
        .enumerate()
        .map(|(i, &omega)| {
            let mut row = DenominatorRow {
                omega,
                min_d: f64::INFINITY,
                min_sigma_b: f64::INFINITY,
                min_uv: f64::INFINITY,
            };
            for (vals, _) in &per_pair {
                let v = vals[i];
                row.min_d = row.min_d.min(v[0].abs());
                row.min_sigma_b = v[1..5].iter().fold(row.min_sigma_b, |m, x| m.min(x.abs()));
                row.min_uv = row.min_uv.min(v[5].abs());
            }
            row
        })
        .collect();

    let mut flagged: Vec<_> = per_pair.into_iter().flat_map(|(_, f)| f).collect();
    flagged.sort_by(|a, b| a.0.total_cmp(&b.0));

    let edge_deviation = omega_grid
        .iter()
        .map(|&w| (denominator_d(k_max, k_max, w) - 1.0).abs())
        .fold(0.0, f64::max);

    Ok(DenominatorScan {
        rows,
        flagged,
        edge_deviation,
    })
}

/// Bisection that rejects sign changes across poles (|g| growing as the bracket shrinks).
fn bisect(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Option<f64> {
    let mut ga = g(a);
    let start = ga.abs().max(g(b).abs());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return Some(m);
        }
        if ga * gm < 0.0 {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    let m = 0.5 * (a + b);
    if g(m).abs() <= start {
        Some(m)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_epsilon_reduction() {
        let p = Params::new(0.8, 1.0, 2.0, 0.0);
        let c = solve_coeffs(1, 2, &p).unwrap();
        assert!((c.big_k - C64::new(1.6, 0.0)).norm() < 1e-14);
        assert!(c.k3.norm() < 1e-14);
        assert!((c.k1 - C64::new(-0.4, 0.0)).norm() < 1e-14);
        assert!((c.k2_kl - C64::new(-0.8 / 6.0, 0.0)).norm() < 1e-14);
        assert!((c.k2_lk - C64::new(-0.8 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn residual_small_with_damping() {
        let p = Params::new(0.8, 0.7, 2.0, 1e-2);
        for (k, l) in [(1, 2), (-3, 5), (7, -2), (4, 4)] {
            let c = solve_coeffs(k, l, &p).unwrap();
            assert!(max_residual(&c, p.omega) < 1e-13, "{k},{l}");
        }
    }

    #[test]
    fn omega_one_is_exceptional() {
        let p = Params::new(1.0, 1.0, 2.0, 0.0);
        assert!(matches!(
            solve_coeffs(1, -2, &p),
            Err(Error::Exceptional { .. })
        ));
    }

    #[test]
    fn excluded_pairs() {
        let p = Params::default();
        assert!(solve_coeffs(0, 1, &p).is_err());
        assert!(solve_coeffs(2, -2, &p).is_err());
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let p = Params::default();
        let t = NormalFormTable::build(&p, 8).unwrap();
        let z = SpectralField::zeros(32).unwrap();
        assert_eq!(t.apply(&z).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn aliasing_guard() {
        let p = Params::default();
        let t = NormalFormTable::build(&p, 16).unwrap();
        let z = SpectralField::zeros(32).unwrap();
        assert!(matches!(t.apply(&z), Err(Error::Aliasing(_))));
    }
}
