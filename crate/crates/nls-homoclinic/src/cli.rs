//! Command-line front end. Every subcommand writes CSV/JSON into the output
//! directory plus `<command>.manifest.json`, and fails if one of its oracles fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde_json::json;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::evolution::{
    certify_trajectory, evolve_from, nls_hamiltonian, tracking_experiment, EvolutionSpec,
};
use crate::field::{grid, SpectralField};
use crate::integrable::*;
use crate::linearization::{eigenfunction, l_epsilon_apply, spectrum_l_epsilon, unstable_modes};
use crate::manifest::{OutputDir, RunManifest};
use crate::melnikov::*;
use crate::normal_form::{denominator_scan, NormalFormTable};
use crate::params::Params;
use crate::plane::{
    fish_hamiltonian, fish_head, fish_polyline, fixed_points, integrate_plane,
    leading_fixed_points, PlaneState, PlaneSystem,
};
use crate::verify::{full_suite, nls_residual, quick_suite, OracleResult};

pub const OUT_ENV: &str = "NLS_HOMOCLINIC_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "nls-homoclinic",
    version,
    about = "Homoclinic orbits of the perturbed NLS: experiments and oracles"
)]
pub struct Cli {
    /// JSON config with sections params, grid, quadrature, evolution, tracking.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (NLS_HOMOCLINIC_OUT wins over this).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the rayon pool.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// verify: sub-minute suite (default).
    #[arg(long, global = true, conflicts_with = "full")]
    pub quick: bool,
    /// verify: all acceptance criteria.
    #[arg(long, global = true)]
    pub full: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trajectories and nullclines of the plane dynamics.
    PlanePortrait(PortraitArgs),
    /// Singular level set through the saddle.
    Fish(FishArgs),
    /// Eigenvalues of L_ε at ε = 0 and at the configured ε.
    Spectrum(SpectrumArgs),
    /// Small-denominator scan over ω and the coefficient table.
    NormalFormScan(ScanArgs),
    /// Floquet discriminant over a λ grid.
    Floquet(FloquetArgs),
    /// Space-time samples of a closed-form homoclinic orbit.
    Homoclinic(HomoclinicArgs),
    /// κ(ω) from the one-pair Melnikov integrals.
    MelnikovKappa(KappaArgs),
    /// (χ̃, α, β) over (ω, Δρ) from the two-pair integrals.
    MelnikovSurface(SurfaceArgs),
    /// Second distance d̃ along a γ scan.
    SecondDistance(DistanceArgs),
    /// Split-step evolution of NLS or the perturbed equation.
    Evolve(EvolveArgs),
    /// ε|ln ε|² tracking experiment.
    Track(TrackArgs),
    /// Oracle suites.
    Verify,
}

/// `start:stop:step` (stop included), a comma list, or one number.
#[derive(Debug, Clone, PartialEq)]
pub struct Range(pub Vec<f64>);

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let parts: Vec<&str> = s.split(':').collect();
        let v = match parts.as_slice() {
            [a, b, h] => {
                let (a, b, h) = (num(a)?, num(b)?, num(h)?);
                if !(h > 0.0) || b < a {
                    return Err(format!("`{s}`: need start <= stop and step > 0"));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                (0..=n).map(|i| a + h * i as f64).collect()
            }
            [one] => one
                .split(',')
                .map(num)
                .collect::<std::result::Result<Vec<_>, _>>()?,
            _ => return Err(format!("`{s}`: expected start:stop:step or a list")),
        };
        if v.is_empty() {
            return Err("empty range".into());
        }
        Ok(Range(v))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SystemArg {
    Full,
    Rescaled,
    Leading,
}

#[derive(Debug, Args)]
pub struct PortraitArgs {
    #[arg(long, value_enum, default_value = "leading")]
    pub system: SystemArg,
    /// Starts per axis on the (θ, j) lattice.
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    /// Horizon in rescaled time τ.
    #[arg(long, default_value_t = 10.0)]
    pub tau_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long, default_value_t = 50)]
    pub stride: usize,
}

#[derive(Debug, Args)]
pub struct FishArgs {
    #[arg(long, default_value_t = 401)]
    pub samples: usize,
    /// Offset of the left end from the fish head.
    #[arg(long, default_value_t = 0.0)]
    pub delta_hat: f64,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 6)]
    pub k_max: i64,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value = "0.55:1.45:0.01")]
    pub omega: Range,
    /// Overrides grid.k_max.
    #[arg(long)]
    pub k_max: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Plane,
    #[value(name = "homoclinic-1")]
    Homoclinic1,
    #[value(name = "homoclinic-2")]
    Homoclinic2,
    File,
}

#[derive(Debug, Args)]
pub struct FloquetArgs {
    #[arg(long, value_enum, default_value = "plane")]
    pub init: InitArg,
    /// Snapshot time for homoclinic data.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value = "-1:1:0.05", allow_hyphen_values = true)]
    pub re: Range,
    #[arg(long, default_value = "0:1.2:0.05", allow_hyphen_values = true)]
    pub im: Range,
}

#[derive(Debug, Args)]
pub struct HomoclinicArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub pairs: u8,
    /// Even orbit: ϑ = ϑ₀ − π/2 (and ϑ̂ = ϑ̂₀ − π/2).
    #[arg(long)]
    pub even: bool,
    /// Plane-wave amplitude (defaults to ω).
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub vartheta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho_hat: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub vartheta_hat: f64,
    #[arg(long, default_value = "-5:5:0.5", allow_hyphen_values = true)]
    pub t: Range,
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    #[arg(long, default_value = "0.55:0.95:0.01")]
    pub omega: Range,
    /// JSON quadrature spec {t_max_factor, nodes_per_unit, x_grid}.
    #[arg(long)]
    pub quadrature: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long, default_value = "1.05:1.45:0.05")]
    pub omega: Range,
    #[arg(long, default_value = "0.25:2:0.25", allow_hyphen_values = true)]
    pub delta_rho: Range,
    #[arg(long)]
    pub quadrature: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    /// Defaults to 1/κ(ω).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 721)]
    pub samples: usize,
    #[arg(long)]
    pub quadrature: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EquationArg {
    Nls,
    Pnls,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long, value_enum, default_value = "nls")]
    pub equation: EquationArg,
    #[arg(long, value_enum, default_value = "homoclinic-1")]
    pub init: InitArg,
    /// CSV with columns x, re, im (for --init file).
    #[arg(long)]
    pub init_file: Option<PathBuf>,
    /// Orbit time of the initial snapshot for homoclinic data.
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long)]
    pub epsilons: Option<Range>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
}

trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        let a = self.abs();
        if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
            format!("{self:e}")
        } else {
            self.to_string()
        }
    }
}

macro_rules! plain_cell {
    ($($t:ty),*) => {$(impl Cell for $t {
        fn cell(&self) -> String {
            self.to_string()
        }
    })*};
}
plain_cell!(i64, usize, bool, &str, String);

impl<T: Cell + ?Sized> Cell for &T {
    fn cell(&self) -> String {
        (**self).cell()
    }
}

/// One CSV line; floats round-trip, small ones in scientific notation.
macro_rules! row {
    ($($x:expr),+ $(,)?) => { [$(Cell::cell(&$x)),+].join(",") };
}

struct Ctx {
    cfg: Config,
    out: OutputDir,
    manifest: RunManifest,
}

impl Ctx {
    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        self.out.write(&mut self.manifest, name, body)
    }

    fn oracle(&mut self, name: &str, value: f64, tolerance: f64, detail: impl Into<String>) {
        self.manifest.oracles.push(OracleResult {
            id: self.manifest.command.clone(),
            name: name.into(),
            value,
            tolerance,
            seconds: 0.0,
            budget: None,
            pass: value.is_finite() && value < tolerance,
            detail: detail.into(),
        });
    }
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn quadrature(cfg: &Config, path: &Option<PathBuf>) -> Result<QuadratureSpec> {
    let q = match path {
        None => cfg.quadrature,
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("quadrature: {e}")))?
        }
    };
    q.validate()?;
    Ok(q)
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn plane_portrait(a: &PortraitArgs, c: &mut Ctx) -> Result<()> {
    let p = c.cfg.params;
    p.require_resonance()?;
    if a.starts < 2 || !(a.h > 0.0) || !(a.tau_end > 0.0) {
        return Err(Error::Config("need starts >= 2, h > 0, tau_end > 0".into()));
    }
    let ts = p.theta_star()?;
    let head = fish_head(&p)?;
    let se = p.epsilon.sqrt();
    let sys = match a.system {
        SystemArg::Full => PlaneSystem::Full,
        SystemArg::Rescaled => PlaneSystem::Rescaled,
        SystemArg::Leading => PlaneSystem::Leading,
    };
    if sys != PlaneSystem::Leading && p.epsilon <= 0.0 {
        return Err(Error::Config(
            "full and rescaled systems need epsilon > 0".into(),
        ));
    }
    let lin = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (a.starts - 1) as f64;
    let mut rows = Vec::new();
    let mut orbit = 0usize;
    for i in 0..a.starts {
        for k in 0..a.starts {
            let (j0, th0) = (lin(-1.5, 1.5, i), lin(head, ts, k));
            let tr = match sys {
                PlaneSystem::Full => integrate_plane(
                    PlaneState {
                        j: se * j0,
                        theta: th0,
                    },
                    (0.0, a.tau_end / se),
                    a.h / se,
                    a.stride,
                    sys,
                    &p,
                ),
                _ => integrate_plane(
                    PlaneState { j: j0, theta: th0 },
                    (0.0, a.tau_end),
                    a.h,
                    a.stride,
                    sys,
                    &p,
                ),
            };
            for (t, s) in tr.times.iter().zip(&tr.states) {
                let (tau, j) = if sys == PlaneSystem::Full {
                    (se * t, s.j / se)
                } else {
                    (*t, s.j)
                };
                rows.push(row!(
                    orbit,
                    tau,
                    j,
                    s.theta,
                    fish_hamiltonian(j, s.theta, &p)
                ));
            }
            orbit += 1;
        }
    }
    c.write(
        "plane_portrait.csv",
        &csv("orbit,tau,j,theta,hamiltonian", rows),
    )?;
    let mut nc = Vec::new();
    for i in 0..=200 {
        let th = head - 0.5 + (ts - head + 1.0) * i as f64 / 200.0;
        nc.push(format!("theta_dot,{th},0"));
    }
    for sgn in [-1.0, 1.0] {
        for i in 0..=50 {
            nc.push(format!(
                "j_dot,{},{}",
                sgn * ts,
                -1.5 + 3.0 * i as f64 / 50.0
            ));
        }
    }
    c.write("nullclines.csv", &csv("curve,theta,j", nc))?;
    let lead = leading_fixed_points(&p)?;
    let mut worst = max_of(lead.iter().map(|f| f.eigen_mismatch())) / 1e-6;
    let eps_points = if p.epsilon > 0.0 {
        fixed_points(&p)?
    } else {
        vec![]
    };
    let tol = 1e-6f64.max(10.0 * p.epsilon * p.epsilon);
    worst = worst.max(max_of(eps_points.iter().map(|f| f.eigen_mismatch() / tol)));
    c.write(
        "fixed_points.json",
        &serde_json::to_string_pretty(&json!({"leading": lead, "epsilon": eps_points}))
            .expect("serialises"),
    )?;
    c.oracle(
        "fixed-point eigenvalues, closed form vs Jacobian (scaled)",
        worst,
        1.0,
        "mismatch / max(1e-6, 10ε²)",
    );
    c.manifest.summary = json!({"orbits": orbit, "theta_star": ts, "theta_hat": head});
    Ok(())
}

fn fish(a: &FishArgs, c: &mut Ctx) -> Result<()> {
    let p = c.cfg.params;
    p.require_resonance()?;
    let ts = p.theta_star()?;
    let level = fish_hamiltonian(0.0, ts, &p);
    let poly = fish_polyline(&p, a.samples, a.delta_hat)?;
    let err = max_of(poly.iter().flat_map(|&(th, u, s)| {
        [
            (fish_hamiltonian(u, th, &p) - level).abs(),
            (fish_hamiltonian(s, th, &p) - level).abs(),
        ]
    }));
    c.write(
        "fish.csv",
        &csv(
            "theta,j_unstable,j_stable",
            poly.iter().map(|(t, u, s)| row!(t, u, s)),
        ),
    )?;
    let head = fish_head(&p)?;
    c.manifest.summary = json!({"theta_star": ts, "theta_hat": head, "level": level});
    c.write(
        "fish.json",
        &serde_json::to_string_pretty(&c.manifest.summary).expect("serialises"),
    )?;
    c.oracle("level-set residual of the polyline", err, 1e-10, "");
    Ok(())
}

fn spectrum(a: &SpectrumArgs, c: &mut Ctx) -> Result<()> {
    let p = c.cfg.params;
    let mut rows = Vec::new();
    for e in [0.0, p.epsilon] {
        let q = p.with_epsilon(e);
        for s in spectrum_l_epsilon(&q, a.k_max)? {
            for (branch, mu) in [("plus", s.mu_plus), ("minus", s.mu_minus)] {
                rows.push(row!(e, s.k, branch, mu.re, mu.im));
            }
        }
    }
    c.write("spectrum.csv", &csv("epsilon,k,branch,re_mu,im_mu", rows))?;
    let modes = unstable_modes(p.omega)?;
    let spec = spectrum_l_epsilon(&p, a.k_max)?;
    let mut worst = 0.0f64;
    for &k in &modes {
        let s = &spec[(k - 1) as usize];
        for (plus, mu) in [(true, s.mu_plus), (false, s.mu_minus)] {
            let e = eigenfunction(k, plus, p.omega, 32)?;
            let le = l_epsilon_apply(&e, &p);
            worst = worst.max(max_of(
                le.values()
                    .iter()
                    .zip(e.values())
                    .map(|(x, y)| (x - mu * y).norm()),
            ));
        }
    }
    c.oracle(
        "eigenfunction residual",
        worst,
        1e-10,
        format!("unstable modes {modes:?}"),
    );
    c.manifest.summary = json!({"unstable_modes": modes});
    Ok(())
}

fn normal_form_scan(a: &ScanArgs, c: &mut Ctx) -> Result<()> {
    let p = c.cfg.params;
    let k_max = a.k_max.unwrap_or(c.cfg.grid.k_max);
    let scan = denominator_scan(&p, &a.omega.0, k_max)?;
    c.write(
        "normal_form_scan.csv",
        &csv(
            "omega,min_abs_d,min_abs_sigma2_minus_b2,min_abs_u2_minus_v2",
            scan.rows
                .iter()
                .map(|r| row!(r.omega, r.min_d, r.min_sigma_b, r.min_uv)),
        ),
    )?;
    c.write(
        "flagged.csv",
        &csv(
            "omega,quantity,k,l",
            scan.flagged.iter().map(|(w, q, k, l)| row!(w, q, k, l)),
        ),
    )?;
    match NormalFormTable::build(&p, k_max) {
        Ok(t) => {
            c.write(
                "coefficients.json",
                &serde_json::to_string_pretty(&t.to_json()).expect("serialises"),
            )?;
            c.oracle(
                "coefficient residual at the configured ω",
                t.max_residual(),
                1e-12,
                "",
            );
        }
        Err(e) => c.manifest.summary = json!({"table": e.to_string()}),
    }
    if c.manifest.summary.is_null() {
        c.manifest.summary =
            json!({"flagged": scan.flagged.len(), "edge_deviation": scan.edge_deviation});
    }
    Ok(())
}

fn snapshot(
    init: InitArg,
    t: f64,
    n: usize,
    p: &Params,
) -> Result<(SpectralField, Option<DarbouxData>)> {
    let a = p.amplitude;
    match init {
        InitArg::Plane => Ok((SpectralField::constant(n, plane_wave(t, p))?, None)),
        InitArg::Homoclinic1 => {
            let d = DarbouxData::new(a, 0.0, 0.0)?.even(false);
            Ok((homoclinic_one_pair(t, n, &d, p)?, Some(d)))
        }
        InitArg::Homoclinic2 => {
            let d = DarbouxData::new(a, 0.0, 0.0)?
                .even(false)
                .with_second(0.0, 0.0)?
                .even_hat(false)?;
            Ok((homoclinic_two_pair(t, n, &d, p)?, Some(d)))
        }
        InitArg::File => Err(Error::Config("--init file needs --init-file".into())),
    }
}

fn floquet(a: &FloquetArgs, c: &mut Ctx) -> Result<()> {
    use rayon::prelude::*;
    let p = c.cfg.params;
    let (q, d) = snapshot(a.init, a.t, c.cfg.grid.n, &p)?;
    let lams: Vec<C64> =
        a.im.0
            .iter()
            .flat_map(|&y| a.re.0.iter().map(move |&x| C64::new(x, y)))
            .collect();
    // The integrator refuses a step-halving mismatch; resample and retry up to 4N.
    let disc = |l: C64| -> Result<(C64, usize)> {
        let mut g = q.clone();
        loop {
            match floquet_discriminant(&g, l) {
                Err(Error::Accuracy(_)) if g.grid_size() < 4 * q.grid_size() => {
                    g = g.resample(2 * g.grid_size())?
                }
                r => return r.map(|v| (v, g.grid_size())),
            }
        }
    };
    let out = lams
        .par_iter()
        .map(|&l| disc(l))
        .collect::<Result<Vec<_>>>()?;
    let grid_used = out.iter().map(|o| o.1).max().unwrap_or(0);
    let vals: Vec<C64> = out.into_iter().map(|o| o.0).collect();
    let amp = p.amplitude;
    let err = max_of(lams.iter().zip(&vals).map(|(&l, v)| {
        let e = plane_wave_discriminant(amp, l);
        (v - e).norm() / (1.0 + e.norm())
    }));
    c.write(
        "floquet.csv",
        &csv(
            "re_lambda,im_lambda,re_delta,im_delta",
            lams.iter()
                .zip(&vals)
                .map(|(l, v)| row!(l.re, l.im, v.re, v.im)),
        ),
    )?;
    let y_max = a.im.0.iter().copied().fold(0.0, f64::max).max(0.1);
    let mut seeds: Vec<C64> = vec![];
    if let Some(d) = &d {
        seeds.push(d.nu);
        if let Some(nh) = d.nu_hat {
            seeds.push(nh);
        }
    }
    let crit = if seeds.is_empty() {
        critical_points(
            &q,
            &SearchRegion::ImaginaryAxis {
                y_min: 0.05,
                y_max,
                samples: 60,
            },
        )?
    } else {
        critical_points(&q, &SearchRegion::Seeds(seeds))?
    };
    c.write(
        "critical_points.json",
        &serde_json::to_string_pretty(&crit).expect("serialises"),
    )?;
    c.oracle(
        "relative deviation from the plane-wave discriminant",
        err,
        1e-8,
        "homoclinic data share the plane-wave spectrum",
    );
    c.manifest.summary =
        json!({"points": lams.len(), "critical_points": crit.len(), "max_grid": grid_used});
    Ok(())
}

fn homoclinic(a: &HomoclinicArgs, c: &mut Ctx) -> Result<()> {
    let mut p = c.cfg.params;
    p.amplitude = a.a.unwrap_or(p.omega);
    let n = c.cfg.grid.n;
    let mut d = DarbouxData::new(p.amplitude, a.rho, a.vartheta)?;
    if a.even {
        d = d.even(false);
    }
    if a.pairs == 2 {
        d = d.with_second(a.rho_hat, a.vartheta_hat)?;
        if a.even {
            d = d.even_hat(false)?;
        }
    }
    let orbit = |t: f64| -> Result<SpectralField> {
        if a.pairs == 2 {
            homoclinic_two_pair(t, n, &d, &p)
        } else {
            homoclinic_one_pair(t, n, &d, &p)
        }
    };
    let xs = grid(n);
    let mut body = String::from("t,x,re,im\n");
    let mut worst = 0.0f64;
    for &t in &a.t.0 {
        let q = orbit(t)?;
        for (x, v) in xs.iter().zip(q.values()) {
            body.push_str(&row!(t, x, v.re, v.im));
            body.push('\n');
        }
        worst = worst.max(nls_residual(&orbit, t, p.omega)?);
    }
    c.write("homoclinic.csv", &body)?;
    let tol = if a.pairs == 2 { 1e-5 } else { 1e-6 };
    c.oracle(
        "NLS residual of the closed form",
        worst,
        tol,
        format!("{} times", a.t.0.len()),
    );
    c.manifest.summary = json!({"data": d});
    Ok(())
}

fn melnikov_kappa(a: &KappaArgs, c: &mut Ctx) -> Result<()> {
    let quad = quadrature(&c.cfg, &a.quadrature)?;
    let rows = kappa_curve(&a.omega.0, &quad);
    let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
    let mut closure = 0.0f64;
    let mut cert = 0.0f64;
    let mut flagged = 0;
    let body = csv(
        "omega,kappa,alpha,m1,m2,m3,delta_gamma,estimated_error,certified,flag",
        rows.iter().map(|r| {
            let m = r.m1.unwrap_or([f64::NAN; 3]);
            let q = r.quadrature;
            if let (Some(al), None) = (r.alpha, &r.flag) {
                let bc = al * phase_ratio(r.omega, r.delta_gamma);
                closure = closure.max((m[0] + al * m[1] + bc * m[2]).abs());
            } else {
                flagged += 1;
            }
            cert = cert.max(q.map_or(f64::INFINITY, |q| q.estimated_error()));
            row!(
                r.omega,
                opt(r.kappa),
                opt(r.alpha),
                m[0],
                m[1],
                m[2],
                r.delta_gamma,
                q.map_or(f64::NAN, |q| q.estimated_error()),
                q.is_some_and(|q| q.certified()),
                r.flag.clone().unwrap_or_default().replace(',', ";")
            )
        }),
    );
    c.write("melnikov_kappa.csv", &body)?;
    c.oracle("M₁ at α = 1/κ, β cos γ = αc", closure, 1e-8, "");
    c.oracle("quadrature certificate (worst)", cert, CERTIFICATE_TOL, "");
    c.manifest.summary = json!({"points": rows.len(), "flagged": flagged, "quadrature": quad});
    Ok(())
}

fn melnikov_surface(a: &SurfaceArgs, c: &mut Ctx) -> Result<()> {
    let quad = quadrature(&c.cfg, &a.quadrature)?;
    let rows = surface_two_pairs(&a.omega.0, &a.delta_rho.0, &quad);
    let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
    let (mut closure, mut cert, mut flagged) = (0.0f64, 0.0f64, 0);
    let body = csv(
        "omega,delta_rho,chi_tilde,alpha,beta,gamma,estimated_error,flag",
        rows.iter().map(|r| {
            let q = r.quadrature;
            if let (Some(m), Some(al), Some(b), Some(g)) = (r.mjl, r.alpha, r.beta_out, r.gamma) {
                let mj = |row: &[f64; 4]| {
                    row[0] + al * row[1] + b * g.cos() * row[2] + b * g.sin() * row[3]
                };
                let pp = Params::new(r.omega, al, b, 0.0);
                let d = second_distance(entry_phase(g, r.delta_gamma), r.delta_gamma, &pp);
                closure = closure
                    .max(mj(&m[0]).abs())
                    .max(mj(&m[1]).abs())
                    .max(d.abs());
                cert = cert.max(q.map_or(f64::INFINITY, |q| q.estimated_error()));
            }
            if r.flag.is_some() {
                flagged += 1;
            }
            row!(
                r.omega,
                r.delta_rho.unwrap_or(f64::NAN),
                opt(r.chi_tilde),
                opt(r.alpha),
                opt(r.beta_out),
                opt(r.gamma),
                q.map_or(f64::NAN, |q| q.estimated_error()),
                r.flag.clone().unwrap_or_default().replace(',', ";")
            )
        }),
    );
    c.write("melnikov_surface.csv", &body)?;
    c.oracle("|M₁|, |M₂|, |d̃| on the surface", closure, 1e-6, "");
    c.oracle("quadrature certificate (worst)", cert, CERTIFICATE_TOL, "");
    c.manifest.summary = json!({"points": rows.len(), "flagged": flagged, "quadrature": quad});
    Ok(())
}

fn second_distance_scan(a: &DistanceArgs, c: &mut Ctx) -> Result<()> {
    let p0 = c.cfg.params;
    let quad = quadrature(&c.cfg, &a.quadrature)?;
    let mel = melnikov_one_pair(&Params::new(p0.omega, 0.0, 0.0, 0.0), &quad)?;
    let alpha = match a.alpha {
        Some(al) => al,
        None => 1.0 / mel.kappa()?,
    };
    let p = Params { alpha, ..p0 };
    let dg = mel.delta_gamma;
    let n = a.samples.max(2);
    let mut worst = 0.0f64;
    let rows = (0..n).map(|i| {
        let g = 2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64;
        let th0 = entry_phase(g, dg);
        let d = second_distance(th0, dg, &p);
        let dh = second_distance_hamiltonian(th0, dg, &p);
        worst = worst.max((d - dh).abs());
        row!(g, th0, dg, d, dh, mel.m1(alpha, p.beta, g))
    });
    let body = csv("gamma,theta0,theta1,d_tilde,d_hamiltonian,m1", rows);
    c.write("second_distance.csv", &body)?;
    c.oracle("d̃ vs Hamiltonian difference", worst, 1e-10, "");
    let root = if a.alpha.is_none() {
        match solve_one_pair(&mel, p.beta) {
            Ok(s) => {
                c.oracle(
                    "existence root residual",
                    s.max_residual(),
                    1e-8,
                    format!("condition {:.3e}", s.condition),
                );
                json!(s)
            }
            Err(e) => json!(e.to_string()),
        }
    } else {
        serde_json::Value::Null
    };
    c.manifest.summary = json!({"alpha": alpha, "beta": p.beta, "delta_gamma": dg, "root": root});
    Ok(())
}

fn read_field(path: &PathBuf) -> Result<SpectralField> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut vals = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Config(format!(
                "{} line {}: expected x,re,im",
                path.display(),
                i + 1
            )));
        }
        let f = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))
        };
        vals.push(C64::new(f(cols[1])?, f(cols[2])?));
    }
    SpectralField::from_values(vals)
}

fn evolve(a: &EvolveArgs, c: &mut Ctx) -> Result<()> {
    let mut p = c.cfg.params;
    if let Some(e) = a.epsilon {
        p.epsilon = e;
    }
    p.validate()?;
    let eps = if a.equation == EquationArg::Pnls {
        p.epsilon
    } else {
        0.0
    };
    let spec = EvolutionSpec {
        dt: a.dt.unwrap_or(c.cfg.evolution.dt),
        t_end: a.t_end.unwrap_or(c.cfg.evolution.t_end),
        record_stride: a.stride.unwrap_or(c.cfg.evolution.record_stride),
    };
    spec.validate()?;
    let (q0, t0) = match a.init {
        InitArg::File => {
            let path = a
                .init_file
                .as_ref()
                .ok_or_else(|| Error::Config("--init file needs --init-file".into()))?;
            (read_field(path)?, 0.0)
        }
        other => (snapshot(other, a.t0, c.cfg.grid.n, &p)?.0, a.t0),
    };
    let tr = evolve_from(&q0, t0, &spec, &p, eps)?;
    let cert = certify_trajectory(&tr, &q0, &spec, &p, eps)?;
    let xs = grid(q0.grid_size());
    let mut body = String::from("t,x,re,im\n");
    for (t, q) in tr.times.iter().zip(&tr.states) {
        for (x, v) in xs.iter().zip(q.values()) {
            body.push_str(&row!(t, x, v.re, v.im));
            body.push('\n');
        }
    }
    c.write("snapshots.csv", &body)?;
    c.write(
        "conserved.csv",
        &csv(
            "t,mass,hamiltonian",
            tr.times
                .iter()
                .zip(&tr.mass)
                .zip(&tr.hamiltonian)
                .map(|((t, m), h)| row!(t, m, h)),
        ),
    )?;
    c.oracle(
        "terminal H¹ change under dt halving",
        cert.halving_h1,
        crate::evolution::HALVING_TOL,
        "",
    );
    if eps == 0.0 {
        c.oracle("mass drift", cert.mass_drift, 1e-10, "");
    }
    c.manifest.summary = json!({
        "equation": format!("{:?}", a.equation).to_lowercase(),
        "epsilon": eps,
        "certificate": cert,
        "final_hamiltonian": nls_hamiltonian(tr.last(), p.omega),
    });
    Ok(())
}

fn track(a: &TrackArgs, c: &mut Ctx) -> Result<()> {
    let mut spec = c.cfg.tracking.clone();
    if let Some(e) = &a.epsilons {
        spec.epsilons = e.0.clone();
    }
    if let Some(b) = a.beta {
        spec.beta = b;
    }
    if let Some(dt) = a.dt {
        spec.dt = dt;
    }
    let rep = tracking_experiment(&spec, &c.cfg.quadrature)?;
    let body = csv(
        "epsilon,alpha_melnikov,alpha,sup_h1,ratio,end_ratio,plane_distance_ratio,halving_change,stopped",
        rep.rows.iter().map(|r| {
            row!(r.epsilon, r.alpha_melnikov, r.alpha, r.sup_h1, r.ratio, r.end_ratio, r.plane_distance_ratio, r.halving_change.unwrap_or(f64::NAN), r.stopped.clone().unwrap_or_default().replace(',', ";"))
        }),
    );
    c.write("tracking.csv", &body)?;
    c.write(
        "tracking.json",
        &serde_json::to_string_pretty(&rep).expect("serialises"),
    )?;
    c.oracle(
        "ratio growth across ε",
        rep.growth,
        crate::evolution::TRACKING_GROWTH_TOL,
        format!("max ratio {:.3}", rep.max_ratio),
    );
    c.oracle(
        "ratio change under dt halving (worst)",
        max_of(
            rep.rows
                .iter()
                .map(|r| r.halving_change.unwrap_or(f64::INFINITY)),
        ),
        crate::evolution::TRACKING_HALVING_TOL,
        "",
    );
    c.manifest.summary = json!({"max_ratio": rep.max_ratio, "bounded": rep.bounded});
    Ok(())
}

fn verify(full: bool, c: &mut Ctx) -> Result<()> {
    let results = if full { full_suite() } else { quick_suite() };
    for r in &results {
        println!("{}", r.line());
    }
    c.write(
        "verify.json",
        &serde_json::to_string_pretty(&results).expect("serialises"),
    )?;
    c.manifest.summary = json!({"suite": if full { "full" } else { "quick" }});
    c.manifest.oracles = results;
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::PlanePortrait(_) => "plane-portrait",
        Command::Fish(_) => "fish",
        Command::Spectrum(_) => "spectrum",
        Command::NormalFormScan(_) => "normal-form-scan",
        Command::Floquet(_) => "floquet",
        Command::Homoclinic(_) => "homoclinic",
        Command::MelnikovKappa(_) => "melnikov-kappa",
        Command::MelnikovSurface(_) => "melnikov-surface",
        Command::SecondDistance(_) => "second-distance",
        Command::Evolve(_) => "evolve",
        Command::Track(_) => "track",
        Command::Verify => "verify",
    }
}

/// Output directory: the environment variable, then `--out`, then `./out`.
pub fn output_dir(flag: Option<&PathBuf>) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => flag.cloned().unwrap_or_else(|| PathBuf::from("out")),
    }
}

/// Runs one parsed command; `Ok(false)` means an oracle failed.
pub fn run(cli: &Cli, arguments: Vec<String>) -> Result<(bool, RunManifest)> {
    let cfg = Config::load(cli.config.as_deref())?;
    let name = command_name(&cli.command);
    let mut c = Ctx {
        out: OutputDir::create(&output_dir(cli.out.as_ref()))?,
        manifest: RunManifest::new(
            name,
            arguments,
            &format!("{:?} full={}", cli.command, cli.full),
            &cfg,
        ),
        cfg,
    };
    match &cli.command {
        Command::PlanePortrait(a) => plane_portrait(a, &mut c)?,
        Command::Fish(a) => fish(a, &mut c)?,
        Command::Spectrum(a) => spectrum(a, &mut c)?,
        Command::NormalFormScan(a) => normal_form_scan(a, &mut c)?,
        Command::Floquet(a) => floquet(a, &mut c)?,
        Command::Homoclinic(a) => homoclinic(a, &mut c)?,
        Command::MelnikovKappa(a) => melnikov_kappa(a, &mut c)?,
        Command::MelnikovSurface(a) => melnikov_surface(a, &mut c)?,
        Command::SecondDistance(a) => second_distance_scan(a, &mut c)?,
        Command::Evolve(a) => evolve(a, &mut c)?,
        Command::Track(a) => track(a, &mut c)?,
        Command::Verify => verify(cli.full, &mut c)?,
    }
    c.out.finish(&c.manifest)?;
    Ok((c.manifest.passed(), c.manifest))
}

/// Exit 0 on success, 1 when an oracle fails or the numerics give up, 2 on bad input.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli, std::env::args().skip(1).collect()) {
        Ok((passed, m)) => {
            for o in m.oracles.iter().filter(|o| !o.pass) {
                eprintln!("{}", o.line());
            }
            println!(
                "{}: {} output files, {} oracles",
                m.command,
                m.outputs.len(),
                m.oracles.len()
            );
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Domain(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
