//! Command-line front end: one subcommand per pipeline, flat TOML configs,
//! deterministic CSV/JSON artifacts.
//!
//! A config file holds optional top-level `command`, `out` and `seed` keys and
//! one table per command:
//!
//! ```toml
//! command = "continuation"
//! out = "runs/disk"
//!
//! [continuation]
//! shape = "disk"
//! p = 2.0
//! lambda_max = 10.0
//! h = 0.0078125
//! ```
//!
//! Flags given on the command line override the file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::elliptic::{
    ball_sobolev, green_function, harmonic_centers, kirchhoff_routh, robin_function, sobolev_constant, DomainGrid, Shape,
};
use crate::emden::{solve_ball, BallConstants, Drive, EmdenConstants, EmdenProfile, GroundState, SpikeFamily};
use crate::error::{Error, Result};
use crate::plasma::{
    continuation, energy_audit, functionals, multistart, refine, richardson, Branch, BranchSource, EnergyAudit, Functionals,
    PlasmaSolution,
};
use crate::spikes::{
    analyze, quantization_sweep, BallGreen, FamilyField, FreeSpace, GreenProvider, GridGreen, QuantizationTable,
    RescaledField, SpikeOptions, SpikeReport, Superposition,
};
use crate::thresholds::{mu_plus_min, threshold_report, SobolevTable};

macro_rules! params {
    ($( $(#[$m:meta])* $name:ident : $ty:ty => $key:literal ),* $(,)?) => {
        /// Every per-command setting; each command accepts a subset.
        #[derive(Debug, Clone, Default, Args, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct Params {
            $( $(#[$m])* pub $name: Option<$ty>, )*
        }

        impl Params {
            fn overlay(mut self, top: Params) -> Params {
                $( if top.$name.is_some() { self.$name = top.$name; } )*
                self
            }

            fn present(&self) -> Vec<&'static str> {
                let mut keys = Vec::new();
                $( if self.$name.is_some() { keys.push($key); } )*
                keys
            }
        }
    };
}

params! {
    /// Dimension N.
    #[arg(long = "N")] #[serde(rename = "N")] n: usize => "N",
    /// Exponent p.
    #[arg(long)] p: f64 => "p",
    /// Shooting / solver tolerance.
    #[arg(long)] tol: f64 => "tol",
    /// Ground-state asymptote a in [0, 1).
    #[arg(long)] a: f64 => "a",
    /// Number of radial samples written to CSV.
    #[arg(long)] samples: usize => "samples",
    /// disk | ball | square | rectangle | ellipse | mask-file
    #[arg(long = "domain", alias = "shape")] #[serde(rename = "shape", alias = "domain")] domain: String => "shape",
    /// Rectangle side lengths or ellipse semi-axes.
    #[arg(long, value_delimiter = ',')] size: Vec<f64> => "size",
    /// Mask raster file.
    #[arg(long)] mask: PathBuf => "mask",
    /// Grid spacing.
    #[arg(long)] h: f64 => "h",
    #[arg(long)] lambda: f64 => "lambda",
    /// λ values as multiples of λ*(ball).
    #[arg(long, value_delimiter = ',')] lambda_ratio: Vec<f64> => "lambda_ratio",
    /// Total current I (ball drive).
    #[arg(long)] current: f64 => "current",
    /// Sobolev exponents.
    #[arg(long, value_delimiter = ',')] q: Vec<f64> => "q",
    /// Auxiliary exponents s in (p, p_N).
    #[arg(long, value_delimiter = ',')] s: Vec<f64> => "s",
    #[arg(long)] lambda_max: f64 => "lambda_max",
    #[arg(long)] steps: usize => "steps",
    /// Finer spacings for grid sequencing of the last solution.
    #[arg(long, value_delimiter = ',')] refine: Vec<f64> => "refine",
    /// Randomized initializations for the uniqueness probe.
    #[arg(long)] starts: usize => "starts",
    /// Branch JSON to analyze.
    #[arg(long)] from: PathBuf => "from",
    /// Branch entry: `last` or an index.
    #[arg(long)] entry: String => "entry",
    /// Synthetic spike scale μ.
    #[arg(long)] mu: f64 => "mu",
    /// Spike centers, flattened coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] centers: Vec<f64> => "centers",
    #[arg(long)] sigma_min: f64 => "sigma_min",
    /// Window radius in units of R_0.
    #[arg(long)] r_factor: f64 => "r_factor",
    #[arg(long)] merge_factor: f64 => "merge_factor",
    /// Points, flattened coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] points: Vec<f64> => "points",
    /// Vortex strengths for the Kirchhoff–Routh Hamiltonian.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] k: Vec<f64> => "k",
    /// JSON artifacts to collect.
    #[arg(long, value_delimiter = ',')] inputs: Vec<PathBuf> => "inputs",
}

const DOMAIN_KEYS: [&str; 5] = ["shape", "N", "size", "mask", "h"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Kind {
    Emden,
    Ball,
    Sobolev,
    Thresholds,
    Solve,
    Continuation,
    Spikes,
    Green,
    Report,
}

const KINDS: [(Kind, &str); 9] = [
    (Kind::Emden, "emden"),
    (Kind::Ball, "ball"),
    (Kind::Sobolev, "sobolev"),
    (Kind::Thresholds, "thresholds"),
    (Kind::Solve, "solve"),
    (Kind::Continuation, "continuation"),
    (Kind::Spikes, "spikes"),
    (Kind::Green, "green"),
    (Kind::Report, "report"),
];

impl Kind {
    fn name(self) -> &'static str {
        KINDS.iter().find(|(k, _)| *k == self).unwrap().1
    }

    fn parse(s: &str) -> Option<Kind> {
        KINDS.iter().find(|(_, n)| *n == s).map(|(k, _)| *k)
    }

    fn allowed(self) -> Vec<&'static str> {
        let own: &[&str] = match self {
            Kind::Emden => &["N", "p", "tol", "a", "samples"],
            Kind::Ball => &["N", "p", "tol", "lambda", "lambda_ratio", "current", "samples"],
            Kind::Sobolev => &["q"],
            Kind::Thresholds => &["p", "s"],
            Kind::Solve => &["p", "lambda", "steps", "starts"],
            Kind::Continuation => &["p", "lambda_max", "steps", "refine"],
            Kind::Spikes => &["from", "entry", "N", "p", "a", "mu", "centers", "sigma_min", "r_factor", "merge_factor", "steps"],
            Kind::Green => &["points", "k"],
            Kind::Report => &["inputs"],
        };
        let mut keys = own.to_vec();
        if matches!(self, Kind::Sobolev | Kind::Thresholds | Kind::Solve | Kind::Continuation | Kind::Green) {
            keys.extend(DOMAIN_KEYS);
        }
        keys
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lane–Emden constants and profile.
    Emden(Params),
    /// Exact solutions on the unit-volume ball.
    Ball(Params),
    /// Best Sobolev constants Λ(Ω,q).
    Sobolev(Params),
    /// Positivity and uniqueness thresholds.
    Thresholds(Params),
    /// One grid solve at a given λ.
    Solve(Params),
    /// Branch from λ = 0 to λ_max.
    Continuation(Params),
    /// Spike detection on a branch entry or a synthetic field.
    Spikes(Params),
    /// Green and Robin functions, harmonic centers, Kirchhoff–Routh values.
    Green(Params),
    /// Collect JSON artifacts into one manifest.
    Report(Params),
}

impl Command {
    fn split(self) -> (Kind, Params) {
        match self {
            Command::Emden(p) => (Kind::Emden, p),
            Command::Ball(p) => (Kind::Ball, p),
            Command::Sobolev(p) => (Kind::Sobolev, p),
            Command::Thresholds(p) => (Kind::Thresholds, p),
            Command::Solve(p) => (Kind::Solve, p),
            Command::Continuation(p) => (Kind::Continuation, p),
            Command::Spikes(p) => (Kind::Spikes, p),
            Command::Green(p) => (Kind::Green, p),
            Command::Report(p) => (Kind::Report, p),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "plasma-lab", version, about = "Plasma free boundary laboratory")]
struct Cli {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Command>,
}

/// A fully resolved invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    command: Kind,
    pub params: Params,
    pub out: PathBuf,
    pub seed: u64,
}

struct FileConfig {
    command: Option<Kind>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    sections: BTreeMap<String, Params>,
}

fn unknown_field(msg: &str) -> Option<String> {
    let start = msg.find("unknown field `")? + "unknown field `".len();
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

fn read_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::config("config", e.message().to_string()))?;
    let mut cfg = FileConfig { command: None, out: None, seed: None, sections: BTreeMap::new() };
    for (key, value) in table {
        match key.as_str() {
            "command" => {
                let s = value.as_str().ok_or_else(|| Error::config("command", "expected a string"))?;
                cfg.command = Some(Kind::parse(s).ok_or_else(|| Error::config("command", format!("unknown command `{s}`")))?);
            }
            "out" => cfg.out = Some(PathBuf::from(value.as_str().ok_or_else(|| Error::config("out", "expected a string"))?)),
            "seed" => {
                let v = value.as_integer().filter(|v| *v >= 0).ok_or_else(|| Error::config("seed", "expected a nonnegative integer"))?;
                cfg.seed = Some(v as u64);
            }
            name if Kind::parse(name).is_some() => {
                let params = Params::deserialize(value).map_err(|e| {
                    let msg = e.to_string();
                    let key = unknown_field(&msg).map(|k| format!("{name}.{k}")).unwrap_or_else(|| name.to_string());
                    Error::config(key, msg.lines().next().unwrap_or_default().to_string())
                })?;
                cfg.sections.insert(key, params);
            }
            other => return Err(Error::config(other, "unknown key")),
        }
    }
    Ok(cfg)
}

fn resolve(cli: Cli) -> Result<RunConfig> {
    let file = match &cli.config {
        Some(p) => Some(read_config(p)?),
        None => None,
    };
    let (command, flags) = match cli.command {
        Some(c) => {
            let (k, p) = c.split();
            (k, Some(p))
        }
        None => {
            let k = file.as_ref().and_then(|f| f.command).ok_or_else(|| Error::config("command", "no subcommand given"))?;
            (k, None)
        }
    };
    let mut params = file.as_ref().and_then(|f| f.sections.get(command.name()).cloned()).unwrap_or_default();
    if let Some(f) = flags {
        params = params.overlay(f);
    }
    let allowed = command.allowed();
    if let Some(bad) = params.present().into_iter().find(|k| !allowed.contains(k)) {
        return Err(Error::config(bad, format!("not used by `{}`", command.name())));
    }
    let out = cli.out.or_else(|| file.as_ref().and_then(|f| f.out.clone())).unwrap_or_else(|| PathBuf::from("out"));
    let seed = cli.seed.or_else(|| file.as_ref().and_then(|f| f.seed)).unwrap_or(0);
    Ok(RunConfig { command, params, out, seed })
}

fn required<T: Clone>(v: &Option<T>, key: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::config(key, "required"))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Builds the grid for the domain keys of a config.
pub fn build_domain(p: &Params) -> Result<DomainGrid> {
    let kind = p.domain.as_deref().unwrap_or("disk");
    let size = |want: usize| -> Result<Vec<f64>> {
        let s = required(&p.size, "size")?;
        if s.len() != want {
            return Err(Error::config("size", format!("expected {want} values, got {}", s.len())));
        }
        Ok(s)
    };
    let mut default_h = 1.0 / 64.0;
    let shape = match kind {
        "disk" => Shape::unit_ball(2),
        "ball" => Shape::unit_ball(p.n.unwrap_or(3)),
        "square" => Shape::unit_square(),
        "rectangle" => {
            let hi = size(p.n.unwrap_or(2))?;
            Shape::Rectangle { lo: vec![0.0; hi.len()], hi }
        }
        "ellipse" => {
            let semi = size(p.n.unwrap_or(2))?;
            Shape::Ellipsoid { center: vec![0.0; semi.len()], semi }
        }
        "mask" | "mask-file" => {
            let s = Shape::read_mask(&required(&p.mask, "mask")?)?;
            if let Shape::Mask { h, .. } = &s {
                default_h = *h;
            }
            s
        }
        other => return Err(Error::config("shape", format!("unknown shape `{other}`"))),
    };
    if let Some(n) = p.n {
        if n != shape.dim() {
            return Err(Error::config("N", format!("domain `{kind}` has dimension {}", shape.dim())));
        }
    }
    DomainGrid::new(shape, p.h.unwrap_or(default_h))
}

fn profile(p: &Params) -> Result<Arc<EmdenProfile>> {
    Ok(Arc::new(EmdenProfile::shoot(p.n.unwrap_or(3), required(&p.p, "p")?, p.tol.unwrap_or(1e-10))?))
}

#[derive(Serialize)]
struct EmdenOut {
    #[serde(flatten)]
    constants: EmdenConstants,
    shoot_tolerance: f64,
    ip_identity_error: f64,
    pohozaev_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ground: Option<GroundOut>,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct GroundOut {
    a: f64,
    Ra: f64,
    Mpa: f64,
    Mp1a: f64,
}

fn run_emden(cfg: &RunConfig) -> Result<String> {
    let prof = profile(&cfg.params)?;
    let ground = match cfg.params.a {
        Some(a) => Some(GroundState::new(prof.clone(), a)?),
        None => None,
    };
    let out = EmdenOut {
        constants: EmdenConstants::from_profile(prof.clone())?,
        shoot_tolerance: prof.shoot_tolerance,
        ip_identity_error: prof.ip_identity_error(),
        pohozaev_error: prof.pohozaev_error(),
        ground: ground.as_ref().map(|g| GroundOut { a: g.a, Ra: g.ra, Mpa: g.mpa, Mp1a: g.mp1a }),
    };
    write_json(&cfg.out, "emden.json", &out)?;
    let mut w = csv::Writer::from_path(cfg.out.join("emden_profile.csv"))?;
    w.write_record(["r", "u"])?;
    for (r, u) in prof.samples(cfg.params.samples.unwrap_or(200)) {
        w.write_record([r.to_string(), u.to_string()])?;
    }
    w.flush()?;
    Ok(format!("emden N = {} p = {}: u'(1) = {:.10}, I_p = {:.10}", prof.n, prof.p, prof.u1prime, prof.ip))
}

#[derive(Serialize)]
struct BallOut {
    lambda: f64,
    current: f64,
    alpha: f64,
    alpha_closed: Option<f64>,
    gamma: f64,
    r_gamma: f64,
    energy: f64,
    psi_max: f64,
    plasma_volume: f64,
    sigma: Option<f64>,
}

fn run_ball(cfg: &RunConfig) -> Result<String> {
    let p = &cfg.params;
    let prof = profile(p)?;
    let c = BallConstants::new(&prof);
    let drives: Vec<Drive> = if let Some(i) = p.current {
        vec![Drive::Current(i)]
    } else if let Some(l) = p.lambda {
        vec![Drive::Lambda(l)]
    } else {
        required(&p.lambda_ratio, "lambda_ratio")?.iter().map(|r| Drive::Lambda(r * c.lambdastar)).collect()
    };
    let mut rows = Vec::new();
    let mut sols = Vec::new();
    for d in drives {
        let s = solve_ball(prof.clone(), d)?;
        rows.push(BallOut {
            lambda: s.lambda,
            current: s.current,
            alpha: s.alpha,
            alpha_closed: c.alpha_closed(s.lambda),
            gamma: s.gamma,
            r_gamma: s.r_gamma,
            energy: s.energy(),
            psi_max: s.psi_max(),
            plasma_volume: s.plasma_volume(),
            sigma: (s.alpha < 0.0).then(|| s.sigma()),
        });
        sols.push(s);
    }
    write_json(&cfg.out, "ball.json", &rows)?;
    let lambdas: Vec<f64> = sols.iter().map(|s| s.lambda).collect();
    let branch = Branch::from_ball(prof.clone(), &lambdas)?;
    branch.write_json(&cfg.out.join("branch.json"))?;
    branch.write_csv(&cfg.out.join("branch.csv"))?;
    let last = sols.last().expect("at least one drive");
    let mut w = csv::Writer::from_path(cfg.out.join("ball_profile.csv"))?;
    w.write_record(["r", "v", "psi"])?;
    for (r, v, psi) in last.samples(p.samples.unwrap_or(200)) {
        w.write_record([r.to_string(), v.to_string(), psi.to_string()])?;
    }
    w.flush()?;
    Ok(format!("ball N = {} p = {}: {} solutions, lambda* = {:.10}, last alpha = {:.10}", prof.n, prof.p, rows.len(), c.lambdastar, last.alpha))
}

#[derive(Serialize)]
struct SobolevOut {
    q: f64,
    lambda: f64,
    iterations: usize,
    radial: Option<f64>,
}

fn run_sobolev(cfg: &RunConfig) -> Result<String> {
    let domain = build_domain(&cfg.params)?;
    let mut rows = Vec::new();
    for q in cfg.params.q.clone().unwrap_or_else(|| vec![2.0]) {
        let s = sobolev_constant(&domain, q)?;
        let radial = match &domain.shape {
            Shape::Ball { radius, .. } => Some(ball_sobolev(domain.n, *radius, q, 1e-11)?),
            _ => None,
        };
        domain.write_field_csv(&cfg.out.join(format!("minimizer_q{q}.csv")), &s.minimizer)?;
        rows.push(SobolevOut { q, lambda: s.lambda, iterations: s.iterations, radial });
    }
    write_json(&cfg.out, "sobolev.json", &rows)?;
    let text: Vec<String> = rows.iter().map(|r| format!("Lambda({}) = {:.8}", r.q, r.lambda)).collect();
    Ok(format!("sobolev on {}: {}", domain.describe(), text.join(", ")))
}

fn run_thresholds(cfg: &RunConfig) -> Result<String> {
    let domain = build_domain(&cfg.params)?;
    let table = SobolevTable::new(&domain);
    let p = required(&cfg.params.p, "p")?;
    let report = threshold_report(&table, p, &cfg.params.s.clone().unwrap_or_default())?;
    write_json(&cfg.out, "thresholds.json", &report)?;
    Ok(format!("thresholds on {}: muStar = {:.8}, lambda0 = {:?}", domain.describe(), report.mu_star, report.lambda0))
}

#[derive(Serialize)]
struct SolveOut {
    domain: String,
    p: f64,
    lambda: f64,
    alpha: f64,
    energy: f64,
    psi_max: f64,
    plasma_volume: f64,
    residual_pde: f64,
    residual_constraint: f64,
    newton_steps: usize,
    audit: Option<EnergyAudit>,
    functionals: Functionals,
    multistart_spread: Option<f64>,
    /// Smallest admissible μ_+ of the α >= 0 energy bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_plus: Option<f64>,
    notes: Vec<String>,
}

/// Walks the branch from the seed to λ.
fn solve_at(domain: &DomainGrid, p: f64, lambda: f64, steps: usize) -> Result<PlasmaSolution> {
    let c = continuation(domain, p, lambda, steps)?;
    if let Some(note) = c.branch.truncated {
        return Err(Error::NonConvergence(note));
    }
    Ok(c.solutions.into_iter().last().expect("seed is always present"))
}

fn run_solve(cfg: &RunConfig) -> Result<String> {
    let domain = build_domain(&cfg.params)?;
    let p = required(&cfg.params.p, "p")?;
    let lambda = required(&cfg.params.lambda, "lambda")?;
    let sol = solve_at(&domain, p, lambda, cfg.params.steps.unwrap_or(10))?;
    let spread = match cfg.params.starts {
        Some(k) if k > 0 => {
            let runs = multistart(&domain, p, lambda, k, cfg.seed)?;
            Some(runs.iter().map(|r| (r.alpha - sol.alpha).abs()).fold(0.0, f64::max))
        }
        _ => None,
    };
    let out = SolveOut {
        domain: domain.describe(),
        p: sol.p,
        lambda: sol.lambda,
        alpha: sol.alpha,
        energy: sol.energy,
        psi_max: sol.psi_max(),
        plasma_volume: sol.plasma_volume,
        residual_pde: sol.residual_pde,
        residual_constraint: sol.residual_constraint,
        newton_steps: sol.newton_steps,
        audit: energy_audit(&domain, &sol).ok(),
        functionals: functionals(&domain, &sol),
        multistart_spread: spread,
        mu_plus: mu_plus_min(domain.n, sol.p, sol.lambda, sol.alpha, sol.energy).ok(),
        notes: if sol.alpha >= 0.0 {
            vec!["mu_plus is computed with omega_N^{2/N}, not omega_{N-1}^{2/N}".into()]
        } else {
            Vec::new()
        },
    };
    write_json(&cfg.out, "solution.json", &out)?;
    domain.write_field_csv(&cfg.out.join("psi.csv"), &sol.psi)?;
    Ok(format!("solve on {}: lambda = {lambda}, alpha = {:.10}, E = {:.10}", domain.describe(), sol.alpha, sol.energy))
}

#[derive(Serialize)]
struct RefinedOut {
    h: f64,
    alpha: f64,
}

#[derive(Serialize)]
struct SequenceOut {
    lambda: f64,
    levels: Vec<RefinedOut>,
    alpha_extrapolated: Option<f64>,
}

fn run_continuation(cfg: &RunConfig) -> Result<String> {
    let domain = build_domain(&cfg.params)?;
    let p = required(&cfg.params.p, "p")?;
    let lambda_max = required(&cfg.params.lambda_max, "lambda_max")?;
    let c = continuation(&domain, p, lambda_max, cfg.params.steps.unwrap_or(20))?;
    c.branch.write_csv(&cfg.out.join("branch.csv"))?;
    c.branch.write_json(&cfg.out.join("branch.json"))?;
    let last = c.solutions.last().expect("seed is always present");
    if let Some(hs) = &cfg.params.refine {
        let mut levels = vec![RefinedOut { h: domain.h, alpha: last.alpha }];
        let mut grid = domain;
        let mut sol = last.clone();
        for &h in hs {
            let fine = DomainGrid::new(grid.shape.clone(), h)?;
            sol = refine(&grid, &sol, &fine)?;
            levels.push(RefinedOut { h, alpha: sol.alpha });
            grid = fine;
        }
        let k = levels.len();
        let halves = k >= 2 && (levels[k - 2].h / levels[k - 1].h - 2.0).abs() < 1e-9;
        let alpha_extrapolated = halves.then(|| richardson(levels[k - 2].alpha, levels[k - 1].alpha));
        write_json(&cfg.out, "sequence.json", &SequenceOut { lambda: last.lambda, levels, alpha_extrapolated })?;
    }
    let e = c.branch.entries.last().unwrap();
    Ok(format!(
        "continuation: {} entries up to lambda = {}, alpha = {:.10}, sign change {:?}{}",
        c.branch.entries.len(),
        e.lambda,
        e.alpha,
        c.branch.sign_change,
        c.branch.truncated.as_deref().map(|t| format!(", truncated: {t}")).unwrap_or_default()
    ))
}

fn pick_entry(branch: &Branch, entry: Option<&str>) -> Result<usize> {
    let n = branch.entries.len();
    match entry.unwrap_or("last") {
        "last" => n.checked_sub(1).ok_or_else(|| Error::config("from", "branch has no entries")),
        s => {
            let i: usize = s.parse().map_err(|_| Error::config("entry", format!("expected `last` or an index, got `{s}`")))?;
            if i >= n {
                return Err(Error::config("entry", format!("index {i} out of range ({n} entries)")));
            }
            Ok(i)
        }
    }
}

#[derive(Serialize)]
struct SpikesOut {
    source: String,
    #[serde(flatten)]
    report: SpikeReport,
    sigma_direct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quantization: Option<QuantizationTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    harmonic_center: Option<CenterCheck>,
}

/// Single spike on a convex grid domain against the predicted harmonic center.
#[derive(Serialize)]
struct CenterCheck {
    center: Vec<f64>,
    distance: f64,
    within_3h: bool,
}

fn center_check(domain: &DomainGrid, report: &SpikeReport) -> Result<Option<CenterCheck>> {
    if !domain.shape.is_convex() || report.spikes.len() != 1 {
        return Ok(None);
    }
    let Some(&c) = harmonic_centers(domain)?.first() else {
        return Ok(None);
    };
    let center = domain.position(c)[..domain.n].to_vec();
    let distance = crate::geometry::dist(&center, &report.spikes[0].z);
    Ok(Some(CenterCheck { center, distance, within_3h: distance <= 3.0 * domain.h }))
}

fn run_spikes(cfg: &RunConfig) -> Result<String> {
    let p = &cfg.params;
    let opts = SpikeOptions {
        sigma_min: p.sigma_min.unwrap_or(0.1),
        r_factor: p.r_factor.unwrap_or(4.0),
        merge_factor: p.merge_factor.unwrap_or(2.0),
    };
    let mut grid = None;
    let (rf, greens, ground, quant): (RescaledField, Box<dyn GreenProvider>, GroundState, Option<QuantizationTable>) = match &p.from {
        Some(path) => {
            let branch = Branch::read_json(path)?;
            let i = pick_entry(&branch, p.entry.as_deref())?;
            let lambda = branch.entries[i].lambda;
            match &branch.source {
                BranchSource::Ball { n, p: exp } => {
                    let prof = Arc::new(EmdenProfile::shoot(*n, *exp, 1e-10)?);
                    let ground = GroundState::new(prof.clone(), 0.0)?;
                    let sol = solve_ball(prof, Drive::Lambda(lambda))?;
                    let quant = quantization_sweep(&branch, &ground);
                    (RescaledField::from_ball(&sol)?, Box::new(BallGreen { n: *n, radius: sol.rn }), ground, Some(quant))
                }
                BranchSource::Grid { n, p: exp, shape, h, .. } => {
                    let domain = Arc::new(DomainGrid::new(shape.clone(), *h)?);
                    let sol = solve_at(&domain, *exp, lambda, p.steps.unwrap_or(10))?;
                    let ground = GroundState::new(Arc::new(EmdenProfile::shoot(*n, *exp, 1e-10)?), 0.0)?;
                    let rf = RescaledField::from_grid(domain.clone(), &sol)?;
                    let quant = quantization_sweep(&branch, &ground);
                    let probe = crate::spikes::detect_spikes(&rf, &ground, opts)?;
                    let centers: Vec<Vec<f64>> = probe.spikes.iter().map(|s| s.z.clone()).collect();
                    grid = Some(domain.clone());
                    (rf, Box::new(GridGreen::new(domain, &centers)?), ground, Some(quant))
                }
            }
        }
        None => {
            let n = p.n.unwrap_or(3);
            let prof = Arc::new(EmdenProfile::shoot(n, required(&p.p, "p")?, 1e-10)?);
            let ground = GroundState::new(prof.clone(), 0.0)?;
            let mu = required(&p.mu, "mu")?;
            let fam = SpikeFamily::new(GroundState::new(prof, p.a.unwrap_or(0.0))?, mu)?;
            let flat = p.centers.clone().unwrap_or_else(|| vec![0.0; n]);
            if flat.is_empty() || flat.len() % n != 0 {
                return Err(Error::config("centers", format!("expected a multiple of {n} coordinates")));
            }
            let parts = flat.chunks(n).map(|c| FamilyField::new(fam.clone(), c.to_vec())).collect();
            let rf = RescaledField::synthetic(Box::new(Superposition { parts }), fam.ground.base.p, mu, "synthetic spike family");
            (rf, Box::new(FreeSpace { n }), ground, None)
        }
    };
    let report = analyze(&rf, &ground, opts, Some(greens.as_ref()))?;
    let summary = format!("spikes: {} detected, sigma = {:.8}, quantum = {:.8}", report.count(), report.sigma, report.quantum);
    let harmonic_center = match &grid {
        Some(domain) => center_check(domain, &report)?,
        None => None,
    };
    let out = SpikesOut { source: rf.source.clone(), report, sigma_direct: rf.sigma_direct, quantization: quant, harmonic_center };
    write_json(&cfg.out, "spikes.json", &out)?;
    Ok(summary)
}

#[derive(Serialize)]
struct GreenOut {
    domain: String,
    points: Vec<Vec<f64>>,
    robin: Vec<Option<f64>>,
    harmonic_centers: Vec<Vec<f64>>,
    kirchhoff_routh: Option<(f64, Vec<Vec<f64>>)>,
}

fn run_green(cfg: &RunConfig) -> Result<String> {
    let domain = build_domain(&cfg.params)?;
    let n = domain.n;
    let flat = cfg.params.points.clone().unwrap_or_default();
    if flat.len() % n != 0 {
        return Err(Error::config("points", format!("expected a multiple of {n} coordinates")));
    }
    let mut nodes = Vec::new();
    for c in flat.chunks(n) {
        nodes.push(domain.nearest_node(c).ok_or_else(|| Error::config("points", format!("{c:?} is not inside the domain")))?);
    }
    let robin: Vec<Option<f64>> = nodes.iter().map(|&i| robin_function(&domain, i).ok()).collect();
    let centers = harmonic_centers(&domain)?;
    let kr = if nodes.is_empty() {
        None
    } else {
        let k = cfg.params.k.clone().unwrap_or_else(|| vec![1.0; nodes.len()]);
        if k.len() != nodes.len() {
            return Err(Error::config("k", "one strength per point is required"));
        }
        let r = kirchhoff_routh(&domain, &nodes, &k)?;
        Some((r.value, r.gradient.iter().map(|g| g[..n].to_vec()).collect()))
    };
    if let Some(&y) = nodes.first() {
        let t = green_function(&domain, y)?;
        let mut w = csv::Writer::from_path(cfg.out.join("green.csv"))?;
        let mut header: Vec<&str> = ["x", "y", "z"][..n].to_vec();
        header.extend(["G", "H"]);
        w.write_record(&header)?;
        for i in 0..domain.len() {
            let x = domain.position(i);
            let mut row: Vec<String> = x[..n].iter().map(|c| c.to_string()).collect();
            row.push(t.g[i].to_string());
            row.push(t.regular[i].to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    let pos = |i: usize| domain.position(i)[..n].to_vec();
    let out = GreenOut {
        domain: domain.describe(),
        points: nodes.iter().map(|&i| pos(i)).collect(),
        robin,
        harmonic_centers: centers.iter().map(|&i| pos(i)).collect(),
        kirchhoff_routh: kr,
    };
    write_json(&cfg.out, "green.json", &out)?;
    Ok(format!("green on {}: harmonic centers {:?}", out.domain, out.harmonic_centers))
}

fn run_report(cfg: &RunConfig) -> Result<String> {
    let inputs = match &cfg.params.inputs {
        Some(v) => v.clone(),
        None => {
            let mut v: Vec<PathBuf> = std::fs::read_dir(&cfg.out)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != "manifest.json"))
                .collect();
            v.sort();
            v
        }
    };
    let mut manifest = BTreeMap::new();
    for path in &inputs {
        let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        manifest.insert(name, value);
    }
    write_json(&cfg.out, "manifest.json", &manifest)?;
    Ok(format!("report: {} artifacts collected", manifest.len()))
}

/// Executes a resolved configuration and returns the summary line.
pub fn execute(cfg: &RunConfig) -> Result<String> {
    std::fs::create_dir_all(&cfg.out)?;
    match cfg.command {
        Kind::Emden => run_emden(cfg),
        Kind::Ball => run_ball(cfg),
        Kind::Sobolev => run_sobolev(cfg),
        Kind::Thresholds => run_thresholds(cfg),
        Kind::Solve => run_solve(cfg),
        Kind::Continuation => run_continuation(cfg),
        Kind::Spikes => run_spikes(cfg),
        Kind::Green => run_green(cfg),
        Kind::Report => run_report(cfg),
    }
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        self.command.name()
    }
}

/// Parses and validates arguments (and the config file they name) without running anything.
pub fn parse_args<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::config("arguments", e.to_string().lines().next().unwrap_or_default().to_string()))?;
    resolve(cli)
}

/// Parses arguments, runs, prints the summary and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match resolve(cli).and_then(|cfg| execute(&cfg)) {
        Ok(line) => {
            println!("{line}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
