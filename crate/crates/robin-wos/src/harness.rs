//! Experiment orchestration: named test domains, the two built-in
//! evaluation-point sets, CSV emission, and the CLI-facing configuration
//! type with its flag round-trip.
//!
//! Output contract: results go to the CSV (config comment, header, one row
//! per point, aggregate footer) and a one-line summary on standard output;
//! progress ticks go to standard error. The CSV contains nothing
//! time-dependent, so identical configs produce byte-identical files.

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::estimators::{
    aggregate_error, estimate_dirichlet, estimate_robin_with_progress, EstimateRow,
    EstimatorError, RunConfig,
};
use crate::geometry::{Domain, GeometryError, Point3, ShellParams};
use crate::problems::{CoefficientSpec, ProblemSpec};
use crate::skorohod::{
    continuum_local_time_mean, discrete_local_time_mean, pathwise_residual, sample_brownian_path,
    solve_halfline, SkorohodError,
};
use crate::stochastic::make_stream;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Skorohod(#[from] SkorohodError),
    #[error("cannot write `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("self-check failed: {0}")]
    CheckFailed(String),
}

/// The three named test domains.
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum DomainKind {
    Cube,
    Sphere,
    Ellipsoid,
}

impl DomainKind {
    /// The concrete shapes behind the names: a cube of side 2, the unit
    /// sphere, and the ellipsoid with semi-axes (3, 2, 1), all centered at
    /// the origin.
    pub fn to_domain(self) -> Domain {
        match self {
            DomainKind::Cube => Domain::cube(1.0).expect("unit cube is valid"),
            DomainKind::Sphere => Domain::sphere(1.0).expect("unit sphere is valid"),
            DomainKind::Ellipsoid => {
                Domain::ellipsoid(3.0, 2.0, 1.0).expect("(3,2,1) ellipsoid is valid")
            }
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.write_str(match self {
            DomainKind::Cube => "cube",
            DomainKind::Sphere => "sphere",
            DomainKind::Ellipsoid => "ellipsoid",
        })
    }
}

impl FromStr for DomainKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cube" => Ok(DomainKind::Cube),
            "sphere" => Ok(DomainKind::Sphere),
            "ellipsoid" => Ok(DomainKind::Ellipsoid),
            other => Err(format!("unknown domain `{other}` (expected cube, sphere or ellipsoid)")),
        }
    }
}

/// Where to evaluate the solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EvalSet {
    /// 15 points on a latitude circle of radius 0.6.
    Circle,
    /// 15 points on the segment from (0.4, 0.4, 0.6) to (0.1, 0, 0).
    Segment,
    /// A single caller-supplied point.
    Point(Point3),
}

impl EvalSet {
    pub fn points(&self) -> Vec<Point3> {
        match *self {
            EvalSet::Circle => eval_points_circle(),
            EvalSet::Segment => eval_points_segment(),
            EvalSet::Point(p) => vec![p],
        }
    }
}

impl fmt::Display for EvalSet {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EvalSet::Circle => out.write_str("circle"),
            EvalSet::Segment => out.write_str("segment"),
            EvalSet::Point(p) => write!(out, "point:{},{},{}", p.x, p.y, p.z),
        }
    }
}

impl FromStr for EvalSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "circle" => return Ok(EvalSet::Circle),
            "segment" => return Ok(EvalSet::Segment),
            _ => {}
        }
        if let Some(raw) = s.strip_prefix("point:") {
            let parts: Vec<&str> = raw.split(',').collect();
            if parts.len() != 3 {
                return Err(format!("expected point:<x>,<y>,<z>, got `{s}`"));
            }
            let mut coords = [0.0f64; 3];
            for (slot, text) in coords.iter_mut().zip(&parts) {
                *slot = text
                    .trim()
                    .parse()
                    .map_err(|_| format!("invalid coordinate `{text}` in `{s}`"))?;
            }
            let p = Point3::new(coords[0], coords[1], coords[2]);
            if !p.is_finite() {
                return Err(format!("coordinates must be finite in `{s}`"));
            }
            return Ok(EvalSet::Point(p));
        }
        Err(format!("unknown eval set `{s}` (expected circle, segment or point:<x>,<y>,<z>)"))
    }
}

/// What the binary should do.
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum Mode {
    /// Full Robin estimation run writing a CSV.
    Robin,
    /// Absorbing-walk baseline against a known harmonic extension.
    DirichletCheck,
    /// 1-D reflection oracle: mean local time vs the closed form.
    SkorohodCheck,
}

impl fmt::Display for Mode {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.write_str(match self {
            Mode::Robin => "robin",
            Mode::DirichletCheck => "dirichlet-check",
            Mode::SkorohodCheck => "skorohod-check",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "robin" => Ok(Mode::Robin),
            "dirichlet-check" => Ok(Mode::DirichletCheck),
            "skorohod-check" => Ok(Mode::SkorohodCheck),
            other => Err(format!(
                "unknown mode `{other}` (expected robin, dirichlet-check or skorohod-check)"
            )),
        }
    }
}

/// Everything a run needs, mirroring the CLI flags one to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    pub c: CoefficientSpec,
    pub n_paths: u64,
    pub np: u64,
    pub dx: f64,
    pub eps_mult: u32,
    pub seed: u64,
    pub eval: EvalSet,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Translate the named configuration into a concrete estimator run,
    /// rejecting evaluation points that are not strictly interior.
    pub fn to_run_config(&self) -> Result<RunConfig, HarnessError> {
        if self.n_paths == 0 || self.np == 0 {
            return Err(HarnessError::InvalidConfig(
                "--paths and --np must be at least 1".into(),
            ));
        }
        let domain = self.domain.to_domain();
        let shell = ShellParams::new(self.dx, self.eps_mult)?;
        let eval_points = self.eval.points();
        for (i, &p) in eval_points.iter().enumerate() {
            if !domain.contains(p) || domain.distance_to_boundary(p)? <= 0.0 {
                return Err(HarnessError::InvalidConfig(format!(
                    "evaluation point {i} at ({}, {}, {}) is not strictly interior to the {} domain",
                    p.x, p.y, p.z, self.domain
                )));
            }
        }
        let cfg = RunConfig {
            domain,
            shell,
            problem: ProblemSpec::manufactured(self.c, self.np),
            n_paths: self.n_paths,
            base_seed: self.seed,
            eval_points,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// 15 monitoring points on the circle of radius r = 0.6 at colatitude
/// θ₂ = π/4: (r·cosθ₁·sinθ₂, r·sinθ₁·sinθ₂, r·cosθ₂) with θ₁ = k·2π/30
/// for k = 1..15.
pub fn eval_points_circle() -> Vec<Point3> {
    let r = 0.6f64;
    let theta2 = std::f64::consts::FRAC_PI_4;
    let (sin2, cos2) = theta2.sin_cos();
    (1..=15)
        .map(|k| {
            let theta1 = k as f64 * 2.0 * std::f64::consts::PI / 30.0;
            let (sin1, cos1) = theta1.sin_cos();
            Point3::new(r * cos1 * sin2, r * sin1 * sin2, r * cos2)
        })
        .collect()
}

/// 15 uniformly spaced points on the segment from A = (0.4, 0.4, 0.6) to
/// B = (0.1, 0, 0), point i = A + (i−1)/14 · (B − A); evaluated in the
/// endpoint-exact form A·(1−t) + B·t.
pub fn eval_points_segment() -> Vec<Point3> {
    let a = Point3::new(0.4, 0.4, 0.6);
    let b = Point3::new(0.1, 0.0, 0.0);
    (1..=15)
        .map(|i| {
            let t = (i - 1) as f64 / 14.0;
            a * (1.0 - t) + b * t
        })
        .collect()
}

/// Post-run numbers for the summary line (stdout only; never in the CSV).
#[derive(Clone, Copy, Debug)]
pub struct RunSummary {
    pub aggregate_err: f64,
    pub wall_secs: f64,
    pub paths_per_sec: f64,
}

/// Full Robin experiment: estimate at every evaluation point, write the CSV
/// and print the summary line. Progress goes to standard error every 10⁴
/// paths per point.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<EstimateRow>, RunSummary), HarnessError> {
    let run_cfg = cfg.to_run_config()?;
    let n_paths = run_cfg.n_paths;
    let started = Instant::now();
    let rows = estimate_robin_with_progress(&run_cfg, &|point_index, done| {
        eprintln!("point {point_index}: {done}/{n_paths} paths");
    })?;
    let wall_secs = started.elapsed().as_secs_f64();
    let aggregate_err = aggregate_error(&rows)?;
    write_csv(cfg, &rows, aggregate_err, &cfg.out)?;
    let total_paths = (rows.len() as u64 * n_paths) as f64;
    let summary = RunSummary {
        aggregate_err,
        wall_secs,
        paths_per_sec: total_paths / wall_secs.max(1e-9),
    };
    println!(
        "Err={:.4}% wall={:.2}s paths/sec={:.0} out={}",
        100.0 * summary.aggregate_err,
        summary.wall_secs,
        summary.paths_per_sec,
        cfg.out.display()
    );
    Ok((rows, summary))
}

/// The leading CSV comment: the exact flags that reproduce this run.
pub fn format_config_comment(cfg: &ExperimentConfig) -> String {
    format!(
        "# config: --domain {} --c {} --paths {} --np {} --dx {} --eps-mult {} --seed {} --eval {} --out {}",
        cfg.domain,
        cfg.c,
        cfg.n_paths,
        cfg.np,
        cfg.dx,
        cfg.eps_mult,
        cfg.seed,
        cfg.eval,
        cfg.out.display()
    )
}

/// Inverse of [`format_config_comment`]: recovers the configuration from the
/// CSV's first line. `--out` consumes the remainder of the line, so paths
/// with spaces survive the round trip.
pub fn parse_config_comment(line: &str) -> Result<ExperimentConfig, HarnessError> {
    let body = line
        .strip_prefix("# config:")
        .ok_or_else(|| HarnessError::InvalidConfig("line does not start with `# config:`".into()))?
        .trim();
    let mut domain = None;
    let mut c = None;
    let mut n_paths = None;
    let mut np = None;
    let mut dx = None;
    let mut eps_mult = None;
    let mut seed = None;
    let mut eval = None;
    let mut out = None;

    fn parse<T: FromStr>(flag: &str, value: &str) -> Result<T, HarnessError>
    where
        T::Err: fmt::Display,
    {
        value
            .parse()
            .map_err(|e| HarnessError::InvalidConfig(format!("{flag} {value}: {e}")))
    }

    let mut tokens = body.split_whitespace();
    while let Some(flag) = tokens.next() {
        if flag == "--out" {
            let rest: Vec<&str> = tokens.collect();
            if rest.is_empty() {
                return Err(HarnessError::InvalidConfig("--out needs a value".into()));
            }
            out = Some(PathBuf::from(rest.join(" ")));
            break;
        }
        let value = tokens
            .next()
            .ok_or_else(|| HarnessError::InvalidConfig(format!("{flag} needs a value")))?;
        match flag {
            "--domain" => domain = Some(parse::<DomainKind>(flag, value)?),
            "--c" => c = Some(parse::<CoefficientSpec>(flag, value)?),
            "--paths" => n_paths = Some(parse::<u64>(flag, value)?),
            "--np" => np = Some(parse::<u64>(flag, value)?),
            "--dx" => dx = Some(parse::<f64>(flag, value)?),
            "--eps-mult" => eps_mult = Some(parse::<u32>(flag, value)?),
            "--seed" => seed = Some(parse::<u64>(flag, value)?),
            "--eval" => eval = Some(parse::<EvalSet>(flag, value)?),
            other => {
                return Err(HarnessError::InvalidConfig(format!("unknown flag `{other}`")));
            }
        }
    }

    let missing = |name: &str| HarnessError::InvalidConfig(format!("missing flag {name}"));
    Ok(ExperimentConfig {
        domain: domain.ok_or_else(|| missing("--domain"))?,
        c: c.ok_or_else(|| missing("--c"))?,
        n_paths: n_paths.ok_or_else(|| missing("--paths"))?,
        np: np.ok_or_else(|| missing("--np"))?,
        dx: dx.ok_or_else(|| missing("--dx"))?,
        eps_mult: eps_mult.ok_or_else(|| missing("--eps-mult"))?,
        seed: seed.ok_or_else(|| missing("--seed"))?,
        eval: eval.ok_or_else(|| missing("--eval"))?,
        out: out.ok_or_else(|| missing("--out"))?,
    })
}

/// Writes the result CSV: config comment, header, one row per point,
/// aggregate footer. The write is atomic (temp file + rename), replacing any
/// existing file; empty row lists are rejected before anything is created.
pub fn write_csv(
    cfg: &ExperimentConfig,
    rows: &[EstimateRow],
    aggregate_err: f64,
    path: &Path,
) -> Result<(), HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::InvalidConfig("refusing to write a CSV with no rows".into()));
    }
    let mut text = String::new();
    text.push_str(&format_config_comment(cfg));
    text.push('\n');
    text.push_str("point_index,x,y,z,estimate,std_err,exact,rel_err\n");
    for r in rows {
        // `{}` on f64 prints the shortest representation that parses back
        // to the same bits, which is exactly the round-trip contract.
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.point_index, r.point.x, r.point.y, r.point.z, r.estimate, r.std_err, r.exact, r.rel_err
        ));
    }
    text.push_str(&format!(
        "# Err={},N={},NP={},dx={},eps={},seed={}\n",
        aggregate_err,
        cfg.n_paths,
        cfg.np,
        cfg.dx,
        f64::from(cfg.eps_mult) * cfg.dx,
        cfg.seed
    ));

    let io_err = |source| HarnessError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(text.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Dirichlet baseline run: the boundary data φ(p) = p.x extends harmonically
/// to u(p) = p.x, so every evaluation point has a known exact value. The
/// absorbing shell width is the configured dx.
pub fn run_dirichlet_check(cfg: &ExperimentConfig) -> Result<Vec<EstimateRow>, HarnessError> {
    let domain = cfg.domain.to_domain();
    let phi = |p: Point3| p.x;
    let mut rows = Vec::new();
    for (i, p) in cfg.eval.points().into_iter().enumerate() {
        let mut row =
            estimate_dirichlet(&domain, &phi, p, cfg.n_paths, cfg.dx, cfg.seed, Some(p.x))?;
        row.point_index = i;
        rows.push(row);
    }
    Ok(rows)
}

/// Numbers reported by the 1-D reflection self-check.
#[derive(Clone, Copy, Debug)]
pub struct SkorohodReport {
    pub n_paths: u64,
    pub dt: f64,
    pub n_steps: usize,
    /// Sample mean of the regulator L at t = 1.
    pub mean_l1: f64,
    pub std_err: f64,
    /// Closed-form expectation of the gridded L(1).
    pub discrete_expectation: f64,
    /// Continuum expectation 2·√(2/π).
    pub continuum_mean: f64,
    /// Worst Skorohod-identity residual across all paths.
    pub max_residual: f64,
}

/// Runs `n_paths` Brownian drivers on the grid of step `dt` over [0, 1],
/// solves the half-line reflection for each, validates the solver invariants
/// pathwise, and reports the L(1) statistics.
pub fn run_skorohod_check(n_paths: u64, dt: f64, seed: u64) -> Result<SkorohodReport, HarnessError> {
    if !(dt > 0.0 && dt <= 1.0) {
        return Err(HarnessError::InvalidConfig(format!(
            "skorohod-check needs 0 < dt <= 1 (dt is taken from --dx), got {dt}"
        )));
    }
    if n_paths == 0 {
        return Err(HarnessError::InvalidConfig("--paths must be at least 1".into()));
    }
    let n_steps = (1.0 / dt).round() as usize;
    let per_path: Vec<Result<(f64, f64), HarnessError>> = (0..n_paths as usize)
        .into_par_iter()
        .map(|sid| {
            let mut stream = make_stream(seed, sid as u64);
            let f = sample_brownian_path(&mut stream, dt, n_steps)?;
            let sol = solve_halfline(&f)?;
            let residual = pathwise_residual(&f, &sol)?;
            let xi = sol.xi();
            let ell = sol.ell();
            for i in 0..f.len() {
                if xi[i] < 0.0 {
                    return Err(HarnessError::CheckFailed(format!(
                        "path {sid}: xi went negative ({})",
                        xi[i]
                    )));
                }
                if i > 0 {
                    if ell[i] < ell[i - 1] {
                        return Err(HarnessError::CheckFailed(format!(
                            "path {sid}: ell decreased at step {i}"
                        )));
                    }
                    if ell[i] > ell[i - 1] && xi[i].abs() > 1e-12 {
                        return Err(HarnessError::CheckFailed(format!(
                            "path {sid}: ell grew while xi = {} at step {i}",
                            xi[i]
                        )));
                    }
                }
            }
            Ok((*ell.last().expect("paths are nonempty"), residual))
        })
        .collect();

    let mut l1 = Vec::with_capacity(per_path.len());
    let mut max_residual = 0.0f64;
    for r in per_path {
        let (l, residual) = r?;
        l1.push(l);
        max_residual = max_residual.max(residual);
    }
    let n = l1.len() as f64;
    let mean_l1 = l1.iter().sum::<f64>() / n;
    let var = l1.iter().map(|v| (v - mean_l1) * (v - mean_l1)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(SkorohodReport {
        n_paths,
        dt,
        n_steps,
        mean_l1,
        std_err: (var / n).sqrt(),
        discrete_expectation: discrete_local_time_mean(dt, n_steps),
        continuum_mean: continuum_local_time_mean(1.0),
        max_residual,
    })
}
