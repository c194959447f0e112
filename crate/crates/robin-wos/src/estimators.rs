//! Monte Carlo expectation layer: the Robin Feynman-Kac estimator over N
//! independent paths, a classic absorbing walk-on-spheres baseline for the
//! Dirichlet problem, and deterministic error aggregation.
//!
//! Reproducibility contract: path i always draws from the stream with id i
//! derived from the base seed, paths are embarrassingly parallel, and the
//! reduction is a compensated sequential sum in stream-id order — so results
//! are bit-identical for any worker count.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{Domain, Point3, ShellParams};
use crate::problems::ProblemSpec;
use crate::stochastic::{make_stream, uniform_on_sphere};
use crate::wos::{simulate_path, WosError};

/// Paths between progress callbacks.
pub const PROGRESS_EVERY: u64 = 10_000;

/// Step cap for a single absorbing walk; expected walk lengths are
/// logarithmic in 1/absorb_eps, so hitting this indicates a bug.
const DIRICHLET_STEP_CAP: u64 = 100_000;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Wos(#[from] WosError),
    #[error("no rows to aggregate")]
    NoRows,
    #[error("aggregate relative error is undefined: the exact values are all zero")]
    DegenerateExact,
    #[error("an absorbing walk exceeded {cap} steps without reaching the boundary")]
    PathStalled { cap: u64 },
}

/// Per-evaluation-point result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateRow {
    pub point_index: usize,
    pub point: Point3,
    pub estimate: f64,
    pub std_err: f64,
    /// Reference value when the problem carries one, NaN otherwise.
    pub exact: f64,
    /// |estimate − exact| / |exact| when exact ≠ 0, NaN otherwise.
    pub rel_err: f64,
}

impl EstimateRow {
    fn from_samples(point_index: usize, point: Point3, mean: f64, std_err: f64, exact: Option<f64>) -> Self {
        let exact = exact.unwrap_or(f64::NAN);
        let rel_err = if exact != 0.0 { (mean - exact).abs() / exact.abs() } else { f64::NAN };
        EstimateRow { point_index, point, estimate: mean, std_err, exact, rel_err }
    }

    /// Error row for an evaluation point outside the domain: the run
    /// continues, the row carries NaNs.
    fn outside_domain(point_index: usize, point: Point3) -> Self {
        EstimateRow {
            point_index,
            point,
            estimate: f64::NAN,
            std_err: f64::NAN,
            exact: f64::NAN,
            rel_err: f64::NAN,
        }
    }
}

/// One full Robin estimation run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub domain: Domain,
    pub shell: ShellParams,
    pub problem: ProblemSpec,
    pub n_paths: u64,
    pub base_seed: u64,
    pub eval_points: Vec<Point3>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        self.domain
            .validate()
            .map_err(|e| EstimatorError::InvalidConfig(e.to_string()))?;
        if self.n_paths == 0 {
            return Err(EstimatorError::InvalidConfig("n_paths must be at least 1".into()));
        }
        if self.problem.np == 0 {
            return Err(EstimatorError::InvalidConfig("np must be at least 1".into()));
        }
        if self.shell.eps() >= self.domain.inradius() {
            return Err(EstimatorError::InvalidConfig(format!(
                "shell width eps = {} must be strictly less than the domain inradius {}",
                self.shell.eps(),
                self.domain.inradius()
            )));
        }
        if let Some(gamma) = self.problem.c.constant_gamma() {
            if !(gamma >= 0.0) || !gamma.is_finite() {
                return Err(EstimatorError::InvalidConfig(format!(
                    "constant coefficient must be finite and nonnegative, got {gamma}"
                )));
            }
        }
        if self.eval_points.is_empty() {
            return Err(EstimatorError::InvalidConfig("at least one evaluation point is required".into()));
        }
        Ok(())
    }
}

/// Compensated (Neumaier) summation: extended effective precision without
/// leaving f64, at a cost of one extra add per term.
fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// Mean and standard error of a sample, reduced deterministically in the
/// order given (two-pass sample variance over the compensated mean).
fn mean_and_std_err(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = neumaier_sum(samples.iter().copied()) / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let ss = neumaier_sum(samples.iter().map(|&v| {
        let d = v - mean;
        d * d
    }));
    let var = (ss / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

/// Runs the Robin estimator at every evaluation point.
///
/// Point k uses streams 0..N−1 of the base seed; the per-path contributions
/// are reduced in stream order, so the output is bit-identical for any
/// worker count. Evaluation points outside the domain yield NaN rows and do
/// not abort the run.
pub fn estimate_robin(cfg: &RunConfig) -> Result<Vec<EstimateRow>, EstimatorError> {
    estimate_robin_with_progress(cfg, &|_, _| {})
}

/// [`estimate_robin`] with a progress callback, invoked from worker threads
/// as `(point_index, paths_completed)` every [`PROGRESS_EVERY`] paths.
pub fn estimate_robin_with_progress(
    cfg: &RunConfig,
    progress: &(dyn Fn(usize, u64) + Sync),
) -> Result<Vec<EstimateRow>, EstimatorError> {
    cfg.validate()?;
    let exact_at = |p: Point3| cfg.problem.exact.as_ref().map(|u| u(p));
    let mut rows = Vec::with_capacity(cfg.eval_points.len());
    for (point_index, &point) in cfg.eval_points.iter().enumerate() {
        if !cfg.domain.contains(point) {
            rows.push(EstimateRow::outside_domain(point_index, point));
            continue;
        }
        let contributions: Vec<Result<f64, WosError>> = (0..cfg.n_paths as usize)
            .into_par_iter()
            .map(|sid| {
                let mut stream = make_stream(cfg.base_seed, sid as u64);
                let result = simulate_path(
                    &cfg.domain,
                    &cfg.shell,
                    &cfg.problem,
                    cfg.problem.np,
                    &mut stream,
                    point,
                )
                .map(|path| path.contribution);
                let done = sid as u64 + 1;
                if done % PROGRESS_EVERY == 0 {
                    progress(point_index, done);
                }
                result
            })
            .collect();
        let samples = contributions.into_iter().collect::<Result<Vec<f64>, WosError>>()?;
        let (mean, std_err) = mean_and_std_err(&samples);
        rows.push(EstimateRow::from_samples(point_index, point, mean, std_err, exact_at(point)));
    }
    Ok(rows)
}

/// Absorbing walk-on-spheres baseline for the Laplace Dirichlet problem:
/// jump on maximal spheres until the boundary is closer than `absorb_eps`,
/// then score `phi` at the closest boundary point. `exact` is the reference
/// value when the harmonic extension of `phi` is known at `x`.
pub fn estimate_dirichlet(
    d: &Domain,
    phi: &(dyn Fn(Point3) -> f64 + Sync),
    x: Point3,
    n_paths: u64,
    absorb_eps: f64,
    base_seed: u64,
    exact: Option<f64>,
) -> Result<EstimateRow, EstimatorError> {
    d.validate().map_err(|e| EstimatorError::InvalidConfig(e.to_string()))?;
    if !d.contains(x) {
        return Err(EstimatorError::InvalidConfig(format!(
            "evaluation point ({}, {}, {}) lies outside the domain",
            x.x, x.y, x.z
        )));
    }
    if !(absorb_eps > 0.0) || !absorb_eps.is_finite() {
        return Err(EstimatorError::InvalidConfig(format!(
            "absorb_eps must be positive and finite, got {absorb_eps}"
        )));
    }
    if n_paths == 0 {
        return Err(EstimatorError::InvalidConfig("n_paths must be at least 1".into()));
    }

    let scores: Vec<Result<f64, EstimatorError>> = (0..n_paths as usize)
        .into_par_iter()
        .map(|sid| {
            let mut stream = make_stream(base_seed, sid as u64);
            let mut pos = x;
            for _ in 0..DIRICHLET_STEP_CAP {
                let distance = d.distance_to_boundary(pos).map_err(WosError::from)?;
                if distance < absorb_eps {
                    let (q, _) = d.closest_boundary_point(pos).map_err(WosError::from)?;
                    return Ok(phi(q));
                }
                let y = uniform_on_sphere(&mut stream, pos, distance);
                pos = if d.contains(y) {
                    y
                } else {
                    d.closest_boundary_point(y).map_err(WosError::from)?.0
                };
            }
            Err(EstimatorError::PathStalled { cap: DIRICHLET_STEP_CAP })
        })
        .collect();
    let samples = scores.into_iter().collect::<Result<Vec<f64>, EstimatorError>>()?;
    let (mean, std_err) = mean_and_std_err(&samples);
    Ok(EstimateRow::from_samples(0, x, mean, std_err, exact))
}

/// ℓ2 relative aggregate error: sqrt(Σ(estimate−exact)²) / sqrt(Σ exact²).
pub fn aggregate_error(rows: &[EstimateRow]) -> Result<f64, EstimatorError> {
    if rows.is_empty() {
        return Err(EstimatorError::NoRows);
    }
    let num = neumaier_sum(rows.iter().map(|r| {
        let d = r.estimate - r.exact;
        d * d
    }));
    let den = neumaier_sum(rows.iter().map(|r| r.exact * r.exact));
    if den == 0.0 {
        return Err(EstimatorError::DegenerateExact);
    }
    Ok(num.sqrt() / den.sqrt())
}
