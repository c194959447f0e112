//! The half-line Skorohod problem on discrete paths — the 1-D oracle that
//! pins the local-time normalization used by the 3-D walk.
//!
//! For a driver f with f(0) >= 0 the reflected path is explicit:
//! xi(t) = f(t) until the first time tau that f goes negative, and
//! f(t) - inf_{tau<=s<=t} f(s) afterwards. With the outward normal n = -1 at
//! the origin and the factor 1/2 of the Skorohod equation
//! xi = f - (1/2) * integral(n dL), the regulator is
//! L(t) = -2 * min(0, inf_{s<=t} f(s)), so xi = f + L/2 holds exactly.
//!
//! Grid semantics: the running infimum is taken over grid points only, with
//! no sub-grid interpolation. The price is an O(sqrt(dt)) downward bias in
//! E[L] relative to the continuum, which [`discrete_local_time_mean`] captures
//! in closed form.

use thiserror::Error;

use crate::stochastic::RngStream;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SkorohodError {
    #[error("path is invalid: {0}")]
    InvalidPath(String),
    #[error("driver starts negative (f(0) = {0}); the half-line solution requires f(0) >= 0")]
    StartsNegative(f64),
    #[error("shape mismatch: path has {path_len} samples, solution has {solution_len}")]
    ShapeMismatch { path_len: usize, solution_len: usize },
}

/// A scalar path sampled on a strictly increasing grid starting at t = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Path1D {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Path1D {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, SkorohodError> {
        if times.is_empty() {
            return Err(SkorohodError::InvalidPath("empty time grid".into()));
        }
        if times.len() != values.len() {
            return Err(SkorohodError::InvalidPath(format!(
                "{} times vs {} values",
                times.len(),
                values.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(SkorohodError::InvalidPath(format!(
                "grid must start at 0, got {}",
                times[0]
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SkorohodError::InvalidPath("times must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SkorohodError::InvalidPath("values must be finite".into()));
        }
        Ok(Path1D { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reflected path and regulator produced by [`solve_halfline`].
#[derive(Clone, Debug, PartialEq)]
pub struct SkorohodSolution {
    xi: Vec<f64>,
    ell: Vec<f64>,
}

impl SkorohodSolution {
    /// The reflected path xi >= 0.
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// The nondecreasing regulator L, growing only while xi = 0.
    pub fn ell(&self) -> &[f64] {
        &self.ell
    }

    /// Test hook: rebuild a solution from raw sequences (e.g. perturbed ones)
    /// so the residual check can be exercised against invalid data.
    pub fn from_parts(xi: Vec<f64>, ell: Vec<f64>) -> Self {
        SkorohodSolution { xi, ell }
    }
}

/// Explicit half-line Skorohod solution on the grid.
///
/// Writing m(t) = min(0, inf_{s<=t} f(s)) over grid points, the solution is
/// xi = f - m and L = -2m: before the first negative value of f this gives
/// xi = f, L = 0, and afterwards m equals the running infimum from tau, so
/// both branches of the explicit formula are covered. xi - f - L/2 vanishes
/// identically, also in floating point, because both terms reuse the same m.
pub fn solve_halfline(f: &Path1D) -> Result<SkorohodSolution, SkorohodError> {
    let values = f.values();
    if values[0] < 0.0 {
        return Err(SkorohodError::StartsNegative(values[0]));
    }
    let mut xi = Vec::with_capacity(values.len());
    let mut ell = Vec::with_capacity(values.len());
    let mut running_min = 0.0f64;
    for &v in values {
        if v < running_min {
            running_min = v;
        }
        xi.push(v - running_min);
        ell.push(-2.0 * running_min);
    }
    Ok(SkorohodSolution { xi, ell })
}

/// Max-norm residual of the Skorohod identity, max_i |xi_i - f_i - L_i/2|.
pub fn pathwise_residual(f: &Path1D, sol: &SkorohodSolution) -> Result<f64, SkorohodError> {
    if f.len() != sol.xi.len() || f.len() != sol.ell.len() {
        return Err(SkorohodError::ShapeMismatch {
            path_len: f.len(),
            solution_len: sol.xi.len().min(sol.ell.len()),
        });
    }
    let mut worst = 0.0f64;
    for i in 0..f.len() {
        let r = (sol.xi[i] - f.values()[i] - 0.5 * sol.ell[i]).abs();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Standard Brownian path on the uniform grid {0, dt, ..., n_steps*dt},
/// started at 0, drawn from the given stream.
pub fn sample_brownian_path(
    stream: &mut RngStream,
    dt: f64,
    n_steps: usize,
) -> Result<Path1D, SkorohodError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SkorohodError::InvalidPath(format!("dt must be positive, got {dt}")));
    }
    let sqrt_dt = dt.sqrt();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut v = 0.0f64;
    times.push(0.0);
    values.push(0.0);
    for i in 1..=n_steps {
        v += sqrt_dt * stream.standard_normal();
        times.push(i as f64 * dt);
        values.push(v);
    }
    Path1D::new(times, values)
}

/// Exact expectation of the gridded regulator L(t_n) for a standard Brownian
/// driver started at 0.
///
/// By symmetry E[-min over the grid] = E[max over the grid], and for a random
/// walk with iid increments the expected running maximum is
/// sum_{k=1..n} E[S_k^+]/k (Spitzer's identity). Gaussian steps give
/// E[S_k^+] = sqrt(k*dt / (2*pi)), hence
/// E[L_n] = 2 * sqrt(dt/(2*pi)) * sum_{k=1..n} 1/sqrt(k).
/// The continuum limit is 2*sqrt(2t/pi); the difference is the O(sqrt(dt))
/// grid-monitoring bias.
pub fn discrete_local_time_mean(dt: f64, n_steps: usize) -> f64 {
    let sum: f64 = (1..=n_steps).map(|k| 1.0 / (k as f64).sqrt()).sum();
    2.0 * (dt / (2.0 * std::f64::consts::PI)).sqrt() * sum
}

/// Continuum expectation E[L(t)] = 2*sqrt(2t/pi) for standard Brownian
/// motion reflected at the origin.
pub fn continuum_local_time_mean(t: f64) -> f64 {
    2.0 * (2.0 * t / std::f64::consts::PI).sqrt()
}
