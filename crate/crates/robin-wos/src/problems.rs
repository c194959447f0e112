//! The manufactured Robin problem: exact harmonic solution, its gradient,
//! the Robin coefficient c, and the boundary data f they induce.
//!
//! The reference solution is u(x,y,z) = sin(3x)·sin(4y)·e^{5z} + 5, harmonic
//! because 3² + 4² = 5². The boundary condition ∂u/∂n − c·u = f is satisfied
//! by construction for *any* normal direction n: f is *defined* as
//! n·∇u − c·u on the boundary, evaluated with whichever n the solver hands
//! it (the walk engine reads the data through the inward normal, the
//! orientation for which the problem is well posed). The solver's output can
//! therefore be compared against u pointwise.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::geometry::Point3;

/// Robin coefficient c(x) ≥ 0: either a constant or the first coordinate's
/// absolute value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoefficientSpec {
    Constant { gamma: f64 },
    AbsX,
}

impl CoefficientSpec {
    /// Evaluate c at a point.
    pub fn c_eval(&self, p: Point3) -> f64 {
        match *self {
            CoefficientSpec::Constant { gamma } => gamma,
            CoefficientSpec::AbsX => p.x.abs(),
        }
    }

    /// True when the coefficient is identically a constant (used by the
    /// estimator to take the exact telescoped form of the Robin exponent).
    pub fn constant_gamma(&self) -> Option<f64> {
        match *self {
            CoefficientSpec::Constant { gamma } => Some(gamma),
            CoefficientSpec::AbsX => None,
        }
    }
}

impl fmt::Display for CoefficientSpec {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CoefficientSpec::Constant { gamma } => write!(out, "const:{gamma}"),
            CoefficientSpec::AbsX => write!(out, "absx"),
        }
    }
}

impl FromStr for CoefficientSpec {
    type Err = String;

    /// Parses `const:<gamma>` or `absx`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("absx") {
            return Ok(CoefficientSpec::AbsX);
        }
        if let Some(raw) = s.strip_prefix("const:") {
            let gamma: f64 = raw
                .parse()
                .map_err(|_| format!("invalid constant coefficient `{raw}`"))?;
            if !gamma.is_finite() || gamma < 0.0 {
                return Err(format!("coefficient must be finite and nonnegative, got {gamma}"));
            }
            return Ok(CoefficientSpec::Constant { gamma });
        }
        Err(format!("unrecognized coefficient `{s}` (expected `const:<gamma>` or `absx`)"))
    }
}

/// Exact reference solution u = sin(3x)·sin(4y)·e^{5z} + 5.
pub fn exact_u(p: Point3) -> f64 {
    (3.0 * p.x).sin() * (4.0 * p.y).sin() * (5.0 * p.z).exp() + 5.0
}

/// Gradient of [`exact_u`].
pub fn exact_grad_u(p: Point3) -> Point3 {
    let e = (5.0 * p.z).exp();
    let (sx, cx) = (3.0 * p.x).sin_cos();
    let (sy, cy) = (4.0 * p.y).sin_cos();
    Point3::new(3.0 * cx * sy * e, 4.0 * sx * cy * e, 5.0 * sx * sy * e)
}

/// Boundary data f(p) = n·∇u(p) − c(p)·u(p) for a boundary point p and a
/// unit normal direction n.
pub fn boundary_f(p: Point3, n: Point3, c: CoefficientSpec) -> f64 {
    n.dot(exact_grad_u(p)) - c.c_eval(p) * exact_u(p)
}

/// Boundary-data callback: arguments are the boundary point and the unit
/// normal direction through which the condition is read (the walk engine
/// passes the inward normal).
pub type BoundaryFn = Arc<dyn Fn(Point3, Point3) -> f64 + Send + Sync>;

/// Exact-solution callback, available when the problem is manufactured.
pub type ExactFn = Arc<dyn Fn(Point3) -> f64 + Send + Sync>;

/// Everything the walk engine needs about the PDE: the Robin coefficient,
/// the boundary data, the truncation length NP, and (optionally) the exact
/// solution for error reporting.
#[derive(Clone)]
pub struct ProblemSpec {
    pub c: CoefficientSpec,
    pub np: u64,
    pub boundary: BoundaryFn,
    pub exact: Option<ExactFn>,
}

impl ProblemSpec {
    /// The manufactured problem: boundary data derived from [`exact_u`] so
    /// that u itself is the solution.
    pub fn manufactured(c: CoefficientSpec, np: u64) -> Self {
        ProblemSpec {
            c,
            np,
            boundary: Arc::new(move |p, n| boundary_f(p, n, c)),
            exact: Some(Arc::new(exact_u)),
        }
    }

    /// A problem with caller-supplied boundary data and no exact solution
    /// (used for estimator identities such as f ≡ 0 and linearity checks).
    pub fn with_boundary(c: CoefficientSpec, np: u64, boundary: BoundaryFn) -> Self {
        ProblemSpec { c, np, boundary, exact: None }
    }
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.debug_struct("ProblemSpec")
            .field("c", &self.c)
            .field("np", &self.np)
            .field("exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}
