//! Pointwise Monte Carlo solution of the Laplace equation with third-kind
//! (Robin) boundary conditions on convex 3-D domains.
//!
//! The solver simulates standard reflecting Brownian motion by walk-on-spheres:
//! away from the boundary a walker jumps to a uniform point on the largest
//! sphere contained in the domain, and inside a thin boundary shell it moves on
//! small fixed-radius spheres, accumulating boundary local time whenever it
//! touches the boundary. A truncated Feynman-Kac sum over the boundary visits
//! turns the local time and the Robin data into an unbiased-in-the-limit
//! estimate of the solution at the walker's start point.
//!
//! Module layout:
//!
//! * [`geometry`] - domains (cube, sphere, ellipsoid), distances, closest-point
//!   projection, and the shell parameters that drive the walk.
//! * [`stochastic`] - seeded, independently indexable random streams and exact
//!   uniform sampling on sphere surfaces; the sole sources of randomness.
//! * [`skorohod`] - the 1-D half-line Skorohod problem, used as an independent
//!   oracle for the local-time normalization.
//! * [`problems`] - the manufactured harmonic solution, Robin coefficients, and
//!   boundary data.
//! * [`wos`] - the reflecting walk-on-spheres engine: stepping, occupation
//!   counting, local-time increments, and per-path Feynman-Kac contributions.
//! * [`estimators`] - deterministic parallel path averaging, a plain Dirichlet
//!   walk-on-spheres baseline, and aggregate error norms.
//! * [`harness`] - experiment configuration, canonical evaluation-point sets,
//!   CSV output, and the run loop behind the CLI.

pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod problems;
pub mod skorohod;
pub mod stochastic;
pub mod wos;
