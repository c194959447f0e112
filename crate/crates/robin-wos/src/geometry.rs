//! Convex benchmark domains and exact boundary geometry.
//!
//! Everything downstream (shell classification, walk radii, reflection
//! pull-back) reduces to three primitives on a domain: closed-set membership,
//! distance to the boundary, and closest-point projection with an outward unit
//! normal. The cube and sphere are closed-form; the ellipsoid projection is a
//! one-parameter root-find on the axis-aligned quadric, solved with a
//! bisection-safeguarded Newton iteration.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Relative slack for closed-set membership. Points produced by the boundary
/// projection land within a few ulps of the surface and must still count as
/// inside, so membership cannot be bit-exact.
const MEMBERSHIP_TOL: f64 = 1e-12;

/// Convergence tolerance for the ellipsoid projection root-find (relative to
/// the bracket endpoint) and iteration cap before reporting divergence.
const PROJECTION_TOL: f64 = 1e-14;
const PROJECTION_MAX_ITERS: usize = 200;

/// A point (or free vector) in R^3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the direction of `self`; the zero vector is returned
    /// unchanged.
    pub fn normalized(self) -> Point3 {
        let n = self.norm();
        if n > 0.0 {
            self * (1.0 / n)
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid shell parameters: {0}")]
    InvalidShell(String),
    #[error("point ({0}, {1}, {2}) lies outside the domain")]
    OutsideDomain(f64, f64, f64),
    #[error("ellipsoid projection did not converge within {iterations} iterations")]
    ProjectionDiverged { iterations: usize },
}

/// Parameters of the boundary shell that switches the walk from maximal
/// spheres to fixed small radii. `eps` is exactly `eps_mult * dx`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellParams {
    dx: f64,
    eps_mult: u32,
    eps: f64,
}

impl ShellParams {
    /// Build shell parameters from the base step `dx > 0` and the shell
    /// multiplier `eps_mult >= 2`.
    pub fn new(dx: f64, eps_mult: u32) -> Result<Self, GeometryError> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(GeometryError::InvalidShell(format!(
                "dx must be positive and finite, got {dx}"
            )));
        }
        if eps_mult < 2 {
            return Err(GeometryError::InvalidShell(format!(
                "eps_mult must be at least 2 (the walk samples spheres of radius 2*dx), got {eps_mult}"
            )));
        }
        Ok(ShellParams { dx, eps_mult, eps: f64::from(eps_mult) * dx })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn eps_mult(&self) -> u32 {
        self.eps_mult
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// An origin-centered convex domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Cube { half_width: f64 },
    Sphere { radius: f64 },
    /// Semi-axes along x, y, z with `a >= b >= c > 0`.
    Ellipsoid { semi_axes: [f64; 3] },
}

impl Domain {
    pub fn cube(half_width: f64) -> Result<Self, GeometryError> {
        if half_width > 0.0 && half_width.is_finite() {
            Ok(Domain::Cube { half_width })
        } else {
            Err(GeometryError::InvalidDomain(format!(
                "cube half-width must be positive and finite, got {half_width}"
            )))
        }
    }

    pub fn sphere(radius: f64) -> Result<Self, GeometryError> {
        if radius > 0.0 && radius.is_finite() {
            Ok(Domain::Sphere { radius })
        } else {
            Err(GeometryError::InvalidDomain(format!(
                "sphere radius must be positive and finite, got {radius}"
            )))
        }
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self, GeometryError> {
        if !(c > 0.0) || !a.is_finite() || !b.is_finite() || !c.is_finite() || a < b || b < c {
            return Err(GeometryError::InvalidDomain(format!(
                "ellipsoid semi-axes must satisfy a >= b >= c > 0, got ({a}, {b}, {c})"
            )));
        }
        Ok(Domain::Ellipsoid { semi_axes: [a, b, c] })
    }

    /// Re-check the structural invariants (useful when a value was built with
    /// enum literal syntax rather than the constructors).
    pub fn validate(&self) -> Result<(), GeometryError> {
        match *self {
            Domain::Cube { half_width } => Domain::cube(half_width).map(|_| ()),
            Domain::Sphere { radius } => Domain::sphere(radius).map(|_| ()),
            Domain::Ellipsoid { semi_axes: [a, b, c] } => Domain::ellipsoid(a, b, c).map(|_| ()),
        }
    }

    /// Radius of the largest origin-centered ball inside the domain.
    pub fn inradius(&self) -> f64 {
        match *self {
            Domain::Cube { half_width } => half_width,
            Domain::Sphere { radius } => radius,
            Domain::Ellipsoid { semi_axes } => semi_axes[2],
        }
    }

    /// Closed-set membership (boundary points are inside), with a small
    /// relative tolerance so projected boundary points always pass.
    pub fn contains(&self, p: Point3) -> bool {
        match *self {
            Domain::Cube { half_width } => {
                let bound = half_width * (1.0 + MEMBERSHIP_TOL);
                p.x.abs() <= bound && p.y.abs() <= bound && p.z.abs() <= bound
            }
            Domain::Sphere { radius } => p.norm() <= radius * (1.0 + MEMBERSHIP_TOL),
            Domain::Ellipsoid { semi_axes } => {
                ellipsoid_quadric(semi_axes, p) <= 1.0 + 2.0 * MEMBERSHIP_TOL
            }
        }
    }

    /// Euclidean distance from an interior point to the boundary. Errors if
    /// `p` is outside the closed domain (a caller bug in the walk).
    pub fn distance_to_boundary(&self, p: Point3) -> Result<f64, GeometryError> {
        if !self.contains(p) {
            return Err(GeometryError::OutsideDomain(p.x, p.y, p.z));
        }
        let d = match *self {
            Domain::Cube { half_width } => {
                let dx = half_width - p.x.abs();
                let dy = half_width - p.y.abs();
                let dz = half_width - p.z.abs();
                dx.min(dy).min(dz)
            }
            Domain::Sphere { radius } => radius - p.norm(),
            Domain::Ellipsoid { semi_axes } => {
                let (q, _) = ellipsoid_closest_point(semi_axes, p)?;
                p.distance(q)
            }
        };
        // Membership slack admits points a few ulps past the surface; their
        // distance is zero, not a tiny negative number.
        Ok(d.max(0.0))
    }

    /// Closest boundary point to `p` (inside or outside the domain) together
    /// with the outward unit normal at that point.
    pub fn closest_boundary_point(&self, p: Point3) -> Result<(Point3, Point3), GeometryError> {
        match *self {
            Domain::Cube { half_width } => Ok(cube_closest_point(half_width, p)),
            Domain::Sphere { radius } => Ok(sphere_closest_point(radius, p)),
            Domain::Ellipsoid { semi_axes } => ellipsoid_closest_point(semi_axes, p),
        }
    }

    /// True iff `p` lies within distance `shell.eps()` of the boundary.
    /// Requires `p` inside the closed domain.
    pub fn in_shell(&self, shell: &ShellParams, p: Point3) -> Result<bool, GeometryError> {
        Ok(self.distance_to_boundary(p)? <= shell.eps())
    }
}

fn sphere_closest_point(radius: f64, p: Point3) -> (Point3, Point3) {
    let r = p.norm();
    if r == 0.0 {
        // Every boundary point is equally close to the center; pick the +z pole
        // (the same convention as the ellipsoid center case).
        return (Point3::new(0.0, 0.0, radius), Point3::new(0.0, 0.0, 1.0));
    }
    let n = p * (1.0 / r);
    (n * radius, n)
}

fn cube_closest_point(half_width: f64, p: Point3) -> (Point3, Point3) {
    let abs = [p.x.abs(), p.y.abs(), p.z.abs()];
    let coords = [p.x, p.y, p.z];
    let strictly_inside = abs.iter().all(|&a| a <= half_width);
    let axis_sign = |i: usize| if coords[i] < 0.0 { -1.0 } else { 1.0 };
    let unit = |i: usize, s: f64| match i {
        0 => Point3::new(s, 0.0, 0.0),
        1 => Point3::new(0.0, s, 0.0),
        _ => Point3::new(0.0, 0.0, s),
    };
    if strictly_inside {
        // Snap to the face with the smallest gap; ties resolve x -> y -> z.
        let mut axis = 0;
        for i in 1..3 {
            if half_width - abs[i] < half_width - abs[axis] {
                axis = i;
            }
        }
        let s = axis_sign(axis);
        let mut q = coords;
        q[axis] = s * half_width;
        (Point3::new(q[0], q[1], q[2]), unit(axis, s))
    } else {
        let clamp = |v: f64| v.clamp(-half_width, half_width);
        let q = Point3::new(clamp(p.x), clamp(p.y), clamp(p.z));
        // Face normal of the axis with the deepest violation; ties resolve
        // x -> y -> z. At edges and corners this picks one adjacent face.
        let mut axis = 0;
        for i in 1..3 {
            if abs[i] - half_width > abs[axis] - half_width {
                axis = i;
            }
        }
        (q, unit(axis, axis_sign(axis)))
    }
}

fn ellipsoid_quadric(axes: [f64; 3], p: Point3) -> f64 {
    let u = p.x / axes[0];
    let v = p.y / axes[1];
    let w = p.z / axes[2];
    u * u + v * v + w * w
}

/// Closest point on the axis-aligned ellipsoid with semi-axes `a >= b >= c`
/// to an arbitrary query point, plus the outward unit normal there.
fn ellipsoid_closest_point(
    axes: [f64; 3],
    p: Point3,
) -> Result<(Point3, Point3), GeometryError> {
    // Fold into the first octant; zero components keep a positive image.
    let y = [p.x.abs(), p.y.abs(), p.z.abs()];
    let q_abs = octant_closest(axes, y)?;
    let sign = |value: f64| if value < 0.0 { -1.0 } else { 1.0 };
    let mut q = Point3::new(
        q_abs[0] * sign(p.x),
        q_abs[1] * sign(p.y),
        q_abs[2] * sign(p.z),
    );
    // Snap exactly onto the quadric along the ray through the origin; this
    // moves q by O(tol) and pins the surface residual at rounding level.
    let quad = ellipsoid_quadric(axes, q);
    if quad > 0.0 {
        q = q * (1.0 / quad.sqrt());
    }
    let normal = Point3::new(
        q.x / (axes[0] * axes[0]),
        q.y / (axes[1] * axes[1]),
        q.z / (axes[2] * axes[2]),
    )
    .normalized();
    Ok((q, normal))
}

/// First-octant ellipsoid projection, `y[i] >= 0`, semi-axes sorted
/// descending. Case analysis on zero components; the all-positive case is a
/// monotone root-find for the Lagrange parameter.
fn octant_closest(axes: [f64; 3], y: [f64; 3]) -> Result<[f64; 3], GeometryError> {
    let [e0, e1, e2] = axes;
    if y[2] > 0.0 {
        if y[1] > 0.0 {
            if y[0] > 0.0 {
                // Root of F(s) = sum (e_i y_i / (s + e_i^2 - e2^2))^2 - 1 in the
                // shifted variable s = t + e2^2 (shifting avoids cancellation
                // near the smallest-axis pole).
                let w = [e0 * y[0], e1 * y[1], e2 * y[2]];
                let d = [e0 * e0 - e2 * e2, e1 * e1 - e2 * e2, 0.0];
                let s_lo = w[2];
                let s_hi = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
                let s = solve_projection_root(|s| {
                    let f0 = w[0] / (s + d[0]);
                    let f1 = w[1] / (s + d[1]);
                    let f2 = w[2] / s;
                    let f = f0 * f0 + f1 * f1 + f2 * f2 - 1.0;
                    let df = -2.0
                        * (f0 * f0 / (s + d[0]) + f1 * f1 / (s + d[1]) + f2 * f2 / s);
                    (f, df)
                }, s_lo, s_hi)?;
                Ok([
                    e0 * (w[0] / (s + d[0])),
                    e1 * (w[1] / (s + d[1])),
                    e2 * (w[2] / s),
                ])
            } else {
                let (q1, q2) = ellipse_octant(e1, e2, y[1], y[2])?;
                Ok([0.0, q1, q2])
            }
        } else if y[0] > 0.0 {
            let (q0, q2) = ellipse_octant(e0, e2, y[0], y[2])?;
            Ok([q0, 0.0, q2])
        } else {
            // On the z-axis the +z pole is always nearest (e2 is minimal).
            Ok([0.0, 0.0, e2])
        }
    } else if y[0] > 0.0 && y[1] > 0.0 {
        // Query in the z = 0 plane: the minimizer leaves the plane iff the
        // in-plane stationary point with t = -e2^2 is admissible.
        let d0 = e0 * e0 - e2 * e2;
        let d1 = e1 * e1 - e2 * e2;
        if d0 > 0.0 && d1 > 0.0 {
            let f0 = e0 * y[0] / d0;
            let f1 = e1 * y[1] / d1;
            let s = f0 * f0 + f1 * f1;
            if s < 1.0 {
                return Ok([e0 * f0, e1 * f1, e2 * (1.0 - s).sqrt()]);
            }
        }
        let (q0, q1) = ellipse_octant(e0, e1, y[0], y[1])?;
        Ok([q0, q1, 0.0])
    } else if y[1] > 0.0 {
        // On the y-axis; tilting toward the smallest axis z is the only
        // admissible escape, so reduce to the (e1, e2) ellipse.
        let (q1, q2) = ellipse_octant(e1, e2, y[1], 0.0)?;
        Ok([0.0, q1, q2])
    } else if y[0] > 0.0 {
        let (q0, q2) = ellipse_octant(e0, e2, y[0], 0.0)?;
        Ok([q0, 0.0, q2])
    } else {
        // Domain center: the smallest semi-axis pole is nearest.
        Ok([0.0, 0.0, e2])
    }
}

/// First-quadrant projection onto the ellipse with semi-axes `a >= b > 0`.
fn ellipse_octant(a: f64, b: f64, u: f64, v: f64) -> Result<(f64, f64), GeometryError> {
    if v > 0.0 {
        if u > 0.0 {
            let w = [a * u, b * v];
            let d = a * a - b * b;
            let s_lo = w[1];
            let s_hi = (w[0] * w[0] + w[1] * w[1]).sqrt();
            let s = solve_projection_root(|s| {
                let f0 = w[0] / (s + d);
                let f1 = w[1] / s;
                let f = f0 * f0 + f1 * f1 - 1.0;
                let df = -2.0 * (f0 * f0 / (s + d) + f1 * f1 / s);
                (f, df)
            }, s_lo, s_hi)?;
            Ok((a * (w[0] / (s + d)), b * (w[1] / s)))
        } else {
            Ok((0.0, b))
        }
    } else {
        // Query on the major axis: off-axis minimizer exists only inside the
        // evolute cusp at u = (a^2 - b^2) / a.
        let d = a * a - b * b;
        if d > 0.0 && a * u < d {
            let x = a * (a * u / d);
            let frac = x / a;
            Ok((x, b * (1.0 - frac * frac).sqrt()))
        } else {
            Ok((a, 0.0))
        }
    }
}

/// Bisection-safeguarded Newton iteration for a strictly decreasing function
/// with a sign change on `[s_lo, s_hi]`.
fn solve_projection_root(
    f_df: impl Fn(f64) -> (f64, f64),
    s_lo: f64,
    s_hi: f64,
) -> Result<f64, GeometryError> {
    debug_assert!(s_lo > 0.0 && s_hi >= s_lo);
    let mut lo = s_lo;
    let mut hi = s_hi;
    let mut s = 0.5 * (lo + hi);
    for _ in 0..PROJECTION_MAX_ITERS {
        let (f, df) = f_df(s);
        if f == 0.0 {
            return Ok(s);
        }
        if f > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        if hi - lo <= PROJECTION_TOL * hi {
            return Ok(0.5 * (lo + hi));
        }
        let newton = s - f / df;
        s = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(GeometryError::ProjectionDiverged { iterations: PROJECTION_MAX_ITERS })
}
