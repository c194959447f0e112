//! Walk-on-Spheres engine for reflecting Brownian motion with boundary
//! local time.
//!
//! A path alternates between two regimes, decided by the distance from the
//! current position to the boundary:
//!
//! * **interior** (distance > ε): jump uniformly onto the maximal inscribed
//!   sphere; no local-time bookkeeping.
//! * **shell** (distance ≤ ε): jump on a sphere of fixed radius Δx when the
//!   boundary is at least Δx away, or 2Δx otherwise. Each shell step adds 1
//!   (radius Δx) or 4 (radius 2Δx) to the occupation counter n, reflecting
//!   the sphere's mean exit time ∝ radius². If the sampled point leaves the
//!   domain it is pulled back to the closest boundary point and the step is
//!   recorded as a boundary hit.
//!
//! The counter converts to boundary local time via the quantum
//! Δx²/(3ε): dL = dn·Δx²/(3ε). The coefficient mass Σ c·dL is accumulated
//! at boundary hits only, where dL is supported in this discretization; the
//! occupation gained since the previous hit is attributed to the current hit
//! point. The Robin estimator weighs each hit by the decaying factor
//! exp(−∫c dℓ) with ℓ = L/2; see [`simulate_path`] for the exact form.

use thiserror::Error;

use crate::geometry::{Domain, GeometryError, Point3, ShellParams};
use crate::problems::{CoefficientSpec, ProblemSpec};
use crate::stochastic::{uniform_on_sphere, RngStream};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum WosError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("point at distance {distance} from the boundary is inside the shell (eps = {eps}); the interior regime does not apply")]
    InShell { distance: f64, eps: f64 },
    #[error("point at distance {distance} from the boundary is outside the shell (eps = {eps}); the shell regime does not apply")]
    NotInShell { distance: f64, eps: f64 },
    #[error("truncation length must be at least 1 step")]
    InvalidTruncation,
}

/// Radius used for a shell-regime step.
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum RadiusClass {
    /// Fixed radius Δx; adds 1 to the occupation counter.
    Dx,
    /// Enlarged radius 2Δx for points closer than Δx to the boundary; adds 4
    /// (the mean sphere exit time scales with the radius squared).
    TwoDx,
}

impl RadiusClass {
    pub fn occupation_increment(self) -> u64 {
        match self {
            RadiusClass::Dx => 1,
            RadiusClass::TwoDx => 4,
        }
    }

    pub fn radius(self, shell: &ShellParams) -> f64 {
        match self {
            RadiusClass::Dx => shell.dx(),
            RadiusClass::TwoDx => 2.0 * shell.dx(),
        }
    }
}

/// What a single WOS move did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepOutcome {
    /// Interior-regime jump; no occupation.
    Interior,
    /// Shell-regime jump that stayed inside the domain.
    ShellMove { radius_class: RadiusClass },
    /// Shell-regime jump that left the domain and was pulled back to the
    /// boundary. `dn` is this step's counter increment; `dn_since_last_hit`
    /// is the total counter gain since the previous hit (or the path start),
    /// i.e. the local-time mass attributed to this hit point.
    BoundaryHit {
        hit_point: Point3,
        normal: Point3,
        dn: u64,
        dn_since_last_hit: u64,
        radius_class: RadiusClass,
    },
}

/// Running state of one reflecting path.
#[derive(Clone, Copy, Debug)]
pub struct WalkState {
    pos: Point3,
    n_counter: u64,
    n_at_last_hit: u64,
    c_exponent: f64,
    steps_taken: u64,
    boundary_hits: u64,
}

impl WalkState {
    pub fn new(start: Point3) -> Self {
        WalkState {
            pos: start,
            n_counter: 0,
            n_at_last_hit: 0,
            c_exponent: 0.0,
            steps_taken: 0,
            boundary_hits: 0,
        }
    }

    pub fn pos(&self) -> Point3 {
        self.pos
    }

    /// Cumulative occupation counter n, in units of Δx²/3 time quanta.
    pub fn n_counter(&self) -> u64 {
        self.n_counter
    }

    /// Cumulative Robin exponent Σ c(hit)·dL, updated at boundary hits.
    pub fn c_exponent(&self) -> f64 {
        self.c_exponent
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub fn boundary_hits(&self) -> u64 {
        self.boundary_hits
    }
}

/// Local-time quantum: dn · Δx² / (3ε).
pub fn local_time_increment(dn: u64, shell: &ShellParams) -> f64 {
    dn as f64 * shell.dx() * shell.dx() / (3.0 * shell.eps())
}

/// Radius of the maximal inscribed sphere for an interior-regime step.
/// Errors when the point is already inside the shell.
pub fn interior_radius(d: &Domain, shell: &ShellParams, p: Point3) -> Result<f64, WosError> {
    let distance = d.distance_to_boundary(p)?;
    if distance <= shell.eps() {
        return Err(WosError::InShell { distance, eps: shell.eps() });
    }
    Ok(distance)
}

/// Fixed-radius class for a shell-regime step: Δx when the boundary is at
/// least Δx away (tie inclusive), 2Δx otherwise. Errors when the point is
/// not in the shell.
pub fn shell_radius(d: &Domain, shell: &ShellParams, p: Point3) -> Result<RadiusClass, WosError> {
    let distance = d.distance_to_boundary(p)?;
    if distance > shell.eps() {
        return Err(WosError::NotInShell { distance, eps: shell.eps() });
    }
    Ok(classify_shell_distance(distance, shell))
}

fn classify_shell_distance(distance: f64, shell: &ShellParams) -> RadiusClass {
    if distance >= shell.dx() {
        RadiusClass::Dx
    } else {
        RadiusClass::TwoDx
    }
}

/// One WOS move. Consumes exactly one sphere draw from the stream, so the
/// draw sequence depends only on the path geometry, never on the
/// coefficient.
pub fn wos_step(
    d: &Domain,
    shell: &ShellParams,
    state: &mut WalkState,
    stream: &mut RngStream,
    c: CoefficientSpec,
) -> Result<StepOutcome, WosError> {
    let distance = d.distance_to_boundary(state.pos)?;
    let outcome = if distance > shell.eps() {
        let y = uniform_on_sphere(stream, state.pos, distance);
        // The inscribed sphere touches the boundary, so rounding dust can
        // land a hair outside; snap back onto the boundary in that case.
        state.pos = if d.contains(y) { y } else { d.closest_boundary_point(y)?.0 };
        StepOutcome::Interior
    } else {
        let class = classify_shell_distance(distance, shell);
        let y = uniform_on_sphere(stream, state.pos, class.radius(shell));
        state.n_counter += class.occupation_increment();
        if d.contains(y) {
            state.pos = y;
            StepOutcome::ShellMove { radius_class: class }
        } else {
            let (hit_point, normal) = d.closest_boundary_point(y)?;
            let dn_since_last_hit = state.n_counter - state.n_at_last_hit;
            match c.constant_gamma() {
                // Constant coefficient: the per-hit increments telescope, so
                // write the exponent in closed form γ·n·Δx²/(3ε) — exact,
                // with no accumulated rounding.
                Some(gamma) => {
                    state.c_exponent = gamma * local_time_increment(state.n_counter, shell);
                }
                None => {
                    state.c_exponent +=
                        c.c_eval(hit_point) * local_time_increment(dn_since_last_hit, shell);
                }
            }
            state.n_at_last_hit = state.n_counter;
            state.boundary_hits += 1;
            state.pos = hit_point;
            StepOutcome::BoundaryHit {
                hit_point,
                normal,
                dn: class.occupation_increment(),
                dn_since_last_hit,
                radius_class: class,
            }
        }
    };
    state.steps_taken += 1;
    Ok(outcome)
}

/// Result of one truncated path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathResult {
    /// Σ over boundary hits of −exp(−C_j/2) · f(hit_j) · dL_j/2, with f
    /// evaluated through the inward normal.
    pub contribution: f64,
    pub boundary_hits: u64,
    pub final_n: u64,
}

/// Runs exactly `np` WOS steps from `start` and accumulates the Robin
/// Feynman-Kac sum.
///
/// The boundary condition ∂u/∂n − c·u = f is read with n the *inward*
/// normal — the orientation that keeps the problem well posed for c ≥ 0
/// (with the outward reading, c ≡ 1 on the unit sphere is a Steklov
/// eigenvalue and the solution is not unique). The probabilistic solution
/// is then
///
/// ```text
/// u(x) = −E[ ∫₀^∞ exp(−∫₀ᵗ c dℓ) f dℓ ],    ℓ = L/2,
/// ```
///
/// where L is the shell-occupation local time accumulated by the counter
/// and ℓ = L/2 its one-sided normalization (the half-line pushing process
/// satisfies E[ℓ(1)] = √(2/π), while the occupation form doubles it).
/// Discretized, each boundary hit j contributes
///
/// ```text
/// −exp(−C_j/2) · f(hit_j) · (n_j − n_{j−1})·Δx²/(3ε) / 2,
/// ```
///
/// with C_j the accumulated Σ c·dL including the current hit, so C_j/2 is
/// the ∫c dℓ integral. The weight exp(−∫c dℓ) decays, so the truncated sum
/// converges as np grows; np must be large enough that the path accumulates
/// ∫c dℓ of a few units, otherwise the constant mode of the solution is
/// systematically underrepresented.
pub fn simulate_path(
    d: &Domain,
    shell: &ShellParams,
    prob: &ProblemSpec,
    np: u64,
    stream: &mut RngStream,
    start: Point3,
) -> Result<PathResult, WosError> {
    if np == 0 {
        return Err(WosError::InvalidTruncation);
    }
    if !d.contains(start) {
        return Err(GeometryError::OutsideDomain(start.x, start.y, start.z).into());
    }
    let mut state = WalkState::new(start);
    let mut contribution = 0.0f64;
    for _ in 0..np {
        if let StepOutcome::BoundaryHit { hit_point, normal, dn_since_last_hit, .. } =
            wos_step(d, shell, &mut state, stream, prob.c)?
        {
            contribution -= 0.5
                * (-0.5 * state.c_exponent).exp()
                * (prob.boundary)(hit_point, -normal)
                * local_time_increment(dn_since_last_hit, shell);
        }
    }
    Ok(PathResult {
        contribution,
        boundary_hits: state.boundary_hits,
        final_n: state.n_counter,
    })
}
