//! Acceptance gate: one release-blocking check per criterion, one printed
//! line per criterion, exit code 1 if anything fails.
//!
//! This target uses `harness = false` so the pass/fail lines always reach
//! the terminal under a plain `cargo test --workspace`.
//!
//! Criteria 1f, 2 and 3 are the full-scale experiment reproductions; they
//! need several core-hours each, so they only run when the environment
//! variable `ACCEPTANCE_NIGHTLY` is set (or `--nightly` is passed) and are
//! reported as SKIPPED otherwise. Their tolerances and parameters are pinned
//! here either way.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use robin_wos::estimators::{estimate_dirichlet, estimate_robin, RunConfig};
use robin_wos::geometry::{Domain, Point3, ShellParams};
use robin_wos::harness::{
    run_experiment, run_skorohod_check, DomainKind, EvalSet, ExperimentConfig,
};
use robin_wos::problems::{BoundaryFn, CoefficientSpec, ProblemSpec};
use robin_wos::stochastic::make_stream;
use robin_wos::wos::{local_time_increment, simulate_path, wos_step, StepOutcome, WalkState};

use std::sync::Arc;

// ---------------------------------------------------------------------------
// Pinned tolerances and run parameters, one block per criterion.
// ---------------------------------------------------------------------------

/// Criterion 1 (CI scale): sphere, c = 1, circle monitor. The walk length is
/// chosen so the accumulated decay exponent reaches ~2.1, which caps the
/// truncation bias near exp(-2.1); anything shorter cannot pass the error
/// bound below (see README on truncation saturation).
const C1_CI_N_PATHS: u64 = 12_000;
const C1_CI_NP: u64 = 12_000;
const C1_CI_DX: f64 = 2e-3;
const C1_CI_ERR_MAX: f64 = 0.20;
const C1_CI_WALL_MAX_SECS: f64 = 180.0;

/// Criterion 1 (full scale, nightly): sphere, c = 1, both monitors, with the
/// walk length at decay exponent ~3 and the full 200k-path budget.
const C1_FULL_N_PATHS: u64 = 200_000;
const C1_FULL_NP: u64 = 67_000;
const C1_FULL_DX: f64 = 5e-4;
const C1_FULL_ERR_MIN: f64 = 0.01;
const C1_FULL_ERR_MAX: f64 = 0.08;

/// Criterion 2 (nightly): ellipsoid (3, 2, 1), c = 1, both monitors. The
/// per-step local-time rate matches the sphere's at equal dx, so the same
/// walk length reaches the same decay exponent.
const C2_N_PATHS: u64 = 200_000;
const C2_NP: u64 = 67_000;
const C2_DX: f64 = 5e-4;
const C2_ERR_MAX: f64 = 0.08;

/// Criterion 3 (nightly): sphere, c = |x|, segment monitor. The boundary
/// average of |x| on the unit sphere is 1/2, so the decay accumulates at
/// half the c = 1 rate and the walk must be roughly twice as long (and dx is
/// finer here), hence the larger step count.
const C3_N_PATHS: u64 = 200_000;
const C3_NP: u64 = 168_000;
const C3_DX: f64 = 4e-4;
const C3_ERR_MAX: f64 = 0.08;

/// Criterion 4: absorbing-walk Dirichlet baseline, phi(p) = p.x at
/// x = (0.5, 0, 0), whose harmonic extension is 0.5.
const C4_N_PATHS: u64 = 100_000;
const C4_ABSORB_EPS: f64 = 1e-4;
const C4_EXACT: f64 = 0.5;
const C4_SE_MAX: f64 = 0.01;
const C4_WALL_MAX_SECS: f64 = 30.0;

/// Criterion 5: half-line reflection oracle on the unit interval.
const C5_N_PATHS: u64 = 100_000;
const C5_DT: f64 = 1e-3;
const C5_RESIDUAL_MAX: f64 = 1e-12;
/// The gridded running maximum undershoots the continuum one by
/// ~1.166*sqrt(dt) in expectation (the zeta(1/2) correction of the discrete
/// maximum); 1.5*sqrt(dt) bounds that gap with ~30% margin.
const C5_CONTINUUM_GAP_MAX: f64 = 1.5;

/// Criterion 6: exactness identities (bitwise, fixed seeds).
const C6_NEUMANN_PATHS: u64 = 100;
const C6_SHELL_STEPS: u64 = 1_000_000;

/// Criterion 7: geometry invariants on random points, with the tolerances
/// the geometry module states for its projection contract.
const C7_POINTS_PER_DOMAIN: u64 = 10_000;
const C7_SURFACE_RESIDUAL_MAX: f64 = 1e-10;
const C7_UNIT_NORMAL_TOL: f64 = 1e-12;
const C7_DISTANCE_SLACK: f64 = 1e-9;

/// Criterion 8: byte-identical CSV across worker-pool sizes.
const C8_POOL_SIZES: [usize; 3] = [1, 4, 16];

fn main() {
    let nightly = std::env::args().any(|a| a == "--nightly")
        || std::env::var_os("ACCEPTANCE_NIGHTLY").is_some();
    let mut failures = 0u32;
    let mut report = |id: &str, name: &str, outcome: Result<String, String>| match outcome {
        Ok(detail) => println!("ACCEPTANCE {id} {name}: PASS - {detail}"),
        Err(detail) => {
            failures += 1;
            println!("ACCEPTANCE {id} {name}: FAIL - {detail}");
        }
    };
    let skip = |id: &str, name: &str| {
        println!(
            "ACCEPTANCE {id} {name}: SKIPPED - full-scale run; set ACCEPTANCE_NIGHTLY=1 to include it"
        );
    };

    report("1", "sphere c=1 circle (CI scale)", criterion_1_ci());
    if nightly {
        report("1f", "sphere c=1 full scale", criterion_1_full());
        report("2", "ellipsoid c=1 full scale", criterion_2());
        report("3", "sphere c=|x| segment full scale", criterion_3());
    } else {
        skip("1f", "sphere c=1 full scale");
        skip("2", "ellipsoid c=1 full scale");
        skip("3", "sphere c=|x| segment full scale");
    }
    report("4", "Dirichlet absorbing baseline", criterion_4());
    report("5", "half-line reflection oracle", criterion_5());
    report("6", "exactness suite", criterion_6());
    report("7", "geometry suite", criterion_7());
    report("8", "CSV determinism across worker pools", criterion_8());

    if failures > 0 {
        println!("acceptance: {failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all executed criteria passed");
}

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------

fn experiment(
    domain: DomainKind,
    c: CoefficientSpec,
    eval: EvalSet,
    n_paths: u64,
    np: u64,
    dx: f64,
    out: PathBuf,
) -> ExperimentConfig {
    ExperimentConfig { domain, c, n_paths, np, dx, eps_mult: 3, seed: 1, eval, out }
}

/// Runs one named experiment and checks its aggregate error band.
fn check_err_band(
    label: &str,
    cfg: &ExperimentConfig,
    err_min: f64,
    err_max: f64,
    detail: &mut String,
) -> Result<(), String> {
    let (_, summary) = run_experiment(cfg).map_err(|e| format!("{label}: {e}"))?;
    let err = summary.aggregate_err;
    write!(detail, "{label} Err={:.2}% ", 100.0 * err).unwrap();
    if !(err >= err_min && err <= err_max) {
        return Err(format!(
            "{label}: aggregate Err {:.4}% outside [{:.1}%, {:.1}%]",
            100.0 * err,
            100.0 * err_min,
            100.0 * err_max
        ));
    }
    Ok(())
}

fn tempdir() -> Result<tempfile::TempDir, String> {
    tempfile::tempdir().map_err(|e| format!("cannot create temp dir: {e}"))
}

// ---------------------------------------------------------------------------
// Criteria.
// ---------------------------------------------------------------------------

fn criterion_1_ci() -> Result<String, String> {
    let dir = tempdir()?;
    let cfg = experiment(
        DomainKind::Sphere,
        CoefficientSpec::Constant { gamma: 1.0 },
        EvalSet::Circle,
        C1_CI_N_PATHS,
        C1_CI_NP,
        C1_CI_DX,
        dir.path().join("c1_ci.csv"),
    );
    let started = Instant::now();
    let mut detail = String::new();
    check_err_band("circle", &cfg, 0.0, C1_CI_ERR_MAX, &mut detail)?;
    let wall = started.elapsed().as_secs_f64();
    if wall > C1_CI_WALL_MAX_SECS {
        return Err(format!(
            "wall time {wall:.0}s exceeds the {C1_CI_WALL_MAX_SECS:.0}s budget ({detail})"
        ));
    }
    write!(detail, "wall={wall:.0}s (budget {C1_CI_WALL_MAX_SECS:.0}s)").unwrap();
    Ok(detail)
}

fn criterion_1_full() -> Result<String, String> {
    let dir = tempdir()?;
    let mut detail = String::new();
    for (eval, name) in [(EvalSet::Circle, "circle"), (EvalSet::Segment, "segment")] {
        let cfg = experiment(
            DomainKind::Sphere,
            CoefficientSpec::Constant { gamma: 1.0 },
            eval,
            C1_FULL_N_PATHS,
            C1_FULL_NP,
            C1_FULL_DX,
            dir.path().join(format!("c1_{name}.csv")),
        );
        check_err_band(name, &cfg, C1_FULL_ERR_MIN, C1_FULL_ERR_MAX, &mut detail)?;
    }
    Ok(detail)
}

fn criterion_2() -> Result<String, String> {
    let dir = tempdir()?;
    let mut detail = String::new();
    for (eval, name) in [(EvalSet::Circle, "circle"), (EvalSet::Segment, "segment")] {
        let cfg = experiment(
            DomainKind::Ellipsoid,
            CoefficientSpec::Constant { gamma: 1.0 },
            eval,
            C2_N_PATHS,
            C2_NP,
            C2_DX,
            dir.path().join(format!("c2_{name}.csv")),
        );
        check_err_band(name, &cfg, 0.0, C2_ERR_MAX, &mut detail)?;
    }
    Ok(detail)
}

fn criterion_3() -> Result<String, String> {
    let dir = tempdir()?;
    let cfg = experiment(
        DomainKind::Sphere,
        CoefficientSpec::AbsX,
        EvalSet::Segment,
        C3_N_PATHS,
        C3_NP,
        C3_DX,
        dir.path().join("c3_segment.csv"),
    );
    let mut detail = String::new();
    check_err_band("segment", &cfg, 0.0, C3_ERR_MAX, &mut detail)?;
    Ok(detail)
}

fn criterion_4() -> Result<String, String> {
    let d = Domain::sphere(1.0).map_err(|e| e.to_string())?;
    let started = Instant::now();
    let row = estimate_dirichlet(
        &d,
        &|p: Point3| p.x,
        Point3::new(0.5, 0.0, 0.0),
        C4_N_PATHS,
        C4_ABSORB_EPS,
        1,
        Some(C4_EXACT),
    )
    .map_err(|e| e.to_string())?;
    let wall = started.elapsed().as_secs_f64();
    let dev = (row.estimate - C4_EXACT).abs();
    if dev > 3.0 * row.std_err {
        return Err(format!(
            "estimate {:.5} is {:.1} standard errors from {C4_EXACT}",
            row.estimate,
            dev / row.std_err
        ));
    }
    if row.std_err > C4_SE_MAX {
        return Err(format!("std_err {:.5} exceeds {C4_SE_MAX}", row.std_err));
    }
    if wall > C4_WALL_MAX_SECS {
        return Err(format!("wall time {wall:.1}s exceeds {C4_WALL_MAX_SECS:.0}s"));
    }
    Ok(format!(
        "estimate={:.5} (exact {C4_EXACT}), std_err={:.5}, wall={wall:.1}s",
        row.estimate, row.std_err
    ))
}

fn criterion_5() -> Result<String, String> {
    let started = Instant::now();
    let rep = run_skorohod_check(C5_N_PATHS, C5_DT, 1).map_err(|e| e.to_string())?;
    let wall = started.elapsed().as_secs_f64();
    if rep.max_residual > C5_RESIDUAL_MAX {
        return Err(format!(
            "pathwise residual {:.3e} exceeds {C5_RESIDUAL_MAX:.0e}",
            rep.max_residual
        ));
    }
    // The sample mean must match the exact expectation of the *gridded*
    // maximum; that expectation in turn must sit below the continuum value
    // 2*sqrt(2/pi) by no more than the sqrt(dt) discretization gap.
    let dev = (rep.mean_l1 - rep.discrete_expectation).abs();
    if dev > 3.0 * rep.std_err {
        return Err(format!(
            "mean L(1) {:.5} is {:.1} standard errors from the grid expectation {:.5}",
            rep.mean_l1,
            dev / rep.std_err,
            rep.discrete_expectation
        ));
    }
    let gap = rep.continuum_mean - rep.discrete_expectation;
    let gap_max = C5_CONTINUUM_GAP_MAX * C5_DT.sqrt();
    if !(gap > 0.0 && gap <= gap_max) {
        return Err(format!(
            "grid-to-continuum gap {gap:.5} outside (0, {gap_max:.5}]"
        ));
    }
    if wall > 60.0 {
        return Err(format!("wall time {wall:.1}s exceeds 60s"));
    }
    Ok(format!(
        "mean L(1)={:.5}±{:.5} vs grid {:.5} (continuum {:.5}), max residual {:.1e}, wall={wall:.1}s",
        rep.mean_l1, rep.std_err, rep.discrete_expectation, rep.continuum_mean, rep.max_residual
    ))
}

fn criterion_6() -> Result<String, String> {
    let sphere = Domain::sphere(1.0).map_err(|e| e.to_string())?;
    let shell = ShellParams::new(1e-2, 3).map_err(|e| e.to_string())?;
    let one = CoefficientSpec::Constant { gamma: 1.0 };
    let zero = CoefficientSpec::Constant { gamma: 0.0 };
    let start = Point3::new(0.9, 0.0, 0.0);

    // (a) f == 0 scores exactly zero.
    let zero_f: BoundaryFn = Arc::new(|_, _| 0.0);
    let cfg = RunConfig {
        domain: sphere.clone(),
        shell,
        problem: ProblemSpec::with_boundary(one, 300, zero_f),
        n_paths: 200,
        base_seed: 3,
        eval_points: vec![start, Point3::new(0.1, 0.2, -0.3)],
    };
    for row in estimate_robin(&cfg).map_err(|e| e.to_string())? {
        if row.estimate != 0.0 || row.std_err != 0.0 {
            return Err(format!(
                "f=0 run produced estimate {} ± {}",
                row.estimate, row.std_err
            ));
        }
    }

    // (b) With c = 0 the decay weight is exactly 1, so every per-hit term of
    // the estimator must equal the plain Neumann term bit for bit, and the
    // engine's path total must equal both running sums.
    let f: BoundaryFn = Arc::new(|p: Point3, n: Point3| p.x + 0.25 * n.z + 2.0);
    let prob = ProblemSpec::with_boundary(zero, 400, f.clone());
    let mut total_hits = 0u64;
    for sid in 0..C6_NEUMANN_PATHS {
        let mut stream = make_stream(11, sid);
        let engine = simulate_path(&sphere, &shell, &prob, 400, &mut stream, start)
            .map_err(|e| e.to_string())?;

        let mut stream = make_stream(11, sid);
        let mut state = WalkState::new(start);
        let mut robin_sum = 0.0f64;
        let mut neumann_sum = 0.0f64;
        for _ in 0..400 {
            if let StepOutcome::BoundaryHit { hit_point, normal, dn_since_last_hit, .. } =
                wos_step(&sphere, &shell, &mut state, &mut stream, zero)
                    .map_err(|e| e.to_string())?
            {
                let weight = (-0.5 * state.c_exponent()).exp();
                let robin_term =
                    0.5 * weight * f(hit_point, -normal)
                        * local_time_increment(dn_since_last_hit, &shell);
                let neumann_term =
                    0.5 * f(hit_point, -normal)
                        * local_time_increment(dn_since_last_hit, &shell);
                if robin_term.to_bits() != neumann_term.to_bits() {
                    return Err(format!(
                        "path {sid}: per-hit term {robin_term} != Neumann term {neumann_term}"
                    ));
                }
                robin_sum -= robin_term;
                neumann_sum -= neumann_term;
                total_hits += 1;
            }
        }
        if engine.contribution.to_bits() != robin_sum.to_bits()
            || engine.contribution.to_bits() != neumann_sum.to_bits()
        {
            return Err(format!(
                "path {sid}: engine total {} != replayed sums {robin_sum} / {neumann_sum}",
                engine.contribution
            ));
        }
    }
    if total_hits == 0 {
        return Err("Neumann comparison saw no boundary hits".into());
    }

    // (c) Bitwise linearity and scale equivariance in the boundary data.
    let base: BoundaryFn = Arc::new(|p: Point3, _| p.x * p.x + 0.25);
    let run = |g: BoundaryFn| -> Result<f64, String> {
        let mut stream = make_stream(29, 5);
        let prob = ProblemSpec::with_boundary(one, 500, g);
        Ok(simulate_path(&sphere, &shell, &prob, 500, &mut stream, start)
            .map_err(|e| e.to_string())?
            .contribution)
    };
    let unit = run(base.clone())?;
    if unit == 0.0 {
        return Err("linearity baseline is zero; the check is vacuous".into());
    }
    let b = base.clone();
    let doubled = run(Arc::new(move |p, n| b(p, n) + b(p, n)))?;
    let b = base.clone();
    let quartered = run(Arc::new(move |p, n| 0.25 * b(p, n)))?;
    if doubled.to_bits() != (2.0 * unit).to_bits() {
        return Err(format!("f+f gave {doubled}, expected exactly {}", 2.0 * unit));
    }
    if quartered.to_bits() != (0.25 * unit).to_bits() {
        return Err(format!("0.25*f gave {quartered}, expected exactly {}", 0.25 * unit));
    }

    // (d) Counter increments on one million logged shell steps.
    let mut state = WalkState::new(start);
    let mut stream = make_stream(101, 0);
    let mut shell_steps = 0u64;
    let mut total_steps = 0u64;
    while shell_steps < C6_SHELL_STEPS {
        let prev_n = state.n_counter();
        let outcome = wos_step(&sphere, &shell, &mut state, &mut stream, one)
            .map_err(|e| e.to_string())?;
        let dn = state.n_counter() - prev_n;
        total_steps += 1;
        match outcome {
            StepOutcome::Interior => {
                if dn != 0 {
                    return Err(format!("interior step advanced the counter by {dn}"));
                }
            }
            StepOutcome::ShellMove { radius_class } => {
                shell_steps += 1;
                if dn != radius_class.occupation_increment() || !(dn == 1 || dn == 4) {
                    return Err(format!("shell move advanced the counter by {dn}"));
                }
            }
            StepOutcome::BoundaryHit { dn: dn_reported, radius_class, .. } => {
                shell_steps += 1;
                if dn != dn_reported
                    || dn != radius_class.occupation_increment()
                    || !(dn == 1 || dn == 4)
                {
                    return Err(format!(
                        "boundary hit advanced the counter by {dn} (reported {dn_reported})"
                    ));
                }
            }
        }
    }

    Ok(format!(
        "f=0 exact, {} Neumann paths term-for-term ({total_hits} hits), dyadic linearity bitwise, \
         {shell_steps} shell steps in {{1,4}} (of {total_steps} total)",
        C6_NEUMANN_PATHS
    ))
}

fn criterion_7() -> Result<String, String> {
    let domains = [
        ("cube", Domain::cube(1.0).map_err(|e| e.to_string())?),
        ("sphere", Domain::sphere(1.0).map_err(|e| e.to_string())?),
        ("ellipsoid", Domain::ellipsoid(3.0, 2.0, 1.0).map_err(|e| e.to_string())?),
    ];
    let mut checked = 0u64;
    for (idx, (name, d)) in domains.iter().enumerate() {
        let mut stream = make_stream(7, idx as u64);
        let mut interior_seen = 0u64;
        for _ in 0..C7_POINTS_PER_DOMAIN {
            let p = Point3::new(
                10.0 * stream.uniform() - 5.0,
                10.0 * stream.uniform() - 5.0,
                10.0 * stream.uniform() - 5.0,
            );
            let (q, n) = d.closest_boundary_point(p).map_err(|e| e.to_string())?;
            let residual = match d {
                Domain::Cube { half_width } => {
                    (q.x.abs().max(q.y.abs()).max(q.z.abs()) - half_width).abs()
                }
                Domain::Sphere { radius } => (q.norm() - radius).abs(),
                Domain::Ellipsoid { semi_axes: [a, b, c] } => {
                    let (u, v, w) = (q.x / a, q.y / b, q.z / c);
                    (u * u + v * v + w * w - 1.0).abs()
                }
            };
            if residual > C7_SURFACE_RESIDUAL_MAX {
                return Err(format!(
                    "{name}: projection of {p:?} left surface residual {residual:.3e}"
                ));
            }
            if (n.norm() - 1.0).abs() > C7_UNIT_NORMAL_TOL {
                return Err(format!("{name}: normal at {q:?} has length {}", n.norm()));
            }
            if !d.contains(q) {
                return Err(format!("{name}: projected point {q:?} fails membership"));
            }
            if d.contains(p) {
                interior_seen += 1;
                let dist = d.distance_to_boundary(p).map_err(|e| e.to_string())?;
                if dist > p.distance(q) + C7_DISTANCE_SLACK {
                    return Err(format!(
                        "{name}: distance {dist} exceeds |p-q| = {} at {p:?}",
                        p.distance(q)
                    ));
                }
                // The reported distance is a minimum over the boundary, so
                // no independently sampled boundary witness may beat it.
                let theta = std::f64::consts::PI * stream.uniform();
                let phi = 2.0 * std::f64::consts::PI * stream.uniform();
                let witness = match d {
                    Domain::Cube { half_width } => Point3::new(
                        *half_width,
                        (theta / std::f64::consts::PI * 2.0 - 1.0) * half_width,
                        (phi / std::f64::consts::PI - 1.0) * half_width,
                    ),
                    Domain::Sphere { radius } => Point3::new(
                        radius * theta.sin() * phi.cos(),
                        radius * theta.sin() * phi.sin(),
                        radius * theta.cos(),
                    ),
                    Domain::Ellipsoid { semi_axes: [a, b, c] } => Point3::new(
                        a * theta.sin() * phi.cos(),
                        b * theta.sin() * phi.sin(),
                        c * theta.cos(),
                    ),
                };
                if dist > p.distance(witness) + C7_DISTANCE_SLACK {
                    return Err(format!("{name}: witness at {witness:?} beats distance {dist}"));
                }
            }
            checked += 1;
        }
        if interior_seen == 0 {
            return Err(format!("{name}: no interior samples; the distance check is vacuous"));
        }
    }
    Ok(format!("{checked} projections checked across 3 domains"))
}

fn criterion_8() -> Result<String, String> {
    let dir = tempdir()?;
    let out = dir.path().join("determinism.csv");
    let cfg = experiment(
        DomainKind::Sphere,
        CoefficientSpec::Constant { gamma: 1.0 },
        EvalSet::Circle,
        2_000,
        400,
        1e-2,
        out.clone(),
    );
    let mut images: Vec<Vec<u8>> = Vec::new();
    for threads in C8_POOL_SIZES {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| format!("cannot build {threads}-thread pool: {e}"))?;
        pool.install(|| run_experiment(&cfg)).map_err(|e| e.to_string())?;
        images.push(std::fs::read(&out).map_err(|e| format!("cannot read CSV: {e}"))?);
    }
    if images[1] != images[0] || images[2] != images[0] {
        return Err(format!(
            "CSV bytes differ across worker pools {:?}",
            C8_POOL_SIZES
        ));
    }
    Ok(format!(
        "byte-identical CSV ({} bytes) for pools {:?}",
        images[0].len(),
        C8_POOL_SIZES
    ))
}
