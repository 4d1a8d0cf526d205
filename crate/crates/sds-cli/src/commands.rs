//! Command implementations behind the `sds` binary.

use std::path::{Path, PathBuf};

use sds_core::analysis::{
    dominant_bound_term, optimal_c, verify_trace, BoundReport, ProblemConstants,
};
use sds_core::directions::{maximal_positive_basis, DirectionSet, DEFAULT_SPANNING_TOL};
use sds_core::init::{bootstrap_init, forcing_constant_init, stepsize_init, InitReport};
use sds_core::objective::{
    build_objective, level_set_radius_quadratic, MeteredEvaluator, ObjectiveConfig, ObjectiveSpec,
};
use sds_core::solver::{
    check_initialization_assumption, solve, SolverConfig, SolverTrace,
};

use crate::config::{DirectionsConfig, ExperimentConfig, InitConfig, SolverBlock};
use crate::CliError;

/// Default local smoothness constant for the chained Rosenbrock objective
/// over the unit box around its minimizer, used when the config supplies
/// none.
const ROSENBROCK_LOCAL_L: f64 = 2500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

fn build_directions(
    config: &DirectionsConfig,
    dimension: usize,
) -> Result<DirectionSet, CliError> {
    match config {
        DirectionsConfig::Named(name) if name == "maximal-positive-basis" => {
            maximal_positive_basis(dimension)
                .map_err(|e| CliError::Config(format!("directions: {e}")))
        }
        DirectionsConfig::Named(name) => Err(CliError::Config(format!(
            "unknown direction set name '{name}' (expected \"maximal-positive-basis\")"
        ))),
        DirectionsConfig::Inline(set) => {
            if set.dimension() != dimension {
                return Err(CliError::Config(format!(
                    "directions have dimension {}, objective expects {}",
                    set.dimension(),
                    dimension
                )));
            }
            Ok(set.clone())
        }
    }
}

fn pick_one(
    field: &str,
    from_init: Option<f64>,
    from_solver: Option<f64>,
) -> Result<f64, CliError> {
    match (from_init, from_solver) {
        (Some(_), Some(_)) => Err(CliError::Config(format!(
            "{field} is set in both the init and solver blocks; keep one"
        ))),
        (Some(v), None) | (None, Some(v)) => Ok(v),
        (None, None) => Err(CliError::Config(format!(
            "{field} is required (in the init or solver block)"
        ))),
    }
}

fn require(field: &str, value: Option<f64>) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Config(format!("solver.{field} is required")))
}

struct ResolvedRun {
    solver_config: SolverConfig,
    init_report: Option<InitReport>,
    init_evaluations: u64,
    start_certified: bool,
}

/// Runs the configured initialization strategy (on its own evaluation
/// meter) and assembles the final solver configuration.
fn resolve_initialization(
    objective: &ObjectiveSpec,
    directions: &DirectionSet,
    init: &InitConfig,
    solver: &SolverBlock,
) -> Result<ResolvedRun, CliError> {
    let mut evaluator = MeteredEvaluator::new(objective);
    let (x0, alpha0, c, init_report, certified) = match init {
        InitConfig::None => {
            let x0 = solver
                .x0
                .clone()
                .ok_or_else(|| CliError::Config("solver.x0 is required".into()))?;
            let alpha0 = require("alpha0", solver.alpha0)?;
            let c = require("c", solver.c)?;
            let check =
                check_initialization_assumption(&mut evaluator, &x0, None, alpha0, c, directions)
                    .map_err(|e| CliError::Config(e.to_string()))?;
            (x0, alpha0, c, None, check.holds)
        }
        InitConfig::Bootstrap {
            x_tilde0,
            alpha0,
            c,
        } => {
            if solver.x0.is_some() {
                return Err(CliError::Config(
                    "bootstrap initialization supplies x0; drop solver.x0".into(),
                ));
            }
            let alpha0 = pick_one("alpha0", *alpha0, solver.alpha0)?;
            let c = pick_one("c", *c, solver.c)?;
            let report = bootstrap_init(&mut evaluator, x_tilde0, alpha0, c, directions, None)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let certified = report.start_certified;
            (report.x0.clone(), alpha0, c, Some(report), certified)
        }
        InitConfig::Stepsize { alpha_tilde0, c } => {
            if solver.alpha0.is_some() {
                return Err(CliError::Config(
                    "stepsize initialization supplies alpha0; drop solver.alpha0".into(),
                ));
            }
            let x0 = solver
                .x0
                .clone()
                .ok_or_else(|| CliError::Config("solver.x0 is required".into()))?;
            let c = pick_one("c", *c, solver.c)?;
            let report = stepsize_init(&mut evaluator, &x0, *alpha_tilde0, c, directions, None)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let alpha0 = report.alpha0;
            let certified = report.start_certified;
            (x0, alpha0, c, Some(report), certified)
        }
        InitConfig::ForcingConstant { alpha0 } => {
            if solver.c.is_some() {
                return Err(CliError::Config(
                    "forcing-constant initialization supplies c; drop solver.c".into(),
                ));
            }
            let x0 = solver
                .x0
                .clone()
                .ok_or_else(|| CliError::Config("solver.x0 is required".into()))?;
            let alpha0 = pick_one("alpha0", *alpha0, solver.alpha0)?;
            let report = forcing_constant_init(&mut evaluator, &x0, alpha0, directions, None)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let c = report.c;
            let certified = report.start_certified;
            (x0, alpha0, c, Some(report), certified)
        }
    };

    let solver_config = SolverConfig {
        x0,
        alpha0,
        c,
        shrink_factor: solver.shrink_factor,
        poll_policy: solver.poll_policy,
        move_to_best_on_unsuccessful: solver.move_to_best_on_unsuccessful,
        stop: solver.stop,
        safety: solver.safety,
        early_stop_l_cap: solver.early_stop_l_cap,
        skip_spanning_check: solver.skip_spanning_check,
    };
    Ok(ResolvedRun {
        solver_config,
        init_report,
        init_evaluations: evaluator.eval_count(),
        start_certified: certified,
    })
}

fn resolve_smoothness(
    objective: &ObjectiveSpec,
    config: &ExperimentConfig,
) -> Result<f64, CliError> {
    config
        .constants
        .l
        .or(objective.smoothness_l())
        .or(match config.objective {
            ObjectiveConfig::Rosenbrock { .. } => Some(ROSENBROCK_LOCAL_L),
            _ => None,
        })
        .ok_or_else(|| {
            CliError::Config(
                "missing L: the objective has no smoothness constant; set constants.l".into(),
            )
        })
}

fn resolve_r0(
    objective_config: &ObjectiveConfig,
    x0: &[f64],
    override_r0: Option<f64>,
) -> Option<f64> {
    if override_r0.is_some() {
        return override_r0;
    }
    match objective_config {
        ObjectiveConfig::Sphere { n } => {
            level_set_radius_quadratic(&vec![2.0; *n], x0).ok()
        }
        ObjectiveConfig::DiagQuadratic { d } => level_set_radius_quadratic(d, x0).ok(),
        _ => None,
    }
}

fn assemble_constants(
    objective: &ObjectiveSpec,
    directions: &DirectionSet,
    config: &ExperimentConfig,
    solver_config: &SolverConfig,
    trace: &SolverTrace,
) -> Result<ProblemConstants, CliError> {
    let mu = directions
        .cosine_measure_exact()
        .map_err(|e| CliError::Config(e.to_string()))?
        .mu;
    let constants = ProblemConstants {
        l: resolve_smoothness(objective, config)?,
        lambda: objective.strong_convexity_lambda(),
        f_star: objective.f_star(),
        f_x0: Some(trace.f_x0),
        r0: resolve_r0(&config.objective, &solver_config.x0, config.constants.r0),
        x_star: objective.x_star().map(|x| x.to_vec()),
        mu,
        cardinality_d: directions.size(),
        c: solver_config.c,
        alpha0: solver_config.alpha0,
        shrink_factor: solver_config.shrink_factor,
    };
    Ok(constants)
}

/// `run <config>`: initialize, solve, write the trace and the bound report,
/// and exit nonzero when a bound fails.
pub fn cmd_run(
    config_path: &Path,
    out_dir: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let objective = build_objective(&config.objective)
        .map_err(|e| CliError::Config(format!("objective: {e}")))?;
    let directions = build_directions(&config.directions, objective.dimension())?;

    if !config.solver.skip_spanning_check {
        let spanning = directions
            .is_positive_spanning_set(DEFAULT_SPANNING_TOL)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !spanning {
            return Err(CliError::Config(
                "direction set is not a positive spanning set".into(),
            ));
        }
    }

    let resolved = resolve_initialization(&objective, &directions, &config.init, &config.solver)?;
    match &resolved.init_report {
        Some(report) => println!(
            "init({:?}): x0 set, alpha0={}, c={}, evaluations={} (+{} certificate), certified={}",
            report.strategy,
            report.alpha0,
            report.c,
            report.evaluations_used,
            report.certificate_evaluations,
            report.start_certified
        ),
        None => println!(
            "init(none): assumption-2 check used {} evaluations (separate meter), certified={}",
            resolved.init_evaluations, resolved.start_certified
        ),
    }

    let trace = solve(&objective, &directions, &resolved.solver_config)
        .map_err(|e| CliError::Config(e.to_string()))?;
    for rec in &trace.iterates {
        println!(
            "k={} alpha={} l={} f={} evals={}{}",
            rec.k,
            rec.alpha,
            rec.l,
            rec.f,
            rec.evals,
            rec.grad_norm
                .map(|g| format!(" grad_norm={g}"))
                .unwrap_or_default()
        );
    }
    println!(
        "total_evaluations={} termination={:?}",
        trace.total_evaluations, trace.termination_reason
    );

    let constants = assemble_constants(&objective, &directions, &config, &resolved.solver_config, &trace)?;
    let report = verify_trace(
        &trace,
        &constants,
        config.regime,
        config.constants.epsilon,
        resolved.start_certified,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;

    let dir = output_dir(out_dir, config.out_dir.as_deref())?;
    write_outputs(&trace, &report, &dir, format)?;
    print!("{}", report.render_table());

    if report.all_pass {
        Ok(())
    } else {
        Err(CliError::Violation("bound report has failing rows".into()))
    }
}

fn output_dir(flag: Option<&Path>, config: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = flag
        .map(Path::to_path_buf)
        .or_else(|| config.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_outputs(
    trace: &SolverTrace,
    report: &BoundReport,
    dir: &Path,
    format: OutputFormat,
) -> Result<(), CliError> {
    let io_err = |path: &Path, e: std::io::Error| {
        CliError::Config(format!("cannot write {}: {e}", path.display()))
    };
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let path = dir.join("trace.json");
        trace.write_json(&path).map_err(|e| io_err(&path, e))?;
    }
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        let path = dir.join("trace.csv");
        trace.write_csv(&path).map_err(|e| io_err(&path, e))?;
    }
    let path = dir.join("bound_report.json");
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    std::fs::write(&path, json).map_err(|e| io_err(&path, e))?;
    Ok(())
}

/// `cosine`: exact and sampled cosine measure of a direction set.
pub fn cmd_cosine(
    file: Option<&Path>,
    mpb: Option<usize>,
    samples: u64,
    seed: u64,
) -> Result<(), CliError> {
    let set = match (file, mpb) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<DirectionSet>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        (None, Some(n)) => {
            maximal_positive_basis(n).map_err(|e| CliError::Config(e.to_string()))?
        }
        _ => {
            return Err(CliError::Config(
                "pass exactly one of --file <path> or --mpb <n>".into(),
            ))
        }
    };

    println!("dimension: {}", set.dimension());
    println!("|D|: {}", set.size());
    match set.cosine_measure_exact() {
        Ok(exact) => {
            println!("exact mu: {:.9}", exact.mu);
            println!(
                "witness: [{}]",
                exact
                    .witness
                    .iter()
                    .map(|v| format!("{v:.9}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            println!(
                "|D|/mu^2: {:.9}",
                set.size() as f64 / (exact.mu * exact.mu)
            );
            let spanning = exact.mu > DEFAULT_SPANNING_TOL;
            println!(
                "positive spanning set: {}",
                if spanning { "yes" } else { "no" }
            );
        }
        Err(sds_core::directions::DirectionError::DegenerateSet { .. }) => {
            println!("exact mu: degenerate (no independent n-subset)");
            println!("positive spanning set: no");
        }
        Err(e) => return Err(CliError::Config(e.to_string())),
    }
    let sampled = set
        .cosine_measure_sampled(samples, seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    println!("sampled mu ({samples} samples, seed {seed}): {:.9}", sampled.mu);
    Ok(())
}

/// `sweep-c <config> --grid ...`: theoretical dominant bound term and
/// observed evaluation count for each forcing constant on the grid.
pub fn cmd_sweep_c(
    config_path: &Path,
    grid: &[f64],
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Config("--grid must list at least one value".into()));
    }
    let config = ExperimentConfig::load(config_path)?;
    let objective = build_objective(&config.objective)
        .map_err(|e| CliError::Config(format!("objective: {e}")))?;
    let directions = build_directions(&config.directions, objective.dimension())?;
    let l = resolve_smoothness(&objective, &config)?;

    let x0 = config
        .solver
        .x0
        .clone()
        .ok_or_else(|| CliError::Config("solver.x0 is required for sweep-c".into()))?;
    let alpha0 = require("alpha0", config.solver.alpha0)?;
    let mu = directions
        .cosine_measure_exact()
        .map_err(|e| CliError::Config(e.to_string()))?
        .mu;

    let mut rows: Vec<(f64, f64, u64)> = Vec::with_capacity(grid.len());
    for &c in grid {
        if !c.is_finite() || c <= 0.0 {
            return Err(CliError::Config(format!("grid value {c} must be positive")));
        }
        let constants = ProblemConstants {
            l,
            lambda: objective.strong_convexity_lambda(),
            f_star: objective.f_star(),
            f_x0: None,
            r0: resolve_r0(&config.objective, &x0, config.constants.r0),
            x_star: objective.x_star().map(|x| x.to_vec()),
            mu,
            cardinality_d: directions.size(),
            c,
            alpha0,
            shrink_factor: config.solver.shrink_factor,
        };
        let term = dominant_bound_term(&constants, config.regime, c)
            .map_err(|e| CliError::Config(e.to_string()))?;

        let mut solver_config = SolverConfig::new(x0.clone(), alpha0, c, config.solver.stop);
        solver_config.shrink_factor = config.solver.shrink_factor;
        solver_config.poll_policy = config.solver.poll_policy;
        solver_config.safety = config.solver.safety;
        let trace = solve(&objective, &directions, &solver_config)
            .map_err(|e| CliError::Config(e.to_string()))?;
        rows.push((c, term, trace.total_evaluations));
    }

    let mut csv = String::from("c,bound_term,observed_evaluations\n");
    for (c, term, n) in &rows {
        csv.push_str(&format!("{c},{term},{n}\n"));
    }
    print!("{csv}");
    if let Some(dir) = out_dir {
        let dir = output_dir(Some(dir), None)?;
        let path = dir.join("sweep_c.csv");
        std::fs::write(&path, &csv)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }

    let bound_argmin = rows
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid nonempty")
        .0;
    let observed_argmin = rows
        .iter()
        .min_by_key(|r| r.2)
        .expect("grid nonempty")
        .0;
    println!("bound-term argmin: c={bound_argmin}");
    println!("observed-evaluations argmin: c={observed_argmin} (reported, not asserted)");

    let half_l = optimal_c(l);
    let on_grid = grid.iter().any(|&c| (c - half_l).abs() <= 1e-12 * half_l.max(1.0));
    if on_grid && (bound_argmin - half_l).abs() > 1e-12 * half_l.max(1.0) {
        return Err(CliError::Violation(format!(
            "bound-term argmin {bound_argmin} differs from L/2 = {half_l}"
        )));
    }
    Ok(())
}

/// `init-compare <config>`: all three initialization strategies on the same
/// starting data, with observed costs against their bounds.
pub fn cmd_init_compare(config_path: &Path) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let objective = build_objective(&config.objective)
        .map_err(|e| CliError::Config(format!("objective: {e}")))?;
    let directions = build_directions(&config.directions, objective.dimension())?;

    let x0 = config
        .solver
        .x0
        .clone()
        .ok_or_else(|| CliError::Config("solver.x0 is required for init-compare".into()))?;
    let alpha0 = require("alpha0", config.solver.alpha0)?;
    let c = require("c", config.solver.c)?;
    let alpha_tilde0 = match &config.init {
        InitConfig::Stepsize { alpha_tilde0, .. } => *alpha_tilde0,
        _ => alpha0,
    };

    let mut reports: Vec<InitReport> = Vec::new();
    let mut me = MeteredEvaluator::new(&objective);
    reports.push(
        bootstrap_init(&mut me, &x0, alpha0, c, &directions, None)
            .map_err(|e| CliError::Config(e.to_string()))?,
    );
    let mut me = MeteredEvaluator::new(&objective);
    reports.push(
        stepsize_init(&mut me, &x0, alpha_tilde0, c, &directions, None)
            .map_err(|e| CliError::Config(e.to_string()))?,
    );
    let mut me = MeteredEvaluator::new(&objective);
    reports.push(
        forcing_constant_init(&mut me, &x0, alpha0, &directions, None)
            .map_err(|e| CliError::Config(e.to_string()))?,
    );

    println!(
        "{:<18} {:>12} {:>16} {:>10}",
        "strategy", "evaluations", "cost_bound", "certified"
    );
    let mut violation = None;
    for report in &reports {
        let bound = report
            .theoretical_cost_bound
            .map(|b| format!("{b:.9}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<18} {:>12} {:>16} {:>10}",
            format!("{:?}", report.strategy),
            report.evaluations_used,
            bound,
            report.start_certified
        );
        if let Some(b) = report.theoretical_cost_bound {
            if report.evaluations_used as f64 > b + 1e-9 {
                violation = Some(format!(
                    "{:?} used {} evaluations, over its bound {b}",
                    report.strategy, report.evaluations_used
                ));
            }
        }
    }
    match violation {
        Some(msg) => Err(CliError::Violation(msg)),
        None => Ok(()),
    }
}
