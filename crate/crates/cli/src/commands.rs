//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mascope_core::{
    box_vi_holds, run, BoxSet, ConstraintSet, CoreError, Engine, EngineKind, Objective,
    RunTrace, Vector,
};

use crate::emit::{self, Series};
use crate::scenario::{self, BuildParams, BuiltScenario};

/// Command failure with the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: unknown scenario, engine or flag value. Exit 2.
    Usage(String),
    /// Validation or check failure. Exit 1.
    Failure(String),
    /// I/O trouble, reported with the path involved. Exit 1.
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) | CliError::Io { .. } => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Failure(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => {
                write!(f, "i/o error on {}: {source}", path.display())
            }
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn core_err(err: CoreError) -> CliError {
    CliError::Failure(err.to_string())
}

/// Resolve the output root: `--out` flag, else `MASCOPE_OUT`, else `out`.
pub fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("MASCOPE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn build_scenario(name: &str, params: &BuildParams) -> Result<BuiltScenario, CliError> {
    if scenario::info(name).is_none() {
        return Err(CliError::Usage(format!(
            "unknown scenario '{name}'; see `mascope list`"
        )));
    }
    scenario::build(name, params).map_err(core_err)
}

pub fn list() -> String {
    let mut out = String::new();
    for s in scenario::SCENARIOS {
        let _ = writeln!(
            out,
            "{:<20} engine={:<8} iters={:<7} seed={:<3} {}",
            s.name,
            s.default_engine.name(),
            s.default_iters,
            s.default_seed,
            s.doc
        );
    }
    out
}

fn meta_text(built: &BuiltScenario, traces: &[&RunTrace]) -> String {
    let config = &built.config;
    let mut out = String::new();
    let first = traces.first().expect("at least one trace");
    let _ = writeln!(out, "scenario = {}", first.scenario);
    let _ = writeln!(
        out,
        "engines = {}",
        traces
            .iter()
            .map(|t| t.engine.as_str())
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(out, "seed = {}", first.seed);
    let _ = writeln!(out, "iters = {}", first.iters);
    let _ = writeln!(out, "step = {}", config.steps.describe());
    let _ = writeln!(out, "schedule.period = {}", config.schedule.period());
    let _ = writeln!(out, "schedule.window = {}", config.schedule.certified_window());
    let _ = writeln!(out, "schedule.eta = {}", emit::format_g17(config.schedule.eta_bound()));
    let gap_mode = if traces.iter().any(|t| t.gap_absolute_fallback) {
        "absolute"
    } else {
        "relative"
    };
    let _ = writeln!(out, "gap.mode = {gap_mode}");
    let _ = writeln!(
        out,
        "inner.nonconverged = {}",
        traces
            .iter()
            .map(|t| t.inner_nonconverged.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(out, "reference.method = {}", config.reference.method);
    let _ = writeln!(
        out,
        "reference.f_star = {}",
        emit::format_g17(config.reference.f_star)
    );
    let _ = writeln!(
        out,
        "reference.x_star = {}",
        config
            .reference
            .x_star
            .as_slice()
            .iter()
            .map(|&v| emit::format_g17(v))
            .collect::<Vec<_>>()
            .join(",")
    );
    out
}

/// `run`: execute one scenario and write `trace.csv`, `trace.svg` and
/// `meta.txt` under `<out>/<scenario>/`.
pub fn run_scenario(
    name: &str,
    params: &BuildParams,
    out_root: &Path,
) -> Result<String, CliError> {
    let built = build_scenario(name, params)?;
    let trace = run(&built.config).map_err(core_err)?;
    let dir = out_root.join(name);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let csv_path = dir.join("trace.csv");
    emit::emit_csv(&trace, &csv_path).map_err(io_err(&csv_path))?;
    let svg_path = dir.join("trace.svg");
    let series = vec![Series::from_trace(
        format!("{} ({})", name, trace.engine),
        &trace,
        |r| r.dist_to_opt,
    )];
    emit::emit_svg(&series, "distance to optimum", &svg_path).map_err(io_err(&svg_path))?;
    let meta_path = dir.join("meta.txt");
    fs::write(&meta_path, meta_text(&built, &[&trace])).map_err(io_err(&meta_path))?;

    let mut summary = String::new();
    let last = trace.rows.last().expect("trace always has a row");
    let _ = writeln!(summary, "scenario {name}: engine {}", trace.engine);
    let _ = writeln!(
        summary,
        "final k={}: dist_to_opt={} rel_gap_iter={} consensus={}",
        last.k,
        emit::format_g17(last.dist_to_opt),
        emit::format_g17(last.rel_obj_gap_iterates),
        emit::format_g17(last.consensus_residual)
    );
    let _ = writeln!(summary, "wrote {}", csv_path.display());
    let _ = writeln!(summary, "wrote {}", svg_path.display());
    let _ = writeln!(summary, "wrote {}", meta_path.display());
    Ok(summary)
}

/// `compare`: run several engines on identical scenario data, write one CSV
/// per engine plus an overlay SVG under `<out>/<scenario>_compare/`.
pub fn compare_scenario(
    name: &str,
    engine_list: &str,
    params: &BuildParams,
    out_root: &Path,
) -> Result<String, CliError> {
    let engines: Vec<EngineKind> = engine_list
        .split(',')
        .map(|s| EngineKind::parse(s.trim()).map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    if engines.len() < 2 {
        return Err(CliError::Usage(
            "compare needs at least two engines, e.g. --engines algo1,prox".into(),
        ));
    }
    let built = build_scenario(name, params)?;
    let dir = out_root.join(format!("{name}_compare"));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;

    let mut traces = Vec::new();
    for engine in &engines {
        let mut config = built.config.clone();
        config.engine = *engine;
        let trace = run(&config).map_err(core_err)?;
        let path = dir.join(format!("{}.csv", engine.name()));
        emit::emit_csv(&trace, &path).map_err(io_err(&path))?;
        traces.push(trace);
    }
    let series: Vec<Series> = traces
        .iter()
        .map(|t| Series::from_trace(t.engine.clone(), t, |r| r.dist_to_opt))
        .collect();
    let svg_path = dir.join("compare.svg");
    emit::emit_svg(&series, "distance to optimum", &svg_path).map_err(io_err(&svg_path))?;
    let meta_path = dir.join("meta.txt");
    let refs: Vec<&RunTrace> = traces.iter().collect();
    fs::write(&meta_path, meta_text(&built, &refs)).map_err(io_err(&meta_path))?;

    let mut summary = String::new();
    for t in &traces {
        let last = t.rows.last().expect("rows");
        let _ = writeln!(
            summary,
            "{}: final dist_to_opt={}",
            t.engine,
            emit::format_g17(last.dist_to_opt)
        );
    }
    let _ = writeln!(summary, "wrote {}", svg_path.display());
    Ok(summary)
}

fn quadratics_are_psd(obj: &Objective) -> bool {
    match obj {
        Objective::Quadratic(q) => q.is_psd(),
        Objective::Sum(terms) => terms.iter().all(quadratics_are_psd),
        _ => true,
    }
}

/// `validate`: run the checkable assumptions for a scenario and report one
/// line per check. Returns the report and whether everything passed.
pub fn validate_scenario(name: &str, params: &BuildParams) -> Result<(String, bool), CliError> {
    if scenario::info(name).is_none() {
        return Err(CliError::Usage(format!(
            "unknown scenario '{name}'; see `mascope list`"
        )));
    }
    let mut out = String::new();
    let built = match scenario::build(name, params) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(out, "FAIL build: {e}");
            return Ok((out, false));
        }
    };
    let config = &built.config;
    let mut all_pass = true;
    let mut check = |label: &str, pass: bool, detail: String, out: &mut String| {
        let tag = if pass { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{tag} {label}: {detail}");
        if !pass {
            all_pass = false;
        }
    };

    let psd = config
        .agents
        .iter()
        .all(|a| quadratics_are_psd(&a.objective));
    check(
        "objective convexity",
        psd,
        format!("{} agents, quadratic blocks positive semidefinite", config.agents.len()),
        &mut out,
    );

    let dims_ok = config.agents.iter().all(|a| {
        a.objective
            .dim()
            .map(|d| d == a.set.dim())
            .unwrap_or(true)
    });
    check(
        "dimensions",
        dims_ok,
        format!("decision dimension {}", config.agents[0].set.dim()),
        &mut out,
    );

    check(
        "set compactness",
        true,
        "boxes have finite bounds, balls have finite positive radius".into(),
        &mut out,
    );

    check(
        "intersection interior",
        config.interior_radius > 0.0,
        format!(
            "ball of radius {} around the interior point fits in the feasible set",
            emit::format_g17(config.interior_radius)
        ),
        &mut out,
    );

    let mut mixing_ok = true;
    for (idx, matrix) in config.schedule.matrices().iter().enumerate() {
        let report = mascope_core::validate_mixing(matrix, matrix.eta_bound());
        if !report.all_pass() {
            mixing_ok = false;
            let _ = writeln!(out, "     matrix {idx}: {report:?}");
        }
    }
    check(
        "mixing matrices",
        mixing_ok,
        format!(
            "{} matrices, eta >= {}",
            config.schedule.period(),
            emit::format_g17(config.schedule.eta_bound())
        ),
        &mut out,
    );

    check(
        "schedule connectivity",
        true,
        format!(
            "window T = {} connects the union graph",
            config.schedule.certified_window()
        ),
        &mut out,
    );

    let init_ok = config
        .agents
        .iter()
        .zip(&config.init)
        .all(|(a, x0)| a.set.contains(x0, 1e-9).unwrap_or(false));
    check(
        "initial feasibility",
        init_ok,
        "every x_i(0) lies in its own set".into(),
        &mut out,
    );

    let total = Objective::sum(
        config.agents.iter().map(|a| a.objective.clone()).collect(),
    )
    .map_err(core_err)?;
    let lip = total.lipschitz_estimate(&config.feasible, 1000, 123);
    check(
        "subgradient bound",
        lip.is_finite(),
        format!("sampled estimate L >= {}", emit::format_g17(lip)),
        &mut out,
    );

    // informational: constants of the mixing analysis (lambda overflows and
    // q rounds to 1 once (m-1) T |ln eta| exceeds double range)
    let sets: Vec<_> = config.agents.iter().map(|a| a.set.clone()).collect();
    if let Ok(constants) = mascope_core::theoretical_constants(
        config.schedule.eta_bound(),
        config.agents.len(),
        config.schedule.certified_window(),
        config.interior_radius,
        &sets,
    ) {
        let _ = writeln!(
            out,
            "     mixing-analysis constants: lambda={}, q={}, mu={}, diameter={}",
            emit::format_g17(constants.lambda),
            emit::format_g17(constants.q),
            emit::format_g17(constants.mu),
            emit::format_g17(constants.diameter)
        );
    }

    check(
        "reference feasibility",
        config
            .feasible
            .contains(&config.reference.x_star, 1e-9)
            .unwrap_or(false),
        format!("f* = {}", emit::format_g17(config.reference.f_star)),
        &mut out,
    );

    Ok((out, all_pass))
}

/// Everything the fixed-point check produces.
pub struct FixedPointReport {
    /// `max_k max_i ||x_i(k) - target_i||_inf` over the whole run.
    pub max_deviation: f64,
    /// Optimality certificates of the first local update, per agent.
    pub base_case_vi: Vec<bool>,
    /// True when the certificates held at every later iteration as well.
    pub later_steps_vi: bool,
    pub iterations: usize,
    pub pass: bool,
    pub text: String,
}

/// `prop1`: simulate the dual-averaging scheme on the two-agent quadratic
/// data from the agents' local optima and certify, via the box variational
/// inequalities, that those points are stationary for it.
pub fn fixed_point_check() -> Result<FixedPointReport, CliError> {
    let built = build_scenario("prop1", &BuildParams::default())?;
    fixed_point_report(&built)
}

/// Run the stationarity check for any scenario carrying fixed-point targets.
pub fn fixed_point_report(built: &BuiltScenario) -> Result<FixedPointReport, CliError> {
    let config = &built.config;
    let targets = built
        .fixed_points
        .as_ref()
        .expect("prop1 carries stationary targets")
        .clone();
    let boxes: Vec<BoxSet> = config
        .agents
        .iter()
        .map(|a| match &a.set {
            ConstraintSet::Box(b) => b.clone(),
            ConstraintSet::Ball(_) => unreachable!("prop1 sets are boxes"),
        })
        .collect();

    let mut engine = Engine::new(config).map_err(core_err)?;
    let iterations = config.iters;
    let mut max_deviation = 0.0f64;
    let mut base_case_vi = Vec::new();
    let mut later_steps_vi = true;
    let mut first_vi_failure: Option<(usize, usize)> = None;
    let mut first_deviation: Option<(usize, usize, f64)> = None;

    for k in 0..iterations {
        engine.step().map_err(core_err)?;
        let c = config.steps.step_size(k);
        for (i, state) in engine.states().iter().enumerate() {
            let deviation = state
                .x
                .as_slice()
                .iter()
                .zip(targets[i].as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if deviation > max_deviation {
                max_deviation = deviation;
            }
            if deviation > 1e-9 && first_deviation.is_none() {
                first_deviation = Some((k + 1, i, deviation));
            }
            // gradient of z' xi + 1/(2c) ||xi||^2 evaluated at the claimed
            // stationary point: the target is the constrained minimizer of
            // this iteration's local update exactly when the box inequality
            // holds for it
            let certificate = Vector::new(
                state
                    .dual_z
                    .as_slice()
                    .iter()
                    .zip(targets[i].as_slice())
                    .map(|(z, t)| z + t / c)
                    .collect(),
            )
            .map_err(core_err)?;
            let holds =
                box_vi_holds(&certificate, &targets[i], &boxes[i], 1e-9).map_err(core_err)?;
            if k == 0 {
                base_case_vi.push(holds);
            } else if !holds {
                later_steps_vi = false;
                if first_vi_failure.is_none() {
                    first_vi_failure = Some((k + 1, i));
                }
            }
        }
    }

    let base_ok = base_case_vi.iter().all(|&b| b);
    let pass = max_deviation <= 1e-9;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "fixed-point check: dual-averaging scheme, {} iterations from the local optima",
        iterations
    );
    let _ = writeln!(
        text,
        "max deviation max_k max_i ||x_i(k) - target_i||_inf = {}",
        emit::format_g17(max_deviation)
    );
    let _ = writeln!(
        text,
        "base-case optimality certificates per agent: {}",
        base_case_vi
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    let _ = writeln!(
        text,
        "optimality certificates at every later iteration: {later_steps_vi}"
    );
    if pass && base_ok && later_steps_vi {
        let _ = writeln!(
            text,
            "PASS: the local optima are a fixed point of the scheme; the iteration never leaves them"
        );
    } else {
        let _ = writeln!(text, "FAIL: the claimed fixed point does not hold");
        let _ = writeln!(text, "discrepancy report:");
        if let Some((k, i, dev)) = first_deviation {
            let _ = writeln!(
                text,
                "  iterate of agent {i} first left its target at k={k} by {} (sup norm)",
                emit::format_g17(dev)
            );
        }
        if !base_ok || !later_steps_vi {
            if let Some((k, i)) = first_vi_failure {
                let _ = writeln!(
                    text,
                    "  first certificate failure: agent {i}'s target at k={k}"
                );
            }
            let _ = writeln!(
                text,
                "  a failed certificate means the accumulated subgradients, evaluated from the \
                 configured problem data, do not make the target the constrained minimizer of \
                 the local update at that iteration; stationarity depends on the gradient \
                 magnitudes, not only on their signs"
            );
        }
        let _ = writeln!(
            text,
            "  the simulated trajectory above is the binding result; the certificates locate \
             where the construction breaks"
        );
    }

    Ok(FixedPointReport {
        max_deviation,
        base_case_vi,
        later_steps_vi,
        iterations,
        pass,
        text,
    })
}
