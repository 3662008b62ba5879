//! Packaged problem scenarios.
//!
//! Every builder is deterministic in its seed and parameters: data vectors,
//! network draws and initial points all come from one SplitMix64 stream in a
//! fixed order (documented per builder), so a scenario rebuilt with the same
//! inputs is identical down to the bit.

use mascope_core::{
    chebyshev_interior, complete_graph, intersect_boxes, metropolis_weights, path_graph,
    random_sparse, AbsResidualFn, AgentSpec, BallSet, BoxSet, ConstraintSet, CoreError,
    EngineKind, L1RegFn, LogStride, Matrix, MixingMatrix, MixingSchedule, Objective,
    OptimumReference, QuadraticFn, Result, RunConfig, SplitMix64, SquaredResidualFn,
    StepSchedule, Topology, Vector,
};

/// Sparsity degrees of the four cyclic network configurations used by the
/// regularized-regression scenarios.
pub const CYCLIC_SPARSITIES: [f64; 4] = [0.15, 0.3, 0.5, 0.8];

/// Default regularization weight for the l2+l1 scenarios.
pub const DEFAULT_L1_WEIGHT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkKind {
    Complete,
    Line,
    Sparse,
}

impl NetworkKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(NetworkKind::Complete),
            "line" => Ok(NetworkKind::Line),
            "sparse" => Ok(NetworkKind::Sparse),
            other => Err(CoreError::Parameter(format!(
                "unknown network kind '{other}'"
            ))),
        }
    }
}

/// User overrides applied on top of a scenario's defaults.
#[derive(Debug, Clone, Default)]
pub struct BuildParams {
    pub engine: Option<EngineKind>,
    pub seed: Option<u64>,
    pub iters: Option<usize>,
    pub step: Option<StepSchedule>,
    pub network: Option<NetworkKind>,
    pub network_d: Option<f64>,
    pub log_stride: Option<LogStride>,
}

/// Scenario data before the reference optimum has been solved for.
pub struct AssembledScenario {
    pub name: String,
    pub engine: EngineKind,
    pub agents: Vec<AgentSpec>,
    pub schedule: MixingSchedule,
    pub steps: StepSchedule,
    pub iters: usize,
    pub log_stride: LogStride,
    pub seed: u64,
    pub init: Vec<Vector>,
    pub feasible: ConstraintSet,
    pub interior_point: Vector,
    pub interior_radius: f64,
    /// Per-agent stationary points of the fixed-point construction.
    pub fixed_points: Option<Vec<Vector>>,
    /// Budget and schedule for the reference solve.
    pub reference_budget: usize,
    pub reference_sched: StepSchedule,
}

impl AssembledScenario {
    pub fn total_objective(&self) -> Result<Objective> {
        Objective::sum(self.agents.iter().map(|a| a.objective.clone()).collect())
    }

    /// Solve the centralized reference and produce the runnable config.
    pub fn solve(self) -> Result<BuiltScenario> {
        let total = self.total_objective()?;
        let (reference, reference_start_values) = mascope_core::centralized_solve_detailed(
            &total,
            &self.feasible,
            self.reference_budget,
            &self.reference_sched,
        )?;
        Ok(self.with_reference(reference, reference_start_values))
    }

    /// Attach an externally computed reference.
    pub fn with_reference(
        self,
        reference: OptimumReference,
        reference_start_values: Vec<f64>,
    ) -> BuiltScenario {
        BuiltScenario {
            config: RunConfig {
                engine: self.engine,
                agents: self.agents,
                schedule: self.schedule,
                steps: self.steps,
                iters: self.iters,
                log_stride: self.log_stride,
                seed: self.seed,
                init: self.init,
                feasible: self.feasible,
                interior_point: self.interior_point,
                interior_radius: self.interior_radius,
                reference,
                scenario_name: self.name,
            },
            fixed_points: self.fixed_points,
            reference_start_values,
        }
    }
}

/// A built scenario: a complete run configuration with its reference
/// optimum, plus the stationary targets when the scenario has them.
pub struct BuiltScenario {
    pub config: RunConfig,
    /// Per-agent stationary points of the fixed-point construction.
    pub fixed_points: Option<Vec<Vector>>,
    /// Standalone restart bests from the reference solve, for cross-checks.
    pub reference_start_values: Vec<f64>,
}

pub struct ScenarioInfo {
    pub name: &'static str,
    pub doc: &'static str,
    pub default_engine: EngineKind,
    pub default_iters: usize,
    pub default_seed: u64,
}

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "prop1",
        doc: "two-agent quadratic counterexample under the dual-averaging scheme; \
              started at the agents' local optima, which are stationary for it",
        default_engine: EngineKind::DualAvg,
        default_iters: 500,
        default_seed: 0,
    },
    ScenarioInfo {
        name: "two_agent",
        doc: "two-agent quadratic problem under the averaging engine, 1/sqrt(k+1) steps",
        default_engine: EngineKind::Algo1,
        default_iters: 10_000,
        default_seed: 0,
    },
    ScenarioInfo {
        name: "two_agent_harmonic",
        doc: "two-agent quadratic problem under the averaging engine, 1/(k+1) steps",
        default_engine: EngineKind::Algo1,
        default_iters: 10_000,
        default_seed: 0,
    },
    ScenarioInfo {
        name: "robust_complete",
        doc: "robust regression, 30 agents sharing a radius-5 ball, complete graph",
        default_engine: EngineKind::Algo1,
        default_iters: 5_000,
        default_seed: 7,
    },
    ScenarioInfo {
        name: "robust_line",
        doc: "robust regression on a line graph",
        default_engine: EngineKind::Algo1,
        default_iters: 5_000,
        default_seed: 7,
    },
    ScenarioInfo {
        name: "robust_sparse03",
        doc: "robust regression on a sparse graph with density 0.3",
        default_engine: EngineKind::Algo1,
        default_iters: 5_000,
        default_seed: 7,
    },
    ScenarioInfo {
        name: "robust_sparse08",
        doc: "robust regression on a sparse graph with density 0.8",
        default_engine: EngineKind::Algo1,
        default_iters: 5_000,
        default_seed: 7,
    },
    ScenarioInfo {
        name: "robust_desk",
        doc: "robust regression at desk scale (10 agents, 4 variables, complete graph), \
              long horizon for rate diagnostics",
        default_engine: EngineKind::Algo1,
        default_iters: 100_000,
        default_seed: 7,
    },
    ScenarioInfo {
        name: "l2_l1_desk",
        doc: "l2 regression with l1 regularization at desk scale (30 agents, 5 variables), \
              per-agent boxes and a 4-matrix cyclic schedule, 0.2/(k+1) steps",
        default_engine: EngineKind::Algo1,
        default_iters: 10_000,
        default_seed: 11,
    },
    ScenarioInfo {
        name: "l2_l1",
        doc: "l2 regression with l1 regularization at full scale (300 agents, 10 variables)",
        default_engine: EngineKind::Algo1,
        default_iters: 10_000,
        default_seed: 11,
    },
];

pub fn info(name: &str) -> Option<&'static ScenarioInfo> {
    SCENARIOS.iter().find(|s| s.name == name)
}

fn vecn(v: &[f64]) -> Vector {
    Vector::new(v.to_vec()).expect("finite literals")
}

/// The shared two-agent quadratic problem data.
pub fn two_agent_data() -> (Vec<AgentSpec>, Vec<Vector>) {
    let q = Matrix::new(2, 2, vec![1.2, 0.4, 0.4, 1.8]).expect("well formed");
    let f1 = Objective::Quadratic(
        QuadraticFn::new(q.clone(), vecn(&[8.0, -4.0]), 20.0).expect("symmetric"),
    );
    let f2 = Objective::Quadratic(
        QuadraticFn::new(q, vecn(&[2.93, -11.46]), 25.0).expect("symmetric"),
    );
    let x1 = ConstraintSet::Box(
        BoxSet::new(vecn(&[-1.0, -1.0]), vecn(&[1.0, 1.0])).expect("ordered bounds"),
    );
    let x2 = ConstraintSet::Box(
        BoxSet::new(vecn(&[0.5, 0.5]), vecn(&[2.5, 2.5])).expect("ordered bounds"),
    );
    let agents = vec![
        AgentSpec {
            objective: f1,
            set: x1,
        },
        AgentSpec {
            objective: f2,
            set: x2,
        },
    ];
    // local constrained optima of f1 over X1 and f2 over X2
    let local_optima = vec![vecn(&[-1.0, 1.0]), vecn(&[0.5, 2.5])];
    (agents, local_optima)
}

fn static_schedule(matrix: MixingMatrix) -> Result<MixingSchedule> {
    MixingSchedule::new(vec![matrix])
}

fn two_agent_scenario(
    name: &str,
    engine: EngineKind,
    steps: StepSchedule,
    iters: usize,
    log_stride: LogStride,
    seed: u64,
) -> Result<AssembledScenario> {
    let (agents, local_optima) = two_agent_data();
    let schedule = static_schedule(metropolis_weights(&complete_graph(2)?)?)?;
    let boxes: Vec<BoxSet> = agents
        .iter()
        .map(|a| match &a.set {
            ConstraintSet::Box(b) => b.clone(),
            ConstraintSet::Ball(_) => unreachable!("two-agent sets are boxes"),
        })
        .collect();
    let feasible_box = intersect_boxes(&boxes)?;
    let (interior_point, interior_radius) = chebyshev_interior(&feasible_box)?;
    Ok(AssembledScenario {
        name: name.to_string(),
        engine,
        agents,
        schedule,
        steps,
        iters,
        log_stride,
        seed,
        init: local_optima.clone(),
        feasible: ConstraintSet::Box(feasible_box),
        interior_point,
        interior_radius,
        fixed_points: Some(local_optima),
        reference_budget: 20_000,
        reference_sched: StepSchedule::inv_sqrt(0.5)?,
    })
}

/// Robust-regression data draw order: measurements `y` (m normals), matrix
/// `B` row-major (m*n uniforms on [0,1]), one topology sub-seed when the
/// network is sparse, then per-agent initial points (n uniforms in the
/// bounding box, projected onto the ball).
#[allow(clippy::too_many_arguments)]
fn robust_regression_scenario(
    name: &str,
    m: usize,
    n: usize,
    network: NetworkKind,
    density: f64,
    seed: u64,
    engine: EngineKind,
    steps: StepSchedule,
    iters: usize,
    log_stride: LogStride,
) -> Result<AssembledScenario> {
    let mut rng = SplitMix64::new(seed);
    let y: Vec<f64> = (0..m).map(|_| rng.normal()).collect();
    let b_rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.uniform(0.0, 1.0)).collect())
        .collect();
    let topology: Topology = match network {
        NetworkKind::Complete => complete_graph(m)?,
        NetworkKind::Line => path_graph(m)?,
        NetworkKind::Sparse => {
            let sub_seed = rng.next_u64();
            random_sparse(m, density, sub_seed)?
        }
    };
    let shared = ConstraintSet::Ball(BallSet::new(Vector::zeros(n), 5.0)?);
    let agents: Vec<AgentSpec> = (0..m)
        .map(|i| {
            Ok(AgentSpec {
                objective: Objective::AbsResidual(AbsResidualFn::new(
                    Vector::new(b_rows[i].clone())?,
                    y[i],
                )?),
                set: shared.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let init: Vec<Vector> = (0..m)
        .map(|_| {
            let raw: Vec<f64> = (0..n).map(|_| rng.uniform(-5.0, 5.0)).collect();
            shared.project(&Vector::new(raw)?)
        })
        .collect::<Result<_>>()?;
    Ok(AssembledScenario {
        name: name.to_string(),
        engine,
        agents,
        schedule: static_schedule(metropolis_weights(&topology)?)?,
        steps,
        iters,
        log_stride,
        seed,
        init,
        feasible: shared.clone(),
        interior_point: Vector::zeros(n),
        interior_radius: 5.0,
        fixed_points: None,
        reference_budget: 200_000,
        reference_sched: StepSchedule::inv_sqrt(0.3)?,
    })
}

/// Regularized-regression data draw order: `y` (m normals), `B` (m*n
/// uniforms), lower slacks (m*n uniforms on [0, 0.5]), upper slacks (m*n),
/// one owner index per lower face then per upper face (2n draws; the owner's
/// slack is zeroed so the intersection is exactly the unit box), four
/// topology sub-seeds for the cyclic schedule, then per-agent initial points
/// (n uniforms inside the agent's own box).
#[allow(clippy::too_many_arguments)]
fn l2_l1_scenario(
    name: &str,
    m: usize,
    n: usize,
    lambda: f64,
    seed: u64,
    engine: EngineKind,
    steps: StepSchedule,
    iters: usize,
    log_stride: LogStride,
) -> Result<AssembledScenario> {
    if m <= n {
        return Err(CoreError::Parameter(format!(
            "regression scenario needs m > n, got m={m} n={n}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let y: Vec<f64> = (0..m).map(|_| rng.normal()).collect();
    let b_rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.uniform(0.0, 1.0)).collect())
        .collect();
    let mut lower_slack: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.uniform(0.0, 0.5)).collect())
        .collect();
    let mut upper_slack: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.uniform(0.0, 0.5)).collect())
        .collect();
    // one agent per face keeps the tight bound, so the intersection over all
    // agents is exactly [-1, 1]^n
    for j in 0..n {
        let owner = rng.next_index(m);
        lower_slack[owner][j] = 0.0;
    }
    for j in 0..n {
        let owner = rng.next_index(m);
        upper_slack[owner][j] = 0.0;
    }
    let boxes: Vec<BoxSet> = (0..m)
        .map(|i| {
            let lo: Vec<f64> = (0..n).map(|j| -1.0 - lower_slack[i][j]).collect();
            let hi: Vec<f64> = (0..n).map(|j| 1.0 + upper_slack[i][j]).collect();
            BoxSet::new(Vector::new(lo)?, Vector::new(hi)?)
        })
        .collect::<Result<_>>()?;
    let matrices: Vec<MixingMatrix> = CYCLIC_SPARSITIES
        .iter()
        .map(|&d| {
            let sub_seed = rng.next_u64();
            metropolis_weights(&random_sparse(m, d, sub_seed)?)
        })
        .collect::<Result<_>>()?;
    let init: Vec<Vector> = boxes
        .iter()
        .map(|b| {
            let raw: Vec<f64> = (0..n)
                .map(|j| rng.uniform(b.lower()[j], b.upper()[j]))
                .collect();
            Vector::new(raw)
        })
        .collect::<Result<_>>()?;
    let per_agent_l1 = L1RegFn::new(lambda / m as f64)?;
    let agents: Vec<AgentSpec> = (0..m)
        .map(|i| {
            let residual = Objective::SquaredResidual(SquaredResidualFn::new(
                Vector::new(b_rows[i].clone())?,
                y[i],
            )?);
            Ok(AgentSpec {
                objective: Objective::sum(vec![
                    residual,
                    Objective::L1Reg(per_agent_l1.clone()),
                ])?,
                set: ConstraintSet::Box(boxes[i].clone()),
            })
        })
        .collect::<Result<_>>()?;
    let feasible_box = intersect_boxes(&boxes)?;
    let (interior_point, interior_radius) = chebyshev_interior(&feasible_box)?;
    Ok(AssembledScenario {
        name: name.to_string(),
        engine,
        agents,
        schedule: MixingSchedule::new(matrices)?,
        steps,
        iters,
        log_stride,
        seed,
        init,
        feasible: ConstraintSet::Box(feasible_box),
        interior_point,
        interior_radius,
        fixed_points: None,
        reference_budget: 60_000,
        reference_sched: StepSchedule::inv_sqrt(0.1)?,
    })
}

/// Assemble a packaged scenario's data without solving for the reference.
pub fn assemble(name: &str, params: &BuildParams) -> Result<AssembledScenario> {
    let spec = info(name)
        .ok_or_else(|| CoreError::Parameter(format!("unknown scenario '{name}'")))?;
    let engine = params.engine.unwrap_or(spec.default_engine);
    let seed = params.seed.unwrap_or(spec.default_seed);
    let iters = params.iters.unwrap_or(spec.default_iters);
    let log_stride = params.log_stride.unwrap_or(LogStride::Geometric);
    if params.network.is_some() && !name.starts_with("robust") {
        return Err(CoreError::Parameter(format!(
            "network overrides only apply to the robust scenarios, not '{name}'"
        )));
    }

    match name {
        "prop1" | "two_agent" => two_agent_scenario(
            name,
            engine,
            params.step.unwrap_or(StepSchedule::inv_sqrt(1.0)?),
            iters,
            log_stride,
            seed,
        ),
        "two_agent_harmonic" => two_agent_scenario(
            name,
            engine,
            params.step.unwrap_or(StepSchedule::harmonic(1.0)?),
            iters,
            log_stride,
            seed,
        ),
        "robust_complete" | "robust_line" | "robust_sparse03" | "robust_sparse08"
        | "robust_desk" => {
            let (default_network, default_density) = match name {
                "robust_line" => (NetworkKind::Line, 0.3),
                "robust_sparse03" => (NetworkKind::Sparse, 0.3),
                "robust_sparse08" => (NetworkKind::Sparse, 0.8),
                _ => (NetworkKind::Complete, 0.3),
            };
            let network = params.network.unwrap_or(default_network);
            let density = params.network_d.unwrap_or(default_density);
            let (m, n) = if name == "robust_desk" { (10, 4) } else { (30, 4) };
            robust_regression_scenario(
                name,
                m,
                n,
                network,
                density,
                seed,
                engine,
                params.step.unwrap_or(StepSchedule::inv_sqrt(1.0)?),
                iters,
                log_stride,
            )
        }
        "l2_l1_desk" => l2_l1_scenario(
            name,
            30,
            5,
            DEFAULT_L1_WEIGHT,
            seed,
            engine,
            params.step.unwrap_or(StepSchedule::harmonic(0.2)?),
            iters,
            log_stride,
        ),
        "l2_l1" => l2_l1_scenario(
            name,
            300,
            10,
            DEFAULT_L1_WEIGHT,
            seed,
            engine,
            params.step.unwrap_or(StepSchedule::harmonic(0.2)?),
            iters,
            log_stride,
        ),
        other => Err(CoreError::Parameter(format!("unknown scenario '{other}'"))),
    }
}

/// Build a packaged scenario with optional overrides, reference included.
pub fn build(name: &str, params: &BuildParams) -> Result<BuiltScenario> {
    assemble(name, params)?.solve()
}
