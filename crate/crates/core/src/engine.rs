//! The three iterative engines and the centralized reference solver.
//!
//! * `Algo1` — subgradient averaging: mix iterates, evaluate local
//!   subgradients at the mixed points, mix the subgradients, then take a
//!   projected step onto the local set. Both communication rounds of one
//!   iteration use the same mixing matrix.
//! * `DualAvg` — dual averaging adapted to per-agent sets: mix the dual
//!   accumulators, add the local subgradient at the current iterate, then
//!   minimize the accumulated linear model plus `1/(2 c(k)) ||xi||^2` over
//!   the local set, which is `P_X[-c(k) z]` in closed form.
//! * `ProxNoAvg` — no subgradient exchange: mix iterates, then take a local
//!   proximal step `argmin f_i(xi) + 1/(2 c(k)) ||xi - z_i||^2` over the
//!   local set, solved by an inner projected-gradient loop.
//!
//! Mixing reductions run in fixed index order so traces are reproducible
//! bit for bit.

use crate::error::{CoreError, Result};
use crate::linalg::{norm2, norm2_slice, Vector};
use crate::metrics::{
    self, average_point, feasible_surrogate, max_pairwise_distance, MetricRow, RunTrace,
};
use crate::network::MixingSchedule;
use crate::objective::Objective;
use crate::rng::SplitMix64;
use crate::schedule::StepSchedule;
use crate::sets::ConstraintSet;

/// Tolerance for the inner proximal solve.
pub const PROX_INNER_TOL: f64 = 1e-10;
/// Iteration cap for the inner proximal solve.
pub const PROX_INNER_CAP: usize = 500;

/// One agent's private problem data.
#[derive(Debug, Clone)]
pub struct AgentSpec {
    pub objective: Objective,
    pub set: ConstraintSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Algo1,
    DualAvg,
    ProxNoAvg,
}

impl EngineKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "algo1" => Ok(EngineKind::Algo1),
            "dual_avg" => Ok(EngineKind::DualAvg),
            "prox" => Ok(EngineKind::ProxNoAvg),
            other => Err(CoreError::Parameter(format!("unknown engine '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EngineKind::Algo1 => "algo1",
            EngineKind::DualAvg => "dual_avg",
            EngineKind::ProxNoAvg => "prox",
        }
    }
}

/// Per-agent iterates. `dual_z` is used only by the dual-averaging engine.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub x: Vector,
    pub z: Vector,
    pub g: Vector,
    pub d: Vector,
    pub xhat: Vector,
    pub dual_z: Vector,
}

/// Reference optimum used by the metric columns.
#[derive(Debug, Clone)]
pub struct OptimumReference {
    pub x_star: Vector,
    pub f_star: f64,
    pub method: String,
}

/// Which iterations get a metric row. Row `k = 0` is always logged, as is
/// the final iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogStride {
    /// Powers of two and powers of ten.
    Geometric,
    /// Every `n`-th iteration.
    EveryN(usize),
}

impl LogStride {
    pub fn points(&self, iters: usize) -> Vec<usize> {
        let mut ks = std::collections::BTreeSet::new();
        ks.insert(0);
        ks.insert(iters);
        match self {
            LogStride::Geometric => {
                let mut v = 1usize;
                while v <= iters {
                    ks.insert(v);
                    v = match v.checked_mul(2) {
                        Some(next) => next,
                        None => break,
                    };
                }
                let mut v = 10usize;
                while v <= iters {
                    ks.insert(v);
                    v = match v.checked_mul(10) {
                        Some(next) => next,
                        None => break,
                    };
                }
            }
            LogStride::EveryN(n) => {
                let n = (*n).max(1);
                let mut v = 0usize;
                while v <= iters {
                    ks.insert(v);
                    v += n;
                }
            }
        }
        ks.into_iter().collect()
    }
}

/// Full description of one run. Engines validate everything up front and the
/// iteration itself is then infallible.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub engine: EngineKind,
    pub agents: Vec<AgentSpec>,
    pub schedule: MixingSchedule,
    pub steps: StepSchedule,
    pub iters: usize,
    pub log_stride: LogStride,
    pub seed: u64,
    pub init: Vec<Vector>,
    /// Materialized intersection (box scenarios) or the shared set.
    pub feasible: ConstraintSet,
    /// Point and radius with `ball(interior_point, interior_radius)` inside
    /// the intersection; drives the feasible-surrogate diagnostic.
    pub interior_point: Vector,
    pub interior_radius: f64,
    pub reference: OptimumReference,
    pub scenario_name: String,
}

/// Per-step diagnostics handed back by [`Engine::step`].
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// `||x_i(k+1) - z_i(k)||_2` per agent, the projection displacement.
    pub error_norms: Vec<f64>,
    /// False when a proximal inner solve hit its cap this step.
    pub inner_converged: bool,
}

/// Closed form of the averaged-subgradient local update:
/// `argmin_{xi in X} d' xi + 1/(2c) ||z - xi||^2 = P_X[z - c d]`.
pub fn algo1_argmin_form(
    d: &Vector,
    z: &Vector,
    c: f64,
    set: &ConstraintSet,
) -> Result<Vector> {
    set.project(&z.sub(&d.scale(c))?)
}

/// Closed form of the dual-averaging local update:
/// `argmin_{xi in X} z' xi + 1/(2c) ||xi||^2 = P_X[-c z]`.
pub fn dual_prox_argmin(z_acc: &Vector, c: f64, set: &ConstraintSet) -> Result<Vector> {
    set.project(&z_acc.scale(-c))
}

/// Weighted running average: `xhat(k+1) = (c(k+1) x(k+1) + S(k) xhat(k)) / S(k+1)`
/// with `S(k) = sum_{r=1..k} c(r)`. At `k = 0` this is `x_new` itself.
pub fn running_average_update(
    xhat: &Vector,
    x_new: &Vector,
    sched: &StepSchedule,
    k: usize,
) -> Result<Vector> {
    if xhat.len() != x_new.len() {
        return Err(CoreError::Dimension {
            context: "running average",
            left: xhat.len(),
            right: x_new.len(),
        });
    }
    if k == 0 {
        return Ok(x_new.clone());
    }
    let mut s_prev = 0.0;
    for r in 1..=k {
        s_prev += sched.step_size(r);
    }
    let c_next = sched.step_size(k + 1);
    let s_next = s_prev + c_next;
    Vector::new(
        xhat.as_slice()
            .iter()
            .zip(x_new.as_slice())
            .map(|(old, new)| (c_next * new + s_prev * old) / s_next)
            .collect(),
    )
}

/// Stateful stepper shared by the three engines.
pub struct Engine {
    kind: EngineKind,
    agents: Vec<AgentSpec>,
    schedule: MixingSchedule,
    steps: StepSchedule,
    states: Vec<AgentState>,
    ravg_weight_sum: f64,
    k: usize,
    inner_nonconverged: usize,
}

impl Engine {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let m = config.agents.len();
        if m < 2 {
            return Err(CoreError::Parameter(format!(
                "need at least two agents, got {m}"
            )));
        }
        if config.schedule.agent_count() != m {
            return Err(CoreError::Dimension {
                context: "schedule agent count",
                left: config.schedule.agent_count(),
                right: m,
            });
        }
        if config.init.len() != m {
            return Err(CoreError::Dimension {
                context: "initial points",
                left: config.init.len(),
                right: m,
            });
        }
        let n = config.agents[0].set.dim();
        for (i, spec) in config.agents.iter().enumerate() {
            if spec.set.dim() != n {
                return Err(CoreError::Dimension {
                    context: "agent set dims",
                    left: n,
                    right: spec.set.dim(),
                });
            }
            if let Some(d) = spec.objective.dim() {
                if d != n {
                    return Err(CoreError::Dimension {
                        context: "agent objective dims",
                        left: n,
                        right: d,
                    });
                }
            }
            if !spec.set.contains(&config.init[i], 1e-9)? {
                return Err(CoreError::Validation(format!(
                    "initial point of agent {i} lies outside its constraint set"
                )));
            }
        }
        let states = config
            .agents
            .iter()
            .zip(&config.init)
            .map(|(spec, x0)| {
                let dual_z = match config.engine {
                    EngineKind::DualAvg => spec.objective.subgrad(x0)?,
                    _ => Vector::zeros(n),
                };
                Ok(AgentState {
                    x: x0.clone(),
                    z: x0.clone(),
                    g: Vector::zeros(n),
                    d: Vector::zeros(n),
                    xhat: x0.clone(),
                    dual_z,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind: config.engine,
            agents: config.agents.clone(),
            schedule: config.schedule.clone(),
            steps: config.steps,
            states,
            ravg_weight_sum: 0.0,
            k: 0,
            inner_nonconverged: 0,
        })
    }

    pub fn states(&self) -> &[AgentState] {
        &self.states
    }

    pub fn iteration(&self) -> usize {
        self.k
    }

    pub fn inner_nonconverged(&self) -> usize {
        self.inner_nonconverged
    }

    pub fn iterates(&self) -> Vec<Vector> {
        self.states.iter().map(|s| s.x.clone()).collect()
    }

    pub fn running_averages(&self) -> Vec<Vector> {
        self.states.iter().map(|s| s.xhat.clone()).collect()
    }

    /// Max pairwise disagreement between iterates or running averages.
    pub fn consensus_residual(&self, use_running_avg: bool) -> f64 {
        let pts = if use_running_avg {
            self.running_averages()
        } else {
            self.iterates()
        };
        max_pairwise_distance(&pts)
    }

    fn mix(&self, k: usize, vectors: &[Vec<f64>], i: usize, out: &mut [f64]) {
        let a = self.schedule.matrix_at(k);
        out.fill(0.0);
        for (j, v) in vectors.iter().enumerate() {
            let w = a.get(i, j);
            if w != 0.0 {
                for (o, value) in out.iter_mut().zip(v) {
                    *o += w * value;
                }
            }
        }
    }

    /// Advance one iteration. All updates happen synchronously from the
    /// previous state; agents are processed in index order.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let m = self.states.len();
        let n = self.states[0].x.len();
        let k = self.k;
        let c = self.steps.step_size(k);
        let xs: Vec<Vec<f64>> = self
            .states
            .iter()
            .map(|s| s.x.as_slice().to_vec())
            .collect();

        let mut new_x: Vec<Vector> = Vec::with_capacity(m);
        let mut error_norms = Vec::with_capacity(m);
        let mut inner_converged = true;
        let mut mixed = vec![0.0; n];

        match self.kind {
            EngineKind::Algo1 => {
                let mut zs: Vec<Vec<f64>> = Vec::with_capacity(m);
                for i in 0..m {
                    self.mix(k, &xs, i, &mut mixed);
                    zs.push(mixed.clone());
                }
                let mut gs: Vec<Vec<f64>> = Vec::with_capacity(m);
                for i in 0..m {
                    let z = Vector::new(zs[i].clone())?;
                    let g = self.agents[i].objective.subgrad(&z)?;
                    self.states[i].z = z;
                    gs.push(g.as_slice().to_vec());
                    self.states[i].g = g;
                }
                for i in 0..m {
                    self.mix(k, &gs, i, &mut mixed);
                    let step_point = Vector::new(
                        zs[i].iter()
                            .zip(&mixed)
                            .map(|(z, d)| z - c * d)
                            .collect(),
                    )?;
                    self.states[i].d = Vector::new(mixed.clone())?;
                    let x_next = self.agents[i].set.project(&step_point)?;
                    error_norms.push(displacement(&x_next, &zs[i]));
                    new_x.push(x_next);
                }
            }
            EngineKind::DualAvg => {
                let duals: Vec<Vec<f64>> = self
                    .states
                    .iter()
                    .map(|s| s.dual_z.as_slice().to_vec())
                    .collect();
                for i in 0..m {
                    self.mix(k, &duals, i, &mut mixed);
                    let g = self.agents[i].objective.subgrad(&self.states[i].x)?;
                    let acc = Vector::new(
                        mixed.iter().zip(g.as_slice()).map(|(z, g)| z + g).collect(),
                    )?;
                    let x_next = dual_prox_argmin(&acc, c, &self.agents[i].set)?;
                    self.states[i].g = g;
                    self.states[i].dual_z = acc;
                    // mixed previous iterates, for the displacement metric
                    self.mix(k, &xs, i, &mut mixed);
                    error_norms.push(displacement(&x_next, &mixed));
                    self.states[i].z = Vector::new(mixed.clone())?;
                    new_x.push(x_next);
                }
            }
            EngineKind::ProxNoAvg => {
                for i in 0..m {
                    self.mix(k, &xs, i, &mut mixed);
                    let z = Vector::new(mixed.clone())?;
                    let (x_next, converged) =
                        prox_step(&self.agents[i].objective, &self.agents[i].set, &z, c)?;
                    if !converged {
                        self.inner_nonconverged += 1;
                        inner_converged = false;
                    }
                    error_norms.push(displacement(&x_next, &mixed));
                    self.states[i].z = z;
                    self.states[i].g = self.agents[i].objective.subgrad(&x_next)?;
                    new_x.push(x_next);
                }
            }
        }

        // running-average recursion, shared by all engines
        let c_next = self.steps.step_size(k + 1);
        let s_prev = self.ravg_weight_sum;
        let s_next = s_prev + c_next;
        for i in 0..m {
            if k == 0 {
                self.states[i].xhat = new_x[i].clone();
            } else {
                self.states[i].xhat = Vector::new(
                    self.states[i]
                        .xhat
                        .as_slice()
                        .iter()
                        .zip(new_x[i].as_slice())
                        .map(|(old, new)| (c_next * new + s_prev * old) / s_next)
                        .collect(),
                )?;
            }
            self.states[i].x = new_x[i].clone();
        }
        self.ravg_weight_sum = s_next;
        self.k += 1;

        Ok(StepOutcome {
            error_norms,
            inner_converged,
        })
    }
}

fn displacement(x_next: &Vector, z: &[f64]) -> f64 {
    norm2_slice(
        &x_next
            .as_slice()
            .iter()
            .zip(z)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    )
}

/// Local proximal step `argmin_{xi in X} f(xi) + 1/(2c) ||xi - z||^2` solved
/// by projected gradient. Returns the point and whether the inner loop met
/// the tolerance before the cap.
pub fn prox_step(
    objective: &Objective,
    set: &ConstraintSet,
    z: &Vector,
    c: f64,
) -> Result<(Vector, bool)> {
    let tau = match objective.quadratic_curvature() {
        Some(curvature) => 1.0 / (curvature + 1.0 / c),
        None => 0.5 * c,
    };
    let mut xi = set.project(z)?;
    for _ in 0..PROX_INNER_CAP {
        let mut grad = vec![0.0; xi.len()];
        objective.add_subgrad(xi.as_slice(), &mut grad);
        for (gv, (x_v, z_v)) in grad.iter_mut().zip(xi.as_slice().iter().zip(z.as_slice())) {
            *gv += (x_v - z_v) / c;
        }
        let candidate = Vector::new(
            xi.as_slice()
                .iter()
                .zip(&grad)
                .map(|(x, g)| x - tau * g)
                .collect(),
        )?;
        let next = set.project(&candidate)?;
        let moved = norm2(&next.sub(&xi)?);
        xi = next;
        if moved <= PROX_INNER_TOL {
            return Ok((xi, true));
        }
    }
    Ok((xi, false))
}

/// Iterate a full run, logging metric rows at the configured stride.
/// Deterministic: same config, same trace.
pub fn run(config: &RunConfig) -> Result<RunTrace> {
    let mut engine = Engine::new(config)?;
    let sets: Vec<ConstraintSet> = config.agents.iter().map(|a| a.set.clone()).collect();
    let oracles: Vec<Objective> = config.agents.iter().map(|a| a.objective.clone()).collect();
    let log_points = config.log_stride.points(config.iters);
    let mut log_iter = log_points.iter().peekable();

    let mut gap_absolute_fallback = false;
    let mut rows = Vec::new();

    let mut log_row = |engine: &Engine, k: usize, max_err: f64| -> Result<MetricRow> {
        let iterates = engine.iterates();
        let ravgs = engine.running_averages();
        let v = average_point(&iterates)?;
        let epsilon_k = metrics::epsilon_sum(&v, &sets)?;
        feasible_surrogate(&v, &sets, &config.interior_point, config.interior_radius)?;

        let mut dist_sq = 0.0;
        for x in &iterates {
            let d = norm2(&x.sub(&config.reference.x_star)?);
            dist_sq += d * d;
        }
        let gap_iter = metrics::objective_gap(&iterates, &oracles, config.reference.f_star)?;
        let gap_ravg = metrics::objective_gap(&ravgs, &oracles, config.reference.f_star)?;
        if gap_iter.relative.is_none() {
            gap_absolute_fallback = true;
        }
        let row = MetricRow {
            k,
            consensus_residual: max_pairwise_distance(&ravgs),
            dist_to_opt: dist_sq.sqrt(),
            rel_obj_gap_iterates: gap_iter.relative.unwrap_or(gap_iter.absolute),
            rel_obj_gap_running_avg: gap_ravg.relative.unwrap_or(gap_ravg.absolute),
            epsilon_k,
            max_error_norm: max_err,
        };
        if !row.all_finite() {
            return Err(CoreError::Diagnostics(format!(
                "non-finite metric row at k={k}"
            )));
        }
        Ok(row)
    };

    if log_iter.next_if(|&&k| k == 0).is_some() {
        rows.push(log_row(&engine, 0, 0.0)?);
    }
    for k in 0..config.iters {
        let outcome = engine.step()?;
        if log_iter.next_if(|&&point| point == k + 1).is_some() {
            let max_err = outcome
                .error_norms
                .iter()
                .fold(0.0f64, |acc, v| acc.max(*v));
            rows.push(log_row(&engine, k + 1, max_err)?);
        }
    }

    Ok(RunTrace {
        scenario: config.scenario_name.clone(),
        seed: config.seed,
        engine: config.engine.name().to_string(),
        schedule_desc: format!(
            "{} x{} (T={})",
            config.steps.describe(),
            config.schedule.period(),
            config.schedule.certified_window()
        ),
        iters: config.iters,
        gap_absolute_fallback,
        inner_nonconverged: engine.inner_nonconverged(),
        rows,
    })
}

/// Seed for the centralized solver's deterministic multistart points.
const MULTISTART_SEED: u64 = 0x5EED_C0FF_EE00_0001;
/// Random restarts taken in addition to the bounding-box midpoint.
const MULTISTART_COUNT: usize = 10;

/// Best-iterate projected subgradient over `budget` iterations per start,
/// from the bounding-box midpoint plus [`MULTISTART_COUNT`] seeded random
/// feasible points. Returns the incumbent across starts.
pub fn centralized_solve(
    f_total: &Objective,
    feasible: &ConstraintSet,
    budget: usize,
    sched: &StepSchedule,
) -> Result<OptimumReference> {
    Ok(centralized_solve_detailed(f_total, feasible, budget, sched)?.0)
}

/// As [`centralized_solve`], also returning each start's best value for
/// cross-checking the incumbent.
pub fn centralized_solve_detailed(
    f_total: &Objective,
    feasible: &ConstraintSet,
    budget: usize,
    sched: &StepSchedule,
) -> Result<(OptimumReference, Vec<f64>)> {
    let bbox = feasible.bounding_box();
    let n = feasible.dim();
    let mut starts = Vec::with_capacity(MULTISTART_COUNT + 1);
    let midpoint: Vec<f64> = (0..n)
        .map(|j| 0.5 * (bbox.lower()[j] + bbox.upper()[j]))
        .collect();
    starts.push(Vector::new(midpoint)?);
    let mut rng = SplitMix64::new(MULTISTART_SEED);
    for _ in 0..MULTISTART_COUNT {
        let raw: Vec<f64> = (0..n)
            .map(|j| rng.uniform(bbox.lower()[j], bbox.upper()[j]))
            .collect();
        starts.push(Vector::new(raw)?);
    }

    let mut best: Option<(f64, Vector)> = None;
    let mut per_start = Vec::with_capacity(starts.len());
    for start in &starts {
        let mut x = feasible.project(start)?;
        let mut local_best = f_total.value(&x)?;
        let mut local_best_x = x.clone();
        for k in 0..budget {
            let c = sched.step_size(k);
            let g = f_total.subgrad(&x)?;
            x = feasible.project(&x.sub(&g.scale(c))?)?;
            let value = f_total.value(&x)?;
            if value < local_best {
                local_best = value;
                local_best_x = x.clone();
            }
        }
        per_start.push(local_best);
        match &best {
            Some((incumbent, _)) if *incumbent <= local_best => {}
            _ => best = Some((local_best, local_best_x)),
        }
    }
    let (f_star, x_star) = best.expect("at least one start");
    debug_assert!(feasible.contains(&x_star, 1e-9)?);
    Ok((
        OptimumReference {
            x_star,
            f_star,
            method: "projected-subgradient-multistart".into(),
        },
        per_start,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::network::{complete_graph, metropolis_weights, MixingSchedule};
    use crate::objective::QuadraticFn;
    use crate::sets::BoxSet;

    fn vecn(v: &[f64]) -> Vector {
        Vector::new(v.to_vec()).unwrap()
    }

    fn unit_box(n: usize) -> ConstraintSet {
        ConstraintSet::Box(
            BoxSet::new(
                Vector::new(vec![-1.0; n]).unwrap(),
                Vector::new(vec![1.0; n]).unwrap(),
            )
            .unwrap(),
        )
    }

    fn quadratic(qdiag: f64, q: &[f64]) -> Objective {
        let n = q.len();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, qdiag);
        }
        Objective::Quadratic(QuadraticFn::new(m, vecn(q), 0.0).unwrap())
    }

    fn two_agent_problem() -> (Vec<AgentSpec>, MixingSchedule) {
        let q = Matrix::new(2, 2, vec![1.2, 0.4, 0.4, 1.8]).unwrap();
        let f1 = Objective::Quadratic(
            QuadraticFn::new(q.clone(), vecn(&[8.0, -4.0]), 20.0).unwrap(),
        );
        let f2 = Objective::Quadratic(
            QuadraticFn::new(q, vecn(&[2.93, -11.46]), 25.0).unwrap(),
        );
        let x1 = ConstraintSet::Box(BoxSet::new(vecn(&[-1.0, -1.0]), vecn(&[1.0, 1.0])).unwrap());
        let x2 = ConstraintSet::Box(BoxSet::new(vecn(&[0.5, 0.5]), vecn(&[2.5, 2.5])).unwrap());
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
        let a = metropolis_weights(&complete_graph(2).unwrap()).unwrap();
        (agents, MixingSchedule::new(vec![a]).unwrap())
    }

    fn config_for(
        engine: EngineKind,
        agents: Vec<AgentSpec>,
        schedule: MixingSchedule,
        steps: StepSchedule,
        init: Vec<Vector>,
        iters: usize,
    ) -> RunConfig {
        let feasible = ConstraintSet::Box(
            BoxSet::new(vecn(&[0.5, 0.5]), vecn(&[1.0, 1.0])).unwrap(),
        );
        RunConfig {
            engine,
            agents,
            schedule,
            steps,
            iters,
            log_stride: LogStride::Geometric,
            seed: 0,
            init,
            feasible,
            interior_point: vecn(&[0.75, 0.75]),
            interior_radius: 0.25,
            reference: OptimumReference {
                x_star: vecn(&[0.5, 1.0]),
                f_star: 41.418,
                method: "fixed".into(),
            },
            scenario_name: "test".into(),
        }
    }

    #[test]
    fn algo1_single_iteration_matches_straight_line_oracle() {
        // independent re-implementation of one iteration with explicit
        // arithmetic, on the two-agent data from the fixed initial points
        let (agents, schedule) = two_agent_problem();
        let init = vec![vecn(&[-1.0, 1.0]), vecn(&[0.5, 2.5])];
        let config = config_for(
            EngineKind::Algo1,
            agents.clone(),
            schedule,
            StepSchedule::inv_sqrt(1.0).unwrap(),
            init.clone(),
            1,
        );
        let mut engine = Engine::new(&config).unwrap();
        engine.step().unwrap();

        // oracle: z_i = (x_1 + x_2)/2 identical for both agents
        let z = [
            0.5 * (init[0][0] + init[1][0]),
            0.5 * (init[0][1] + init[1][1]),
        ];
        let g = |qv: [f64; 2], x: [f64; 2]| {
            [
                2.0 * (1.2 * x[0] + 0.4 * x[1]) + qv[0],
                2.0 * (0.4 * x[0] + 1.8 * x[1]) + qv[1],
            ]
        };
        let g1 = g([8.0, -4.0], z);
        let g2 = g([2.93, -11.46], z);
        let d = [0.5 * (g1[0] + g2[0]), 0.5 * (g1[1] + g2[1])];
        let c = 1.0;
        let step = [z[0] - c * d[0], z[1] - c * d[1]];
        let expect1 = [step[0].clamp(-1.0, 1.0), step[1].clamp(-1.0, 1.0)];
        let expect2 = [step[0].clamp(0.5, 2.5), step[1].clamp(0.5, 2.5)];
        let states = engine.states();
        for j in 0..2 {
            assert!((states[0].x[j] - expect1[j]).abs() < 1e-15);
            assert!((states[1].x[j] - expect2[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn algo1_degenerate_network_is_projected_subgradient() {
        // identical agents on the complete pair behave like one projected
        // subgradient step
        let f = quadratic(1.0, &[2.0, 0.0]);
        let set = unit_box(2);
        let agents = vec![
            AgentSpec {
                objective: f.clone(),
                set: set.clone(),
            },
            AgentSpec {
                objective: f.clone(),
                set: set.clone(),
            },
        ];
        let a = metropolis_weights(&complete_graph(2).unwrap()).unwrap();
        let schedule = MixingSchedule::new(vec![a]).unwrap();
        let x0 = vecn(&[0.5, 0.5]);
        let mut config = config_for(
            EngineKind::Algo1,
            agents,
            schedule,
            StepSchedule::constant(0.1).unwrap(),
            vec![x0.clone(), x0.clone()],
            1,
        );
        config.feasible = set.clone();
        config.interior_point = Vector::zeros(2);
        config.interior_radius = 1.0;
        config.reference = OptimumReference {
            x_star: vecn(&[-1.0, 0.0]),
            f_star: -1.0,
            method: "hand".into(),
        };
        let mut engine = Engine::new(&config).unwrap();
        engine.step().unwrap();
        // both agents hold x0, so z = x0, g = 2 x0 + q, x+ = P[x0 - c g]
        let g = [2.0 * 0.5 + 2.0, 2.0 * 0.5];
        let expect = [0.5 - 0.1 * g[0], 0.5 - 0.1 * g[1]];
        for s in engine.states() {
            assert!((s.x[0] - expect[0]).abs() < 1e-15);
            assert!((s.x[1] - expect[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_objectives_reach_consensus_on_common_box() {
        let zero = quadratic(0.0, &[0.0, 0.0]);
        let set = unit_box(2);
        let agents: Vec<AgentSpec> = (0..2)
            .map(|_| AgentSpec {
                objective: zero.clone(),
                set: set.clone(),
            })
            .collect();
        let a = metropolis_weights(&complete_graph(2).unwrap()).unwrap();
        let schedule = MixingSchedule::new(vec![a]).unwrap();
        let init = vec![vecn(&[0.8, -0.2]), vecn(&[-0.4, 0.6])];
        let mut config = config_for(
            EngineKind::Algo1,
            agents,
            schedule,
            StepSchedule::constant(1.0).unwrap(),
            init,
            1,
        );
        config.feasible = set;
        config.interior_point = Vector::zeros(2);
        config.interior_radius = 1.0;
        let mut engine = Engine::new(&config).unwrap();
        engine.step().unwrap();
        assert!(engine.consensus_residual(false) < 1e-15);
        let s = engine.states();
        assert!((s[0].x[0] - 0.2).abs() < 1e-15);
        assert!((s[0].x[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn dual_prox_closed_form_cases() {
        let set = unit_box(2);
        // zero accumulator projects the origin
        assert_eq!(
            dual_prox_argmin(&Vector::zeros(2), 0.7, &set).unwrap(),
            Vector::zeros(2)
        );
        // linear objective one step from zero accumulators: P[-c q]
        let q = vecn(&[0.4, -0.3]);
        let got = dual_prox_argmin(&q, 0.5, &set).unwrap();
        assert!((got[0] - (-0.2)).abs() < 1e-15);
        assert!((got[1] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn dual_prox_matches_grid_oracle() {
        // argmin z'xi + 1/(2c)||xi||^2 over the box, by 1e-3 grid search
        let set = unit_box(2);
        let z = vecn(&[1.3, -0.7]);
        let c = 0.8;
        let closed = dual_prox_argmin(&z, c, &set).unwrap();
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        let steps = 2000;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = [-1.0 + 2.0 * i as f64 / steps as f64, -1.0 + 2.0 * j as f64 / steps as f64];
                let v = z[0] * x[0] + z[1] * x[1] + (x[0] * x[0] + x[1] * x[1]) / (2.0 * c);
                if v < best.0 {
                    best = (v, x);
                }
            }
        }
        assert!((closed[0] - best.1[0]).abs() < 1.5e-3);
        assert!((closed[1] - best.1[1]).abs() < 1.5e-3);
    }

    #[test]
    fn algo1_argmin_form_cases() {
        let set = unit_box(2);
        let z = vecn(&[0.3, 0.2]);
        // d = 0 projects z
        assert_eq!(
            algo1_argmin_form(&Vector::zeros(2), &z, 0.5, &set).unwrap(),
            set.project(&z).unwrap()
        );
        // interior step stays put
        let d = vecn(&[0.1, -0.2]);
        let got = algo1_argmin_form(&d, &z, 0.5, &set).unwrap();
        assert!((got[0] - 0.25).abs() < 1e-15);
        assert!((got[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn algo1_argmin_matches_grid_oracle() {
        let set = unit_box(2);
        let z = vecn(&[0.9, -0.4]);
        let d = vecn(&[2.0, -1.5]);
        let c = 0.6;
        let closed = algo1_argmin_form(&d, &z, c, &set).unwrap();
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        let steps = 2000;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = [-1.0 + 2.0 * i as f64 / steps as f64, -1.0 + 2.0 * j as f64 / steps as f64];
                let diff = [z[0] - x[0], z[1] - x[1]];
                let v = d[0] * x[0] + d[1] * x[1]
                    + (diff[0] * diff[0] + diff[1] * diff[1]) / (2.0 * c);
                if v < best.0 {
                    best = (v, x);
                }
            }
        }
        assert!((closed[0] - best.1[0]).abs() < 1.5e-3);
        assert!((closed[1] - best.1[1]).abs() < 1.5e-3);
    }

    #[test]
    fn prox_step_cases() {
        let set = unit_box(2);
        // zero objective: pure projection of z
        let zero = quadratic(0.0, &[0.0, 0.0]);
        let z = vecn(&[1.7, 0.3]);
        let (got, converged) = prox_step(&zero, &set, &z, 1.0).unwrap();
        assert!(converged);
        assert!((got[0] - 1.0).abs() < 1e-9);
        assert!((got[1] - 0.3).abs() < 1e-9);

        // linear objective: P[z - c q]
        let linear = quadratic(0.0, &[0.4, -0.2]);
        let z = vecn(&[0.1, 0.1]);
        let (got, converged) = prox_step(&linear, &set, &z, 0.5).unwrap();
        assert!(converged);
        assert!((got[0] - (0.1 - 0.5 * 0.4)).abs() < 1e-8);
        assert!((got[1] - (0.1 + 0.5 * 0.2)).abs() < 1e-8);
    }

    #[test]
    fn prox_step_matches_grid_oracle_on_quadratic() {
        let q = Matrix::new(2, 2, vec![1.2, 0.4, 0.4, 1.8]).unwrap();
        let f = Objective::Quadratic(
            QuadraticFn::new(q, vecn(&[8.0, -4.0]), 20.0).unwrap(),
        );
        let set = unit_box(2);
        let z = Vector::zeros(2);
        let (got, _) = prox_step(&f, &set, &z, 1.0).unwrap();
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        let steps = 2000;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = [-1.0 + 2.0 * i as f64 / steps as f64, -1.0 + 2.0 * j as f64 / steps as f64];
                let quad = x[0] * (1.2 * x[0] + 0.4 * x[1]) + x[1] * (0.4 * x[0] + 1.8 * x[1]);
                let v = quad + 8.0 * x[0] - 4.0 * x[1] + 20.0
                    + (x[0] * x[0] + x[1] * x[1]) / 2.0;
                if v < best.0 {
                    best = (v, x);
                }
            }
        }
        assert!((got[0] - best.1[0]).abs() < 1.5e-3, "{got:?} vs {best:?}");
        assert!((got[1] - best.1[1]).abs() < 1.5e-3);
    }

    #[test]
    fn running_average_constant_schedule_is_arithmetic_mean() {
        let sched = StepSchedule::constant(0.5).unwrap();
        let xs = [1.0, 2.0, 3.0, 4.0];
        let mut xhat = Vector::zeros(1);
        for (k, &x) in xs.iter().enumerate() {
            xhat = running_average_update(&xhat, &vecn(&[x]), &sched, k).unwrap();
        }
        assert!((xhat[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn running_average_first_step_returns_new_point() {
        let sched = StepSchedule::inv_sqrt(1.0).unwrap();
        let xhat = running_average_update(&vecn(&[9.0]), &vecn(&[1.5]), &sched, 0).unwrap();
        assert_eq!(xhat[0], 1.5);
    }

    #[test]
    fn running_average_matches_direct_summation() {
        let sched = StepSchedule::inv_sqrt(1.0).unwrap();
        let xs = [1.0, 2.0, 3.0];
        let mut xhat = Vector::zeros(1);
        for (k, &x) in xs.iter().enumerate() {
            xhat = running_average_update(&xhat, &vecn(&[x]), &sched, k).unwrap();
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (r, &x) in xs.iter().enumerate() {
            let c = sched.step_size(r + 1);
            num += c * x;
            den += c;
        }
        assert!((xhat[0] - num / den).abs() < 1e-12);
    }

    #[test]
    fn run_zero_iterations_yields_initial_row_only() {
        let (agents, schedule) = two_agent_problem();
        let config = config_for(
            EngineKind::Algo1,
            agents,
            schedule,
            StepSchedule::inv_sqrt(1.0).unwrap(),
            vec![vecn(&[-1.0, 1.0]), vecn(&[0.5, 2.5])],
            0,
        );
        let trace = run(&config).unwrap();
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.rows[0].k, 0);
    }

    #[test]
    fn run_is_deterministic() {
        let (agents, schedule) = two_agent_problem();
        let make = || {
            run(&config_for(
                EngineKind::Algo1,
                agents.clone(),
                schedule.clone(),
                StepSchedule::inv_sqrt(1.0).unwrap(),
                vec![vecn(&[-1.0, 1.0]), vecn(&[0.5, 2.5])],
                200,
            ))
            .unwrap()
        };
        let t1 = make();
        let t2 = make();
        assert_eq!(t1.rows, t2.rows);
    }

    #[test]
    fn run_keeps_iterates_feasible() {
        let (agents, schedule) = two_agent_problem();
        let sets: Vec<ConstraintSet> = agents.iter().map(|a| a.set.clone()).collect();
        for engine in [EngineKind::Algo1, EngineKind::DualAvg, EngineKind::ProxNoAvg] {
            let config = config_for(
                engine,
                agents.clone(),
                schedule.clone(),
                StepSchedule::inv_sqrt(1.0).unwrap(),
                vec![vecn(&[-1.0, 1.0]), vecn(&[0.5, 2.5])],
                50,
            );
            let mut e = Engine::new(&config).unwrap();
            for _ in 0..50 {
                e.step().unwrap();
                for (s, set) in e.states().iter().zip(&sets) {
                    assert!(set.contains(&s.x, 1e-9).unwrap());
                }
            }
        }
    }

    #[test]
    fn centralized_two_agent_reference() {
        let (agents, _) = two_agent_problem();
        let total = Objective::sum(
            agents.iter().map(|a| a.objective.clone()).collect(),
        )
        .unwrap();
        let feasible = ConstraintSet::Box(
            BoxSet::new(vecn(&[0.5, 0.5]), vecn(&[1.0, 1.0])).unwrap(),
        );
        let reference = centralized_solve(
            &total,
            &feasible,
            20_000,
            &StepSchedule::inv_sqrt(0.5).unwrap(),
        )
        .unwrap();
        assert!((reference.x_star[0] - 0.5).abs() < 1e-4);
        assert!((reference.x_star[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn centralized_quadratic_bowl() {
        let f = quadratic(1.0, &[0.0, 0.0]);
        let feasible = unit_box(2);
        let reference = centralized_solve(
            &f,
            &feasible,
            20_000,
            &StepSchedule::inv_sqrt(0.5).unwrap(),
        )
        .unwrap();
        assert!(norm2(&reference.x_star) < 1e-6);
        assert!(reference.f_star.abs() < 1e-6);
    }
}
