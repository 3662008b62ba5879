//! Deterministic multi-agent optimization engines.
//!
//! A network of agents, each holding a private convex objective and a private
//! compact convex constraint set, cooperatively minimizes the sum of the
//! objectives over the intersection of the sets. Agents exchange information
//! through a (possibly time-varying) doubly stochastic mixing schedule.
//!
//! The crate provides the subgradient-averaging engine, a dual-averaging
//! scheme and a proximal no-averaging baseline for comparison, together with
//! the constraint-set, objective-oracle, network and metric layers they are
//! built from. Everything is deterministic given the configuration: repeated
//! runs produce bit-identical traces.

pub mod engine;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod network;
pub mod objective;
pub mod rng;
pub mod schedule;
pub mod sets;

pub use engine::{
    algo1_argmin_form, centralized_solve, centralized_solve_detailed, dual_prox_argmin,
    prox_step, run, running_average_update, AgentSpec, AgentState, Engine, EngineKind,
    LogStride, OptimumReference, RunConfig, StepOutcome,
};
pub use error::{CoreError, Result};
pub use linalg::{dot, matvec, norm1, norm2, solve_linear, Matrix, Vector};
pub use metrics::{
    average_point, epsilon_sum, feasible_surrogate, max_pairwise_distance, objective_gap,
    rate_envelope, theoretical_constants, union_diameter, GapValue, MetricRow, RunTrace,
    TheoreticalConstants,
};
pub use network::{
    complete_graph, metropolis_weights, path_graph, random_sparse, validate_mixing,
    MixingMatrix, MixingSchedule, Topology, ValidationReport,
};
pub use objective::{AbsResidualFn, L1RegFn, Objective, QuadraticFn, SquaredResidualFn};
pub use rng::SplitMix64;
pub use schedule::{StepKind, StepSchedule};
pub use sets::{
    box_vi_holds, chebyshev_interior, intersect_boxes, BallSet, BoxSet, ConstraintSet,
};
