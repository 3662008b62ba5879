//! Convergence and assumption diagnostics: consensus residuals, distance to
//! optimum, objective gaps, the feasible surrogate point, rate envelopes and
//! the mixing-analysis constants.

use crate::error::{CoreError, Result};
use crate::linalg::{norm2_slice, Vector};
use crate::objective::Objective;
use crate::sets::{BallSet, BoxSet, ConstraintSet};

/// One logged row of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub k: usize,
    /// Max pairwise distance between the agents' running averages.
    pub consensus_residual: f64,
    /// `sqrt(sum_i ||x_i - x*||^2)` over the iterates.
    pub dist_to_opt: f64,
    pub rel_obj_gap_iterates: f64,
    pub rel_obj_gap_running_avg: f64,
    /// `sum_i dist(v(k), X_i)` for the average point `v(k)`.
    pub epsilon_k: f64,
    /// `max_i ||x_i(k) - z_i(k-1)||` from the step that produced this row.
    pub max_error_norm: f64,
}

impl MetricRow {
    pub fn all_finite(&self) -> bool {
        [
            self.consensus_residual,
            self.dist_to_opt,
            self.rel_obj_gap_iterates,
            self.rel_obj_gap_running_avg,
            self.epsilon_k,
            self.max_error_norm,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Per-iteration metric rows plus run identification for serialization.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub scenario: String,
    pub seed: u64,
    pub engine: String,
    pub schedule_desc: String,
    pub iters: usize,
    /// True when |f*| was below 1e-9 and the gap columns hold absolute gaps.
    pub gap_absolute_fallback: bool,
    /// Proximal inner loops that hit the iteration cap without converging.
    pub inner_nonconverged: usize,
    pub rows: Vec<MetricRow>,
}

impl RunTrace {
    pub fn row_at(&self, k: usize) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.k == k)
    }
}

/// Arithmetic mean of the agents' points.
pub fn average_point(points: &[Vector]) -> Result<Vector> {
    let first = points
        .first()
        .ok_or_else(|| CoreError::Parameter("average over zero points".into()))?;
    let n = first.len();
    let mut acc = vec![0.0; n];
    for p in points {
        if p.len() != n {
            return Err(CoreError::Dimension {
                context: "average_point",
                left: n,
                right: p.len(),
            });
        }
        for j in 0..n {
            acc[j] += p[j];
        }
    }
    let scale = 1.0 / points.len() as f64;
    Vector::new(acc.iter().map(|v| v * scale).collect())
}

/// Convex combination `rho/(eps+rho) v + eps/(eps+rho) xbar` with
/// `eps = sum_i dist(v, X_i)`; guaranteed to land in every set provided the
/// ball of radius `rho` around `xbar` is contained in the intersection.
/// The output is asserted to be within 1e-9 of every set.
pub fn feasible_surrogate(
    v: &Vector,
    sets: &[ConstraintSet],
    xbar: &Vector,
    rho: f64,
) -> Result<Vector> {
    let eps = epsilon_sum(v, sets)?;
    let denom = eps + rho;
    let a = rho / denom;
    let b = eps / denom;
    let combo = Vector::new(
        v.as_slice()
            .iter()
            .zip(xbar.as_slice())
            .map(|(vv, xb)| a * vv + b * xb)
            .collect(),
    )?;
    for set in sets {
        let d = set.distance(&combo)?;
        if d > 1e-9 {
            return Err(CoreError::Diagnostics(format!(
                "feasible surrogate left a constraint set by {d:e}; interior point or radius is wrong"
            )));
        }
    }
    Ok(combo)
}

/// `sum_i dist(v, X_i)`.
pub fn epsilon_sum(v: &Vector, sets: &[ConstraintSet]) -> Result<f64> {
    let mut eps = 0.0;
    for set in sets {
        eps += set.distance(v)?;
    }
    Ok(eps)
}

/// Max pairwise Euclidean distance.
pub fn max_pairwise_distance(points: &[Vector]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = norm2_slice(
                &points[i]
                    .as_slice()
                    .iter()
                    .zip(points[j].as_slice())
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            );
            best = best.max(d);
        }
    }
    best
}

/// Absolute and relative objective gap `|sum_i f_i(p_i) - f*|`; the relative
/// variant is `None` when `|f*| < 1e-9`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapValue {
    pub absolute: f64,
    pub relative: Option<f64>,
}

pub fn objective_gap(points: &[Vector], oracles: &[Objective], f_star: f64) -> Result<GapValue> {
    if points.len() != oracles.len() {
        return Err(CoreError::Dimension {
            context: "objective_gap agents",
            left: points.len(),
            right: oracles.len(),
        });
    }
    let mut total = 0.0;
    for (p, f) in points.iter().zip(oracles) {
        total += f.value(p)?;
    }
    let absolute = (total - f_star).abs();
    let relative = if f_star.abs() < 1e-9 {
        None
    } else {
        Some(absolute / f_star.abs())
    };
    Ok(GapValue { absolute, relative })
}

/// Max of `gap(k) * sqrt(k) / ln(k)` over the first and the last logged
/// decades after `burn_in`, using the running-average gap column. The first
/// decade is `[burn_in, 10 burn_in)`, the last is `(K/10, K]`.
pub fn rate_envelope(trace: &RunTrace, burn_in: usize) -> Result<(f64, f64)> {
    if burn_in < 2 {
        return Err(CoreError::Parameter("burn_in must be at least 2".into()));
    }
    let k_final = trace.iters;
    if k_final < 100 * burn_in {
        return Err(CoreError::Parameter(format!(
            "trace must span at least two decades past burn-in: need K >= {}, got {k_final}",
            100 * burn_in
        )));
    }
    let scaled = |row: &MetricRow| {
        let k = row.k as f64;
        row.rel_obj_gap_running_avg * k.sqrt() / k.ln()
    };
    let mut first: Option<f64> = None;
    let mut last: Option<f64> = None;
    for row in &trace.rows {
        if row.k >= burn_in && row.k < 10 * burn_in {
            let v = scaled(row);
            first = Some(first.map_or(v, |f: f64| f.max(v)));
        }
        if row.k > k_final / 10 && row.k <= k_final {
            let v = scaled(row);
            last = Some(last.map_or(v, |f: f64| f.max(v)));
        }
    }
    match (first, last) {
        (Some(f), Some(l)) => Ok((f, l)),
        _ => Err(CoreError::Parameter(
            "trace has no logged rows in one of the comparison decades".into(),
        )),
    }
}

/// Constants from the mixing analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalConstants {
    pub lambda: f64,
    /// Geometric mixing factor in (0, 1); rounds to 1.0 in doubles once
    /// `(m-1) T |ln eta|` exceeds the exponent range.
    pub q: f64,
    pub mu: f64,
    pub diameter: f64,
}

/// `lambda = 2 (1 + eta^{-(m-1)T}) / (1 - eta^{(m-1)T})`,
/// `q = (1 - eta^{(m-1)T})^{1/((m-1)T)}`, `mu = (2/rho) m D + 1`, with `D`
/// the exact diameter of the union of the sets.
pub fn theoretical_constants(
    eta: f64,
    m: usize,
    t_window: usize,
    rho: f64,
    sets: &[ConstraintSet],
) -> Result<TheoreticalConstants> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(CoreError::Parameter(format!("eta must be in (0,1), got {eta}")));
    }
    if m < 2 || t_window < 1 {
        return Err(CoreError::Parameter(format!(
            "need m >= 2 and T >= 1, got m={m} T={t_window}"
        )));
    }
    if rho.is_nan() || rho <= 0.0 {
        return Err(CoreError::Parameter(format!("rho must be positive, got {rho}")));
    }
    let exponent = ((m - 1) * t_window) as f64;
    let w = exponent * eta.ln(); // ln(eta^{(m-1)T}), negative
    let p = w.exp(); // eta^{(m-1)T}
    let lambda = 2.0 * (1.0 + (-w).exp()) / (-w.exp_m1());
    let q = ((-p).ln_1p() / exponent).exp();
    let diameter = union_diameter(sets)?;
    let mu = (2.0 / rho) * m as f64 * diameter + 1.0;
    Ok(TheoreticalConstants {
        lambda,
        q,
        mu,
        diameter,
    })
}

/// Exact diameter of a union of boxes and balls.
///
/// For box pairs the max vertex-pair distance decomposes per coordinate, so
/// no vertex enumeration is needed; balls contribute through their centers
/// plus radii.
pub fn union_diameter(sets: &[ConstraintSet]) -> Result<f64> {
    if sets.is_empty() {
        return Err(CoreError::Parameter("diameter of an empty union".into()));
    }
    let mut best = 0.0f64;
    for i in 0..sets.len() {
        for j in i..sets.len() {
            best = best.max(pair_max_distance(&sets[i], &sets[j])?);
        }
    }
    Ok(best)
}

fn pair_max_distance(a: &ConstraintSet, b: &ConstraintSet) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(CoreError::Dimension {
            context: "union diameter",
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(match (a, b) {
        (ConstraintSet::Box(x), ConstraintSet::Box(y)) => box_box_max(x, y),
        (ConstraintSet::Ball(x), ConstraintSet::Ball(y)) => {
            let center_gap = norm2_slice(
                &x.center()
                    .as_slice()
                    .iter()
                    .zip(y.center().as_slice())
                    .map(|(p, q)| p - q)
                    .collect::<Vec<_>>(),
            );
            center_gap + x.radius() + y.radius()
        }
        (ConstraintSet::Box(x), ConstraintSet::Ball(y))
        | (ConstraintSet::Ball(y), ConstraintSet::Box(x)) => box_ball_max(x, y),
    })
}

fn box_box_max(a: &BoxSet, b: &BoxSet) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.dim() {
        let c1 = (a.upper()[j] - b.lower()[j]).abs();
        let c2 = (b.upper()[j] - a.lower()[j]).abs();
        let d = c1.max(c2);
        acc += d * d;
    }
    acc.sqrt()
}

fn box_ball_max(a: &BoxSet, b: &BallSet) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.dim() {
        let c = b.center()[j];
        let d = (a.lower()[j] - c).abs().max((a.upper()[j] - c).abs());
        acc += d * d;
    }
    acc.sqrt() + b.radius()
}
