//! Objective oracles: exact value and one element of the subdifferential at
//! any query point, plus a sampling-based bound on subgradient norms.
//!
//! At kinks the minimal-norm selection `sign(0) := 0` is used everywhere, so
//! `0` is the chosen element of the subdifferential of `|.|` at the origin.

use crate::error::{CoreError, Result};
use crate::linalg::{dot_slices, norm2, Matrix, Vector};
use crate::rng::SplitMix64;
use crate::sets::ConstraintSet;

fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `x' Q x + q' x + r` with symmetric `Q` (checked to 1e-12).
///
/// Positive semidefiniteness is not required by construction; packaged
/// scenarios assert it separately via [`QuadraticFn::is_psd`].
#[derive(Debug, Clone)]
pub struct QuadraticFn {
    q_mat: Matrix,
    q_vec: Vector,
    r: f64,
}

impl QuadraticFn {
    pub fn new(q_mat: Matrix, q_vec: Vector, r: f64) -> Result<Self> {
        if q_mat.rows() != q_mat.cols() {
            return Err(CoreError::Dimension {
                context: "quadratic Q square",
                left: q_mat.rows(),
                right: q_mat.cols(),
            });
        }
        if q_mat.rows() != q_vec.len() {
            return Err(CoreError::Dimension {
                context: "quadratic q length",
                left: q_mat.rows(),
                right: q_vec.len(),
            });
        }
        if !q_mat.is_symmetric(1e-12) {
            return Err(CoreError::Validation("quadratic Q is not symmetric".into()));
        }
        Ok(Self { q_mat, q_vec, r })
    }

    pub fn q_mat(&self) -> &Matrix {
        &self.q_mat
    }

    /// Cholesky-style factorization attempt with tolerance; true when the
    /// matrix has no negative pivot below `-1e-10 * max|entry|`.
    pub fn is_psd(&self) -> bool {
        let n = self.q_mat.rows();
        let slack = 1e-10 * self.q_mat.max_abs_entry().max(1.0);
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.q_mat.get(i, j)).collect())
            .collect();
        for k in 0..n {
            if a[k][k] < -slack {
                return false;
            }
            let pivot = a[k][k].max(0.0);
            if pivot <= slack {
                // zero pivot: the whole row/column must vanish for PSD
                for j in (k + 1)..n {
                    if a[k][j].abs() > slack {
                        return false;
                    }
                }
                continue;
            }
            for i in (k + 1)..n {
                let factor = a[i][k] / pivot;
                for j in k..n {
                    a[i][j] -= factor * a[k][j];
                }
            }
        }
        true
    }
}

/// `|y - b' x|`.
#[derive(Debug, Clone)]
pub struct AbsResidualFn {
    b: Vector,
    y: f64,
}

impl AbsResidualFn {
    pub fn new(b: Vector, y: f64) -> Result<Self> {
        if !y.is_finite() {
            return Err(CoreError::NonFinite { index: 0, value: y });
        }
        Ok(Self { b, y })
    }
}

/// `(y - b' x)^2`.
#[derive(Debug, Clone)]
pub struct SquaredResidualFn {
    b: Vector,
    y: f64,
}

impl SquaredResidualFn {
    pub fn new(b: Vector, y: f64) -> Result<Self> {
        if !y.is_finite() {
            return Err(CoreError::NonFinite { index: 0, value: y });
        }
        Ok(Self { b, y })
    }
}

/// `weight * ||x||_1`, weight >= 0. Dimension-agnostic.
#[derive(Debug, Clone)]
pub struct L1RegFn {
    weight: f64,
}

impl L1RegFn {
    pub fn new(weight: f64) -> Result<Self> {
        if weight < 0.0 || !weight.is_finite() {
            return Err(CoreError::Parameter(format!(
                "l1 weight must be non-negative, got {weight}"
            )));
        }
        Ok(Self { weight })
    }
}

/// An objective oracle.
#[derive(Debug, Clone)]
pub enum Objective {
    Quadratic(QuadraticFn),
    AbsResidual(AbsResidualFn),
    SquaredResidual(SquaredResidualFn),
    L1Reg(L1RegFn),
    Sum(Vec<Objective>),
}

impl Objective {
    /// Sum of oracles over a common dimension. The list must be nonempty and
    /// the fixed-dimension members must agree.
    pub fn sum(terms: Vec<Objective>) -> Result<Objective> {
        if terms.is_empty() {
            return Err(CoreError::Parameter("sum of zero objectives".into()));
        }
        let mut dim: Option<usize> = None;
        for t in &terms {
            if let Some(d) = t.dim() {
                match dim {
                    None => dim = Some(d),
                    Some(existing) if existing != d => {
                        return Err(CoreError::Dimension {
                            context: "sum objective dims",
                            left: existing,
                            right: d,
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(Objective::Sum(terms))
    }

    /// Fixed input dimension, when the oracle has one (`L1Reg` does not).
    pub fn dim(&self) -> Option<usize> {
        match self {
            Objective::Quadratic(f) => Some(f.q_vec.len()),
            Objective::AbsResidual(f) => Some(f.b.len()),
            Objective::SquaredResidual(f) => Some(f.b.len()),
            Objective::L1Reg(_) => None,
            Objective::Sum(terms) => terms.iter().find_map(|t| t.dim()),
        }
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(CoreError::Dimension {
                    context: "objective query point",
                    left: d,
                    right: x.len(),
                });
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.value_unchecked(x.as_slice()))
    }

    pub(crate) fn value_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Objective::Quadratic(f) => {
                let mut acc = f.r + dot_slices(f.q_vec.as_slice(), x);
                for i in 0..x.len() {
                    acc += x[i] * dot_slices(f.q_mat.row(i), x);
                }
                acc
            }
            Objective::AbsResidual(f) => (f.y - dot_slices(f.b.as_slice(), x)).abs(),
            Objective::SquaredResidual(f) => {
                let r = f.y - dot_slices(f.b.as_slice(), x);
                r * r
            }
            Objective::L1Reg(f) => f.weight * x.iter().map(|v| v.abs()).sum::<f64>(),
            Objective::Sum(terms) => terms.iter().map(|t| t.value_unchecked(x)).sum(),
        }
    }

    /// One element of the subdifferential at `x`.
    ///
    /// Quadratic: `2 Q x + q`. AbsResidual: `-sign(y - b'x) b`.
    /// SquaredResidual: `-2 (y - b'x) b`. L1Reg: `weight * sign(x_j)`
    /// component-wise. Sum: sum of the members' selections.
    pub fn subgrad(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        let mut g = vec![0.0; x.len()];
        self.add_subgrad(x.as_slice(), &mut g);
        Ok(Vector::from_raw(g))
    }

    pub(crate) fn add_subgrad(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Objective::Quadratic(f) => {
                for i in 0..x.len() {
                    out[i] += 2.0 * dot_slices(f.q_mat.row(i), x) + f.q_vec[i];
                }
            }
            Objective::AbsResidual(f) => {
                let s = sign0(f.y - dot_slices(f.b.as_slice(), x));
                for i in 0..x.len() {
                    out[i] += -s * f.b[i];
                }
            }
            Objective::SquaredResidual(f) => {
                let r = f.y - dot_slices(f.b.as_slice(), x);
                for i in 0..x.len() {
                    out[i] += -2.0 * r * f.b[i];
                }
            }
            Objective::L1Reg(f) => {
                for i in 0..x.len() {
                    out[i] += f.weight * sign0(x[i]);
                }
            }
            Objective::Sum(terms) => {
                for t in terms {
                    t.add_subgrad(x, out);
                }
            }
        }
    }

    /// Frobenius-norm bound on the curvature of the quadratic part, when the
    /// whole oracle is built from quadratics, squared residuals and l1 terms.
    /// Used by the proximal baseline to size its inner step. `None` for
    /// oracles without a usable bound (absolute residuals).
    pub fn quadratic_curvature(&self) -> Option<f64> {
        match self {
            Objective::Quadratic(f) => Some(2.0 * f.q_mat.frobenius_norm()),
            Objective::SquaredResidual(f) => {
                // Q = b b', so ||Q||_F = ||b||^2
                Some(2.0 * dot_slices(f.b.as_slice(), f.b.as_slice()))
            }
            Objective::L1Reg(_) => Some(0.0),
            Objective::AbsResidual(_) => None,
            Objective::Sum(terms) => {
                let mut total = 0.0;
                for t in terms {
                    total += t.quadratic_curvature()?;
                }
                Some(total)
            }
        }
    }

    /// Max of `||subgrad||_2` over `samples` points drawn uniformly in the
    /// set's bounding box and projected onto the set. A lower estimate of the
    /// true bound, used for diagnostics and envelope scaling only.
    pub fn lipschitz_estimate(&self, set: &ConstraintSet, samples: usize, seed: u64) -> f64 {
        assert!(samples >= 1, "lipschitz_estimate needs at least one sample");
        let bbox = set.bounding_box();
        let n = set.dim();
        let mut rng = SplitMix64::new(seed);
        let mut best = 0.0f64;
        for _ in 0..samples {
            let raw: Vec<f64> = (0..n)
                .map(|j| rng.uniform(bbox.lower()[j], bbox.upper()[j]))
                .collect();
            let point = set
                .project(&Vector::from_raw(raw))
                .expect("bounding-box point has matching dimension");
            let g = self.subgrad(&point).expect("dimension checked");
            best = best.max(norm2(&g));
        }
        best
    }
}
