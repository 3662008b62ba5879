//! Per-agent constraint sets: boxes and Euclidean balls with exact
//! projection, distance, membership, and box variational-inequality checks.

use crate::error::{CoreError, Result};
use crate::linalg::{norm2_slice, Vector};

/// Axis-aligned box `{ x : lower <= x <= upper }` with finite bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: Vector,
    upper: Vector,
}

impl BoxSet {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(CoreError::Dimension {
                context: "box bounds",
                left: lower.len(),
                right: upper.len(),
            });
        }
        for coord in 0..lower.len() {
            if lower[coord] > upper[coord] {
                return Err(CoreError::Infeasible {
                    coord,
                    lower: lower[coord],
                    upper: upper[coord],
                });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        Ok(Vector::from_raw(
            x.as_slice()
                .iter()
                .enumerate()
                .map(|(j, &v)| v.clamp(self.lower[j], self.upper[j]))
                .collect(),
        ))
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(CoreError::Dimension {
                context: "box point",
                left: self.dim(),
                right: x.len(),
            });
        }
        Ok(())
    }
}

/// Euclidean ball `{ x : ||x - center||_2 <= radius }`, radius > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSet {
    center: Vector,
    radius: f64,
}

impl BallSet {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(CoreError::Parameter(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.dim() {
            return Err(CoreError::Dimension {
                context: "ball point",
                left: self.dim(),
                right: x.len(),
            });
        }
        let offset: Vec<f64> = x
            .as_slice()
            .iter()
            .zip(self.center.as_slice())
            .map(|(a, c)| a - c)
            .collect();
        let dist = norm2_slice(&offset);
        if dist <= self.radius {
            return Ok(x.clone());
        }
        let scale = self.radius / dist;
        Ok(Vector::from_raw(
            self.center
                .as_slice()
                .iter()
                .zip(&offset)
                .map(|(c, o)| c + scale * o)
                .collect(),
        ))
    }
}

/// Tagged union over the supported set kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    Box(BoxSet),
    Ball(BallSet),
}

impl ConstraintSet {
    pub fn dim(&self) -> usize {
        match self {
            ConstraintSet::Box(b) => b.dim(),
            ConstraintSet::Ball(b) => b.dim(),
        }
    }

    /// Unique Euclidean projection onto the set.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        match self {
            ConstraintSet::Box(b) => b.project(x),
            ConstraintSet::Ball(b) => b.project(x),
        }
    }

    /// `||x - project(x)||_2`.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        let p = self.project(x)?;
        Ok(norm2_slice(
            &x.as_slice()
                .iter()
                .zip(p.as_slice())
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        ))
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        assert!(tol >= 0.0, "containment tolerance must be non-negative");
        Ok(self.distance(x)? <= tol)
    }

    /// Smallest axis-aligned box containing the set.
    pub fn bounding_box(&self) -> BoxSet {
        match self {
            ConstraintSet::Box(b) => b.clone(),
            ConstraintSet::Ball(b) => {
                let lo: Vec<f64> = b
                    .center()
                    .as_slice()
                    .iter()
                    .map(|c| c - b.radius())
                    .collect();
                let hi: Vec<f64> = b
                    .center()
                    .as_slice()
                    .iter()
                    .map(|c| c + b.radius())
                    .collect();
                BoxSet::new(Vector::from_raw(lo), Vector::from_raw(hi))
                    .expect("ball bounding box is well formed")
            }
        }
    }
}

/// Default tolerance for classifying a coordinate as sitting on a box bound.
/// Iterates land exactly on bounds after clamping; the tolerance only matters
/// for points produced by other arithmetic.
pub const VI_BOUNDARY_TOL: f64 = 1e-9;

/// Check the variational inequality `g'(xi - x) >= -tol` for all `xi` in the
/// box, decided component-wise: a coordinate at the lower bound needs
/// `g_j >= -tol`, at the upper bound `g_j <= tol`, strictly interior
/// `|g_j| <= tol`. Bound classification uses `tol` on `|x_j - bound|`.
pub fn box_vi_holds(g: &Vector, x: &Vector, b: &BoxSet, tol: f64) -> Result<bool> {
    if g.len() != b.dim() || x.len() != b.dim() {
        return Err(CoreError::Dimension {
            context: "box VI",
            left: g.len(),
            right: b.dim(),
        });
    }
    let set = ConstraintSet::Box(b.clone());
    let dist = set.distance(x)?;
    if dist > tol {
        return Err(CoreError::OutsideSet {
            distance: dist,
            tolerance: tol,
        });
    }
    for j in 0..b.dim() {
        let at_lower = (x[j] - b.lower()[j]).abs() <= tol;
        let at_upper = (x[j] - b.upper()[j]).abs() <= tol;
        let ok = match (at_lower, at_upper) {
            (true, true) => true, // zero-width coordinate, xi_j - x_j = 0
            (true, false) => g[j] >= -tol,
            (false, true) => g[j] <= tol,
            (false, false) => g[j].abs() <= tol,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Component-wise intersection of boxes: max of lowers, min of uppers.
pub fn intersect_boxes(boxes: &[BoxSet]) -> Result<BoxSet> {
    let first = boxes
        .first()
        .ok_or_else(|| CoreError::Parameter("intersect_boxes needs a nonempty list".into()))?;
    let n = first.dim();
    let mut lo = first.lower().as_slice().to_vec();
    let mut hi = first.upper().as_slice().to_vec();
    for b in &boxes[1..] {
        if b.dim() != n {
            return Err(CoreError::Dimension {
                context: "intersect_boxes",
                left: n,
                right: b.dim(),
            });
        }
        for j in 0..n {
            lo[j] = lo[j].max(b.lower()[j]);
            hi[j] = hi[j].min(b.upper()[j]);
        }
    }
    for j in 0..n {
        if lo[j] > hi[j] {
            return Err(CoreError::Infeasible {
                coord: j,
                lower: lo[j],
                upper: hi[j],
            });
        }
    }
    BoxSet::new(Vector::from_raw(lo), Vector::from_raw(hi))
}

/// Midpoint and largest radius `rho` with `ball(center, rho)` inside the box:
/// `rho = min_j (upper_j - lower_j) / 2`. Errors on zero-width coordinates.
pub fn chebyshev_interior(b: &BoxSet) -> Result<(Vector, f64)> {
    let mut rho = f64::INFINITY;
    let mut center = Vec::with_capacity(b.dim());
    for j in 0..b.dim() {
        let width = b.upper()[j] - b.lower()[j];
        if width <= 0.0 {
            return Err(CoreError::Degenerate { coord: j });
        }
        rho = rho.min(width / 2.0);
        center.push(b.lower()[j] + width / 2.0);
    }
    Ok((Vector::from_raw(center), rho))
}
