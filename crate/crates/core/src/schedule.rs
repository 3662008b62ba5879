//! Diminishing step-size schedules.

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// `scale / (k + 1)`; square-summable, used for iterate convergence.
    Harmonic,
    /// `scale / sqrt(k + 1)`; used for the rate results.
    InvSqrt,
    Constant,
}

impl StepKind {
    pub fn parse(s: &str) -> Result<StepKind> {
        match s {
            "harmonic" => Ok(StepKind::Harmonic),
            "inv_sqrt" => Ok(StepKind::InvSqrt),
            "constant" => Ok(StepKind::Constant),
            other => Err(CoreError::Parameter(format!("unknown step kind '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepKind::Harmonic => "harmonic",
            StepKind::InvSqrt => "inv_sqrt",
            StepKind::Constant => "constant",
        }
    }
}

/// Non-negative, non-increasing step sequence `c(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub kind: StepKind,
    pub scale: f64,
}

impl StepSchedule {
    pub fn new(kind: StepKind, scale: f64) -> Result<Self> {
        if scale <= 0.0 || !scale.is_finite() {
            return Err(CoreError::Parameter(format!(
                "step scale must be positive, got {scale}"
            )));
        }
        Ok(Self { kind, scale })
    }

    pub fn harmonic(scale: f64) -> Result<Self> {
        Self::new(StepKind::Harmonic, scale)
    }

    pub fn inv_sqrt(scale: f64) -> Result<Self> {
        Self::new(StepKind::InvSqrt, scale)
    }

    pub fn constant(scale: f64) -> Result<Self> {
        Self::new(StepKind::Constant, scale)
    }

    pub fn step_size(&self, k: usize) -> f64 {
        match self.kind {
            StepKind::Harmonic => self.scale / (k as f64 + 1.0),
            StepKind::InvSqrt => self.scale / (k as f64 + 1.0).sqrt(),
            StepKind::Constant => self.scale,
        }
    }

    pub fn describe(&self) -> String {
        format!("{}:{}", self.kind.name(), self.scale)
    }
}
