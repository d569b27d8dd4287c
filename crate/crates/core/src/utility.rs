//! Utility of attention share for benign agents.
//!
//! A benign agent values the fraction `d = x_i / z` of viewer attention it
//! captures. Every utility here satisfies `U(0) = 0` and is increasing and
//! concave in `d`; the solvers only ever need the value and the first
//! derivative, which is what the [`Utility`] trait exposes.

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};

/// Shares this far outside `[0, 1]` are treated as rounding noise and clamped.
pub const SHARE_CLAMP_SLACK: f64 = 1e-12;

/// Value-and-derivative evaluator for a concave utility of attention share.
///
/// Implementors must return `value(0) == 0`, a positive non-increasing
/// derivative on `[0, 1]`, and accept any `d` in `[0, 1]`.
pub trait Utility {
    fn value_unchecked(&self, d: f64) -> f64;
    fn derivative_unchecked(&self, d: f64) -> f64;
}

/// Utility specification of one benign agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum UtilitySpec {
    /// `U(d) = v * d`.
    #[serde(rename = "linear")]
    Linear { v: f64 },
    /// `U(d) = a * ln(1 + b * d)`.
    #[serde(rename = "log")]
    Logarithmic { a: f64, b: f64 },
}

impl UtilitySpec {
    pub fn linear(v: f64) -> Self {
        UtilitySpec::Linear { v }
    }

    pub fn logarithmic(a: f64, b: f64) -> Self {
        UtilitySpec::Logarithmic { a, b }
    }

    /// Checks parameter ranges. Zero-valued utilities are valid here; the
    /// instance constructor drops them.
    pub fn validate(&self) -> Result<()> {
        match *self {
            UtilitySpec::Linear { v } => {
                if !v.is_finite() || v < 0.0 {
                    return Err(ContestError::Domain(format!(
                        "linear valuation must be finite and non-negative, got {v}"
                    )));
                }
            }
            UtilitySpec::Logarithmic { a, b } => {
                if !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0 {
                    return Err(ContestError::Domain(format!(
                        "logarithmic parameters must be finite and non-negative, got a={a}, b={b}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// True when the utility is identically zero on `[0, 1]`.
    pub fn is_null(&self) -> bool {
        match *self {
            UtilitySpec::Linear { v } => v == 0.0,
            UtilitySpec::Logarithmic { a, b } => a == 0.0 || b == 0.0,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, UtilitySpec::Linear { .. })
    }

    pub fn valuation(&self) -> Option<f64> {
        match *self {
            UtilitySpec::Linear { v } => Some(v),
            UtilitySpec::Logarithmic { .. } => None,
        }
    }

    /// Multiplies the utility by a positive constant.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            UtilitySpec::Linear { v } => UtilitySpec::Linear { v: v * factor },
            UtilitySpec::Logarithmic { a, b } => UtilitySpec::Logarithmic { a: a * factor, b },
        }
    }

    /// `U(d)`, rejecting shares outside `[0, 1]` beyond rounding slack.
    pub fn value(&self, d: f64) -> Result<f64> {
        Ok(self.value_unchecked(check_share(d)?))
    }

    /// `U'(d)`, rejecting shares outside `[0, 1]` beyond rounding slack.
    pub fn derivative(&self, d: f64) -> Result<f64> {
        Ok(self.derivative_unchecked(check_share(d)?))
    }

    /// Share at which the marginal utility equals `lambda`, clamped to `[0, 1]`.
    ///
    /// Returns `None` for linear utilities, whose marginal is flat.
    pub fn share_at_marginal(&self, lambda: f64) -> Option<f64> {
        match *self {
            UtilitySpec::Linear { .. } => None,
            UtilitySpec::Logarithmic { a, b } => {
                if a == 0.0 || b == 0.0 {
                    return Some(0.0);
                }
                Some((a / lambda - 1.0 / b).clamp(0.0, 1.0))
            }
        }
    }
}

impl Utility for UtilitySpec {
    #[inline]
    fn value_unchecked(&self, d: f64) -> f64 {
        match *self {
            UtilitySpec::Linear { v } => v * d,
            UtilitySpec::Logarithmic { a, b } => a * (b * d).ln_1p(),
        }
    }

    #[inline]
    fn derivative_unchecked(&self, d: f64) -> f64 {
        match *self {
            UtilitySpec::Linear { v } => v,
            UtilitySpec::Logarithmic { a, b } => a * b / (1.0 + b * d),
        }
    }
}

/// Validates a share and clamps rounding overshoot back into `[0, 1]`.
pub fn check_share(d: f64) -> Result<f64> {
    if d.is_nan() || !(-SHARE_CLAMP_SLACK..=1.0 + SHARE_CLAMP_SLACK).contains(&d) {
        return Err(ContestError::Domain(format!(
            "attention share must lie in [0, 1], got {d}"
        )));
    }
    Ok(d.clamp(0.0, 1.0))
}

pub fn evaluate_utility(spec: &UtilitySpec, d: f64) -> Result<f64> {
    spec.value(d)
}

pub fn evaluate_utility_derivative(spec: &UtilitySpec, d: f64) -> Result<f64> {
    spec.derivative(d)
}

/// Numerical check that a utility looks increasing and concave on `[0, 1]`.
///
/// This is a grid heuristic: the derivative must be positive at every grid
/// point and never increase between neighbours. It cannot prove the property.
pub fn satisfies_p1<U: Utility>(utility: &U) -> bool {
    const GRID: usize = 200;
    let mut prev = f64::INFINITY;
    for k in 0..=GRID {
        let d = k as f64 / GRID as f64;
        let du = utility.derivative_unchecked(d);
        if !(du > 0.0) || du > prev * (1.0 + 1e-12) {
            return false;
        }
        prev = du;
    }
    utility.value_unchecked(0.0) == 0.0
}
