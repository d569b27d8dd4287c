//! Instances on which the lower bounds are tight.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::su_branch_crossover;
use crate::closed_form::participation_threshold;
use crate::error::{ContestError, Result};
use crate::instance::ContestInstance;

/// Stand-in for a zero valuation.
pub const ZERO_VALUATION_SURROGATE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorstCaseKind {
    /// Every `v_i = 1`; B1 stays at 1 until the attacker enters.
    Homogeneous,
    /// `v_i = sqrt(N(N-1)) - (N-1)` for `i >= 2`; minimizes B1 without the attacker.
    SuMaxBranch,
    /// `v_i` near zero for `i >= 2`; B1 falls to `1/(1+theta)`.
    SuThetaBranch,
    /// `v_i = sqrt(N^2-1) - (N-1)` for `i >= 2`; minimizes B3 without the attacker.
    SvNomal,
}

impl WorstCaseKind {
    pub const ALL: [WorstCaseKind; 4] = [
        WorstCaseKind::Homogeneous,
        WorstCaseKind::SuMaxBranch,
        WorstCaseKind::SuThetaBranch,
        WorstCaseKind::SvNomal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WorstCaseKind::Homogeneous => "homogeneous",
            WorstCaseKind::SuMaxBranch => "su_max_branch",
            WorstCaseKind::SuThetaBranch => "su_theta_branch",
            WorstCaseKind::SvNomal => "sv_nomal",
        }
    }

    /// Common valuation of agents `2..=N`.
    pub fn tail_valuation(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            WorstCaseKind::Homogeneous => 1.0,
            WorstCaseKind::SuMaxBranch => (nf * (nf - 1.0)).sqrt() - (nf - 1.0),
            WorstCaseKind::SuThetaBranch => ZERO_VALUATION_SURROGATE,
            WorstCaseKind::SvNomal => (nf * nf - 1.0).sqrt() - (nf - 1.0),
        }
    }
}

impl fmt::Display for WorstCaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorstCaseKind {
    type Err = ContestError;

    fn from_str(s: &str) -> Result<Self> {
        WorstCaseKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ContestError::Usage(format!("unknown worst-case kind '{s}'")))
    }
}

/// Valuations of the construction, without any regime check.
pub fn extremal_valuations(kind: WorstCaseKind, n: usize) -> Vec<f64> {
    let mut v = vec![kind.tail_valuation(n); n];
    if n > 0 {
        v[0] = 1.0;
    }
    v
}

/// The tight construction for `kind` at `(N, theta)`.
///
/// Fails with a regime error when `theta` lies where a different construction
/// is tight: `su_max_branch` needs `theta` at or below the B1 crossover,
/// `su_theta_branch` at or above it, and `sv_nomal` needs the attacker to stay
/// out of that instance.
pub fn worst_case_instance(kind: WorstCaseKind, n: usize, theta: f64) -> Result<ContestInstance> {
    if n == 0 {
        return Err(ContestError::Usage("N must be at least 1".into()));
    }
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(ContestError::Domain(format!(
            "theta must be finite and >= 0, got {theta}"
        )));
    }
    let valuations = extremal_valuations(kind, n);
    match kind {
        WorstCaseKind::Homogeneous => {}
        WorstCaseKind::SuMaxBranch => {
            let cross = su_branch_crossover(n);
            if theta > cross {
                return Err(ContestError::Regime(format!(
                    "su_max_branch is tight only for theta <= {cross}; use su_theta_branch"
                )));
            }
        }
        WorstCaseKind::SuThetaBranch => {
            let cross = su_branch_crossover(n);
            if theta < cross {
                return Err(ContestError::Regime(format!(
                    "su_theta_branch is tight only for theta >= {cross}; use su_max_branch"
                )));
            }
        }
        WorstCaseKind::SvNomal => {
            let threshold = participation_threshold(&valuations)?;
            if n > 1 && theta >= threshold {
                return Err(ContestError::Regime(format!(
                    "sv_nomal needs the attacker inactive (theta < {threshold}); use the attacker candidates of the B3 lower bound"
                )));
            }
        }
    }
    ContestInstance::linear(&valuations, theta)
}
