use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::ContestInstance;
use crate::measures::{kkt_violation, marginal_payoffs};
use crate::profile::StrategyProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    ClosedForm,
    BestResponse,
}

/// A Nash equilibrium together with solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub profile: StrategyProfile,
    /// 1-based indices of benign agents with a positive rate.
    pub participating_benign: Vec<usize>,
    pub malicious_active: bool,
    /// Marginal payoff `dV_i/dx_i` of every player, malicious first.
    pub foc_residuals: Vec<f64>,
    pub method: SolveMethod,
    pub iterations: usize,
    pub degenerate: bool,
}

impl EquilibriumResult {
    pub(crate) fn from_profile(
        instance: &ContestInstance,
        profile: StrategyProfile,
        method: SolveMethod,
        iterations: usize,
    ) -> Result<Self> {
        let foc_residuals = marginal_payoffs(instance, &profile)?;
        let participating_benign = (1..=instance.n())
            .filter(|&i| profile.rate(i) > 0.0)
            .collect();
        Ok(EquilibriumResult {
            malicious_active: profile.rate(0) > 0.0,
            degenerate: profile.is_degenerate(),
            participating_benign,
            foc_residuals,
            profile,
            method,
            iterations,
        })
    }

    /// Largest violation of the first-order equilibrium conditions.
    pub fn max_kkt_violation(&self, instance: &ContestInstance) -> f64 {
        kkt_violation(instance, &self.profile, &self.foc_residuals)
    }

    pub fn rates(&self) -> &[f64] {
        self.profile.rates()
    }
}
