use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};

/// Message rates of all players; index 0 is the malicious agent.
///
/// Shares are always derived from the rates. A degenerate profile stands for
/// the limit where a single benign agent sends at a vanishing rate and holds
/// the whole timeline (`d = 1` at zero cost).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    rates: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degenerate_holder: Option<usize>,
}

impl StrategyProfile {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.len() < 2 {
            return Err(ContestError::Structural(format!(
                "a profile needs the malicious slot plus at least one benign agent, got {} rates",
                rates.len()
            )));
        }
        if let Some((i, x)) = rates
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x >= 0.0))
        {
            return Err(ContestError::Domain(format!(
                "rate x_{i} = {x} is not a finite non-negative number"
            )));
        }
        if rates.iter().all(|&x| x == 0.0) {
            return Err(ContestError::Domain(
                "all rates are zero; use StrategyProfile::degenerate for the vanishing-rate limit"
                    .into(),
            ));
        }
        Ok(StrategyProfile {
            rates,
            degenerate_holder: None,
        })
    }

    /// All-zero profile in which benign agent `holder` (1-based) owns the full share.
    pub fn degenerate(n_benign: usize, holder: usize) -> Result<Self> {
        if holder == 0 || holder > n_benign {
            return Err(ContestError::Structural(format!(
                "degenerate holder must be a benign index in 1..={n_benign}, got {holder}"
            )));
        }
        Ok(StrategyProfile {
            rates: vec![0.0; n_benign + 1],
            degenerate_holder: Some(holder),
        })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn rate(&self, i: usize) -> f64 {
        self.rates[i]
    }

    pub fn n_benign(&self) -> usize {
        self.rates.len() - 1
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate_holder.is_some()
    }

    pub fn degenerate_holder(&self) -> Option<usize> {
        self.degenerate_holder
    }

    /// Aggregate rate `z`.
    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// Aggregate rate of everyone except agent `i`.
    pub fn others_total(&self, i: usize) -> f64 {
        self.rates
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, x)| x)
            .sum()
    }

    pub fn benign_total(&self) -> f64 {
        self.rates[1..].iter().sum()
    }

    pub fn share(&self, i: usize) -> f64 {
        match self.degenerate_holder {
            Some(h) => {
                if i == h {
                    1.0
                } else {
                    0.0
                }
            }
            None => self.rates[i] / self.total(),
        }
    }

    pub fn shares(&self) -> Vec<f64> {
        (0..self.rates.len()).map(|i| self.share(i)).collect()
    }
}
