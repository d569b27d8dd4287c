//! Aggregate performance measures and per-agent payoffs.

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::instance::ContestInstance;
use crate::profile::StrategyProfile;
use crate::utility::Utility;

/// Outcome measures of one strategy profile.
///
/// `su` is total benign utility, `sv` total benign net utility, `sw` the
/// platform's revenue (including the malicious agent's payments) and `v0`
/// the malicious agent's payoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measures {
    pub su: f64,
    pub sv: f64,
    pub sw: f64,
    pub per_agent_u: Vec<f64>,
    pub per_agent_v: Vec<f64>,
    pub v0: f64,
}

impl Measures {
    /// Rescales every payoff quantity by `scale` (e.g. the instance's valuation scale).
    pub fn scaled(&self, scale: f64) -> Measures {
        Measures {
            su: self.su * scale,
            sv: self.sv * scale,
            sw: self.sw * scale,
            per_agent_u: self.per_agent_u.iter().map(|u| u * scale).collect(),
            per_agent_v: self.per_agent_v.iter().map(|v| v * scale).collect(),
            v0: self.v0 * scale,
        }
    }
}

fn check_shape(instance: &ContestInstance, rates: &[f64]) -> Result<()> {
    if rates.len() != instance.n() + 1 {
        return Err(ContestError::Structural(format!(
            "profile has {} rates but the instance has {} benign agents plus the malicious slot",
            rates.len(),
            instance.n()
        )));
    }
    Ok(())
}

/// Measures of `profile` in `instance`.
///
/// The malicious payoff counts only targeted agents; with full targeting it
/// is `-theta * su - c * x_0`. When the malicious agent is absent `v0 = 0`.
pub fn compute_measures(instance: &ContestInstance, profile: &StrategyProfile) -> Result<Measures> {
    check_shape(instance, profile.rates())?;
    let c = instance.cost();
    let shares = profile.shares();
    let mut per_agent_u = Vec::with_capacity(instance.n());
    let mut per_agent_v = Vec::with_capacity(instance.n());
    let mut targeted_u = 0.0;
    for i in 1..=instance.n() {
        let u = instance.utility(i).value(shares[i])?;
        let x = profile.rate(i);
        per_agent_u.push(u);
        per_agent_v.push(u - c * x);
        if instance.is_targeted(i) {
            targeted_u += u;
        }
    }
    let su: f64 = per_agent_u.iter().sum();
    let benign_paid = c * profile.benign_total();
    let x0 = profile.rate(0);
    let v0 = if instance.malicious_present() {
        -instance.theta() * targeted_u - c * x0
    } else {
        0.0
    };
    Ok(Measures {
        su,
        sv: su - benign_paid,
        sw: benign_paid + c * x0,
        per_agent_u,
        per_agent_v,
        v0,
    })
}

/// Payoff of agent `i` when the rate vector is `rates`.
///
/// Evaluated straight from the payoff definitions; used by deviation checks.
pub fn agent_payoff(instance: &ContestInstance, rates: &[f64], i: usize) -> f64 {
    let z: f64 = rates.iter().sum();
    let c = instance.cost();
    if i == 0 {
        if !instance.malicious_present() {
            return 0.0;
        }
        let mut harm = 0.0;
        for j in 1..=instance.n() {
            if instance.is_targeted(j) {
                let d = if z > 0.0 { rates[j] / z } else { 0.0 };
                harm += instance.utility(j).value_unchecked(d);
            }
        }
        -instance.theta() * harm - c * rates[0]
    } else {
        let d = if z > 0.0 { rates[i] / z } else { 0.0 };
        instance.utility(i).value_unchecked(d) - c * rates[i]
    }
}

/// Marginal payoff `dV_i / dx_i` of every player at `profile`.
///
/// At a Nash equilibrium these vanish for active agents and are non-positive
/// for inactive ones. The malicious entry is 0 when it is not a player.
/// Degenerate profiles report all zeros.
pub fn marginal_payoffs(instance: &ContestInstance, profile: &StrategyProfile) -> Result<Vec<f64>> {
    check_shape(instance, profile.rates())?;
    let n = instance.n();
    if profile.is_degenerate() {
        return Ok(vec![0.0; n + 1]);
    }
    let c = instance.cost();
    let z = profile.total();
    let z2 = z * z;
    let mut out = vec![0.0; n + 1];
    let mut malicious_gain = 0.0;
    for (i, slot) in out.iter_mut().enumerate().skip(1) {
        let x = profile.rate(i);
        let du = instance.utility(i).derivative_unchecked(x / z);
        *slot = du * (z - x) / z2 - c;
        if instance.is_targeted(i) {
            malicious_gain += du * x / z2;
        }
    }
    if instance.malicious_present() {
        out[0] = instance.theta() * malicious_gain - c;
    }
    Ok(out)
}

/// Largest KKT violation: `|g_i|` for active agents, `max(g_i, 0)` for inactive ones.
pub fn kkt_violation(
    instance: &ContestInstance,
    profile: &StrategyProfile,
    marginals: &[f64],
) -> f64 {
    marginals
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            if i == 0 && !instance.malicious_present() {
                0.0
            } else if profile.rate(i) > 0.0 {
                g.abs()
            } else {
                g.max(0.0)
            }
        })
        .fold(0.0, f64::max)
}
