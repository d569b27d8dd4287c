//! Contest instances and their JSON form.

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::utility::UtilitySpec;

/// One game: benign utilities, the malicious agent's willingness factor and
/// the unit message price.
///
/// Construction drops agents whose utility is identically zero. When every
/// utility is linear, agents are sorted by valuation (descending, stable) and
/// all utilities and the price are divided by the top valuation so that
/// `v_1 = 1`. Dividing every payoff by the same constant leaves the
/// equilibrium rates unchanged; [`ContestInstance::valuation_scale`] records the
/// divisor so measures can be reported in input units.
#[derive(Debug, Clone, PartialEq)]
pub struct ContestInstance {
    benign: Vec<UtilitySpec>,
    theta: f64,
    cost: f64,
    targeted: Vec<bool>,
    malicious_present: bool,
    valuation_scale: f64,
    input_order: Vec<usize>,
}

impl ContestInstance {
    /// Full-targeting instance with the malicious agent present.
    pub fn new(agents: Vec<UtilitySpec>, theta: f64, cost: f64) -> Result<Self> {
        Self::build(agents, theta, cost, None, true)
    }

    /// Linear instance at unit price.
    pub fn linear(valuations: &[f64], theta: f64) -> Result<Self> {
        Self::new(
            valuations.iter().map(|&v| UtilitySpec::linear(v)).collect(),
            theta,
            1.0,
        )
    }

    pub fn build(
        agents: Vec<UtilitySpec>,
        theta: f64,
        cost: f64,
        targeted: Option<Vec<bool>>,
        malicious_present: bool,
    ) -> Result<Self> {
        if !theta.is_finite() || theta < 0.0 {
            return Err(ContestError::Domain(format!(
                "theta must be finite and >= 0, got {theta}"
            )));
        }
        if !cost.is_finite() || cost <= 0.0 {
            return Err(ContestError::Domain(format!(
                "cost must be finite and > 0, got {cost}"
            )));
        }
        for spec in &agents {
            spec.validate()?;
        }
        let targeted = match targeted {
            Some(t) if t.len() != agents.len() => {
                return Err(ContestError::Structural(format!(
                    "targeted has {} entries but there are {} agents",
                    t.len(),
                    agents.len()
                )))
            }
            Some(t) => t,
            None => vec![true; agents.len()],
        };

        let mut kept: Vec<(usize, UtilitySpec, bool)> = agents
            .into_iter()
            .zip(targeted)
            .enumerate()
            .filter(|(_, (spec, _))| !spec.is_null())
            .map(|(i, (spec, t))| (i, spec, t))
            .collect();
        if kept.is_empty() {
            return Err(ContestError::Usage(
                "instance has no benign agent with a non-zero utility".into(),
            ));
        }

        let mut valuation_scale = 1.0;
        let mut cost = cost;
        if kept.iter().all(|(_, s, _)| s.is_linear()) {
            // Stable sort keeps input order among equal valuations.
            kept.sort_by(|a, b| {
                let (va, vb) = (a.1.valuation().unwrap(), b.1.valuation().unwrap());
                vb.total_cmp(&va)
            });
            valuation_scale = kept[0].1.valuation().unwrap();
            for entry in &mut kept {
                entry.1 = UtilitySpec::linear(entry.1.valuation().unwrap() / valuation_scale);
            }
            kept[0].1 = UtilitySpec::linear(1.0);
            cost /= valuation_scale;
        }

        Ok(ContestInstance {
            input_order: kept.iter().map(|e| e.0).collect(),
            benign: kept.iter().map(|e| e.1).collect(),
            targeted: kept.iter().map(|e| e.2).collect(),
            theta,
            cost,
            malicious_present,
            valuation_scale,
        })
    }

    /// Parses the instance JSON schema.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(json)
            .map_err(|e| ContestError::Usage(format!("malformed instance JSON: {e}")))?;
        file.into_instance()
    }

    /// Number of benign agents after zero-utility removal.
    pub fn n(&self) -> usize {
        self.benign.len()
    }

    pub fn benign(&self) -> &[UtilitySpec] {
        &self.benign
    }

    /// Utility of benign agent `i` (1-based, matching profile indices).
    pub fn utility(&self, i: usize) -> &UtilitySpec {
        &self.benign[i - 1]
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Unit message price in normalized units.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn targeted(&self) -> &[bool] {
        &self.targeted
    }

    /// Whether benign agent `i` (1-based) is in the malicious agent's objective.
    pub fn is_targeted(&self, i: usize) -> bool {
        self.targeted[i - 1]
    }

    pub fn targeted_count(&self) -> usize {
        self.targeted.iter().filter(|&&t| t).count()
    }

    pub fn malicious_present(&self) -> bool {
        self.malicious_present
    }

    /// The malicious agent is a real player: present, `theta > 0`, and at
    /// least one benign agent targeted.
    pub fn malicious_in_play(&self) -> bool {
        self.malicious_present && self.theta > 0.0 && self.targeted.iter().any(|&t| t)
    }

    pub fn is_all_linear(&self) -> bool {
        self.benign.iter().all(UtilitySpec::is_linear)
    }

    /// Normalized valuations when every utility is linear.
    pub fn valuations(&self) -> Option<Vec<f64>> {
        self.benign.iter().map(UtilitySpec::valuation).collect()
    }

    pub fn valuation_scale(&self) -> f64 {
        self.valuation_scale
    }

    /// Input position of each stored agent.
    pub fn input_order(&self) -> &[usize] {
        &self.input_order
    }

    /// The same game with the malicious agent removed.
    pub fn without_malicious(&self) -> Self {
        ContestInstance {
            malicious_present: false,
            ..self.clone()
        }
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta < 0.0 {
            return Err(ContestError::Domain(format!(
                "theta must be finite and >= 0, got {theta}"
            )));
        }
        Ok(ContestInstance {
            theta,
            ..self.clone()
        })
    }

    /// Replaces the unit price, given in input units.
    pub fn with_cost(&self, cost: f64) -> Result<Self> {
        if !cost.is_finite() || cost <= 0.0 {
            return Err(ContestError::Domain(format!(
                "cost must be finite and > 0, got {cost}"
            )));
        }
        Ok(ContestInstance {
            cost: cost / self.valuation_scale,
            ..self.clone()
        })
    }

    pub fn with_targeting(&self, targeted: Vec<bool>) -> Result<Self> {
        if targeted.len() != self.n() {
            return Err(ContestError::Structural(format!(
                "targeted has {} entries but there are {} agents",
                targeted.len(),
                self.n()
            )));
        }
        Ok(ContestInstance {
            targeted,
            ..self.clone()
        })
    }
}

/// On-disk instance description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub theta: f64,
    pub cost: f64,
    pub agents: Vec<UtilitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targeted: Option<Vec<bool>>,
    #[serde(default = "default_true")]
    pub malicious: bool,
}

fn default_true() -> bool {
    true
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<ContestInstance> {
        ContestInstance::build(
            self.agents,
            self.theta,
            self.cost,
            self.targeted,
            self.malicious,
        )
    }
}
