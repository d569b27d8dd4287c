//! Visibility metrics as functions of attention share, and the multi-attacker reduction.

use std::fmt;
use std::str::FromStr;

use crate::error::{ContestError, Result};
use crate::utility::check_share;

/// Timeline visibility metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisibilityMetric {
    /// Mean number of the agent's messages among the visible slots: `K d`.
    MeanMessages,
    /// Fraction of time at least one message is visible: `1 - (1 - d)^K`.
    VisibleTime,
    /// Fraction of viewers reached: `d`.
    ViewerFraction,
}

impl FromStr for VisibilityMetric {
    type Err = ContestError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" | "mean-messages" => Ok(VisibilityMetric::MeanMessages),
            "m2" | "visible-time" => Ok(VisibilityMetric::VisibleTime),
            "m3" | "viewer-fraction" => Ok(VisibilityMetric::ViewerFraction),
            other => Err(ContestError::Usage(format!(
                "unknown visibility metric '{other}'"
            ))),
        }
    }
}

impl fmt::Display for VisibilityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VisibilityMetric::MeanMessages => "m1",
            VisibilityMetric::VisibleTime => "m2",
            VisibilityMetric::ViewerFraction => "m3",
        })
    }
}

/// Number of visible timeline slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VisibilityConfig {
    slots: u32,
}

impl VisibilityConfig {
    pub fn new(slots: u32) -> Result<Self> {
        if slots == 0 {
            return Err(ContestError::Usage(
                "the timeline needs at least one visible slot".into(),
            ));
        }
        Ok(VisibilityConfig { slots })
    }

    pub fn slots(&self) -> u32 {
        self.slots
    }
}

pub fn share_to_metric(metric: VisibilityMetric, d: f64, config: VisibilityConfig) -> Result<f64> {
    let d = check_share(d)?;
    let k = config.slots;
    Ok(match metric {
        VisibilityMetric::MeanMessages => k as f64 * d,
        VisibilityMetric::VisibleTime => -(k as f64 * (-d).ln_1p()).exp_m1(),
        VisibilityMetric::ViewerFraction => d,
    })
}

/// With several malicious agents only the most willing one participates.
pub fn reduce_malicious(willingness: &[f64]) -> Result<f64> {
    if willingness.is_empty() {
        return Err(ContestError::Usage(
            "no malicious willingness factors given".into(),
        ));
    }
    if let Some(bad) = willingness.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(ContestError::Domain(format!(
            "willingness factor must be >= 0, got {bad}"
        )));
    }
    Ok(willingness.iter().copied().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn metric_examples() {
        let k5 = VisibilityConfig::new(5).unwrap();
        let k2 = VisibilityConfig::new(2).unwrap();
        assert!(
            (share_to_metric(VisibilityMetric::MeanMessages, 0.2, k5).unwrap() - 1.0).abs() < 1e-15
        );
        assert_eq!(
            share_to_metric(VisibilityMetric::VisibleTime, 0.0, k5).unwrap(),
            0.0
        );
        assert!(
            (share_to_metric(VisibilityMetric::VisibleTime, 0.5, k2).unwrap() - 0.75).abs() < 1e-15
        );
        assert_eq!(
            share_to_metric(VisibilityMetric::ViewerFraction, 0.3, k5).unwrap(),
            0.3
        );
        assert_eq!(
            share_to_metric(VisibilityMetric::VisibleTime, 1.0, k2).unwrap(),
            1.0
        );
    }

    #[test]
    fn metric_ids() {
        assert_eq!(
            "m2".parse::<VisibilityMetric>().unwrap(),
            VisibilityMetric::VisibleTime
        );
        assert!(matches!(
            "m4".parse::<VisibilityMetric>(),
            Err(ContestError::Usage(_))
        ));
        assert!(VisibilityConfig::new(0).is_err());
    }

    #[test]
    fn malicious_reduction() {
        assert_eq!(reduce_malicious(&[0.2, 1.5, 0.9]).unwrap(), 1.5);
        assert_eq!(reduce_malicious(&[0.0]).unwrap(), 0.0);
        assert_eq!(reduce_malicious(&[0.7]).unwrap(), 0.7);
        assert!(matches!(reduce_malicious(&[]), Err(ContestError::Usage(_))));
    }

    proptest! {
        #[test]
        fn visible_time_is_monotone_and_capped(d in 0.0f64..1.0, dd in 0.0f64..0.1, k in 1u32..50) {
            let cfg = VisibilityConfig::new(k).unwrap();
            let cfg_next = VisibilityConfig::new(k + 1).unwrap();
            let m = share_to_metric(VisibilityMetric::VisibleTime, d, cfg).unwrap();
            let d2 = (d + dd).min(1.0);
            prop_assert!(share_to_metric(VisibilityMetric::VisibleTime, d2, cfg).unwrap() >= m);
            prop_assert!(share_to_metric(VisibilityMetric::VisibleTime, d, cfg_next).unwrap() >= m);
            prop_assert!(m <= 1.0f64.min(k as f64 * d) + 1e-15);
        }
    }
}
