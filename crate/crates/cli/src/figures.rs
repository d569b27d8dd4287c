//! Hardcoded sweep settings behind each figure.

use std::fmt::Write as _;

use contest_core::harness::csv::fmt_f64;
use contest_core::harness::SweepConfig;
use contest_core::{
    compute_measures, homogeneous_measures, solve_linear_ne, ContestInstance, Result,
};

pub const FIGURES: std::ops::RangeInclusive<u8> = 2..=13;
pub const HOMOGENEOUS_N: usize = 20;
pub const HOMOGENEOUS_THETA: f64 = 2.0;

pub const HOMOGENEOUS_HEADER: &str =
    "M,N,theta,attacker_active,x_benign,x_malicious,su,sv,sw,v0,v0_closed_form";

/// Which ratio columns a figure plots.
pub fn ratio_columns(figure: u8) -> &'static [&'static str] {
    match figure {
        2 | 10 => &["r1"],
        3 | 11 => &["r2"],
        4 | 12 => &["r3"],
        5 | 13 => &["r4"],
        6 => &["r5"],
        7 => &["r6"],
        8 => &["r1", "r2", "r3", "r4", "r5", "r6"],
        _ => &["v0"],
    }
}

/// Sweep behind figures 2-8 and 10-13; `None` for the homogeneous figure 9.
pub fn sweep_config(figure: u8, instances: usize, seed: u64) -> Option<SweepConfig> {
    match figure {
        2..=7 => Some(SweepConfig::linear(5, 3.0, 0.05, instances, seed)),
        8 => Some(SweepConfig::linear(100, 3.0, 0.05, instances, seed)),
        10..=13 => Some(SweepConfig::log(5, 3.0, 0.05, instances, seed)),
        _ => None,
    }
}

/// One row per targeted count `M = 1..=20` for 20 identical agents at `theta = 2`.
/// The closed-form column is empty where the attacker stays out.
pub fn homogeneous_csv() -> Result<String> {
    let (n, theta) = (HOMOGENEOUS_N, HOMOGENEOUS_THETA);
    let mut out = String::new();
    writeln!(out, "{HOMOGENEOUS_HEADER}").unwrap();
    for m in 1..=n {
        let inst = ContestInstance::linear(&vec![1.0; n], theta)?
            .with_targeting((0..n).map(|i| i < m).collect())?;
        let ne = solve_linear_ne(&inst)?;
        let meas = compute_measures(&inst, &ne.profile)?;
        let closed = homogeneous_measures(n, m, theta)
            .ok()
            .map(|h| fmt_f64(h.v0))
            .unwrap_or_default();
        writeln!(
            out,
            "{m},{n},{},{},{},{},{},{},{},{},{closed}",
            fmt_f64(theta),
            u8::from(ne.malicious_active),
            fmt_f64(ne.rates()[1]),
            fmt_f64(ne.rates()[0]),
            fmt_f64(meas.su),
            fmt_f64(meas.sv),
            fmt_f64(meas.sw),
            fmt_f64(meas.v0),
        )
        .unwrap();
    }
    Ok(out)
}
