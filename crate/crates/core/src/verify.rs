//! End-to-end verification checks with pinned sample sizes and tolerances.
//!
//! Each check is self-contained and deterministic. [`run_all`] runs every one
//! and is what both the `acceptance` test target and `contest verify` use.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{
    lb_su_mal_over_max, solve_vtilde, su_competition_floor, sv_competition_floor,
    ub_sv_mal_over_max, vtilde_residual, BoundReport,
};
use crate::closed_form::{homogeneous_measures, solve_linear_ne};
use crate::error::{ContestError, Result};
use crate::harness::generate::{cell_seed, generate_linear_instance, generate_log_instance};
use crate::harness::sweep::{evaluate_instance, run_sweep, SweepConfig, SweepOutput};
use crate::harness::worst_case::{worst_case_instance, WorstCaseKind};
use crate::instance::ContestInstance;
use crate::iterative::{solve_general_ne, solve_general_ne_from, SolverConfig};
use crate::measures::{agent_payoff, compute_measures};

pub const KKT_TOLERANCE: f64 = 1e-10;
pub const DEVIATION_GAIN_TOLERANCE: f64 = 1e-6;
pub const DEVIATION_GRID_POINTS: usize = 10_000;
pub const CROSS_SOLVER_TOLERANCE: f64 = 1e-6;
pub const ENVELOPE_FLATNESS: f64 = 2e-3;
pub const TIGHTNESS_TOLERANCE: f64 = 1e-6;
pub const ASYMPTOTIC_TOLERANCE: f64 = 1e-4;
pub const GOLDEN_TOLERANCE: f64 = 1e-10;
pub const COST_SCALING_TOLERANCE: f64 = 1e-10;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
pub const UNIQUENESS_TOLERANCE: f64 = 1e-7;

const SEED: u64 = 0x5EED_2024;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{status}] {:>2} {}: {}",
            self.id, self.name, self.detail
        )
    }
}

fn outcome(id: u8, name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        id,
        name,
        passed,
        detail,
    }
}

fn random_linear(n: usize, count: usize, stream: u64) -> Vec<ContestInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(SEED, stream, u64::MAX));
    (0..count)
        .map(|k| {
            let theta = 3.0 * rng.random::<f64>();
            generate_linear_instance(n, cell_seed(SEED, stream, k as u64))
                .with_theta(theta)
                .expect("theta in [0, 3)")
        })
        .collect()
}

/// Largest payoff gain of any single player over a uniform grid of
/// deviations on `[0, 4z]`.
pub fn max_deviation_gain(instance: &ContestInstance, rates: &[f64], points: usize) -> f64 {
    let z: f64 = rates.iter().sum();
    let players = if instance.malicious_present() { 0 } else { 1 };
    let mut worst = f64::NEG_INFINITY;
    let mut trial = rates.to_vec();
    for i in players..rates.len() {
        let base = agent_payoff(instance, rates, i);
        for k in 0..=points {
            trial[i] = 4.0 * z * k as f64 / points as f64;
            worst = worst.max(agent_payoff(instance, &trial, i) - base);
        }
        trial[i] = rates[i];
    }
    worst
}

/// Closed-form equilibria satisfy the first-order conditions and survive a
/// grid search over unilateral deviations.
pub fn check_closed_form_validity() -> CheckOutcome {
    let name = "closed-form equilibrium validity";
    let mut worst_kkt: f64 = 0.0;
    let mut worst_gain = f64::NEG_INFINITY;
    for inst in random_linear(5, 1000, 1) {
        let ne = match solve_linear_ne(&inst) {
            Ok(ne) => ne,
            Err(e) => return outcome(1, name, false, format!("solver error: {e}")),
        };
        worst_kkt = worst_kkt.max(ne.max_kkt_violation(&inst));
        worst_gain = worst_gain.max(max_deviation_gain(&inst, ne.rates(), DEVIATION_GRID_POINTS));
    }
    outcome(
        1,
        name,
        worst_kkt < KKT_TOLERANCE && worst_gain < DEVIATION_GAIN_TOLERANCE,
        format!(
            "1000 instances, max KKT residual {worst_kkt:.3e}, max deviation gain {worst_gain:.3e}"
        ),
    )
}

/// Best-response dynamics reproduce the closed form on linear instances.
pub fn check_cross_solver() -> CheckOutcome {
    let name = "iterative vs closed-form agreement";
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for inst in random_linear(5, 500, 2) {
        let exact = solve_linear_ne(&inst);
        let approx = solve_general_ne(&inst, &cfg);
        match (exact, approx) {
            (Ok(a), Ok(b)) => {
                let d = a
                    .rates()
                    .iter()
                    .zip(b.rates())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(d);
            }
            (Err(e), _) | (_, Err(e)) => {
                return outcome(2, name, false, format!("solver error: {e}"))
            }
        }
    }
    outcome(
        2,
        name,
        worst < CROSS_SOLVER_TOLERANCE,
        format!("500 instances, max rate difference {worst:.3e}"),
    )
}

/// The linear sweep behind the bound-envelope and regime checks.
pub fn envelope_sweep() -> Result<SweepOutput> {
    run_sweep(&SweepConfig::linear(5, 3.0, 0.05, 1000, SEED))
}

pub fn check_bound_envelope(sweep: &SweepOutput) -> CheckOutcome {
    let s = &sweep.summary;
    outcome(
        3,
        "bound envelope on linear sweep",
        s.total_violations() == 0 && s.nonconverged == 0,
        format!(
            "{} records ({} probes), violations {:?}, non-converged {}, advisory ub2 violations {} (logged only)",
            s.records, s.probes, s.violations, s.nonconverged, s.advisory_violations
        ),
    )
}

/// Shape of the B1 envelope: flat minimum then decreasing, maximum 1 until
/// the homogeneous attacker threshold.
pub fn check_regime_features(sweep: &SweepOutput) -> CheckOutcome {
    let env = &sweep.summary.envelopes;
    let min1 = |e: &crate::harness::ThetaEnvelope| e.min[0].unwrap_or(f64::NAN);
    let max1 = |e: &crate::harness::ThetaEnvelope| e.max[0].unwrap_or(f64::NAN);

    let flat: Vec<f64> = env.iter().filter(|e| e.theta <= 0.28).map(min1).collect();
    let spread = flat.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - flat.iter().cloned().fold(f64::INFINITY, f64::min);
    let tail: Vec<f64> = env.iter().filter(|e| e.theta >= 0.30).map(min1).collect();
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    let max_low = env
        .iter()
        .filter(|e| e.theta < 0.8)
        .map(|e| (max1(e) - 1.0).abs())
        .fold(0.0, f64::max);
    let max_high = env
        .iter()
        .filter(|e| e.theta > 0.81)
        .map(max1)
        .fold(f64::NEG_INFINITY, f64::max);

    let passed =
        spread <= ENVELOPE_FLATNESS && decreasing && max_low <= 1e-9 && max_high < 1.0 - 1e-9;
    outcome(
        4,
        "B1 regime features",
        passed,
        format!(
            "min spread for theta<=0.28 {spread:.3e}, min strictly decreasing from 0.30: {decreasing}, \
             |max-1| for theta<0.8 {max_low:.3e}, largest max for theta>0.81 {max_high:.6}"
        ),
    )
}

fn ratios_of(instance: &ContestInstance) -> Result<[Option<f64>; 6]> {
    let bounds = BoundReport::new(instance.n(), instance.theta())?;
    let data = evaluate_instance(instance, &bounds, &SolverConfig::default())?
        .ok_or_else(|| ContestError::Domain("closed form cannot fail to converge".into()))?;
    Ok(data.ratios)
}

/// The tight constructions reach the lower bounds.
pub fn check_tightness() -> CheckOutcome {
    let name = "tightness constructions";
    let run = || -> Result<(f64, String)> {
        let mut worst: f64 = 0.0;
        let mut notes = Vec::new();
        for (kind, theta) in [
            (WorstCaseKind::SuMaxBranch, 0.1),
            (WorstCaseKind::SuThetaBranch, 1.0),
        ] {
            let r1 = ratios_of(&worst_case_instance(kind, 5, theta)?)?[0].unwrap();
            let gap = (r1 - lb_su_mal_over_max(5, theta)).abs();
            worst = worst.max(gap);
            notes.push(format!("{kind} gap {gap:.1e}"));
        }
        let mut sv_gap: f64 = 0.0;
        for n in 2..=10 {
            let r3 = ratios_of(&worst_case_instance(WorstCaseKind::SvNomal, n, 0.0)?)?[2].unwrap();
            sv_gap = sv_gap.max((r3 - sv_competition_floor(n)).abs());
        }
        worst = worst.max(sv_gap);
        notes.push(format!("sv_nomal N=2..10 gap {sv_gap:.1e}"));
        Ok((worst, notes.join(", ")))
    };
    let asymptotic = || -> Result<f64> {
        let r1 = ratios_of(&worst_case_instance(
            WorstCaseKind::SuMaxBranch,
            10_000,
            1e-3,
        )?)?[0]
            .unwrap();
        Ok(r1)
    };
    match (run(), asymptotic()) {
        (Ok((worst, notes)), Ok(r1)) => outcome(
            5,
            name,
            worst < TIGHTNESS_TOLERANCE && (r1 - 0.75).abs() < ASYMPTOTIC_TOLERANCE,
            format!("{notes}; N=10000 su_max_branch B1 = {r1:.6}"),
        ),
        (Err(e), _) | (_, Err(e)) => outcome(5, name, false, format!("error: {e}")),
    }
}

/// Homogeneous agents with partial targeting against the closed-form expressions.
pub fn check_homogeneous_targeting() -> CheckOutcome {
    let name = "homogeneous partial targeting";
    let (n, theta) = (20usize, 2.0f64);
    let nf = n as f64;
    let run = || -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let mut worst: f64 = 0.0;
        let mut sw = Vec::new();
        let mut sv = Vec::new();
        for m in 1..=n {
            let inst = ContestInstance::linear(&vec![1.0; n], theta)?
                .with_targeting((0..n).map(|i| i < m).collect())?;
            let ne = solve_linear_ne(&inst)?;
            let meas = compute_measures(&inst, &ne.profile)?;
            let mt = m as f64 * theta;
            if mt > nf - 1.0 {
                let q = (1.0 + mt) * (1.0 + mt);
                let expected = [
                    (ne.rates()[1..]
                        .iter()
                        .fold(0.0f64, |a, x| a.max((x - mt / q).abs()))),
                    (ne.rates()[0] - (mt + mt * mt - nf * mt) / q).abs(),
                    (meas.su - nf / (1.0 + mt)).abs(),
                    (meas.sw - mt / (1.0 + mt)).abs(),
                    (meas.sv - nf / q).abs(),
                    (meas.v0 - (-2.0 * mt / (1.0 + mt) + nf * mt / q)).abs(),
                ];
                let module = homogeneous_measures(n, m, theta)?;
                worst = expected
                    .into_iter()
                    .chain([
                        (module.su - meas.su).abs(),
                        (module.v0 - meas.v0).abs(),
                        (module.sw - meas.sw).abs(),
                    ])
                    .fold(worst, f64::max);
            } else {
                // The attacker stays out: rates are those of the game without it.
                let x = (nf - 1.0) / (nf * nf);
                worst = worst.max(ne.rates()[0]);
                worst = ne.rates()[1..]
                    .iter()
                    .fold(worst, |a, r| a.max((r - x).abs()));
            }
            sw.push(meas.sw);
            sv.push(meas.sv);
        }
        Ok((worst, sw, sv))
    };
    match run() {
        Ok((worst, sw, sv)) => {
            // From M = 9 the attacker's entry at M = 10 onward makes both trends strict.
            let strict = |v: &[f64], up: bool| {
                v[8..]
                    .windows(2)
                    .all(|w| if up { w[1] > w[0] } else { w[1] < w[0] })
            };
            let weak = |v: &[f64], up: bool| {
                v.windows(2)
                    .all(|w| if up { w[1] >= w[0] } else { w[1] <= w[0] })
            };
            let trends =
                strict(&sw, true) && strict(&sv, false) && weak(&sw, true) && weak(&sv, false);
            outcome(
                6,
                name,
                worst < GOLDEN_TOLERANCE && trends,
                format!(
                    "N=20, theta=2, M=1..20: max deviation from closed expressions {worst:.3e}; \
                     SW increasing / SV decreasing (strict for M>=9, constant for M<=9 where the attacker is inactive): {trends}"
                ),
            )
        }
        Err(e) => outcome(6, name, false, format!("error: {e}")),
    }
}

/// Logarithmic sweep; lower bounds B1-B4 derived for linear utilities must hold.
pub fn check_log_dominance() -> CheckOutcome {
    let name = "logarithmic utilities above linear lower bounds";
    match run_sweep(&SweepConfig::log(5, 3.0, 0.05, 1000, SEED ^ 0x10)) {
        Ok(out) => {
            let s = &out.summary;
            outcome(
                7,
                name,
                s.total_violations() == 0 && s.nonconverged == 0,
                format!(
                    "{} records on theta = 0, 0.05, .., 3, violations {:?}, non-converged {}",
                    s.records, s.violations, s.nonconverged
                ),
            )
        }
        Err(e) => outcome(7, name, false, format!("error: {e}")),
    }
}

/// Rates scale as `1/c`; revenue does not depend on `c`.
pub fn check_cost_scaling() -> CheckOutcome {
    let name = "price scaling";
    let run = || -> Result<(f64, f64)> {
        let (mut rate_err, mut sw_err): (f64, f64) = (0.0, 0.0);
        for inst in random_linear(5, 100, 8) {
            let base = solve_linear_ne(&inst)?;
            let base_sw = compute_measures(&inst, &base.profile)?.sw;
            for c in [0.5, 1.0, 2.0] {
                let scaled = inst.with_cost(c)?;
                let ne = solve_linear_ne(&scaled)?;
                for (x, x1) in ne.rates().iter().zip(base.rates()) {
                    let expected = x1 / c;
                    if expected > 0.0 {
                        rate_err = rate_err.max(((x - expected) / expected).abs());
                    } else {
                        rate_err = rate_err.max(x.abs());
                    }
                }
                sw_err = sw_err.max((compute_measures(&scaled, &ne.profile)?.sw - base_sw).abs());
            }
        }
        Ok((rate_err, sw_err))
    };
    match run() {
        Ok((r, s)) => outcome(
            8,
            name,
            r < COST_SCALING_TOLERANCE && s < COST_SCALING_TOLERANCE,
            format!("c in {{0.5, 1, 2}}, 100 instances: max relative rate error {r:.3e}, max revenue change {s:.3e}"),
        ),
        Err(e) => outcome(8, name, false, format!("error: {e}")),
    }
}

/// Piecewise bound expressions against independent forms, and the cubic root.
pub fn check_identities() -> CheckOutcome {
    let steps = 3000;
    let mut su_err: f64 = 0.0;
    let mut sv_err: f64 = 0.0;
    for k in 0..=steps {
        let theta = k as f64 * 1e-3;
        for n in 2..=10usize {
            let nf = n as f64;
            let cross = 1.0 / (((nf / (nf - 1.0)).sqrt() + 1.0).powi(2) - 1.0);
            let piecewise = if theta <= cross {
                su_competition_floor(n)
            } else {
                1.0 / (1.0 + theta)
            };
            su_err = su_err.max((piecewise - lb_su_mal_over_max(n, theta)).abs());
        }
        let oracle = (1..=10usize)
            .flat_map(|n| {
                let nf = n as f64;
                let edge = (nf - 1.0) / nf;
                [
                    (theta <= edge).then_some(1.0 / nf),
                    (theta >= edge).then(|| nf / ((1.0 + nf * theta) * (1.0 + nf * theta))),
                ]
            })
            .flatten()
            .fold(f64::NEG_INFINITY, f64::max);
        sv_err = sv_err.max((oracle - ub_sv_mal_over_max(theta)).abs());
    }
    let mut residual: f64 = 0.0;
    let mut root_error = None;
    for n in 1..=50 {
        for j in 1..=30 {
            let theta = j as f64 / 10.0;
            match solve_vtilde(n, theta) {
                Ok(v) => residual = residual.max(vtilde_residual(n, theta, v).abs()),
                Err(e) => root_error = Some(e.to_string()),
            }
        }
    }
    let passed = su_err <= IDENTITY_TOLERANCE
        && sv_err <= IDENTITY_TOLERANCE
        && residual < 1e-12
        && root_error.is_none();
    outcome(
        9,
        "piecewise bounds vs independent forms",
        passed,
        format!(
            "B1 lower piecewise vs min-form {su_err:.1e}, B3 upper vs candidate max {sv_err:.1e}, \
             cubic residual {residual:.1e} (n<=50, theta=0.1..3){}",
            root_error
                .map(|e| format!(", error: {e}"))
                .unwrap_or_default()
        ),
    )
}

/// Best-response dynamics from random starts reach the same equilibrium.
pub fn check_uniqueness() -> CheckOutcome {
    let name = "uniqueness from random starts";
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(SEED, 10, u64::MAX));
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let theta = 3.0 * rng.random::<f64>();
        let inst = generate_log_instance(5, cell_seed(SEED, 10, k))
            .with_theta(theta)
            .expect("theta in [0, 3)");
        let mut reference: Option<Vec<f64>> = None;
        for _ in 0..20 {
            let start: Vec<f64> = (0..=inst.n()).map(|_| 1.0 - rng.random::<f64>()).collect();
            match solve_general_ne_from(&inst, &cfg, &start) {
                Ok(ne) => match &reference {
                    None => reference = Some(ne.rates().to_vec()),
                    Some(r) => {
                        let d = r
                            .iter()
                            .zip(ne.rates())
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        worst = worst.max(d);
                    }
                },
                Err(e) => return outcome(10, name, false, format!("instance {k}: {e}")),
            }
        }
    }
    outcome(
        10,
        name,
        worst < UNIQUENESS_TOLERANCE,
        format!("50 log instances x 20 starts, max spread {worst:.3e}"),
    )
}

/// Runs every check in order.
pub fn run_all() -> Vec<CheckOutcome> {
    let mut out = vec![check_closed_form_validity(), check_cross_solver()];
    match envelope_sweep() {
        Ok(sweep) => {
            out.push(check_bound_envelope(&sweep));
            out.push(check_regime_features(&sweep));
        }
        Err(e) => {
            out.push(outcome(
                3,
                "bound envelope on linear sweep",
                false,
                format!("error: {e}"),
            ));
            out.push(outcome(
                4,
                "B1 regime features",
                false,
                format!("error: {e}"),
            ));
        }
    }
    out.extend([
        check_tightness(),
        check_homogeneous_targeting(),
        check_log_dominance(),
        check_cost_scaling(),
        check_identities(),
        check_uniqueness(),
    ]);
    out
}
