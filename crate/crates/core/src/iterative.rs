//! Best-response dynamics for general concave utilities.
//!
//! Each sweep updates benign agents in stored order, then the malicious
//! agent, each moving a damped step toward its exact best response
//! (Gauss-Seidel). Best responses come from bisection on the player's
//! strictly decreasing marginal payoff. The damping factor is halved whenever
//! the updates stop contracting, which happens when one agent's best response
//! is very sensitive to the others' rates.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{EquilibriumResult, SolveMethod};
use crate::error::{ContestError, Result};
use crate::instance::ContestInstance;
use crate::measures::{kkt_violation, marginal_payoffs};
use crate::profile::StrategyProfile;
use crate::utility::{satisfies_p1, Utility};

/// Sweeps with a zero best response before an agent is frozen at zero.
const FREEZE_AFTER: usize = 50;
/// Aggregate rates below this count as a collapse to the degenerate profile.
const COLLAPSE_RATE: f64 = 1e-12;
/// Restarts from a shrunken start after a collapse.
const MAX_RESTARTS: usize = 40;
const RESTART_SHRINK: f64 = 0.25;
/// Sweeps per window of the oscillation check.
const DAMPING_WINDOW: usize = 50;
/// A window whose largest update exceeds this fraction of the previous
/// window's halves the damping factor.
const STALL_RATIO: f64 = 0.9;
const MIN_DAMPING: f64 = 1e-4;
const MAX_BISECTION_STEPS: usize = 400;
const MAX_BRACKET_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Convergence requires the largest per-sweep rate change below this.
    pub rate_tolerance: f64,
    /// Convergence requires every KKT residual below this.
    pub foc_tolerance: f64,
    pub max_sweeps: usize,
    /// Step `x <- (1 - damping) x + damping * BR`, in `(0, 1]`.
    pub damping: f64,
    pub initial_rate: f64,
    pub bracket_growth: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rate_tolerance: 1e-9,
            foc_tolerance: 1e-8,
            max_sweeps: 100_000,
            damping: 0.5,
            initial_rate: 0.1,
            bracket_growth: 2.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate_tolerance > 0.0 && self.foc_tolerance > 0.0) {
            return Err(ContestError::Usage(
                "solver tolerances must be positive".into(),
            ));
        }
        if self.max_sweeps == 0 {
            return Err(ContestError::Usage("max_sweeps must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(ContestError::Usage(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.initial_rate > 0.0 && self.initial_rate.is_finite()) {
            return Err(ContestError::Usage("initial_rate must be positive".into()));
        }
        if !(self.bracket_growth > 1.0) {
            return Err(ContestError::Usage("bracket_growth must exceed 1".into()));
        }
        Ok(())
    }
}

/// Root of a strictly decreasing `f` with `f(0) > 0`: grows the bracket
/// geometrically from `start`, then bisects to floating-point resolution.
fn decreasing_root(f: impl Fn(f64) -> f64, start: f64, growth: f64) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = start.max(f64::MIN_POSITIVE);
    let mut steps = 0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= growth;
        steps += 1;
        if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
            return Err(ContestError::Domain(
                "could not bracket the best response".into(),
            ));
        }
    }
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rate maximizing `U(x / (x + z_minus)) - c x`.
///
/// Zero when the marginal payoff at `x = 0`, `U'(0) / z_minus - c`, is not positive.
pub fn best_response_benign<U: Utility>(utility: &U, z_minus: f64, cost: f64) -> Result<f64> {
    best_response_benign_with(
        utility,
        z_minus,
        cost,
        SolverConfig::default().bracket_growth,
    )
}

fn best_response_benign_with<U: Utility>(
    utility: &U,
    z_minus: f64,
    cost: f64,
    growth: f64,
) -> Result<f64> {
    if !(z_minus > 0.0 && z_minus.is_finite()) {
        return Err(ContestError::Domain(format!(
            "best response needs a positive rate from the other agents, got {z_minus}"
        )));
    }
    if !(cost > 0.0) {
        return Err(ContestError::Domain(format!(
            "cost must be positive, got {cost}"
        )));
    }
    let foc = |x: f64| {
        let z = x + z_minus;
        utility.derivative_unchecked(x / z) * z_minus / (z * z) - cost
    };
    if foc(0.0) <= 0.0 {
        return Ok(0.0);
    }
    decreasing_root(foc, z_minus, growth)
}

/// Attacker rate maximizing `-theta * sum_targeted U_i(x_i / z) - c x_0`
/// against fixed benign rates `benign_rates = (x_1, ..., x_N)`.
pub fn best_response_malicious(
    instance: &ContestInstance,
    benign_rates: &[f64],
    cost: f64,
) -> Result<f64> {
    best_response_malicious_with(
        instance,
        benign_rates,
        cost,
        SolverConfig::default().bracket_growth,
    )
}

fn best_response_malicious_with(
    instance: &ContestInstance,
    benign_rates: &[f64],
    cost: f64,
    growth: f64,
) -> Result<f64> {
    if benign_rates.len() != instance.n() {
        return Err(ContestError::Structural(format!(
            "expected {} benign rates, got {}",
            instance.n(),
            benign_rates.len()
        )));
    }
    let benign_total: f64 = benign_rates.iter().sum();
    if !(benign_total > 0.0) {
        return Err(ContestError::Domain(
            "the attacker's best response needs some benign traffic".into(),
        ));
    }
    if !instance.malicious_in_play() {
        return Ok(0.0);
    }
    let theta = instance.theta();
    let foc = |x0: f64| {
        let z = x0 + benign_total;
        let gain: f64 = benign_rates
            .iter()
            .enumerate()
            .filter(|(j, _)| instance.is_targeted(j + 1))
            .map(|(j, &x)| instance.utility(j + 1).derivative_unchecked(x / z) * x)
            .sum();
        theta * gain / (z * z) - cost
    };
    if foc(0.0) <= 0.0 {
        return Ok(0.0);
    }
    decreasing_root(foc, benign_total, growth)
}

/// Equilibrium by damped best-response dynamics from the default start
/// (`initial_rate` for every player in the game).
pub fn solve_general_ne(
    instance: &ContestInstance,
    config: &SolverConfig,
) -> Result<EquilibriumResult> {
    let mut start = vec![config.initial_rate; instance.n() + 1];
    if !instance.malicious_in_play() {
        start[0] = 0.0;
    }
    solve_general_ne_from(instance, config, &start)
}

/// Equilibrium by damped best-response dynamics from an explicit starting profile.
pub fn solve_general_ne_from(
    instance: &ContestInstance,
    config: &SolverConfig,
    start: &[f64],
) -> Result<EquilibriumResult> {
    config.validate()?;
    let n = instance.n();
    if start.len() != n + 1 {
        return Err(ContestError::Structural(format!(
            "start profile has {} rates, expected {}",
            start.len(),
            n + 1
        )));
    }
    if let Some(i) = (1..=n).find(|&i| !satisfies_p1(instance.utility(i))) {
        return Err(ContestError::Domain(format!(
            "utility of agent {i} fails the numerical increasing/concave check"
        )));
    }
    let attacker = instance.malicious_in_play();
    if n == 1 && !attacker {
        let profile = StrategyProfile::degenerate(1, 1)?;
        return EquilibriumResult::from_profile(instance, profile, SolveMethod::BestResponse, 0);
    }

    let c = instance.cost();
    let mut lambda = config.damping;
    let growth = config.bracket_growth;
    let mut x: Vec<f64> = start.iter().map(|v| v.max(0.0)).collect();
    if !attacker {
        x[0] = 0.0;
    }
    if x[1..].iter().all(|&v| v == 0.0) {
        x[1..].iter_mut().for_each(|v| *v = config.initial_rate);
    }
    let mut zero_streak = vec![0usize; n + 1];
    let mut frozen = vec![false; n + 1];
    let mut last_br = vec![f64::NAN; n + 1];
    let mut total: f64 = x.iter().sum();
    let mut restarts = 0;
    let mut restart_rate = config.initial_rate;
    let (mut window_max, mut previous_window_max) = (0.0f64, f64::INFINITY);

    for sweep in 1..=config.max_sweeps {
        let mut max_change: f64 = 0.0;
        for i in 1..=n {
            if frozen[i] {
                continue;
            }
            let z_minus = total - x[i];
            let br = if z_minus > 0.0 {
                best_response_benign_with(instance.utility(i), z_minus, c, growth)?
            } else {
                // Alone in the contest any smaller rate pays more, but zero
                // forfeits the share; shrink without reaching it.
                0.5 * x[i]
            };
            let updated = step(x[i], br, lambda, &mut zero_streak[i], &mut frozen[i]);
            max_change = max_change.max((updated - x[i]).abs());
            total += updated - x[i];
            x[i] = updated;
            last_br[i] = br;
        }
        if attacker && !frozen[0] {
            let br = if x[1..].iter().any(|&v| v > 0.0) {
                best_response_malicious_with(instance, &x[1..], c, growth)?
            } else {
                0.0
            };
            let updated = step(x[0], br, lambda, &mut zero_streak[0], &mut frozen[0]);
            max_change = max_change.max((updated - x[0]).abs());
            x[0] = updated;
            last_br[0] = br;
        }
        // Recompute to keep the running sum from drifting.
        total = x.iter().sum();

        if total < COLLAPSE_RATE {
            // Usually an overshoot from a start far above the equilibrium
            // scale; retry from smaller rates and shorter steps before
            // accepting the collapse.
            if restarts < MAX_RESTARTS {
                restarts += 1;
                restart_rate *= RESTART_SHRINK;
                lambda = (0.5 * lambda).max(MIN_DAMPING);
                x.iter_mut().for_each(|v| *v = restart_rate);
                if !attacker {
                    x[0] = 0.0;
                }
                total = x.iter().sum();
                zero_streak.iter_mut().for_each(|s| *s = 0);
                frozen.iter_mut().for_each(|f| *f = false);
                continue;
            }
            let holder = (1..=n).max_by(|&a, &b| x[a].total_cmp(&x[b])).unwrap_or(1);
            let profile = StrategyProfile::degenerate(n, holder)?;
            return EquilibriumResult::from_profile(
                instance,
                profile,
                SolveMethod::BestResponse,
                sweep,
            );
        }

        // Updates that stop shrinking over a whole window signal an
        // oscillation; a smaller step restores contraction.
        window_max = window_max.max(max_change);
        if sweep % DAMPING_WINDOW == 0 {
            if window_max > STALL_RATIO * previous_window_max && lambda > MIN_DAMPING {
                lambda = (0.5 * lambda).max(MIN_DAMPING);
            }
            previous_window_max = window_max;
            window_max = 0.0;
        }

        if max_change < config.rate_tolerance {
            // Agents decaying toward a zero best response are snapped to zero
            // before the KKT check.
            let mut candidate = x.clone();
            for i in 0..=n {
                if last_br[i] == 0.0 {
                    candidate[i] = 0.0;
                }
            }
            let profile = StrategyProfile::new(candidate.clone())?;
            let marginals = marginal_payoffs(instance, &profile)?;
            if kkt_violation(instance, &profile, &marginals) < config.foc_tolerance {
                return EquilibriumResult::from_profile(
                    instance,
                    profile,
                    SolveMethod::BestResponse,
                    sweep,
                );
            }
            // Re-check frozen agents on the next sweeps.
            frozen.iter_mut().for_each(|f| *f = false);
            zero_streak.iter_mut().for_each(|s| *s = 0);
        }
    }

    let profile = StrategyProfile::new(x)?;
    let residuals = marginal_payoffs(instance, &profile)?;
    Err(ContestError::NonConvergence {
        sweeps: config.max_sweeps,
        max_residual: kkt_violation(instance, &profile, &residuals),
        last_profile: Box::new(profile),
        residuals,
    })
}

fn step(current: f64, br: f64, lambda: f64, zero_streak: &mut usize, frozen: &mut bool) -> f64 {
    if br == 0.0 {
        *zero_streak += 1;
        if *zero_streak >= FREEZE_AFTER {
            *frozen = true;
            return 0.0;
        }
    } else {
        *zero_streak = 0;
    }
    (1.0 - lambda) * current + lambda * br
}
