//! Closed-form efficiency bounds.
//!
//! Ratios, all measured for the benign agents or the platform:
//!
//! | ratio | meaning |
//! |-------|---------|
//! | B1 | `SU_mal / SU_max` |
//! | B2 | `SU_mal / SU_nom` |
//! | B3 | `SV_mal / SV_max` |
//! | B4 | `SV_mal / SV_nom` |
//! | B5 | `SW_mal / SW_max` |
//! | B6 | `SW_mal / SW_nom` |
//!
//! `mal` is the equilibrium with the attacker, `nom` without it, `max` the
//! social optimum without it. Lower bounds on B1-B4 hold for any concave
//! utilities; the remaining bounds are for linear utilities.

use serde::Serialize;

use crate::error::{ContestError, Result};

/// Worst-case B1 when the attacker stays out: `1 - (N-1)(sqrt(N) - sqrt(N-1))^2`.
pub fn su_competition_floor(n: usize) -> f64 {
    let nf = n as f64;
    let gap = nf.sqrt() - (nf - 1.0).sqrt();
    1.0 - (nf - 1.0) * gap * gap
}

/// Willingness factor where the two branches of the B1 lower bound cross.
pub fn su_branch_crossover(n: usize) -> f64 {
    1.0 / su_competition_floor(n) - 1.0
}

/// Lower bound on B1: `min{1/(1+theta), 1 - (N-1)(sqrt(N) - sqrt(N-1))^2}`.
pub fn lb_su_mal_over_max(n: usize, theta: f64) -> f64 {
    (1.0 / (1.0 + theta)).min(su_competition_floor(n))
}

/// Upper bound on B1: `1` up to `theta = (N-1)/N`, then `N / (1 + N theta)`.
pub fn ub_su_mal_over_max(n: usize, theta: f64) -> f64 {
    let nf = n as f64;
    if theta <= (nf - 1.0) / nf {
        1.0
    } else {
        nf / (1.0 + nf * theta)
    }
}

/// Lower bound on B2: `1 / (1 + theta)`.
pub fn lb_su_mal_over_nom(theta: f64) -> f64 {
    1.0 / (1.0 + theta)
}

/// Lower bound on B4: `1 / (1 + theta)^2`.
pub fn lb_sv_mal_over_nom(theta: f64) -> f64 {
    1.0 / ((1.0 + theta) * (1.0 + theta))
}

fn vtilde_poly(n: usize, theta: f64, v: f64) -> f64 {
    let nf = n as f64;
    (2.0 * (nf - 1.0) * v + (3.0 - 2.0 * nf + 1.0 / (theta * theta))) * v * v - 1.0
}

/// Root in `(0, 1)` of `2(n-1) v^3 + (3 - 2n + theta^-2) v^2 - 1`.
///
/// The cubic is `-1` at 0 and `theta^-2` at 1, so bisection on `[0, 1]`
/// always brackets the root.
pub fn solve_vtilde(n: usize, theta: f64) -> Result<f64> {
    if n == 0 {
        return Err(ContestError::Usage("n must be at least 1".into()));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(ContestError::Domain(format!(
            "theta must be positive, got {theta}"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if vtilde_poly(n, theta, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Return the endpoint with the smaller residual.
    if vtilde_poly(n, theta, lo).abs() <= vtilde_poly(n, theta, hi).abs() {
        Ok(lo)
    } else {
        Ok(hi)
    }
}

/// Residual of the cubic at `v`; exposed for verification.
pub fn vtilde_residual(n: usize, theta: f64, v: f64) -> f64 {
    vtilde_poly(n, theta, v)
}

/// Worst B3 when the attacker stays out and all `N` agents compete.
pub fn sv_competition_floor(n: usize) -> f64 {
    let nf = n as f64;
    let root = (nf * nf - 1.0).sqrt();
    1.0 + (nf - 1.0) * (root - (nf + 1.0)) / (1.0 + 0.5 * (root + (nf - 1.0)))
}

/// Worst B3 when the attacker faces `n` active agents, the weakest `n - 1`
/// sharing the valuation `vtilde`.
pub fn sv_attacker_candidate(n: usize, theta: f64) -> Result<f64> {
    let v = solve_vtilde(n, theta)?;
    let nf = n as f64;
    let top = 1.0 + (nf - 1.0) * v;
    let first = (1.0 - nf * theta) * top / (1.0 + nf * theta);
    let spend = theta * top / (1.0 + nf * theta);
    Ok(first + (1.0 + (nf - 1.0) / v) * spend * spend)
}

/// Lower bound on B3: the minimum of the no-attacker candidate and the
/// attacker candidates for `n = 1..=N`. With `theta = 0` only the first applies.
pub fn lb_sv_mal_over_max(n: usize, theta: f64) -> Result<f64> {
    if n == 0 {
        return Err(ContestError::Usage("N must be at least 1".into()));
    }
    let mut best = sv_competition_floor(n);
    if theta > 0.0 {
        for k in 1..=n {
            best = best.min(sv_attacker_candidate(k, theta)?);
        }
    }
    Ok(best)
}

/// Upper bound on B3 for linear utilities, piecewise in `theta`.
pub fn ub_sv_mal_over_max(theta: f64) -> f64 {
    let sqrt2 = std::f64::consts::SQRT_2;
    if theta <= sqrt2 - 1.0 {
        1.0 / ((1.0 + theta) * (1.0 + theta))
    } else if theta <= 0.5 {
        0.5
    } else if theta <= sqrt2 / 2.0 {
        2.0 / ((1.0 + 2.0 * theta) * (1.0 + 2.0 * theta))
    } else {
        1.0 / ((1.0 + theta) * (1.0 + theta))
    }
}

/// Approximate upper bound on B2. Advisory: it is not a proven bound.
pub fn ub_su_mal_over_nom_approx(n: usize, theta: f64) -> f64 {
    let nf = n as f64;
    if theta <= (nf - 1.0) / nf {
        1.0
    } else {
        (nf / (1.0 + nf * theta)).max(1.0 / (1.0 + theta) / su_competition_floor(n))
    }
}

/// Lower and upper bounds on B5 for linear utilities.
pub fn bounds_sw_mal_over_max(n: usize, theta: f64) -> (f64, f64) {
    let nf = n as f64;
    let lower = theta * nf / ((1.0 + theta) * (nf - 1.0));
    let upper = (theta * nf * nf / ((1.0 + theta * nf) * (nf - 1.0))).max(1.0);
    (lower, upper)
}

/// Bounds on B6: at least 1, unbounded above.
pub fn bounds_sw_mal_over_nom() -> (f64, f64) {
    (1.0, f64::INFINITY)
}

/// Every bound for one `(N, theta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub theta: f64,
    pub lb_b1: f64,
    pub ub_b1: f64,
    pub lb_b2: f64,
    /// Advisory; violations are reported, never treated as failures.
    pub ub_b2_advisory: f64,
    pub lb_b3: f64,
    pub ub_b3: f64,
    pub lb_b4: f64,
    pub lb_b5: f64,
    pub ub_b5: f64,
    pub lb_b6: f64,
    /// Which B1 lower-bound branch is active.
    pub b1_regime: B1Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum B1Regime {
    /// Loss driven by competition among benign agents.
    Competition,
    /// Loss driven by the attacker.
    Attacker,
}

pub const BOUND_CSV_HEADER: &str =
    "theta,N,lb_b1,ub_b1,lb_b2,ub_b2_advisory,lb_b3,ub_b3,lb_b4,lb_b5,ub_b5,lb_b6";

impl BoundReport {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        if n == 0 {
            return Err(ContestError::Usage("N must be at least 1".into()));
        }
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(ContestError::Domain(format!(
                "theta must be finite and >= 0, got {theta}"
            )));
        }
        let (lb_b5, ub_b5) = bounds_sw_mal_over_max(n, theta);
        let b1_regime = if 1.0 / (1.0 + theta) < su_competition_floor(n) {
            B1Regime::Attacker
        } else {
            B1Regime::Competition
        };
        Ok(BoundReport {
            n,
            theta,
            lb_b1: lb_su_mal_over_max(n, theta),
            ub_b1: ub_su_mal_over_max(n, theta),
            lb_b2: lb_su_mal_over_nom(theta),
            ub_b2_advisory: ub_su_mal_over_nom_approx(n, theta),
            lb_b3: lb_sv_mal_over_max(n, theta)?,
            ub_b3: ub_sv_mal_over_max(theta),
            lb_b4: lb_sv_mal_over_nom(theta),
            lb_b5,
            ub_b5,
            lb_b6: bounds_sw_mal_over_nom().0,
            b1_regime,
        })
    }

    pub fn csv_row(&self) -> String {
        use crate::harness::csv::fmt_f64;
        [
            fmt_f64(self.theta),
            self.n.to_string(),
            fmt_f64(self.lb_b1),
            fmt_f64(self.ub_b1),
            fmt_f64(self.lb_b2),
            fmt_f64(self.ub_b2_advisory),
            fmt_f64(self.lb_b3),
            fmt_f64(self.ub_b3),
            fmt_f64(self.lb_b4),
            fmt_f64(self.lb_b5),
            fmt_f64(self.ub_b5),
            fmt_f64(self.lb_b6),
        ]
        .join(",")
    }
}
