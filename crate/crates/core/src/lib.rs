//! Equilibria, social optima and efficiency bounds for a proportional-share
//! attention contest with one malicious player.
//!
//! `N` benign agents post messages at rates `x_i` and receive the share
//! `d_i = x_i / z` of the timeline, `z` being the total rate including the
//! malicious agent's `x_0`. Each benign agent maximizes `U_i(d_i) - c x_i`.
//! The malicious agent minimizes `theta * sum U_i(d_i) + c x_0`.
//!
//! ```
//! use contest_core::{solve_linear_ne, ContestInstance};
//!
//! let inst = ContestInstance::linear(&[1.0], 1.0).unwrap();
//! let ne = solve_linear_ne(&inst).unwrap();
//! assert_eq!(ne.rates(), &[0.25, 0.25]);
//! ```

pub mod bounds;
pub mod closed_form;
pub mod equilibrium;
pub mod error;
pub mod harness;
pub mod instance;
pub mod iterative;
pub mod measures;
pub mod metrics;
pub mod optimum;
pub mod profile;
pub mod utility;
pub mod verify;

pub use bounds::BoundReport;
pub use closed_form::{
    homogeneous_measures, participation_threshold, solve_linear_ne, solve_linear_ne_targeted,
};
pub use equilibrium::{EquilibriumResult, SolveMethod};
pub use error::{ContestError, Result};
pub use instance::{ContestInstance, InstanceFile};
pub use iterative::{solve_general_ne, solve_general_ne_from, SolverConfig};
pub use measures::{agent_payoff, compute_measures, Measures};
pub use metrics::{VisibilityConfig, VisibilityMetric};
pub use optimum::{social_optimum_utility, OptimumReport};
pub use profile::StrategyProfile;
pub use utility::{Utility, UtilitySpec};
