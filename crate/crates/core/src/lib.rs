//! CS-UCB: an upper-confidence-bound policy for combinatorial semi-bandits
//! whose arms may be asleep.
//!
//! Each round a subset `A_t` of the `k` base arms is available. The policy
//! picks a feasible super-arm `S_t ⊆ A_t` through an (approximation) oracle
//! fed with optimistic per-arm indices, observes Bernoulli feedback from every
//! pulled arm, and is scored against the best super-arm of `A_t`.
//!
//! - [`bandit`]: the per-arm statistics and the policy itself.
//! - [`rewards`]: super-arm reward models and smoothness checks.
//! - [`oracles`]: exact and degraded (`gamma`, `beta`) selection oracles.
//! - [`environment`]: instances, availability processes and feedback.
//! - [`analysis`]: regret ledgers, instance gaps, regret bounds and growth fits.

pub mod analysis;
pub mod bandit;
pub mod environment;
pub mod error;
pub mod oracles;
pub mod rewards;

pub use bandit::{ucb_index, ArmState, CsUcb, SuperArm};
pub use environment::{Availability, InstanceConfig};
pub use error::{Error, Result};
pub use oracles::{degrade, Oracle, OracleSpec};
pub use rewards::{RewardModel, RewardSpec};
