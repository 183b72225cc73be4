//! Regret accounting, exact gap enumeration, closed-form regret bounds and
//! growth-rate diagnostics.

mod bounds;
mod gaps;
mod growth;
mod ledger;

pub use bounds::{
    bound_thm1, bound_thm1_proof_form, bound_thm2, bound_thm3, bound_thm4, observation2_cap, ZETA_3,
};
pub use gaps::{instance_gaps, AvailabilityFamily, GapSummary, Gaps, SetGaps, ALL_SUBSETS_LIMIT};
pub use growth::{fit_loglog_slope, growth_exponent, growth_exponent_points};
pub use ledger::{OptimumCache, RegretLedger, RoundRecord};
