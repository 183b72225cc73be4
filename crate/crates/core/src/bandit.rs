//! The CS-UCB policy: per-arm statistics, UCB indices, super-arm selection
//! through an oracle and semi-bandit updates.
//!
//! A round is a `step` followed by an `update`. Rounds whose availability set
//! is empty are passed over with [`CsUcb::skip_round`], which advances the
//! clock without touching any arm statistics.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::oracles::Oracle;
use crate::rewards::RewardModel;

/// Sufficient statistics of one base arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ArmState {
    pulls: u64,
    feedback_sum: f64,
}

impl ArmState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a state from raw counters. `feedback_sum` must lie in `[0, pulls]`.
    pub fn from_counts(pulls: u64, feedback_sum: f64) -> Result<Self> {
        if !(0.0..=pulls as f64).contains(&feedback_sum) {
            return Err(invalid(format!(
                "feedback_sum {feedback_sum} outside [0, {pulls}]"
            )));
        }
        Ok(Self {
            pulls,
            feedback_sum,
        })
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn feedback_sum(&self) -> f64 {
        self.feedback_sum
    }

    /// Empirical mean of the observed feedback, `None` before the first pull.
    pub fn empirical_mean(&self) -> Option<f64> {
        (self.pulls > 0).then(|| self.feedback_sum / self.pulls as f64)
    }

    fn record(&mut self, feedback: f64) {
        self.pulls += 1;
        self.feedback_sum += feedback;
    }
}

/// Optimistic estimate `mean + sqrt(3 ln t / (2 pulls))`.
///
/// The index is not clipped to `[0, 1]`. Arms that were never pulled have no
/// index; the policy handles them through its cold-start branch.
pub fn ucb_index(arm: &ArmState, t: u64) -> Result<f64> {
    if t == 0 {
        return Err(invalid("round t must be at least 1"));
    }
    let mean = arm.empirical_mean().ok_or(Error::NeverPulled)?;
    Ok(mean + exploration_bonus(arm.pulls, t))
}

#[inline]
fn exploration_bonus(pulls: u64, t: u64) -> f64 {
    (3.0 * (t as f64).ln() / (2.0 * pulls as f64)).sqrt()
}

/// A nonempty, sorted, duplicate-free set of base-arm indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SuperArm(Vec<usize>);

impl SuperArm {
    /// Validates and canonicalises `members` (sorted, deduplicated) for `k` arms.
    pub fn new(mut members: Vec<usize>, k: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(invalid("super-arm must be nonempty"));
        }
        members.sort_unstable();
        members.dedup();
        if let Some(&arm) = members.iter().find(|&&a| a >= k) {
            return Err(Error::ArmOutOfRange { arm, k });
        }
        Ok(Self(members))
    }

    /// Caller guarantees `members` is nonempty, strictly increasing and in range.
    pub(crate) fn from_sorted(members: Vec<usize>) -> Self {
        debug_assert!(!members.is_empty());
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Self(members)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.0.binary_search(&arm).is_ok()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl AsRef<[usize]> for SuperArm {
    fn as_ref(&self) -> &[usize] {
        &self.0
    }
}

/// Sorts, deduplicates and range-checks an availability set.
pub fn normalize_available(available: &[usize], k: usize) -> Result<Vec<usize>> {
    let mut set = available.to_vec();
    set.sort_unstable();
    set.dedup();
    if let Some(&arm) = set.iter().find(|&&a| a >= k) {
        return Err(Error::ArmOutOfRange { arm, k });
    }
    Ok(set)
}

/// Full CS-UCB state: one [`ArmState`] per base arm and the 1-based round counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsUcb {
    arms: Vec<ArmState>,
    round: u64,
}

impl CsUcb {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(invalid("the policy needs at least one arm"));
        }
        Ok(Self {
            arms: vec![ArmState::new(); k],
            round: 1,
        })
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    /// The current round `t`, starting at 1.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn arms(&self) -> &[ArmState] {
        &self.arms
    }

    pub fn arm(&self, i: usize) -> Option<&ArmState> {
        self.arms.get(i)
    }

    /// UCB indices at the current round. Entries outside `available` are NaN.
    pub fn ucb_indices(&self, available: &[usize]) -> Result<Vec<f64>> {
        let mut weights = vec![f64::NAN; self.k()];
        for &i in available {
            let arm = self.arms.get(i).ok_or(Error::ArmOutOfRange {
                arm: i,
                k: self.k(),
            })?;
            weights[i] = ucb_index(arm, self.round)?;
        }
        Ok(weights)
    }

    /// Chooses the super-arm to pull this round.
    ///
    /// If any available arm is unpulled the whole availability set is returned,
    /// whether or not the model deems it feasible. A singleton availability set
    /// is returned as is. Otherwise the oracle is called on the UCB indices.
    pub fn step(
        &self,
        available: &[usize],
        oracle: &mut dyn Oracle,
        model: &dyn RewardModel,
    ) -> Result<SuperArm> {
        let available = normalize_available(available, self.k())?;
        if available.is_empty() {
            return Err(Error::EmptyAvailability);
        }
        if available.len() == 1 || available.iter().any(|&i| self.arms[i].pulls == 0) {
            return Ok(SuperArm::from_sorted(available));
        }
        let weights = self.ucb_indices(&available)?;
        let chosen = oracle.select(&available, &weights, model)?;
        if !model.is_feasible(chosen.members(), &available) {
            return Err(Error::Infeasible {
                members: chosen.into_inner(),
                available,
            });
        }
        Ok(chosen)
    }

    /// Applies semi-bandit feedback for the pulled super-arm and advances the round.
    ///
    /// `feedback` must hold exactly one `(arm, value)` pair per member of `pulled`,
    /// in any order, with values in `[0, 1]`. Nothing is modified on error.
    pub fn update(&mut self, pulled: &SuperArm, feedback: &[(usize, f64)]) -> Result<()> {
        if let Some(&arm) = pulled.members().iter().find(|&&a| a >= self.k()) {
            return Err(Error::ArmOutOfRange { arm, k: self.k() });
        }
        if feedback.len() != pulled.len() {
            return Err(Error::FeedbackMismatch(format!(
                "{} entries for {} pulled arms",
                feedback.len(),
                pulled.len()
            )));
        }
        let mut seen = vec![false; pulled.len()];
        for &(arm, value) in feedback {
            let pos = pulled
                .members()
                .binary_search(&arm)
                .map_err(|_| Error::FeedbackMismatch(format!("arm {arm} was not pulled")))?;
            if std::mem::replace(&mut seen[pos], true) {
                return Err(Error::FeedbackMismatch(format!(
                    "duplicate entry for arm {arm}"
                )));
            }
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::FeedbackOutOfRange { arm, value });
            }
        }
        for &(arm, value) in feedback {
            self.arms[arm].record(value);
        }
        self.round += 1;
        Ok(())
    }

    /// Advances the clock for a round in which no arm was available.
    pub fn skip_round(&mut self) {
        self.round += 1;
    }
}
