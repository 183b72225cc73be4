//! Reward models `R_S(mu)` with feasibility predicates and smoothness descriptors,
//! plus randomized checkers for monotonicity, Lipschitz continuity and bounded
//! smoothness.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Absolute slack used by the property checkers.
pub const CHECK_TOLERANCE: f64 = 1e-12;

/// A reward function over super-arms.
///
/// `set` and `available` are sorted, duplicate-free arm indices. `evaluate`
/// must only read `quality[i]` for `i` in `set`.
pub trait RewardModel: Send + Sync {
    /// Number of base arms.
    fn k(&self) -> usize;

    fn evaluate(&self, set: &[usize], quality: &[f64]) -> f64;

    fn is_feasible(&self, set: &[usize], available: &[usize]) -> bool;

    /// Declared Lipschitz constant `C >= 1`, if any.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// Declared bounded-smoothness function, if any.
    fn smoothness(&self) -> Option<&SmoothnessFn> {
        None
    }
}

impl<M: RewardModel + ?Sized> RewardModel for Box<M> {
    fn k(&self) -> usize {
        (**self).k()
    }
    fn evaluate(&self, set: &[usize], quality: &[f64]) -> f64 {
        (**self).evaluate(set, quality)
    }
    fn is_feasible(&self, set: &[usize], available: &[usize]) -> bool {
        (**self).is_feasible(set, available)
    }
    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
    fn smoothness(&self) -> Option<&SmoothnessFn> {
        (**self).smoothness()
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A strictly increasing function `f` together with its inverse.
#[derive(Clone)]
pub struct SmoothnessFn {
    label: String,
    forward: ScalarFn,
    inverse: ScalarFn,
}

impl SmoothnessFn {
    pub fn new(
        label: impl Into<String>,
        forward: impl Fn(f64) -> f64 + Send + Sync + 'static,
        inverse: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
        }
    }

    /// `f(x) = slope * x`.
    pub fn linear(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(invalid(format!(
                "linear smoothness slope {slope} must be positive"
            )));
        }
        Ok(Self::new(
            format!("{slope}*x"),
            move |x| slope * x,
            move |y| y / slope,
        ))
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        (self.inverse)(y)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for SmoothnessFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SmoothnessFn").field(&self.label).finish()
    }
}

/// `true` when sorted `set` is a nonempty subset of sorted `available`.
pub fn is_nonempty_subset(set: &[usize], available: &[usize]) -> bool {
    if set.is_empty() {
        return false;
    }
    let mut rest = available.iter();
    set.iter().all(|s| rest.any(|a| a == s))
}

/// Gains `a` and fixed costs `b` of the utility reward `sum a_i mu_i - b_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilParams {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl UtilParams {
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.a.len() != k || self.b.len() != k {
            return Err(invalid(format!(
                "util params need {k} gains and costs, got {} and {}",
                self.a.len(),
                self.b.len()
            )));
        }
        if let Some(a) = self.a.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(invalid(format!("gain {a} must be positive")));
        }
        if let Some(b) = self.b.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
            return Err(invalid(format!("cost {b} must be nonnegative")));
        }
        Ok(())
    }

    /// Utility `a_i w_i - b_i` of a single arm.
    #[inline]
    pub fn utility(&self, arm: usize, weight: f64) -> f64 {
        self.a[arm] * weight - self.b[arm]
    }
}

/// Cardinality cap `K` of the top-K reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopKParams {
    #[serde(rename = "K")]
    pub budget: usize,
}

/// Additive utility reward: every nonempty subset of the available arms is feasible.
#[derive(Debug, Clone)]
pub struct UtilReward {
    params: UtilParams,
    lipschitz: f64,
    smoothness: SmoothnessFn,
}

impl UtilReward {
    pub fn new(params: UtilParams) -> Result<Self> {
        params.validate(params.a.len())?;
        if params.a.is_empty() {
            return Err(invalid("util reward needs at least one arm"));
        }
        let lipschitz = params.a.iter().sum::<f64>().max(1.0);
        Ok(Self {
            params,
            lipschitz,
            smoothness: SmoothnessFn::linear(lipschitz)?,
        })
    }

    pub fn params(&self) -> &UtilParams {
        &self.params
    }
}

impl RewardModel for UtilReward {
    fn k(&self) -> usize {
        self.params.a.len()
    }

    fn evaluate(&self, set: &[usize], quality: &[f64]) -> f64 {
        set.iter()
            .map(|&i| self.params.utility(i, quality[i]))
            .sum()
    }

    fn is_feasible(&self, set: &[usize], available: &[usize]) -> bool {
        is_nonempty_subset(set, available)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn smoothness(&self) -> Option<&SmoothnessFn> {
        Some(&self.smoothness)
    }
}

/// Additive reward over at most `K` pulled arms.
#[derive(Debug, Clone)]
pub struct TopKReward {
    k: usize,
    budget: usize,
    smoothness: SmoothnessFn,
}

impl TopKReward {
    pub fn new(k: usize, budget: usize) -> Result<Self> {
        if budget == 0 || budget > k {
            return Err(invalid(format!(
                "top-K budget {budget} must lie in [1, {k}]"
            )));
        }
        Ok(Self {
            k,
            budget,
            smoothness: SmoothnessFn::linear(budget as f64)?,
        })
    }

    pub fn budget(&self) -> usize {
        self.budget
    }
}

impl RewardModel for TopKReward {
    fn k(&self) -> usize {
        self.k
    }

    fn evaluate(&self, set: &[usize], quality: &[f64]) -> f64 {
        set.iter().map(|&i| quality[i]).sum()
    }

    fn is_feasible(&self, set: &[usize], available: &[usize]) -> bool {
        set.len() <= self.budget && is_nonempty_subset(set, available)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.budget as f64)
    }

    fn smoothness(&self) -> Option<&SmoothnessFn> {
        Some(&self.smoothness)
    }
}

/// Builds the utility reward model.
pub fn util_reward(params: UtilParams) -> Result<UtilReward> {
    UtilReward::new(params)
}

/// Builds the top-K reward model on `k` arms.
pub fn topk_reward(k: usize, params: TopKParams) -> Result<TopKReward> {
    TopKReward::new(k, params.budget)
}

/// Tagged reward parameters as they appear in instance configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardSpec {
    Util(UtilParams),
    TopK(TopKParams),
}

impl RewardSpec {
    pub fn validate(&self, k: usize) -> Result<()> {
        match self {
            RewardSpec::Util(p) => p.validate(k),
            RewardSpec::TopK(p) => TopKReward::new(k, p.budget).map(|_| ()),
        }
    }

    pub fn build(&self, k: usize) -> Result<Box<dyn RewardModel>> {
        self.validate(k)?;
        Ok(match self {
            RewardSpec::Util(p) => Box::new(UtilReward::new(p.clone())?),
            RewardSpec::TopK(p) => Box::new(TopKReward::new(k, p.budget)?),
        })
    }
}

/// Wraps a model and overrides its declared smoothness descriptors.
pub struct Declared<M> {
    inner: M,
    lipschitz: Option<f64>,
    smoothness: Option<SmoothnessFn>,
}

impl<M: RewardModel> Declared<M> {
    pub fn new(inner: M) -> Self {
        Self {
            inner,
            lipschitz: None,
            smoothness: None,
        }
    }

    /// Declares a Lipschitz constant. Constants below 1 are rejected.
    pub fn with_lipschitz(mut self, c: f64) -> Result<Self> {
        if !(c >= 1.0 && c.is_finite()) {
            return Err(invalid(format!(
                "Lipschitz constant {c} must be at least 1"
            )));
        }
        self.lipschitz = Some(c);
        Ok(self)
    }

    pub fn with_smoothness(mut self, f: SmoothnessFn) -> Self {
        self.smoothness = Some(f);
        self
    }
}

impl<M: RewardModel> RewardModel for Declared<M> {
    fn k(&self) -> usize {
        self.inner.k()
    }
    fn evaluate(&self, set: &[usize], quality: &[f64]) -> f64 {
        self.inner.evaluate(set, quality)
    }
    fn is_feasible(&self, set: &[usize], available: &[usize]) -> bool {
        self.inner.is_feasible(set, available)
    }
    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
    fn smoothness(&self) -> Option<&SmoothnessFn> {
        self.smoothness.as_ref()
    }
}

/// Draws a super-arm uniformly among the feasible subsets of `available`.
///
/// Uses rejection from uniform nonempty subsets and falls back to exhaustive
/// enumeration when feasible sets are rare. Returns `None` when no feasible
/// set exists or the availability set is too large to enumerate.
pub fn sample_feasible<R: Rng + ?Sized>(
    model: &dyn RewardModel,
    available: &[usize],
    rng: &mut R,
) -> Option<Vec<usize>> {
    const REJECTION_TRIES: usize = 256;
    if available.is_empty() {
        return None;
    }
    let mut candidate = Vec::with_capacity(available.len());
    for _ in 0..REJECTION_TRIES {
        candidate.clear();
        candidate.extend(available.iter().copied().filter(|_| rng.random_bool(0.5)));
        if !candidate.is_empty() && model.is_feasible(&candidate, available) {
            return Some(candidate);
        }
    }
    if available.len() > crate::oracles::BRUTE_FORCE_LIMIT {
        return None;
    }
    let feasible: Vec<u64> = (1..1u64 << available.len())
        .filter(|&mask| model.is_feasible(&members_of(mask, available), available))
        .collect();
    if feasible.is_empty() {
        return None;
    }
    let pick = feasible[rng.random_range(0..feasible.len())];
    Some(members_of(pick, available))
}

pub(crate) fn members_of(mask: u64, available: &[usize]) -> Vec<usize> {
    available
        .iter()
        .enumerate()
        .filter(|(bit, _)| mask >> bit & 1 == 1)
        .map(|(_, &arm)| arm)
        .collect()
}

/// One counterexample found by a property checker.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub set: Vec<usize>,
    pub mu: Vec<f64>,
    pub mu_prime: Vec<f64>,
    /// Observed quantity (reward drop or `|R(mu) - R(mu')|`).
    pub observed: f64,
    /// Permitted quantity at that sample.
    pub allowed: f64,
}

/// Outcome of a randomized property check.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ViolationReport {
    pub trials: usize,
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn all_arms(k: usize) -> Vec<usize> {
    (0..k).collect()
}

fn uniform_quality(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.random::<f64>()).collect()
}

/// Draws `mu'` near `mu`: either an independent jitter per arm or one common shift.
fn perturbed(rng: &mut impl Rng, mu: &[f64]) -> Vec<f64> {
    let half_width = rng.random_range(1e-4..0.5);
    if rng.random_bool(0.5) {
        mu.iter()
            .map(|m| (m + rng.random_range(-half_width..=half_width)).clamp(0.0, 1.0))
            .collect()
    } else {
        let shift = rng.random_range(-half_width..=half_width);
        mu.iter().map(|m| (m + shift).clamp(0.0, 1.0)).collect()
    }
}

fn max_deviation(set: &[usize], mu: &[f64], mu_prime: &[f64]) -> f64 {
    set.iter()
        .map(|&i| (mu[i] - mu_prime[i]).abs())
        .fold(0.0, f64::max)
}

/// Samples pairs `mu <= mu'` and reports every feasible `S` whose reward drops.
pub fn check_monotonicity(
    model: &dyn RewardModel,
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let k = model.k();
    let arms = all_arms(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ViolationReport {
        trials,
        violations: Vec::new(),
    };
    for _ in 0..trials {
        let mu = uniform_quality(&mut rng, k);
        let reach = rng.random_range(1e-4..1.0);
        let mu_prime: Vec<f64> = mu
            .iter()
            .map(|m| (m + rng.random_range(0.0..reach)).min(1.0))
            .collect();
        let set = sample_feasible(model, &arms, &mut rng)
            .ok_or_else(|| Error::NoFeasibleSet(arms.clone()))?;
        let before = model.evaluate(&set, &mu);
        let after = model.evaluate(&set, &mu_prime);
        if after < before - CHECK_TOLERANCE {
            report.violations.push(Violation {
                set,
                mu,
                mu_prime,
                observed: before - after,
                allowed: 0.0,
            });
        }
    }
    Ok(report)
}

/// Checks `|R_S(mu) - R_S(mu')| <= C max_{i in S} |mu_i - mu'_i|` with the model's declared `C`.
pub fn check_lipschitz(
    model: &dyn RewardModel,
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let c = model
        .lipschitz()
        .ok_or(Error::MissingDescriptor("a Lipschitz constant"))?;
    check_deviation(model, trials, seed, |lambda| c * lambda)
}

/// Checks `|R_S(mu) - R_S(mu')| <= f(Lambda)` with the model's declared `f`.
pub fn check_bounded_smoothness(
    model: &dyn RewardModel,
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let f = model
        .smoothness()
        .ok_or(Error::MissingDescriptor("a bounded-smoothness function"))?
        .clone();
    check_deviation(model, trials, seed, |lambda| f.eval(lambda))
}

fn check_deviation(
    model: &dyn RewardModel,
    trials: usize,
    seed: u64,
    allowed: impl Fn(f64) -> f64,
) -> Result<ViolationReport> {
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let k = model.k();
    let arms = all_arms(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ViolationReport {
        trials,
        violations: Vec::new(),
    };
    for _ in 0..trials {
        let mu = uniform_quality(&mut rng, k);
        let mu_prime = perturbed(&mut rng, &mu);
        let set = sample_feasible(model, &arms, &mut rng)
            .ok_or_else(|| Error::NoFeasibleSet(arms.clone()))?;
        let observed = (model.evaluate(&set, &mu) - model.evaluate(&set, &mu_prime)).abs();
        let bound = allowed(max_deviation(&set, &mu, &mu_prime));
        if observed > bound + CHECK_TOLERANCE {
            report.violations.push(Violation {
                set,
                mu,
                mu_prime,
                observed,
                allowed: bound,
            });
        }
    }
    Ok(report)
}
