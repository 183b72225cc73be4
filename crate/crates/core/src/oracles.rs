//! Maximization oracles over an availability set, and a wrapper that degrades
//! an exact oracle into a randomized `(gamma, beta)` oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{normalize_available, SuperArm};
use crate::error::{invalid, Error, Result};
use crate::rewards::{sample_feasible, RewardModel, RewardSpec, UtilParams};

/// Largest availability set the brute-force oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Picks a super-arm from `available` given per-arm weights (length `k`;
/// only entries indexed by `available` are read).
pub trait Oracle {
    fn select(
        &mut self,
        available: &[usize],
        weights: &[f64],
        model: &dyn RewardModel,
    ) -> Result<SuperArm>;
}

impl<O: Oracle + ?Sized> Oracle for Box<O> {
    fn select(
        &mut self,
        available: &[usize],
        weights: &[f64],
        model: &dyn RewardModel,
    ) -> Result<SuperArm> {
        (**self).select(available, weights, model)
    }
}

fn prepared(available: &[usize], weights: &[f64], k: usize) -> Result<Vec<usize>> {
    if weights.len() < k {
        return Err(invalid(format!("{} weights for {k} arms", weights.len())));
    }
    let available = normalize_available(available, k)?;
    if available.is_empty() {
        return Err(Error::EmptyAvailability);
    }
    Ok(available)
}

/// Calls `visit` on every feasible subset of the sorted set `available`, in
/// increasing bitmask order. The caller bounds `available.len()`.
pub(crate) fn for_each_feasible(
    model: &dyn RewardModel,
    available: &[usize],
    mut visit: impl FnMut(&[usize]),
) {
    debug_assert!(available.len() < 64);
    let mut set = Vec::with_capacity(available.len());
    for mask in 1u64..1 << available.len() {
        set.clear();
        set.extend(
            available
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .map(|(_, &arm)| arm),
        );
        if model.is_feasible(&set, available) {
            visit(&set);
        }
    }
}

/// `true` when `(reward, set)` beats `(best_reward, best)`: higher reward, then
/// fewer members, then the lexicographically smaller member list.
fn beats(reward: f64, set: &[usize], best_reward: f64, best: &[usize]) -> bool {
    match reward.total_cmp(&best_reward) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => (set.len(), set) < (best.len(), best),
    }
}

/// Exact maximizer by enumerating every subset of `available` (at most 2^20).
pub fn brute_force_oracle(
    available: &[usize],
    weights: &[f64],
    model: &dyn RewardModel,
) -> Result<SuperArm> {
    let available = prepared(available, weights, model.k())?;
    if available.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "brute-force oracle availability",
            size: available.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_feasible(model, &available, |set| {
        let reward = model.evaluate(set, weights);
        let better = match &best {
            None => true,
            Some((best_reward, best_set)) => beats(reward, set, *best_reward, best_set),
        };
        if better {
            best = Some((reward, set.to_vec()));
        }
    });
    best.map(|(_, set)| SuperArm::from_sorted(set))
        .ok_or(Error::NoFeasibleSet(available))
}

/// The `min(K, |available|)` arms with the largest weights, ties to the lower index.
pub fn topk_oracle(available: &[usize], weights: &[f64], budget: usize) -> Result<SuperArm> {
    if budget == 0 {
        return Err(invalid("top-K budget must be positive"));
    }
    let mut ranked = prepared(available, weights, weights.len())?;
    ranked.sort_by(|&i, &j| weights[j].total_cmp(&weights[i]).then(i.cmp(&j)));
    ranked.truncate(budget);
    ranked.sort_unstable();
    Ok(SuperArm::from_sorted(ranked))
}

/// Every available arm with strictly positive utility `a_i w_i - b_i`; when
/// there is none, the single arm with the largest utility (lowest index on ties).
pub fn util_oracle(available: &[usize], weights: &[f64], params: &UtilParams) -> Result<SuperArm> {
    let available = prepared(available, weights, params.a.len())?;
    let positive: Vec<usize> = available
        .iter()
        .copied()
        .filter(|&i| params.utility(i, weights[i]) > 0.0)
        .collect();
    if !positive.is_empty() {
        return Ok(SuperArm::from_sorted(positive));
    }
    let best = available
        .iter()
        .copied()
        .reduce(|best, i| {
            if params.utility(i, weights[i]) > params.utility(best, weights[best]) {
                i
            } else {
                best
            }
        })
        .expect("availability is nonempty");
    Ok(SuperArm::from_sorted(vec![best]))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BruteForceOracle;

impl Oracle for BruteForceOracle {
    fn select(
        &mut self,
        available: &[usize],
        weights: &[f64],
        model: &dyn RewardModel,
    ) -> Result<SuperArm> {
        brute_force_oracle(available, weights, model)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TopKOracle {
    budget: usize,
}

impl TopKOracle {
    pub fn new(budget: usize) -> Self {
        Self { budget }
    }
}

impl Oracle for TopKOracle {
    fn select(
        &mut self,
        available: &[usize],
        weights: &[f64],
        _: &dyn RewardModel,
    ) -> Result<SuperArm> {
        topk_oracle(available, weights, self.budget)
    }
}

#[derive(Debug, Clone)]
pub struct UtilOracle {
    params: UtilParams,
}

impl UtilOracle {
    pub fn new(params: UtilParams) -> Self {
        Self { params }
    }
}

impl Oracle for UtilOracle {
    fn select(
        &mut self,
        available: &[usize],
        weights: &[f64],
        _: &dyn RewardModel,
    ) -> Result<SuperArm> {
        util_oracle(available, weights, &self.params)
    }
}

/// The polynomial-time exact oracle matching a shipped reward model.
pub fn exact_oracle(reward: &RewardSpec) -> Box<dyn Oracle + Send> {
    match reward {
        RewardSpec::TopK(p) => Box::new(TopKOracle::new(p.budget)),
        RewardSpec::Util(p) => Box::new(UtilOracle::new(p.clone())),
    }
}

/// Approximation factor `gamma` and success probability `beta`, both in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub gamma: f64,
    pub beta: f64,
}

impl OracleSpec {
    pub const EXACT: OracleSpec = OracleSpec {
        gamma: 1.0,
        beta: 1.0,
    };

    pub fn new(gamma: f64, beta: f64) -> Result<Self> {
        let spec = Self { gamma, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("beta", self.beta)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        Ok(())
    }

    pub fn is_exact(&self) -> bool {
        self.gamma == 1.0 && self.beta == 1.0
    }
}

/// With probability `beta` forwards to the inner oracle; otherwise returns a
/// super-arm drawn uniformly from the feasible subsets of the availability set.
pub struct Degraded<O> {
    inner: O,
    spec: OracleSpec,
    rng: ChaCha8Rng,
    calls: u64,
    fallbacks: u64,
}

/// Wraps `inner` into a `(gamma, beta)` oracle driven by its own seeded stream.
pub fn degrade<O: Oracle>(inner: O, spec: OracleSpec, seed: u64) -> Result<Degraded<O>> {
    spec.validate()?;
    Ok(Degraded {
        inner,
        spec,
        rng: ChaCha8Rng::seed_from_u64(seed),
        calls: 0,
        fallbacks: 0,
    })
}

impl<O> Degraded<O> {
    pub fn spec(&self) -> OracleSpec {
        self.spec
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    /// Number of calls answered by the random fallback.
    pub fn fallbacks(&self) -> u64 {
        self.fallbacks
    }
}

impl<O: Oracle> Oracle for Degraded<O> {
    fn select(
        &mut self,
        available: &[usize],
        weights: &[f64],
        model: &dyn RewardModel,
    ) -> Result<SuperArm> {
        self.calls += 1;
        if self.rng.random::<f64>() < self.spec.beta {
            return self.inner.select(available, weights, model);
        }
        self.fallbacks += 1;
        let available = prepared(available, weights, model.k())?;
        let set = sample_feasible(model, &available, &mut self.rng)
            .ok_or_else(|| Error::NoFeasibleSet(available.clone()))?;
        Ok(SuperArm::from_sorted(set))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewards::{TopKReward, UtilReward};

    fn util2() -> UtilParams {
        UtilParams {
            a: vec![1.0, 1.0],
            b: vec![0.3, 0.6],
        }
    }

    #[test]
    fn brute_force_examples() {
        let topk = TopKReward::new(3, 2).unwrap();
        let s = brute_force_oracle(&[0, 1, 2], &[0.9, 0.5, 0.7], &topk).unwrap();
        assert_eq!(s.members(), &[0, 2]);

        let util = UtilReward::new(util2()).unwrap();
        let s = brute_force_oracle(&[0, 1], &[0.5, 0.5], &util).unwrap();
        assert_eq!(s.members(), &[0]);

        let wide = TopKReward::new(6, 2).unwrap();
        let s = brute_force_oracle(&[4], &[0.0; 6], &wide).unwrap();
        assert_eq!(s.members(), &[4]);

        let s = brute_force_oracle(&[0, 1], &[1.2, 0.9], &TopKReward::new(2, 1).unwrap()).unwrap();
        assert_eq!(s.members(), &[0]);
    }

    #[test]
    fn brute_force_tie_break() {
        // Zero weights: every set scores 0, the smallest-then-lexicographic one wins.
        let m = TopKReward::new(3, 3).unwrap();
        let s = brute_force_oracle(&[0, 1, 2], &[0.0, 0.0, 0.0], &m).unwrap();
        assert_eq!(s.members(), &[0]);
        let s =
            brute_force_oracle(&[1, 2], &[0.0, 0.5, 0.5], &TopKReward::new(3, 1).unwrap()).unwrap();
        assert_eq!(s.members(), &[1]);
    }

    #[test]
    fn brute_force_budget_and_empty() {
        let m = TopKReward::new(25, 1).unwrap();
        let all: Vec<usize> = (0..21).collect();
        assert!(matches!(
            brute_force_oracle(&all, &[0.5; 25], &m),
            Err(Error::BudgetExceeded {
                size: 21,
                limit: 20,
                ..
            })
        ));
        assert_eq!(
            brute_force_oracle(&[], &[0.5; 25], &m),
            Err(Error::EmptyAvailability)
        );
    }

    #[test]
    fn topk_examples() {
        let s = topk_oracle(&[0, 1, 2, 3], &[0.1, 0.8, 0.3, 0.9], 2).unwrap();
        assert_eq!(s.members(), &[1, 3]);
        let s = topk_oracle(&[6, 2], &[0.5; 7], 5).unwrap();
        assert_eq!(s.members(), &[2, 6]);
        let s = topk_oracle(&[0, 1], &[0.5, 0.5], 1).unwrap();
        assert_eq!(s.members(), &[0]);
        assert_eq!(topk_oracle(&[], &[0.5], 1), Err(Error::EmptyAvailability));
    }

    #[test]
    fn util_examples() {
        let p = UtilParams {
            a: vec![1.0; 3],
            b: vec![0.3, 0.6, 0.45],
        };
        let s = util_oracle(&[0, 1, 2], &[0.5, 0.5, 0.5], &p).unwrap();
        assert_eq!(s.members(), &[0, 2]);

        // Utilities (-0.1, -0.2): the least-bad singleton.
        let p = UtilParams {
            a: vec![1.0, 1.0],
            b: vec![0.6, 0.7],
        };
        let s = util_oracle(&[0, 1], &[0.5, 0.5], &p).unwrap();
        assert_eq!(s.members(), &[0]);

        // Break-even arm is excluded.
        let p = UtilParams {
            a: vec![2.0, 1.0],
            b: vec![1.0, 0.1],
        };
        let s = util_oracle(&[0, 1], &[0.5, 0.5], &p).unwrap();
        assert_eq!(s.members(), &[1]);
    }

    #[test]
    fn degrade_exact_spec_is_transparent() {
        let model = TopKReward::new(4, 2).unwrap();
        let mut plain = TopKOracle::new(2);
        let mut wrapped = degrade(TopKOracle::new(2), OracleSpec::EXACT, 9).unwrap();
        let weights = [0.3, 0.9, 0.1, 0.6];
        for _ in 0..1000 {
            assert_eq!(
                wrapped.select(&[0, 1, 2, 3], &weights, &model).unwrap(),
                plain.select(&[0, 1, 2, 3], &weights, &model).unwrap()
            );
        }
        assert_eq!(wrapped.fallbacks(), 0);
    }

    #[test]
    fn degrade_half_success_rate() {
        let model = TopKReward::new(6, 2).unwrap();
        let spec = OracleSpec::new(1.0, 0.5).unwrap();
        let mut wrapped = degrade(TopKOracle::new(2), spec, 2024).unwrap();
        let weights = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let all = [0, 1, 2, 3, 4, 5];
        for _ in 0..10_000 {
            let s = wrapped.select(&all, &weights, &model).unwrap();
            assert!(model.is_feasible(s.members(), &all));
        }
        let inner_calls = wrapped.calls() - wrapped.fallbacks();
        assert!((inner_calls as i64 - 5000).abs() <= 150, "{inner_calls}");
    }

    #[test]
    fn degrade_gamma_only_keeps_exact_answers() {
        let model = UtilReward::new(util2()).unwrap();
        let spec = OracleSpec::new(0.9, 1.0).unwrap();
        let mut wrapped = degrade(UtilOracle::new(util2()), spec, 1).unwrap();
        let w = [0.8, 0.9];
        let opt = model.evaluate(
            brute_force_oracle(&[0, 1], &w, &model).unwrap().members(),
            &w,
        );
        for _ in 0..100 {
            let s = wrapped.select(&[0, 1], &w, &model).unwrap();
            assert!(model.evaluate(s.members(), &w) >= 0.9 * opt);
        }
    }

    #[test]
    fn degrade_is_reproducible() {
        let model = TopKReward::new(5, 2).unwrap();
        let spec = OracleSpec::new(1.0, 0.3).unwrap();
        let run = |seed| {
            let mut o = degrade(TopKOracle::new(2), spec, seed).unwrap();
            (0..200)
                .map(|_| o.select(&[0, 1, 2, 3, 4], &[0.5; 5], &model).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn oracle_spec_validation() {
        assert!(OracleSpec::new(0.0, 1.0).is_err());
        assert!(OracleSpec::new(1.0, 1.1).is_err());
        assert!(OracleSpec::new(0.5, 0.5).is_ok());
    }
}
