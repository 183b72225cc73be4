use crate::bandit::normalize_available;
use crate::error::{invalid, Error, Result};
use crate::oracles::{for_each_feasible, BRUTE_FORCE_LIMIT};
use crate::rewards::RewardModel;

/// Largest `k` for which every availability set is enumerated.
pub const ALL_SUBSETS_LIMIT: usize = 15;

/// Which availability sets the gap extremes range over.
#[derive(Debug, Clone, PartialEq)]
pub enum AvailabilityFamily {
    /// Every nonempty `A` of the `k` arms.
    AllSubsets,
    /// A caller-supplied list; empty sets are ignored and duplicates collapse.
    Explicit(Vec<Vec<usize>>),
}

/// Gap extremes of one availability set. `delta_min`/`delta_max` are `None`
/// when the set has no bad super-arm.
#[derive(Debug, Clone, PartialEq)]
pub struct SetGaps {
    pub available: Vec<usize>,
    pub optimum: f64,
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaps {
    pub delta_min: f64,
    pub delta_max: f64,
    /// `delta_max / delta_min`.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSummary {
    pub gamma: f64,
    /// `None` when no availability set in the family has a bad super-arm.
    pub gaps: Option<Gaps>,
    pub table: Vec<SetGaps>,
}

fn set_gaps(
    model: &dyn RewardModel,
    mu: &[f64],
    available: Vec<usize>,
    gamma: f64,
) -> Result<SetGaps> {
    let mut rewards = Vec::new();
    for_each_feasible(model, &available, |set| {
        rewards.push(model.evaluate(set, mu))
    });
    let optimum = rewards
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or_else(|| Error::NoFeasibleSet(available.clone()))?;
    let target = gamma * optimum;
    let bad = rewards.iter().copied().filter(|&r| target - r > 0.0);
    let (best_bad, worst_bad) =
        bad.fold((None, None), |(hi, lo): (Option<f64>, Option<f64>), r| {
            (
                Some(hi.map_or(r, |h| h.max(r))),
                Some(lo.map_or(r, |l| l.min(r))),
            )
        });
    Ok(SetGaps {
        available,
        optimum,
        delta_min: best_bad.map(|r| target - r),
        delta_max: worst_bad.map(|r| target - r),
    })
}

/// Enumerates the family of availability sets and every feasible super-arm in
/// each, and reports `Delta_min = min_A Delta_min(A)`, `Delta_max = max_A
/// Delta_max(A)` with `Delta_S = gamma * OPT_A - R_S(mu)`.
pub fn instance_gaps(
    mu: &[f64],
    model: &dyn RewardModel,
    family: &AvailabilityFamily,
    gamma: f64,
) -> Result<GapSummary> {
    let k = model.k();
    if mu.len() != k {
        return Err(invalid(format!(
            "quality vector has {} entries for {k} arms",
            mu.len()
        )));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid(format!("gamma = {gamma} must lie in (0, 1]")));
    }
    let sets: Vec<Vec<usize>> = match family {
        AvailabilityFamily::AllSubsets => {
            if k > ALL_SUBSETS_LIMIT {
                return Err(Error::BudgetExceeded {
                    what: "all-subsets gap enumeration over k arms",
                    size: k,
                    limit: ALL_SUBSETS_LIMIT,
                });
            }
            (1u64..1 << k)
                .map(|mask| (0..k).filter(|i| mask >> i & 1 == 1).collect())
                .collect()
        }
        AvailabilityFamily::Explicit(list) => {
            let mut sets = Vec::with_capacity(list.len());
            for a in list {
                let a = normalize_available(a, k)?;
                if a.len() > BRUTE_FORCE_LIMIT {
                    return Err(Error::BudgetExceeded {
                        what: "availability set in gap enumeration",
                        size: a.len(),
                        limit: BRUTE_FORCE_LIMIT,
                    });
                }
                if !a.is_empty() {
                    sets.push(a);
                }
            }
            sets.sort();
            sets.dedup();
            sets
        }
    };

    let mut table = Vec::with_capacity(sets.len());
    for a in sets {
        table.push(set_gaps(model, mu, a, gamma)?);
    }
    let delta_min = table.iter().filter_map(|s| s.delta_min).reduce(f64::min);
    let delta_max = table.iter().filter_map(|s| s.delta_max).reduce(f64::max);
    let gaps = match (delta_min, delta_max) {
        (Some(delta_min), Some(delta_max)) => Some(Gaps {
            delta_min,
            delta_max,
            sigma: delta_max / delta_min,
        }),
        _ => None,
    };
    Ok(GapSummary { gamma, gaps, table })
}
