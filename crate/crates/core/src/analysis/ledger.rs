use std::collections::HashMap;

use crate::bandit::SuperArm;
use crate::error::{invalid, Error, Result};
use crate::oracles::{brute_force_oracle, for_each_feasible, OracleSpec, BRUTE_FORCE_LIMIT};
use crate::rewards::RewardModel;

/// Exact best and worst feasible rewards per availability set under the true
/// qualities, memoized across rounds.
pub struct OptimumCache<'a> {
    model: &'a dyn RewardModel,
    mu: &'a [f64],
    table: HashMap<Vec<usize>, (f64, f64)>,
}

impl<'a> OptimumCache<'a> {
    pub fn new(model: &'a dyn RewardModel, mu: &'a [f64]) -> Result<Self> {
        if mu.len() != model.k() {
            return Err(invalid(format!(
                "quality vector has {} entries for {} arms",
                mu.len(),
                model.k()
            )));
        }
        Ok(Self {
            model,
            mu,
            table: HashMap::new(),
        })
    }

    pub fn model(&self) -> &'a dyn RewardModel {
        self.model
    }

    pub fn mu(&self) -> &'a [f64] {
        self.mu
    }

    /// `(OPT_A, min feasible R_S)` for sorted, nonempty `available`.
    fn extremes(&mut self, available: &[usize]) -> Result<(f64, f64)> {
        if let Some(&hit) = self.table.get(available) {
            return Ok(hit);
        }
        let best = brute_force_oracle(available, self.mu, self.model)?;
        let opt = self.model.evaluate(best.members(), self.mu);
        let mut worst = f64::INFINITY;
        for_each_feasible(self.model, available, |set| {
            worst = worst.min(self.model.evaluate(set, self.mu));
        });
        self.table.insert(available.to_vec(), (opt, worst));
        Ok((opt, worst))
    }

    /// The optimal reward `OPT_A` within `available`.
    pub fn optimum(&mut self, available: &[usize]) -> Result<f64> {
        self.extremes(available).map(|(opt, _)| opt)
    }

    /// The smallest reward of any feasible super-arm within `available`.
    pub fn worst(&mut self, available: &[usize]) -> Result<f64> {
        self.extremes(available).map(|(_, worst)| worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub opt_reward: f64,
    pub realized_reward: f64,
    /// `gamma * beta * opt_reward - realized_reward`.
    pub increment: f64,
}

/// Per-round sleeping-regret increments and their running sum.
#[derive(Debug, Clone)]
pub struct RegretLedger {
    spec: OracleSpec,
    records: Vec<RoundRecord>,
    cumulative: Vec<f64>,
}

impl RegretLedger {
    pub fn new(spec: OracleSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            records: Vec::new(),
            cumulative: vec![0.0],
        })
    }

    pub fn with_capacity(spec: OracleSpec, rounds: usize) -> Result<Self> {
        let mut ledger = Self::new(spec)?;
        ledger.records.reserve(rounds);
        ledger.cumulative.reserve(rounds);
        Ok(ledger)
    }

    /// Appends a round from precomputed rewards and returns its increment.
    pub fn push(&mut self, t: u64, opt_reward: f64, realized_reward: f64) -> f64 {
        let increment = self.spec.gamma * self.spec.beta * opt_reward - realized_reward;
        self.push_record(RoundRecord {
            t,
            opt_reward,
            realized_reward,
            increment,
        });
        increment
    }

    fn push_record(&mut self, record: RoundRecord) {
        let last = *self.cumulative.last().expect("cumulative starts at 0");
        self.cumulative.push(last + record.increment);
        self.records.push(record);
    }

    /// Charges round `t`. An empty availability set (with no pull) costs nothing;
    /// otherwise `pulled` must be feasible within `available`.
    pub fn record_round(
        &mut self,
        t: u64,
        available: &[usize],
        pulled: Option<&SuperArm>,
        optimum: &mut OptimumCache<'_>,
    ) -> Result<f64> {
        match (available.is_empty(), pulled) {
            (true, None) => {
                self.push_record(RoundRecord {
                    t,
                    opt_reward: 0.0,
                    realized_reward: 0.0,
                    increment: 0.0,
                });
                Ok(0.0)
            }
            (true, Some(s)) => Err(Error::Infeasible {
                members: s.members().to_vec(),
                available: Vec::new(),
            }),
            (false, None) => Err(invalid("a nonempty availability set requires a pull")),
            (false, Some(s)) => {
                let model = optimum.model();
                if !model.is_feasible(s.members(), available) {
                    return Err(Error::Infeasible {
                        members: s.members().to_vec(),
                        available: available.to_vec(),
                    });
                }
                let opt = optimum.optimum(available)?;
                Ok(self.push(t, opt, model.evaluate(s.members(), optimum.mu())))
            }
        }
    }

    /// Charges a cold-start round, in which the policy pulls every available arm.
    ///
    /// When that set is infeasible under the model it has no reward of its
    /// own; the round is charged as if the worst feasible super-arm had been
    /// pulled.
    pub fn record_cold_start(
        &mut self,
        t: u64,
        available: &[usize],
        pulled: &SuperArm,
        optimum: &mut OptimumCache<'_>,
    ) -> Result<f64> {
        if optimum.model().is_feasible(pulled.members(), available) {
            return self.record_round(t, available, Some(pulled), optimum);
        }
        if available.len() > BRUTE_FORCE_LIMIT {
            return Err(Error::BudgetExceeded {
                what: "cold-start availability",
                size: available.len(),
                limit: BRUTE_FORCE_LIMIT,
            });
        }
        let opt = optimum.optimum(available)?;
        let worst = optimum.worst(available)?;
        Ok(self.push(t, opt, worst))
    }

    /// Records a round whose only choice was the single available arm. There is
    /// nothing to regret, so the increment is zero whatever `gamma * beta` is.
    pub fn record_forced(
        &mut self,
        t: u64,
        available: &[usize],
        pulled: &SuperArm,
        optimum: &mut OptimumCache<'_>,
    ) -> Result<f64> {
        if available.len() != 1 || pulled.members() != available {
            return Err(invalid(format!(
                "forced rounds need a single available arm that is pulled, got {:?} from {available:?}",
                pulled.members()
            )));
        }
        let reward = optimum.optimum(available)?;
        self.push_record(RoundRecord {
            t,
            opt_reward: reward,
            realized_reward: reward,
            increment: 0.0,
        });
        Ok(0.0)
    }

    pub fn spec(&self) -> OracleSpec {
        self.spec
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Running sums with `cumulative()[0] == 0` and `cumulative()[n]` after `n` rounds.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("cumulative starts at 0")
    }

    pub fn max_increment(&self) -> Option<f64> {
        self.records.iter().map(|r| r.increment).reduce(f64::max)
    }
}
