//! Ground-truth instances, availability processes and Bernoulli semi-bandit
//! feedback.
//!
//! # Seeding
//!
//! Every random draw of a replicated experiment comes from a ChaCha8 stream
//! keyed by `(master_seed, run_index, purpose)` through [`derive_seed`], a
//! SplitMix64 finalizer chain. Availability and feedback additionally select
//! the ChaCha stream number `t`, so the draws of round `t` in run `r` are a
//! pure function of `(master_seed, r, t)` and adding runs never disturbs the
//! earlier ones.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{instance_gaps, AvailabilityFamily, ALL_SUBSETS_LIMIT};
use crate::bandit::SuperArm;
use crate::error::{invalid, Error, Result};
use crate::oracles::OracleSpec;
use crate::rewards::RewardSpec;

pub const DEFAULT_HORIZON: u64 = 100_000;
pub const DEFAULT_RUNS: usize = 20;

/// Range of the sampled qualities in both experiment families.
pub const EXP_QUALITY_RANGE: (f64, f64) = (0.3, 0.8);
/// Range of the sampled per-arm availability probabilities.
pub const EXP_AVAILABILITY_RANGE: (f64, f64) = (0.4, 0.9);
/// Candidate quality vectors tried by [`sample_exp_two`] before giving up.
pub const EXP_TWO_SEARCH_BUDGET: usize = 10_000;
/// Relative tolerance on the gap and ratio targets of [`sample_exp_two`].
pub const EXP_TWO_TOLERANCE: f64 = 0.1;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Purpose of a derived random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Instance = 1,
    Availability = 2,
    Feedback = 3,
    Oracle = 4,
}

/// `splitmix64(splitmix64(master ^ splitmix64(run + 1)) ^ purpose)`.
pub fn derive_seed(master_seed: u64, run_index: u64, stream: Stream) -> u64 {
    let run = splitmix64(master_seed ^ splitmix64(run_index.wrapping_add(1)));
    splitmix64(run ^ stream as u64)
}

/// Per-run seeds for the availability, feedback and oracle streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStreams {
    availability: u64,
    feedback: u64,
    oracle: u64,
}

impl RunStreams {
    pub fn new(master_seed: u64, run_index: u64) -> Self {
        Self {
            availability: derive_seed(master_seed, run_index, Stream::Availability),
            feedback: derive_seed(master_seed, run_index, Stream::Feedback),
            oracle: derive_seed(master_seed, run_index, Stream::Oracle),
        }
    }

    /// Generator for the availability draw of round `t`.
    pub fn availability_rng(&self, t: u64) -> ChaCha8Rng {
        round_rng(self.availability, t)
    }

    /// Generator for the feedback draw of round `t`.
    pub fn feedback_rng(&self, t: u64) -> ChaCha8Rng {
        round_rng(self.feedback, t)
    }

    /// Seed for a sequential generator, e.g. a degraded oracle.
    pub fn oracle_seed(&self) -> u64 {
        self.oracle
    }
}

fn round_rng(seed: u64, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    rng
}

/// Per-round availability sets, replayed cyclically when shorter than the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilitySequence {
    k: usize,
    rounds: Vec<Vec<usize>>,
}

impl AvailabilitySequence {
    pub fn new(k: usize, rounds: Vec<Vec<usize>>) -> Result<Self> {
        let mut clean = Vec::with_capacity(rounds.len());
        for (i, mut set) in rounds.into_iter().enumerate() {
            set.sort_unstable();
            set.dedup();
            if let Some(&arm) = set.iter().find(|&&a| a >= k) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("arm index {arm} out of range for k = {k}"),
                });
            }
            clean.push(set);
        }
        if clean.is_empty() {
            return Err(invalid("availability script has no rounds"));
        }
        Ok(Self { k, rounds: clean })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rounds(&self) -> &[Vec<usize>] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// The set for 1-based round `t`.
    pub fn at(&self, t: u64) -> &[usize] {
        let idx = ((t.max(1) - 1) % self.rounds.len() as u64) as usize;
        &self.rounds[idx]
    }
}

/// Parses one availability set per line: whitespace-separated 0-based arm
/// indices, an empty line meaning no arm is available.
pub fn parse_availability_script(text: &str, k: usize) -> Result<AvailabilitySequence> {
    let mut rounds = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut set = Vec::new();
        for token in line.split_whitespace() {
            let arm: usize = token.parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("`{token}` is not an arm index"),
            })?;
            set.push(arm);
        }
        rounds.push(set);
    }
    AvailabilitySequence::new(k, rounds)
}

pub fn load_availability_script(path: &Path, k: usize) -> Result<AvailabilitySequence> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_availability_script(&text, k)
}

/// How availability sets are produced each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Availability {
    /// Arm `i` is independently available with probability `p[i]`.
    Bernoulli(Vec<f64>),
    Scripted(AvailabilitySequence),
}

/// A complete simulated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub k: usize,
    pub mu: Vec<f64>,
    pub availability: Availability,
    pub reward: RewardSpec,
    pub horizon: u64,
    pub gamma: f64,
    pub beta: f64,
    pub runs: usize,
    pub master_seed: u64,
}

impl InstanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if self.mu.len() != self.k {
            return Err(invalid(format!(
                "mu has {} entries for k = {}",
                self.mu.len(),
                self.k
            )));
        }
        if let Some(m) = self.mu.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(invalid(format!("quality {m} outside [0, 1]")));
        }
        match &self.availability {
            Availability::Bernoulli(p) => {
                if p.len() != self.k {
                    return Err(invalid(format!(
                        "avail_p has {} entries for k = {}",
                        p.len(),
                        self.k
                    )));
                }
                if let Some(q) = p.iter().find(|q| !(**q > 0.0 && **q <= 1.0)) {
                    return Err(invalid(format!(
                        "availability probability {q} outside (0, 1]"
                    )));
                }
            }
            Availability::Scripted(seq) => {
                if seq.k() != self.k {
                    return Err(invalid(format!(
                        "script built for k = {}, config has k = {}",
                        seq.k(),
                        self.k
                    )));
                }
            }
        }
        self.reward.validate(self.k)?;
        if self.horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }
        if self.runs == 0 {
            return Err(invalid("runs must be at least 1"));
        }
        self.oracle_spec().validate()
    }

    pub fn oracle_spec(&self) -> OracleSpec {
        OracleSpec {
            gamma: self.gamma,
            beta: self.beta,
        }
    }

    fn with_defaults(mu: Vec<f64>, avail_p: Vec<f64>, reward: RewardSpec) -> Self {
        Self {
            k: mu.len(),
            mu,
            availability: Availability::Bernoulli(avail_p),
            reward,
            horizon: DEFAULT_HORIZON,
            gamma: 1.0,
            beta: 1.0,
            runs: DEFAULT_RUNS,
            master_seed: 0,
        }
    }
}

fn uniform_vec(rng: &mut impl Rng, k: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(lo..=hi)).collect()
}

/// Qualities uniform on `[0.3, 0.8]` and availability probabilities uniform on
/// `[0.4, 0.9]`, all independent. Horizon, runs and seed take the defaults.
pub fn sample_exp_one(k: usize, reward: RewardSpec, rng: &mut impl Rng) -> Result<InstanceConfig> {
    if k < 2 {
        return Err(invalid("experiment instances need k >= 2"));
    }
    let mu = uniform_vec(rng, k, EXP_QUALITY_RANGE);
    let avail_p = uniform_vec(rng, k, EXP_AVAILABILITY_RANGE);
    let config = InstanceConfig::with_defaults(mu, avail_p, reward);
    config.validate()?;
    Ok(config)
}

/// Shapes of near-equal quality vectors tried by [`sample_exp_two`].
#[derive(Debug, Clone, Copy)]
enum Shape {
    /// Evenly spaced levels in random order.
    Ladder,
    /// One arm a step above all others.
    Leader,
    /// Independent uniform offsets.
    Jitter,
}

const SHAPES: [Shape; 3] = [Shape::Ladder, Shape::Leader, Shape::Jitter];

fn shape_offsets(shape: Shape, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    match shape {
        Shape::Ladder => {
            let mut levels: Vec<f64> = (0..k).map(|i| i as f64).collect();
            for i in (1..k).rev() {
                levels.swap(i, rng.random_range(0..=i));
            }
            levels
        }
        Shape::Leader => {
            let mut offsets = vec![0.0; k];
            offsets[rng.random_range(0..k)] = 1.0;
            offsets
        }
        Shape::Jitter => (0..k)
            .map(|_| rng.random_range(0.0..(k - 1) as f64))
            .collect(),
    }
}

fn within(value: f64, target: f64) -> bool {
    ((value - target) / target).abs() <= EXP_TWO_TOLERANCE
}

/// Near-equal qualities `mu_i = c + step * offset_i`, with `step` tuned until the
/// enumerated `Delta_min` (gamma = 1, all availability sets) is within 10% of
/// `delta_min_target` and, when `sigma_target` is given, `Delta_max / Delta_min`
/// within 10% of it. Availability probabilities follow [`sample_exp_one`].
pub fn sample_exp_two(
    k: usize,
    reward: RewardSpec,
    delta_min_target: f64,
    sigma_target: Option<f64>,
    rng: &mut impl Rng,
) -> Result<InstanceConfig> {
    if k < 2 {
        return Err(invalid("experiment instances need k >= 2"));
    }
    if k > ALL_SUBSETS_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "gap-targeted instance search over k arms",
            size: k,
            limit: ALL_SUBSETS_LIMIT,
        });
    }
    if !(delta_min_target > 0.0 && delta_min_target.is_finite()) {
        return Err(invalid(format!(
            "Delta_min target {delta_min_target} must be positive"
        )));
    }
    if let Some(s) = sigma_target {
        if !(s >= 1.0 && s.is_finite()) {
            return Err(invalid(format!("sigma target {s} must be at least 1")));
        }
    }
    let model = reward.build(k)?;
    let avail_p = uniform_vec(rng, k, EXP_AVAILABILITY_RANGE);

    let mut closest: Option<(f64, Option<f64>)> = None;
    for attempt in 0..EXP_TWO_SEARCH_BUDGET {
        let shape = SHAPES[attempt % SHAPES.len()];
        let center = rng.random_range(EXP_QUALITY_RANGE.0..=EXP_QUALITY_RANGE.1);
        let offsets = shape_offsets(shape, k, rng);
        let mut step = delta_min_target;
        for _ in 0..6 {
            let mu: Vec<f64> = offsets.iter().map(|o| center + step * o).collect();
            if mu.iter().any(|m| !(0.0..=1.0).contains(m)) {
                break;
            }
            let summary = instance_gaps(&mu, model.as_ref(), &AvailabilityFamily::AllSubsets, 1.0)?;
            let Some(gaps) = summary.gaps else { break };
            closest = Some((gaps.delta_min, Some(gaps.sigma)));
            if within(gaps.delta_min, delta_min_target) {
                if sigma_target.is_none_or(|s| within(gaps.sigma, s)) {
                    let config = InstanceConfig::with_defaults(mu, avail_p, reward);
                    config.validate()?;
                    return Ok(config);
                }
                break;
            }
            step *= delta_min_target / gaps.delta_min;
        }
    }
    Err(Error::SearchFailed(format!(
        "no quality vector with Delta_min ~ {delta_min_target} and sigma ~ {sigma_target:?} after {EXP_TWO_SEARCH_BUDGET} candidates; last (Delta_min, sigma) = {closest:?}"
    )))
}

/// Draws the availability set of round `t`; the result may be empty.
pub fn draw_availability(
    config: &InstanceConfig,
    t: u64,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    if t == 0 {
        return Err(invalid("rounds start at t = 1"));
    }
    Ok(match &config.availability {
        Availability::Bernoulli(p) => p
            .iter()
            .enumerate()
            .filter(|(_, &q)| rng.random_bool(q))
            .map(|(i, _)| i)
            .collect(),
        Availability::Scripted(seq) => seq.at(t).to_vec(),
    })
}

/// Independent Bernoulli(`mu_i`) feedback for each pulled arm.
pub fn draw_feedback(
    pulled: &SuperArm,
    mu: &[f64],
    rng: &mut impl Rng,
) -> Result<Vec<(usize, f64)>> {
    pulled
        .members()
        .iter()
        .map(|&i| {
            let p = *mu.get(i).ok_or(Error::ArmOutOfRange {
                arm: i,
                k: mu.len(),
            })?;
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("quality {p} outside [0, 1]")));
            }
            Ok((i, if rng.random_bool(p) { 1.0 } else { 0.0 }))
        })
        .collect()
}
