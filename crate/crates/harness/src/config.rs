//! JSON experiment configurations.
//!
//! ```json
//! {
//!   "k": 8,                                  // required
//!   "reward": {"kind": "top_k", "K": 3},     // required; or {"kind": "util", "a": [..], "b": [..]}
//!   "experiment": {"kind": "exp_one"},       // optional, default custom
//!   "mu": [0.7, ...],                        // required for custom, sampled otherwise
//!   "avail_p": [0.5, ...],                   // required for custom unless a script is given
//!   "availability_script": "rounds.txt",     // optional, relative to the config file
//!   "horizon": 100000, "runs": 20,           // optional
//!   "gamma": 1.0, "beta": 1.0,               // optional
//!   "master_seed": 0,                        // optional
//!   "resample_instance": false,              // optional
//!   "log_axis": true                         // optional, chart t axis
//! }
//! ```
//!
//! `exp_two` takes `"delta_min"` (default 0.01) and an optional `"sigma"` target.

use std::path::{Path, PathBuf};

use csucb_core::environment::{
    derive_seed, load_availability_script, sample_exp_one, sample_exp_two, Availability,
    InstanceConfig, Stream, DEFAULT_HORIZON, DEFAULT_RUNS,
};
use csucb_core::RewardSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

pub const DEFAULT_EXP_TWO_DELTA_MIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    Custom,
    ExpOne,
    ExpTwo {
        #[serde(default = "default_delta_min")]
        delta_min: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
}

fn default_delta_min() -> f64 {
    DEFAULT_EXP_TWO_DELTA_MIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub k: usize,
    pub reward: RewardSpec,
    #[serde(default)]
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avail_p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub availability_script: Option<PathBuf>,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub resample_instance: bool,
    #[serde(default = "yes")]
    pub log_axis: bool,
}

fn default_horizon() -> u64 {
    DEFAULT_HORIZON
}
fn default_runs() -> usize {
    DEFAULT_RUNS
}
fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub horizon: Option<u64>,
    pub runs: Option<usize>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub resample_instance: bool,
    pub availability_script: Option<PathBuf>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Reads a config and makes a relative script path relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut config = Self::parse(&text)?;
        if let (Some(script), Some(dir)) = (&config.availability_script, path.parent()) {
            if script.is_relative() {
                config.availability_script = Some(dir.join(script));
            }
        }
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.master_seed = v;
        }
        if let Some(v) = o.horizon {
            self.horizon = v;
        }
        if let Some(v) = o.runs {
            self.runs = v;
        }
        if let Some(v) = o.gamma {
            self.gamma = v;
        }
        if let Some(v) = o.beta {
            self.beta = v;
        }
        if o.resample_instance {
            self.resample_instance = true;
        }
        if let Some(p) = &o.availability_script {
            self.availability_script = Some(p.clone());
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Builds the instance, drawing any unspecified qualities and availability
    /// probabilities from the experiment family with the given seed.
    pub fn instance(&self, instance_seed: u64) -> Result<InstanceConfig> {
        let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
        let sampled = match self.experiment {
            ExperimentKind::Custom => None,
            ExperimentKind::ExpOne => Some(sample_exp_one(self.k, self.reward.clone(), &mut rng)?),
            ExperimentKind::ExpTwo { delta_min, sigma } => Some(sample_exp_two(
                self.k,
                self.reward.clone(),
                delta_min,
                sigma,
                &mut rng,
            )?),
        };
        let mu = match (&self.experiment, &self.mu, &sampled) {
            (ExperimentKind::Custom, Some(mu), _) => mu.clone(),
            (ExperimentKind::Custom, None, _) => {
                return Err(HarnessError::Config("custom experiments need `mu`".into()))
            }
            (_, Some(_), _) => {
                return Err(HarnessError::Config(
                    "`mu` is sampled by exp_one/exp_two; use a custom experiment to fix it".into(),
                ))
            }
            (_, None, Some(s)) => s.mu.clone(),
            (_, None, None) => unreachable!("sampled families always produce an instance"),
        };
        let availability = match (&self.availability_script, &self.avail_p, &sampled) {
            (Some(_), Some(_), _) => {
                return Err(HarnessError::Config(
                    "give either `avail_p` or `availability_script`, not both".into(),
                ))
            }
            (Some(path), None, _) => {
                Availability::Scripted(load_availability_script(path, self.k)?)
            }
            (None, Some(p), _) => Availability::Bernoulli(p.clone()),
            (None, None, Some(s)) => s.availability.clone(),
            (None, None, None) => {
                return Err(HarnessError::Config(
                    "custom experiments need `avail_p` or `availability_script`".into(),
                ))
            }
        };
        let instance = InstanceConfig {
            k: self.k,
            mu,
            availability,
            reward: self.reward.clone(),
            horizon: self.horizon,
            gamma: self.gamma,
            beta: self.beta,
            runs: self.runs,
            master_seed: self.master_seed,
        };
        instance.validate()?;
        Ok(instance)
    }

    /// Seed of the instance shared by all runs, or of run `run` when resampling.
    pub fn instance_seed(&self, run: usize) -> u64 {
        let index = if self.resample_instance {
            run as u64
        } else {
            0
        };
        derive_seed(self.master_seed, index, Stream::Instance)
    }

    pub fn samples_instance(&self) -> bool {
        !matches!(self.experiment, ExperimentKind::Custom)
    }
}
