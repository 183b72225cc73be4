use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use csucb_core::analysis::{
    bound_thm1, bound_thm2, bound_thm3, bound_thm4, instance_gaps, observation2_cap,
    AvailabilityFamily, GapSummary, Gaps, ALL_SUBSETS_LIMIT,
};
use csucb_core::environment::{draw_availability, Availability, InstanceConfig, RunStreams};
use csucb_core::oracles::BRUTE_FORCE_LIMIT;
use csucb_core::RewardModel;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ConfigFile;
use crate::error::{HarnessError, Result};
use crate::simulate::{simulate_run, RunOutcome};

pub const CHECKPOINTS: usize = 50;
/// Most distinct realized availability sets enumerated for a gap estimate.
pub const REALIZED_SETS_LIMIT: usize = 4096;
/// Slack allowed over the per-round cap before an increment counts as a violation.
pub const CAP_SLACK: f64 = 1e-9;

/// 50 geometrically spaced rounds in `[1, T]` plus `T`, rounded and deduplicated.
pub fn checkpoints(horizon: u64) -> Vec<u64> {
    let ln_t = (horizon.max(1) as f64).ln();
    let mut points: Vec<u64> = (0..CHECKPOINTS)
        .map(|i| (ln_t * i as f64 / (CHECKPOINTS - 1) as f64).exp().round() as u64)
        .map(|t| t.clamp(1, horizon))
        .collect();
    points.push(horizon);
    points.sort_unstable();
    points.dedup();
    points
}

/// Online mean and sample variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation; zero for fewer than two values.
    pub fn std(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0).sqrt()
        }
    }
}

/// A resolved experiment ready to run.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub config: ConfigFile,
    /// The instance shared by all runs (that of run 0 when resampling).
    pub instance: InstanceConfig,
    pub checkpoints: Vec<u64>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(config: ConfigFile, out_dir: Option<PathBuf>) -> Result<Self> {
        let instance = config.instance(config.instance_seed(0))?;
        let checkpoints = checkpoints(instance.horizon);
        Ok(Self {
            config,
            instance,
            checkpoints,
            out_dir,
        })
    }

    fn instance_for(&self, run: usize) -> Result<InstanceConfig> {
        if self.config.resample_instance && self.config.samples_instance() {
            self.config.instance(self.config.instance_seed(run))
        } else {
            Ok(self.instance.clone())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    /// `all_subsets` (exact) or `realized` (a lower-bound estimate of the range).
    pub family: &'static str,
    pub gamma: f64,
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub sigma: Option<f64>,
    pub sets: usize,
}

impl GapReport {
    fn new(family: &'static str, summary: &GapSummary) -> Self {
        Self {
            family,
            gamma: summary.gamma,
            delta_min: summary.gaps.map(|g| g.delta_min),
            delta_max: summary.gaps.map(|g| g.delta_max),
            sigma: summary.gaps.map(|g| g.sigma),
            sets: summary.table.len(),
        }
    }

    pub fn gaps(&self) -> Option<Gaps> {
        Some(Gaps {
            delta_min: self.delta_min?,
            delta_max: self.delta_max?,
            sigma: self.sigma?,
        })
    }

    pub fn is_exact(&self) -> bool {
        self.family == "all_subsets"
    }
}

/// Bound values per checkpoint; `None` where a bound does not apply.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BoundOverlays {
    pub thm1: Vec<Option<f64>>,
    pub thm2: Vec<Option<f64>>,
    pub thm3: Vec<Option<f64>>,
    pub thm4: Vec<Option<f64>>,
}

impl BoundOverlays {
    pub fn columns(&self) -> [(&'static str, &[Option<f64>]); 4] {
        [
            ("bound_thm1", &self.thm1),
            ("bound_thm2", &self.thm2),
            ("bound_thm3", &self.thm3),
            ("bound_thm4", &self.thm4),
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateResult {
    pub checkpoints: Vec<u64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// `per_run[r][j]` is run `r`'s cumulative regret at checkpoint `j`.
    pub per_run: Vec<Vec<f64>>,
    pub runs: usize,
    pub bounds: BoundOverlays,
    pub gaps: Option<GapReport>,
    pub lipschitz: Option<f64>,
    pub max_increment: Option<f64>,
    /// Per-round cap, reported when `gamma = beta = 1` and the model is Lipschitz.
    pub round_cap: Option<f64>,
    pub cap_violations: usize,
    pub oracle_fallbacks: u64,
    pub master_seed: u64,
    pub config_hash: String,
    pub wall_time_secs: f64,
    pub mu: Vec<f64>,
    pub log_axis: bool,
}

/// Runs every replicate (in parallel, at most `jobs` at once), aggregates the
/// regret curves and evaluates the bound overlays. Artifacts are written by
/// [`crate::output::write_artifacts`].
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<AggregateResult> {
    let started = Instant::now();
    let instance = &spec.instance;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<RunOutcome>> = pool.install(|| {
        (0..instance.runs)
            .into_par_iter()
            .map(|run| {
                let inst = spec.instance_for(run)?;
                simulate_run(&inst, run, &spec.checkpoints, false).map_err(|source| {
                    HarnessError::Run {
                        run,
                        seed: instance.master_seed,
                        source,
                    }
                })
            })
            .collect()
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let mut stats = vec![Welford::default(); spec.checkpoints.len()];
    for outcome in &outcomes {
        for (s, &v) in stats.iter_mut().zip(&outcome.regret) {
            s.push(v);
        }
    }

    let model = instance.reward.build(instance.k)?;
    let shared_instance = !(spec.config.resample_instance && spec.config.samples_instance());
    let gaps = if shared_instance {
        Some(gap_report(instance, model.as_ref())?)
    } else {
        None
    };
    let bounds = overlays(
        instance,
        model.as_ref(),
        gaps.as_ref().and_then(GapReport::gaps),
        &spec.checkpoints,
    );

    let max_increment = outcomes
        .iter()
        .filter_map(|o| o.max_increment)
        .reduce(f64::max);
    let round_cap = match (model.lipschitz(), instance.oracle_spec().is_exact()) {
        (Some(c), true) => Some(observation2_cap(c, instance.horizon as f64)?),
        _ => None,
    };
    let cap_violations = round_cap.map_or(0, |cap| {
        outcomes
            .iter()
            .filter(|o| o.max_increment.is_some_and(|m| m > cap + CAP_SLACK))
            .count()
    });

    Ok(AggregateResult {
        checkpoints: spec.checkpoints.clone(),
        mean: stats.iter().map(Welford::mean).collect(),
        std: stats.iter().map(Welford::std).collect(),
        oracle_fallbacks: outcomes.iter().map(|o| o.oracle_fallbacks).sum(),
        per_run: outcomes.into_iter().map(|o| o.regret).collect(),
        runs: instance.runs,
        bounds,
        gaps,
        lipschitz: model.lipschitz(),
        max_increment,
        round_cap,
        cap_violations,
        master_seed: instance.master_seed,
        config_hash: spec.config.hash(),
        wall_time_secs: started.elapsed().as_secs_f64(),
        mu: instance.mu.clone(),
        log_axis: spec.config.log_axis,
    })
}

/// Exact gaps over all availability sets when `k <= 15`; otherwise a
/// lower-bound estimate over the sets realized in run 0.
pub fn gap_report(instance: &InstanceConfig, model: &dyn RewardModel) -> Result<GapReport> {
    if instance.k <= ALL_SUBSETS_LIMIT {
        let summary = instance_gaps(
            &instance.mu,
            model,
            &AvailabilityFamily::AllSubsets,
            instance.gamma,
        )?;
        return Ok(GapReport::new("all_subsets", &summary));
    }
    let family = realized_family(instance)?;
    let summary = instance_gaps(&instance.mu, model, &family, instance.gamma)?;
    Ok(GapReport::new("realized", &summary))
}

/// Distinct nonempty availability sets drawn over the horizon in run 0.
pub fn realized_family(instance: &InstanceConfig) -> Result<AvailabilityFamily> {
    let mut sets = BTreeSet::new();
    match &instance.availability {
        Availability::Scripted(seq) => sets.extend(seq.rounds().iter().cloned()),
        Availability::Bernoulli(_) => {
            let streams = RunStreams::new(instance.master_seed, 0);
            for t in 1..=instance.horizon {
                sets.insert(draw_availability(
                    instance,
                    t,
                    &mut streams.availability_rng(t),
                )?);
                if sets.len() > REALIZED_SETS_LIMIT {
                    break;
                }
            }
        }
    }
    sets.remove(&Vec::new());
    if sets.len() > REALIZED_SETS_LIMIT {
        return Err(csucb_core::Error::BudgetExceeded {
            what: "distinct realized availability sets",
            size: sets.len(),
            limit: REALIZED_SETS_LIMIT,
        }
        .into());
    }
    if let Some(big) = sets.iter().find(|s| s.len() > BRUTE_FORCE_LIMIT) {
        return Err(csucb_core::Error::BudgetExceeded {
            what: "realized availability set in gap enumeration",
            size: big.len(),
            limit: BRUTE_FORCE_LIMIT,
        }
        .into());
    }
    Ok(AvailabilityFamily::Explicit(sets.into_iter().collect()))
}

/// Evaluates the four bounds at each checkpoint. Theorems 1 and 2 need gaps and
/// a Lipschitz constant, Theorem 3 only the constant, Theorem 4 gaps and a
/// smoothness function. Rounds below 2 have no bound.
pub fn overlays(
    instance: &InstanceConfig,
    model: &dyn RewardModel,
    gaps: Option<Gaps>,
    checkpoints: &[u64],
) -> BoundOverlays {
    let k = instance.k;
    let beta = instance.beta;
    let c = model.lipschitz();
    let f = model.smoothness();
    let column = |eval: &dyn Fn(f64) -> Option<f64>| -> Vec<Option<f64>> {
        checkpoints
            .iter()
            .map(|&t| if t < 2 { None } else { eval(t as f64) })
            .collect()
    };
    BoundOverlays {
        thm1: column(&|t| bound_thm1(k, c?, gaps?.sigma, gaps?.delta_min, beta, t).ok()),
        thm2: column(&|t| bound_thm2(k, c?, gaps?.sigma, t).ok()),
        thm3: column(&|t| bound_thm3(k, c?, t).ok()),
        thm4: column(&|t| {
            let g = gaps?;
            let f = f?;
            bound_thm4(k, g.delta_min, g.delta_max, |y| f.inverse(y), t).ok()
        }),
    }
}
