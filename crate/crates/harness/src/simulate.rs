use csucb_core::analysis::{OptimumCache, RegretLedger};
use csucb_core::environment::{draw_availability, draw_feedback, InstanceConfig, RunStreams};
use csucb_core::oracles::{degrade, exact_oracle, Oracle};
use csucb_core::{CsUcb, Result, SuperArm};

/// What happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub t: u64,
    pub available: Vec<usize>,
    /// `None` when nothing was available.
    pub pulled: Option<SuperArm>,
    pub feedback: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run: usize,
    /// Cumulative sleeping regret at each checkpoint.
    pub regret: Vec<f64>,
    pub max_increment: Option<f64>,
    /// Times the degraded oracle fell back to a random super-arm.
    pub oracle_fallbacks: u64,
    pub trace: Option<Vec<TraceStep>>,
}

/// Plays `instance.horizon` rounds of CS-UCB for replicate `run`.
///
/// Empty rounds advance the clock and cost nothing, forced singleton rounds
/// cost nothing, and cold-start rounds that pull an infeasible set are charged
/// against the worst feasible super-arm.
pub fn simulate_run(
    instance: &InstanceConfig,
    run: usize,
    checkpoints: &[u64],
    record_trace: bool,
) -> Result<RunOutcome> {
    let model = instance.reward.build(instance.k)?;
    let spec = instance.oracle_spec();
    let streams = RunStreams::new(instance.master_seed, run as u64);
    let mut oracle: Box<dyn Oracle + Send> = exact_oracle(&instance.reward);
    let mut degraded = if spec.is_exact() {
        None
    } else {
        Some(degrade(
            exact_oracle(&instance.reward),
            spec,
            streams.oracle_seed(),
        )?)
    };

    let mut policy = CsUcb::new(instance.k)?;
    let mut cache = OptimumCache::new(model.as_ref(), &instance.mu)?;
    let mut ledger = RegretLedger::with_capacity(spec, instance.horizon as usize)?;
    let mut trace = record_trace.then(Vec::new);

    for t in 1..=instance.horizon {
        let available = draw_availability(instance, t, &mut streams.availability_rng(t))?;
        if available.is_empty() {
            policy.skip_round();
            ledger.record_round(t, &available, None, &mut cache)?;
            if let Some(trace) = trace.as_mut() {
                trace.push(TraceStep {
                    t,
                    available,
                    pulled: None,
                    feedback: Vec::new(),
                });
            }
            continue;
        }
        let cold = available.iter().any(|&i| policy.arms()[i].pulls() == 0);
        let chooser: &mut dyn Oracle = match degraded.as_mut() {
            Some(d) => d,
            None => &mut oracle,
        };
        let pulled = policy.step(&available, chooser, model.as_ref())?;
        if available.len() == 1 {
            ledger.record_forced(t, &available, &pulled, &mut cache)?;
        } else if cold {
            ledger.record_cold_start(t, &available, &pulled, &mut cache)?;
        } else {
            ledger.record_round(t, &available, Some(&pulled), &mut cache)?;
        }
        let feedback = draw_feedback(&pulled, &instance.mu, &mut streams.feedback_rng(t))?;
        policy.update(&pulled, &feedback)?;
        if let Some(trace) = trace.as_mut() {
            trace.push(TraceStep {
                t,
                available,
                pulled: Some(pulled),
                feedback,
            });
        }
    }

    let cumulative = ledger.cumulative();
    let regret = checkpoints
        .iter()
        .map(|&t| cumulative[(t as usize).min(cumulative.len() - 1)])
        .collect();
    Ok(RunOutcome {
        run,
        regret,
        max_increment: ledger.max_increment(),
        oracle_fallbacks: degraded.map_or(0, |d| d.fallbacks()),
        trace,
    })
}
