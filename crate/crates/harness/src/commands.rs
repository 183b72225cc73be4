use std::fmt::Write as _;

use csucb_core::analysis::{
    bound_thm1, bound_thm2, bound_thm3, bound_thm4, instance_gaps, AvailabilityFamily, GapSummary,
};
use csucb_core::rewards::{
    check_bounded_smoothness, check_lipschitz, check_monotonicity, Declared, SmoothnessFn,
    ViolationReport,
};
use csucb_core::RewardModel;

use crate::config::ConfigFile;
use crate::error::{HarnessError, Result};
use crate::experiment::{gap_report, realized_family};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GapFamily {
    /// Every nonempty availability set (exact; k <= 15).
    All,
    /// Only the full arm set, as in the non-sleeping setting.
    Full,
    /// The sets drawn over the horizon in run 0 (a lower-bound estimate).
    Realized,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| x.to_string())
}

/// Prints `Delta_min`, `Delta_max` and `sigma` of the configured instance, plus
/// the per-set table when `verbosity >= 1`.
pub fn cmd_gaps(config: &ConfigFile, family: GapFamily, verbosity: u8) -> Result<String> {
    let instance = config.instance(config.instance_seed(0))?;
    let model = instance.reward.build(instance.k)?;
    let (label, fam) = match family {
        GapFamily::All => ("all_subsets", AvailabilityFamily::AllSubsets),
        GapFamily::Full => (
            "full",
            AvailabilityFamily::Explicit(vec![(0..instance.k).collect()]),
        ),
        GapFamily::Realized => (
            "realized (lower-bound estimate)",
            realized_family(&instance)?,
        ),
    };
    let summary: GapSummary = instance_gaps(&instance.mu, model.as_ref(), &fam, instance.gamma)?;
    let mut out = String::new();
    let _ = writeln!(out, "family: {label}");
    let _ = writeln!(out, "gamma: {}", summary.gamma);
    let _ = writeln!(out, "delta_min: {}", opt(summary.gaps.map(|g| g.delta_min)));
    let _ = writeln!(out, "delta_max: {}", opt(summary.gaps.map(|g| g.delta_max)));
    let _ = writeln!(out, "sigma: {}", opt(summary.gaps.map(|g| g.sigma)));
    if verbosity >= 1 {
        let _ = writeln!(out, "available,opt,delta_min,delta_max");
        for row in &summary.table {
            let set: Vec<String> = row.available.iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                set.join(" "),
                row.optimum,
                opt(row.delta_min),
                opt(row.delta_max)
            );
        }
    }
    Ok(out)
}

/// Parameters of the bound curves. Missing gap parameters make the bounds that
/// need them inapplicable.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub k: usize,
    pub c: f64,
    pub sigma: Option<f64>,
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub beta: f64,
    /// Slope of a linear smoothness function; defaults to `c`.
    pub f_slope: Option<f64>,
}

impl BoundParams {
    /// Derives the parameters from a config's instance and its exact gaps.
    pub fn from_config(config: &ConfigFile) -> Result<Self> {
        let instance = config.instance(config.instance_seed(0))?;
        let model = instance.reward.build(instance.k)?;
        let gaps = gap_report(&instance, model.as_ref())?;
        let c = model.lipschitz().ok_or_else(|| {
            HarnessError::Config("the reward model declares no Lipschitz constant".into())
        })?;
        Ok(Self {
            k: instance.k,
            c,
            sigma: gaps.sigma,
            delta_min: gaps.delta_min,
            delta_max: gaps.delta_max,
            beta: instance.beta,
            f_slope: None,
        })
    }
}

/// Geometric grid of `points` rounds in `[2, T]`, always ending at `T`.
pub fn bound_grid(horizon: u64, points: usize) -> Vec<u64> {
    let horizon = horizon.max(2);
    let span = (horizon as f64 / 2.0).ln();
    let n = points.max(2);
    let mut grid: Vec<u64> = (0..n)
        .map(|i| (2.0 * (span * i as f64 / (n - 1) as f64).exp()).round() as u64)
        .map(|t| t.clamp(2, horizon))
        .collect();
    grid.push(horizon);
    grid.dedup();
    grid
}

/// CSV with columns `t,bound_thm1,bound_thm2,bound_thm3,bound_thm4`.
pub fn cmd_bounds(p: &BoundParams, grid: &[u64]) -> Result<String> {
    let sigma = p.sigma.or(match (p.delta_min, p.delta_max) {
        (Some(lo), Some(hi)) => Some(hi / lo),
        _ => None,
    });
    let f = SmoothnessFn::linear(p.f_slope.unwrap_or(p.c))?;
    // Validate once so that bad parameters fail loudly instead of leaving blanks.
    bound_thm3(p.k, p.c, 2.0)?;
    let mut out = String::from("t,bound_thm1,bound_thm2,bound_thm3,bound_thm4\n");
    for &t in grid {
        let t_f = t as f64;
        let thm1 = match (sigma, p.delta_min) {
            (Some(s), Some(d)) => Some(bound_thm1(p.k, p.c, s, d, p.beta, t_f)?),
            _ => None,
        };
        let thm2 = sigma.map(|s| bound_thm2(p.k, p.c, s, t_f)).transpose()?;
        let thm3 = bound_thm3(p.k, p.c, t_f)?;
        let thm4 = match (p.delta_min, p.delta_max) {
            (Some(lo), Some(hi)) => Some(bound_thm4(p.k, lo, hi, |y| f.inverse(y), t_f)?),
            _ => None,
        };
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{t},{},{},{thm3},{}",
            cell(thm1),
            cell(thm2),
            cell(thm4)
        );
    }
    Ok(out)
}

/// Reports of the three smoothness checks, in order: monotonicity, Lipschitz,
/// bounded smoothness.
pub struct SmoothnessReports {
    pub reports: Vec<(&'static str, ViolationReport)>,
}

impl SmoothnessReports {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|(_, r)| r.passed())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, r) in &self.reports {
            let verdict = if r.passed() { "ok" } else { "VIOLATED" };
            let _ = writeln!(
                out,
                "{name}: {verdict} ({} violations / {} trials)",
                r.violations.len(),
                r.trials
            );
            if let Some(v) = r.violations.first() {
                let _ = writeln!(
                    out,
                    "  first: S = {:?}, observed {} > allowed {}",
                    v.set, v.observed, v.allowed
                );
            }
        }
        out
    }
}

/// Runs the property checks on the configured model, optionally with an
/// overriding declared Lipschitz constant or linear smoothness slope.
pub fn cmd_check_smoothness(
    config: &ConfigFile,
    trials: usize,
    seed: u64,
    lipschitz: Option<f64>,
    f_slope: Option<f64>,
) -> Result<SmoothnessReports> {
    config.reward.validate(config.k)?;
    let base = config.reward.build(config.k)?;
    let c = lipschitz.or(base.lipschitz());
    let slope = f_slope.or(c);
    let mut model = Declared::new(base);
    if let Some(c) = c {
        model = model.with_lipschitz(c)?;
    }
    if let Some(s) = slope {
        model = model.with_smoothness(SmoothnessFn::linear(s)?);
    }
    let model: &dyn RewardModel = &model;
    Ok(SmoothnessReports {
        reports: vec![
            ("monotonicity", check_monotonicity(model, trials, seed)?),
            ("lipschitz", check_lipschitz(model, trials, seed)?),
            (
                "bounded_smoothness",
                check_bounded_smoothness(model, trials, seed)?,
            ),
        ],
    })
}
