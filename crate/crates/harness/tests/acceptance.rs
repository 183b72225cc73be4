//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL ...` line to
//! stderr (visible without `--nocapture`) and then asserts the outcome.

use std::io::Write as _;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use csucb_core::analysis::{
    bound_thm1, bound_thm2, bound_thm3, bound_thm4, growth_exponent_points, instance_gaps,
    AvailabilityFamily,
};
use csucb_core::bandit::{ucb_index, ArmState};
use csucb_core::oracles::{brute_force_oracle, topk_oracle, util_oracle};
use csucb_core::rewards::{
    check_lipschitz, check_monotonicity, Declared, RewardModel, TopKReward, UtilParams, UtilReward,
};
use csucb_harness::{run_experiment, simulate_run, AggregateResult, ConfigFile, ExperimentSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HORIZON: u64 = 100_000;
const RUNS: usize = 20;
const JOBS: usize = 4;
const SEED: u64 = 1;

const ORACLE_INSTANCES: usize = 1000;
const ORACLE_TOL: f64 = 1e-12;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const GAP_TOL: f64 = 1e-12;
const RUN_BUDGET: Duration = Duration::from_secs(300);
const LOG_REGIME_MAX_SLOPE: f64 = 0.30;
const SMALL_GAP_SLOPE: (f64, f64) = (0.40, 0.80);
const SMALL_GAP_TARGET: f64 = 1e-2;
const SIGMA_TARGET: f64 = 1.0;
const SIGMA_TOL: f64 = 0.1;
const CAP_SLACK: f64 = 1e-9;
const SMOOTHNESS_TRIALS: usize = 10_000;
const DEGRADED_BETA: f64 = 0.8;
const DEGRADED_MAX_SLOPE: f64 = 0.5;
const EVALUATOR_TOL: f64 = 1e-9;

fn report(criterion: u32, pass: bool, detail: impl std::fmt::Display) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "criterion {criterion}: {verdict} {detail}"
    );
}

fn config(json: &str) -> ConfigFile {
    ConfigFile::parse(json).expect("acceptance config parses")
}

fn log_regime_config() -> ConfigFile {
    config(&format!(
        r#"{{"k": 8, "reward": {{"kind": "top_k", "K": 3}}, "experiment": {{"kind": "exp_one"}},
            "horizon": {HORIZON}, "runs": {RUNS}, "master_seed": {SEED}}}"#
    ))
}

fn small_gap_config() -> ConfigFile {
    config(&format!(
        r#"{{"k": 8, "reward": {{"kind": "top_k", "K": 3}},
            "experiment": {{"kind": "exp_two", "delta_min": {SMALL_GAP_TARGET}}},
            "horizon": {HORIZON}, "runs": {RUNS}, "master_seed": {SEED}}}"#
    ))
}

fn weak_config() -> ConfigFile {
    config(&format!(
        r#"{{"k": 8, "reward": {{"kind": "top_k", "K": 1}},
            "experiment": {{"kind": "exp_two", "delta_min": {SMALL_GAP_TARGET}, "sigma": {SIGMA_TARGET}}},
            "horizon": {HORIZON}, "runs": {RUNS}, "master_seed": {SEED}}}"#
    ))
}

struct Experiment {
    spec: ExperimentSpec,
    result: AggregateResult,
    elapsed: Duration,
}

fn execute(config: ConfigFile) -> Experiment {
    let started = Instant::now();
    let spec = ExperimentSpec::new(config, None).expect("experiment resolves");
    let result = run_experiment(&spec, JOBS).expect("experiment runs");
    Experiment {
        spec,
        result,
        elapsed: started.elapsed(),
    }
}

fn log_regime() -> &'static Experiment {
    static CELL: OnceLock<Experiment> = OnceLock::new();
    CELL.get_or_init(|| execute(log_regime_config()))
}

fn small_gap() -> &'static Experiment {
    static CELL: OnceLock<Experiment> = OnceLock::new();
    CELL.get_or_init(|| execute(small_gap_config()))
}

fn weak() -> &'static Experiment {
    static CELL: OnceLock<Experiment> = OnceLock::new();
    CELL.get_or_init(|| execute(weak_config()))
}

fn mean_points(r: &AggregateResult) -> Vec<(u64, f64)> {
    r.checkpoints
        .iter()
        .copied()
        .zip(r.mean.iter().copied())
        .collect()
}

/// Checkpoints at which the mean exceeds a bound column (ignoring blanks);
/// also returns how many checkpoints carried a bound.
fn exceedances(r: &AggregateResult, bound: &[Option<f64>]) -> (Vec<u64>, usize) {
    let mut over = Vec::new();
    let mut checked = 0;
    for (j, b) in bound.iter().enumerate() {
        if let Some(b) = b {
            checked += 1;
            if r.mean[j] > *b {
                over.push(r.checkpoints[j]);
            }
        }
    }
    (over, checked)
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut worst = 0.0f64;
    for _ in 0..ORACLE_INSTANCES {
        let k = rng.random_range(1..=10);
        let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let mut available: Vec<usize> = (0..k).filter(|_| rng.random_bool(0.6)).collect();
        if available.is_empty() {
            available.push(rng.random_range(0..k));
        }
        let budget = rng.random_range(1..=k);
        let topk = TopKReward::new(k, budget).unwrap();
        let fast = topk_oracle(&available, &w, budget).unwrap();
        let exact = brute_force_oracle(&available, &w, &topk).unwrap();
        worst = worst
            .max((topk.evaluate(fast.members(), &w) - topk.evaluate(exact.members(), &w)).abs());

        let params = UtilParams {
            a: (0..k).map(|_| rng.random_range(0.1..2.0)).collect(),
            b: (0..k).map(|_| rng.random_range(0.0..1.0)).collect(),
        };
        let util = UtilReward::new(params.clone()).unwrap();
        let fast = util_oracle(&available, &w, &params).unwrap();
        let exact = brute_force_oracle(&available, &w, &util).unwrap();
        worst = worst
            .max((util.evaluate(fast.members(), &w) - util.evaluate(exact.members(), &w)).abs());
    }
    let elapsed = started.elapsed();
    let pass = worst <= ORACLE_TOL && elapsed < ORACLE_BUDGET;
    report(
        1,
        pass,
        format!("max |reward diff| = {worst:e} over {ORACLE_INSTANCES} instances in {elapsed:.2?}"),
    );
    assert!(pass);
}

/// Independent gap enumeration for top-K: every availability mask, every
/// subset of it with at most `budget` members.
fn reference_topk_gaps(mu: &[f64], budget: usize) -> (f64, f64) {
    let k = mu.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for avail in 1u32..1 << k {
        let rewards: Vec<f64> = (1u32..1 << k)
            .filter(|s| s & !avail == 0 && (s.count_ones() as usize) <= budget)
            .map(|s| (0..k).filter(|i| s >> i & 1 == 1).map(|i| mu[i]).sum())
            .collect();
        let opt = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for r in rewards {
            let gap = opt - r;
            if gap > 0.0 {
                lo = lo.min(gap);
                hi = hi.max(gap);
            }
        }
    }
    (lo, hi)
}

#[test]
fn criterion_02_gap_enumeration() {
    let gaps = |mu: &[f64]| {
        let model = TopKReward::new(mu.len(), 1).unwrap();
        instance_gaps(mu, &model, &AvailabilityFamily::AllSubsets, 1.0)
            .unwrap()
            .gaps
            .unwrap()
    };
    let two = gaps(&[0.9, 0.4]);
    let three = gaps(&[0.9, 0.7, 0.4]);
    let (ref_lo, ref_hi) = reference_topk_gaps(&[0.9, 0.7, 0.4], 1);
    let pass = two.delta_min == 0.5
        && two.delta_max == 0.5
        && two.sigma == 1.0
        && (three.delta_min - 0.2).abs() <= GAP_TOL
        && (three.delta_max - 0.5).abs() <= GAP_TOL
        && three.delta_min == ref_lo
        && three.delta_max == ref_hi
        && reference_topk_gaps(&[0.9, 0.4], 1) == (0.5, 0.5);
    report(
        2,
        pass,
        format!(
            "k=2: ({}, {}, {}); k=3: ({}, {})",
            two.delta_min, two.delta_max, two.sigma, three.delta_min, three.delta_max
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_logarithmic_regime() {
    let e = log_regime();
    let r = &e.result;
    let gaps = r.gaps.as_ref().expect("gaps computed");
    let (over, checked) = exceedances(r, &r.bounds.thm1);
    let slope = growth_exponent_points(&mean_points(r), 10_000, HORIZON);
    let pass = gaps.is_exact()
        && over.is_empty()
        && checked > 0
        && slope.as_ref().is_ok_and(|s| *s < LOG_REGIME_MAX_SLOPE)
        && e.elapsed < RUN_BUDGET;
    report(
        3,
        pass,
        format!(
            "mean R(T) = {:.2}, thm1 exceeded at {over:?} of {checked} checkpoints, slope[1e4,1e5] = {slope:?}, Delta_min = {:?}, sigma = {:?}, {:.1?}",
            r.mean.last().unwrap(),
            gaps.delta_min,
            gaps.sigma,
            e.elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_small_gap_regime() {
    let e = small_gap();
    let r = &e.result;
    let delta_min = r.gaps.as_ref().and_then(|g| g.delta_min).unwrap();
    let (over, checked) = exceedances(r, &r.bounds.thm3);
    let slope = growth_exponent_points(&mean_points(r), 1_000, HORIZON);
    let pass = ((delta_min - SMALL_GAP_TARGET) / SMALL_GAP_TARGET).abs() <= 0.1
        && over.is_empty()
        && checked > 0
        && slope
            .as_ref()
            .is_ok_and(|s| (SMALL_GAP_SLOPE.0..=SMALL_GAP_SLOPE.1).contains(s));
    report(
        4,
        pass,
        format!(
            "Delta_min = {delta_min}, mean R(T) = {:.2}, thm3 exceeded at {over:?} of {checked} checkpoints, slope[1e3,1e5] = {slope:?}",
            r.mean.last().unwrap()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_weak_instance_dependent_regime() {
    let e = weak();
    let r = &e.result;
    let sigma = r.gaps.as_ref().and_then(|g| g.sigma).unwrap();
    let (over, checked) = exceedances(r, &r.bounds.thm2);
    let pass = (sigma - SIGMA_TARGET).abs() <= SIGMA_TOL && over.is_empty() && checked > 0;
    report(
        5,
        pass,
        format!(
            "sigma = {sigma}, mean R(T) = {:.2}, thm2 exceeded at {over:?} of {checked} checkpoints",
            r.mean.last().unwrap()
        ),
    );
    assert!(pass);
}

/// Plain CUCB over all `k` arms with a top-K oracle: pull everything until
/// each arm has a sample, then the `budget` highest indices (lowest index on ties).
struct ReferenceCucb {
    pulls: Vec<u64>,
    sums: Vec<f64>,
    t: u64,
    budget: usize,
}

impl ReferenceCucb {
    fn choose(&self) -> Vec<usize> {
        let k = self.pulls.len();
        if self.pulls.contains(&0) {
            return (0..k).collect();
        }
        let ln_t = (self.t as f64).ln();
        let index: Vec<f64> = (0..k)
            .map(|i| {
                self.sums[i] / self.pulls[i] as f64
                    + (3.0 * ln_t / (2.0 * self.pulls[i] as f64)).sqrt()
            })
            .collect();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| index[b].total_cmp(&index[a]).then(a.cmp(&b)));
        let mut chosen: Vec<usize> = order.into_iter().take(self.budget).collect();
        chosen.sort_unstable();
        chosen
    }

    fn observe(&mut self, feedback: &[(usize, f64)]) {
        for &(i, x) in feedback {
            self.pulls[i] += 1;
            self.sums[i] += x;
        }
        self.t += 1;
    }
}

#[test]
fn criterion_06_non_sleeping_reduction() {
    let mu = &log_regime().spec.instance.mu;
    let mut file = log_regime_config();
    file.experiment = Default::default();
    file.mu = Some(mu.clone());
    file.avail_p = Some(vec![1.0; mu.len()]);
    let k = mu.len();
    let budget = 3;

    let spec = ExperimentSpec::new(file.clone(), None).unwrap();
    let mut mismatch = None;
    for run in 0..RUNS {
        let trace = simulate_run(&spec.instance, run, &[HORIZON], true)
            .unwrap()
            .trace
            .unwrap();
        let mut reference = ReferenceCucb {
            pulls: vec![0; k],
            sums: vec![0.0; k],
            t: 1,
            budget,
        };
        for step in &trace {
            let pulled = step.pulled.as_ref().map(|s| s.members().to_vec());
            if step.available.len() != k || pulled.as_deref() != Some(reference.choose().as_slice())
            {
                mismatch = Some((run, step.t));
                break;
            }
            reference.observe(&step.feedback);
        }
        if mismatch.is_some() {
            break;
        }
    }

    let result = run_experiment(&spec, JOBS).unwrap();
    let model = TopKReward::new(k, budget).unwrap();
    let full = instance_gaps(
        mu,
        &model,
        &AvailabilityFamily::Explicit(vec![(0..k).collect()]),
        1.0,
    )
    .unwrap()
    .gaps
    .unwrap();
    let c = model.lipschitz().unwrap();
    let over: Vec<u64> = result
        .checkpoints
        .iter()
        .zip(&result.mean)
        .filter(|(&t, _)| t >= 2)
        .filter(|(&t, &m)| m > bound_thm1(k, c, full.sigma, full.delta_min, 1.0, t as f64).unwrap())
        .map(|(&t, _)| t)
        .collect();
    let pass = mismatch.is_none() && over.is_empty();
    report(
        6,
        pass,
        format!(
            "trace mismatch = {mismatch:?} over {RUNS} runs x {HORIZON} rounds; full-availability Delta_min = {}, sigma = {}, mean R(T) = {:.2}, thm1 exceeded at {over:?}",
            full.delta_min,
            full.sigma,
            result.mean.last().unwrap()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_per_round_cap() {
    let cap = |c: f64| c * (1.0 + (3.0 * (HORIZON as f64).ln() / 2.0).sqrt());
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, e, c) in [
        ("3", log_regime(), 3.0),
        ("4", small_gap(), 3.0),
        ("5", weak(), 1.0),
    ] {
        let r = &e.result;
        let limit = cap(c);
        let max = r.max_increment.unwrap();
        let ok = max <= limit + CAP_SLACK && r.cap_violations == 0;
        pass &= ok;
        lines.push(format!(
            "exp {name}: max increment {max:.4} <= cap {limit:.4}: {ok}"
        ));
    }
    report(7, pass, lines.join("; "));
    assert!(pass);
}

#[test]
fn criterion_08_smoothness_suites() {
    let util = UtilReward::new(UtilParams {
        a: vec![0.5, 1.0, 1.5, 2.0, 0.8, 1.2],
        b: vec![0.1, 0.7, 0.3, 0.9, 0.2, 0.4],
    })
    .unwrap();
    let topk = TopKReward::new(8, 4).unwrap();
    let clean = |m: &dyn RewardModel, seed| {
        check_monotonicity(m, SMOOTHNESS_TRIALS, seed)
            .unwrap()
            .violations
            .len()
            + check_lipschitz(m, SMOOTHNESS_TRIALS, seed)
                .unwrap()
                .violations
                .len()
    };
    let util_bad = clean(&util, 8);
    let topk_bad = clean(&topk, 9);
    let under = Declared::new(TopKReward::new(8, 4).unwrap())
        .with_lipschitz(4.0 / 2.0)
        .unwrap();
    let caught = check_lipschitz(&under, SMOOTHNESS_TRIALS, 10)
        .unwrap()
        .violations
        .len();
    let pass = util_bad == 0 && topk_bad == 0 && caught > 0 && util.lipschitz() == Some(7.0);
    report(
        8,
        pass,
        format!("util violations = {util_bad}, top-K violations = {topk_bad}, C = K/2 violations = {caught}"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_degraded_oracle() {
    let mut file = log_regime_config();
    file.beta = DEGRADED_BETA;
    let e = execute(file);
    let r = &e.result;
    let slope = growth_exponent_points(&mean_points(r), 10_000, HORIZON);
    let pass = slope.as_ref().is_ok_and(|s| *s < DEGRADED_MAX_SLOPE);
    let magnitude: Vec<(u64, f64)> = mean_points(r)
        .into_iter()
        .map(|(t, v)| (t, v.abs()))
        .collect();
    report(
        9,
        pass,
        format!(
            "slope[1e4,1e5] = {slope:?}; mean R(1e4) = {:.2}, mean R(T) = {:.2}, slope of |R| = {:?}, fallbacks = {}",
            r.mean[r.checkpoints.iter().position(|&t| t >= 10_000).unwrap()],
            r.mean.last().unwrap(),
            growth_exponent_points(&magnitude, 10_000, HORIZON).ok(),
            r.oracle_fallbacks
        ),
    );
    assert!(pass, "discounted regret growth exponent: {slope:?}");
}

/// Apery's constant from the Euler-type series
/// `zeta(3) = 5/2 * sum (-1)^(n+1) / (n^3 C(2n, n))`, converging geometrically.
fn zeta3_series() -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0;
    for n in 1..40u32 {
        let nf = f64::from(n);
        binom *= (2.0 * nf - 1.0) * 2.0 / nf;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign / (nf * nf * nf * binom);
    }
    2.5 * sum
}

#[test]
fn criterion_10_numeric_evaluators() {
    let z = zeta3_series();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let mut worst = 0.0f64;
    for i in 0..20u32 {
        let fi = f64::from(i);
        let k = 1 + (i as usize * 7) % 12;
        let c = 1.0 + 0.37 * fi;
        let sigma = 1.0 + 3.3 * fi;
        let dmin = 0.002 + 0.013 * fi;
        let dmax = dmin * (1.0 + fi);
        let beta = 0.05 + 0.05 * fi;
        let t = 10f64.powf(1.0 + 0.3 * fi);
        let ln_t = t.ln();
        let lam = 1.0 + (3.0 * ln_t / 2.0).sqrt();

        let thm1 = 2.0 * beta * k as f64 * c * (z * lam + 3.0 * sigma * c * ln_t / dmin);
        let thm2 = 4.0 * c * (6.0 * k as f64 * sigma * t * ln_t).powf(0.5) + 2.0 * k as f64 * c * z;
        let thm3 = c * (1.0 + lam) * (6.0 * k as f64 * t * t * ln_t).powf(1.0 / 3.0)
            + 2.0 * k as f64 * lam * c * z;
        let f_inv = dmin / c;
        let thm4 = (6.0 * ln_t / (f_inv * f_inv) + 2.0 * z) * k as f64 * dmax;

        worst = worst
            .max(rel(bound_thm1(k, c, sigma, dmin, beta, t).unwrap(), thm1))
            .max(rel(bound_thm2(k, c, sigma, t).unwrap(), thm2))
            .max(rel(bound_thm3(k, c, t).unwrap(), thm3))
            .max(rel(bound_thm4(k, dmin, dmax, |y| y / c, t).unwrap(), thm4));

        let pulls = 1 + (i as u64 * 131) % 997;
        let sum = (pulls as f64 * (0.05 * fi)).min(pulls as f64);
        let round = pulls + 1 + i as u64 * 4099;
        let arm = ArmState::from_counts(pulls, sum).unwrap();
        let expected = sum / pulls as f64 + (1.5 * (round as f64).ln() / pulls as f64).sqrt();
        worst = worst.max(rel(ucb_index(&arm, round).unwrap(), expected));
    }
    let pass = worst <= EVALUATOR_TOL;
    report(
        10,
        pass,
        format!("max relative deviation = {worst:e} on 20 grid points"),
    );
    assert!(pass);
}

#[test]
fn criterion_11_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        r#"{"k": 6, "reward": {"kind": "top_k", "K": 2}, "experiment": {"kind": "exp_one"},
            "horizon": 20000, "runs": 6, "master_seed": 77}"#,
    )
    .unwrap();
    let run = |out: &str, jobs: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_csucb"))
            .args(["run", "--config"])
            .arg(&config_path)
            .args(["--seed", "77", "--jobs", jobs, "--out"])
            .arg(dir.path().join(out))
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        std::fs::read(dir.path().join(out).join("regret.csv")).unwrap()
    };
    let first = run("a", "4");
    let second = run("b", "4");
    let serial = run("c", "1");
    let pass = !first.is_empty() && first == second && first == serial;
    report(
        11,
        pass,
        format!(
            "{} CSV bytes; repeat identical: {}; jobs=1 identical: {}",
            first.len(),
            first == second,
            first == serial
        ),
    );
    assert!(pass);
}
