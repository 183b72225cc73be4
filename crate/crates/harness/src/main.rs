use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use csucb_harness::commands::{
    bound_grid, cmd_bounds, cmd_check_smoothness, cmd_gaps, BoundParams, GapFamily,
};
use csucb_harness::error::EXIT_VALIDATION;
use csucb_harness::output::write_artifacts;
use csucb_harness::{run_experiment, ConfigFile, ExperimentSpec, HarnessError, Overrides};

#[derive(Parser)]
#[command(
    name = "csucb",
    version,
    about = "CS-UCB sleeping combinatorial bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Draw a fresh instance for every run (exp_one / exp_two only).
    #[arg(long)]
    resample_instance: bool,
    /// Replay availability sets from a file instead of sampling them.
    #[arg(long)]
    availability_script: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> csucb_harness::Result<ConfigFile> {
        let mut config = ConfigFile::load(&self.config)?;
        config.apply(&Overrides {
            seed: self.seed,
            horizon: self.horizon,
            runs: self.runs,
            gamma: self.gamma,
            beta: self.beta,
            resample_instance: self.resample_instance,
            availability_script: self.availability_script.clone(),
        });
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate all runs and write regret.csv, regret.svg and summary.json.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Worker threads.
        #[arg(long, default_value_t = 4)]
        jobs: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print Delta_min, Delta_max and sigma of the configured instance.
    Gaps {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t = GapFamily::All)]
        family: GapFamily,
        /// Repeat for the per-availability-set table.
        #[arg(short, long, action = clap::ArgAction::Count)]
        verbose: u8,
    },
    /// Print bound curves as CSV over a geometric grid of horizons.
    Bounds {
        /// Take k, C, gaps and beta from a configuration instead of the flags below.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "config")]
        k: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        delta_min: Option<f64>,
        #[arg(long)]
        delta_max: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Slope of the linear smoothness function (defaults to C).
        #[arg(long)]
        f_slope: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        horizon: u64,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Check monotonicity, Lipschitz and bounded smoothness of the reward model.
    CheckSmoothness {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Declare this Lipschitz constant instead of the model's own.
        #[arg(long)]
        lipschitz: Option<f64>,
        #[arg(long)]
        f_slope: Option<f64>,
    },
}

fn run(cli: Cli) -> csucb_harness::Result<i32> {
    match cli.command {
        Command::Run { config, jobs, out } => {
            let file = config.load()?;
            let spec = ExperimentSpec::new(file, Some(out.clone()))?;
            let result = run_experiment(&spec, jobs)?;
            let title = format!(
                "CS-UCB: k = {}, T = {}, {} runs",
                spec.instance.k, spec.instance.horizon, spec.instance.runs
            );
            for path in write_artifacts(&result, &out, &title)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
        Command::Gaps {
            config,
            family,
            verbose,
        } => {
            print!("{}", cmd_gaps(&config.load()?, family, verbose)?);
            Ok(0)
        }
        Command::Bounds {
            config,
            k,
            c,
            sigma,
            delta_min,
            delta_max,
            beta,
            f_slope,
            horizon,
            points,
        } => {
            let params = match config {
                Some(path) => BoundParams {
                    f_slope,
                    ..BoundParams::from_config(&ConfigFile::load(&path)?)?
                },
                None => BoundParams {
                    k: k.expect("clap enforces --k"),
                    c,
                    sigma,
                    delta_min,
                    delta_max,
                    beta,
                    f_slope,
                },
            };
            print!("{}", cmd_bounds(&params, &bound_grid(horizon, points))?);
            Ok(0)
        }
        Command::CheckSmoothness {
            config,
            trials,
            seed,
            lipschitz,
            f_slope,
        } => {
            let reports = cmd_check_smoothness(
                &ConfigFile::load(&config)?,
                trials,
                seed,
                lipschitz,
                f_slope,
            )?;
            print!("{}", reports.render());
            Ok(if reports.passed() { 0 } else { EXIT_VALIDATION })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            if let Some(hint) = HarnessError::hint(&err) {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
