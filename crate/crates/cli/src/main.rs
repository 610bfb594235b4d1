//! Batch front end: every subcommand resolves its flags into an
//! `ExperimentConfig`, runs it, and leaves a manifest that `run --config`
//! replays byte-for-byte. Errors go to stderr as a single JSON object with a
//! nonzero exit status.

mod config;
mod runners;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use config::*;

#[derive(Parser)]
#[command(name = "wolbachia", version, about = "Spatial Wolbachia release planning")]
struct Cli {
    /// RNG seed for randomized scenarios.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for Monte Carlo sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the reaction landmarks and tabulate f and F.
    Reaction {
        /// TOML file with reaction parameters (default: wMel estimates).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Tabulate the stationary bubble profile at a given height.
    Bubble {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Sweep bubble heights, comparing support radii with energy radii.
    Radius {
        #[arg(long, default_value_t = 1)]
        dimension: usize,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 96)]
        samples: usize,
    },
    /// Sizing constants for one central Gaussian release.
    SingleRelease {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        n0: f64,
    },
    /// Mass requirement for k equally spaced releases.
    Spacing {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        n0: f64,
    },
    /// Success probability of k uniform releases over a box-size sweep.
    Probability {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l_min: Option<f64>,
        #[arg(long)]
        l_max: Option<f64>,
        #[arg(long, default_value_t = 21)]
        steps: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Evaluate the recursion instead of sampling.
        #[arg(long)]
        exact: bool,
        /// Use the pessimistic gap constant 1/sqrt(2).
        #[arg(long)]
        degraded_constant: bool,
    },
    /// Probability that repeated releases cover a bubble-sized ball.
    Cover {
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![4, 8, 16, 32, 64])]
        k_values: Vec<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        n0: f64,
        #[arg(long, default_value_t = 3.0)]
        mass_factor: f64,
        #[arg(long, default_value_t = 1.05)]
        box_factor: f64,
        #[arg(long, default_value_t = 2000)]
        samples: u64,
    },
    /// Run the reaction-diffusion solver from a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Structural checks behind uniqueness of the minimal bubble height.
    AppendixCheck {
        #[arg(long, default_value_t = 4096)]
        grid: usize,
    },
    /// Regenerate the data behind every figure.
    ReproduceFigures,
    /// Execute a full experiment config (e.g. a previous run's manifest).
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_params(path: &Option<PathBuf>) -> Result<wolbachia_core::reaction::ReactionParams> {
    match path {
        None => Ok(Default::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read parameter file {}", p.display()))?;
            toml::from_str(&text)
                .with_context(|| format!("invalid reaction parameters in {}", p.display()))
        }
    }
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

fn build_config(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    let seed = cli.seed.unwrap_or(0);
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("artifacts"));
    let cfg = |scenario: Scenario| ExperimentConfig {
        reaction: Default::default(),
        seed,
        out: out.clone(),
        scenario,
    };
    Ok(Some(match &cli.command {
        Command::Reaction { params, samples } => {
            let mut c = cfg(Scenario::Reaction(ReactionScenario { samples: *samples }));
            c.reaction = load_params(params)?;
            c
        }
        Command::Bubble {
            alpha,
            sigma,
            samples,
        } => cfg(Scenario::Bubble(BubbleScenario {
            alpha: *alpha,
            sigma: *sigma,
            samples: *samples,
        })),
        Command::Radius {
            dimension,
            sigma,
            samples,
        } => cfg(Scenario::Radius(RadiusScenario {
            dimension: *dimension,
            sigma: *sigma,
            samples: *samples,
        })),
        Command::SingleRelease { params, n0 } => {
            let mut c = cfg(Scenario::SingleRelease(SingleReleaseScenario {
                n0: *n0,
                ..Default::default()
            }));
            c.reaction = load_params(params)?;
            c
        }
        Command::Spacing { k, sigma, n0 } => cfg(Scenario::Spacing(SpacingScenario {
            k: *k,
            sigma: *sigma,
            n0: *n0,
        })),
        Command::Probability {
            k,
            l_min,
            l_max,
            steps,
            samples,
            exact,
            degraded_constant,
        } => cfg(Scenario::Probability(ProbabilityScenario {
            k: *k,
            l_min: *l_min,
            l_max: *l_max,
            steps: *steps,
            samples: *samples,
            exact: *exact,
            degraded_constant: *degraded_constant,
        })),
        Command::Cover {
            d,
            k_values,
            alpha,
            sigma,
            n0,
            mass_factor,
            box_factor,
            samples,
        } => cfg(Scenario::Cover(CoverScenario {
            dim: *d,
            k_values: k_values.clone(),
            alpha: *alpha,
            sigma: *sigma,
            n0: *n0,
            mass_factor: *mass_factor,
            box_factor: *box_factor,
            samples: *samples,
        })),
        Command::AppendixCheck { grid } => {
            cfg(Scenario::AppendixCheck(AppendixScenario { grid: *grid }))
        }
        Command::Simulate { config } => {
            let mut c = load_config(config)?;
            if !matches!(c.scenario, Scenario::Simulate(_)) {
                bail!(
                    "config {} holds a {} scenario, `simulate` needs a simulate scenario",
                    config.display(),
                    c.scenario.name()
                );
            }
            apply_overrides(&mut c, cli);
            c
        }
        Command::Run { config } => {
            let mut c = load_config(config)?;
            apply_overrides(&mut c, cli);
            c
        }
        Command::ReproduceFigures => return Ok(None),
    }))
}

fn apply_overrides(cfg: &mut ExperimentConfig, cli: &Cli) {
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot size the thread pool")?;
    }
    match build_config(cli)? {
        Some(cfg) => runners::run_config(&cfg),
        None => runners::reproduce_figures(
            Default::default(),
            &cli.out.clone().unwrap_or_else(|| PathBuf::from("figures")),
            cli.seed.unwrap_or(0),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = serde_json::json!({ "error": format!("{err:#}") });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
