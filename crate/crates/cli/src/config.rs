//! Config file schema shared by the subcommands, `run --config`, and the
//! manifests echoed into every output directory. Unknown keys are rejected
//! so a typo cannot silently fall back to a default.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use wolbachia_core::reaction::ReactionParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Reaction parameters; defaults are the wMel field estimates.
    #[serde(default)]
    pub reaction: ReactionParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub scenario: Scenario,
}

fn default_out() -> PathBuf {
    PathBuf::from("artifacts")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Reaction(ReactionScenario),
    Bubble(BubbleScenario),
    Radius(RadiusScenario),
    SingleRelease(SingleReleaseScenario),
    Spacing(SpacingScenario),
    Probability(ProbabilityScenario),
    Cover(CoverScenario),
    Simulate(SimulateScenario),
    AppendixCheck(AppendixScenario),
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Reaction(_) => "reaction",
            Scenario::Bubble(_) => "bubble",
            Scenario::Radius(_) => "radius",
            Scenario::SingleRelease(_) => "single-release",
            Scenario::Spacing(_) => "spacing",
            Scenario::Probability(_) => "probability",
            Scenario::Cover(_) => "cover",
            Scenario::Simulate(_) => "simulate",
            Scenario::AppendixCheck(_) => "appendix-check",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReactionScenario {
    /// Grid intervals for the f/F profile table.
    pub samples: usize,
}

impl Default for ReactionScenario {
    fn default() -> Self {
        ReactionScenario { samples: 512 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BubbleScenario {
    pub alpha: f64,
    /// Defaults to the diffusivity in the reaction parameters.
    pub sigma: Option<f64>,
    #[serde(default = "default_profile_samples")]
    pub samples: usize,
}

fn default_profile_samples() -> usize {
    512
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadiusScenario {
    pub dimension: usize,
    pub sigma: Option<f64>,
    /// Points in the alpha sweep (the exact minimizer is added on top).
    pub samples: usize,
}

impl Default for RadiusScenario {
    fn default() -> Self {
        RadiusScenario {
            dimension: 1,
            sigma: None,
            samples: 96,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingleReleaseScenario {
    /// Wild background density N0.
    pub n0: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub table_rows: usize,
}

impl Default for SingleReleaseScenario {
    fn default() -> Self {
        SingleReleaseScenario {
            n0: 1.0,
            sigma_min: 50.0,
            sigma_max: 2000.0,
            table_rows: 40,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacingScenario {
    pub k: usize,
    pub sigma: Option<f64>,
    #[serde(default = "default_background")]
    pub n0: f64,
}

pub fn default_background() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilityScenario {
    pub k: usize,
    /// Sweep bounds for the box half-width, in gap units; default
    /// [r_star/2, 3 r_star/2].
    pub l_min: Option<f64>,
    pub l_max: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_mc_samples")]
    pub samples: u64,
    /// Evaluate the recursion instead of sampling.
    #[serde(default)]
    pub exact: bool,
    /// Rerun with the pessimistic gap constant 1/sqrt(2).
    #[serde(default)]
    pub degraded_constant: bool,
}

fn default_steps() -> usize {
    21
}

fn default_mc_samples() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverScenario {
    pub dim: usize,
    pub k_values: Vec<usize>,
    /// Frequency level the releases must reach; defaults to the level
    /// minimizing the bubble radius.
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub n0: f64,
    /// Per-release mass as a multiple of the critical single-release mass.
    pub mass_factor: f64,
    /// Box half-width as a multiple of the bubble radius.
    pub box_factor: f64,
    pub samples: u64,
}

impl Default for CoverScenario {
    fn default() -> Self {
        CoverScenario {
            dim: 1,
            k_values: vec![4, 8, 16, 32, 64],
            alpha: None,
            sigma: None,
            n0: 1.0,
            mass_factor: 3.0,
            box_factor: 1.05,
            samples: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateScenario {
    pub sigma: Option<f64>,
    pub grid: GridSpec,
    pub initial: InitialSpec,
    /// Time step; defaults to the accuracy-limited step for the grid.
    pub dt: Option<f64>,
    pub horizon: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_energy_stride")]
    pub energy_stride: usize,
    #[serde(default = "default_true")]
    pub stop_on_decision: bool,
}

fn default_energy_stride() -> usize {
    16
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub half_width: f64,
    pub nodes: usize,
}

fn default_dim() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialSpec {
    Bubble(BubbleInit),
    ReleaseProfile(ReleaseInit),
    Constant(ConstantInit),
    File(FileInit),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BubbleInit {
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReleaseInit {
    pub k: usize,
    /// Half-width of the box the release centers land in.
    pub box_half_width: f64,
    /// Frequency an isolated plume reaches at its center.
    pub peak_frequency: f64,
    /// Plume variance; defaults to the diffusivity.
    pub variance: Option<f64>,
    #[serde(default = "default_background")]
    pub background: f64,
    /// Deterministic evenly spaced centers (1D only) instead of uniform
    /// random placement.
    #[serde(default)]
    pub equally_spaced: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantInit {
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileInit {
    /// CSV with a single `p` column, row-major for 2D grids.
    pub path: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppendixScenario {
    pub grid: usize,
}

impl Default for AppendixScenario {
    fn default() -> Self {
        AppendixScenario { grid: 4096 }
    }
}
