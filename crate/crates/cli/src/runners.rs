//! One runner per scenario. Every runner writes its artifacts into the
//! config's output directory and finishes with `manifest.toml`, a TOML echo
//! of the resolved config, so any run can be repeated byte-for-byte with
//! `run --config <out>/manifest.toml`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use wolbachia_core::pde::{self, Initial, SimGrid, SimState};
use wolbachia_core::bubble;
use wolbachia_core::probability::{
    beta_table, critical_release_mass, default_max_gap, k0_for, mc_cover_probability,
    mc_success_probability, CoverProtocol, ProbabilityEstimate, ProtocolSpec,
};
use wolbachia_core::reaction::ReactionCurve;
use wolbachia_core::release::{
    equally_spaced_profile, equally_spaced_requirement, sample_release_profile,
    single_release_threshold,
};

use crate::config::*;

pub fn run_config(cfg: &ExperimentConfig) -> Result<()> {
    let curve = ReactionCurve::new(cfg.reaction).context("invalid reaction parameters")?;
    fs::create_dir_all(&cfg.out)
        .with_context(|| format!("cannot create output directory {}", cfg.out.display()))?;
    match &cfg.scenario {
        Scenario::Reaction(sc) => run_reaction(cfg, &curve, sc)?,
        Scenario::Bubble(sc) => run_bubble(cfg, &curve, sc)?,
        Scenario::Radius(sc) => run_radius(cfg, &curve, sc)?,
        Scenario::SingleRelease(sc) => run_single_release(cfg, &curve, sc)?,
        Scenario::Spacing(sc) => run_spacing(cfg, &curve, sc)?,
        Scenario::Probability(sc) => run_probability(cfg, &curve, sc)?,
        Scenario::Cover(sc) => run_cover(cfg, &curve, sc)?,
        Scenario::Simulate(sc) => run_simulate(cfg, &curve, sc)?,
        Scenario::AppendixCheck(sc) => run_appendix(cfg, &curve, sc)?,
    }
    write_manifest(cfg)
}

fn write_manifest(cfg: &ExperimentConfig) -> Result<()> {
    let text = toml::to_string_pretty(cfg).context("cannot serialize manifest")?;
    fs::write(cfg.out.join("manifest.toml"), text)?;
    Ok(())
}

fn csv_file(dir: &Path, name: &str, header: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let mut w = BufWriter::new(
        File::create(&path).with_context(|| format!("cannot create {}", path.display()))?,
    );
    writeln!(w, "{header}")?;
    Ok(w)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn run_reaction(cfg: &ExperimentConfig, curve: &ReactionCurve, sc: &ReactionScenario) -> Result<()> {
    if sc.samples < 2 {
        bail!("reaction profile needs at least 2 samples, got {}", sc.samples);
    }
    let theta_plus = curve.theta_plus();
    println!("theta      = {}", curve.theta());
    println!("theta_c    = {}", curve.theta_c());
    println!("theta_plus = {theta_plus}");
    println!("F(theta_plus) = {}", curve.big_f(theta_plus)?);
    let mut w = csv_file(&cfg.out, "reaction.csv", "p,f,F")?;
    for i in 0..=sc.samples {
        let p = theta_plus * i as f64 / sc.samples as f64;
        writeln!(w, "{p},{},{}", curve.f(p)?, curve.big_f(p)?)?;
    }
    w.flush()?;
    println!("wrote {}", cfg.out.join("reaction.csv").display());
    Ok(())
}

fn run_bubble(cfg: &ExperimentConfig, curve: &ReactionCurve, sc: &BubbleScenario) -> Result<()> {
    let sigma = sc.sigma.unwrap_or(cfg.reaction.sigma);
    let profile = bubble::bubble_profile(curve, sc.alpha, sigma, sc.samples)?;
    println!("L_alpha = {}", profile.l_alpha());
    let mut w = csv_file(&cfg.out, "bubble.csv", "radius,frequency")?;
    for (r, u) in profile.radius.iter().zip(&profile.frequency) {
        writeln!(w, "{r},{u}")?;
    }
    w.flush()?;
    println!("wrote {}", cfg.out.join("bubble.csv").display());
    Ok(())
}

fn run_radius(cfg: &ExperimentConfig, curve: &ReactionCurve, sc: &RadiusScenario) -> Result<()> {
    if sc.samples < 2 {
        bail!("radius sweep needs at least 2 samples, got {}", sc.samples);
    }
    let sigma = sc.sigma.unwrap_or(cfg.reaction.sigma);
    let report = bubble::min_bubble_radius(curve, sigma)?;
    let lo = curve.theta_c();
    let hi = curve.theta_plus();
    let margin = 0.02 * (hi - lo);
    let mut alphas = linspace(lo + margin, hi - margin, sc.samples);
    alphas.push(report.alpha_0);
    alphas.sort_by(f64::total_cmp);
    let mut w = csv_file(&cfg.out, "radius.csv", "alpha,L_alpha,R_alpha,rho_opt,E_bubble")?;
    for &alpha in &alphas {
        let l = bubble::bubble_radius_1d(curve, alpha, sigma)?;
        let est = bubble::energy_radius(curve, alpha, sigma, sc.dimension)?;
        let e = bubble::bubble_energy_1d(curve, alpha, sigma)?;
        writeln!(w, "{alpha},{l},{},{},{e}", est.radius, est.rho_opt)?;
    }
    w.flush()?;
    println!(
        "alpha_0 = {}, L_alpha = {}, span 2L/sqrt(2 sigma) = {}",
        report.alpha_0, report.radius, report.span
    );
    let at_min = bubble::energy_radius(curve, report.alpha_0, sigma, sc.dimension)?;
    println!("R_alpha at alpha_0 = {} (energy balance)", at_min.radius);
    println!("wrote {}", cfg.out.join("radius.csv").display());
    Ok(())
}

fn run_single_release(
    cfg: &ExperimentConfig,
    curve: &ReactionCurve,
    sc: &SingleReleaseScenario,
) -> Result<()> {
    if !(sc.sigma_min > 0.0 && sc.sigma_max > sc.sigma_min) {
        bail!("need 0 < sigma_min < sigma_max");
    }
    if sc.table_rows < 2 {
        bail!("table needs at least 2 rows, got {}", sc.table_rows);
    }
    let sol = single_release_threshold(curve, sc.n0)?;
    println!("j_star     = {}", sol.j_star);
    println!("alpha_star = {}", sol.alpha_star);
    println!("p_star     = {}", sol.p_star);
    let n_home = sol.min_release_size(cfg.reaction.sigma);
    println!(
        "N_m(sigma = {}) = {}, sigma_plus(N_m) = {}",
        cfg.reaction.sigma,
        n_home,
        sol.max_diffusivity(n_home)
    );
    let mut w = csv_file(&cfg.out, "single_release.csv", "sigma,N_m")?;
    let ratio = sc.sigma_max / sc.sigma_min;
    for i in 0..sc.table_rows {
        let sigma = sc.sigma_min * ratio.powf(i as f64 / (sc.table_rows - 1) as f64);
        writeln!(w, "{sigma},{}", sol.min_release_size(sigma))?;
    }
    w.flush()?;
    println!("wrote {}", cfg.out.join("single_release.csv").display());
    Ok(())
}

fn run_spacing(cfg: &ExperimentConfig, curve: &ReactionCurve, sc: &SpacingScenario) -> Result<()> {
    let sigma = sc.sigma.unwrap_or(cfg.reaction.sigma);
    let plan = equally_spaced_requirement(curve, sc.k, sigma, sc.n0)?;
    println!(
        "k = {}, alpha_opt = {}, j_star_k = {}, N_tilde_star = {}",
        plan.k, plan.alpha_opt, plan.j_star_k, plan.n_tilde_star
    );
    let mut w = csv_file(&cfg.out, "spacing.csv", "k,alpha_opt,j_star_k,N_tilde_star")?;
    writeln!(w, "{},{},{},{}", plan.k, plan.alpha_opt, plan.j_star_k, plan.n_tilde_star)?;
    w.flush()?;
    println!("wrote {}", cfg.out.join("spacing.csv").display());
    Ok(())
}

/// Dimensionless span threshold shared by the probability scenarios.
fn dimensionless_span(curve: &ReactionCurve) -> Result<f64> {
    Ok(bubble::min_bubble_radius(curve, 2.0)?.span)
}

fn run_probability(
    cfg: &ExperimentConfig,
    curve: &ReactionCurve,
    sc: &ProbabilityScenario,
) -> Result<()> {
    if sc.steps < 2 {
        bail!("sweep needs at least 2 steps, got {}", sc.steps);
    }
    let lambda = if sc.degraded_constant {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        default_max_gap()
    };
    let r_star = dimensionless_span(curve)?;
    let k0 = k0_for(lambda, r_star);
    println!("lambda = {lambda}, r_star = {r_star}, k0 = {k0}");
    let l_min = sc.l_min.unwrap_or(r_star / 2.0);
    let l_max = sc.l_max.unwrap_or(1.5 * r_star);
    if !(l_min > 0.0 && l_max > l_min) {
        bail!("need 0 < l_min < l_max, got [{l_min}, {l_max}]");
    }
    let table = if sc.exact {
        Some(beta_table(sc.k, lambda, r_star, 2.0 * l_max * (1.0 + 1e-9))?)
    } else {
        None
    };
    let mut w = csv_file(&cfg.out, "probability.csv", "L,estimate,std_error,method")?;
    for (i, &l) in linspace(l_min, l_max, sc.steps).iter().enumerate() {
        let est = match &table {
            Some(t) => ProbabilityEstimate::exact(t.success_probability(l)?),
            None => {
                let spec = ProtocolSpec::new(sc.k, l, lambda, r_star)?;
                mc_success_probability(&spec, sc.samples, cfg.seed + i as u64)
            }
        };
        writeln!(w, "{l},{},{},{}", est.value, est.std_error, est.method)?;
    }
    w.flush()?;
    println!("wrote {}", cfg.out.join("probability.csv").display());
    Ok(())
}

fn run_cover(cfg: &ExperimentConfig, curve: &ReactionCurve, sc: &CoverScenario) -> Result<()> {
    if sc.k_values.is_empty() {
        bail!("cover sweep needs at least one release count");
    }
    let sigma = sc.sigma.unwrap_or(cfg.reaction.sigma);
    let alpha = match sc.alpha {
        Some(a) => a,
        None => bubble::min_bubble_radius(curve, sigma)?.alpha_0,
    };
    let radius = bubble::bubble_radius_1d(curve, alpha, sigma)?;
    let critical = critical_release_mass(alpha, sigma, sc.n0, sc.dim);
    println!(
        "alpha = {alpha}, ball radius = {radius}, critical mass N_star = {critical}, \
         per-release mass = {}",
        sc.mass_factor * critical
    );
    let mut w = csv_file(&cfg.out, "cover.csv", "k,estimate,std_error")?;
    for (i, &k) in sc.k_values.iter().enumerate() {
        let proto = CoverProtocol {
            k,
            per_release_mass: sc.mass_factor * critical,
            background: sc.n0,
            half_width: sc.box_factor * radius,
            alpha,
            sigma,
            dim: sc.dim,
        };
        let est = mc_cover_probability(curve, &proto, sc.samples, cfg.seed + i as u64)?;
        writeln!(w, "{k},{},{}", est.value, est.std_error)?;
    }
    w.flush()?;
    println!("wrote {}", cfg.out.join("cover.csv").display());
    Ok(())
}

fn load_field_csv(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut vals = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (ln == 0 && line == "p") {
            continue;
        }
        vals.push(
            line.parse::<f64>()
                .with_context(|| format!("{}:{}: not a number", path.display(), ln + 1))?,
        );
    }
    if vals.len() != expected {
        bail!(
            "{} has {} values, the grid needs {}",
            path.display(),
            vals.len(),
            expected
        );
    }
    Ok(vals)
}

fn build_initial(
    cfg: &ExperimentConfig,
    sc: &SimulateScenario,
    grid: &SimGrid,
    sigma: f64,
) -> Result<Initial> {
    Ok(match &sc.initial {
        InitialSpec::Bubble(b) => Initial::Bubble { alpha: b.alpha },
        InitialSpec::Constant(c) => Initial::Constant(c.value),
        InitialSpec::File(f) => Initial::Values(load_field_csv(&f.path, grid.n_total())?),
        InitialSpec::ReleaseProfile(r) => {
            if !(r.peak_frequency > 0.0 && r.peak_frequency < 1.0) {
                bail!("peak frequency must lie in (0, 1), got {}", r.peak_frequency);
            }
            let variance = r.variance.unwrap_or(sigma);
            let norm = (std::f64::consts::TAU * variance).powf(0.5 * grid.dim() as f64);
            let per_site = r.background * r.peak_frequency / (1.0 - r.peak_frequency) * norm;
            let total = per_site * r.k as f64;
            let mut profile = if r.equally_spaced {
                if grid.dim() != 1 {
                    bail!("equally spaced releases are 1D only");
                }
                equally_spaced_profile(r.k, total, r.box_half_width, variance, r.background)?
            } else {
                sample_release_profile(
                    r.k,
                    total,
                    r.box_half_width,
                    variance,
                    0.0,
                    grid.dim(),
                    cfg.seed,
                )?
            };
            profile.background = r.background;
            Initial::Release {
                profile,
                background: r.background,
            }
        }
    })
}

fn write_snapshot(dir: &Path, index: usize, t: f64, state_grid: &SimGrid, field: &[f64]) -> Result<PathBuf> {
    let name = format!("snapshot_{index:02}_t{t:.3}.csv");
    let header = if state_grid.dim() == 1 { "x,p" } else { "x,y,p" };
    let mut w = csv_file(dir, &name, header)?;
    let n = state_grid.nodes();
    match state_grid.dim() {
        1 => {
            for (i, v) in field.iter().enumerate() {
                writeln!(w, "{},{v}", state_grid.coord(i))?;
            }
        }
        _ => {
            for j in 0..n {
                let y = state_grid.coord(j);
                for i in 0..n {
                    writeln!(w, "{},{y},{}", state_grid.coord(i), field[j * n + i])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(dir.join(name))
}

#[derive(serde::Serialize)]
struct SimSummary<'a> {
    classification: String,
    decided_at: Option<f64>,
    energy_trace: &'a [(f64, f64)],
}

fn run_simulate(cfg: &ExperimentConfig, curve: &ReactionCurve, sc: &SimulateScenario) -> Result<()> {
    let sigma = sc.sigma.unwrap_or(cfg.reaction.sigma);
    let grid = SimGrid::new(sc.grid.dim, sc.grid.half_width, sc.grid.nodes)?;
    let initial = build_initial(cfg, sc, &grid, sigma)?;
    let dt = sc.dt.unwrap_or_else(|| pde::default_dt(curve, &grid, sigma));
    let mut state: SimState = pde::init_state(grid, &initial, curve, sigma, dt)?;
    if state.clip_warning() {
        eprintln!(
            "warning: {} of {} initial nodes clipped into [0, theta_plus]",
            state.clipped(),
            state.grid().n_total()
        );
    }
    let result = pde::simulate(
        &mut state,
        sc.horizon,
        &sc.snapshot_times,
        sc.energy_stride,
        sc.stop_on_decision,
    )?;
    for (i, (t, field)) in result.snapshots.iter().enumerate() {
        write_snapshot(&cfg.out, i, *t, state.grid(), field)?;
    }
    let summary = SimSummary {
        classification: result.outcome.to_string(),
        decided_at: result.decided_at,
        energy_trace: &result.energy,
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(cfg.out.join("summary.json"), text)?;
    println!(
        "classification = {}, decided_at = {:?}, t_end = {}",
        result.outcome,
        result.decided_at,
        state.t()
    );
    println!("wrote {}", cfg.out.join("summary.json").display());
    Ok(())
}

fn run_appendix(cfg: &ExperimentConfig, curve: &ReactionCurve, sc: &AppendixScenario) -> Result<()> {
    let report = bubble::check_uniqueness(curve, sc.grid)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    println!("{text}");
    fs::write(cfg.out.join("appendix.json"), text)?;
    println!("wrote {}", cfg.out.join("appendix.json").display());
    Ok(())
}

/// One directory per figure, each holding the CSV data behind it plus a
/// README mapping columns to the figure's axes.
pub fn reproduce_figures(reaction: wolbachia_core::reaction::ReactionParams, out: &Path, seed: u64) -> Result<()> {
    fs::create_dir_all(out)?;
    let sub = |dir: &str, scenario: Scenario, seed: u64| ExperimentConfig {
        reaction,
        seed,
        out: out.join(dir),
        scenario,
    };

    println!("== reaction profile ==");
    run_config(&sub(
        "reaction_profile",
        Scenario::Reaction(ReactionScenario::default()),
        seed,
    ))?;
    fs::write(
        out.join("reaction_profile/README.md"),
        "Reaction term and its potential.\n\n\
         `reaction.csv`: `p` (x axis, infection frequency), `f` (y axis, left\n\
         panel, growth rate), `F` (y axis, right panel, potential). `F` crosses\n\
         zero between the rows bracketing theta_c.\n",
    )?;

    println!("== bubble radius comparison ==");
    run_config(&sub(
        "radius_comparison",
        Scenario::Radius(RadiusScenario::default()),
        seed,
    ))?;
    fs::write(
        out.join("radius_comparison/README.md"),
        "Minimal bubble radius against the energy-method radius, 1D.\n\n\
         `radius.csv`: `alpha` (x axis, bubble height), `L_alpha` (y axis,\n\
         bubble support radius, meters), `R_alpha` (y axis, energy-radius\n\
         upper bound, meters), `rho_opt` (plateau fraction attaining it),\n\
         `E_bubble` (bubble energy). The minimum of `L_alpha` sits at the row\n\
         inserted for the exact minimizer alpha_0.\n",
    )?;

    println!("== success probability curves ==");
    let prob_dir = out.join("success_probability");
    fs::create_dir_all(&prob_dir)?;
    for k in (20..=80).step_by(10) {
        run_config(&sub(
            &format!("success_probability/k{k:02}"),
            Scenario::Probability(ProbabilityScenario {
                k,
                l_min: None,
                l_max: None,
                steps: 23,
                samples: 200_000,
                exact: false,
                degraded_constant: false,
            }),
            seed + k as u64,
        ))?;
    }
    fs::write(
        prob_dir.join("README.md"),
        "Success probability of k uniform releases in a box, one directory\n\
         per curve (k = 20 to 80, bottom to top).\n\n\
         `k*/probability.csv`: `L` (x axis, box half-width in sqrt(2 sigma)\n\
         units), `estimate` (y axis, success probability), `std_error`,\n\
         `method`.\n",
    )?;

    println!("== degraded gap constant ==");
    run_config(&sub(
        "degraded_constant",
        Scenario::Probability(ProbabilityScenario {
            k: 80,
            l_min: None,
            l_max: None,
            steps: 23,
            samples: 200_000,
            exact: false,
            degraded_constant: true,
        }),
        seed + 1000,
    ))?;
    fs::write(
        out.join("degraded_constant/README.md"),
        "The k = 80 success curve rerun with the pessimistic gap constant\n\
         lambda = 1/sqrt(2), which raises the minimal release count k0 from 8\n\
         to 17 and caps the curve near one half.\n\n\
         `probability.csv`: columns as in success_probability.\n",
    )?;

    println!("== three release boxes, 2D ==");
    let boxes = [("large", 24.0), ("medium", 18.0), ("small", 2.88)];
    for (name, box_half) in boxes {
        run_config(&sub(
            &format!("three_box/box_{name}"),
            Scenario::Simulate(SimulateScenario {
                sigma: Some(1.0),
                grid: GridSpec {
                    dim: 2,
                    half_width: 36.0,
                    nodes: 256,
                },
                initial: InitialSpec::ReleaseProfile(ReleaseInit {
                    k: 50,
                    box_half_width: box_half,
                    peak_frequency: 0.75,
                    variance: Some(1.0),
                    background: 1.0,
                    equally_spaced: false,
                }),
                dt: Some(0.25),
                horizon: 1500.0,
                snapshot_times: vec![0.0, 250.0, 500.0, 1000.0, 1500.0],
                energy_stride: 256,
                stop_on_decision: false,
            }),
            2,
        ))?;
    }
    fs::write(
        out.join("three_box/README.md"),
        "Fifty equal releases (isolated peak frequency 0.75) scattered over\n\
         three box sizes inside the same domain (half-width 36, sigma = 1,\n\
         256 x 256 nodes, pinned seed): the wide and the tiny box die out,\n\
         the intermediate one invades.\n\n\
         `box_*/snapshot_*.csv`: `x`, `y` (plane coordinates), `p` (infection\n\
         frequency, the color channel) at the time in the file name.\n\
         `box_*/summary.json`: classification, decision time, energy trace.\n",
    )?;

    println!("figures written under {}", out.display());
    Ok(())
}
