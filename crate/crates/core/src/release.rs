//! Release profiles and the sizing rules for single and spaced releases.
//!
//! A release is a sum of Gaussian plumes: k sites with total mass N and
//! per-site variances near sigma0. Against a background density N0 it
//! induces the initial infection frequency X/(X + N0). Two sizing questions
//! are answered here: how much mass one central release needs to start an
//! invasion, and how much splitting that mass over k equally spaced sites
//! lowers the requirement. Certification goes through bubble domination: an
//! initial frequency sitting above some shifted stationary bubble can never
//! go extinct.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bubble;
use crate::error::{Error, Result};
use crate::reaction::ReactionCurve;
use crate::{optim, quad};

/// Background mosquito density assumed when none is given.
pub const DEFAULT_BACKGROUND: f64 = 1e-2;

/// A sum of Gaussian release plumes in one or two dimensions.
///
/// Total mass is exactly per_site_mass times the number of centers; each
/// plume is a normalized Gaussian with its own variance. One-dimensional
/// centers leave the second coordinate at zero.
#[derive(Debug, Clone, Serialize)]
pub struct ReleaseProfile {
    pub dim: usize,
    /// Half-width of the box the centers live in.
    pub half_width: f64,
    pub per_site_mass: f64,
    pub centers: Vec<[f64; 2]>,
    pub variances: Vec<f64>,
    /// Background density N0 entering the frequency X/(X + N0).
    pub background: f64,
}

impl ReleaseProfile {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.per_site_mass * self.centers.len() as f64
    }

    /// Released density X at a point with `dim` coordinates.
    pub fn density(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "position has the wrong dimension");
        let mut total = 0.0;
        for (c, &var) in self.centers.iter().zip(&self.variances) {
            let mut q = 0.0;
            for (j, &xj) in x.iter().enumerate() {
                let d = xj - c[j];
                q += d * d;
            }
            let norm = (TAU * var).powf(0.5 * self.dim as f64);
            total += self.per_site_mass * (-q / (2.0 * var)).exp() / norm;
        }
        total
    }

    /// Initial infection frequency X/(X + N0), in [0, 1).
    pub fn initial_frequency(&self, x: &[f64]) -> f64 {
        self.frequency_with_background(x, self.background)
    }

    /// Same fraction against an explicit background density.
    pub fn frequency_with_background(&self, x: &[f64], n0: f64) -> f64 {
        let d = self.density(x);
        d / (d + n0)
    }
}

/// Draws k centers uniform on the box and k variances uniform on
/// [sigma0 - epsilon, sigma0 + epsilon]. Deterministic in the seed.
pub fn sample_release_profile(
    k: usize,
    total_mass: f64,
    half_width: f64,
    sigma0: f64,
    epsilon: f64,
    dim: usize,
    seed: u64,
) -> Result<ReleaseProfile> {
    if !(half_width > 0.0) {
        return Err(Error::InvalidBox(format!(
            "box half-width must be positive, got {half_width}"
        )));
    }
    if k == 0 {
        return Err(Error::DomainError("need at least one release site".into()));
    }
    if !(total_mass > 0.0) {
        return Err(Error::DomainError(format!(
            "release mass must be positive, got {total_mass}"
        )));
    }
    if dim != 1 && dim != 2 {
        return Err(Error::DomainError(format!(
            "release profiles live in 1 or 2 dimensions, got {dim}"
        )));
    }
    if !(sigma0 > 0.0 && epsilon >= 0.0 && epsilon < sigma0) {
        return Err(Error::DomainError(format!(
            "variance jitter needs 0 <= epsilon < sigma0, got sigma0={sigma0}, epsilon={epsilon}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    for _ in 0..k {
        let mut c = [0.0; 2];
        for cj in c.iter_mut().take(dim) {
            *cj = rng.gen_range(-half_width..=half_width);
        }
        centers.push(c);
        variances.push(rng.gen_range(sigma0 - epsilon..=sigma0 + epsilon));
    }
    Ok(ReleaseProfile {
        dim,
        half_width,
        per_site_mass: total_mass / k as f64,
        centers,
        variances,
        background: DEFAULT_BACKGROUND,
    })
}

/// Deterministic 1D profile with k sites spread evenly over the box,
/// endpoints included (a single site sits at the center).
pub fn equally_spaced_profile(
    k: usize,
    total_mass: f64,
    half_width: f64,
    variance: f64,
    background: f64,
) -> Result<ReleaseProfile> {
    if !(half_width > 0.0) {
        return Err(Error::InvalidBox(format!(
            "box half-width must be positive, got {half_width}"
        )));
    }
    if k == 0 {
        return Err(Error::DomainError("need at least one release site".into()));
    }
    if !(total_mass > 0.0 && variance > 0.0 && background > 0.0) {
        return Err(Error::DomainError(
            "mass, variance and background must be positive".into(),
        ));
    }
    let centers: Vec<[f64; 2]> = if k == 1 {
        vec![[0.0, 0.0]]
    } else {
        (0..k)
            .map(|i| [-half_width + 2.0 * half_width * i as f64 / (k - 1) as f64, 0.0])
            .collect()
    };
    Ok(ReleaseProfile {
        dim: 1,
        half_width,
        per_site_mass: total_mass / k as f64,
        centers,
        variances: vec![variance; k],
        background,
    })
}

/// A bubble the initial frequency was verified to dominate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DominationWitness {
    pub alpha: f64,
    pub shift: f64,
}

/// Center sample plus 128 symmetric pairs across the bubble support.
const DOMINATION_PAIRS: usize = 128;

/// Searches the given bubble heights and center shifts for a bubble that the
/// frequency field dominates everywhere on its support, sampled at 257
/// points from the center outward. A hit certifies non-extinction; a miss
/// proves nothing, the grids may simply be too coarse.
pub fn field_domination_witness<F: Fn(f64) -> f64>(
    freq: F,
    curve: &ReactionCurve,
    sigma: f64,
    alpha_levels: &[f64],
    shifts: &[f64],
) -> Result<Option<DominationWitness>> {
    if alpha_levels.is_empty() || shifts.is_empty() {
        return Err(Error::DomainError(
            "need at least one bubble height and one shift".into(),
        ));
    }
    for &alpha in alpha_levels {
        // the center sample alone rules out most shifts, and skipping them
        // early avoids building profiles for heights no shift can carry
        let live: Vec<f64> = shifts.iter().copied().filter(|&t| freq(t) >= alpha).collect();
        if live.is_empty() {
            continue;
        }
        let profile = bubble::bubble_profile(curve, alpha, sigma, 1024)?;
        let l = profile.l_alpha();
        'shift: for t0 in live {
            for m in 1..=DOMINATION_PAIRS {
                let s = l * m as f64 / DOMINATION_PAIRS as f64;
                let v = profile.eval(s);
                if freq(t0 + s) < v || freq(t0 - s) < v {
                    continue 'shift;
                }
            }
            return Ok(Some(DominationWitness { alpha, shift: t0 }));
        }
    }
    Ok(None)
}

/// Domination search for a 1D release profile over default grids: n_alpha
/// bubble heights geometrically clustered toward theta_c and n_shift centers
/// spread over the release box.
pub fn release_domination_witness(
    profile: &ReleaseProfile,
    curve: &ReactionCurve,
    sigma: f64,
    n_alpha: usize,
    n_shift: usize,
) -> Result<Option<DominationWitness>> {
    if profile.dim != 1 {
        return Err(Error::DomainError(
            "the domination search works on one-dimensional profiles".into(),
        ));
    }
    if n_alpha == 0 || n_shift == 0 {
        return Err(Error::DomainError("height and shift grids must be nonempty".into()));
    }
    let alphas = geometric_heights(curve, n_alpha);
    let hw = profile.half_width;
    let shifts: Vec<f64> = if n_shift == 1 {
        vec![0.0]
    } else {
        (0..n_shift)
            .map(|i| -hw + 2.0 * hw * i as f64 / (n_shift - 1) as f64)
            .collect()
    };
    field_domination_witness(|x| profile.initial_frequency(&[x]), curve, sigma, &alphas, &shifts)
}

/// n heights filling (theta_c, theta_plus), geometrically spaced so they
/// crowd toward theta_c where the shallowest dominable bubbles sit.
fn geometric_heights(curve: &ReactionCurve, n: usize) -> Vec<f64> {
    let lo = curve.theta_c();
    let w = curve.theta_plus() - lo;
    let (g_min, g_max) = (1e-3_f64.ln(), (1.0 - 1e-6_f64).ln());
    (0..n)
        .map(|i| {
            let u = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
            lo + w * (g_min + (g_max - g_min) * u).exp()
        })
        .collect()
}

/// Mass below which a single release of the given variance peaks under
/// theta_c, so no bubble of any height fits beneath it.
pub fn necessary_single_release_mass(curve: &ReactionCurve, variance: f64, n0: f64) -> f64 {
    (TAU * variance).sqrt() * n0 * curve.theta_c() / (1.0 - curve.theta_c())
}

/// Sizing constants for one central Gaussian release.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingleReleaseSolution {
    /// Worst log mass margin, minimized over bubble heights.
    pub j_star: f64,
    /// Bubble height attaining the minimum.
    pub alpha_star: f64,
    /// Frequency level where that bubble is hardest to clear.
    pub p_star: f64,
    /// Background density the sizes below are quoted against.
    pub n0: f64,
}

impl SingleReleaseSolution {
    /// Smallest certified invading mass at diffusivity sigma.
    pub fn min_release_size(&self, sigma: f64) -> f64 {
        self.n0 * (TAU * sigma).sqrt() * self.j_star.exp()
    }

    /// Largest diffusivity a release of mass n can certify.
    pub fn max_diffusivity(&self, n: f64) -> f64 {
        (-2.0 * self.j_star).exp() * (n / self.n0).powi(2) / TAU
    }
}

/// Log of the mass (in units of N0 sqrt(2 pi sigma)) a central Gaussian
/// release needs for its frequency to clear level p at the distance where
/// the alpha bubble crosses p: log(p/(1-p)) + (span(alpha, p)/2)^2.
pub fn single_release_objective(curve: &ReactionCurve, alpha: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= alpha) {
        return Err(Error::DomainError(format!(
            "need 0 < p <= alpha, got p={p}, alpha={alpha}"
        )));
    }
    let span = bubble::span_integral(curve, alpha, p, 1e-10)?;
    Ok((p / (1.0 - p)).ln() + (span / 2.0).powi(2))
}

/// d/dp of the objective; finite one-sided limit at p = alpha.
fn objective_slope(curve: &ReactionCurve, alpha: f64, p: f64) -> Result<f64> {
    if p >= alpha - 1e-12 {
        return Ok(1.0 / (alpha * (1.0 - alpha)) - 1.0 / curve.f_raw(alpha));
    }
    let span = bubble::span_integral(curve, alpha, p, 1e-9)?;
    let gap = curve.big_f_diff(alpha, p);
    Ok(1.0 / (p * (1.0 - p)) - 0.5 * span / gap.sqrt())
}

/// Maximizes the objective over p in (0, alpha]; returns (j_alpha, argmax).
/// Coarse scan on a cumulative span grid, then the slope is bisected.
fn worst_level(curve: &ReactionCurve, alpha: f64) -> Result<(f64, f64)> {
    const PANELS: usize = 512;
    const P_MIN: f64 = 1e-6;
    let g = |t: f64| {
        let d = curve.big_f_drop(alpha, t * t);
        2.0 * t / d.max(f64::MIN_POSITIVE).sqrt()
    };
    let t_max = (alpha - P_MIN).sqrt();
    let mut ps = Vec::with_capacity(PANELS + 1);
    let mut js = Vec::with_capacity(PANELS + 1);
    ps.push(alpha);
    js.push((alpha / (1.0 - alpha)).ln());
    let mut cum = 0.0;
    for i in 1..=PANELS {
        let t0 = t_max * (i - 1) as f64 / PANELS as f64;
        let t1 = t_max * i as f64 / PANELS as f64;
        cum += quad::fixed(&g, t0, t1, quad::gl8());
        let p = alpha - t1 * t1;
        ps.push(p);
        js.push((p / (1.0 - p)).ln() + (cum / 2.0).powi(2));
    }
    let i_star = (0..js.len())
        .max_by(|&a, &b| js[a].total_cmp(&js[b]))
        .unwrap();
    // ps decreases with the index, so the bracket flips
    let lo = ps[(i_star + 1).min(PANELS)];
    let hi = ps[i_star.saturating_sub(1)];
    let s_lo = objective_slope(curve, alpha, lo)?;
    let s_hi = objective_slope(curve, alpha, hi)?;
    let p_star = if s_lo > 0.0 && s_hi < 0.0 {
        optim::bisect(
            |p| objective_slope(curve, alpha, p).expect("p stays inside (0, alpha)"),
            lo,
            hi,
            1e-10,
        )?
    } else if s_hi >= 0.0 && hi == alpha {
        // still rising at the right edge: the boundary value is the max
        alpha
    } else {
        optim::golden_min(
            |p| -single_release_objective(curve, alpha, p).expect("p stays inside (0, alpha)"),
            lo,
            hi,
            1e-9,
        )
        .0
    };
    Ok((single_release_objective(curve, alpha, p_star)?, p_star))
}

/// Minimizes the worst level over bubble heights, yielding the constant
/// j_star from which all single-release sizes follow.
pub fn single_release_threshold(curve: &ReactionCurve, n0: f64) -> Result<SingleReleaseSolution> {
    if !(n0 > 0.0) {
        return Err(Error::DomainError(format!(
            "background density must be positive, got {n0}"
        )));
    }
    let w = curve.theta_plus() - curve.theta_c();
    let lo = curve.theta_c() + 1e-3 * w;
    let hi = curve.theta_plus() - 1e-3 * w;
    let j_of = |a: f64| worst_level(curve, a).map(|x| x.0).unwrap_or(f64::INFINITY);
    let scan = optim::grid_min(&j_of, lo, hi, 96);
    let (alpha_star, _) = optim::golden_min(j_of, scan.bracket.0, scan.bracket.1, 1e-7);
    let (j_star, p_star) = worst_level(curve, alpha_star)?;
    Ok(SingleReleaseSolution {
        j_star,
        alpha_star,
        p_star,
        n0,
    })
}

/// Optimal plan for k equally spaced releases.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpacedReleasePlan {
    pub k: usize,
    /// Bubble height minimizing the requirement; depends on k only.
    pub alpha_opt: f64,
    /// min over alpha of (alpha/(1-alpha)) exp(span^2 / (4 (k-1)^2)).
    pub j_star_k: f64,
    /// Minimal total mass N0 sqrt(2 pi sigma) (k/2) j_star_k.
    pub n_tilde_star: f64,
}

/// Sizes k equally spaced releases spanning a bubble support: the per-site
/// peak must clear the bubble both at the center and between neighbors,
/// which costs the Gaussian gap factor exp(span^2/(4 (k-1)^2)).
pub fn equally_spaced_requirement(
    curve: &ReactionCurve,
    k: usize,
    sigma: f64,
    n0: f64,
) -> Result<SpacedReleasePlan> {
    if k < 2 {
        return Err(Error::DomainError(format!(
            "spaced releases need at least two sites, got {k}"
        )));
    }
    if !(sigma > 0.0 && n0 > 0.0) {
        return Err(Error::DomainError(
            "diffusivity and background must be positive".into(),
        ));
    }
    let theta_c = curve.theta_c();
    let w = curve.theta_plus() - theta_c;
    let lo = theta_c + 1e-5 * w;
    let hi = curve.theta_plus() - 1e-4 * w;
    let km1 = (k - 1) as f64;
    // alpha(s) = lo + (hi - lo) s^3 crowds the scan into the boundary layer
    // at theta_c where the minimizer migrates as k grows
    let alpha_of = |s: f64| lo + (hi - lo) * s * s * s;
    let obj = |s: f64| {
        let alpha = alpha_of(s);
        let span = bubble::span_integral(curve, alpha, 0.0, 1e-9).unwrap_or(f64::INFINITY);
        (alpha / (1.0 - alpha)) * (span / (2.0 * km1)).powi(2).exp()
    };
    let scan = optim::grid_min(&obj, 0.0, 1.0, 128);
    let (s_opt, j_star_k) = optim::golden_min(obj, scan.bracket.0, scan.bracket.1, 1e-7);
    let alpha_opt = alpha_of(s_opt);
    Ok(SpacedReleasePlan {
        k,
        alpha_opt,
        j_star_k,
        n_tilde_star: n0 * (TAU * sigma).sqrt() * (k as f64 / 2.0) * j_star_k,
    })
}

/// Builds the equally spaced profile a plan prescribes and reports whether
/// the domination search certifies it. The sizing formula is approximate,
/// so a miss is information, not an error.
pub fn spaced_plan_certificate(
    curve: &ReactionCurve,
    plan: &SpacedReleasePlan,
    sigma: f64,
    n0: f64,
) -> Result<Option<DominationWitness>> {
    let l = bubble::bubble_radius_1d(curve, plan.alpha_opt, sigma)?;
    let profile = equally_spaced_profile(plan.k, plan.n_tilde_star, l, sigma, n0)?;
    release_domination_witness(&profile, curve, sigma, 64, 129)
}
