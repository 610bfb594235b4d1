//! Success probabilities for k uniform releases on a segment.
//!
//! Positions are dimensionless (physical positions divided by sqrt(2 sigma)).
//! A protocol succeeds when some run of releases with consecutive gaps at
//! most lambda spans at least R_star: the gap bound keeps the summed
//! frequency above a single-peak level between neighbors, and the span
//! guarantees the run covers a critical bubble. The probability of that
//! event for iid uniform centers is computed two ways: exactly, through the
//! beta/gamma measure recursion over the leftmost qualifying run, and by
//! Monte Carlo. A separate Monte Carlo estimator handles the d-dimensional
//! covering formulation.

use std::f64::consts::LN_2;
use std::f64::consts::TAU;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bubble;
use crate::error::{Error, Result};
use crate::reaction::ReactionCurve;
use crate::quad;

/// Largest dimensionless gap two unit-mass Gaussian plumes may leave while
/// their sum still clears the single-plume peak between them: 2 sqrt(log 2).
pub fn default_max_gap() -> f64 {
    2.0 * LN_2.sqrt()
}

/// Minimal release count for which the gap-and-span criterion is satisfiable.
pub fn k0_for(lambda: f64, r_star: f64) -> usize {
    (r_star / lambda).ceil() as usize + 1
}

/// A release protocol on the segment [-L, L], in dimensionless units.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProtocolSpec {
    pub k: usize,
    /// Half-box L.
    pub half_width: f64,
    /// Maximal allowed gap between consecutive releases in a run.
    pub lambda: f64,
    /// Span a run must reach.
    pub r_star: f64,
}

impl ProtocolSpec {
    pub fn new(k: usize, half_width: f64, lambda: f64, r_star: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::DomainError("need at least one release".into()));
        }
        if !(half_width > 0.0) {
            return Err(Error::InvalidBox(format!(
                "box half-width must be positive, got {half_width}"
            )));
        }
        if !(lambda > 0.0 && r_star > 0.0) {
            return Err(Error::DomainError(
                "gap and span thresholds must be positive".into(),
            ));
        }
        Ok(ProtocolSpec {
            k,
            half_width,
            lambda,
            r_star,
        })
    }

    pub fn k0(&self) -> usize {
        k0_for(self.lambda, self.r_star)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Exact,
    MonteCarlo,
}

impl fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimateMethod::Exact => "exact",
            EstimateMethod::MonteCarlo => "monte_carlo",
        })
    }
}

/// A probability with its provenance; exact values carry no sampling error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbabilityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub method: EstimateMethod,
    pub seed: u64,
}

impl ProbabilityEstimate {
    pub fn exact(value: f64) -> Self {
        ProbabilityEstimate {
            value,
            std_error: 0.0,
            n_samples: 0,
            method: EstimateMethod::Exact,
            seed: 0,
        }
    }
}

/// True when some maximal run with gaps <= lambda spans >= r_star.
/// Points must be sorted ascending; r_star is assumed positive.
pub fn success_criterion(points: &[f64], lambda: f64, r_star: f64) -> bool {
    debug_assert!(
        points.windows(2).all(|w| w[0] <= w[1]),
        "points must be sorted ascending"
    );
    let mut start = 0;
    for i in 0..points.len() {
        if i > 0 && points[i] - points[i - 1] > lambda {
            start = i;
        }
        if points[i] - points[start] >= r_star {
            return true;
        }
    }
    false
}

/// Fixed shard size keeps Monte Carlo results independent of thread count.
const MC_BATCH: u64 = 16_384;

/// Binomial Monte Carlo over deterministic per-batch RNG streams; `state`
/// builds per-batch scratch so trials do not allocate.
fn mc_binomial<S, I, F>(n_samples: u64, seed: u64, state: I, trial: F) -> (f64, f64)
where
    S: Send,
    I: Fn() -> S + Sync,
    F: Fn(&mut ChaCha8Rng, &mut S) -> bool + Sync,
{
    let n_batches = (n_samples + MC_BATCH - 1) / MC_BATCH;
    let hits: u64 = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b + 1);
            let mut scratch = state();
            let count = MC_BATCH.min(n_samples - b * MC_BATCH);
            let mut h = 0u64;
            for _ in 0..count {
                if trial(&mut rng, &mut scratch) {
                    h += 1;
                }
            }
            h
        })
        .sum();
    let p = hits as f64 / n_samples as f64;
    let se = (p * (1.0 - p) / n_samples as f64).sqrt();
    (p, se)
}

/// Samples k uniform release centers on [-L, L] and applies the gap-and-span
/// criterion. Geometrically impossible protocols return 0 without sampling.
pub fn mc_success_probability(
    spec: &ProtocolSpec,
    n_samples: u64,
    seed: u64,
) -> ProbabilityEstimate {
    assert!(n_samples >= 1, "need at least one sample");
    let ProtocolSpec {
        k,
        half_width: l,
        lambda,
        r_star,
    } = *spec;
    // a run of k points with gaps <= lambda spans at most (k-1) lambda
    if (k as f64 - 1.0) * lambda < r_star || 2.0 * l < r_star {
        return ProbabilityEstimate {
            value: 0.0,
            std_error: 0.0,
            n_samples,
            method: EstimateMethod::MonteCarlo,
            seed,
        };
    }
    let (value, std_error) = mc_binomial(
        n_samples,
        seed,
        || Vec::with_capacity(k),
        |rng, buf: &mut Vec<f64>| {
            buf.clear();
            for _ in 0..k {
                buf.push(rng.gen_range(-l..=l));
            }
            buf.sort_unstable_by(f64::total_cmp);
            success_criterion(buf, lambda, r_star)
        },
    );
    ProbabilityEstimate {
        value,
        std_error,
        n_samples,
        method: EstimateMethod::MonteCarlo,
        seed,
    }
}

/// Measure of ordered k-tuples in [u, v]: (v-u)^k / k!. By convention
/// tau_0 = 1 whatever the interval, including an empty one.
pub fn tau_measure(k: usize, u: f64, v: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let w = (v - u).max(0.0);
    w.powi(k as i32) / factorial(k)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, i| a * i as f64)
}

/// Measure of i-tuples pinned at u and v with consecutive gaps <= lambda:
/// the (i-1)-fold uniform-sum density at v-u, up to normalization. Stable
/// through i ~ 24 thanks to the reflection about the support midpoint.
pub fn gamma_measure(i: usize, lambda: f64, u: f64, v: f64) -> Result<f64> {
    if i < 2 {
        return Err(Error::DomainError(format!(
            "gap measures start at pairs, got i = {i}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::DomainError(format!(
            "gap threshold must be positive, got {lambda}"
        )));
    }
    Ok(gamma_w(i, lambda, v - u))
}

fn gamma_w(i: usize, lambda: f64, w: f64) -> f64 {
    let span = (i - 1) as f64 * lambda;
    if w < 0.0 || w > span {
        return 0.0;
    }
    if i == 2 {
        return 1.0;
    }
    // the measure is symmetric in w about span/2; evaluating on the smaller
    // half keeps the alternating sum well-conditioned near the far edge
    let w = w.min(span - w).max(0.0);
    let d = (i - 2) as i32;
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut binom = 1.0; // C(i-1, j)
    for j in 0..i {
        let x = w - j as f64 * lambda;
        if x <= 0.0 {
            break;
        }
        sum += sign * binom * x.powi(d);
        sign = -sign;
        binom = binom * (i - 1 - j) as f64 / (j + 1) as f64;
    }
    (sum / factorial(i - 2)).max(0.0)
}

/// Deepest exactly-computed level; beyond this use Monte Carlo.
const BETA_LEVEL_CAP: usize = 24;
const BETA_TARGET_NODES: usize = 2048;

/// Exact success measures B_l(s) for l <= k on a uniform s-grid, where s is
/// the interval length (translation invariance reduces both arguments of the
/// measure to one). Built level by level from the leftmost-run recursion.
#[derive(Debug, Clone)]
pub struct BetaTable {
    k: usize,
    k0: usize,
    lambda: f64,
    r_star: f64,
    h: f64,
    n: usize,
    levels: Vec<Vec<f64>>,
}

/// Builds the table with the default grid resolution.
pub fn beta_table(k: usize, lambda: f64, r_star: f64, s_max: f64) -> Result<BetaTable> {
    BetaTable::with_nodes(k, lambda, r_star, s_max, BETA_TARGET_NODES)
}

/// Exact success measure for k ordered uniforms on an interval of length s.
pub fn beta_measure(k: usize, lambda: f64, r_star: f64, s: f64) -> Result<f64> {
    if s <= r_star {
        return Ok(0.0);
    }
    beta_table(k, lambda, r_star, s)?.beta(k, s)
}

impl BetaTable {
    /// `target_nodes` controls the grid step (lambda is kept on-grid so the
    /// recursion's lambda-shifts are exact index shifts).
    pub fn with_nodes(
        k: usize,
        lambda: f64,
        r_star: f64,
        s_max: f64,
        target_nodes: usize,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::DomainError(format!(
                "the run criterion needs at least two releases, got {k}"
            )));
        }
        if k > BETA_LEVEL_CAP {
            return Err(Error::RecursionDepthExceeded {
                k,
                cap: BETA_LEVEL_CAP,
            });
        }
        if !(lambda > 0.0 && r_star > 0.0 && s_max > 0.0) {
            return Err(Error::DomainError(
                "gap, span and interval length must be positive".into(),
            ));
        }
        if target_nodes < 64 {
            return Err(Error::GridTooCoarse {
                need: 64,
                got: target_nodes,
            });
        }
        let m0 = ((lambda * target_nodes as f64 / s_max).ceil() as usize).max(1);
        let h = lambda / m0 as f64;
        let n = (s_max / h).ceil() as usize;
        let k0 = k0_for(lambda, r_star);
        let mut levels = vec![vec![0.0; n + 1]; k + 1];

        if k0 <= k {
            let kernels = build_kernels(k, k0, lambda, r_star, m0, n, h);
            for l in k0..=k {
                let mut b = vec![0.0; n + 1];
                // group by the left-block size: the correlation kernel is the
                // sum over run lengths i of K_{i, l-i+1-jj}
                for jj in 1..=(l - k0 + 1) {
                    let mut kern = vec![0.0; n + 1];
                    for i in k0..=(l - jj + 1) {
                        let m = l - i + 1 - jj;
                        let src = &kernels[i - k0][m];
                        for (a, s) in kern.iter_mut().zip(src) {
                            *a += s;
                        }
                    }
                    let a: Vec<f64> = if jj == 1 {
                        vec![1.0; n + 1]
                    } else {
                        (0..=n)
                            .map(|q| {
                                if q < m0 {
                                    0.0
                                } else {
                                    let x = (q - m0) as f64 * h;
                                    x.powi(jj as i32 - 1) / factorial(jj - 1)
                                        - levels[jj - 1][q - m0]
                                }
                            })
                            .collect()
                    };
                    for (j, bj) in b.iter_mut().enumerate().skip(1) {
                        let mut acc = 0.5 * (a[0] * kern[j] + a[j] * kern[0]);
                        for q in 1..j {
                            acc += a[q] * kern[j - q];
                        }
                        *bj += h * acc;
                    }
                }
                levels[l] = b;
            }
        }
        Ok(BetaTable {
            k,
            k0,
            lambda,
            r_star,
            h,
            n,
            levels,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    pub fn grid_step(&self) -> f64 {
        self.h
    }

    /// B_l at interval length s, linearly interpolated on the grid.
    pub fn beta(&self, level: usize, s: f64) -> Result<f64> {
        if level > self.k {
            return Err(Error::DomainError(format!(
                "level {level} above table order {}",
                self.k
            )));
        }
        if s <= self.r_star {
            return Ok(0.0);
        }
        let top = self.n as f64 * self.h;
        if s > top * (1.0 + 1e-12) {
            return Err(Error::DomainError(format!(
                "interval length {s} beyond tabulated range {top}"
            )));
        }
        let x = (s / self.h).min(self.n as f64);
        let j = (x.floor() as usize).min(self.n - 1);
        let t = x - j as f64;
        let row = &self.levels[level];
        Ok(row[j] + t * (row[j + 1] - row[j]))
    }

    /// Success probability for the table's k releases on [-L, L]:
    /// B_k(2L) / tau_k(2L).
    pub fn success_probability(&self, half_width: f64) -> Result<f64> {
        let s = 2.0 * half_width;
        let b = self.beta(self.k, s)?;
        let t = tau_measure(self.k, 0.0, s);
        if t <= 0.0 {
            return Ok(0.0);
        }
        Ok((b / t).clamp(0.0, 1.0))
    }
}

/// Kernels K_{i,m}(t) = int gamma_i(w) tau_m(w + lambda, t) dw over
/// w in [r_star, min(t, (i-1) lambda)], built by iterated cumulative
/// trapezoid integration: K_{i,0} = Gamma_i clamped at the support end,
/// K_{i,1}' (t) = K_{i,0}(t - lambda), K_{i,m}' = K_{i,m-1} for m >= 2.
fn build_kernels(
    k: usize,
    k0: usize,
    lambda: f64,
    r_star: f64,
    m0: usize,
    n: usize,
    h: f64,
) -> Vec<Vec<Vec<f64>>> {
    let mut kernels = Vec::with_capacity(k - k0 + 1);
    let rule = quad::gl16();
    for i in k0..=k {
        // gamma's kinks sit on multiples of lambda, which the aligned grid
        // puts on nodes, so each panel is a pure polynomial and the
        // per-panel rule makes the cumulative exact at every node
        let g = |w: f64| gamma_w(i, lambda, w);
        let mut cum = vec![0.0; n + 1];
        for j in 1..=n {
            cum[j] = cum[j - 1] + quad::fixed(&g, (j - 1) as f64 * h, j as f64 * h, rule);
        }
        // cumulative of gamma from r_star, frozen beyond the support end
        let j0 = ((r_star / h).floor() as usize).min(n);
        let c_rstar = cum[j0] + quad::fixed(&g, j0 as f64 * h, r_star, rule);
        let support_idx = (i - 1) * m0;
        let mut levels_im: Vec<Vec<f64>> = Vec::with_capacity(k - i + 1);
        let k0_kernel: Vec<f64> = (0..=n)
            .map(|j| {
                if j as f64 * h <= r_star {
                    0.0
                } else {
                    (cum[j.min(support_idx)] - c_rstar).max(0.0)
                }
            })
            .collect();
        levels_im.push(k0_kernel);
        for m in 1..=(k - i) {
            let prev = &levels_im[m - 1];
            let mut next = vec![0.0; n + 1];
            if m == 1 {
                // integrand is the previous kernel shifted right by lambda
                for j in 1..=n {
                    let lo = if j - 1 >= m0 { prev[j - 1 - m0] } else { 0.0 };
                    let hi = if j >= m0 { prev[j - m0] } else { 0.0 };
                    next[j] = next[j - 1] + 0.5 * h * (lo + hi);
                }
            } else {
                for j in 1..=n {
                    next[j] = next[j - 1] + 0.5 * h * (prev[j - 1] + prev[j]);
                }
            }
            levels_im.push(next);
        }
        kernels.push(levels_im);
    }
    kernels
}

/// Closed form of the minimal-count success measure B_{k0}(s): zero up to
/// R*, then the double integral of gamma_{k0}, then affine with slope f1.
pub fn beta_k0_closed_form(lambda: f64, r_star: f64, s: f64) -> Result<f64> {
    if !(lambda > 0.0 && r_star > 0.0) {
        return Err(Error::DomainError(
            "gap and span thresholds must be positive".into(),
        ));
    }
    let k0 = k0_for(lambda, r_star);
    let w_max = (k0 - 1) as f64 * lambda;
    if s <= r_star {
        return Ok(0.0);
    }
    let g = |w: f64| gamma_w(k0, lambda, w);
    if s <= w_max {
        // Fubini collapses int_{R*}^{s} Gamma(z) dz to a single integral
        Ok(quad::integrate(|w| g(w) * (s - w), r_star, s, 1e-11))
    } else {
        let f1 = quad::integrate(g, r_star, w_max, 1e-11);
        let f2 = quad::integrate(|w| g(w) * (w_max - w), r_star, w_max, 1e-11);
        Ok((s - w_max) * f1 + f2)
    }
}

/// The box half-width maximizing the k0-release success bound, with the
/// bound's value there.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimalBox {
    pub l_hat: f64,
    pub lower_bound: f64,
    pub k0: usize,
}

pub fn optimal_box_k0(lambda: f64, r_star: f64) -> Result<OptimalBox> {
    if !(lambda > 0.0 && r_star > 0.0) {
        return Err(Error::DomainError(
            "gap and span thresholds must be positive".into(),
        ));
    }
    let k0 = k0_for(lambda, r_star);
    let w_max = (k0 - 1) as f64 * lambda;
    let g = |w: f64| gamma_w(k0, lambda, w);
    let f1 = quad::integrate(g, r_star, w_max, 1e-11);
    let f2 = quad::integrate(|w| g(w) * (w_max - w), r_star, w_max, 1e-11);
    let ratio = if f1 > 0.0 { f2 / f1 } else { 0.0 };
    let kk = k0 as f64 / (k0 as f64 - 1.0);
    let two_l = k0 as f64 * lambda - kk * ratio;
    assert!(
        two_l >= kk * r_star - 1e-9 * (1.0 + two_l.abs()),
        "optimal box violates its own lower bound: 2L = {two_l}"
    );
    let l_hat = 0.5 * two_l;
    let lower_bound =
        factorial(k0) / two_l.powi(k0 as i32) * beta_k0_closed_form(lambda, r_star, two_l)?;
    Ok(OptimalBox {
        l_hat,
        lower_bound,
        k0,
    })
}

/// Per-release mass at which one plume's peak frequency reaches alpha.
pub fn critical_release_mass(alpha: f64, sigma: f64, n0: f64, dim: usize) -> f64 {
    (TAU * sigma).powf(0.5 * dim as f64) * alpha / (1.0 - alpha) * n0
}

/// Covering protocol in physical units: k releases of a fixed mass, uniform
/// on the box, each a Gaussian plume of variance sigma.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoverProtocol {
    pub k: usize,
    pub per_release_mass: f64,
    pub background: f64,
    pub half_width: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub dim: usize,
}

/// Monte Carlo estimate of the probability that the summed release
/// frequency clears alpha on some grid-translated ball with the bubble
/// support radius. The grid check is conservative: refining it can only
/// increase the reported success rate.
pub fn mc_cover_probability(
    curve: &ReactionCurve,
    proto: &CoverProtocol,
    n_samples: u64,
    seed: u64,
) -> Result<ProbabilityEstimate> {
    let CoverProtocol {
        k,
        per_release_mass: mass,
        background: n0,
        half_width: l,
        alpha,
        sigma,
        dim,
    } = *proto;
    if dim != 1 && dim != 2 {
        return Err(Error::DomainError(format!(
            "covering runs in 1 or 2 dimensions, got {dim}"
        )));
    }
    if k == 0 || !(mass > 0.0 && n0 > 0.0 && sigma > 0.0) {
        return Err(Error::DomainError(
            "need releases with positive mass, background and diffusivity".into(),
        ));
    }
    if !(l > 0.0) {
        return Err(Error::InvalidBox(format!(
            "box half-width must be positive, got {l}"
        )));
    }
    assert!(n_samples >= 1, "need at least one sample");
    let r_ball = bubble::bubble_radius_1d(curve, alpha, sigma)?;
    if r_ball > l {
        return Err(Error::InvalidBox(format!(
            "bubble radius {r_ball} does not fit in the half-width {l} box"
        )));
    }
    // an eighth of the pairing gap resolves every feature the criterion uses
    let g = (2.0 * sigma * LN_2).sqrt() / 8.0;
    let nx = ((2.0 * l) / g).ceil() as usize;
    let threshold = n0 * alpha / (1.0 - alpha);
    let w = (r_ball / g).ceil() as usize; // round out: conservative ball
    let norm = mass / (TAU * sigma).powf(0.5 * dim as f64);
    // ignore plume tails below 1e-3 of the threshold
    let reach = (2.0 * sigma * (norm / (threshold * 1e-3)).max(10.0).ln()).sqrt();
    let reach_nodes = (reach / g).ceil() as usize;

    let (value, std_error) = match dim {
        1 => mc_binomial(
            n_samples,
            seed,
            || (vec![0.0f64; nx + 1], vec![0u32; nx + 2]),
            |rng, (field, uncov): &mut (Vec<f64>, Vec<u32>)| {
                field.iter_mut().for_each(|v| *v = 0.0);
                for _ in 0..k {
                    let c = rng.gen_range(-l..=l);
                    let jc = ((c + l) / g) as usize;
                    let lo = jc.saturating_sub(reach_nodes);
                    let hi = (jc + reach_nodes).min(nx);
                    for (j, fj) in field.iter_mut().enumerate().take(hi + 1).skip(lo) {
                        let x = -l + j as f64 * g;
                        fj_add(fj, norm, x - c, sigma);
                    }
                }
                uncov[0] = 0;
                for j in 0..=nx {
                    uncov[j + 1] = uncov[j] + u32::from(field[j] < threshold);
                }
                // any window of 2w+1 nodes with no uncovered node wins
                (w..=nx.saturating_sub(w))
                    .any(|c| uncov[c + w + 1] - uncov[c - w] == 0)
            },
        ),
        _ => mc_binomial(
            n_samples,
            seed,
            || {
                (
                    vec![0.0f64; (nx + 1) * (nx + 1)],
                    vec![0u32; (nx + 2) * (nx + 2)],
                )
            },
            |rng, (field, uncov): &mut (Vec<f64>, Vec<u32>)| {
                field.iter_mut().for_each(|v| *v = 0.0);
                let stride = nx + 1;
                for _ in 0..k {
                    let cx = rng.gen_range(-l..=l);
                    let cy = rng.gen_range(-l..=l);
                    let jx = ((cx + l) / g) as usize;
                    let jy = ((cy + l) / g) as usize;
                    let (x0, x1) = (jx.saturating_sub(reach_nodes), (jx + reach_nodes).min(nx));
                    let (y0, y1) = (jy.saturating_sub(reach_nodes), (jy + reach_nodes).min(nx));
                    for jy in y0..=y1 {
                        let y = -l + jy as f64 * g;
                        let qy = (y - cy) * (y - cy);
                        for jx in x0..=x1 {
                            let x = -l + jx as f64 * g;
                            let q = (x - cx) * (x - cx) + qy;
                            field[jy * stride + jx] += norm * (-q / (2.0 * sigma)).exp();
                        }
                    }
                }
                // 2D prefix sums of uncovered counts; a square window is a
                // superset of the ball, so demanding it stay covered is safe
                let ps = nx + 2;
                for j in 0..ps {
                    uncov[j] = 0;
                    uncov[j * ps] = 0;
                }
                for jy in 0..=nx {
                    for jx in 0..=nx {
                        let miss = u32::from(field[jy * stride + jx] < threshold);
                        uncov[(jy + 1) * ps + jx + 1] =
                            miss + uncov[jy * ps + jx + 1] + uncov[(jy + 1) * ps + jx]
                                - uncov[jy * ps + jx];
                    }
                }
                for cy in w..=nx.saturating_sub(w) {
                    for cx in w..=nx.saturating_sub(w) {
                        let (x0, x1) = (cx - w, cx + w + 1);
                        let (y0, y1) = (cy - w, cy + w + 1);
                        let miss = uncov[y1 * ps + x1] + uncov[y0 * ps + x0]
                            - uncov[y1 * ps + x0]
                            - uncov[y0 * ps + x1];
                        if miss == 0 {
                            return true;
                        }
                    }
                }
                false
            },
        ),
    };
    Ok(ProbabilityEstimate {
        value,
        std_error,
        n_samples,
        method: EstimateMethod::MonteCarlo,
        seed,
    })
}

#[inline]
fn fj_add(fj: &mut f64, norm: f64, dx: f64, sigma: f64) {
    *fj += norm * (-dx * dx / (2.0 * sigma)).exp();
}
