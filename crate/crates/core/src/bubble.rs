//! Stationary infection bubbles and their energies.
//!
//! A bubble of height alpha is the symmetric solution of
//! sigma u'' + f(u) = 0 with u(0) = alpha, u'(0) = 0. Its first integral
//! (sigma/2) u'^2 = F(alpha) - F(u) turns every question about the profile
//! into a one-dimensional quadrature in the frequency variable. Bubbles
//! exist for alpha in (theta_c, theta_plus); their radius L_alpha diverges
//! at both ends and has a unique interior minimum at alpha_0, which sets the
//! critical width an invasion seed must reach.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reaction::ReactionCurve;
use crate::{optim, quad};

/// Dimensionless profile width between frequencies omega and alpha:
/// int_omega^alpha dv / sqrt(F(alpha) - F(v)). Physical distances are
/// sqrt(sigma/2) times this. Desingularized at v = alpha by v = alpha - t^2.
pub(crate) fn span_integral(
    curve: &ReactionCurve,
    alpha: f64,
    omega: f64,
    rel_tol: f64,
) -> Result<f64> {
    let theta_c = curve.theta_c();
    let theta_plus = curve.theta_plus();
    if !(omega >= 0.0 && omega <= alpha + 1e-15) {
        return Err(Error::DomainError(format!(
            "need 0 <= omega <= alpha, got omega={omega}, alpha={alpha}"
        )));
    }
    if alpha < theta_c - 1e-12 || alpha > theta_plus + 1e-12 {
        return Err(Error::DomainError(format!(
            "alpha = {alpha} outside [theta_c, theta_plus] = [{theta_c}, {theta_plus}]"
        )));
    }
    if omega >= alpha {
        return Ok(0.0);
    }
    if curve.f_raw(alpha) <= 1e-12 {
        // alpha at the upper equilibrium (up to coefficient rounding):
        // the profile never leaves it
        return Err(Error::DivergentIntegral(
            "profile width is infinite at the upper equilibrium".into(),
        ));
    }
    if alpha <= theta_c + 1e-12 && omega == 0.0 {
        return Err(Error::DivergentIntegral(
            "the ground-state profile has unbounded support".into(),
        ));
    }
    let t_max = (alpha - omega).sqrt();
    let g = |t: f64| {
        let d = curve.big_f_drop(alpha, t * t);
        2.0 * t / d.max(f64::MIN_POSITIVE).sqrt()
    };
    Ok(quad::integrate(g, 0.0, t_max, rel_tol))
}

/// Distance along the bubble of height alpha between the levels alpha and
/// omega, in physical units for diffusivity sigma.
pub fn chi(curve: &ReactionCurve, alpha: f64, omega: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::DomainError("sigma must be positive".into()));
    }
    Ok((sigma / 2.0).sqrt() * span_integral(curve, alpha, omega, 1e-8)?)
}

/// Support radius L_alpha of the bubble of height alpha.
pub fn bubble_radius_1d(curve: &ReactionCurve, alpha: f64, sigma: f64) -> Result<f64> {
    chi(curve, alpha, 0.0, sigma)
}

/// Sampled bubble profile, frequencies decreasing from alpha at the center
/// to 0 at the support radius.
#[derive(Debug, Clone, Serialize)]
pub struct BubbleProfile {
    pub alpha: f64,
    pub sigma: f64,
    pub radius: Vec<f64>,
    pub frequency: Vec<f64>,
}

impl BubbleProfile {
    pub fn l_alpha(&self) -> f64 {
        *self.radius.last().unwrap()
    }

    /// u(x) by symmetry and linear interpolation; 0 beyond the support.
    pub fn eval(&self, x: f64) -> f64 {
        let r = x.abs();
        let n = self.radius.len();
        if r >= self.radius[n - 1] {
            return 0.0;
        }
        let i = self.radius.partition_point(|&ri| ri <= r).min(n - 1);
        if i == 0 {
            return self.frequency[0];
        }
        let (r0, r1) = (self.radius[i - 1], self.radius[i]);
        let (u0, u1) = (self.frequency[i - 1], self.frequency[i]);
        if r1 == r0 {
            return u0;
        }
        u0 + (u1 - u0) * (r - r0) / (r1 - r0)
    }
}

/// Samples the bubble of height alpha at n knots, uniform in the
/// desingularizing variable so knots crowd near the center where the
/// frequency turns around.
pub fn bubble_profile(
    curve: &ReactionCurve,
    alpha: f64,
    sigma: f64,
    n: usize,
) -> Result<BubbleProfile> {
    if n < 9 {
        return Err(Error::GridTooCoarse { need: 9, got: n });
    }
    if !(sigma > 0.0) {
        return Err(Error::DomainError("sigma must be positive".into()));
    }
    // rejects alpha outside (theta_c, theta_plus)
    span_integral(curve, alpha, 0.0, 1e-8)?;

    let t_max = alpha.sqrt();
    let scale = (sigma / 2.0).sqrt();
    let g = |t: f64| {
        let d = curve.big_f_drop(alpha, t * t);
        2.0 * t / d.max(f64::MIN_POSITIVE).sqrt()
    };
    let mut radius = Vec::with_capacity(n);
    let mut frequency = Vec::with_capacity(n);
    radius.push(0.0);
    frequency.push(alpha);
    let mut acc = 0.0;
    for j in 1..n {
        let t0 = t_max * (j - 1) as f64 / (n - 1) as f64;
        let t1 = t_max * j as f64 / (n - 1) as f64;
        acc += quad::fixed(&g, t0, t1, quad::gl8());
        radius.push(scale * acc);
        frequency.push((alpha - t1 * t1).max(0.0));
    }
    *frequency.last_mut().unwrap() = 0.0;
    Ok(BubbleProfile {
        alpha,
        sigma,
        radius,
        frequency,
    })
}

/// The minimizer of L_alpha over bubble heights.
#[derive(Debug, Clone, Serialize)]
pub struct MinBubbleRadius {
    pub alpha_0: f64,
    /// L at alpha_0 in physical units.
    pub radius: f64,
    /// Dimensionless width: 2 L / sqrt(2 sigma).
    pub span: f64,
    /// True when the scan saw more than one interior local minimum.
    pub multiple_minima: bool,
    /// Root of the balance condition h(alpha) = -2 when available; an
    /// independent characterization of alpha_0.
    pub alpha_0_balance: Option<f64>,
}

/// Minimizes the bubble radius over alpha in (theta_c, theta_plus).
pub fn min_bubble_radius(curve: &ReactionCurve, sigma: f64) -> Result<MinBubbleRadius> {
    if !(sigma > 0.0) {
        return Err(Error::DomainError("sigma must be positive".into()));
    }
    let width = curve.theta_plus() - curve.theta_c();
    let lo = curve.theta_c() + 1e-4 * width;
    let hi = curve.theta_plus() - 1e-4 * width;
    let coarse = |a: f64| span_integral(curve, a, 0.0, 1e-9).unwrap_or(f64::INFINITY);
    let scan = optim::grid_min(&coarse, lo, hi, 256);
    let fine = |a: f64| span_integral(curve, a, 0.0, 1e-12).unwrap_or(f64::INFINITY);
    let (alpha_0, span) = optim::golden_min(fine, scan.bracket.0, scan.bracket.1, 1e-9);

    let alpha_0_balance = if (curve.theta_plus() - 1.0).abs() < 1e-9 {
        balance_root(curve).ok()
    } else {
        None
    };

    Ok(MinBubbleRadius {
        alpha_0,
        radius: (sigma / 2.0).sqrt() * span,
        span,
        multiple_minima: scan.local_minima > 1,
        alpha_0_balance,
    })
}

/// Solves h(alpha) = -2; h is increasing from -inf to +inf on
/// (theta_c, 1), so the root is unique.
fn balance_root(curve: &ReactionCurve) -> Result<f64> {
    let w = 1.0 - curve.theta_c();
    optim::bisect(
        |a| h_func(curve, a).map_or(f64::NAN, |h| h + 2.0),
        curve.theta_c() + 1e-4 * w,
        1.0 - 1e-4 * w,
        1e-10,
    )
}

/// The balance functional
/// h(alpha) = int_0^1 [(1-w)^{-3/2} - (alpha f(alpha) / (F(alpha) - F(alpha w)))^{3/2}] dw.
///
/// Both terms blow up like (1-w)^{-3/2}; the difference is integrable. After
/// w = 1 - t^2 the tail is a convergent power series in t, which is used
/// below the switch point to dodge the cancellation.
pub fn h_func(curve: &ReactionCurve, alpha: f64) -> Result<f64> {
    if (curve.theta_plus() - 1.0).abs() > 1e-9 {
        return Err(Error::DomainError(
            "balance functional requires the upper state pinned at 1".into(),
        ));
    }
    if !(alpha > curve.theta_c() && alpha < 1.0) {
        return Err(Error::DomainError(format!(
            "alpha = {alpha} outside (theta_c, 1)"
        )));
    }
    let fa = curve.f_raw(alpha);
    if fa <= 0.0 {
        return Err(Error::DomainError("f(alpha) must be positive".into()));
    }
    let fpa = curve.f_prime_raw(alpha);
    let fppa = curve.f_second_raw(alpha);
    let c1 = 0.75 * fpa / fa;
    let c2 = 15.0 / 32.0 * (fpa / fa).powi(2) - fppa / (4.0 * fa);
    // Below the switch point the two 1/t^2-sized terms cancel to rounding;
    // 1e-2 keeps the series truncation near 1e-9 while the direct part's
    // cancellation noise stays four orders below it.
    let t_sw = 1e-2;

    // series for t in [0, t_sw]: integrand = -2 c1 alpha - 2 c2 alpha^2 t^2
    let head = -2.0 * c1 * alpha * t_sw - (2.0 / 3.0) * c2 * alpha * alpha * t_sw.powi(3);

    let g = |t: f64| {
        let d = curve.big_f_drop(alpha, alpha * t * t);
        let ratio = alpha * fa / d.max(f64::MIN_POSITIVE);
        2.0 * (1.0 / (t * t) - t * ratio.powf(1.5))
    };
    let tail = quad::integrate(g, t_sw, 1.0, 1e-9);
    Ok(head + tail)
}

/// Decaying ground state u(0) = theta_c: the separatrix profile between
/// invasion and extinction. Tabulated down to 1e-4 theta_c, exponential
/// tail with rate sqrt(-f'(0)/sigma) beyond.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub sigma: f64,
    xs: Vec<f64>,
    us: Vec<f64>,
    rate: f64,
}

impl GroundState {
    pub fn max(&self) -> f64 {
        self.us[0]
    }

    pub fn decay_rate(&self) -> f64 {
        self.rate
    }

    pub fn eval(&self, x: f64) -> f64 {
        let r = x.abs();
        let n = self.xs.len();
        if r >= self.xs[n - 1] {
            let tail = self.us[n - 1];
            return tail * (-self.rate * (r - self.xs[n - 1])).exp();
        }
        let i = self.xs.partition_point(|&xi| xi <= r).min(n - 1);
        if i == 0 {
            return self.us[0];
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (u0, u1) = (self.us[i - 1], self.us[i]);
        u0 + (u1 - u0) * (r - x0) / (x1 - x0)
    }
}

pub fn ground_state(curve: &ReactionCurve, sigma: f64) -> Result<GroundState> {
    if !(sigma > 0.0) {
        return Err(Error::DomainError("sigma must be positive".into()));
    }
    let theta_c = curve.theta_c();
    let scale = (sigma / 2.0).sqrt();
    let mut xs = vec![0.0];
    let mut us = vec![theta_c];
    let mut acc = 0.0;

    // upper half, v from theta_c down to theta_c/2, desingularized
    let g_up = |t: f64| {
        let d = curve.big_f_drop(theta_c, t * t);
        2.0 * t / d.max(f64::MIN_POSITIVE).sqrt()
    };
    let t_half = (theta_c / 2.0).sqrt();
    let n_up = 512;
    for j in 1..=n_up {
        let t0 = t_half * (j - 1) as f64 / n_up as f64;
        let t1 = t_half * j as f64 / n_up as f64;
        acc += quad::fixed(&g_up, t0, t1, quad::gl8());
        xs.push(scale * acc);
        us.push(theta_c - t1 * t1);
    }

    // lower half on a log grid in v; here F(theta_c) - F(v) = -F(v) to
    // rounding, and using -F directly avoids the cancellation entirely
    let g_low = |v: f64| 1.0 / (-curve.big_f_raw(v)).max(f64::MIN_POSITIVE).sqrt();
    let v_top = theta_c / 2.0;
    let v_bot = 1e-4 * theta_c;
    let n_low = 768;
    let ratio = (v_bot / v_top).powf(1.0 / n_low as f64);
    let mut v0 = v_top;
    for _ in 0..n_low {
        let v1 = v0 * ratio;
        acc += quad::fixed(&g_low, v1, v0, quad::gl8());
        xs.push(scale * acc);
        us.push(v1);
        v0 = v1;
    }

    let rate = (-curve.f_prime_raw(0.0) / sigma).sqrt();
    Ok(GroundState {
        sigma,
        xs,
        us,
        rate,
    })
}

/// Discrete energy int (sigma/2) |u'|^2 - F(u) dx on a uniform grid,
/// trapezoid weights, one-sided gradients at the boundary.
pub fn energy_1d(curve: &ReactionCurve, u: &[f64], dx: f64, sigma: f64) -> Result<f64> {
    let n = u.len();
    if n < 3 {
        return Err(Error::GridTooCoarse { need: 3, got: n });
    }
    if !(dx > 0.0 && sigma > 0.0) {
        return Err(Error::DomainError("dx and sigma must be positive".into()));
    }
    let mut total = 0.0;
    for i in 0..n {
        let grad = if i == 0 {
            (u[1] - u[0]) / dx
        } else if i == n - 1 {
            (u[n - 1] - u[n - 2]) / dx
        } else {
            (u[i + 1] - u[i - 1]) / (2.0 * dx)
        };
        let e = 0.5 * sigma * grad * grad - curve.big_f(u[i])?;
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        total += w * e;
    }
    Ok(total * dx)
}

/// Discrete energy on a uniform nx-by-ny grid, row-major storage.
pub fn energy_2d(curve: &ReactionCurve, u: &[f64], nx: usize, ny: usize, dx: f64, sigma: f64) -> Result<f64> {
    if nx < 3 || ny < 3 {
        return Err(Error::GridTooCoarse {
            need: 3,
            got: nx.min(ny),
        });
    }
    if u.len() != nx * ny {
        return Err(Error::DomainError(format!(
            "field length {} does not match {nx} x {ny}",
            u.len()
        )));
    }
    if !(dx > 0.0 && sigma > 0.0) {
        return Err(Error::DomainError("dx and sigma must be positive".into()));
    }
    let at = |i: usize, j: usize| u[j * nx + i];
    let mut total = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let gx = if i == 0 {
                (at(1, j) - at(0, j)) / dx
            } else if i == nx - 1 {
                (at(nx - 1, j) - at(nx - 2, j)) / dx
            } else {
                (at(i + 1, j) - at(i - 1, j)) / (2.0 * dx)
            };
            let gy = if j == 0 {
                (at(i, 1) - at(i, 0)) / dx
            } else if j == ny - 1 {
                (at(i, ny - 1) - at(i, ny - 2)) / dx
            } else {
                (at(i, j + 1) - at(i, j - 1)) / (2.0 * dx)
            };
            let e = 0.5 * sigma * (gx * gx + gy * gy) - curve.big_f(at(i, j))?;
            let wi = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
            let wj = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
            total += wi * wj * e;
        }
    }
    Ok(total * dx * dx)
}

/// Energy of the bubble of height alpha,
/// E = 2 sqrt(sigma) int_0^alpha (F(alpha) - 2 F(v)) / sqrt(2 (F(alpha) - F(v))) dv.
/// At alpha = theta_c this is the positive limit 2 sqrt(sigma)
/// int_0^theta_c sqrt(-2 F); it decreases without bound as alpha nears the
/// upper equilibrium, where the value returned is the (large, negative)
/// depth-capped approximation of the divergent integral.
pub fn bubble_energy_1d(curve: &ReactionCurve, alpha: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::DomainError("sigma must be positive".into()));
    }
    let theta_c = curve.theta_c();
    if (alpha - theta_c).abs() <= 1e-12 {
        let v = quad::integrate(
            |x| (-2.0 * curve.big_f_raw(x)).max(0.0).sqrt(),
            0.0,
            theta_c,
            1e-9,
        );
        return Ok(2.0 * sigma.sqrt() * v);
    }
    if alpha < theta_c || alpha > curve.theta_plus() + 1e-12 {
        return Err(Error::DomainError(format!(
            "alpha = {alpha} outside [theta_c, theta_plus]"
        )));
    }
    let f_alpha = curve.big_f_raw(alpha.min(curve.theta_plus()));
    let g = |t: f64| {
        let v = alpha - t * t;
        let d = curve.big_f_drop(alpha, t * t).max(f64::MIN_POSITIVE);
        2.0 * t * (f_alpha - 2.0 * curve.big_f_raw(v.max(0.0))) / (2.0 * d).sqrt()
    };
    Ok(2.0 * sigma.sqrt() * quad::integrate(g, 0.0, alpha.sqrt(), 1e-9))
}

/// A radius at which the cone-shaped test bubble of height alpha has
/// nonpositive energy, minimized over the plateau fraction rho.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusEstimate {
    pub radius: f64,
    pub rho_opt: f64,
    pub dim: usize,
}

/// Smallest energy-radius over rho in (0, 1) for dimension dim:
/// R^2(rho) = sigma alpha^2 (1 - rho^dim) / ((1 - rho)^2 I(rho)) with
/// I(rho) = int_0^alpha (1 - (1-rho) x / alpha)^dim f(x) dx, restricted to
/// rho where I > 0. I(rho) -> F(alpha) > 0 as rho -> 1, so the feasible set
/// is never empty.
pub fn energy_radius(
    curve: &ReactionCurve,
    alpha: f64,
    sigma: f64,
    dim: usize,
) -> Result<RadiusEstimate> {
    if dim == 0 {
        return Err(Error::DomainError("dimension must be at least 1".into()));
    }
    if !(sigma > 0.0) {
        return Err(Error::DomainError("sigma must be positive".into()));
    }
    if !(alpha > curve.theta_c() && alpha <= curve.theta_plus()) {
        return Err(Error::DomainError(format!(
            "alpha = {alpha} outside (theta_c, theta_plus]"
        )));
    }
    let d = dim as i32;
    let inner = |rho: f64| {
        quad::integrate(
            |x| (1.0 - (1.0 - rho) * x / alpha).powi(d) * curve.f_raw(x),
            0.0,
            alpha,
            1e-10,
        )
    };
    let r2 = |rho: f64| {
        let i = inner(rho);
        if i <= 0.0 {
            f64::INFINITY
        } else {
            sigma * alpha * alpha * (1.0 - rho.powi(d)) / ((1.0 - rho).powi(2) * i)
        }
    };
    let scan = optim::grid_min(&r2, 1e-4, 1.0 - 1e-6, 1024);
    if !scan.value.is_finite() {
        return Err(Error::RootBracketingFailed(
            "no plateau fraction with positive reaction mass".into(),
        ));
    }
    let (rho_opt, r2_min) = optim::golden_min(r2, scan.bracket.0, scan.bracket.1, 1e-9);
    Ok(RadiusEstimate {
        radius: r2_min.sqrt(),
        rho_opt,
        dim,
    })
}

/// Structural checks behind uniqueness of the minimal-bubble height.
#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub theta: f64,
    pub theta_c: f64,
    /// f'(0) < 0, f'(theta) > 0, f'(1) < 0.
    pub b0: bool,
    /// F(1) > 0.
    pub b1: bool,
    /// (f' + x f'') f <= x f'^2 on [0, 1].
    pub b2: bool,
    /// F(alpha)(f + alpha f') <= alpha f^2 above max(theta_c, alpha_1).
    pub b3: bool,
    /// Unique solution of x f'(x) = f(x) in (theta, 1).
    pub alpha_1: f64,
    pub h_monotone: bool,
    pub alpha_0_direct: f64,
    pub alpha_0_balance: f64,
    pub h_at_alpha_0: f64,
    pub g_samples: Vec<(f64, f64)>,
    pub h_samples: Vec<(f64, f64)>,
}

/// Verifies the conditions that make the radius-minimizing height unique,
/// on a grid of n+1 points. Requires the upper state pinned at 1.
pub fn check_uniqueness(curve: &ReactionCurve, n: usize) -> Result<UniquenessReport> {
    if (curve.theta_plus() - 1.0).abs() > 1e-9 {
        return Err(Error::DomainError(
            "uniqueness checks require the upper state pinned at 1".into(),
        ));
    }
    if n < 16 {
        return Err(Error::GridTooCoarse { need: 16, got: n });
    }
    let theta = curve.theta();
    let theta_c = curve.theta_c();

    let b0 = curve.f_prime_raw(0.0) < 0.0
        && curve.f_prime_raw(theta) > 0.0
        && curve.f_prime_raw(1.0) < 0.0;
    let b1 = curve.f_at_upper() > 0.0;

    let mut b2 = true;
    for i in 0..=n {
        let x = i as f64 / n as f64;
        let f = curve.f_raw(x);
        let fp = curve.f_prime_raw(x);
        let fpp = curve.f_second_raw(x);
        let lhs = (fp + x * fpp) * f;
        let rhs = x * fp * fp;
        if lhs > rhs + 1e-12 * lhs.abs().max(rhs.abs()).max(1.0) {
            b2 = false;
            break;
        }
    }

    // g = x f' / f falls from +inf just above theta to -inf at 1
    let g = |x: f64| x * curve.f_prime_raw(x) / curve.f_raw(x);
    let alpha_1 = optim::bisect(|x| g(x) - 1.0, theta + 1e-6, 1.0 - 1e-6, 1e-10)?;

    let mut b3 = true;
    let b3_lo = theta_c.max(alpha_1) + 1e-9;
    for i in 0..=n {
        let x = b3_lo + (1.0 - b3_lo) * i as f64 / n as f64;
        let f = curve.f_raw(x);
        let fp = curve.f_prime_raw(x);
        let cap_f = curve.big_f_raw(x);
        let lhs = cap_f * (f + x * fp);
        let rhs = x * f * f;
        if lhs > rhs + 1e-12 * lhs.abs().max(rhs.abs()).max(1.0) {
            b3 = false;
            break;
        }
    }

    let w = 1.0 - theta_c;
    let mut h_samples = Vec::new();
    for i in 0..64 {
        let a = theta_c + w * (0.02 + 0.96 * i as f64 / 63.0);
        h_samples.push((a, h_func(curve, a)?));
    }
    let h_monotone = h_samples.windows(2).all(|p| p[1].1 > p[0].1);

    let mut g_samples = Vec::new();
    for i in 0..64 {
        let x = 0.02 + 0.96 * i as f64 / 63.0;
        if curve.f_raw(x).abs() > 1e-6 {
            g_samples.push((x, g(x)));
        }
    }

    let direct = min_bubble_radius(curve, 2.0)?;
    let alpha_0_balance = balance_root(curve)?;
    let h_at_alpha_0 = h_func(curve, direct.alpha_0)?;

    Ok(UniquenessReport {
        theta,
        theta_c,
        b0,
        b1,
        b2,
        b3,
        alpha_1,
        h_monotone,
        alpha_0_direct: direct.alpha_0,
        alpha_0_balance,
        h_at_alpha_0,
        g_samples,
        h_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::{ReactionCurve, ReactionParams};

    fn wmel() -> ReactionCurve {
        ReactionCurve::new(ReactionParams::default()).unwrap()
    }

    /// Shooting oracle: RK4 on sigma u'' = -f(u) from (alpha, 0) until the
    /// profile crosses zero.
    fn shoot_radius(curve: &ReactionCurve, alpha: f64, sigma: f64, guess: f64) -> f64 {
        let dx = guess / 2e5;
        let acc = |u: f64| -curve.f_raw(u.clamp(0.0, curve.theta_plus())) / sigma;
        let mut u = alpha;
        let mut v = 0.0;
        let mut x = 0.0;
        for _ in 0..1_000_000 {
            let (u0, v0) = (u, v);
            let k1 = (v0, acc(u0));
            let k2 = (v0 + 0.5 * dx * k1.1, acc(u0 + 0.5 * dx * k1.0));
            let k3 = (v0 + 0.5 * dx * k2.1, acc(u0 + 0.5 * dx * k2.0));
            let k4 = (v0 + dx * k3.1, acc(u0 + dx * k3.0));
            u = u0 + dx / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            v = v0 + dx / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            x += dx;
            if u <= 0.0 {
                return x - dx + dx * u0 / (u0 - u);
            }
        }
        x
    }

    #[test]
    fn radius_matches_shooting_oracle() {
        let c = wmel();
        for &(alpha, sigma) in &[(0.6, 2.0), (0.45, 830.0)] {
            let l = bubble_radius_1d(&c, alpha, sigma).unwrap();
            let shot = shoot_radius(&c, alpha, sigma, l);
            assert!(
                (l - shot).abs() < 1e-5 * l,
                "alpha={alpha}: quadrature {l} vs shooting {shot}"
            );
        }
        let cubic = ReactionCurve::cubic(0.3, 1.0).unwrap();
        let l = bubble_radius_1d(&cubic, 0.7, 2.0).unwrap();
        let shot = shoot_radius(&cubic, 0.7, 2.0, l);
        assert!((l - shot).abs() < 1e-5 * l);
    }

    #[test]
    fn chi_decreases_in_omega_and_scales_with_sigma() {
        let c = wmel();
        let alpha = 0.6;
        let mut prev = f64::INFINITY;
        for i in 0..6 {
            let omega = alpha * i as f64 / 6.0;
            let v = chi(&c, alpha, omega, 2.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let a = chi(&c, alpha, 0.1, 2.0).unwrap();
        let b = chi(&c, alpha, 0.1, 8.0).unwrap();
        assert!((b / a - 2.0).abs() < 1e-9);
    }

    #[test]
    fn divergent_widths_are_reported() {
        let c = wmel();
        let err = bubble_radius_1d(&c, c.theta_c(), 2.0).unwrap_err();
        assert!(matches!(err, Error::DivergentIntegral(_)));
        let err = bubble_radius_1d(&c, 1.0, 2.0).unwrap_err();
        assert!(matches!(err, Error::DivergentIntegral(_)));
        // but a finite stretch of the ground state is fine
        assert!(chi(&c, c.theta_c(), 0.1, 2.0).unwrap().is_finite());
    }

    #[test]
    fn radius_blows_up_toward_both_ends() {
        let c = wmel();
        let mid = bubble_radius_1d(&c, 0.6, 2.0).unwrap();
        let lo = bubble_radius_1d(&c, c.theta_c() + 1e-7, 2.0).unwrap();
        let hi = bubble_radius_1d(&c, 1.0 - 1e-7, 2.0).unwrap();
        assert!(lo > 2.0 * mid);
        assert!(hi > 2.0 * mid);
    }

    #[test]
    fn profile_obeys_first_integral() {
        let c = wmel();
        let alpha = 0.6;
        let sigma = 2.0;
        let prof = bubble_profile(&c, alpha, sigma, 4097).unwrap();
        assert_eq!(prof.frequency[0], alpha);
        assert_eq!(*prof.frequency.last().unwrap(), 0.0);
        let f_alpha = c.big_f(alpha).unwrap();
        for j in (200..4000).step_by(200) {
            let du = (prof.frequency[j + 1] - prof.frequency[j - 1])
                / (prof.radius[j + 1] - prof.radius[j - 1]);
            let lhs = 0.5 * sigma * du * du;
            let rhs = f_alpha - c.big_f(prof.frequency[j]).unwrap();
            assert!(
                (lhs - rhs).abs() < 2e-2 * rhs.abs().max(1e-6),
                "j={j}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn profile_radius_agrees_with_direct_quadrature() {
        let c = wmel();
        let prof = bubble_profile(&c, 0.5, 830.0, 4096).unwrap();
        let l = bubble_radius_1d(&c, 0.5, 830.0).unwrap();
        assert!((prof.l_alpha() - l).abs() < 1e-6 * l);
        // interpolation midpoint sanity
        assert!(prof.eval(0.0) == 0.5);
        assert!(prof.eval(l * 2.0) == 0.0);
        let half = prof.eval(0.5 * l);
        assert!(half > 0.0 && half < 0.5);
    }

    #[test]
    fn minimal_radius_has_interior_minimizer() {
        let c = wmel();
        let m = min_bubble_radius(&c, 2.0).unwrap();
        assert!(!m.multiple_minima);
        assert!(m.alpha_0 > c.theta_c() && m.alpha_0 < 1.0);
        // dimensionless span and radius agree under sigma = 2
        assert!((m.radius - m.span).abs() < 1e-12);
        // the balance characterization lands on the same height
        let h0 = h_func(&c, m.alpha_0).unwrap();
        assert!((h0 + 2.0).abs() < 1e-4, "h(alpha_0) = {h0}");
        let ab = m.alpha_0_balance.unwrap();
        assert!((ab - m.alpha_0).abs() < 1e-5, "{ab} vs {}", m.alpha_0);
    }

    #[test]
    fn ground_state_decays_at_the_linearized_rate() {
        let c = wmel();
        let sigma = 2.0;
        let gs = ground_state(&c, sigma).unwrap();
        assert!((gs.max() - c.theta_c()).abs() < 1e-12);
        let expect = (-c.f_prime(0.0).unwrap() / sigma).sqrt();
        assert!((gs.decay_rate() - expect).abs() < 1e-14);
        // measure the rate from the profile where u ~ 1e-3 theta_c
        let mut x = 0.0;
        while gs.eval(x) > 1e-3 * c.theta_c() {
            x += 0.05;
        }
        let r = (gs.eval(x).ln() - gs.eval(x + 1.0).ln()) / 1.0;
        assert!((r - expect).abs() < 0.01 * expect, "rate {r} vs {expect}");
        // monotone decay
        let mut prev = gs.eval(0.0);
        for i in 1..200 {
            let v = gs.eval(i as f64 * 0.1);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn constant_field_energy_is_minus_f_times_length() {
        let c = wmel();
        let u = vec![0.8; 101];
        let e = energy_1d(&c, &u, 0.1, 2.0).unwrap();
        let expect = -c.big_f(0.8).unwrap() * 10.0;
        assert!((e - expect).abs() < 1e-12);
        let u2 = vec![0.8; 9 * 9];
        let e2 = energy_2d(&c, &u2, 9, 9, 0.5, 2.0).unwrap();
        let expect2 = -c.big_f(0.8).unwrap() * 16.0;
        assert!((e2 - expect2).abs() < 1e-12);
    }

    #[test]
    fn bubble_energy_signs() {
        let c = wmel();
        let at_limit = bubble_energy_1d(&c, c.theta_c(), 2.0).unwrap();
        assert!(at_limit > 0.0);
        // continuity at the limit
        let near = bubble_energy_1d(&c, c.theta_c() + 1e-7, 2.0).unwrap();
        assert!((near - at_limit).abs() < 1e-3 * at_limit);
        // large bubbles have negative energy
        let deep = bubble_energy_1d(&c, 1.0 - 1e-6, 2.0).unwrap();
        assert!(deep < 0.0, "E = {deep}");
    }

    #[test]
    fn bubble_energy_matches_discrete_energy_of_the_profile() {
        let c = wmel();
        let alpha = 0.7;
        let sigma = 2.0;
        let exact = bubble_energy_1d(&c, alpha, sigma).unwrap();
        let prof = bubble_profile(&c, alpha, sigma, 8193).unwrap();
        let l = prof.l_alpha();
        let n = 16384;
        let dx = 2.4 * l / n as f64;
        let u: Vec<f64> = (0..=n)
            .map(|i| prof.eval(-1.2 * l + i as f64 * dx))
            .collect();
        let disc = energy_1d(&c, &u, dx, sigma).unwrap();
        assert!(
            (disc - exact).abs() < 5e-3 * exact.abs(),
            "discrete {disc} vs quadrature {exact}"
        );
    }

    #[test]
    fn energy_radius_matches_1d_closed_form() {
        let c = wmel();
        for &alpha in &[0.5, 0.7, 0.9] {
            let sigma = 830.0;
            let est = energy_radius(&c, alpha, sigma, 1).unwrap();
            let f_alpha = c.big_f(alpha).unwrap();
            let v = quad::integrate(|x| c.big_f_raw(x), 0.0, alpha, 1e-11) / alpha;
            let u = f_alpha - v;
            let rho_star = 0.5 - v / (2.0 * u);
            let r_star = 2.0 * sigma.sqrt() * alpha * u.sqrt() / f_alpha;
            assert!(
                (est.radius - r_star).abs() < 1e-6 * r_star,
                "alpha={alpha}: {} vs {r_star}",
                est.radius
            );
            assert!((est.rho_opt - rho_star).abs() < 1e-3);
        }
    }

    #[test]
    fn exact_bubble_needs_no_more_room_than_the_energy_bound() {
        let c = wmel();
        let sigma = 2.0;
        let m = min_bubble_radius(&c, sigma).unwrap();
        let mut best = f64::INFINITY;
        for i in 1..40 {
            let alpha = c.theta_c() + (1.0 - c.theta_c()) * i as f64 / 40.0;
            if let Ok(est) = energy_radius(&c, alpha, sigma, 1) {
                best = best.min(est.radius);
            }
        }
        assert!(m.radius <= best * (1.0 + 1e-9), "{} vs {best}", m.radius);
    }

    #[test]
    fn average_antiderivative_derivative_identity() {
        // d/dalpha [(1/alpha) int_0^alpha F] = U / alpha
        let c = wmel();
        let alpha = 0.6;
        let h = 1e-5;
        let v_at = |a: f64| quad::integrate(|x| c.big_f_raw(x), 0.0, a, 1e-12) / a;
        let dv = (v_at(alpha + h) - v_at(alpha - h)) / (2.0 * h);
        let u = c.big_f(alpha).unwrap() - v_at(alpha);
        assert!((dv - u / alpha).abs() < 1e-6);
    }

    #[test]
    fn uniqueness_conditions_hold_for_the_field_parameters() {
        let c = wmel();
        let rep = check_uniqueness(&c, 4096).unwrap();
        assert!(rep.b0 && rep.b1 && rep.b2 && rep.b3);
        assert!(rep.alpha_1 > c.theta() && rep.alpha_1 < 1.0);
        assert!(rep.h_monotone);
        assert!((rep.h_at_alpha_0 + 2.0).abs() < 1e-4);
        assert!((rep.alpha_0_direct - rep.alpha_0_balance).abs() < 1e-5);
    }

    #[test]
    fn uniqueness_conditions_hold_for_the_cubic() {
        let c = ReactionCurve::cubic(0.3, 1.0).unwrap();
        let rep = check_uniqueness(&c, 4096).unwrap();
        assert!(rep.b0 && rep.b1 && rep.b2 && rep.b3);
        assert!(rep.h_monotone);
        assert!((rep.alpha_0_direct - rep.alpha_0_balance).abs() < 1e-5);
    }
}
