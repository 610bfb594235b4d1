//! Fixed-order Gauss-Legendre rules and an adaptive bisection driver.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
pub struct GlRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre P_n(x) and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn build_rule(n: usize) -> GlRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..64 {
            let (p, d) = legendre(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    GlRule { nodes, weights }
}

pub fn gl8() -> &'static GlRule {
    static RULE: OnceLock<GlRule> = OnceLock::new();
    RULE.get_or_init(|| build_rule(8))
}

pub fn gl16() -> &'static GlRule {
    static RULE: OnceLock<GlRule> = OnceLock::new();
    RULE.get_or_init(|| build_rule(16))
}

/// One application of a fixed rule on [a, b].
pub fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &GlRule) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive Gauss-Legendre integral of f over [a, b].
///
/// The error budget is relative to the L1 size of the integrand (probed on
/// eight panels), so sign cancellation inside the integral does not force
/// runaway refinement. Integrable endpoint singularities are left to the
/// depth cap: refinement walks into the singular corner geometrically and
/// the truncated tail is what bounds the final accuracy.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    integrate_depth(f, a, b, rel_tol, 40)
}

pub fn integrate_depth<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: u32,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let rule = gl16();
    let mut panels = [0.0f64; 8];
    let mut scale = 0.0;
    for (i, panel) in panels.iter_mut().enumerate() {
        let x0 = a + (b - a) * (i as f64) / 8.0;
        let x1 = a + (b - a) * ((i + 1) as f64) / 8.0;
        *panel = fixed(&f, x0, x1, rule);
        scale += panel.abs();
    }
    let tol = (rel_tol * scale).max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    // Work budget: integrands whose evaluation noise sits above the
    // tolerance would otherwise refine forever; past the budget the current
    // refinement is accepted as best effort.
    let mut budget: u32 = 200_000;
    for (i, panel) in panels.iter().enumerate() {
        let x0 = a + (b - a) * (i as f64) / 8.0;
        let x1 = a + (b - a) * ((i + 1) as f64) / 8.0;
        total += adapt(&f, x0, x1, *panel, tol / 8.0, max_depth, rule, &mut budget);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    rule: &GlRule,
    budget: &mut u32,
) -> f64 {
    let m = 0.5 * (a + b);
    if m == a || m == b {
        return whole;
    }
    let left = fixed(f, a, m, rule);
    let right = fixed(f, m, b, rule);
    let refined = left + right;
    if (refined - whole).abs() <= tol || depth == 0 || *budget == 0 {
        return refined;
    }
    *budget -= 1;
    adapt(f, a, m, left, 0.5 * tol, depth - 1, rule, budget)
        + adapt(f, m, b, right, 0.5 * tol, depth - 1, rule, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl8_matches_tabulated_nodes() {
        let rule = gl8();
        // largest positive node/weight of the 8-point rule
        let node = rule.nodes.iter().cloned().fold(f64::MIN, f64::max);
        assert!((node - 0.960_289_856_497_536_2).abs() < 1e-14);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let v = integrate(|x| x * x, 0.0, 1.0, 1e-12);
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
        let v = integrate(|x| x.powi(7) - 2.0 * x, -1.0, 2.0, 1e-12);
        assert!((v - (256.0 - 1.0) / 8.0 + 3.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_sine_over_period() {
        let v = integrate(f64::sin, 0.0, PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn handles_integrable_endpoint_singularity() {
        let v = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10);
        assert!((v - 2.0).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn cancellation_does_not_destroy_accuracy() {
        // integral is ~1e-11 while the integrand has unit size
        let v = integrate(|x| x.sin(), -1.0, 1.0 + 1e-11, 1e-10);
        assert!(v.abs() < 1e-9);
    }
}
