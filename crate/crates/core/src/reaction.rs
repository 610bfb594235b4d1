//! The bistable reaction term f and its antiderivative F.
//!
//! The infection frequency obeys dp/dt = f(p) with f a rational function of
//! cytoplasmic-incompatibility and fitness parameters. f vanishes at 0, at an
//! unstable threshold theta, and at a stable upper state theta_plus, is
//! negative on (0, theta) and positive on (theta, theta_plus). The balance
//! point theta_c in (theta, theta_plus) is where F(p) = int_0^p f crosses
//! zero; it separates frequencies that can seed an invasion from those that
//! cannot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{optim, quad};

/// Demographic and incompatibility parameters of the two-population
/// mosquito model, reduced to the single-frequency equation.
///
/// * `d_s` ratio of uninfected death rate to birth rate,
/// * `s_f` fecundity cost of infection,
/// * `s_h` incompatible-cross hatching failure,
/// * `delta` infected/uninfected death-rate ratio,
/// * `mu` maternal transmission failure,
/// * `sigma` diffusivity, m^2/day.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReactionParams {
    pub d_s: f64,
    pub s_f: f64,
    pub s_h: f64,
    pub delta: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl Default for ReactionParams {
    /// wMel field estimates (Rio de Janeiro releases).
    fn default() -> Self {
        ReactionParams {
            d_s: 0.27,
            s_f: 0.1,
            s_h: 0.8,
            delta: 10.0 / 9.0,
            mu: 0.0,
            sigma: 830.0,
        }
    }
}

const F_TABLE_INTERVALS: usize = 2048;
/// Width below which F differences switch to direct quadrature of f.
const NARROW_DIFF: f64 = 1e-2;
const DOMAIN_SLACK: f64 = 1e-9;

/// Cubic Hermite table of F on [0, theta_plus]; slopes are exact (f itself),
/// so the interpolant differentiates back to f to interpolation accuracy.
#[derive(Clone)]
struct FTable {
    dx: f64,
    vals: Vec<f64>,
    slopes: Vec<f64>,
}

impl FTable {
    fn eval(&self, p: f64) -> f64 {
        let n = self.vals.len();
        let s = p / self.dx;
        let i = (s.floor() as isize).clamp(0, n as isize - 2) as usize;
        let t = s - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.vals[i]
            + h01 * self.vals[i + 1]
            + self.dx * (h10 * self.slopes[i] + h11 * self.slopes[i + 1])
    }
}

/// A validated bistable reaction curve: f = N/Q with N cubic, Q quadratic
/// and strictly positive on [0, theta_plus].
#[derive(Clone)]
pub struct ReactionCurve {
    params: Option<ReactionParams>,
    num: [f64; 4],
    den: [f64; 3],
    theta: f64,
    theta_plus: f64,
    theta_c: f64,
    f_upper: f64,
    max_abs_f_prime: f64,
    table: FTable,
}

impl std::fmt::Debug for ReactionCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReactionCurve")
            .field("theta", &self.theta)
            .field("theta_c", &self.theta_c)
            .field("theta_plus", &self.theta_plus)
            .finish()
    }
}


fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

impl ReactionCurve {
    /// Builds the curve for the mosquito model, validating bistability.
    pub fn new(params: ReactionParams) -> Result<Self> {
        build_reaction(&params)
    }

    /// Synthetic cubic f(p) = amplitude * p (p - theta)(1 - p), used to
    /// exercise the machinery on a curve with closed-form answers.
    pub fn cubic(theta: f64, amplitude: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 0.5) || !(amplitude > 0.0) {
            return Err(Error::DomainError(format!(
                "cubic needs 0 < theta < 1/2 and amplitude > 0, got theta={theta}, amplitude={amplitude}"
            )));
        }
        let num = [
            0.0,
            -amplitude * theta,
            amplitude * (1.0 + theta),
            -amplitude,
        ];
        finish_build(num, [1.0, 0.0, 0.0], theta, 1.0, None)
    }

    pub fn params(&self) -> Option<&ReactionParams> {
        self.params.as_ref()
    }

    /// Diffusivity carried by the parameter set, if any.
    pub fn default_sigma(&self) -> Option<f64> {
        self.params.map(|p| p.sigma)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_plus(&self) -> f64 {
        self.theta_plus
    }

    pub fn theta_c(&self) -> f64 {
        self.theta_c
    }

    /// F(theta_plus) > 0, the depth of the stable-state energy well.
    pub fn f_at_upper(&self) -> f64 {
        self.f_upper
    }

    /// max |f'| over [0, theta_plus]; reciprocal bounds the stable time step.
    pub fn max_abs_f_prime(&self) -> f64 {
        self.max_abs_f_prime
    }

    fn check_domain(&self, p: f64) -> Result<f64> {
        if !(0.0 - DOMAIN_SLACK..=self.theta_plus + DOMAIN_SLACK).contains(&p) {
            return Err(Error::DomainError(format!(
                "p = {p} outside [0, {}]",
                self.theta_plus
            )));
        }
        Ok(p.clamp(0.0, self.theta_plus))
    }

    pub fn f(&self, p: f64) -> Result<f64> {
        Ok(self.f_raw(self.check_domain(p)?))
    }

    pub fn f_prime(&self, p: f64) -> Result<f64> {
        Ok(self.f_prime_raw(self.check_domain(p)?))
    }

    pub fn f_second(&self, p: f64) -> Result<f64> {
        Ok(self.f_second_raw(self.check_domain(p)?))
    }

    /// F(p) = int_0^p f, from the Hermite table.
    pub fn big_f(&self, p: f64) -> Result<f64> {
        Ok(self.big_f_raw(self.check_domain(p)?))
    }

    pub(crate) fn f_raw(&self, p: f64) -> f64 {
        poly(&self.num, p) / poly(&self.den, p)
    }

    pub(crate) fn f_prime_raw(&self, p: f64) -> f64 {
        let n = poly(&self.num, p);
        let q = poly(&self.den, p);
        let dn = dpoly3(&self.num, p);
        let dq = self.den[1] + 2.0 * self.den[2] * p;
        (dn * q - n * dq) / (q * q)
    }

    pub(crate) fn f_second_raw(&self, p: f64) -> f64 {
        let n = poly(&self.num, p);
        let q = poly(&self.den, p);
        let dn = dpoly3(&self.num, p);
        let dq = self.den[1] + 2.0 * self.den[2] * p;
        let d2n = 2.0 * self.num[2] + 6.0 * self.num[3] * p;
        let d2q = 2.0 * self.den[2];
        (d2n * q - n * d2q) / (q * q) - 2.0 * dq * (dn * q - n * dq) / (q * q * q)
    }

    pub(crate) fn big_f_raw(&self, p: f64) -> f64 {
        self.table.eval(p)
    }

    /// F(hi) - F(lo) without cancellation: narrow gaps integrate f directly.
    pub(crate) fn big_f_diff(&self, hi: f64, lo: f64) -> f64 {
        self.big_f_drop(hi, hi - lo)
    }

    /// F(hi) - F(hi - drop) with the gap passed explicitly, so callers whose
    /// gap is known analytically (for example t^2 in desingularized
    /// quadratures) keep full precision even when hi - drop rounds to hi.
    pub(crate) fn big_f_drop(&self, hi: f64, drop: f64) -> f64 {
        if drop <= 1e-12 {
            // midpoint rule, relative error O(drop^2)
            return self.f_raw(hi - 0.5 * drop) * drop;
        }
        if drop < NARROW_DIFF {
            quad::fixed(&|v| self.f_raw(v), hi - drop, hi, quad::gl8())
        } else {
            self.table.eval(hi) - self.table.eval(hi - drop)
        }
    }
}

fn dpoly3(c: &[f64; 4], x: f64) -> f64 {
    c[1] + 2.0 * c[2] * x + 3.0 * c[3] * x * x
}

/// Builds and validates the reaction curve for a parameter set.
pub fn build_reaction(params: &ReactionParams) -> Result<ReactionCurve> {
    let p = *params;
    for (name, v) in [
        ("d_s", p.d_s),
        ("s_f", p.s_f),
        ("s_h", p.s_h),
        ("delta", p.delta),
        ("mu", p.mu),
        ("sigma", p.sigma),
    ] {
        if !v.is_finite() {
            return Err(Error::DomainError(format!("{name} is not finite")));
        }
    }
    if p.d_s <= 0.0 || p.delta <= 0.0 || p.sigma <= 0.0 {
        return Err(Error::DomainError(
            "d_s, delta and sigma must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&p.s_f) || !(0.0..=1.0).contains(&p.s_h) || p.s_h == 0.0 {
        return Err(Error::DomainError(
            "need s_f in [0,1) and s_h in (0,1]".into(),
        ));
    }
    if !(0.0..1.0).contains(&p.mu) {
        return Err(Error::DomainError("need mu in [0,1)".into()));
    }

    // f(p) = delta d_s p P(p) / Q(p),
    // P(p) = -s_h p^2 + (1 + s_h - a1) p + c0,
    // Q(p) = s_h p^2 - (s_f + s_h) p + 1.
    let a1 = (1.0 - p.s_f) * ((1.0 - p.mu) / p.delta + p.mu);
    let c0 = (1.0 - p.s_f) * (1.0 - p.mu) / p.delta - 1.0;
    let b = 1.0 + p.s_h - a1;
    let scale = p.delta * p.d_s;
    let num = [0.0, scale * c0, scale * b, -scale * p.s_h];
    let den = [1.0, -(p.s_f + p.s_h), p.s_h];

    if c0 >= 0.0 {
        return Err(Error::NotBistable(
            "f is nonnegative near 0: low frequencies do not die out".into(),
        ));
    }
    let disc = b * b + 4.0 * p.s_h * c0;
    if disc <= 0.0 {
        return Err(Error::NotBistable(
            "no interior equilibria: incompatibility too weak for the fitness cost".into(),
        ));
    }
    let quad_theta = (b - disc.sqrt()) / (2.0 * p.s_h);
    let quad_upper = (b + disc.sqrt()) / (2.0 * p.s_h);
    if !(quad_theta > 0.0 && quad_upper <= 1.0 + 1e-9) {
        return Err(Error::NotBistable(format!(
            "equilibria {quad_theta}, {quad_upper} not inside (0, 1]"
        )));
    }

    // Polish the quadratic-formula estimates by bisection on P; the upper
    // root is pinned to 1 exactly when transmission is perfect (mu = 0).
    let pquad = |x: f64| poly(&[c0, b, -p.s_h], x);
    let theta = polish_root(&pquad, quad_theta)?;
    let theta_plus = if p.mu == 0.0 {
        1.0
    } else {
        polish_root(&pquad, quad_upper)?
    };

    finish_build(num, den, theta, theta_plus, Some(p))
}

fn polish_root<F: Fn(f64) -> f64>(f: &F, approx: f64) -> Result<f64> {
    let w = (1e-3 * approx.abs()).max(1e-9);
    optim::bisect(f, approx - w, approx + w, 1e-13)
}

fn finish_build(
    num: [f64; 4],
    den: [f64; 3],
    theta: f64,
    theta_plus: f64,
    params: Option<ReactionParams>,
) -> Result<ReactionCurve> {
    // Q must be positive on the whole invariant interval.
    let qmin = {
        let q0 = poly(&den, 0.0);
        let q1 = poly(&den, theta_plus);
        let mut m = q0.min(q1);
        if den[2] > 0.0 {
            let vertex = -den[1] / (2.0 * den[2]);
            if (0.0..=theta_plus).contains(&vertex) {
                m = m.min(poly(&den, vertex));
            }
        }
        m
    };
    if qmin <= 0.0 {
        return Err(Error::SingularDenominator);
    }

    let f_raw = |p: f64| poly(&num, p) / poly(&den, p);

    // Sign pattern: strictly negative on (0, theta), positive on
    // (theta, theta_plus), sampled away from the roots.
    for i in 0..512 {
        let t = (i as f64 + 0.5) / 512.0;
        if f_raw(theta * t) >= 0.0 {
            return Err(Error::NotBistable(format!(
                "f >= 0 at p = {} inside (0, theta)",
                theta * t
            )));
        }
        if f_raw(theta + (theta_plus - theta) * t) <= 0.0 {
            return Err(Error::NotBistable(format!(
                "f <= 0 at p = {} inside (theta, theta_plus)",
                theta + (theta_plus - theta) * t
            )));
        }
    }

    // Cumulative quadrature of f onto the Hermite table.
    let n = F_TABLE_INTERVALS;
    let dx = theta_plus / n as f64;
    let mut vals = vec![0.0; n + 1];
    let mut slopes = vec![0.0; n + 1];
    slopes[0] = f_raw(0.0);
    for i in 0..n {
        let x0 = i as f64 * dx;
        let x1 = (i + 1) as f64 * dx;
        vals[i + 1] = vals[i] + quad::integrate(f_raw, x0, x1, 1e-13);
        slopes[i + 1] = f_raw(x1);
    }
    let f_upper = vals[n];
    if f_upper <= 0.0 {
        return Err(Error::NotBistable(
            "F(theta_plus) <= 0: the infected state is not energetically favored".into(),
        ));
    }
    let table = FTable { dx, vals, slopes };

    // Unique zero of F in (theta, theta_plus): F(theta) < 0 < F(theta_plus)
    // and F is monotone on each side of theta.
    let eps = 1e-9 * (theta_plus - theta);
    let theta_c = optim::bisect(
        |x| table.eval(x),
        theta + eps,
        theta_plus - eps,
        1e-12,
    )
    .map_err(|_| Error::NotBistable("F has no zero between theta and theta_plus".into()))?;

    // max |f'| over [0, theta_plus], grid scan plus local refinement.
    let fp = |p: f64| {
        let n_v = poly(&num, p);
        let q = poly(&den, p);
        let dn = dpoly3(&num, p);
        let dq = den[1] + 2.0 * den[2] * p;
        (dn * q - n_v * dq) / (q * q)
    };
    let scan = optim::grid_min(&|p: f64| -fp(p).abs(), 0.0, theta_plus, 4096);
    let (_, neg_max) = optim::golden_min(
        |p: f64| -fp(p).abs(),
        scan.bracket.0,
        scan.bracket.1,
        1e-10,
    );
    let max_abs_f_prime = -neg_max;

    Ok(ReactionCurve {
        params,
        num,
        den,
        theta,
        theta_plus,
        theta_c,
        f_upper,
        max_abs_f_prime,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wmel() -> ReactionCurve {
        ReactionCurve::new(ReactionParams::default()).unwrap()
    }

    #[test]
    fn threshold_matches_quadratic_formula() {
        let c = wmel();
        // numerator quadratic for the defaults: -0.8 p^2 + 0.99 p - 0.19
        let disc: f64 = 0.99 * 0.99 - 4.0 * 0.8 * 0.19;
        let theta = (0.99 - disc.sqrt()) / 1.6;
        assert!((c.theta() - theta).abs() < 1e-12, "theta = {}", c.theta());
        assert_eq!(c.theta_plus(), 1.0);
    }

    #[test]
    fn slope_at_zero_is_exact() {
        let c = wmel();
        // f'(0) = d_s (1 - s_f) - delta d_s
        let expect = 0.27 * 0.9 - (10.0 / 9.0) * 0.27;
        assert!((c.f_prime(0.0).unwrap() - expect).abs() < 1e-14);
        assert!(expect < 0.0);
    }

    #[test]
    fn balance_point_for_field_parameters() {
        let c = wmel();
        assert!(
            (c.theta_c() - 0.36).abs() < 0.01,
            "theta_c = {}",
            c.theta_c()
        );
        assert!(c.theta() < c.theta_c() && c.theta_c() < c.theta_plus());
        assert!(c.big_f(c.theta_c()).unwrap().abs() < 1e-11);
    }

    #[test]
    fn f_vanishes_at_equilibria() {
        let c = wmel();
        assert_eq!(c.f(0.0).unwrap(), 0.0);
        assert!(c.f(c.theta()).unwrap().abs() < 1e-13);
        assert!(c.f(1.0).unwrap().abs() < 1e-13);
    }

    #[test]
    fn sign_pattern_is_bistable() {
        let c = wmel();
        for i in 1..100 {
            let p = c.theta() * i as f64 / 100.0;
            assert!(c.f(p).unwrap() < 0.0, "f({p}) >= 0");
        }
        for i in 1..100 {
            let p = c.theta() + (1.0 - c.theta()) * i as f64 / 100.0;
            if p < 1.0 - 1e-9 {
                assert!(c.f(p).unwrap() > 0.0, "f({p}) <= 0");
            }
        }
    }

    #[test]
    fn antiderivative_differentiates_back_to_f() {
        let c = wmel();
        let h = 1e-6;
        for i in 1..40 {
            let p = 0.97 * i as f64 / 40.0 + 0.01;
            let d = (c.big_f(p + h).unwrap() - c.big_f(p - h).unwrap()) / (2.0 * h);
            let f = c.f(p).unwrap();
            assert!((d - f).abs() < 1e-8 * (1.0 + f.abs()), "p={p} d={d} f={f}");
        }
    }

    #[test]
    fn narrow_differences_avoid_cancellation() {
        let c = wmel();
        let a = 0.7;
        for &gap in &[1e-3, 1e-6, 1e-9] {
            let d = c.big_f_diff(a, a - gap);
            // compare against the midpoint-slope expansion
            let expect = c.f(a - 0.5 * gap).unwrap() * gap;
            assert!(
                (d - expect).abs() < 1e-6 * expect.abs(),
                "gap={gap} d={d} expect={expect}"
            );
        }
    }

    #[test]
    fn stable_state_is_energetically_favored() {
        let c = wmel();
        assert!(c.f_at_upper() > 0.0);
        assert!(c.big_f(c.theta()).unwrap() < 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = wmel();
        let h = 1e-5;
        for i in 1..20 {
            let p = 0.9 * i as f64 / 20.0 + 0.02;
            let d1 = (c.f(p + h).unwrap() - c.f(p - h).unwrap()) / (2.0 * h);
            assert!((d1 - c.f_prime(p).unwrap()).abs() < 1e-7);
            let d2 =
                (c.f(p + h).unwrap() - 2.0 * c.f(p).unwrap() + c.f(p - h).unwrap()) / (h * h);
            assert!((d2 - c.f_second(p).unwrap()).abs() < 1e-4);
        }
    }

    #[test]
    fn domain_is_enforced() {
        let c = wmel();
        assert!(matches!(c.f(-0.1), Err(Error::DomainError(_))));
        assert!(matches!(c.f(1.2), Err(Error::DomainError(_))));
        assert!(matches!(c.big_f(1.2), Err(Error::DomainError(_))));
    }

    #[test]
    fn imperfect_transmission_lowers_the_stable_state() {
        let c = ReactionCurve::new(ReactionParams {
            mu: 0.05,
            ..ReactionParams::default()
        })
        .unwrap();
        assert!(c.theta_plus() < 1.0);
        assert!(c.theta() < c.theta_c() && c.theta_c() < c.theta_plus());
        assert!(c.f(c.theta_plus()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn heavy_transmission_failure_destroys_bistability() {
        let err = ReactionCurve::new(ReactionParams {
            mu: 0.5,
            ..ReactionParams::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::NotBistable(_)));
    }

    #[test]
    fn cheap_infection_is_not_bistable() {
        // no fitness cost and delta < 1 makes f positive near 0
        let err = ReactionCurve::new(ReactionParams {
            s_f: 0.0,
            delta: 0.9,
            ..ReactionParams::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::NotBistable(_)));
    }

    #[test]
    fn cubic_balance_point_matches_closed_form() {
        let theta = 0.3;
        let c = ReactionCurve::cubic(theta, 1.0).unwrap();
        // F(p) = -p^4/4 + (1+theta) p^3/3 - theta p^2/2 has its positive root
        // where 3 p^2 - 4(1+theta) p + 6 theta = 0 (smaller branch).
        let disc = (4.0f64 * (1.0 + theta)).powi(2) - 72.0 * theta;
        let root = (4.0 * (1.0 + theta) - disc.sqrt()) / 6.0;
        assert!((root - 0.477_936_540_343_646).abs() < 1e-12);
        assert!((c.theta_c() - root).abs() < 1e-9, "theta_c={}", c.theta_c());
        assert_eq!(c.theta(), theta);
    }

    #[test]
    fn cubic_antiderivative_matches_closed_form() {
        let theta = 0.3;
        let c = ReactionCurve::cubic(theta, 1.0).unwrap();
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let exact = -p.powi(4) / 4.0 + (1.0 + theta) * p.powi(3) / 3.0 - theta * p * p / 2.0;
            assert!((c.big_f(p).unwrap() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn slope_bound_covers_the_grid() {
        let c = wmel();
        let m = c.max_abs_f_prime();
        for i in 0..=1000 {
            let p = i as f64 / 1000.0;
            assert!(c.f_prime(p).unwrap().abs() <= m * (1.0 + 1e-9));
        }
    }
}
