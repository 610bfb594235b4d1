//! Bracketed root finding and one-dimensional minimization.

use crate::error::{Error, Result};

/// Bisection root of f on [a, b]; requires a sign change on the bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let flo = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::RootBracketingFailed(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    let neg_lo = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Brackets where f changes sign among n+1 uniform nodes on [a, b].
pub fn sign_change_brackets<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut x0 = a;
    let mut f0 = f(a);
    for i in 1..=n {
        let x1 = a + (b - a) * (i as f64) / (n as f64);
        let f1 = f(x1);
        if f0 == 0.0 || f0.signum() != f1.signum() {
            out.push((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

/// Golden-section minimizer on [a, b]; returns (argmin, min).
/// Exact only for unimodal f; callers bracket with a grid scan first.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - INVPHI * (hi - lo);
    let mut d = lo + INVPHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if hi - lo <= xtol {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INVPHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INVPHI * (hi - lo);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

pub struct GridMin {
    pub x: f64,
    pub value: f64,
    pub bracket: (f64, f64),
    /// Interior local minima seen by the scan; > 1 flags non-unimodality.
    pub local_minima: usize,
}

/// Scan n+1 uniform nodes for the global minimum and a refinement bracket.
pub fn grid_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> GridMin {
    assert!(n >= 2);
    let xs: Vec<f64> = (0..=n)
        .map(|i| a + (b - a) * (i as f64) / (n as f64))
        .collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = 0;
    for i in 1..=n {
        if vs[i] < vs[best] {
            best = i;
        }
    }
    let mut local = 0;
    for i in 1..n {
        if vs[i] < vs[i - 1] && vs[i] <= vs[i + 1] {
            local += 1;
        }
    }
    let lo = if best == 0 { 0 } else { best - 1 };
    let hi = if best == n { n } else { best + 1 };
    GridMin {
        x: xs[best],
        value: vs[best],
        bracket: (xs[lo], xs[hi]),
        local_minima: local,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-11);
    }

    #[test]
    fn bisect_rejects_missing_bracket() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        // flat-bottom limit: argmin accuracy saturates near sqrt(eps)
        let (x, v) = golden_min(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grid_scan_counts_local_minima() {
        let scan = grid_min(&|x: f64| (4.0 * x).cos(), 0.0, 3.0, 300);
        assert!(scan.local_minima >= 2);
        assert!(scan.value < -0.999);
    }

    #[test]
    fn sign_scan_sees_both_roots() {
        // 50 intervals keep the roots off the scan nodes
        let br = sign_change_brackets(&|x: f64| x * x - 1.0, -2.0, 2.0, 50);
        assert_eq!(br.len(), 2);
        assert!(br[0].0 < -1.0 && -1.0 < br[0].1);
        assert!(br[1].0 < 1.0 && 1.0 < br[1].1);
    }
}
