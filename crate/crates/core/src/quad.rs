//! Numerical quadrature and root finding used throughout the crate.
//!
//! The double-exponential (tanh-sinh) rule is the workhorse: it converges
//! geometrically for analytic integrands and tolerates integrable endpoint
//! singularities, which is exactly the situation for the lattice densities.

use std::f64::consts::FRAC_PI_2;

use crate::error::{LabError, Result};

/// Result of a quadrature call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error: f64,
    pub evaluations: usize,
}

const MAX_LEVEL: usize = 12;
const T_MAX: f64 = 6.5;

/// Tanh-sinh quadrature of `f` over `[a, b]`.
///
/// The closure receives `(x, x - a, b - x)`; the two offsets are computed
/// without cancellation so integrands with endpoint singularities can be
/// evaluated accurately right up to the boundary.
pub fn tanh_sinh_with_offsets<F>(f: F, a: f64, b: f64, tol: f64) -> Quadrature
where
    F: Fn(f64, f64, f64) -> f64,
{
    if a == b {
        return Quadrature { value: 0.0, error: 0.0, evaluations: 0 };
    }
    let half = 0.5 * (b - a);
    let mut evals = 0usize;

    // Node at parameter u: returns weight * f contribution (already scaled by half).
    let term = |u: f64, evals: &mut usize| -> f64 {
        let s = FRAC_PI_2 * u.sinh();
        let c = FRAC_PI_2 * u.cosh();
        let e = (-2.0 * s.abs()).exp();
        // 1 - tanh|s| = 2e/(1+e)
        let comp = 2.0 * e / (1.0 + e);
        let cosh_s = s.cosh();
        let w = c / (cosh_s * cosh_s);
        if w == 0.0 || comp == 0.0 || !w.is_finite() {
            return 0.0;
        }
        let (from_a, from_b) = if s >= 0.0 {
            ((2.0 - comp) * half, comp * half)
        } else {
            (comp * half, (2.0 - comp) * half)
        };
        if from_a <= 0.0 || from_b <= 0.0 {
            return 0.0;
        }
        let x = if s >= 0.0 { b - from_b } else { a + from_a };
        *evals += 1;
        let fx = f(x, from_a, from_b);
        if fx.is_finite() { w * fx * half } else { 0.0 }
    };

    let mut h = 1.0;
    let mut sum = term(0.0, &mut evals);
    let mut k = 1;
    while (k as f64) * h <= T_MAX {
        let u = k as f64 * h;
        sum += term(u, &mut evals) + term(-u, &mut evals);
        k += 1;
    }
    let mut estimate = sum * h;
    let mut error = f64::INFINITY;

    for _level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        let mut add = 0.0;
        while (k as f64) * h <= T_MAX {
            let u = k as f64 * h;
            add += term(u, &mut evals) + term(-u, &mut evals);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        error = (next - estimate).abs();
        estimate = next;
        if error <= tol.max(1e-15 * estimate.abs()) {
            break;
        }
    }
    Quadrature { value: estimate, error, evaluations: evals }
}

/// Tanh-sinh quadrature of a plain function of `x`.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tol: f64) -> Quadrature
where
    F: Fn(f64) -> f64,
{
    tanh_sinh_with_offsets(|x, _, _| f(x), a, b, tol)
}

/// Sum of tanh-sinh integrals over consecutive sub-intervals given by `breaks`.
pub fn tanh_sinh_split<F>(f: F, breaks: &[f64], tol: f64) -> Quadrature
where
    F: Fn(f64) -> f64,
{
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    let mut total = Quadrature { value: 0.0, error: 0.0, evaluations: 0 };
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let q = tanh_sinh(&f, w[0], w[1], tol / pieces);
        total.value += q.value;
        total.error += q.error;
        total.evaluations += q.evaluations;
    }
    total
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Composite trapezoid rule on tabulated, possibly non-uniform, abscissae.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Bisection for a root of a monotone (or merely sign-changing) function.
///
/// Stops when the bracket is narrower than `tol`; returns the midpoint.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(LabError::RootBracket { lo, hi });
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_polynomial_and_singular() {
        let q = tanh_sinh(|x| x * x, 0.0, 3.0, 1e-13);
        assert!((q.value - 9.0).abs() < 1e-12, "{q:?}");
        // inverse square-root singularities at both ends: integral of 1/sqrt(1-x^2) = pi
        let q = tanh_sinh_with_offsets(
            |_, da, db| 1.0 / (da * db).sqrt(),
            -1.0,
            1.0,
            1e-13,
        );
        assert!((q.value - std::f64::consts::PI).abs() < 1e-11, "{q:?}");
        // log singularity
        let q = tanh_sinh(|x: f64| -x.ln(), 0.0, 1.0, 1e-13);
        assert!((q.value - 1.0).abs() < 1e-11, "{q:?}");
    }

    #[test]
    fn simpson_and_trapezoid() {
        let v = adaptive_simpson(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        assert!((trapezoid(&xs, &ys) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bisect_finds_root_and_reports_bad_bracket() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(matches!(bisect(|x| x * x + 1.0, 0.0, 1.0, 1e-9), Err(LabError::RootBracket { .. })));
    }
}
