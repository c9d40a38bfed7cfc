//! Scalar root finding used by the analytic solvers.

use crate::error::{Error, Result};
use crate::real::Real;

/// Bisection step cap.
pub const MAX_BISECTION_STEPS: usize = 200;

/// Fixed-point iteration cap.
pub const MAX_ITERATIONS: usize = 100_000;

/// Plain iterations before the fixed-point solver switches to bracketing.
const STALL_ITERATIONS: usize = 2_000;

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them be zero).
/// Stops when the bracket is narrower than `tol` or cannot shrink further.
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, mut lo: T, mut hi: T, tol: T) -> Result<T> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Domain(format!(
            "bisection bracket [{lo}, {hi}] has no sign change"
        )));
    }
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = (lo + hi) / two;
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        what: "bisection",
        iterations: MAX_BISECTION_STEPS,
        residual: (hi - lo).as_f64(),
    })
}

/// Bisection on a monotone predicate: the smallest `x` in `(lo, hi]` with
/// `pred(x)` true, given `pred(lo)` false and `pred(hi)` true.
pub fn bisect_predicate<T: Real, F>(mut pred: F, mut lo: T, mut hi: T, tol: T) -> Result<T>
where
    F: FnMut(T) -> Result<bool>,
{
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = (lo + hi) / two;
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(hi);
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NoConvergence {
        what: "threshold bisection",
        iterations: MAX_BISECTION_STEPS,
        residual: (hi - lo).as_f64(),
    })
}

/// Smallest fixed point in `[0, 1]` of a map `F` that is increasing and
/// convex on `[0, 1]` with `F(1) = 1`.
///
/// Iterates from `u = 0`, which climbs monotonically to the smallest fixed
/// point. If that stalls (critical slowing down near the threshold), the
/// root of `F(u) - u` is bracketed between the last iterate and a point
/// `1 - 2^-k` where the residual is negative, and bisected. If no such point
/// exists, the smallest fixed point is `u = 1`.
///
/// Returns the fixed point and its residual `|F(u) - u|`.
pub fn smallest_fixed_point<T: Real, F: Fn(T) -> T>(map: F, tol: T) -> Result<(T, T)> {
    let (u, residual) = fixed_point_candidate(&map, tol)?;
    // A root not separated from 1 by a region of negative residual is u = 1
    // approached from below (subcritical or critical map).
    if u < T::one() && map((u + T::one()) / T::lit(2.0)) - (u + T::one()) / T::lit(2.0) >= T::zero()
    {
        return Ok((T::one(), T::zero()));
    }
    Ok((u, residual))
}

fn fixed_point_candidate<T: Real, F: Fn(T) -> T>(map: &F, tol: T) -> Result<(T, T)> {
    let mut u = T::zero();
    let mut iterations = 0;
    while iterations < STALL_ITERATIONS.min(MAX_ITERATIONS) {
        let next = map(u).clamp_unit();
        iterations += 1;
        if (next - u).abs() <= tol * T::lit(1e-3) {
            let residual = (map(next) - next).abs();
            if residual <= tol {
                return Ok((next, residual));
            }
        }
        // Below the smallest root the iterates increase; a decrease means rounding noise.
        if next < u {
            break;
        }
        u = next;
    }

    let g = |x: T| map(x) - x;
    let lo = u;
    if g(lo) <= T::zero() {
        let residual = g(lo).abs();
        if residual <= tol {
            return Ok((lo, residual));
        }
    }
    let two = T::lit(2.0);
    let mut gap = T::lit(0.5);
    let mut hi = None;
    while gap > T::epsilon() {
        let x = T::one() - gap;
        if x > lo && g(x) < T::zero() {
            hi = Some(x);
            break;
        }
        gap /= two;
    }
    let Some(hi) = hi else {
        return Ok((T::one(), T::zero()));
    };
    let root = bisect(g, lo, hi, T::epsilon())?;
    let residual = g(root).abs();
    if residual > tol {
        return Err(Error::NoConvergence {
            what: "fixed-point solver",
            iterations: iterations + MAX_BISECTION_STEPS,
            residual: residual.as_f64(),
        });
    }
    Ok((root, residual))
}
