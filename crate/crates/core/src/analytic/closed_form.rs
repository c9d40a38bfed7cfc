//! Threshold equations written out for specific ensembles. They are solved
//! directly and serve as independent checks on the generic solvers.

use crate::error::{Error, Result};
use crate::link::{scp2_from_p, Mode};
use crate::real::Real;
use crate::roots::bisect_predicate;

const SCAN_POINTS: usize = 1_000;

/// Smallest `p` in `(0, 1]` with `h(p) >= 0`, given `h(0) < 0`.
fn first_crossing<T: Real, F: Fn(T) -> T>(h: F, what: &str) -> Result<T> {
    let n = T::from_usize_lossy(SCAN_POINTS);
    let mut lo = T::zero();
    for i in 1..=SCAN_POINTS {
        let x = T::from_usize_lossy(i) / n;
        if h(x) >= T::zero() {
            return bisect_predicate(|p| Ok(h(p) >= T::zero()), lo, x, T::epsilon());
        }
        lo = x;
    }
    Err(Error::NeverPercolates(format!(
        "{what}: no crossing in (0, 1]"
    )))
}

/// `p` such that `p2(p) = target`, by the quadratic formula.
fn invert_p2<T: Real>(target: T, mode: Mode) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    match mode {
        Mode::Sequential => one - (one - target).max(T::zero()).sqrt(),
        Mode::Distilled => two - (two * two - two * target).sqrt(),
    }
}

/// Bethe lattice of degree `q`: `(p_c, p_c after q-swap)`.
///
/// The untransformed threshold solves `p2 = 1/(q-1)`; the transformed one is
/// the smallest root of `(q-1)^-1 = (1-p)^-1 {2p + p^q [p(q-1) - (q+1)]}`,
/// which is independent of the conversion mode. For `q = 2` the latter
/// reduces to `(p-1)^3 = 0`.
pub fn bethe_thresholds<T: Real>(q: usize, mode: Mode) -> Result<(T, T)> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!(
            "Bethe lattice needs q >= 2, got {q}"
        )));
    }
    let qf = T::from_usize_lossy(q);
    let one = T::one();
    let target = one / (qf - one);
    let pc = invert_p2(target, mode);
    // Multiplied through by (1 - p); p = 1 is always a root.
    let h = |p: T| T::lit(2.0) * p + p.powu(q) * (p * (qf - one) - (qf + one)) - (one - p) * target;
    let swapped = if q == 2 {
        one
    } else {
        first_crossing(h, "Bethe q-swap threshold")?
    };
    Ok((pc, swapped))
}

/// Erdős–Rényi graph of mean degree `z` after 2-swaps:
/// smallest `p` with `1/z = p2 + e^-z [-p2 + z(2p - p^2)]`.
pub fn er_two_swap_threshold<T: Real>(z: T, mode: Mode) -> Result<T> {
    check_z(z)?;
    let ez = (-z).exp();
    let h = |p: T| {
        let p2 = scp2_from_p(p, mode);
        p2 + ez * (-p2 + z * (T::lit(2.0) * p - p * p)) - T::one() / z
    };
    first_crossing(h, "ER 2-swap threshold")
}

/// Erdős–Rényi graph of mean degree `z` after 3-swaps:
/// smallest `p` with `1/z = p2 + z e^-z [-p2 + z p (1 + p - p^2)]`.
pub fn er_three_swap_threshold<T: Real>(z: T, mode: Mode) -> Result<T> {
    check_z(z)?;
    let zez = z * (-z).exp();
    let h = |p: T| {
        let p2 = scp2_from_p(p, mode);
        p2 + zez * (-p2 + z * p * (T::one() + p - p * p)) - T::one() / z
    };
    first_crossing(h, "ER 3-swap threshold")
}

fn check_z<T: Real>(z: T) -> Result<()> {
    if !(z.is_finite() && z > T::zero()) {
        return Err(Error::Domain(format!(
            "mean degree must be positive, got {z}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bethe_q3() {
        let (pc, ps) = bethe_thresholds::<f64>(3, Mode::Distilled).unwrap();
        assert_abs_diff_eq!(pc, 2.0 - 3.0_f64.sqrt(), epsilon = 1e-14);
        let poly = 2.0 * ps.powi(4) - 4.0 * ps.powi(3) + 2.5 * ps - 0.5;
        assert!(poly.abs() < 1e-14);
        assert_abs_diff_eq!(ps, 0.2140, epsilon = 1e-4);
        assert!(ps < pc);
    }

    #[test]
    fn bethe_chain_has_no_improvement() {
        for mode in [Mode::Sequential, Mode::Distilled] {
            let (pc, ps) = bethe_thresholds::<f64>(2, mode).unwrap();
            assert_eq!(ps, 1.0);
            assert!(ps >= pc);
        }
    }

    #[test]
    fn bethe_swap_always_helps_for_q_above_two() {
        for q in 3..=12 {
            for mode in [Mode::Sequential, Mode::Distilled] {
                let (pc, ps) = bethe_thresholds::<f64>(q, mode).unwrap();
                assert!(ps < pc, "q={q}");
            }
        }
    }

    #[test]
    fn er_two_swap_quadratic() {
        // Distilled at z = 2.5: 0.4 = (1 - e^-z)(2p - p^2/2) + e^-z z (2p - p^2)
        let z = 2.5_f64;
        let ez = (-z).exp();
        let a = -(1.0 - ez) / 2.0 - ez * z;
        let b = 2.0 * (1.0 - ez) + 2.0 * ez * z;
        let c = -1.0 / z;
        let root = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        let t = er_two_swap_threshold(z, Mode::Distilled).unwrap();
        assert_abs_diff_eq!(t, root, epsilon = 1e-13);
        assert_abs_diff_eq!(t, 0.18859, epsilon = 1e-5);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(bethe_thresholds::<f64>(1, Mode::Distilled).is_err());
        assert!(er_two_swap_threshold(0.0_f64, Mode::Distilled).is_err());
        assert!(matches!(
            er_two_swap_threshold(0.5_f64, Mode::Distilled),
            Err(Error::NeverPercolates(_))
        ));
    }
}
