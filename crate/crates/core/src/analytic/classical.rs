use crate::error::{Error, Result};
use crate::genfun::DegreeDistribution;
use crate::link::{scp2_from_p, Mode};
use crate::real::Real;
use crate::roots::{bisect_predicate, smallest_fixed_point};

use super::{PercSolution, FIXED_POINT_TOL};

fn check_p2<T: Real>(p2: T) -> Result<()> {
    if p2.is_nan() || p2 < T::zero() || p2 > T::one() {
        return Err(Error::Domain(format!("p2 must lie in [0, 1], got {p2}")));
    }
    Ok(())
}

/// Smallest solution of `u = 1 - p2 + p2 G1(u)`.
pub fn solve_u<T: Real>(dist: &DegreeDistribution<T>, p2: T) -> Result<T> {
    check_p2(p2)?;
    dist.require_edges()?;
    if p2 == T::zero() {
        return Ok(T::one());
    }
    let (u, _) = smallest_fixed_point(
        |u| T::one() - p2 + p2 * dist.g1_unchecked(u),
        T::tol(FIXED_POINT_TOL),
    )?;
    Ok(u)
}

/// Giant component and (below threshold) mean component size at edge
/// occupation `p2`.
pub fn giant_component<T: Real>(dist: &DegreeDistribution<T>, p2: T) -> Result<PercSolution<T>> {
    let u = solve_u(dist, p2)?;
    let s = if u >= T::one() {
        T::zero()
    } else {
        (T::one() - dist.g0(u)).clamp_unit()
    };
    let branching = p2 * dist.g1_prime_unchecked(T::one());
    let s_mean =
        (branching < T::one()).then(|| T::one() + dist.mean_degree() * p2 / (T::one() - branching));
    Ok(PercSolution { u, s, s_mean })
}

/// Single-copy probability at which the untransformed network starts to percolate.
///
/// The giant component appears when `p2 G1'(1)` reaches one. A network with
/// `G1'(1) = 1` (the infinite chain) percolates only at `p2 = 1`.
pub fn critical_p_classical<T: Real>(dist: &DegreeDistribution<T>, mode: Mode) -> Result<T> {
    let branching = dist.mean_excess_degree()?;
    if branching < T::one() {
        return Err(Error::NeverPercolates(format!(
            "mean excess degree {branching} is below 1"
        )));
    }
    let target = T::one() / branching;
    bisect_predicate(
        |p| Ok(scp2_from_p(p, mode) >= target),
        T::zero(),
        T::one(),
        T::epsilon(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn poisson(z: f64) -> DegreeDistribution<f64> {
        DegreeDistribution::poisson(z).unwrap()
    }

    /// Plain iteration from zero with a tight stopping rule.
    fn iterate_oracle(z: f64, p2: f64) -> f64 {
        let mut u = 0.0_f64;
        for _ in 0..1_000_000 {
            let next = 1.0 - p2 + p2 * (z * (u - 1.0)).exp();
            if (next - u).abs() < 1e-15 {
                return next;
            }
            u = next;
        }
        u
    }

    #[test]
    fn solve_u_examples() {
        assert_eq!(solve_u(&poisson(2.5), 0.0).unwrap(), 1.0);
        let d3 = DegreeDistribution::<f64>::delta(3).unwrap();
        assert_abs_diff_eq!(solve_u(&d3, 1.0).unwrap(), 0.0, epsilon = 1e-12);
        let u = solve_u(&poisson(2.5), 0.64).unwrap();
        assert_abs_diff_eq!(u, iterate_oracle(2.5, 0.64), epsilon = 1e-10);
        assert_abs_diff_eq!(u, 0.5891, epsilon = 1e-4);
        let residual = (1.0 - 0.64 + 0.64 * (2.5 * (u - 1.0)).exp() - u).abs();
        assert!(residual < 1e-10);
    }

    #[test]
    fn giant_component_examples() {
        let sol = giant_component(&poisson(2.5), 0.64).unwrap();
        let u = iterate_oracle(2.5, 0.64);
        assert_abs_diff_eq!(sol.s, 1.0 - (2.5 * (u - 1.0)).exp(), epsilon = 1e-10);
        assert_abs_diff_eq!(sol.s, 0.642, epsilon = 1e-3);
        assert!(sol.s_mean.is_none());

        let sub = giant_component(&poisson(2.5), 0.4 - 1e-4).unwrap();
        assert_eq!(sub.s, 0.0);
        let s_mean = sub.s_mean.unwrap();
        assert!(s_mean > 1000.0 && s_mean.is_finite());

        let d3 = DegreeDistribution::<f64>::delta(3).unwrap();
        assert_abs_diff_eq!(giant_component(&d3, 1.0).unwrap().s, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mean_size_matches_poisson_formula() {
        // For Poisson: <s> = 1 + z p2 / (1 - z p2)
        let sol = giant_component(&poisson(2.0), 0.25).unwrap();
        assert_abs_diff_eq!(sol.s_mean.unwrap(), 1.0 + 0.5 / 0.5, epsilon = 1e-12);
        assert_eq!(sol.u, 1.0);
    }

    #[test]
    fn critical_p_examples() {
        let er = poisson(2.5);
        assert_abs_diff_eq!(
            critical_p_classical(&er, Mode::Distilled).unwrap(),
            2.0 - 3.2_f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            critical_p_classical(&er, Mode::Sequential).unwrap(),
            1.0 - 0.6_f64.sqrt(),
            epsilon = 1e-12
        );
        let d3 = DegreeDistribution::<f64>::delta(3).unwrap();
        assert_abs_diff_eq!(
            critical_p_classical(&d3, Mode::Distilled).unwrap(),
            2.0 - 3.0_f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn chain_percolates_only_at_full_pair_occupation() {
        let chain = DegreeDistribution::<f64>::delta(2).unwrap();
        // 1 - (1-p)^2 rounds to 1 once (1-p)^2 < eps/2
        assert_abs_diff_eq!(
            critical_p_classical(&chain, Mode::Sequential).unwrap(),
            1.0,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(
            critical_p_classical(&chain, Mode::Distilled).unwrap(),
            2.0 - 2.0_f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn subcritical_network_never_percolates() {
        assert!(matches!(
            critical_p_classical(&poisson(0.8), Mode::Distilled),
            Err(Error::NeverPercolates(_))
        ));
    }

    #[test]
    fn giant_component_vanishes_exactly_below_threshold() {
        for z in [1.5, 2.5, 4.0] {
            let er = poisson(z);
            for mode in [Mode::Sequential, Mode::Distilled] {
                let pc = critical_p_classical(&er, mode).unwrap();
                for i in 0..=200 {
                    let p = i as f64 / 200.0;
                    let s = giant_component(&er, scp2_from_p(p, mode)).unwrap().s;
                    if p < pc - 1e-6 {
                        assert_eq!(s, 0.0, "z={z} p={p}");
                    } else if p > pc + 1e-6 {
                        assert!(s > 0.0, "z={z} p={p}");
                    }
                }
            }
        }
    }

    #[test]
    fn monotone_in_p2() {
        let dists = [
            poisson(2.5),
            DegreeDistribution::power_law_cutoff(1.0, 10.0, 1).unwrap(),
            DegreeDistribution::delta(3).unwrap(),
        ];
        for d in &dists {
            let mut last: Option<PercSolution<f64>> = None;
            for i in 0..=100 {
                let sol = giant_component(d, i as f64 / 100.0).unwrap();
                if let Some(prev) = last {
                    assert!(sol.u <= prev.u + 1e-12);
                    assert!(sol.s >= prev.s - 1e-12);
                }
                assert_eq!(sol.u >= 1.0, sol.s == 0.0);
                last = Some(sol);
            }
        }
    }

    #[test]
    fn f32_threshold() {
        let er = DegreeDistribution::poisson(2.5_f32).unwrap();
        let pc = critical_p_classical(&er, Mode::Distilled).unwrap();
        assert!((pc - 0.211_145_6).abs() < 1e-5);
        let sol = giant_component(&er, 0.64_f32).unwrap();
        assert!((sol.s - 0.642).abs() < 1e-3);
    }
}
