use serde::Serialize;

use crate::error::{Error, Result};
use crate::genfun::DegreeDistribution;
use crate::link::Mode;
use crate::real::Real;

use super::classical::critical_p_classical;
use super::swap::critical_p_swapped;
use super::Strategy;

pub const DEFAULT_Q_MAX: usize = 10;

/// Effect of a single-degree strategy `{q}` on the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarginalGain<T> {
    pub q: usize,
    /// Threshold with only `q` active; `None` when `P(q) = 0` or no threshold exists.
    pub p_c: Option<T>,
    pub gain: Option<T>,
    pub included: bool,
}

/// Threshold change of every single-degree strategy `{q}`, `2 <= q <= q_max`.
pub fn marginal_gains<T: Real>(
    dist: &DegreeDistribution<T>,
    mode: Mode,
    q_max: usize,
) -> Result<Vec<MarginalGain<T>>> {
    if q_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "q_max must be >= 2, got {q_max}"
        )));
    }
    let pc = critical_p_classical(dist, mode)?;
    (2..=q_max)
        .map(|q| {
            if dist.pmf(q) <= T::zero() {
                return Ok(MarginalGain {
                    q,
                    p_c: None,
                    gain: None,
                    included: false,
                });
            }
            match critical_p_swapped(dist, mode, &Strategy::new([q])?) {
                Ok(t) => Ok(MarginalGain {
                    q,
                    p_c: Some(t),
                    gain: Some((t - pc) / pc),
                    included: t < pc,
                }),
                Err(Error::NeverPercolates(_)) => Ok(MarginalGain {
                    q,
                    p_c: None,
                    gain: None,
                    included: false,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Union of the degrees whose q-swap, applied alone, lowers the threshold.
pub fn optimal_strategy<T: Real>(
    dist: &DegreeDistribution<T>,
    mode: Mode,
    q_max: usize,
) -> Result<Strategy> {
    let gains = marginal_gains(dist, mode, q_max)?;
    Strategy::new(gains.into_iter().filter(|g| g.included).map(|g| g.q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::gain;

    #[test]
    fn chain_gets_no_swaps() {
        let chain = DegreeDistribution::<f64>::delta(2).unwrap();
        for mode in [Mode::Sequential, Mode::Distilled] {
            assert!(optimal_strategy(&chain, mode, 10).unwrap().is_empty());
        }
    }

    #[test]
    fn regular_trees_swap_their_degree() {
        for q in 3..=7 {
            let d = DegreeDistribution::<f64>::delta(q).unwrap();
            for mode in [Mode::Sequential, Mode::Distilled] {
                let s = optimal_strategy(&d, mode, 10).unwrap();
                assert_eq!(s.iter().collect::<Vec<_>>(), vec![q]);
            }
        }
    }

    #[test]
    fn optimal_gain_is_never_positive() {
        for z in [1.2, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0] {
            let er = DegreeDistribution::poisson(z).unwrap();
            for mode in [Mode::Sequential, Mode::Distilled] {
                let s = optimal_strategy(&er, mode, DEFAULT_Q_MAX).unwrap();
                assert!(gain(&er, mode, &s).unwrap() <= 0.0, "z={z} {mode}");
            }
        }
    }

    #[test]
    fn er_strategy_grows_with_mean_degree() {
        let small = optimal_strategy(
            &DegreeDistribution::poisson(1.5_f64).unwrap(),
            Mode::Distilled,
            10,
        )
        .unwrap();
        let large = optimal_strategy(
            &DegreeDistribution::poisson(4.0_f64).unwrap(),
            Mode::Distilled,
            10,
        )
        .unwrap();
        assert_eq!(small.to_string(), "2,3");
        assert_eq!(large.to_string(), "2,3,4,5");
    }

    #[test]
    fn rejects_small_q_max() {
        let er = DegreeDistribution::poisson(2.5_f64).unwrap();
        assert!(marginal_gains(&er, Mode::Distilled, 1).is_err());
    }
}
