//! Generating-function solutions for bond percolation on uncorrelated random
//! graphs, before and after q-swap transformations.
//!
//! Only evaluations at `x = 1` are computed: the probability `u` that an edge
//! leads to a finite component, the giant-component fraction, thresholds and
//! the gain of a strategy. The mean finite-component size is provided for the
//! untransformed network.

mod classical;
mod closed_form;
mod eta;
mod strategy;
mod swap;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classical::{critical_p_classical, giant_component, solve_u};
pub use closed_form::{bethe_thresholds, er_three_swap_threshold, er_two_swap_threshold};
pub use eta::{eta_q_approx, eta_random_order, EtaModel};
pub use strategy::{marginal_gains, optimal_strategy, MarginalGain, DEFAULT_Q_MAX};
pub use swap::{cq, cq_prime, critical_p_swapped, gain, giant_component_swapped, solve_u_swapped};

/// Emergence criterion for the threshold search: the network percolates at
/// `p` when the edge fixed point satisfies `u < 1 - EMERGENCE_EPS`.
pub const EMERGENCE_EPS: f64 = 1e-7;

/// Tolerance on `p` for threshold bisection.
pub const THRESHOLD_TOL: f64 = 1e-10;

/// Residual bound for fixed points.
pub const FIXED_POINT_TOL: f64 = 1e-12;

/// The set of degrees whose vertices receive a q-swap.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Strategy(std::collections::BTreeSet<usize>);

impl Strategy {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new<I: IntoIterator<Item = usize>>(degrees: I) -> Result<Self> {
        let set: std::collections::BTreeSet<usize> = degrees.into_iter().collect();
        if let Some(&bad) = set.iter().find(|&&q| q < 2) {
            return Err(Error::InvalidParameter(format!(
                "q-swap needs degree q >= 2, got {bad}"
            )));
        }
        Ok(Self(set))
    }

    pub fn contains(&self, q: usize) -> bool {
        self.0.contains(&q)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.0.iter().next_back().copied()
    }
}

impl TryFrom<Vec<usize>> for Strategy {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Strategy::new(v)
    }
}

impl From<Strategy> for Vec<usize> {
    fn from(s: Strategy) -> Self {
        s.0.into_iter().collect()
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("none");
        }
        let parts: Vec<String> = self.0.iter().map(|q| q.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("none") {
            return Ok(Self::none());
        }
        let degrees = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidParameter(format!("bad strategy degree {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(degrees)
    }
}

/// Percolation on the untransformed network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PercSolution<T> {
    /// Probability that a random edge leads to a finite component.
    pub u: T,
    /// Giant-component fraction `1 - G0(u)`.
    pub s: T,
    /// Mean finite-component size; only defined below the threshold.
    pub s_mean: Option<T>,
}

/// Percolation on the network after applying a q-swap strategy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwappedSolution<T> {
    pub u: T,
    /// Giant-component fraction counting detached centers in the population.
    pub s_tilde: T,
    /// `s_tilde * s1 / s_tilde1`: giant-component fraction among vertices
    /// that were not detached.
    pub s_hat: T,
    /// Untransformed giant component at full occupation.
    pub s1: T,
    /// Transformed giant component at full occupation.
    pub s_tilde1: T,
    /// Probability that a degree-q vertex is actually swapped.
    pub eta: BTreeMap<usize, T>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_parsing() {
        let s: Strategy = "2,3".parse().unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(s.to_string(), "2,3");
        assert!("none".parse::<Strategy>().unwrap().is_empty());
        assert!("1,2".parse::<Strategy>().is_err());
        assert!("2,x".parse::<Strategy>().is_err());
        assert!(Strategy::new([0]).is_err());
    }
}
