//! Probability `eta_q` that a degree-q vertex selected by the strategy is
//! actually swapped, given that no two neighbouring vertices may both be
//! swapped.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfun::DegreeDistribution;
use crate::real::Real;

use super::Strategy;

/// Integration steps for [`eta_random_order`].
const RK4_STEPS: usize = 2_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaModel {
    /// `(1 + (q/2) P1(q))^-1` for each active degree on its own.
    Compact,
    /// Random-order greedy selection on a locally tree-like network, with
    /// all active degrees competing.
    #[default]
    RandomOrder,
}

impl FromStr for EtaModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "compact" | "approx" => Ok(EtaModel::Compact),
            "random-order" | "random_order" | "tree" => Ok(EtaModel::RandomOrder),
            other => Err(Error::InvalidParameter(format!(
                "unknown eta model {other:?} (expected compact or random-order)"
            ))),
        }
    }
}

impl std::fmt::Display for EtaModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EtaModel::Compact => "compact",
            EtaModel::RandomOrder => "random-order",
        })
    }
}

/// Compact approximation `(1 + (q/2) P1(q))^-1`, intended for single-q strategies.
pub fn eta_q_approx<T: Real>(dist: &DegreeDistribution<T>, q: usize) -> Result<T> {
    let p1 = dist.p1(q)?;
    Ok(T::one() / (T::one() + T::from_usize_lossy(q) / T::lit(2.0) * p1))
}

/// Swap probabilities when candidates are visited in uniformly random order.
///
/// Give every vertex an independent arrival time `s` in `[0, 1]`. Let `y(s)`
/// be the probability that the vertex at the end of a random edge is a
/// candidate, arrived before `s`, and was swapped when the vertex we came
/// from is ignored. On a tree
///
/// ```text
/// y'(s) = sum_{q in strategy} P1(q) (1 - y(s))^(q - 1),   y(0) = 0,
/// ```
///
/// and a degree-q candidate arriving at `s` is swapped iff none of its `q`
/// neighbours was, so `eta_q = int_0^1 (1 - y(s))^q ds`. Integrated with
/// classical RK4.
pub fn eta_random_order<T: Real>(
    dist: &DegreeDistribution<T>,
    strategy: &Strategy,
) -> Result<BTreeMap<usize, T>> {
    dist.require_edges()?;
    let active: Vec<usize> = strategy.iter().collect();
    let weights: Vec<(usize, T)> = active
        .iter()
        .map(|&q| (q, dist.p1_unchecked(q)))
        .filter(|&(_, w)| w > T::zero())
        .collect();

    // state[0] = y, state[1 + i] = integral for active[i]
    let deriv = |state: &[T], out: &mut [T]| {
        let free = (T::one() - state[0]).max(T::zero());
        out[0] = weights
            .iter()
            .fold(T::zero(), |acc, &(q, w)| acc + w * free.powu(q - 1));
        for (slot, &q) in out[1..].iter_mut().zip(&active) {
            *slot = free.powu(q);
        }
    };

    let dim = active.len() + 1;
    let h = T::one() / T::from_usize_lossy(RK4_STEPS);
    let half = h / T::lit(2.0);
    let sixth = h / T::lit(6.0);
    let mut state = vec![T::zero(); dim];
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![T::zero(); dim],
        vec![T::zero(); dim],
        vec![T::zero(); dim],
        vec![T::zero(); dim],
    );
    let mut tmp = vec![T::zero(); dim];
    for _ in 0..RK4_STEPS {
        deriv(&state, &mut k1);
        for i in 0..dim {
            tmp[i] = state[i] + half * k1[i];
        }
        deriv(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = state[i] + half * k2[i];
        }
        deriv(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = state[i] + h * k3[i];
        }
        deriv(&tmp, &mut k4);
        for i in 0..dim {
            state[i] += sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
        }
    }
    Ok(active
        .iter()
        .zip(&state[1..])
        .map(|(&q, &eta)| (q, eta.clamp_unit()))
        .collect())
}

pub(crate) fn eta_values<T: Real>(
    dist: &DegreeDistribution<T>,
    strategy: &Strategy,
    model: EtaModel,
) -> Result<BTreeMap<usize, T>> {
    match model {
        EtaModel::Compact => strategy
            .iter()
            .map(|q| Ok((q, eta_q_approx(dist, q)?)))
            .collect(),
        EtaModel::RandomOrder => eta_random_order(dist, strategy),
    }
}
