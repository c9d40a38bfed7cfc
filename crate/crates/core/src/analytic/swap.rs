use crate::error::{Error, Result};
use crate::genfun::DegreeDistribution;
use crate::link::{scp2_from_p, LinkModel, Mode};
use crate::real::Real;
use crate::roots::{bisect_predicate, smallest_fixed_point};

use super::classical::{critical_p_classical, giant_component, solve_u};
use super::eta::{eta_values, EtaModel};
use super::{Strategy, SwappedSolution, EMERGENCE_EPS, FIXED_POINT_TOL, THRESHOLD_TOL};

/// Size generating function of the q-cycle left behind by a q-swap, seen from
/// the cycle member we arrived from, with `w` generating the components
/// hanging off each reached member.
///
/// A connected string of `l + 1` reached members (`l` others) appears with
/// weight `(l + 1) p^l (1 - p)^2` for `l <= q - 2`; reaching all `q - 1`
/// others has weight `q p^(q-1) (1 - p) + p^q`.
pub fn cq<T: Real>(q: usize, p: T, w: T) -> T {
    assert!(q >= 2, "cycle length must be at least 2");
    let one_minus = T::one() - p;
    let mut sum = T::zero();
    let mut pw = T::one();
    for l in 0..=(q - 2) {
        sum += T::from_usize_lossy(l + 1) * pw * one_minus * one_minus;
        pw *= p * w;
    }
    // pw = (p w)^(q-1)
    let full = T::from_usize_lossy(q) * one_minus + p;
    sum + full * pw
}

/// `d cq / dw`.
pub fn cq_prime<T: Real>(q: usize, p: T, w: T) -> T {
    assert!(q >= 2, "cycle length must be at least 2");
    let one_minus = T::one() - p;
    let mut sum = T::zero();
    for l in 1..=(q - 2) {
        sum += T::from_usize_lossy(l * (l + 1)) * p.powu(l) * w.powu(l - 1) * one_minus * one_minus;
    }
    let top = T::from_usize_lossy(q) * p.powu(q - 1) * one_minus + p.powu(q);
    sum + T::from_usize_lossy(q - 1) * top * w.powu(q - 2)
}

/// Right-hand side of the edge consistency equation at `x = 1` with the
/// strategy's q-swaps applied.
struct SwappedMap<'a, T> {
    dist: &'a DegreeDistribution<T>,
    p: T,
    p2: T,
    /// `(q, P1(q))` for every active degree with non-zero weight.
    terms: Vec<(usize, T)>,
}

impl<'a, T: Real> SwappedMap<'a, T> {
    fn new(dist: &'a DegreeDistribution<T>, p: T, mode: Mode, strategy: &Strategy) -> Result<Self> {
        dist.require_edges()?;
        let terms = strategy
            .iter()
            .map(|q| (q, dist.p1_unchecked(q)))
            .filter(|&(_, w)| w > T::zero())
            .collect();
        Ok(Self {
            dist,
            p,
            p2: scp2_from_p(p, mode),
            terms,
        })
    }

    fn eval(&self, u: T) -> T {
        let g1 = self.dist.g1_unchecked(u);
        let mut rhs = T::one() - self.p2 + self.p2 * g1;
        for &(q, weight) in &self.terms {
            rhs += weight * ((self.p2 - T::one()) - self.p2 * u.powu(q - 1) + cq(q, self.p, g1));
        }
        rhs
    }
}

fn check_p<T: Real>(p: T) -> Result<()> {
    if p.is_nan() || p < T::zero() || p > T::one() {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn solve_at<T: Real>(
    dist: &DegreeDistribution<T>,
    p: T,
    mode: Mode,
    strategy: &Strategy,
) -> Result<T> {
    check_p(p)?;
    if strategy.is_empty() {
        return solve_u(dist, scp2_from_p(p, mode));
    }
    if p == T::zero() {
        return Ok(T::one());
    }
    let map = SwappedMap::new(dist, p, mode, strategy)?;
    let (u, _) = smallest_fixed_point(|u| map.eval(u), T::tol(FIXED_POINT_TOL))?;
    Ok(u)
}

/// Smallest `u` solving the edge consistency equation of the transformed network.
pub fn solve_u_swapped<T: Real>(
    dist: &DegreeDistribution<T>,
    link: &LinkModel<T>,
    strategy: &Strategy,
) -> Result<T> {
    solve_at(dist, link.p(), link.mode(), strategy)
}

/// Smallest `p` at which the transformed network has a giant component.
///
/// Bisection on `p` with the emergence test `u < 1 - EMERGENCE_EPS`. The
/// empty strategy reduces to [`critical_p_classical`].
pub fn critical_p_swapped<T: Real>(
    dist: &DegreeDistribution<T>,
    mode: Mode,
    strategy: &Strategy,
) -> Result<T> {
    if strategy.is_empty() {
        return critical_p_classical(dist, mode);
    }
    let eps = T::tol(EMERGENCE_EPS);
    let emerges =
        |p: T| -> Result<bool> { Ok(solve_at(dist, p, mode, strategy)? < T::one() - eps) };
    if !emerges(T::one())? {
        return Err(Error::NeverPercolates(format!(
            "no giant component at p = 1 with q-swaps {strategy}"
        )));
    }
    bisect_predicate(emerges, T::zero(), T::one(), T::tol(THRESHOLD_TOL))
}

/// Giant component of the transformed network, with and without the
/// detached centers.
pub fn giant_component_swapped<T: Real>(
    dist: &DegreeDistribution<T>,
    link: &LinkModel<T>,
    strategy: &Strategy,
    eta_model: EtaModel,
) -> Result<SwappedSolution<T>> {
    let eta = eta_values(dist, strategy, eta_model)?;
    let s_at = |p: T| -> Result<(T, T)> {
        let u = solve_at(dist, p, link.mode(), strategy)?;
        if u >= T::one() {
            return Ok((u, T::zero()));
        }
        let mut finite = dist.g0(u);
        for (&q, &eta_q) in &eta {
            finite += eta_q * dist.pmf(q) * (T::one() - u.powu(q));
        }
        Ok((u, (T::one() - finite).clamp_unit()))
    };
    let (u, s_tilde) = s_at(link.p())?;
    let (_, s_tilde1) = s_at(T::one())?;
    let s1 = giant_component(dist, T::one())?.s;
    let s_hat = if s_tilde1 > T::zero() {
        (s_tilde * s1 / s_tilde1).clamp_unit()
    } else {
        s_tilde
    };
    Ok(SwappedSolution {
        u,
        s_tilde,
        s_hat,
        s1,
        s_tilde1,
        eta,
    })
}

/// Relative threshold change `(p~c - pc) / pc`; negative when the strategy helps.
pub fn gain<T: Real>(dist: &DegreeDistribution<T>, mode: Mode, strategy: &Strategy) -> Result<T> {
    let pc = critical_p_classical(dist, mode)?;
    let pc_swapped = critical_p_swapped(dist, mode, strategy)?;
    Ok((pc_swapped - pc) / pc)
}
