//! Degree distributions and their generating functions.
//!
//! `G0(x) = sum_k P(k) x^k` generates the degree of a random vertex and
//! `G1(x) = G0'(x) / G0'(1)` the excess degree of a vertex reached by
//! following a random edge. Poisson and delta distributions use closed forms;
//! the power law with exponential cutoff and empirical histograms are held as
//! dense coefficient tables and evaluated by Horner's rule.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::real::Real;

/// Absolute bound on the probability mass dropped when truncating a power law.
pub const POWER_LAW_TAIL_TOL: f64 = 1e-12;

/// Hard cap on the support of a truncated power law.
const POWER_LAW_MAX_SUPPORT: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Family<T> {
    Poisson {
        z: T,
    },
    /// `P(k) = C k^(-tau) exp(-k/kappa)` for `k >= kmin`.
    PowerLawCutoff {
        tau: T,
        kappa: T,
        kmin: usize,
    },
    /// Every vertex has degree `q` (Bethe lattice).
    Delta {
        q: usize,
    },
    Empirical,
}

#[derive(Clone, Debug)]
pub struct DegreeDistribution<T> {
    family: Family<T>,
    /// Dense `P(0..=kmax)` for the tabulated families.
    table: Vec<T>,
    mean: T,
    second_moment: T,
}

impl<T: Real> DegreeDistribution<T> {
    pub fn poisson(z: T) -> Result<Self> {
        if !(z.is_finite() && z > T::zero()) {
            return Err(Error::Domain(format!(
                "Poisson mean degree must be positive, got {z}"
            )));
        }
        Ok(Self {
            family: Family::Poisson { z },
            table: Vec::new(),
            mean: z,
            second_moment: z + z * z,
        })
    }

    pub fn delta(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("delta distribution needs q >= 1".into()));
        }
        let qf = T::from_usize_lossy(q);
        Ok(Self {
            family: Family::Delta { q },
            table: Vec::new(),
            mean: qf,
            second_moment: qf * qf,
        })
    }

    /// Power law with exponential cutoff, truncated where the neglected tail
    /// mass drops below [`POWER_LAW_TAIL_TOL`].
    pub fn power_law_cutoff(tau: T, kappa: T, kmin: usize) -> Result<Self> {
        if kmin == 0 {
            return Err(Error::Domain(
                "power-law support must start at kmin >= 1".into(),
            ));
        }
        if !tau.is_finite() {
            return Err(Error::Domain(format!(
                "power-law exponent must be finite, got {tau}"
            )));
        }
        if kappa.is_infinite() && kappa > T::zero() {
            return Err(Error::Domain(format!(
                "power law without a finite cutoff is not normalisable here (tau = {tau})"
            )));
        }
        if !(kappa.is_finite() && kappa > T::zero()) {
            return Err(Error::Domain(format!(
                "cutoff kappa must be positive, got {kappa}"
            )));
        }

        let decay = (-T::one() / kappa).exp();
        let tail_tol = T::lit(POWER_LAW_TAIL_TOL);
        let mut weights = vec![T::zero(); kmin];
        let mut total = T::zero();
        let mut k = kmin;
        loop {
            let kf = T::from_usize_lossy(k);
            let term = kf.powf(-tau) * (-kf / kappa).exp();
            weights.push(term);
            total += term;

            // Ratio of consecutive terms beyond k is bounded by r, so the
            // remaining tail is at most term * r / (1 - r).
            let r = if tau >= T::zero() {
                decay
            } else {
                ((kf + T::one()) / kf).powf(-tau) * decay
            };
            if r < T::one() && term * r / (T::one() - r) < tail_tol * total {
                break;
            }
            k += 1;
            if k > POWER_LAW_MAX_SUPPORT {
                return Err(Error::Domain(format!(
                    "power law (tau = {tau}, kappa = {kappa}) needs more than {POWER_LAW_MAX_SUPPORT} terms"
                )));
            }
        }
        for w in &mut weights {
            *w /= total;
        }
        let mut dist = Self::from_table(Family::PowerLawCutoff { tau, kappa, kmin }, weights);
        dist.trim();
        Ok(dist)
    }

    /// Histogram `degree -> weight`. Weights are normalised by their sum.
    pub fn empirical<I>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, T)>,
    {
        let mut map: BTreeMap<usize, T> = BTreeMap::new();
        for (k, w) in weights {
            if !(w.is_finite() && w >= T::zero()) {
                return Err(Error::Domain(format!(
                    "weight of degree {k} must be non-negative, got {w}"
                )));
            }
            *map.entry(k).or_insert_with(T::zero) += w;
        }
        let total = map.values().fold(T::zero(), |a, &b| a + b);
        if map.is_empty() || total <= T::zero() {
            return Err(Error::Domain("empirical distribution has no mass".into()));
        }
        let kmax = *map.keys().next_back().expect("non-empty");
        let mut table = vec![T::zero(); kmax + 1];
        for (k, w) in map {
            table[k] = w / total;
        }
        let mut dist = Self::from_table(Family::Empirical, table);
        dist.trim();
        Ok(dist)
    }

    /// Degree histogram of a sequence of observed degrees.
    pub fn from_degrees<I: IntoIterator<Item = usize>>(degrees: I) -> Result<Self> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for d in degrees {
            *counts.entry(d).or_default() += 1;
        }
        Self::empirical(counts.into_iter().map(|(k, c)| (k, T::from_usize_lossy(c))))
    }

    /// Reads a two-column `degree probability` file; `#` starts a comment.
    pub fn load_empirical(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut cols = body.split_whitespace();
            let (Some(k), Some(w), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(parse_err(format!(
                    "expected `degree probability`, got {body:?}"
                )));
            };
            let k: usize = k
                .parse()
                .map_err(|e| parse_err(format!("bad degree {k:?}: {e}")))?;
            let w: f64 = w
                .parse()
                .map_err(|e| parse_err(format!("bad probability {w:?}: {e}")))?;
            pairs.push((k, T::lit(w)));
        }
        Self::empirical(pairs)
    }

    fn from_table(family: Family<T>, table: Vec<T>) -> Self {
        let (mean, second_moment) =
            table
                .iter()
                .enumerate()
                .fold((T::zero(), T::zero()), |(m1, m2), (k, &w)| {
                    let kf = T::from_usize_lossy(k);
                    (m1 + kf * w, m2 + kf * kf * w)
                });
        Self {
            family,
            table,
            mean,
            second_moment,
        }
    }

    fn trim(&mut self) {
        while self.table.len() > 1 && self.table.last() == Some(&T::zero()) {
            self.table.pop();
        }
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    /// Largest degree with non-zero probability, or `None` for unbounded support.
    pub fn max_degree(&self) -> Option<usize> {
        match self.family {
            Family::Poisson { .. } => None,
            Family::Delta { q } => Some(q),
            _ => Some(self.table.len() - 1),
        }
    }

    pub fn pmf(&self, k: usize) -> T {
        match self.family {
            Family::Poisson { z } => poisson_pmf(z, k),
            Family::Delta { q } => {
                if k == q {
                    T::one()
                } else {
                    T::zero()
                }
            }
            _ => self.table.get(k).copied().unwrap_or_else(T::zero),
        }
    }

    /// `<k>`, equal to `G0'(1)`.
    pub fn mean_degree(&self) -> T {
        self.mean
    }

    /// `<k^2>`.
    pub fn second_moment(&self) -> T {
        self.second_moment
    }

    /// Mean excess degree `(<k^2> - <k>) / <k>` from the moment sums.
    pub fn mean_excess_degree(&self) -> Result<T> {
        self.require_edges()?;
        Ok((self.second_moment - self.mean) / self.mean)
    }

    /// Fails when no vertex has an edge, in which case `G1` is undefined.
    pub fn require_edges(&self) -> Result<()> {
        if self.mean > T::zero() {
            Ok(())
        } else {
            Err(Error::Domain("mean degree is zero; G1 is undefined".into()))
        }
    }

    /// Degree distribution of the vertex at the end of a random edge, `k P(k) / <k>`.
    pub fn p1(&self, k: usize) -> Result<T> {
        self.require_edges()?;
        Ok(self.p1_unchecked(k))
    }

    pub(crate) fn p1_unchecked(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.pmf(k) / self.mean
    }

    pub fn g0(&self, x: T) -> T {
        match self.family {
            Family::Poisson { z } => (z * (x - T::one())).exp(),
            Family::Delta { q } => x.powu(q),
            _ => horner(self.table.iter().copied(), x),
        }
    }

    pub fn g0_prime(&self, x: T) -> T {
        match self.family {
            Family::Poisson { z } => z * (z * (x - T::one())).exp(),
            Family::Delta { q } => T::from_usize_lossy(q) * x.powu(q - 1),
            _ => horner(
                self.table
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, &w)| T::from_usize_lossy(k) * w),
                x,
            ),
        }
    }

    pub fn g0_second(&self, x: T) -> T {
        match self.family {
            Family::Poisson { z } => z * z * (z * (x - T::one())).exp(),
            Family::Delta { q } => {
                if q < 2 {
                    T::zero()
                } else {
                    T::from_usize_lossy(q * (q - 1)) * x.powu(q - 2)
                }
            }
            _ => horner(
                self.table
                    .iter()
                    .enumerate()
                    .skip(2)
                    .map(|(k, &w)| T::from_usize_lossy(k * (k - 1)) * w),
                x,
            ),
        }
    }

    pub fn g1(&self, x: T) -> Result<T> {
        self.require_edges()?;
        Ok(self.g1_unchecked(x))
    }

    pub fn g1_prime(&self, x: T) -> Result<T> {
        self.require_edges()?;
        Ok(self.g1_prime_unchecked(x))
    }

    pub(crate) fn g1_unchecked(&self, x: T) -> T {
        match self.family {
            Family::Poisson { z } => (z * (x - T::one())).exp(),
            Family::Delta { q } => x.powu(q - 1),
            _ => self.g0_prime(x) / self.mean,
        }
    }

    pub(crate) fn g1_prime_unchecked(&self, x: T) -> T {
        self.g0_second(x) / self.mean
    }

    /// Inverse-CDF sampler over the (truncated) support.
    pub fn sampler(&self) -> DegreeSampler {
        let weights: Vec<f64> = match self.family {
            Family::Delta { q } => {
                return DegreeSampler {
                    cdf: Vec::new(),
                    fixed: Some(q),
                }
            }
            Family::Poisson { z } => {
                let z = z.as_f64();
                let mut w = Vec::new();
                let mut acc = 0.0;
                let limit = (z + 40.0 * z.sqrt() + 50.0) as usize;
                for k in 0..=limit {
                    let pk = poisson_pmf(z, k);
                    w.push(pk);
                    acc += pk;
                    if k as f64 > z && 1.0 - acc < 1e-16 {
                        break;
                    }
                }
                w
            }
            _ => self.table.iter().map(|w| w.as_f64()).collect(),
        };
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in weights {
            acc += w;
            cdf.push(acc);
        }
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        DegreeSampler { cdf, fixed: None }
    }

    /// Draws one degree. Builds a sampler per call; use [`Self::sampler`] in loops.
    pub fn sample_degree<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler().sample(rng)
    }
}

impl<T: Real> fmt::Display for DegreeDistribution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Poisson { z } => write!(f, "poisson(z={z})"),
            Family::PowerLawCutoff { tau, kappa, kmin } => {
                write!(f, "powerlaw(tau={tau},kappa={kappa},kmin={kmin})")
            }
            Family::Delta { q } => write!(f, "delta(q={q})"),
            Family::Empirical => write!(f, "empirical(kmax={})", self.table.len() - 1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DegreeSampler {
    cdf: Vec<f64>,
    fixed: Option<usize>,
}

impl DegreeSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if let Some(q) = self.fixed {
            return q;
        }
        let u: f64 = rng.gen();
        let k = self.cdf.partition_point(|&c| c <= u);
        // u can exceed the last cumulative value only through rounding
        k.min(self.cdf.len() - 1)
    }
}

impl rand::distributions::Distribution<usize> for DegreeSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        DegreeSampler::sample(self, rng)
    }
}

fn poisson_pmf<T: Real>(z: T, k: usize) -> T {
    let mut log_p = -z + T::from_usize_lossy(k) * z.ln();
    for i in 2..=k {
        log_p -= T::from_usize_lossy(i).ln();
    }
    log_p.exp()
}

/// `sum_i c_i x^i` for coefficients in ascending order.
fn horner<T: Real, I>(coeffs: I, x: T) -> T
where
    I: DoubleEndedIterator<Item = T>,
{
    coeffs.rev().fold(T::zero(), |acc, c| acc * x + c)
}
