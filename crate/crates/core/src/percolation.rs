//! Monte Carlo bond percolation with union-find.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::Strategy;
use crate::error::{Error, Result};
use crate::genfun::DegreeDistribution;
use crate::graph::{self, EdgeKind, Network, NodeStatus};
use crate::link::{scp2_from_p, LinkModel, Mode};
use crate::qswap::apply_qswaps;
use crate::rng::trial_rng;

/// Disjoint sets with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    /// Sizes of all components, one entry per root.
    pub fn component_sizes(&self) -> Vec<usize> {
        self.parent
            .iter()
            .enumerate()
            .filter(|&(i, &p)| p as usize == i)
            .map(|(i, _)| self.size[i] as usize)
            .collect()
    }

    fn two_largest(&self) -> (usize, usize) {
        let mut top = (0, 0);
        for (i, &p) in self.parent.iter().enumerate() {
            if p as usize == i {
                let s = self.size[i] as usize;
                if s > top.0 {
                    top = (s, top.0);
                } else if s > top.1 {
                    top.1 = s;
                }
            }
        }
        top
    }
}

/// Component sizes of one percolation sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    /// Sorted in decreasing order.
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn largest(&self) -> usize {
        self.sizes.first().copied().unwrap_or(0)
    }

    pub fn second_largest(&self) -> usize {
        self.sizes.get(1).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }
}

fn occupy<R: Rng + ?Sized>(uf: &mut UnionFind, net: &Network, p: f64, p2: f64, rng: &mut R) {
    for e in net.edges() {
        let prob = match e.kind {
            EdgeKind::Original => p2,
            EdgeKind::CycleLink => p,
        };
        if rng.gen::<f64>() < prob {
            uf.union(e.a as usize, e.b as usize);
        }
    }
}

/// Occupies original edges with `p2` and cycle links with `p`, then returns
/// the component sizes.
pub fn percolate<R: Rng + ?Sized>(net: &Network, link: &LinkModel<f64>, rng: &mut R) -> Components {
    let mut uf = UnionFind::new(net.n_vertices());
    occupy(&mut uf, net, link.p(), link.p2(), rng);
    let mut sizes = uf.component_sizes();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    Components { sizes }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GiantFraction {
    /// Largest component over all vertices.
    pub s: f64,
    /// Largest component over vertices that were not detached by a swap.
    pub s_hat: f64,
}

pub fn gcc_fraction(components: &Components, net: &Network) -> Result<GiantFraction> {
    giant_fraction(components.largest(), net)
}

fn giant_fraction(largest: usize, net: &Network) -> Result<GiantFraction> {
    let n = net.n_vertices();
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    let live = n - net.count_status(NodeStatus::SwappedCenter);
    Ok(GiantFraction {
        s: largest as f64 / n as f64,
        s_hat: if live > 0 {
            largest as f64 / live as f64
        } else {
            0.0
        },
    })
}

/// Where each trial's network comes from.
#[derive(Clone, Debug)]
pub enum NetworkSource {
    Er {
        n: usize,
        z: f64,
    },
    Configuration {
        n: usize,
        dist: DegreeDistribution<f64>,
        erase: bool,
    },
    SmallWorld {
        n: usize,
        phi: f64,
    },
    /// The same network for every trial (e.g. an ingested edge list).
    Fixed(Arc<Network>),
}

impl NetworkSource {
    pub fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Arc<Network>> {
        Ok(match self {
            NetworkSource::Er { n, z } => Arc::new(graph::generate_er(*n, *z, rng)?),
            NetworkSource::Configuration { n, dist, erase } => {
                Arc::new(graph::generate_configuration(*n, dist, *erase, rng)?)
            }
            NetworkSource::SmallWorld { n, phi } => {
                Arc::new(graph::generate_small_world(*n, *phi, rng)?)
            }
            NetworkSource::Fixed(net) => Arc::clone(net),
        })
    }
}

/// Per-trial observations, one entry per grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub s: Vec<f64>,
    pub s_hat: Vec<f64>,
    /// Second-largest component as a fraction of all vertices.
    pub second: Vec<f64>,
    pub eta: BTreeMap<usize, Option<f64>>,
    pub detached: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub mode: Mode,
    pub strategy: Strategy,
    pub trials: usize,
    pub seed: u64,
    pub mean_s: Vec<f64>,
    pub stderr_s: Vec<f64>,
    pub mean_s_hat: Vec<f64>,
    pub stderr_s_hat: Vec<f64>,
    pub second_largest_mean: Vec<f64>,
    /// Mean empirical swap fraction per active degree, over trials where it is defined.
    pub mean_eta: BTreeMap<usize, f64>,
    #[serde(skip)]
    pub per_trial: Vec<TrialRecord>,
}

fn mean_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn run_trial(
    source: &NetworkSource,
    mode: Mode,
    strategy: &Strategy,
    grid: &[f64],
    master_seed: u64,
    index: u64,
) -> Result<TrialRecord> {
    let mut rng = trial_rng(master_seed, index);
    let base = source.build(&mut rng)?;
    let (net, report) = apply_qswaps(&base, strategy, &mut rng)?;
    drop(base);
    let n = net.n_vertices();
    let mut uf = UnionFind::new(n);
    let mut rec = TrialRecord {
        s: Vec::with_capacity(grid.len()),
        s_hat: Vec::with_capacity(grid.len()),
        second: Vec::with_capacity(grid.len()),
        eta: report.eta_empirical.clone(),
        detached: report.detached_count,
    };
    for &p in grid {
        uf.reset();
        occupy(&mut uf, &net, p, scp2_from_p(p, mode), &mut rng);
        let (largest, second) = uf.two_largest();
        let frac = giant_fraction(largest, &net)?;
        rec.s.push(frac.s);
        rec.s_hat.push(frac.s_hat);
        rec.second.push(second as f64 / n as f64);
    }
    Ok(rec)
}

/// Repeated percolation over a grid of `p`.
///
/// Trial `i` draws everything (network, swap order, occupations) from its
/// own stream of `master_seed`, so the result does not depend on how trials
/// are scheduled across threads.
pub fn sweep(
    source: &NetworkSource,
    mode: Mode,
    strategy: &Strategy,
    grid: &[f64],
    trials: usize,
    master_seed: u64,
) -> Result<SweepResult> {
    if trials == 0 {
        return Err(Error::InvalidParameter(
            "sweep needs at least one trial".into(),
        ));
    }
    if let Some(p) = grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParameter(format!(
            "grid value {p} outside [0, 1]"
        )));
    }
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|i| run_trial(source, mode, strategy, grid, master_seed, i))
        .collect::<Result<Vec<_>>>()?;

    let column = |j: usize, pick: fn(&TrialRecord) -> &Vec<f64>| {
        mean_stderr(per_trial.iter().map(move |t| pick(t)[j]))
    };
    let mut out = SweepResult {
        grid: grid.to_vec(),
        mode,
        strategy: strategy.clone(),
        trials,
        seed: master_seed,
        mean_s: Vec::new(),
        stderr_s: Vec::new(),
        mean_s_hat: Vec::new(),
        stderr_s_hat: Vec::new(),
        second_largest_mean: Vec::new(),
        mean_eta: BTreeMap::new(),
        per_trial: Vec::new(),
    };
    for j in 0..grid.len() {
        let (m, se) = column(j, |t| &t.s);
        out.mean_s.push(m);
        out.stderr_s.push(se);
        let (m, se) = column(j, |t| &t.s_hat);
        out.mean_s_hat.push(m);
        out.stderr_s_hat.push(se);
        out.second_largest_mean.push(column(j, |t| &t.second).0);
    }
    for q in strategy.iter() {
        let values: Vec<f64> = per_trial
            .iter()
            .filter_map(|t| t.eta.get(&q).copied().flatten())
            .collect();
        if !values.is_empty() {
            out.mean_eta
                .insert(q, values.iter().sum::<f64>() / values.len() as f64);
        }
    }
    out.per_trial = per_trial;
    Ok(out)
}

/// Location of the maximum of `curve` on `grid`, refined by the vertex of the
/// parabola through the peak and its two neighbours.
fn peak_location(grid: &[f64], curve: &[f64]) -> Result<f64> {
    let (idx, _) = curve
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        });
    if grid.len() < 3 || idx == 0 || idx + 1 == grid.len() {
        return Err(Error::GridDoesNotBracket {
            peak: grid.get(idx).copied().unwrap_or(f64::NAN),
        });
    }
    let (x0, x1, x2) = (grid[idx - 1], grid[idx], grid[idx + 1]);
    let (y0, y1, y2) = (curve[idx - 1], curve[idx], curve[idx + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return Ok(x1);
    }
    Ok((x1 - 0.5 * num / den).clamp(x0, x2))
}

/// Finite-size threshold: where the mean second-largest component peaks.
pub fn estimate_pc(result: &SweepResult) -> Result<f64> {
    peak_location(&result.grid, &result.second_largest_mean)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PcEstimate {
    pub pc: f64,
    /// Standard error from the spread of per-batch peak locations.
    pub stderr: f64,
    pub batches: usize,
}

/// [`estimate_pc`] with an error bar from splitting the trials into
/// `batches` contiguous groups and locating the peak in each.
pub fn estimate_pc_with_error(result: &SweepResult, batches: usize) -> Result<PcEstimate> {
    if batches < 2 || batches > result.per_trial.len() {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= batches <= trials ({}), got {batches}",
            result.per_trial.len()
        )));
    }
    let pc = estimate_pc(result)?;
    let per_batch = result.per_trial.len() / batches;
    let mut estimates = Vec::with_capacity(batches);
    for b in 0..batches {
        let chunk = &result.per_trial[b * per_batch..(b + 1) * per_batch];
        let curve: Vec<f64> = (0..result.grid.len())
            .map(|j| chunk.iter().map(|t| t.second[j]).sum::<f64>() / chunk.len() as f64)
            .collect();
        estimates.push(peak_location(&result.grid, &curve)?);
    }
    let (_, stderr) = mean_stderr(estimates.iter().copied());
    Ok(PcEstimate {
        pc,
        stderr,
        batches,
    })
}

/// `steps` evenly spaced points from `a` to `b` inclusive.
pub fn linear_grid(a: f64, b: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..steps)
            .map(|i| a + (b - a) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    #[test]
    fn union_find_sizes() {
        let mut uf = UnionFind::new(6);
        assert!(uf.union(0, 1));
        assert!(uf.union(1, 2));
        assert!(!uf.union(0, 2));
        assert!(uf.union(4, 5));
        let mut sizes = uf.component_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);
        assert_eq!(uf.two_largest(), (3, 2));
        uf.reset();
        assert_eq!(uf.component_sizes().len(), 6);
    }

    fn triangle() -> Network {
        Network::new(
            3,
            vec![
                Edge::original(0, 1),
                Edge::original(1, 2),
                Edge::original(2, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn triangle_connection_probability() {
        // p2 = 1/2: connected iff at least two of the three edges are open.
        let link = LinkModel::from_p(2.0 - 3.0_f64.sqrt(), Mode::Distilled).unwrap();
        let tri = triangle();
        let mut rng = trial_rng(4, 0);
        let trials = 40_000;
        let hits = (0..trials)
            .filter(|_| percolate(&tri, &link, &mut rng).largest() == 3)
            .count();
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - 0.5).abs() < 4.0 * sigma);
    }

    #[test]
    fn zero_p_leaves_singletons() {
        let net = graph::generate_er(1000, 3.0, &mut trial_rng(1, 0)).unwrap();
        let link = LinkModel::from_p(0.0, Mode::Distilled).unwrap();
        let c = percolate(&net, &link, &mut trial_rng(1, 1));
        assert!(c.sizes.iter().all(|&s| s == 1));
        assert_eq!(c.total(), 1000);
    }

    #[test]
    fn full_occupation_gives_connected_components() {
        let net = Network::new(
            5,
            vec![
                Edge::original(0, 1),
                Edge::original(1, 2),
                Edge::original(3, 4),
            ],
        )
        .unwrap();
        let link = LinkModel::from_p(1.0, Mode::Distilled).unwrap();
        let c = percolate(&net, &link, &mut trial_rng(0, 0));
        assert_eq!(c.sizes, vec![3, 2]);
    }

    #[test]
    fn gcc_fraction_examples() {
        let full = Components { sizes: vec![10] };
        let net = graph::generate_small_world(10, 0.0, &mut trial_rng(0, 0)).unwrap();
        assert_eq!(gcc_fraction(&full, &net).unwrap().s, 1.0);
        let singletons = Components { sizes: vec![1; 10] };
        assert_eq!(gcc_fraction(&singletons, &net).unwrap().s, 0.1);

        let star = Network::new(6, (1..=5).map(|v| Edge::original(0, v)).collect()).unwrap();
        let (swapped, _) =
            apply_qswaps(&star, &Strategy::new([5]).unwrap(), &mut trial_rng(0, 0)).unwrap();
        let link = LinkModel::from_p(1.0, Mode::Distilled).unwrap();
        let c = percolate(&swapped, &link, &mut trial_rng(0, 1));
        let f = gcc_fraction(&c, &swapped).unwrap();
        assert!((f.s - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(f.s_hat, 1.0);

        let empty = Network::new(0, vec![]).unwrap();
        assert!(matches!(
            gcc_fraction(&Components { sizes: vec![] }, &empty),
            Err(Error::EmptyNetwork)
        ));
    }

    #[test]
    fn cycle_links_use_single_copy_probability() {
        // Two parallel cycle links at p: connected with 1 - (1-p)^2.
        let net = Network::new(2, vec![Edge::cycle_link(0, 1), Edge::cycle_link(0, 1)]).unwrap();
        let link = LinkModel::from_p(0.3, Mode::Distilled).unwrap();
        let mut rng = trial_rng(2, 0);
        let trials = 200_000;
        let hits = (0..trials)
            .filter(|_| percolate(&net, &link, &mut rng).largest() == 2)
            .count();
        let expected = 1.0 - 0.7 * 0.7;
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - expected).abs() < 4.0 * sigma);
    }

    #[test]
    fn zero_grid_point_gives_singletons() {
        let src = NetworkSource::Er { n: 2000, z: 2.5 };
        let r = sweep(
            &src,
            Mode::Sequential,
            &Strategy::new([2, 3]).unwrap(),
            &[0.0],
            4,
            3,
        )
        .unwrap();
        assert!(r.mean_s[0] <= 1.0 / 2000.0 + 1e-12);
        assert_eq!(r.second_largest_mean[0], 1.0 / 2000.0);
    }

    #[test]
    fn sweep_validates_inputs() {
        let src = NetworkSource::Er { n: 100, z: 2.5 };
        assert!(sweep(&src, Mode::Sequential, &Strategy::none(), &[0.5], 0, 1).is_err());
        assert!(sweep(&src, Mode::Sequential, &Strategy::none(), &[1.5], 1, 1).is_err());
    }

    #[test]
    fn peak_interpolation() {
        let grid = linear_grid(0.0, 1.0, 11);
        let curve: Vec<f64> = grid.iter().map(|x| -(x - 0.43f64).powi(2)).collect();
        assert!((peak_location(&grid, &curve).unwrap() - 0.43).abs() < 1e-12);
        let edge: Vec<f64> = grid.iter().map(|x| -x).collect();
        assert!(matches!(
            peak_location(&grid, &edge),
            Err(Error::GridDoesNotBracket { .. })
        ));
    }

    #[test]
    fn linear_grid_endpoints() {
        assert_eq!(linear_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linear_grid(0.2, 0.2, 1), vec![0.2]);
        assert!(linear_grid(0.0, 1.0, 0).is_empty());
    }
}
