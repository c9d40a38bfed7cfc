//! The q-swap transformation: a vertex of degree `q` measures its qubits so
//! that its `q` neighbours become joined in a cycle of single-copy links, and
//! the vertex itself is left with no edges. No two adjacent vertices swap.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::analytic::Strategy;
use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeKind, Network, NodeStatus};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SwapReport {
    /// Vertices that performed a swap, ascending.
    pub swapped_centers: Vec<usize>,
    /// Neighbours of swapped centers, ascending.
    pub blocked: Vec<usize>,
    /// `(degree-q vertices swapped) / (degree-q vertices)` for each active q;
    /// `None` when the network has no vertex of that degree.
    pub eta_empirical: BTreeMap<usize, Option<f64>>,
    /// Number of centers left without edges.
    pub detached_count: usize,
}

impl SwapReport {
    pub fn eta(&self, q: usize) -> Option<f64> {
        self.eta_empirical.get(&q).copied().flatten()
    }
}

/// Fraction of degree-`q` vertices that were swapped.
pub fn eta_empirical(report: &SwapReport, q: usize) -> Option<f64> {
    report.eta(q)
}

fn is_candidate(net: &Network, v: usize, strategy: &Strategy, scratch: &mut Vec<usize>) -> bool {
    let q = net.degree(v);
    if !strategy.contains(q) || net.status(v) != NodeStatus::Untouched {
        return false;
    }
    scratch.clear();
    scratch.extend(net.incident(v).map(|(u, _)| u));
    if scratch.contains(&v) {
        return false;
    }
    scratch.sort_unstable();
    scratch.windows(2).all(|w| w[0] != w[1])
}

/// Applies the strategy's q-swaps greedily in uniformly random vertex order.
///
/// A vertex is a candidate when its degree is active, it is untouched, and it
/// has neither a self-loop nor a parallel edge. Each candidate that is still
/// untouched when visited replaces its star by a cycle over its neighbours in
/// random cyclic order (for `q = 2`, two parallel links between the two
/// neighbours) and blocks those neighbours.
pub fn apply_qswaps<R: Rng + ?Sized>(
    net: &Network,
    strategy: &Strategy,
    rng: &mut R,
) -> Result<(Network, SwapReport)> {
    if net.edges().iter().any(|e| e.kind != EdgeKind::Original) {
        return Err(Error::InvalidParameter(
            "q-swaps apply only to networks of original edges".into(),
        ));
    }
    let n = net.n_vertices();
    let mut scratch = Vec::new();
    let mut order: Vec<usize> = (0..n)
        .filter(|&v| is_candidate(net, v, strategy, &mut scratch))
        .collect();
    order.shuffle(rng);

    let mut status = net.statuses().to_vec();
    let mut removed = vec![false; net.n_edges()];
    let mut cycle_edges = Vec::new();
    let mut neighbours = Vec::new();
    for &center in &order {
        if status[center] != NodeStatus::Untouched {
            continue;
        }
        neighbours.clear();
        for (u, e) in net.incident(center) {
            removed[e] = true;
            neighbours.push(u);
        }
        neighbours.shuffle(rng);
        let q = neighbours.len();
        for j in 0..q {
            cycle_edges.push(Edge::cycle_link(neighbours[j], neighbours[(j + 1) % q]));
        }
        status[center] = NodeStatus::SwappedCenter;
        for &u in &neighbours {
            debug_assert_ne!(
                status[u],
                NodeStatus::SwappedCenter,
                "adjacent swap centers"
            );
            status[u] = NodeStatus::Blocked;
        }
    }

    let edges: Vec<Edge> = net
        .edges()
        .iter()
        .zip(&removed)
        .filter(|(_, &r)| !r)
        .map(|(e, _)| *e)
        .chain(cycle_edges)
        .collect();

    let swapped_centers: Vec<usize> = (0..n)
        .filter(|&v| status[v] == NodeStatus::SwappedCenter)
        .collect();
    let blocked: Vec<usize> = (0..n)
        .filter(|&v| status[v] == NodeStatus::Blocked)
        .collect();
    let eta_empirical = strategy
        .iter()
        .map(|q| {
            let (total, swapped) =
                (0..n)
                    .filter(|&v| net.degree(v) == q)
                    .fold((0usize, 0usize), |(t, s), v| {
                        (
                            t + 1,
                            s + usize::from(status[v] == NodeStatus::SwappedCenter),
                        )
                    });
            (q, (total > 0).then(|| swapped as f64 / total as f64))
        })
        .collect();
    let report = SwapReport {
        detached_count: swapped_centers.len(),
        swapped_centers,
        blocked,
        eta_empirical,
    };
    Ok((Network::with_status(n, edges, status)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::DegreeDistribution;
    use crate::graph::{generate_configuration, generate_er, generate_small_world};
    use crate::rng::trial_rng;

    fn star(leaves: usize) -> Network {
        Network::new(
            leaves + 1,
            (1..=leaves).map(|v| Edge::original(0, v)).collect(),
        )
        .unwrap()
    }

    fn strat(qs: &[usize]) -> Strategy {
        Strategy::new(qs.iter().copied()).unwrap()
    }

    #[test]
    fn five_star_becomes_five_cycle() {
        let (out, report) = apply_qswaps(&star(5), &strat(&[5]), &mut trial_rng(1, 0)).unwrap();
        assert_eq!(out.degree(0), 0);
        assert_eq!(out.status(0), NodeStatus::SwappedCenter);
        for v in 1..=5 {
            assert_eq!(out.degree(v), 2);
            assert_eq!(out.status(v), NodeStatus::Blocked);
        }
        assert_eq!(out.n_edges(), 5);
        assert!(out.edges().iter().all(|e| e.kind == EdgeKind::CycleLink));
        // Connected as a single cycle: walk it.
        let mut seen = [false; 6];
        let mut stack = vec![1];
        while let Some(v) = stack.pop() {
            if !std::mem::replace(&mut seen[v], true) {
                stack.extend(out.incident(v).map(|(u, _)| u));
            }
        }
        assert!(seen[1..].iter().all(|&s| s));
        assert_eq!(report.detached_count, 1);
        assert_eq!(report.eta(5), Some(1.0));
    }

    #[test]
    fn path_two_swap_gives_parallel_links() {
        // a=0, c=1, b=2
        let net = Network::new(3, vec![Edge::original(0, 1), Edge::original(1, 2)]).unwrap();
        let (out, _) = apply_qswaps(&net, &strat(&[2]), &mut trial_rng(1, 0)).unwrap();
        assert_eq!(out.degree(1), 0);
        assert_eq!(out.n_edges(), 2);
        for e in out.edges() {
            assert_eq!(e.kind, EdgeKind::CycleLink);
            assert_eq!((e.a.min(e.b), e.a.max(e.b)), (0, 2));
        }
    }

    #[test]
    fn empty_strategy_is_identity() {
        let net = generate_er(1000, 3.0, &mut trial_rng(2, 0)).unwrap();
        let (out, report) = apply_qswaps(&net, &Strategy::none(), &mut trial_rng(2, 1)).unwrap();
        assert_eq!(out, net);
        assert_eq!(report.detached_count, 0);
    }

    #[test]
    fn ineligible_centers_are_skipped() {
        // Vertex 0 has a parallel edge to 1 and degree 3; vertex 2 has a self-loop.
        let net = Network::new(
            4,
            vec![
                Edge::original(0, 1),
                Edge::original(0, 1),
                Edge::original(0, 3),
                Edge::original(2, 2),
            ],
        )
        .unwrap();
        let (out, report) = apply_qswaps(&net, &strat(&[2, 3]), &mut trial_rng(0, 0)).unwrap();
        assert_eq!(out, net);
        assert!(report.swapped_centers.is_empty());
    }

    #[test]
    fn transformed_networks_are_rejected() {
        let (out, _) = apply_qswaps(&star(3), &strat(&[3]), &mut trial_rng(0, 0)).unwrap();
        assert!(apply_qswaps(&out, &strat(&[2]), &mut trial_rng(0, 0)).is_err());
    }

    #[test]
    fn isolated_stars_always_swap() {
        let mut edges = Vec::new();
        for s in 0..10 {
            let c = s * 4;
            for l in 1..=3 {
                edges.push(Edge::original(c, c + l));
            }
        }
        let net = Network::new(40, edges).unwrap();
        let (_, report) = apply_qswaps(&net, &strat(&[3]), &mut trial_rng(5, 0)).unwrap();
        assert_eq!(report.eta(3), Some(1.0));
        assert_eq!(report.eta(4), None);
    }

    #[test]
    fn structural_invariants_on_random_networks() {
        let nets = [
            generate_er(20_000, 2.5, &mut trial_rng(1, 0)).unwrap(),
            generate_configuration(
                20_000,
                &DegreeDistribution::power_law_cutoff(1.0, 6.0, 1).unwrap(),
                false,
                &mut trial_rng(1, 1),
            )
            .unwrap(),
            generate_small_world(20_000, 0.25, &mut trial_rng(1, 2)).unwrap(),
        ];
        for net in &nets {
            for s in [strat(&[2]), strat(&[2, 3]), strat(&[3, 4, 5])] {
                let (out, report) = apply_qswaps(net, &s, &mut trial_rng(9, 0)).unwrap();
                assert_eq!(out.n_edges(), net.n_edges());
                assert_eq!(
                    out.degrees().iter().sum::<usize>(),
                    net.degrees().iter().sum::<usize>()
                );
                for &c in &report.swapped_centers {
                    assert_eq!(out.degree(c), 0);
                    assert!(s.contains(net.degree(c)));
                    for (u, _) in net.incident(c) {
                        assert_ne!(out.status(u), NodeStatus::SwappedCenter);
                    }
                }
                let cycle_links = out
                    .edges()
                    .iter()
                    .filter(|e| e.kind == EdgeKind::CycleLink)
                    .count();
                let star_edges: usize = report.swapped_centers.iter().map(|&c| net.degree(c)).sum();
                assert_eq!(cycle_links, star_edges);
                assert!(report
                    .blocked
                    .iter()
                    .all(|b| report.swapped_centers.binary_search(b).is_err()));
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let net = generate_er(5_000, 2.5, &mut trial_rng(3, 0)).unwrap();
        let a = apply_qswaps(&net, &strat(&[2, 3]), &mut trial_rng(4, 0)).unwrap();
        let b = apply_qswaps(&net, &strat(&[2, 3]), &mut trial_rng(4, 0)).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn ring_swap_fraction_near_adsorption_limit() {
        // Random sequential selection on a ring saturates at (1 - e^-2)/2 ~ 0.432.
        let ring = generate_small_world(100_000, 0.0, &mut trial_rng(0, 0)).unwrap();
        let (_, report) = apply_qswaps(&ring, &strat(&[2]), &mut trial_rng(6, 0)).unwrap();
        let eta = report.eta(2).unwrap();
        assert!(
            (eta - (1.0 - (-2.0_f64).exp()) / 2.0).abs() < 0.01,
            "eta {eta}"
        );
        assert!((eta - 0.5).abs() < 0.1);
    }
}
