//! Concrete networks: random-graph generators and edge-list ingestion.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfun::DegreeDistribution;

/// Which conversion probability an edge carries during percolation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    /// Two copies of the state; occupied with `p2`.
    Original,
    /// Single-copy link created by a q-swap; occupied with `p`.
    CycleLink,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeStatus {
    #[default]
    Untouched,
    /// Performed a q-swap and is now detached.
    SwappedCenter,
    /// Neighbour of a swapped center; may not swap itself.
    Blocked,
}

impl NodeStatus {
    fn as_str(self) -> &'static str {
        match self {
            NodeStatus::Untouched => "untouched",
            NodeStatus::SwappedCenter => "swapped",
            NodeStatus::Blocked => "blocked",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn original(a: usize, b: usize) -> Self {
        Self {
            a: a as u32,
            b: b as u32,
            kind: EdgeKind::Original,
        }
    }

    pub fn cycle_link(a: usize, b: usize) -> Self {
        Self {
            a: a as u32,
            b: b as u32,
            kind: EdgeKind::CycleLink,
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.a == self.b
    }
}

/// Undirected multigraph with per-node swap status and a CSR incidence index.
///
/// A self-loop contributes two to the degree of its vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    n: usize,
    edges: Vec<Edge>,
    status: Vec<NodeStatus>,
    offsets: Vec<usize>,
    /// `(neighbour, edge index)` per incidence, grouped by vertex.
    incidences: Vec<(u32, u32)>,
    /// Original vertex ids for ingested networks.
    labels: Option<Vec<u64>>,
}

impl Network {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::with_status(n, edges, vec![NodeStatus::Untouched; n])
    }

    pub fn with_status(n: usize, edges: Vec<Edge>, status: Vec<NodeStatus>) -> Result<Self> {
        if n > u32::MAX as usize || edges.len() > u32::MAX as usize {
            return Err(Error::InvalidParameter(
                "network too large for 32-bit indices".into(),
            ));
        }
        if status.len() != n {
            return Err(Error::InvalidParameter(format!(
                "status vector has {} entries for {n} vertices",
                status.len()
            )));
        }
        if let Some(e) = edges
            .iter()
            .find(|e| e.a as usize >= n || e.b as usize >= n)
        {
            return Err(Error::InvalidParameter(format!(
                "edge ({}, {}) out of range for {n} vertices",
                e.a, e.b
            )));
        }
        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.a as usize] += 1;
            degree[e.b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut incidences = vec![(0u32, 0u32); offsets[n]];
        for (i, e) in edges.iter().enumerate() {
            incidences[cursor[e.a as usize]] = (e.b, i as u32);
            cursor[e.a as usize] += 1;
            incidences[cursor[e.b as usize]] = (e.a, i as u32);
            cursor[e.b as usize] += 1;
        }
        Ok(Self {
            n,
            edges,
            status,
            offsets,
            incidences,
            labels: None,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// `(neighbour, edge index)` pairs; a self-loop appears twice.
    pub fn incident(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.incidences[self.offsets[v]..self.offsets[v + 1]]
            .iter()
            .map(|&(u, e)| (u as usize, e as usize))
    }

    pub fn status(&self, v: usize) -> NodeStatus {
        self.status[v]
    }

    pub fn statuses(&self) -> &[NodeStatus] {
        &self.status
    }

    pub fn count_status(&self, s: NodeStatus) -> usize {
        self.status.iter().filter(|&&x| x == s).count()
    }

    pub fn labels(&self) -> Option<&[u64]> {
        self.labels.as_deref()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Empirical degree distribution.
    pub fn degree_distribution(&self) -> Result<DegreeDistribution<f64>> {
        DegreeDistribution::from_degrees(self.degrees())
    }

    /// Writes `u v` lines (original edges first, cycle links after a marker
    /// comment) readable by [`load_edge_list`].
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        let _ = writeln!(out, "# {} vertices, {} edges", self.n, self.edges.len());
        for kind in [EdgeKind::Original, EdgeKind::CycleLink] {
            if kind == EdgeKind::CycleLink && self.edges.iter().any(|e| e.kind == kind) {
                out.push_str("# cycle links\n");
            }
            for e in self.edges.iter().filter(|e| e.kind == kind) {
                let _ = writeln!(out, "{} {}", e.a, e.b);
            }
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Sidecar file of `vertex status` lines.
    pub fn write_statuses(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "# vertex status").map_err(io)?;
        for (v, s) in self.status.iter().enumerate() {
            writeln!(w, "{v} {}", s.as_str()).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// G(n, z/n): each vertex pair is joined independently with probability `z/n`.
///
/// Uses geometric skipping over the pair sequence, so the cost is linear in
/// the number of edges.
pub fn generate_er<R: Rng + ?Sized>(n: usize, z: f64, rng: &mut R) -> Result<Network> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "ER graph needs n >= 2, got {n}"
        )));
    }
    if !(z > 0.0 && z < n as f64) {
        return Err(Error::InvalidParameter(format!(
            "ER mean degree must lie in (0, n), got {z}"
        )));
    }
    let p = z / n as f64;
    let log_q = (1.0 - p).ln();
    let mut edges = Vec::with_capacity((n as f64 * z / 2.0 * 1.1) as usize + 16);
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.gen();
        let skip = ((1.0 - r).ln() / log_q).floor();
        w += 1 + if skip.is_finite() {
            skip as i64
        } else {
            i64::MAX / 4
        };
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push(Edge::original(v, w as usize));
        }
    }
    Network::new(n, edges)
}

/// Configuration model: sample `n` degrees from `dist` and pair stubs uniformly.
///
/// An odd stub total is fixed by resampling one vertex's degree. Self-loops
/// and multi-edges are kept unless `erase` is set, in which case offending
/// pairs are re-paired at random for a bounded number of rounds and any
/// leftovers dropped.
pub fn generate_configuration<R: Rng + ?Sized>(
    n: usize,
    dist: &DegreeDistribution<f64>,
    erase: bool,
    rng: &mut R,
) -> Result<Network> {
    const PARITY_RETRIES: usize = 10_000;
    const ERASE_ROUNDS: usize = 100;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "configuration model needs n >= 2, got {n}"
        )));
    }
    let sampler = dist.sampler();
    let mut degrees: Vec<usize> = (0..n).map(|_| sampler.sample(rng)).collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        let mut fixed = false;
        for _ in 0..PARITY_RETRIES {
            let v = rng.gen_range(0..n);
            let d = sampler.sample(rng);
            if d % 2 != degrees[v] % 2 {
                degrees[v] = d;
                fixed = true;
                break;
            }
        }
        if !fixed {
            return Err(Error::InvalidParameter(format!(
                "could not make the stub count even after {PARITY_RETRIES} resamples ({dist})"
            )));
        }
    }
    let mut stubs: Vec<u32> = Vec::with_capacity(degrees.iter().sum());
    for (v, &d) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(v as u32, d));
    }
    stubs.shuffle(rng);
    let mut edges: Vec<Edge> = stubs
        .chunks_exact(2)
        .map(|c| Edge::original(c[0] as usize, c[1] as usize))
        .collect();

    if erase {
        edges = erase_defects(edges, rng, ERASE_ROUNDS);
    }
    Network::new(n, edges)
}

fn erase_defects<R: Rng + ?Sized>(edges: Vec<Edge>, rng: &mut R, rounds: usize) -> Vec<Edge> {
    let key = |a: u32, b: u32| if a < b { (a, b) } else { (b, a) };
    let mut seen = std::collections::HashSet::with_capacity(edges.len());
    let mut kept = Vec::with_capacity(edges.len());
    let mut loose: Vec<u32> = Vec::new();
    for e in edges {
        if e.a != e.b && seen.insert(key(e.a, e.b)) {
            kept.push(e);
        } else {
            loose.push(e.a);
            loose.push(e.b);
        }
    }
    for _ in 0..rounds {
        if loose.is_empty() {
            break;
        }
        loose.shuffle(rng);
        let mut next = Vec::new();
        for c in loose.chunks_exact(2) {
            if c[0] != c[1] && seen.insert(key(c[0], c[1])) {
                kept.push(Edge::original(c[0] as usize, c[1] as usize));
            } else {
                next.extend_from_slice(c);
            }
        }
        loose = next;
    }
    kept
}

/// Ring of `n` vertices plus `n` shortcut slots, each filled independently
/// with probability `phi` by an edge between a uniformly random pair of
/// distinct vertices. Shortcuts may duplicate existing edges.
pub fn generate_small_world<R: Rng + ?Sized>(n: usize, phi: f64, rng: &mut R) -> Result<Network> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "small-world ring needs n >= 3, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::InvalidParameter(format!(
            "shortcut probability must lie in [0, 1], got {phi}"
        )));
    }
    let mut edges: Vec<Edge> = (0..n).map(|v| Edge::original(v, (v + 1) % n)).collect();
    for _ in 0..n {
        if rng.gen::<f64>() < phi {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            edges.push(Edge::original(a, b));
        }
    }
    Network::new(n, edges)
}

/// Reads an edge list of integer vertex-id pairs.
///
/// The result is a simple undirected graph: both directions of an edge are
/// merged, duplicates removed and self-loops dropped (their vertex is kept).
/// With `cutoff = Some(c)`, every vertex whose degree is at least `c` is
/// removed together with its edges, judged once on the degrees before
/// removal; vertices left isolated stay. Vertices are renumbered densely in
/// increasing order of their original id.
pub fn load_edge_list(path: impl AsRef<Path>, cutoff: Option<usize>) -> Result<Network> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut raw: Vec<(u64, u64)> = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') || body.starts_with('%') {
            continue;
        }
        let mut cols = body.split_whitespace();
        // Extra columns (weights, timestamps) are ignored.
        let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
            return Err(parse_err(format!("expected `u v`, got {body:?}")));
        };
        let a: u64 = a
            .parse()
            .map_err(|e| parse_err(format!("bad vertex id {a:?}: {e}")))?;
        let b: u64 = b
            .parse()
            .map_err(|e| parse_err(format!("bad vertex id {b:?}: {e}")))?;
        raw.push((a, b));
    }
    build_simple(raw, cutoff)
}

fn build_simple(raw: Vec<(u64, u64)>, cutoff: Option<usize>) -> Result<Network> {
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    ids.sort_unstable();
    ids.dedup();

    let mut pairs: Vec<(u64, u64)> = raw
        .into_iter()
        .filter(|(a, b)| a != b)
        .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();

    if let Some(c) = cutoff {
        let mut degree: HashMap<u64, usize> = HashMap::new();
        for &(a, b) in &pairs {
            *degree.entry(a).or_default() += 1;
            *degree.entry(b).or_default() += 1;
        }
        let removed = |v: u64| degree.get(&v).copied().unwrap_or(0) >= c;
        pairs.retain(|&(a, b)| !removed(a) && !removed(b));
        ids.retain(|&v| !removed(v));
    }

    let index: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let edges = pairs
        .iter()
        .map(|(a, b)| Edge::original(index[a], index[b]))
        .collect();
    let mut net = Network::new(ids.len(), edges)?;
    net.labels = Some(ids);
    Ok(net)
}
