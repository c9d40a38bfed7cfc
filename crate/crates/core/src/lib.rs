//! Entanglement percolation on complex networks.
//!
//! Two complementary routes:
//!
//! * [`analytic`]: generating-function solutions for random graphs with an
//!   arbitrary uncorrelated degree distribution, before and after q-swap
//!   strategies. Generic over the scalar type ([`Real`], `f32`/`f64`).
//! * [`graph`], [`qswap`], [`percolation`]: concrete networks, the q-swap
//!   transformation and Monte Carlo bond percolation with union-find.
//!
//! Edges hold two copies of a partially entangled pure state. The
//! [`link`] module maps the state to the occupation probabilities `p`
//! (single copy) and `p2` (both copies).

pub mod analytic;
pub mod error;
pub mod genfun;
pub mod graph;
pub mod link;
pub mod percolation;
pub mod qswap;
pub mod real;
mod rng;
mod roots;

pub use analytic::{EtaModel, PercSolution, Strategy, SwappedSolution};
pub use error::{Error, Result};
pub use genfun::{DegreeDistribution, DegreeSampler, Family};
pub use graph::{EdgeKind, Network, NodeStatus};
pub use link::{LinkModel, Mode};
pub use percolation::{NetworkSource, PcEstimate, SweepResult};
pub use qswap::SwapReport;
pub use real::Real;
pub use rng::{trial_rng, TrialRng};

pub type DegreeDistributionF64 = DegreeDistribution<f64>;
pub type DegreeDistributionF32 = DegreeDistribution<f32>;
pub type LinkModelF64 = LinkModel<f64>;
pub type LinkModelF32 = LinkModel<f32>;
pub type PercSolutionF64 = PercSolution<f64>;
pub type SwappedSolutionF64 = SwappedSolution<f64>;
