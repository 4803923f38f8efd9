//! Self-compatibility evaluation for causal discovery algorithms.
//!
//! A discovery algorithm applied to a subset of variables should produce the
//! latent projection of what it finds on all of them; disagreement falsifies
//! its output without ground truth. This crate provides the graph classes
//! (DAG, ADMG, CPDAG, MAG, PAG) under one endpoint-mark representation, the
//! separation/adjustment/projection machinery those checks need, linear SCMs
//! for synthetic benchmarks, discovery frontends, the incompatibility scores
//! `kappa_g` and `kappa_i`, and an experiment harness.
//!
//! Graphs are immutable after construction and every query is read-only, so
//! values can be shared freely across threads.

pub mod adjustment;
pub mod discovery;
pub mod graph;
pub mod harness;
pub mod projection;
pub mod scm;
pub mod scores;
pub mod separation;
pub mod stats;

pub use discovery::{AlgorithmHandle, CiBackend, DiscoveryOutcome};
pub use graph::{Edge, Graph, GraphError, GraphKind, Mark, NodeId, Violation};
pub use scm::{Dataset, LinearScm, NoiseKind};
pub use scores::{ScoreReport, SubsetPlan};
