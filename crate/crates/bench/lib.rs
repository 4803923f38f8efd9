//! Shared helpers for the benchmark targets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use selfcompat::graph::{Graph, NodeId};
use selfcompat::scm::{random_dag, random_linear_scm, Dataset, LinearScm, NoiseKind};
use std::collections::BTreeSet;

/// Deterministic Erdos-Renyi DAG with expected degree 2.
pub fn bench_dag(n: usize, seed: u64) -> (Graph, BTreeSet<NodeId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_dag(n, 0, 2.0, &mut rng).expect("valid bench parameters")
}

/// SCM plus a sampled dataset for end-to-end scoring benchmarks.
pub fn bench_dataset(n: usize, m: usize, seed: u64) -> (LinearScm, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dag, observed) = random_dag(n, 0, 2.0, &mut rng).unwrap();
    let scm = random_linear_scm(&dag, &observed, NoiseKind::Gaussian, &mut rng).unwrap();
    let data = scm.sample(m, &mut rng);
    (scm, data)
}

/// Half of the nodes, as a projection target.
pub fn half_subset(g: &Graph) -> BTreeSet<NodeId> {
    g.nodes().iter().take(g.node_count() / 2).cloned().collect()
}
