//! Causal discovery frontends: a built-in PC (sample, population and graph
//! oracle CI backends), entropy-ordering baselines, and an adapter that runs
//! external algorithms through the CSV-in / interchange-JSON-out contract.

use crate::graph::{Graph, GraphError, GraphKind, NodeId};
use crate::projection::for_each_combination;
use crate::scm::{Dataset, LinearScm, ScmError};
use crate::separation::{is_m_separated, PathQuery, SeparationError};
use crate::stats::{self, StatsError};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;
use std::process::Command;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiscoveryError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error("need at least two nodes")]
    TooFewNodes,
    #[error("subset is not contained in the dataset columns: `{0}`")]
    SubsetNotInColumns(String),
    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("external adapter: {0}")]
    External(String),
}

/// Conditional-independence backend for constraint-based discovery.
pub enum CiBackend {
    /// Fisher-Z on a dataset, with the correlation matrix precomputed.
    Sample {
        corr: DMatrix<f64>,
        names: Vec<NodeId>,
        m: usize,
        alpha: f64,
    },
    /// Exact d/m-separation on a known graph (population limit under
    /// faithfulness).
    Oracle(Graph),
    /// Exact zero-partial-correlation oracle from an SCM's closed-form
    /// covariance; realizes population-limit behaviour of distributions that
    /// need not be faithful.
    Population {
        cov: DMatrix<f64>,
        names: Vec<NodeId>,
    },
}

impl CiBackend {
    pub fn sample(data: &Dataset, alpha: f64) -> Self {
        let cov = data.covariance_matrix();
        let n = cov.nrows();
        let corr = DMatrix::from_fn(n, n, |i, j| {
            cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt()
        });
        CiBackend::Sample {
            corr,
            names: data.columns().to_vec(),
            m: data.n_samples(),
            alpha,
        }
    }

    pub fn oracle(truth: Graph) -> Self {
        CiBackend::Oracle(truth)
    }

    pub fn population(scm: &LinearScm) -> Self {
        CiBackend::Population {
            cov: scm.covariance(),
            names: scm.node_order().to_vec(),
        }
    }

    /// Is x independent of y given z?
    pub fn independent(
        &self,
        x: &str,
        y: &str,
        z: &BTreeSet<NodeId>,
    ) -> Result<bool, DiscoveryError> {
        match self {
            CiBackend::Sample {
                corr,
                names,
                m,
                alpha,
            } => {
                let r = partial_corr_from(corr, names, x, y, z)?;
                Ok(stats::fisher_z_from_r(r, *m, z.len(), *alpha).independent)
            }
            CiBackend::Oracle(g) => {
                let q = PathQuery {
                    x: x.into(),
                    y: y.into(),
                    conditioning: z.clone(),
                };
                Ok(is_m_separated(g, &q)?)
            }
            CiBackend::Population { cov, names } => {
                let r = partial_corr_from(cov, names, x, y, z)?;
                Ok(r.abs() < 1e-9)
            }
        }
    }
}

fn partial_corr_from(
    matrix: &DMatrix<f64>,
    names: &[NodeId],
    x: &str,
    y: &str,
    z: &BTreeSet<NodeId>,
) -> Result<f64, DiscoveryError> {
    let find = |n: &str| -> Result<usize, DiscoveryError> {
        names
            .iter()
            .position(|c| c.as_str() == n)
            .ok_or_else(|| DiscoveryError::Stats(StatsError::UnknownColumn(n.to_string())))
    };
    let mut idx = vec![find(x)?, find(y)?];
    for c in z {
        idx.push(find(c.as_str())?);
    }
    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |i, j| matrix[(idx[i], idx[j])]);
    Ok(stats::partial_correlation_from_cov(&sub)?)
}

/// PC with the order-independent (stable) skeleton phase, v-structure
/// orientation from recorded separating sets, and Meek closure. Conflicting
/// v-structure claims leave the edge undirected.
pub fn pc(backend: &CiBackend, nodes: &BTreeSet<NodeId>) -> Result<Graph, DiscoveryError> {
    if nodes.len() < 2 {
        return Err(DiscoveryError::TooFewNodes);
    }
    if let CiBackend::Sample { m, .. } = backend {
        if *m <= nodes.len() {
            return Err(DiscoveryError::Stats(StatsError::InsufficientSamples {
                m: *m,
                p: nodes.len(),
            }));
        }
    }
    let names: Vec<NodeId> = nodes.iter().cloned().collect();
    let n = names.len();
    let mut adjacent = vec![vec![true; n]; n];
    for (i, row) in adjacent.iter_mut().enumerate() {
        row[i] = false;
    }
    let mut sepsets: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();

    let mut level = 0usize;
    loop {
        // Snapshot adjacency for order independence within this level.
        let snapshot = adjacent.clone();
        let mut any_testable = false;
        for x in 0..n {
            for y in 0..n {
                if x == y || !adjacent[x][y] {
                    continue;
                }
                let candidates: Vec<usize> = (0..n)
                    .filter(|&v| v != y && snapshot[x][v])
                    .collect();
                if candidates.len() < level {
                    continue;
                }
                any_testable = true;
                let mut separated = None;
                let mut failure: Option<DiscoveryError> = None;
                for_each_combination(candidates.len(), level, &mut |combo| {
                    if separated.is_some() || failure.is_some() {
                        return;
                    }
                    let z: BTreeSet<NodeId> =
                        combo.iter().map(|&c| names[candidates[c]].clone()).collect();
                    match backend.independent(names[x].as_str(), names[y].as_str(), &z) {
                        Ok(true) => {
                            separated =
                                Some(combo.iter().map(|&c| candidates[c]).collect::<BTreeSet<_>>())
                        }
                        Ok(false) => {}
                        // Singular conditioning sets carry no independence
                        // evidence; other failures propagate.
                        Err(DiscoveryError::Stats(StatsError::Singular(_))) => {}
                        Err(e) => failure = Some(e),
                    }
                });
                if let Some(e) = failure {
                    return Err(e);
                }
                if let Some(z) = separated {
                    adjacent[x][y] = false;
                    adjacent[y][x] = false;
                    let key = (x.min(y), x.max(y));
                    sepsets.insert(key, z);
                }
            }
        }
        if !any_testable {
            break;
        }
        level += 1;
        if level >= n {
            break;
        }
    }

    // V-structures: unshielded x - k - y with k outside sepset(x, y).
    let mut claims: BTreeSet<(usize, usize)> = BTreeSet::new();
    for k in 0..n {
        for x in 0..n {
            for y in (x + 1)..n {
                if x == k || y == k || !adjacent[x][k] || !adjacent[y][k] || adjacent[x][y] {
                    continue;
                }
                if let Some(sep) = sepsets.get(&(x, y)) {
                    if !sep.contains(&k) {
                        claims.insert((x, k));
                        claims.insert((y, k));
                    }
                }
            }
        }
    }
    let mut pdag = crate::projection::pdag_from_skeleton(n, &adjacent);
    for &(a, b) in &claims {
        if claims.contains(&(b, a)) {
            log::debug!(
                "pc: conflicting v-structure orientations on {} - {}, leaving undirected",
                names[a],
                names[b]
            );
            continue;
        }
        pdag.orient(a, b);
    }
    pdag.meek_closure();
    let name_strings: Vec<String> = names.iter().map(|s| s.0.clone()).collect();
    Ok(pdag.to_graph(GraphKind::CPDAG, &name_strings)?)
}

/// Complete DAG directed from lower to higher Gaussian plug-in entropy,
/// which is monotone in the sample variance. Ties break by column name.
pub fn entropy_dag(data: &Dataset) -> Result<Graph, DiscoveryError> {
    let order = entropy_order(data)?;
    let mut g = Graph::new(
        GraphKind::DAG,
        data.columns().iter().map(|c| c.as_str()),
    )?;
    for i in 0..order.len() {
        for j in (i + 1)..order.len() {
            g.add_directed(order[i].as_str(), order[j].as_str())?;
        }
    }
    Ok(g)
}

/// Entropy-ordered complete DAG plus a bidirected edge on every pair. No
/// interventional effect is identifiable in such a graph.
pub fn entropy_admg(data: &Dataset) -> Result<Graph, DiscoveryError> {
    let order = entropy_order(data)?;
    let mut g = Graph::new(
        GraphKind::ADMG,
        data.columns().iter().map(|c| c.as_str()),
    )?;
    for i in 0..order.len() {
        for j in (i + 1)..order.len() {
            g.add_directed(order[i].as_str(), order[j].as_str())?;
            g.add_bidirected(order[i].as_str(), order[j].as_str())?;
        }
    }
    Ok(g)
}

fn entropy_order(data: &Dataset) -> Result<Vec<NodeId>, DiscoveryError> {
    let m = data.n_samples() as f64;
    let mut keyed: Vec<(f64, NodeId)> = Vec::with_capacity(data.columns().len());
    for c in data.columns() {
        let col = data.column(c.as_str())?;
        let mean = col.iter().sum::<f64>() / m;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
        if var <= 0.0 {
            return Err(DiscoveryError::ZeroVariance(c.as_str().to_string()));
        }
        keyed.push((var, c.clone()));
    }
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    Ok(keyed.into_iter().map(|(_, c)| c).collect())
}

/// How a discovery run may be invoked by the harness.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AlgorithmHandle {
    BuiltinPc { alpha: f64 },
    EntropyDag,
    EntropyAdmg,
    /// Command template with `{input_csv}` and `{output_json}` placeholders.
    External { command: String },
}

/// A discovery result: a graph, or the explicit assumptions-violated token.
#[derive(Debug, Clone, PartialEq)]
pub enum DiscoveryOutcome {
    Graph(Graph),
    Bot { diagnostic: String },
}

impl DiscoveryOutcome {
    pub fn graph(&self) -> Option<&Graph> {
        match self {
            DiscoveryOutcome::Graph(g) => Some(g),
            DiscoveryOutcome::Bot { .. } => None,
        }
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, DiscoveryOutcome::Bot { .. })
    }
}

/// Restricts the dataset to `subset` and dispatches to the handle. External
/// failures and malformed outputs map to the bot token with a diagnostic;
/// a subset outside the columns is a caller error.
pub fn run_algorithm(
    handle: &AlgorithmHandle,
    data: &Dataset,
    subset: &BTreeSet<NodeId>,
) -> Result<DiscoveryOutcome, DiscoveryError> {
    let columns = data.column_set();
    for s in subset {
        if !columns.contains(s) {
            return Err(DiscoveryError::SubsetNotInColumns(s.as_str().to_string()));
        }
    }
    let restricted = data.restrict(subset)?;
    match handle {
        AlgorithmHandle::BuiltinPc { alpha } => {
            let backend = CiBackend::sample(&restricted, *alpha);
            Ok(DiscoveryOutcome::Graph(pc(&backend, subset)?))
        }
        AlgorithmHandle::EntropyDag => Ok(DiscoveryOutcome::Graph(entropy_dag(&restricted)?)),
        AlgorithmHandle::EntropyAdmg => Ok(DiscoveryOutcome::Graph(entropy_admg(&restricted)?)),
        AlgorithmHandle::External { command } => run_external(command, &restricted),
    }
}

fn run_external(command: &str, data: &Dataset) -> Result<DiscoveryOutcome, DiscoveryError> {
    let base = std::env::var_os("SELFCOMPAT_TMPDIR")
        .map(std::path::PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let dir = tempfile::Builder::new()
        .prefix("selfcompat-ext-")
        .tempdir_in(base)
        .map_err(|e| DiscoveryError::External(format!("tempdir: {e}")))?;
    let input = dir.path().join("input.csv");
    let output = dir.path().join("output.json");
    {
        let mut f = std::fs::File::create(&input)
            .map_err(|e| DiscoveryError::External(format!("write input: {e}")))?;
        let mut buf = Vec::new();
        data.to_csv(&mut buf)?;
        f.write_all(&buf)
            .map_err(|e| DiscoveryError::External(format!("write input: {e}")))?;
    }
    let parts: Vec<String> = command
        .split_whitespace()
        .map(|tok| {
            tok.replace("{input_csv}", &input.to_string_lossy())
                .replace("{output_json}", &output.to_string_lossy())
        })
        .collect();
    if parts.is_empty() {
        return Err(DiscoveryError::External("empty command template".into()));
    }
    let status = Command::new(&parts[0]).args(&parts[1..]).status();
    let status = match status {
        Ok(s) => s,
        Err(e) => {
            return Ok(DiscoveryOutcome::Bot {
                diagnostic: format!("failed to launch `{}`: {e}", parts[0]),
            })
        }
    };
    if !status.success() {
        return Ok(DiscoveryOutcome::Bot {
            diagnostic: format!("external command exited with {status}"),
        });
    }
    let text = match std::fs::read_to_string(&output) {
        Ok(t) => t,
        Err(e) => {
            return Ok(DiscoveryOutcome::Bot {
                diagnostic: format!("missing output file: {e}"),
            })
        }
    };
    if text.trim() == "BOT" {
        return Ok(DiscoveryOutcome::Bot {
            diagnostic: "algorithm declared its assumptions violated".into(),
        });
    }
    match Graph::decode(&text) {
        Ok(g) => Ok(DiscoveryOutcome::Graph(g)),
        Err(e) => Ok(DiscoveryOutcome::Bot {
            diagnostic: format!("malformed interchange document: {e}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::dag_to_cpdag;
    use crate::scm::{unfaithful_fig1_scm, LinearScm, NoiseKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn node_set(names: &[&str]) -> BTreeSet<NodeId> {
        names.iter().map(|&s| NodeId::from(s)).collect()
    }

    #[test]
    fn oracle_pc_identifies_collider() {
        let truth = Graph::parse(GraphKind::DAG, &["X", "Y", "Z"], "X -> Z, Y -> Z").unwrap();
        let backend = CiBackend::oracle(truth.clone());
        let out = pc(&backend, &node_set(&["X", "Y", "Z"])).unwrap();
        assert_eq!(out, dag_to_cpdag(&truth).unwrap());
    }

    #[test]
    fn oracle_pc_leaves_chain_undirected() {
        let truth = Graph::parse(GraphKind::DAG, &["X", "Y", "Z"], "X -> Y, Y -> Z").unwrap();
        let backend = CiBackend::oracle(truth);
        let out = pc(&backend, &node_set(&["X", "Y", "Z"])).unwrap();
        let expect =
            Graph::parse(GraphKind::CPDAG, &["X", "Y", "Z"], "X -- Y, Y -- Z").unwrap();
        assert_eq!(out, expect);
    }

    #[test]
    fn population_pc_reproduces_unfaithful_divergence() {
        // Restricted to S = {X, Y, Z1} the population CI relations give the
        // collider at Y; restricted to T = {X, Y, Z2} they give the collider
        // at X. The two outputs orient the X-Y edge in opposite directions.
        let scm = unfaithful_fig1_scm();
        let backend = CiBackend::population(&scm);
        let on_s = pc(&backend, &node_set(&["X", "Y", "Z1"])).unwrap();
        let expect_s =
            Graph::parse(GraphKind::CPDAG, &["X", "Y", "Z1"], "X -> Y, Z1 -> Y").unwrap();
        assert_eq!(on_s, expect_s);

        let on_t = pc(&backend, &node_set(&["X", "Y", "Z2"])).unwrap();
        let expect_t =
            Graph::parse(GraphKind::CPDAG, &["X", "Y", "Z2"], "Y -> X, Z2 -> X").unwrap();
        assert_eq!(on_t, expect_t);
    }

    #[test]
    fn oracle_pc_matches_cpdag_on_random_dags() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let (dag, _) = crate::scm::random_dag(7, 0, 2.0, &mut rng).unwrap();
            let backend = CiBackend::oracle(dag.clone());
            let out = pc(&backend, &dag.node_set()).unwrap();
            assert_eq!(out, dag_to_cpdag(&dag).unwrap(), "dag: {}", dag.encode());
        }
    }

    #[test]
    fn sample_pc_recovers_collider() {
        let scm = LinearScm::new(
            &["X", "Y", "Z"],
            &[("X", "Z", 1.0), ("Y", "Z", 1.0)],
            NoiseKind::Gaussian,
            &["X", "Y", "Z"],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let data = scm.sample(20_000, &mut rng);
        let backend = CiBackend::sample(&data, 0.01);
        let out = pc(&backend, &node_set(&["X", "Y", "Z"])).unwrap();
        let expect = Graph::parse(GraphKind::CPDAG, &["X", "Y", "Z"], "X -> Z, Y -> Z").unwrap();
        assert_eq!(out, expect);
    }

    #[test]
    fn entropy_dag_orders_by_variance() {
        let scm = LinearScm::new(
            &["A", "B", "C"],
            &[("A", "B", 1.0), ("B", "C", 1.0)],
            NoiseKind::Gaussian,
            &["A", "B", "C"],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let data = scm.sample(50_000, &mut rng);
        let g = entropy_dag(&data).unwrap();
        // Variances 1 < 2 < 3 along the chain.
        assert!(g.has_directed("A", "B").unwrap());
        assert!(g.has_directed("A", "C").unwrap());
        assert!(g.has_directed("B", "C").unwrap());
    }

    #[test]
    fn entropy_dag_column_order_invariance() {
        let scm = unfaithful_fig1_scm();
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let data = scm.sample(5000, &mut rng);
        let g1 = entropy_dag(&data).unwrap();
        // Reverse the column order, same rows.
        let rev_cols: Vec<NodeId> = data.columns().iter().rev().cloned().collect();
        let mut values = nalgebra::DMatrix::zeros(data.n_samples(), rev_cols.len());
        for (j, c) in rev_cols.iter().enumerate() {
            let src = data.column(c.as_str()).unwrap();
            for (r, v) in src.iter().enumerate() {
                values[(r, j)] = *v;
            }
        }
        let reordered = Dataset::new(rev_cols, values).unwrap();
        let g2 = entropy_dag(&reordered).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn entropy_admg_has_bidirected_everywhere() {
        let scm = unfaithful_fig1_scm();
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let data = scm.sample(1000, &mut rng);
        let g = entropy_admg(&data).unwrap();
        let names: Vec<&NodeId> = g.nodes().iter().collect();
        for i in 0..names.len() {
            for j in 0..names.len() {
                if i == j {
                    continue;
                }
                let (t, o) = (names[i].as_str(), names[j].as_str());
                assert!(g.has_bidirected(t, o).unwrap());
                let (valid, _) = crate::adjustment::parent_adjustment_valid(&g, t, o).unwrap();
                assert!(!valid);
                // Every node with children is confounded with them, so no
                // non-null effect is identifiable.
                if !g.parents(o).unwrap().is_empty() && g.has_directed(t, o).unwrap() {
                    assert!(!crate::adjustment::identifiable_in_admg(&g, t, o).unwrap());
                }
            }
        }
    }

    #[test]
    fn entropy_rejects_zero_variance_columns() {
        let values = nalgebra::DMatrix::from_fn(20, 2, |r, c| if c == 0 { 1.0 } else { r as f64 });
        let data = Dataset::new(vec![NodeId::from("A"), NodeId::from("B")], values).unwrap();
        assert!(matches!(
            entropy_dag(&data),
            Err(DiscoveryError::ZeroVariance(_))
        ));
    }

    #[test]
    fn run_algorithm_checks_subset() {
        let scm = unfaithful_fig1_scm();
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let data = scm.sample(500, &mut rng);
        let err = run_algorithm(
            &AlgorithmHandle::EntropyDag,
            &data,
            &node_set(&["X", "NOPE"]),
        );
        assert!(matches!(err, Err(DiscoveryError::SubsetNotInColumns(_))));
    }

    #[test]
    fn external_adapter_contract() {
        let scm = unfaithful_fig1_scm();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let data = scm.sample(100, &mut rng);
        let fixed = Graph::parse(GraphKind::DAG, &["X", "Y"], "X -> Y").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let graph_file = dir.path().join("fixed.json");
        std::fs::write(&graph_file, fixed.encode()).unwrap();
        let script = dir.path().join("echo.sh");
        std::fs::write(
            &script,
            format!("#!/bin/sh\ncp {} \"$1\"\n", graph_file.display()),
        )
        .unwrap();
        let cmd = format!("sh {} {{output_json}} {{input_csv}}", script.display());
        let out = run_algorithm(
            &AlgorithmHandle::External { command: cmd },
            &data,
            &node_set(&["X", "Y"]),
        )
        .unwrap();
        assert_eq!(out.graph().unwrap(), &fixed);

        // Declared failure token.
        let bot_script = dir.path().join("bot.sh");
        std::fs::write(&bot_script, "#!/bin/sh\nprintf BOT > \"$1\"\n").unwrap();
        let cmd = format!("sh {} {{output_json}}", bot_script.display());
        let out = run_algorithm(
            &AlgorithmHandle::External { command: cmd },
            &data,
            &node_set(&["X", "Y"]),
        )
        .unwrap();
        assert!(out.is_bot());

        // Nonzero exit maps to bot with a diagnostic.
        let out = run_algorithm(
            &AlgorithmHandle::External {
                command: "false".into(),
            },
            &data,
            &node_set(&["X", "Y"]),
        )
        .unwrap();
        assert!(out.is_bot());
    }
}
