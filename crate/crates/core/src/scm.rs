//! Synthetic ground truth: random DAGs with hidden confounders, linear SCMs,
//! ancestral sampling, closed-form covariance and total effects.

use crate::graph::{Graph, GraphError, GraphKind, NodeId};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScmError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("expected a DAG, got {0}")]
    NotADag(GraphKind),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("csv error: {0}")]
    Csv(String),
}

/// Noise family for the structural equations; both zero mean, variance
/// scale^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    Uniform,
}

/// Linear structural causal model over observed and hidden nodes.
#[derive(Debug, Clone)]
pub struct LinearScm {
    dag: Graph,
    /// Node order used for covariance rows and sampling columns.
    order: Vec<NodeId>,
    weights: BTreeMap<(NodeId, NodeId), f64>,
    noise_kind: NoiseKind,
    noise_scale: BTreeMap<NodeId, f64>,
    observed: BTreeSet<NodeId>,
}

impl LinearScm {
    /// `edges` are (parent, child, weight) triples; `order` fixes the row
    /// order of `covariance` and the column order of `sample`.
    pub fn new(
        order: &[&str],
        edges: &[(&str, &str, f64)],
        noise_kind: NoiseKind,
        observed: &[&str],
    ) -> Result<Self, ScmError> {
        let mut dag = Graph::new(GraphKind::DAG, order.iter().copied())?;
        let mut weights = BTreeMap::new();
        for &(p, c, w) in edges {
            dag.add_directed(p, c)?;
            weights.insert((NodeId::from(p), NodeId::from(c)), w);
        }
        if dag.topological_order().is_none() {
            return Err(ScmError::NotADag(GraphKind::DAG));
        }
        let noise_scale = order.iter().map(|&n| (NodeId::from(n), 1.0)).collect();
        Ok(LinearScm {
            dag,
            order: order.iter().map(|&n| NodeId::from(n)).collect(),
            weights,
            noise_kind,
            noise_scale,
            observed: observed.iter().map(|&n| NodeId::from(n)).collect(),
        })
    }

    pub fn dag(&self) -> &Graph {
        &self.dag
    }

    pub fn observed(&self) -> &BTreeSet<NodeId> {
        &self.observed
    }

    pub fn node_order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn noise_kind(&self) -> NoiseKind {
        self.noise_kind
    }

    pub fn weight(&self, parent: &str, child: &str) -> Option<f64> {
        self.weights
            .get(&(NodeId::from(parent), NodeId::from(child)))
            .copied()
    }

    pub(crate) fn order_index(&self, name: &str) -> Result<usize, ScmError> {
        self.order
            .iter()
            .position(|n| n.as_str() == name)
            .ok_or_else(|| ScmError::UnknownColumn(name.to_string()))
    }

    /// Coefficient matrix B with B[child][parent] = weight, indices in
    /// `order`.
    fn coefficient_matrix(&self) -> DMatrix<f64> {
        let n = self.order.len();
        let mut b = DMatrix::zeros(n, n);
        for ((p, c), w) in &self.weights {
            let pi = self.order.iter().position(|x| x == p).unwrap();
            let ci = self.order.iter().position(|x| x == c).unwrap();
            b[(ci, pi)] = *w;
        }
        b
    }

    /// Exact population covariance over all nodes in `order`:
    /// (I - B)^-1 D (I - B)^-T with D the diagonal of noise variances.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.order.len();
        let b = self.coefficient_matrix();
        let m = (DMatrix::identity(n, n) - b)
            .try_inverse()
            .expect("I - B is invertible for acyclic coefficient matrices");
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            self.order
                .iter()
                .map(|node| self.noise_scale[node] * self.noise_scale[node]),
        ));
        &m * d * m.transpose()
    }

    /// Sum over all directed paths from `treatment` to `outcome` of the
    /// products of edge weights; 0 when no path exists.
    pub fn total_effect(&self, treatment: &str, outcome: &str) -> Result<f64, ScmError> {
        let t = self.dag.idx(treatment)?;
        let o = self.dag.idx(outcome)?;
        let mut memo: BTreeMap<usize, f64> = BTreeMap::new();
        Ok(self.effect_rec(t, o, &mut memo))
    }

    fn effect_rec(&self, v: usize, target: usize, memo: &mut BTreeMap<usize, f64>) -> f64 {
        if v == target {
            return 1.0;
        }
        if let Some(&e) = memo.get(&v) {
            return e;
        }
        let mut total = 0.0;
        for c in self.dag.children_ix(v) {
            let w = self.weights[&(self.dag.name(v).clone(), self.dag.name(c).clone())];
            total += w * self.effect_rec(c, target, memo);
        }
        memo.insert(v, total);
        total
    }

    /// Ancestral sampling in topological order; hidden columns dropped.
    pub fn sample<R: Rng>(&self, m: usize, rng: &mut R) -> Dataset {
        let n = self.order.len();
        let topo = self
            .dag
            .topological_order()
            .expect("construction guarantees acyclicity");
        // Map graph indices (sorted names) to order indices.
        let order_of_graph: Vec<usize> = (0..n)
            .map(|g_ix| {
                self.order
                    .iter()
                    .position(|x| x == self.dag.name(g_ix))
                    .unwrap()
            })
            .collect();
        let mut values = DMatrix::zeros(m, n);
        let gauss = Normal::new(0.0, 1.0).unwrap();
        let sqrt3 = 3.0_f64.sqrt();
        for &g_ix in &topo {
            let col = order_of_graph[g_ix];
            let scale = self.noise_scale[self.dag.name(g_ix)];
            let parents = self.dag.parents_ix(g_ix);
            let weights: Vec<(usize, f64)> = parents
                .iter()
                .map(|&p| {
                    let w = self.weights[&(self.dag.name(p).clone(), self.dag.name(g_ix).clone())];
                    (order_of_graph[p], w)
                })
                .collect();
            for row in 0..m {
                let noise = match self.noise_kind {
                    NoiseKind::Gaussian => gauss.sample(rng) * scale,
                    NoiseKind::Uniform => {
                        Uniform::new_inclusive(-sqrt3 * scale, sqrt3 * scale).sample(rng)
                    }
                };
                let mut v = noise;
                for &(pcol, w) in &weights {
                    v += w * values[(row, pcol)];
                }
                values[(row, col)] = v;
            }
        }
        // Keep observed columns in declared order.
        let kept: Vec<usize> = (0..n)
            .filter(|&i| self.observed.contains(&self.order[i]))
            .collect();
        let mut out = DMatrix::zeros(m, kept.len());
        let mut columns = Vec::with_capacity(kept.len());
        for (j, &i) in kept.iter().enumerate() {
            columns.push(self.order[i].clone());
            out.set_column(j, &values.column(i));
        }
        Dataset {
            columns,
            values: out,
        }
    }
}

/// Named columns by samples matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<NodeId>,
    values: DMatrix<f64>,
}

impl Dataset {
    pub fn new(columns: Vec<NodeId>, values: DMatrix<f64>) -> Result<Self, ScmError> {
        if values.nrows() == 0 {
            return Err(ScmError::InvalidParameter("empty dataset".into()));
        }
        if columns.len() != values.ncols() {
            return Err(ScmError::InvalidParameter(
                "column count does not match matrix width".into(),
            ));
        }
        let unique: BTreeSet<_> = columns.iter().collect();
        if unique.len() != columns.len() {
            return Err(ScmError::InvalidParameter("duplicate column names".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ScmError::InvalidParameter("non-finite entries".into()));
        }
        Ok(Dataset { columns, values })
    }

    pub fn columns(&self) -> &[NodeId] {
        &self.columns
    }

    pub fn column_set(&self) -> BTreeSet<NodeId> {
        self.columns.iter().cloned().collect()
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_index(&self, name: &str) -> Result<usize, ScmError> {
        self.columns
            .iter()
            .position(|c| c.as_str() == name)
            .ok_or_else(|| ScmError::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, ScmError> {
        let ix = self.column_index(name)?;
        Ok(self.values.column(ix).iter().copied().collect())
    }

    /// Restriction to a subset of columns, in sorted name order.
    pub fn restrict(&self, subset: &BTreeSet<NodeId>) -> Result<Dataset, ScmError> {
        let mut cols = Vec::with_capacity(subset.len());
        for name in subset {
            cols.push(self.column_index(name.as_str())?);
        }
        let mut out = DMatrix::zeros(self.values.nrows(), cols.len());
        for (j, &ix) in cols.iter().enumerate() {
            out.set_column(j, &self.values.column(ix));
        }
        Ok(Dataset {
            columns: subset.iter().cloned().collect(),
            values: out,
        })
    }

    /// Sample covariance matrix (denominator m - 1) in column order.
    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let m = self.values.nrows();
        let n = self.values.ncols();
        let means: Vec<f64> = (0..n).map(|j| self.values.column(j).mean()).collect();
        let mut cov = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for r in 0..m {
                    s += (self.values[(r, i)] - means[i]) * (self.values[(r, j)] - means[j]);
                }
                let c = s / (m as f64 - 1.0);
                cov[(i, j)] = c;
                cov[(j, i)] = c;
            }
        }
        cov
    }

    pub fn to_csv<W: Write>(&self, mut out: W) -> Result<(), ScmError> {
        let header: Vec<&str> = self.columns.iter().map(|c| c.as_str()).collect();
        let mut line = header.join(",");
        line.push('\n');
        out.write_all(line.as_bytes())
            .map_err(|e| ScmError::Csv(e.to_string()))?;
        for r in 0..self.values.nrows() {
            let row: Vec<String> = (0..self.values.ncols())
                .map(|c| format!("{}", self.values[(r, c)]))
                .collect();
            let mut line = row.join(",");
            line.push('\n');
            out.write_all(line.as_bytes())
                .map_err(|e| ScmError::Csv(e.to_string()))?;
        }
        Ok(())
    }

    pub fn from_csv<R: Read>(input: R) -> Result<Dataset, ScmError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let headers = reader
            .headers()
            .map_err(|e| ScmError::Csv(e.to_string()))?
            .clone();
        let columns: Vec<NodeId> = headers.iter().map(NodeId::from).collect();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| ScmError::Csv(e.to_string()))?;
            let row: Result<Vec<f64>, _> = record
                .iter()
                .map(|f| f.trim().parse::<f64>().map_err(|e| e.to_string()))
                .collect();
            rows.push(row.map_err(ScmError::Csv)?);
        }
        if rows.is_empty() {
            return Err(ScmError::Csv("no data rows".into()));
        }
        let m = rows.len();
        let n = columns.len();
        let values = DMatrix::from_fn(m, n, |r, c| rows[r][c]);
        Dataset::new(columns, values)
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<(), ScmError> {
        let file = std::fs::File::create(path).map_err(|e| ScmError::Csv(e.to_string()))?;
        self.to_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv_file(path: &Path) -> Result<Dataset, ScmError> {
        let file = std::fs::File::open(path).map_err(|e| ScmError::Csv(e.to_string()))?;
        Dataset::from_csv(std::io::BufReader::new(file))
    }
}

/// Erdos-Renyi DAG: every unordered pair is an edge with probability
/// d/(N-1), oriented along a uniformly random topological order; `n_obs`
/// nodes are then chosen uniformly as observed.
pub fn random_dag<R: Rng>(
    n_obs: usize,
    n_hidden: usize,
    expected_degree: f64,
    rng: &mut R,
) -> Result<(Graph, BTreeSet<NodeId>), ScmError> {
    let n = n_obs + n_hidden;
    if n_obs < 1 {
        return Err(ScmError::InvalidParameter("n_obs must be >= 1".into()));
    }
    if expected_degree < 0.0 || (n > 1 && expected_degree > (n - 1) as f64) {
        return Err(ScmError::InvalidParameter(format!(
            "expected_degree {expected_degree} out of range for {n} nodes"
        )));
    }
    let width = n.to_string().len();
    let names: Vec<String> = (0..n).map(|i| format!("X{i:0width$}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut position = vec![0usize; n];
    for (pos, &v) in order.iter().enumerate() {
        position[v] = pos;
    }
    let p = if n > 1 {
        expected_degree / (n as f64 - 1.0)
    } else {
        0.0
    };
    let mut g = Graph::new(GraphKind::DAG, names.iter().map(|s| s.as_str()))?;
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p {
                let (from, to) = if position[i] < position[j] { (i, j) } else { (j, i) };
                g.add_directed(&names[from], &names[to])?;
            }
        }
    }
    let mut shuffled: Vec<usize> = (0..n).collect();
    shuffled.shuffle(rng);
    let observed: BTreeSet<NodeId> = shuffled[..n_obs]
        .iter()
        .map(|&i| NodeId::from(names[i].as_str()))
        .collect();
    Ok((g, observed))
}

/// Draws structural coefficients i.i.d. uniform on [-1, -0.1] u [0.1, 1]
/// with unit-variance noise.
pub fn random_linear_scm<R: Rng>(
    dag: &Graph,
    observed: &BTreeSet<NodeId>,
    noise_kind: NoiseKind,
    rng: &mut R,
) -> Result<LinearScm, ScmError> {
    if dag.kind() != GraphKind::DAG {
        return Err(ScmError::NotADag(dag.kind()));
    }
    let order: Vec<&str> = dag.nodes().iter().map(|n| n.as_str()).collect();
    let mut edges = Vec::new();
    for e in dag.edges() {
        let magnitude = Uniform::new_inclusive(0.1, 1.0).sample(rng);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        // Edge records are endpoint-canonical; orient by the marks.
        let (parent, child) = match (e.mark_a, e.mark_b) {
            (crate::graph::Mark::Tail, crate::graph::Mark::Arrow) => (e.a.clone(), e.b.clone()),
            (crate::graph::Mark::Arrow, crate::graph::Mark::Tail) => (e.b.clone(), e.a.clone()),
            _ => unreachable!("DAG edges are fully directed"),
        };
        edges.push((parent, child, sign * magnitude));
    }
    let edge_refs: Vec<(&str, &str, f64)> = edges
        .iter()
        .map(|(a, b, w)| (a.as_str(), b.as_str(), *w))
        .collect();
    let observed_refs: Vec<&str> = observed.iter().map(|n| n.as_str()).collect();
    LinearScm::new(&order, &edge_refs, noise_kind, &observed_refs)
}

/// The five-node SCM whose covariance matrix has integer entries: parents
/// p1, p2 into i, chain i -> k -> j, all weights one, unit Gaussian noise.
pub fn fci_merging_scm() -> LinearScm {
    LinearScm::new(
        &["p1", "p2", "i", "k", "j"],
        &[
            ("p1", "i", 1.0),
            ("p2", "i", 1.0),
            ("i", "k", 1.0),
            ("k", "j", 1.0),
        ],
        NoiseKind::Gaussian,
        &["p1", "p2", "i", "k", "j"],
    )
    .expect("fixture is well-formed")
}

/// The alternative covariance matrix with 7/2 entries at (i, j): same
/// four-variable marginals as the fixture SCM's covariance, but a different
/// joint.
pub fn fci_merging_sigma_tilde() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        5,
        5,
        &[
            1.0, 0.0, 1.0, 1.0, 1.0, //
            0.0, 1.0, 1.0, 1.0, 1.0, //
            1.0, 1.0, 3.0, 3.0, 3.5, //
            1.0, 1.0, 3.0, 4.0, 4.0, //
            1.0, 1.0, 3.5, 4.0, 5.0,
        ],
    )
}

/// Four-variable fixture with a cancelling path: X -> Y, Z1 -> Y, X -> Z2,
/// Z2 -> Y with weight -1/2, so that Cov(Y, Z2) = 0 although the graph
/// connects them. The independence is unfaithful.
pub fn unfaithful_fig1_scm() -> LinearScm {
    LinearScm::new(
        &["X", "Y", "Z1", "Z2"],
        &[
            ("X", "Y", 1.0),
            ("Z1", "Y", 1.0),
            ("X", "Z2", 1.0),
            ("Z2", "Y", -0.5),
        ],
        NoiseKind::Gaussian,
        &["X", "Y", "Z1", "Z2"],
    )
    .expect("fixture is well-formed")
}
