//! Incompatibility scores: subset sampling, structural Hamming distance,
//! the graphical score kappa_g and the interventional score kappa_i.
//!
//! kappa_g averages the SHD between each marginal output and the projection
//! of the joint output onto that subset. kappa_i counts variable pairs on
//! which the collected models make contradictory interventional claims,
//! normalized by the number of pairs with any committed claim.

use crate::adjustment::{
    canonical_adjustment_set, is_valid_adjustment, parent_adjustment_valid, AdjustmentError,
    AdjustmentQuery,
};
use crate::discovery::{run_algorithm, AlgorithmHandle, DiscoveryError, DiscoveryOutcome};
use crate::graph::{Graph, GraphError, GraphKind, Mark, NodeId};
use crate::projection::{latent_admg, latent_cpdag, latent_mag, latent_pag, project_cpdag, ProjectionError};
use crate::scm::Dataset;
use crate::stats::{equal_effects_test, StatsError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Adjustment(#[from] AdjustmentError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("graphs must share one node set")]
    NodeSetMismatch,
    #[error("cannot compare graphs of kinds {0} and {1}")]
    KindMismatch(GraphKind, GraphKind),
    #[error("cannot project a joint graph of kind {joint} onto marginals of kind {marginal}")]
    UnsupportedProjection {
        joint: GraphKind,
        marginal: GraphKind,
    },
    #[error("invalid subset size {size} for {n} nodes")]
    BadSubsetSize { size: usize, n: usize },
}

/// The sampled subsets an algorithm is evaluated on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsetPlan {
    pub subsets: Vec<BTreeSet<NodeId>>,
    pub seed: u64,
}

/// Draws `count` subsets of the given size uniformly with replacement,
/// deterministically from the seed.
pub fn sample_subsets(
    nodes: &BTreeSet<NodeId>,
    size: usize,
    count: usize,
    seed: u64,
) -> Result<SubsetPlan, ScoreError> {
    let n = nodes.len();
    if size < 1 || size > n || count < 1 {
        return Err(ScoreError::BadSubsetSize { size, n });
    }
    let pool: Vec<&NodeId> = nodes.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subsets = Vec::with_capacity(count);
    for _ in 0..count {
        // Partial Fisher-Yates over index slots.
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..size {
            let j = rng.gen_range(i..n);
            idx.swap(i, j);
        }
        subsets.push(idx[..size].iter().map(|&i| pool[i].clone()).collect());
    }
    Ok(SubsetPlan { subsets, seed })
}

/// Default subset size: half the nodes, rounded up.
pub fn default_subset_size(n: usize) -> usize {
    n.div_ceil(2)
}

/// Structural Hamming distance, dispatched by graph class: the unit variant
/// for DAG/ADMG/CPDAG pairs, the endpoint-mark variant for MAG/PAG pairs.
pub fn shd(g1: &Graph, g2: &Graph) -> Result<u32, ScoreError> {
    let marks1 = matches!(g1.kind(), GraphKind::MAG | GraphKind::PAG);
    let marks2 = matches!(g2.kind(), GraphKind::MAG | GraphKind::PAG);
    if marks1 != marks2 {
        return Err(ScoreError::KindMismatch(g1.kind(), g2.kind()));
    }
    if marks1 {
        shd_marks(g1, g2)
    } else {
        shd_unit(g1, g2)
    }
}

fn check_same_nodes(g1: &Graph, g2: &Graph) -> Result<(), ScoreError> {
    if g1.nodes() != g2.nodes() {
        return Err(ScoreError::NodeSetMismatch);
    }
    Ok(())
}

/// Unit SHD: one unit per unordered pair whose edge records differ in any
/// way (presence, orientation or edge type).
pub fn shd_unit(g1: &Graph, g2: &Graph) -> Result<u32, ScoreError> {
    check_same_nodes(g1, g2)?;
    let pairs1 = pair_records(g1);
    let pairs2 = pair_records(g2);
    let keys: BTreeSet<&(NodeId, NodeId)> = pairs1.keys().chain(pairs2.keys()).collect();
    let mut distance = 0;
    for key in keys {
        if pairs1.get(key) != pairs2.get(key) {
            distance += 1;
        }
    }
    Ok(distance)
}

type PairMap = std::collections::BTreeMap<(NodeId, NodeId), BTreeSet<(Mark, Mark)>>;

fn pair_records(g: &Graph) -> PairMap {
    let mut map = PairMap::new();
    for e in g.edges() {
        map.entry((e.a.clone(), e.b.clone()))
            .or_default()
            .insert((e.mark_a, e.mark_b));
    }
    map
}

/// Mark SHD for MAGs and PAGs: one unit per differing endpoint mark; a
/// missing edge counts as two differing marks.
pub fn shd_marks(g1: &Graph, g2: &Graph) -> Result<u32, ScoreError> {
    check_same_nodes(g1, g2)?;
    let pairs1 = pair_records(g1);
    let pairs2 = pair_records(g2);
    let keys: BTreeSet<&(NodeId, NodeId)> = pairs1.keys().chain(pairs2.keys()).collect();
    let mut distance = 0;
    for key in keys {
        match (pairs1.get(key), pairs2.get(key)) {
            (Some(a), Some(b)) => {
                let (ma, mb) = (a.iter().next().unwrap(), b.iter().next().unwrap());
                if ma.0 != mb.0 {
                    distance += 1;
                }
                if ma.1 != mb.1 {
                    distance += 1;
                }
            }
            (Some(_), None) | (None, Some(_)) => distance += 2,
            (None, None) => unreachable!(),
        }
    }
    Ok(distance)
}

/// Projects the joint output onto a subset, in the marginal's graph class.
pub fn project_for_comparison(
    joint: &Graph,
    subset: &BTreeSet<NodeId>,
    marginal_kind: GraphKind,
) -> Result<Graph, ScoreError> {
    let unsupported = || ScoreError::UnsupportedProjection {
        joint: joint.kind(),
        marginal: marginal_kind,
    };
    match (joint.kind(), marginal_kind) {
        (GraphKind::DAG | GraphKind::ADMG, GraphKind::DAG | GraphKind::ADMG) => {
            Ok(latent_admg(joint, subset)?)
        }
        (GraphKind::DAG, GraphKind::CPDAG) => Ok(latent_cpdag(joint, subset)?),
        (GraphKind::DAG, GraphKind::MAG) => Ok(latent_mag(joint, subset)?),
        (GraphKind::DAG, GraphKind::PAG) => Ok(latent_pag(joint, subset)?),
        (GraphKind::CPDAG, GraphKind::CPDAG) => Ok(project_cpdag(joint, subset)?),
        _ => Err(unsupported()),
    }
}

/// Graphical incompatibility: per-subset SHD values and their mean. Any
/// bot marginal forces the incompatible-by-bot sentinel.
#[derive(Debug, Clone)]
pub struct KappaG {
    pub value: Option<f64>,
    pub per_subset_shd: Vec<Option<f64>>,
    pub bot_count: u32,
}

pub fn kappa_g(
    joint: &Graph,
    marginals: &[(BTreeSet<NodeId>, DiscoveryOutcome)],
) -> Result<KappaG, ScoreError> {
    let mut per_subset = Vec::with_capacity(marginals.len());
    let mut bot_count = 0u32;
    let mut total = 0.0;
    for (subset, outcome) in marginals {
        match outcome {
            DiscoveryOutcome::Bot { .. } => {
                bot_count += 1;
                per_subset.push(None);
            }
            DiscoveryOutcome::Graph(marginal) => {
                // Compare DAG marginals in ADMG space: projections of a joint
                // graph may carry bidirected edges.
                let target_kind = if marginal.kind() == GraphKind::DAG {
                    GraphKind::ADMG
                } else {
                    marginal.kind()
                };
                let projected = project_for_comparison(joint, subset, target_kind)?;
                let d = shd(&projected, marginal)? as f64;
                per_subset.push(Some(d));
                total += d;
            }
        }
    }
    let value = if bot_count > 0 {
        None
    } else if marginals.is_empty() {
        Some(0.0)
    } else {
        Some(total / marginals.len() as f64)
    };
    Ok(KappaG {
        value,
        per_subset_shd: per_subset,
        bot_count,
    })
}

/// Outcome of the interventional score for one ordered pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairDetail {
    pub treatment: NodeId,
    pub outcome: NodeId,
    pub t_value: u8,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct KappaI {
    pub value: Option<f64>,
    pub normalizer_c: u32,
    pub pair_details: Vec<PairDetail>,
    /// Set when C = 0: the outputs commit to no falsifiable claim at all.
    pub uncommitted: bool,
    pub bot_count: u32,
}

/// The adjustment claim a graph makes for one ordered pair.
enum PairClaim {
    /// A set to adjust for in the regression test.
    Set(BTreeSet<NodeId>),
    /// The graph shows no possibly directed treatment-outcome path: the
    /// canonical set is replaced by the pair's shared single-node draw.
    NullPath,
    /// Parent adjustment (or the canonical criterion) is invalid here.
    None,
}

impl PairClaim {
    fn is_committed(&self) -> bool {
        !matches!(self, PairClaim::None)
    }

    fn resolve(&self, substitute: &BTreeSet<NodeId>) -> Option<BTreeSet<NodeId>> {
        match self {
            PairClaim::Set(s) => Some(s.clone()),
            PairClaim::NullPath => Some(substitute.clone()),
            PairClaim::None => None,
        }
    }
}

/// Derives the per-graph adjustment claim. DAGs and ADMGs use parent
/// adjustment (minus the outcome); CPDAGs/MAGs/PAGs use the canonical set
/// when it validates, and the null-path token when the graph shows no
/// possibly directed treatment-outcome path.
fn pair_claim(g: &Graph, treatment: &NodeId, outcome: &NodeId) -> Result<PairClaim, ScoreError> {
    match g.kind() {
        GraphKind::DAG | GraphKind::ADMG => {
            let (valid, parents) =
                parent_adjustment_valid(g, treatment.as_str(), outcome.as_str())?;
            if !valid {
                return Ok(PairClaim::None);
            }
            let mut set = parents;
            set.remove(outcome);
            Ok(PairClaim::Set(set))
        }
        GraphKind::CPDAG | GraphKind::MAG | GraphKind::PAG => {
            let pd = g.possible_descendants(treatment.as_str())?;
            if !pd.contains(outcome) {
                return Ok(PairClaim::NullPath);
            }
            let canonical = canonical_adjustment_set(g, treatment.as_str(), outcome.as_str())?;
            let query = AdjustmentQuery {
                treatment: treatment.clone(),
                outcome: outcome.clone(),
                candidate: canonical.clone(),
            };
            if is_valid_adjustment(g, &query)? {
                Ok(PairClaim::Set(canonical))
            } else {
                Ok(PairClaim::None)
            }
        }
    }
}

/// Interventional incompatibility score over the joint output, the marginal
/// outputs and the dataset they were learned from.
pub fn kappa_i(
    joint: &Graph,
    marginals: &[(BTreeSet<NodeId>, DiscoveryOutcome)],
    data: &Dataset,
    level: f64,
    seed: u64,
) -> Result<KappaI, ScoreError> {
    let bot_count = marginals.iter().filter(|(_, o)| o.is_bot()).count() as u32;
    if bot_count > 0 {
        return Ok(KappaI {
            value: None,
            normalizer_c: 0,
            pair_details: Vec::new(),
            uncommitted: false,
            bot_count,
        });
    }
    let marginal_graphs: Vec<(&BTreeSet<NodeId>, &Graph)> = marginals
        .iter()
        .map(|(s, o)| (s, o.graph().expect("bots handled above")))
        .collect();

    // Projections of the joint onto each subset, for condition 2 and the
    // normalizer exception.
    let mut projections: Vec<Option<Graph>> = Vec::with_capacity(marginal_graphs.len());
    for (subset, marginal) in &marginal_graphs {
        let target_kind = if marginal.kind() == GraphKind::DAG {
            GraphKind::ADMG
        } else {
            marginal.kind()
        };
        projections.push(project_for_comparison(joint, subset, target_kind).ok());
    }

    let nodes: Vec<NodeId> = joint.nodes().to_vec();
    let mut sum_t = 0u32;
    let mut c = 0u32;
    let mut details = Vec::new();
    for treatment in &nodes {
        for outcome in &nodes {
            if treatment == outcome {
                continue;
            }
            let pair_seed = derive_pair_seed(seed, treatment, outcome);
            let mut rng = ChaCha8Rng::seed_from_u64(pair_seed);
            let mut reason = String::new();

            // One shared single-node substitute per pair, used by every
            // graph whose claim is the null-path token.
            let candidates: Vec<&NodeId> = nodes
                .iter()
                .filter(|n| *n != treatment && *n != outcome)
                .collect();
            let substitute: BTreeSet<NodeId> = if candidates.is_empty() {
                BTreeSet::new()
            } else {
                let pick = rng.gen_range(0..candidates.len());
                [candidates[pick].clone()].into_iter().collect()
            };

            let joint_claim = pair_claim(joint, treatment, outcome)?;
            let joint_valid = joint_claim.is_committed();
            let mut sets: Vec<BTreeSet<NodeId>> = Vec::new();
            let mut used_substitute = false;
            if let Some(s) = joint_claim.resolve(&substitute) {
                used_substitute |= matches!(joint_claim, PairClaim::NullPath);
                sets.push(s);
            }
            let mut any_marginal_valid = false;
            let mut condition2 = false;
            for (k, (subset, marginal)) in marginal_graphs.iter().enumerate() {
                if !subset.contains(treatment) || !subset.contains(outcome) {
                    continue;
                }
                let claim = pair_claim(marginal, treatment, outcome)?;
                let valid = claim.is_committed();
                if let Some(s) = claim.resolve(&substitute) {
                    used_substitute |= matches!(claim, PairClaim::NullPath);
                    sets.push(s);
                }
                if valid {
                    any_marginal_valid = true;
                }
                // Condition 2: validity flips between the projected joint
                // and the marginal output.
                if let Some(proj) = &projections[k] {
                    let proj_valid = pair_claim(proj, treatment, outcome)?.is_committed();
                    if proj_valid != valid {
                        condition2 = true;
                        reason.push_str(&format!(
                            "validity flip on subset {}; ",
                            subset_label(subset)
                        ));
                    }
                }
            }
            if used_substitute {
                reason.push_str(&format!(
                    "null-path substitute {:?}; ",
                    substitute.iter().map(|s| s.as_str()).collect::<Vec<_>>()
                ));
            }

            // Normalizer: pairs with a committed claim somewhere, except
            // when only the joint commits and no projection identifies the
            // effect.
            let mut projection_identifiable = false;
            for (k, (subset, _)) in marginal_graphs.iter().enumerate() {
                if !subset.contains(treatment) || !subset.contains(outcome) {
                    continue;
                }
                if let Some(proj) = &projections[k] {
                    if pair_claim(proj, treatment, outcome)?.is_committed() {
                        projection_identifiable = true;
                        break;
                    }
                }
            }
            let committed = joint_valid || any_marginal_valid;
            let counted = committed && (any_marginal_valid || projection_identifiable);
            if !counted {
                if committed {
                    details.push(PairDetail {
                        treatment: treatment.clone(),
                        outcome: outcome.clone(),
                        t_value: 0,
                        reason: "joint-only claim, unidentifiable in all projections".into(),
                    });
                }
                continue;
            }
            c += 1;

            // Condition 1: at least two distinct sets whose effects the test
            // rejects as equal.
            let mut distinct: Vec<BTreeSet<NodeId>> = Vec::new();
            for s in sets {
                if !distinct.contains(&s) {
                    distinct.push(s);
                }
            }
            let mut condition1 = false;
            if distinct.len() >= 2 {
                match equal_effects_test(
                    data,
                    treatment.as_str(),
                    outcome.as_str(),
                    &distinct,
                    level,
                    &mut rng,
                ) {
                    Ok(res) => {
                        if res.reject {
                            condition1 = true;
                            reason.push_str(&format!("effect test rejected (p={:.2e}); ", res.p_value));
                        } else {
                            reason.push_str("effect test retained; ");
                        }
                    }
                    Err(StatsError::Inconclusive(msg)) => {
                        log::debug!(
                            "kappa_i: inconclusive effect test for ({treatment}, {outcome}): {msg}"
                        );
                        reason.push_str(&format!("inconclusive: {msg}; "));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let t = u8::from(condition1 || condition2);
            sum_t += t as u32;
            details.push(PairDetail {
                treatment: treatment.clone(),
                outcome: outcome.clone(),
                t_value: t,
                reason,
            });
        }
    }

    let (value, uncommitted) = if c == 0 {
        (Some(0.0), true)
    } else {
        (Some(sum_t as f64 / c as f64), false)
    };
    Ok(KappaI {
        value,
        normalizer_c: c,
        pair_details: details,
        uncommitted,
        bot_count,
    })
}

fn subset_label(subset: &BTreeSet<NodeId>) -> String {
    let names: Vec<&str> = subset.iter().map(|n| n.as_str()).collect();
    names.join("+")
}

fn derive_pair_seed(seed: u64, treatment: &NodeId, outcome: &NodeId) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for b in treatment.as_str().bytes().chain([0u8]).chain(outcome.as_str().bytes()) {
        h = h.wrapping_mul(0x100_0000_01b3).wrapping_add(b as u64);
    }
    splitmix64(h)
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The assembled self-compatibility report for one algorithm on one dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreReport {
    pub schema_version: u32,
    pub kappa_g: Option<f64>,
    pub kappa_i: Option<f64>,
    pub incompatible_by_bot: bool,
    /// kappa_i was 0 because no falsifiable claim was made (C = 0).
    pub uncommitted_warning: bool,
    pub normalizer_c: u32,
    pub pair_details: Vec<PairDetail>,
    pub per_subset_shd: Vec<Option<f64>>,
    pub bot_count: u32,
}

pub const SCORE_REPORT_SCHEMA_VERSION: u32 = 1;

/// Runs the handle on the full column set and on every planned subset, then
/// scores the outputs. `compute_kappa_i` gates the statistical score.
pub fn self_compat_report(
    handle: &AlgorithmHandle,
    data: &Dataset,
    plan: &SubsetPlan,
    level: f64,
    seed: u64,
    compute_kappa_i: bool,
) -> Result<ScoreReport, ScoreError> {
    let discover = |subset: &BTreeSet<NodeId>| run_algorithm(handle, data, subset);
    self_compat_report_with(&discover, data, plan, level, seed, compute_kappa_i)
}

/// Closure-driven variant of `self_compat_report`; the closure maps a column
/// subset to a discovery outcome.
pub fn self_compat_report_with<F>(
    discover: &F,
    data: &Dataset,
    plan: &SubsetPlan,
    level: f64,
    seed: u64,
    compute_kappa_i: bool,
) -> Result<ScoreReport, ScoreError>
where
    F: Fn(&BTreeSet<NodeId>) -> Result<DiscoveryOutcome, DiscoveryError> + Sync,
{
    let all_columns = data.column_set();
    let joint_outcome = discover(&all_columns)?;
    let marginals: Vec<(BTreeSet<NodeId>, DiscoveryOutcome)> = plan
        .subsets
        .par_iter()
        .map(|s| discover(s).map(|o| (s.clone(), o)))
        .collect::<Result<_, _>>()?;

    let joint = match &joint_outcome {
        DiscoveryOutcome::Graph(g) => g,
        DiscoveryOutcome::Bot { .. } => {
            let bot_count = 1 + marginals.iter().filter(|(_, o)| o.is_bot()).count() as u32;
            return Ok(ScoreReport {
                schema_version: SCORE_REPORT_SCHEMA_VERSION,
                kappa_g: None,
                kappa_i: None,
                incompatible_by_bot: true,
                uncommitted_warning: false,
                normalizer_c: 0,
                pair_details: Vec::new(),
                per_subset_shd: Vec::new(),
                bot_count,
            });
        }
    };

    let g_part = kappa_g(joint, &marginals)?;
    let (kappa_i_value, normalizer_c, pair_details, uncommitted) = if compute_kappa_i {
        let i_part = kappa_i(joint, &marginals, data, level, seed)?;
        (
            i_part.value,
            i_part.normalizer_c,
            i_part.pair_details,
            i_part.uncommitted,
        )
    } else {
        (None, 0, Vec::new(), false)
    };

    Ok(ScoreReport {
        schema_version: SCORE_REPORT_SCHEMA_VERSION,
        kappa_g: g_part.value,
        kappa_i: if g_part.bot_count > 0 { None } else { kappa_i_value },
        incompatible_by_bot: g_part.bot_count > 0,
        uncommitted_warning: uncommitted,
        normalizer_c,
        pair_details,
        per_subset_shd: g_part.per_subset_shd,
        bot_count: g_part.bot_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::{entropy_admg, entropy_dag};
    use crate::projection::dag_to_cpdag;
    use crate::scm::{unfaithful_fig1_scm, LinearScm, NoiseKind};
    use rand::SeedableRng;

    fn node_set(names: &[&str]) -> BTreeSet<NodeId> {
        names.iter().map(|&s| NodeId::from(s)).collect()
    }

    #[test]
    fn subsets_full_size_and_determinism() {
        let nodes = node_set(&["A", "B", "C"]);
        let plan = sample_subsets(&nodes, 3, 5, 7).unwrap();
        assert!(plan.subsets.iter().all(|s| s == &nodes));
        let again = sample_subsets(&nodes, 3, 5, 7).unwrap();
        assert_eq!(plan.subsets, again.subsets);
    }

    #[test]
    fn subset_inclusion_frequencies_uniform() {
        let nodes: BTreeSet<NodeId> = (0..10).map(|i| NodeId(format!("N{i}"))).collect();
        let plan = sample_subsets(&nodes, 5, 100_000, 99).unwrap();
        for node in &nodes {
            let freq = plan.subsets.iter().filter(|s| s.contains(node)).count() as f64
                / plan.subsets.len() as f64;
            assert!((0.49..=0.51).contains(&freq), "freq {freq}");
        }
    }

    #[test]
    fn shd_examples() {
        let a = Graph::parse(GraphKind::CPDAG, &["X", "Y"], "X -> Y").unwrap();
        let b = Graph::parse(GraphKind::CPDAG, &["X", "Y"], "X -- Y").unwrap();
        assert_eq!(shd(&a, &a).unwrap(), 0);
        assert_eq!(shd(&a, &b).unwrap(), 1);
        assert_eq!(shd(&b, &a).unwrap(), 1);

        let p = Graph::parse(GraphKind::PAG, &["X", "Y"], "X o-> Y").unwrap();
        let q = Graph::parse(GraphKind::PAG, &["X", "Y"], "X -> Y").unwrap();
        assert_eq!(shd(&p, &q).unwrap(), 1);
        let r = Graph::new(GraphKind::PAG, ["X", "Y"]).unwrap();
        assert_eq!(shd(&p, &r).unwrap(), 2);
    }

    #[test]
    fn kappa_g_zero_for_exact_projections() {
        let joint = Graph::parse(
            GraphKind::DAG,
            &["X", "Y", "Z1", "Z2"],
            "X -> Y, Z1 -> Y, Z2 -> Y, X -> Z2",
        )
        .unwrap();
        let joint_admg = latent_admg(&joint, &joint.node_set()).unwrap();
        let subsets = [node_set(&["X", "Y", "Z1"]), node_set(&["Y", "Z2"])];
        let marginals: Vec<(BTreeSet<NodeId>, DiscoveryOutcome)> = subsets
            .iter()
            .map(|s| {
                (
                    s.clone(),
                    DiscoveryOutcome::Graph(latent_admg(&joint, s).unwrap()),
                )
            })
            .collect();
        let res = kappa_g(&joint_admg, &marginals).unwrap();
        assert_eq!(res.value, Some(0.0));
    }

    #[test]
    fn kappa_g_positive_iff_any_marginal_differs() {
        let joint = Graph::parse(
            GraphKind::DAG,
            &["A", "B", "C", "D"],
            "A -> B, B -> C, A -> D",
        )
        .unwrap();
        let joint_admg = latent_admg(&joint, &joint.node_set()).unwrap();
        let subset = node_set(&["A", "C", "D"]);
        let exact = latent_admg(&joint, &subset).unwrap();
        let res = kappa_g(
            &joint_admg,
            &[(subset.clone(), DiscoveryOutcome::Graph(exact))],
        )
        .unwrap();
        assert_eq!(res.value, Some(0.0));

        // Mutate the marginal: drop one edge.
        let mut wrong = Graph::new(GraphKind::ADMG, ["A", "C", "D"]).unwrap();
        wrong.add_directed("A", "C").unwrap();
        let res = kappa_g(&joint_admg, &[(subset, DiscoveryOutcome::Graph(wrong))]).unwrap();
        assert!(res.value.unwrap() > 0.0);
    }

    #[test]
    fn kappa_g_fig1_discrepancy_value() {
        // Joint: CPDAG of the four-variable fixture DAG. Marginal on T:
        // the diverging sample-PC output Y -> X <- Z2.
        let dag = unfaithful_fig1_scm().dag().clone();
        let joint = dag_to_cpdag(&dag).unwrap();
        let marginal = Graph::parse(GraphKind::CPDAG, &["X", "Y", "Z2"], "Y -> X, Z2 -> X").unwrap();
        let subset = node_set(&["X", "Y", "Z2"]);
        let res = kappa_g(&joint, &[(subset, DiscoveryOutcome::Graph(marginal))]).unwrap();
        assert_eq!(res.value, Some(3.0));
    }

    #[test]
    fn kappa_g_bot_sentinel() {
        let joint = Graph::parse(GraphKind::DAG, &["A", "B"], "A -> B").unwrap();
        let marginals = vec![(
            node_set(&["A", "B"]),
            DiscoveryOutcome::Bot {
                diagnostic: "declared".into(),
            },
        )];
        let res = kappa_g(&joint, &marginals).unwrap();
        assert_eq!(res.value, None);
        assert_eq!(res.bot_count, 1);
    }

    #[test]
    fn kappa_i_entropy_admg_uncommitted() {
        let scm = unfaithful_fig1_scm();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let data = scm.sample(2000, &mut rng);
        let joint = entropy_admg(&data).unwrap();
        let subsets = [node_set(&["X", "Y"]), node_set(&["Y", "Z1", "Z2"])];
        let marginals: Vec<(BTreeSet<NodeId>, DiscoveryOutcome)> = subsets
            .iter()
            .map(|s| {
                let restricted = data.restrict(s).unwrap();
                (s.clone(), DiscoveryOutcome::Graph(entropy_admg(&restricted).unwrap()))
            })
            .collect();
        let res = kappa_i(&joint, &marginals, &data, 0.001, 5).unwrap();
        assert_eq!(res.normalizer_c, 0);
        assert_eq!(res.value, Some(0.0));
        assert!(res.uncommitted);
    }

    #[test]
    fn kappa_i_entropy_dag_detects_chain_incompatibility() {
        // Chain A -> B -> C with increasing variances: the complete entropy
        // DAG claims adjusted effects that contradict across subsets.
        let scm = LinearScm::new(
            &["A", "B", "C"],
            &[("A", "B", 1.0), ("B", "C", 1.0)],
            NoiseKind::Gaussian,
            &["A", "B", "C"],
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        let data = scm.sample(10_000, &mut rng);
        let joint = entropy_dag(&data).unwrap();
        let subsets = [
            node_set(&["A", "B"]),
            node_set(&["A", "C"]),
            node_set(&["B", "C"]),
        ];
        let marginals: Vec<(BTreeSet<NodeId>, DiscoveryOutcome)> = subsets
            .iter()
            .map(|s| {
                let restricted = data.restrict(s).unwrap();
                (s.clone(), DiscoveryOutcome::Graph(entropy_dag(&restricted).unwrap()))
            })
            .collect();
        let res = kappa_i(&joint, &marginals, &data, 0.001, 11).unwrap();
        assert!(res.normalizer_c > 0);
        assert!(res.value.unwrap() > 0.0, "kappa_i = {:?}", res.value);
    }

    #[test]
    fn kappa_i_in_unit_interval() {
        let scm = unfaithful_fig1_scm();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(44);
        let data = scm.sample(5000, &mut rng);
        let joint = entropy_dag(&data).unwrap();
        let subsets = [node_set(&["X", "Y", "Z1"]), node_set(&["X", "Y", "Z2"])];
        let marginals: Vec<(BTreeSet<NodeId>, DiscoveryOutcome)> = subsets
            .iter()
            .map(|s| {
                let restricted = data.restrict(s).unwrap();
                (s.clone(), DiscoveryOutcome::Graph(entropy_dag(&restricted).unwrap()))
            })
            .collect();
        let res = kappa_i(&joint, &marginals, &data, 0.001, 3).unwrap();
        let v = res.value.unwrap();
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn report_deterministic_and_zero_for_full_subsets() {
        let scm = unfaithful_fig1_scm();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(45);
        let data = scm.sample(2000, &mut rng);
        let nodes = data.column_set();
        let plan = sample_subsets(&nodes, nodes.len(), 3, 1).unwrap();
        let handle = AlgorithmHandle::EntropyDag;
        let a = self_compat_report(&handle, &data, &plan, 0.001, 2, true).unwrap();
        let b = self_compat_report(&handle, &data, &plan, 0.001, 2, true).unwrap();
        assert_eq!(a.kappa_g, b.kappa_g);
        assert_eq!(a.kappa_i, b.kappa_i);
        // Projection onto all nodes is the identity, so kappa_g must be 0.
        assert_eq!(a.kappa_g, Some(0.0));
    }

    #[test]
    fn report_with_oracle_projector_closure() {
        let truth = Graph::parse(
            GraphKind::DAG,
            &["X", "Y", "Z1", "Z2"],
            "X -> Y, Z1 -> Y, Z2 -> Y, X -> Z2",
        )
        .unwrap();
        let scm = unfaithful_fig1_scm();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(46);
        let data = scm.sample(500, &mut rng);
        let plan = sample_subsets(&data.column_set(), 2, 6, 9).unwrap();
        let discover = |s: &BTreeSet<NodeId>| {
            Ok(DiscoveryOutcome::Graph(latent_admg(&truth, s).unwrap()))
        };
        let report =
            self_compat_report_with(&discover, &data, &plan, 0.001, 4, false).unwrap();
        assert_eq!(report.kappa_g, Some(0.0));
    }

    #[test]
    fn scores_invariant_under_subset_permutation() {
        let scm = unfaithful_fig1_scm();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(47);
        let data = scm.sample(3000, &mut rng);
        let joint = entropy_dag(&data).unwrap();
        let subsets = [
            node_set(&["X", "Y", "Z1"]),
            node_set(&["X", "Y", "Z2"]),
            node_set(&["Y", "Z1", "Z2"]),
        ];
        let marginals: Vec<(BTreeSet<NodeId>, DiscoveryOutcome)> = subsets
            .iter()
            .map(|s| {
                let restricted = data.restrict(s).unwrap();
                (s.clone(), DiscoveryOutcome::Graph(entropy_dag(&restricted).unwrap()))
            })
            .collect();
        let forward_g = kappa_g(&joint, &marginals).unwrap().value;
        let forward_i = kappa_i(&joint, &marginals, &data, 0.001, 8).unwrap().value;
        let mut reversed = marginals.clone();
        reversed.reverse();
        assert_eq!(forward_g, kappa_g(&joint, &reversed).unwrap().value);
        assert_eq!(
            forward_i,
            kappa_i(&joint, &reversed, &data, 0.001, 8).unwrap().value
        );
    }
}
