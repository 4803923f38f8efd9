//! Experiment orchestration: dataset generation, scoring runs, correlation
//! studies and score-based model selection. All randomness flows from one
//! master seed through documented per-dataset derivations.

pub mod fixtures;

use crate::discovery::AlgorithmHandle;
use crate::graph::{Graph, GraphKind, NodeId};
use crate::projection::{latent_admg, latent_cpdag, latent_mag, latent_pag};
use crate::scm::{random_dag, random_linear_scm, Dataset, NoiseKind};
use crate::scores::{
    self, sample_subsets, self_compat_report, shd, ScoreReport, SubsetPlan,
};
use crate::stats;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Scm(#[from] crate::scm::ScmError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Score(#[from] crate::scores::ScoreError),
    #[error(transparent)]
    Projection(#[from] crate::projection::ProjectionError),
    #[error(transparent)]
    Discovery(#[from] crate::discovery::DiscoveryError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
    #[error("analysis needs at least {need} records with ground truth, got {got}")]
    TooFewRecords { need: usize, got: usize },
    #[error("missing records for algorithm `{0}`")]
    MissingAlgorithm(String),
}

fn io_err<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> HarnessError + '_ {
    move |e| HarnessError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// A labelled algorithm entry.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AlgorithmSpec {
    pub label: String,
    pub handle: AlgorithmHandle,
}

/// Experiment parameters; the defaults mirror the synthetic benchmark:
/// 10 observed nodes, expected degree 2, 1000 samples, 40 subsets of size 5,
/// test level 0.001.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ExperimentConfig {
    pub n_obs: usize,
    pub n_hidden: usize,
    pub expected_degree: f64,
    pub noise_kind: NoiseKind,
    pub n_samples: usize,
    pub n_datasets: usize,
    /// None = half the observed nodes, rounded up.
    pub subset_size: Option<usize>,
    pub subset_count: usize,
    pub algorithms: Vec<AlgorithmSpec>,
    pub compute_kappa_i: bool,
    pub level: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_obs: 10,
            n_hidden: 0,
            expected_degree: 2.0,
            noise_kind: NoiseKind::Gaussian,
            n_samples: 1000,
            n_datasets: 100,
            subset_size: None,
            subset_count: 40,
            algorithms: vec![AlgorithmSpec {
                label: "pc_0.01".into(),
                handle: AlgorithmHandle::BuiltinPc { alpha: 0.01 },
            }],
            compute_kappa_i: false,
            level: 0.001,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn subset_size_or_default(&self) -> usize {
        self.subset_size
            .unwrap_or_else(|| scores::default_subset_size(self.n_obs))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n_obs < 2 {
            return Err(HarnessError::Config("n_obs must be at least 2".into()));
        }
        if self.n_datasets < 1 {
            return Err(HarnessError::Config("n_datasets must be at least 1".into()));
        }
        let size = self.subset_size_or_default();
        if size < 1 || size > self.n_obs {
            return Err(HarnessError::Config(format!(
                "subset size {size} out of range for {} observed nodes",
                self.n_obs
            )));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::Config("no algorithms configured".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(HarnessError::Config("level must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Stable per-dataset seed derivation from the master seed.
pub fn derive_seed(master: u64, domain: &str, index: u64) -> u64 {
    let mut h = master;
    for b in domain.bytes() {
        h = scores::splitmix64(h ^ (b as u64));
    }
    scores::splitmix64(h ^ index)
}

/// Per-dataset manifest entry: derived seeds and files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub id: usize,
    pub data_seed: u64,
    pub subset_seed: u64,
    pub score_seed: u64,
    pub csv: String,
    pub truth: String,
    pub observed: Vec<NodeId>,
    pub avg_true_degree: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub datasets: Vec<DatasetEntry>,
}

/// Generates `n_datasets` synthetic datasets plus ground-truth graphs and a
/// manifest with the derived seeds; byte-identical for identical inputs.
pub fn cmd_generate(config: &ExperimentConfig, out_dir: &Path) -> Result<Manifest, HarnessError> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut entries = Vec::with_capacity(config.n_datasets);
    for id in 0..config.n_datasets {
        let data_seed = derive_seed(config.seed, "data", id as u64);
        let subset_seed = derive_seed(config.seed, "subsets", id as u64);
        let score_seed = derive_seed(config.seed, "score", id as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(data_seed);
        let (dag, observed) =
            random_dag(config.n_obs, config.n_hidden, config.expected_degree, &mut rng)?;
        let scm = random_linear_scm(&dag, &observed, config.noise_kind, &mut rng)?;
        let data = scm.sample(config.n_samples, &mut rng);

        let csv_name = format!("data_{id:03}.csv");
        let truth_name = format!("truth_{id:03}.json");
        data.write_csv_file(&out_dir.join(&csv_name))?;
        std::fs::write(out_dir.join(&truth_name), dag.encode())
            .map_err(io_err(out_dir))?;

        let degree = 2.0 * dag.edge_count() as f64 / dag.node_count() as f64;
        entries.push(DatasetEntry {
            id,
            data_seed,
            subset_seed,
            score_seed,
            csv: csv_name,
            truth: truth_name,
            observed: observed.into_iter().collect(),
            avg_true_degree: degree,
        });
    }
    let manifest = Manifest {
        config: config.clone(),
        datasets: entries,
    };
    let manifest_path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    std::fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, HarnessError> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))
}

/// One scored (dataset, algorithm) run. The timing field is audit metadata:
/// it travels in records.json but stays out of records.csv so that identical
/// configs and seeds reproduce the CSV byte-for-byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset_id: usize,
    pub algorithm: String,
    pub kappa_g: Option<f64>,
    pub kappa_i: Option<f64>,
    pub incompatible_by_bot: bool,
    pub uncommitted_warning: bool,
    pub shd_to_truth: Option<u32>,
    pub avg_true_degree: f64,
    #[serde(default)]
    pub elapsed_ms: u64,
}

/// CSV projection of `RunRecord` without the volatile timing column.
#[derive(Serialize, Deserialize)]
struct CsvRow {
    dataset_id: usize,
    algorithm: String,
    kappa_g: Option<f64>,
    kappa_i: Option<f64>,
    incompatible_by_bot: bool,
    uncommitted_warning: bool,
    shd_to_truth: Option<u32>,
    avg_true_degree: f64,
}

impl From<&RunRecord> for CsvRow {
    fn from(r: &RunRecord) -> Self {
        CsvRow {
            dataset_id: r.dataset_id,
            algorithm: r.algorithm.clone(),
            kappa_g: r.kappa_g,
            kappa_i: r.kappa_i,
            incompatible_by_bot: r.incompatible_by_bot,
            uncommitted_warning: r.uncommitted_warning,
            shd_to_truth: r.shd_to_truth,
            avg_true_degree: r.avg_true_degree,
        }
    }
}

impl From<CsvRow> for RunRecord {
    fn from(r: CsvRow) -> Self {
        RunRecord {
            dataset_id: r.dataset_id,
            algorithm: r.algorithm,
            kappa_g: r.kappa_g,
            kappa_i: r.kappa_i,
            incompatible_by_bot: r.incompatible_by_bot,
            uncommitted_warning: r.uncommitted_warning,
            shd_to_truth: r.shd_to_truth,
            avg_true_degree: r.avg_true_degree,
            elapsed_ms: 0,
        }
    }
}

/// SHD of an output against the ground-truth DAG projected into the output's
/// graph class over the observed nodes.
pub fn shd_to_truth(
    truth: &Graph,
    observed: &BTreeSet<NodeId>,
    output: &Graph,
) -> Result<u32, HarnessError> {
    let reference = match output.kind() {
        GraphKind::CPDAG => latent_cpdag(truth, observed)?,
        GraphKind::DAG | GraphKind::ADMG => latent_admg(truth, observed)?,
        GraphKind::MAG => latent_mag(truth, observed)?,
        GraphKind::PAG => latent_pag(truth, observed)?,
    };
    Ok(shd(&reference, output)?)
}

/// Scores every (dataset, algorithm) pair; persists one report JSON per run
/// plus a tidy records table. Per-run failures are recorded and the run
/// continues.
pub fn cmd_score(
    manifest: &Manifest,
    data_dir: &Path,
    out_dir: &Path,
) -> Result<Vec<RunRecord>, HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let config = &manifest.config;
    let tasks: Vec<(&DatasetEntry, &AlgorithmSpec)> = manifest
        .datasets
        .iter()
        .flat_map(|d| config.algorithms.iter().map(move |a| (d, a)))
        .collect();
    let results: Vec<Result<(RunRecord, ScoreReport), HarnessError>> = tasks
        .par_iter()
        .map(|(entry, spec)| score_one(config, entry, spec, data_dir))
        .collect();
    let mut records = Vec::with_capacity(results.len());
    for result in results {
        let (record, report) = result?;
        let report_path = out_dir.join(format!(
            "report_{:03}_{}.json",
            record.dataset_id, record.algorithm
        ));
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        std::fs::write(&report_path, text).map_err(io_err(&report_path))?;
        records.push(record);
    }
    records.sort_by(|a, b| {
        (a.dataset_id, &a.algorithm).cmp(&(b.dataset_id, &b.algorithm))
    });
    write_records(&records, out_dir)?;
    Ok(records)
}

fn score_one(
    config: &ExperimentConfig,
    entry: &DatasetEntry,
    spec: &AlgorithmSpec,
    data_dir: &Path,
) -> Result<(RunRecord, ScoreReport), HarnessError> {
    let started = std::time::Instant::now();
    let data = Dataset::read_csv_file(&data_dir.join(&entry.csv))?;
    let truth_text = std::fs::read_to_string(data_dir.join(&entry.truth))
        .map_err(io_err(data_dir))?;
    let truth = Graph::decode(&truth_text)?;
    let observed: BTreeSet<NodeId> = entry.observed.iter().cloned().collect();

    let plan: SubsetPlan = sample_subsets(
        &data.column_set(),
        config.subset_size_or_default().min(data.columns().len()),
        config.subset_count,
        entry.subset_seed,
    )?;
    let report = self_compat_report(
        &spec.handle,
        &data,
        &plan,
        config.level,
        entry.score_seed,
        config.compute_kappa_i,
    )?;

    // SHD of the full-set output against the projected truth.
    let full_output = crate::discovery::run_algorithm(&spec.handle, &data, &data.column_set())?;
    let shd_value = match full_output.graph() {
        Some(g) => Some(shd_to_truth(&truth, &observed, g)?),
        None => None,
    };

    let record = RunRecord {
        dataset_id: entry.id,
        algorithm: spec.label.clone(),
        kappa_g: report.kappa_g,
        kappa_i: report.kappa_i,
        incompatible_by_bot: report.incompatible_by_bot,
        uncommitted_warning: report.uncommitted_warning,
        shd_to_truth: shd_value,
        avg_true_degree: entry.avg_true_degree,
        elapsed_ms: started.elapsed().as_millis() as u64,
    };
    Ok((record, report))
}

fn write_records(records: &[RunRecord], out_dir: &Path) -> Result<(), HarnessError> {
    let json_path = out_dir.join("records.json");
    let text = serde_json::to_string_pretty(records)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    std::fs::write(&json_path, text).map_err(io_err(&json_path))?;

    let csv_path = out_dir.join("records.csv");
    let mut writer = csv::Writer::from_path(&csv_path).map_err(io_err(&csv_path))?;
    for r in records {
        writer.serialize(CsvRow::from(r)).map_err(io_err(&csv_path))?;
    }
    writer.flush().map_err(io_err(&csv_path))?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let mut reader = csv::Reader::from_path(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for row in reader.deserialize::<CsvRow>() {
        out.push(row.map_err(io_err(path))?.into());
    }
    Ok(out)
}

/// Correlation table between one kappa column and the SHD to truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub score: String,
    pub n: usize,
    pub pearson_r: f64,
    pub pearson_p: f64,
    pub spearman_r: f64,
    pub spearman_p: f64,
    pub partial_r_given_degree: f64,
    pub partial_p_given_degree: f64,
}

/// Correlates each kappa column with the SHD to truth, plus the
/// degree-controlled partial correlation.
pub fn cmd_correlate(records: &[RunRecord]) -> Result<Vec<CorrelationRow>, HarnessError> {
    let mut rows = Vec::new();
    for (name, pick) in [
        ("kappa_g", (|r: &RunRecord| r.kappa_g) as fn(&RunRecord) -> Option<f64>),
        ("kappa_i", |r: &RunRecord| r.kappa_i),
    ] {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut degrees = Vec::new();
        for r in records {
            if let (Some(k), Some(s)) = (pick(r), r.shd_to_truth) {
                xs.push(k);
                ys.push(s as f64);
                degrees.push(r.avg_true_degree);
            }
        }
        if xs.is_empty() {
            continue;
        }
        if xs.len() < 10 {
            return Err(HarnessError::TooFewRecords {
                need: 10,
                got: xs.len(),
            });
        }
        let (pearson_r, pearson_p) = stats::partial_correlation_analysis(&xs, &ys, &[])?;
        let (spearman_r, spearman_p) = stats::spearman(&xs, &ys)?;
        let (partial_r, partial_p) =
            stats::partial_correlation_analysis(&xs, &ys, &[degrees])?;
        rows.push(CorrelationRow {
            score: name.to_string(),
            n: xs.len(),
            pearson_r,
            pearson_p,
            spearman_r,
            spearman_p,
            partial_r_given_degree: partial_r,
            partial_p_given_degree: partial_p,
        });
    }
    Ok(rows)
}

/// Which score column drives model selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreColumn {
    KappaG,
    KappaI,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionRow {
    pub dataset_id: usize,
    pub winner: String,
    pub winner_shd: Option<u32>,
    pub loser_shd: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub rows: Vec<SelectionRow>,
    pub strictly_better: f64,
    pub ties: f64,
    pub strictly_worse: f64,
}

/// Picks, per dataset, the algorithm with the lower score (ties recorded as
/// such) and reports how often the pick had better, equal or worse SHD.
/// A score that is absent (bot) loses against any present score.
pub fn cmd_select(
    records: &[RunRecord],
    label_a: &str,
    label_b: &str,
    by: ScoreColumn,
) -> Result<SelectionSummary, HarnessError> {
    let pick = |r: &RunRecord| match by {
        ScoreColumn::KappaG => r.kappa_g,
        ScoreColumn::KappaI => r.kappa_i,
    };
    let mut ids: Vec<usize> = records
        .iter()
        .filter(|r| r.algorithm == label_a)
        .map(|r| r.dataset_id)
        .collect();
    ids.sort_unstable();
    if ids.is_empty() {
        return Err(HarnessError::MissingAlgorithm(label_a.to_string()));
    }
    let find = |id: usize, label: &str| {
        records
            .iter()
            .find(|r| r.dataset_id == id && r.algorithm == label)
    };
    let mut rows = Vec::new();
    let (mut better, mut tie, mut worse) = (0usize, 0usize, 0usize);
    for id in ids {
        let a = find(id, label_a)
            .ok_or_else(|| HarnessError::MissingAlgorithm(label_a.to_string()))?;
        let b = find(id, label_b)
            .ok_or_else(|| HarnessError::MissingAlgorithm(label_b.to_string()))?;
        let (winner, loser) = match (pick(a), pick(b)) {
            (Some(ka), Some(kb)) if ka < kb => (a, b),
            (Some(ka), Some(kb)) if kb < ka => (b, a),
            (Some(_), None) => (a, b),
            (None, Some(_)) => (b, a),
            _ => {
                tie += 1;
                rows.push(SelectionRow {
                    dataset_id: id,
                    winner: "tie".into(),
                    winner_shd: a.shd_to_truth,
                    loser_shd: b.shd_to_truth,
                });
                continue;
            }
        };
        match (winner.shd_to_truth, loser.shd_to_truth) {
            (Some(w), Some(l)) if w < l => better += 1,
            (Some(w), Some(l)) if w > l => worse += 1,
            _ => tie += 1,
        }
        rows.push(SelectionRow {
            dataset_id: id,
            winner: winner.algorithm.clone(),
            winner_shd: winner.shd_to_truth,
            loser_shd: loser.shd_to_truth,
        });
    }
    let total = rows.len() as f64;
    Ok(SelectionSummary {
        rows,
        strictly_better: better as f64 / total,
        ties: tie as f64 / total,
        strictly_worse: worse as f64 / total,
    })
}
