//! Statistical kernel: Fisher-Z conditional independence, partial regression
//! coefficients, the bootstrap-Wald equality-of-adjusted-effects test, and
//! partial correlation analysis.

use crate::graph::NodeId;
use crate::scm::Dataset;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};
use std::collections::BTreeSet;
use thiserror::Error;

/// Bootstrap resamples used by `equal_effects_test`.
pub const BOOTSTRAP_RESAMPLES: usize = 500;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("needs more samples: m = {m} with {p} conditioning/control columns")]
    InsufficientSamples { m: usize, p: usize },
    #[error("singular or rank-deficient design ({0})")]
    Singular(String),
    #[error("constant input")]
    ConstantInput,
    #[error("need at least two adjustment sets")]
    TooFewSets,
    #[error("level must lie in (0, 1)")]
    BadLevel,
    #[error("test inconclusive: {0}")]
    Inconclusive(String),
}

/// Conditional-independence test result.
#[derive(Debug, Clone)]
pub struct CiResult {
    pub statistic: f64,
    pub p_value: f64,
    pub independent: bool,
}

/// Fisher-Z test of x _||_ y | z from the sample correlation matrix.
pub fn fisher_z(
    data: &Dataset,
    x: &str,
    y: &str,
    z: &BTreeSet<NodeId>,
    alpha: f64,
) -> Result<CiResult, StatsError> {
    let m = data.n_samples();
    if m <= z.len() + 3 {
        return Err(StatsError::InsufficientSamples { m, p: z.len() });
    }
    let mut names: Vec<&str> = vec![x, y];
    names.extend(z.iter().map(|n| n.as_str()));
    let cov = covariance_submatrix(data, &names)?;
    let r = partial_correlation_from_cov(&cov)?;
    Ok(fisher_z_from_r(r, m, z.len(), alpha))
}

/// Fisher-Z statistic and two-sided p-value for a partial correlation `r`
/// computed from `m` samples given `k` conditioning variables.
pub(crate) fn fisher_z_from_r(r: f64, m: usize, k: usize, alpha: f64) -> CiResult {
    let dof = m as f64 - k as f64 - 3.0;
    let clipped = r.clamp(-1.0 + 1e-15, 1.0 - 1e-15);
    let statistic = dof.sqrt() * 0.5 * ((1.0 + clipped) / (1.0 - clipped)).ln();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let p_value = 2.0 * (1.0 - normal.cdf(statistic.abs()));
    CiResult {
        statistic,
        p_value,
        independent: p_value >= alpha,
    }
}

/// Partial correlation of the first two variables given the rest, from a
/// covariance matrix, via precision-matrix inversion.
pub(crate) fn partial_correlation_from_cov(cov: &DMatrix<f64>) -> Result<f64, StatsError> {
    let precision = cov
        .clone()
        .try_inverse()
        .ok_or_else(|| StatsError::Singular("covariance not invertible".into()))?;
    let denom = precision[(0, 0)] * precision[(1, 1)];
    if denom <= 0.0 {
        return Err(StatsError::Singular("non-positive precision diagonal".into()));
    }
    Ok(-precision[(0, 1)] / denom.sqrt())
}

fn covariance_submatrix(data: &Dataset, names: &[&str]) -> Result<DMatrix<f64>, StatsError> {
    let cols: Result<Vec<usize>, _> = names
        .iter()
        .map(|n| {
            data.column_index(n)
                .map_err(|_| StatsError::UnknownColumn(n.to_string()))
        })
        .collect();
    let cols = cols?;
    let m = data.n_samples();
    let values = data.values();
    let means: Vec<f64> = cols.iter().map(|&c| values.column(c).mean()).collect();
    let k = cols.len();
    let mut cov = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let mut s = 0.0;
            for r in 0..m {
                s += (values[(r, cols[i])] - means[i]) * (values[(r, cols[j])] - means[j]);
            }
            let c = s / (m as f64 - 1.0);
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    Ok(cov)
}

/// OLS coefficient on `regressor` when `response` is regressed on the
/// regressor, the controls and an intercept.
pub fn partial_regression_coefficient(
    data: &Dataset,
    response: &str,
    regressor: &str,
    controls: &BTreeSet<NodeId>,
) -> Result<f64, StatsError> {
    let m = data.n_samples();
    if m <= controls.len() + 2 {
        return Err(StatsError::InsufficientSamples {
            m,
            p: controls.len(),
        });
    }
    let y = col_vector(data, response)?;
    let mut design_cols: Vec<Vec<f64>> = vec![vec![1.0; m]];
    design_cols.push(col_vector(data, regressor)?);
    for c in controls {
        design_cols.push(col_vector(data, c.as_str())?);
    }
    let beta = ols(&design_cols, &y)?;
    Ok(beta[1])
}

fn col_vector(data: &Dataset, name: &str) -> Result<Vec<f64>, StatsError> {
    data.column(name)
        .map_err(|_| StatsError::UnknownColumn(name.to_string()))
}

/// Solves least squares via the normal equations (designs here are tiny).
fn ols(cols: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>, StatsError> {
    let p = cols.len();
    let mut xtx = DMatrix::zeros(p, p);
    let mut xty = DVector::zeros(p);
    for i in 0..p {
        for j in i..p {
            let s: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            xtx[(i, j)] = s;
            xtx[(j, i)] = s;
        }
        xty[i] = cols[i].iter().zip(y).map(|(a, b)| a * b).sum();
    }
    let chol = xtx
        .cholesky()
        .ok_or_else(|| StatsError::Singular("rank-deficient design".into()))?;
    Ok(chol.solve(&xty).iter().copied().collect())
}

/// Result of the equality-of-adjusted-effects test.
#[derive(Debug, Clone)]
pub struct EffectTestResult {
    /// One coefficient per adjustment set, on the full sample.
    pub coefficients: Vec<f64>,
    pub p_value: f64,
    pub reject: bool,
}

/// Tests the null that all adjustment sets yield the same effect of
/// `treatment` on `outcome`: per-set partial regression coefficients on one
/// shared sample, their joint covariance estimated by a seeded nonparametric
/// bootstrap, and a Wald statistic on pairwise differences against a
/// chi-squared with (number of sets - 1) degrees of freedom.
pub fn equal_effects_test<R: Rng>(
    data: &Dataset,
    treatment: &str,
    outcome: &str,
    adjustment_sets: &[BTreeSet<NodeId>],
    level: f64,
    rng: &mut R,
) -> Result<EffectTestResult, StatsError> {
    if adjustment_sets.len() < 2 {
        return Err(StatsError::TooFewSets);
    }
    if !(0.0..1.0).contains(&level) || level <= 0.0 {
        return Err(StatsError::BadLevel);
    }
    let k = adjustment_sets.len();
    let coefficients: Vec<f64> = adjustment_sets
        .iter()
        .map(|set| partial_regression_coefficient(data, outcome, treatment, set))
        .collect::<Result<_, _>>()?;

    let diffs: Vec<f64> = (1..k).map(|l| coefficients[l] - coefficients[0]).collect();
    if diffs.iter().all(|d| *d == 0.0) {
        // Identical sets (or numerically identical fits): nothing to reject.
        return Ok(EffectTestResult {
            coefficients,
            p_value: 1.0,
            reject: false,
        });
    }

    let m = data.n_samples();
    let mut boot_diffs: Vec<Vec<f64>> = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut indices = vec![0usize; m];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for slot in indices.iter_mut() {
            *slot = rng.gen_range(0..m);
        }
        let resample = resample_rows(data, &indices);
        let betas: Result<Vec<f64>, StatsError> = adjustment_sets
            .iter()
            .map(|set| partial_regression_coefficient(&resample, outcome, treatment, set))
            .collect();
        match betas {
            Ok(b) => boot_diffs.push((1..k).map(|l| b[l] - b[0]).collect()),
            Err(e) => {
                return Err(StatsError::Inconclusive(format!(
                    "bootstrap resample failed: {e}"
                )))
            }
        }
    }

    let q = k - 1;
    let mut mean = vec![0.0; q];
    for d in &boot_diffs {
        for (s, v) in mean.iter_mut().zip(d) {
            *s += v;
        }
    }
    for s in mean.iter_mut() {
        *s /= boot_diffs.len() as f64;
    }
    let mut cov = DMatrix::zeros(q, q);
    for d in &boot_diffs {
        for i in 0..q {
            for j in 0..q {
                cov[(i, j)] += (d[i] - mean[i]) * (d[j] - mean[j]);
            }
        }
    }
    cov /= boot_diffs.len() as f64 - 1.0;

    let inv = cov
        .try_inverse()
        .ok_or_else(|| StatsError::Inconclusive("degenerate bootstrap covariance".into()))?;
    let d = DVector::from_vec(diffs);
    let wald = (d.transpose() * inv * &d)[(0, 0)];
    if !wald.is_finite() || wald < 0.0 {
        return Err(StatsError::Inconclusive("non-finite Wald statistic".into()));
    }
    let chi = ChiSquared::new(q as f64).unwrap();
    let p_value = 1.0 - chi.cdf(wald);
    Ok(EffectTestResult {
        coefficients,
        p_value,
        reject: p_value < level,
    })
}

fn resample_rows(data: &Dataset, indices: &[usize]) -> Dataset {
    let values = data.values();
    let out = DMatrix::from_fn(indices.len(), values.ncols(), |r, c| {
        values[(indices[r], c)]
    });
    Dataset::new(data.columns().to_vec(), out).expect("resample keeps shape")
}

/// Pearson correlation of xs and ys after residualizing both on the control
/// columns (with intercept); returns (r, two-sided p) with the t-test on
/// n - 2 - #controls degrees of freedom.
pub fn partial_correlation_analysis(
    xs: &[f64],
    ys: &[f64],
    controls: &[Vec<f64>],
) -> Result<(f64, f64), StatsError> {
    let n = xs.len();
    if n != ys.len() || controls.iter().any(|c| c.len() != n) {
        return Err(StatsError::Singular("length mismatch".into()));
    }
    if n < controls.len() + 4 {
        return Err(StatsError::InsufficientSamples {
            m: n,
            p: controls.len(),
        });
    }
    let rx = residualize(xs, controls)?;
    let ry = residualize(ys, controls)?;
    let r = pearson(&rx, &ry)?;
    let dof = (n - 2 - controls.len()) as f64;
    let clipped = r.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
    let t = clipped * (dof / (1.0 - clipped * clipped)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, dof).unwrap();
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok((r, p))
}

fn residualize(y: &[f64], controls: &[Vec<f64>]) -> Result<Vec<f64>, StatsError> {
    let n = y.len();
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; n]];
    cols.extend(controls.iter().cloned());
    let beta = ols(&cols, y)?;
    Ok((0..n)
        .map(|i| {
            let fit: f64 = cols.iter().zip(&beta).map(|(c, b)| c[i] * b).sum();
            y[i] - fit
        })
        .collect())
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(StatsError::ConstantInput);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation with the same t-approximation as
/// `partial_correlation_analysis`.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), StatsError> {
    if xs.len() != ys.len() || xs.len() < 4 {
        return Err(StatsError::InsufficientSamples {
            m: xs.len(),
            p: 0,
        });
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let r = pearson(&rx, &ry)?;
    let dof = (xs.len() - 2) as f64;
    let clipped = r.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
    let t = clipped * (dof / (1.0 - clipped * clipped)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, dof).unwrap();
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok((r, p))
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}
