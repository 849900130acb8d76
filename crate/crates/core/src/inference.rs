//! Bootstrap tests for equality of Wasserstein covariance structure across
//! groups.
//!
//! Under the null every group shares one covariance, so each subject's
//! quantile process is centered at its own group's Wasserstein mean and the
//! centered processes are pooled. A replicate draws `Σ n_g` processes from the
//! pool with replacement, splits them into groups of the original sizes,
//! re-estimates each group's matrix and recomputes the statistic.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{corr_matrix, CovSurface, Curves, QuantileEnsemble, WassersteinCovMatrix};
use crate::linalg;
use crate::rng;

/// Two or more labelled ensembles with matching components and grids.
#[derive(Debug, Clone)]
pub struct GroupedEnsembles {
    groups: Vec<(String, QuantileEnsemble)>,
}

impl GroupedEnsembles {
    pub fn new(groups: Vec<(String, QuantileEnsemble)>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::TooFewGroups { got: groups.len() });
        }
        let first = &groups[0].1;
        for (label, g) in &groups[1..] {
            if g.p() != first.p() || g.grid_size() != first.grid_size() {
                return Err(Error::DimensionMismatch(format!(
                    "group {label} has p = {}, M = {}; expected p = {}, M = {}",
                    g.p(),
                    g.grid_size(),
                    first.p(),
                    first.grid_size()
                )));
            }
            if g.time_index() != first.time_index() {
                return Err(Error::DimensionMismatch(format!("group {label} has a different time index")));
            }
        }
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[(String, QuantileEnsemble)] {
        &self.groups
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|(_, g)| g.n()).collect()
    }

    pub fn p(&self) -> usize {
        self.groups[0].1.p()
    }
}

/// Which between-group distance to bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// Sum over group pairs of squared Frobenius distances between matrix logarithms.
    LogFrobenius,
    /// Sum over group pairs of Frobenius distances between principal square roots.
    SqrtDistance,
    /// `LogFrobenius` on the correlation matrices.
    CorrLogFrobenius,
    /// `SqrtDistance` on the correlation matrices.
    CorrSqrtDistance,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 4] = [
        StatisticKind::LogFrobenius,
        StatisticKind::SqrtDistance,
        StatisticKind::CorrLogFrobenius,
        StatisticKind::CorrSqrtDistance,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StatisticKind::LogFrobenius => "log_frobenius",
            StatisticKind::SqrtDistance => "sqrt_distance",
            StatisticKind::CorrLogFrobenius => "corr_log_frobenius",
            StatisticKind::CorrSqrtDistance => "corr_sqrt_distance",
        }
    }

    fn uses_correlation(&self) -> bool {
        matches!(self, StatisticKind::CorrLogFrobenius | StatisticKind::CorrSqrtDistance)
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StatisticKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown statistic {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    #[serde(rename = "B")]
    pub replicates: usize,
    pub seed: u64,
    pub statistic_kind: StatisticKind,
    pub group_labels: Vec<String>,
    pub group_sizes: Vec<usize>,
    /// Eigenvalues raised to the log floor while computing the observed statistic.
    pub floored_eigenvalues: usize,
    pub null_distribution: Vec<f64>,
}

fn frobenius_sq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm_squared()
}

/// Eigenvalue scale shared by all matrices in a comparison: the largest
/// eigenvalue over the set.
fn log_scale(mats: &[DMatrix<f64>]) -> Result<f64> {
    let largest = mats.iter().map(linalg::max_eigenvalue).fold(f64::NEG_INFINITY, f64::max);
    if !(largest > 0.0 && largest.is_finite()) {
        return Err(Error::NotPositiveDefinite { largest });
    }
    Ok(largest)
}

/// Eigenvalues below `LOG_EIGEN_FLOOR × scale` are floored before the logs.
fn log_frobenius(mats: &[DMatrix<f64>], scale: f64) -> Result<(f64, usize)> {
    let floor = linalg::LOG_EIGEN_FLOOR * scale;
    let mut floored = 0;
    let logs = mats
        .iter()
        .map(|m| {
            let (l, f) = linalg::spd_log_floored(m, floor)?;
            floored += f;
            Ok(l)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s = 0.0;
    for a in 0..logs.len() {
        for b in a + 1..logs.len() {
            s += frobenius_sq(&logs[a], &logs[b]);
        }
    }
    Ok((s, floored))
}

fn sqrt_distance(mats: &[DMatrix<f64>]) -> Result<f64> {
    let roots = mats.iter().map(linalg::psd_sqrt).collect::<Result<Vec<_>>>()?;
    let mut s = 0.0;
    for a in 0..roots.len() {
        for b in a + 1..roots.len() {
            s += frobenius_sq(&roots[a], &roots[b]).sqrt();
        }
    }
    Ok(s)
}

fn check_same_shape(mats: &[DMatrix<f64>]) -> Result<()> {
    match mats.first() {
        Some(first) if mats.iter().all(|m| m.shape() == first.shape()) => Ok(()),
        Some(_) => Err(Error::DimensionMismatch("matrices differ in size".into())),
        None => Err(Error::TooFewGroups { got: 0 }),
    }
}

/// `Σ_{a<b} ‖log Σ_a - log Σ_b‖²_F` with principal logarithms.
///
/// Eigenvalues below `LOG_EIGEN_FLOOR` times the largest eigenvalue across
/// all the matrices are floored first.
pub fn statistic_log_frobenius(matrices: &[WassersteinCovMatrix]) -> Result<f64> {
    let mats: Vec<DMatrix<f64>> = matrices.iter().map(|m| m.matrix().clone()).collect();
    check_same_shape(&mats)?;
    let scale = log_scale(&mats)?;
    Ok(log_frobenius(&mats, scale)?.0)
}

/// `Σ_{a<b} ‖S_a^{1/2} - S_b^{1/2}‖_F` on the nodal matrices of the surfaces.
pub fn statistic_sqrt_distance(surfaces: &[CovSurface]) -> Result<f64> {
    let mats: Vec<DMatrix<f64>> = surfaces.iter().map(|s| s.values().clone()).collect();
    check_same_shape(&mats)?;
    sqrt_distance(&mats)
}

/// Correlation of a resampled covariance; a component that resampling made
/// constant gets unit variance and no correlation.
fn lenient_corr(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let p = cov.nrows();
    let sd: Vec<f64> = (0..p).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    DMatrix::from_fn(p, p, |j, k| {
        if j == k {
            1.0
        } else if sd[j] > 0.0 && sd[k] > 0.0 {
            (cov[(j, k)] / (sd[j] * sd[k])).clamp(-1.0, 1.0)
        } else {
            0.0
        }
    })
}

/// The statistic and the log scale it used. `scale` fixes the eigenvalue
/// floor (bootstrap replicates reuse the observed one).
fn statistic_of(kind: StatisticKind, mut mats: Vec<DMatrix<f64>>, scale: Option<f64>) -> Result<(f64, usize, f64)> {
    if kind.uses_correlation() {
        mats = match scale {
            None => mats.iter().map(corr_matrix).collect::<Result<_>>()?,
            Some(_) => mats.iter().map(lenient_corr).collect(),
        };
    }
    match kind {
        StatisticKind::LogFrobenius | StatisticKind::CorrLogFrobenius => {
            let scale = match scale {
                Some(s) => s,
                None => log_scale(&mats)?,
            };
            let (s, floored) = log_frobenius(&mats, scale)?;
            Ok((s, floored, scale))
        }
        StatisticKind::SqrtDistance | StatisticKind::CorrSqrtDistance => Ok((sqrt_distance(&mats)?, 0, 0.0)),
    }
}

/// Group-centered quantile processes, pooled in group order.
///
/// Centered processes are deviations from a mean, not quantile functions, so
/// they are kept in their own type.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredPool {
    curves: Curves,
    group_sizes: Vec<usize>,
}

impl CenteredPool {
    pub fn n(&self) -> usize {
        self.curves.n
    }

    pub fn p(&self) -> usize {
        self.curves.p
    }

    pub fn grid_size(&self) -> usize {
        self.curves.m
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn curve(&self, subject: usize, component: usize) -> &[f64] {
        self.curves.curve(subject, component)
    }

    /// Pointwise mean of component `j` over the pooled rows `rows`.
    pub fn mean_curve(&self, rows: &[usize], component: usize) -> Vec<f64> {
        let m = self.curves.m;
        self.curves.means(rows)[component * m..(component + 1) * m].to_vec()
    }

    /// Covariance matrix of the pooled processes listed in `rows`.
    pub fn covariance(&self, rows: &[usize]) -> DMatrix<f64> {
        self.curves.covariance(rows)
    }
}

pub fn center_and_pool(groups: &GroupedEnsembles) -> CenteredPool {
    let first = &groups.groups[0].1;
    let (p, m) = (first.p(), first.grid_size());
    let total: usize = groups.sizes().iter().sum();
    let mut data = Vec::with_capacity(total * p * m);
    for (_, g) in &groups.groups {
        let c = g.curves();
        let rows: Vec<usize> = (0..c.n).collect();
        let means = c.means(&rows);
        for i in 0..c.n {
            data.extend(c.subject(i).iter().zip(&means).map(|(x, mu)| x - mu));
        }
    }
    CenteredPool {
        curves: Curves { n: total, p, m, data },
        group_sizes: groups.sizes(),
    }
}

fn split_rows(sizes: &[usize], rows: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &n in sizes {
        out.push(rows[start..start + n].to_vec());
        start += n;
    }
    out
}

/// One null replicate: resample the pool with replacement and split.
fn replicate(pool: &CenteredPool, kind: StatisticKind, scale: f64, seed: u64, index: u64) -> Result<f64> {
    let mut rng = rng::stream(seed, index);
    let total = pool.n();
    let rows: Vec<usize> = (0..total).map(|_| rng.random_range(0..total)).collect();
    let mats = split_rows(&pool.group_sizes, &rows)
        .iter()
        .map(|r| pool.covariance(r))
        .collect();
    Ok(statistic_of(kind, mats, Some(scale))?.0)
}

/// Bootstrap p-value for equality of the groups' Wasserstein covariance (or
/// correlation) matrices, `(1 + #{S_b ≥ S_obs}) / (B + 1)`.
///
/// Replicate `b` draws from the random stream `(seed, b)`, so the result does
/// not depend on how replicates are scheduled.
pub fn bootstrap_test(groups: &GroupedEnsembles, kind: StatisticKind, replicates: usize, seed: u64) -> Result<TestResult> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one bootstrap replicate".into()));
    }
    let observed_mats = groups
        .groups
        .iter()
        .map(|(_, g)| {
            let c = g.curves();
            c.covariance(&(0..c.n).collect::<Vec<_>>())
        })
        .collect();
    let (statistic, floored, scale) = statistic_of(kind, observed_mats, None)?;
    let pool = center_and_pool(groups);
    let null_distribution = (0..replicates as u64)
        .into_par_iter()
        .map(|b| replicate(&pool, kind, scale, seed, b))
        .collect::<Result<Vec<f64>>>()?;
    let exceed = null_distribution.iter().filter(|&&s| s >= statistic).count();
    Ok(TestResult {
        statistic,
        p_value: (1 + exceed) as f64 / (replicates + 1) as f64,
        replicates,
        seed,
        statistic_kind: kind,
        group_labels: groups.groups.iter().map(|(l, _)| l.clone()).collect(),
        group_sizes: groups.sizes(),
        floored_eigenvalues: floored,
        null_distribution,
    })
}
