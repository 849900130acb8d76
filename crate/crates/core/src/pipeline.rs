//! From long-format tables to quantile ensembles.
//!
//! Cells are estimated in parallel and collected in table order, so results
//! do not depend on scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::density::{
    cdf_to_quantile_with, density_to_cdf, empirical_quantile_with, histogram_bandwidth, Bandwidth,
    KernelDensityEstimator, RawSample, Support,
};
use crate::error::{Error, Result};
use crate::estimation::QuantileEnsemble;
use crate::grid::{DEFAULT_DENSITY_GRID, DEFAULT_QUANTILE_GRID};
use crate::io::{histogram_cell, HistogramTable, QuantileTable, RawTable};
use crate::quantile::QuantileFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileMethod {
    /// Kernel density estimate, integrated and inverted.
    Smoothed,
    /// Empirical quantile of the raw sample.
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationOptions {
    pub quantile_grid: usize,
    pub density_grid: usize,
    pub bandwidth: Bandwidth,
    pub method: QuantileMethod,
    /// Support shared by all components unless overridden.
    pub support: Option<(f64, f64)>,
    pub component_supports: BTreeMap<String, (f64, f64)>,
}

impl Default for EstimationOptions {
    fn default() -> Self {
        Self {
            quantile_grid: DEFAULT_QUANTILE_GRID,
            density_grid: DEFAULT_DENSITY_GRID,
            bandwidth: Bandwidth::Silverman,
            method: QuantileMethod::Smoothed,
            support: None,
            component_supports: BTreeMap::new(),
        }
    }
}

impl EstimationOptions {
    /// Declared support of `component`, if any.
    pub fn declared_support(&self, component: &str) -> Option<Result<Support>> {
        self.component_supports
            .get(component)
            .or(self.support.as_ref())
            .map(|&(a, b)| Support::new(a, b))
    }
}

/// Declared support, or the range of the component's values over all subjects.
fn component_support(table: &RawTable, component: &str, opts: &EstimationOptions) -> Result<Support> {
    if let Some(s) = opts.declared_support(component) {
        return s;
    }
    let (lo, hi) = table
        .subjects()
        .filter_map(|s| table.cell(s, component))
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.value), hi.max(v.value)));
    Support::new(lo, hi).map_err(|_| {
        Error::InvalidArgument(format!("component {component} has no spread; declare its support"))
    })
}

fn labelled(subjects: Vec<String>, labels: Vec<String>, rows: Vec<QuantileFunction>, p: usize) -> Result<QuantileTable> {
    let mut rows = rows.into_iter();
    let grouped = (0..subjects.len()).map(|_| rows.by_ref().take(p).collect()).collect();
    Ok(QuantileTable { subjects, ensemble: QuantileEnsemble::new(labels, grouped)? })
}

/// Estimates one quantile function per `(subject, component)` cell of raw
/// observations.
pub fn ensemble_from_raw(table: &RawTable, opts: &EstimationOptions) -> Result<QuantileTable> {
    table.check_complete()?;
    let subjects: Vec<String> = table.subjects().map(String::from).collect();
    let labels: Vec<String> = table.components().map(String::from).collect();
    let supports = labels.iter().map(|c| component_support(table, c, opts)).collect::<Result<Vec<_>>>()?;
    for s in &subjects {
        for (c, support) in labels.iter().zip(&supports) {
            if let Some(v) = table.cell(s, c).unwrap().iter().find(|v| !support.contains(v.value)) {
                return Err(Error::CellOutsideSupport {
                    subject: s.clone(),
                    component: c.clone(),
                    line: v.line,
                    value: v.value,
                    lower: support.lower(),
                    upper: support.upper(),
                });
            }
        }
    }
    let kde = KernelDensityEstimator::new(opts.density_grid)?;
    let p = labels.len();
    let cells: Vec<(usize, usize)> = (0..subjects.len()).flat_map(|i| (0..p).map(move |j| (i, j))).collect();
    let rows = cells
        .par_iter()
        .map(|&(i, j)| {
            let (s, c) = (&subjects[i], &labels[j]);
            let estimate = || -> Result<QuantileFunction> {
                let sample = RawSample::new(table.cell(s, c).unwrap().iter().map(|v| v.value).collect())?;
                match opts.method {
                    QuantileMethod::Empirical => empirical_quantile_with(&sample, opts.quantile_grid),
                    QuantileMethod::Smoothed => {
                        let h = opts.bandwidth.resolve(&sample, &supports[j]);
                        let f = kde.estimate(&sample, supports[j], h)?;
                        cdf_to_quantile_with(&density_to_cdf(&f), opts.quantile_grid)
                    }
                }
            };
            estimate().map_err(|e| e.in_cell(s, c))
        })
        .collect::<Result<Vec<_>>>()?;
    labelled(subjects, labels, rows, p)
}

/// Smooths each `(unit, index)` histogram and inverts it. Histogram supports
/// are the outer bin edges; a declared support must contain them.
pub fn ensemble_from_histograms(table: &HistogramTable, opts: &EstimationOptions) -> Result<QuantileTable> {
    if opts.method == QuantileMethod::Empirical {
        return Err(Error::InvalidArgument("histogram input needs the smoothed estimator".into()));
    }
    table.check_complete()?;
    let subjects: Vec<String> = table.subjects().map(String::from).collect();
    let labels: Vec<String> = table.components().map(String::from).collect();
    let kde = KernelDensityEstimator::new(opts.density_grid)?;
    let p = labels.len();
    let cells: Vec<(usize, usize)> = (0..subjects.len()).flat_map(|i| (0..p).map(move |j| (i, j))).collect();
    let rows = cells
        .par_iter()
        .map(|&(i, j)| {
            let (s, c) = (&subjects[i], &labels[j]);
            let bins = table.cell(s, c).unwrap();
            let (edges, counts) = histogram_cell(bins)?;
            if let Some(support) = opts.declared_support(c) {
                let support = support?;
                let (lo, hi) = (edges[0], edges[edges.len() - 1]);
                if let Some(&(value, line)) = [(lo, bins.iter().map(|b| b.line).min().unwrap()), (hi, bins.iter().map(|b| b.line).max().unwrap())]
                    .iter()
                    .find(|(v, _)| !support.contains(*v))
                {
                    return Err(Error::CellOutsideSupport {
                        subject: s.clone(),
                        component: c.clone(),
                        line,
                        value,
                        lower: support.lower(),
                        upper: support.upper(),
                    });
                }
            }
            let estimate = || -> Result<QuantileFunction> {
                let h = match opts.bandwidth {
                    Bandwidth::Fixed(h) => h,
                    Bandwidth::Silverman => histogram_bandwidth(&edges, &counts)?,
                };
                let f = kde.from_histogram(&edges, &counts, h)?;
                cdf_to_quantile_with(&density_to_cdf(&f), opts.quantile_grid)
            };
            estimate().map_err(|e| e.in_cell(s, c))
        })
        .collect::<Result<Vec<_>>>()?;
    labelled(subjects, labels, rows, p)
}

/// Component labels read as numbers and mapped affinely onto `[0, 1]`;
/// `None` unless every label is numeric and they increase.
pub fn numeric_time_index(labels: &[String]) -> Option<Vec<f64>> {
    let x: Vec<f64> = labels.iter().map(|l| l.parse::<f64>().ok().filter(|v| v.is_finite())).collect::<Option<_>>()?;
    if x.len() < 2 || x.windows(2).any(|w| !(w[0] < w[1])) {
        return None;
    }
    let (lo, hi) = (x[0], x[x.len() - 1]);
    Some(x.iter().map(|v| (v - lo) / (hi - lo)).collect())
}
