//! From raw observations (or binned counts) to densities, distribution
//! functions and quantile functions.
//!
//! The kernel estimator is a Gaussian kernel smoother on a known compact
//! support with a pointwise boundary weight: at each evaluation point the
//! kernel sum is divided by the kernel mass that falls inside the support.
//! The result is then renormalized by its trapezoidal integral so it is a
//! proper density on the support.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::grid::{
    self, check_grid_size, cumulative_trapezoid, linspace, repair_monotone, trapezoid_nonuniform,
    DEFAULT_DENSITY_GRID, DEFAULT_QUANTILE_GRID,
};
use crate::quantile::QuantileFunction;

const MASS_TOLERANCE: f64 = 1e-9;

/// A compact interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    lower: f64,
    upper: f64,
}

impl Support {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_finite() && upper.is_finite() && lower < upper {
            Ok(Self { lower, upper })
        } else {
            Err(Error::InvalidSupport { lower, upper })
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

/// Observations drawn from one distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    values: Vec<f64>,
}

impl RawSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_support(&self, support: &Support) -> Result<()> {
        match self.values.iter().find(|v| !support.contains(**v)) {
            Some(&value) => Err(Error::OutsideSupport {
                value,
                lower: support.lower,
                upper: support.upper,
            }),
            None => Ok(()),
        }
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// A density tabulated on an increasing grid spanning its support.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    support: Support,
    grid: Vec<f64>,
    values: Vec<f64>,
}

fn check_support_grid(support: &Support, grid: &[f64]) -> Result<()> {
    check_grid_size(grid.len(), 2)?;
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidValues {
            what: "grid",
            reason: "must be strictly increasing".into(),
        });
    }
    if grid[0] != support.lower || grid[grid.len() - 1] != support.upper {
        return Err(Error::InvalidValues {
            what: "grid",
            reason: "must start and end at the support bounds".into(),
        });
    }
    Ok(())
}

impl DensityEstimate {
    pub fn new(support: Support, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_support_grid(&support, &grid)?;
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidValues {
                what: "density",
                reason: "values must be finite and nonnegative".into(),
            });
        }
        let mass = trapezoid_nonuniform(&grid, &values);
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidValues {
                what: "density",
                reason: format!("integrates to {mass}, not 1"),
            });
        }
        Ok(Self {
            support,
            grid,
            values,
        })
    }

    /// Rescales nonnegative values to unit trapezoidal mass.
    pub fn normalized(support: Support, grid: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        check_support_grid(&support, &grid)?;
        let mass = trapezoid_nonuniform(&grid, &values);
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidValues {
                what: "density",
                reason: format!("cannot normalize mass {mass}"),
            });
        }
        values.iter_mut().for_each(|v| *v /= mass);
        Self::new(support, grid, values)
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, u: f64) -> f64 {
        if !self.support.contains(u) {
            return 0.0;
        }
        grid::interp(&self.grid, &self.values, u)
    }

    pub fn mass(&self) -> f64 {
        trapezoid_nonuniform(&self.grid, &self.values)
    }
}

/// A distribution function tabulated on a grid spanning its support,
/// interpolated linearly between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfEstimate {
    support: Support,
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl CdfEstimate {
    pub fn new(support: Support, grid: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        check_support_grid(&support, &grid)?;
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        grid::check_finite(&values, "distribution function")?;
        repair_monotone(&mut values, "distribution function")?;
        let (first, last) = (values[0], values[values.len() - 1]);
        if first.abs() > MASS_TOLERANCE || (last - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidValues {
                what: "distribution function",
                reason: format!("must run from 0 to 1, got {first} to {last}"),
            });
        }
        Ok(Self {
            support,
            grid,
            values,
        })
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= self.support.lower {
            0.0
        } else if u >= self.support.upper {
            1.0
        } else {
            grid::interp(&self.grid, &self.values, u)
        }
    }

    /// Generalized inverse `inf{u : F(u) >= t}` of the piecewise-linear
    /// interpolant, with `t = 0` and `t = 1` sent to the support bounds.
    pub fn inverse(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.support.lower;
        }
        if t >= 1.0 {
            return self.support.upper;
        }
        let k = self.values.partition_point(|&v| v < t).max(1);
        if k == self.values.len() {
            return self.support.upper;
        }
        self.segment_inverse(k, t)
    }

    fn segment_inverse(&self, k: usize, t: f64) -> f64 {
        let (f0, f1) = (self.values[k - 1], self.values[k]);
        let (u0, u1) = (self.grid[k - 1], self.grid[k]);
        let w = (t - f0) / (f1 - f0);
        (u0 + w * (u1 - u0)).clamp(u0, u1)
    }
}

/// How to pick the kernel bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Silverman's rule of thumb, capped at the support width.
    Silverman,
    Fixed(f64),
}

impl Bandwidth {
    pub fn resolve(&self, sample: &RawSample, support: &Support) -> f64 {
        match *self {
            Bandwidth::Silverman => silverman_bandwidth(sample, support),
            Bandwidth::Fixed(h) => h,
        }
    }
}

/// `0.9 min(sd, IQR / 1.34) N^{-1/5}`.
///
/// A sample with no spread falls back to the standard deviation of the
/// uniform law on the support.
pub fn silverman_bandwidth(sample: &RawSample, support: &Support) -> f64 {
    let n = sample.len() as f64;
    let mean = sample.values.iter().sum::<f64>() / n;
    let var = sample.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let sd = var.sqrt();
    let sorted = sample.sorted();
    let iqr = empirical_quantile_at(&sorted, 0.75) - empirical_quantile_at(&sorted, 0.25);
    let mut spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if !(spread > 0.0) {
        spread = support.width() / 12f64.sqrt();
    }
    (0.9 * spread * n.powf(-0.2)).min(support.width())
}

/// Rule-of-thumb bandwidth for grouped data: `0.9 sd N^{-1/5}` with the
/// count-weighted standard deviation of the bin midpoints and `N` the total
/// count (at least 1), capped at the support width.
pub fn histogram_bandwidth(edges: &[f64], counts: &[f64]) -> Result<f64> {
    check_histogram(edges, counts)?;
    let total: f64 = counts.iter().sum();
    let mids: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mean = mids.iter().zip(counts).map(|(m, c)| m * c).sum::<f64>() / total;
    let var = mids.iter().zip(counts).map(|(m, c)| c * (m - mean).powi(2)).sum::<f64>() / total;
    let width = edges[edges.len() - 1] - edges[0];
    let spread = if var > 0.0 { var.sqrt() } else { (edges[1] - edges[0]) / 12f64.sqrt() };
    Ok((0.9 * spread * total.max(1.0).powf(-0.2)).min(width))
}

fn check_bandwidth(h: f64, support: &Support) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidBandwidth {
            bandwidth: h,
            reason: "must be positive and finite",
        });
    }
    if h > support.width() {
        return Err(Error::InvalidBandwidth {
            bandwidth: h,
            reason: "exceeds the support width",
        });
    }
    Ok(())
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

const KERNEL_REACH: f64 = 9.0;

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Kernel mass of a Gaussian centered at `x` that falls inside the support.
fn boundary_weight(x: f64, h: f64, support: &Support) -> f64 {
    std_normal_cdf((support.upper - x) / h) - std_normal_cdf((support.lower - x) / h)
}

/// Boundary-corrected Gaussian kernel density estimator on a fixed grid.
#[derive(Debug, Clone, Copy)]
pub struct KernelDensityEstimator {
    pub grid_size: usize,
}

impl Default for KernelDensityEstimator {
    fn default() -> Self {
        Self {
            grid_size: DEFAULT_DENSITY_GRID,
        }
    }
}

impl KernelDensityEstimator {
    pub fn new(grid_size: usize) -> Result<Self> {
        check_grid_size(grid_size, 3)?;
        Ok(Self { grid_size })
    }

    pub fn estimate(&self, sample: &RawSample, support: Support, bandwidth: f64) -> Result<DensityEstimate> {
        check_bandwidth(bandwidth, &support)?;
        sample.check_support(&support)?;
        let grid = linspace(support.lower, support.upper, self.grid_size);
        let h = bandwidth;
        let sorted = sample.sorted();
        let values = grid
            .iter()
            .map(|&x| {
                // kernel terms beyond KERNEL_REACH bandwidths are below 1e-17
                let lo = sorted.partition_point(|&w| w < x - KERNEL_REACH * h);
                let hi = sorted.partition_point(|&w| w <= x + KERNEL_REACH * h);
                let raw: f64 = sorted[lo..hi].iter().map(|&w| std_normal_pdf((x - w) / h)).sum();
                raw / (boundary_weight(x, h, &support) * h)
            })
            .collect();
        DensityEstimate::normalized(support, grid, values)
    }

    /// Smooths a histogram, spreading each bin's count uniformly over the bin
    /// before convolving with the kernel. The support is `[edges[0], edges[last]]`.
    pub fn from_histogram(&self, edges: &[f64], counts: &[f64], bandwidth: f64) -> Result<DensityEstimate> {
        check_histogram(edges, counts)?;
        let support = Support::new(edges[0], edges[edges.len() - 1])?;
        check_bandwidth(bandwidth, &support)?;
        let grid = linspace(support.lower, support.upper, self.grid_size);
        let h = bandwidth;
        let values = grid
            .iter()
            .map(|&x| {
                let raw: f64 = edges
                    .windows(2)
                    .zip(counts)
                    .filter(|(_, &c)| c > 0.0)
                    .map(|(e, &c)| {
                        let mass = std_normal_cdf((x - e[0]) / h) - std_normal_cdf((x - e[1]) / h);
                        c * mass / (e[1] - e[0])
                    })
                    .sum();
                raw / boundary_weight(x, h, &support)
            })
            .collect();
        DensityEstimate::normalized(support, grid, values)
    }
}

fn check_histogram(edges: &[f64], counts: &[f64]) -> Result<()> {
    if edges.len() < 2 || edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::NonMonotoneEdges);
    }
    if counts.len() != edges.len() - 1 {
        return Err(Error::HistogramShape {
            bins: edges.len() - 1,
            counts: counts.len(),
        });
    }
    if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) || !(counts.iter().sum::<f64>() > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok(())
}

/// [`KernelDensityEstimator::estimate`] on the default 512-point grid.
pub fn estimate_density(sample: &RawSample, support: Support, bandwidth: f64) -> Result<DensityEstimate> {
    KernelDensityEstimator::default().estimate(sample, support, bandwidth)
}

/// [`KernelDensityEstimator::from_histogram`] on the default 512-point grid.
pub fn histogram_to_density(edges: &[f64], counts: &[f64], bandwidth: f64) -> Result<DensityEstimate> {
    KernelDensityEstimator::default().from_histogram(edges, counts, bandwidth)
}

/// Cumulative trapezoidal integral, rescaled so the last value is exactly 1.
pub fn density_to_cdf(f: &DensityEstimate) -> CdfEstimate {
    let mut values = cumulative_trapezoid(&f.grid, &f.values);
    let total = values[values.len() - 1];
    values.iter_mut().for_each(|v| *v /= total);
    let last = values.len() - 1;
    values[last] = 1.0;
    CdfEstimate::new(f.support, f.grid.clone(), values).expect("cumulative integral of a density is a valid CDF")
}

/// Generalized inverse of `cdf` on the unit grid with `m` points.
///
/// Flat stretches of the CDF collapse onto their left end, so the quantile
/// jumps across regions of zero density. `q(0)` and `q(1)` are the support
/// bounds.
pub fn cdf_to_quantile_with(cdf: &CdfEstimate, m: usize) -> Result<QuantileFunction> {
    check_grid_size(m, 2)?;
    let last = (m - 1) as f64;
    let mut out = Vec::with_capacity(m);
    let mut k = 1;
    for i in 0..m {
        let value = if i == 0 {
            cdf.support.lower
        } else if i == m - 1 {
            cdf.support.upper
        } else {
            let t = i as f64 / last;
            while k < cdf.values.len() - 1 && cdf.values[k] < t {
                k += 1;
            }
            cdf.segment_inverse(k, t)
        };
        out.push(value);
    }
    QuantileFunction::new(out)
}

/// [`cdf_to_quantile_with`] on the default 1000-point grid.
pub fn cdf_to_quantile(cdf: &CdfEstimate) -> QuantileFunction {
    cdf_to_quantile_with(cdf, DEFAULT_QUANTILE_GRID).expect("default grid is valid")
}

fn empirical_quantile_at(sorted: &[f64], t: f64) -> f64 {
    let n = sorted.len();
    let k = ((t * n as f64).ceil() as usize).clamp(1, n);
    sorted[k - 1]
}

/// Left-continuous empirical inverse `inf{x : F_N(x) >= t}` on the unit grid.
/// At `t = 0` it returns the sample minimum.
pub fn empirical_quantile_with(sample: &RawSample, m: usize) -> Result<QuantileFunction> {
    check_grid_size(m, 2)?;
    let sorted = sample.sorted();
    let n = sorted.len();
    let denom = m - 1;
    // k = ceil(i n / (m - 1)) in exact integer arithmetic
    let values = (0..m)
        .map(|i| {
            let k = ((i * n + denom - 1) / denom).clamp(1, n);
            sorted[k - 1]
        })
        .collect();
    QuantileFunction::new(values)
}

pub fn empirical_quantile(sample: &RawSample) -> QuantileFunction {
    empirical_quantile_with(sample, DEFAULT_QUANTILE_GRID).expect("default grid is valid")
}

/// Age-at-death histogram on `[lower, upper]` from a life table.
///
/// `survivors[a]` is the number alive at exact age `ages[a]` (ages must be
/// consecutive bin edges); deaths in `[ages[a], ages[a + 1])` are
/// `survivors[a] - survivors[a + 1]`. Returns `(edges, counts)` restricted to
/// the requested age range.
pub fn life_table_histogram(ages: &[f64], survivors: &[f64], lower: f64, upper: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if ages.len() != survivors.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} ages but {} survivor counts",
            ages.len(),
            survivors.len()
        )));
    }
    if ages.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::NonMonotoneEdges);
    }
    let mut edges = Vec::new();
    let mut counts = Vec::new();
    for i in 0..ages.len().saturating_sub(1) {
        if ages[i] >= lower && ages[i + 1] <= upper {
            if edges.is_empty() {
                edges.push(ages[i]);
            }
            edges.push(ages[i + 1]);
            counts.push((survivors[i] - survivors[i + 1]).max(0.0));
        }
    }
    check_histogram(&edges, &counts)?;
    Ok((edges, counts))
}
