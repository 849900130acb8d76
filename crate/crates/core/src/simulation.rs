//! Synthetic vectors of densities with a closed-form Wasserstein covariance.
//!
//! A location-scale law draws, for each subject, a location `μ_j` and scale
//! `σ_j` per component and sets `q_j(t) = μ_j + σ_j B(t)` for a centered base
//! quantile `B`. The deviation of `q_j` from the mean quantile is
//! `(μ_j - E μ_j) + (σ_j - E σ_j) B(t)`, and since `∫ B = 0` the population
//! covariance is `Cov(μ) + c Cov(σ)` with `c = ∫ B²`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::density::{cdf_to_quantile_with, density_to_cdf, Bandwidth, KernelDensityEstimator, RawSample, Support};
use crate::error::{Error, Result};
use crate::estimation::{wasserstein_cov_kernel, wasserstein_cov_matrix, QuantileEnsemble};
use crate::geometry::wasserstein_distance;
use crate::grid::{self, trapezoid, DEFAULT_DENSITY_GRID};
use crate::linalg;
use crate::quantile::QuantileFunction;
use crate::rng::{self, StreamRng};

/// Scales are floored at this fraction of their mean.
pub const SIGMA_FLOOR_RATIO: f64 = 0.05;

/// Centered base quantile functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BaseLaw {
    /// `B(t) = t - 1/2`, the uniform law on `[-1/2, 1/2]`; `∫ B² = 1/12`.
    Uniform,
    /// Standard normal truncated to `[-bound, bound]`.
    TruncatedNormal { bound: f64 },
}

impl BaseLaw {
    pub fn quantile(&self, m: usize) -> Result<QuantileFunction> {
        match *self {
            BaseLaw::Uniform => QuantileFunction::from_fn(m, |t| t - 0.5),
            BaseLaw::TruncatedNormal { bound } => {
                if !(bound > 0.0 && bound.is_finite()) {
                    return Err(Error::InvalidLaw(format!("truncation bound {bound} must be positive")));
                }
                let z = Normal::standard();
                let lo = z.cdf(-bound);
                let mass = 1.0 - 2.0 * lo;
                let t = grid::unit_grid(m);
                let mut v: Vec<f64> = t.iter().map(|t| z.inverse_cdf(lo + t * mass).clamp(-bound, bound)).collect();
                // enforce exact antisymmetry so the base is centered on the grid
                for i in 0..m / 2 {
                    let a = 0.5 * (v[i] - v[m - 1 - i]);
                    v[i] = a;
                    v[m - 1 - i] = -a;
                }
                if m % 2 == 1 {
                    v[m / 2] = 0.0;
                }
                QuantileFunction::new(v)
            }
        }
    }
}

/// `q_j(t) = μ_j + σ_j B(t)` with `μ ~ N(mu_mean, mu_cov)` independent of
/// `σ ~ N(sigma_mean, sigma_cov)`, the latter floored at
/// `SIGMA_FLOOR_RATIO × sigma_mean`.
#[derive(Debug, Clone)]
pub struct LocationScaleLaw {
    base: QuantileFunction,
    mu_mean: DVector<f64>,
    mu_cov: DMatrix<f64>,
    sigma_mean: DVector<f64>,
    sigma_cov: DMatrix<f64>,
    mu_factor: DMatrix<f64>,
    sigma_factor: DMatrix<f64>,
}

fn check_cov(name: &str, m: &DMatrix<f64>, p: usize) -> Result<()> {
    if m.shape() != (p, p) {
        return Err(Error::InvalidLaw(format!("{name} must be {p}x{p}")));
    }
    if m.iter().any(|v| !v.is_finite()) || linalg::max_asymmetry(m) > 1e-12 * m.amax().max(1.0) {
        return Err(Error::InvalidLaw(format!("{name} must be finite and symmetric")));
    }
    if linalg::min_eigenvalue(m) < -1e-9 * m.amax().max(1.0) {
        return Err(Error::InvalidLaw(format!("{name} is not positive semidefinite")));
    }
    Ok(())
}

impl LocationScaleLaw {
    pub fn new(
        base: QuantileFunction,
        mu_mean: Vec<f64>,
        mu_cov: DMatrix<f64>,
        sigma_mean: Vec<f64>,
        sigma_cov: DMatrix<f64>,
    ) -> Result<Self> {
        let p = mu_mean.len();
        if p == 0 || sigma_mean.len() != p {
            return Err(Error::InvalidLaw("mu_mean and sigma_mean must have the same positive length".into()));
        }
        if mu_mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidLaw("mu_mean must be finite".into()));
        }
        if sigma_mean.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidLaw("sigma_mean entries must be positive".into()));
        }
        check_cov("mu_cov", &mu_cov, p)?;
        check_cov("sigma_cov", &sigma_cov, p)?;
        let scale = base.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(scale > 0.0) {
            return Err(Error::InvalidLaw("base quantile is constant".into()));
        }
        if base.mean().abs() > 1e-9 * scale {
            return Err(Error::InvalidLaw(format!("base quantile has mean {}, expected 0", base.mean())));
        }
        Ok(Self {
            mu_factor: linalg::psd_factor(&mu_cov),
            sigma_factor: linalg::psd_factor(&sigma_cov),
            base,
            mu_mean: DVector::from_vec(mu_mean),
            mu_cov,
            sigma_mean: DVector::from_vec(sigma_mean),
            sigma_cov,
        })
    }

    pub fn p(&self) -> usize {
        self.mu_mean.len()
    }

    pub fn grid_size(&self) -> usize {
        self.base.grid_size()
    }

    pub fn base(&self) -> &QuantileFunction {
        &self.base
    }

    pub fn mu_cov(&self) -> &DMatrix<f64> {
        &self.mu_cov
    }

    pub fn sigma_cov(&self) -> &DMatrix<f64> {
        &self.sigma_cov
    }

    /// `∫ B(t)² dt` on the grid.
    pub fn base_second_moment(&self) -> f64 {
        let sq: Vec<f64> = self.base.values().iter().map(|b| b * b).collect();
        trapezoid(&sq, self.base.step())
    }

    /// Population Wasserstein covariance `mu_cov + c sigma_cov`.
    pub fn oracle_cov(&self) -> DMatrix<f64> {
        &self.mu_cov + &self.sigma_cov * self.base_second_moment()
    }

    /// Quantile function of the population Wasserstein mean of component `j`.
    pub fn mean_quantile(&self, j: usize) -> QuantileFunction {
        let (mu, s) = (self.mu_mean[j], self.sigma_mean[j]);
        QuantileFunction::new(self.base.values().iter().map(|b| mu + s * b).collect()).expect("positive scale")
    }
}

fn standard_normals(rng: &mut StreamRng, p: usize) -> DVector<f64> {
    DVector::from_iterator(p, (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// One subject's vector of `p` quantile functions.
pub fn draw_density_vector(law: &LocationScaleLaw, rng: &mut StreamRng) -> Vec<QuantileFunction> {
    let p = law.p();
    let mu = &law.mu_mean + &law.mu_factor * standard_normals(rng, p);
    let sigma = &law.sigma_mean + &law.sigma_factor * standard_normals(rng, p);
    (0..p)
        .map(|j| {
            let s = sigma[j].max(SIGMA_FLOOR_RATIO * law.sigma_mean[j]);
            let values = law.base.values().iter().map(|b| mu[j] + s * b).collect();
            QuantileFunction::new(values).expect("positive scale on a monotone base")
        })
        .collect()
}

/// `n` subjects drawn independently; subject `i` uses stream `(seed, i)`.
pub fn draw_ensemble(law: &LocationScaleLaw, n: usize, seed: u64) -> Result<QuantileEnsemble> {
    let rows = (0..n as u64)
        .into_par_iter()
        .map(|i| draw_density_vector(law, &mut rng::stream(seed, i)))
        .collect();
    QuantileEnsemble::unlabelled(rows)
}

/// `n_obs` inverse-CDF draws `W = q(U)`, `U ~ U[0, 1]`.
pub fn sample_observations(q: &QuantileFunction, n_obs: usize, rng: &mut StreamRng) -> Result<RawSample> {
    if n_obs == 0 {
        return Err(Error::EmptySample);
    }
    RawSample::new((0..n_obs).map(|_| q.eval(rng.random::<f64>())).collect())
}

/// How the densities enter the estimator in a rate experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    /// Quantile functions are used directly.
    Exact,
    /// Each density is observed through this many draws and re-estimated.
    Sampled(usize),
}

impl Observation {
    fn order_key(&self) -> usize {
        match *self {
            Observation::Exact => usize::MAX,
            Observation::Sampled(n) => n,
        }
    }
}

pub type SurfaceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// What a rate experiment measures.
#[derive(Clone)]
pub enum RateTarget {
    /// `‖Σ̂ - Σ‖_F` against the law's oracle matrix.
    Matrix,
    /// `∫∫ (Σ̂(y, z) - Σ(y, z))² dy dz` on `eval_points²` nodes, with the
    /// components placed at `y_j = j / (p - 1)`. Without an explicit truth the
    /// oracle matrix is interpolated bilinearly.
    Kernel { truth: Option<SurfaceFn>, eval_points: usize },
}

impl std::fmt::Debug for RateTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateTarget::Matrix => f.write_str("Matrix"),
            RateTarget::Kernel { truth, eval_points } => f
                .debug_struct("Kernel")
                .field("truth", &truth.as_ref().map(|_| "<fn>"))
                .field("eval_points", eval_points)
                .finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RateExperiment {
    pub n_list: Vec<usize>,
    pub observations: Vec<Observation>,
    pub replicates: usize,
    pub seed: u64,
    pub target: RateTarget,
    pub bandwidth: Bandwidth,
    pub density_grid: usize,
}

impl RateExperiment {
    pub fn new(n_list: Vec<usize>, observations: Vec<Observation>, replicates: usize, seed: u64) -> Self {
        Self {
            n_list,
            observations,
            replicates,
            seed,
            target: RateTarget::Matrix,
            bandwidth: Bandwidth::Silverman,
            density_grid: DEFAULT_DENSITY_GRID,
        }
    }

    pub fn with_target(mut self, target: RateTarget) -> Self {
        self.target = target;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub observation: Observation,
    pub replicates: usize,
    pub mean_error: f64,
    pub se_error: f64,
    /// Entrywise mean of `Σ̂ - Σ` over replicates (matrix target only), row-major.
    pub bias: Vec<f64>,
    /// Monte Carlo standard errors of `bias`.
    pub bias_se: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `ln mean_error` on `ln n` over the rows with
    /// the finest observation setting; `None` when undefined.
    pub slope: Option<f64>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    slope.is_finite().then_some(slope)
}

/// Re-estimates a drawn quantile function from `n_obs` observations of it on
/// its own (known) support.
fn reestimate(
    q: &QuantileFunction,
    n_obs: usize,
    bandwidth: Bandwidth,
    kde: &KernelDensityEstimator,
    rng: &mut StreamRng,
) -> Result<QuantileFunction> {
    let sample = sample_observations(q, n_obs, rng)?;
    let support = Support::new(q.lower(), q.upper())?;
    let h = bandwidth.resolve(&sample, &support);
    let f = kde.estimate(&sample, support, h)?;
    cdf_to_quantile_with(&density_to_cdf(&f), q.grid_size())
}

fn observed_ensemble(
    law: &LocationScaleLaw,
    n: usize,
    obs: Observation,
    exp: &RateExperiment,
    seed: u64,
) -> Result<QuantileEnsemble> {
    let kde = KernelDensityEstimator::new(exp.density_grid)?;
    let rows = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i);
            let truth = draw_density_vector(law, &mut rng);
            match obs {
                Observation::Exact => Ok(truth),
                Observation::Sampled(n_obs) => truth
                    .iter()
                    .map(|q| reestimate(q, n_obs, exp.bandwidth, &kde, &mut rng))
                    .collect(),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    QuantileEnsemble::unlabelled(rows)
}

fn integrated_squared_error(estimate: impl Fn(f64, f64) -> f64, truth: impl Fn(f64, f64) -> f64, points: usize) -> f64 {
    let g = grid::unit_grid(points);
    let step = grid::unit_step(points);
    let inner: Vec<f64> = g
        .iter()
        .map(|&y| {
            let row: Vec<f64> = g.iter().map(|&z| (estimate(y, z) - truth(y, z)).powi(2)).collect();
            trapezoid(&row, step)
        })
        .collect();
    trapezoid(&inner, step)
}

/// Monte Carlo mean estimation error of the covariance matrix (or kernel)
/// for every `(n, observation)` pair.
pub fn rate_experiment(law: &LocationScaleLaw, exp: &RateExperiment) -> Result<RateTable> {
    if exp.replicates == 0 || exp.n_list.is_empty() || exp.observations.is_empty() {
        return Err(Error::InvalidArgument("need replicates, n values and observation settings".into()));
    }
    if exp.n_list.iter().any(|&n| n < 2) {
        return Err(Error::TooFewSubjects { min: 2, got: *exp.n_list.iter().min().unwrap() });
    }
    if exp.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n values must be strictly increasing".into()));
    }
    let oracle = law.oracle_cov();
    let p = law.p();
    let oracle_surface = if matches!(exp.target, RateTarget::Kernel { .. }) {
        if p < 2 {
            return Err(Error::InvalidTimeIndex("kernel target needs p >= 2".into()));
        }
        Some(crate::estimation::CovSurface::new(grid::unit_grid(p), oracle.clone())?)
    } else {
        None
    };

    // Streams depend on (n, replicate) only: every observation setting sees
    // the same latent densities.
    let mut rows = Vec::new();
    for &obs in &exp.observations {
        for &n in &exp.n_list {
            let row_seed = rng::derive_seed(exp.seed, n as u64);
            let results = (0..exp.replicates as u64)
                .map(|r| {
                    let ens = observed_ensemble(law, n, obs, exp, rng::derive_seed(row_seed, r))?;
                    match &exp.target {
                        RateTarget::Matrix => {
                            let diff = wasserstein_cov_matrix(&ens).matrix() - &oracle;
                            Ok((diff.norm(), diff.iter().copied().collect::<Vec<f64>>()))
                        }
                        RateTarget::Kernel { truth, eval_points } => {
                            let est = wasserstein_cov_kernel(&ens.with_equispaced_time_index()?)?;
                            let err = match truth {
                                Some(f) => integrated_squared_error(|y, z| est.eval(y, z), |y, z| f(y, z), *eval_points),
                                None => {
                                    let o = oracle_surface.as_ref().expect("built for kernel target");
                                    integrated_squared_error(|y, z| est.eval(y, z), |y, z| o.eval(y, z), *eval_points)
                                }
                            };
                            Ok((err, Vec::new()))
                        }
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let errors: Vec<f64> = results.iter().map(|r| r.0).collect();
            let (mean_error, se_error) = mean_se(&errors);
            let (bias, bias_se) = if matches!(exp.target, RateTarget::Matrix) {
                (0..p * p)
                    .map(|e| mean_se(&results.iter().map(|r| r.1[e]).collect::<Vec<_>>()))
                    .unzip()
            } else {
                (Vec::new(), Vec::new())
            };
            rows.push(RateRow {
                n,
                observation: obs,
                replicates: exp.replicates,
                mean_error,
                se_error,
                bias,
                bias_se,
            });
        }
    }

    let finest = exp.observations.iter().max_by_key(|o| o.order_key()).copied();
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| Some(r.observation) == finest && r.mean_error > 0.0)
        .map(|r| ((r.n as f64).ln(), r.mean_error.ln()))
        .unzip();
    let slope = if x.len() == exp.n_list.len() { ols_slope(&x, &y) } else { None };
    Ok(RateTable { rows, slope })
}

/// Mean and standard error of `d_W(f, f̂)` when one component density drawn
/// from `law` is re-estimated from `n_obs` observations, over `replicates`
/// independent draws.
pub fn density_estimation_error(
    law: &LocationScaleLaw,
    component: usize,
    n_obs: usize,
    replicates: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if component >= law.p() {
        return Err(Error::ComponentOutOfRange { index: component, p: law.p() });
    }
    let kde = KernelDensityEstimator::default();
    let errors = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, r);
            let q = &draw_density_vector(law, &mut rng)[component];
            let est = reestimate(q, n_obs, Bandwidth::Silverman, &kde, &mut rng)?;
            wasserstein_distance(q, &est)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_se(&errors))
}

/// JSON description of a location-scale law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LawSpec {
    pub base: BaseLaw,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    pub mu_mean: Vec<f64>,
    pub mu_cov: Vec<Vec<f64>>,
    pub sigma_mean: Vec<f64>,
    pub sigma_cov: Vec<Vec<f64>>,
}

fn default_grid() -> usize {
    grid::DEFAULT_QUANTILE_GRID
}

fn matrix_from_rows(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let p = rows.len();
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::InvalidLaw(format!("{name} must be square")));
    }
    Ok(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
}

impl LawSpec {
    pub fn build(&self) -> Result<LocationScaleLaw> {
        grid::check_grid_size(self.grid_size, 3)?;
        LocationScaleLaw::new(
            self.base.quantile(self.grid_size)?,
            self.mu_mean.clone(),
            matrix_from_rows("mu_cov", &self.mu_cov)?,
            self.sigma_mean.clone(),
            matrix_from_rows("sigma_cov", &self.sigma_cov)?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(mu_cov: DMatrix<f64>, sigma_cov: DMatrix<f64>) -> LocationScaleLaw {
        let p = mu_cov.nrows();
        LocationScaleLaw::new(
            BaseLaw::Uniform.quantile(201).unwrap(),
            vec![1.0; p],
            mu_cov,
            vec![1.0; p],
            sigma_cov,
        )
        .unwrap()
    }

    #[test]
    fn degenerate_law_draws_the_mean() {
        let l = law(DMatrix::zeros(2, 2), DMatrix::zeros(2, 2));
        let mut rng = rng::stream(1, 0);
        for _ in 0..5 {
            let v = draw_density_vector(&l, &mut rng);
            assert_eq!(v[0], l.mean_quantile(0));
            assert_eq!(v[1], l.mean_quantile(1));
        }
    }

    #[test]
    fn unit_scale_draws_are_uniform_quantiles() {
        let l = law(DMatrix::identity(1, 1), DMatrix::zeros(1, 1));
        let mut rng = rng::stream(9, 0);
        let q = &draw_density_vector(&l, &mut rng)[0];
        let mu = q.eval(0.5);
        assert!((q.lower() - (mu - 0.5)).abs() < 1e-12);
        assert!((q.upper() - (mu + 0.5)).abs() < 1e-12);
        for (t, v) in q.tgrid().iter().zip(q.values()) {
            assert!((v - (mu + t - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_base_oracle() {
        let l = LocationScaleLaw::new(
            BaseLaw::Uniform.quantile(1000).unwrap(),
            vec![0.0],
            DMatrix::from_element(1, 1, 2.0),
            vec![1.0],
            DMatrix::from_element(1, 1, 0.12),
        )
        .unwrap();
        assert!((l.base_second_moment() - 1.0 / 12.0).abs() < 1e-6);
        assert!((l.oracle_cov()[(0, 0)] - 2.01).abs() < 1e-7);
    }

    #[test]
    fn law_validation() {
        let base = BaseLaw::Uniform.quantile(11).unwrap();
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(LocationScaleLaw::new(base.clone(), vec![0.0; 2], bad, vec![1.0; 2], DMatrix::zeros(2, 2)).is_err());
        assert!(LocationScaleLaw::new(base.clone(), vec![0.0], DMatrix::zeros(1, 1), vec![-1.0], DMatrix::zeros(1, 1)).is_err());
        let shifted = QuantileFunction::from_fn(11, |t| t).unwrap();
        assert!(LocationScaleLaw::new(shifted, vec![0.0], DMatrix::zeros(1, 1), vec![1.0], DMatrix::zeros(1, 1)).is_err());
        let tn = BaseLaw::TruncatedNormal { bound: 3.0 }.quantile(101).unwrap();
        assert!(tn.mean().abs() < 1e-15);
        assert!((tn.upper() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_quantile_sampling() {
        let q = QuantileFunction::new(vec![2.5; 10]).unwrap();
        let s = sample_observations(&q, 50, &mut rng::stream(0, 0)).unwrap();
        assert!(s.values().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn sample_mean_of_uniform_0_2() {
        let q = QuantileFunction::uniform(1000, 0.0, 2.0).unwrap();
        let n = 20_000;
        let s = sample_observations(&q, n, &mut rng::stream(5, 0)).unwrap();
        let mean = s.values().iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 3.0 / (3.0 * n as f64).sqrt());
        assert!(s.values().iter().all(|v| (0.0..=2.0).contains(v)));
    }

    #[test]
    fn rate_experiment_degenerate_law_has_zero_error() {
        let l = law(DMatrix::zeros(2, 2), DMatrix::zeros(2, 2));
        let t = rate_experiment(&l, &RateExperiment::new(vec![5, 10], vec![Observation::Exact], 3, 1)).unwrap();
        assert!(t.rows.iter().all(|r| r.mean_error < 1e-12));
        assert!(rate_experiment(&l, &RateExperiment::new(vec![1, 10], vec![Observation::Exact], 3, 1)).is_err());
    }

    #[test]
    fn ols_slope_of_power_law() {
        let x: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|v| (3.0 * v.powf(-0.5)).ln()).collect();
        assert!((ols_slope(&x, &y).unwrap() + 0.5).abs() < 1e-12);
    }
}
