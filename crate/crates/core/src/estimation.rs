//! Sample Wasserstein means, variances, cross-covariance surfaces, covariance
//! matrices and covariance kernels.
//!
//! All second-order quantities use divisor `n`. The covariance matrix only
//! ever accumulates the diagonal `Ĉ_jk(t, t)` of each cross-covariance
//! surface, so its cost is `O(n p² M)`; the full `M × M` surface is built only
//! on request.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{optimal_transport_map, parallel_transport, transport_inner_product, wasserstein_distance};
use crate::grid::{self, trapezoid_product, unit_step};
use crate::linalg;
use crate::quantile::QuantileFunction;

/// `n × p` curves on the unit grid with `m` points, stored subject-major.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Curves {
    pub(crate) n: usize,
    pub(crate) p: usize,
    pub(crate) m: usize,
    pub(crate) data: Vec<f64>,
}

impl Curves {
    pub(crate) fn curve(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.p + j) * self.m;
        &self.data[start..start + self.m]
    }

    pub(crate) fn subject(&self, i: usize) -> &[f64] {
        let start = i * self.p * self.m;
        &self.data[start..start + self.p * self.m]
    }

    /// Pointwise means of every component over `rows`, laid out `p × m`.
    pub(crate) fn means(&self, rows: &[usize]) -> Vec<f64> {
        let mut means = vec![0.0; self.p * self.m];
        for &i in rows {
            for (acc, x) in means.iter_mut().zip(self.subject(i)) {
                *acc += x;
            }
        }
        let n = rows.len() as f64;
        means.iter_mut().for_each(|v| *v /= n);
        means
    }

    /// `(1/n) Σ_i ∫ X^c_ij X^c_ik dt` over the subjects listed in `rows`
    /// (repeats allowed), centering at the mean of those same rows.
    pub(crate) fn covariance(&self, rows: &[usize]) -> DMatrix<f64> {
        let (p, m) = (self.p, self.m);
        let means = self.means(rows);
        let step = unit_step(m);
        let mut acc = DMatrix::zeros(p, p);
        let mut dev = vec![0.0; p * m];
        for &i in rows {
            for ((d, x), mu) in dev.iter_mut().zip(self.subject(i)).zip(&means) {
                *d = x - mu;
            }
            for j in 0..p {
                let dj = &dev[j * m..(j + 1) * m];
                for k in j..p {
                    acc[(j, k)] += trapezoid_product(dj, &dev[k * m..(k + 1) * m], step);
                }
            }
        }
        let n = rows.len() as f64;
        for j in 0..p {
            for k in j..p {
                let v = acc[(j, k)] / n;
                acc[(j, k)] = v;
                acc[(k, j)] = v;
            }
        }
        acc
    }
}

/// `n` subjects, each observed as a vector of `p` quantile functions on a
/// common grid, optionally with an equispaced time index for the components.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileEnsemble {
    labels: Vec<String>,
    curves: Curves,
    time_index: Option<Vec<f64>>,
}

impl QuantileEnsemble {
    /// `subjects[i][j]` is the quantile function of component `j` for subject `i`.
    pub fn new(labels: Vec<String>, subjects: Vec<Vec<QuantileFunction>>) -> Result<Self> {
        let n = subjects.len();
        if n < 2 {
            return Err(Error::TooFewSubjects { min: 2, got: n });
        }
        let p = labels.len();
        if p == 0 {
            return Err(Error::DimensionMismatch("ensemble needs at least one component".into()));
        }
        let m = subjects[0].first().map(|q| q.grid_size()).unwrap_or(0);
        let mut data = Vec::with_capacity(n * p * m);
        for (i, row) in subjects.iter().enumerate() {
            if row.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "subject {i} has {} components, expected {p}",
                    row.len()
                )));
            }
            for q in row {
                if q.grid_size() != m {
                    return Err(Error::GridMismatch {
                        left: m,
                        right: q.grid_size(),
                    });
                }
                data.extend_from_slice(q.values());
            }
        }
        Ok(Self {
            labels,
            curves: Curves { n, p, m, data },
            time_index: None,
        })
    }

    /// Components labelled `0, 1, …, p-1`.
    pub fn unlabelled(subjects: Vec<Vec<QuantileFunction>>) -> Result<Self> {
        let p = subjects.first().map(Vec::len).unwrap_or(0);
        Self::new((0..p).map(|j| j.to_string()).collect(), subjects)
    }

    /// Attaches a time index `y_1 < … < y_p` in `[0, 1]`, which must be equispaced.
    pub fn with_time_index(mut self, time_index: Vec<f64>) -> Result<Self> {
        let p = self.p();
        if time_index.len() != p {
            return Err(Error::InvalidTimeIndex(format!("{} points for {p} components", time_index.len())));
        }
        if p < 2 {
            return Err(Error::InvalidTimeIndex("needs at least two components".into()));
        }
        if time_index.iter().any(|y| !(0.0..=1.0).contains(y)) {
            return Err(Error::InvalidTimeIndex("points must lie in [0, 1]".into()));
        }
        if time_index.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidTimeIndex("points must be strictly increasing".into()));
        }
        let spacing = (time_index[p - 1] - time_index[0]) / (p - 1) as f64;
        if time_index.windows(2).any(|w| ((w[1] - w[0]) - spacing).abs() > 1e-9 * spacing.max(1e-300)) {
            return Err(Error::InvalidTimeIndex("points must be equispaced".into()));
        }
        self.time_index = Some(time_index);
        Ok(self)
    }

    /// Time index `y_j = j / (p - 1)`.
    pub fn with_equispaced_time_index(self) -> Result<Self> {
        let p = self.p();
        self.with_time_index(grid::unit_grid(p))
    }

    pub fn n(&self) -> usize {
        self.curves.n
    }

    pub fn p(&self) -> usize {
        self.curves.p
    }

    pub fn grid_size(&self) -> usize {
        self.curves.m
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn time_index(&self) -> Option<&[f64]> {
        self.time_index.as_deref()
    }

    pub fn curve(&self, subject: usize, component: usize) -> &[f64] {
        self.curves.curve(subject, component)
    }

    pub fn quantile(&self, subject: usize, component: usize) -> QuantileFunction {
        QuantileFunction::new(self.curve(subject, component).to_vec()).expect("ensemble holds valid quantiles")
    }

    pub(crate) fn curves(&self) -> &Curves {
        &self.curves
    }

    fn check_component(&self, index: usize) -> Result<()> {
        if index < self.p() {
            Ok(())
        } else {
            Err(Error::ComponentOutOfRange { index, p: self.p() })
        }
    }

    fn all_rows(&self) -> Vec<usize> {
        (0..self.n()).collect()
    }
}

/// `Ĉ_jk(s, t)` tabulated on the unit grid, row index `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCovSurface {
    m: usize,
    values: Vec<f64>,
}

impl CrossCovSurface {
    pub fn grid_size(&self) -> usize {
        self.m
    }

    pub fn get(&self, s: usize, t: usize) -> f64 {
        self.values[s * self.m + t]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.get(i, i)).collect()
    }

    /// `∫ Ĉ_jk(t, t) dt` by the trapezoidal rule.
    pub fn trace(&self) -> f64 {
        grid::trapezoid(&self.diagonal(), unit_step(self.m))
    }

    /// The slice `t ↦ Ĉ_jk(s_i, t)`.
    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.m..(s + 1) * self.m]
    }
}

/// Symmetric `p × p` matrix of Wasserstein covariances with component labels.
#[derive(Debug, Clone, PartialEq)]
pub struct WassersteinCovMatrix {
    labels: Vec<String>,
    values: DMatrix<f64>,
}

impl WassersteinCovMatrix {
    pub fn new(labels: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {}x{} matrix",
                labels.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        linalg::check_symmetric(&values)?;
        Ok(Self { labels, values })
    }

    pub fn p(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[(j, k)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.values)
    }
}

/// Covariance kernel `Σ̂(y, z)` known at the nodes of an equispaced grid and
/// bilinearly interpolated in between.
#[derive(Debug, Clone, PartialEq)]
pub struct CovSurface {
    ygrid: Vec<f64>,
    values: DMatrix<f64>,
}

impl CovSurface {
    pub fn new(ygrid: Vec<f64>, values: DMatrix<f64>) -> Result<Self> {
        if ygrid.len() < 2 || values.nrows() != ygrid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} grid points for a {}x{} surface",
                ygrid.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        if ygrid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidTimeIndex("grid must be strictly increasing".into()));
        }
        linalg::check_symmetric(&values)?;
        Ok(Self { ygrid, values })
    }

    pub fn ygrid(&self) -> &[f64] {
        &self.ygrid
    }

    /// Nodal values.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    fn locate(&self, y: f64) -> (usize, f64) {
        let g = &self.ygrid;
        let last = g.len() - 1;
        let y = y.clamp(g[0], g[last]);
        let i = (g.partition_point(|&v| v <= y).max(1) - 1).min(last - 1);
        (i, (y - g[i]) / (g[i + 1] - g[i]))
    }

    /// Bilinear interpolation; arguments outside the grid are clamped to it.
    pub fn eval(&self, y: f64, z: f64) -> f64 {
        let (i, a) = self.locate(y);
        let (k, b) = self.locate(z);
        let v = &self.values;
        (1.0 - a) * (1.0 - b) * v[(i, k)]
            + (1.0 - a) * b * v[(i, k + 1)]
            + a * (1.0 - b) * v[(i + 1, k)]
            + a * b * v[(i + 1, k + 1)]
    }

    /// The surface sampled on `points × points`.
    pub fn sample(&self, points: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(points.len(), points.len(), |r, c| self.eval(points[r], points[c]))
    }
}

/// Pointwise average of component `j`'s quantile functions.
pub fn wasserstein_mean(ensemble: &QuantileEnsemble, component: usize) -> Result<QuantileFunction> {
    ensemble.check_component(component)?;
    let c = ensemble.curves();
    let mut mean = vec![0.0; c.m];
    for i in 0..c.n {
        for (acc, x) in mean.iter_mut().zip(c.curve(i, component)) {
            *acc += x;
        }
    }
    let n = c.n as f64;
    mean.iter_mut().for_each(|v| *v /= n);
    QuantileFunction::new(mean)
}

/// `(1/n) Σ_i d_W(q_ij, q̄_j)²`.
pub fn wasserstein_variance(ensemble: &QuantileEnsemble, component: usize) -> Result<f64> {
    let mean = wasserstein_mean(ensemble, component)?;
    let mut acc = 0.0;
    for i in 0..ensemble.n() {
        let d = wasserstein_distance(&ensemble.quantile(i, component), &mean)?;
        acc += d * d;
    }
    Ok(acc / ensemble.n() as f64)
}

/// `Ĉ_jk(s, t) = n⁻¹ Σ_i X^c_ij(s) X^c_ik(t)` on the full grid.
pub fn cross_cov_surface(ensemble: &QuantileEnsemble, j: usize, k: usize) -> Result<CrossCovSurface> {
    ensemble.check_component(j)?;
    ensemble.check_component(k)?;
    let c = ensemble.curves();
    let m = c.m;
    let means = c.means(&ensemble.all_rows());
    let (mj, mk) = (&means[j * m..(j + 1) * m], &means[k * m..(k + 1) * m]);
    let mut values = vec![0.0; m * m];
    let mut dj = vec![0.0; m];
    let mut dk = vec![0.0; m];
    for i in 0..c.n {
        for (d, (x, mu)) in dj.iter_mut().zip(c.curve(i, j).iter().zip(mj)) {
            *d = x - mu;
        }
        for (d, (x, mu)) in dk.iter_mut().zip(c.curve(i, k).iter().zip(mk)) {
            *d = x - mu;
        }
        for (s, row) in values.chunks_mut(m).enumerate() {
            let a = dj[s];
            for (v, b) in row.iter_mut().zip(&dk) {
                *v += a * b;
            }
        }
    }
    let n = c.n as f64;
    values.iter_mut().for_each(|v| *v /= n);
    Ok(CrossCovSurface { m, values })
}

/// `(Σ̂)_jk = ∫ Ĉ_jk(t, t) dt` for all pairs.
pub fn wasserstein_cov_matrix(ensemble: &QuantileEnsemble) -> WassersteinCovMatrix {
    let values = ensemble.curves().covariance(&ensemble.all_rows());
    WassersteinCovMatrix {
        labels: ensemble.labels.clone(),
        values,
    }
}

pub(crate) fn corr_matrix(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = cov.nrows();
    let sd: Vec<f64> = (0..p).map(|j| cov[(j, j)]).collect();
    if let Some(index) = sd.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::DegenerateComponent { index });
    }
    let sd: Vec<f64> = sd.iter().map(|v| v.sqrt()).collect();
    Ok(DMatrix::from_fn(p, p, |j, k| {
        if j == k {
            1.0
        } else {
            (cov[(j, k)] / (sd[j] * sd[k])).clamp(-1.0, 1.0)
        }
    }))
}

/// `r_jk = S_jk / (S_jj S_kk)^{1/2}`.
pub fn cov_to_corr(cov: &WassersteinCovMatrix) -> Result<WassersteinCovMatrix> {
    Ok(WassersteinCovMatrix {
        labels: cov.labels.clone(),
        values: corr_matrix(&cov.values)?,
    })
}

/// The covariance matrix at the nodes of the ensemble's time index, as an
/// interpolable surface.
pub fn wasserstein_cov_kernel(ensemble: &QuantileEnsemble) -> Result<CovSurface> {
    let ygrid = ensemble.time_index().ok_or(Error::MissingTimeIndex)?.to_vec();
    CovSurface::new(ygrid, wasserstein_cov_matrix(ensemble).values)
}

/// Wasserstein covariance of components `j` and `k` through transport maps:
/// the maps from the sample Wasserstein mean of `j` to each subject are
/// parallel-transported to the tangent space at the mean of `k`, and their
/// inner products with the maps of component `k` are averaged.
///
/// Maps are tabulated on `cdf_grid` points of each mean's support.
pub fn cov_via_transports_with(ensemble: &QuantileEnsemble, j: usize, k: usize, cdf_grid: usize) -> Result<f64> {
    let mean_j = wasserstein_mean(ensemble, j)?;
    let mean_k = wasserstein_mean(ensemble, k)?;
    let cdf_j = mean_j.to_cdf(cdf_grid)?;
    let cdf_k = mean_k.to_cdf(cdf_grid)?;
    let terms = (0..ensemble.n())
        .into_par_iter()
        .map(|i| {
            let tj = optimal_transport_map(&cdf_j, &ensemble.quantile(i, j))?;
            let tk = optimal_transport_map(&cdf_k, &ensemble.quantile(i, k))?;
            let moved = parallel_transport(&tj, &cdf_j, &cdf_k)?;
            Ok(transport_inner_product(&moved, &tk, &mean_k))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.iter().sum::<f64>() / ensemble.n() as f64)
}

/// [`cov_via_transports_with`] with maps tabulated on `4 M` points.
pub fn cov_via_transports(ensemble: &QuantileEnsemble, j: usize, k: usize) -> Result<f64> {
    cov_via_transports_with(ensemble, j, k, 4 * ensemble.grid_size())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uq(a: f64, b: f64) -> QuantileFunction {
        QuantileFunction::uniform(1000, a, b).unwrap()
    }

    fn hand_example() -> QuantileEnsemble {
        QuantileEnsemble::unlabelled(vec![vec![uq(0.0, 1.0), uq(0.0, 1.0)], vec![uq(1.0, 2.0), uq(1.0, 2.0)]]).unwrap()
    }

    #[test]
    fn mean_and_variance_of_two_uniforms() {
        let e = hand_example();
        let mean = wasserstein_mean(&e, 0).unwrap();
        for (t, v) in mean.tgrid().iter().zip(mean.values()) {
            assert!((v - (0.5 + t)).abs() < 1e-12);
        }
        assert!((wasserstein_variance(&e, 0).unwrap() - 0.25).abs() < 1e-12);
        assert!(matches!(wasserstein_mean(&e, 2), Err(Error::ComponentOutOfRange { .. })));
    }

    #[test]
    fn hand_example_matrix_and_corr() {
        let s = wasserstein_cov_matrix(&hand_example());
        for j in 0..2 {
            for k in 0..2 {
                assert!((s.get(j, k) - 0.25).abs() < 1e-12);
            }
        }
        let r = cov_to_corr(&s).unwrap();
        for j in 0..2 {
            for k in 0..2 {
                assert!((r.get(j, k) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identical_subjects_have_zero_variance() {
        let q = uq(-1.0, 3.0);
        let e = QuantileEnsemble::unlabelled(vec![vec![q.clone()]; 4]).unwrap();
        assert_eq!(wasserstein_variance(&e, 0).unwrap(), 0.0);
        assert_eq!(wasserstein_mean(&e, 0).unwrap(), q);
        let c = cross_cov_surface(&e, 0, 0).unwrap();
        assert!(c.diagonal().iter().all(|v| *v == 0.0));
        let s = wasserstein_cov_matrix(&e);
        assert!(matches!(cov_to_corr(&s), Err(Error::DegenerateComponent { index: 0 })));
    }

    #[test]
    fn variance_scales_quadratically() {
        let base = vec![vec![uq(0.0, 1.0)], vec![uq(0.3, 2.0)], vec![uq(-1.0, 0.5)]];
        let scaled: Vec<Vec<QuantileFunction>> = base
            .iter()
            .map(|row| vec![QuantileFunction::new(row[0].values().iter().map(|v| 3.0 * v).collect()).unwrap()])
            .collect();
        let v1 = wasserstein_variance(&QuantileEnsemble::unlabelled(base).unwrap(), 0).unwrap();
        let v3 = wasserstein_variance(&QuantileEnsemble::unlabelled(scaled).unwrap(), 0).unwrap();
        assert!((v3 - 9.0 * v1).abs() < 1e-12);
    }

    #[test]
    fn location_family_surface_is_constant() {
        let mus = [(0.0, 1.0), (0.5, 0.2), (2.0, 1.5)];
        let m = 50;
        let rows = mus
            .iter()
            .map(|&(a, b)| {
                vec![
                    QuantileFunction::from_fn(m, |t| a + t * t).unwrap(),
                    QuantileFunction::from_fn(m, |t| b + t * t).unwrap(),
                ]
            })
            .collect();
        let e = QuantileEnsemble::unlabelled(rows).unwrap();
        let c = cross_cov_surface(&e, 0, 1).unwrap();
        let ma = mus.iter().map(|m| m.0).sum::<f64>() / 3.0;
        let mb = mus.iter().map(|m| m.1).sum::<f64>() / 3.0;
        let cov = mus.iter().map(|m| (m.0 - ma) * (m.1 - mb)).sum::<f64>() / 3.0;
        for s in 0..m {
            for t in 0..m {
                assert!((c.get(s, t) - cov).abs() < 1e-12);
            }
        }
        let ckj = cross_cov_surface(&e, 1, 0).unwrap();
        for s in 0..m {
            for t in 0..m {
                assert_eq!(c.get(s, t), ckj.get(t, s));
            }
        }
    }

    #[test]
    fn duplicated_component_gives_perfect_dependence() {
        let rows = vec![
            vec![uq(0.0, 1.0), uq(0.0, 1.0)],
            vec![uq(0.2, 3.0), uq(0.2, 3.0)],
            vec![uq(-0.4, 0.1), uq(-0.4, 0.1)],
        ];
        let s = wasserstein_cov_matrix(&QuantileEnsemble::unlabelled(rows).unwrap());
        assert_eq!(s.get(0, 1), s.get(0, 0));
    }

    #[test]
    fn kernel_interpolates_bilinearly() {
        let rows = (0..5)
            .map(|i| {
                (0..4)
                    .map(|j| uq(i as f64 * (j as f64 + 1.0) * 0.1, 1.0 + i as f64 * 0.3 + j as f64))
                    .collect()
            })
            .collect();
        let e = QuantileEnsemble::unlabelled(rows).unwrap();
        assert!(matches!(wasserstein_cov_kernel(&e), Err(Error::MissingTimeIndex)));
        let e = e.with_equispaced_time_index().unwrap();
        let s = wasserstein_cov_matrix(&e);
        let k = wasserstein_cov_kernel(&e).unwrap();
        let y = e.time_index().unwrap().to_vec();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(k.eval(y[a], y[b]), s.get(a, b));
            }
        }
        let (ym, zm) = (0.5 * (y[1] + y[2]), 0.5 * (y[0] + y[1]));
        let avg = 0.25 * (s.get(1, 0) + s.get(1, 1) + s.get(2, 0) + s.get(2, 1));
        assert!((k.eval(ym, zm) - avg).abs() < 1e-12);
    }

    #[test]
    fn time_index_validation() {
        let rows = vec![vec![uq(0.0, 1.0); 3]; 2];
        let e = QuantileEnsemble::unlabelled(rows).unwrap();
        assert!(e.clone().with_time_index(vec![0.0, 0.2, 1.0]).is_err());
        assert!(e.clone().with_time_index(vec![0.0, 0.5]).is_err());
        assert!(e.clone().with_time_index(vec![1.0, 0.5, 0.0]).is_err());
        assert!(e.with_time_index(vec![0.2, 0.4, 0.6]).is_ok());
    }

    #[test]
    fn ensemble_needs_two_subjects() {
        assert!(matches!(
            QuantileEnsemble::unlabelled(vec![vec![uq(0.0, 1.0)]]),
            Err(Error::TooFewSubjects { .. })
        ));
    }

    #[test]
    fn transport_route_on_hand_example() {
        let e = hand_example();
        let v = cov_via_transports(&e, 0, 0).unwrap();
        assert!((v - 0.25).abs() < 1e-6);
        let c = cov_via_transports(&e, 0, 1).unwrap();
        assert!((c - 0.25).abs() < 1e-6);
    }
}
