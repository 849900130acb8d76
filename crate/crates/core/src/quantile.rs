use crate::density::{CdfEstimate, Support};
use crate::error::{Error, Result};
use crate::grid::{self, check_grid_size, interp, interp_unit, linspace, repair_monotone, unit_step};

/// A nondecreasing function on `[0, 1]`, stored by its values on the unit
/// grid `t_i = i / (m - 1)`.
///
/// This is the representation every distribution is reduced to before any
/// Wasserstein computation. Two quantile functions can be combined exactly
/// when they have the same grid size.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFunction {
    values: Vec<f64>,
}

impl QuantileFunction {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        check_grid_size(values.len(), 2)?;
        grid::check_finite(&values, "quantile function")?;
        repair_monotone(&mut values, "quantile function")?;
        Ok(Self { values })
    }

    /// Tabulates `f` on the unit grid with `m` points.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid::unit_grid(m).into_iter().map(f).collect())
    }

    /// Quantile function of the uniform law on `[a, b]`.
    pub fn uniform(m: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(linspace(a, b, m))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self) -> f64 {
        unit_step(self.values.len())
    }

    pub fn tgrid(&self) -> Vec<f64> {
        grid::unit_grid(self.values.len())
    }

    /// Linear interpolation between grid nodes.
    pub fn eval(&self, t: f64) -> f64 {
        interp_unit(&self.values, t)
    }

    pub fn lower(&self) -> f64 {
        self.values[0]
    }

    pub fn upper(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Mean of the distribution, `∫ q(t) dt`.
    pub fn mean(&self) -> f64 {
        grid::trapezoid(&self.values, self.step())
    }

    pub(crate) fn same_grid(&self, other: &Self) -> Result<()> {
        if self.values.len() == other.values.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.values.len(),
                right: other.values.len(),
            })
        }
    }

    /// `(x, f(x))` at the midpoints of the quantile's strictly increasing
    /// pieces, with `f = Δt / Δq`. Flat pieces (atoms) are skipped.
    pub fn density_points(&self) -> Vec<(f64, f64)> {
        let h = self.step();
        self.values
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (0.5 * (w[0] + w[1]), h / (w[1] - w[0])))
            .collect()
    }

    /// The distribution function on `grid_size` equispaced points of
    /// `[q(0), q(1)]`, obtained by inverting the piecewise-linear quantile
    /// function. Flat pieces of the quantile (atoms) become jumps. The end
    /// values are pinned to 0 and 1.
    pub fn to_cdf(&self, grid_size: usize) -> Result<CdfEstimate> {
        check_grid_size(grid_size, 2)?;
        let support = Support::new(self.lower(), self.upper())?;
        let u = linspace(support.lower(), support.upper(), grid_size);
        let t = self.tgrid();
        let mut values: Vec<f64> = u.iter().map(|&x| interp(&self.values, &t, x)).collect();
        values[0] = 0.0;
        values[grid_size - 1] = 1.0;
        CdfEstimate::new(support, u, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_decreasing_values() {
        assert!(QuantileFunction::new(vec![0.0, 1.0, 0.5]).is_err());
        assert!(QuantileFunction::new(vec![0.0]).is_err());
        assert!(QuantileFunction::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn uniform_quantile_to_cdf_is_linear() {
        let q = QuantileFunction::uniform(101, 0.0, 2.0).unwrap();
        let f = q.to_cdf(33).unwrap();
        for (u, v) in f.grid().iter().zip(f.values()) {
            assert!((v - u / 2.0).abs() < 1e-12);
        }
        assert!((q.mean() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_quantile_has_no_cdf() {
        let q = QuantileFunction::new(vec![1.0; 5]).unwrap();
        assert!(matches!(q.to_cdf(10), Err(Error::InvalidSupport { .. })));
    }
}
