//! Optimal-transport geometry on the line, computed on quantile functions.
//!
//! For one-dimensional laws the optimal map from `F` to `G` is `G⁻¹ ∘ F`,
//! and the tangent inner product at `f` between two such maps becomes an
//! integral over `[0, 1]` after substituting `t = F(u)`. Distances and inner
//! products here are always evaluated in that quantile form, on the shared
//! unit grid.

use crate::density::CdfEstimate;
use crate::error::{Error, Result};
use crate::grid::{self, check_grid_size, repair_monotone, trapezoid, trapezoid_product};
use crate::quantile::QuantileFunction;

/// A map `u ↦ T(u)` tabulated on an increasing grid of the source support.
///
/// Optimal transports are nondecreasing and [`TransportMap::new`] enforces
/// that. A parallel-transported map is a tangent vector rather than an
/// optimal transport and need not be monotone; see [`parallel_transport`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransportMap {
    domain: Vec<f64>,
    values: Vec<f64>,
}

impl TransportMap {
    pub fn new(domain: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        Self::check_domain(&domain, &values)?;
        grid::check_finite(&values, "transport map")?;
        repair_monotone(&mut values, "transport map")?;
        Ok(Self { domain, values })
    }

    fn check_domain(domain: &[f64], values: &[f64]) -> Result<()> {
        check_grid_size(domain.len(), 2)?;
        if domain.len() != values.len() {
            return Err(Error::GridMismatch {
                left: domain.len(),
                right: values.len(),
            });
        }
        if domain.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidValues {
                what: "transport domain",
                reason: "must be strictly increasing".into(),
            });
        }
        Ok(())
    }

    pub fn identity(domain: Vec<f64>) -> Result<Self> {
        let values = domain.clone();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &[f64] {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation, constant beyond the domain.
    pub fn eval(&self, u: f64) -> f64 {
        grid::interp(&self.domain, &self.values, u)
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }
}

/// `d_W(q1, q2) = (∫ (q1 - q2)²)^{1/2}` by the trapezoidal rule.
pub fn wasserstein_distance(q1: &QuantileFunction, q2: &QuantileFunction) -> Result<f64> {
    q1.same_grid(q2)?;
    let sq: Vec<f64> = q1
        .values()
        .iter()
        .zip(q2.values())
        .map(|(a, b)| (a - b) * (a - b))
        .collect();
    Ok(trapezoid(&sq, q1.step()).sqrt())
}

/// `T = G⁻¹ ∘ F` on the grid of `cdf`.
pub fn optimal_transport_map(cdf: &CdfEstimate, target: &QuantileFunction) -> Result<TransportMap> {
    let values = cdf.values().iter().map(|&t| target.eval(t)).collect();
    TransportMap::new(cdf.grid().to_vec(), values)
}

/// `⟨T₁, T₂⟩_f = ∫₀¹ (F⁻¹ - G₁⁻¹)(F⁻¹ - G₂⁻¹) dt` with `base = F⁻¹`.
pub fn tangent_inner_product(q1: &QuantileFunction, q2: &QuantileFunction, base: &QuantileFunction) -> Result<f64> {
    base.same_grid(q1)?;
    base.same_grid(q2)?;
    let b = base.values();
    let d1: Vec<f64> = b.iter().zip(q1.values()).map(|(b, q)| b - q).collect();
    let d2: Vec<f64> = b.iter().zip(q2.values()).map(|(b, q)| b - q).collect();
    Ok(trapezoid_product(&d1, &d2, base.step()))
}

/// Inner product of two tabulated maps in the tangent space at the law with
/// quantile `base`:
/// `∫ (T₁(u) - u)(T₂(u) - u) f(u) du = ∫₀¹ (T₁(b(t)) - b(t))(T₂(b(t)) - b(t)) dt`.
pub fn transport_inner_product(t1: &TransportMap, t2: &TransportMap, base: &QuantileFunction) -> f64 {
    let b = base.values();
    let d1: Vec<f64> = b.iter().map(|&u| t1.eval(u) - u).collect();
    let d2: Vec<f64> = b.iter().map(|&u| t2.eval(u) - u).collect();
    trapezoid_product(&d1, &d2, base.step())
}

/// Moves `t1`, a map out of the law with CDF `f1`, to the tangent space of
/// the law with CDF `f2`:
/// `T̃₁ = T₁ ∘ T₁₂ - T₁₂ + id` with `T₁₂ = F₁⁻¹ ∘ F₂`, tabulated on the grid
/// of `f2`.
///
/// The result is monotone whenever the displacement `T₁ - id` varies slowly
/// relative to the stretch of `T₁₂`; it is not forced to be, since a
/// transported tangent vector can legitimately decrease.
pub fn parallel_transport(t1: &TransportMap, f1: &CdfEstimate, f2: &CdfEstimate) -> Result<TransportMap> {
    let domain = f2.grid().to_vec();
    let values: Vec<f64> = domain
        .iter()
        .zip(f2.values())
        .map(|(&u, &s)| {
            let mid = f1.inverse(s);
            t1.eval(mid) - mid + u
        })
        .collect();
    TransportMap::check_domain(&domain, &values)?;
    grid::check_finite(&values, "transport map")?;
    Ok(TransportMap { domain, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Support;
    use crate::grid::linspace;

    fn uniform_cdf(a: f64, b: f64, m: usize) -> CdfEstimate {
        let grid = linspace(a, b, m);
        let vals = grid.iter().map(|u| (u - a) / (b - a)).collect();
        CdfEstimate::new(Support::new(a, b).unwrap(), grid, vals).unwrap()
    }

    #[test]
    fn uniform_distances() {
        let q1 = QuantileFunction::uniform(1000, 0.0, 1.0).unwrap();
        let q2 = QuantileFunction::uniform(1000, 0.0, 2.0).unwrap();
        let d = wasserstein_distance(&q1, &q2).unwrap();
        assert!((d - 1.0 / 3f64.sqrt()).abs() < 1e-4);
        assert_eq!(wasserstein_distance(&q1, &q1).unwrap(), 0.0);
        assert_eq!(d, wasserstein_distance(&q2, &q1).unwrap());
        let q3 = QuantileFunction::uniform(999, 0.0, 2.0).unwrap();
        assert!(matches!(wasserstein_distance(&q1, &q3), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn transport_maps_between_uniforms() {
        let f = uniform_cdf(0.0, 1.0, 101);
        let g = QuantileFunction::uniform(1000, 0.0, 2.0).unwrap();
        let t = optimal_transport_map(&f, &g).unwrap();
        for (u, v) in t.domain().iter().zip(t.values()) {
            assert!((v - 2.0 * u).abs() < 1e-12);
        }
        let g = QuantileFunction::uniform(1000, 1.0, 2.0).unwrap();
        let t = optimal_transport_map(&f, &g).unwrap();
        for (u, v) in t.domain().iter().zip(t.values()) {
            assert!((v - (u + 1.0)).abs() < 1e-12);
        }
        let same = QuantileFunction::uniform(1000, 0.0, 1.0).unwrap();
        let t = optimal_transport_map(&f, &same).unwrap();
        for (u, v) in t.domain().iter().zip(t.values()) {
            assert!((v - u).abs() < 1e-12);
        }
    }

    #[test]
    fn inner_product_examples() {
        let base = QuantileFunction::uniform(1000, 0.0, 1.0).unwrap();
        let g1 = QuantileFunction::uniform(1000, 0.0, 2.0).unwrap();
        let g2 = QuantileFunction::uniform(1000, 1.0, 2.0).unwrap();
        let ip = tangent_inner_product(&g1, &g2, &base).unwrap();
        assert!((ip - 0.5).abs() < 1e-6);
        assert_eq!(tangent_inner_product(&base, &g2, &base).unwrap(), 0.0);
        let d = wasserstein_distance(&base, &g1).unwrap();
        assert!((tangent_inner_product(&g1, &g1, &base).unwrap() - d * d).abs() < 1e-12);
    }

    #[test]
    fn parallel_transport_trivial_cases() {
        let f1 = uniform_cdf(0.0, 1.0, 201);
        let g = QuantileFunction::uniform(1000, -0.5, 3.0).unwrap();
        let t1 = optimal_transport_map(&f1, &g).unwrap();
        let same = parallel_transport(&t1, &f1, &f1).unwrap();
        for (a, b) in same.values().iter().zip(t1.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let f2 = uniform_cdf(2.0, 5.0, 201);
        let id = TransportMap::identity(f1.grid().to_vec()).unwrap();
        let moved = parallel_transport(&id, &f1, &f2).unwrap();
        for (u, v) in moved.domain().iter().zip(moved.values()) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
