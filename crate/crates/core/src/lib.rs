//! Wasserstein covariance for vectors of one-dimensional random densities.
//!
//! Each subject contributes `p` densities (or raw samples from them). Every
//! density is reduced to its quantile function on a shared grid of `[0, 1]`,
//! and the Wasserstein mean, variance and covariance become pointwise means
//! and integrated cross-covariances of those quantile functions:
//!
//! ```text
//! Σ̂_jk = ∫₀¹ Ĉ_jk(t, t) dt,   Ĉ_jk(s, t) = n⁻¹ Σ_i X^c_ij(s) X^c_ik(t)
//! ```
//!
//! ```
//! use wasscov::{wasserstein_cov_matrix, QuantileEnsemble, QuantileFunction};
//!
//! let u = |a: f64, b: f64| QuantileFunction::uniform(1000, a, b).unwrap();
//! let ensemble = QuantileEnsemble::unlabelled(vec![
//!     vec![u(0.0, 1.0), u(0.0, 1.0)],
//!     vec![u(1.0, 2.0), u(1.0, 2.0)],
//! ])
//! .unwrap();
//! let cov = wasserstein_cov_matrix(&ensemble);
//! assert!((cov.get(0, 1) - 0.25).abs() < 1e-12);
//! ```
//!
//! The guide under `book/` walks through the concepts; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod density;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod grid;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod quantile;
pub mod rng;
pub mod simulation;

pub use density::{
    cdf_to_quantile, density_to_cdf, empirical_quantile, estimate_density, histogram_to_density, Bandwidth,
    CdfEstimate, DensityEstimate, KernelDensityEstimator, RawSample, Support,
};
pub use error::{Error, Result};
pub use estimation::{
    cov_to_corr, cov_via_transports, cross_cov_surface, wasserstein_cov_kernel, wasserstein_cov_matrix,
    wasserstein_mean, wasserstein_variance, CovSurface, CrossCovSurface, QuantileEnsemble, WassersteinCovMatrix,
};
pub use geometry::{
    optimal_transport_map, parallel_transport, tangent_inner_product, transport_inner_product,
    wasserstein_distance, TransportMap,
};
pub use inference::{
    bootstrap_test, center_and_pool, statistic_log_frobenius, statistic_sqrt_distance, CenteredPool,
    GroupedEnsembles, StatisticKind, TestResult,
};
pub use quantile::QuantileFunction;
pub use simulation::{
    draw_density_vector, rate_experiment, sample_observations, LocationScaleLaw, Observation, RateExperiment,
    RateTable,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/quantiles.md")]
    mod quantiles {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/covariance.md")]
    mod covariance {}
    #[doc = include_str!("../../../book/src/testing.md")]
    mod testing {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
