#![allow(dead_code)]

use rand::Rng;
use wasscov::rng::{stream, StreamRng};
use wasscov::{QuantileEnsemble, QuantileFunction};

pub fn rng(seed: u64) -> StreamRng {
    stream(seed, 0)
}

/// Rough monotone quantile: random start plus nonnegative increments, some
/// of them zero (atoms).
pub fn rough_quantile(rng: &mut StreamRng, m: usize) -> QuantileFunction {
    let mut v = Vec::with_capacity(m);
    let mut x = rng.random_range(-2.0..2.0);
    for _ in 0..m {
        v.push(x);
        if rng.random_bool(0.9) {
            x += rng.random_range(0.0..0.02);
        }
    }
    QuantileFunction::new(v).unwrap()
}

pub fn rough_ensemble(rng: &mut StreamRng, n: usize, p: usize, m: usize) -> QuantileEnsemble {
    let rows = (0..n).map(|_| (0..p).map(|_| rough_quantile(rng, m)).collect()).collect();
    QuantileEnsemble::unlabelled(rows).unwrap()
}

/// Standard normal quantile truncated to [-2.5, 2.5], antisymmetric on the grid.
pub fn truncated_normal_base(m: usize) -> QuantileFunction {
    wasscov::simulation::BaseLaw::TruncatedNormal { bound: 2.5 }.quantile(m).unwrap()
}

/// `μ + σ B(t)` for a smooth centered base `B`.
pub fn location_scale(base: &QuantileFunction, mu: f64, sigma: f64) -> QuantileFunction {
    QuantileFunction::new(base.values().iter().map(|b| mu + sigma * b).collect()).unwrap()
}

pub fn smooth_ensemble(rng: &mut StreamRng, n: usize, p: usize, base: &QuantileFunction) -> QuantileEnsemble {
    let rows = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| location_scale(base, rng.random_range(-1.0..1.0), rng.random_range(0.5..1.5)))
                .collect()
        })
        .collect();
    QuantileEnsemble::unlabelled(rows).unwrap()
}

/// Plain trapezoidal rule on an equispaced grid of [0, 1].
pub fn trapz(y: &[f64]) -> f64 {
    let h = 1.0 / (y.len() - 1) as f64;
    let inner: f64 = y[1..y.len() - 1].iter().sum();
    h * (inner + 0.5 * (y[0] + y[y.len() - 1]))
}
