//! Monte Carlo checks of the synthetic law and the sampler.

mod common;

use nalgebra::DMatrix;
use wasscov::grid::unit_grid;
use wasscov::rng::stream;
use wasscov::simulation::{
    draw_density_vector, rate_experiment, sample_observations, BaseLaw, LocationScaleLaw, Observation, RateExperiment,
};
use wasscov::QuantileFunction;

fn law() -> LocationScaleLaw {
    LocationScaleLaw::new(
        BaseLaw::Uniform.quantile(101).unwrap(),
        vec![0.0, 3.0],
        DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]),
        vec![1.0, 2.0],
        DMatrix::from_row_slice(2, 2, &[0.01, 0.0, 0.0, 0.04]),
    )
    .unwrap()
}

/// The pointwise mean of many draws stays within 3.5 standard errors of the
/// population mean quantile at every grid point.
#[test]
fn draws_average_to_the_mean_quantile() {
    let law = law();
    let n = 10_000;
    let mut rng = stream(42, 0);
    let draws: Vec<Vec<QuantileFunction>> = (0..n).map(|_| draw_density_vector(&law, &mut rng)).collect();
    for j in 0..2 {
        let target = law.mean_quantile(j);
        for t in (0..101).step_by(10) {
            let x: Vec<f64> = draws.iter().map(|d| d[j].values()[t]).collect();
            let mean = x.iter().sum::<f64>() / n as f64;
            let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            let z = (mean - target.values()[t]) / (sd / (n as f64).sqrt());
            assert!(z.abs() < 3.5, "component {j}, t index {t}: z = {z}");
        }
    }
}

/// Kolmogorov-Smirnov statistic of U[0,1] draws against U[0,1], below the
/// asymptotic 1% critical value in at least 97 of 100 runs.
#[test]
fn uniform_sampler_passes_ks() {
    let q = QuantileFunction::from_fn(1000, |t| t).unwrap();
    let n = 500;
    let critical = 1.628 / (n as f64).sqrt();
    let passes = (0..100)
        .filter(|&r| {
            let mut x = sample_observations(&q, n, &mut stream(7, r)).unwrap().values().to_vec();
            x.sort_by(f64::total_cmp);
            let d = x
                .iter()
                .enumerate()
                .map(|(i, &v)| ((i + 1) as f64 / n as f64 - v).max(v - i as f64 / n as f64))
                .fold(0.0, f64::max);
            d < critical
        })
        .count();
    assert!(passes >= 97, "{passes} of 100");
}

/// With no between-subject variation the only error left is density
/// estimation, which shrinks as the number of observations grows.
#[test]
fn estimation_error_falls_with_observations() {
    let law = LocationScaleLaw::new(
        BaseLaw::Uniform.quantile(101).unwrap(),
        vec![0.0, 3.0],
        DMatrix::zeros(2, 2),
        vec![1.0, 2.0],
        DMatrix::zeros(2, 2),
    )
    .unwrap();
    let obs = vec![Observation::Sampled(32), Observation::Sampled(128), Observation::Sampled(512), Observation::Exact];
    let exp = RateExperiment::new(vec![10, 20], obs, 8, 4);
    let table = rate_experiment(&law, &exp).unwrap();
    assert_eq!(table, rate_experiment(&law, &exp).unwrap());
    for n_rows in [[0, 2, 4, 6], [1, 3, 5, 7]] {
        let errs: Vec<f64> = n_rows.iter().map(|&i| table.rows[i].mean_error).collect();
        assert!(errs.windows(2).all(|w| w[0] > w[1]), "{errs:?}");
        assert!(errs[3] < 1e-12);
    }
}

#[test]
fn oracle_uses_base_second_moment() {
    let law = law();
    let c = law.base_second_moment();
    let expect = unit_grid(101).iter().map(|t| (t - 0.5) * (t - 0.5)).collect::<Vec<_>>();
    assert!((c - common::trapz(&expect)).abs() < 1e-15);
    assert!((law.oracle_cov()[(1, 1)] - (0.5 + 0.04 * c)).abs() < 1e-15);
}
