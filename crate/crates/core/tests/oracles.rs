//! Estimators checked against closed forms and independent recomputation.

mod common;

use approx::assert_abs_diff_eq;
use common::*;
use wasscov::estimation::wasserstein_cov_kernel;
use wasscov::{
    cov_to_corr, cov_via_transports, cross_cov_surface, wasserstein_cov_matrix, wasserstein_distance, wasserstein_mean,
    wasserstein_variance, QuantileEnsemble, QuantileFunction,
};

#[test]
fn uniform_closed_forms() {
    let u01 = QuantileFunction::uniform(1000, 0.0, 1.0).unwrap();
    let u02 = QuantileFunction::uniform(1000, 0.0, 2.0).unwrap();
    // ∫ (2t - t)² dt = 1/3
    assert_abs_diff_eq!(wasserstein_distance(&u01, &u02).unwrap(), 1.0 / 3f64.sqrt(), epsilon = 1e-4);
    let shifted = QuantileFunction::uniform(1000, 0.7, 1.7).unwrap();
    assert_abs_diff_eq!(wasserstein_distance(&u01, &shifted).unwrap(), 0.7, epsilon = 1e-12);
}

#[test]
fn scale_family_distance() {
    // d_W(N-like base scaled by s1, by s2) = |s1 - s2| (∫ B²)^{1/2}
    let base = truncated_normal_base(1000);
    let second = trapz(&base.values().iter().map(|b| b * b).collect::<Vec<_>>());
    let d = wasserstein_distance(&location_scale(&base, 0.0, 1.0), &location_scale(&base, 0.0, 2.5)).unwrap();
    assert_abs_diff_eq!(d, 1.5 * second.sqrt(), epsilon = 1e-12);
}

/// Two subjects: U[0,1] and U[1,2] for each of two components.
#[test]
fn two_subject_hand_example() {
    let u = |a, b| QuantileFunction::uniform(1000, a, b).unwrap();
    let ens = QuantileEnsemble::unlabelled(vec![vec![u(0.0, 1.0), u(0.0, 1.0)], vec![u(1.0, 2.0), u(1.0, 2.0)]]).unwrap();
    // mean is U[0.5, 1.5]; each deviation is ±0.5 everywhere, so every entry is 0.25
    let mean = wasserstein_mean(&ens, 0).unwrap();
    assert_abs_diff_eq!(mean.eval(0.0), 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(mean.eval(1.0), 1.5, epsilon = 1e-12);
    let cov = wasserstein_cov_matrix(&ens);
    for j in 0..2 {
        for k in 0..2 {
            assert_abs_diff_eq!(cov.get(j, k), 0.25, epsilon = 1e-12);
        }
    }
    let corr = cov_to_corr(&cov).unwrap();
    assert!(corr.matrix().iter().all(|r| (r - 1.0).abs() < 1e-12));
}

/// Covariance entries recomputed with a direct triple loop.
#[test]
fn matrix_matches_direct_recomputation() {
    let mut r = rng(11);
    for _ in 0..20 {
        let ens = rough_ensemble(&mut r, 7, 3, 101);
        let (n, p, m) = (ens.n(), ens.p(), ens.grid_size());
        let mean: Vec<Vec<f64>> = (0..p)
            .map(|j| (0..m).map(|t| (0..n).map(|i| ens.curve(i, j)[t]).sum::<f64>() / n as f64).collect())
            .collect();
        let cov = wasserstein_cov_matrix(&ens);
        for j in 0..p {
            for k in 0..p {
                let diag: Vec<f64> = (0..m)
                    .map(|t| {
                        (0..n)
                            .map(|i| (ens.curve(i, j)[t] - mean[j][t]) * (ens.curve(i, k)[t] - mean[k][t]))
                            .sum::<f64>()
                            / n as f64
                    })
                    .collect();
                assert_abs_diff_eq!(cov.get(j, k), trapz(&diag), epsilon = 1e-12);
            }
            // Fréchet variance: mean squared distance to the Wasserstein mean
            let bar = QuantileFunction::new(mean[j].clone()).unwrap();
            let fv = (0..n).map(|i| wasserstein_distance(&ens.quantile(i, j), &bar).unwrap().powi(2)).sum::<f64>() / n as f64;
            assert_abs_diff_eq!(cov.get(j, j), fv, epsilon = 1e-12);
            assert_abs_diff_eq!(wasserstein_variance(&ens, j).unwrap(), fv, epsilon = 1e-12);
        }
    }
}

#[test]
fn location_family_surface_is_constant() {
    // q_i(t) = a_i + t: every centered process is the constant a_i - ā
    let shifts = [0.0, 0.4, 1.1, -0.3];
    let rows = shifts.iter().map(|&a| vec![QuantileFunction::uniform(51, a, a + 1.0).unwrap()]).collect();
    let ens = QuantileEnsemble::unlabelled(rows).unwrap();
    let mean = shifts.iter().sum::<f64>() / 4.0;
    let var = shifts.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 4.0;
    let c = cross_cov_surface(&ens, 0, 0).unwrap();
    for s in 0..51 {
        for t in 0..51 {
            assert_abs_diff_eq!(c.get(s, t), var, epsilon = 1e-12);
        }
    }
}

#[test]
fn transport_route_on_location_scale() {
    let base = truncated_normal_base(1000);
    let mut r = rng(5);
    let ens = smooth_ensemble(&mut r, 12, 2, &base);
    let cov = wasserstein_cov_matrix(&ens);
    for (j, k) in [(0, 0), (0, 1), (1, 1)] {
        let geo = cov_via_transports(&ens, j, k).unwrap();
        assert_abs_diff_eq!(geo, cov.get(j, k), epsilon = 1e-4);
    }
}

#[test]
fn kernel_through_nodes_and_midpoints() {
    let mut r = rng(3);
    let ens = rough_ensemble(&mut r, 6, 4, 41).with_equispaced_time_index().unwrap();
    let cov = wasserstein_cov_matrix(&ens);
    let k = wasserstein_cov_kernel(&ens).unwrap();
    let y = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
    for a in 0..4 {
        for b in 0..4 {
            assert_eq!(k.eval(y[a], y[b]), cov.get(a, b));
        }
    }
    // centre of the first square is the average of its corners
    let centre = (cov.get(0, 0) + cov.get(0, 1) + cov.get(1, 0) + cov.get(1, 1)) / 4.0;
    assert_abs_diff_eq!(k.eval(1.0 / 6.0, 1.0 / 6.0), centre, epsilon = 1e-12);
}
