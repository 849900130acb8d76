//! Grids, trapezoidal quadrature and monotone piecewise-linear interpolation.
//!
//! Every quantile function in the crate lives on the same kind of grid: `m`
//! equispaced points on `[0, 1]` including both endpoints. The grid is implied
//! by the number of values, so two quantile functions are compatible exactly
//! when they have the same length.

use crate::error::{Error, Result};

pub const DEFAULT_QUANTILE_GRID: usize = 1000;
pub const DEFAULT_DENSITY_GRID: usize = 512;

/// `m` equispaced points from `a` to `b`, with both endpoints exact.
pub fn linspace(a: f64, b: f64, m: usize) -> Vec<f64> {
    match m {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let last = (m - 1) as f64;
            let mut out: Vec<f64> = (0..m).map(|i| a + (b - a) * (i as f64 / last)).collect();
            out[m - 1] = b;
            out
        }
    }
}

/// The shared quantile grid `t_i = i / (m - 1)`.
pub fn unit_grid(m: usize) -> Vec<f64> {
    linspace(0.0, 1.0, m)
}

/// Spacing of the unit grid with `m` points.
pub fn unit_step(m: usize) -> f64 {
    1.0 / (m - 1) as f64
}

pub(crate) fn check_grid_size(m: usize, min: usize) -> Result<()> {
    if m < min {
        Err(Error::GridTooSmall { min, got: m })
    } else {
        Ok(())
    }
}

/// Trapezoidal rule on an equispaced grid.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let interior: f64 = values[1..n - 1].iter().sum();
            step * (interior + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Trapezoidal integral of the pointwise product `a * b` on an equispaced grid.
pub fn trapezoid_product(a: &[f64], b: &[f64], step: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let interior: f64 = a[1..n - 1].iter().zip(&b[1..n - 1]).map(|(x, y)| x * y).sum();
    step * (interior + 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]))
}

/// Trapezoidal rule on an arbitrary increasing grid.
pub fn trapezoid_nonuniform(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Running trapezoidal integral, starting at 0.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for (xw, yw) in x.windows(2).zip(y.windows(2)) {
        acc += 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]);
        out.push(acc);
    }
    out
}

/// Piecewise-linear interpolation through `(xs[i], ys[i])`, constant outside
/// the range of `xs`.
///
/// `xs` must be nondecreasing. On a run of tied abscissae the rightmost node
/// wins, which makes the interpolant right-continuous; this is the convention
/// needed to turn a quantile function with flat pieces into a distribution
/// function.
pub fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let idx = xs.partition_point(|&v| v <= x);
    if idx == 0 {
        return ys[0];
    }
    if idx == n {
        return ys[n - 1];
    }
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let (y0, y1) = (ys[idx - 1], ys[idx]);
    let w = (x - x0) / (x1 - x0);
    y0 + w * (y1 - y0)
}

/// Linear interpolation of values given on the unit grid.
pub fn interp_unit(values: &[f64], t: f64) -> f64 {
    let m = values.len();
    if t <= 0.0 {
        return values[0];
    }
    if t >= 1.0 {
        return values[m - 1];
    }
    let s = t * (m - 1) as f64;
    let i = (s.floor() as usize).min(m - 2);
    let w = s - i as f64;
    values[i] + w * (values[i + 1] - values[i])
}

/// Repairs descents of at most a few ulps left behind by floating-point
/// rounding; anything larger is reported as a genuine inversion.
pub(crate) fn repair_monotone(values: &mut [f64], what: &'static str) -> Result<()> {
    for i in 1..values.len() {
        let (prev, cur) = (values[i - 1], values[i]);
        if cur < prev {
            let tol = 4.0 * f64::EPSILON * prev.abs().max(cur.abs()).max(f64::MIN_POSITIVE);
            if prev - cur <= tol {
                values[i] = prev;
            } else {
                return Err(Error::NotMonotone { what, index: i });
            }
        }
    }
    Ok(())
}

pub(crate) fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidValues {
            what,
            reason: format!("non-finite value at index {i}"),
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints_exact() {
        let g = linspace(-0.3, 1.7, 77);
        assert_eq!(g[0], -0.3);
        assert_eq!(g[76], 1.7);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn trapezoid_exact_for_linear() {
        let m = 11;
        let t = unit_grid(m);
        let v: Vec<f64> = t.iter().map(|t| 3.0 * t + 1.0).collect();
        assert!((trapezoid(&v, unit_step(m)) - 2.5).abs() < 1e-15);
        let nu = trapezoid_nonuniform(&t, &v);
        assert!((nu - 2.5).abs() < 1e-15);
    }

    #[test]
    fn interp_ties_are_right_continuous() {
        let xs = [0.0, 1.0, 1.0, 2.0];
        let ys = [0.0, 0.25, 0.75, 1.0];
        assert_eq!(interp(&xs, &ys, 1.0), 0.75);
        assert_eq!(interp(&xs, &ys, 0.5), 0.125);
        assert_eq!(interp(&xs, &ys, -1.0), 0.0);
        assert_eq!(interp(&xs, &ys, 3.0), 1.0);
    }

    #[test]
    fn interp_unit_hits_nodes() {
        let v = [0.0, 1.0, 4.0, 9.0, 16.0];
        for (i, &x) in v.iter().enumerate() {
            assert_eq!(interp_unit(&v, i as f64 / 4.0), x);
        }
        assert_eq!(interp_unit(&v, 0.125), 0.5);
    }

    #[test]
    fn repair_only_fixes_rounding() {
        let mut v = [1.0, 1.0 - f64::EPSILON, 2.0];
        repair_monotone(&mut v, "test").unwrap();
        assert_eq!(v[1], 1.0);
        let mut w = [1.0, 0.9, 2.0];
        assert!(matches!(
            repair_monotone(&mut w, "test"),
            Err(Error::NotMonotone { index: 1, .. })
        ));
    }
}
