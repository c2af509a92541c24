//! The fractional Laplacian as a singular integral, and its normalization constant.
//!
//! `(-Delta)^beta f(x) = (C/2) int (2 f(x) - f(x+y) - f(x-y)) |y|^{-n-2 beta} dy`
//! with `C = (int (1 - cos z_1) |z|^{-n-2 beta} dz)^{-1}`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadrature::{adaptive, GaussLegendre};
use crate::error::{Error, Result};

fn check_open_beta(beta: f64) -> Result<()> {
    if beta <= 0.0 || beta >= 1.0 || beta.is_nan() {
        return Err(Error::Divergence(format!(
            "the normalization integral diverges unless 0 < beta < 1, got {beta}"
        )));
    }
    Ok(())
}

/// The normalization constant `C_{n, beta}` for `n` in 1..=3.
///
/// The `n`-dimensional integral factors into `T_n * J`, where
/// `J = 2 int_0^inf (1 - cos z) z^{-1-2 beta} dz` and
/// `T_n = int_{R^{n-1}} (1 + |s|^2)^{-(n + 2 beta)/2} ds`.
pub fn normalization_constant(n: usize, beta: f64) -> Result<f64> {
    check_open_beta(beta)?;
    if !(1..=3).contains(&n) {
        return Err(Error::param(format!("dimension must be 1, 2 or 3, got {n}")));
    }
    let integral = transverse_factor(n, beta)? * one_dimensional_factor(beta)?;
    Ok(1.0 / integral)
}

/// `T_n`; with `s = tan(theta)` the radial part becomes `int sin^{n-2} cos^{2 beta}`.
fn transverse_factor(n: usize, beta: f64) -> Result<f64> {
    if n == 1 {
        return Ok(1.0);
    }
    let (v, _) = adaptive(
        |th: f64| th.sin().powi(n as i32 - 2) * th.cos().powf(2.0 * beta),
        0.0,
        FRAC_PI_2,
        1e-15,
        1e-13,
    )?;
    let sphere = if n == 2 { 2.0 } else { 2.0 * PI };
    Ok(sphere * v)
}

/// `J = 2 int_0^inf (1 - cos z) z^{-1-2 beta} dz`.
fn one_dimensional_factor(beta: f64) -> Result<f64> {
    let s = 1.0 + 2.0 * beta;
    // Near zero, integrate the Taylor series of 1 - cos z term by term.
    let z0: f64 = 0.5;
    let mut head = 0.0;
    let mut coeff = 0.5; // z^2/2!, then -z^4/4!, ...
    for m in 1..12 {
        let pow = 2.0 * m as f64 - 2.0 * beta;
        head += coeff * z0.powf(pow) / pow;
        coeff *= -1.0 / ((2 * m + 1) as f64 * (2 * m + 2) as f64);
    }
    // Middle range in panels of length pi.
    let big_z = 100.0 * PI;
    let mut mid = 0.0;
    let mut a = z0;
    while a < big_z {
        let b = (a + PI).min(big_z);
        mid += adaptive(|z: f64| (1.0 - z.cos()) * z.powf(-s), a, b, 1e-17, 1e-14)?.0;
        a = b;
    }
    // Tail: int_Z^inf z^{-s} dz minus Re int_Z^inf e^{iz} z^{-s} dz (asymptotic series).
    let mut series = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    for m in 0..30 {
        series += term;
        term *= minus_i * (s + m as f64) / big_z;
        if term.norm() < 1e-18 {
            break;
        }
    }
    let osc = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, big_z) * big_z.powf(-s) * series;
    let tail = big_z.powf(1.0 - s) / (s - 1.0) - osc.re;
    Ok(2.0 * (head + mid + tail))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralOptions {
    /// Radial panel width.
    pub spacing: f64,
    /// Radius beyond which the second difference is frozen at its value there.
    pub extent: f64,
    /// Directions on the half circle (2D) or per angular axis (3D).
    pub angular_points: usize,
    /// Relative tolerance on the spacing-halving error estimate.
    pub tolerance: f64,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        Self { spacing: 0.05, extent: 40.0, angular_points: 48, tolerance: 1e-5 }
    }
}

/// Singular-integral evaluation of `(-Delta)^beta f` at `point` for a smooth,
/// rapidly decaying `f` on `R^n` (`n = point.len()` in 1..=3).
///
/// The result is computed with panel widths `h` and `2h`; if they disagree by
/// more than the tolerance an accuracy error is returned.
pub fn integral_fractional_laplacian(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    beta: f64,
    point: &[f64],
    options: &IntegralOptions,
) -> Result<f64> {
    check_open_beta(beta)?;
    let n = point.len();
    if !(1..=3).contains(&n) {
        return Err(Error::param(format!("dimension must be 1, 2 or 3, got {n}")));
    }
    if !(options.spacing > 0.0 && options.extent > 4.0 * options.spacing && options.angular_points >= 4) {
        return Err(Error::param("integral options describe an empty mesh"));
    }
    let c = normalization_constant(n, beta)?;
    let fine = directional_integral(f, beta, point, options.spacing, options);
    let coarse = directional_integral(f, beta, point, 2.0 * options.spacing, options);
    let estimate = (fine - coarse).abs();
    let tolerance = options.tolerance * fine.abs().max(f(point).abs()).max(1e-300);
    if estimate > tolerance {
        return Err(Error::Accuracy { estimate, tolerance });
    }
    Ok(0.5 * c * fine)
}

/// `int_{S^{n-1}} int_0^inf S(rho w) rho^{-1-2 beta} d rho dw`.
fn directional_integral(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    beta: f64,
    x: &[f64],
    h: f64,
    options: &IntegralOptions,
) -> f64 {
    let n = x.len();
    let fx = f(x);
    let gl = GaussLegendre::new(8);
    let radial = |w: &[f64; 3]| -> f64 {
        let second_difference = |rho: f64| -> f64 {
            let mut p = [0.0; 3];
            let mut m = [0.0; 3];
            for a in 0..n {
                p[a] = x[a] + rho * w[a];
                m[a] = x[a] - rho * w[a];
            }
            2.0 * fx - f(&p[..n]) - f(&m[..n])
        };
        let integrand = |rho: f64| second_difference(rho) * rho.powf(-1.0 - 2.0 * beta);
        // [0, rho_min]: the second difference is c rho^2 to leading order.
        let rho_min = 1e-3 * h;
        let mut acc = second_difference(rho_min) * rho_min.powf(-2.0 * beta) / (2.0 - 2.0 * beta);
        let mut lo = rho_min;
        while lo < h {
            let hi = (2.0 * lo).min(h);
            acc += gl.integrate(integrand, lo, hi);
            lo = hi;
        }
        let panels = ((options.extent - h) / h).ceil() as usize;
        let step = (options.extent - h) / panels as f64;
        for p in 0..panels {
            let a = h + p as f64 * step;
            acc += gl.integrate(integrand, a, a + step);
        }
        // Beyond the extent the second difference is frozen at its value there,
        // which is 2 f(x) for decaying data and 0 for constants.
        let r = options.extent;
        acc + second_difference(r) * r.powf(-2.0 * beta) / (2.0 * beta)
    };
    let m = options.angular_points;
    match n {
        1 => 2.0 * radial(&[1.0, 0.0, 0.0]),
        2 => {
            // Half circle, doubled by the symmetry w -> -w; periodic trapezoid rule.
            let dth = PI / m as f64;
            let s: f64 = (0..m)
                .map(|j| {
                    let th = j as f64 * dth;
                    radial(&[th.cos(), th.sin(), 0.0])
                })
                .sum();
            2.0 * s * dth
        }
        _ => {
            let polar = GaussLegendre::new(m);
            let dphi = 2.0 * PI / (2 * m) as f64;
            let mut s = 0.0;
            for (mu, wmu) in polar.mapped(-1.0, 1.0) {
                let st = (1.0 - mu * mu).sqrt();
                for j in 0..2 * m {
                    let phi = j as f64 * dphi;
                    s += wmu * dphi * radial(&[st * phi.cos(), st * phi.sin(), mu]);
                }
            }
            s
        }
    }
}

/// `(-Delta)^beta` of periodic samples on a line, applied as the Fourier
/// multiplier `|k|^{2 beta}`.
pub fn multiplier_fractional_laplacian_1d(samples: &[f64], spacing: f64, beta: f64) -> Result<Vec<f64>> {
    let n = samples.len();
    if n < 2 || !(spacing > 0.0) {
        return Err(Error::param("need at least two samples and a positive spacing"));
    }
    let mut z: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut z);
    let k0 = 2.0 * PI / (n as f64 * spacing);
    for (j, c) in z.iter_mut().enumerate() {
        let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        *c *= (k0 * m.abs()).powf(2.0 * beta);
    }
    planner.plan_fft_inverse(n).process(&mut z);
    Ok(z.iter().map(|c| c.re / n as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_diverge() {
        assert!(matches!(normalization_constant(2, 0.0), Err(Error::Divergence(_))));
        assert!(matches!(normalization_constant(2, 1.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn constant_function_gives_zero() {
        let f = |_: &[f64]| 2.5;
        for point in [vec![0.3], vec![0.3, -1.0]] {
            let v = integral_fractional_laplacian(&f, 0.5, &point, &IntegralOptions::default()).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn multiplier_matches_second_derivative_at_one() {
        // beta = 1 is -f'' for a band-limited periodic sample.
        let n = 64;
        let h = 2.0 * PI / n as f64;
        let xs: Vec<f64> = (0..n).map(|j| (3.0 * j as f64 * h).sin()).collect();
        let out = multiplier_fractional_laplacian_1d(&xs, h, 1.0).unwrap();
        for (a, b) in out.iter().zip(&xs) {
            assert!((a - 9.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn integral_matches_multiplier_on_gaussian() {
        let (n, len) = (4096, 200.0);
        let h = len / n as f64;
        let xs: Vec<f64> = (0..n).map(|j| -0.5 * len + j as f64 * h).collect();
        let samples: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        let beta = 0.6;
        let spectral = multiplier_fractional_laplacian_1d(&samples, h, beta).unwrap();
        let f = |y: &[f64]| (-y[0] * y[0]).exp();
        for j in [2048, 2062, 2091] {
            let v = integral_fractional_laplacian(&f, beta, &[xs[j]], &IntegralOptions::default()).unwrap();
            assert!((v - spectral[j]).abs() <= 1e-3 * spectral[j].abs(), "x={}: {v} vs {}", xs[j], spectral[j]);
        }
    }
}
