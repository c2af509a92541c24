//! Fractional Sobolev seminorms in Fourier and double-integral form.
//!
//! Squared seminorms are returned throughout:
//! `[u]^2 = int int |u(x) - u(y)|^2 / |x - y|^{n + 2 beta} dx dy = 2/C int |xi|^{2 beta} |F u|^2 d xi`.

use num_complex::Complex64;

use super::fractional_integral::normalization_constant;
use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Squared seminorm of a grid field from its Fourier coefficients.
pub fn gagliardo_seminorm_fourier(f: &ScalarField, beta: f64) -> Result<f64> {
    let grid = *f.grid();
    let c = normalization_constant(grid.dim(), beta)?;
    let s = f.to_spectral();
    let coeffs = s.spectral()?;
    let sum: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, z)| grid.wavenumber_sq(i).powf(beta) * z.norm_sqr())
        .sum();
    Ok(2.0 / c * sum * grid.parseval_weight())
}

/// Squared seminorm of the zero extension of samples on a line, from the
/// continuous transform `u_hat(xi) = h sum u_j exp(-i xi x_j)` integrated
/// over `|xi| <= pi / h`.
pub fn gagliardo_seminorm_fourier_1d(samples: &[f64], spacing: f64, beta: f64) -> Result<f64> {
    let n = samples.len();
    if n < 2 || !(spacing > 0.0) {
        return Err(Error::param("need at least two samples and a positive spacing"));
    }
    let c = normalization_constant(1, beta)?;
    let h = spacing;
    let transform_sq = |xi: f64| -> f64 {
        let z: Complex64 = samples
            .iter()
            .enumerate()
            .map(|(j, &u)| u * Complex64::from_polar(1.0, -xi * j as f64 * h))
            .sum();
        (h * h) * z.norm_sqr()
    };
    let gl = GaussLegendre::new(16);
    let xi_max = std::f64::consts::PI / h;
    let panels = 4 * n;
    let width = xi_max / panels as f64;
    let mut integral = 0.0;
    for p in 0..panels {
        let a = p as f64 * width;
        integral += gl.integrate(|xi| xi.powf(2.0 * beta) * transform_sq(xi), a, a + width);
    }
    // (1/2 pi) over the whole line, using evenness of |u_hat|^2.
    Ok(2.0 / c * integral / std::f64::consts::PI)
}

/// Direct double-sum evaluation of the squared seminorm of the zero extension
/// of samples on a line.
///
/// Written in the shifted form `int |z|^{-1-2 beta} int |u(x+z) - u(x)|^2 dx dz`;
/// the cell around `z = 0` is filled in from `|u'|^2` by the second-order
/// behaviour of the difference.
pub fn gagliardo_seminorm_double_integral_1d(samples: &[f64], spacing: f64, beta: f64) -> Result<f64> {
    let n = samples.len();
    if n < 3 || !(spacing > 0.0) {
        return Err(Error::param("need at least three samples and a positive spacing"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Divergence(format!("seminorm order must lie in (0, 1), got {beta}")));
    }
    let h = spacing;
    let at = |i: isize| -> f64 {
        if i < 0 || i >= n as isize {
            0.0
        } else {
            samples[i as usize]
        }
    };
    let mut total = 0.0;
    let reach = n as isize;
    for shift in 1..reach {
        let z = shift as f64 * h;
        let mut inner = 0.0;
        for i in -(shift)..(n as isize) {
            let d = at(i + shift) - at(i);
            inner += d * d;
        }
        total += 2.0 * inner * h * z.powf(-1.0 - 2.0 * beta) * h;
    }
    // Beyond the sampled length the supports are disjoint and the inner
    // integral is 2 |u|^2 exactly.
    let mass: f64 = samples.iter().map(|u| u * u * h).sum();
    let z_far = (reach as f64 - 0.5) * h;
    total += 2.0 * 2.0 * mass * z_far.powf(-2.0 * beta) / (2.0 * beta);
    // |z| < h/2: the inner integral is |u'|^2 z^2 to leading order.
    let grad_sq: f64 = (0..n as isize)
        .map(|i| {
            let d = (at(i + 1) - at(i - 1)) / (2.0 * h);
            d * d * h
        })
        .sum();
    let half = 0.5 * h;
    total += 2.0 * grad_sq * half.powf(2.0 - 2.0 * beta) / (2.0 - 2.0 * beta);
    Ok(total)
}
