//! The Helmholtz filter `u - alpha^2 Delta u = v` and its norm identities.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{lp_norm, seminorm_sq, solution_distance};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::multiplier::Multiplier;
use crate::spectral::apply_multiplier;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    alpha: f64,
}

impl FilterParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::param(format!("filter width must be nonnegative, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Solve `u - alpha^2 Delta u = v` exactly per mode; the result has the
/// representation of `v`. A zero width returns `v` unchanged.
pub fn filter(v: &VectorField, alpha: f64) -> Result<VectorField> {
    let params = FilterParams::new(alpha)?;
    if params.alpha == 0.0 {
        return Ok(v.clone());
    }
    let mult = Multiplier::helmholtz_inverse(*v.grid(), params.alpha)?;
    let repr = v.representation();
    Ok(apply_multiplier(&v.to_spectral(), &mult)?.in_representation(repr))
}

/// Relative residual of
/// `|grad^m u|^2 + 2 alpha^2 |grad^{m+1} u|^2 + alpha^4 |grad^{m+2} u|^2 = |grad^m v|^2`
/// with `u = filter(v, alpha)`, all norms evaluated by Parseval.
pub fn filter_identity_residual(v: &VectorField, alpha: f64, m: u32) -> Result<f64> {
    let u = filter(v, alpha)?;
    let m = m as f64;
    let a2 = alpha * alpha;
    let lhs = seminorm_sq(&u, m)? + 2.0 * a2 * seminorm_sq(&u, m + 1.0)? + a2 * a2 * seminorm_sq(&u, m + 2.0)?;
    let rhs = seminorm_sq(v, m)?;
    if rhs == 0.0 {
        return Ok(lhs.abs());
    }
    Ok((lhs - rhs).abs() / rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterConvergence {
    /// `(alpha, |filter(v, alpha) - v|_{L^q})` in the order given.
    pub points: Vec<(f64, f64)>,
    /// Least-squares slope of `log distance` against `log alpha`.
    pub slope: f64,
}

/// Discrete `L^q` distances between `v` and its filtered versions.
pub fn filter_convergence_curve(v: &VectorField, alphas: &[f64], q: f64) -> Result<FilterConvergence> {
    if alphas.is_empty() {
        return Err(Error::param("filter convergence needs at least one width"));
    }
    if alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::param("filter widths must be positive"));
    }
    let v = v.to_physical();
    let points = alphas
        .iter()
        .map(|&a| Ok((a, solution_distance(&filter(&v, a)?, &v, q)?)))
        .collect::<Result<Vec<_>>>()?;
    let slope = if points.len() >= 2 {
        loglog_slope(&points)?
    } else {
        f64::NAN
    };
    Ok(FilterConvergence { points, slope })
}

/// Least-squares slope through `(log x, log y)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Fit("slope needs at least two points".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Fit("log-log slope needs positive data".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(crate::diagnostics::least_squares(&xs, &ys)?.0)
}

/// `gamma = (n/2)(1/p - 1/q)` of the filter convergence estimate.
pub fn gamma_exponent(dim: usize, p: f64, q: f64) -> f64 {
    0.5 * dim as f64 * (1.0 / p - 1.0 / q)
}

/// The guaranteed order `beta/2 - gamma`; an error unless it is positive.
pub fn guaranteed_order(dim: usize, beta: f64, p: f64, q: f64) -> Result<f64> {
    let gamma = gamma_exponent(dim, p, q);
    if gamma >= 0.5 * beta {
        return Err(Error::param(format!(
            "gamma = {gamma} must be below beta/2 = {}",
            0.5 * beta
        )));
    }
    Ok(0.5 * beta - gamma)
}

/// `|filter(v, alpha)|_{L^q} / |v|_{L^p}`, monitoring the smoothing estimates
/// of the filter at a chosen exponent pair.
pub fn smoothing_ratio(v: &VectorField, alpha: f64, p: f64, q: f64) -> Result<f64> {
    let u = filter(v, alpha)?.to_physical();
    let den = lp_norm(&v.to_physical(), p)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(lp_norm(&u, q)? / den)
}
