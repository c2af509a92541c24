//! Norms, energies, decay fits and trajectory checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;

/// Energy quantities of one snapshot. Squared norms throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    /// `|u|^2 + alpha^2 |grad u|^2`.
    #[serde(rename = "E")]
    pub energy: f64,
    /// `|Lambda^beta u|^2 + alpha^2 |grad Lambda^beta u|^2`.
    #[serde(rename = "D")]
    pub dissipation: f64,
    pub v_l2: f64,
    pub gradv_l2: f64,
    /// `max_k |v_hat(k)|` with the continuous-transform scaling `(L/N)^n`.
    pub fhat_max: f64,
    /// `|u|^2`; kept for the Fourier amplitude check, not part of the CSV stream.
    pub u_l2: f64,
}

impl EnergyRecord {
    pub fn zero(t: f64) -> Self {
        Self { t, energy: 0.0, dissipation: 0.0, v_l2: 0.0, gradv_l2: 0.0, fhat_max: 0.0, u_l2: 0.0 }
    }
}

/// Evaluate every record entry from the spectral coefficients of `v`.
pub fn energy_record(v: &VectorField, t: f64, alpha: f64, beta: f64) -> Result<EnergyRecord> {
    let grid = *v.grid();
    let s = v.to_spectral();
    let comps = s
        .components()
        .iter()
        .map(|c| c.spectral())
        .collect::<Result<Vec<_>>>()?;
    let a2 = alpha * alpha;
    let mut r = EnergyRecord::zero(t);
    let mut amp_max = 0.0f64;
    for i in 0..grid.len() {
        let sq: f64 = comps.iter().map(|c| c[i].norm_sqr()).sum();
        if sq == 0.0 {
            continue;
        }
        let k2 = grid.wavenumber_sq(i);
        let h = 1.0 / (1.0 + a2 * k2);
        r.energy += h * sq;
        r.dissipation += k2.powf(beta) * h * sq;
        r.v_l2 += sq;
        r.gradv_l2 += k2 * sq;
        r.u_l2 += h * h * sq;
        amp_max = amp_max.max(sq);
    }
    let w = grid.parseval_weight();
    r.energy *= w;
    r.dissipation *= w;
    r.v_l2 *= w;
    r.gradv_l2 *= w;
    r.u_l2 *= w;
    r.fhat_max = grid.cell_volume() * amp_max.sqrt();
    Ok(r)
}

/// Record for a solver state.
pub fn record_energy(
    state: &crate::integrator::SimState,
    params: &crate::integrator::SolverParams,
) -> Result<EnergyRecord> {
    energy_record(state.velocity(), state.t, params.alpha, params.beta)
}

/// `|Lambda^s f|^2 = sum |k|^{2s} |f_hat|^2` times the Parseval weight.
/// For integer `s = m` this is `|grad^m f|^2`.
pub fn seminorm_sq(field: &VectorField, s: f64) -> Result<f64> {
    let grid = *field.grid();
    let spec = field.to_spectral();
    let mut acc = 0.0;
    for c in spec.components() {
        let c = c.spectral()?;
        for (i, z) in c.iter().enumerate() {
            let k2 = grid.wavenumber_sq(i);
            acc += k2.powf(s) * z.norm_sqr();
        }
    }
    Ok(acc * grid.parseval_weight())
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::param(format!("Lebesgue exponent must be at least 1, got {p}")));
    }
    Ok(())
}

/// Riemann-sum `L^p` norm of the pointwise Euclidean magnitude; `p = inf` gives the max.
pub fn lp_norm(field: &VectorField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let grid = *field.grid();
    let comps = field
        .components()
        .iter()
        .map(|c| c.physical())
        .collect::<Result<Vec<_>>>()?;
    let mag = (0..grid.len()).map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt());
    Ok(lp_of_samples(mag, p, grid.cell_volume()))
}

pub fn lp_norm_scalar(field: &crate::field::ScalarField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let cell = field.grid().cell_volume();
    Ok(lp_of_samples(field.physical()?.iter().map(|x| x.abs()), p, cell))
}

fn lp_of_samples(values: impl Iterator<Item = f64>, p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else if p == 2.0 {
        (values.map(|x| x * x).sum::<f64>() * cell).sqrt()
    } else {
        (values.map(|x| x.powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }
}

/// `|a - b|_{L^q}` for two physical fields on the same grid.
pub fn solution_distance(a: &VectorField, b: &VectorField, q: f64) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::contract("fields live on different grids"));
    }
    let diff = a.to_physical().combine(1.0, -1.0, &b.to_physical())?;
    lp_norm(&diff, q)
}

/// Ordinary least squares `y = slope x + intercept`; returns `(slope, intercept, r^2)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::Fit("least squares needs two or more paired samples".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let e = y - (slope * x + intercept);
                e * e
            })
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok((slope, intercept, r2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl FitWindow {
    pub fn new(t_lo: f64, t_hi: f64) -> Result<Self> {
        if !(t_lo < t_hi) {
            return Err(Error::param(format!("empty fit window [{t_lo}, {t_hi}]")));
        }
        Ok(Self { t_lo, t_hi })
    }

    /// Drop the transient before `t = 5` and the last 10% of the horizon.
    pub fn default_for_horizon(t_end: f64) -> Result<Self> {
        Self::new(5.0, 0.9 * t_end)
    }
}

/// Coefficient of determination below which a fit is not called algebraic.
pub const ALGEBRAIC_R2: f64 = 0.98;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub t_lo: f64,
    pub t_hi: f64,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

impl DecayFit {
    pub fn is_algebraic(&self) -> bool {
        self.r_squared >= ALGEBRAIC_R2
    }
}

/// Fit `value ~ exp(intercept) (1 + t)^exponent` over the window.
pub fn fit_decay(series: &[(f64, f64)], window: FitWindow) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.t_lo && t <= window.t_hi)
        .collect();
    if pts.len() < 10 {
        return Err(Error::Fit(format!(
            "window [{}, {}] holds {} samples, need at least 10",
            window.t_lo,
            window.t_hi,
            pts.len()
        )));
    }
    if let Some(&(t, v)) = pts.iter().find(|&&(_, v)| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Fit(format!("non-positive value {v} at t = {t}")));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln_1p()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (exponent, intercept, r_squared) = least_squares(&xs, &ys)?;
    Ok(DecayFit {
        t_lo: window.t_lo,
        t_hi: window.t_hi,
        exponent,
        intercept,
        r_squared,
        samples: pts.len(),
    })
}

/// Cumulative trapezoid integral of `(t, y)` samples, starting from zero.
pub fn cumulative_trapezoid(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = 0.0;
    for i in 0..ts.len() {
        if i > 0 {
            acc += 0.5 * (ts[i] - ts[i - 1]) * (ys[i] + ys[i - 1]);
        }
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeBoundReport {
    /// `(t, fhat_max / [1 + (int |u|^2)^{1/2} (int |grad v|^2)^{1/2}])`.
    pub ratios: Vec<(f64, f64)>,
    pub max_ratio: f64,
    pub first_half_max: f64,
    pub second_half_max: f64,
    /// No growth: the second half never exceeds the first half.
    pub bounded: bool,
}

pub fn fourier_amplitude_bound_check(records: &[EnergyRecord]) -> AmplitudeBoundReport {
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let iu = cumulative_trapezoid(&ts, &records.iter().map(|r| r.u_l2).collect::<Vec<_>>());
    let igv = cumulative_trapezoid(&ts, &records.iter().map(|r| r.gradv_l2).collect::<Vec<_>>());
    let ratios: Vec<(f64, f64)> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.t, r.fhat_max / (1.0 + (iu[i] * igv[i]).sqrt())))
        .collect();
    let half = ratios.len() / 2;
    let max_of = |s: &[(f64, f64)]| s.iter().map(|p| p.1).fold(0.0, f64::max);
    let first_half_max = max_of(&ratios[..half.max(1).min(ratios.len())]);
    let second_half_max = max_of(&ratios[half..]);
    AmplitudeBoundReport {
        max_ratio: max_of(&ratios),
        bounded: second_half_max <= first_half_max * (1.0 + 1e-12),
        ratios,
        first_half_max,
        second_half_max,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CesaroReport {
    /// Running mean `(1/t) int_0^t |v|` for `t > 0`.
    pub means: Vec<(f64, f64)>,
    pub mid_mean: f64,
    pub end_mean: f64,
    pub nonincreasing_final_half: bool,
    pub passed: bool,
}

/// Running time average of a norm series; passes when the mean is
/// nonincreasing over the final half and strictly lower at the end than at
/// the midpoint.
pub fn time_average_decay_check(series: &[(f64, f64)]) -> Result<CesaroReport> {
    if series.len() < 3 {
        return Err(Error::param("time average needs at least three samples"));
    }
    let ts: Vec<f64> = series.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1).collect();
    let t0 = ts[0];
    let integral = cumulative_trapezoid(&ts, &ys);
    let means: Vec<(f64, f64)> = ts
        .iter()
        .zip(&integral)
        .filter(|(t, _)| **t > t0)
        .map(|(t, i)| (*t, i / (t - t0)))
        .collect();
    if means.len() < 2 {
        return Err(Error::param("time average needs a positive horizon"));
    }
    let t_mid = 0.5 * (means[0].0 + means[means.len() - 1].0);
    let mid = means.iter().position(|p| p.0 >= t_mid).unwrap_or(0);
    let tail = &means[mid..];
    let nonincreasing_final_half = tail
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + 1e-14 * w[0].1.abs());
    let mid_mean = means[mid].1;
    let end_mean = means[means.len() - 1].1;
    let strictly_lower = end_mean < mid_mean * (1.0 - 1e-9);
    Ok(CesaroReport {
        means,
        mid_mean,
        end_mean,
        nonincreasing_final_half,
        passed: nonincreasing_final_half && strictly_lower,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyBalance {
    /// `E_{j+1} - E_j + nu (t_{j+1} - t_j)(D_j + D_{j+1})` per interval.
    pub residuals: Vec<f64>,
    pub max_step_residual: f64,
    /// Absolute value of the summed residuals.
    pub cumulative_drift: f64,
}

/// Trapezoidal check of `dE/dt = -2 nu D` along consecutive records.
pub fn energy_balance(records: &[EnergyRecord], nu: f64) -> EnergyBalance {
    let residuals: Vec<f64> = records
        .windows(2)
        .map(|w| w[1].energy - w[0].energy + nu * (w[1].t - w[0].t) * (w[0].dissipation + w[1].dissipation))
        .collect();
    EnergyBalance {
        max_step_residual: residuals.iter().fold(0.0, |m: f64, r| m.max(r.abs())),
        cumulative_drift: residuals.iter().sum::<f64>().abs(),
        residuals,
    }
}

/// True when `E` never rises by more than `slack * E(0)` between samples.
pub fn energy_is_monotone(records: &[EnergyRecord], slack: f64) -> bool {
    let Some(first) = records.first() else {
        return true;
    };
    let tol = slack * first.energy;
    records.windows(2).all(|w| w[1].energy <= w[0].energy + tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Representation, ScalarField};
    use crate::grid::SpectralGrid;
    use std::f64::consts::PI;

    #[test]
    fn zero_state_gives_zero_record() {
        let g = SpectralGrid::new(2, 8, 1.0).unwrap();
        let v = VectorField::zeros(g, Representation::Spectral);
        assert_eq!(energy_record(&v, 1.5, 0.3, 0.5).unwrap(), EnergyRecord::zero(1.5));
    }

    #[test]
    fn single_mode_record() {
        // u = a cos(2 x_1) e_2, so v = (1 + |k|^2) u = 5u for alpha = 1.
        let g = SpectralGrid::new(2, 16, 2.0 * PI).unwrap();
        let a = 0.7;
        let v = VectorField::new(vec![
            ScalarField::zeros(g, Representation::Physical),
            ScalarField::from_fn(g, |x| 5.0 * a * (2.0 * x[0]).cos()),
        ])
        .unwrap();
        let beta = 0.75;
        let r = energy_record(&v, 0.0, 1.0, beta).unwrap();
        // |u|^2 of a cosine over the box is a^2 L^2 / 2.
        let u_sq = a * a * (2.0 * PI).powi(2) / 2.0;
        assert!((r.u_l2 - u_sq).abs() < 1e-12 * u_sq);
        assert!((r.energy - 5.0 * u_sq).abs() < 1e-12 * u_sq);
        assert!((r.dissipation - 2f64.powf(2.0 * beta) * r.energy).abs() < 1e-12 * r.energy);
        assert!((r.gradv_l2 - 4.0 * r.v_l2).abs() < 1e-12 * r.v_l2);
    }

    #[test]
    fn lp_norm_of_indicator() {
        let g = SpectralGrid::new(2, 32, 4.0).unwrap();
        let f = VectorField::from_fn(g, |x| {
            let inside = (-0.5..0.5).contains(&x[0]) && (-0.5..0.5).contains(&x[1]);
            [if inside { 1.0 } else { 0.0 }, 0.0, 0.0]
        });
        let vol = 1.0f64;
        for p in [1.0, 2.0, 3.0] {
            assert!((lp_norm(&f, p).unwrap() - vol.powf(1.0 / p)).abs() < 1e-12);
        }
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 1.0);
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn exact_power_law_fit() {
        let series: Vec<(f64, f64)> = (0..100).map(|i| {
            let t = i as f64;
            (t, (1.0 + t).powi(-2))
        }).collect();
        let fit = fit_decay(&series, FitWindow::new(5.0, 90.0).unwrap()).unwrap();
        assert!((fit.exponent + 2.0).abs() < 1e-6);
        assert!(fit.r_squared >= 0.999999);
        assert!(fit.is_algebraic());
    }

    #[test]
    fn exponential_is_not_algebraic() {
        let series: Vec<(f64, f64)> = (0..=90).map(|i| {
            let t = 10.0 + i as f64;
            (t, (-t).exp())
        }).collect();
        let fit = fit_decay(&series, FitWindow::new(10.0, 100.0).unwrap()).unwrap();
        assert!(!fit.is_algebraic());
    }

    #[test]
    fn fit_rejects_nonpositive_values() {
        let series: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, if i == 7 { 0.0 } else { 1.0 })).collect();
        assert!(matches!(
            fit_decay(&series, FitWindow::new(0.0, 19.0).unwrap()),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn cesaro_checks() {
        let constant: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, 2.0)).collect();
        let rep = time_average_decay_check(&constant).unwrap();
        assert!((rep.end_mean - 2.0).abs() < 1e-12);
        assert!(!rep.passed);

        let decaying: Vec<(f64, f64)> = (0..=400).map(|i| {
            let t = i as f64 * 0.25;
            (t, 1.0 / (1.0 + t))
        }).collect();
        let rep = time_average_decay_check(&decaying).unwrap();
        assert!(rep.passed);
        let t_end = 100.0f64;
        assert!((rep.end_mean - t_end.ln_1p() / t_end).abs() < 1e-3);
    }

    #[test]
    fn amplitude_check_on_zero_trajectory() {
        let recs: Vec<EnergyRecord> = (0..10).map(|i| EnergyRecord::zero(i as f64)).collect();
        let rep = fourier_amplitude_bound_check(&recs);
        assert_eq!(rep.max_ratio, 0.0);
        assert!(rep.bounded);
    }
}
