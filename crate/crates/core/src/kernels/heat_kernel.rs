//! The fractional heat kernel `G(t, x)` with Fourier transform `exp(-t |xi|^g)`.
//!
//! Values come from the radial form of the inverse Fourier integral,
//! integrated with Gauss-Legendre panels whose width resolves the
//! oscillation of the Bessel-type factor. The frequency cutoff is where
//! `exp(-t rho^g)` drops below `1e-19`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bessel::bessel;
use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelSpec {
    gamma0: f64,
    dim: usize,
}

impl HeatKernelSpec {
    pub fn new(gamma0: f64, dim: usize) -> Result<Self> {
        if !(gamma0 > 0.0 && gamma0 <= 2.0) {
            return Err(Error::param(format!("kernel order must lie in (0, 2], got {gamma0}")));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::param(format!("kernel dimension must be 1, 2 or 3, got {dim}")));
        }
        Ok(Self { gamma0, dim })
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `exp(-t |xi|^gamma0)`.
    pub fn fourier_symbol(&self, t: f64, xi_abs: f64) -> f64 {
        (-t * xi_abs.powf(self.gamma0)).exp()
    }
}

/// Which function of the kernel to evaluate: `Lambda^a G` or its radial derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelVariant {
    /// Derivative order `k`, 0 or 1.
    pub derivative: u32,
    /// Fractional order `a >= 0` of `Lambda^a`.
    pub fractional: f64,
}

impl KernelVariant {
    pub const PLAIN: Self = Self { derivative: 0, fractional: 0.0 };

    fn validate(&self) -> Result<()> {
        if self.derivative > 1 {
            return Err(Error::param("only derivative orders 0 and 1 are supported"));
        }
        if !(self.fractional >= 0.0 && self.fractional.is_finite()) {
            return Err(Error::param("fractional order must be nonnegative"));
        }
        Ok(())
    }
}

const CUTOFF_EXPONENT: f64 = 45.0;
const NODES: usize = 20;

/// Radial profile of the variant at distance `r`. For `derivative = 1` this is
/// `d/dr`, whose absolute value equals `|grad|` of the radial function.
pub fn kernel_profile(spec: &HeatKernelSpec, variant: KernelVariant, t: f64, r: f64) -> Result<f64> {
    variant.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param(format!("time must be positive, got {t}")));
    }
    let gl = GaussLegendre::new(NODES);
    Ok(profile_with(&gl, spec, variant, t, r.abs()))
}

fn profile_with(gl: &GaussLegendre, spec: &HeatKernelSpec, variant: KernelVariant, t: f64, r: f64) -> f64 {
    let g = spec.gamma0;
    let rho_max = (CUTOFF_EXPONENT / t).powf(1.0 / g);
    let width = if r > 0.0 { (PI / r).min(rho_max / 64.0) } else { rho_max / 64.0 };
    let a = variant.fractional;
    let deriv = variant.derivative == 1;
    let n = spec.dim;
    let integrand = |rho: f64| -> f64 {
        let weight = (-t * rho.powf(g)).exp() * if a == 0.0 { 1.0 } else { rho.powf(a) };
        let z = r * rho;
        let radial = match (n, deriv) {
            (1, false) => z.cos(),
            (1, true) => -rho * z.sin(),
            (2, false) => bessel(z).0 * rho,
            (2, true) => -rho * bessel(z).1 * rho,
            (3, false) => sinc(z) * rho * rho,
            (_, _) => -rho * spherical_j1(z) * rho * rho,
        };
        weight * radial
    };
    let mut acc = 0.0;
    // Geometric grading towards rho = 0 resolves the non-smooth factors rho^a and rho^g.
    let mut hi = width;
    for _ in 0..40 {
        let lo = 0.5 * hi;
        acc += gl.integrate(&integrand, lo, hi);
        hi = lo;
    }
    acc += gl.integrate(&integrand, 0.0, hi);
    let panels = ((rho_max - width) / width).ceil().max(1.0) as usize;
    let step = (rho_max - width) / panels as f64;
    for p in 0..panels {
        let lo = width + p as f64 * step;
        acc += gl.integrate(&integrand, lo, lo + step);
    }
    let prefactor = match n {
        1 => 1.0 / PI,
        2 => 1.0 / (2.0 * PI),
        _ => 1.0 / (2.0 * PI * PI),
    };
    prefactor * acc
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

fn spherical_j1(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        z / 3.0 - z * z * z / 30.0
    } else {
        (z.sin() / z - z.cos()) / z
    }
}

/// `G(t, x)` at each `|x|` in `radii`.
pub fn heat_kernel_values(spec: &HeatKernelSpec, t: f64, radii: &[f64]) -> Result<Vec<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param(format!("time must be positive, got {t}")));
    }
    let gl = GaussLegendre::new(NODES);
    Ok(radii
        .par_iter()
        .map(|&r| profile_with(&gl, spec, KernelVariant::PLAIN, t, r.abs()))
        .collect())
}

/// Largest `|G(t, x) - t^{-n/g} G(1, t^{-1/g} x)|` over the given radii and times.
pub fn scaling_deviation(spec: &HeatKernelSpec, times: &[f64], radii: &[f64]) -> Result<f64> {
    let g = spec.gamma0;
    let mut worst = 0.0f64;
    for &t in times {
        let direct = heat_kernel_values(spec, t, radii)?;
        let scaled_radii: Vec<f64> = radii.iter().map(|r| r * t.powf(-1.0 / g)).collect();
        let unit = heat_kernel_values(spec, 1.0, &scaled_radii)?;
        let factor = t.powf(-(spec.dim as f64) / g);
        for (a, b) in direct.iter().zip(&unit) {
            worst = worst.max((a - factor * b).abs());
        }
    }
    Ok(worst)
}

/// Area of the unit sphere in `R^n`.
fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// Outer radius of the fixed radial grid used for `L^p` norms.
const NORM_RADIUS: f64 = 200.0;

/// `L^p` norm of `D^k Lambda^a G(t)` over `R^n`, by radial quadrature on a
/// grid that does not depend on `t`, with a power-law tail beyond the grid.
pub fn kernel_lp_norm(spec: &HeatKernelSpec, variant: KernelVariant, p: f64, t: f64) -> Result<f64> {
    variant.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param(format!("time must be positive, got {t}")));
    }
    if !(p >= 1.0) {
        return Err(Error::param(format!("Lebesgue exponent must be at least 1, got {p}")));
    }
    let gl = GaussLegendre::new(NODES);
    let radial = GaussLegendre::new(10);
    let n = spec.dim;
    let eval = |r: f64| profile_with(&gl, spec, variant, t, r);

    // Panels: [0, r0], then geometric growth by 1.15 up to the outer radius.
    let r0 = 0.01;
    let mut edges = vec![0.0, r0];
    while *edges.last().unwrap() < NORM_RADIUS {
        let next = (edges.last().unwrap() * 1.15).min(NORM_RADIUS);
        edges.push(next);
    }
    let nodes: Vec<(f64, f64)> = edges
        .windows(2)
        .flat_map(|e| radial.mapped(e[0], e[1]).collect::<Vec<_>>())
        .collect();
    let values: Vec<f64> = nodes.par_iter().map(|&(r, _)| eval(r)).collect();

    if p.is_infinite() {
        let mut best = (0.0f64, eval(0.0).abs());
        for (&(r, _), v) in nodes.iter().zip(&values) {
            if v.abs() > best.1 {
                best = (r, v.abs());
            }
        }
        return Ok(refine_max(&eval, best.0, best.1));
    }

    let jac = |r: f64| r.powi(n as i32 - 1);
    let mut integral: f64 = nodes
        .iter()
        .zip(&values)
        .map(|(&(r, w), v)| w * v.abs().powf(p) * jac(r))
        .sum();
    // Tail: fit |f|^p r^{n-1} ~ C r^{-s} between two radii near the edge.
    let (ra, rb) = (NORM_RADIUS / 1.5, NORM_RADIUS);
    let (ga, gb) = (eval(ra).abs().powf(p) * jac(ra), eval(rb).abs().powf(p) * jac(rb));
    if ga > 0.0 && gb > 0.0 {
        let s = -(gb / ga).ln() / (rb / ra).ln();
        if s > 1.0 {
            integral += gb * rb / (s - 1.0);
        } else if gb * rb > 1e-12 * integral {
            return Err(Error::Divergence(format!(
                "kernel tail decays like r^-{s:.3}; the L^{p} norm is not finite"
            )));
        }
    }
    Ok((sphere_area(n) * integral).powf(1.0 / p))
}

/// Golden-section refinement of `|f|` around a sampled maximum.
fn refine_max(f: &impl Fn(f64) -> f64, r: f64, fr: f64) -> f64 {
    if r == 0.0 {
        return fr;
    }
    let (mut a, mut b) = (r / 1.2, r * 1.2);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c).abs(), f(d).abs());
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c).abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d).abs();
        }
    }
    fr.max(fc).max(fd)
}

/// `-(k + a)/g - (n/g)(1 - 1/p)`, the time exponent of `|D^k Lambda^a G(t)|_{L^p}`.
pub fn expected_kernel_slope(spec: &HeatKernelSpec, variant: KernelVariant, p: f64) -> f64 {
    let g = spec.gamma0;
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    -(variant.derivative as f64 + variant.fractional) / g - spec.dim as f64 / g * (1.0 - inv_p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub expected: f64,
    pub norms: Vec<(f64, f64)>,
}

impl SlopeFit {
    /// Relative deviation from the expected slope, or the absolute one when it is zero.
    pub fn deviation(&self) -> f64 {
        if self.expected == 0.0 {
            self.slope.abs()
        } else {
            ((self.slope - self.expected) / self.expected).abs()
        }
    }
}

/// Log-log slope of `|D^k Lambda^a G(t)|_{L^p}` against `t`.
pub fn kernel_lp_norm_slope(
    spec: &HeatKernelSpec,
    variant: KernelVariant,
    p: f64,
    times: &[f64],
) -> Result<SlopeFit> {
    if times.len() < 3 {
        return Err(Error::param(format!("slope fit needs at least 3 times, got {}", times.len())));
    }
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::param("times must be positive"));
    }
    let norms = times
        .iter()
        .map(|&t| Ok((t, kernel_lp_norm(spec, variant, p, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let slope = crate::helmholtz::loglog_slope(&norms)?;
    Ok(SlopeFit { slope, expected: expected_kernel_slope(spec, variant, p), norms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_case_matches_closed_form() {
        let spec = HeatKernelSpec::new(2.0, 2).unwrap();
        for t in [0.5, 1.0, 3.0] {
            let radii = [0.0, 0.3, 1.0, 2.0, 4.0];
            let vals = heat_kernel_values(&spec, t, &radii).unwrap();
            for (r, v) in radii.iter().zip(vals) {
                let exact = (-r * r / (4.0 * t)).exp() / (4.0 * PI * t);
                assert!((v - exact).abs() <= 1e-8 * exact, "t={t} r={r}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn cauchy_kernel_in_two_dimensions() {
        // g = 1, n = 2: G(1, x) = (1/2 pi) (1 + r^2)^{-3/2}.
        let spec = HeatKernelSpec::new(1.0, 2).unwrap();
        let radii = [0.0, 0.5, 2.0, 10.0];
        let vals = heat_kernel_values(&spec, 1.0, &radii).unwrap();
        for (r, v) in radii.iter().zip(vals) {
            let exact = (1.0 + r * r).powf(-1.5) / (2.0 * PI);
            assert!((v - exact).abs() <= 1e-9 * exact, "r={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn one_and_three_dimensional_gaussians() {
        for n in [1usize, 3] {
            let spec = HeatKernelSpec::new(2.0, n).unwrap();
            let vals = heat_kernel_values(&spec, 1.0, &[0.0, 1.0, 2.5]).unwrap();
            for (r, v) in [0.0f64, 1.0, 2.5].iter().zip(vals) {
                let exact = (-r * r / 4.0f64).exp() / (4.0 * PI).powf(n as f64 / 2.0);
                assert!((v - exact).abs() <= 1e-9 * exact, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(HeatKernelSpec::new(0.0, 2).is_err());
        assert!(HeatKernelSpec::new(2.5, 2).is_err());
        let spec = HeatKernelSpec::new(1.5, 2).unwrap();
        assert!(heat_kernel_values(&spec, 0.0, &[1.0]).is_err());
        assert!(kernel_lp_norm_slope(&spec, KernelVariant::PLAIN, 1.0, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn semigroup_in_fourier_space() {
        let spec = HeatKernelSpec::new(1.5, 2).unwrap();
        for xi in [0.0, 0.3, 2.0, 7.5] {
            let a = spec.fourier_symbol(0.4, xi) * spec.fourier_symbol(1.1, xi);
            let b = spec.fourier_symbol(1.5, xi);
            assert!((a - b).abs() <= 1e-13 * b + 1e-300);
        }
    }
}
