//! Kernel and operator checks against closed forms computed independently of the library.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use chfrac::kernels::{
    gagliardo_seminorm_fourier, heat_kernel_values, integral_fractional_laplacian, normalization_constant,
    HeatKernelSpec, IntegralOptions,
};
use chfrac::{ScalarField, SpectralGrid};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// `C_{n,beta} = 4^beta Gamma(n/2 + beta) / (pi^{n/2} |Gamma(-beta)|)`.
fn constant_closed_form(n: usize, beta: f64) -> f64 {
    let h = n as f64 / 2.0;
    4f64.powf(beta) * gamma(h + beta) / (PI.powf(h) * gamma(-beta).abs())
}

#[test]
fn normalization_constant_matches_gamma_formula() {
    for n in 1..=3 {
        for beta in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let c = normalization_constant(n, beta).unwrap();
            let e = constant_closed_form(n, beta);
            assert!(rel(c, e) < 1e-10, "n={n} beta={beta}: {c} vs {e}");
        }
    }
}

#[test]
fn one_dimensional_half_constant_by_brute_force() {
    // int_R (1 - cos z) / z^2 dz by composite Simpson on [0, X] plus the 1/X tail.
    let (x_max, m) = (2000.0, 400_000usize);
    let h = x_max / m as f64;
    let f = |z: f64| if z == 0.0 { 0.5 } else { (1.0 - z.cos()) / (z * z) };
    let mut s = f(0.0) + f(x_max);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    let integral = 2.0 * (s * h / 3.0 + 1.0 / x_max);
    let c = normalization_constant(1, 0.5).unwrap();
    assert!(rel(c, 1.0 / integral) < 1e-4, "{c} vs {}", 1.0 / integral);
}

#[test]
fn singular_integral_at_the_centre_of_a_gaussian() {
    // (-Delta)^beta exp(-|x|^2) at 0 equals 4^beta Gamma(n/2 + beta) / Gamma(n/2).
    let f = |y: &[f64]| (-y.iter().map(|v| v * v).sum::<f64>()).exp();
    for (n, beta) in [(1, 0.3), (1, 0.7), (2, 0.5), (2, 0.75)] {
        let h = n as f64 / 2.0;
        let exact = 4f64.powf(beta) * gamma(h + beta) / gamma(h);
        let got = integral_fractional_laplacian(&f, beta, &vec![0.0; n], &IntegralOptions::default()).unwrap();
        assert!(rel(got, exact) < 1e-4, "n={n} beta={beta}: {got} vs {exact}");
    }
}

#[test]
fn singular_integral_is_linear() {
    let f = |y: &[f64]| (-(y[0] - 0.3).powi(2) - y[1] * y[1]).exp();
    let g = |y: &[f64]| (-2.0 * (y[0] * y[0] + (y[1] + 0.5).powi(2))).exp();
    let sum = |y: &[f64]| f(y) - 2.5 * g(y);
    let opts = IntegralOptions::default();
    let x = [0.2, -0.1];
    let a = integral_fractional_laplacian(&f, 0.6, &x, &opts).unwrap();
    let b = integral_fractional_laplacian(&g, 0.6, &x, &opts).unwrap();
    let c = integral_fractional_laplacian(&sum, 0.6, &x, &opts).unwrap();
    assert!((c - (a - 2.5 * b)).abs() <= 1e-10 * (a.abs() + 2.5 * b.abs()));
}

#[test]
fn heat_kernel_at_the_origin() {
    // G(t, 0) = t^{-2/g} Gamma(2/g) / (2 pi g) in two dimensions.
    for g in [0.8, 1.0, 1.5, 2.0] {
        let spec = HeatKernelSpec::new(g, 2).unwrap();
        for t in [0.5, 1.0, 3.0] {
            let got = heat_kernel_values(&spec, t, &[0.0]).unwrap()[0];
            let exact = t.powf(-2.0 / g) * gamma(2.0 / g) / (2.0 * PI * g);
            assert!(rel(got, exact) < 1e-8, "g={g} t={t}: {got} vs {exact}");
        }
    }
}

#[test]
fn poisson_kernel_profile() {
    // For g = 1 the kernel is the Poisson kernel t / (2 pi (t^2 + r^2)^{3/2}).
    let spec = HeatKernelSpec::new(1.0, 2).unwrap();
    let radii = [0.0, 0.25, 1.0, 3.0, 10.0];
    for t in [0.5, 2.0] {
        let vals = heat_kernel_values(&spec, t, &radii).unwrap();
        for (r, v) in radii.iter().zip(vals) {
            let exact = t / (2.0 * PI * (t * t + r * r).powf(1.5));
            assert!(rel(v, exact) < 1e-8, "t={t} r={r}: {v} vs {exact}");
        }
    }
}

#[test]
fn grid_seminorm_of_a_gaussian() {
    // [u]^2 = (2 / C) (pi / 2) 2^beta Gamma(1 + beta) for u = exp(-|x|^2) in two dimensions.
    // The lattice sum approaches the integral like (2 pi / L)^{2 + 2 beta}.
    let grid = SpectralGrid::new(2, 256, 80.0).unwrap();
    let u = ScalarField::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
    for beta in [0.25, 0.5, 0.75] {
        let got = gagliardo_seminorm_fourier(&u, beta).unwrap();
        let exact = 2.0 / constant_closed_form(2, beta) * (PI / 2.0) * 2f64.powf(beta) * gamma(1.0 + beta);
        assert!(rel(got, exact) < 1e-3, "beta={beta}: {got} vs {exact}");
    }
}
