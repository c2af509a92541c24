//! Spectral operators: transforms, multipliers, derivatives and dealiasing.
//!
//! Operators that accept "any representation" return their result in the
//! representation of the input.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Direction, Representation, ScalarField, VectorField};
use crate::grid::SpectralGrid;
use crate::multiplier::Multiplier;

pub fn transform(field: &VectorField, direction: Direction) -> Result<VectorField> {
    field.transform(direction)
}

fn check_grid(a: &SpectralGrid, b: &SpectralGrid) -> Result<()> {
    if a != b {
        return Err(Error::contract("field and multiplier live on different grids"));
    }
    Ok(())
}

pub fn apply_multiplier(field: &VectorField, mult: &Multiplier) -> Result<VectorField> {
    check_grid(field.grid(), mult.grid())?;
    let comps = field
        .components()
        .iter()
        .map(|c| apply_multiplier_scalar(c, mult))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

pub fn apply_multiplier_scalar(field: &ScalarField, mult: &Multiplier) -> Result<ScalarField> {
    check_grid(field.grid(), mult.grid())?;
    let mut out = field.clone();
    mult.apply_in_place(out.spectral_mut()?);
    Ok(out)
}

/// Apply a per-mode map to the coefficients of a field of any representation.
fn map_modes(field: &ScalarField, f: impl Fn(usize, Complex64) -> Complex64) -> ScalarField {
    let repr = field.representation();
    let mut s = field.to_spectral();
    let coeffs = s.spectral_mut().expect("spectral by construction");
    for (i, c) in coeffs.iter_mut().enumerate() {
        *c = f(i, *c);
    }
    s.in_representation(repr)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param(format!("fractional order must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

/// `(-Delta)^beta f` via the multiplier `|k|^{2 beta}`.
pub fn fractional_laplacian(field: &VectorField, beta: f64) -> Result<VectorField> {
    check_beta(beta)?;
    let mult = Multiplier::fractional_laplacian(*field.grid(), beta)?;
    let repr = field.representation();
    let out = apply_multiplier(&field.to_spectral(), &mult)?;
    Ok(out.in_representation(repr))
}

pub fn fractional_laplacian_scalar(field: &ScalarField, beta: f64) -> Result<ScalarField> {
    check_beta(beta)?;
    let mult = Multiplier::fractional_laplacian(*field.grid(), beta)?;
    let repr = field.representation();
    Ok(apply_multiplier_scalar(&field.to_spectral(), &mult)?.in_representation(repr))
}

/// `Lambda^s f` with symbol `|k|^s` for any `s >= 0`.
pub fn lambda_power(field: &VectorField, s: f64) -> Result<VectorField> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::param(format!("power of Lambda must be nonnegative, got {s}")));
    }
    let mult = Multiplier::radial(*field.grid(), |k| if k == 0.0 { 0.0 } else { k.powf(s) })?;
    let repr = field.representation();
    Ok(apply_multiplier(&field.to_spectral(), &mult)?.in_representation(repr))
}

/// `d f / d x_axis`.
pub fn partial(field: &ScalarField, axis: usize) -> Result<ScalarField> {
    let grid = *field.grid();
    if axis >= grid.dim() {
        return Err(Error::contract(format!("axis {axis} out of range")));
    }
    Ok(map_modes(field, |i, c| c * Complex64::new(0.0, grid.odd_wavevector(i)[axis])))
}

pub fn gradient(field: &ScalarField) -> Result<VectorField> {
    let comps = (0..field.grid().dim())
        .map(|a| partial(field, a))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

/// Entry `[i]` is the gradient of component `i`, so `[i].component(j)` is `d_j v_i`.
pub fn gradient_tensor(field: &VectorField) -> Result<Vec<VectorField>> {
    field.components().iter().map(gradient).collect()
}

pub fn divergence(field: &VectorField) -> Result<ScalarField> {
    let grid = *field.grid();
    let repr = field.representation();
    let mut acc = ScalarField::zeros(grid, Representation::Spectral);
    for (a, c) in field.components().iter().enumerate() {
        acc.add_scaled(1.0, &partial(&c.to_spectral(), a)?)?;
    }
    Ok(acc.in_representation(repr))
}

pub fn laplacian_scalar(field: &ScalarField) -> ScalarField {
    let grid = *field.grid();
    map_modes(field, |i, c| c * (-grid.wavenumber_sq(i)))
}

pub fn laplacian(field: &VectorField) -> Result<VectorField> {
    VectorField::new(field.components().iter().map(laplacian_scalar).collect())
}

/// Curl of a three-dimensional field.
pub fn curl(field: &VectorField) -> Result<VectorField> {
    if field.dim() != 3 {
        return Err(Error::contract("curl is only defined for three-dimensional fields"));
    }
    let g = gradient_tensor(field)?;
    let d = |i: usize, j: usize| g[i].component(j).clone();
    let mut c0 = d(2, 1);
    c0.add_scaled(-1.0, &d(1, 2))?;
    let mut c1 = d(0, 2);
    c1.add_scaled(-1.0, &d(2, 0))?;
    let mut c2 = d(1, 0);
    c2.add_scaled(-1.0, &d(0, 1))?;
    VectorField::new(vec![c0, c1, c2])
}

/// Two-dimensional vorticity `d_1 v_2 - d_2 v_1`.
pub fn vorticity_2d(field: &VectorField) -> Result<ScalarField> {
    if field.dim() != 2 {
        return Err(Error::contract("scalar vorticity needs a two-dimensional field"));
    }
    let mut w = partial(field.component(1), 0)?;
    w.add_scaled(-1.0, &partial(field.component(0), 1)?)?;
    Ok(w)
}

/// Zero every coefficient outside the band `|m_a| <= N/3` (2/3 rule).
pub fn dealias_scalar(field: &ScalarField) -> Result<ScalarField> {
    let grid = *field.grid();
    let mut out = field.clone();
    for (i, c) in out.spectral_mut()?.iter_mut().enumerate() {
        if !grid.is_resolved(i) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    Ok(out)
}

pub fn dealias(field: &VectorField) -> Result<VectorField> {
    let comps = field
        .components()
        .iter()
        .map(dealias_scalar)
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid2(n: usize, l: f64) -> SpectralGrid {
        SpectralGrid::new(2, n, l).unwrap()
    }

    fn single_mode(g: SpectralGrid, m: [i64; 2], a: f64) -> ScalarField {
        let k0 = g.fundamental();
        ScalarField::from_fn(g, |x| a * (k0 * (m[0] as f64 * x[0] + m[1] as f64 * x[1])).cos())
    }

    #[test]
    fn laplacian_multiplier_on_mode() {
        let g = grid2(16, 2.0 * PI);
        let f = single_mode(g, [3, 0], 1.0).to_spectral();
        let m = Multiplier::radial(g, |k| k * k).unwrap();
        let out = apply_multiplier_scalar(&f, &m).unwrap();
        let (a, b) = (f.spectral().unwrap(), out.spectral().unwrap());
        let i = g.flatten([3, 0, 0]);
        assert!((b[i] / a[i] - 9.0).norm() < 1e-12);
    }

    #[test]
    fn half_laplacian_on_mode() {
        let g = grid2(16, 2.0 * PI);
        let f = VectorField::new(vec![
            single_mode(g, [0, 4], 1.0),
            ScalarField::zeros(g, Representation::Physical),
        ])
        .unwrap();
        let out = fractional_laplacian(&f, 0.5).unwrap();
        assert!(out.max_abs_diff(&f.scaled(4.0)).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_beta() {
        let g = grid2(8, 1.0);
        let f = VectorField::zeros(g, Representation::Spectral);
        assert!(matches!(fractional_laplacian(&f, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(fractional_laplacian(&f, 1.5), Err(Error::Parameter(_))));
    }

    #[test]
    fn constant_is_annihilated() {
        let g = grid2(8, 1.0);
        let c = ScalarField::from_fn(g, |_| 3.5);
        let out = fractional_laplacian_scalar(&c, 0.3).unwrap();
        assert!(out.physical().unwrap().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn gradient_of_cosine() {
        let g = grid2(16, 2.0 * PI);
        let f = ScalarField::from_fn(g, |x| (2.0 * x[0]).cos());
        let grad = gradient(&f).unwrap();
        let expected = VectorField::from_fn(g, |x| [-2.0 * (2.0 * x[0]).sin(), 0.0, 0.0]);
        assert!(grad.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn stream_function_field_is_solenoidal() {
        let g = grid2(32, 2.0 * PI);
        let psi = ScalarField::from_fn(g, |x| (x[0]).sin() * (2.0 * x[1]).cos() + (3.0 * x[0] + x[1]).cos());
        let d1 = partial(&psi, 0).unwrap();
        let d2 = partial(&psi, 1).unwrap();
        let v = VectorField::new(vec![d2.scaled(-1.0), d1]).unwrap();
        let div = divergence(&v).unwrap();
        assert!(div.physical().unwrap().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let g = grid2(32, 2.0 * PI);
        let f = ScalarField::from_fn(g, |x| (x[0] + 2.0 * x[1]).sin() * x[0].cos());
        let lhs = divergence(&gradient(&f).unwrap()).unwrap();
        let rhs = laplacian_scalar(&f);
        let diff = lhs
            .physical()
            .unwrap()
            .iter()
            .zip(rhs.physical().unwrap())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-12);
    }

    #[test]
    fn dealias_zeroes_nyquist_only_field() {
        let g = grid2(8, 1.0);
        let f = ScalarField::from_fn(g, |x| (PI * 8.0 * x[0]).cos()).to_spectral();
        assert!(f.spectral().unwrap().iter().any(|c| c.norm() > 1.0));
        let out = dealias_scalar(&f).unwrap();
        assert!(out.spectral().unwrap().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn curl_requires_three_dimensions() {
        let g = grid2(8, 1.0);
        assert!(curl(&VectorField::zeros(g, Representation::Physical)).is_err());
    }
}
