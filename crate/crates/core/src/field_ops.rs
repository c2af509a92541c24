//! Incompressible vector calculus: Leray projection, the quadratic terms of
//! the alpha model, the symmetrization identity and pressure recovery.
//!
//! Convention: `(v . grad u^T)_i = sum_j v_j d_i u_j`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::SpectralGrid;
use crate::spectral::{dealias, gradient, gradient_tensor, partial};

/// A spectral velocity field certified divergence-free.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedField {
    field: VectorField,
}

impl ProjectedField {
    /// Certify an existing field without projecting it; fails when the
    /// spectral divergence exceeds `1e-10 * max|v_hat| * max|k|`.
    pub fn certify(field: VectorField) -> Result<Self> {
        let field = field.to_spectral();
        let defect = divergence_defect(&field)?;
        if defect > 1e-10 {
            return Err(Error::contract(format!(
                "field is not divergence-free (relative defect {defect:e})"
            )));
        }
        Ok(Self { field })
    }

    /// Wrap a spectral field that is divergence-free by construction.
    pub(crate) fn trusted(field: VectorField) -> Self {
        Self { field }
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn into_inner(self) -> VectorField {
        self.field
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.field.grid()
    }
}

/// `max_k |k . v_hat(k)| / (max_k |v_hat(k)| * max_k |k|)`, zero for a zero field.
pub fn divergence_defect(field: &VectorField) -> Result<f64> {
    let grid = *field.grid();
    let s = field.to_spectral();
    let comps: Vec<&[Complex64]> = s
        .components()
        .iter()
        .map(|c| c.spectral())
        .collect::<Result<_>>()?;
    let (mut div_max, mut amp_max, mut k_max) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..grid.len() {
        let k = grid.odd_wavevector(i);
        let mut d = Complex64::new(0.0, 0.0);
        let mut amp = 0.0;
        for (a, c) in comps.iter().enumerate() {
            d += c[i] * k[a];
            amp += c[i].norm_sqr();
        }
        div_max = div_max.max(d.norm());
        amp_max = amp_max.max(amp.sqrt());
        k_max = k_max.max((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt());
    }
    if amp_max == 0.0 {
        return Ok(0.0);
    }
    Ok(div_max / (amp_max * k_max))
}

/// Apply `I - k k^T / |k|^2` mode by mode (identity at `k = 0`).
pub(crate) fn project_in_place(grid: &SpectralGrid, comps: &mut [Vec<Complex64>]) {
    let dim = grid.dim();
    for i in 0..grid.len() {
        let k = grid.odd_wavevector(i);
        let k2: f64 = k[..dim].iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            continue;
        }
        let mut kv = Complex64::new(0.0, 0.0);
        for a in 0..dim {
            kv += comps[a][i] * k[a];
        }
        let s = kv / k2;
        for a in 0..dim {
            comps[a][i] -= s * k[a];
        }
    }
}

/// Leray projection onto divergence-free fields. The result is spectral.
pub fn leray_project(v: &VectorField) -> Result<ProjectedField> {
    let grid = *v.grid();
    let mut comps: Vec<Vec<Complex64>> = v
        .to_spectral()
        .components()
        .iter()
        .map(|c| c.spectral().map(<[Complex64]>::to_vec))
        .collect::<Result<_>>()?;
    project_in_place(&grid, &mut comps);
    let comps = comps
        .into_iter()
        .map(|c| ScalarField::from_spectral(grid, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjectedField { field: VectorField::new(comps)? })
}

fn check_pair(u: &VectorField, v: &VectorField) -> Result<()> {
    if u.grid() != v.grid() {
        return Err(Error::contract("fields live on different grids"));
    }
    Ok(())
}

/// Physical samples of every component.
fn samples(f: &VectorField) -> Result<Vec<Vec<f64>>> {
    f.to_physical()
        .components()
        .iter()
        .map(|c| c.physical().map(<[f64]>::to_vec))
        .collect()
}

/// Physical samples of the gradient tensor: `[i][j]` holds `d_j f_i`.
fn gradient_samples(f: &VectorField) -> Result<Vec<Vec<Vec<f64>>>> {
    gradient_tensor(&f.to_spectral())?.iter().map(samples).collect()
}

fn from_samples(grid: SpectralGrid, comps: Vec<Vec<f64>>) -> Result<VectorField> {
    VectorField::new(
        comps
            .into_iter()
            .map(|c| ScalarField::from_physical(grid, c))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Forward-transform a physically assembled field and optionally dealias it.
fn finish(field: VectorField, dealiased: bool) -> Result<VectorField> {
    let s = field.to_spectral();
    if dealiased {
        dealias(&s)
    } else {
        Ok(s)
    }
}

/// `u . grad v + v . grad u^T`, un-projected and dealiased, in spectral form.
pub fn ch_nonlinear_term(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    ch_nonlinear_term_with(u, v, true)
}

pub fn ch_nonlinear_term_with(u: &VectorField, v: &VectorField, dealiased: bool) -> Result<VectorField> {
    check_pair(u, v)?;
    let grid = *u.grid();
    let (us, vs) = (samples(u)?, samples(v)?);
    let (du, dv) = (gradient_samples(u)?, gradient_samples(v)?);
    let dim = grid.dim();
    let mut out = vec![vec![0.0; grid.len()]; dim];
    for i in 0..dim {
        for j in 0..dim {
            for p in 0..grid.len() {
                out[i][p] += us[j][p] * dv[i][j][p] + vs[j][p] * du[j][i][p];
            }
        }
    }
    finish(from_samples(grid, out)?, dealiased)
}

/// `v . grad v`, the transport term of the fractional Navier-Stokes equations.
pub fn nse_nonlinear_term(v: &VectorField) -> Result<VectorField> {
    let grid = *v.grid();
    let vs = samples(v)?;
    let dv = gradient_samples(v)?;
    let dim = grid.dim();
    let mut out = vec![vec![0.0; grid.len()]; dim];
    for i in 0..dim {
        for j in 0..dim {
            for p in 0..grid.len() {
                out[i][p] += vs[j][p] * dv[i][j][p];
            }
        }
    }
    finish(from_samples(grid, out)?, true)
}

/// `u . grad v - u . grad v^T`, the form appearing in the Duhamel formulation.
pub fn mild_form_nonlinearity(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    check_pair(u, v)?;
    let grid = *u.grid();
    let us = samples(u)?;
    let dv = gradient_samples(v)?;
    let dim = grid.dim();
    let mut out = vec![vec![0.0; grid.len()]; dim];
    for i in 0..dim {
        for j in 0..dim {
            for p in 0..grid.len() {
                out[i][p] += us[j][p] * (dv[i][j][p] - dv[j][i][p]);
            }
        }
    }
    finish(from_samples(grid, out)?, true)
}

/// `-u x (curl v)`, which differs from the alpha-model quadratic term by the
/// gradient `grad(u . v)` and therefore has the same Leray projection.
pub fn rotational_nonlinearity(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    check_pair(u, v)?;
    let grid = *u.grid();
    let us = samples(u)?;
    let vs = v.to_spectral();
    let mut out = vec![vec![0.0; grid.len()]; grid.dim()];
    if grid.dim() == 2 {
        let w = crate::spectral::vorticity_2d(&vs)?.to_physical();
        let w = w.physical()?;
        for p in 0..grid.len() {
            out[0][p] = -us[1][p] * w[p];
            out[1][p] = us[0][p] * w[p];
        }
    } else {
        let w = samples(&crate::spectral::curl(&vs)?)?;
        for p in 0..grid.len() {
            out[0][p] = -(us[1][p] * w[2][p] - us[2][p] * w[1][p]);
            out[1][p] = -(us[2][p] * w[0][p] - us[0][p] * w[2][p]);
            out[2][p] = -(us[0][p] * w[1][p] - us[1][p] * w[0][p]);
        }
    }
    finish(from_samples(grid, out)?, true)
}

/// Pointwise `sum_i u_i v_i`.
fn dot_samples(u: &VectorField, v: &VectorField) -> Result<Vec<f64>> {
    let (us, vs) = (samples(u)?, samples(v)?);
    let n = u.grid().len();
    Ok((0..n).map(|p| us.iter().zip(&vs).map(|(a, b)| a[p] * b[p]).sum()).collect())
}

/// Maximum-norm residual of `grad(sum_i u_i v_i) = u . grad v^T + v . grad u^T`,
/// relative to the largest entry of the right side (zero when both vanish).
///
/// Both sides are compared after 2/3 dealiasing, which removes the aliasing
/// error of the grid product exactly for band-limited inputs.
pub fn symmetrized_identity_check(u: &VectorField, v: &VectorField) -> Result<f64> {
    check_pair(u, v)?;
    let grid = *u.grid();
    let dim = grid.dim();
    let uv = ScalarField::from_physical(grid, dot_samples(u, v)?)?;
    let lhs = dealias(&gradient(&uv.to_spectral())?)?.to_physical();

    let (us, vs) = (samples(u)?, samples(v)?);
    let (du, dv) = (gradient_samples(u)?, gradient_samples(v)?);
    let mut rhs = vec![vec![0.0; grid.len()]; dim];
    for k in 0..dim {
        for j in 0..dim {
            for p in 0..grid.len() {
                rhs[k][p] += us[j][p] * dv[j][k][p] + vs[j][p] * du[j][k][p];
            }
        }
    }
    let rhs = finish(from_samples(grid, rhs)?, true)?.to_physical();
    let scale = rhs.max_abs();
    let diff = lhs.max_abs_diff(&rhs)?;
    if scale == 0.0 {
        return Ok(diff);
    }
    Ok(diff / scale)
}

/// Solve `-Delta(p + u . v) = div(u . grad v - u . grad v^T)` for the
/// zero-mean pressure `p`. Returned in physical form.
pub fn recover_pressure(u: &VectorField, v: &VectorField) -> Result<ScalarField> {
    check_pair(u, v)?;
    let grid = *u.grid();
    for (name, f) in [("u", u), ("v", v)] {
        let s = f.to_spectral();
        let scale = s.max_abs().max(f64::MIN_POSITIVE);
        let mean = s
            .components()
            .iter()
            .map(|c| c.spectral().map(|x| x[0].norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if mean > 1e-12 * scale {
            return Err(Error::contract(format!(
                "{name} has a nonzero mean; the pressure source does not decay"
            )));
        }
    }
    let b = mild_form_nonlinearity(u, v)?;
    let mut q = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (a, c) in b.components().iter().enumerate() {
        let d = partial(c, a)?;
        for (q, d) in q.iter_mut().zip(d.spectral()?) {
            *q += d;
        }
    }
    for (i, q) in q.iter_mut().enumerate() {
        let k2 = grid.wavenumber_sq(i);
        *q = if k2 == 0.0 { Complex64::new(0.0, 0.0) } else { *q / k2 };
    }
    let uv = ScalarField::from_physical(grid, dot_samples(u, v)?)?.to_spectral();
    let uv = crate::spectral::dealias_scalar(&uv)?;
    for (i, (q, c)) in q.iter_mut().zip(uv.spectral()?).enumerate() {
        if i != 0 {
            *q -= c;
        }
    }
    Ok(ScalarField::from_spectral(grid, q)?.to_physical())
}

/// Complement of the projection, `(I - P) f`, in spectral form.
pub fn gradient_part(f: &VectorField) -> Result<VectorField> {
    let s = f.to_spectral();
    let p = leray_project(&s)?;
    s.combine(1.0, -1.0, p.field())
}

/// `|<u.grad v + v.grad u^T, u>| / (|u|^2 |v|_{H^1})`, which vanishes for
/// divergence-free `u`.
pub fn orthogonality_defect(u: &VectorField, v: &VectorField) -> Result<f64> {
    check_pair(u, v)?;
    let term = ch_nonlinear_term(u, v)?.to_physical();
    let up = u.to_physical();
    let num = term.inner(&up)?.abs();
    let h1 = (v.l2_norm_sq() + crate::diagnostics::seminorm_sq(v, 1.0)?).sqrt();
    let den = up.l2_norm_sq() * h1;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Representation;
    use crate::spectral::divergence;
    use std::f64::consts::PI;

    fn grid2() -> SpectralGrid {
        SpectralGrid::new(2, 16, 2.0 * PI).unwrap()
    }

    fn sample_field(g: SpectralGrid, shift: f64) -> VectorField {
        VectorField::from_fn(g, |x| {
            [
                (x[0] + shift).sin() * (2.0 * x[1]).cos(),
                (x[1] - shift).cos() + (x[0] + 2.0 * x[1]).sin(),
                0.0,
            ]
        })
    }

    #[test]
    fn projection_removes_gradients() {
        let g = grid2();
        let phi = ScalarField::from_fn(g, |x| (x[0] + x[1]).sin() + (3.0 * x[1]).cos());
        let grad = gradient(&phi).unwrap();
        let p = leray_project(&grad).unwrap();
        assert!(p.field().max_abs() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent_and_solenoidal() {
        let g = grid2();
        let p = leray_project(&sample_field(g, 0.3)).unwrap();
        let pp = leray_project(p.field()).unwrap();
        assert!(p.field().max_abs_diff(pp.field()).unwrap() < 1e-12);
        let d = divergence(&p.field().to_physical()).unwrap();
        assert!(d.physical().unwrap().iter().all(|x| x.abs() < 1e-12));
        assert!(ProjectedField::certify(p.field().clone()).is_ok());
        assert!(ProjectedField::certify(sample_field(g, 0.3)).is_err());
    }

    #[test]
    fn zero_inputs_give_zero() {
        let g = grid2();
        let z = VectorField::zeros(g, Representation::Physical);
        assert_eq!(ch_nonlinear_term(&z, &z).unwrap().max_abs(), 0.0);
        assert_eq!(symmetrized_identity_check(&z, &sample_field(g, 0.1)).unwrap(), 0.0);
        let p = recover_pressure(&z, &z).unwrap();
        assert!(p.physical().unwrap().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn rotational_form_has_same_projection() {
        let g = SpectralGrid::new(2, 24, 2.0 * PI).unwrap();
        let u = dealias(&leray_project(&sample_field(g, 0.2)).unwrap().into_inner()).unwrap();
        let v = dealias(&leray_project(&sample_field(g, 1.1)).unwrap().into_inner()).unwrap();
        let a = leray_project(&ch_nonlinear_term(&u, &v).unwrap()).unwrap();
        let b = leray_project(&rotational_nonlinearity(&u, &v).unwrap()).unwrap();
        let scale = a.field().max_abs();
        assert!(a.field().max_abs_diff(b.field()).unwrap() < 1e-12 * scale);
    }

    #[test]
    fn nonzero_mean_is_rejected_by_pressure_solver() {
        let g = grid2();
        let u = VectorField::from_fn(g, |x| [1.0 + x[1].sin(), 0.0, 0.0]);
        assert!(recover_pressure(&u, &u).is_err());
    }
}
