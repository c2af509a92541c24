//! Real scalar and vector fields with a physical or spectral representation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::fft_nd;
use crate::grid::SpectralGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, PartialEq)]
enum Samples {
    Physical(Vec<f64>),
    Spectral(Vec<Complex64>),
}

/// A real scalar field. In spectral form it holds unnormalized DFT
/// coefficients, which are Hermitian-symmetric for a real field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: SpectralGrid,
    samples: Samples,
}

impl ScalarField {
    pub fn zeros(grid: SpectralGrid, repr: Representation) -> Self {
        let samples = match repr {
            Representation::Physical => Samples::Physical(vec![0.0; grid.len()]),
            Representation::Spectral => Samples::Spectral(vec![Complex64::new(0.0, 0.0); grid.len()]),
        };
        Self { grid, samples }
    }

    pub fn from_physical(grid: SpectralGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::contract(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, samples: Samples::Physical(values) })
    }

    pub fn from_spectral(grid: SpectralGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::contract(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, samples: Samples::Spectral(coeffs) })
    }

    /// Sample a function of the point coordinates (unused axes are zero).
    pub fn from_fn(grid: SpectralGrid, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coordinates(i))).collect();
        Self { grid, samples: Samples::Physical(values) }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        match self.samples {
            Samples::Physical(_) => Representation::Physical,
            Samples::Spectral(_) => Representation::Spectral,
        }
    }

    pub fn physical(&self) -> Result<&[f64]> {
        match &self.samples {
            Samples::Physical(v) => Ok(v),
            Samples::Spectral(_) => Err(Error::contract("field is in spectral representation")),
        }
    }

    pub fn physical_mut(&mut self) -> Result<&mut [f64]> {
        match &mut self.samples {
            Samples::Physical(v) => Ok(v),
            Samples::Spectral(_) => Err(Error::contract("field is in spectral representation")),
        }
    }

    pub fn spectral(&self) -> Result<&[Complex64]> {
        match &self.samples {
            Samples::Spectral(c) => Ok(c),
            Samples::Physical(_) => Err(Error::contract("field is in physical representation")),
        }
    }

    pub fn spectral_mut(&mut self) -> Result<&mut [Complex64]> {
        match &mut self.samples {
            Samples::Spectral(c) => Ok(c),
            Samples::Physical(_) => Err(Error::contract("field is in physical representation")),
        }
    }

    /// Transform in the given direction; the field must be in the source representation.
    pub fn transform(&self, direction: Direction) -> Result<Self> {
        match (direction, &self.samples) {
            (Direction::Forward, Samples::Physical(_)) => Ok(self.to_spectral()),
            (Direction::Inverse, Samples::Spectral(_)) => Ok(self.to_physical()),
            (Direction::Forward, _) => Err(Error::contract("forward transform needs physical input")),
            (Direction::Inverse, _) => Err(Error::contract("inverse transform needs spectral input")),
        }
    }

    /// Spectral copy of the field (a clone if already spectral).
    pub fn to_spectral(&self) -> Self {
        match &self.samples {
            Samples::Spectral(_) => self.clone(),
            Samples::Physical(v) => {
                let mut c: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                fft_nd(&mut c, self.grid.dim(), self.grid.points_per_axis(), false);
                Self { grid: self.grid, samples: Samples::Spectral(c) }
            }
        }
    }

    /// Physical copy of the field (a clone if already physical).
    pub fn to_physical(&self) -> Self {
        self.to_physical_with_residue().0
    }

    /// Physical copy plus the largest imaginary part discarded by the inverse
    /// transform, which measures the Hermitian defect of the coefficients.
    pub fn to_physical_with_residue(&self) -> (Self, f64) {
        match &self.samples {
            Samples::Physical(_) => (self.clone(), 0.0),
            Samples::Spectral(c) => {
                let mut c = c.clone();
                fft_nd(&mut c, self.grid.dim(), self.grid.points_per_axis(), true);
                let residue = c.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
                let values = c.into_iter().map(|z| z.re).collect();
                (Self { grid: self.grid, samples: Samples::Physical(values) }, residue)
            }
        }
    }

    pub fn into_spectral(self) -> Self {
        match self.samples {
            Samples::Spectral(_) => self,
            Samples::Physical(_) => self.to_spectral(),
        }
    }

    pub fn into_physical(self) -> Self {
        match self.samples {
            Samples::Physical(_) => self,
            Samples::Spectral(_) => self.to_physical(),
        }
    }

    pub fn in_representation(&self, repr: Representation) -> Self {
        match repr {
            Representation::Physical => self.to_physical(),
            Representation::Spectral => self.to_spectral(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let samples = match &self.samples {
            Samples::Physical(v) => Samples::Physical(v.iter().map(|x| a * x).collect()),
            Samples::Spectral(c) => Samples::Spectral(c.iter().map(|z| z * a).collect()),
        };
        Self { grid: self.grid, samples }
    }

    /// `self += a * other`; both fields must share grid and representation.
    pub fn add_scaled(&mut self, a: f64, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::contract("grid mismatch"));
        }
        match (&mut self.samples, &other.samples) {
            (Samples::Physical(x), Samples::Physical(y)) => {
                x.iter_mut().zip(y).for_each(|(x, y)| *x += a * y);
            }
            (Samples::Spectral(x), Samples::Spectral(y)) => {
                x.iter_mut().zip(y).for_each(|(x, y)| *x += y * a);
            }
            _ => return Err(Error::contract("representation mismatch")),
        }
        Ok(())
    }

    /// Squared discrete L2 norm, by quadrature or by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        match &self.samples {
            Samples::Physical(v) => v.iter().map(|x| x * x).sum::<f64>() * self.grid.cell_volume(),
            Samples::Spectral(c) => c.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.parseval_weight(),
        }
    }

    /// Largest `|c(k) - conj(c(-k))|` over the spectral coefficients.
    pub fn hermitian_defect(&self) -> Result<f64> {
        let c = self.spectral()?;
        Ok((0..c.len())
            .map(|i| (c[i] - c[self.grid.partner_flat(i)].conj()).norm())
            .fold(0.0, f64::max))
    }
}

/// A real vector field with exactly `grid.dim()` components sharing one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: SpectralGrid,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::contract("vector field needs components"))?;
        let grid = *first.grid();
        let repr = first.representation();
        if components.len() != grid.dim() {
            return Err(Error::contract(format!(
                "{} components on a {}-dimensional grid",
                components.len(),
                grid.dim()
            )));
        }
        if components.iter().any(|c| *c.grid() != grid || c.representation() != repr) {
            return Err(Error::contract("components disagree on grid or representation"));
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: SpectralGrid, repr: Representation) -> Self {
        let components = (0..grid.dim()).map(|_| ScalarField::zeros(grid, repr)).collect();
        Self { grid, components }
    }

    /// Sample a vector-valued function; only the first `dim` outputs are used.
    pub fn from_fn(grid: SpectralGrid, f: impl Fn(&[f64; 3]) -> [f64; 3]) -> Self {
        let mut values = vec![Vec::with_capacity(grid.len()); grid.dim()];
        for i in 0..grid.len() {
            let y = f(&grid.coordinates(i));
            for (a, vals) in values.iter_mut().enumerate() {
                vals.push(y[a]);
            }
        }
        let components = values
            .into_iter()
            .map(|v| ScalarField { grid, samples: Samples::Physical(v) })
            .collect();
        Self { grid, components }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn representation(&self) -> Representation {
        self.components[0].representation()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut ScalarField {
        &mut self.components[i]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn transform(&self, direction: Direction) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| c.transform(direction))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: self.grid, components })
    }

    pub fn to_spectral(&self) -> Self {
        let components = self.components.iter().map(ScalarField::to_spectral).collect();
        Self { grid: self.grid, components }
    }

    pub fn to_physical(&self) -> Self {
        let components = self.components.iter().map(ScalarField::to_physical).collect();
        Self { grid: self.grid, components }
    }

    /// Physical copy plus the largest discarded imaginary part over all components.
    pub fn to_physical_with_residue(&self) -> (Self, f64) {
        let mut residue = 0.0f64;
        let components = self
            .components
            .iter()
            .map(|c| {
                let (p, r) = c.to_physical_with_residue();
                residue = residue.max(r);
                p
            })
            .collect();
        (Self { grid: self.grid, components }, residue)
    }

    pub fn in_representation(&self, repr: Representation) -> Self {
        match repr {
            Representation::Physical => self.to_physical(),
            Representation::Spectral => self.to_spectral(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let components = self.components.iter().map(|c| c.scaled(a)).collect();
        Self { grid: self.grid, components }
    }

    pub fn add_scaled(&mut self, a: f64, other: &VectorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::contract("grid mismatch"));
        }
        for (x, y) in self.components.iter_mut().zip(&other.components) {
            x.add_scaled(a, y)?;
        }
        Ok(())
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, b: f64, other: &VectorField) -> Result<Self> {
        let mut out = self.scaled(a);
        out.add_scaled(b, other)?;
        Ok(out)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.components.iter().map(ScalarField::l2_norm_sq).sum()
    }

    /// Discrete inner product `sum_i <a_i, b_i>` of two physical fields.
    pub fn inner(&self, other: &VectorField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::contract("grid mismatch"));
        }
        let mut acc = 0.0;
        for (x, y) in self.components.iter().zip(&other.components) {
            let (x, y) = (x.physical()?, y.physical()?);
            acc += x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(acc * self.grid.cell_volume())
    }

    /// Largest absolute entry-wise difference; representations must agree.
    pub fn max_abs_diff(&self, other: &VectorField) -> Result<f64> {
        if self.grid != other.grid || self.representation() != other.representation() {
            return Err(Error::contract("grid or representation mismatch"));
        }
        let mut m = 0.0f64;
        for (x, y) in self.components.iter().zip(&other.components) {
            match (&x.samples, &y.samples) {
                (Samples::Physical(a), Samples::Physical(b)) => {
                    for (p, q) in a.iter().zip(b) {
                        m = m.max((p - q).abs());
                    }
                }
                (Samples::Spectral(a), Samples::Spectral(b)) => {
                    for (p, q) in a.iter().zip(b) {
                        m = m.max((p - q).norm());
                    }
                }
                _ => unreachable!("representations checked above"),
            }
        }
        Ok(m)
    }

    /// Largest absolute entry (physical value or coefficient modulus).
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for c in &self.components {
            match &c.samples {
                Samples::Physical(a) => a.iter().for_each(|x| m = m.max(x.abs())),
                Samples::Spectral(a) => a.iter().for_each(|x| m = m.max(x.norm())),
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| match &c.samples {
            Samples::Physical(a) => a.iter().all(|x| x.is_finite()),
            Samples::Spectral(a) => a.iter().all(|x| x.re.is_finite() && x.im.is_finite()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_has_two_coefficients() {
        let g = SpectralGrid::new(2, 16, 3.0).unwrap();
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0] / 3.0).cos());
        let c = f.transform(Direction::Forward).unwrap();
        let c = c.spectral().unwrap();
        let big: Vec<[i64; 3]> = (0..g.len())
            .filter(|&i| c[i].norm() > 1e-9)
            .map(|i| g.modes(i))
            .collect();
        assert_eq!(big.len(), 2);
        assert!(big.contains(&[1, 0, 0]) && big.contains(&[-1, 0, 0]));
    }

    #[test]
    fn wrong_direction_is_contract_error() {
        let g = SpectralGrid::new(2, 8, 1.0).unwrap();
        let f = ScalarField::zeros(g, Representation::Physical);
        assert!(matches!(f.transform(Direction::Inverse), Err(Error::Contract(_))));
        let v = VectorField::zeros(g, Representation::Spectral);
        assert!(matches!(v.transform(Direction::Forward), Err(Error::Contract(_))));
    }

    #[test]
    fn component_count_is_checked() {
        let g = SpectralGrid::new(3, 8, 1.0).unwrap();
        let c = ScalarField::zeros(g, Representation::Physical);
        assert!(VectorField::new(vec![c.clone(), c.clone()]).is_err());
        assert!(VectorField::new(vec![c.clone(), c.clone(), c]).is_ok());
    }

    #[test]
    fn parseval_holds() {
        let g = SpectralGrid::new(2, 16, 5.0).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] * 1.3).sin() * (-x[1] * x[1]).exp() + 0.2);
        let a = f.l2_norm_sq();
        let b = f.to_spectral().l2_norm_sq();
        assert!((a - b).abs() <= 1e-12 * a);
        assert!(f.to_spectral().hermitian_defect().unwrap() < 1e-12);
    }
}
