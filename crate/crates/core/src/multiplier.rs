//! Real, even Fourier multipliers tabulated on the wavenumber lattice.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    grid: SpectralGrid,
    table: Vec<f64>,
}

impl Multiplier {
    /// Tabulate `symbol(k)` on every lattice point.
    ///
    /// The symbol must be finite everywhere (including `k = 0`) and even, so
    /// that applying it keeps real fields real.
    pub fn from_symbol(grid: SpectralGrid, symbol: impl Fn(&[f64; 3]) -> f64) -> Result<Self> {
        let table: Vec<f64> = (0..grid.len()).map(|i| symbol(&grid.wavevector(i))).collect();
        Self::from_table(grid, table)
    }

    /// Tabulate a function of `|k|`.
    pub fn radial(grid: SpectralGrid, symbol: impl Fn(f64) -> f64) -> Result<Self> {
        let table = (0..grid.len()).map(|i| symbol(grid.wavenumber_sq(i).sqrt())).collect();
        Self::from_table(grid, table)
    }

    fn from_table(grid: SpectralGrid, table: Vec<f64>) -> Result<Self> {
        for (i, &s) in table.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::param(format!(
                    "symbol is not finite at mode {:?}",
                    grid.modes(i)
                )));
            }
            let p = table[grid.partner_flat(i)];
            if (s - p).abs() > 1e-12 * s.abs().max(p.abs()).max(1e-300) {
                return Err(Error::param(format!(
                    "symbol is not even at mode {:?}: {s} vs {p}",
                    grid.modes(i)
                )));
            }
        }
        Ok(Self { grid, table })
    }

    pub fn identity(grid: SpectralGrid) -> Self {
        Self { grid, table: vec![1.0; grid.len()] }
    }

    /// `|k|^{2 beta}`, the symbol of the fractional Laplacian.
    pub fn fractional_laplacian(grid: SpectralGrid, beta: f64) -> Result<Self> {
        Self::radial(grid, |k| k.powf(2.0 * beta))
    }

    /// `(1 + alpha^2 |k|^2)^{-1}`, the inverse of the Helmholtz operator.
    pub fn helmholtz_inverse(grid: SpectralGrid, alpha: f64) -> Result<Self> {
        let a2 = alpha * alpha;
        Self::from_table(
            grid,
            (0..grid.len()).map(|i| 1.0 / (1.0 + a2 * grid.wavenumber_sq(i))).collect(),
        )
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.table
    }

    pub fn apply_in_place(&self, coeffs: &mut [Complex64]) {
        coeffs
            .par_iter_mut()
            .zip(self.table.par_iter())
            .for_each(|(c, s)| *c *= *s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_symbol() {
        let g = SpectralGrid::new(2, 8, 1.0).unwrap();
        assert!(Multiplier::from_symbol(g, |k| k[0]).is_err());
        assert!(Multiplier::from_symbol(g, |k| k[0] * k[0] + k[1]).is_err());
        assert!(Multiplier::from_symbol(g, |k| k[0] * k[0] * k[1] * k[1]).is_ok());
    }

    #[test]
    fn rejects_singular_symbol() {
        let g = SpectralGrid::new(2, 8, 1.0).unwrap();
        assert!(Multiplier::radial(g, |k| 1.0 / k).is_err());
        assert!(Multiplier::radial(g, |k| if k == 0.0 { 0.0 } else { 1.0 / k }).is_ok());
    }
}
