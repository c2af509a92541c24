//! Periodic box discretization and its wavenumber lattice.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A periodic box `[-L/2, L/2)^dim` sampled with `N` points per axis.
///
/// Array storage is row-major with axis 0 slowest. Wavenumbers follow the
/// usual FFT ordering: index `j` maps to `m = j` for `j < N/2` and to
/// `m = j - N` otherwise, so the single Nyquist index per axis is `m = -N/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    dim: usize,
    n: usize,
    length: f64,
}

impl SpectralGrid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::param(format!("grid dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::param(format!(
                "points per axis must be even and at least 8, got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::param(format!("box length must be positive, got {length}")));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.length
    }

    /// Total number of grid points, `N^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Quadrature weight `(L/N)^dim` of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Weight turning `sum |f_hat|^2` of the unnormalized DFT into `||f||_2^2`.
    pub fn parseval_weight(&self) -> f64 {
        self.cell_volume() / self.len() as f64
    }

    /// Lowest nonzero wavenumber `2 pi / L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Signed mode number of array index `j` along one axis.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// Array index of the mode `-m` along one axis.
    pub fn partner(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    /// Per-axis indices of a flat offset; unused trailing axes are zero.
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            2 => [flat / n, flat % n, 0],
            _ => [flat / (n * n), (flat / n) % n, flat % n],
        }
    }

    pub fn flatten(&self, idx: [usize; 3]) -> usize {
        let n = self.n;
        match self.dim {
            2 => idx[0] * n + idx[1],
            _ => (idx[0] * n + idx[1]) * n + idx[2],
        }
    }

    /// Flat offset of the Hermitian partner `-k` of a mode.
    pub fn partner_flat(&self, flat: usize) -> usize {
        let idx = self.unflatten(flat);
        let mut out = [0; 3];
        for a in 0..self.dim {
            out[a] = self.partner(idx[a]);
        }
        self.flatten(out)
    }

    /// Signed mode numbers of a flat offset.
    pub fn modes(&self, flat: usize) -> [i64; 3] {
        let idx = self.unflatten(flat);
        let mut m = [0; 3];
        for a in 0..self.dim {
            m[a] = self.mode(idx[a]);
        }
        m
    }

    /// Physical wavevector `k = (2 pi / L) m`.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let m = self.modes(flat);
        let k0 = self.fundamental();
        [k0 * m[0] as f64, k0 * m[1] as f64, k0 * m[2] as f64]
    }

    /// Wavevector used by odd symbols (derivatives, projection): components
    /// on a Nyquist index are zeroed so that real fields stay real.
    pub fn odd_wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let mut k = self.wavevector(flat);
        for a in 0..self.dim {
            if self.is_nyquist(idx[a]) {
                k[a] = 0.0;
            }
        }
        k
    }

    pub fn wavenumber_sq(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Physical coordinates of a grid point; the box is centred on the origin.
    pub fn coordinates(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = -0.5 * self.length + idx[a] as f64 * h;
        }
        x
    }

    /// Per-mode table of `|k|^2`.
    pub fn wavenumber_sq_table(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.wavenumber_sq(i)).collect()
    }

    /// True when a mode lies inside the 2/3-rule band `|m_a| <= N/3` on every axis.
    pub fn is_resolved(&self, flat: usize) -> bool {
        let m = self.modes(flat);
        let n = self.n as i64;
        (0..self.dim).all(|a| 3 * m[a].abs() <= n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(SpectralGrid::new(1, 16, 1.0).is_err());
        assert!(SpectralGrid::new(2, 7, 1.0).is_err());
        assert!(SpectralGrid::new(2, 6, 1.0).is_err());
        assert!(SpectralGrid::new(3, 16, 0.0).is_err());
        assert!(SpectralGrid::new(3, 8, 1.0).is_ok());
    }

    #[test]
    fn lattice_is_symmetric_except_nyquist() {
        let g = SpectralGrid::new(2, 16, 2.0 * PI).unwrap();
        let modes: Vec<i64> = (0..16).map(|j| g.mode(j)).collect();
        assert_eq!(modes[0], 0);
        assert_eq!(modes[7], 7);
        assert_eq!(modes[8], -8);
        assert_eq!(modes[15], -1);
        for j in 0..16 {
            if !g.is_nyquist(j) {
                assert_eq!(g.mode(g.partner(j)), -g.mode(j));
            } else {
                assert_eq!(g.partner(j), j);
            }
        }
    }

    #[test]
    fn flat_indexing_round_trips() {
        for dim in [2, 3] {
            let g = SpectralGrid::new(dim, 8, 1.0).unwrap();
            for flat in 0..g.len() {
                assert_eq!(g.flatten(g.unflatten(flat)), flat);
                assert_eq!(g.partner_flat(g.partner_flat(flat)), flat);
            }
        }
    }

    #[test]
    fn odd_wavevector_drops_nyquist_component() {
        let g = SpectralGrid::new(2, 8, 2.0 * PI).unwrap();
        let flat = g.flatten([4, 1, 0]);
        assert_eq!(g.wavevector(flat)[0], -4.0);
        assert_eq!(g.odd_wavevector(flat)[0], 0.0);
        assert_eq!(g.odd_wavevector(flat)[1], 1.0);
    }
}
