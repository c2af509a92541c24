//! Initial data: stream-function bumps, band-limited random solenoidal fields
//! and the energy-preserving rescaling `eps^{n/2} u0(eps x)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::field_ops::leray_project;
use crate::grid::SpectralGrid;

/// Shape of the stream function of a bump datum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamProfile {
    /// `psi = A exp(-|x|^2 / (2 w^2))`.
    Gaussian,
    /// Velocity transform `i k_perp / |k| * A exp(-w |k|)`; the velocity
    /// transform is nonzero as `k -> 0`, like an integrable datum with nonzero moment.
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatumSpec {
    /// `v = (-d_1 psi, d_0 psi[, 0])` for a radial stream function `psi`.
    StreamBump {
        #[serde(default = "default_profile")]
        profile: StreamProfile,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
    /// Gaussian random solenoidal field on the shell `band[0] <= |m| <= band[1]`
    /// of integer wavenumbers, normalized to `||v||^2 = energy`.
    BandRandom {
        seed: u64,
        band: [f64; 2],
        #[serde(default = "default_energy")]
        energy: f64,
    },
    /// `eps^{n/2} v0(eps x)` for the Gaussian stream bump `v0`.
    Scaled {
        epsilon: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_scaled_width")]
        width: f64,
    },
}

fn default_profile() -> StreamProfile {
    StreamProfile::Poisson
}
fn default_amplitude() -> f64 {
    0.5
}
fn default_width() -> f64 {
    0.1
}
fn default_energy() -> f64 {
    1.0
}
fn default_scaled_width() -> f64 {
    1.0
}

impl DatumSpec {
    pub fn build(&self, grid: &SpectralGrid) -> Result<VectorField> {
        match *self {
            DatumSpec::StreamBump { profile, amplitude, width } => stream_bump(grid, profile, amplitude, width),
            DatumSpec::BandRandom { seed, band, energy } => band_random(grid, seed, band, energy),
            DatumSpec::Scaled { epsilon, amplitude, width } => scaled_bump(grid, amplitude, width, epsilon),
        }
    }

    /// The same datum with the seed replaced, where the datum has one.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self.clone() {
            DatumSpec::BandRandom { band, energy, .. } => DatumSpec::BandRandom { seed, band, energy },
            other => other,
        }
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::param(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

/// Stream-function bump centred at the origin.
pub fn stream_bump(grid: &SpectralGrid, profile: StreamProfile, amplitude: f64, width: f64) -> Result<VectorField> {
    check_positive("width", width)?;
    if !amplitude.is_finite() {
        return Err(Error::param("amplitude must be finite"));
    }
    match profile {
        StreamProfile::Gaussian => Ok(gaussian_stream(grid, amplitude, width, 1.0)),
        StreamProfile::Poisson => Ok(poisson_stream(grid, amplitude, width)),
    }
}

/// `eps^{n/2} v0(eps x)` for the Gaussian stream bump, evaluated pointwise.
pub fn scaled_bump(grid: &SpectralGrid, amplitude: f64, width: f64, epsilon: f64) -> Result<VectorField> {
    check_positive("width", width)?;
    check_positive("epsilon", epsilon)?;
    Ok(gaussian_stream(grid, amplitude, width, epsilon))
}

fn gaussian_stream(grid: &SpectralGrid, amplitude: f64, width: f64, epsilon: f64) -> VectorField {
    let n = grid.dim();
    let scale = epsilon.powf(n as f64 / 2.0);
    let w2 = width * width;
    VectorField::from_fn(*grid, |x| {
        let y = [epsilon * x[0], epsilon * x[1], epsilon * x[2]];
        let r2: f64 = y[..n].iter().map(|c| c * c).sum();
        let psi = amplitude * (-0.5 * r2 / w2).exp();
        // -d_1 psi and d_0 psi at y.
        [scale * y[1] / w2 * psi, -scale * y[0] / w2 * psi, 0.0]
    })
}

fn poisson_stream(grid: &SpectralGrid, amplitude: f64, width: f64) -> VectorField {
    let n = grid.dim();
    let inv_cell = 1.0 / grid.cell_volume();
    let mut comps: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; n];
    for idx in 0..grid.len() {
        if !grid.is_resolved(idx) {
            continue;
        }
        let k = grid.odd_wavevector(idx);
        let kk = grid.wavenumber_sq(idx).sqrt();
        if kk == 0.0 {
            continue;
        }
        // Phase shift from the box offset: the sample at index 0 sits at -L/2.
        let m = grid.unflatten(idx);
        let parity: i64 = m[..n].iter().map(|&j| grid.mode(j)).sum();
        let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let a = sign * amplitude * (-width * kk).exp() / kk * inv_cell;
        comps[0][idx] = Complex64::new(0.0, -k[1] * a);
        comps[1][idx] = Complex64::new(0.0, k[0] * a);
    }
    let fields = comps
        .into_iter()
        .map(|c| ScalarField::from_spectral(*grid, c).expect("length matches grid"))
        .collect();
    VectorField::new(fields).expect("components share the grid").to_physical()
}

/// Band-limited random solenoidal field with Hermitian-symmetric coefficients.
pub fn band_random(grid: &SpectralGrid, seed: u64, band: [f64; 2], energy: f64) -> Result<VectorField> {
    if !(band[0] >= 0.0 && band[1] >= band[0] && band[1] > 0.0) {
        return Err(Error::param(format!("band must satisfy 0 <= lo <= hi, hi > 0, got {band:?}")));
    }
    check_positive("energy", energy)?;
    let n = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut comps: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; n];
    for idx in 0..grid.len() {
        let m = grid.unflatten(idx);
        let r = m[..n].iter().map(|&j| (grid.mode(j) as f64).powi(2)).sum::<f64>().sqrt();
        let inside = r > 0.0 && r >= band[0] && r <= band[1];
        for c in comps.iter_mut() {
            // Draw for every mode so the stream does not depend on the band.
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if inside && grid.is_resolved(idx) && !m[..n].iter().any(|&j| grid.is_nyquist(j)) {
                c[idx] = Complex64::new(re, im);
            }
        }
    }
    for c in comps.iter_mut() {
        let raw = c.clone();
        for idx in 0..grid.len() {
            let p = grid.partner_flat(idx);
            c[idx] = 0.5 * (raw[idx] + raw[p].conj());
        }
    }
    let fields = comps
        .into_iter()
        .map(|c| ScalarField::from_spectral(*grid, c))
        .collect::<Result<Vec<_>>>()?;
    let projected = leray_project(&VectorField::new(fields)?)?.into_inner();
    let e = projected.l2_norm_sq();
    if !(e > 0.0) {
        return Err(Error::param(format!("band {band:?} contains no resolved modes on this grid")));
    }
    Ok(projected.scaled((energy / e).sqrt()).to_physical())
}

/// Largest of the energy fraction outside the dealiased modes and the
/// relative velocity magnitude on the box boundary. Small values mean the
/// datum is resolved and effectively compactly supported in the box.
pub fn resolution_defect(v: &VectorField) -> f64 {
    let grid = *v.grid();
    let spec = v.to_spectral();
    let mut total = 0.0;
    let mut outside = 0.0;
    for c in spec.components() {
        for (idx, z) in c.spectral().expect("spectral").iter().enumerate() {
            let e = z.norm_sqr();
            total += e;
            if !grid.is_resolved(idx) {
                outside += e;
            }
        }
    }
    if total == 0.0 {
        return 0.0;
    }
    let phys = v.to_physical();
    let peak = phys.max_abs();
    let n = grid.dim();
    let mut edge = 0.0f64;
    for idx in 0..grid.len() {
        let m = grid.unflatten(idx);
        if m[..n].iter().any(|&j| j == 0) {
            for c in phys.components() {
                edge = edge.max(c.physical().expect("physical")[idx].abs());
            }
        }
    }
    (outside / total).sqrt().max(edge / peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_ops::divergence_defect;

    #[test]
    fn stream_bumps_are_solenoidal() {
        let g = SpectralGrid::new(2, 64, 20.0).unwrap();
        for profile in [StreamProfile::Gaussian, StreamProfile::Poisson] {
            let v = stream_bump(&g, profile, 1.0, 1.0).unwrap();
            assert!(divergence_defect(&v).unwrap() < 1e-10, "{profile:?}");
            assert!(v.l2_norm_sq() > 0.0);
        }
    }

    #[test]
    fn poisson_bump_is_centred_and_odd() {
        // v(-x) = -v(x) for a radial stream function.
        let g = SpectralGrid::new(2, 32, 20.0).unwrap();
        let v = stream_bump(&g, StreamProfile::Poisson, 1.0, 1.0).unwrap();
        let c0 = v.component(0).physical().unwrap();
        let n = g.points_per_axis();
        for i in 1..n {
            for j in 1..n {
                let a = c0[g.flatten([i, j, 0])];
                let b = c0[g.flatten([n - i, n - j, 0])];
                assert!((a + b).abs() < 1e-10 * v.max_abs());
            }
        }
    }

    #[test]
    fn band_random_is_seeded_and_normalized() {
        let g = SpectralGrid::new(2, 32, 6.0).unwrap();
        let a = band_random(&g, 7, [1.0, 3.0], 2.0).unwrap();
        let b = band_random(&g, 7, [1.0, 3.0], 2.0).unwrap();
        let c = band_random(&g, 8, [1.0, 3.0], 2.0).unwrap();
        assert_eq!(a.component(0).physical().unwrap(), b.component(0).physical().unwrap());
        assert!(a.max_abs_diff(&c).unwrap() > 1e-3);
        assert!((a.l2_norm_sq() - 2.0).abs() < 1e-12);
        assert!(divergence_defect(&a).unwrap() < 1e-10);
    }

    #[test]
    fn empty_band_is_rejected() {
        let g = SpectralGrid::new(2, 16, 6.0).unwrap();
        assert!(band_random(&g, 1, [0.2, 0.5], 1.0).is_err());
        assert!(band_random(&g, 1, [3.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn scaling_preserves_energy() {
        let g = SpectralGrid::new(2, 160, 80.0).unwrap();
        let base = scaled_bump(&g, 1.0, 1.0, 1.0).unwrap().l2_norm_sq();
        for eps in [0.5, 0.25] {
            let e = scaled_bump(&g, 1.0, 1.0, eps).unwrap().l2_norm_sq();
            assert!((e / base - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn datum_spec_parses_from_toml() {
        let d: DatumSpec = toml::from_str("kind = \"band-random\"\nseed = 3\nband = [1.0, 3.0]").unwrap();
        assert_eq!(d, DatumSpec::BandRandom { seed: 3, band: [1.0, 3.0], energy: 1.0 });
        assert!(toml::from_str::<DatumSpec>("kind = \"stream-bump\"\nbogus = 1").is_err());
    }
}
