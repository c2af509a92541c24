//! Binary checkpoints for bit-exact restarts.
//!
//! Layout, all little-endian: `b"FCHV"`, version `u8`, `dim: u32`, `N: u32`,
//! `L, nu, beta, alpha, t: f64`, `params_hash: u64`, then the spectral
//! coefficients of each velocity component in row-major order as
//! interleaved `(re, im)` `f64` pairs.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::error::Result;
use crate::field::{ScalarField, VectorField};
use crate::field_ops::ProjectedField;
use crate::grid::SpectralGrid;
use crate::integrator::{SimState, SolverParams};

pub const MAGIC: [u8; 4] = *b"FCHV";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 + 4 + 5 * 8 + 8;

#[derive(Debug, Error, PartialEq)]
pub enum CheckpointError {
    #[error("bad magic bytes {0:?}")]
    Magic([u8; 4]),
    #[error("unsupported checkpoint version {found} (expected {VERSION})")]
    Version { found: u8 },
    #[error("checkpoint truncated: need {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("checkpoint dimensions are inconsistent: {0}")]
    Dimension(String),
}

/// FNV-1a hash of the solver parameters other than `t_end`, stored to detect
/// restarts with different settings.
pub fn params_hash(params: &SolverParams) -> u64 {
    let mut bytes = Vec::with_capacity(48);
    for x in [params.nu, params.beta, params.alpha, params.dt] {
        bytes.extend_from_slice(&x.to_bits().to_le_bytes());
    }
    bytes.extend_from_slice(&[params.dealias as u8, params.nonlinear as u8, params.allow_exploratory_beta as u8]);
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub state: SimState,
    pub nu: f64,
    pub beta: f64,
    pub alpha: f64,
    pub params_hash: u64,
}

impl Checkpoint {
    /// Whether the stored parameters match `params`.
    pub fn matches(&self, params: &SolverParams) -> bool {
        self.params_hash == params_hash(params)
    }
}

pub fn encode_checkpoint(state: &SimState, params: &SolverParams) -> Vec<u8> {
    let grid = state.grid();
    let v = state.velocity();
    let mut out = Vec::with_capacity(HEADER_LEN + grid.dim() * grid.len() * 16);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    for x in [grid.box_length(), params.nu, params.beta, params.alpha, state.t] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&params_hash(params).to_le_bytes());
    for c in v.components() {
        for z in c.spectral().expect("state is spectral") {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < 5 {
        return Err(CheckpointError::Truncated { expected: HEADER_LEN, found: bytes.len() }.into());
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("four bytes");
    if magic != MAGIC {
        return Err(CheckpointError::Magic(magic).into());
    }
    if bytes[4] != VERSION {
        return Err(CheckpointError::Version { found: bytes[4] }.into());
    }
    if bytes.len() < HEADER_LEN {
        return Err(CheckpointError::Truncated { expected: HEADER_LEN, found: bytes.len() }.into());
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("four bytes")) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("eight bytes"));
    let dim = u32_at(5);
    let n = u32_at(9);
    let length = f64_at(13);
    let (nu, beta, alpha, t) = (f64_at(21), f64_at(29), f64_at(37), f64_at(45));
    let hash = u64::from_le_bytes(bytes[53..61].try_into().expect("eight bytes"));
    let grid = SpectralGrid::new(dim, n, length)
        .map_err(|e| CheckpointError::Dimension(format!("dim = {dim}, N = {n}, L = {length}: {e}")))?;
    let expected = HEADER_LEN + dim * grid.len() * 16;
    if bytes.len() < expected {
        return Err(CheckpointError::Truncated { expected, found: bytes.len() }.into());
    }
    if bytes.len() > expected {
        return Err(CheckpointError::Dimension(format!(
            "{} trailing bytes after the coefficients of a dim = {dim}, N = {n} grid",
            bytes.len() - expected
        ))
        .into());
    }
    let mut comps = Vec::with_capacity(dim);
    let mut o = HEADER_LEN;
    for _ in 0..dim {
        let coeffs: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let b = o + 16 * i;
                Complex64::new(f64_at(b), f64_at(b + 8))
            })
            .collect();
        o += 16 * grid.len();
        comps.push(ScalarField::from_spectral(grid, coeffs)?);
    }
    let v = ProjectedField::certify(VectorField::new(comps)?)?;
    Ok(Checkpoint { state: SimState::new(t, v), nu, beta, alpha, params_hash: hash })
}

pub fn save_checkpoint(state: &SimState, params: &SolverParams, path: &Path) -> Result<()> {
    fs::write(path, encode_checkpoint(state, params))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&fs::read(path)?)
}
