//! Multi-dimensional complex FFTs over row-major arrays.
//!
//! Plans are cached per length and direction. Each axis is transformed line by
//! line; lines are independent, so they are distributed over the rayon pool
//! while every reduction elsewhere stays serial. The result is therefore the
//! same bit pattern regardless of the thread count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Transform contiguous lines of length `n` in place.
fn transform_rows(data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>, n: usize) {
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, line| fft.process_with_scratch(line, scratch),
    );
}

/// Unnormalized forward transform (`inverse = false`) or inverse transform
/// including the `1/N^dim` factor (`inverse = true`).
pub(crate) fn fft_nd(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, inverse);
    let total = data.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); 0];
    for axis in 0..dim {
        let inner = n.pow((dim - 1 - axis) as u32);
        if inner == 1 {
            transform_rows(data, &fft, n);
            continue;
        }
        let block = n * inner;
        if buf.len() != block {
            buf = vec![Complex64::new(0.0, 0.0); block];
        }
        for chunk in data.chunks_mut(block) {
            // chunk is an n x inner matrix; bring the transformed axis innermost.
            transpose(chunk, &mut buf, n, inner);
            transform_rows(&mut buf, &fft, n);
            transpose(&buf, chunk, inner, n);
        }
    }
    if inverse {
        let scale = 1.0 / total as f64;
        data.par_iter_mut().for_each(|c| *c *= scale);
    }
}

/// Write the transpose of the `rows x cols` matrix `src` into `dst`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const TILE: usize = 16;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2d(input: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        let w = -2.0 * std::f64::consts::PI / n as f64;
        for k0 in 0..n {
            for k1 in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j0 in 0..n {
                    for j1 in 0..n {
                        let phase = w * ((k0 * j0 + k1 * j1) % n) as f64;
                        acc += input[j0 * n + j1] * Complex64::from_polar(1.0, phase);
                    }
                }
                out[k0 * n + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_direct_dft() {
        let n = 8;
        let input: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = input.clone();
        fft_nd(&mut fast, 2, n, false);
        let slow = naive_dft_2d(&input, n);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_3d() {
        let n = 8;
        let input: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.713).sin(), 0.0))
            .collect();
        let mut data = input.clone();
        fft_nd(&mut data, 3, n, false);
        fft_nd(&mut data, 3, n, true);
        for (a, b) in data.iter().zip(&input) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn transpose_is_involution() {
        let src: Vec<Complex64> = (0..6 * 35).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let mut t = vec![Complex64::new(0.0, 0.0); src.len()];
        let mut back = t.clone();
        transpose(&src, &mut t, 6, 35);
        transpose(&t, &mut back, 35, 6);
        assert_eq!(src, back);
    }
}
