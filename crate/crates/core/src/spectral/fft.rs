//! Multi-dimensional complex FFT built from one-dimensional `rustfft` plans.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::Grid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// In-place unnormalized transform of one scalar component laid out
/// row-major on `grid`.
pub(crate) fn transform(grid: &Grid, data: &mut [Complex64], direction: FftDirection) {
    let n = grid.n();
    debug_assert_eq!(data.len(), grid.len());
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // Last axis is contiguous.
    for line in data.chunks_exact_mut(n) {
        fft.process_with_scratch(line, &mut scratch);
    }

    let mut line = vec![Complex64::default(); n];
    for axis in 0..grid.dim() - 1 {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, value) in line.iter().enumerate() {
                    data[start + j * stride] = *value;
                }
            }
        }
    }
}

/// Spectral coefficients to physical values: `v(x) = Σ_k v̂_k e^{ik·x}`.
pub(crate) fn inverse(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, FftDirection::Inverse);
}

/// Physical values to spectral coefficients, normalized by `1/n^d`.
pub(crate) fn forward(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, FftDirection::Forward);
    let scale = 1.0 / grid.len() as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_synthesis_matches_direct_sum() {
        let grid = Grid::periodic(2, 8).unwrap();
        let mut data = vec![Complex64::default(); grid.len()];
        let k = [1i64, -2, 0];
        data[grid.flat_index(k)] = Complex64::new(0.5, 0.25);
        inverse(&grid, &mut data);
        for (flat, value) in data.iter().enumerate() {
            let x = grid.point(flat);
            let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1];
            let expect = Complex64::new(0.5, 0.25) * Complex64::from_polar(1.0, phase);
            assert!((value - expect).norm() < 1e-12);
        }
        forward(&grid, &mut data);
        assert!((data[grid.flat_index(k)] - Complex64::new(0.5, 0.25)).norm() < 1e-12);
    }
}
