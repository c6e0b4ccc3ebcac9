//! In-place 3D FFT built from 1D `rustfft` plans.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Forward/inverse 3D transforms for cubic `n³` data.
///
/// The forward transform is unnormalized; the inverse divides by `n³`
/// (exact in binary, since `n` is a power of two).
pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Fft3 {
            n,
            fwd,
            inv,
            scratch: vec![Complex64::default(); scratch_len],
            line: vec![Complex64::default(); n],
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform(data, false);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&mut self, data: &mut [Complex64], forward: bool) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "buffer does not match plan size");
        let plan = if forward { &self.fwd } else { &self.inv };

        // z axis: contiguous lines
        for line in data.chunks_exact_mut(n) {
            plan.process_with_scratch(line, &mut self.scratch);
        }
        // y axis: stride n
        for ix in 0..n {
            for iz in 0..n {
                let base = ix * n * n + iz;
                for iy in 0..n {
                    self.line[iy] = data[base + iy * n];
                }
                plan.process_with_scratch(&mut self.line, &mut self.scratch);
                for iy in 0..n {
                    data[base + iy * n] = self.line[iy];
                }
            }
        }
        // x axis: stride n²
        for iy in 0..n {
            for iz in 0..n {
                let base = iy * n + iz;
                for ix in 0..n {
                    self.line[ix] = data[base + ix * n * n];
                }
                plan.process_with_scratch(&mut self.line, &mut self.scratch);
                for ix in 0..n {
                    data[base + ix * n * n] = self.line[ix];
                }
            }
        }
    }
}
