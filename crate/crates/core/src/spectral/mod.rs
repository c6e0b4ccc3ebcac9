//! Periodic 3D grid, Fourier-space operators, the Riesz-potential
//! convolution `I_γ *`, and the singular weight `|x|^{-b}`.
//!
//! Conventions: angular frequencies `ξ_k = 2π k / L` with
//! `k ∈ {-n/2, …, n/2 - 1}` per axis, fields stored row-major over
//! `(x, y, z)` with `z` fastest, and rectangle-rule quadrature
//! `∫ f ≈ (L/n)³ Σ f`.

mod fft;
mod field;
mod grid;
mod riesz;
mod weight;

pub use fft::Fft3;
pub use field::Field;
pub use grid::GridSpec;
pub use riesz::{truncated_kernel_transform, RieszMode, RieszOp};
pub use weight::WeightCache;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid mismatch: expected {expected}, found {found}")]
    GridMismatch { expected: GridSpec, found: GridSpec },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
}

pub(crate) fn ensure_same_grid(expected: &GridSpec, found: &GridSpec) -> Result<(), SpectralError> {
    if expected == found {
        Ok(())
    } else {
        Err(SpectralError::GridMismatch {
            expected: *expected,
            found: *found,
        })
    }
}

/// Transform plans plus frequency tables for one grid.
///
/// Holds mutable scratch, so concurrent use requires one instance per
/// thread; all operators taking `&mut SpectralOps` are pure in their field
/// arguments.
pub struct SpectralOps {
    grid: GridSpec,
    fft: Fft3,
    /// `|ξ|²` per node, in FFT layout.
    ksq: Vec<f64>,
}

impl SpectralOps {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.n();
        let freqs = grid.frequencies();
        let mut ksq = vec![0.0; grid.len()];
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    ksq[grid.idx(ix, iy, iz)] =
                        freqs[ix] * freqs[ix] + freqs[iy] * freqs[iy] + freqs[iz] * freqs[iz];
                }
            }
        }
        SpectralOps {
            grid: *grid,
            fft: Fft3::new(n),
            ksq,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn ksq(&self) -> &[f64] {
        &self.ksq
    }

    pub fn fft_forward(&mut self, data: &mut [Complex64]) {
        self.fft.forward(data);
    }

    pub fn fft_inverse(&mut self, data: &mut [Complex64]) {
        self.fft.inverse(data);
    }

    /// Unnormalized forward transform of a field, as a fresh buffer.
    pub fn forward_copy(&mut self, f: &Field) -> Vec<Complex64> {
        let mut hat = f.values().to_vec();
        self.fft.forward(&mut hat);
        hat
    }

    /// Spectral partial derivatives `(∂_x f, ∂_y f, ∂_z f)`.
    pub fn gradient(&mut self, f: &Field) -> Result<[Field; 3], SpectralError> {
        ensure_same_grid(&self.grid, f.grid())?;
        let n = self.grid.n();
        let freqs = self.grid.frequencies();
        let hat = self.forward_copy(f);
        let mut out = [
            vec![Complex64::default(); hat.len()],
            vec![Complex64::default(); hat.len()],
            vec![Complex64::default(); hat.len()],
        ];
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let idx = self.grid.idx(ix, iy, iz);
                    let v = hat[idx];
                    out[0][idx] = Complex64::new(0.0, freqs[ix]) * v;
                    out[1][idx] = Complex64::new(0.0, freqs[iy]) * v;
                    out[2][idx] = Complex64::new(0.0, freqs[iz]) * v;
                }
            }
        }
        let mut fields = Vec::with_capacity(3);
        for mut buf in out {
            self.fft.inverse(&mut buf);
            fields.push(Field::from_values(self.grid, buf));
        }
        let [a, b, c]: [Field; 3] = fields.try_into().ok().unwrap();
        Ok([a, b, c])
    }

    /// `||∇f||²_{L²}` evaluated on the Fourier side (Parseval).
    pub fn grad_norm_sq(&mut self, f: &Field) -> Result<f64, SpectralError> {
        ensure_same_grid(&self.grid, f.grid())?;
        let hat = self.forward_copy(f);
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        Ok(scale
            * hat
                .iter()
                .zip(self.ksq.iter())
                .map(|(v, k)| k * v.norm_sqr())
                .sum::<f64>())
    }
}
