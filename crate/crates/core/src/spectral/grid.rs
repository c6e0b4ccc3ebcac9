//! Periodic cubic grid specification.

use super::SpectralError;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;

/// A periodic box `[-L/2, L/2)³` sampled with `n` points per axis.
///
/// With the half-cell `offset` the nodes are `x_j = -L/2 + (j + 1/2) L/n`,
/// so no node sits at the origin and singular radial weights stay finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    n: usize,
    length: f64,
    offset: bool,
}

impl GridSpec {
    pub fn new(n: usize, length: f64, offset: bool) -> Result<Self, SpectralError> {
        if n < 8 {
            return Err(SpectralError::InvalidGrid(format!("n = {n} below minimum 8")));
        }
        if !n.is_power_of_two() {
            return Err(SpectralError::InvalidGrid(format!("n = {n} not a power of two")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::InvalidGrid(format!("L = {length} not positive")));
        }
        Ok(GridSpec { n, length, offset })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn offset(&self) -> bool {
        self.offset
    }

    /// Total number of nodes `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `h = L/n`.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Quadrature weight per node, `h³`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Physical coordinate of index `j` along one axis.
    pub fn coord(&self, j: usize) -> f64 {
        let shift = if self.offset { 0.5 } else { 0.0 };
        -0.5 * self.length + (j as f64 + shift) * self.spacing()
    }

    /// All node coordinates along one axis.
    pub fn axis(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.coord(j)).collect()
    }

    /// Angular frequency of FFT bin `k` along one axis (`2π k̃ / L` with
    /// `k̃ ∈ [-n/2, n/2)`).
    pub fn frequency(&self, k: usize) -> f64 {
        let signed = if k < self.n / 2 {
            k as isize
        } else {
            k as isize - self.n as isize
        };
        2.0 * PI * signed as f64 / self.length
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.frequency(k)).collect()
    }

    /// Row-major index of node `(ix, iy, iz)` (z fastest).
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    /// Node position as `[x, y, z]`.
    pub fn node(&self, ix: usize, iy: usize, iz: usize) -> [f64; 3] {
        [self.coord(ix), self.coord(iy), self.coord(iz)]
    }

    /// Smallest node radius; positive on offset grids.
    pub fn min_radius(&self) -> f64 {
        if self.offset {
            0.5 * self.spacing() * 3f64.sqrt()
        } else {
            0.0
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} L={} offset={}",
            self.n, self.length, self.offset
        )
    }
}
