//! Complex scalar field sampled on a [`GridSpec`].

use super::{ensure_same_grid, GridSpec, SpectralError};
use num_complex::Complex64;

/// A complex field `u(x)` sampled at the grid nodes, row-major over
/// `(x, y, z)`.
#[derive(Debug, Clone)]
pub struct Field {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: &GridSpec) -> Self {
        Field {
            grid: *grid,
            values: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count does not match grid");
        Field { grid, values }
    }

    /// Sample an analytic profile at the nodes.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64, f64) -> Complex64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for ix in 0..n {
            let x = grid.coord(ix);
            for iy in 0..n {
                let y = grid.coord(iy);
                for iz in 0..n {
                    values.push(f(x, y, grid.coord(iz)));
                }
            }
        }
        Field { grid: *grid, values }
    }

    /// Real Gaussian profile `amp · exp(-|x|² / width²)`.
    pub fn gaussian(grid: &GridSpec, amp: f64, width: f64) -> Self {
        let w2 = width * width;
        Field::from_fn(grid, |x, y, z| {
            Complex64::new(amp * (-(x * x + y * y + z * z) / w2).exp(), 0.0)
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `||u||²_{L²} = h³ Σ |u_j|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: f64) -> Field {
        let mut out = self.clone();
        out.scale(Complex64::new(c, 0.0));
        out
    }

    /// `||u - v||_{L²}`; panics on mismatched grids.
    pub fn sub_norm(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch in sub_norm");
        let s: f64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (self.grid.cell_volume() * s).sqrt()
    }

    /// `h³ Σ conj(u)·v` (discrete `⟨u, v⟩`).
    pub fn inner(&self, other: &Field) -> Result<Complex64, SpectralError> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    /// Fraction of the total mass carried by the outermost node shell;
    /// used to warn when the box is too small for a localized field.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let n = self.grid.n();
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0;
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    if ix == 0 || ix == n - 1 || iy == 0 || iy == n - 1 || iz == 0 || iz == n - 1 {
                        edge += self.values[self.grid.idx(ix, iy, iz)].norm_sqr();
                    }
                }
            }
        }
        edge / total
    }
}
