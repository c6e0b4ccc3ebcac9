//! The radial virial-Morawetz weight `a(x)` and smooth ball cutoffs.

use super::DiagnosticsError;
use crate::spectral::{ensure_same_grid, Field, GridSpec, SpectralError};

/// Radial profile values of the weight and its first four derivatives.
#[derive(Debug, Clone, Copy)]
pub struct RadialWeight {
    pub a: f64,
    pub da: f64,
    pub d2a: f64,
    pub d3a: f64,
    pub d4a: f64,
}

/// The weight is `|x|²` inside `|x| <= R` and `3R|x| + const` outside
/// `|x| > 2R`; on the transition shell `a'` is the cubic Hermite interpolant
/// with `a'(R) = 2R`, `a'(2R) = 3R`, `a''(R) = 2`, `a''(2R) = 0`:
///
/// ```text
/// a'(r) = R (2 + 2t - t²),  t = (r - R)/R,
/// ```
///
/// which is monotone with `a'' = 2(1-t) >= 0`. Only derivatives of `a` enter
/// any functional, so the additive constant of the outer branch is fixed by
/// continuity.
pub fn virial_profile(r: f64, radius: f64) -> RadialWeight {
    let big_r = radius;
    if r <= big_r {
        RadialWeight {
            a: r * r,
            da: 2.0 * r,
            d2a: 2.0,
            d3a: 0.0,
            d4a: 0.0,
        }
    } else if r <= 2.0 * big_r {
        let t = (r - big_r) / big_r;
        RadialWeight {
            a: big_r * big_r * (1.0 + 2.0 * t + t * t - t * t * t / 3.0),
            da: big_r * (2.0 + 2.0 * t - t * t),
            d2a: 2.0 * (1.0 - t),
            d3a: -2.0 / big_r,
            d4a: 0.0,
        }
    } else {
        // continuity at 2R: blend value is (11/3) R², outer slope is 3R
        RadialWeight {
            a: 3.0 * big_r * r - 7.0 / 3.0 * big_r * big_r,
            da: 3.0 * big_r,
            d2a: 0.0,
            d3a: 0.0,
            d4a: 0.0,
        }
    }
}

/// Grid samples of the virial weight, its gradient, Laplacian, bi-Laplacian,
/// and Hessian.
pub struct VirialWeight {
    grid: GridSpec,
    radius: f64,
    a: Vec<f64>,
    grad: Vec<[f64; 3]>,
    laplacian: Vec<f64>,
    bilaplacian: Vec<f64>,
    /// Hessian components ordered `xx, yy, zz, xy, xz, yz`.
    hessian: Vec<[f64; 6]>,
}

impl VirialWeight {
    pub fn new(grid: &GridSpec, radius: f64) -> Result<Self, DiagnosticsError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(DiagnosticsError::InvalidWeight(format!(
                "radius = {radius} must be positive"
            )));
        }
        let n = grid.n();
        let len = grid.len();
        let mut a = Vec::with_capacity(len);
        let mut grad = Vec::with_capacity(len);
        let mut laplacian = Vec::with_capacity(len);
        let mut bilaplacian = Vec::with_capacity(len);
        let mut hessian = Vec::with_capacity(len);
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let [x, y, z] = grid.node(ix, iy, iz);
                    let r = (x * x + y * y + z * z).sqrt();
                    let p = virial_profile(r, radius);
                    if r < 1e-12 {
                        a.push(0.0);
                        grad.push([0.0; 3]);
                        laplacian.push(6.0);
                        bilaplacian.push(0.0);
                        hessian.push([2.0, 2.0, 2.0, 0.0, 0.0, 0.0]);
                        continue;
                    }
                    // transition-shell monotonicity (holds analytically)
                    if r > radius && r <= 2.0 * radius {
                        assert!(p.da >= -1e-12 && p.d2a >= -1e-12);
                    }
                    a.push(p.a);
                    let s = p.da / r;
                    grad.push([s * x, s * y, s * z]);
                    laplacian.push(p.d2a + 2.0 * s);
                    bilaplacian.push(p.d4a + 4.0 * p.d3a / r);
                    let c = (p.d2a - s) / (r * r);
                    hessian.push([
                        c * x * x + s,
                        c * y * y + s,
                        c * z * z + s,
                        c * x * y,
                        c * x * z,
                        c * y * z,
                    ]);
                }
            }
        }
        Ok(VirialWeight {
            grid: *grid,
            radius,
            a,
            grad,
            laplacian,
            bilaplacian,
            hessian,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn grad(&self) -> &[[f64; 3]] {
        &self.grad
    }

    pub fn laplacian(&self) -> &[f64] {
        &self.laplacian
    }

    pub fn bilaplacian(&self) -> &[f64] {
        &self.bilaplacian
    }

    pub fn hessian(&self) -> &[[f64; 6]] {
        &self.hessian
    }

    /// `sup |∇a| = 3R` (attained outside `2R`).
    pub fn grad_sup(&self) -> f64 {
        3.0 * self.radius
    }
}

/// Smooth cutoff `χ_R`: 1 on `|x| < R/2`, 0 on `|x| > R`, built from the
/// standard bump-function partition.
pub struct Cutoff {
    grid: GridSpec,
    radius: f64,
    samples: Vec<f64>,
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// The profile `χ(s)`: 1 for `s <= 1/2`, 0 for `s >= 1`, smooth monotone
/// in between.
pub fn cutoff_profile(s: f64) -> f64 {
    if s <= 0.5 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let up = bump(2.0 - 2.0 * s);
        let down = bump(2.0 * s - 1.0);
        up / (up + down)
    }
}

impl Cutoff {
    pub fn new(grid: &GridSpec, radius: f64) -> Result<Self, DiagnosticsError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(DiagnosticsError::InvalidWeight(format!(
                "cutoff radius = {radius} must be positive"
            )));
        }
        let n = grid.n();
        let mut samples = Vec::with_capacity(grid.len());
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let [x, y, z] = grid.node(ix, iy, iz);
                    let r = (x * x + y * y + z * z).sqrt();
                    samples.push(cutoff_profile(r / radius));
                }
            }
        }
        Ok(Cutoff {
            grid: *grid,
            radius,
            samples,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Pointwise product `χ_R(x) u(x)`.
    pub fn apply(&self, u: &Field) -> Result<Field, SpectralError> {
        ensure_same_grid(&self.grid, u.grid())?;
        let values = u
            .values()
            .iter()
            .zip(self.samples.iter())
            .map(|(v, c)| v * c)
            .collect();
        Ok(Field::from_values(self.grid, values))
    }
}
