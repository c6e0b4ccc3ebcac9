//! Cached samples of the singular weight `w_b(x) = (|x|² + ε²)^{-b/2}`.

use super::{ensure_same_grid, Field, GridSpec, SpectralError};

/// Samples of the inhomogeneous weight on a grid.
///
/// With `eps_reg = 0` this is exactly `|x|^{-b}`, which requires the
/// half-cell offset grid so no node sits at the origin. In the default
/// constructor the few cells around the origin carry the cell average of
/// `|x|^{-b}` instead of the point value: the node value badly represents
/// the integral a singular cell contributes to quadratures and transforms,
/// and the cell average restores second-order consistency there
/// (product-integration rule). Samples away from the origin are exact
/// point values.
#[derive(Debug, Clone)]
pub struct WeightCache {
    grid: GridSpec,
    b: f64,
    eps_reg: f64,
    samples: Vec<f64>,
}

impl WeightCache {
    /// Weight with the singularity-corrected (cell-averaged) cells near the
    /// origin. This is the constructor every operator uses.
    pub fn new(grid: &GridSpec, b: f64, eps_reg: f64) -> Result<Self, SpectralError> {
        let mut cache = Self::point_sampled(grid, b, eps_reg)?;
        if eps_reg > 0.0 || b == 0.0 {
            return Ok(cache);
        }
        let n = grid.n();
        let h = grid.spacing();
        let near = 8.0 * h;
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let [x, y, z] = grid.node(ix, iy, iz);
                    if (x * x + y * y + z * z).sqrt() < near {
                        let lo = [x - 0.5 * h, y - 0.5 * h, z - 0.5 * h];
                        let hi = [x + 0.5 * h, y + 0.5 * h, z + 0.5 * h];
                        cache.samples[grid.idx(ix, iy, iz)] =
                            cell_average(lo, hi, b, 0) / grid.cell_volume();
                    }
                }
            }
        }
        Ok(cache)
    }

    /// Literal point samples `(|x_j|² + ε²)^{-b/2}` (no cell correction).
    pub fn point_sampled(grid: &GridSpec, b: f64, eps_reg: f64) -> Result<Self, SpectralError> {
        if !(b.is_finite() && b >= 0.0) {
            return Err(SpectralError::InvalidWeight(format!("b = {b} must be >= 0")));
        }
        if !(eps_reg.is_finite() && eps_reg >= 0.0) {
            return Err(SpectralError::InvalidWeight(format!(
                "eps_reg = {eps_reg} must be >= 0"
            )));
        }
        if eps_reg == 0.0 && !grid.offset() && b > 0.0 {
            return Err(SpectralError::InvalidWeight(
                "eps_reg = 0 requires the half-cell offset grid (node at the origin)".to_string(),
            ));
        }
        let n = grid.n();
        let eps2 = eps_reg * eps_reg;
        let mut samples = Vec::with_capacity(grid.len());
        for ix in 0..n {
            let x = grid.coord(ix);
            for iy in 0..n {
                let y = grid.coord(iy);
                for iz in 0..n {
                    let z = grid.coord(iz);
                    let r2 = x * x + y * y + z * z + eps2;
                    samples.push(r2.powf(-0.5 * b));
                }
            }
        }
        debug_assert!(samples.iter().all(|w| w.is_finite() && *w > 0.0));
        Ok(WeightCache {
            grid: *grid,
            b,
            eps_reg,
            samples,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn eps_reg(&self) -> f64 {
        self.eps_reg
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn max_weight(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }

    /// Pointwise product `w_b(x) · f(x)`.
    pub fn apply(&self, f: &Field) -> Result<Field, SpectralError> {
        ensure_same_grid(&self.grid, f.grid())?;
        let values = f
            .values()
            .iter()
            .zip(self.samples.iter())
            .map(|(v, w)| v * w)
            .collect();
        Ok(Field::from_values(self.grid, values))
    }
}

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_26,
    0.339_981_043_584_856_26,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_85,
    0.652_145_154_862_546_2,
    0.652_145_154_862_546_2,
    0.347_854_845_137_453_85,
];

/// `∫_cell |x|^{-b} dx` by octant refinement toward the origin; cells not
/// touching the singularity are handled by a tensor Gauss rule.
fn cell_average(lo: [f64; 3], hi: [f64; 3], b: f64, depth: usize) -> f64 {
    let diag = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt();
    let corner_dist = {
        let mut d2 = 0.0;
        for k in 0..3 {
            let c = if lo[k] > 0.0 {
                lo[k]
            } else if hi[k] < 0.0 {
                hi[k]
            } else {
                0.0
            };
            d2 += c * c;
        }
        d2.sqrt()
    };
    if depth >= 9 || corner_dist > 0.75 * diag {
        // singularity safely outside (or cell negligibly small): Gauss 4³
        let mut acc = 0.0;
        for (i, &xi) in GL4_NODES.iter().enumerate() {
            let x = 0.5 * (lo[0] + hi[0]) + 0.5 * (hi[0] - lo[0]) * xi;
            for (j, &yj) in GL4_NODES.iter().enumerate() {
                let y = 0.5 * (lo[1] + hi[1]) + 0.5 * (hi[1] - lo[1]) * yj;
                for (k, &zk) in GL4_NODES.iter().enumerate() {
                    let z = 0.5 * (lo[2] + hi[2]) + 0.5 * (hi[2] - lo[2]) * zk;
                    let r2 = x * x + y * y + z * z;
                    acc += GL4_WEIGHTS[i]
                        * GL4_WEIGHTS[j]
                        * GL4_WEIGHTS[k]
                        * r2.powf(-0.5 * b);
                }
            }
        }
        return acc * (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]) / 8.0;
    }
    let mid = [
        0.5 * (lo[0] + hi[0]),
        0.5 * (lo[1] + hi[1]),
        0.5 * (lo[2] + hi[2]),
    ];
    let mut acc = 0.0;
    for ox in 0..2 {
        for oy in 0..2 {
            for oz in 0..2 {
                let sub_lo = [
                    if ox == 0 { lo[0] } else { mid[0] },
                    if oy == 0 { lo[1] } else { mid[1] },
                    if oz == 0 { lo[2] } else { mid[2] },
                ];
                let sub_hi = [
                    if ox == 0 { mid[0] } else { hi[0] },
                    if oy == 0 { mid[1] } else { hi[1] },
                    if oz == 0 { mid[2] } else { hi[2] },
                ];
                acc += cell_average(sub_lo, sub_hi, b, depth + 1);
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    #[test]
    fn b_zero_is_identity() {
        let grid = GridSpec::new(8, 4.0, true).unwrap();
        let w = WeightCache::new(&grid, 0.0, 0.0).unwrap();
        let f = Field::gaussian(&grid, 2.0, 1.0);
        let out = w.apply(&f).unwrap();
        assert!(out.sub_norm(&f) == 0.0);
    }

    #[test]
    fn pointwise_inverse_radius() {
        let grid = GridSpec::new(8, 4.0, true).unwrap();
        let w = WeightCache::point_sampled(&grid, 1.0, 0.0).unwrap();
        let f = Field::from_fn(&grid, |_, _, _| Complex64::new(1.0, 0.0));
        let out = w.apply(&f).unwrap();
        for ix in 0..8 {
            for iy in 0..8 {
                for iz in 0..8 {
                    let [x, y, z] = grid.node(ix, iy, iz);
                    let r = (x * x + y * y + z * z).sqrt();
                    let got = out.values()[grid.idx(ix, iy, iz)].re;
                    assert!((got - 1.0 / r).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn default_sampling_is_pointwise_away_from_origin() {
        let grid = GridSpec::new(16, 16.0, true).unwrap();
        let near = 8.0 * grid.spacing();
        let avg = WeightCache::new(&grid, 0.5, 0.0).unwrap();
        let point = WeightCache::point_sampled(&grid, 0.5, 0.0).unwrap();
        for ix in 0..16 {
            for iy in 0..16 {
                for iz in 0..16 {
                    let [x, y, z] = grid.node(ix, iy, iz);
                    let idx = grid.idx(ix, iy, iz);
                    let r = (x * x + y * y + z * z).sqrt();
                    if r >= near {
                        assert_eq!(avg.samples()[idx], point.samples()[idx]);
                    }
                }
            }
        }
        // the origin-corner cells are inflated by the singularity
        let c = grid.n() / 2;
        let corner = grid.idx(c, c, c);
        assert!(avg.samples()[corner] > point.samples()[corner]);
    }

    #[test]
    fn cell_average_refinement_is_consistent() {
        // b = 0 integrates the volume exactly
        let v = cell_average([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], 0.0, 0);
        assert!((v - 1.0).abs() < 1e-12);
        // octant additivity around the singular corner
        let whole = cell_average([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], 0.7, 0);
        let mut parts = 0.0;
        for ox in 0..2 {
            for oy in 0..2 {
                for oz in 0..2 {
                    let lo = [0.5 * ox as f64, 0.5 * oy as f64, 0.5 * oz as f64];
                    let hi = [lo[0] + 0.5, lo[1] + 0.5, lo[2] + 0.5];
                    parts += cell_average(lo, hi, 0.7, 0);
                }
            }
        }
        assert!((whole - parts).abs() < 1e-9 * whole);
    }

    #[test]
    fn operator_norm_bound() {
        let grid = GridSpec::new(16, 6.0, true).unwrap();
        let w = WeightCache::new(&grid, 0.7, 0.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f = Field::from_values(
            grid,
            (0..grid.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        );
        let out = w.apply(&f).unwrap();
        assert!(out.l2_norm() <= w.max_weight() * f.l2_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn offset_bound_on_max_weight() {
        // no point sample may exceed (sqrt(3) L / (2n))^{-b} on the offset
        // grid; the cell-corrected samples stay finite as well
        let grid = GridSpec::new(16, 8.0, true).unwrap();
        let b = 0.5;
        let w = WeightCache::point_sampled(&grid, b, 0.0).unwrap();
        let bound = grid.min_radius().powf(-b);
        assert!(w.max_weight() <= bound * (1.0 + 1e-13));
        let avg = WeightCache::new(&grid, b, 0.0).unwrap();
        assert!(avg.max_weight().is_finite());
    }

    #[test]
    fn unregularized_weight_needs_offset() {
        let grid = GridSpec::new(8, 4.0, false).unwrap();
        assert!(WeightCache::new(&grid, 0.5, 0.0).is_err());
        assert!(WeightCache::new(&grid, 0.5, 1e-3).is_ok());
    }
}
