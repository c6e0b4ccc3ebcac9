//! Scalar functionals of a field: mass, kinetic and potential energies, the
//! nonlocal interaction functional `P`, Kato norms, and the sharp-inequality
//! quotient.

use crate::params::ProblemParams;
use crate::special::gauss_panels;
use crate::spectral::{
    ensure_same_grid, Field, GridSpec, RieszOp, SpectralError, SpectralOps, WeightCache,
};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("functional undefined on the zero field")]
    ZeroField,
}

/// External potential samples plus the radial pull `x·∇V` used by the
/// repulsivity hypothesis and the Morawetz identity.
#[derive(Debug, Clone)]
pub struct Potential {
    grid: GridSpec,
    values: Vec<f64>,
    /// Samples of `x·∇V`, analytic for builtins, spectral otherwise.
    radial_pull: Vec<f64>,
    pub nonneg: bool,
    pub repulsive: bool,
}

impl Potential {
    pub fn zero(grid: &GridSpec) -> Self {
        Potential {
            grid: *grid,
            values: vec![0.0; grid.len()],
            radial_pull: vec![0.0; grid.len()],
            nonneg: true,
            repulsive: true,
        }
    }

    /// `V(x) = c·exp(-|x|²)` with the closed-form pull
    /// `x·∇V = -2c|x|² exp(-|x|²)`.
    pub fn gaussian(grid: &GridSpec, amplitude: f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        let mut pull = Vec::with_capacity(grid.len());
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let [x, y, z] = grid.node(ix, iy, iz);
                    let r2 = x * x + y * y + z * z;
                    let e = (-r2).exp();
                    values.push(amplitude * e);
                    pull.push(-2.0 * amplitude * r2 * e);
                }
            }
        }
        Potential {
            grid: *grid,
            values,
            radial_pull: pull,
            nonneg: amplitude >= 0.0,
            repulsive: amplitude >= 0.0,
        }
    }

    /// Build from raw samples; `x·∇V` falls back to spectral differentiation.
    pub fn from_samples(
        grid: &GridSpec,
        values: Vec<f64>,
        ops: &mut SpectralOps,
    ) -> Result<Self, SpectralError> {
        assert_eq!(values.len(), grid.len());
        let field = Field::from_values(
            *grid,
            values.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
        );
        let grad = ops.gradient(&field)?;
        let n = grid.n();
        let mut pull = vec![0.0; grid.len()];
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let idx = grid.idx(ix, iy, iz);
                    let [x, y, z] = grid.node(ix, iy, iz);
                    pull[idx] = x * grad[0].values()[idx].re
                        + y * grad[1].values()[idx].re
                        + z * grad[2].values()[idx].re;
                }
            }
        }
        let tol = 1e-9 * values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let nonneg = values.iter().all(|v| *v >= -tol);
        let repulsive = pull.iter().all(|v| *v <= tol);
        Ok(Potential {
            grid: *grid,
            values,
            radial_pull: pull,
            nonneg,
            repulsive,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn radial_pull(&self) -> &[f64] {
        &self.radial_pull
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

/// All scalar functionals of one field at one time.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct FunctionalRecord {
    /// `M(u) = ∫ |u|²`
    pub mass: f64,
    /// `∫ |∇u|²`
    pub kinetic: f64,
    /// `∫ V |u|²`
    pub potential_energy: f64,
    /// `P(u) = ∫ (I_γ * w_b|u|^p) w_b|u|^p`
    pub interaction: f64,
    /// `E(u) = (kinetic + potential)/2 - P/(2p)` (the conserved energy)
    pub energy: f64,
    /// `E₀(u) = kinetic/2 - P/(2p)`
    pub energy0: f64,
    /// `||Λu|| = sqrt(kinetic + potential)` (clamped at 0)
    pub lambda_norm: f64,
}

impl FunctionalRecord {
    pub fn zero() -> Self {
        FunctionalRecord {
            mass: 0.0,
            kinetic: 0.0,
            potential_energy: 0.0,
            interaction: 0.0,
            energy: 0.0,
            energy0: 0.0,
            lambda_norm: 0.0,
        }
    }

    pub(crate) fn assemble(
        params: &ProblemParams,
        mass: f64,
        kinetic: f64,
        potential_energy: f64,
        interaction: f64,
    ) -> Self {
        FunctionalRecord {
            mass,
            kinetic,
            potential_energy,
            interaction,
            energy: 0.5 * (kinetic + potential_energy) - interaction / (2.0 * params.p),
            energy0: 0.5 * kinetic - interaction / (2.0 * params.p),
            lambda_norm: (kinetic + potential_energy).max(0.0).sqrt(),
        }
    }
}

/// `w_b|u|^p` as a real field (stored in the real part).
pub fn weighted_density(
    params: &ProblemParams,
    u: &Field,
    w: &WeightCache,
) -> Result<Field, SpectralError> {
    ensure_same_grid(w.grid(), u.grid())?;
    let values = u
        .values()
        .iter()
        .zip(w.samples().iter())
        .map(|(v, wgt)| Complex64::new(wgt * v.norm().powf(params.p), 0.0))
        .collect();
    Ok(Field::from_values(*u.grid(), values))
}

/// Evaluator for everything built from the convolution `I_γ * (w_b|u|^p)`.
///
/// Plain collocation of the weighted density is only `O(h²)` accurate: the
/// `|x|^{-b}` cusp at the origin aliases through the transform. This
/// operator subtracts the cusp before transforming,
///
/// ```text
/// w|u|^p = g₀ · w e^{-|x|²}  +  w (|u|^p - g₀ e^{-|x|²}),   g₀ ≈ |u(0)|^p,
/// ```
///
/// feeds the first piece through the analytically known transform of
/// `|x|^{-b} e^{-|x|²}`, and transforms only the residual, whose cusp is a
/// mild `O(|x|^{2-b})`. Every consumer of the convolution (functionals,
/// ground state, time stepping, Morawetz terms) goes through this object so
/// the whole artifact sees one consistent discretization.
pub struct InteractionOp {
    params: ProblemParams,
    grid: GridSpec,
    weight: WeightCache,
    riesz: RieszOp,
    /// DFT-space coefficients of `w_b(x) e^{-|x|²}` on this grid.
    wphi_dft: Vec<Complex64>,
    /// Samples of `e^{-|x|²}`.
    phi: Vec<f64>,
}

impl InteractionOp {
    pub fn new(grid: &GridSpec, params: &ProblemParams) -> Result<Self, SpectralError> {
        let weight = WeightCache::new(grid, params.b, 0.0)?;
        Self::with_weight(grid, params, weight)
    }

    pub fn with_weight(
        grid: &GridSpec,
        params: &ProblemParams,
        weight: WeightCache,
    ) -> Result<Self, SpectralError> {
        ensure_same_grid(grid, weight.grid())?;
        let riesz = RieszOp::for_params(grid, params);
        let phi = {
            let n = grid.n();
            let mut phi = Vec::with_capacity(grid.len());
            for ix in 0..n {
                for iy in 0..n {
                    for iz in 0..n {
                        let [x, y, z] = grid.node(ix, iy, iz);
                        phi.push((-(x * x + y * y + z * z)).exp());
                    }
                }
            }
            phi
        };
        let wphi_dft = weighted_gaussian_dft(grid, weight.b());
        Ok(InteractionOp {
            params: *params,
            grid: *grid,
            weight,
            riesz,
            wphi_dft,
            phi,
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn weight(&self) -> &WeightCache {
        &self.weight
    }

    pub fn riesz(&self) -> &RieszOp {
        &self.riesz
    }

    /// Trig-interpolation-free estimate of a smooth even field at the
    /// origin: the mean over the innermost nodes (second-order accurate,
    /// which suffices — the estimate only sizes the subtracted cusp, so its
    /// error enters multiplied by the residual's own smallness).
    fn origin_estimate(&self, samples: &[f64]) -> f64 {
        let n = self.grid.n();
        if self.grid.offset() {
            let lo = n / 2 - 1;
            let hi = n / 2;
            let mut acc = 0.0;
            for &ix in &[lo, hi] {
                for &iy in &[lo, hi] {
                    for &iz in &[lo, hi] {
                        acc += samples[self.grid.idx(ix, iy, iz)];
                    }
                }
            }
            acc / 8.0
        } else {
            samples[self.grid.idx(n / 2, n / 2, n / 2)]
        }
    }

    /// `(I_γ * w|u|^p, w|u|^p)` with the cusp-extracted transform.
    pub fn convolve_density(
        &self,
        ops: &mut SpectralOps,
        u: &Field,
    ) -> Result<(Field, Field), SpectralError> {
        ensure_same_grid(&self.grid, u.grid())?;
        ensure_same_grid(&self.grid, ops.grid())?;
        let g: Vec<f64> = u.values().iter().map(|v| v.norm().powf(self.params.p)).collect();
        let g0 = self.origin_estimate(&g);
        let mut hat: Vec<Complex64> = g
            .iter()
            .zip(self.phi.iter())
            .zip(self.weight.samples().iter())
            .map(|((gv, ph), wv)| Complex64::new(wv * (gv - g0 * ph), 0.0))
            .collect();
        ops.fft_forward(&mut hat);
        for ((v, s), m) in hat
            .iter_mut()
            .zip(self.wphi_dft.iter())
            .zip(self.riesz.multiplier().iter())
        {
            *v = (*v + g0 * s) * *m;
        }
        ops.fft_inverse(&mut hat);
        let conv = Field::from_values(self.grid, hat);
        let dens = Field::from_values(
            self.grid,
            g.iter()
                .zip(self.weight.samples().iter())
                .map(|(gv, wv)| Complex64::new(gv * wv, 0.0))
                .collect(),
        );
        Ok((conv, dens))
    }

    /// `P(u) = ⟨I_γ * (w|u|^p), w|u|^p⟩`.
    pub fn interaction(&self, ops: &mut SpectralOps, u: &Field) -> Result<f64, SpectralError> {
        let (conv, dens) = self.convolve_density(ops, u)?;
        let h3 = self.grid.cell_volume();
        Ok(h3 * conv
            .values()
            .iter()
            .zip(dens.values().iter())
            .map(|(a, b)| a.re * b.re)
            .sum::<f64>())
    }

    /// The real phase `G = (I_γ * w|u|^p) w |u|^{p-2}` driving the exact
    /// nonlinear substep of the splitting.
    pub fn phase(&self, ops: &mut SpectralOps, u: &Field) -> Result<Vec<f64>, SpectralError> {
        let (conv, _) = self.convolve_density(ops, u)?;
        let pm2 = self.params.p - 2.0;
        Ok(conv
            .values()
            .iter()
            .zip(u.values().iter())
            .zip(self.weight.samples().iter())
            .map(|((c, uu), wgt)| {
                let m = uu.norm();
                if m == 0.0 {
                    0.0
                } else {
                    c.re * wgt * m.powf(pm2)
                }
            })
            .collect())
    }

    /// For a real iterate `q`: the nonlinearity `N(q) = (I_γ*w|q|^p) w
    /// |q|^{p-2} q`, returned both as node samples and as its cusp-extracted
    /// DFT coefficients (the representation the spectral solver updates
    /// with).
    pub fn nonlinearity_real(
        &self,
        ops: &mut SpectralOps,
        q: &Field,
    ) -> Result<(Vec<Complex64>, Field), SpectralError> {
        let (conv, _) = self.convolve_density(ops, q)?;
        let pm1 = self.params.p - 1.0;
        let h: Vec<f64> = conv
            .values()
            .iter()
            .zip(q.values().iter())
            .map(|(c, qq)| {
                let a = qq.re;
                if a == 0.0 {
                    0.0
                } else {
                    c.re * a.signum() * a.abs().powf(pm1)
                }
            })
            .collect();
        let h0 = self.origin_estimate(&h);
        let mut n_dft: Vec<Complex64> = h
            .iter()
            .zip(self.phi.iter())
            .zip(self.weight.samples().iter())
            .map(|((hv, ph), wv)| Complex64::new(wv * (hv - h0 * ph), 0.0))
            .collect();
        ops.fft_forward(&mut n_dft);
        for (v, s) in n_dft.iter_mut().zip(self.wphi_dft.iter()) {
            *v += h0 * s;
        }
        let n_samples = Field::from_values(
            self.grid,
            h.iter()
                .zip(self.weight.samples().iter())
                .map(|(hv, wv)| Complex64::new(hv * wv, 0.0))
                .collect(),
        );
        Ok((n_dft, n_samples))
    }
}

/// DFT-space coefficients of `|x|^{-b} e^{-|x|²}` from its continuum radial
/// transform `W(ξ) = (4π/ξ) ∫₀^∞ r^{1-b} e^{-r²} sin(ξr) dr`, carried onto
/// the grid's phase convention.
fn weighted_gaussian_dft(grid: &GridSpec, b: f64) -> Vec<Complex64> {
    use std::collections::HashMap;
    let n = grid.n();
    let h3 = grid.cell_volume();
    let len = grid.length();
    // radial transform per distinct |k|², via the substitution r = v²
    // (flattens the r^{1-b} endpoint for b > 1)
    let mut shell: HashMap<i64, f64> = HashMap::new();
    let signed: Vec<i64> = (0..n)
        .map(|k| if k < n / 2 { k as i64 } else { k as i64 - n as i64 })
        .collect();
    let transform = |xi: f64| -> f64 {
        if xi == 0.0 {
            // 4π ∫ r^{2-b} e^{-r²} dr = 2π Γ((3-b)/2)
            2.0 * std::f64::consts::PI * crate::special::gamma((3.0 - b) / 2.0)
        } else {
            let integrand = |v: f64| {
                let r = v * v;
                2.0 * v * r.powf(1.0 - b) * (-r * r).exp() * (xi * r).sin()
            };
            4.0 * std::f64::consts::PI / xi * gauss_panels(integrand, 0.0, 3.2, 48)
        }
    };
    // per-axis phase e^{i ξ_k x₀} relating continuum transforms to DFT bins
    let x0 = grid.coord(0);
    let phase: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, grid.frequency(k) * x0))
        .collect();
    let mut out = vec![Complex64::default(); grid.len()];
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let ksq = signed[ix] * signed[ix] + signed[iy] * signed[iy] + signed[iz] * signed[iz];
                let w = *shell.entry(ksq).or_insert_with(|| {
                    let xi = 2.0 * std::f64::consts::PI * (ksq as f64).sqrt() / len;
                    transform(xi)
                });
                out[grid.idx(ix, iy, iz)] = phase[ix] * phase[iy] * phase[iz] * (w / h3);
            }
        }
    }
    out
}

/// Evaluate every functional of `u` in one pass.
pub fn evaluate(
    u: &Field,
    v: &Potential,
    kernel: &InteractionOp,
    ops: &mut SpectralOps,
) -> Result<FunctionalRecord, FunctionalError> {
    ensure_same_grid(v.grid(), u.grid())?;
    let h3 = u.grid().cell_volume();
    let mass = u.l2_norm_sq();
    let kinetic = ops.grad_norm_sq(u)?;
    let potential_energy = h3
        * u.values()
            .iter()
            .zip(v.values().iter())
            .map(|(uu, vv)| vv * uu.norm_sqr())
            .sum::<f64>();
    let interaction = kernel.interaction(ops, u)?;
    Ok(FunctionalRecord::assemble(
        kernel.params(),
        mass,
        kinetic,
        potential_energy,
        interaction,
    ))
}

/// Kato norm `sup_x ∫ |V(y)| / |x-y| dy`, estimated as the grid max of
/// `4π (I_2 * |V|)(x)`.
pub fn kato_norm(v: &Potential, ops: &mut SpectralOps) -> Result<f64, SpectralError> {
    let coulomb = RieszOp::coulomb(v.grid());
    kato_norm_with(v.values(), v.grid(), &coulomb, ops)
}

fn kato_norm_with(
    samples: &[f64],
    grid: &GridSpec,
    coulomb: &RieszOp,
    ops: &mut SpectralOps,
) -> Result<f64, SpectralError> {
    let abs_v = Field::from_values(
        *grid,
        samples.iter().map(|v| Complex64::new(v.abs(), 0.0)).collect(),
    );
    let conv = coulomb.apply(ops, &abs_v)?;
    let max = conv.values().iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(4.0 * std::f64::consts::PI * max.max(0.0))
}

/// Hypothesis report for an external potential.
#[derive(Debug, Clone, Serialize)]
pub struct PotentialHypotheses {
    /// Kato norm of the negative part `V₋`.
    pub kato_negative: f64,
    /// `||V₋||_K < 4π`?
    pub kato_small: bool,
    /// `4π - ||V₋||_K`
    pub kato_margin: f64,
    pub nonneg: bool,
    pub min_value: f64,
    /// `x·∇V <= 0` everywhere?
    pub repulsive: bool,
    pub max_radial_pull: f64,
    /// Grid `L^{3/2}` norm of `V`.
    pub l32_norm: f64,
    /// Grid `L^r` norm of `x·∇V` at the user-chosen `r`.
    pub pull_lr_norm: f64,
    pub pull_r_exponent: f64,
    pub all_finite: bool,
}

/// Check the structural hypotheses on `V`: Kato smallness of the negative
/// part, sign, repulsivity, and finiteness of the grid Lebesgue norms.
pub fn check_potential_hypotheses(
    v: &Potential,
    r_exponent: f64,
    ops: &mut SpectralOps,
) -> Result<PotentialHypotheses, SpectralError> {
    let grid = v.grid();
    let coulomb = RieszOp::coulomb(grid);
    let neg: Vec<f64> = v.values().iter().map(|x| x.min(0.0)).collect();
    let kato_negative = if neg.iter().all(|x| *x == 0.0) {
        0.0
    } else {
        kato_norm_with(&neg, grid, &coulomb, ops)?
    };
    let four_pi = 4.0 * std::f64::consts::PI;
    let min_value = v.values().iter().copied().fold(f64::INFINITY, f64::min);
    let max_radial_pull = v.radial_pull().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h3 = grid.cell_volume();
    let l32_norm = (h3
        * v.values()
            .iter()
            .map(|x| x.abs().powf(1.5))
            .sum::<f64>())
    .powf(2.0 / 3.0);
    let pull_lr_norm = (h3
        * v.radial_pull()
            .iter()
            .map(|x| x.abs().powf(r_exponent))
            .sum::<f64>())
    .powf(1.0 / r_exponent);
    let all_finite = l32_norm.is_finite() && pull_lr_norm.is_finite() && kato_negative.is_finite();
    Ok(PotentialHypotheses {
        kato_negative,
        kato_small: kato_negative < four_pi,
        kato_margin: four_pi - kato_negative,
        nonneg: min_value >= 0.0,
        min_value,
        repulsive: max_radial_pull <= 0.0,
        max_radial_pull,
        l32_norm,
        pull_lr_norm,
        pull_r_exponent: r_exponent,
        all_finite,
    })
}

/// Interaction-inequality quotient `P(u) / (||u||^A ||∇u||^B)` with V-free
/// norms.
pub fn gn_quotient(
    u: &Field,
    kernel: &InteractionOp,
    ops: &mut SpectralOps,
) -> Result<f64, FunctionalError> {
    let mass = u.l2_norm_sq();
    if mass == 0.0 {
        return Err(FunctionalError::ZeroField);
    }
    let params = kernel.params();
    let p_val = kernel.interaction(ops, u)?;
    let grad = ops.grad_norm_sq(u)?.sqrt();
    Ok(p_val / (mass.sqrt().powf(params.gn_a) * grad.powf(params.gn_b)))
}
