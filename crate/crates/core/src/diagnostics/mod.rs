//! Proof-side quantities as runtime monitors: the virial-Morawetz weight and
//! identity, local-mass evacuation, coercivity, cutoffs, and the threshold
//! classifiers.

mod classify;
mod morawetz;
mod weights;

pub use classify::{
    classify, coercivity_check, ClassifierVerdict, CoercivityReport, CutoffCheck, Trend,
};
pub use morawetz::{kernel_flux_direct, morawetz_action, morawetz_rhs, KernelFluxEstimate, TermBreakdown};
pub use weights::{virial_profile, Cutoff, RadialWeight, VirialWeight};

use crate::functionals::{FunctionalRecord, InteractionOp, Potential};
use crate::spectral::{Field, SpectralError, SpectralOps};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("empty diagnostics series")]
    EmptySeries,
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("radius {0} is not among the monitored radii")]
    UnknownRadius(f64),
    #[error("invalid virial weight: {0}")]
    InvalidWeight(String),
}

/// What to monitor along a run.
pub struct DiagnosticsConfig {
    /// Radii of the balls whose mass and interaction density are tracked.
    pub local_radii: Vec<f64>,
    /// Virial-Morawetz weight, when the action `M_a(t)` is tracked.
    pub virial: Option<VirialWeight>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            local_radii: vec![5.0],
            virial: None,
        }
    }
}

/// One diagnostics record along a run.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsSample {
    pub t: f64,
    pub step: usize,
    pub record: FunctionalRecord,
    /// `∫_{|x|<R} |u|²` per monitored radius.
    pub local_mass: Vec<f64>,
    /// `∫_{|x|<R} (I_γ * w|u|^p) w|u|^p` per monitored radius.
    pub local_interaction: Vec<f64>,
    /// `M_a(t) = 2 Im ∫ ū ∇u·∇a` (0 when no weight is configured).
    pub morawetz_action: f64,
}

/// Time series of diagnostics records.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsSeries {
    pub local_radii: Vec<f64>,
    pub virial_radius: Option<f64>,
    pub samples: Vec<DiagnosticsSample>,
    /// Set when the run terminated on a non-finite field.
    pub nonfinite_at: Option<f64>,
}

impl DiagnosticsSeries {
    pub fn new(config: &DiagnosticsConfig) -> Self {
        DiagnosticsSeries {
            local_radii: config.local_radii.clone(),
            virial_radius: config.virial.as_ref().map(|w| w.radius()),
            samples: Vec::new(),
            nonfinite_at: None,
        }
    }

    pub fn push(&mut self, sample: DiagnosticsSample) {
        self.samples.push(sample);
    }

    pub fn radius_index(&self, radius: f64) -> Result<usize, DiagnosticsError> {
        self.local_radii
            .iter()
            .position(|r| (r - radius).abs() < 1e-9 * radius.max(1.0))
            .ok_or(DiagnosticsError::UnknownRadius(radius))
    }
}

/// `∫_{|x|<R} |u|² dx` via sharp ball indicator on the grid nodes.
pub fn local_mass(u: &Field, radius: f64) -> f64 {
    let grid = u.grid();
    let n = grid.n();
    let r2 = radius * radius;
    let mut acc = 0.0;
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let [x, y, z] = grid.node(ix, iy, iz);
                if x * x + y * y + z * z < r2 {
                    acc += u.values()[grid.idx(ix, iy, iz)].norm_sqr();
                }
            }
        }
    }
    grid.cell_volume() * acc
}

/// Evaluate one diagnostics sample for the current state.
pub fn sample_state(
    state: &crate::evolve::SimState,
    v: &Potential,
    kernel: &InteractionOp,
    config: &DiagnosticsConfig,
    ops: &mut SpectralOps,
) -> Result<DiagnosticsSample, DiagnosticsError> {
    let u = &state.u;
    let grid = u.grid();
    let h3 = grid.cell_volume();
    let n = grid.n();

    let mass = u.l2_norm_sq();
    let kinetic = ops.grad_norm_sq(u)?;
    let potential_energy = h3
        * u.values()
            .iter()
            .zip(v.values().iter())
            .map(|(uu, vv)| vv * uu.norm_sqr())
            .sum::<f64>();

    let (conv, dens) = kernel.convolve_density(ops, u)?;

    let mut interaction = 0.0;
    let mut local_mass_acc = vec![0.0; config.local_radii.len()];
    let mut local_p_acc = vec![0.0; config.local_radii.len()];
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let idx = grid.idx(ix, iy, iz);
                let [x, y, z] = grid.node(ix, iy, iz);
                let r2 = x * x + y * y + z * z;
                let p_dens = conv.values()[idx].re * dens.values()[idx].re;
                interaction += p_dens;
                let m_dens = u.values()[idx].norm_sqr();
                for (k, radius) in config.local_radii.iter().enumerate() {
                    if r2 < radius * radius {
                        local_mass_acc[k] += m_dens;
                        local_p_acc[k] += p_dens;
                    }
                }
            }
        }
    }
    interaction *= h3;
    for v in &mut local_mass_acc {
        *v *= h3;
    }
    for v in &mut local_p_acc {
        *v *= h3;
    }

    let record =
        FunctionalRecord::assemble(kernel.params(), mass, kinetic, potential_energy, interaction);

    let morawetz = match &config.virial {
        Some(weight) => morawetz_action(u, weight, ops)?,
        None => 0.0,
    };

    Ok(DiagnosticsSample {
        t: state.t,
        step: state.step_count,
        record,
        local_mass: local_mass_acc,
        local_interaction: local_p_acc,
        morawetz_action: morawetz,
    })
}

/// Time-averaged localized interaction
/// `(1/T) ∫₀^T ∫_{|x|<R} (I_γ * w|u|^p) w|u|^p dx dt`
/// by trapezoid over the stored diagnostics.
pub fn averaged_morawetz(
    series: &DiagnosticsSeries,
    radius: f64,
    horizon: f64,
) -> Result<f64, DiagnosticsError> {
    let col = series.radius_index(radius)?;
    let pts: Vec<(f64, f64)> = series
        .samples
        .iter()
        .filter(|s| s.t <= horizon * (1.0 + 1e-12))
        .map(|s| (s.t, s.local_interaction[col]))
        .collect();
    if pts.len() < 2 {
        return Err(DiagnosticsError::InsufficientSamples(format!(
            "{} samples in [0, {horizon}]",
            pts.len()
        )));
    }
    let mut integral = 0.0;
    for pair in pts.windows(2) {
        let (t0, p0) = pair[0];
        let (t1, p1) = pair[1];
        integral += 0.5 * (p0 + p1) * (t1 - t0);
    }
    Ok(integral / horizon)
}
