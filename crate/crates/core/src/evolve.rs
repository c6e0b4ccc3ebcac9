//! Strang split-step integrator for
//! `i u_t + Δu - V u + (I_γ * w_b|u|^p) w_b |u|^{p-2} u = 0`.
//!
//! One step of size `dt` is
//!
//! ```text
//! û ← e^{-i(dt/2)|ξ|²} û            (half kinetic step, Fourier side)
//! u ← e^{-i dt (V(x) - G(x))} u     (full phase step, G frozen at entry)
//! û ← e^{-i(dt/2)|ξ|²} û            (half kinetic step)
//! ```
//!
//! with `G = (I_γ * w_b|u|^p) w_b |u|^{p-2}` real. `|u|` is invariant along
//! the pure phase rotation, so the phase substep is exact, and both substeps
//! are unitary: discrete mass is conserved to roundoff.

use crate::diagnostics::{sample_state, DiagnosticsConfig, DiagnosticsSample, DiagnosticsSeries};
use crate::functionals::{self, FunctionalRecord, InteractionOp, Potential};
use crate::spectral::{Field, SpectralError, SpectralOps};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Functional(#[from] crate::functionals::FunctionalError),
    #[error(transparent)]
    Diagnostics(#[from] crate::diagnostics::DiagnosticsError),
    /// NaN/Inf detected; signals blow-up or under-resolution.
    #[error("non-finite field at t = {t} (step {step})")]
    NonFinite { t: f64, step: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Snapshot every this many steps (0 = initial/final only).
    pub snapshot_stride: usize,
    /// Diagnostics every this many steps.
    pub diagnostic_stride: usize,
    /// Optional step-size control driven by the per-step change of the
    /// interaction phase `G`; off by default for reproducibility.
    pub adaptive: bool,
    pub dt_safety: f64,
    /// Disable the nonlinearity (linear test mode).
    pub linear_only: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            dt: 1e-3,
            t_end: 1.0,
            snapshot_stride: 0,
            diagnostic_stride: 10,
            adaptive: false,
            dt_safety: 0.5,
            linear_only: false,
        }
    }
}

/// Evolving state: time, field, and the functionals re-evaluated at
/// diagnostic strides.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub u: Field,
    pub record: FunctionalRecord,
    pub step_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Termination {
    Completed,
    NonFinite { t: f64, step: usize },
}

/// Result of a full run; on `NonFinite` the partial series is intact.
pub struct RunOutcome {
    pub series: DiagnosticsSeries,
    pub termination: Termination,
    pub final_state: SimState,
}

/// Observer invoked at diagnostic and snapshot strides.
pub trait Monitor {
    fn on_sample(&mut self, _state: &SimState, _sample: &DiagnosticsSample) {}
    fn on_snapshot(&mut self, _state: &SimState) {}
}

/// Splitting stepper with cached transforms and phase tables.
pub struct Stepper<'a> {
    v: &'a Potential,
    kernel: &'a InteractionOp,
    pub ops: SpectralOps,
    kinetic_phase: Vec<Complex64>,
    kinetic_dt: f64,
    linear_only: bool,
    /// Max pointwise |G - G_prev| from the last step, for adaptive control.
    pub last_phase_change: f64,
    g_prev: Option<Vec<f64>>,
}

impl<'a> Stepper<'a> {
    pub fn new(v: &'a Potential, kernel: &'a InteractionOp, linear_only: bool) -> Self {
        let ops = SpectralOps::new(v.grid());
        Stepper {
            v,
            kernel,
            ops,
            kinetic_phase: Vec::new(),
            kinetic_dt: f64::NAN,
            linear_only,
            last_phase_change: 0.0,
            g_prev: None,
        }
    }

    fn refresh_kinetic_phase(&mut self, dt: f64) {
        if self.kinetic_dt == dt && !self.kinetic_phase.is_empty() {
            return;
        }
        self.kinetic_phase = self
            .ops
            .ksq()
            .iter()
            .map(|k| Complex64::from_polar(1.0, -0.5 * dt * k))
            .collect();
        self.kinetic_dt = dt;
    }

    fn half_kinetic(&mut self, u: &mut Field) {
        let mut hat = u.values().to_vec();
        self.ops.fft_forward(&mut hat);
        for (v, ph) in hat.iter_mut().zip(self.kinetic_phase.iter()) {
            *v *= ph;
        }
        self.ops.fft_inverse(&mut hat);
        u.values_mut().copy_from_slice(&hat);
    }

    /// The real interaction phase `G = (I_γ * w|u|^p) w |u|^{p-2}`.
    fn interaction_phase(&mut self, u: &Field) -> Result<Vec<f64>, SpectralError> {
        self.kernel.phase(&mut self.ops, u)
    }

    /// Advance `state` by one Strang step of size `dt`.
    pub fn step(&mut self, state: &mut SimState, dt: f64) -> Result<(), EvolveError> {
        self.refresh_kinetic_phase(dt);
        self.half_kinetic(&mut state.u);

        if self.linear_only && self.v.is_zero() {
            // pure free flow: phase substep is the identity
        } else {
            let g = if self.linear_only {
                vec![0.0; state.u.grid().len()]
            } else {
                self.interaction_phase(&state.u)?
            };
            if let Some(prev) = &self.g_prev {
                self.last_phase_change = g
                    .iter()
                    .zip(prev.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
            }
            let vv = self.v.values();
            for (j, u) in state.u.values_mut().iter_mut().enumerate() {
                *u *= Complex64::from_polar(1.0, -dt * (vv[j] - g[j]));
            }
            self.g_prev = Some(g);
        }

        self.half_kinetic(&mut state.u);
        state.t += dt;
        state.step_count += 1;

        if !state.u.is_finite() {
            return Err(EvolveError::NonFinite {
                t: state.t,
                step: state.step_count,
            });
        }
        Ok(())
    }
}

/// Single step with a caller-provided stepper (the spec-level `step` op).
pub fn step(
    stepper: &mut Stepper<'_>,
    state: &mut SimState,
    dt: f64,
) -> Result<(), EvolveError> {
    stepper.step(state, dt)
}

/// Integrate `u0` to `t_end`, sampling diagnostics at the configured stride.
///
/// On `NonFinite` the outcome carries the partial series and the offending
/// time; monitors receive read-only views between steps.
pub fn run(
    u0: Field,
    v: &Potential,
    kernel: &InteractionOp,
    config: &EvolveConfig,
    diag: &DiagnosticsConfig,
    monitors: &mut [&mut dyn Monitor],
) -> Result<RunOutcome, EvolveError> {
    let mut stepper = Stepper::new(v, kernel, config.linear_only);
    let mut series = DiagnosticsSeries::new(diag);
    let record = functionals::evaluate(&u0, v, kernel, &mut stepper.ops)?;
    let mut state = SimState {
        t: 0.0,
        u: u0,
        record,
        step_count: 0,
    };

    let emit = |state: &mut SimState,
                    stepper: &mut Stepper<'_>,
                    series: &mut DiagnosticsSeries,
                    monitors: &mut [&mut dyn Monitor]|
     -> Result<(), EvolveError> {
        let sample = sample_state(state, v, kernel, diag, &mut stepper.ops)?;
        state.record = sample.record;
        for m in monitors.iter_mut() {
            m.on_sample(state, &sample);
        }
        series.push(sample);
        Ok(())
    };

    emit(&mut state, &mut stepper, &mut series, monitors)?;
    for m in monitors.iter_mut() {
        m.on_snapshot(&state);
    }

    let mut dt = config.dt;
    let eps = 1e-12 * config.t_end.max(1.0);
    let mut outcome_termination = Termination::Completed;

    while state.t < config.t_end - eps {
        if config.adaptive && stepper.last_phase_change > 0.0 {
            dt = (config.dt_safety / stepper.last_phase_change)
                .min(config.dt)
                .max(config.dt * 1e-3);
        }
        let step_dt = dt.min(config.t_end - state.t);
        match stepper.step(&mut state, step_dt) {
            Ok(()) => {}
            Err(EvolveError::NonFinite { t, step }) => {
                outcome_termination = Termination::NonFinite { t, step };
                break;
            }
            Err(e) => return Err(e),
        }
        let at_end = state.t >= config.t_end - eps;
        if config.diagnostic_stride > 0
            && (state.step_count % config.diagnostic_stride == 0 || at_end)
        {
            emit(&mut state, &mut stepper, &mut series, monitors)?;
        }
        if at_end
            || (config.snapshot_stride > 0 && state.step_count % config.snapshot_stride == 0)
        {
            for m in monitors.iter_mut() {
                m.on_snapshot(&state);
            }
        }
    }

    if let Termination::NonFinite { t, .. } = outcome_termination {
        series.nonfinite_at = Some(t);
    }

    Ok(RunOutcome {
        series,
        termination: outcome_termination,
        final_state: state,
    })
}
