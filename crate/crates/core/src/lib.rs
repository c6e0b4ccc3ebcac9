//! Numerical laboratory for the focusing inhomogeneous generalized Hartree
//! equation with an external potential,
//!
//! ```text
//! i u_t + Δu - V(x) u + (I_γ * |x|^{-b} |u|^p) |x|^{-b} |u|^{p-2} u = 0
//! ```
//!
//! on a periodic 3D box, where `I_γ` is the Riesz potential with kernel
//! `K / |x|^{3-γ}`. The crate provides:
//!
//! - parameter validation and the derived critical exponents ([`params`]),
//! - an exact-rational ledger for Strichartz admissibility bookkeeping
//!   ([`exponents`]),
//! - pseudo-spectral operators: FFT-based Riesz convolution, derivatives,
//!   and the singular weight `|x|^{-b}` ([`spectral`]),
//! - all scalar functionals: mass, energy, the interaction functional `P`,
//!   Kato norms, and the Gagliardo-Nirenberg quotient ([`functionals`]),
//! - a spectral-renormalization ground-state solver ([`ground_state`]),
//! - a mass-exact Strang split-step integrator ([`evolve`]),
//! - virial-Morawetz and local-mass-evacuation monitors plus the
//!   threshold classifiers ([`diagnostics`]),
//! - scenario configuration, snapshot/CSV/manifest persistence, and the
//!   CLI pipeline ([`cli_io`]).

pub mod cli_io;
pub mod diagnostics;
pub mod evolve;
pub mod exponents;
pub mod functionals;
pub mod ground_state;
pub mod params;
mod special;
pub mod spectral;

pub use params::ProblemParams;
pub use spectral::{Field, GridSpec};
