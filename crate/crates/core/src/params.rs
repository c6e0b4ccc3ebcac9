//! Problem parameters `(γ, b, p)` and every scalar exponent derived from them.
//!
//! The equation is intercritical exactly when the critical Sobolev index
//! `s_c = 3/2 - (2 - 2b + γ) / (2(p-1))` lies in `(0, 1)`, which together
//! with the small-data window pins the admissible range
//! `(5 - 2b + γ)/3 < p < (5 - 4b + 2γ)/2`. All inequalities are strict:
//! boundary triples are rejected.

use crate::special::gamma;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParamsError {
    /// One or more parameter constraints failed; every violation is listed.
    #[error("parameter constraints violated: {}", .0.join("; "))]
    RangeViolation(Vec<String>),
}

/// Validated problem parameters plus all derived exponents.
///
/// Derived quantities:
/// - `s_c`: critical Sobolev index of the scaling symmetry,
/// - `sigma_c = (1 - s_c) / s_c`,
/// - `gn_a`, `gn_b`: the interaction-inequality exponents with
///   `gn_a + gn_b = 2p`; `gn_b = 2(p-1) s_c + 2` is the unique value making
///   `P(u) <= C ||u||^A ||∇u||^B` scale invariant,
/// - `kernel_const`: the Riesz kernel normalization
///   `K = Γ((3-γ)/2) / (Γ(γ/2) π^{3/2} 2^γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams {
    pub gamma: f64,
    pub b: f64,
    pub p: f64,
    pub s_c: f64,
    pub sigma_c: f64,
    pub gn_a: f64,
    pub gn_b: f64,
    pub kernel_const: f64,
}

/// Kernel normalization constant of the Riesz potential `I_γ`.
pub fn riesz_constant(g: f64) -> f64 {
    gamma((3.0 - g) / 2.0) / (gamma(g / 2.0) * PI.powf(1.5) * 2f64.powf(g))
}

/// Lower admissible endpoint for `p` (excluded).
pub fn p_lower(gamma: f64, b: f64) -> f64 {
    (5.0 - 2.0 * b + gamma) / 3.0
}

/// Upper admissible endpoint for `p` (excluded); equals `5/2 - 2b + γ`.
pub fn p_upper(gamma: f64, b: f64) -> f64 {
    (5.0 - 4.0 * b + 2.0 * gamma) / 2.0
}

/// Energy-critical endpoint `p = 3 - 2b + γ`, where `s_c = 1`.
pub fn p_energy_critical(gamma: f64, b: f64) -> f64 {
    3.0 - 2.0 * b + gamma
}

impl ProblemParams {
    /// Validate `(γ, b, p)` and derive every downstream exponent.
    ///
    /// On failure the error lists every violated inequality, not just the
    /// first one.
    pub fn derive(g: f64, b: f64, p: f64) -> Result<Self, ParamsError> {
        let mut violations = Vec::new();
        if !(g.is_finite() && b.is_finite() && p.is_finite()) {
            violations.push("gamma, b, p must be finite".to_string());
            return Err(ParamsError::RangeViolation(violations));
        }
        if g <= 0.0 || g >= 3.0 {
            violations.push(format!("gamma = {g} outside (0, 3)"));
        }
        if b <= 0.0 {
            violations.push(format!("b = {b} not strictly positive"));
        }
        if g > 0.0 && g < 3.0 && b >= (1.0 + g) / 2.0 {
            violations.push(format!("b = {b} not below (1 + gamma)/2 = {}", (1.0 + g) / 2.0));
        }
        if p <= 1.0 {
            violations.push(format!("p = {p} not above 1"));
        }
        if violations.is_empty() {
            let lo = p_lower(g, b);
            let hi = p_upper(g, b);
            if p <= lo {
                violations.push(format!("p = {p} not above (5 - 2b + gamma)/3 = {lo}"));
            }
            if p >= hi {
                violations.push(format!("p = {p} not below (5 - 4b + 2gamma)/2 = {hi}"));
            }
        }
        if !violations.is_empty() {
            return Err(ParamsError::RangeViolation(violations));
        }

        let s_c = 1.5 - (2.0 - 2.0 * b + g) / (2.0 * (p - 1.0));
        debug_assert!(s_c > 0.0 && s_c < 1.0);
        let sigma_c = (1.0 - s_c) / s_c;
        let gn_a = 2.0 * (p - 1.0) * (1.0 - s_c);
        let gn_b = 2.0 * (p - 1.0) * s_c + 2.0;
        let kernel_const = riesz_constant(g);

        Ok(ProblemParams {
            gamma: g,
            b,
            p,
            s_c,
            sigma_c,
            gn_a,
            gn_b,
            kernel_const,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn reference_triple() {
        let pp = ProblemParams::derive(2.0, 0.5, 2.5).unwrap();
        assert!((pp.s_c - 0.5).abs() < 1e-15);
        assert!((pp.sigma_c - 1.0).abs() < 1e-15);
        assert!((pp.gn_a - 1.5).abs() < 1e-15);
        assert!((pp.gn_b - 3.5).abs() < 1e-15);
        assert!((pp.gn_a + pp.gn_b - 2.0 * pp.p).abs() < 1e-15);
    }

    #[test]
    fn lower_endpoint_rejected() {
        // At b = 0 and p = (5 - 2b + gamma)/3 both the b-range and the open
        // lower endpoint fail; every violation must be listed.
        let err = ProblemParams::derive(2.0, 0.0, 7.0 / 3.0).unwrap_err();
        let ParamsError::RangeViolation(list) = err;
        assert!(list.iter().any(|m| m.contains("b = 0")));
    }

    #[test]
    fn endpoints_are_excluded_and_interior_is_intercritical() {
        let (g, b) = (2.0, 0.5);
        let lo = p_lower(g, b);
        assert!(ProblemParams::derive(g, b, lo).is_err());
        let hi = p_upper(g, b);
        assert!(ProblemParams::derive(g, b, hi).is_err());
        for k in 1..20 {
            let p = lo + (hi - lo) * k as f64 / 20.0;
            let pp = ProblemParams::derive(g, b, p).unwrap();
            assert!(pp.s_c > 0.0 && pp.s_c < 1.0);
            assert!(pp.sigma_c > 0.0);
        }
        // s_c vanishes exactly at the lower endpoint and reaches 1 at the
        // energy-critical exponent.
        let sc_at = |p: f64| 1.5 - (2.0 - 2.0 * b + g) / (2.0 * (p - 1.0));
        assert!(sc_at(lo).abs() < 1e-14);
        assert!((sc_at(p_energy_critical(g, b)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coulomb_kernel_constant() {
        // gamma = 2: Gamma(1/2) = sqrt(pi), Gamma(1) = 1 force K = 1/(4 pi).
        assert!((riesz_constant(2.0) - 1.0 / (4.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn exponent_sum_identity_random_triples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut accepted = 0usize;
        while accepted < 1000 {
            let g: f64 = rng.gen_range(0.05..2.95);
            let b: f64 = rng.gen_range(1e-3..(1.0 + g) / 2.0 - 1e-3);
            let (lo, hi) = (p_lower(g, b), p_upper(g, b));
            let p: f64 = rng.gen_range(lo + 1e-6..hi - 1e-6);
            let pp = match ProblemParams::derive(g, b, p) {
                Ok(pp) => pp,
                Err(_) => continue,
            };
            accepted += 1;
            assert!(
                (pp.gn_a + pp.gn_b - 2.0 * pp.p).abs() < 1e-12 * (1.0 + 2.0 * pp.p),
                "A + B != 2p at gamma={g} b={b} p={p}"
            );
            assert!(pp.kernel_const > 0.0);
            // The two equivalent closed forms of B.
            let b_alt = 3.0 * pp.p - 3.0 + 2.0 * pp.b - pp.gamma;
            assert!((pp.gn_b - b_alt).abs() < 1e-10 * (1.0 + b_alt.abs()));
        }
    }
}
