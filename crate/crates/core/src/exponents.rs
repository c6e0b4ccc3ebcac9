//! Exact-rational ledger for Strichartz admissibility and the nonlinear
//! estimate exponent bookkeeping.
//!
//! Everything in this module is computed in exact rational arithmetic so the
//! algebraic identities between exponents can be tested with zero tolerance.
//! Floating point is deliberately absent. `∞` is a distinguished exponent
//! value with `1/∞ = 0` in the admissibility relations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExponentError {
    /// The printed formula for `r̄` has a non-positive denominator, which
    /// signals an infeasible `(θ, ε)` choice.
    #[error("degenerate denominator in r-bar: {0}")]
    DegenerateDenominator(BigRational),
    #[error("invalid ledger parameters: {0}")]
    InvalidParams(String),
}

/// Convenience constructor for a rational from an integer pair.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A Lebesgue exponent that may be infinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exponent {
    Finite(BigRational),
    Infinity,
}

impl Exponent {
    pub fn finite(num: i64, den: i64) -> Self {
        Exponent::Finite(rat(num, den))
    }

    /// `1/q`, with the convention `1/∞ = 0`.
    pub fn reciprocal(&self) -> BigRational {
        match self {
            Exponent::Finite(q) => q.recip(),
            Exponent::Infinity => BigRational::zero(),
        }
    }

    pub fn as_finite(&self) -> Option<&BigRational> {
        match self {
            Exponent::Finite(q) => Some(q),
            Exponent::Infinity => None,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(q) => write!(f, "{q}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// A space-time exponent pair `(q, r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPair {
    pub q: Exponent,
    pub r: Exponent,
}

impl RationalPair {
    pub fn new(q: Exponent, r: Exponent) -> Self {
        RationalPair { q, r }
    }
}

/// `(q, r)` is L²-admissible iff `2/q = 3/2 - 3/r` and `2 <= r <= 6`.
pub fn check_l2_admissible(pair: &RationalPair) -> bool {
    let r = match pair.r.as_finite() {
        Some(r) => r,
        None => return false, // r = ∞ is outside [2, 6]
    };
    if r < &rat(2, 1) || r > &rat(6, 1) {
        return false;
    }
    rat(2, 1) * pair.q.reciprocal() == rat(3, 2) - rat(3, 1) * pair.r.reciprocal()
}

/// `(q, r)` is `Ḣ^s`-admissible iff `2/q = 3/2 - 3/r - s`.
///
/// Negative `s` gives the `Ḣ^{-|s|}` (dual-side) relation.
pub fn check_hs_admissible(pair: &RationalPair, s: &BigRational) -> bool {
    rat(2, 1) * pair.q.reciprocal() == rat(3, 2) - rat(3, 1) * pair.r.reciprocal() - s.clone()
}

/// One named exact identity checked while building an [`ExponentReport`].
#[derive(Debug, Clone)]
pub struct WitnessEntry {
    pub label: &'static str,
    pub holds: bool,
}

/// Exact-rational record of the nonlinear-estimate exponents for a given
/// `(p, b, γ, θ, ε)`.
///
/// Formulas (reported verbatim; all checked against the admissibility
/// relations in `witness`):
///
/// ```text
/// s_c = 3/2 - (2 - 2b + γ)/(2(p-1))
/// a   = 2(p-θ)/(1-s_c)
/// ã   = 2(p-θ)/(2(p-θ)s_c + 1 - s_c)
/// r   = 6(p-θ)/((3-2s_c)(p-θ) - 2(1-s_c))
/// ā   = 8(p-1-θ)/(1+2ε)
/// r̄   = 12(p-1-θ)(p-1)/(2(p-1-θ)(2-2b+γ) - (p-1)(1-2ε))
/// ```
///
/// The dual identity `(2p-1-2θ)·ã' = a` with `ã' = ã/(ã-1)` holds exactly
/// whenever both sides are defined; `feasible` requires it together with
/// `r̄ < 6` and positivity of `ā`, `r̄`.
#[derive(Debug, Clone)]
pub struct ExponentReport {
    pub p: BigRational,
    pub b: BigRational,
    pub gamma: BigRational,
    pub theta: BigRational,
    pub epsilon: BigRational,
    pub s_c: BigRational,
    pub a: BigRational,
    pub a_tilde: BigRational,
    pub a_tilde_dual: BigRational,
    pub r: BigRational,
    pub a_bar: BigRational,
    pub r_bar: BigRational,
    pub feasible: bool,
    pub witness: Vec<WitnessEntry>,
}

/// Build the full exponent report in exact rational arithmetic.
///
/// Accepts any `p` in the intercritical range `0 < s_c < 1` (not only the
/// small-data window), so the feasibility boundary `p = 5/2 - 2b + γ` can be
/// probed from both sides. Requires `0 <= θ < p - 1` and `0 <= ε < 1/2`.
pub fn build_report(
    p: &BigRational,
    b: &BigRational,
    gamma: &BigRational,
    theta: &BigRational,
    epsilon: &BigRational,
) -> Result<ExponentReport, ExponentError> {
    let one = BigRational::one();
    let two = rat(2, 1);

    if gamma <= &BigRational::zero() || gamma >= &rat(3, 1) {
        return Err(ExponentError::InvalidParams(format!("gamma = {gamma} outside (0, 3)")));
    }
    if b <= &BigRational::zero() || b >= &((one.clone() + gamma) / &two) {
        return Err(ExponentError::InvalidParams(format!("b = {b} outside (0, (1+gamma)/2)")));
    }
    if theta.is_negative() || theta >= &(p - &one) {
        return Err(ExponentError::InvalidParams(format!("theta = {theta} outside [0, p-1)")));
    }
    if epsilon.is_negative() || epsilon >= &rat(1, 2) {
        return Err(ExponentError::InvalidParams(format!("epsilon = {epsilon} outside [0, 1/2)")));
    }

    let pm1 = p - &one;
    let s_c = rat(3, 2) - (&two - &(&two * b) + gamma) / (&two * &pm1);
    if s_c <= BigRational::zero() || s_c >= one {
        return Err(ExponentError::InvalidParams(format!(
            "s_c = {s_c} outside (0, 1): p is not intercritical"
        )));
    }
    let one_minus_sc = BigRational::one() - &s_c;
    let p_theta = p - theta;

    let a = &two * &p_theta / &one_minus_sc;
    let a_tilde = &two * &p_theta / (&two * &p_theta * &s_c + &one_minus_sc);
    let a_tilde_dual = &a_tilde / (&a_tilde - BigRational::one());

    let r_den = (rat(3, 1) - &two * &s_c) * &p_theta - &two * &one_minus_sc;
    if r_den <= BigRational::zero() {
        return Err(ExponentError::InvalidParams(format!(
            "denominator of r non-positive ({r_den})"
        )));
    }
    let r = rat(6, 1) * &p_theta / &r_den;

    let pm1_theta = &pm1 - theta;
    let a_bar = rat(8, 1) * &pm1_theta / (BigRational::one() + &two * epsilon);
    let rbar_den = &two * &pm1_theta * (&two - &(&two * b) + gamma)
        - &pm1 * (BigRational::one() - &two * epsilon);
    if rbar_den <= BigRational::zero() {
        return Err(ExponentError::DegenerateDenominator(rbar_den));
    }
    let r_bar = rat(12, 1) * &pm1_theta * &pm1 / &rbar_den;

    let dual_identity =
        (&two * p - BigRational::one() - &two * theta) * &a_tilde_dual == a;

    let pair_a_r = RationalPair::new(
        Exponent::Finite(a.clone()),
        Exponent::Finite(r.clone()),
    );
    let pair_atilde_r = RationalPair::new(
        Exponent::Finite(a_tilde.clone()),
        Exponent::Finite(r.clone()),
    );
    let pair_abar_rbar = RationalPair::new(
        Exponent::Finite(a_bar.clone()),
        Exponent::Finite(r_bar.clone()),
    );

    let minus_sc = -s_c.clone();
    let six = rat(6, 1);
    let witness = vec![
        WitnessEntry { label: "dual_identity (2p-1-2θ)ã' = a", holds: dual_identity },
        WitnessEntry {
            label: "(a, r) Hs-admissible",
            holds: check_hs_admissible(&pair_a_r, &s_c),
        },
        WitnessEntry {
            label: "(ã, r) H(-s)-admissible",
            holds: check_hs_admissible(&pair_atilde_r, &minus_sc),
        },
        WitnessEntry {
            label: "(ā, r̄) Hs-admissible",
            holds: check_hs_admissible(&pair_abar_rbar, &s_c),
        },
        WitnessEntry { label: "a > 2/(1-s_c)", holds: a > &two / &one_minus_sc },
        WitnessEntry { label: "r in [2, 6)", holds: r >= two && r < six },
        WitnessEntry { label: "r̄ < 6", holds: r_bar < six },
    ];

    let feasible = r_bar < rat(6, 1)
        && a_bar > BigRational::zero()
        && r_bar > BigRational::zero()
        && dual_identity;

    Ok(ExponentReport {
        p: p.clone(),
        b: b.clone(),
        gamma: gamma.clone(),
        theta: theta.clone(),
        epsilon: epsilon.clone(),
        s_c,
        a,
        a_tilde,
        a_tilde_dual,
        r,
        a_bar,
        r_bar,
        feasible,
        witness,
    })
}

impl ExponentReport {
    /// Machine-readable record; rationals are serialized as `"num/den"`.
    pub fn to_json(&self) -> serde_json::Value {
        let s = |q: &BigRational| serde_json::Value::String(q.to_string());
        serde_json::json!({
            "p": s(&self.p),
            "b": s(&self.b),
            "gamma": s(&self.gamma),
            "theta": s(&self.theta),
            "epsilon": s(&self.epsilon),
            "s_c": s(&self.s_c),
            "a": s(&self.a),
            "a_tilde": s(&self.a_tilde),
            "a_tilde_dual": s(&self.a_tilde_dual),
            "r": s(&self.r),
            "a_bar": s(&self.a_bar),
            "r_bar": s(&self.r_bar),
            "feasible": self.feasible,
            "witness": self.witness.iter().map(|w| {
                serde_json::json!({ "label": w.label, "holds": w.holds })
            }).collect::<Vec<_>>(),
        })
    }

    pub fn human_readable(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "exponent ledger for p = {}, b = {}, gamma = {}, theta = {}, epsilon = {}\n",
            self.p, self.b, self.gamma, self.theta, self.epsilon
        ));
        out.push_str(&format!("  s_c     = {}\n", self.s_c));
        out.push_str(&format!("  a       = {}\n", self.a));
        out.push_str(&format!("  ã       = {}\n", self.a_tilde));
        out.push_str(&format!("  ã'      = {}\n", self.a_tilde_dual));
        out.push_str(&format!("  r       = {}\n", self.r));
        out.push_str(&format!("  ā       = {}\n", self.a_bar));
        out.push_str(&format!("  r̄       = {}\n", self.r_bar));
        out.push_str(&format!("  feasible = {}\n", self.feasible));
        for w in &self.witness {
            out.push_str(&format!("  [{}] {}\n", if w.holds { "ok" } else { "NO" }, w.label));
        }
        out
    }
}

/// Exact feasibility threshold `p < 5/2 - 2b + γ` for `θ = ε = 0`.
pub fn feasibility_threshold(b: &BigRational, gamma: &BigRational) -> BigRational {
    rat(5, 2) - rat(2, 1) * b + gamma
}
