//! Threshold classifiers: coercivity, dynamic-condition monitors, and the
//! evacuation-trend / blow-up verdicts.

use super::{Cutoff, DiagnosticsError, DiagnosticsSeries};
use crate::functionals::interaction_functional;
use crate::ground_state::GroundState;
use crate::params::ProblemParams;
use crate::spectral::{Field, RieszOp, SpectralOps, WeightCache};
use serde::Serialize;

/// Numerical slack for inequalities that the exact optimizer saturates:
/// for `u = cQ` the coercivity bound holds with equality, so the sign of the
/// grid error is arbitrary and the check must tolerate the same relative
/// error as the ground-state identities.
const COERCIVITY_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CutoffCheck {
    pub radius: f64,
    /// `||χ_R u|| <= ||u||`
    pub mass_monotone: bool,
    /// `P(χ_R u) <= P(u)`
    pub interaction_monotone: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Report of the coercivity estimate
/// `||∇u||² - (B/2p) P(u) >= δ' P(u)` with
/// `δ' = (B/2p)((1-δ)^{-(B-2)/B} - 1)`.
#[derive(Debug, Clone, Serialize)]
pub struct CoercivityReport {
    /// Whether the hypothesis `P(u)M(u)^{σc} <= (1-δ) P(Q)M(Q)^{σc}` holds.
    pub applicable: bool,
    pub delta: f64,
    pub delta_prime: f64,
    /// Measured `P(u)M(u)^{σc} / (P(Q)M(Q)^{σc})`.
    pub threshold_ratio: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub cutoff_checks: Vec<CutoffCheck>,
}

/// Verify the coercivity estimate for `u` under the threshold hypothesis
/// with parameter `delta`, plus the cutoff variant for each radius.
#[allow(clippy::too_many_arguments)]
pub fn coercivity_check(
    params: &ProblemParams,
    u: &Field,
    gs: &GroundState,
    delta: f64,
    cutoff_radii: &[f64],
    w: &WeightCache,
    riesz: &RieszOp,
    ops: &mut SpectralOps,
) -> Result<CoercivityReport, DiagnosticsError> {
    let threshold = gs.interaction * gs.mass.powf(params.sigma_c);
    let p_u = interaction_functional(params, u, w, riesz, ops).map_err(DiagnosticsError::from)?;
    let mass_u = u.l2_norm_sq();
    let measured = p_u * mass_u.powf(params.sigma_c);
    let threshold_ratio = measured / threshold;
    let applicable = measured <= (1.0 - delta) * threshold * (1.0 + 1e-12);

    let bb = params.gn_b;
    let coeff = bb / (2.0 * params.p);
    let delta_prime = coeff * ((1.0 - delta).powf(-(bb - 2.0) / bb) - 1.0);

    let grad_sq = ops.grad_norm_sq(u)?;
    let lhs = grad_sq - coeff * p_u;
    let rhs = delta_prime * p_u;
    let margin = lhs - rhs;
    let holds = margin >= -COERCIVITY_TOL * lhs.abs().max(rhs.abs()).max(1e-300);

    let mut cutoff_checks = Vec::new();
    for &radius in cutoff_radii {
        let chi = Cutoff::new(u.grid(), radius)?;
        let cut = chi.apply(u)?;
        let p_cut =
            interaction_functional(params, &cut, w, riesz, ops).map_err(DiagnosticsError::from)?;
        let lhs_cut = ops.grad_norm_sq(&cut)? - coeff * p_cut;
        let rhs_cut = delta_prime * p_cut;
        cutoff_checks.push(CutoffCheck {
            radius,
            mass_monotone: cut.l2_norm_sq() <= mass_u * (1.0 + 1e-14),
            interaction_monotone: p_cut <= p_u * (1.0 + 1e-12),
            lhs: lhs_cut,
            rhs: rhs_cut,
            holds: lhs_cut - rhs_cut
                >= -COERCIVITY_TOL * lhs_cut.abs().max(rhs_cut.abs()).max(1e-300),
        });
    }

    Ok(CoercivityReport {
        applicable,
        delta,
        delta_prime,
        threshold_ratio,
        lhs,
        rhs,
        margin,
        holds,
        cutoff_checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    Decaying,
    Flat,
    Growing,
}

/// Classifier verdict over a diagnostics series, with the numeric margins
/// that produced each boolean.
#[derive(Debug, Clone, Serialize)]
pub struct ClassifierVerdict {
    /// `M(u₀)^{σc} E(u₀) < M(Q)^{σc} E₀(Q)`
    pub below_mass_energy: bool,
    pub mass_energy_margin: f64,
    /// `||u₀||^{σc} ||Λu₀|| < ||Q||^{σc} ||∇Q||`
    pub below_gradient: bool,
    pub gradient_margin: f64,
    /// `sup_t P(u) M(u)^{σc} < P(Q) M(Q)^{σc}`
    pub theorem_condition_held: bool,
    pub theorem_margin: f64,
    pub evacuation_trend: Trend,
    /// Least-squares slope of `log(local mass)` over the last half of the run.
    pub trend_slope: f64,
    pub blowup_flag: bool,
}

/// Per-unit-time slope thresholds separating decaying/flat/growing.
const TREND_THRESHOLD: f64 = 1e-2;

/// Classify a completed (or truncated) run against the ground-state
/// thresholds. The evacuation trend is fitted on the first monitored radius.
pub fn classify(
    series: &DiagnosticsSeries,
    gs: &GroundState,
    params: &ProblemParams,
) -> Result<ClassifierVerdict, DiagnosticsError> {
    let first = series.samples.first().ok_or(DiagnosticsError::EmptySeries)?;

    let me_threshold = gs.mass.powf(params.sigma_c) * gs.energy0;
    let me_value = first.record.mass.powf(params.sigma_c) * first.record.energy;
    let mass_energy_margin = (me_threshold - me_value) / me_threshold.abs().max(1e-300);

    let grad_threshold = gs.mass.sqrt().powf(params.sigma_c) * gs.grad_norm;
    let grad_value = first.record.mass.sqrt().powf(params.sigma_c) * first.record.lambda_norm;
    let gradient_margin = (grad_threshold - grad_value) / grad_threshold;

    let p_threshold = gs.interaction * gs.mass.powf(params.sigma_c);
    let sup_p = series
        .samples
        .iter()
        .map(|s| s.record.interaction * s.record.mass.powf(params.sigma_c))
        .fold(f64::NEG_INFINITY, f64::max);
    let theorem_margin = (p_threshold - sup_p) / p_threshold;

    let (trend_slope, evacuation_trend) = fit_trend(series);

    let kin0 = first.record.kinetic;
    let gradient_doubled = series
        .samples
        .iter()
        .any(|s| s.record.kinetic >= 4.0 * kin0 && kin0 > 0.0);
    let blowup_flag = gradient_doubled || series.nonfinite_at.is_some();

    Ok(ClassifierVerdict {
        below_mass_energy: me_value < me_threshold,
        mass_energy_margin,
        below_gradient: grad_value < grad_threshold,
        gradient_margin,
        theorem_condition_held: sup_p < p_threshold,
        theorem_margin,
        evacuation_trend,
        trend_slope,
        blowup_flag,
    })
}

/// Least-squares slope of `log(local_mass + floor)` over the last half of
/// the samples.
fn fit_trend(series: &DiagnosticsSeries) -> (f64, Trend) {
    const FLOOR: f64 = 1e-30;
    let m = series.samples.len();
    if m < 3 || series.local_radii.is_empty() {
        return (0.0, Trend::Flat);
    }
    let tail = &series.samples[m / 2..];
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .map(|s| (s.t, (s.local_mass[0] + FLOOR).ln()))
        .collect();
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, y) in &pts {
        num += (t - mean_t) * (y - mean_y);
        den += (t - mean_t) * (t - mean_t);
    }
    if den == 0.0 {
        return (0.0, Trend::Flat);
    }
    let slope = num / den;
    let trend = if slope < -TREND_THRESHOLD {
        Trend::Decaying
    } else if slope > TREND_THRESHOLD {
        Trend::Growing
    } else {
        Trend::Flat
    };
    (slope, trend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{DiagnosticsConfig, DiagnosticsSample};
    use crate::functionals::FunctionalRecord;
    use crate::ground_state::{solve, SolveOptions};
    use crate::spectral::GridSpec;
    use once_cell::sync::Lazy;

    struct Setup {
        params: ProblemParams,
        grid: GridSpec,
        gs: GroundState,
    }

    static SETUP: Lazy<Setup> = Lazy::new(|| {
        let params = ProblemParams::derive(2.0, 0.5, 2.5).unwrap();
        let grid = GridSpec::new(32, 12.0, true).unwrap();
        let gs = solve(&params, &grid, &SolveOptions::default()).unwrap();
        Setup { params, grid, gs }
    });

    fn series_from_record(record: FunctionalRecord, local_mass: Vec<f64>) -> DiagnosticsSeries {
        let config = DiagnosticsConfig {
            local_radii: vec![5.0],
            virial: None,
        };
        let mut series = DiagnosticsSeries::new(&config);
        series.push(DiagnosticsSample {
            t: 0.0,
            step: 0,
            record,
            local_mass,
            local_interaction: vec![0.0],
            morawetz_action: 0.0,
        });
        series
    }

    #[test]
    fn small_data_is_below_both_thresholds() {
        let s = &SETUP;
        let mut ops = SpectralOps::new(&s.grid);
        let w = WeightCache::new(&s.grid, s.params.b, 0.0).unwrap();
        let riesz = RieszOp::for_params(&s.grid, &s.params);
        let u = s.gs.q.scaled(0.1);
        let rec = crate::functionals::evaluate(
            &s.params,
            &u,
            &crate::functionals::Potential::zero(&s.grid),
            &w,
            &riesz,
            &mut ops,
        )
        .unwrap();
        let series = series_from_record(rec, vec![local_mass_of(&u)]);
        let verdict = classify(&series, &s.gs, &s.params).unwrap();
        assert!(verdict.below_mass_energy && verdict.mass_energy_margin > 0.0);
        assert!(verdict.below_gradient && verdict.gradient_margin > 0.0);
        assert!(verdict.theorem_condition_held);
        assert!(!verdict.blowup_flag);
    }

    fn local_mass_of(u: &Field) -> f64 {
        crate::diagnostics::local_mass(u, 5.0)
    }

    #[test]
    fn ground_state_saturates_gradient_threshold() {
        let s = &SETUP;
        let mut ops = SpectralOps::new(&s.grid);
        let w = WeightCache::new(&s.grid, s.params.b, 0.0).unwrap();
        let riesz = RieszOp::for_params(&s.grid, &s.params);
        let rec = crate::functionals::evaluate(
            &s.params,
            &s.gs.q,
            &crate::functionals::Potential::zero(&s.grid),
            &w,
            &riesz,
            &mut ops,
        )
        .unwrap();
        let series = series_from_record(rec, vec![local_mass_of(&s.gs.q)]);
        let verdict = classify(&series, &s.gs, &s.params).unwrap();
        // Q saturates its own threshold: strict inequality must fail
        assert!(!verdict.below_gradient);
        assert!(verdict.gradient_margin.abs() < 1e-10);
    }

    #[test]
    fn negative_energy_data_fails_mass_energy_gate() {
        let s = &SETUP;
        let mut rec = FunctionalRecord::zero();
        rec.mass = 1.0;
        rec.energy = -0.5;
        rec.kinetic = 1.0;
        rec.lambda_norm = 1.0;
        let series = series_from_record(rec, vec![1.0]);
        let verdict = classify(&series, &s.gs, &s.params).unwrap();
        assert!(!verdict.below_mass_energy);
    }

    #[test]
    fn empty_series_is_an_error() {
        let s = &SETUP;
        let config = DiagnosticsConfig::default();
        let series = DiagnosticsSeries::new(&config);
        assert!(matches!(
            classify(&series, &s.gs, &s.params),
            Err(DiagnosticsError::EmptySeries)
        ));
    }

    #[test]
    fn coercivity_holds_for_half_ground_state() {
        let s = &SETUP;
        let mut ops = SpectralOps::new(&s.grid);
        let w = WeightCache::new(&s.grid, s.params.b, 0.0).unwrap();
        let riesz = RieszOp::for_params(&s.grid, &s.params);
        let u = s.gs.q.scaled(0.5);
        // measured threshold ratio for u = Q/2 is 2^{-(2p + 2σc)}
        let ratio = 0.5f64.powf(2.0 * s.params.p + 2.0 * s.params.sigma_c);
        let delta = 1.0 - ratio;
        let report = coercivity_check(
            &s.params, &u, &s.gs, delta, &[2.0, 4.0, 8.0], &w, &riesz, &mut ops,
        )
        .unwrap();
        assert!(report.applicable, "ratio = {}", report.threshold_ratio);
        assert!(report.holds, "margin = {}", report.margin);
        for c in &report.cutoff_checks {
            assert!(c.mass_monotone && c.interaction_monotone && c.holds);
        }
    }

    #[test]
    fn coercivity_trivial_for_zero_field() {
        let s = &SETUP;
        let mut ops = SpectralOps::new(&s.grid);
        let w = WeightCache::new(&s.grid, s.params.b, 0.0).unwrap();
        let riesz = RieszOp::for_params(&s.grid, &s.params);
        let u = Field::zeros(&s.grid);
        let report =
            coercivity_check(&s.params, &u, &s.gs, 0.5, &[2.0], &w, &riesz, &mut ops).unwrap();
        assert!(report.applicable && report.holds);
        assert_eq!(report.lhs, 0.0);
    }

    #[test]
    fn trend_fitting_detects_decay_and_growth() {
        let config = DiagnosticsConfig {
            local_radii: vec![5.0],
            virial: None,
        };
        let mut decaying = DiagnosticsSeries::new(&config);
        let mut growing = DiagnosticsSeries::new(&config);
        for k in 0..20 {
            let t = k as f64 * 0.5;
            let mk = |v: f64| DiagnosticsSample {
                t,
                step: k,
                record: FunctionalRecord::zero(),
                local_mass: vec![v],
                local_interaction: vec![0.0],
                morawetz_action: 0.0,
            };
            decaying.push(mk((-0.3 * t).exp()));
            growing.push(mk((0.3 * t).exp()));
        }
        let (slope_d, trend_d) = fit_trend(&decaying);
        assert_eq!(trend_d, Trend::Decaying);
        assert!((slope_d + 0.3).abs() < 1e-9);
        let (_, trend_g) = fit_trend(&growing);
        assert_eq!(trend_g, Trend::Growing);
    }
}
