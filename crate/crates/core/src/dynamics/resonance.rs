//! Resonance classification of coefficient trajectories and the
//! unique-continuation consistency flag.

use super::CoefficientTrajectory;
use crate::error::{Error, Result};
use crate::hermite::OperatorParams;
use crate::poly::rat_to_f64;
use serde::Serialize;

#[derive(Clone, Copy, Debug)]
pub struct ResonanceOptions {
    /// `None` uses the whole trajectory.
    pub window: Option<(f64, f64)>,
    /// Indices whose log-slope is within this of the largest are dominant.
    pub margin: f64,
    /// Relative tolerance on the level rate.
    pub rate_tol: f64,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        ResonanceOptions {
            window: None,
            margin: 0.05,
            rate_tol: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonanceStatus {
    /// Dominant set shares one level and decays at that level's rate.
    Resonant,
    /// Dominant set mixes levels or misses the level rate.
    NonResonant,
    /// A level-0 coefficient dominates: `û(0, τ)` stays nonzero, no multiple zero.
    NonDegenerate,
    /// Less than one decade of decay over the window, or no nonzero data.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResonanceReport {
    pub schema: &'static str,
    pub status: ResonanceStatus,
    pub window: (f64, f64),
    pub dominant: Vec<usize>,
    pub dominant_labels: Vec<String>,
    pub level: Option<u32>,
    pub fitted_rate: Option<f64>,
    pub predicted_rate: Option<f64>,
    pub rate_deviation: Option<f64>,
    /// Log-slope margin between the dominant set and the next index.
    pub subdominant_gap: Option<f64>,
    pub slopes: Vec<Option<f64>>,
}

pub fn detect_resonance(traj: &CoefficientTrajectory, opts: &ResonanceOptions) -> Result<ResonanceReport> {
    if traj.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    let window = opts
        .window
        .unwrap_or((traj.taus[0], *traj.taus.last().unwrap()));
    if window.0 >= window.1 || window.0 < traj.taus[0] - 1e-12 || window.1 > traj.taus.last().unwrap() + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "window {window:?} is not inside the trajectory [{}, {}]",
            traj.taus[0],
            traj.taus.last().unwrap()
        )));
    }
    let slopes: Vec<Option<f64>> = (0..traj.labels.len()).map(|j| traj.log_slope(j, window)).collect();
    let mut report = ResonanceReport {
        schema: crate::SCHEMA,
        status: ResonanceStatus::Inconclusive,
        window,
        dominant: Vec::new(),
        dominant_labels: Vec::new(),
        level: None,
        fitted_rate: None,
        predicted_rate: None,
        rate_deviation: None,
        subdominant_gap: None,
        slopes: slopes.clone(),
    };
    let Some(top) = slopes.iter().flatten().copied().reduce(f64::max) else {
        return Ok(report);
    };
    let dominant: Vec<usize> = slopes
        .iter()
        .enumerate()
        .filter_map(|(j, s)| s.filter(|s| *s >= top - opts.margin).map(|_| j))
        .collect();
    let rest = slopes
        .iter()
        .enumerate()
        .filter(|(j, _)| !dominant.contains(j))
        .filter_map(|(_, s)| *s)
        .reduce(f64::max);
    report.subdominant_gap = rest.map(|r| top - r);
    report.dominant_labels = dominant.iter().map(|&j| traj.labels[j].clone()).collect();
    let fitted = dominant.iter().map(|&j| slopes[j].unwrap()).sum::<f64>() / dominant.len() as f64;
    report.fitted_rate = Some(fitted);
    report.dominant = dominant.clone();

    let levels: Vec<u32> = dominant.iter().map(|&j| traj.levels[j]).collect();
    if levels.contains(&0) {
        report.status = ResonanceStatus::NonDegenerate;
        report.level = Some(0);
        return Ok(report);
    }
    // one decade of decay of the dominant envelope
    if -fitted * (window.1 - window.0) < std::f64::consts::LN_10 {
        return Ok(report);
    }
    if levels.iter().all(|&k| k == levels[0]) {
        let k = levels[0];
        let params = OperatorParams { m: traj.m, dim: 3 };
        let predicted = rat_to_f64(&params.rescaled_rate(k));
        let dev = (fitted - predicted).abs() / predicted.abs();
        report.level = Some(k);
        report.predicted_rate = Some(predicted);
        report.rate_deviation = Some(dev);
        report.status = if dev <= opts.rate_tol {
            ResonanceStatus::Resonant
        } else {
            ResonanceStatus::NonResonant
        };
    } else {
        report.status = ResonanceStatus::NonResonant;
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    /// Resonant rates and the nodal set converges to the dominant Hermite zero set.
    Pass,
    /// Resonant rates but the nodal set stays away from the Hermite zero set.
    Inconsistent,
    /// Nothing to test: the field is zero.
    Vacuous,
    /// The trajectory is not resonant, so the diagnostic does not apply.
    NotApplicable,
}

/// Mirrors the contrapositive of the unique-continuation argument: a
/// resonant trajectory must have a nodal set approaching the dominant
/// Hermite zero set. `distances` are `(τ, Hausdorff distance)` pairs;
/// `grid_tol` allows non-monotonicity up to the extraction resolution.
pub fn unique_continuation_diagnostic(
    report: &ResonanceReport,
    distances: &[(f64, f64)],
    tol: f64,
    grid_tol: f64,
) -> Verdict {
    if report.dominant.is_empty() {
        return Verdict::Vacuous;
    }
    if report.status != ResonanceStatus::Resonant {
        return Verdict::NotApplicable;
    }
    let Some(&(_, last)) = distances.last() else {
        return Verdict::Inconsistent;
    };
    let monotone = distances
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + grid_tol && w[1].1.is_finite());
    if monotone && last <= tol {
        Verdict::Pass
    } else {
        Verdict::Inconsistent
    }
}
