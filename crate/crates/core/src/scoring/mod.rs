//! Calibrated score transforms: simulate random processes, measure their
//! deviations from a process model, and fit a smooth complementary CDF
//! that maps raw deviations to comparable scores in (0, 1).
//!
//! The transform stores the distances `D_j = |x_j - i|` from an ideal
//! value `i` together with a kernel bandwidth `h`; a raw value `x` scores
//!
//! ```text
//! score(x) = 1 - (1/N) * sum_j Phi((|x - i| - D_j) / h)
//! ```
//!
//! with `Phi` the standard normal CDF. Scores are high for small
//! distances from the ideal and decrease strictly as the distance grows;
//! over the calibration population they are approximately uniform, which
//! makes scores of different features directly comparable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity::{build_curve, ActivityCurve, BandwidthRule, CurveError, Event, ProcessModel};
use crate::deviation::{compute_one, neg_log_jsd, DeviationError, DeviationKind, FeatureDef};
use crate::stats::{self, normal_cdf, Kde1d};

pub use crate::stats::sj_bandwidth;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("degenerate sample: distances have no spread")]
    DegenerateSample,
    #[error("empty sample")]
    EmptySamples,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("invalid calibration config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Deviation(#[from] DeviationError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// How the reference (ideal) value of a feature is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdealValue {
    /// Theoretical best value, fixed a priori.
    Utopian(f64),
    /// Derived from the calibration sample.
    PracticalFromSamples(PracticalKind),
    UserDefined(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PracticalKind {
    Sup,
    Inf,
    Expectation,
    Mode,
    Median,
}

/// Resolve an ideal-value specification against a sample.
pub fn resolve_ideal(kind: &IdealValue, samples: &[f64]) -> Result<f64, ScoringError> {
    match kind {
        IdealValue::Utopian(v) | IdealValue::UserDefined(v) => Ok(*v),
        IdealValue::PracticalFromSamples(practical) => {
            if samples.is_empty() {
                return Err(ScoringError::EmptySamples);
            }
            Ok(match practical {
                PracticalKind::Sup => samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                PracticalKind::Inf => samples.iter().cloned().fold(f64::INFINITY, f64::min),
                PracticalKind::Expectation => stats::mean(samples),
                PracticalKind::Median => stats::quantile(samples, 0.5),
                PracticalKind::Mode => Kde1d::fit_silverman(samples.to_vec()).mode(1024),
            })
        }
    }
}

/// A calibrated complementary-CDF score transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTransform {
    pub feature_id: String,
    /// Resolved ideal value.
    pub ideal: f64,
    /// Sorted distances |x_j - ideal| of the calibration sample.
    pub distances: Vec<f64>,
    pub bandwidth: f64,
    pub n: usize,
}

impl ScoreTransform {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("transform serializes")
    }
}

/// Fit a transform from raw calibration values and an ideal-value rule.
///
/// Distances are stored sorted; the bandwidth is fitted on the distance
/// sample. Zero-spread distances fail loudly instead of producing a
/// constant score.
pub fn calibrate(
    feature_id: impl Into<String>,
    raw_values: &[f64],
    ideal: &IdealValue,
    rule: BandwidthRule,
) -> Result<ScoreTransform, ScoringError> {
    if raw_values.len() < 2 {
        return Err(ScoringError::TooFewSamples {
            need: 2,
            got: raw_values.len(),
        });
    }
    let ideal = resolve_ideal(ideal, raw_values)?;
    let mut distances: Vec<f64> = raw_values.iter().map(|x| (x - ideal).abs()).collect();
    distances.sort_by(|a, b| a.total_cmp(b));
    let bandwidth = match rule {
        BandwidthRule::Fixed(h) if h > 0.0 && h.is_finite() => h,
        BandwidthRule::Fixed(h) => {
            return Err(ScoringError::InvalidConfig(format!("bad bandwidth {h}")))
        }
        BandwidthRule::Silverman => {
            stats::silverman_bandwidth(&distances).map_err(|_| ScoringError::DegenerateSample)?
        }
        BandwidthRule::SheatherJones => {
            stats::sj_bandwidth(&distances).map_err(|_| ScoringError::DegenerateSample)?
        }
    };
    Ok(ScoreTransform {
        feature_id: feature_id.into(),
        ideal,
        n: distances.len(),
        distances,
        bandwidth,
    })
}

/// Score a raw value: strictly decreasing in |x - ideal|, in (0, 1).
pub fn to_score(transform: &ScoreTransform, x: f64) -> f64 {
    let distance = (x - transform.ideal).abs();
    let sum: f64 = transform
        .distances
        .iter()
        .map(|&d| normal_cdf((distance - d) / transform.bandwidth))
        .sum();
    1.0 - sum / transform.n as f64
}

/// Divergence-kind features are scored on the negative log divergence;
/// everything else is scored raw.
pub fn score_input(kind: DeviationKind, raw: f64) -> f64 {
    match kind {
        DeviationKind::SegmentJsd => neg_log_jsd(raw),
        _ => raw,
    }
}

/// Default ideal-value rule per feature kind: correlation has the utopian
/// best 1, area has the theoretical minimum 0, and divergence uses the
/// best (sup of negative log divergence) observed during calibration.
pub fn default_ideal(kind: DeviationKind) -> IdealValue {
    match kind {
        DeviationKind::SegmentCorrelation => IdealValue::Utopian(1.0),
        DeviationKind::SegmentArea => IdealValue::Utopian(0.0),
        DeviationKind::SegmentJsd => IdealValue::PracticalFromSamples(PracticalKind::Sup),
    }
}

/// One-sample Kolmogorov--Smirnov statistic against Uniform(0, 1).
pub fn ks_uniformity(scores: &[f64]) -> Result<f64, ScoringError> {
    if scores.len() < 20 {
        return Err(ScoringError::TooFewSamples {
            need: 20,
            got: scores.len(),
        });
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut statistic: f64 = 0.0;
    for (i, &score) in sorted.iter().enumerate() {
        let cdf = score.clamp(0.0, 1.0);
        let upper = (i + 1) as f64 / n - cdf;
        let lower = cdf - i as f64 / n;
        statistic = statistic.max(upper).max(lower);
    }
    Ok(statistic.clamp(0.0, 1.0))
}

/// Configuration for the random-process simulation behind calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Number of simulated processes (>= 10).
    pub n_processes: usize,
    pub seed: u64,
    /// Inclusive (min, max) number of events per simulated process.
    pub events_per_process: (usize, usize),
    pub bandwidth_rule: BandwidthRule,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            n_processes: 10_000,
            seed: 1,
            events_per_process: (10, 100),
            bandwidth_rule: BandwidthRule::SheatherJones,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<(), ScoringError> {
        if self.n_processes < 10 {
            return Err(ScoringError::InvalidConfig(format!(
                "n_processes must be >= 10, got {}",
                self.n_processes
            )));
        }
        let (min, max) = self.events_per_process;
        if min < 1 || max < min {
            return Err(ScoringError::InvalidConfig(format!(
                "events_per_process ({min}, {max}) invalid"
            )));
        }
        Ok(())
    }
}

/// Simulate random processes as plausible activity curves.
///
/// Process `j` uses its own random substream keyed by `j`, so the output
/// is identical regardless of evaluation order: event count uniform in
/// the configured range, times i.i.d. uniform on [0, 1], weights i.i.d.
/// uniform on (0, 1], pushed through the regular curve construction.
pub fn simulate_processes(config: &CalibrationConfig) -> Result<Vec<ActivityCurve>, ScoringError> {
    config.validate()?;
    (0..config.n_processes)
        .map(|j| Ok(simulate_one(config, j as u64)?))
        .collect()
}

fn simulate_one(config: &CalibrationConfig, index: u64) -> Result<ActivityCurve, CurveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index.wrapping_add(1));
    let (min, max) = config.events_per_process;
    let count = rng.random_range(min..=max);
    let events: Vec<Event> = (0..count)
        .map(|_| {
            let time = rng.random::<f64>();
            let weight = 1.0 - rng.random::<f64>(); // uniform on (0, 1]
            Event::new(time, weight)
        })
        .collect();
    build_curve(&events, config.bandwidth_rule)
}

/// Per-feature calibration summary for the report CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReportRow {
    pub feature_id: String,
    pub n: usize,
    pub ideal: f64,
    pub bandwidth: f64,
    pub min_distance: f64,
    pub max_distance: f64,
}

impl CalibrationReportRow {
    pub fn from_transform(t: &ScoreTransform) -> Self {
        Self {
            feature_id: t.feature_id.clone(),
            n: t.n,
            ideal: t.ideal,
            bandwidth: t.bandwidth,
            min_distance: *t.distances.first().expect("non-empty distances"),
            max_distance: *t.distances.last().expect("non-empty distances"),
        }
    }
}

/// Full calibration pipeline: simulate processes, measure every feature
/// definition against the process model, and fit one transform each.
pub fn calibrate_features(
    pm: &ProcessModel,
    feature_defs: &[FeatureDef],
    config: &CalibrationConfig,
) -> Result<Vec<ScoreTransform>, ScoringError> {
    let curves = simulate_processes(config)?;
    feature_defs
        .iter()
        .map(|def| calibrate_one_feature(pm, def, &curves, config.bandwidth_rule))
        .collect()
}

fn calibrate_one_feature(
    pm: &ProcessModel,
    def: &FeatureDef,
    simulated: &[ActivityCurve],
    rule: BandwidthRule,
) -> Result<ScoreTransform, ScoringError> {
    let model_curve = pm
        .activity(&def.activity)
        .ok_or_else(|| DeviationError::MissingActivity(def.activity.clone()))?;
    let mut raws = Vec::with_capacity(simulated.len());
    for curve in simulated {
        let value = compute_one(model_curve, curve, def)?;
        raws.push(score_input(def.kind, value.raw));
    }
    calibrate(def.feature_id(), &raws, &default_ideal(def.kind), rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_of_single_zero_distance_at_ideal_is_half() {
        let transform = ScoreTransform {
            feature_id: "t".into(),
            ideal: 0.0,
            distances: vec![0.0],
            bandwidth: 1.0,
            n: 1,
        };
        let score = to_score(&transform, 0.0);
        assert!((score - 0.5).abs() < 1e-9, "score = {score}");
    }

    #[test]
    fn score_of_two_distances_at_midpoint_is_half() {
        // Phi(1) + Phi(-1) = 1 by symmetry
        let transform = ScoreTransform {
            feature_id: "t".into(),
            ideal: 0.0,
            distances: vec![0.0, 2.0],
            bandwidth: 1.0,
            n: 2,
        };
        let score = to_score(&transform, 1.0);
        assert!((score - 0.5).abs() < 1e-9, "score = {score}");
    }

    #[test]
    fn score_decreases_with_distance_and_vanishes_in_the_limit() {
        let transform = calibrate(
            "t",
            &[0.1, 0.4, 0.9, 1.7, 2.2],
            &IdealValue::Utopian(0.0),
            BandwidthRule::Silverman,
        )
        .unwrap();
        let mut prev = to_score(&transform, 0.0);
        assert!(prev < 1.0 && prev > 0.0);
        // stay below the float saturation point of the normal CDF
        for i in 1..24 {
            let score = to_score(&transform, i as f64 * 0.25);
            assert!(score < prev, "not strictly decreasing at step {i}");
            assert!(score > 0.0);
            prev = score;
        }
        assert!(to_score(&transform, 1e6) < 1e-12);
        // symmetric around the ideal
        let left = to_score(&transform, -0.7);
        let right = to_score(&transform, 0.7);
        assert!((left - right).abs() < 1e-15);
    }

    #[test]
    fn calibrate_stores_sorted_distances() {
        let transform = calibrate(
            "t",
            &[2.0, 0.0],
            &IdealValue::Utopian(0.0),
            BandwidthRule::Silverman,
        )
        .unwrap();
        assert_eq!(transform.distances, vec![0.0, 2.0]);
        assert_eq!(transform.n, 2);
    }

    #[test]
    fn zero_spread_distances_fail_loudly() {
        // |x - 0| identical for both values
        let err = calibrate(
            "t",
            &[-1.0, 1.0],
            &IdealValue::Utopian(0.0),
            BandwidthRule::SheatherJones,
        )
        .unwrap_err();
        assert!(matches!(err, ScoringError::DegenerateSample));
    }

    #[test]
    fn transform_round_trips_through_json() {
        let transform = calibrate(
            "corr:req:[0.10,0.30]",
            &[0.3, -0.2, 0.8, 0.5, -0.9, 0.1],
            &IdealValue::Utopian(1.0),
            BandwidthRule::SheatherJones,
        )
        .unwrap();
        let json = serde_json::to_string(&transform).unwrap();
        let back: ScoreTransform = serde_json::from_str(&json).unwrap();
        for i in 0..100 {
            let x = -2.0 + i as f64 * 0.05;
            assert_eq!(to_score(&transform, x), to_score(&back, x));
        }
    }

    #[test]
    fn resolve_ideal_statistics() {
        let xs = [1.0, 2.0, 3.0];
        let median = resolve_ideal(
            &IdealValue::PracticalFromSamples(PracticalKind::Median),
            &xs,
        )
        .unwrap();
        assert_eq!(median, 2.0);
        let expectation = resolve_ideal(
            &IdealValue::PracticalFromSamples(PracticalKind::Expectation),
            &xs,
        )
        .unwrap();
        assert_eq!(expectation, 2.0);
        // neg-log divergences: the best observed (sup) is -ln(0.01)
        let neg_logs = [-(0.1f64.ln()), -(0.01f64.ln())];
        let sup =
            resolve_ideal(&IdealValue::PracticalFromSamples(PracticalKind::Sup), &neg_logs)
                .unwrap();
        assert!((sup - 4.605170185988091).abs() < 1e-9, "sup = {sup}");
        assert!(matches!(
            resolve_ideal(&IdealValue::PracticalFromSamples(PracticalKind::Sup), &[]),
            Err(ScoringError::EmptySamples)
        ));
        assert_eq!(resolve_ideal(&IdealValue::UserDefined(7.0), &[]).unwrap(), 7.0);
    }

    #[test]
    fn ks_statistic_of_perfect_grid_is_minimal() {
        let n = 50;
        let scores: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let stat = ks_uniformity(&scores).unwrap();
        assert!(stat <= 1.0 / (2.0 * n as f64) + 1e-12, "stat = {stat}");
    }

    #[test]
    fn ks_statistic_of_constant_scores_is_half() {
        let scores = vec![0.5; 40];
        let stat = ks_uniformity(&scores).unwrap();
        assert!((stat - 0.5).abs() < 1e-12);
        assert!(matches!(
            ks_uniformity(&[0.5; 10]),
            Err(ScoringError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let config = CalibrationConfig {
            n_processes: 12,
            seed: 99,
            events_per_process: (3, 9),
            bandwidth_rule: BandwidthRule::Silverman,
        };
        let a = simulate_processes(&config).unwrap();
        let b = simulate_processes(&config).unwrap();
        assert_eq!(a, b);
        let other = simulate_processes(&CalibrationConfig {
            seed: 100,
            ..config.clone()
        })
        .unwrap();
        assert_ne!(a, other);
        for curve in &a {
            let total = curve.cumulative(1.0).unwrap();
            assert!((total - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let config = CalibrationConfig {
            n_processes: 5,
            ..CalibrationConfig::default()
        };
        assert!(matches!(
            simulate_processes(&config),
            Err(ScoringError::InvalidConfig(_))
        ));
        let config = CalibrationConfig {
            events_per_process: (4, 2),
            ..CalibrationConfig::default()
        };
        assert!(config.validate().is_err());
    }
}
