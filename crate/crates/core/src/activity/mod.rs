//! Continuous-time activity curves over normalized project time.
//!
//! An [`ActivityCurve`] is a probability density on [0, 1] built by
//! weighted Gaussian kernel density estimation with boundary reflection
//! at 0 and 1, so no probability mass leaks outside the project window.
//! Curves evaluate pointwise in closed form; the cumulative distribution
//! uses the erf terms of the reflected kernels, no grid storage needed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::{normal_cdf, normal_pdf, silverman_bandwidth, sj_bandwidth};

#[derive(Debug, Error, PartialEq)]
pub enum CurveError {
    #[error("no events to build a curve from")]
    NoEvents,
    #[error("total event weight is zero")]
    ZeroTotalWeight,
    #[error("event time {0} outside [0,1]")]
    EventOutOfDomain(f64),
    #[error("all timestamps are equal")]
    DegenerateTimeRange,
    #[error("x = {0} outside [0,1]")]
    OutOfDomain(f64),
    #[error("invalid segment [{0}, {1}]")]
    InvalidSegment(f64, f64),
    #[error("expected {expected} weights, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("mixture weights are all zero")]
    AllZeroWeights,
    #[error("negative mixture weight {0}")]
    NegativeWeight(f64),
    #[error("fixed bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),
    #[error("activity {0} missing from a project")]
    MissingActivity(String),
}

/// A point event on normalized project time with a nonnegative weight
/// (hours for issue activities, 1.0 for commits).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub weight: f64,
}

impl Event {
    pub fn new(time: f64, weight: f64) -> Self {
        Self { time, weight }
    }

    /// Unit-weight event, the commit case.
    pub fn unit(time: f64) -> Self {
        Self { time, weight: 1.0 }
    }
}

/// Bandwidth selection rule for curve construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthRule {
    /// Sheather--Jones plug-in; falls back to Silverman below 5 points.
    SheatherJones,
    Silverman,
    Fixed(f64),
}

impl Default for BandwidthRule {
    fn default() -> Self {
        BandwidthRule::SheatherJones
    }
}

/// Bandwidth used when the selected rule degenerates (e.g. a single
/// event or all events at the same instant).
const DEGENERATE_BANDWIDTH: f64 = 0.05;

/// One KDE component: kernel centers with normalized weights sharing a
/// bandwidth. Mixtures hold several groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelGroup {
    pub bandwidth: f64,
    /// (time, weight) pairs; group weights across a curve sum to 1.
    pub points: Vec<(f64, f64)>,
}

/// Normalized probability density over [0, 1] project time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityCurve {
    groups: Vec<KernelGroup>,
}

/// Weighted KDE over events with reflection at both boundaries.
///
/// The density is invariant under uniform scaling of all weights and
/// under permutation of the event list.
pub fn build_curve(events: &[Event], rule: BandwidthRule) -> Result<ActivityCurve, CurveError> {
    if events.is_empty() {
        return Err(CurveError::NoEvents);
    }
    for event in events {
        if !(0.0..=1.0).contains(&event.time) || !event.time.is_finite() {
            return Err(CurveError::EventOutOfDomain(event.time));
        }
    }
    let total: f64 = events.iter().map(|e| e.weight).sum();
    if !(total > 0.0) {
        return Err(CurveError::ZeroTotalWeight);
    }
    let times: Vec<f64> = events.iter().map(|e| e.time).collect();
    let bandwidth = match rule {
        BandwidthRule::Fixed(h) => {
            if !(h > 0.0) || !h.is_finite() {
                return Err(CurveError::InvalidBandwidth(h));
            }
            h
        }
        BandwidthRule::Silverman => silverman_bandwidth(&times).unwrap_or(DEGENERATE_BANDWIDTH),
        BandwidthRule::SheatherJones => sj_bandwidth(&times).unwrap_or(DEGENERATE_BANDWIDTH),
    };
    let points = events
        .iter()
        .map(|e| (e.time, e.weight / total))
        .collect();
    Ok(ActivityCurve {
        groups: vec![KernelGroup { bandwidth, points }],
    })
}

/// Number of reflection images needed so the truncation error of the
/// image sum stays far below the 1e-6 normalization tolerance.
fn image_range(h: f64) -> i64 {
    (((8.0 * h + 1.0) / 2.0).ceil() as i64 + 1).max(1)
}

fn reflected_density(x: f64, t: f64, h: f64) -> f64 {
    let k_max = image_range(h);
    let mut sum = 0.0;
    for k in -k_max..=k_max {
        let base = 2.0 * k as f64;
        sum += normal_pdf((x - (base + t)) / h);
        sum += normal_pdf((x - (base - t)) / h);
    }
    sum / h
}

/// Integral of the reflected kernel from 0 to x.
fn reflected_cdf(x: f64, t: f64, h: f64) -> f64 {
    let k_max = image_range(h);
    let mut sum = 0.0;
    for k in -k_max..=k_max {
        let base = 2.0 * k as f64;
        for center in [base + t, base - t] {
            sum += normal_cdf((x - center) / h) - normal_cdf(-center / h);
        }
    }
    sum
}

impl ActivityCurve {
    /// Density at `x` in [0, 1].
    pub fn density(&self, x: f64) -> f64 {
        self.groups
            .iter()
            .map(|g| {
                g.points
                    .iter()
                    .map(|&(t, w)| w * reflected_density(x, t, g.bandwidth))
                    .sum::<f64>()
            })
            .sum()
    }

    /// Cumulative distribution F(x) = integral of the density over [0, x].
    pub fn cumulative(&self, x: f64) -> Result<f64, CurveError> {
        if !(0.0..=1.0).contains(&x) || !x.is_finite() {
            return Err(CurveError::OutOfDomain(x));
        }
        Ok(self.cumulative_unchecked(x))
    }

    fn cumulative_unchecked(&self, x: f64) -> f64 {
        self.groups
            .iter()
            .map(|g| {
                g.points
                    .iter()
                    .map(|&(t, w)| w * reflected_cdf(x, t, g.bandwidth))
                    .sum::<f64>()
            })
            .sum()
    }

    /// Probability mass on the segment [a, b].
    pub fn mass(&self, a: f64, b: f64) -> Result<f64, CurveError> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(CurveError::InvalidSegment(a, b));
        }
        Ok(self.cumulative_unchecked(b) - self.cumulative_unchecked(a))
    }

    /// Bandwidth of a plain (single-group) curve.
    pub fn bandwidth(&self) -> Option<f64> {
        match self.groups.as_slice() {
            [only] => Some(only.bandwidth),
            _ => None,
        }
    }

    pub fn kernel_groups(&self) -> &[KernelGroup] {
        &self.groups
    }

    /// (x, f(x), F(x)) sampled on an `n`-point uniform grid over [0, 1].
    pub fn sample_grid(&self, n: usize) -> Vec<(f64, f64, f64)> {
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                (x, self.density(x), self.cumulative_unchecked(x))
            })
            .collect()
    }
}

/// Convex combination of curves; weights are normalized to sum 1.
pub fn mixture(curves: &[ActivityCurve], weights: &[f64]) -> Result<ActivityCurve, CurveError> {
    if curves.len() != weights.len() {
        return Err(CurveError::LengthMismatch {
            expected: curves.len(),
            got: weights.len(),
        });
    }
    if curves.is_empty() {
        return Err(CurveError::NoEvents);
    }
    if let Some(&w) = weights.iter().find(|&&w| w < 0.0 || !w.is_finite()) {
        return Err(CurveError::NegativeWeight(w));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(CurveError::AllZeroWeights);
    }
    let mut groups = Vec::new();
    for (curve, &weight) in curves.iter().zip(weights) {
        let share = weight / total;
        if share == 0.0 {
            continue;
        }
        for group in &curve.groups {
            groups.push(KernelGroup {
                bandwidth: group.bandwidth,
                points: group
                    .points
                    .iter()
                    .map(|&(t, w)| (t, w * share))
                    .collect(),
            });
        }
    }
    Ok(ActivityCurve { groups })
}

/// Affine map of timestamps onto [0, 1] (min to 0, max to 1).
pub fn normalize_project_time(timestamps: &[f64]) -> Result<Vec<f64>, CurveError> {
    let min = timestamps.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = timestamps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if timestamps.len() < 2 || !(max > min) {
        return Err(CurveError::DegenerateTimeRange);
    }
    Ok(timestamps.iter().map(|&t| (t - min) / (max - min)).collect())
}

/// Issue-tracking activity kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IssueActivity {
    #[serde(rename = "req")]
    Requirements,
    #[serde(rename = "dev")]
    Development,
    #[serde(rename = "desc")]
    Descoping,
}

impl IssueActivity {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "req" | "requirements" => Some(Self::Requirements),
            "dev" | "development" => Some(Self::Development),
            "desc" | "descoping" => Some(Self::Descoping),
            _ => None,
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            Self::Requirements => "req",
            Self::Development => "dev",
            Self::Descoping => "desc",
        }
    }
}

/// One issue-tracking effort entry on normalized project time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IssueRecord {
    pub activity: IssueActivity,
    /// Normalized project time in [0, 1].
    pub time: f64,
    /// Effort in hours, strictly positive.
    pub hours: f64,
}

/// Raw issue CSV row (timestamp not yet normalized).
/// Columns: `activity` in {req, dev, desc}, `timestamp`, `hours`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawIssueRow {
    pub activity: IssueActivity,
    pub timestamp: f64,
    pub hours: f64,
}

/// Parse the issue CSV format; hours must be positive.
pub fn read_issue_csv(bytes: &[u8]) -> Result<Vec<RawIssueRow>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(bytes);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let col = |name: &str| -> Result<usize, String> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("missing column {name}"))
    };
    let (activity_col, timestamp_col, hours_col) = (col("activity")?, col("timestamp")?, col("hours")?);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let get = |i: usize| record.get(i).unwrap_or("").trim();
        let activity = IssueActivity::parse(get(activity_col))
            .ok_or_else(|| format!("unknown activity {:?}", get(activity_col)))?;
        let timestamp: f64 = get(timestamp_col)
            .parse()
            .map_err(|_| format!("bad timestamp {:?}", get(timestamp_col)))?;
        let hours: f64 = get(hours_col)
            .parse()
            .map_err(|_| format!("bad hours {:?}", get(hours_col)))?;
        if !(hours > 0.0) {
            return Err(format!("hours must be positive, got {hours}"));
        }
        rows.push(RawIssueRow {
            activity,
            timestamp,
            hours,
        });
    }
    Ok(rows)
}

/// Severity-weighted mixture curves per activity across projects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessModel {
    activities: BTreeMap<String, ActivityCurve>,
    /// Normalized project weights used to build the mixtures.
    weights: Vec<f64>,
}

impl ProcessModel {
    /// Combine per-project activity curves into one mixture per activity.
    ///
    /// Every project must provide every activity named in any project.
    pub fn from_projects(
        projects: &[BTreeMap<String, ActivityCurve>],
        weights: &[f64],
    ) -> Result<Self, CurveError> {
        if projects.len() != weights.len() {
            return Err(CurveError::LengthMismatch {
                expected: projects.len(),
                got: weights.len(),
            });
        }
        if projects.is_empty() {
            return Err(CurveError::NoEvents);
        }
        let names: Vec<String> = projects
            .iter()
            .flat_map(|p| p.keys().cloned())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(CurveError::AllZeroWeights);
        }
        let mut activities = BTreeMap::new();
        for name in &names {
            let mut curves = Vec::new();
            for project in projects {
                let curve = project
                    .get(name)
                    .ok_or_else(|| CurveError::MissingActivity(name.clone()))?;
                curves.push(curve.clone());
            }
            activities.insert(name.clone(), mixture(&curves, weights)?);
        }
        Ok(Self {
            activities,
            weights: weights.iter().map(|w| w / total).collect(),
        })
    }

    /// Single-project model (weight 1), useful as a fixture and for
    /// wrapping observed projects in the same type.
    pub fn from_single(activities: BTreeMap<String, ActivityCurve>) -> Self {
        Self {
            activities,
            weights: vec![1.0],
        }
    }

    pub fn activity(&self, name: &str) -> Option<&ActivityCurve> {
        self.activities.get(name)
    }

    pub fn activities(&self) -> &BTreeMap<String, ActivityCurve> {
        &self.activities
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}
