//! Deviation features between a process-model curve and an observed
//! project curve, measured on declared time segments.
//!
//! Three feature kinds are shipped: Pearson correlation of the sampled
//! densities, Jensen--Shannon divergence of the renormalized samples
//! (natural log, so the maximum is ln 2), and the absolute area between
//! the curves.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity::{ActivityCurve, ProcessModel};

#[derive(Debug, Error, PartialEq)]
pub enum DeviationError {
    #[error("invalid segment [{0}, {1}]")]
    InvalidSegment(f64, f64),
    #[error("both curves vanish on the segment")]
    ZeroMassSegment,
    #[error("activity {0} not present in both curve sets")]
    MissingActivity(String),
}

/// A labeled time segment with 0 <= a < b <= 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub label: String,
}

impl Segment {
    pub fn new(a: f64, b: f64, label: impl Into<String>) -> Result<Self, DeviationError> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(DeviationError::InvalidSegment(a, b));
        }
        Ok(Self {
            a,
            b,
            label: label.into(),
        })
    }
}

/// The shipped deviation feature kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationKind {
    SegmentCorrelation,
    SegmentJsd,
    SegmentArea,
}

impl DeviationKind {
    pub fn short_name(&self) -> &'static str {
        match self {
            Self::SegmentCorrelation => "corr",
            Self::SegmentJsd => "jsd",
            Self::SegmentArea => "area",
        }
    }
}

/// One computed deviation value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationValue {
    pub kind: DeviationKind,
    pub segment: Segment,
    pub raw: f64,
    pub grid_points: usize,
}

/// Default per-segment grid resolution (convergence-tested).
pub const DEFAULT_GRID: usize = 256;

/// One feature definition: which activity, which measure, where.
/// The same file drives calibration and assessment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub activity: String,
    pub kind: DeviationKind,
    /// [a, b] with 0 <= a < b <= 1.
    pub segment: [f64; 2],
    #[serde(default)]
    pub grid: Option<usize>,
}

impl FeatureDef {
    pub fn grid_points(&self) -> usize {
        self.grid.unwrap_or(DEFAULT_GRID).max(2)
    }

    pub fn to_segment(&self) -> Result<Segment, DeviationError> {
        Segment::new(
            self.segment[0],
            self.segment[1],
            format!("{:.2}-{:.2}", self.segment[0], self.segment[1]),
        )
    }

    /// Stable feature identifier, e.g. `corr:req:[0.10,0.30]`.
    pub fn feature_id(&self) -> String {
        format!(
            "{}:{}:[{:.2},{:.2}]",
            self.kind.short_name(),
            self.activity,
            self.segment[0],
            self.segment[1]
        )
    }
}

/// Density samples on `n` equispaced points of the segment, endpoints
/// included.
pub fn segment_samples(
    curve: &ActivityCurve,
    segment: &Segment,
    n: usize,
) -> Result<Vec<f64>, DeviationError> {
    if n < 2 {
        return Err(DeviationError::InvalidSegment(segment.a, segment.b));
    }
    let step = (segment.b - segment.a) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| curve.density(segment.a + i as f64 * step))
        .collect())
}

/// Pearson sample correlation of the two sampled densities.
///
/// Zero variance on either side yields 0 (no evidence of a linear
/// relation on the segment).
pub fn segment_correlation(
    pm: &ActivityCurve,
    project: &ActivityCurve,
    segment: &Segment,
    n: usize,
) -> Result<f64, DeviationError> {
    let xs = segment_samples(pm, segment, n)?;
    let ys = segment_samples(project, segment, n)?;
    Ok(pearson_correlation(&xs, &ys))
}

/// Pearson sample correlation; zero variance on either side yields 0.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Jensen--Shannon divergence of the renormalized density samples
/// (natural log; symmetric; in [0, ln 2]).
pub fn segment_jsd(
    pm: &ActivityCurve,
    project: &ActivityCurve,
    segment: &Segment,
    n: usize,
) -> Result<f64, DeviationError> {
    let p = to_probability_vector(segment_samples(pm, segment, n)?)?;
    let q = to_probability_vector(segment_samples(project, segment, n)?)?;
    Ok(jensen_shannon(&p, &q))
}

fn to_probability_vector(samples: Vec<f64>) -> Result<Vec<f64>, DeviationError> {
    let total: f64 = samples.iter().sum();
    if !(total > 0.0) {
        return Err(DeviationError::ZeroMassSegment);
    }
    Ok(samples.into_iter().map(|v| v / total).collect())
}

/// JSD of two discrete probability vectors, natural log.
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut divergence = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        let mi = 0.5 * (pi + qi);
        if pi > 0.0 {
            divergence += 0.5 * pi * (pi / mi).ln();
        }
        if qi > 0.0 {
            divergence += 0.5 * qi * (qi / mi).ln();
        }
    }
    divergence.max(0.0)
}

/// Negative natural log of a divergence, floored at 1e-300 so identical
/// curves stay finite.
pub fn neg_log_jsd(divergence: f64) -> f64 {
    -divergence.max(1e-300).ln()
}

/// Trapezoidal estimate of the absolute area between the two curves on
/// the segment.
pub fn segment_area(
    pm: &ActivityCurve,
    project: &ActivityCurve,
    segment: &Segment,
    n: usize,
) -> Result<f64, DeviationError> {
    let xs = segment_samples(pm, segment, n)?;
    let ys = segment_samples(project, segment, n)?;
    Ok(trapezoid_abs_area(&xs, &ys, segment.b - segment.a))
}

/// Trapezoidal integral of `|xs - ys|` over an interval of the given
/// width, samples assumed equispaced with endpoints included.
pub fn trapezoid_abs_area(xs: &[f64], ys: &[f64], width: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let step = width / (n - 1) as f64;
    let mut area = 0.0;
    for i in 0..n - 1 {
        let lo = (xs[i] - ys[i]).abs();
        let hi = (xs[i + 1] - ys[i + 1]).abs();
        area += 0.5 * (lo + hi) * step;
    }
    area
}

/// Apply one feature definition to a (process model, project) curve pair.
pub fn compute_one(
    pm: &ActivityCurve,
    project: &ActivityCurve,
    def: &FeatureDef,
) -> Result<DeviationValue, DeviationError> {
    let segment = def.to_segment()?;
    let n = def.grid_points();
    let raw = match def.kind {
        DeviationKind::SegmentCorrelation => segment_correlation(pm, project, &segment, n)?,
        DeviationKind::SegmentJsd => segment_jsd(pm, project, &segment, n)?,
        DeviationKind::SegmentArea => segment_area(pm, project, &segment, n)?,
    };
    Ok(DeviationValue {
        kind: def.kind,
        segment,
        raw,
        grid_points: n,
    })
}

/// Evaluate every feature definition against the named activities of the
/// model and project curve sets, preserving definition order.
pub fn compute_all(
    pm_set: &ProcessModel,
    project_curves: &std::collections::BTreeMap<String, ActivityCurve>,
    feature_defs: &[FeatureDef],
) -> Result<Vec<DeviationValue>, DeviationError> {
    feature_defs
        .iter()
        .map(|def| {
            let pm = pm_set
                .activity(&def.activity)
                .ok_or_else(|| DeviationError::MissingActivity(def.activity.clone()))?;
            let project = project_curves
                .get(&def.activity)
                .ok_or_else(|| DeviationError::MissingActivity(def.activity.clone()))?;
            compute_one(pm, project, def)
        })
        .collect()
}
