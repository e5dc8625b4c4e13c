//! Project-level severity assessment: feature engineering over activity
//! curves, small-data regression, validation, variable importance, and
//! interpretable score reports.

mod regress;
mod report;
mod smote;
mod validate;

pub use regress::{fit_regressor, FittedRegressor, Preprocessing, RegressorKind, RegressorSpec};
pub use report::{assess, AssessmentReport, ReportRow};
pub use smote::{smote_regression, SmoteConfig};
pub use validate::{
    brier_score, loocv, permutation_importance, weighted_scores, LoocvSummary, WeightedScores,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity::{ActivityCurve, CurveError};
use crate::deviation::{segment_jsd, DeviationError, Segment, DEFAULT_GRID};

#[derive(Debug, Error)]
pub enum AssessError {
    #[error("need at least {need} instances, got {got}")]
    TooFewInstances { need: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("importances must be nonnegative and sum to 1")]
    InvalidImportances,
    #[error("singular system: collinear features with lambda = 0")]
    SingularSystem,
    #[error("no transform calibrated for feature {0}")]
    MissingTransform(String),
    #[error("activity {0} missing from project curves")]
    MissingActivity(String),
    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),
    #[error("severity {0} outside [0, 10]")]
    InvalidSeverity(f64),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Deviation(#[from] DeviationError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Engineered feature vector of one project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectFeatures {
    pub project_id: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

/// Expert severity rating on the 0-10 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub project_id: String,
    pub severity: f64,
}

impl GroundTruth {
    pub fn new(project_id: impl Into<String>, severity: f64) -> Result<Self, AssessError> {
        if !(0.0..=10.0).contains(&severity) || !severity.is_finite() {
            return Err(AssessError::InvalidSeverity(severity));
        }
        Ok(Self {
            project_id: project_id.into(),
            severity,
        })
    }

    /// Severity scaled to [0, 1].
    pub fn scaled(&self) -> f64 {
        self.severity / 10.0
    }
}

/// A feature matrix with aligned regression targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Severity targets on the 0-10 scale.
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
    ) -> Result<Self, AssessError> {
        if rows.len() != targets.len() {
            return Err(AssessError::LengthMismatch {
                left: rows.len(),
                right: targets.len(),
            });
        }
        for row in &rows {
            if row.len() != feature_names.len() {
                return Err(AssessError::FeatureMismatch(format!(
                    "row has {} values, schema has {}",
                    row.len(),
                    feature_names.len()
                )));
            }
        }
        Ok(Self {
            feature_names,
            rows,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Column means and standard deviations of the feature matrix
    /// (sd 0 is replaced by 1 so constant features z-map to 0).
    pub fn column_stats(&self) -> (Vec<f64>, Vec<f64>) {
        column_stats(&self.rows, self.feature_names.len())
    }
}

pub(crate) fn column_stats(rows: &[Vec<f64>], columns: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len().max(1) as f64;
    let mut means = vec![0.0; columns];
    for row in rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v / n;
        }
    }
    let mut sds = vec![0.0; columns];
    for row in rows {
        for (s, (v, m)) in sds.iter_mut().zip(row.iter().zip(&means)) {
            *s += (v - m) * (v - m);
        }
    }
    for s in sds.iter_mut() {
        *s = (*s / n).sqrt();
        if !(*s > 0.0) {
            *s = 1.0;
        }
    }
    (means, sds)
}

pub(crate) fn z_row(row: &[f64], means: &[f64], sds: &[f64]) -> Vec<f64> {
    row.iter()
        .zip(means.iter().zip(sds))
        .map(|(v, (m, s))| (v - m) / s)
        .collect()
}

/// Engineer the standard per-project features: the mass of each activity
/// per segment, then the divergence between each unordered activity pair
/// per segment, then any extra named features.
///
/// Names follow `mass:<activity>:<segment>` and
/// `div:<a1>-<a2>:<segment>`.
pub fn build_features(
    project_id: &str,
    curves: &BTreeMap<String, ActivityCurve>,
    segments: &[Segment],
    activities: &[String],
    extras: &[(String, f64)],
) -> Result<ProjectFeatures, AssessError> {
    let mut names = Vec::new();
    let mut values = Vec::new();
    let curve_for = |activity: &String| -> Result<&ActivityCurve, AssessError> {
        curves
            .get(activity)
            .ok_or_else(|| AssessError::MissingActivity(activity.clone()))
    };
    for activity in activities {
        let curve = curve_for(activity)?;
        for segment in segments {
            names.push(format!("mass:{activity}:{}", segment.label));
            values.push(curve.mass(segment.a, segment.b)?);
        }
    }
    for i in 0..activities.len() {
        for j in (i + 1)..activities.len() {
            let left = curve_for(&activities[i])?;
            let right = curve_for(&activities[j])?;
            for segment in segments {
                names.push(format!(
                    "div:{}-{}:{}",
                    activities[i], activities[j], segment.label
                ));
                values.push(segment_jsd(left, right, segment, DEFAULT_GRID)?);
            }
        }
    }
    for (name, value) in extras {
        names.push(name.clone());
        values.push(*value);
    }
    Ok(ProjectFeatures {
        project_id: project_id.to_string(),
        names,
        values,
    })
}

/// Parse the ground-truth CSV (`project_id,severity`).
pub fn read_ground_truth_csv(bytes: &[u8]) -> Result<Vec<GroundTruth>, AssessError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(bytes);
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| AssessError::Malformed(e.to_string()))?;
        let id = row.get(0).unwrap_or("").trim().to_string();
        let severity: f64 = row
            .get(1)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| AssessError::Malformed(format!("bad severity for {id}")))?;
        out.push(GroundTruth::new(id, severity)?);
    }
    Ok(out)
}

/// Parse a feature-matrix CSV: `project_id` column then one column per
/// feature.
pub fn read_feature_matrix_csv(bytes: &[u8]) -> Result<Vec<ProjectFeatures>, AssessError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(bytes);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| AssessError::Malformed(e.to_string()))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if header.first().map(String::as_str) != Some("project_id") {
        return Err(AssessError::Malformed(
            "first column must be project_id".to_string(),
        ));
    }
    let names: Vec<String> = header[1..].to_vec();
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| AssessError::Malformed(e.to_string()))?;
        let project_id = row.get(0).unwrap_or("").to_string();
        let values = (1..header.len())
            .map(|i| {
                row.get(i)
                    .unwrap_or("")
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| {
                        AssessError::Malformed(format!("bad value in row for {project_id}"))
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        out.push(ProjectFeatures {
            project_id,
            names: names.clone(),
            values,
        });
    }
    Ok(out)
}
