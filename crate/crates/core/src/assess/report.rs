//! Assembled assessment reports: raw deviations, calibrated scores,
//! importance-weighted scores, and the predicted severity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::regress::FittedRegressor;
use super::validate::weighted_scores;
use super::AssessError;
use crate::activity::{ActivityCurve, ProcessModel};
use crate::deviation::{compute_all, FeatureDef};
use crate::scoring::{score_input, to_score, ScoreTransform};

/// One feature line of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub feature_id: String,
    pub raw: f64,
    /// Z-standardized raw value under the model's frozen training stats.
    pub z: f64,
    pub score: f64,
    pub importance: f64,
    pub weighted_score: f64,
}

/// Full project assessment, rows sorted by weighted score (descending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub project_id: String,
    /// Predicted severity on the 0-10 scale.
    pub predicted_severity: f64,
    pub rows: Vec<ReportRow>,
    pub average_score: f64,
    /// Dot product of importances and scores.
    pub weighted_total: f64,
    /// Feature ids ordered by raw score, best first.
    pub score_order: Vec<String>,
    /// Feature ids ordered by weighted score, best first.
    pub weighted_order: Vec<String>,
}

/// Assess one project against a process model.
///
/// Raw deviations come from the feature definitions, scores from the
/// per-feature transforms, and the severity from the fitted regressor
/// (whose features must be exactly the definitions' raw deviations).
pub fn assess(
    project_id: &str,
    pm: &ProcessModel,
    project_curves: &BTreeMap<String, ActivityCurve>,
    model: &FittedRegressor,
    transforms: &[ScoreTransform],
    importances: &[f64],
    feature_defs: &[FeatureDef],
) -> Result<AssessmentReport, AssessError> {
    if importances.len() != feature_defs.len() {
        return Err(AssessError::LengthMismatch {
            left: importances.len(),
            right: feature_defs.len(),
        });
    }
    let deviations = compute_all(pm, project_curves, feature_defs)?;
    let raw_values: Vec<f64> = deviations.iter().map(|d| d.raw).collect();

    let mut scores = Vec::with_capacity(feature_defs.len());
    for (def, deviation) in feature_defs.iter().zip(&deviations) {
        let id = def.feature_id();
        let transform = transforms
            .iter()
            .find(|t| t.feature_id == id)
            .ok_or_else(|| AssessError::MissingTransform(id.clone()))?;
        scores.push(to_score(transform, score_input(def.kind, deviation.raw)));
    }
    let weighted = weighted_scores(&scores, importances)?;

    let expected: Vec<String> = feature_defs.iter().map(|d| d.feature_id()).collect();
    if model.feature_names != expected {
        return Err(AssessError::FeatureMismatch(format!(
            "model was trained on {:?}, assessment uses {:?}",
            model.feature_names, expected
        )));
    }
    let predicted_severity = model.predict(&raw_values)?;
    let z_values = model.z_view(&raw_values);

    let mut rows: Vec<ReportRow> = feature_defs
        .iter()
        .enumerate()
        .map(|(i, def)| ReportRow {
            feature_id: def.feature_id(),
            raw: raw_values[i],
            z: z_values[i],
            score: scores[i],
            importance: importances[i],
            weighted_score: weighted.weighted[i],
        })
        .collect();

    let order_by = |key: fn(&ReportRow) -> f64, rows: &[ReportRow]| -> Vec<String> {
        let mut indexed: Vec<usize> = (0..rows.len()).collect();
        // stable sort: ties keep declaration order
        indexed.sort_by(|&a, &b| key(&rows[b]).total_cmp(&key(&rows[a])));
        indexed.into_iter().map(|i| rows[i].feature_id.clone()).collect()
    };
    let score_order = order_by(|r| r.score, &rows);
    let weighted_order = order_by(|r| r.weighted_score, &rows);
    rows.sort_by(|a, b| b.weighted_score.total_cmp(&a.weighted_score));

    Ok(AssessmentReport {
        project_id: project_id.to_string(),
        predicted_severity,
        rows,
        average_score: weighted.average,
        weighted_total: weighted.dot_product,
        score_order,
        weighted_order,
    })
}

impl AssessmentReport {
    /// Fixed-column human-readable table:
    /// feature, raw, z, score, weighted_score, importance.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<28} {:>12} {:>10} {:>9} {:>15} {:>11}\n",
            "feature", "raw", "z", "score", "weighted_score", "importance"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<28} {:>12.5} {:>10.5} {:>9.5} {:>15.5} {:>11.4}\n",
                row.feature_id, row.raw, row.z, row.score, row.weighted_score, row.importance
            ));
        }
        out.push_str(&format!(
            "predicted severity: {:.2} / 10 (average score {:.3}, weighted total {:.3})\n",
            self.predicted_severity, self.average_score, self.weighted_total
        ));
        out
    }
}
