//! Joint-conditional-density chain classifier.
//!
//! Order-k models combine an empirical transition term over the k
//! preceding labels (add-one smoothed), per-class per-feature univariate
//! KDEs under an independence assumption, and a sojourn-time density per
//! (from, to) label pair fitted on log(1 + seconds). Order 0 reduces to
//! naive Bayes with KDE class conditionals. The label with the largest
//! posterior is predicted; ties break by the fixed class order.

use serde::{Deserialize, Serialize};

use super::chains::{CommitChain, LabeledChain};
use super::{featurize, Activity, ClassifyError, FeatureSchema};
use crate::stats::Kde1d;

const CLASSES: usize = 3;
/// Floor applied to densities before taking logs.
const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JCDModel {
    order: usize,
    schema: FeatureSchema,
    /// Empirical class frequencies.
    priors: [f64; 3],
    /// Row per k-length label context (3^order rows, empty for order 0);
    /// rows sum to 1 via add-one smoothing.
    transitions: Vec<[f64; 3]>,
    /// Per class, per schema feature. `None` for absent classes.
    feature_kdes: Vec<Vec<Option<Kde1d>>>,
    /// Per (from, to) pair on log(1 + sojourn seconds).
    sojourn_kdes: Vec<Vec<Option<Kde1d>>>,
    /// Fallback over all transitions for unseen pairs.
    sojourn_pooled: Option<Kde1d>,
}

impl JCDModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn priors(&self) -> &[f64; 3] {
        &self.priors
    }

    pub fn transitions(&self) -> &[[f64; 3]] {
        &self.transitions
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("model serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, serde_json::Error> {
        serde_json::from_value(value.clone())
    }
}

/// Index of a context of `order` labels, oldest first.
fn context_index(context: &[Activity]) -> usize {
    context
        .iter()
        .enumerate()
        .map(|(i, label)| label.index() * CLASSES.pow(i as u32))
        .sum()
}

/// Fit an order-k model on fully labeled chains.
///
/// Priors are empirical class frequencies over every commit; transitions
/// are add-one-smoothed k-order frequencies; class-conditional feature
/// densities are univariate Silverman-bandwidth KDEs. Classes that occur
/// fewer than three times (but at least once) are rejected.
pub fn fit_jcd(
    chains: &[LabeledChain],
    order: usize,
    schema: &FeatureSchema,
) -> Result<JCDModel, ClassifyError> {
    if order > 3 {
        return Err(ClassifyError::UnsupportedOrder(order));
    }
    if chains.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    for labeled in chains {
        if labeled.chain.len() <= order {
            return Err(ClassifyError::OrderMismatch {
                chain_len: labeled.chain.len(),
                order,
            });
        }
    }

    let mut class_counts = [0usize; 3];
    let mut feature_values: Vec<Vec<Vec<f64>>> =
        vec![vec![Vec::new(); schema.len()]; CLASSES];
    let mut transition_counts = vec![[0usize; 3]; CLASSES.pow(order as u32)];
    let mut sojourn_values: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); CLASSES]; CLASSES];

    for labeled in chains {
        let records = labeled.chain.records();
        let labels = &labeled.labels;
        for (record, label) in records.iter().zip(labels) {
            class_counts[label.index()] += 1;
            let features = featurize(record, schema)?;
            for (f, value) in features.into_iter().enumerate() {
                feature_values[label.index()][f].push(value);
            }
        }
        if order > 0 {
            for t in order..labels.len() {
                let idx = context_index(&labels[t - order..t]);
                transition_counts[idx][labels[t].index()] += 1;
            }
        }
        for t in 1..records.len() {
            if let Some(sojourn) = records[t].sojourn_seconds {
                sojourn_values[labels[t - 1].index()][labels[t].index()]
                    .push((1.0 + sojourn as f64).ln());
            }
        }
    }

    let total: usize = class_counts.iter().sum();
    for activity in Activity::ALL {
        let count = class_counts[activity.index()];
        if count > 0 && count < 3 {
            return Err(ClassifyError::InsufficientData {
                class: activity,
                count,
            });
        }
    }

    let priors = [
        class_counts[0] as f64 / total as f64,
        class_counts[1] as f64 / total as f64,
        class_counts[2] as f64 / total as f64,
    ];

    let transitions = transition_counts
        .into_iter()
        .map(|row| {
            let row_total: usize = row.iter().sum();
            let denom = (row_total + CLASSES) as f64;
            [
                (row[0] + 1) as f64 / denom,
                (row[1] + 1) as f64 / denom,
                (row[2] + 1) as f64 / denom,
            ]
        })
        .collect();

    let feature_kdes = feature_values
        .into_iter()
        .map(|per_feature| {
            per_feature
                .into_iter()
                .map(|values| {
                    if values.is_empty() {
                        None
                    } else {
                        Some(Kde1d::fit_silverman(values))
                    }
                })
                .collect()
        })
        .collect();

    let mut pooled = Vec::new();
    let sojourn_kdes: Vec<Vec<Option<Kde1d>>> = sojourn_values
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|values| {
                    pooled.extend_from_slice(&values);
                    if values.len() >= 3 {
                        Some(Kde1d::fit_silverman(values))
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    let sojourn_pooled = if pooled.len() >= 3 {
        Some(Kde1d::fit_silverman(pooled))
    } else {
        None
    };

    Ok(JCDModel {
        order,
        schema: schema.clone(),
        priors,
        transitions,
        feature_kdes,
        sojourn_kdes,
        sojourn_pooled,
    })
}

/// Predict the principal commit's activity from its chain.
///
/// `predecessor_labels` carries the known labels of every chain element
/// except the principal (oldest first). Returns the argmax label and the
/// normalized posterior over all three classes.
pub fn predict_jcd(
    model: &JCDModel,
    chain: &CommitChain,
    predecessor_labels: &[Activity],
) -> Result<(Activity, [f64; 3]), ClassifyError> {
    if chain.len() <= model.order {
        return Err(ClassifyError::OrderMismatch {
            chain_len: chain.len(),
            order: model.order,
        });
    }
    if predecessor_labels.len() != chain.len() - 1 {
        return Err(ClassifyError::LengthMismatch {
            left: predecessor_labels.len(),
            right: chain.len() - 1,
        });
    }
    let principal = chain.principal();
    let features = featurize(principal, &model.schema)?;

    let mut log_posteriors = [f64::NEG_INFINITY; 3];
    for candidate in Activity::ALL {
        let c = candidate.index();
        if model.priors[c] == 0.0 {
            continue; // class unseen in training
        }
        let mut log_posterior = if model.order == 0 {
            model.priors[c].max(LOG_FLOOR).ln()
        } else {
            let context = &predecessor_labels[predecessor_labels.len() - model.order..];
            model.transitions[context_index(context)][c]
                .max(LOG_FLOOR)
                .ln()
        };
        for (f, &value) in features.iter().enumerate() {
            if let Some(kde) = &model.feature_kdes[c][f] {
                log_posterior += kde.log_density(value);
            }
        }
        if model.order > 0 {
            if let (Some(&previous), Some(sojourn)) =
                (predecessor_labels.last(), principal.sojourn_seconds)
            {
                let x = (1.0 + sojourn as f64).ln();
                let kde = model.sojourn_kdes[previous.index()][c]
                    .as_ref()
                    .or(model.sojourn_pooled.as_ref());
                if let Some(kde) = kde {
                    log_posterior += kde.log_density(x);
                }
            }
        }
        log_posteriors[c] = log_posterior;
    }

    let posterior = normalize_log_posteriors(&log_posteriors);
    let mut best = Activity::Adaptive;
    let mut best_p = f64::NEG_INFINITY;
    for activity in Activity::ALL {
        let p = posterior[activity.index()];
        if p > best_p {
            best_p = p;
            best = activity;
        }
    }
    Ok((best, posterior))
}

fn normalize_log_posteriors(log_posteriors: &[f64; 3]) -> [f64; 3] {
    let max = log_posteriors
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        // no class scored: uniform by convention
        return [1.0 / 3.0; 3];
    }
    let mut exp = [0.0; 3];
    let mut total = 0.0;
    for i in 0..3 {
        if log_posteriors[i].is_finite() {
            exp[i] = (log_posteriors[i] - max).exp();
            total += exp[i];
        }
    }
    [exp[0] / total, exp[1] / total, exp[2] / total]
}
