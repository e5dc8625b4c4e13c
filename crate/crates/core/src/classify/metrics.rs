//! Classifier evaluation: accuracy, Cohen's kappa, confusion matrix.

use serde::{Deserialize, Serialize};

use super::{Activity, ClassifyError};

/// Evaluation result over the three activity classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMetrics {
    pub accuracy: f64,
    /// Chance-corrected agreement in [-1, 1].
    pub kappa: f64,
    /// `confusion[truth][prediction]` counts.
    pub confusion: [[u64; 3]; 3],
}

/// Compare predictions against ground truth.
///
/// Kappa is `(p_o - p_e) / (1 - p_e)` with marginal-product chance
/// agreement; when chance agreement is already perfect the result is 1
/// for perfect observed agreement and 0 otherwise.
pub fn evaluate(
    predictions: &[Activity],
    truths: &[Activity],
) -> Result<ClassifierMetrics, ClassifyError> {
    if predictions.len() != truths.len() {
        return Err(ClassifyError::LengthMismatch {
            left: predictions.len(),
            right: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    let mut confusion = [[0u64; 3]; 3];
    for (&prediction, &truth) in predictions.iter().zip(truths) {
        confusion[truth.index()][prediction.index()] += 1;
    }
    let total = predictions.len() as f64;
    let observed = (0..3).map(|i| confusion[i][i]).sum::<u64>() as f64 / total;
    let mut chance = 0.0;
    for i in 0..3 {
        let truth_marginal: u64 = confusion[i].iter().sum();
        let prediction_marginal: u64 = (0..3).map(|j| confusion[j][i]).sum();
        chance += truth_marginal as f64 * prediction_marginal as f64 / (total * total);
    }
    let kappa = if (1.0 - chance).abs() < 1e-15 {
        if observed >= 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (observed - chance) / (1.0 - chance)
    };
    Ok(ClassifierMetrics {
        accuracy: observed,
        kappa,
        confusion,
    })
}
