//! Validation under data scarcity: repeated leave-one-out
//! cross-validation with 3-sigma bands, permutation variable importance,
//! the Brier score, and importance-weighted score aggregation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::regress::{fit_regressor, FittedRegressor, RegressorSpec};
use super::smote::{smote_regression, SmoteConfig};
use super::{AssessError, Dataset};

/// Repeated-LOOCV result: RMSE mean and spread over repeats, with the
/// 68-95-99.7 bands `mean +- {1,2,3} * sd`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoocvSummary {
    pub rmse_mean: f64,
    pub rmse_sd: f64,
    pub bands: [(f64, f64); 3],
    pub repeats: usize,
}

/// Repeated leave-one-out cross-validation.
///
/// Each repeat fits on all-but-one instance and predicts the held-out
/// one; optional SMOTE augmentation is applied to the training fold only
/// (never the held-out instance), seeded per (repeat, fold). With a
/// deterministic spec and no augmentation every repeat is identical and
/// the sd is zero.
pub fn loocv(
    dataset: &Dataset,
    spec: &RegressorSpec,
    repeats: usize,
    seed: u64,
    smote: Option<SmoteConfig>,
) -> Result<LoocvSummary, AssessError> {
    if dataset.len() < 3 {
        return Err(AssessError::TooFewInstances {
            need: 3,
            got: dataset.len(),
        });
    }
    let repeats = repeats.max(1);
    let mut rmses = Vec::with_capacity(repeats);
    for repeat in 0..repeats {
        let mut sum_sq = 0.0;
        for held_out in 0..dataset.len() {
            let mut rows = Vec::with_capacity(dataset.len() - 1);
            let mut targets = Vec::with_capacity(dataset.len() - 1);
            for i in 0..dataset.len() {
                if i != held_out {
                    rows.push(dataset.rows[i].clone());
                    targets.push(dataset.targets[i]);
                }
            }
            let mut train = Dataset::new(dataset.feature_names.clone(), rows, targets)?;
            if let Some(config) = smote {
                if config.n_new > 0 {
                    let fold_seed = seed
                        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                        .wrapping_add((repeat * dataset.len() + held_out) as u64);
                    train = smote_regression(&train, config.k, config.n_new, fold_seed)?;
                }
            }
            let model = fit_regressor(spec, &train)?;
            let prediction = model.predict(&dataset.rows[held_out])?;
            let residual = prediction - dataset.targets[held_out];
            sum_sq += residual * residual;
        }
        rmses.push((sum_sq / dataset.len() as f64).sqrt());
    }
    let rmse_mean = crate::stats::mean(&rmses);
    let rmse_sd = crate::stats::sample_sd(&rmses);
    let bands = [
        (rmse_mean - rmse_sd, rmse_mean + rmse_sd),
        (rmse_mean - 2.0 * rmse_sd, rmse_mean + 2.0 * rmse_sd),
        (rmse_mean - 3.0 * rmse_sd, rmse_mean + 3.0 * rmse_sd),
    ];
    Ok(LoocvSummary {
        rmse_mean,
        rmse_sd,
        bands,
        repeats,
    })
}

fn rmse_on(model: &FittedRegressor, rows: &[Vec<f64>], targets: &[f64]) -> Result<f64, AssessError> {
    let mut sum_sq = 0.0;
    for (row, &target) in rows.iter().zip(targets) {
        let residual = model.predict(row)? - target;
        sum_sq += residual * residual;
    }
    Ok((sum_sq / rows.len() as f64).sqrt())
}

/// Permutation variable importance, normalized to sum 1.
///
/// Importance of a feature is the mean RMSE increase (floored at 0) when
/// that column is shuffled, over `repeats` shuffles. A constant or
/// irrelevant feature converges to importance 0.
pub fn permutation_importance(
    model: &FittedRegressor,
    dataset: &Dataset,
    repeats: usize,
    seed: u64,
) -> Result<Vec<f64>, AssessError> {
    if dataset.len() < 3 {
        return Err(AssessError::TooFewInstances {
            need: 3,
            got: dataset.len(),
        });
    }
    let repeats = repeats.max(1);
    let baseline = rmse_on(model, &dataset.rows, &dataset.targets)?;
    let p = dataset.feature_names.len();
    let mut importances = vec![0.0; p];
    for (j, importance) in importances.iter_mut().enumerate() {
        let mut total = 0.0;
        for repeat in 0..repeats {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_mul(0x2545_f491_4f6c_dd1d)
                    .wrapping_add((j * repeats + repeat) as u64),
            );
            let mut column: Vec<f64> = dataset.rows.iter().map(|r| r[j]).collect();
            column.shuffle(&mut rng);
            let rows: Vec<Vec<f64>> = dataset
                .rows
                .iter()
                .zip(&column)
                .map(|(row, &v)| {
                    let mut permuted = row.clone();
                    permuted[j] = v;
                    permuted
                })
                .collect();
            total += rmse_on(model, &rows, &dataset.targets)?;
        }
        *importance = (total / repeats as f64 - baseline).max(0.0);
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        for v in importances.iter_mut() {
            *v /= total;
        }
    } else {
        // nothing mattered: spread uniformly rather than divide by zero
        importances.iter_mut().for_each(|v| *v = 1.0 / p as f64);
    }
    Ok(importances)
}

/// Strictly proper scoring of binary predictions against outcome
/// probabilities: the mean squared deviation, 0 best, 1 worst.
pub fn brier_score(predictions: &[f64], probabilities: &[f64]) -> Result<f64, AssessError> {
    if predictions.len() != probabilities.len() {
        return Err(AssessError::LengthMismatch {
            left: predictions.len(),
            right: probabilities.len(),
        });
    }
    if predictions.is_empty() {
        return Err(AssessError::TooFewInstances { need: 1, got: 0 });
    }
    for &p in predictions {
        if p != 0.0 && p != 1.0 {
            return Err(AssessError::Malformed(format!(
                "predictions must be binary, got {p}"
            )));
        }
    }
    for &q in probabilities {
        if !(0.0..=1.0).contains(&q) {
            return Err(AssessError::Malformed(format!(
                "probabilities must lie in [0,1], got {q}"
            )));
        }
    }
    let sum: f64 = predictions
        .iter()
        .zip(probabilities)
        .map(|(p, q)| (p - q) * (p - q))
        .sum();
    Ok(sum / predictions.len() as f64)
}

/// Importance-weighted scores: the elementwise products, their sum (the
/// dot product), and the plain average score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedScores {
    pub weighted: Vec<f64>,
    pub dot_product: f64,
    pub average: f64,
}

pub fn weighted_scores(scores: &[f64], importances: &[f64]) -> Result<WeightedScores, AssessError> {
    if scores.len() != importances.len() {
        return Err(AssessError::LengthMismatch {
            left: scores.len(),
            right: importances.len(),
        });
    }
    if scores.is_empty() {
        return Err(AssessError::TooFewInstances { need: 1, got: 0 });
    }
    let total: f64 = importances.iter().sum();
    if importances.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-6 {
        return Err(AssessError::InvalidImportances);
    }
    let weighted: Vec<f64> = scores
        .iter()
        .zip(importances)
        .map(|(s, w)| s * w)
        .collect();
    Ok(WeightedScores {
        dot_product: weighted.iter().sum(),
        average: scores.iter().sum::<f64>() / scores.len() as f64,
        weighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_spec_has_zero_sd_across_repeats() {
        let dataset = Dataset::new(
            vec!["x".into()],
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        let summary = loocv(&dataset, &RegressorSpec::ridge(0.1), 5, 1, None).unwrap();
        assert_eq!(summary.rmse_sd, 0.0);
        assert_eq!(summary.repeats, 5);
        assert!(summary.rmse_mean >= 0.0);
    }

    #[test]
    fn zero_rule_on_extreme_targets_matches_hand_loo() {
        // hold out 0 -> mean of rest; brute-force oracle inline
        let targets = [0.0, 10.0, 0.0, 10.0];
        let dataset = Dataset::new(
            vec!["x".into()],
            targets.iter().map(|_| vec![0.0]).collect(),
            targets.to_vec(),
        )
        .unwrap();
        let summary = loocv(&dataset, &RegressorSpec::zero_rule(), 1, 0, None).unwrap();
        let mut sum_sq = 0.0;
        for i in 0..targets.len() {
            let rest_mean: f64 = targets
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &t)| t)
                .sum::<f64>()
                / (targets.len() - 1) as f64;
            let residual = rest_mean - targets[i];
            sum_sq += residual * residual;
        }
        let expected = (sum_sq / targets.len() as f64).sqrt();
        assert!((summary.rmse_mean - expected).abs() < 1e-12);
    }

    #[test]
    fn two_point_zero_rule_loocv_fails_smallness_gate() {
        let dataset = Dataset::new(
            vec!["x".into()],
            vec![vec![0.0], vec![1.0]],
            vec![0.0, 10.0],
        )
        .unwrap();
        assert!(matches!(
            loocv(&dataset, &RegressorSpec::zero_rule(), 1, 0, None),
            Err(AssessError::TooFewInstances { .. })
        ));
    }

    #[test]
    fn informative_feature_ranks_first() {
        // y = 3 * x1 + noise; x2 is pure noise
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        let mut state = 1u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..40 {
            let x1 = next() * 2.0 - 1.0;
            let x2 = next() * 2.0 - 1.0;
            let noise = (next() - 0.5) * 0.1;
            rows.push(vec![x1, x2]);
            targets.push((3.0 * x1 + 5.0 + noise).clamp(0.0, 10.0));
        }
        let dataset = Dataset::new(vec!["signal".into(), "noise".into()], rows, targets).unwrap();
        let model = fit_regressor(&RegressorSpec::ridge(1e-6), &dataset).unwrap();
        let importances = permutation_importance(&model, &dataset, 20, 3).unwrap();
        assert!((importances.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(
            importances[0] > importances[1],
            "importances = {importances:?}"
        );
        assert!(importances[1] < 0.02, "noise importance = {}", importances[1]);
    }

    #[test]
    fn constant_feature_gets_zero_importance() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64, 7.0])
            .collect();
        let targets: Vec<f64> = (0..20).map(|i| (i as f64 * 0.5).clamp(0.0, 10.0)).collect();
        let dataset = Dataset::new(vec!["x".into(), "const".into()], rows, targets).unwrap();
        let model = fit_regressor(&RegressorSpec::ridge(0.1), &dataset).unwrap();
        let importances = permutation_importance(&model, &dataset, 10, 11).unwrap();
        assert!(importances[1] < 0.02);
    }

    #[test]
    fn brier_score_reference_points() {
        assert_eq!(brier_score(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(brier_score(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        let err = brier_score(&[0.5], &[0.5]).unwrap_err();
        assert!(matches!(err, AssessError::Malformed(_)));
    }

    #[test]
    fn weighted_scores_identities() {
        let scores = [0.2, 0.4, 0.9];
        let uniform = [1.0 / 3.0; 3];
        let result = weighted_scores(&scores, &uniform).unwrap();
        assert!((result.dot_product - result.average).abs() < 1e-12);

        let one_hot = [0.0, 1.0, 0.0];
        let result = weighted_scores(&scores, &one_hot).unwrap();
        assert_eq!(result.dot_product, 0.4);

        assert!(matches!(
            weighted_scores(&scores, &[0.5, 0.5]),
            Err(AssessError::LengthMismatch { .. })
        ));
        assert!(matches!(
            weighted_scores(&scores, &[0.5, 0.2, 0.2]),
            Err(AssessError::InvalidImportances)
        ));
    }
}
