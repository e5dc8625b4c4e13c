//! Small, auditable severity regressors: k-nearest-neighbors, ridge with
//! a closed-form solution and unpenalized intercept, and the zero-rule
//! mean. Predictions are clamped to the 0-10 severity scale.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{column_stats, z_row, AssessError, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegressorKind {
    Knn { k: usize },
    Ridge { lambda: f64 },
    ZeroRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocessing {
    None,
    ZStandardize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub kind: RegressorKind,
    pub preprocessing: Preprocessing,
}

impl RegressorSpec {
    pub fn ridge(lambda: f64) -> Self {
        Self {
            kind: RegressorKind::Ridge { lambda },
            preprocessing: Preprocessing::ZStandardize,
        }
    }

    pub fn knn(k: usize) -> Self {
        Self {
            kind: RegressorKind::Knn { k },
            preprocessing: Preprocessing::ZStandardize,
        }
    }

    pub fn zero_rule() -> Self {
        Self {
            kind: RegressorKind::ZeroRule,
            preprocessing: Preprocessing::None,
        }
    }

    /// Randomness-free specs produce identical repeated-validation runs.
    pub fn is_deterministic(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum ModelParams {
    Knn {
        k: usize,
        /// Training points in z-space.
        points: Vec<Vec<f64>>,
        targets: Vec<f64>,
    },
    Ridge {
        coefficients: Vec<f64>,
        intercept: f64,
    },
    Zero {
        mean: f64,
    },
}

/// A fitted severity regressor with frozen training-population feature
/// statistics (used for z views in reports and for z-space distances).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedRegressor {
    pub spec: RegressorSpec,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    params: ModelParams,
}

/// Fit a regressor on the dataset (>= 2 instances).
pub fn fit_regressor(spec: &RegressorSpec, dataset: &Dataset) -> Result<FittedRegressor, AssessError> {
    if dataset.len() < 2 {
        return Err(AssessError::TooFewInstances {
            need: 2,
            got: dataset.len(),
        });
    }
    let (means, sds) = column_stats(&dataset.rows, dataset.feature_names.len());
    let design: Vec<Vec<f64>> = match spec_space(spec) {
        Preprocessing::ZStandardize => dataset
            .rows
            .iter()
            .map(|row| z_row(row, &means, &sds))
            .collect(),
        Preprocessing::None => dataset.rows.clone(),
    };

    let params = match spec.kind {
        RegressorKind::ZeroRule => ModelParams::Zero {
            mean: dataset.targets.iter().sum::<f64>() / dataset.len() as f64,
        },
        RegressorKind::Knn { k } => {
            if k == 0 {
                return Err(AssessError::Malformed("knn requires k >= 1".to_string()));
            }
            // distances always live in z-space regardless of preprocessing
            let points = dataset
                .rows
                .iter()
                .map(|row| z_row(row, &means, &sds))
                .collect();
            ModelParams::Knn {
                k,
                points,
                targets: dataset.targets.clone(),
            }
        }
        RegressorKind::Ridge { lambda } => {
            let (coefficients, intercept) = solve_ridge(&design, &dataset.targets, lambda)?;
            ModelParams::Ridge {
                coefficients,
                intercept,
            }
        }
    };
    Ok(FittedRegressor {
        spec: *spec,
        feature_names: dataset.feature_names.clone(),
        means,
        sds,
        params,
    })
}

fn spec_space(spec: &RegressorSpec) -> Preprocessing {
    match spec.kind {
        // knn is z-space by construction; the flag only affects ridge
        RegressorKind::Knn { .. } | RegressorKind::ZeroRule => Preprocessing::None,
        RegressorKind::Ridge { .. } => spec.preprocessing,
    }
}

/// Closed-form ridge with an unpenalized intercept column.
fn solve_ridge(
    rows: &[Vec<f64>],
    targets: &[f64],
    lambda: f64,
) -> Result<(Vec<f64>, f64), AssessError> {
    let n = rows.len();
    let p = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut design = DMatrix::zeros(n, p + 1);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            design[(i, j)] = v;
        }
        design[(i, p)] = 1.0;
    }
    let y = DVector::from_column_slice(targets);
    let mut gram = design.transpose() * &design;
    for j in 0..p {
        gram[(j, j)] += lambda;
    }
    let rhs = design.transpose() * y;

    let svd = gram.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let min_sv = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if !(max_sv > 0.0) || min_sv < 1e-10 * max_sv {
        return Err(AssessError::SingularSystem);
    }
    let solution = svd
        .solve(&rhs, 0.0)
        .map_err(|_| AssessError::SingularSystem)?;
    let coefficients = solution.as_slice()[..p].to_vec();
    let intercept = solution[p];
    Ok((coefficients, intercept))
}

impl FittedRegressor {
    /// Predict a severity on the 0-10 scale.
    pub fn predict(&self, features: &[f64]) -> Result<f64, AssessError> {
        if features.len() != self.feature_names.len() {
            return Err(AssessError::FeatureMismatch(format!(
                "expected {} features, got {}",
                self.feature_names.len(),
                features.len()
            )));
        }
        let raw = match &self.params {
            ModelParams::Zero { mean } => *mean,
            ModelParams::Knn { k, points, targets } => {
                let probe = z_row(features, &self.means, &self.sds);
                let mut order: Vec<usize> = (0..points.len()).collect();
                let dist = |i: usize| -> f64 {
                    points[i]
                        .iter()
                        .zip(&probe)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum()
                };
                order.sort_by(|&a, &b| dist(a).total_cmp(&dist(b)).then(a.cmp(&b)));
                let k = (*k).min(points.len());
                order[..k].iter().map(|&i| targets[i]).sum::<f64>() / k as f64
            }
            ModelParams::Ridge {
                coefficients,
                intercept,
            } => {
                let input = match spec_space(&self.spec) {
                    Preprocessing::ZStandardize => z_row(features, &self.means, &self.sds),
                    Preprocessing::None => features.to_vec(),
                };
                intercept
                    + coefficients
                        .iter()
                        .zip(&input)
                        .map(|(c, v)| c * v)
                        .sum::<f64>()
            }
        };
        Ok(raw.clamp(0.0, 10.0))
    }

    /// Z-standardized view of a feature vector under the frozen training
    /// statistics.
    pub fn z_view(&self, features: &[f64]) -> Vec<f64> {
        z_row(features, &self.means, &self.sds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_dataset() -> Dataset {
        // y = 2*x1 + 1*x2 + 1, exactly linear
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![2.0, 1.0],
            vec![0.5, 2.0],
        ];
        let targets: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] + r[1] + 1.0).collect();
        Dataset::new(vec!["x1".into(), "x2".into()], rows, targets).unwrap()
    }

    #[test]
    fn unregularized_ridge_interpolates_linear_data() {
        let dataset = linear_dataset();
        let model = fit_regressor(&RegressorSpec::ridge(0.0), &dataset).unwrap();
        let mut sum_sq = 0.0;
        for (row, &target) in dataset.rows.iter().zip(&dataset.targets) {
            let prediction = model.predict(row).unwrap();
            sum_sq += (prediction - target) * (prediction - target);
        }
        let rmse = (sum_sq / dataset.len() as f64).sqrt();
        assert!(rmse < 1e-8, "rmse = {rmse}");
    }

    #[test]
    fn zero_rule_predicts_the_mean() {
        let dataset = Dataset::new(
            vec!["x".into()],
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![2.0, 4.0, 6.0],
        )
        .unwrap();
        let model = fit_regressor(&RegressorSpec::zero_rule(), &dataset).unwrap();
        assert_eq!(model.predict(&[100.0]).unwrap(), 4.0);
    }

    #[test]
    fn knn_one_reproduces_training_targets() {
        let dataset = linear_dataset();
        let model = fit_regressor(&RegressorSpec::knn(1), &dataset).unwrap();
        for (row, &target) in dataset.rows.iter().zip(&dataset.targets) {
            assert_eq!(model.predict(row).unwrap(), target.clamp(0.0, 10.0));
        }
    }

    #[test]
    fn collinear_features_with_zero_lambda_are_singular() {
        let rows = vec![
            vec![1.0, 2.0],
            vec![2.0, 4.0],
            vec![3.0, 6.0],
            vec![4.0, 8.0],
        ];
        let dataset = Dataset::new(
            vec!["x".into(), "2x".into()],
            rows,
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        let err = fit_regressor(
            &RegressorSpec {
                kind: RegressorKind::Ridge { lambda: 0.0 },
                preprocessing: Preprocessing::None,
            },
            &dataset,
        )
        .unwrap_err();
        assert!(matches!(err, AssessError::SingularSystem));
        // a positive penalty regularizes the same system
        assert!(fit_regressor(
            &RegressorSpec {
                kind: RegressorKind::Ridge { lambda: 0.5 },
                preprocessing: Preprocessing::None,
            },
            &dataset,
        )
        .is_ok());
    }

    #[test]
    fn predictions_clamp_to_severity_scale() {
        let dataset = Dataset::new(
            vec!["x".into()],
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![0.0, 5.0, 10.0],
        )
        .unwrap();
        let model = fit_regressor(&RegressorSpec::ridge(0.0), &dataset).unwrap();
        assert_eq!(model.predict(&[100.0]).unwrap(), 10.0);
        assert_eq!(model.predict(&[-100.0]).unwrap(), 0.0);
    }

    #[test]
    fn model_round_trips_through_json() {
        let dataset = linear_dataset();
        let model = fit_regressor(&RegressorSpec::ridge(0.1), &dataset).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: FittedRegressor = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }
}
