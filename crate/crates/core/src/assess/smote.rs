//! Synthetic oversampling for regression: new instances interpolate a
//! parent and one of its k nearest neighbors (Euclidean in z-space),
//! with the target interpolated by the same factor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{column_stats, z_row, AssessError, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoteConfig {
    /// Neighborhood size (default 5).
    pub k: usize,
    /// Number of synthetic instances to generate.
    pub n_new: usize,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self { k: 5, n_new: 0 }
    }
}

/// Append `n_new` synthetic instances to the dataset, deterministic for
/// a given seed. Requires more instances than neighbors (`len > k >= 1`).
pub fn smote_regression(
    dataset: &Dataset,
    k: usize,
    n_new: usize,
    seed: u64,
) -> Result<Dataset, AssessError> {
    if k < 1 {
        return Err(AssessError::Malformed("smote requires k >= 1".to_string()));
    }
    if dataset.len() <= k {
        return Err(AssessError::TooFewInstances {
            need: k + 1,
            got: dataset.len(),
        });
    }
    let (means, sds) = column_stats(&dataset.rows, dataset.feature_names.len());
    let z_rows: Vec<Vec<f64>> = dataset
        .rows
        .iter()
        .map(|row| z_row(row, &means, &sds))
        .collect();

    // k nearest neighbors per instance, self excluded, ties by index
    let neighbors: Vec<Vec<usize>> = (0..dataset.len())
        .map(|i| {
            let mut order: Vec<usize> = (0..dataset.len()).filter(|&j| j != i).collect();
            let dist = |j: usize| -> f64 {
                z_rows[i]
                    .iter()
                    .zip(&z_rows[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum()
            };
            order.sort_by(|&a, &b| dist(a).total_cmp(&dist(b)).then(a.cmp(&b)));
            order.truncate(k);
            order
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = dataset.rows.clone();
    let mut targets = dataset.targets.clone();
    for _ in 0..n_new {
        let base = rng.random_range(0..dataset.len());
        let neighbor = neighbors[base][rng.random_range(0..k)];
        let u: f64 = rng.random();
        let row: Vec<f64> = dataset.rows[base]
            .iter()
            .zip(&dataset.rows[neighbor])
            .map(|(a, b)| a + u * (b - a))
            .collect();
        rows.push(row);
        targets.push(dataset.targets[base] + u * (dataset.targets[neighbor] - dataset.targets[base]));
    }
    Dataset::new(dataset.feature_names.clone(), rows, targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_dataset() -> Dataset {
        Dataset::new(
            vec!["x".into(), "y".into()],
            vec![
                vec![0.0, 0.0],
                vec![1.0, 1.0],
                vec![2.0, 0.5],
                vec![3.0, 2.0],
            ],
            vec![0.0, 2.0, 4.0, 6.0],
        )
        .unwrap()
    }

    #[test]
    fn synthetic_points_interpolate_parents() {
        let dataset = toy_dataset();
        let augmented = smote_regression(&dataset, 2, 50, 7).unwrap();
        assert_eq!(augmented.len(), dataset.len() + 50);
        let (min_t, max_t) = (0.0, 6.0);
        for i in dataset.len()..augmented.len() {
            let row = &augmented.rows[i];
            // componentwise inside the hull of the original points
            assert!(row[0] >= 0.0 && row[0] <= 3.0);
            assert!(row[1] >= 0.0 && row[1] <= 2.0);
            let t = augmented.targets[i];
            assert!(t >= min_t && t <= max_t);
        }
    }

    #[test]
    fn identical_parents_duplicate_themselves() {
        let dataset = Dataset::new(
            vec!["x".into()],
            vec![vec![1.5], vec![1.5], vec![1.5]],
            vec![3.0, 3.0, 3.0],
        )
        .unwrap();
        let augmented = smote_regression(&dataset, 1, 10, 3).unwrap();
        for i in 3..augmented.len() {
            assert_eq!(augmented.rows[i], vec![1.5]);
            assert_eq!(augmented.targets[i], 3.0);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let dataset = toy_dataset();
        let a = smote_regression(&dataset, 2, 20, 42).unwrap();
        let b = smote_regression(&dataset, 2, 20, 42).unwrap();
        let c = smote_regression(&dataset, 2, 20, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn too_small_datasets_are_rejected() {
        let dataset = toy_dataset();
        assert!(matches!(
            smote_regression(&dataset, 4, 5, 0),
            Err(AssessError::TooFewInstances { .. })
        ));
        assert!(smote_regression(&dataset, 0, 5, 0).is_err());
    }
}
