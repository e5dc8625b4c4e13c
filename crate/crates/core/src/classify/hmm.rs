//! Discrete hidden Markov model: scaled forward likelihood and Viterbi
//! decoding over a finite observation alphabet.

use serde::{Deserialize, Serialize};

use super::ClassifyError;

const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

/// Time-invariant discrete HMM with initial probabilities `pi`,
/// transition matrix `A` (rows: from-state) and emission matrix `B`
/// (rows: state, columns: symbol).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteHMM {
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<f64>>,
}

fn check_distribution(row: &[f64], what: &str) -> Result<(), ClassifyError> {
    if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(ClassifyError::InvalidDistribution(format!(
            "{what} contains a negative or non-finite entry"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(ClassifyError::InvalidDistribution(format!(
            "{what} sums to {sum}, not 1"
        )));
    }
    Ok(())
}

impl DiscreteHMM {
    pub fn new(
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
        emission: Vec<Vec<f64>>,
    ) -> Result<Self, ClassifyError> {
        let states = initial.len();
        if states == 0 || transition.len() != states || emission.len() != states {
            return Err(ClassifyError::InvalidDistribution(
                "shape mismatch between pi, A, and B".to_string(),
            ));
        }
        check_distribution(&initial, "initial distribution")?;
        for (i, row) in transition.iter().enumerate() {
            if row.len() != states {
                return Err(ClassifyError::InvalidDistribution(format!(
                    "transition row {i} has wrong length"
                )));
            }
            check_distribution(row, &format!("transition row {i}"))?;
        }
        let alphabet = emission[0].len();
        for (i, row) in emission.iter().enumerate() {
            if row.len() != alphabet {
                return Err(ClassifyError::InvalidDistribution(format!(
                    "emission row {i} has wrong length"
                )));
            }
            check_distribution(row, &format!("emission row {i}"))?;
        }
        Ok(Self {
            initial,
            transition,
            emission,
        })
    }

    pub fn states(&self) -> usize {
        self.initial.len()
    }

    pub fn alphabet(&self) -> usize {
        self.emission[0].len()
    }

    fn check_observations(&self, observations: &[usize]) -> Result<(), ClassifyError> {
        let alphabet = self.alphabet();
        for &o in observations {
            if o >= alphabet {
                return Err(ClassifyError::InvalidObservation {
                    index: o,
                    alphabet,
                });
            }
        }
        Ok(())
    }

    /// Log-likelihood of the observation sequence, summed over all state
    /// paths (scaled forward algorithm). Impossible sequences yield -inf.
    pub fn forward_log_likelihood(&self, observations: &[usize]) -> Result<f64, ClassifyError> {
        self.check_observations(observations)?;
        if observations.is_empty() {
            return Ok(0.0);
        }
        let states = self.states();
        let mut alpha: Vec<f64> = (0..states)
            .map(|i| self.initial[i] * self.emission[i][observations[0]])
            .collect();
        let mut log_likelihood = 0.0;
        for t in 0..observations.len() {
            if t > 0 {
                let prev = alpha.clone();
                for (j, slot) in alpha.iter_mut().enumerate() {
                    let mut sum = 0.0;
                    for (i, &p) in prev.iter().enumerate() {
                        sum += p * self.transition[i][j];
                    }
                    *slot = sum * self.emission[j][observations[t]];
                }
            }
            let scale: f64 = alpha.iter().sum();
            if scale <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            alpha.iter_mut().for_each(|a| *a /= scale);
            log_likelihood += scale.ln();
        }
        Ok(log_likelihood)
    }

    /// Most likely state path; ties resolve to the lowest state index.
    pub fn viterbi(&self, observations: &[usize]) -> Result<Vec<usize>, ClassifyError> {
        self.check_observations(observations)?;
        if observations.is_empty() {
            return Ok(Vec::new());
        }
        let states = self.states();
        let log = |p: f64| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY };
        let mut delta: Vec<f64> = (0..states)
            .map(|i| log(self.initial[i]) + log(self.emission[i][observations[0]]))
            .collect();
        let mut back: Vec<Vec<usize>> = Vec::with_capacity(observations.len());
        back.push(vec![0; states]);
        for &observation in &observations[1..] {
            let mut next = vec![f64::NEG_INFINITY; states];
            let mut pointers = vec![0; states];
            for j in 0..states {
                let mut best = f64::NEG_INFINITY;
                let mut best_i = 0;
                for i in 0..states {
                    let candidate = delta[i] + log(self.transition[i][j]);
                    if candidate > best {
                        best = candidate;
                        best_i = i;
                    }
                }
                next[j] = best + log(self.emission[j][observation]);
                pointers[j] = best_i;
            }
            delta = next;
            back.push(pointers);
        }
        let mut last = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, &d) in delta.iter().enumerate() {
            if d > best {
                best = d;
                last = i;
            }
        }
        let mut path = vec![last; observations.len()];
        for t in (1..observations.len()).rev() {
            path[t - 1] = back[t][path[t]];
        }
        Ok(path)
    }
}
