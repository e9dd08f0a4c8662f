use serde::{Deserialize, Serialize};

use super::QuantumState;
use crate::error::SimError;

pub const IMPOSSIBLE_TOL: f64 = 1e-14;

/// Joint outcome probabilities of a list of qubits. Index `k` is the outcome
/// whose bits, read from `qubits[0]` down, spell `k` in binary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub qubits: Vec<usize>,
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn index_of(bits: &[u8]) -> usize {
        bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }

    pub fn probability(&self, bits: &[u8]) -> f64 {
        self.probabilities[Self::index_of(bits)]
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Outcome strings with probabilities, in index order.
    pub fn entries(&self) -> Vec<(String, f64)> {
        let k = self.qubits.len();
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let label = (0..k).map(|j| if (i >> (k - 1 - j)) & 1 == 1 { '1' } else { '0' }).collect();
                (label, p)
            })
            .collect()
    }
}

impl QuantumState {
    pub fn outcome_distribution(&self, qubits: &[usize]) -> Result<OutcomeDistribution, SimError> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let shifts: Vec<usize> = qubits.iter().map(|&q| self.shift(q)).collect();
        let mut probabilities = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let k = shifts.iter().fold(0, |acc, s| (acc << 1) | ((i >> s) & 1));
            probabilities[k] += a.norm_sqr();
        }
        Ok(OutcomeDistribution { qubits: qubits.to_vec(), probabilities })
    }

    /// Projects onto the given outcome and renormalizes; returns its probability.
    pub fn collapse_onto(&mut self, qubits: &[usize], outcome: &[u8]) -> Result<f64, SimError> {
        if qubits.len() != outcome.len() {
            return Err(SimError::DimensionMismatch { expected: qubits.len(), found: outcome.len() });
        }
        let dist = self.outcome_distribution(qubits)?;
        let probability = dist.probability(outcome);
        if probability < IMPOSSIBLE_TOL {
            let label = outcome.iter().map(|b| char::from(b'0' + b)).collect();
            return Err(SimError::ImpossibleOutcome { outcome: label, probability });
        }
        let shifts: Vec<usize> = qubits.iter().map(|&q| self.shift(q)).collect();
        let scale = 1.0 / probability.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            let keep = shifts.iter().zip(outcome).all(|(s, &b)| ((i >> s) & 1) as u8 == b);
            *a = if keep { *a * scale } else { num_complex::Complex64::new(0.0, 0.0) };
        }
        Ok(probability)
    }
}

#[cfg(test)]
mod tests {
    use super::super::init_state;
    use super::*;

    #[test]
    fn distribution_orders_first_qubit_most_significant() {
        let mut s = init_state(2, &[1.0, 0.0]).unwrap();
        s.apply_hadamard(0).unwrap();
        let d = s.outcome_distribution(&[0, 1]).unwrap();
        assert!((d.probability(&[1, 0]) - 0.5).abs() < 1e-15);
        assert_eq!(d.probability(&[0, 1]), 0.0);
        assert_eq!(d.entries()[2].0, "10");
    }

    #[test]
    fn collapse_rejects_impossible_outcomes() {
        let mut s = init_state(1, &[1.0, 0.0]).unwrap();
        let err = s.collapse_onto(&[0], &[1]).unwrap_err();
        assert!(matches!(err, SimError::ImpossibleOutcome { .. }));
        let p = s.collapse_onto(&[0], &[0]).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn collapse_renormalizes() {
        let mut s = init_state(1, &[0.6, 0.8]).unwrap();
        s.apply_hadamard(0).unwrap();
        let p = s.collapse_onto(&[1], &[1]).unwrap();
        assert!((p - 0.64).abs() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
    }
}
