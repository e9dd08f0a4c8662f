//! Quantum extraction of eigenvalue bit strings and overlap magnitudes.
//!
//! Every controller walks the divergence tree of the spectrum from the least
//! significant bit upwards. They differ in how branches are scheduled:
//! [`hipea1`] reruns a single-ancilla experiment per eigenvalue, [`hipea2`]
//! gives each eigenvalue its own ancilla in one experiment, and [`hipea3`]
//! estimates several bits per iteration by guessing the intermediate ones.

pub mod hipea1;
pub mod hipea2;
pub mod hipea3;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binary::{BinaryFraction, RotationParameter};
use crate::engine::AncillaAssignment;
use crate::statevector::{derive_seed, multinomial};

pub use hipea1::run_hipea1;
pub use hipea2::run_hipea2;
pub use hipea3::run_hipea3;

pub const DEFAULT_SHOTS: u64 = 100_000;
pub const EXACT_THRESHOLD: f64 = 1e-9;

const STREAM_BOTTOM: u64 = 0xb0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Hipea1,
    Hipea2,
    Hipea3,
    Hhl,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Hipea1 => "hipea1",
            Self::Hipea2 => "hipea2",
            Self::Hipea3 => "hipea3",
            Self::Hhl => "hhl",
        }
    }

    fn stream_tag(self) -> u64 {
        match self {
            Self::Hipea1 => 1,
            Self::Hipea2 => 2,
            Self::Hipea3 => 3,
            Self::Hhl => 4,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

impl Mode {
    /// Probability below which a branch counts as dead.
    pub fn threshold(&self) -> f64 {
        match self {
            Self::Exact => EXACT_THRESHOLD,
            Self::Sampled { shots, .. } => (5.0 / *shots as f64).max(1e-4),
        }
    }

    pub fn shots(&self) -> Option<u64> {
        match self {
            Self::Exact => None,
            Self::Sampled { shots, .. } => Some(*shots),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionOptions {
    pub mode: Mode,
    /// Run independent experiments on the rayon pool. Results do not depend on it.
    pub parallel: bool,
    /// Upper limit on ancillas for the multi-ancilla controller.
    pub ancilla_budget: Option<usize>,
}

impl ExtractionOptions {
    pub fn exact() -> Self {
        Self { mode: Mode::Exact, parallel: true, ancilla_budget: None }
    }

    pub fn sampled(shots: u64, seed: u64) -> Self {
        Self { mode: Mode::Sampled { shots, seed }, parallel: true, ancilla_budget: None }
    }
}

/// One logged outcome: probability of a path (written high bit first) that
/// ends with this ancilla's reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCell {
    pub ancilla: usize,
    pub path: String,
    pub probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<u64>,
}

/// Settings of one ancilla in one iteration; ancillas are numbered from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncillaSetting {
    pub ancilla: usize,
    pub mapped_iteration: u32,
    pub power: u64,
    pub omega: RotationParameter,
}

impl From<&AncillaAssignment> for AncillaSetting {
    fn from(a: &AncillaAssignment) -> Self {
        Self { ancilla: a.ancilla + 1, mapped_iteration: a.mapped_iteration, power: a.power, omega: a.omega.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    pub settings: Vec<AncillaSetting>,
    pub outcomes: Vec<OutcomeCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentLog {
    pub experiment: usize,
    /// Low bits the experiment was started on, high bit first.
    pub target_prefix: String,
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCounters {
    pub experiments: usize,
    /// Iterations per experiment (single-ancilla) or in total (others).
    pub iterations: usize,
    /// Peak number of ancillas in one register.
    pub ancillas: usize,
    pub bottom_qubits: usize,
    pub qubits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaEigenvalue {
    pub ancilla: usize,
    pub bitstring: BinaryFraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    SingleAncilla {
        divergence_iterations: Vec<u32>,
    },
    MultiAncilla {
        activation_iterations: Vec<u32>,
        ancillas_per_iteration: Vec<usize>,
        assignment: Vec<AncillaEigenvalue>,
    },
    Parallel {
        n_top: usize,
        experiments_per_iteration: Vec<usize>,
        survivors_per_iteration: Vec<Vec<String>>,
        pruned: Vec<String>,
    },
}

/// One extracted eigenvalue with its overlap magnitude and the bottom-register
/// distribution measured after post-selecting its path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedPair {
    pub bitstring: BinaryFraction,
    pub beta_abs: f64,
    /// Final-iteration path probability as observed (exact or frequency).
    pub path_probability: f64,
    pub bottom_distribution: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bottom_counts: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub algorithm: Algorithm,
    pub pairs: Vec<ExtractedPair>,
    pub resources: ResourceCounters,
    pub schedule: Schedule,
    pub experiments: Vec<ExperimentLog>,
}

impl ExtractionResult {
    pub fn bitstrings(&self) -> Vec<BinaryFraction> {
        self.pairs.iter().map(|p| p.bitstring.clone()).collect()
    }

    pub fn beta_abs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.beta_abs).collect()
    }

    pub fn distributions(&self) -> Vec<(BinaryFraction, Vec<f64>)> {
        self.pairs.iter().map(|p| (p.bitstring.clone(), p.bottom_distribution.clone())).collect()
    }
}

/// `(min, max)` experiment counts of the parallel controller for `n_eig`
/// eigenvalues, `m` bits and `n_top` ancillas.
pub fn experiment_count_bounds(n_eig: u64, m: u32, n_top: u32) -> (u64, u64) {
    let iterations = u64::from(m.div_ceil(n_top));
    let guesses = 1u64 << (n_top - 1);
    let max = guesses + n_eig * (iterations - 1) * guesses;
    let min = iterations * (guesses - 1);
    (min, max)
}

/// Path written high bit first from bits listed low bit first.
pub(crate) fn path_label(lsb_first: &[u8]) -> String {
    lsb_first.iter().rev().map(|b| char::from(b'0' + b)).collect()
}

pub(crate) fn path_id(lsb_first: &[u8]) -> u64 {
    lsb_first.iter().enumerate().fold(1u64 << lsb_first.len(), |acc, (i, &b)| acc | (u64::from(b) << i))
}

/// Exact or sampled readings of the two continuations of one path.
pub(crate) struct Observation {
    pub probs: [f64; 2],
    pub counts: Option<[u64; 2]>,
}

impl Observation {
    pub fn viable(&self, bit: u8, threshold: f64) -> bool {
        self.probs[usize::from(bit)] >= threshold
    }

    pub fn cell(&self, ancilla: usize, prefix: &[u8], bit: u8) -> OutcomeCell {
        let mut path = prefix.to_vec();
        path.push(bit);
        OutcomeCell {
            ancilla,
            path: path_label(&path),
            probability: self.probs[usize::from(bit)],
            counts: self.counts.map(|c| c[usize::from(bit)]),
        }
    }
}

/// Observes joint path probabilities `exact`; in sampled mode one batch of
/// shots is drawn over the two continuations and everything else.
pub(crate) fn observe(mode: &Mode, exact: [f64; 2], stream: &[u64]) -> Observation {
    match mode {
        Mode::Exact => Observation { probs: exact, counts: None },
        Mode::Sampled { shots, seed } => {
            let rest = (1.0 - exact[0] - exact[1]).max(0.0);
            let c = multinomial(&[exact[0].max(0.0), exact[1].max(0.0), rest], *shots, derive_seed(*seed, stream));
            let s = *shots as f64;
            Observation { probs: [c[0] as f64 / s, c[1] as f64 / s], counts: Some([c[0], c[1]]) }
        }
    }
}

/// Final path readings turned into extracted pairs. Sampled magnitudes are
/// renormalized so that the squared overlaps sum to one.
pub(crate) fn finalize_pairs(
    mode: &Mode,
    algorithm: Algorithm,
    raw: Vec<(BinaryFraction, f64, Vec<f64>)>,
) -> Vec<ExtractedPair> {
    let total: f64 = raw.iter().map(|r| r.1).sum();
    raw.into_iter()
        .map(|(bitstring, observed, dist)| {
            let (beta_abs, bottom_distribution, bottom_counts) = match mode {
                Mode::Exact => (observed.sqrt(), dist, None),
                Mode::Sampled { shots, seed } => {
                    let stream = [STREAM_BOTTOM, algorithm.stream_tag(), bitstring.numerator()];
                    let counts = multinomial(&dist, *shots, derive_seed(*seed, &stream));
                    let freq = counts.iter().map(|&c| c as f64 / *shots as f64).collect();
                    ((observed / total).sqrt(), freq, Some(counts))
                }
            };
            ExtractedPair { bitstring, beta_abs, path_probability: observed, bottom_distribution, bottom_counts }
        })
        .collect()
}

pub(crate) fn map_maybe_parallel<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_bounds_for_the_demo() {
        assert_eq!(experiment_count_bounds(4, 9, 3), (9, 36));
        assert_eq!(experiment_count_bounds(4, 9, 1), (0, 4 * 8 + 1));
    }

    #[test]
    fn labels_and_ids() {
        assert_eq!(path_label(&[0, 1, 1]), "110");
        assert_ne!(path_id(&[0]), path_id(&[0, 0]));
        assert_ne!(path_id(&[1, 0]), path_id(&[0, 1]));
    }

    #[test]
    fn thresholds() {
        assert_eq!(Mode::Exact.threshold(), 1e-9);
        assert_eq!(Mode::Sampled { shots: 100_000, seed: 0 }.threshold(), 1e-4);
        assert_eq!(Mode::Sampled { shots: 1000, seed: 0 }.threshold(), 5e-3);
    }
}
