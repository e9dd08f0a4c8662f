//! One iteration of the phase-estimation circuit on a shared bottom register.
//!
//! Each assigned ancilla gets `H`, a controlled `U^power`, a phase rotation
//! and a final `H`. Assignments on different ancillas commute.

pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::binary::RotationParameter;
use crate::error::SimError;
use crate::numerics::Spectrum;
use crate::statevector::{OutcomeDistribution, QuantumState};

/// Ancilla settings for one slot of an iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncillaAssignment {
    /// Top qubit, 0-based.
    pub ancilla: usize,
    /// The single-ancilla iteration this slot reproduces.
    pub mapped_iteration: u32,
    pub power: u64,
    pub omega: RotationParameter,
}

impl AncillaAssignment {
    /// Slot estimating bit `m + 1 - l` of the eigenvalue, given the path's low
    /// bits (least significant first) that are already known.
    pub fn for_iteration(ancilla: usize, m: u32, l: u32, known_lsb_first: &[u8]) -> Self {
        assert!((1..=m).contains(&l), "iteration {l} outside 1..={m}");
        assert_eq!(known_lsb_first.len() as u32, l - 1, "need exactly l - 1 known bits");
        Self {
            ancilla,
            mapped_iteration: l,
            power: 1u64 << (m - l),
            omega: RotationParameter::from_path_lsb_first(known_lsb_first),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationSpec {
    pub assignments: Vec<AncillaAssignment>,
}

impl IterationSpec {
    pub fn ancillas(&self) -> Vec<usize> {
        self.assignments.iter().map(|a| a.ancilla).collect()
    }

    fn validate(&self, n_top: usize) -> Result<(), SimError> {
        let mut seen = vec![false; n_top];
        for a in &self.assignments {
            if a.ancilla >= n_top {
                return Err(SimError::BadQubit { qubit: a.ancilla, n_qubits: n_top });
            }
            if std::mem::replace(&mut seen[a.ancilla], true) {
                return Err(SimError::DuplicateAncilla(a.ancilla));
            }
            if !a.power.is_power_of_two() {
                return Err(SimError::BadPower(a.power));
            }
        }
        Ok(())
    }
}

/// Runs one iteration in place and returns the joint distribution of the
/// assigned ancillas (in assignment order). Ancillas must start in `|0>`.
pub fn run_iteration_circuit(
    state: &mut QuantumState,
    spectrum: &Spectrum,
    spec: &IterationSpec,
) -> Result<OutcomeDistribution, SimError> {
    spec.validate(state.n_top())?;
    if state.definite_top() != Some(0) {
        return Err(SimError::AncillasNotReset);
    }
    for a in &spec.assignments {
        state.apply_hadamard(a.ancilla)?;
        state.apply_controlled_power(a.ancilla, spectrum, a.power)?;
        state.apply_phase(a.ancilla, a.omega.angle())?;
        state.apply_hadamard(a.ancilla)?;
    }
    state.outcome_distribution(&spec.ancillas())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use crate::statevector::init_state;

    #[test]
    fn first_iteration_on_the_demo_fixture() {
        let problem = fixture::demo();
        let spectrum = &problem.spectrum;
        let mut s = init_state(1, &spectrum.rhs()).unwrap();
        let spec = IterationSpec { assignments: vec![AncillaAssignment::for_iteration(0, 9, 1, &[])] };
        let d = run_iteration_circuit(&mut s, spectrum, &spec).unwrap();
        assert!((d.probability(&[0]) - 0.05260).abs() < 1e-4);
        assert!((d.probability(&[1]) - 0.94740).abs() < 1e-4);
    }

    #[test]
    fn three_ancillas_with_zero_rotations() {
        let problem = fixture::demo();
        let spectrum = &problem.spectrum;
        let mut s = init_state(3, &spectrum.rhs()).unwrap();
        let assignments = (0..3).map(|q| AncillaAssignment::for_iteration(q, 9, q as u32 + 1, &vec![0; q])).collect();
        let d = run_iteration_circuit(&mut s, spectrum, &IterationSpec { assignments }).unwrap();
        assert!((d.probability(&[0, 0, 0]) - 0.03331).abs() < 1e-4);
    }

    #[test]
    fn rejects_non_power_of_two() {
        let problem = fixture::demo();
        let mut s = init_state(1, &problem.spectrum.rhs()).unwrap();
        let mut a = AncillaAssignment::for_iteration(0, 9, 1, &[]);
        a.power = 3;
        let err = run_iteration_circuit(&mut s, &problem.spectrum, &IterationSpec { assignments: vec![a] });
        assert_eq!(err.unwrap_err(), SimError::BadPower(3));
    }

    #[test]
    fn requires_reset_ancillas() {
        let problem = fixture::demo();
        let mut s = init_state(1, &problem.spectrum.rhs()).unwrap();
        s.apply_hadamard(0).unwrap();
        let spec = IterationSpec { assignments: vec![AncillaAssignment::for_iteration(0, 9, 1, &[])] };
        assert_eq!(
            run_iteration_circuit(&mut s, &problem.spectrum, &spec).unwrap_err(),
            SimError::AncillasNotReset
        );
    }
}
