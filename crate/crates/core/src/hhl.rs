//! Textbook HHL baseline on the same dense simulator.
//!
//! Register layout: qubit 0 is the rotation ancilla, qubits `1..=m` form the
//! clock register (qubit 1 most significant), the rest is the bottom register.
//! Phase estimation writes `phi_j` into the clock, a controlled `R_y` sets the
//! ancilla amplitude to `C / phi_j`, and the estimation is undone. The state
//! kept after post-selecting the ancilla on 1 is proportional to `x`, so only
//! the direction of the solution is available.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::HhlError;
use crate::numerics::{norm, Spectrum};
use crate::statevector::{init_state, CMatrix};

pub const MAX_CLOCK_QUBITS: u32 = 12;
const LEAKAGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HhlResult {
    pub x_normalized: Vec<f64>,
    pub success_probability: f64,
    pub c: f64,
    /// Probability that the clock register is not back in `|0...0>`.
    pub middle_leakage: f64,
}

fn inverse_qft(qubits: u32) -> CMatrix {
    let size = 1usize << qubits;
    let scale = 1.0 / (size as f64).sqrt();
    CMatrix::from_fn(size, |k, y| {
        let turns = ((k * y) % size) as u128;
        crate::statevector::dyadic_phase(size as u128 - turns, qubits) * scale
    })
}

/// Runs the circuit with rotation constant `c` (default: smallest eigenvalue).
pub fn run_hhl(spectrum: &Spectrum, c: Option<f64>) -> Result<HhlResult, HhlError> {
    let m = spectrum.m();
    if m > MAX_CLOCK_QUBITS {
        return Err(HhlError::ClockTooLarge(m));
    }
    let phi_min = spectrum.pairs().iter().map(|p| p.phi.value()).fold(f64::INFINITY, f64::min);
    let c = c.unwrap_or(phi_min);
    if !(c > 0.0 && c <= phi_min) {
        return Err(HhlError::InvalidConstant { c, phi_min });
    }
    let clock: Vec<usize> = (1..=m as usize).collect();
    let mut state = init_state(1 + clock.len(), &spectrum.rhs())?;
    let full = 1u64 << m;

    let estimate = |state: &mut crate::statevector::QuantumState, inverse: bool| -> Result<(), HhlError> {
        let qft = inverse_qft(m);
        if inverse {
            state.apply_unitary(&clock, &qft.adjoint())?;
        }
        for &q in &clock {
            let power = 1u64 << (m as usize - q);
            let power = if inverse { full - power } else { power };
            if !inverse {
                state.apply_hadamard(q)?;
            }
            state.apply_controlled_power(q, spectrum, power)?;
            if inverse {
                state.apply_hadamard(q)?;
            }
        }
        if !inverse {
            state.apply_unitary(&clock, &qft)?;
        }
        Ok(())
    };

    estimate(&mut state, false)?;
    let zero = Complex64::new(0.0, 0.0);
    state.apply_uniformly_controlled(&clock, 0, |k| {
        let lambda = k as f64 / full as f64;
        if k == 0 || c > lambda {
            return [[Complex64::new(1.0, 0.0), zero], [zero, Complex64::new(1.0, 0.0)]];
        }
        let s = c / lambda;
        let co = (1.0 - s * s).sqrt();
        [[Complex64::new(co, 0.0), Complex64::new(-s, 0.0)], [Complex64::new(s, 0.0), Complex64::new(co, 0.0)]]
    })?;
    estimate(&mut state, true)?;

    let clock_dist = state.outcome_distribution(&clock)?;
    let middle_leakage = (1.0 - clock_dist.probabilities[0]).max(0.0);
    if middle_leakage > LEAKAGE_TOL {
        return Err(HhlError::MiddleEntangled(middle_leakage));
    }
    let success_probability = state.outcome_distribution(&[0])?.probabilities[1];
    if success_probability < 1e-14 {
        return Err(HhlError::PostSelectionNull(success_probability));
    }
    let mut ones = vec![1u8];
    ones.extend(std::iter::repeat_n(0u8, clock.len()));
    let mut qubits = vec![0];
    qubits.extend_from_slice(&clock);
    state.collapse_onto(&qubits, &ones)?;
    let bottom = state.bottom_amplitudes()?;
    let x_normalized = bottom.iter().map(|a| a.re).collect();

    Ok(HhlResult { x_normalized, success_probability, c, middle_leakage })
}

/// `|| x / ||x|| - hhl.x_normalized ||`.
pub fn compare_normalized(x: &[f64], hhl: &HhlResult) -> Result<f64, HhlError> {
    let nx = norm(x);
    if nx == 0.0 {
        return Err(HhlError::ZeroVector);
    }
    let diff: Vec<f64> = x.iter().zip(&hhl.x_normalized).map(|(a, b)| a / nx - b).collect();
    Ok(norm(&diff))
}
