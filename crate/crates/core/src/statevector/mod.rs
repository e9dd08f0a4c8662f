//! Dense statevector simulation of a top (ancilla) register over a bottom
//! register that stores the right-hand side.
//!
//! Qubit 0 is the most significant bit of the basis index. Top qubits come
//! first, so a basis index is `top_value << n_bottom | bottom_index`, and
//! `bottom_index` addresses eigenvector components directly.

mod measure;
mod sampling;

pub use measure::OutcomeDistribution;
pub use sampling::{derive_seed, multinomial, sample_counts};

use num_complex::Complex64;

use crate::error::SimError;
use crate::numerics::Spectrum;

pub const MAX_QUBITS: usize = 20;
const NORM_TOL: f64 = 1e-10;
const DEFINITE_TOL: f64 = 1e-12;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn add_assign(&mut self, other: &CMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Largest entry of `|M^dagger M - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.get(i, j) - target).norm());
            }
        }
        worst
    }
}

/// `e^{2 pi i n / 2^width}`, exact at quarter turns.
pub fn dyadic_phase(numerator: u128, width: u32) -> Complex64 {
    let modulus = 1u128 << width;
    let n = numerator % modulus;
    if (4 * n).is_multiple_of(modulus) {
        return match 4 * n / modulus {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let theta = 2.0 * std::f64::consts::PI * (n as f64 / modulus as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// `e^{i omega}`, snapped to exact values at multiples of pi/2.
pub fn phase_factor(omega: f64) -> Complex64 {
    let quarters = omega / std::f64::consts::FRAC_PI_2;
    let nearest = quarters.round();
    if (quarters - nearest).abs() < 1e-12 {
        return match (nearest as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::new(omega.cos(), omega.sin())
}

/// `U^p` restricted to the bottom register, with the identity on the part of
/// the space the spectrum does not cover.
pub fn controlled_power_operator(spectrum: &Spectrum, power: u64) -> CMatrix {
    let n = spectrum.dim();
    let mut op = CMatrix::identity(n);
    for pair in spectrum.pairs() {
        let phase = dyadic_phase(u128::from(pair.phi.numerator()) * u128::from(power), pair.phi.width());
        let delta = phase - Complex64::new(1.0, 0.0);
        if delta == Complex64::new(0.0, 0.0) {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                let v = op.get(i, j) + delta * (pair.u[i] * pair.u[j]);
                op.set(i, j, v);
            }
        }
    }
    op
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_top: usize,
    n_bottom: usize,
    amps: Vec<Complex64>,
}

/// `|0...0>_top (x) |b>` for a real unit vector `b`.
pub fn init_state(n_top: usize, b: &[f64]) -> Result<QuantumState, SimError> {
    let bottom: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    QuantumState::with_bottom(n_top, &bottom)
}

impl QuantumState {
    pub fn with_bottom(n_top: usize, bottom: &[Complex64]) -> Result<Self, SimError> {
        let len = bottom.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SimError::BadDimension(len));
        }
        let n_bottom = len.trailing_zeros() as usize;
        if n_top + n_bottom > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n_top + n_bottom));
        }
        let norm = bottom.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized(norm));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); len << n_top];
        amps[..len].copy_from_slice(bottom);
        Ok(Self { n_top, n_bottom, amps })
    }

    pub fn n_top(&self) -> usize {
        self.n_top
    }

    pub fn n_bottom(&self) -> usize {
        self.n_bottom
    }

    pub fn n_qubits(&self) -> usize {
        self.n_top + self.n_bottom
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, top: usize, bottom: usize) -> Complex64 {
        self.amps[(top << self.n_bottom) | bottom]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    fn shift(&self, qubit: usize) -> usize {
        self.n_qubits() - 1 - qubit
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), SimError> {
        if qubit >= self.n_qubits() {
            return Err(SimError::BadQubit { qubit, n_qubits: self.n_qubits() });
        }
        Ok(())
    }

    fn apply_single(&mut self, qubit: usize, gate: [[Complex64; 2]; 2]) -> Result<(), SimError> {
        self.check_qubit(qubit)?;
        let mask = 1usize << self.shift(qubit);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | mask];
                self.amps[i] = gate[0][0] * a0 + gate[0][1] * a1;
                self.amps[i | mask] = gate[1][0] * a0 + gate[1][1] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_hadamard(&mut self, qubit: usize) -> Result<(), SimError> {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(qubit, [[h, h], [h, -h]])
    }

    /// `|1> -> e^{i omega} |1>`.
    pub fn apply_phase(&mut self, qubit: usize, omega: f64) -> Result<(), SimError> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        self.apply_single(qubit, [[one, zero], [zero, phase_factor(omega)]])
    }

    pub fn apply_gate(&mut self, qubit: usize, gate: [[Complex64; 2]; 2]) -> Result<(), SimError> {
        self.apply_single(qubit, gate)
    }

    /// Applies `op` to the bottom register wherever top qubit `control` is 1.
    pub fn apply_controlled_bottom(&mut self, control: usize, op: &CMatrix) -> Result<(), SimError> {
        if control >= self.n_top {
            return Err(SimError::BadQubit { qubit: control, n_qubits: self.n_top });
        }
        let block = 1usize << self.n_bottom;
        if op.dim() != block {
            return Err(SimError::DimensionMismatch { expected: block, found: op.dim() });
        }
        let control_bit = 1usize << (self.n_top - 1 - control);
        for top in 0..(1usize << self.n_top) {
            if top & control_bit != 0 {
                let range = top * block..(top + 1) * block;
                let updated = op.mul_vec(&self.amps[range.clone()]);
                self.amps[range].copy_from_slice(&updated);
            }
        }
        Ok(())
    }

    pub fn apply_controlled_power(&mut self, control: usize, spectrum: &Spectrum, power: u64) -> Result<(), SimError> {
        if spectrum.dim() != 1 << self.n_bottom {
            return Err(SimError::DimensionMismatch { expected: 1 << self.n_bottom, found: spectrum.dim() });
        }
        self.apply_controlled_bottom(control, &controlled_power_operator(spectrum, power))
    }

    /// Dense unitary on a list of qubits; `qubits[0]` is the most significant
    /// bit of the matrix index.
    pub fn apply_unitary(&mut self, qubits: &[usize], matrix: &CMatrix) -> Result<(), SimError> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let k = qubits.len();
        if matrix.dim() != 1 << k {
            return Err(SimError::DimensionMismatch { expected: 1 << k, found: matrix.dim() });
        }
        let masks: Vec<usize> = qubits.iter().map(|&q| 1usize << self.shift(q)).collect();
        let all: usize = masks.iter().fold(0, |acc, m| acc | m);
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|s| {
                masks
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (s >> (k - 1 - i)) & 1 == 1)
                    .fold(0, |acc, (_, m)| acc | m)
            })
            .collect();
        let mut buffer = vec![Complex64::new(0.0, 0.0); 1 << k];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (slot, off) in buffer.iter_mut().zip(&offsets) {
                *slot = self.amps[base | off];
            }
            let out = matrix.mul_vec(&buffer);
            for (value, off) in out.into_iter().zip(&offsets) {
                self.amps[base | off] = value;
            }
        }
        Ok(())
    }

    /// Applies `gate(c)` to `target`, where `c` is the basis value of the
    /// `controls` register (`controls[0]` most significant).
    pub fn apply_uniformly_controlled(
        &mut self,
        controls: &[usize],
        target: usize,
        gate: impl Fn(usize) -> [[Complex64; 2]; 2],
    ) -> Result<(), SimError> {
        self.check_qubit(target)?;
        for &q in controls {
            self.check_qubit(q)?;
        }
        let t = 1usize << self.shift(target);
        let shifts: Vec<usize> = controls.iter().map(|&q| self.shift(q)).collect();
        for i in 0..self.amps.len() {
            if i & t != 0 {
                continue;
            }
            let c = shifts.iter().fold(0, |acc, s| (acc << 1) | ((i >> s) & 1));
            let g = gate(c);
            let a0 = self.amps[i];
            let a1 = self.amps[i | t];
            self.amps[i] = g[0][0] * a0 + g[0][1] * a1;
            self.amps[i | t] = g[1][0] * a0 + g[1][1] * a1;
        }
        Ok(())
    }

    /// Basis value of the top register if it is (numerically) definite.
    pub fn definite_top(&self) -> Option<usize> {
        let block = 1usize << self.n_bottom;
        let total = self.norm_sqr();
        (0..1usize << self.n_top).find(|&top| {
            let mass: f64 = self.amps[top * block..(top + 1) * block].iter().map(Complex64::norm_sqr).sum();
            mass >= total * (1.0 - DEFINITE_TOL)
        })
    }

    /// Bottom amplitudes once the top register is definite.
    pub fn bottom_amplitudes(&self) -> Result<Vec<Complex64>, SimError> {
        let top = self.definite_top().ok_or(SimError::AncillasNotReset)?;
        let block = 1usize << self.n_bottom;
        Ok(self.amps[top * block..(top + 1) * block].to_vec())
    }

    /// Returns a collapsed top register to `|0...0>`.
    pub fn reset_top(&mut self) -> Result<(), SimError> {
        let bottom = self.bottom_amplitudes()?;
        self.amps.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        self.amps[..bottom.len()].copy_from_slice(&bottom);
        Ok(())
    }

    /// Marginal probabilities of the bottom register.
    pub fn bottom_probabilities(&self) -> Vec<f64> {
        let block = 1usize << self.n_bottom;
        let mut out = vec![0.0; block];
        for (i, a) in self.amps.iter().enumerate() {
            out[i % block] += a.norm_sqr();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::BinaryFraction;
    use crate::numerics::EigenTriple;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn two_level_spectrum() -> Spectrum {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Spectrum::new(vec![
            EigenTriple { phi: "011".parse().unwrap(), u: vec![s, s], beta: 0.6 },
            EigenTriple { phi: "110".parse().unwrap(), u: vec![s, -s], beta: 0.8 },
        ])
        .unwrap()
    }

    #[test]
    fn init_requires_unit_power_of_two() {
        assert!(init_state(1, &[1.0, 0.0]).is_ok());
        assert_eq!(init_state(1, &[1.0, 0.0, 0.0]).unwrap_err(), SimError::BadDimension(3));
        assert!(matches!(init_state(1, &[1.0, 1.0]), Err(SimError::NotNormalized(_))));
        assert_eq!(init_state(20, &[1.0, 0.0]).unwrap_err(), SimError::TooManyQubits(21));
    }

    #[test]
    fn hadamard_twice_is_identity() {
        let mut s = init_state(1, &[0.6, 0.8]).unwrap();
        let before = s.clone();
        s.apply_hadamard(0).unwrap();
        s.apply_hadamard(0).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert_eq!(s.apply_hadamard(5).unwrap_err(), SimError::BadQubit { qubit: 5, n_qubits: 2 });
    }

    #[test]
    fn phase_snaps_quarter_turns() {
        assert_eq!(phase_factor(-std::f64::consts::PI), c(-1.0));
        assert_eq!(phase_factor(-std::f64::consts::FRAC_PI_2), Complex64::new(0.0, -1.0));
        assert_eq!(dyadic_phase(3, 2), Complex64::new(0.0, -1.0));
        assert_eq!(dyadic_phase(8, 3), c(1.0));
    }

    #[test]
    fn controlled_power_kicks_back_eigenphase() {
        let spectrum = two_level_spectrum();
        let u = &spectrum.pairs()[0].u;
        let mut s = init_state(1, u).unwrap();
        s.apply_hadamard(0).unwrap();
        s.apply_controlled_power(0, &spectrum, 4).unwrap();
        // 0.011 * 4 = 1.1 -> phase e^{i pi} = -1 on the |1> branch
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(1, 0) - c(-h * u[0])).norm() < 1e-15);
        assert!((s.amplitude(0, 0) - c(h * u[0])).norm() < 1e-15);
    }

    #[test]
    fn controlled_power_operator_is_unitary() {
        let spectrum = two_level_spectrum();
        for p in [1, 2, 4, 8, 3] {
            assert!(controlled_power_operator(&spectrum, p).unitarity_defect() < 1e-14);
        }
    }

    #[test]
    fn partial_spectrum_acts_as_identity_on_complement() {
        let spectrum = Spectrum::new(vec![EigenTriple {
            phi: BinaryFraction::new(1, 1).unwrap(),
            u: vec![1.0, 0.0],
            beta: 1.0,
        }])
        .unwrap();
        let op = controlled_power_operator(&spectrum, 1);
        assert_eq!(op.get(0, 0), c(-1.0));
        assert_eq!(op.get(1, 1), c(1.0));
    }

    #[test]
    fn dense_unitary_matches_single_qubit_gate() {
        let mut a = init_state(2, &[0.6, 0.8]).unwrap();
        let mut b = a.clone();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hm = CMatrix::from_fn(2, |i, j| c(if i == 1 && j == 1 { -h } else { h }));
        a.apply_unitary(&[1], &hm).unwrap();
        b.apply_hadamard(1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reset_requires_definite_top() {
        let mut s = init_state(1, &[0.6, 0.8]).unwrap();
        s.apply_hadamard(0).unwrap();
        assert_eq!(s.reset_top().unwrap_err(), SimError::AncillasNotReset);
        s.collapse_onto(&[0], &[1]).unwrap();
        s.reset_top().unwrap();
        assert!((s.amplitude(0, 1) - c(0.8)).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn gates_preserve_norm(angles in proptest::collection::vec(-7.0f64..7.0, 1..6), power in 0u64..16) {
            let spectrum = two_level_spectrum();
            let mut s = init_state(2, &[0.6, 0.8]).unwrap();
            for (i, w) in angles.iter().enumerate() {
                let q = i % 2;
                s.apply_hadamard(q).unwrap();
                s.apply_controlled_power(q, &spectrum, power).unwrap();
                s.apply_phase(q, *w).unwrap();
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
