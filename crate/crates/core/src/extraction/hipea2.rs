//! Multi-ancilla controller: a single experiment in which every discovered
//! eigenvalue owns an ancilla.
//!
//! Each lineage tracks the bottom-register density matrix conditioned on its
//! own outcome history, with the other ancillas traced out. The joint circuit
//! of an iteration is turned into Kraus operators `K_a` (one per joint ancilla
//! outcome) by running it on every bottom basis state.

use num_complex::Complex64;

use crate::binary::BinaryFraction;
use crate::engine::{run_iteration_circuit, AncillaAssignment, IterationSpec};
use crate::error::ExtractionError;
use crate::numerics::Spectrum;
use crate::statevector::{CMatrix, QuantumState};

use super::{
    finalize_pairs, observe, path_label, Algorithm, AncillaEigenvalue, ExperimentLog, ExtractionOptions,
    ExtractionResult, IterationRecord, ResourceCounters, Schedule,
};

struct Lineage {
    path: Vec<u8>,
    /// Unnormalized: the trace is the probability of `path`.
    rho: CMatrix,
    joint: f64,
    observed: f64,
}

fn kraus_operators(spectrum: &Spectrum, spec: &IterationSpec, n_top: usize) -> Result<Vec<CMatrix>, ExtractionError> {
    let dim = spectrum.dim();
    let mut kraus = vec![CMatrix::zeros(dim); 1 << n_top];
    for p in 0..dim {
        let mut basis = vec![Complex64::new(0.0, 0.0); dim];
        basis[p] = Complex64::new(1.0, 0.0);
        let mut state = QuantumState::with_bottom(n_top, &basis)?;
        run_iteration_circuit(&mut state, spectrum, spec)?;
        for (a, k) in kraus.iter_mut().enumerate() {
            for r in 0..dim {
                k.set(r, p, state.amplitude(a, r));
            }
        }
    }
    Ok(kraus)
}

fn conditioned(kraus: &[CMatrix], rho: &CMatrix, n_top: usize, ancilla: usize, bit: u8) -> CMatrix {
    let shift = n_top - 1 - ancilla;
    let mut out = CMatrix::zeros(rho.dim());
    for (a, k) in kraus.iter().enumerate() {
        if ((a >> shift) & 1) as u8 == bit {
            out.add_assign(&k.mul(rho).mul(&k.adjoint()));
        }
    }
    out
}

pub fn run_hipea2(spectrum: &Spectrum, options: &ExtractionOptions) -> Result<ExtractionResult, ExtractionError> {
    let m = spectrum.m();
    let threshold = options.mode.threshold();
    let b: Vec<Complex64> = spectrum.rhs().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let rho0 = CMatrix::from_fn(b.len(), |i, j| b[i] * b[j].conj());
    let mut lineages = vec![Lineage { path: Vec::new(), rho: rho0, joint: 1.0, observed: 1.0 }];
    let mut activation_iterations = Vec::new();
    let mut ancillas_per_iteration = Vec::new();
    let mut records = Vec::new();

    for l in 1..=m {
        let n_top = lineages.len();
        ancillas_per_iteration.push(n_top);
        let assignments: Vec<AncillaAssignment> = lineages
            .iter()
            .enumerate()
            .map(|(q, lin)| AncillaAssignment::for_iteration(q, m, l, &lin.path))
            .collect();
        let spec = IterationSpec { assignments };
        let kraus = kraus_operators(spectrum, &spec, n_top)?;

        let mut outcomes = Vec::new();
        let mut next = Vec::with_capacity(n_top + 1);
        let mut forks = Vec::new();
        for (q, lin) in lineages.iter().enumerate() {
            let rho0 = conditioned(&kraus, &lin.rho, n_top, q, 0);
            let rho1 = conditioned(&kraus, &lin.rho, n_top, q, 1);
            let exact = [rho0.trace().re, rho1.trace().re];
            let obs = observe(&options.mode, exact, &[Algorithm::Hipea2.stream_tag(), q as u64, u64::from(l)]);
            outcomes.push(obs.cell(q + 1, &lin.path, 0));
            outcomes.push(obs.cell(q + 1, &lin.path, 1));
            let extend = |bit: u8, rho: CMatrix| {
                let mut path = lin.path.clone();
                path.push(bit);
                Lineage { path, rho, joint: exact[usize::from(bit)], observed: obs.probs[usize::from(bit)] }
            };
            match (obs.viable(0, threshold), obs.viable(1, threshold)) {
                (true, true) => {
                    next.push(extend(0, rho0));
                    forks.push(extend(1, rho1));
                }
                (true, false) => next.push(extend(0, rho0)),
                (false, true) => next.push(extend(1, rho1)),
                (false, false) => {
                    return Err(ExtractionError::InconsistentBranch { path: path_label(&lin.path), iteration: l })
                }
            }
        }
        records.push(IterationRecord {
            iteration: l,
            settings: spec.assignments.iter().map(Into::into).collect(),
            outcomes,
        });
        if !forks.is_empty() {
            let total = next.len() + forks.len();
            if let Some(budget) = options.ancilla_budget {
                if total > budget {
                    return Err(ExtractionError::AncillaBudgetExceeded { budget, iteration: l });
                }
            }
            if l < m {
                activation_iterations.extend(std::iter::repeat_n(l + 1, forks.len()));
            }
            next.extend(forks);
        }
        lineages = next;
    }

    let raw: Vec<(BinaryFraction, f64, Vec<f64>)> = lineages
        .iter()
        .map(|lin| {
            let phi = BinaryFraction::from_bits_lsb_first(&lin.path).expect("width matches spectrum");
            let dist = (0..lin.rho.dim()).map(|i| lin.rho.get(i, i).re.max(0.0) / lin.joint).collect();
            (phi, lin.observed, dist)
        })
        .collect();
    let assignment =
        raw.iter().enumerate().map(|(q, r)| AncillaEigenvalue { ancilla: q + 1, bitstring: r.0.clone() }).collect();
    let peak = ancillas_per_iteration.iter().copied().max().unwrap_or(1);
    let bottom_qubits = spectrum.dim().trailing_zeros() as usize;

    Ok(ExtractionResult {
        algorithm: Algorithm::Hipea2,
        pairs: finalize_pairs(&options.mode, Algorithm::Hipea2, raw),
        resources: ResourceCounters {
            experiments: 1,
            iterations: m as usize,
            ancillas: peak,
            bottom_qubits,
            qubits: peak + bottom_qubits,
        },
        schedule: Schedule::MultiAncilla { activation_iterations, ancillas_per_iteration, assignment },
        experiments: vec![ExperimentLog { experiment: 1, target_prefix: String::new(), records }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn demo_schedule() {
        let f = fixture::demo();
        let r = run_hipea2(&f.spectrum, &ExtractionOptions::exact()).unwrap();
        match &r.schedule {
            Schedule::MultiAncilla { activation_iterations, ancillas_per_iteration, .. } => {
                assert_eq!(activation_iterations, &vec![2, 3, 7]);
                assert_eq!(ancillas_per_iteration, &vec![1, 2, 3, 3, 3, 3, 4, 4, 4]);
            }
            other => panic!("unexpected schedule {other:?}"),
        }
        assert_eq!(r.resources.qubits, 6);
        let mut got: Vec<String> = r.pairs.iter().map(|p| p.bitstring.to_string()).collect();
        got.sort();
        assert_eq!(got, vec!["000010110", "000111011", "011011011", "101110000"]);
        for p in &r.pairs {
            let pair = f.spectrum.pairs().iter().find(|q| q.phi == p.bitstring).unwrap();
            assert!((p.beta_abs - pair.beta.abs()).abs() < 1e-12);
            for (d, u) in p.bottom_distribution.iter().zip(&pair.u) {
                assert!((d - u * u).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let f = fixture::demo();
        let opts = ExtractionOptions { ancilla_budget: Some(3), ..ExtractionOptions::exact() };
        assert_eq!(
            run_hipea2(&f.spectrum, &opts).unwrap_err(),
            ExtractionError::AncillaBudgetExceeded { budget: 3, iteration: 6 }
        );
    }
}
