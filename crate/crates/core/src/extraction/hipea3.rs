//! Parallel controller: `n_top` ancillas estimate `n_top` bits per iteration.
//!
//! For each surviving suffix every assignment of the lower `r - 1` new bits is
//! tried as a separate experiment. Ancilla `q` reproduces single-ancilla
//! iteration `(l - 1) n_top + q`, assuming the guessed bits below it. An
//! experiment is consistent when ancillas `1..r-1` read back the guess; the
//! top ancilla's reading is free and gives the new bit.

use num_complex::Complex64;

use crate::binary::BinaryFraction;
use crate::engine::{run_iteration_circuit, AncillaAssignment, IterationSpec};
use crate::error::ExtractionError;
use crate::numerics::Spectrum;
use crate::statevector::QuantumState;

use super::{
    finalize_pairs, map_maybe_parallel, observe, path_id, path_label, Algorithm, ExperimentLog,
    ExtractionOptions, ExtractionResult, IterationRecord, ResourceCounters, Schedule,
};

#[derive(Clone)]
struct Survivor {
    /// Known low bits, least significant first.
    suffix: Vec<u8>,
    /// Bottom register conditioned on the suffix, normalized.
    bottom: Vec<Complex64>,
    joint: f64,
    observed: f64,
}

struct ExperimentOutcome {
    record: IterationRecord,
    children: Vec<Survivor>,
    pruned: Vec<String>,
}

fn run_experiment(
    spectrum: &Spectrum,
    survivor: &Survivor,
    guess: usize,
    l: u32,
    n_top: u32,
    r: u32,
    options: &ExtractionOptions,
) -> Result<ExperimentOutcome, ExtractionError> {
    let m = spectrum.m();
    let guessed: Vec<u8> = (0..r - 1).map(|i| ((guess >> i) & 1) as u8).collect();
    let assignments = (0..r)
        .map(|q| {
            let mut known = survivor.suffix.clone();
            known.extend_from_slice(&guessed[..q as usize]);
            AncillaAssignment::for_iteration(q as usize, m, (l - 1) * n_top + q + 1, &known)
        })
        .collect();
    let spec = IterationSpec { assignments };
    let mut state = QuantumState::with_bottom(r as usize, &survivor.bottom)?;
    let dist = run_iteration_circuit(&mut state, spectrum, &spec)?;

    let outcome = |top: u8| {
        let mut bits = guessed.clone();
        bits.push(top);
        bits
    };
    let exact = [0u8, 1].map(|top| survivor.joint * dist.probability(&outcome(top)));
    let stream = [Algorithm::Hipea3.stream_tag(), u64::from(l), path_id(&survivor.suffix), guess as u64];
    let obs = observe(&options.mode, exact, &stream);

    let mut prefix = survivor.suffix.clone();
    prefix.extend_from_slice(&guessed);
    let mut children = Vec::new();
    let mut pruned = Vec::new();
    for top in [0u8, 1] {
        let mut suffix = prefix.clone();
        suffix.push(top);
        if obs.viable(top, options.mode.threshold()) {
            let mut collapsed = state.clone();
            let qubits: Vec<usize> = (0..r as usize).collect();
            collapsed.collapse_onto(&qubits, &outcome(top))?;
            children.push(Survivor {
                suffix,
                bottom: collapsed.bottom_amplitudes()?,
                joint: exact[usize::from(top)],
                observed: obs.probs[usize::from(top)],
            });
        } else {
            pruned.push(path_label(&suffix));
        }
    }
    let record = IterationRecord {
        iteration: l,
        settings: spec.assignments.iter().map(Into::into).collect(),
        outcomes: vec![obs.cell(r as usize, &prefix, 0), obs.cell(r as usize, &prefix, 1)],
    };
    Ok(ExperimentOutcome { record, children, pruned })
}

pub fn run_hipea3(
    spectrum: &Spectrum,
    n_top: usize,
    options: &ExtractionOptions,
) -> Result<ExtractionResult, ExtractionError> {
    let m = spectrum.m();
    if n_top == 0 || n_top > 16 {
        return Err(ExtractionError::InvalidConfig(format!("n_top must be in 1..=16, got {n_top}")));
    }
    let n = n_top as u32;
    let b: Vec<Complex64> = spectrum.rhs().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut survivors = vec![Survivor { suffix: Vec::new(), bottom: b, joint: 1.0, observed: 1.0 }];
    let mut experiments = Vec::new();
    let mut experiments_per_iteration = Vec::new();
    let mut survivors_per_iteration = Vec::new();
    let mut pruned = Vec::new();
    let iterations = m.div_ceil(n);
    let mut peak = 0;

    for l in 1..=iterations {
        let r = n.min(m - (l - 1) * n);
        peak = peak.max(r as usize);
        let jobs: Vec<(usize, usize)> =
            (0..survivors.len()).flat_map(|s| (0..1usize << (r - 1)).map(move |e| (s, e))).collect();
        let outcomes = map_maybe_parallel(&jobs, options.parallel, |&(s, e)| {
            run_experiment(spectrum, &survivors[s], e, l, n, r, options)
        });
        experiments_per_iteration.push(jobs.len());

        let mut next = Vec::new();
        let mut alive = vec![false; survivors.len()];
        for (&(s, _), outcome) in jobs.iter().zip(outcomes) {
            let outcome = outcome?;
            alive[s] |= !outcome.children.is_empty();
            next.extend(outcome.children);
            pruned.extend(outcome.pruned);
            experiments.push(ExperimentLog {
                experiment: experiments.len() + 1,
                target_prefix: path_label(&survivors[s].suffix),
                records: vec![outcome.record],
            });
        }
        if let Some(dead) = alive.iter().position(|a| !a) {
            return Err(ExtractionError::InconsistentBranch {
                path: path_label(&survivors[dead].suffix),
                iteration: l,
            });
        }
        survivors_per_iteration.push(next.iter().map(|s| path_label(&s.suffix)).collect());
        survivors = next;
    }

    let raw = survivors
        .iter()
        .map(|s| {
            let phi = BinaryFraction::from_bits_lsb_first(&s.suffix).expect("width matches spectrum");
            (phi, s.observed, s.bottom.iter().map(Complex64::norm_sqr).collect())
        })
        .collect();
    let bottom_qubits = spectrum.dim().trailing_zeros() as usize;

    Ok(ExtractionResult {
        algorithm: Algorithm::Hipea3,
        pairs: finalize_pairs(&options.mode, Algorithm::Hipea3, raw),
        resources: ResourceCounters {
            experiments: experiments.len(),
            iterations: iterations as usize,
            ancillas: peak,
            bottom_qubits,
            qubits: peak + bottom_qubits,
        },
        schedule: Schedule::Parallel { n_top, experiments_per_iteration, survivors_per_iteration, pruned },
        experiments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::run_hipea1;
    use crate::fixture;

    #[test]
    fn demo_schedule_with_three_ancillas() {
        let f = fixture::demo();
        let r = run_hipea3(&f.spectrum, 3, &ExtractionOptions::exact()).unwrap();
        assert_eq!(r.resources.experiments, 32);
        assert_eq!(r.resources.iterations, 3);
        assert_eq!(r.resources.qubits, 5);
        match &r.schedule {
            Schedule::Parallel { experiments_per_iteration, survivors_per_iteration, .. } => {
                assert_eq!(experiments_per_iteration, &vec![4, 12, 16]);
                assert_eq!(survivors_per_iteration[0], vec!["000", "110", "011"]);
            }
            other => panic!("unexpected schedule {other:?}"),
        }
        let fifth = &r.experiments[5].records[0];
        assert_eq!(fifth.settings[1].omega.to_string(), "-2pi(0.01000)");
        assert_eq!(fifth.settings[2].omega.to_string(), "-2pi(0.001000)");
    }

    #[test]
    fn single_ancilla_matches_hipea1_pairs() {
        let f = fixture::demo();
        let a = run_hipea3(&f.spectrum, 1, &ExtractionOptions::exact()).unwrap();
        let b = run_hipea1(&f.spectrum, &ExtractionOptions::exact()).unwrap();
        let mut x: Vec<_> = a.pairs.iter().map(|p| (p.bitstring.clone(), p.beta_abs)).collect();
        let mut y: Vec<_> = b.pairs.iter().map(|p| (p.bitstring.clone(), p.beta_abs)).collect();
        x.sort_by(|p, q| p.0.cmp(&q.0));
        y.sort_by(|p, q| p.0.cmp(&q.0));
        for (p, q) in x.iter().zip(&y) {
            assert_eq!(p.0, q.0);
            assert!((p.1 - q.1).abs() < 1e-12);
        }
    }

    #[test]
    fn uneven_last_iteration() {
        let f = fixture::demo();
        let r = run_hipea3(&f.spectrum, 4, &ExtractionOptions::exact()).unwrap();
        assert_eq!(r.resources.iterations, 3);
        assert_eq!(r.pairs.len(), 4);
    }
}
