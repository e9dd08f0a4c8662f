//! Single-ancilla controller: one experiment per eigenvalue.
//!
//! An experiment runs iterations 1..=m. It replays the bits it was spawned
//! with, then follows whichever continuation is viable. When both are, it
//! keeps 0 and spawns a new experiment targeting the 1 branch.

use crate::binary::{build_divergence_tree, BinaryFraction};
use crate::engine::{run_iteration_circuit, AncillaAssignment, IterationSpec};
use crate::error::ExtractionError;
use crate::numerics::Spectrum;
use crate::statevector::init_state;

use super::{
    finalize_pairs, map_maybe_parallel, observe, path_id, path_label, Algorithm, ExperimentLog,
    ExtractionOptions, ExtractionResult, IterationRecord, ResourceCounters, Schedule,
};

struct ExperimentRun {
    spawn_prefix: Vec<u8>,
    path: Vec<u8>,
    observed: f64,
    bottom: Vec<f64>,
    records: Vec<IterationRecord>,
    spawned: Vec<Vec<u8>>,
}

fn run_experiment(
    spectrum: &Spectrum,
    spawn_prefix: &[u8],
    options: &ExtractionOptions,
) -> Result<ExperimentRun, ExtractionError> {
    let m = spectrum.m();
    let threshold = options.mode.threshold();
    let mut state = init_state(1, &spectrum.rhs())?;
    let mut joint = 1.0;
    let mut path: Vec<u8> = Vec::with_capacity(m as usize);
    let mut records = Vec::with_capacity(m as usize);
    let mut spawned = Vec::new();
    let mut observed = 1.0;

    for l in 1..=m {
        let assignment = AncillaAssignment::for_iteration(0, m, l, &path);
        let spec = IterationSpec { assignments: vec![assignment] };
        let mut trial = state.clone();
        let dist = run_iteration_circuit(&mut trial, spectrum, &spec)?;
        let exact = [joint * dist.probabilities[0], joint * dist.probabilities[1]];
        let obs = observe(
            &options.mode,
            exact,
            &[Algorithm::Hipea1.stream_tag(), path_id(spawn_prefix), u64::from(l)],
        );

        let bit = if let Some(&forced) = spawn_prefix.get(path.len()) {
            if !obs.viable(forced, threshold) {
                return Err(ExtractionError::InconsistentBranch { path: path_label(&path), iteration: l });
            }
            forced
        } else {
            match (obs.viable(0, threshold), obs.viable(1, threshold)) {
                (true, true) => {
                    let mut child = path.clone();
                    child.push(1);
                    spawned.push(child);
                    0
                }
                (true, false) => 0,
                (false, true) => 1,
                (false, false) => {
                    return Err(ExtractionError::InconsistentBranch { path: path_label(&path), iteration: l })
                }
            }
        };

        records.push(IterationRecord {
            iteration: l,
            settings: spec.assignments.iter().map(Into::into).collect(),
            outcomes: vec![obs.cell(1, &path, 0), obs.cell(1, &path, 1)],
        });
        trial.collapse_onto(&[0], &[bit])?;
        trial.reset_top()?;
        state = trial;
        joint = exact[usize::from(bit)];
        observed = obs.probs[usize::from(bit)];
        path.push(bit);
    }

    let bottom = state.bottom_amplitudes()?.iter().map(|a| a.norm_sqr()).collect();
    Ok(ExperimentRun { spawn_prefix: spawn_prefix.to_vec(), path, observed, bottom, records, spawned })
}

pub fn run_hipea1(spectrum: &Spectrum, options: &ExtractionOptions) -> Result<ExtractionResult, ExtractionError> {
    let mut pending: Vec<Vec<u8>> = vec![Vec::new()];
    let mut finished = Vec::new();
    while !pending.is_empty() {
        let wave = map_maybe_parallel(&pending, options.parallel, |prefix| run_experiment(spectrum, prefix, options));
        pending = Vec::new();
        for run in wave {
            let run = run?;
            pending.extend(run.spawned.iter().cloned());
            finished.push(run);
        }
    }
    finished.sort_by(|a, b| a.path.cmp(&b.path));

    let experiments = finished
        .iter()
        .enumerate()
        .map(|(i, run)| ExperimentLog {
            experiment: i + 1,
            target_prefix: path_label(&run.spawn_prefix),
            records: run.records.clone(),
        })
        .collect();
    let raw = finished
        .iter()
        .map(|run| {
            let phi = BinaryFraction::from_bits_lsb_first(&run.path).expect("width matches spectrum");
            (phi, run.observed, run.bottom.clone())
        })
        .collect::<Vec<_>>();
    let divergence_iterations = build_divergence_tree(&raw.iter().map(|r| r.0.clone()).collect::<Vec<_>>())
        .map(|t| t.divergence_iterations())
        .unwrap_or_default();
    let bottom_qubits = spectrum.dim().trailing_zeros() as usize;

    Ok(ExtractionResult {
        algorithm: Algorithm::Hipea1,
        pairs: finalize_pairs(&options.mode, Algorithm::Hipea1, raw),
        resources: ResourceCounters {
            experiments: finished.len(),
            iterations: spectrum.m() as usize,
            ancillas: 1,
            bottom_qubits,
            qubits: 1 + bottom_qubits,
        },
        schedule: Schedule::SingleAncilla { divergence_iterations },
        experiments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn demo_exact_run() {
        let f = fixture::demo();
        let r = run_hipea1(&f.spectrum, &ExtractionOptions::exact()).unwrap();
        let got: Vec<String> = r.pairs.iter().map(|p| p.bitstring.to_string()).collect();
        assert_eq!(got, vec!["101110000", "000010110", "011011011", "000111011"]);
        assert_eq!(r.resources.experiments, 4);
        assert_eq!(r.resources.qubits, 3);
        let first = &r.experiments[0].records[0];
        assert_eq!(first.settings[0].omega.to_string(), "-2pi(0.0)");
        assert!((first.outcomes[0].probability - 0.05260).abs() < 1e-4);
        for p in &r.pairs {
            let beta = f.spectrum.pairs().iter().find(|q| q.phi == p.bitstring).unwrap().beta;
            assert!((p.beta_abs - beta.abs()).abs() < 1e-12);
        }
        let total: f64 = r.pairs.iter().map(|p| p.beta_abs.powi(2)).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let f = fixture::demo();
        let mut opts = ExtractionOptions::sampled(10_000, 5);
        let a = run_hipea1(&f.spectrum, &opts).unwrap();
        opts.parallel = false;
        assert_eq!(a, run_hipea1(&f.spectrum, &opts).unwrap());
    }
}
