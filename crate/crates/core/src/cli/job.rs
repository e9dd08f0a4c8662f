//! Runs the requested algorithms on a validated problem.

use log::{debug, info};
use thiserror::Error;

use crate::error::{ExtractionError, HhlError, NumericsError, ReconstructionError};
use crate::extraction::{run_hipea1, run_hipea2, run_hipea3, Algorithm, ExtractionOptions, ExtractionResult, Mode};
use crate::hhl::{compare_normalized, run_hhl};
use crate::numerics::{direct_solve, norm, relative_error};
use crate::reconstruction::{reconstruct, SignNoise};

use super::problem::{AlgorithmChoice, ProblemSpec};
use super::report::{HhlRun, HipeaRun, ProblemSummary, Provenance, RunReport, SolveReport, SCHEMA_VERSION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JobError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error(transparent)]
    Reconstruction(#[from] ReconstructionError),
    #[error(transparent)]
    Hhl(#[from] HhlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobOptions {
    pub parallel: bool,
}

impl Default for JobOptions {
    fn default() -> Self {
        Self { parallel: true }
    }
}

fn algorithms(choice: AlgorithmChoice) -> Vec<Algorithm> {
    match choice {
        AlgorithmChoice::Hipea1 => vec![Algorithm::Hipea1],
        AlgorithmChoice::Hipea2 => vec![Algorithm::Hipea2],
        AlgorithmChoice::Hipea3 => vec![Algorithm::Hipea3],
        AlgorithmChoice::Hhl => vec![Algorithm::Hhl],
        AlgorithmChoice::All => vec![Algorithm::Hipea1, Algorithm::Hipea2, Algorithm::Hipea3, Algorithm::Hhl],
    }
}

pub fn extract(spec: &ProblemSpec, algorithm: Algorithm, options: &JobOptions) -> Result<ExtractionResult, JobError> {
    let opts = ExtractionOptions { mode: spec.extraction_mode(), parallel: options.parallel, ancilla_budget: None };
    Ok(match algorithm {
        Algorithm::Hipea1 => run_hipea1(&spec.spectrum, &opts)?,
        Algorithm::Hipea2 => run_hipea2(&spec.spectrum, &opts)?,
        Algorithm::Hipea3 => run_hipea3(&spec.spectrum, spec.n_top, &opts)?,
        Algorithm::Hhl => unreachable!("HHL is not an extraction"),
    })
}

fn hipea_run(spec: &ProblemSpec, algorithm: Algorithm, reference: &[f64], options: &JobOptions) -> Result<HipeaRun, JobError> {
    let extraction = extract(spec, algorithm, options)?;
    let noise = match spec.extraction_mode() {
        Mode::Exact => SignNoise::Exact,
        Mode::Sampled { shots, .. } => SignNoise::Sampled { path_shots: shots, bottom_shots: shots },
    };
    let rec = reconstruct(&extraction.bitstrings(), &extraction.beta_abs(), &extraction.distributions(), &spec.b, noise)?;
    let epsilon = relative_error(reference, &rec.x)?;
    debug!("{algorithm}: {} pairs, epsilon {epsilon:e}", extraction.pairs.len());
    Ok(HipeaRun {
        pairs: extraction.pairs,
        resources: extraction.resources,
        schedule: extraction.schedule,
        u_abs: rec.u_abs,
        signs: rec.signs,
        sign_ambiguity: rec.ambiguity,
        x: rec.x,
        epsilon,
        experiments: extraction.experiments,
    })
}

/// Extraction, reconstruction and comparison for every requested algorithm.
pub fn run_job(spec: &ProblemSpec, options: &JobOptions) -> Result<SolveReport, JobError> {
    let reference_x = direct_solve(&spec.spectrum)?;
    let mut runs = Vec::new();
    let mut warnings = Vec::new();
    for algorithm in algorithms(spec.algorithm) {
        info!("running {algorithm}");
        let run = if algorithm == Algorithm::Hhl {
            let result = run_hhl(&spec.spectrum, None)?;
            let normalized_difference = compare_normalized(&reference_x, &result)?;
            RunReport {
                algorithm,
                hipea: None,
                hhl: Some(HhlRun { result, reference_norm: norm(&reference_x), normalized_difference }),
            }
        } else {
            let run = hipea_run(spec, algorithm, &reference_x, options)?;
            if let Some((gap, threshold)) = run.sign_ambiguity {
                warnings.push(format!(
                    "{algorithm}: sign pattern is ambiguous (gap {gap:e} <= threshold {threshold:e}); best pattern kept"
                ));
            }
            RunReport { algorithm, hipea: Some(run), hhl: None }
        };
        runs.push(run);
    }
    Ok(SolveReport {
        schema_version: SCHEMA_VERSION,
        provenance: Provenance::current(spec.extraction_mode()),
        problem: ProblemSummary {
            m: spec.m,
            dim: spec.spectrum.dim(),
            eigenvalues: spec.spectrum.len(),
            input: spec.input,
            b: spec.b.clone(),
        },
        reference_x,
        runs,
        warnings,
    })
}
