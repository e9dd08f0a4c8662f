//! Problem files: the JSON schema, validation, and the built-in fixture.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binary::{encode_value, BinaryFraction};
use crate::error::{BitsError, NumericsError};
use crate::extraction::{Mode, DEFAULT_SHOTS};
use crate::fixture;
use crate::numerics::{hermitian_eigendecompose, norm, EigenTriple, RealSymmetricMatrix, Spectrum};
use crate::statevector::MAX_QUBITS;

pub const DEFAULT_N_TOP: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid problem JSON: {0}")]
    Parse(String),
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("eigenvalue {index} = {value} is not representable with {width} bits")]
    NotRepresentable { index: usize, value: f64, width: u32 },
    #[error("eigenvalue {index} = {value} lies outside (0, 1)")]
    EigenvalueOutOfRange { index: usize, value: f64 },
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Bits(#[from] BitsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmChoice {
    Hipea1,
    Hipea2,
    Hipea3,
    Hhl,
    #[default]
    All,
}

impl std::str::FromStr for AlgorithmChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hipea1" => Ok(Self::Hipea1),
            "hipea2" => Ok(Self::Hipea2),
            "hipea3" => Ok(Self::Hipea3),
            "hhl" => Ok(Self::Hhl),
            "all" => Ok(Self::All),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    #[default]
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumInput {
    pub eigenvalues: Vec<String>,
    pub eigenvectors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
}

/// The problem file as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumInput>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub algorithm: AlgorithmChoice,
    #[serde(default = "default_n_top")]
    pub n_top: usize,
    #[serde(default)]
    pub mode: ModeKind,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_n_top() -> usize {
    DEFAULT_N_TOP
}

fn default_shots() -> u64 {
    DEFAULT_SHOTS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputForm {
    Matrix,
    Spectrum,
}

/// A validated problem ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub m: u32,
    pub spectrum: Spectrum,
    pub b: Vec<f64>,
    pub input: InputForm,
    pub algorithm: AlgorithmChoice,
    pub n_top: usize,
    pub mode: ModeKind,
    pub shots: u64,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn extraction_mode(&self) -> Mode {
        match self.mode {
            ModeKind::Exact => Mode::Exact,
            ModeKind::Sampled => Mode::Sampled { shots: self.shots, seed: self.seed },
        }
    }

    /// Re-checks the limits that depend on settings a caller may override.
    pub fn check_limits(&self) -> Result<(), ProblemError> {
        let bottom = self.spectrum.dim().trailing_zeros() as usize;
        let wants = |a: AlgorithmChoice| self.algorithm == a || self.algorithm == AlgorithmChoice::All;
        if self.mode == ModeKind::Sampled && self.shots == 0 {
            return Err(ProblemError::Invalid("shots must be positive".into()));
        }
        if wants(AlgorithmChoice::Hipea3) {
            if self.n_top == 0 || self.n_top > 16 {
                return Err(ProblemError::Invalid(format!("n_top must be in 1..=16, got {}", self.n_top)));
            }
            if self.n_top + bottom > MAX_QUBITS {
                return Err(ProblemError::Invalid(format!("{} ancillas exceed the qubit limit", self.n_top)));
            }
        }
        if wants(AlgorithmChoice::Hipea2) && self.spectrum.len() + bottom > MAX_QUBITS {
            return Err(ProblemError::Invalid("one ancilla per eigenvalue exceeds the qubit limit".into()));
        }
        if wants(AlgorithmChoice::Hhl) && (self.m > crate::hhl::MAX_CLOCK_QUBITS || 1 + self.m as usize + bottom > MAX_QUBITS) {
            return Err(ProblemError::Invalid(format!("m = {} is too large for the HHL baseline", self.m)));
        }
        Ok(())
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        serde_json::from_str(text).map_err(|e| ProblemError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<ProblemSpec, ProblemError> {
        let m = self.m;
        if m == 0 || m > crate::binary::MAX_WIDTH {
            return Err(ProblemError::BadDimension(format!("bit width m = {m} outside 1..=52")));
        }
        let dim = self.b.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(ProblemError::BadDimension(format!("b has length {dim}, not a power of two >= 2")));
        }
        let nb = norm(&self.b);
        if (nb - 1.0).abs() > crate::numerics::NORM_TOL {
            return Err(NumericsError::NotNormalized { norm: nb }.into());
        }
        let (spectrum, input) = match (&self.matrix, &self.spectrum) {
            (Some(matrix), None) => (self.spectrum_from_matrix(matrix)?, InputForm::Matrix),
            (None, Some(input)) => (self.spectrum_from_input(input)?, InputForm::Spectrum),
            _ => return Err(ProblemError::Invalid("exactly one of \"matrix\" and \"spectrum\" is required".into())),
        };
        if let Some(index) = spectrum.pairs().iter().position(|p| p.phi.numerator() == 0) {
            return Err(NumericsError::Singular { index }.into());
        }
        let spec = ProblemSpec {
            m,
            spectrum,
            b: self.b.clone(),
            input,
            algorithm: self.algorithm,
            n_top: self.n_top,
            mode: self.mode,
            shots: self.shots,
            seed: self.seed,
        };
        spec.check_limits()?;
        Ok(spec)
    }

    fn spectrum_from_matrix(&self, rows: &[Vec<f64>]) -> Result<Spectrum, ProblemError> {
        let dim = self.b.len();
        if rows.len() != dim {
            return Err(ProblemError::BadDimension(format!("matrix has {} rows, b has {dim} entries", rows.len())));
        }
        let matrix = RealSymmetricMatrix::from_rows(rows)?;
        let pairs = hermitian_eigendecompose(&matrix)?;
        let mut phis = Vec::with_capacity(dim);
        for (index, p) in pairs.iter().enumerate() {
            if !(p.value > 0.0 && p.value < 1.0) {
                return Err(ProblemError::EigenvalueOutOfRange { index, value: p.value });
            }
            let phi = encode_value(p.value, self.m).map_err(|e| match e {
                BitsError::NotRepresentable { value, width } => ProblemError::NotRepresentable { index, value, width },
                other => other.into(),
            })?;
            phis.push(phi);
        }
        check_distinct(&phis)?;
        let vectors = pairs.into_iter().map(|p| p.vector).collect();
        Ok(Spectrum::from_rhs(phis, vectors, &self.b)?)
    }

    fn spectrum_from_input(&self, input: &SpectrumInput) -> Result<Spectrum, ProblemError> {
        let dim = self.b.len();
        if input.eigenvalues.len() != input.eigenvectors.len() || input.eigenvalues.is_empty() {
            return Err(ProblemError::BadDimension(format!(
                "{} eigenvalues but {} eigenvectors",
                input.eigenvalues.len(),
                input.eigenvectors.len()
            )));
        }
        let mut phis = Vec::with_capacity(input.eigenvalues.len());
        for s in &input.eigenvalues {
            let phi: BinaryFraction = s.parse()?;
            if phi.width() != self.m {
                return Err(ProblemError::BadDimension(format!("eigenvalue {s:?} does not have m = {} bits", self.m)));
            }
            phis.push(phi);
        }
        check_distinct(&phis)?;
        if let Some(v) = input.eigenvectors.iter().find(|v| v.len() != dim) {
            return Err(ProblemError::BadDimension(format!("eigenvector of length {}, b has {dim}", v.len())));
        }
        match &input.betas {
            None => Ok(Spectrum::from_rhs(phis, input.eigenvectors.clone(), &self.b)?),
            Some(betas) => {
                if betas.len() != phis.len() {
                    return Err(ProblemError::BadDimension(format!("{} betas for {} eigenvalues", betas.len(), phis.len())));
                }
                let pairs = phis
                    .into_iter()
                    .zip(&input.eigenvectors)
                    .zip(betas)
                    .map(|((phi, u), &beta)| EigenTriple { phi, u: u.clone(), beta })
                    .collect();
                let spectrum = Spectrum::new(pairs)?;
                let rhs = spectrum.rhs();
                let worst = rhs.iter().zip(&self.b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if worst > 1e-8 {
                    return Err(ProblemError::Invalid(format!("betas reproduce b only to {worst:e}")));
                }
                Ok(spectrum)
            }
        }
    }
}

fn check_distinct(phis: &[BinaryFraction]) -> Result<(), ProblemError> {
    for i in 0..phis.len() {
        for j in i + 1..phis.len() {
            if phis[i] == phis[j] {
                return Err(ProblemError::DegenerateSpectrum(format!(
                    "eigenvalues {i} and {j} both encode as {}",
                    phis[i]
                )));
            }
        }
    }
    Ok(())
}

/// The demonstration system as a problem file.
pub fn demo_problem_file() -> ProblemFile {
    let f = fixture::demo();
    ProblemFile {
        m: f.spectrum.m(),
        matrix: None,
        spectrum: Some(SpectrumInput {
            eigenvalues: f.spectrum.phis().iter().map(ToString::to_string).collect(),
            eigenvectors: f.spectrum.pairs().iter().map(|p| p.u.clone()).collect(),
            betas: Some(f.spectrum.betas()),
        }),
        b: f.b,
        algorithm: AlgorithmChoice::All,
        n_top: DEFAULT_N_TOP,
        mode: ModeKind::Exact,
        shots: DEFAULT_SHOTS,
        seed: 42,
    }
}

pub fn builtin(name: &str) -> Option<ProblemFile> {
    (name == fixture::DEMO_NAME).then(demo_problem_file)
}

/// Reads a problem file, or a built-in fixture by name when no such file exists.
pub fn load_problem(source: &str) -> Result<ProblemSpec, ProblemError> {
    let path = Path::new(source);
    let file = if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ProblemError::Io { path: source.to_string(), message: e.to_string() })?;
        ProblemFile::from_json(&text)?
    } else if let Some(file) = builtin(source) {
        file
    } else {
        return Err(ProblemError::Io { path: source.to_string(), message: "no such file or built-in fixture".into() });
    };
    file.validate()
}
