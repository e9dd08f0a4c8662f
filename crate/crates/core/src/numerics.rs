//! Dense real linear algebra for the small matrices the solvers handle.
//!
//! Matrices are row-major `Vec<f64>`. Dimensions stay tiny (at most a few dozen),
//! so the code favours clarity over blocking or SIMD.

use crate::binary::BinaryFraction;
use crate::error::NumericsError;

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const ORTHONORMAL_TOL: f64 = 1e-8;
pub const NORM_TOL: f64 = 1e-10;
const JACOBI_REL_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct RealSymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl RealSymmetricMatrix {
    /// Builds a matrix from row-major entries, symmetrizing after the check.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self, NumericsError> {
        if dim == 0 {
            return Err(NumericsError::Empty);
        }
        if entries.len() != dim * dim {
            return Err(NumericsError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let mut entries = entries;
        for i in 0..dim {
            for j in i + 1..dim {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                let diff = (a - b).abs();
                if diff > SYMMETRY_TOL || !diff.is_finite() {
                    return Err(NumericsError::NonSymmetric { i, j, diff });
                }
                let mean = 0.5 * (a + b);
                entries[i * dim + j] = mean;
                entries[j * dim + i] = mean;
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumericsError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(NumericsError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.dim)
            .map(|row| dot(row, x))
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.entries)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Cyclic Jacobi eigendecomposition.
///
/// Eigenvalues come back ascending. Each eigenvector is unit length with its
/// first clearly nonzero component positive.
pub fn hermitian_eigendecompose(a: &RealSymmetricMatrix) -> Result<Vec<EigenPair>, NumericsError> {
    let n = a.dim;
    let mut d = a.entries.clone();
    let mut v = RealSymmetricMatrix::identity(n).entries;
    let tol = JACOBI_REL_TOL * a.frobenius_norm();

    let mut off = off_diagonal_norm(&d, n);
    let mut sweeps = 0;
    while off > tol {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(NumericsError::ConvergenceFailure { sweeps, off_norm: off });
        }
        for p in 0..n {
            for q in p + 1..n {
                jacobi_rotate(&mut d, &mut v, n, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&d, n);
    }

    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|k| {
            let mut vector: Vec<f64> = (0..n).map(|r| v[r * n + k]).collect();
            canonicalize_sign(&mut vector);
            EigenPair { value: d[k * n + k], vector }
        })
        .collect();
    pairs.sort_by(|x, y| x.value.total_cmp(&y.value));
    Ok(pairs)
}

fn jacobi_rotate(d: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = d[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = d[p * n + p];
    let aqq = d[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    d[p * n + p] = app - t * apq;
    d[q * n + q] = aqq + t * apq;
    d[p * n + q] = 0.0;
    d[q * n + p] = 0.0;
    for r in 0..n {
        if r != p && r != q {
            let arp = d[r * n + p];
            let arq = d[r * n + q];
            let new_rp = c * arp - s * arq;
            let new_rq = s * arp + c * arq;
            d[r * n + p] = new_rp;
            d[p * n + r] = new_rp;
            d[r * n + q] = new_rq;
            d[q * n + r] = new_rq;
        }
        let vrp = v[r * n + p];
        let vrq = v[r * n + q];
        v[r * n + p] = c * vrp - s * vrq;
        v[r * n + q] = s * vrp + c * vrq;
    }
}

fn off_diagonal_norm(d: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += d[i * n + j] * d[i * n + j];
            }
        }
    }
    sum.sqrt()
}

fn canonicalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-10) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// One eigenvalue of a problem in bit-string form, with its eigenvector and the
/// overlap of the right-hand side with that eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTriple {
    pub phi: BinaryFraction,
    pub u: Vec<f64>,
    pub beta: f64,
}

/// A validated (possibly partial) spectral decomposition plus right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    dim: usize,
    m: u32,
    pairs: Vec<EigenTriple>,
}

impl Spectrum {
    pub fn new(pairs: Vec<EigenTriple>) -> Result<Self, NumericsError> {
        let first = pairs.first().ok_or(NumericsError::Empty)?;
        let dim = first.u.len();
        let m = first.phi.width();
        if dim == 0 {
            return Err(NumericsError::Empty);
        }
        for p in &pairs {
            if p.u.len() != dim {
                return Err(NumericsError::DimensionMismatch { expected: dim, found: p.u.len() });
            }
            if p.phi.width() != m {
                return Err(NumericsError::DimensionMismatch {
                    expected: m as usize,
                    found: p.phi.width() as usize,
                });
            }
        }
        if pairs.len() > dim {
            return Err(NumericsError::DimensionMismatch { expected: dim, found: pairs.len() });
        }
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                if pairs[i].phi == pairs[j].phi {
                    return Err(NumericsError::DegenerateSpectrum { first: i, second: j });
                }
            }
        }
        let vectors: Vec<&[f64]> = pairs.iter().map(|p| p.u.as_slice()).collect();
        let deviation = gram_deviation(&vectors);
        if deviation > ORTHONORMAL_TOL {
            return Err(NumericsError::NonOrthonormal { deviation });
        }
        let beta_norm = pairs.iter().map(|p| p.beta * p.beta).sum::<f64>().sqrt();
        if (beta_norm - 1.0).abs() > NORM_TOL {
            return Err(NumericsError::NotNormalized { norm: beta_norm });
        }
        Ok(Self { dim, m, pairs })
    }

    /// Pairs bit strings with eigenvectors and projects `b` onto them.
    pub fn from_rhs(
        phis: Vec<BinaryFraction>,
        vectors: Vec<Vec<f64>>,
        b: &[f64],
    ) -> Result<Self, NumericsError> {
        if phis.len() != vectors.len() {
            return Err(NumericsError::DimensionMismatch { expected: phis.len(), found: vectors.len() });
        }
        let pairs = phis
            .into_iter()
            .zip(vectors)
            .map(|(phi, u)| {
                let beta = dot(&u, b);
                EigenTriple { phi, u, beta }
            })
            .collect();
        Self::new(pairs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[EigenTriple] {
        &self.pairs
    }

    pub fn phis(&self) -> Vec<BinaryFraction> {
        self.pairs.iter().map(|p| p.phi.clone()).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.beta).collect()
    }

    /// The right-hand side `sum_j beta_j u_j`.
    pub fn rhs(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.dim];
        for p in &self.pairs {
            for (bi, ui) in b.iter_mut().zip(&p.u) {
                *bi += p.beta * ui;
            }
        }
        b
    }
}

/// Largest absolute entry of `V^T V - I` for the given vectors.
pub fn gram_deviation(vectors: &[&[f64]]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(a, b) - target).abs());
        }
    }
    worst
}

/// `A = sum_j phi_j u_j u_j^T`.
pub fn spectral_synthesize(spectrum: &Spectrum) -> RealSymmetricMatrix {
    let n = spectrum.dim();
    let mut entries = vec![0.0; n * n];
    for p in spectrum.pairs() {
        let phi = p.phi.value();
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] += phi * p.u[i] * p.u[j];
            }
        }
    }
    RealSymmetricMatrix::new(n, entries).expect("outer products are symmetric")
}

/// Coefficients `beta_j = u_j . b` for a unit vector `b`.
pub fn project_onto_eigenbasis(b: &[f64], vectors: &[Vec<f64>]) -> Result<Vec<f64>, NumericsError> {
    let nb = norm(b);
    if (nb - 1.0).abs() > NORM_TOL {
        return Err(NumericsError::NotNormalized { norm: nb });
    }
    vectors
        .iter()
        .map(|u| {
            if u.len() != b.len() {
                Err(NumericsError::DimensionMismatch { expected: b.len(), found: u.len() })
            } else {
                Ok(dot(u, b))
            }
        })
        .collect()
}

/// Exact `x = sum_j (beta_j / phi_j) u_j` from a validated spectrum.
pub fn direct_solve(spectrum: &Spectrum) -> Result<Vec<f64>, NumericsError> {
    let mut x = vec![0.0; spectrum.dim()];
    for (index, p) in spectrum.pairs().iter().enumerate() {
        let phi = p.phi.value();
        if phi == 0.0 {
            return Err(NumericsError::Singular { index });
        }
        for (xi, ui) in x.iter_mut().zip(&p.u) {
            *xi += p.beta / phi * ui;
        }
    }
    Ok(x)
}

/// `||reference - candidate|| / ||reference||`.
pub fn relative_error(reference: &[f64], candidate: &[f64]) -> Result<f64, NumericsError> {
    if reference.len() != candidate.len() {
        return Err(NumericsError::DimensionMismatch { expected: reference.len(), found: candidate.len() });
    }
    let nr = norm(reference);
    if nr == 0.0 {
        return Err(NumericsError::ZeroReference);
    }
    let diff: Vec<f64> = reference.iter().zip(candidate).map(|(a, b)| a - b).collect();
    Ok(norm(&diff) / nr)
}

/// Symmetric orthonormalization `V (V^T V)^{-1/2}`, the closest orthonormal set
/// to slightly non-orthogonal input vectors.
pub fn orthonormalize_symmetric(vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NumericsError> {
    let k = vectors.len();
    if k == 0 {
        return Err(NumericsError::Empty);
    }
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = dot(&vectors[i], &vectors[j]);
        }
    }
    let pairs = hermitian_eigendecompose(&RealSymmetricMatrix::new(k, gram)?)?;
    if let Some((index, _)) = pairs.iter().enumerate().find(|(_, p)| p.value <= 1e-12) {
        return Err(NumericsError::Singular { index });
    }
    let mut inv_sqrt = vec![0.0; k * k];
    for p in &pairs {
        let w = 1.0 / p.value.sqrt();
        for i in 0..k {
            for j in 0..k {
                inv_sqrt[i * k + j] += w * p.vector[i] * p.vector[j];
            }
        }
    }
    Ok((0..k)
        .map(|j| {
            let mut out = vec![0.0; vectors[0].len()];
            for (i, v) in vectors.iter().enumerate() {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += inv_sqrt[i * k + j] * x;
                }
            }
            out
        })
        .collect())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
