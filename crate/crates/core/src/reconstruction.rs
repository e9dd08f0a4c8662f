//! Classical post-processing: eigenvector magnitudes, sign recovery, and the
//! final weighted sum.
//!
//! The products `beta_j u_jp` are only known up to sign. The sign search picks
//! the pattern that best reproduces `b`. Because the residual
//! `|sum_j s_jp a_jp - b_p|^2` adds up independently over components `p`, the
//! exhaustive search over all patterns factorizes into one small search per
//! component without changing the optimum or the runner-up.

use serde::{Deserialize, Serialize};

use crate::binary::BinaryFraction;
use crate::error::ReconstructionError;

pub const MAX_SIGN_ENTRIES: usize = 20;
pub const EXACT_SIGN_GAP: f64 = 1e-6;
const ZERO_PRODUCT: f64 = 1e-12;

/// Outcome of the sign search. `signs[j][p]` is the exponent `n` in `(-1)^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    pub signs: Vec<Vec<u8>>,
    pub residual: f64,
    pub runner_up: Option<f64>,
    /// Entries fixed to `+` because their product vanishes.
    pub indeterminate: Vec<(usize, usize)>,
    pub signed_products: Vec<Vec<f64>>,
}

/// Statistical setting the sign-gap threshold is derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignNoise {
    Exact,
    Sampled { path_shots: u64, bottom_shots: u64 },
}

/// Square roots of the post-selected bottom distributions, one row per
/// extracted eigenvalue, renormalized to unit length.
pub fn eigenvector_magnitudes(
    extracted: &[BinaryFraction],
    distributions: &[(BinaryFraction, Vec<f64>)],
) -> Result<Vec<Vec<f64>>, ReconstructionError> {
    extracted
        .iter()
        .map(|phi| {
            let (_, dist) = distributions
                .iter()
                .find(|(key, _)| key == phi)
                .ok_or_else(|| ReconstructionError::MissingPath(phi.to_string()))?;
            let total: f64 = dist.iter().map(|p| p.max(0.0)).sum();
            if total <= 0.0 {
                return Err(ReconstructionError::MissingPath(phi.to_string()));
            }
            Ok(dist.iter().map(|p| (p.max(0.0) / total).sqrt()).collect())
        })
        .collect()
}

struct ComponentSearch {
    free: Vec<usize>,
    best_mask: usize,
    best_err: f64,
    second_mask: Option<usize>,
    second_err: f64,
}

fn search_component(products: &[f64], target: f64) -> ComponentSearch {
    let free: Vec<usize> = (0..products.len()).filter(|&j| products[j] >= ZERO_PRODUCT).collect();
    let mut best = (usize::MAX, f64::INFINITY);
    let mut second = (None, f64::INFINITY);
    for mask in 0..1usize << free.len() {
        let sum: f64 = free
            .iter()
            .enumerate()
            .map(|(i, &j)| if (mask >> i) & 1 == 1 { -products[j] } else { products[j] })
            .sum();
        let err = (sum - target).powi(2);
        if err < best.1 {
            second = (Some(best.0).filter(|&m| m != usize::MAX), best.1);
            best = (mask, err);
        } else if err < second.1 {
            second = (Some(mask), err);
        }
    }
    ComponentSearch { free, best_mask: best.0, best_err: best.1, second_mask: second.0, second_err: second.1 }
}

/// Minimum-residual sign search. The squared residual is a sum over bottom
/// components, so each component is searched on its own; the optimum equals
/// that of the full enumeration. Fails with `AmbiguousSigns` (carrying the
/// best pattern) when the runner-up residual is within the noise threshold.
pub fn resolve_signs(
    u_abs: &[Vec<f64>],
    beta_abs: &[f64],
    b: &[f64],
    noise: SignNoise,
) -> Result<SignPattern, ReconstructionError> {
    let n = beta_abs.len();
    if u_abs.len() != n {
        return Err(ReconstructionError::DimensionMismatch { expected: n, found: u_abs.len() });
    }
    let dim = b.len();
    if let Some(row) = u_abs.iter().find(|r| r.len() != dim) {
        return Err(ReconstructionError::DimensionMismatch { expected: dim, found: row.len() });
    }
    let products: Vec<Vec<f64>> = (0..n).map(|j| u_abs[j].iter().map(|u| beta_abs[j] * u).collect()).collect();

    let mut indeterminate = Vec::new();
    for (j, row) in products.iter().enumerate() {
        for (p, a) in row.iter().enumerate() {
            if *a < ZERO_PRODUCT {
                indeterminate.push((j, p));
            }
        }
    }
    let free = n * dim - indeterminate.len();
    if free > MAX_SIGN_ENTRIES {
        return Err(ReconstructionError::SearchSpaceTooLarge { entries: free });
    }

    let searches: Vec<ComponentSearch> =
        (0..dim).map(|p| search_component(&products.iter().map(|r| r[p]).collect::<Vec<_>>(), b[p])).collect();
    let total: f64 = searches.iter().map(|s| s.best_err).sum();
    let residual = total.sqrt();

    // Runner-up: the best pattern with one component moved to its second choice.
    let runner = searches
        .iter()
        .enumerate()
        .filter(|(_, s)| s.second_mask.is_some())
        .map(|(p, s)| (p, (total - s.best_err + s.second_err).max(0.0).sqrt()))
        .min_by(|a, b| a.1.total_cmp(&b.1));

    let mut signs = vec![vec![0u8; dim]; n];
    for (p, s) in searches.iter().enumerate() {
        for (i, &j) in s.free.iter().enumerate() {
            signs[j][p] = ((s.best_mask >> i) & 1) as u8;
        }
    }
    let signed_products: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..dim).map(|p| if signs[j][p] == 1 { -products[j][p] } else { products[j][p] }).collect())
        .collect();
    let pattern = SignPattern {
        signs,
        residual,
        runner_up: runner.map(|r| r.1),
        indeterminate,
        signed_products,
    };

    if let Some((p, runner_residual)) = runner {
        let s = &searches[p];
        let threshold = match noise {
            SignNoise::Exact => EXACT_SIGN_GAP,
            SignNoise::Sampled { path_shots, bottom_shots } => {
                let flipped = s.best_mask ^ s.second_mask.expect("runner-up exists");
                let var: f64 = s
                    .free
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (flipped >> i) & 1 == 1)
                    .map(|(_, &j)| {
                        let beta = beta_abs[j];
                        let u = u_abs[j][p];
                        let sigma = u * ((1.0 - beta * beta).max(0.0) / (4.0 * path_shots as f64)).sqrt()
                            + beta * ((1.0 - u * u).max(0.0) / (4.0 * bottom_shots as f64)).sqrt();
                        sigma * sigma
                    })
                    .sum();
                3.0 * var.sqrt()
            }
        };
        let gap = runner_residual - residual;
        if gap <= threshold {
            return Err(ReconstructionError::AmbiguousSigns { gap, threshold, best: Box::new(pattern) });
        }
    }
    Ok(pattern)
}

/// `x = sum_j (signed product row j) / phi_j`.
pub fn assemble_solution(
    signed_products: &[Vec<f64>],
    phis: &[BinaryFraction],
) -> Result<Vec<f64>, ReconstructionError> {
    if signed_products.len() != phis.len() {
        return Err(ReconstructionError::DimensionMismatch { expected: phis.len(), found: signed_products.len() });
    }
    let dim = signed_products.first().map_or(0, Vec::len);
    let mut x = vec![0.0; dim];
    for (row, phi) in signed_products.iter().zip(phis) {
        let value = phi.value();
        if value == 0.0 {
            return Err(ReconstructionError::ZeroEigenvalue(phi.to_string()));
        }
        for (xi, v) in x.iter_mut().zip(row) {
            *xi += v / value;
        }
    }
    Ok(x)
}

/// Everything the classical side produces for one extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub u_abs: Vec<Vec<f64>>,
    pub signs: SignPattern,
    pub x: Vec<f64>,
    /// `(gap, threshold)` when the sign pattern was ambiguous.
    pub ambiguity: Option<(f64, f64)>,
}

/// Runs magnitudes, signs and assembly. An ambiguous sign pattern is kept and
/// flagged rather than treated as fatal.
pub fn reconstruct(
    phis: &[BinaryFraction],
    beta_abs: &[f64],
    distributions: &[(BinaryFraction, Vec<f64>)],
    b: &[f64],
    noise: SignNoise,
) -> Result<Reconstruction, ReconstructionError> {
    let u_abs = eigenvector_magnitudes(phis, distributions)?;
    let (signs, ambiguity) = match resolve_signs(&u_abs, beta_abs, b, noise) {
        Ok(p) => (p, None),
        Err(ReconstructionError::AmbiguousSigns { gap, threshold, best }) => (*best, Some((gap, threshold))),
        Err(e) => return Err(e),
    };
    let x = assemble_solution(&signs.signed_products, phis)?;
    Ok(Reconstruction { u_abs, signs, x, ambiguity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use crate::numerics::direct_solve;

    /// Brute force over every full pattern, for cross-checking the factorized search.
    fn brute_force(products: &[Vec<f64>], b: &[f64]) -> (f64, f64) {
        let n = products.len();
        let dim = b.len();
        let mut all: Vec<f64> = (0..1usize << (n * dim))
            .map(|mask| {
                (0..dim)
                    .map(|p| {
                        let s: f64 = (0..n)
                            .map(|j| if (mask >> (j * dim + p)) & 1 == 1 { -products[j][p] } else { products[j][p] })
                            .sum();
                        (s - b[p]).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        all.sort_by(f64::total_cmp);
        (all[0], all[1])
    }

    #[test]
    fn recovers_demo_signs_and_solution() {
        let f = fixture::demo();
        let phis = f.spectrum.phis();
        let beta_abs: Vec<f64> = f.spectrum.betas().iter().map(|b| b.abs()).collect();
        let dists: Vec<(BinaryFraction, Vec<f64>)> =
            f.spectrum.pairs().iter().map(|p| (p.phi.clone(), p.u.iter().map(|u| u * u).collect())).collect();
        let r = reconstruct(&phis, &beta_abs, &dists, &f.b, SignNoise::Exact).unwrap();
        assert!(r.ambiguity.is_none());
        assert!(r.signs.residual < 1e-12);
        assert!(r.signs.runner_up.unwrap() > 0.01);
        let x = direct_solve(&f.spectrum).unwrap();
        for (a, b) in r.x.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn factorized_search_matches_brute_force() {
        let f = fixture::random(11, 2, 5, 1e-3);
        let products: Vec<Vec<f64>> =
            f.spectrum.pairs().iter().map(|p| p.u.iter().map(|u| (p.beta * u).abs()).collect()).collect();
        let u_abs: Vec<Vec<f64>> = f.spectrum.pairs().iter().map(|p| p.u.iter().map(|u| u.abs()).collect()).collect();
        let beta_abs: Vec<f64> = f.spectrum.betas().iter().map(|b| b.abs()).collect();
        let pattern = resolve_signs(&u_abs, &beta_abs, &f.b, SignNoise::Exact).unwrap();
        let (best, second) = brute_force(&products, &f.b);
        assert!((pattern.residual - best).abs() < 1e-12);
        assert!((pattern.runner_up.unwrap() - second).abs() < 1e-12);
    }

    #[test]
    fn zero_products_are_indeterminate() {
        let u_abs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let p = resolve_signs(&u_abs, &[0.6, 0.8], &[0.6, -0.8], SignNoise::Exact).unwrap();
        assert_eq!(p.indeterminate, vec![(0, 1), (1, 0)]);
        assert_eq!(p.signs, vec![vec![0, 0], vec![0, 1]]);
    }

    #[test]
    fn symmetric_tie_is_ambiguous() {
        // b = 0 is reproduced equally well by +a - a and -a + a.
        let u_abs = vec![vec![1.0], vec![1.0]];
        let err = resolve_signs(&u_abs, &[0.5, 0.5], &[0.0], SignNoise::Exact).unwrap_err();
        match err {
            ReconstructionError::AmbiguousSigns { best, .. } => assert_eq!(best.signs, vec![vec![1], vec![0]]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn search_space_limit() {
        let u_abs = vec![vec![0.2; 8]; 3];
        let err = resolve_signs(&u_abs, &[0.5, 0.5, 0.5], &[0.1; 8], SignNoise::Exact).unwrap_err();
        assert_eq!(err, ReconstructionError::SearchSpaceTooLarge { entries: 24 });
    }

    #[test]
    fn missing_distribution_is_reported() {
        let phi: BinaryFraction = "01".parse().unwrap();
        let err = eigenvector_magnitudes(&[phi], &[]).unwrap_err();
        assert_eq!(err, ReconstructionError::MissingPath("01".into()));
    }

    #[test]
    fn zero_eigenvalue_is_rejected() {
        let phi: BinaryFraction = "00".parse().unwrap();
        assert!(matches!(assemble_solution(&[vec![1.0]], &[phi]), Err(ReconstructionError::ZeroEigenvalue(_))));
    }
}
