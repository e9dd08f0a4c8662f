//! Built-in and randomly generated problems.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::binary::BinaryFraction;
use crate::numerics::{dot, norm, orthonormalize_symmetric, EigenTriple, Spectrum};

pub const DEMO_NAME: &str = "demo";

/// Four-by-four demonstration system with 9-bit eigenvalues.
pub const DEMO_EIGENVALUES: [&str; 4] = ["101110000", "000010110", "000111011", "011011011"];

/// Printed four-decimal eigenvectors; they are orthogonal only to about 1e-4.
pub const DEMO_EIGENVECTORS: [[f64; 4]; 4] = [
    [-0.7444, 0.1296, -0.0496, 0.6531],
    [0.3976, 0.6253, 0.5593, 0.3716],
    [0.5356, -0.3225, -0.4458, 0.6406],
    [-0.0295, -0.6987, 0.6971, 0.1581],
];

/// Printed four-decimal overlaps; their squares sum to 1.000044.
pub const DEMO_BETAS: [f64; 4] = [0.1825, 0.1389, 0.8384, 0.4945];

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub spectrum: Spectrum,
    pub b: Vec<f64>,
}

/// The demonstration system, repaired to be exactly consistent: eigenvectors
/// are symmetrically orthonormalized and the overlaps renormalized.
pub fn demo() -> Fixture {
    let vectors: Vec<Vec<f64>> = DEMO_EIGENVECTORS.iter().map(|v| v.to_vec()).collect();
    let vectors = orthonormalize_symmetric(&vectors).expect("demo vectors are well conditioned");
    let scale = norm(&DEMO_BETAS);
    let pairs = DEMO_EIGENVALUES
        .iter()
        .zip(vectors)
        .zip(DEMO_BETAS)
        .map(|((phi, u), beta)| EigenTriple { phi: phi.parse().expect("valid literal"), u, beta: beta / scale })
        .collect();
    let spectrum = Spectrum::new(pairs).expect("demo spectrum is valid");
    let b = spectrum.rhs();
    Fixture { spectrum, b }
}

/// Random full-rank problem of dimension `n` with distinct nonzero `m`-bit
/// eigenvalues and a right-hand side whose overlaps all satisfy
/// `beta^2 >= min_weight`.
pub fn random(seed: u64, n: usize, m: u32, min_weight: f64) -> Fixture {
    assert!(n >= 2 && n.is_power_of_two(), "dimension must be a power of two");
    assert!((1u64 << m) > n as u64, "need at least n nonzero {m}-bit values");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = random_orthonormal(&mut rng, n);
    let phis: Vec<BinaryFraction> = sample(&mut rng, (1usize << m) - 1, n)
        .into_iter()
        .map(|k| BinaryFraction::new(k as u64 + 1, m).expect("fits"))
        .collect();
    let betas = loop {
        let raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let nr = norm(&raw);
        let betas: Vec<f64> = raw.iter().map(|x| x / nr).collect();
        if betas.iter().all(|x| x * x >= min_weight) {
            break betas;
        }
    };
    let pairs = phis
        .into_iter()
        .zip(vectors)
        .zip(betas)
        .map(|((phi, u), beta)| EigenTriple { phi, u, beta })
        .collect();
    let spectrum = Spectrum::new(pairs).expect("random spectrum is valid");
    let b = spectrum.rhs();
    Fixture { spectrum, b }
}

fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nv = norm(&v);
        if nv > 1e-6 {
            basis.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{direct_solve, gram_deviation, spectral_synthesize};

    #[test]
    fn demo_fixture_matches_printed_data() {
        let f = demo();
        for (pair, printed) in f.spectrum.pairs().iter().zip(DEMO_EIGENVECTORS) {
            for (a, b) in pair.u.iter().zip(printed) {
                assert!((a - b).abs() < 1e-4);
            }
        }
        let x = direct_solve(&f.spectrum).unwrap();
        let printed = [4.9584, -1.1007, -0.6430, 6.2099];
        for (a, b) in x.iter().zip(printed) {
            assert!((a - b).abs() < 1.5e-3, "{a} vs {b}");
        }
        let ax = spectral_synthesize(&f.spectrum).mul_vec(&x);
        for (a, b) in ax.iter().zip(&f.b) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn random_fixtures_are_valid_and_reproducible() {
        let a = random(3, 8, 6, 1e-4);
        assert_eq!(a, random(3, 8, 6, 1e-4));
        let refs: Vec<&[f64]> = a.spectrum.pairs().iter().map(|p| p.u.as_slice()).collect();
        assert!(gram_deviation(&refs) < 1e-12);
        assert!(a.spectrum.pairs().iter().all(|p| p.phi.numerator() != 0));
    }
}
