use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::OutcomeDistribution;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a root seed with a path of stream ids into an independent seed.
pub fn derive_seed(root: u64, stream: &[u64]) -> u64 {
    stream.iter().fold(splitmix(root), |acc, &id| splitmix(acc ^ splitmix(id)))
}

/// Multinomial draw of `shots` over `probabilities` (renormalized).
pub fn multinomial(probabilities: &[f64], shots: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining_mass: f64 = probabilities.iter().map(|p| p.max(0.0)).sum();
    let mut remaining = shots;
    let mut counts = Vec::with_capacity(probabilities.len());
    for &p in probabilities {
        let p = p.max(0.0);
        let draw = if remaining == 0 || remaining_mass <= 0.0 {
            0
        } else {
            let q = (p / remaining_mass).clamp(0.0, 1.0);
            if q >= 1.0 {
                remaining
            } else {
                Binomial::new(remaining, q).expect("probability in [0, 1]").sample(&mut rng)
            }
        };
        counts.push(draw);
        remaining -= draw;
        remaining_mass -= p;
    }
    counts
}

pub fn sample_counts(distribution: &OutcomeDistribution, shots: u64, seed: u64) -> Vec<u64> {
    multinomial(&distribution.probabilities, shots, seed)
}
