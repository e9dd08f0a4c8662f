//! Closed-form outcome probabilities, computed with integer arithmetic on the
//! bit strings and sharing nothing with the simulator.

use crate::binary::BinaryFraction;
use crate::numerics::Spectrum;

/// `cos^2(pi d / 2^s)` with exact 0 and 1 at the dyadic points that matter.
fn cos_sq_turns(d: u128, s: u32) -> f64 {
    let modulus = 1u128 << s;
    let d = d % modulus;
    if d == 0 {
        1.0
    } else if 2 * d == modulus {
        0.0
    } else {
        (std::f64::consts::PI * d as f64 / modulus as f64).cos().powi(2)
    }
}

/// Probability that the ancilla of iteration `l` reads `outcome` for a branch
/// with eigenvalue `phi` and weight `beta`, given the rotation bits used
/// (most significant first, after the leading `0.0`).
pub fn branch_outcome_probability(beta: f64, phi: &BinaryFraction, omega_bits: &[u8], l: u32, outcome: u8) -> f64 {
    let r = omega_bits.len() as u32;
    let s = l.max(r + 1);
    let a = u128::from(phi.low_bits(l)) << (s - l);
    let b = omega_bits.iter().fold(0u128, |acc, &x| (acc << 1) | u128::from(x)) << (s - r - 1);
    let modulus = 1u128 << s;
    let d = (a + modulus - b % modulus) % modulus;
    let c2 = cos_sq_turns(d, s);
    let w = beta * beta;
    if outcome == 0 {
        w * c2
    } else {
        w * (1.0 - c2)
    }
}

/// Joint probability of an outcome path (iteration 1 first) under a rotation
/// schedule, summed over all eigen-branches.
pub fn path_probability(spectrum: &Spectrum, path: &[u8], schedule: &[Vec<u8>]) -> f64 {
    assert_eq!(path.len(), schedule.len(), "one rotation per iteration");
    spectrum
        .pairs()
        .iter()
        .map(|p| {
            let mut w = p.beta * p.beta;
            for (i, (&bit, omega)) in path.iter().zip(schedule).enumerate() {
                if w == 0.0 {
                    break;
                }
                w *= branch_outcome_probability(1.0, &p.phi, omega, i as u32 + 1, bit);
            }
            w
        })
        .sum()
}

/// Rotation bits a path uses on itself: before iteration `l` it knows its own
/// lowest `l - 1` bits, written most significant first.
pub fn self_consistent_schedule(path: &[u8]) -> Vec<Vec<u8>> {
    (0..path.len()).map(|l| path[..l].iter().rev().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn matched_rotation_is_deterministic() {
        let phi: BinaryFraction = "101110000".parse().unwrap();
        for l in 1..=9 {
            let known: Vec<u8> = (1..l).map(|i| phi.bit(10 - i)).collect::<Vec<_>>().into_iter().rev().collect();
            let own = phi.bit(10 - l);
            assert_eq!(branch_outcome_probability(1.0, &phi, &known, l, own), 1.0);
            assert_eq!(branch_outcome_probability(1.0, &phi, &known, l, 1 - own), 0.0);
        }
    }

    #[test]
    fn path_probability_of_own_suffix_is_beta_squared() {
        let problem = fixture::demo();
        let path = vec![0, 0];
        let p = path_probability(&problem.spectrum, &path, &self_consistent_schedule(&path));
        assert!((p - 0.03331).abs() < 1e-5);
    }

    #[test]
    fn mismatched_rotation_gives_intermediate_value() {
        let phi: BinaryFraction = "01".parse().unwrap();
        // low 2 bits 01 -> 0.01; rotation 0.00 -> delta 1/4
        let p0 = branch_outcome_probability(1.0, &phi, &[0], 2, 0);
        assert!((p0 - 0.5).abs() < 1e-15);
    }
}
