//! Fixed-width binary fractions, their suffix tree, and rotation angles.
//!
//! A fraction `0.b1 b2 ... bm` is stored as the integer `b1 b2 ... bm` plus its
//! width. Bits are numbered from 1 at the most significant end.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::BitsError;

pub const MAX_WIDTH: u32 = 52;
const REPRESENTABLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryFraction {
    numerator: u64,
    width: u32,
}

impl BinaryFraction {
    pub fn new(numerator: u64, width: u32) -> Result<Self, BitsError> {
        if width == 0 || width > MAX_WIDTH {
            return Err(BitsError::BadWidth(width));
        }
        if numerator >> width != 0 {
            return Err(BitsError::InvalidBitString(format!("{numerator} does not fit {width} bits")));
        }
        Ok(Self { numerator, width })
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn value(&self) -> f64 {
        decode_bits(self)
    }

    /// Bit `k` in `1..=width`, counted from the most significant end.
    pub fn bit(&self, k: u32) -> u8 {
        assert!((1..=self.width).contains(&k), "bit index {k} out of range");
        ((self.numerator >> (self.width - k)) & 1) as u8
    }

    /// The lowest `len` bits as an integer.
    pub fn low_bits(&self, len: u32) -> u64 {
        if len >= 64 {
            self.numerator
        } else {
            self.numerator & ((1u64 << len) - 1)
        }
    }

    /// Bits listed from the least significant upwards.
    pub fn bits_lsb_first(&self) -> Vec<u8> {
        (0..self.width).map(|i| ((self.numerator >> i) & 1) as u8).collect()
    }

    pub fn from_bits_lsb_first(bits: &[u8]) -> Result<Self, BitsError> {
        let width = u32::try_from(bits.len()).map_err(|_| BitsError::BadWidth(u32::MAX))?;
        let mut numerator = 0u64;
        for (i, &b) in bits.iter().enumerate().take(MAX_WIDTH as usize) {
            numerator |= u64::from(b & 1) << i;
        }
        Self::new(numerator, width)
    }
}

impl fmt::Display for BinaryFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 1..=self.width {
            write!(f, "{}", self.bit(k))?;
        }
        Ok(())
    }
}

impl FromStr for BinaryFraction {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix("0.").unwrap_or(s);
        if digits.is_empty() || digits.len() > MAX_WIDTH as usize {
            return Err(BitsError::InvalidBitString(s.to_string()));
        }
        let mut numerator = 0u64;
        for c in digits.chars() {
            let bit = match c {
                '0' => 0,
                '1' => 1,
                _ => return Err(BitsError::InvalidBitString(s.to_string())),
            };
            numerator = (numerator << 1) | bit;
        }
        Self::new(numerator, digits.len() as u32)
    }
}

impl Serialize for BinaryFraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BinaryFraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Encodes `value` in `[0, 1)` as an exact `width`-bit fraction.
pub fn encode_value(value: f64, width: u32) -> Result<BinaryFraction, BitsError> {
    if width == 0 || width > MAX_WIDTH {
        return Err(BitsError::BadWidth(width));
    }
    if !(0.0..1.0).contains(&value) {
        return Err(BitsError::OutOfRange { value });
    }
    let scale = (1u64 << width) as f64;
    let scaled = value * scale;
    let rounded = scaled.round();
    if (scaled - rounded).abs() > REPRESENTABLE_TOL * scale {
        return Err(BitsError::NotRepresentable { value, width });
    }
    if rounded >= scale {
        return Err(BitsError::OutOfRange { value });
    }
    BinaryFraction::new(rounded as u64, width)
}

pub fn decode_bits(fraction: &BinaryFraction) -> f64 {
    fraction.numerator as f64 / (1u64 << fraction.width) as f64
}

/// Group of eigenvalues sharing a low-bit suffix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixGroup {
    /// Shared low bits, least significant first.
    pub suffix: Vec<u8>,
    /// Indices into the input list.
    pub members: Vec<usize>,
}

impl SuffixGroup {
    /// Suffix written high to low, the way paths are printed.
    pub fn label(&self) -> String {
        self.suffix.iter().rev().map(|b| char::from(b'0' + b)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divergence {
    /// Bit position `k` (1 = most significant) where the group splits.
    pub bit_position: u32,
    /// Iteration that estimates that bit, `m + 1 - k`.
    pub iteration: u32,
    /// Members continuing with bit 0 and bit 1.
    pub split: (usize, usize),
}

/// Suffix tree of a set of distinct bit strings, read from the low end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergenceTree {
    width: u32,
    levels: Vec<Vec<SuffixGroup>>,
    divergences: Vec<Divergence>,
}

impl DivergenceTree {
    pub fn width(&self) -> u32 {
        self.width
    }

    /// Groups after `l` low bits are known; level 0 is the root.
    pub fn level(&self, l: u32) -> &[SuffixGroup] {
        &self.levels[l as usize]
    }

    pub fn n_nonzero(&self, l: u32) -> usize {
        self.levels[l as usize].len()
    }

    pub fn divergences(&self) -> &[Divergence] {
        &self.divergences
    }

    pub fn divergence_iterations(&self) -> Vec<u32> {
        self.divergences.iter().map(|d| d.iteration).collect()
    }
}

pub fn build_divergence_tree(phis: &[BinaryFraction]) -> Result<DivergenceTree, BitsError> {
    let first = phis.first().ok_or_else(|| BitsError::InvalidBitString(String::new()))?;
    let width = first.width();
    for p in phis {
        if p.width() != width {
            return Err(BitsError::MixedWidths { expected: width, found: p.width() });
        }
    }
    for i in 0..phis.len() {
        for j in i + 1..phis.len() {
            if phis[i] == phis[j] {
                return Err(BitsError::DegenerateSpectrum { first: i, second: j, bits: phis[i].to_string() });
            }
        }
    }

    let mut levels = vec![vec![SuffixGroup { suffix: Vec::new(), members: (0..phis.len()).collect() }]];
    let mut divergences = Vec::new();
    for l in 1..=width {
        let mut next = Vec::new();
        for group in &levels[l as usize - 1] {
            let bit_position = width + 1 - l;
            let (zeros, ones): (Vec<usize>, Vec<usize>) =
                group.members.iter().partition(|&&j| phis[j].bit(bit_position) == 0);
            if !zeros.is_empty() && !ones.is_empty() {
                divergences.push(Divergence { bit_position, iteration: l, split: (zeros.len(), ones.len()) });
            }
            for (bit, members) in [(0u8, zeros), (1u8, ones)] {
                if !members.is_empty() {
                    let mut suffix = group.suffix.clone();
                    suffix.push(bit);
                    next.push(SuffixGroup { suffix, members });
                }
            }
        }
        levels.push(next);
    }
    Ok(DivergenceTree { width, levels, divergences })
}

/// The known low bits that set a rotation, printed `-2pi(0.0b1...br)`.
///
/// `known_bits` are most significant first, so the first entry carries weight
/// 1/4 in the angle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RotationParameter {
    known_bits: Vec<u8>,
}

impl RotationParameter {
    pub fn new(known_bits: Vec<u8>) -> Self {
        assert!(known_bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        Self { known_bits }
    }

    /// Rotation for a path whose low bits are given least significant first.
    pub fn from_path_lsb_first(path: &[u8]) -> Self {
        Self::new(path.iter().rev().copied().collect())
    }

    pub fn known_bits(&self) -> &[u8] {
        &self.known_bits
    }

    pub fn angle(&self) -> f64 {
        rotation_angle(&self.known_bits)
    }
}

impl fmt::Display for RotationParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = self.known_bits.iter().map(|b| char::from(b'0' + b)).collect();
        write!(f, "-2pi(0.0{bits})")
    }
}

impl FromStr for RotationParameter {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .strip_prefix("-2pi(0.0")
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(|| BitsError::InvalidRotationLabel(s.to_string()))?;
        let bits = inner
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(BitsError::InvalidRotationLabel(s.to_string())),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        Ok(Self::new(bits))
    }
}

impl Serialize for RotationParameter {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RotationParameter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `-2 pi (0.0 b1 ... br)_2`.
pub fn rotation_angle(known_bits: &[u8]) -> f64 {
    let mut value = 0.0;
    let mut weight = 0.25;
    for &b in known_bits {
        if b == 1 {
            value += weight;
        }
        weight *= 0.5;
    }
    -2.0 * std::f64::consts::PI * value
}
