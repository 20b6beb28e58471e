use std::cmp::Ordering;

use num_bigint::BigUint;

use crate::block::BlockSize;
use crate::error::{Error, Result};
use crate::message::PhasePoint;

/// Exact distance between two phase points:
///
///   d = de + (9/n) * sum_k h_k * 10^(-k)
///
/// where `de` is the Hamming distance of the states and `h_k` the Hamming
/// distance of the k-th message labels in their n-bit encodings (messages
/// are zero-extended past their prefixes, so the stored digit list is the
/// complete nonzero part of the series). No floating point is ever stored;
/// every comparison is an exact integer comparison of scaled numerators.
#[derive(Debug, Clone)]
pub struct Distance {
    state_distance: u32,
    block_digits: Vec<u32>,
    size: BlockSize,
}

/// Compute the exact distance between two phase points with equal block
/// sizes. Message labels must fit in n bits; the stored digit list covers
/// the longer of the two prefixes.
pub fn distance(p: &PhasePoint, q: &PhasePoint) -> Result<Distance> {
    if p.state.size() != q.state.size() {
        return Err(Error::BlockSizeMismatch {
            left: p.state.size().bits(),
            right: q.state.size().bits(),
        });
    }
    let size = p.state.size();
    for seq in [&p.message, &q.message] {
        for &label in seq.labels() {
            if label > size.mask() {
                return Err(Error::BlockValueOutOfRange {
                    value: label,
                    n: size.bits(),
                });
            }
        }
    }
    let len = p.message.prefix_len().max(q.message.prefix_len());
    let block_digits = (0..len)
        .map(|k| (p.message.label_at(k) ^ q.message.label_at(k)).count_ones())
        .collect();
    Ok(Distance {
        state_distance: p.state.hamming(q.state),
        block_digits,
        size,
    })
}

impl Distance {
    /// The integral part: number of differing state bits.
    pub fn state_distance(&self) -> u32 {
        self.state_distance
    }

    /// The per-position numerators h_k, k = 1.. (all zero past the list).
    pub fn block_digits(&self) -> &[u32] {
        &self.block_digits
    }

    /// Positions beyond this exponent contribute nothing: the stored value
    /// is exact under the zero-extension tail policy.
    pub fn tail_bound_exponent(&self) -> usize {
        self.block_digits.len()
    }

    pub fn size(&self) -> BlockSize {
        self.size
    }

    pub fn is_zero(&self) -> bool {
        self.state_distance == 0 && self.block_digits.iter().all(|&h| h == 0)
    }

    /// n * 10^scale * d as an integer; requires scale >= digit count.
    fn scaled(&self, scale: usize) -> BigUint {
        debug_assert!(scale >= self.block_digits.len());
        let mut acc = BigUint::from(u64::from(self.size.bits())) * self.state_distance;
        for k in 0..scale {
            acc *= 10u32;
            acc += 9 * self.block_digits.get(k).copied().unwrap_or(0);
        }
        acc
    }

    fn pow10(e: usize) -> BigUint {
        BigUint::from(10u32).pow(e as u32)
    }

    /// Exact test d < 10^(-q).
    pub fn less_than_pow10(&self, q: u32) -> bool {
        let scale = self.block_digits.len().max(q as usize);
        let rhs = BigUint::from(u64::from(self.size.bits())) * Self::pow10(scale - q as usize);
        self.scaled(scale) < rhs
    }

    /// Exact test d >= bound for an integer bound.
    pub fn at_least(&self, bound: u64) -> bool {
        let scale = self.block_digits.len();
        let rhs = BigUint::from(u64::from(self.size.bits())) * bound * Self::pow10(scale);
        self.scaled(scale) >= rhs
    }

    /// Exact test d <= a + b (triangle-inequality comparisons without
    /// materializing a sum whose digits could exceed n).
    pub fn at_most_sum_of(&self, a: &Distance, b: &Distance) -> bool {
        assert_eq!(self.size, a.size, "distances over different block sizes");
        assert_eq!(self.size, b.size, "distances over different block sizes");
        let scale = self
            .block_digits
            .len()
            .max(a.block_digits.len())
            .max(b.block_digits.len());
        self.scaled(scale) <= a.scaled(scale) + b.scaled(scale)
    }

    /// The k-th decimal digit (k >= 1) of the exact value, by truncation.
    /// Note that for block sizes not dividing 9 a single nonzero h_j
    /// spreads over several decimal digits (9/n is not an integer), so
    /// this is the digit of the value, not of the term.
    pub fn decimal_digit(&self, k: usize) -> u8 {
        assert!(k >= 1, "decimal digits are indexed from 1");
        let scale = self.block_digits.len().max(k);
        let den = BigUint::from(u64::from(self.size.bits())) * Self::pow10(scale - k);
        let truncated = self.scaled(scale) / den;
        u64::try_from(truncated % 10u32).unwrap() as u8
    }

    /// Exact decimal rendering truncated to `digits` fractional places.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        if digits == 0 {
            return self.state_distance.to_string();
        }
        let scale = self.block_digits.len().max(digits);
        let mut frac = BigUint::from(0u32);
        for k in 0..scale {
            frac *= 10u32;
            frac += 9 * self.block_digits.get(k).copied().unwrap_or(0);
        }
        let den = BigUint::from(u64::from(self.size.bits())) * Self::pow10(scale - digits);
        let frac = (frac / den).to_string();
        format!("{}.{:0>width$}", self.state_distance, frac, width = digits)
    }
}

impl PartialEq for Distance {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

/// Exact value comparison; ordered only against distances over the same
/// block size.
impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.size != other.size {
            return None;
        }
        let scale = self.block_digits.len().max(other.block_digits.len());
        Some(self.scaled(scale).cmp(&other.scaled(scale)))
    }
}
