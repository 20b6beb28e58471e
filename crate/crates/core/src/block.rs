use std::fmt;

use crate::error::{Error, Result};

/// Number of bits per block. Valid sizes are 1 through a configurable
/// maximum (20 by default, 30 as a hard ceiling: graph algorithms hold
/// bitsets over all 2^n blocks in memory).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockSize(u8);

impl BlockSize {
    pub const DEFAULT_MAX: u8 = 20;
    pub const HARD_MAX: u8 = 30;

    pub fn new(n: u8) -> Result<Self> {
        Self::with_max(n, Self::DEFAULT_MAX)
    }

    /// Construct with a caller-supplied ceiling, still clamped to the hard
    /// maximum. Used by the CLI when the environment override is in effect.
    pub fn with_max(n: u8, max: u8) -> Result<Self> {
        let max = max.min(Self::HARD_MAX);
        if n == 0 || n > max {
            return Err(Error::BlockSizeOutOfRange { n, max });
        }
        Ok(BlockSize(n))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// 2^n, the number of distinct blocks.
    pub fn block_count(self) -> u64 {
        1u64 << self.0
    }

    /// Bitmask selecting the low n bits of a raw value.
    pub fn mask(self) -> u64 {
        self.block_count() - 1
    }
}

impl fmt::Display for BlockSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An n-bit block, the unit every cipher and every transition acts on.
/// The value is always below 2^n; bit positions count from the
/// most-significant (leftmost) end, so bit 0 of the 2-bit block `10` is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    value: u64,
    size: BlockSize,
}

impl Block {
    pub fn new(value: u64, size: BlockSize) -> Result<Self> {
        if value > size.mask() {
            return Err(Error::BlockValueOutOfRange {
                value,
                n: size.bits(),
            });
        }
        Ok(Block { value, size })
    }

    pub fn zero(size: BlockSize) -> Self {
        Block { value: 0, size }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn size(self) -> BlockSize {
        self.size
    }

    /// Bit `index` counted from the most-significant end, 0-based.
    pub fn bit(self, index: u8) -> Result<bool> {
        if index >= self.size.bits() {
            return Err(Error::BitIndexOutOfRange {
                index,
                n: self.size.bits(),
            });
        }
        Ok(self.value >> (self.size.bits() - 1 - index) & 1 == 1)
    }

    pub fn flip_bit(self, index: u8) -> Result<Self> {
        if index >= self.size.bits() {
            return Err(Error::BitIndexOutOfRange {
                index,
                n: self.size.bits(),
            });
        }
        Ok(Block {
            value: self.value ^ (1 << (self.size.bits() - 1 - index)),
            size: self.size,
        })
    }

    /// Assemble a block from bits listed most-significant first. The slice
    /// length must equal the block size.
    pub fn from_bits(bits: &[bool], size: BlockSize) -> Result<Self> {
        if bits.len() != size.bits() as usize {
            return Err(Error::BitVectorWrongLength {
                expected: size.bits() as usize,
                got: bits.len(),
            });
        }
        let value = bits.iter().fold(0u64, |acc, &b| acc << 1 | u64::from(b));
        Ok(Block { value, size })
    }

    /// Bits listed most-significant first.
    pub fn bits(self) -> Vec<bool> {
        (0..self.size.bits()).map(|i| self.bit(i).unwrap()).collect()
    }

    pub fn xor(self, other: Self) -> Self {
        assert_eq!(self.size, other.size, "blocks of different sizes");
        Block {
            value: self.value ^ other.value,
            size: self.size,
        }
    }

    /// Bitwise complement within the block width.
    pub fn complement(self) -> Self {
        Block {
            value: self.value ^ self.size.mask(),
            size: self.size,
        }
    }

    /// Number of differing bit positions.
    pub fn hamming(self, other: Self) -> u32 {
        assert_eq!(self.size, other.size, "blocks of different sizes");
        (self.value ^ other.value).count_ones()
    }

    /// Zero-padded binary rendering, most-significant bit first.
    pub fn binary_string(self) -> String {
        format!("{:0width$b}", self.value, width = self.size.bits() as usize)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}
