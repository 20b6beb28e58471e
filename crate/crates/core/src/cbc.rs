use std::fmt;
use std::str::FromStr;

use crate::block::{Block, BlockSize};
use crate::cipher::KeyedPermutation;
use crate::dynamics::trajectory;
use crate::error::{Error, Result};
use crate::message::{MessageSemantics, MessageSeq, PhasePoint};

/// A plaintext bit string of arbitrary length, most-significant bit first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bits {
    bits: Vec<bool>,
}

impl Bits {
    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits { bits }
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Split into consecutive n-bit blocks; the length must be a multiple
    /// of n.
    pub fn to_blocks(&self, size: BlockSize) -> Result<Vec<Block>> {
        let n = size.bits() as usize;
        if !self.bits.len().is_multiple_of(n) {
            return Err(Error::BadBitString {
                reason: format!(
                    "length {} is not a multiple of the block size {}",
                    self.bits.len(),
                    n
                ),
            });
        }
        self.bits.chunks(n).map(|c| Block::from_bits(c, size)).collect()
    }

    pub fn from_blocks(blocks: &[Block]) -> Self {
        Bits {
            bits: blocks.iter().flat_map(|b| b.bits()).collect(),
        }
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Accepted forms: a (possibly empty) ASCII string of 0s and 1s, or
/// `hex:<digits>/<bitlen>` where the hex digits expand to 4 bits each,
/// most-significant first, and the first <bitlen> bits are taken.
impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("hex:") {
            let (digits, len) = rest.split_once('/').ok_or_else(|| Error::BadBitString {
                reason: "hex form is hex:<digits>/<bitlen>".to_string(),
            })?;
            let bitlen: usize = len.parse().map_err(|_| Error::BadBitString {
                reason: format!("bad bit length '{len}'"),
            })?;
            let mut bits = Vec::with_capacity(digits.len() * 4);
            for c in digits.chars() {
                let v = c.to_digit(16).ok_or_else(|| Error::BadBitString {
                    reason: format!("'{c}' is not a hex digit"),
                })? as u8;
                for shift in (0..4).rev() {
                    bits.push(v >> shift & 1 == 1);
                }
            }
            if bitlen > bits.len() {
                return Err(Error::BadBitString {
                    reason: format!(
                        "bit length {bitlen} exceeds the {} bits provided",
                        bits.len()
                    ),
                });
            }
            bits.truncate(bitlen);
            return Ok(Bits { bits });
        }
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::BadBitString {
                        reason: format!("'{other}' is not a binary digit"),
                    })
                }
            }
        }
        Ok(Bits { bits })
    }
}

/// Pad a bit string to whole blocks: append a single 1 bit, then 0 bits up
/// to the next block boundary. The output is always strictly longer than
/// the input, so an unambiguous unpad exists even for aligned inputs.
pub fn pad(bits: &Bits, size: BlockSize) -> Vec<Block> {
    let n = size.bits() as usize;
    let mut padded = bits.bits.clone();
    padded.push(true);
    while !padded.len().is_multiple_of(n) {
        padded.push(false);
    }
    Bits { bits: padded }
        .to_blocks(size)
        .expect("padded length is a multiple of the block size")
}

/// Undo `pad`: strip trailing zeros and the final 1 bit.
pub fn unpad(blocks: &[Block]) -> Result<Bits> {
    let mut bits = Bits::from_blocks(blocks).bits;
    loop {
        match bits.pop() {
            Some(true) => return Ok(Bits { bits }),
            Some(false) => continue,
            None => {
                return Err(Error::MalformedPadding {
                    reason: "no 1 bit marks the end of the data".to_string(),
                })
            }
        }
    }
}

/// Reference CBC encryption: c_0 = E(m_0 XOR iv), c_i = E(m_i XOR c_{i-1}).
pub fn cbc_encrypt(
    cipher: &KeyedPermutation,
    iv: Block,
    plaintext: &[Block],
) -> Result<Vec<Block>> {
    check_sizes(cipher, iv, plaintext)?;
    let mut previous = iv;
    let mut out = Vec::with_capacity(plaintext.len());
    for &m in plaintext {
        previous = cipher.encrypt(m.xor(previous));
        out.push(previous);
    }
    Ok(out)
}

/// Inverse of `cbc_encrypt`: m_i = D(c_i) XOR c_{i-1}.
pub fn cbc_decrypt(
    cipher: &KeyedPermutation,
    iv: Block,
    ciphertext: &[Block],
) -> Result<Vec<Block>> {
    check_sizes(cipher, iv, ciphertext)?;
    let mut previous = iv;
    let mut out = Vec::with_capacity(ciphertext.len());
    for &c in ciphertext {
        out.push(cipher.decrypt(c).xor(previous));
        previous = c;
    }
    Ok(out)
}

fn check_sizes(cipher: &KeyedPermutation, iv: Block, blocks: &[Block]) -> Result<()> {
    for b in std::iter::once(&iv).chain(blocks) {
        if b.size() != cipher.block_size() {
            return Err(Error::BlockSizeMismatch {
                left: b.size().bits(),
                right: cipher.block_size().bits(),
            });
        }
    }
    Ok(())
}

/// Comparison of the iterated dynamical system against the reference CBC
/// chain on the same inputs. Under xor semantics the visited states are
/// the ciphertext blocks; under the other semantics the check documents
/// the divergence instead of asserting it away.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbcEquivalenceReport {
    /// True only for xor semantics, where equality is the expected outcome.
    pub applicable: bool,
    /// Whether the trajectory could run at all (bit-index semantics cannot
    /// consume plaintext blocks outside its label range).
    pub ran: bool,
    pub equal: bool,
    pub first_divergence: Option<usize>,
    pub trajectory_blocks: Vec<u64>,
    pub cbc_blocks: Vec<u64>,
}

/// Run both the dynamical system (iv as initial state, plaintext blocks as
/// message) and the reference CBC encryption, and compare outputs.
pub fn verify_cbc_equivalence(
    cipher: &KeyedPermutation,
    iv: Block,
    plaintext: &[Block],
    semantics: MessageSemantics,
) -> Result<CbcEquivalenceReport> {
    let cbc_blocks: Vec<u64> = cbc_encrypt(cipher, iv, plaintext)?
        .iter()
        .map(|b| b.value())
        .collect();
    let labels: Vec<u64> = plaintext.iter().map(|b| b.value()).collect();
    let applicable = semantics == MessageSemantics::TrueXor;
    let in_range = labels
        .iter()
        .all(|&l| semantics.validate_label(l, cipher.block_size()).is_ok());
    if !in_range {
        return Ok(CbcEquivalenceReport {
            applicable,
            ran: false,
            equal: false,
            first_divergence: None,
            trajectory_blocks: Vec::new(),
            cbc_blocks,
        });
    }
    let start = PhasePoint::new(iv, MessageSeq::from(labels));
    let traj = trajectory(cipher, &start, plaintext.len(), semantics)?;
    let trajectory_blocks: Vec<u64> = traj.ciphertext_blocks.iter().map(|b| b.value()).collect();
    let first_divergence = trajectory_blocks
        .iter()
        .zip(&cbc_blocks)
        .position(|(a, b)| a != b);
    Ok(CbcEquivalenceReport {
        applicable,
        ran: true,
        equal: first_divergence.is_none(),
        first_divergence,
        trajectory_blocks,
        cbc_blocks,
    })
}
