use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::block::{Block, BlockSize};
use crate::error::{Error, Result};

/// A keyed permutation of the n-bit blocks: the encryption function the
/// mode of operation is built around, together with its inverse.
///
/// Built-in families:
/// * `identity` — E(x) = x
/// * `negation` — E(x) = !x (bitwise, within the block width)
/// * `caesar:<k>` — E(x) = x + k mod 2^n
/// * `table:<path>` — an explicit permutation table loaded from a file
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyedPermutation {
    size: BlockSize,
    kind: CipherKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum CipherKind {
    Identity,
    Negation,
    Caesar { shift: u64 },
    Table { forward: Vec<u64>, inverse: Vec<u64> },
}

impl KeyedPermutation {
    pub fn identity(size: BlockSize) -> Self {
        KeyedPermutation {
            size,
            kind: CipherKind::Identity,
        }
    }

    pub fn negation(size: BlockSize) -> Self {
        KeyedPermutation {
            size,
            kind: CipherKind::Negation,
        }
    }

    /// Addition of a constant mod 2^n. Any integer shift is accepted and
    /// reduced into [0, 2^n).
    pub fn caesar(size: BlockSize, shift: i64) -> Self {
        let m = i128::from(size.block_count());
        let reduced = (i128::from(shift)).rem_euclid(m) as u64;
        KeyedPermutation {
            size,
            kind: CipherKind::Caesar { shift: reduced },
        }
    }

    /// Explicit permutation: `table[x]` is the image of x. The table must
    /// list every block value exactly once.
    pub fn table(size: BlockSize, forward: Vec<u64>) -> Result<Self> {
        let count = size.block_count();
        if forward.len() as u64 != count {
            return Err(Error::TableWrongLength {
                expected: count,
                got: forward.len() as u64,
            });
        }
        let mut inverse = vec![u64::MAX; forward.len()];
        for (x, &y) in forward.iter().enumerate() {
            if y >= count {
                return Err(Error::TableValueOutOfRange {
                    value: y,
                    n: size.bits(),
                });
            }
            if inverse[y as usize] != u64::MAX {
                return Err(Error::TableNotPermutation { duplicated: y });
            }
            inverse[y as usize] = x as u64;
        }
        Ok(KeyedPermutation {
            size,
            kind: CipherKind::Table { forward, inverse },
        })
    }

    /// Parse a permutation table file: first line the block size in bits,
    /// second line 2^n whitespace-separated block values.
    pub fn from_table_text(text: &str, max_bits: u8) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n_line = lines.next().ok_or_else(|| Error::BadTableFile {
            reason: "empty file".to_string(),
        })?;
        let n: u8 = n_line.trim().parse().map_err(|_| Error::BadTableFile {
            reason: format!("first line must be the block size, got '{}'", n_line.trim()),
        })?;
        let size = BlockSize::with_max(n, max_bits)?;
        let values_line = lines.next().ok_or_else(|| Error::BadTableFile {
            reason: "missing table line".to_string(),
        })?;
        if lines.next().is_some() {
            return Err(Error::BadTableFile {
                reason: "expected exactly two non-empty lines".to_string(),
            });
        }
        let mut forward = Vec::new();
        for token in values_line.split_whitespace() {
            let v: u64 = token.parse().map_err(|_| Error::BadTableFile {
                reason: format!("not a block value: '{token}'"),
            })?;
            forward.push(v);
        }
        Self::table(size, forward)
    }

    /// Parse a cipher spec string: `identity`, `negation`, `caesar:<k>` or
    /// `table:<path>`. The table file's declared block size must match
    /// `size`.
    pub fn parse_spec(spec: &str, size: BlockSize) -> Result<Self> {
        match spec {
            "identity" => return Ok(Self::identity(size)),
            "negation" => return Ok(Self::negation(size)),
            _ => {}
        }
        if let Some(shift) = spec.strip_prefix("caesar:") {
            let k: i64 = shift.parse().map_err(|_| Error::BadCipherSpec {
                spec: spec.to_string(),
                reason: format!("shift must be an integer, got '{shift}'"),
            })?;
            return Ok(Self::caesar(size, k));
        }
        if let Some(path) = spec.strip_prefix("table:") {
            let text = fs::read_to_string(path).map_err(|e| Error::BadCipherSpec {
                spec: spec.to_string(),
                reason: format!("cannot read '{path}': {e}"),
            })?;
            let cipher = Self::from_table_text(&text, BlockSize::HARD_MAX)?;
            if cipher.size != size {
                return Err(Error::BadCipherSpec {
                    spec: spec.to_string(),
                    reason: format!(
                        "table is for {}-bit blocks, requested {}",
                        cipher.size,
                        size.bits()
                    ),
                });
            }
            return Ok(cipher);
        }
        Err(Error::BadCipherSpec {
            spec: spec.to_string(),
            reason: "expected identity, negation, caesar:<k> or table:<path>".to_string(),
        })
    }

    pub fn block_size(&self) -> BlockSize {
        self.size
    }

    /// Stable human-readable name including the key material (tables are
    /// summarized by entry count and a content hash).
    pub fn descriptor(&self) -> String {
        match &self.kind {
            CipherKind::Identity => "identity".to_string(),
            CipherKind::Negation => "negation".to_string(),
            CipherKind::Caesar { shift } => format!("caesar:{shift}"),
            CipherKind::Table { forward, .. } => {
                format!("table:{}:{:016x}", forward.len(), fnv1a(forward))
            }
        }
    }

    pub fn encrypt(&self, x: Block) -> Block {
        assert_eq!(x.size(), self.size, "block size does not match cipher");
        Block::new(self.encrypt_raw(x.value()), self.size).unwrap()
    }

    pub fn decrypt(&self, y: Block) -> Block {
        assert_eq!(y.size(), self.size, "block size does not match cipher");
        Block::new(self.decrypt_raw(y.value()), self.size).unwrap()
    }

    #[inline]
    pub(crate) fn encrypt_raw(&self, x: u64) -> u64 {
        match &self.kind {
            CipherKind::Identity => x,
            CipherKind::Negation => x ^ self.size.mask(),
            CipherKind::Caesar { shift } => (x + shift) & self.size.mask(),
            CipherKind::Table { forward, .. } => forward[x as usize],
        }
    }

    #[inline]
    pub(crate) fn decrypt_raw(&self, y: u64) -> u64 {
        match &self.kind {
            CipherKind::Identity => y,
            CipherKind::Negation => y ^ self.size.mask(),
            CipherKind::Caesar { shift } => (y + self.size.block_count() - shift) & self.size.mask(),
            CipherKind::Table { inverse, .. } => inverse[y as usize],
        }
    }
}

/// Outcome of a bijectivity check. `violations` lists blocks whose
/// encrypt/decrypt round trip fails (at most the first 16 found).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BijectionReport {
    pub passed: bool,
    pub exhaustive: bool,
    pub checked: u64,
    pub violations: Vec<u64>,
}

const EXHAUSTIVE_CHECK_BITS: u8 = 12;
const SAMPLED_CHECKS: u64 = 1 << EXHAUSTIVE_CHECK_BITS;
const MAX_VIOLATIONS: usize = 16;

/// Verify that encryption composed with decryption is the identity:
/// exhaustively for block sizes up to 12 bits, on a fixed-seed random
/// sample of 4096 blocks above that.
pub fn validate_bijection(cipher: &KeyedPermutation) -> BijectionReport {
    let size = cipher.block_size();
    let mut violations = Vec::new();
    let mut checked = 0u64;
    let exhaustive = size.bits() <= EXHAUSTIVE_CHECK_BITS;

    let check = |x: u64, violations: &mut Vec<u64>| {
        let broken = cipher.decrypt_raw(cipher.encrypt_raw(x)) != x
            || cipher.encrypt_raw(cipher.decrypt_raw(x)) != x;
        if broken && violations.len() < MAX_VIOLATIONS {
            violations.push(x);
        }
    };

    if exhaustive {
        for x in 0..size.block_count() {
            check(x, &mut violations);
            checked += 1;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x_b1ec_7104);
        for _ in 0..SAMPLED_CHECKS {
            check(rng.random_range(0..size.block_count()), &mut violations);
            checked += 1;
        }
    }

    BijectionReport {
        passed: violations.is_empty(),
        exhaustive,
        checked,
        violations,
    }
}

fn fnv1a(values: &[u64]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for v in values {
        for byte in v.to_le_bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}
