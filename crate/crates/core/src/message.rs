use std::fmt;
use std::str::FromStr;

use crate::block::{Block, BlockSize};
use crate::error::{Error, Result};

/// How a message label acts on the current state before encryption.
///
/// * `BitIndex` — a label m in [0, n-1] flips bit m of the state.
/// * `FullBlock` — a label is an n-bit block; bits set to 1 keep the
///   corresponding state bit, bits set to 0 invert it (x XOR !m).
/// * `TrueXor` — a label is an n-bit block XORed into the state, the
///   combination step of textbook CBC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageSemantics {
    BitIndex,
    FullBlock,
    TrueXor,
}

impl MessageSemantics {
    pub const ALL: [MessageSemantics; 3] = [
        MessageSemantics::BitIndex,
        MessageSemantics::FullBlock,
        MessageSemantics::TrueXor,
    ];

    /// Number of distinct labels for block size n: n for bit-index
    /// semantics, 2^n otherwise.
    pub fn label_count(self, size: BlockSize) -> u64 {
        match self {
            MessageSemantics::BitIndex => u64::from(size.bits()),
            MessageSemantics::FullBlock | MessageSemantics::TrueXor => size.block_count(),
        }
    }

    pub fn validate_label(self, label: u64, size: BlockSize) -> Result<()> {
        if label < self.label_count(size) {
            Ok(())
        } else {
            Err(Error::LabelOutOfRange {
                label,
                semantics: self.name(),
                n: size.bits(),
            })
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MessageSemantics::BitIndex => "bit-index",
            MessageSemantics::FullBlock => "full-block",
            MessageSemantics::TrueXor => "xor",
        }
    }
}

impl fmt::Display for MessageSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MessageSemantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bit-index" => Ok(MessageSemantics::BitIndex),
            "full-block" => Ok(MessageSemantics::FullBlock),
            "xor" => Ok(MessageSemantics::TrueXor),
            other => Err(Error::BadSemantics {
                name: other.to_string(),
            }),
        }
    }
}

/// A message: an infinite sequence of labels represented by a finite
/// prefix. Every label past the prefix is 0 (zero-extension), so `head`
/// and `label_at` are total and a trajectory can run for any number of
/// steps.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct MessageSeq {
    labels: Vec<u64>,
}

impl MessageSeq {
    /// Validating constructor: every label must be in range for the given
    /// semantics and block size.
    pub fn new(labels: Vec<u64>, semantics: MessageSemantics, size: BlockSize) -> Result<Self> {
        for &label in &labels {
            semantics.validate_label(label, size)?;
        }
        Ok(MessageSeq { labels })
    }

    pub fn empty() -> Self {
        MessageSeq::default()
    }

    /// First label; 0 when the prefix is exhausted.
    pub fn head(&self) -> u64 {
        self.labels.first().copied().unwrap_or(0)
    }

    /// The sequence with its first label removed.
    pub fn shift(&self) -> Self {
        MessageSeq {
            labels: self.labels.iter().skip(1).copied().collect(),
        }
    }

    /// Label at position k (0-based); 0 past the stored prefix.
    pub fn label_at(&self, k: usize) -> u64 {
        self.labels.get(k).copied().unwrap_or(0)
    }

    pub fn prefix_len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }
}

/// Unchecked construction from labels already known to be in range
/// (successor enumeration, path search, witness assembly).
impl From<Vec<u64>> for MessageSeq {
    fn from(labels: Vec<u64>) -> Self {
        MessageSeq { labels }
    }
}

/// A point of the phase space: the current state block paired with the
/// message still to be consumed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhasePoint {
    pub state: Block,
    pub message: MessageSeq,
}

impl PhasePoint {
    pub fn new(state: Block, message: MessageSeq) -> Self {
        PhasePoint { state, message }
    }
}
