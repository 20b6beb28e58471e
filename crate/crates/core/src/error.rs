use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the library. Every fallible operation returns these
/// rather than panicking; panics are reserved for internal invariant
/// violations (mixing blocks of different sizes inside one computation).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("block size {n} out of range [1, {max}]")]
    BlockSizeOutOfRange { n: u8, max: u8 },

    #[error("block value {value} out of range for {n}-bit blocks")]
    BlockValueOutOfRange { value: u64, n: u8 },

    #[error("bit index {index} out of range for {n}-bit blocks")]
    BitIndexOutOfRange { index: u8, n: u8 },

    #[error("bit vector has length {got}, expected {expected}")]
    BitVectorWrongLength { expected: usize, got: usize },

    #[error("label {label} out of range for {semantics} semantics with {n}-bit blocks")]
    LabelOutOfRange {
        label: u64,
        semantics: &'static str,
        n: u8,
    },

    #[error("block size mismatch: {left} vs {right}")]
    BlockSizeMismatch { left: u8, right: u8 },

    #[error("permutation table has {got} entries, expected {expected}")]
    TableWrongLength { expected: u64, got: u64 },

    #[error("table entry {value} out of range for {n}-bit blocks")]
    TableValueOutOfRange { value: u64, n: u8 },

    #[error("not a permutation: value {duplicated} appears more than once")]
    TableNotPermutation { duplicated: u64 },

    #[error("malformed cipher spec '{spec}': {reason}")]
    BadCipherSpec { spec: String, reason: String },

    #[error("unknown message semantics '{name}': expected bit-index, full-block or xor")]
    BadSemantics { name: String },

    #[error("malformed permutation table file: {reason}")]
    BadTableFile { reason: String },

    #[error("malformed bit string: {reason}")]
    BadBitString { reason: String },

    #[error("malformed padding: {reason}")]
    MalformedPadding { reason: String },

    #[error("{mode} mode supports block sizes up to {limit} bits, got {n}")]
    GraphTooLarge { mode: &'static str, limit: u8, n: u8 },

    #[error(
        "transition graph is not strongly connected: no path from {from} to {to} \
         ({forward_reachable} of {vertex_count} vertices reachable from {from})"
    )]
    NotStronglyConnected {
        from: u64,
        to: u64,
        forward_reachable: u64,
        vertex_count: u64,
    },

    #[error("witness replay diverged from its construction at step {step}")]
    ReplayMismatch { step: usize },

    #[error("cannot perturb the message: this configuration admits only one label")]
    NoAlternativeLabel,

    #[error("invalid epsilon '{epsilon}': {reason}")]
    BadEpsilon { epsilon: String, reason: String },
}
