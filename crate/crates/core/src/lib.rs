//! Dynamical-systems analysis of the CBC block-cipher mode of operation.
//!
//! The mode is modeled as a discrete dynamical system on phase points
//! (internal state block, remaining message): each iteration combines one
//! message label with the state and encrypts the result, emitting one
//! ciphertext block. The central question — does the system behave
//! chaotically in Devaney's sense? — reduces to strong connectivity of a
//! labeled transition graph over all n-bit states, and every answer this
//! crate produces is backed by a machine-checkable witness: a replayed
//! periodic orbit, a replayed steering orbit, a divergence pair, or an
//! unreachable vertex pair.

pub mod block;
pub mod cbc;
pub mod chaos;
pub mod cipher;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod graph;
pub mod message;
pub mod metric;

pub use block::{Block, BlockSize};
pub use cbc::{cbc_decrypt, cbc_encrypt, pad, unpad, verify_cbc_equivalence, Bits};
pub use chaos::{
    chaos_verdict, periodic_witness, sensitivity_certificate, transitive_witness, ChaosStatus,
    ChaosVerdict, Configuration, PeriodicWitness, SensitivityCertificate, TransitiveWitness,
};
pub use cipher::{validate_bijection, BijectionReport, KeyedPermutation};
pub use dynamics::{apply_label, step, step_state, trajectory, Trajectory};
pub use error::{Error, Result};
pub use export::{edge_table, edge_table_csv, export_dot, EdgeRow};
pub use graph::{ConnectivityMode, ConnectivityVerdict, TransitionGraph, UnreachablePair};
pub use message::{MessageSemantics, MessageSeq, PhasePoint};
pub use metric::{distance, Distance};
