use serde::Serialize;

use crate::cipher::KeyedPermutation;
use crate::dynamics::step;
use crate::error::{Error, Result};
use crate::graph::{ConnectivityMode, ConnectivityVerdict, TransitionGraph};
use crate::message::{MessageSemantics, MessageSeq, PhasePoint};
use crate::metric::{distance, Distance};

/// Largest accepted epsilon exponent: constructions allocate O(q) labels.
pub const MAX_EPSILON_EXPONENT: u32 = 10_000;

/// Analysis outcome. The serialized names are the external contract:
/// a strongly connected transition graph certifies chaos, while a
/// disconnected one only means the certification hypothesis failed —
/// it is never reported as a proof of non-chaos.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChaosStatus {
    #[serde(rename = "CHAOTIC_BY_THEOREM_1")]
    ChaoticByTheorem1,
    #[serde(rename = "NOT_STRONGLY_CONNECTED")]
    NotStronglyConnected,
}

impl ChaosStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ChaosStatus::ChaoticByTheorem1 => "CHAOTIC_BY_THEOREM_1",
            ChaosStatus::NotStronglyConnected => "NOT_STRONGLY_CONNECTED",
        }
    }
}

/// The analyzed configuration, as it appears in every serialized document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Configuration {
    pub n: u8,
    pub cipher: String,
    pub semantics: String,
}

impl Configuration {
    pub fn of(cipher: &KeyedPermutation, semantics: MessageSemantics) -> Self {
        Configuration {
            n: cipher.block_size().bits(),
            cipher: cipher.descriptor(),
            semantics: semantics.name().to_string(),
        }
    }
}

/// Strong-connectivity decision together with its chaos reading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChaosVerdict {
    pub configuration: Configuration,
    pub status: ChaosStatus,
    pub connectivity: ConnectivityVerdict,
}

pub fn chaos_verdict(
    cipher: &KeyedPermutation,
    semantics: MessageSemantics,
    mode: ConnectivityMode,
) -> Result<ChaosVerdict> {
    let graph = TransitionGraph::new(cipher, semantics);
    let connectivity = graph.strongly_connected(mode)?;
    let status = if connectivity.strongly_connected {
        ChaosStatus::ChaoticByTheorem1
    } else {
        ChaosStatus::NotStronglyConnected
    };
    Ok(ChaosVerdict {
        configuration: Configuration::of(cipher, semantics),
        status,
        connectivity,
    })
}

/// A verified periodic orbit passing within 10^(-q) of its anchor: the
/// point's message is one full period of labels (conceptually repeated
/// forever), and iterating `period` steps returns exactly to the point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicWitness {
    pub point: PhasePoint,
    pub period: usize,
    pub epsilon_exponent: u32,
    pub replay_verified: bool,
}

/// A verified finite orbit from within 10^(-q) of `from` landing exactly
/// on the target point after `steps` iterations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitiveWitness {
    pub point: PhasePoint,
    pub steps: usize,
    pub target: PhasePoint,
    pub epsilon_exponent: u32,
    pub replay_verified: bool,
}

/// A verified divergence pair: `perturbed` starts within 10^(-q) of
/// `anchor` (they differ in a single message label), yet after `steps`
/// iterations the two trajectories sit at distance >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCertificate {
    pub anchor: PhasePoint,
    pub perturbed: PhasePoint,
    pub perturbed_index: usize,
    pub steps: usize,
    pub initial_distance: Distance,
    pub divergence: Distance,
    pub epsilon_exponent: u32,
    pub replay_verified: bool,
}

fn validate_inputs(
    cipher: &KeyedPermutation,
    semantics: MessageSemantics,
    points: &[&PhasePoint],
    q: u32,
) -> Result<()> {
    if q > MAX_EPSILON_EXPONENT {
        return Err(Error::BadEpsilon {
            epsilon: format!("10^-{q}"),
            reason: format!("exponent exceeds the supported maximum {MAX_EPSILON_EXPONENT}"),
        });
    }
    for p in points {
        if p.state.size() != cipher.block_size() {
            return Err(Error::BlockSizeMismatch {
                left: p.state.size().bits(),
                right: cipher.block_size().bits(),
            });
        }
        for &label in p.message.labels() {
            semantics.validate_label(label, cipher.block_size())?;
        }
    }
    Ok(())
}

fn require_strongly_connected(graph: &TransitionGraph) -> Result<()> {
    let verdict = graph.strongly_connected(ConnectivityMode::Implicit)?;
    match verdict.witness {
        None => Ok(()),
        Some(w) => Err(Error::NotStronglyConnected {
            from: w.from,
            to: w.to,
            forward_reachable: w.forward_reachable,
            vertex_count: verdict.vertex_count,
        }),
    }
}

/// Iterate `steps` transitions and return the final point.
fn walk(
    cipher: &KeyedPermutation,
    start: PhasePoint,
    steps: usize,
    semantics: MessageSemantics,
) -> Result<PhasePoint> {
    let mut current = start;
    for _ in 0..steps {
        current = step(cipher, &current, semantics)?;
    }
    Ok(current)
}

/// Construct a periodic point within 10^(-q) of `anchor`: copy the
/// anchor's first q+1 labels, walk them, and close the loop with the
/// shortest path back to the anchor state. The result is replayed through
/// the step function before being returned; the path search is never
/// trusted blindly.
pub fn periodic_witness(
    cipher: &KeyedPermutation,
    semantics: MessageSemantics,
    anchor: &PhasePoint,
    q: u32,
) -> Result<PeriodicWitness> {
    validate_inputs(cipher, semantics, &[anchor], q)?;
    let graph = TransitionGraph::new(cipher, semantics);
    require_strongly_connected(&graph)?;

    let copied = q as usize + 1;
    let prefix: Vec<u64> = (0..copied).map(|k| anchor.message.label_at(k)).collect();
    let reached = walk(
        cipher,
        PhasePoint::new(anchor.state, MessageSeq::from(prefix.clone())),
        copied,
        semantics,
    )?;
    let back = graph
        .find_path(reached.state, anchor.state)
        .expect("strong connectivity guarantees a return path");

    let mut period_labels = prefix;
    period_labels.extend(back);
    let period = period_labels.len();

    // replay: starting from two stacked periods, `period` steps must come
    // back to the same state with exactly one period of labels left
    let mut doubled = period_labels.clone();
    doubled.extend(period_labels.iter().copied());
    let end = walk(
        cipher,
        PhasePoint::new(anchor.state, MessageSeq::from(doubled)),
        period,
        semantics,
    )?;
    let point = PhasePoint::new(anchor.state, MessageSeq::from(period_labels));
    if end != point {
        return Err(Error::ReplayMismatch { step: period });
    }
    if !distance(&point, anchor)?.less_than_pow10(q) {
        return Err(Error::ReplayMismatch { step: 0 });
    }
    Ok(PeriodicWitness {
        point,
        period,
        epsilon_exponent: q,
        replay_verified: true,
    })
}

/// Construct a point within 10^(-q) of `from` whose orbit lands exactly on
/// `to`: copy q+1 labels of `from`, route to the target state, then adopt
/// the target's message. Replay-verified before being returned.
pub fn transitive_witness(
    cipher: &KeyedPermutation,
    semantics: MessageSemantics,
    from: &PhasePoint,
    to: &PhasePoint,
    q: u32,
) -> Result<TransitiveWitness> {
    validate_inputs(cipher, semantics, &[from, to], q)?;
    let graph = TransitionGraph::new(cipher, semantics);
    require_strongly_connected(&graph)?;

    let copied = q as usize + 1;
    let prefix: Vec<u64> = (0..copied).map(|k| from.message.label_at(k)).collect();
    let reached = walk(
        cipher,
        PhasePoint::new(from.state, MessageSeq::from(prefix.clone())),
        copied,
        semantics,
    )?;
    let route = graph
        .find_path(reached.state, to.state)
        .expect("strong connectivity guarantees a connecting path");

    let steps = copied + route.len();
    let mut labels = prefix;
    labels.extend(route);
    labels.extend(to.message.labels().iter().copied());
    let point = PhasePoint::new(from.state, MessageSeq::from(labels));

    let end = walk(cipher, point.clone(), steps, semantics)?;
    if end != *to {
        return Err(Error::ReplayMismatch { step: steps });
    }
    if !distance(&point, from)?.less_than_pow10(q) {
        return Err(Error::ReplayMismatch { step: 0 });
    }
    Ok(TransitiveWitness {
        point,
        steps,
        target: to.clone(),
        epsilon_exponent: q,
        replay_verified: true,
    })
}

/// Construct a divergence certificate for `anchor` with threshold
/// epsilon = 10^(-q): altering the message label at position q+1 leaves
/// the initial distance under 10^(-q), but because the transition is
/// injective in the label the two trajectories must differ in state at
/// step q+2, giving distance >= 1. Works for any cipher, connected or
/// not; the only unsupported case is a configuration with a single label.
pub fn sensitivity_certificate(
    cipher: &KeyedPermutation,
    semantics: MessageSemantics,
    anchor: &PhasePoint,
    q: u32,
) -> Result<SensitivityCertificate> {
    validate_inputs(cipher, semantics, &[anchor], q)?;
    if semantics.label_count(cipher.block_size()) < 2 {
        return Err(Error::NoAlternativeLabel);
    }

    let perturbed_index = q as usize + 1;
    let len = anchor.message.prefix_len().max(perturbed_index + 1);
    let mut labels: Vec<u64> = (0..len).map(|k| anchor.message.label_at(k)).collect();
    labels[perturbed_index] = if labels[perturbed_index] == 0 { 1 } else { 0 };
    let perturbed = PhasePoint::new(anchor.state, MessageSeq::from(labels));

    let steps = perturbed_index + 1;
    let mut a = anchor.clone();
    let mut b = perturbed.clone();
    for t in 1..=steps {
        a = step(cipher, &a, semantics)?;
        b = step(cipher, &b, semantics)?;
        let diverged = a.state != b.state;
        if diverged != (t == steps) {
            return Err(Error::ReplayMismatch { step: t });
        }
    }

    let initial_distance = distance(anchor, &perturbed)?;
    if !initial_distance.less_than_pow10(q) {
        return Err(Error::ReplayMismatch { step: 0 });
    }
    let divergence = distance(&a, &b)?;
    if !divergence.at_least(1) {
        return Err(Error::ReplayMismatch { step: steps });
    }
    Ok(SensitivityCertificate {
        anchor: anchor.clone(),
        perturbed,
        perturbed_index,
        steps,
        initial_distance,
        divergence,
        epsilon_exponent: q,
        replay_verified: true,
    })
}

// --- serialized documents -------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicWitnessDocument {
    pub configuration: Configuration,
    pub status: ChaosStatus,
    pub witness_type: &'static str,
    pub state: u64,
    pub message: Vec<u64>,
    pub period: usize,
    pub epsilon_exponent: u32,
    pub replay_verified: bool,
}

impl PeriodicWitness {
    pub fn to_document(&self, configuration: Configuration) -> PeriodicWitnessDocument {
        PeriodicWitnessDocument {
            configuration,
            status: ChaosStatus::ChaoticByTheorem1,
            witness_type: "periodic",
            state: self.point.state.value(),
            message: self.point.message.labels().to_vec(),
            period: self.period,
            epsilon_exponent: self.epsilon_exponent,
            replay_verified: self.replay_verified,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitiveWitnessDocument {
    pub configuration: Configuration,
    pub status: ChaosStatus,
    pub witness_type: &'static str,
    pub state: u64,
    pub message: Vec<u64>,
    pub steps: usize,
    pub target_state: u64,
    pub target_message: Vec<u64>,
    pub epsilon_exponent: u32,
    pub replay_verified: bool,
}

impl TransitiveWitness {
    pub fn to_document(&self, configuration: Configuration) -> TransitiveWitnessDocument {
        TransitiveWitnessDocument {
            configuration,
            status: ChaosStatus::ChaoticByTheorem1,
            witness_type: "transitive",
            state: self.point.state.value(),
            message: self.point.message.labels().to_vec(),
            steps: self.steps,
            target_state: self.target.state.value(),
            target_message: self.target.message.labels().to_vec(),
            epsilon_exponent: self.epsilon_exponent,
            replay_verified: self.replay_verified,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityDocument {
    pub configuration: Configuration,
    pub status: ChaosStatus,
    pub witness_type: &'static str,
    pub state: u64,
    pub message: Vec<u64>,
    pub perturbed_message: Vec<u64>,
    pub perturbed_index: usize,
    pub steps: usize,
    pub delta: u64,
    pub initial_distance: String,
    pub divergence: String,
    pub epsilon_exponent: u32,
    pub replay_verified: bool,
}

impl SensitivityCertificate {
    /// Sensitivity holds regardless of connectivity, so the caller passes
    /// the status obtained from the connectivity analysis.
    pub fn to_document(
        &self,
        configuration: Configuration,
        status: ChaosStatus,
    ) -> SensitivityDocument {
        let digits = self.epsilon_exponent as usize + 4;
        SensitivityDocument {
            configuration,
            status,
            witness_type: "sensitivity",
            state: self.anchor.state.value(),
            message: self.anchor.message.labels().to_vec(),
            perturbed_message: self.perturbed.message.labels().to_vec(),
            perturbed_index: self.perturbed_index,
            steps: self.steps,
            delta: 1,
            initial_distance: self.initial_distance.to_decimal_string(digits),
            divergence: self.divergence.to_decimal_string(digits),
            epsilon_exponent: self.epsilon_exponent,
            replay_verified: self.replay_verified,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnreachablePairDocument {
    pub configuration: Configuration,
    pub status: ChaosStatus,
    pub witness_type: &'static str,
    pub from: u64,
    pub to: u64,
    pub forward_reachable: u64,
    pub vertex_count: u64,
}

/// Document form of a disconnection certificate, used when a witness
/// construction fails because the graph is not strongly connected.
pub fn unreachable_pair_document(
    configuration: Configuration,
    from: u64,
    to: u64,
    forward_reachable: u64,
    vertex_count: u64,
) -> UnreachablePairDocument {
    UnreachablePairDocument {
        configuration,
        status: ChaosStatus::NotStronglyConnected,
        witness_type: "unreachable-pair",
        from,
        to,
        forward_reachable,
        vertex_count,
    }
}
