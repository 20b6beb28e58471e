use crate::block::{Block, BlockSize};
use crate::cipher::KeyedPermutation;
use crate::error::{Error, Result};
use crate::message::{MessageSemantics, PhasePoint};

#[inline]
pub(crate) fn apply_label_raw(
    value: u64,
    label: u64,
    size: BlockSize,
    semantics: MessageSemantics,
) -> u64 {
    match semantics {
        MessageSemantics::BitIndex => value ^ (1 << (size.bits() as u64 - 1 - label)),
        MessageSemantics::FullBlock => value ^ (label ^ size.mask()),
        MessageSemantics::TrueXor => value ^ label,
    }
}

/// Combine one message label with a state block. This is the
/// pre-encryption half of a transition; for every semantics it is an
/// involution in the state and injective in the label.
pub fn apply_label(x: Block, label: u64, semantics: MessageSemantics) -> Result<Block> {
    semantics.validate_label(label, x.size())?;
    Block::new(apply_label_raw(x.value(), label, x.size(), semantics), x.size())
}

#[inline]
pub(crate) fn step_state_raw(
    cipher: &KeyedPermutation,
    value: u64,
    label: u64,
    semantics: MessageSemantics,
) -> u64 {
    cipher.encrypt_raw(apply_label_raw(value, label, cipher.block_size(), semantics))
}

/// One state transition: combine the label, then encrypt.
pub fn step_state(
    cipher: &KeyedPermutation,
    x: Block,
    label: u64,
    semantics: MessageSemantics,
) -> Result<Block> {
    Ok(cipher.encrypt(apply_label(x, label, semantics)?))
}

/// One step of the full system: the state absorbs the head label and is
/// encrypted, the message shifts.
pub fn step(
    cipher: &KeyedPermutation,
    point: &PhasePoint,
    semantics: MessageSemantics,
) -> Result<PhasePoint> {
    check_size(cipher, point.state)?;
    let state = step_state(cipher, point.state, point.message.head(), semantics)?;
    Ok(PhasePoint::new(state, point.message.shift()))
}

fn check_size(cipher: &KeyedPermutation, x: Block) -> Result<()> {
    if x.size() != cipher.block_size() {
        return Err(Error::BlockSizeMismatch {
            left: x.size().bits(),
            right: cipher.block_size().bits(),
        });
    }
    Ok(())
}

/// A finite orbit: the visited phase points `X^0 .. X^T`, the encrypted
/// state emitted by each step, and how many labels had to come from the
/// zero-extension tail past the stored message prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub points: Vec<PhasePoint>,
    pub ciphertext_blocks: Vec<Block>,
    pub tail_zeros_consumed: usize,
}

/// Iterate `steps` transitions from `start`. Always succeeds for any step
/// count: labels past the message prefix are zeros.
pub fn trajectory(
    cipher: &KeyedPermutation,
    start: &PhasePoint,
    steps: usize,
    semantics: MessageSemantics,
) -> Result<Trajectory> {
    check_size(cipher, start.state)?;
    for &label in start.message.labels() {
        semantics.validate_label(label, cipher.block_size())?;
    }
    let mut points = Vec::with_capacity(steps + 1);
    let mut ciphertext_blocks = Vec::with_capacity(steps);
    points.push(start.clone());
    let mut tail_zeros_consumed = 0;
    for _ in 0..steps {
        let current = points.last().unwrap();
        if current.message.is_empty() {
            tail_zeros_consumed += 1;
        }
        let next = step(cipher, current, semantics)?;
        ciphertext_blocks.push(next.state);
        points.push(next);
    }
    Ok(Trajectory {
        points,
        ciphertext_blocks,
        tail_zeros_consumed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockSize;
    use crate::message::MessageSeq;

    fn size(n: u8) -> BlockSize {
        BlockSize::new(n).unwrap()
    }

    fn block(v: u64, n: u8) -> Block {
        Block::new(v, size(n)).unwrap()
    }

    #[test]
    fn bit_index_flips_one_bit_from_the_left() {
        // n = 4: label 0 flips the most-significant bit
        let x = block(0b0110, 4);
        assert_eq!(
            apply_label(x, 0, MessageSemantics::BitIndex).unwrap().value(),
            0b1110
        );
        assert_eq!(
            apply_label(x, 3, MessageSemantics::BitIndex).unwrap().value(),
            0b0111
        );
        assert!(apply_label(x, 4, MessageSemantics::BitIndex).is_err());
    }

    #[test]
    fn full_block_keeps_ones_and_inverts_zeros() {
        // for each bit j: result_j = x_j if m_j = 1, !x_j if m_j = 0
        let x = block(0b1100, 4);
        let m = 0b1010;
        let got = apply_label(x, m, MessageSemantics::FullBlock).unwrap();
        assert_eq!(got.value(), 0b1001);
        // all-ones label is the identity, all-zeros label is complement
        assert_eq!(
            apply_label(x, 0b1111, MessageSemantics::FullBlock).unwrap(),
            x
        );
        assert_eq!(
            apply_label(x, 0, MessageSemantics::FullBlock).unwrap().value(),
            0b0011
        );
    }

    #[test]
    fn true_xor_is_plain_xor() {
        let x = block(0b1100, 4);
        assert_eq!(
            apply_label(x, 0b1010, MessageSemantics::TrueXor).unwrap().value(),
            0b0110
        );
        assert!(apply_label(x, 16, MessageSemantics::TrueXor).is_err());
    }

    #[test]
    fn label_application_is_an_involution_and_injective() {
        for semantics in MessageSemantics::ALL {
            for n in 1..=4u8 {
                let s = size(n);
                for v in 0..s.block_count() {
                    let x = block(v, n);
                    let mut images = Vec::new();
                    for label in 0..semantics.label_count(s) {
                        let y = apply_label(x, label, semantics).unwrap();
                        assert_eq!(apply_label(y, label, semantics).unwrap(), x);
                        images.push(y.value());
                    }
                    images.sort_unstable();
                    images.dedup();
                    assert_eq!(images.len() as u64, semantics.label_count(s));
                }
            }
        }
    }

    #[test]
    fn step_consumes_the_head_label() {
        let cipher = KeyedPermutation::caesar(size(2), 1);
        let start = PhasePoint::new(block(0, 2), MessageSeq::from(vec![0, 1]));
        let next = step(&cipher, &start, MessageSemantics::BitIndex).unwrap();
        // label 0 flips the high bit: 00 -> 10 = 2, then +1 -> 3
        assert_eq!(next.state.value(), 3);
        assert_eq!(next.message.labels(), &[1]);
    }

    #[test]
    fn step_rejects_mismatched_sizes() {
        let cipher = KeyedPermutation::identity(size(3));
        let p = PhasePoint::new(block(0, 2), MessageSeq::empty());
        assert!(step(&cipher, &p, MessageSemantics::TrueXor).is_err());
    }

    #[test]
    fn trajectory_under_identity_exposes_label_action() {
        // independent of the graph machinery: with the identity cipher the
        // visited states are just cumulative label applications
        let cipher = KeyedPermutation::identity(size(2));
        let start = PhasePoint::new(block(0, 2), MessageSeq::from(vec![0, 1]));
        let t = trajectory(&cipher, &start, 2, MessageSemantics::BitIndex).unwrap();
        let states: Vec<u64> = t.points.iter().map(|p| p.state.value()).collect();
        assert_eq!(states, vec![0, 2, 3]);
        assert_eq!(t.ciphertext_blocks.len(), 2);
        assert_eq!(t.tail_zeros_consumed, 0);
    }

    #[test]
    fn trajectory_counts_zero_tail_labels() {
        let cipher = KeyedPermutation::identity(size(2));
        let start = PhasePoint::new(block(1, 2), MessageSeq::from(vec![1]));
        let t = trajectory(&cipher, &start, 4, MessageSemantics::BitIndex).unwrap();
        assert_eq!(t.tail_zeros_consumed, 3);
        // consuming the zero tail keeps flipping the high bit
        let states: Vec<u64> = t.points.iter().map(|p| p.state.value()).collect();
        assert_eq!(states, vec![1, 0, 2, 0, 2]);
    }

    #[test]
    fn trajectory_validates_prefix_labels() {
        let cipher = KeyedPermutation::identity(size(2));
        let start = PhasePoint::new(block(0, 2), MessageSeq::from(vec![7]));
        assert!(trajectory(&cipher, &start, 1, MessageSemantics::BitIndex).is_err());
        assert!(trajectory(&cipher, &start, 1, MessageSemantics::TrueXor).is_err());
    }
}
