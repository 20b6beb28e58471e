use std::collections::VecDeque;

use serde::Serialize;

use crate::block::{Block, BlockSize};
use crate::cipher::KeyedPermutation;
use crate::dynamics::{apply_label_raw, step_state_raw};
use crate::error::{Error, Result};
use crate::message::MessageSemantics;

/// Largest block size the explicit (Tarjan) mode accepts; the implicit
/// mode is bounded only by the block-size ceiling itself.
pub const EXPLICIT_MODE_MAX_BITS: u8 = 12;

/// How to decide strong connectivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectivityMode {
    /// Iterative Tarjan over the materialized vertex set; also reports the
    /// number of strongly connected components. Limited to small n.
    Explicit,
    /// Two reachability sweeps (forward and backward from vertex 0) over
    /// the implicit edge relation; nothing is materialized beyond two
    /// bitsets, so this scales to the full block-size range.
    Implicit,
}

impl ConnectivityMode {
    pub fn name(self) -> &'static str {
        match self {
            ConnectivityMode::Explicit => "explicit",
            ConnectivityMode::Implicit => "implicit",
        }
    }
}

/// Certificate of disconnection: no path exists from `from` to `to`, and
/// only `forward_reachable` of the vertices can be reached from `from`.
/// The pair is the lexicographically smallest unreachable one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UnreachablePair {
    pub from: u64,
    pub to: u64,
    pub forward_reachable: u64,
}

/// Outcome of a strong-connectivity decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityVerdict {
    pub strongly_connected: bool,
    pub vertex_count: u64,
    /// Present exactly when not strongly connected.
    pub witness: Option<UnreachablePair>,
    /// Present in explicit mode only.
    pub scc_count: Option<u64>,
}

/// The labeled transition graph of a cipher under a message semantics:
/// vertices are all n-bit blocks, and each (state, label) pair contributes
/// one edge to the next state. Edges are never materialized; they are
/// recomputed from the cipher on demand.
pub struct TransitionGraph<'c> {
    cipher: &'c KeyedPermutation,
    semantics: MessageSemantics,
}

impl<'c> TransitionGraph<'c> {
    pub fn new(cipher: &'c KeyedPermutation, semantics: MessageSemantics) -> Self {
        TransitionGraph { cipher, semantics }
    }

    pub fn block_size(&self) -> BlockSize {
        self.cipher.block_size()
    }

    pub fn semantics(&self) -> MessageSemantics {
        self.semantics
    }

    pub fn vertex_count(&self) -> u64 {
        self.block_size().block_count()
    }

    pub fn label_count(&self) -> u64 {
        self.semantics.label_count(self.block_size())
    }

    /// All outgoing edges of `x` in ascending label order.
    pub fn successors(&self, x: Block) -> Vec<(u64, Block)> {
        assert_eq!(x.size(), self.block_size(), "block size does not match graph");
        (0..self.label_count())
            .map(|m| {
                let y = step_state_raw(self.cipher, x.value(), m, self.semantics);
                (m, Block::new(y, self.block_size()).unwrap())
            })
            .collect()
    }

    /// All incoming edges of `y` in ascending label order: label
    /// application is an involution for every semantics, so the
    /// predecessor under label m is that same application undone after
    /// decryption.
    pub fn predecessors(&self, y: Block) -> Vec<(u64, Block)> {
        assert_eq!(y.size(), self.block_size(), "block size does not match graph");
        let z = self.cipher.decrypt(y).value();
        (0..self.label_count())
            .map(|m| {
                let x = apply_label_raw(z, m, self.block_size(), self.semantics);
                (m, Block::new(x, self.block_size()).unwrap())
            })
            .collect()
    }

    fn forward_sweep(&self, start: u64) -> BitSet {
        let mut visited = BitSet::new(self.vertex_count());
        let mut stack = vec![start];
        visited.insert(start);
        while let Some(x) = stack.pop() {
            for m in 0..self.label_count() {
                let y = step_state_raw(self.cipher, x, m, self.semantics);
                if visited.insert(y) {
                    stack.push(y);
                }
            }
        }
        visited
    }

    fn backward_sweep(&self, start: u64) -> BitSet {
        let mut visited = BitSet::new(self.vertex_count());
        let mut stack = vec![start];
        visited.insert(start);
        while let Some(y) = stack.pop() {
            let z = self.cipher.decrypt_raw(y);
            for m in 0..self.label_count() {
                let x = apply_label_raw(z, m, self.block_size(), self.semantics);
                if visited.insert(x) {
                    stack.push(x);
                }
            }
        }
        visited
    }

    /// Sorted list of vertices reachable from `from` (including itself).
    pub fn reachable_from(&self, from: Block) -> Vec<u64> {
        assert_eq!(from.size(), self.block_size(), "block size does not match graph");
        self.forward_sweep(from.value()).iter_set(self.vertex_count())
    }

    /// Decide strong connectivity. Both modes derive the same
    /// disconnection witness from the same reachability sweeps, so their
    /// verdicts are identical field for field (explicit mode additionally
    /// counts components).
    pub fn strongly_connected(&self, mode: ConnectivityMode) -> Result<ConnectivityVerdict> {
        let n = self.block_size().bits();
        let scc_count = match mode {
            ConnectivityMode::Explicit => {
                if n > EXPLICIT_MODE_MAX_BITS {
                    return Err(Error::GraphTooLarge {
                        mode: "explicit",
                        limit: EXPLICIT_MODE_MAX_BITS,
                        n,
                    });
                }
                Some(self.tarjan_scc_count())
            }
            ConnectivityMode::Implicit => None,
        };
        let count = self.vertex_count();
        let forward = self.forward_sweep(0);
        let forward_count = forward.count();
        let witness = if forward_count < count {
            // vertex 0 itself misses something: (0, smallest missing) is
            // the lexicographically smallest unreachable pair
            Some(UnreachablePair {
                from: 0,
                to: forward.first_missing(count).unwrap(),
                forward_reachable: forward_count,
            })
        } else {
            let backward = self.backward_sweep(0);
            if backward.count() < count {
                // 0 reaches everything, so any unreachable pair starts at
                // a vertex that cannot reach 0
                let from = backward.first_missing(count).unwrap();
                Some(UnreachablePair {
                    from,
                    to: 0,
                    forward_reachable: self.forward_sweep(from).count(),
                })
            } else {
                None
            }
        };
        let strongly_connected = witness.is_none();
        debug_assert!(scc_count.is_none() || (scc_count == Some(1)) == strongly_connected);
        Ok(ConnectivityVerdict {
            strongly_connected,
            vertex_count: count,
            witness,
            scc_count,
        })
    }

    fn tarjan_scc_count(&self) -> u64 {
        const UNVISITED: u32 = u32::MAX;
        let count = self.vertex_count() as usize;
        let labels = self.label_count();
        let mut index = vec![UNVISITED; count];
        let mut lowlink = vec![0u32; count];
        let mut on_stack = vec![false; count];
        let mut stack: Vec<u32> = Vec::new();
        let mut call: Vec<(u32, u64)> = Vec::new();
        let mut next_index = 0u32;
        let mut sccs = 0u64;

        for root in 0..count as u32 {
            if index[root as usize] != UNVISITED {
                continue;
            }
            index[root as usize] = next_index;
            lowlink[root as usize] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root as usize] = true;
            call.push((root, 0));

            while let Some(top) = call.last_mut() {
                let v = top.0 as usize;
                if top.1 < labels {
                    let m = top.1;
                    top.1 += 1;
                    let w = step_state_raw(self.cipher, v as u64, m, self.semantics) as usize;
                    if index[w] == UNVISITED {
                        index[w] = next_index;
                        lowlink[w] = next_index;
                        next_index += 1;
                        stack.push(w as u32);
                        on_stack[w] = true;
                        call.push((w as u32, 0));
                    } else if on_stack[w] {
                        lowlink[v] = lowlink[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(parent) = call.last() {
                        let p = parent.0 as usize;
                        lowlink[p] = lowlink[p].min(lowlink[v]);
                    }
                    if lowlink[v] == index[v] {
                        sccs += 1;
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w as usize] = false;
                            if w as usize == v {
                                break;
                            }
                        }
                    }
                }
            }
        }
        sccs
    }

    /// Shortest label sequence leading from `from` to `to`, if any:
    /// breadth-first, trying labels in ascending order, so the result is
    /// deterministic. Equal endpoints yield the empty path.
    pub fn find_path(&self, from: Block, to: Block) -> Option<Vec<u64>> {
        assert_eq!(from.size(), self.block_size(), "block size does not match graph");
        assert_eq!(to.size(), self.block_size(), "block size does not match graph");
        let (from, to) = (from.value(), to.value());
        if from == to {
            return Some(Vec::new());
        }
        let count = self.vertex_count() as usize;
        let mut prev = vec![0u32; count];
        let mut prev_label = vec![0u32; count];
        let mut visited = BitSet::new(count as u64);
        visited.insert(from);
        let mut queue = VecDeque::new();
        queue.push_back(from);
        while let Some(x) = queue.pop_front() {
            for m in 0..self.label_count() {
                let y = step_state_raw(self.cipher, x, m, self.semantics);
                if !visited.insert(y) {
                    continue;
                }
                prev[y as usize] = x as u32;
                prev_label[y as usize] = m as u32;
                if y == to {
                    let mut path = Vec::new();
                    let mut v = to;
                    while v != from {
                        path.push(u64::from(prev_label[v as usize]));
                        v = u64::from(prev[v as usize]);
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(y);
            }
        }
        None
    }
}

/// Fixed-capacity bitset over the vertex numbers.
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(len: u64) -> Self {
        BitSet {
            words: vec![0; len.div_ceil(64) as usize],
        }
    }

    /// Sets bit i; returns true when it was previously clear.
    #[inline]
    fn insert(&mut self, i: u64) -> bool {
        let word = &mut self.words[(i >> 6) as usize];
        let mask = 1u64 << (i & 63);
        if *word & mask != 0 {
            false
        } else {
            *word |= mask;
            true
        }
    }

    #[inline]
    fn contains(&self, i: u64) -> bool {
        self.words[(i >> 6) as usize] & (1 << (i & 63)) != 0
    }

    fn count(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    fn first_missing(&self, len: u64) -> Option<u64> {
        for (i, &word) in self.words.iter().enumerate() {
            if word != u64::MAX {
                let candidate = (i as u64) * 64 + u64::from(word.trailing_ones());
                return (candidate < len).then_some(candidate);
            }
        }
        None
    }

    fn iter_set(&self, len: u64) -> Vec<u64> {
        (0..len).filter(|&i| self.contains(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn size(n: u8) -> BlockSize {
        BlockSize::new(n).unwrap()
    }

    fn block(v: u64, n: u8) -> Block {
        Block::new(v, size(n)).unwrap()
    }

    fn successors_as_values(g: &TransitionGraph, x: u64, n: u8) -> Vec<(u64, u64)> {
        g.successors(block(x, n))
            .into_iter()
            .map(|(m, b)| (m, b.value()))
            .collect()
    }

    #[test]
    fn successor_edges_match_hand_computed_table() {
        let cipher = KeyedPermutation::caesar(size(2), 1);
        let g = TransitionGraph::new(&cipher, MessageSemantics::BitIndex);
        assert_eq!(successors_as_values(&g, 0, 2), vec![(0, 3), (1, 2)]);
        assert_eq!(successors_as_values(&g, 1, 2), vec![(0, 0), (1, 1)]);
        assert_eq!(successors_as_values(&g, 2, 2), vec![(0, 1), (1, 0)]);
        assert_eq!(successors_as_values(&g, 3, 2), vec![(0, 2), (1, 3)]);
    }

    #[test]
    fn predecessors_agree_with_successors_exhaustively() {
        for n in 1..=4u8 {
            let s = size(n);
            for cipher in [
                KeyedPermutation::identity(s),
                KeyedPermutation::negation(s),
                KeyedPermutation::caesar(s, 1),
                KeyedPermutation::caesar(s, 3),
            ] {
                for semantics in MessageSemantics::ALL {
                    let g = TransitionGraph::new(&cipher, semantics);
                    for x in 0..g.vertex_count() {
                        for (m, y) in g.successors(block(x, n)) {
                            let preds = g.predecessors(y);
                            assert_eq!(preds[m as usize], (m, block(x, n)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn connected_and_disconnected_shift_ciphers() {
        let s = size(2);
        let connected = KeyedPermutation::caesar(s, 1);
        let g = TransitionGraph::new(&connected, MessageSemantics::BitIndex);
        for mode in [ConnectivityMode::Explicit, ConnectivityMode::Implicit] {
            let v = g.strongly_connected(mode).unwrap();
            assert!(v.strongly_connected);
            assert_eq!(v.witness, None);
            assert_eq!(v.vertex_count, 4);
        }

        let disconnected = KeyedPermutation::caesar(s, 2);
        let g = TransitionGraph::new(&disconnected, MessageSemantics::BitIndex);
        let explicit = g.strongly_connected(ConnectivityMode::Explicit).unwrap();
        let implicit = g.strongly_connected(ConnectivityMode::Implicit).unwrap();
        assert!(!explicit.strongly_connected);
        assert_eq!(explicit.scc_count, Some(2));
        assert_eq!(
            explicit.witness,
            Some(UnreachablePair {
                from: 0,
                to: 1,
                forward_reachable: 2
            })
        );
        // modes agree on everything except the component count
        assert_eq!(implicit.witness, explicit.witness);
        assert_eq!(implicit.strongly_connected, explicit.strongly_connected);
        assert_eq!(implicit.scc_count, None);
        assert_eq!(g.reachable_from(block(0, 2)), vec![0, 3]);
    }

    #[test]
    fn explicit_mode_rejects_large_graphs() {
        let cipher = KeyedPermutation::identity(size(13));
        let g = TransitionGraph::new(&cipher, MessageSemantics::BitIndex);
        assert!(matches!(
            g.strongly_connected(ConnectivityMode::Explicit),
            Err(Error::GraphTooLarge { .. })
        ));
        assert!(g.strongly_connected(ConnectivityMode::Implicit).is_ok());
    }

    #[test]
    fn shortest_paths_are_deterministic() {
        let cipher = KeyedPermutation::caesar(size(2), 1);
        let g = TransitionGraph::new(&cipher, MessageSemantics::BitIndex);
        // hand-checked: depth 1 reaches {3, 2}, depth 2 reaches 1 via 2
        assert_eq!(g.find_path(block(0, 2), block(1, 2)), Some(vec![1, 0]));
        assert_eq!(g.find_path(block(0, 2), block(0, 2)), Some(vec![]));

        let disconnected = KeyedPermutation::caesar(size(2), 2);
        let g = TransitionGraph::new(&disconnected, MessageSemantics::BitIndex);
        assert_eq!(g.find_path(block(0, 2), block(1, 2)), None);
        assert_eq!(g.find_path(block(0, 2), block(3, 2)), Some(vec![1]));
    }

    #[test]
    fn found_paths_replay_to_their_target() {
        for n in 1..=4u8 {
            let s = size(n);
            for cipher in [
                KeyedPermutation::identity(s),
                KeyedPermutation::caesar(s, 1),
            ] {
                for semantics in MessageSemantics::ALL {
                    let g = TransitionGraph::new(&cipher, semantics);
                    for from in 0..g.vertex_count() {
                        for to in 0..g.vertex_count() {
                            let path = match g.find_path(block(from, n), block(to, n)) {
                                Some(p) => p,
                                None => continue,
                            };
                            let mut state = from;
                            for &m in &path {
                                state = step_state_raw(&cipher, state, m, semantics);
                            }
                            assert_eq!(state, to, "n={n} {semantics} {from}->{to}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn identity_bit_index_paths_follow_differing_bits() {
        // the shortest path between x and y flips exactly the bits where
        // they differ, so its length is their Hamming distance
        let cipher = KeyedPermutation::identity(size(4));
        let g = TransitionGraph::new(&cipher, MessageSemantics::BitIndex);
        for x in 0..16u64 {
            for y in 0..16u64 {
                let path = g.find_path(block(x, 4), block(y, 4)).unwrap();
                assert_eq!(path.len() as u32, (x ^ y).count_ones());
            }
        }
    }

    #[test]
    fn negation_parity_obstruction_for_odd_sizes() {
        // with an odd block size, every bit-index edge flips n-1 (even)
        // bits, preserving Hamming-weight parity: two classes, no mixing
        let cipher = KeyedPermutation::negation(size(3));
        let g = TransitionGraph::new(&cipher, MessageSemantics::BitIndex);
        for x in 0..8u64 {
            for (_, y) in g.successors(block(x, 3)) {
                assert_eq!(x.count_ones() % 2, y.value().count_ones() % 2);
            }
        }
        let v = g.strongly_connected(ConnectivityMode::Explicit).unwrap();
        assert!(!v.strongly_connected);
        assert_eq!(v.scc_count, Some(2));
        // smallest odd-parity vertex is 1, unreachable from 0
        assert_eq!(
            v.witness,
            Some(UnreachablePair {
                from: 0,
                to: 1,
                forward_reachable: 4
            })
        );
    }

    #[test]
    fn full_block_semantics_gives_a_complete_digraph() {
        let cipher = KeyedPermutation::caesar(size(3), 5);
        let g = TransitionGraph::new(&cipher, MessageSemantics::FullBlock);
        for x in 0..8u64 {
            let mut targets: Vec<u64> =
                g.successors(block(x, 3)).iter().map(|(_, y)| y.value()).collect();
            targets.sort_unstable();
            assert_eq!(targets, (0..8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn bitset_basics() {
        let mut b = BitSet::new(130);
        assert!(b.insert(0));
        assert!(!b.insert(0));
        assert!(b.insert(64));
        assert!(b.insert(129));
        assert!(b.contains(129));
        assert!(!b.contains(128));
        assert_eq!(b.count(), 3);
        assert_eq!(b.first_missing(130), Some(1));
        let mut full = BitSet::new(2);
        full.insert(0);
        assert_eq!(full.first_missing(2), Some(1));
        full.insert(1);
        assert_eq!(full.first_missing(2), None);
    }
}
