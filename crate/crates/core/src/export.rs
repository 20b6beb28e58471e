use std::fmt::Write;

use crate::block::Block;
use crate::dynamics::apply_label_raw;
use crate::error::{Error, Result};
use crate::graph::TransitionGraph;

/// Largest block size the tabular/graphical renderings accept (beyond
/// this the output stops being human-surveyable and the guard kicks in).
pub const RENDER_MAX_BITS: u8 = 6;

/// One edge of the transition graph, with the intermediate value the
/// label application produces before encryption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRow {
    pub state: u64,
    pub label: u64,
    pub combined: u64,
    pub next_state: u64,
}

/// Every edge ordered by (state, label), with the pre-encryption value.
pub fn edge_table(graph: &TransitionGraph) -> Result<Vec<EdgeRow>> {
    let size = graph.block_size();
    if size.bits() > RENDER_MAX_BITS {
        return Err(Error::GraphTooLarge {
            mode: "render",
            limit: RENDER_MAX_BITS,
            n: size.bits(),
        });
    }
    let mut rows = Vec::with_capacity((graph.vertex_count() * graph.label_count()) as usize);
    for state in 0..graph.vertex_count() {
        let x = Block::new(state, size).unwrap();
        for (label, next) in graph.successors(x) {
            rows.push(EdgeRow {
                state,
                label,
                combined: apply_label_raw(state, label, size, graph.semantics()),
                next_state: next.value(),
            });
        }
    }
    Ok(rows)
}

/// CSV rendering of `edge_table`: header `x,x_bin,m,F,F_bin,g,g_bin`,
/// where F is the state after the label is combined and g the state after
/// encryption. Byte-deterministic.
pub fn edge_table_csv(graph: &TransitionGraph) -> Result<String> {
    let size = graph.block_size();
    let bin = |v: u64| Block::new(v, size).unwrap().binary_string();
    let mut out = String::from("x,x_bin,m,F,F_bin,g,g_bin\n");
    for row in edge_table(graph)? {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.state,
            bin(row.state),
            row.label,
            row.combined,
            bin(row.combined),
            row.next_state,
            bin(row.next_state),
        )
        .unwrap();
    }
    Ok(out)
}

/// DOT rendering of the transition graph, one edge per (state, label),
/// vertices labeled with decimal and binary forms. Byte-deterministic.
pub fn export_dot(graph: &TransitionGraph) -> Result<String> {
    let size = graph.block_size();
    if size.bits() > RENDER_MAX_BITS {
        return Err(Error::GraphTooLarge {
            mode: "render",
            limit: RENDER_MAX_BITS,
            n: size.bits(),
        });
    }
    let mut out = String::from("digraph transitions {\n  rankdir=LR;\n  node [shape=circle];\n");
    for v in 0..graph.vertex_count() {
        let b = Block::new(v, size).unwrap();
        writeln!(out, "  {v} [label=\"{v}\\n{}\"];", b.binary_string()).unwrap();
    }
    for row in edge_table(graph)? {
        writeln!(out, "  {} -> {} [label=\"{}\"];", row.state, row.next_state, row.label).unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockSize;
    use crate::cipher::KeyedPermutation;
    use crate::message::MessageSemantics;

    fn graph_csv(cipher: &KeyedPermutation, semantics: MessageSemantics) -> String {
        edge_table_csv(&TransitionGraph::new(cipher, semantics)).unwrap()
    }

    #[test]
    fn csv_matches_hand_computed_rows() {
        let cipher = KeyedPermutation::caesar(BlockSize::new(2).unwrap(), 1);
        let csv = graph_csv(&cipher, MessageSemantics::BitIndex);
        let expected = "\
x,x_bin,m,F,F_bin,g,g_bin
0,00,0,2,10,3,11
0,00,1,1,01,2,10
1,01,0,3,11,0,00
1,01,1,0,00,1,01
2,10,0,0,00,1,01
2,10,1,3,11,0,00
3,11,0,1,01,2,10
3,11,1,2,10,3,11
";
        assert_eq!(csv, expected);
    }

    #[test]
    fn rendering_is_deterministic() {
        let cipher = KeyedPermutation::caesar(BlockSize::new(3).unwrap(), 2);
        let g = TransitionGraph::new(&cipher, MessageSemantics::FullBlock);
        assert_eq!(edge_table_csv(&g).unwrap(), edge_table_csv(&g).unwrap());
        assert_eq!(export_dot(&g).unwrap(), export_dot(&g).unwrap());
    }

    #[test]
    fn dot_contains_every_edge_once() {
        let cipher = KeyedPermutation::identity(BlockSize::new(2).unwrap());
        let g = TransitionGraph::new(&cipher, MessageSemantics::BitIndex);
        let dot = export_dot(&g).unwrap();
        assert!(dot.starts_with("digraph transitions {"));
        assert!(dot.ends_with("}\n"));
        assert_eq!(dot.matches(" -> ").count(), 8);
        assert!(dot.contains("  0 -> 2 [label=\"0\"];"));
    }

    #[test]
    fn render_guard_rejects_large_sizes() {
        let cipher = KeyedPermutation::identity(BlockSize::new(7).unwrap());
        let g = TransitionGraph::new(&cipher, MessageSemantics::BitIndex);
        assert!(matches!(edge_table(&g), Err(Error::GraphTooLarge { .. })));
        assert!(matches!(export_dot(&g), Err(Error::GraphTooLarge { .. })));
    }
}
