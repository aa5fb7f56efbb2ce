//! Bratteli diagrams of the gauge-invariant cores: the AF tower along the
//! underlying graph for the quotient algebra, and the Toeplitz variants
//! that hang a fresh infinite tail off core nodes (every node for the
//! compressed algebra, only the base-vertex nodes for the reduced one).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagramKind {
    CuntzCore,
    CompressedToeplitzCore,
    ToeplitzZeroCore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NodeKind {
    /// Matrix summand labeled by a vertex reachable at this level.
    Core,
    /// Member of the infinite chain attached under a core node.
    Tail { attach_level: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BratteliNode {
    pub label: String,
    pub dim: u64,
    #[serde(flatten)]
    pub node: NodeKind,
}

/// Edge between consecutive levels, by node index within each level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BratteliEdge {
    pub level: usize,
    pub from: usize,
    pub to: usize,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BratteliDiagram {
    pub kind: DiagramKind,
    pub levels: Vec<Vec<BratteliNode>>,
    pub edges: Vec<BratteliEdge>,
}

impl BratteliDiagram {
    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The dimension recursion every Bratteli diagram must satisfy:
    /// dim at a node equals the multiplicity-weighted sum over incoming
    /// edges, except at level 0 and at freshly attached tails.
    pub fn check_consistency(&self) -> Result<()> {
        for (level, nodes) in self.levels.iter().enumerate().skip(1) {
            for (to, node) in nodes.iter().enumerate() {
                let mut sum: u64 = 0;
                let mut has_incoming = false;
                for e in &self.edges {
                    if e.level + 1 == level && e.to == to {
                        has_incoming = true;
                        let from_dim = self.levels[e.level][e.from].dim;
                        let add = e
                            .multiplicity
                            .checked_mul(from_dim)
                            .and_then(|x| sum.checked_add(x))
                            .ok_or(Error::DimOverflow { level })?;
                        sum = add;
                    }
                }
                if has_incoming && sum != node.dim {
                    panic!(
                        "Bratteli consistency broken at level {level} node {}: dim {} vs incoming {sum}",
                        node.label, node.dim
                    );
                }
            }
        }
        Ok(())
    }

    /// Canonical one-line-per-level rendering used by the golden tests.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("kind: {}\n", kind_name(self.kind)));
        for (l, nodes) in self.levels.iter().enumerate() {
            let row: Vec<String> = nodes
                .iter()
                .map(|n| format!("{}({})", n.label, n.dim))
                .collect();
            out.push_str(&format!("level {l}: {}\n", row.join(" ")));
        }
        for (l, _) in self.levels.iter().enumerate().skip(1) {
            let mut row: Vec<String> = self
                .edges
                .iter()
                .filter(|e| e.level + 1 == l)
                .map(|e| {
                    let from = &self.levels[e.level][e.from].label;
                    let to = &self.levels[l][e.to].label;
                    if e.multiplicity == 1 {
                        format!("{from}->{to}")
                    } else {
                        format!("{from}->{to} x{}", e.multiplicity)
                    }
                })
                .collect();
            row.sort();
            out.push_str(&format!("edges {}->{}: {}\n", l - 1, l, row.join(", ")));
        }
        out
    }
}

fn kind_name(k: DiagramKind) -> &'static str {
    match k {
        DiagramKind::CuntzCore => "cuntz_core",
        DiagramKind::CompressedToeplitzCore => "compressed_toeplitz_core",
        DiagramKind::ToeplitzZeroCore => "toeplitz_zero_core",
    }
}

/// AF tower of the quotient core: level-n nodes are the vertices reachable
/// by a length-n walk from the base vertex, with dims counting those walks;
/// inter-level edges carry the graph multiplicities.
pub fn cuntz_core_bratteli(g: &UndirectedGraph, depth: usize) -> Result<BratteliDiagram> {
    let n = g.vertex_count();
    let m = g.multiplicity_matrix();
    let mut counts: Vec<u64> = vec![0; n];
    counts[g.base()] = 1;

    let mut levels: Vec<Vec<BratteliNode>> = Vec::with_capacity(depth + 1);
    let mut edges = Vec::new();
    let mut present: Vec<Vec<usize>> = Vec::with_capacity(depth + 1);

    for level in 0..=depth {
        let here: Vec<usize> = (0..n).filter(|&v| counts[v] > 0).collect();
        levels.push(
            here.iter()
                .map(|&v| BratteliNode {
                    label: g.vertex_id(v).to_string(),
                    dim: counts[v],
                    node: NodeKind::Core,
                })
                .collect(),
        );
        present.push(here.clone());
        if level == depth {
            break;
        }
        let mut next: Vec<u64> = vec![0; n];
        for v in 0..n {
            if counts[v] == 0 {
                continue;
            }
            for w in 0..n {
                if m[v][w] > 0 {
                    let add = counts[v]
                        .checked_mul(m[v][w])
                        .and_then(|x| next[w].checked_add(x))
                        .ok_or(Error::DimOverflow { level: level + 1 })?;
                    next[w] = add;
                }
            }
        }
        for (fi, &v) in here.iter().enumerate() {
            for w in 0..n {
                if m[v][w] > 0 && next[w] > 0 {
                    let ti = (0..n).filter(|&u| next[u] > 0).position(|u| u == w).unwrap();
                    edges.push(BratteliEdge {
                        level,
                        from: fi,
                        to: ti,
                        multiplicity: m[v][w],
                    });
                }
            }
        }
        counts = next;
    }

    let d = BratteliDiagram { kind: DiagramKind::CuntzCore, levels, edges };
    d.check_consistency()?;
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToeplitzVariant {
    /// A fresh infinite tail under every core node.
    Compressed,
    /// Tails only under core nodes labeled by the base vertex.
    Zero,
}

/// Toeplitz-core diagram: the quotient-core tower plus one new simple
/// summand per (chosen) core node, each continuing as a multiplicity-one
/// chain whose dim stays the parent's dim at attach time.
pub fn toeplitz_core_bratteli(
    g: &UndirectedGraph,
    depth: usize,
    variant: ToeplitzVariant,
) -> Result<BratteliDiagram> {
    let core = cuntz_core_bratteli(g, depth)?;
    let star_label = g.vertex_id(g.base()).to_string();

    // Tails keyed by (attach level, index of the parent within its level);
    // attached under core nodes chosen by the variant, alive from
    // attach_level + 1 on.
    let mut tails: Vec<(usize, usize, String, u64)> = Vec::new();
    for (level, nodes) in core.levels.iter().enumerate() {
        if level == depth {
            break;
        }
        for (idx, node) in nodes.iter().enumerate() {
            let wanted = match variant {
                ToeplitzVariant::Compressed => true,
                ToeplitzVariant::Zero => node.label == star_label,
            };
            if wanted {
                tails.push((level, idx, node.label.clone(), node.dim));
            }
        }
    }

    // Tails are appended after the core nodes of each level, in `tails`
    // order, so indices are computable without label lookups.
    let mut levels: Vec<Vec<BratteliNode>> = Vec::with_capacity(depth + 1);
    let mut tail_pos: Vec<Vec<usize>> = vec![Vec::new(); depth + 1];
    for level in 0..=depth {
        let mut nodes = core.levels[level].clone();
        for &(attach, _, ref label, dim) in &tails {
            if level > attach {
                tail_pos[level].push(nodes.len());
                nodes.push(BratteliNode {
                    label: format!("{label}~{attach}"),
                    dim,
                    node: NodeKind::Tail { attach_level: attach },
                });
            } else {
                tail_pos[level].push(usize::MAX);
            }
        }
        levels.push(nodes);
    }

    let mut edges: Vec<BratteliEdge> = core.edges.clone();
    for (t, &(attach, parent_idx, _, _)) in tails.iter().enumerate() {
        edges.push(BratteliEdge {
            level: attach,
            from: parent_idx,
            to: tail_pos[attach + 1][t],
            multiplicity: 1,
        });
        for level in attach + 1..depth {
            edges.push(BratteliEdge {
                level,
                from: tail_pos[level][t],
                to: tail_pos[level + 1][t],
                multiplicity: 1,
            });
        }
    }

    let kind = match variant {
        ToeplitzVariant::Compressed => DiagramKind::CompressedToeplitzCore,
        ToeplitzVariant::Zero => DiagramKind::ToeplitzZeroCore,
    };
    let d = BratteliDiagram { kind, levels, edges };
    d.check_consistency()?;
    Ok(d)
}

/// Deterministic DOT rendering: one ranked subgraph per level, tail nodes
/// dashed to mirror the usual drawing with the separator line.
pub fn to_dot(d: &BratteliDiagram) -> String {
    let mut out = String::new();
    out.push_str("digraph bratteli {\n");
    out.push_str("  rankdir=TB;\n  node [shape=circle];\n");
    for (l, nodes) in d.levels.iter().enumerate() {
        out.push_str("  { rank=same;");
        for n in nodes {
            let style = match n.node {
                NodeKind::Core => "solid",
                NodeKind::Tail { .. } => "dashed",
            };
            out.push_str(&format!(
                " \"L{l}:{}\" [label=\"{} ({})\", style={style}];",
                n.label, n.label, n.dim
            ));
        }
        out.push_str(" }\n");
    }
    let mut lines: Vec<String> = d
        .edges
        .iter()
        .map(|e| {
            let from = &d.levels[e.level][e.from].label;
            let to = &d.levels[e.level + 1][e.to].label;
            if e.multiplicity == 1 {
                format!("  \"L{}:{from}\" -> \"L{}:{to}\";\n", e.level, e.level + 1)
            } else {
                format!(
                    "  \"L{}:{from}\" -> \"L{}:{to}\" [label=\"{}\"];\n",
                    e.level,
                    e.level + 1,
                    e.multiplicity
                )
            }
        })
        .collect();
    lines.sort();
    for l in lines {
        out.push_str(&l);
    }
    out.push_str("}\n");
    out
}

#[test]
fn dump_a4_diagrams() {
    use crate::bratteli::*;
    use crate::families;
    let g = families::path(4);
    let z = toeplitz_core_bratteli(&g, 4, ToeplitzVariant::Zero).unwrap();
    println!("=== ZERO ===\n{}", z.canonical_text());
    let c = toeplitz_core_bratteli(&g, 4, ToeplitzVariant::Compressed).unwrap();
    println!("=== COMPRESSED ===\n{}", c.canonical_text());
    println!("zero nodes={} edges={}", z.node_count(), z.edge_count());
    println!("compressed nodes={} edges={}", c.node_count(), c.edge_count());
}
