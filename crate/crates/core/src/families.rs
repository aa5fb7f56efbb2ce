//! Standard graph families used throughout the tests, benches, and docs:
//! bouquets of loops, path graphs A_n, cycles, complete graphs, and a
//! deterministic sampler of small connected multigraphs.

use std::collections::HashMap;

use crate::graph::UndirectedGraph;

/// One vertex carrying `n` loops.
pub fn bouquet(n: usize) -> UndirectedGraph {
    UndirectedGraph::new(
        vec!["v".into()],
        None,
        (0..n)
            .map(|i| (format!("l{i}"), "v".to_string(), "v".to_string()))
            .collect(),
        None,
    )
    .expect("bouquet is well-formed")
}

/// The path graph A_n on `n` vertices (n - 1 edges), base at an end vertex.
pub fn path(n: usize) -> UndirectedGraph {
    UndirectedGraph::new(
        (1..=n).map(|i| format!("v{i}")).collect(),
        None,
        (1..n)
            .map(|i| (format!("e{i}"), format!("v{i}"), format!("v{}", i + 1)))
            .collect(),
        None,
    )
    .expect("path is well-formed")
}

/// Cycle on `n >= 3` vertices.
pub fn cycle(n: usize) -> UndirectedGraph {
    assert!(n >= 3, "cycle needs at least 3 vertices");
    UndirectedGraph::new(
        (1..=n).map(|i| format!("v{i}")).collect(),
        None,
        (1..=n)
            .map(|i| {
                let j = if i == n { 1 } else { i + 1 };
                (format!("e{i}"), format!("v{i}"), format!("v{j}"))
            })
            .collect(),
        None,
    )
    .expect("cycle is well-formed")
}

/// Complete graph on `n` vertices.
pub fn complete(n: usize) -> UndirectedGraph {
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            edges.push((format!("e{i}_{j}"), format!("v{i}"), format!("v{j}")));
        }
    }
    UndirectedGraph::new(
        (1..=n).map(|i| format!("v{i}")).collect(),
        None,
        edges,
        None,
    )
    .expect("complete graph is well-formed")
}

/// Two vertices with an edge and prescribed weights; the smallest graph
/// exhibiting the unequal-mass edge structure.
pub fn weighted_edge(mu_a: f64, mu_b: f64) -> UndirectedGraph {
    UndirectedGraph::new(
        vec!["a".into(), "b".into()],
        None,
        vec![("e".into(), "a".into(), "b".into())],
        Some(HashMap::from([("a".into(), mu_a), ("b".into(), mu_b)])),
    )
    .expect("weighted edge is well-formed")
}

/// Single vertex with one loop and the given weight.
pub fn weighted_loop(mu: f64) -> UndirectedGraph {
    UndirectedGraph::new(
        vec!["a".into()],
        None,
        vec![("e".into(), "a".into(), "a".into())],
        Some(HashMap::from([("a".into(), mu)])),
    )
    .expect("weighted loop is well-formed")
}

/// Deterministic connected multigraph on up to 8 vertices. The same seed
/// always yields the same graph; loops and parallel edges both occur.
pub fn random_multigraph(seed: u64) -> UndirectedGraph {
    let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let n = 2 + (next() % 7) as usize; // 2..=8 vertices
    let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    // Spanning tree first so the graph is connected.
    for i in 1..n {
        let parent = (next() % i as u64) as usize;
        edges.push((format!("t{i}"), format!("v{}", parent + 1), format!("v{}", i + 1)));
    }
    let extra = (next() % 5) as usize;
    for k in 0..extra {
        let a = (next() % n as u64) as usize;
        let b = (next() % n as u64) as usize;
        edges.push((format!("x{k}"), format!("v{}", a + 1), format!("v{}", b + 1)));
    }
    UndirectedGraph::new(vertices, None, edges, None).expect("sampled graph is well-formed")
}

/// The connected corpus: paths A2..A6, cycles C3..C6, bouquets 1..6,
/// the complete graph K4, and five sampled multigraphs. 20+ graphs.
pub fn connected_corpus() -> Vec<UndirectedGraph> {
    let mut all = Vec::new();
    for n in 2..=6 {
        all.push(path(n));
    }
    for n in 3..=6 {
        all.push(cycle(n));
    }
    for n in 1..=6 {
        all.push(bouquet(n));
    }
    all.push(complete(4));
    for seed in 1..=5 {
        all.push(random_multigraph(seed));
    }
    all
}
