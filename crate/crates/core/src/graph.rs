//! Weighted undirected multigraphs, their directed doubles, Perron-Frobenius
//! weightings, and the vertex classification set driven by the weighting.
//!
//! Conventions fixed here and used everywhere else:
//! * a loop contributes a single directed edge with `op` equal to itself,
//!   and counts once in the multiplicity matrix and in the weighted degree;
//! * the base vertex defaults to the first declared vertex;
//! * only finite graphs are accepted.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::intmat::IntMatrix;

/// Tolerances are compiled in; reports cite them, flags never change them.
pub const PERRON_EIGENVALUE_TOL: f64 = 1e-13;
pub const PERRON_MAX_ITER: usize = 100_000;
pub const PERRON_RESIDUAL_REL: f64 = 1e-10;
/// Guard for the strict inequality mu(v) > a_mu(v) against float noise at
/// the degenerate eigenvalue-one graphs.
pub const STRUCTURE_SET_REL: f64 = 1e-9;

/// Finite undirected multigraph with optional positive vertex weighting.
#[derive(Debug, Clone)]
pub struct UndirectedGraph {
    vertex_ids: Vec<String>,
    base: usize,
    edges: Vec<UEdge>,
    weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct UEdge {
    pub id: String,
    /// Unordered endpoints as indices into the vertex list; equal means loop.
    pub ends: (usize, usize),
}

impl UEdge {
    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }
}

/// Directed double: loops stay single self-`op` edges, every other edge
/// splits into an op-paired forward/reverse pair.
#[derive(Debug, Clone)]
pub struct DirectedGraph {
    vertex_ids: Vec<String>,
    dedges: Vec<Dedge>,
}

#[derive(Debug, Clone)]
pub struct Dedge {
    pub id: String,
    pub source: usize,
    pub target: usize,
    /// Index of the op-partner (an involution; loops point at themselves).
    pub op: usize,
    /// Index of the undirected edge this came from.
    pub origin: usize,
}

/// Perron eigenvalue and eigenvector of the vertex multiplicity matrix,
/// normalized so the base vertex has weight 1.
#[derive(Debug, Clone)]
pub struct PerronData {
    pub eigenvalue: f64,
    pub weighting: Vec<f64>,
    /// Largest relative Frobenius-Perron residual over the vertices.
    pub max_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcludedCase {
    None,
    SingleLoop,
    #[serde(rename = "A2")]
    A2,
}

/// Reachability and matrix-shape report; computed, never thrown.
#[derive(Debug, Clone)]
pub struct GraphClassification {
    pub connected: bool,
    pub locally_finite: bool,
    pub strongly_connected_double: bool,
    pub edge_matrix_is_permutation: bool,
    pub excluded_case: ExcludedCase,
}

/// Weighted degree map and the set of vertices whose weight exceeds it.
#[derive(Debug, Clone)]
pub struct StructureSet {
    pub a_mu: Vec<f64>,
    pub a_set: Vec<usize>,
}

impl UndirectedGraph {
    /// Validates ids, endpoints, and weights. `weights` must cover every
    /// vertex or be absent entirely.
    pub fn new(
        vertex_ids: Vec<String>,
        base_vertex: Option<&str>,
        edges: Vec<(String, String, String)>,
        weights: Option<HashMap<String, f64>>,
    ) -> Result<Self> {
        if vertex_ids.is_empty() {
            return Err(Error::Empty);
        }
        let mut index = HashMap::new();
        for (i, id) in vertex_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
        }
        let mut seen_edges = HashSet::new();
        let mut built = Vec::with_capacity(edges.len());
        for (id, a, b) in edges {
            if !seen_edges.insert(id.clone()) {
                return Err(Error::DuplicateEdge(id));
            }
            let ia = *index.get(&a).ok_or_else(|| Error::DanglingEndpoint {
                edge: id.clone(),
                vertex: a.clone(),
            })?;
            let ib = *index.get(&b).ok_or_else(|| Error::DanglingEndpoint {
                edge: id.clone(),
                vertex: b.clone(),
            })?;
            built.push(UEdge { id, ends: (ia, ib) });
        }
        let base = match base_vertex {
            Some(id) => *index
                .get(id)
                .ok_or_else(|| Error::UnknownBaseVertex(id.to_string()))?,
            None => 0,
        };
        let weights = match weights {
            None => None,
            Some(map) => {
                let mut w = Vec::with_capacity(vertex_ids.len());
                for id in &vertex_ids {
                    match map.get(id) {
                        Some(&x) if x > 0.0 && x.is_finite() => w.push(x),
                        Some(_) => return Err(Error::BadWeight(id.clone())),
                        None => return Err(Error::PartialWeights(id.clone())),
                    }
                }
                for id in map.keys() {
                    if !index.contains_key(id) {
                        return Err(Error::UnknownVertex(id.clone()));
                    }
                }
                Some(w)
            }
        };
        Ok(UndirectedGraph { vertex_ids, base, edges: built, weights })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertex_ids
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertex_ids[v]
    }

    pub fn vertex_index(&self, id: &str) -> Result<usize> {
        self.vertex_ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn edges(&self) -> &[UEdge] {
        &self.edges
    }

    pub fn edge_index(&self, id: &str) -> Result<usize> {
        self.edges
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// The weighting, if the input carried one.
    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn weighting(&self) -> Result<&[f64]> {
        self.weights.as_deref().ok_or(Error::MissingWeights)
    }

    /// Returns a copy of the graph carrying the given weighting.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.vertex_count() {
            return Err(Error::MissingWeights);
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::BadWeight(self.vertex_ids[i].clone()));
            }
        }
        let mut g = self.clone();
        g.weights = Some(weights);
        Ok(g)
    }

    /// Vertex multiplicity matrix: entry (p, q) counts undirected edges
    /// between p and q, a loop counting once on the diagonal.
    pub fn multiplicity_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.vertex_count();
        let mut m = vec![vec![0u64; n]; n];
        for e in &self.edges {
            let (a, b) = e.ends;
            if a == b {
                m[a][a] += 1;
            } else {
                m[a][b] += 1;
                m[b][a] += 1;
            }
        }
        m
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.ends.0].push(e.ends.1);
            adj[e.ends.1].push(e.ends.0);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Splits an undirected graph into its directed double.
///
/// Non-loop edge `e` produces the pair `e.f` (first endpoint to second) and
/// `e.r` (reverse); a loop keeps its own id. The two are op-partners.
pub fn directify(g: &UndirectedGraph) -> Result<DirectedGraph> {
    let mut dedges = Vec::new();
    for (origin, e) in g.edges.iter().enumerate() {
        if e.is_loop() {
            let idx = dedges.len();
            dedges.push(Dedge {
                id: e.id.clone(),
                source: e.ends.0,
                target: e.ends.0,
                op: idx,
                origin,
            });
        } else {
            let fwd = dedges.len();
            dedges.push(Dedge {
                id: format!("{}.f", e.id),
                source: e.ends.0,
                target: e.ends.1,
                op: fwd + 1,
                origin,
            });
            dedges.push(Dedge {
                id: format!("{}.r", e.id),
                source: e.ends.1,
                target: e.ends.0,
                op: fwd,
                origin,
            });
        }
    }
    let mut seen = HashSet::new();
    for d in &dedges {
        if !seen.insert(d.id.clone()) {
            return Err(Error::DuplicateDedge(d.id.clone()));
        }
    }
    Ok(DirectedGraph { vertex_ids: g.vertex_ids.clone(), dedges })
}

impl DirectedGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertex_ids
    }

    pub fn dedges(&self) -> &[Dedge] {
        &self.dedges
    }

    pub fn dedge_index(&self, id: &str) -> Result<usize> {
        self.dedges
            .iter()
            .position(|d| d.id == id)
            .ok_or_else(|| Error::UnknownDedge(id.to_string()))
    }

    /// Vertex matrix B of the double: B(a, b) = number of directed edges
    /// from a to b, indexed by vertices in declared order.
    pub fn vertex_matrix(&self) -> IntMatrix {
        let n = self.vertex_count();
        let mut b = IntMatrix::zero(n, n);
        for d in &self.dedges {
            b[(d.source, d.target)] += 1;
        }
        b
    }

    /// Edge matrix A of the double: A(e, f) = 1 when t(e) = s(f), indexed
    /// by directed edges in declared order.
    pub fn edge_matrix(&self) -> IntMatrix {
        let n = self.dedges.len();
        let mut a = IntMatrix::zero(n, n);
        for (i, e) in self.dedges.iter().enumerate() {
            for (j, f) in self.dedges.iter().enumerate() {
                if e.target == f.source {
                    a[(i, j)] += 1;
                }
            }
        }
        a
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.dedges.iter().filter(|d| d.source == v).count()
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let forward: Vec<Vec<usize>> = {
            let mut adj = vec![Vec::new(); n];
            for d in &self.dedges {
                adj[d.source].push(d.target);
            }
            adj
        };
        let backward: Vec<Vec<usize>> = {
            let mut adj = vec![Vec::new(); n];
            for d in &self.dedges {
                adj[d.target].push(d.source);
            }
            adj
        };
        let reach = |adj: &[Vec<usize>]| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(&forward) && reach(&backward)
    }
}

/// Classifies the graph: reachability on the double, permutation shape of
/// the edge matrix, and the two excluded degenerate graphs.
pub fn validate(g: &UndirectedGraph) -> Result<GraphClassification> {
    let d = directify(g)?;
    let a = d.edge_matrix();
    let n = a.rows();
    let mut is_perm = n > 0;
    for i in 0..n {
        let row: num::BigInt = (0..n).map(|j| a[(i, j)].clone()).sum();
        let col: num::BigInt = (0..n).map(|j| a[(j, i)].clone()).sum();
        if row != num::BigInt::from(1) || col != num::BigInt::from(1) {
            is_perm = false;
            break;
        }
    }
    let excluded = if g.vertex_count() == 1 && g.edges.len() == 1 && g.edges[0].is_loop() {
        ExcludedCase::SingleLoop
    } else if g.vertex_count() == 2
        && g.edges.len() == 1
        && !g.edges[0].is_loop()
    {
        ExcludedCase::A2
    } else {
        ExcludedCase::None
    };
    Ok(GraphClassification {
        connected: g.is_connected(),
        locally_finite: true,
        strongly_connected_double: d.is_strongly_connected(),
        edge_matrix_is_permutation: is_perm,
        excluded_case: excluded,
    })
}

/// Perron eigenvalue and positive eigenvector of the multiplicity matrix.
///
/// Power iteration on the shifted matrix N + I with the all-ones start
/// vector; the shift removes the period-two oscillation that plain power
/// iteration hits on bipartite graphs, without moving the eigenvector. The
/// eigenvalue is read off as the Rayleigh quotient with respect to N itself.
pub fn perron_data(g: &UndirectedGraph) -> Result<PerronData> {
    perron_with_shift(g, 1.0)
}

/// Same computation under a different spectral shift; used to cross-check
/// the eigenvalue through an independent iteration route.
pub fn perron_with_shift(g: &UndirectedGraph, shift: f64) -> Result<PerronData> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.vertex_count();
    let m = g.multiplicity_matrix();
    let mul = |v: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| m[i][j] as f64 * v[j]).sum())
            .collect()
    };

    // The Rayleigh quotient settles quadratically faster than the vector,
    // so convergence demands both the eigenvalue increment and the
    // Frobenius-Perron residual of the current iterate to be tiny.
    let residual_of = |rayleigh: f64, v: &[f64], nv: &[f64]| -> f64 {
        let mut worst = 0.0f64;
        for p in 0..n {
            let lhs = rayleigh * v[p];
            let denom = lhs.abs().max(f64::MIN_POSITIVE);
            worst = worst.max((lhs - nv[p]).abs() / denom);
        }
        worst
    };

    let mut v = vec![1.0; n];
    let mut rayleigh = f64::NAN;
    let mut iterations = 0;
    for it in 1..=PERRON_MAX_ITER {
        iterations = it;
        let nv = mul(&v);
        let num: f64 = nv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|x| x * x).sum();
        let next_rayleigh = num / den;
        let converged = next_rayleigh.is_finite()
            && (next_rayleigh - rayleigh).abs() <= PERRON_EIGENVALUE_TOL
            && residual_of(next_rayleigh, &v, &nv) <= PERRON_RESIDUAL_REL / 100.0;
        rayleigh = next_rayleigh;
        let mut shifted: Vec<f64> = nv.iter().zip(&v).map(|(a, b)| a + shift * b).collect();
        let norm = shifted.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if norm == 0.0 {
            // Single vertex with no edges: eigenvalue 0, eigenvector e_0.
            shifted = vec![1.0; n];
        } else {
            for x in &mut shifted {
                *x /= norm;
            }
        }
        v = shifted;
        if converged {
            break;
        }
        if it == PERRON_MAX_ITER {
            return Err(Error::PerronNoConvergence { max_iter: PERRON_MAX_ITER });
        }
    }

    let scale = v[g.base];
    let weighting: Vec<f64> = v.iter().map(|x| x / scale).collect();

    let mut max_residual = 0.0f64;
    for p in 0..n {
        let lhs = rayleigh * weighting[p];
        let rhs: f64 = (0..n).map(|q| m[p][q] as f64 * weighting[q]).sum();
        let denom = lhs.abs().max(f64::MIN_POSITIVE);
        max_residual = max_residual.max((lhs - rhs).abs() / denom);
    }

    Ok(PerronData { eigenvalue: rayleigh, weighting, max_residual, iterations })
}

/// Weighted degree a_mu and the set A of vertices with mu strictly above it.
///
/// A loop at v counts once in a_mu(v). The strict inequality carries a
/// relative guard so that the eigenvalue-one graphs, where mu equals a_mu
/// exactly, never enter A through rounding.
pub fn structure_set(g: &UndirectedGraph, weights: &[f64]) -> StructureSet {
    let n = g.vertex_count();
    assert_eq!(weights.len(), n, "weighting must cover every vertex");
    let m = g.multiplicity_matrix();
    let a_mu: Vec<f64> = (0..n)
        .map(|v| (0..n).map(|q| m[v][q] as f64 * weights[q]).sum())
        .collect();
    let a_set = (0..n)
        .filter(|&v| weights[v] > a_mu[v] + STRUCTURE_SET_REL * weights[v].max(a_mu[v]))
        .collect();
    StructureSet { a_mu, a_set }
}
