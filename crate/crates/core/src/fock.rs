//! Truncated path-space representation of the Toeplitz graph algebra.
//!
//! The basis is the set of composable directed paths up to a depth cap,
//! with the diagonal inner product `<p|p> = mu(t(p))`. Creation past the
//! cap yields zero, so every operator is well defined; assertions about
//! operator identities are restricted to the interior (columns of depth
//! below the cap) or to words whose exactness certificate covers the cap.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// Default ceiling on the number of basis paths.
pub const DEFAULT_BASIS_CAP: usize = 5_000_000;

/// Composable sequence of directed edges with an explicit start vertex;
/// the empty path is the vacuum at its vertex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub start: u32,
    pub dedges: Vec<u32>,
}

impl Path {
    pub fn vacuum(v: usize) -> Self {
        Path { start: v as u32, dedges: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.dedges.len()
    }
}

/// All composable paths of depth at most `depth`, ordered by depth and then
/// lexicographically in directed-edge ids; indexes are stable and
/// reproducible for a fixed graph.
#[derive(Debug, Clone)]
pub struct FockBasis {
    graph: DirectedGraph,
    weights: Vec<f64>,
    depth: usize,
    paths: Vec<Path>,
    index: HashMap<Path, usize>,
    /// Inner product weight of each basis path: mu at its target vertex.
    path_weight: Vec<f64>,
    /// Index of the vacuum of each vertex, in declared vertex order.
    vacua: Vec<usize>,
}

impl FockBasis {
    pub fn build(
        graph: &DirectedGraph,
        weights: &[f64],
        depth: usize,
        cap: usize,
    ) -> Result<Self> {
        assert_eq!(weights.len(), graph.vertex_count(), "weighting must cover every vertex");
        let needed = count_paths(graph, depth);
        if needed > cap as u128 {
            return Err(Error::BasisCap {
                depth,
                needed: needed.min(usize::MAX as u128) as usize,
                cap,
            });
        }

        let n = graph.vertex_count();
        // Lexicographic rank of each dedge by id.
        let mut order: Vec<usize> = (0..graph.dedges().len()).collect();
        order.sort_by(|&a, &b| graph.dedges()[a].id.cmp(&graph.dedges()[b].id));

        let mut vertex_order: Vec<usize> = (0..n).collect();
        vertex_order.sort_by(|&a, &b| graph.vertex_ids()[a].cmp(&graph.vertex_ids()[b]));

        let mut paths: Vec<Path> = Vec::new();
        let mut frontier: Vec<Path> = vertex_order.iter().map(|&v| Path::vacuum(v)).collect();
        paths.extend(frontier.iter().cloned());
        for _ in 1..=depth {
            let mut next = Vec::new();
            for p in &frontier {
                let end = p
                    .dedges
                    .last()
                    .map(|&d| graph.dedges()[d as usize].target)
                    .unwrap_or(p.start as usize);
                for &d in &order {
                    if graph.dedges()[d].source == end {
                        let mut q = p.clone();
                        q.dedges.push(d as u32);
                        next.push(q);
                    }
                }
            }
            paths.extend(next.iter().cloned());
            frontier = next;
        }

        let index: HashMap<Path, usize> =
            paths.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let path_weight = paths.iter().map(|p| weights[target_of(graph, p)]).collect();
        let vacua = (0..n).map(|v| index[&Path::vacuum(v)]).collect();
        Ok(FockBasis {
            graph: graph.clone(),
            weights: weights.to_vec(),
            depth,
            paths,
            index,
            path_weight,
            vacua,
        })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path_index(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn path_weight(&self, i: usize) -> f64 {
        self.path_weight[i]
    }

    pub fn vacuum_index(&self, vertex: usize) -> usize {
        self.vacua[vertex]
    }

    fn start_of(&self, p: &Path) -> usize {
        p.start as usize
    }

    /// Creation by a directed edge: prepend where the edge target matches
    /// the path start; paths that would exceed the cap map to zero.
    pub fn creation(&self, dedge: usize) -> SparseOperator {
        let d = &self.graph.dedges()[dedge];
        let mut entries = Vec::new();
        for (j, p) in self.paths.iter().enumerate() {
            if self.start_of(p) != d.target || p.depth() + 1 > self.depth {
                continue;
            }
            let mut q = Path { start: d.source as u32, dedges: Vec::with_capacity(p.depth() + 1) };
            q.dedges.push(dedge as u32);
            q.dedges.extend_from_slice(&p.dedges);
            let i = self.index[&q];
            entries.push((i as u32, j as u32, 1.0));
        }
        SparseOperator::from_entries(self.len(), entries, Some(1))
    }

    pub fn annihilation(&self, dedge: usize) -> SparseOperator {
        self.adjoint(&self.creation(dedge))
    }

    /// Diagonal projection onto paths starting at the vertex.
    pub fn vertex_proj(&self, vertex: usize) -> SparseOperator {
        let entries = self
            .paths
            .iter()
            .enumerate()
            .filter(|(_, p)| self.start_of(p) == vertex)
            .map(|(i, _)| (i as u32, i as u32, 1.0))
            .collect();
        SparseOperator::from_entries(self.len(), entries, Some(0))
    }

    /// Rank-one projection onto the vacuum of the vertex.
    pub fn vacuum_proj(&self, vertex: usize) -> SparseOperator {
        let i = self.vacua[vertex] as u32;
        SparseOperator::from_entries(self.len(), vec![(i, i, 1.0)], Some(0))
    }

    /// Diagonal number operator grading by path depth.
    pub fn number_op(&self) -> SparseOperator {
        let entries = self
            .paths
            .iter()
            .enumerate()
            .filter(|(_, p)| p.depth() > 0)
            .map(|(i, p)| (i as u32, i as u32, p.depth() as f64))
            .collect();
        SparseOperator::from_entries(self.len(), entries, Some(0))
    }

    /// Self-adjoint field of an undirected edge. For a loop this is
    /// creation plus annihilation; otherwise the two op-paired directions
    /// are weighted by the fourth root of the endpoint mass ratio.
    pub fn field_op(&self, edge: usize) -> SparseOperator {
        match self.directions_of(edge) {
            (f, None) => {
                let c = self.creation(f);
                let a = self.adjoint(&c);
                c.add(&a)
            }
            (f, Some(r)) => {
                let a = self.mass_ratio_root(f);
                let cf = self.creation(f);
                let cr = self.creation(r);
                cf.scale(a)
                    .add(&self.adjoint(&cr).scale(1.0 / a))
                    .add(&cr.scale(1.0 / a))
                    .add(&self.adjoint(&cf).scale(a))
            }
        }
    }

    /// One orientation of the field: `a L(d) + a^{-1} L(d.op)^*` with
    /// `a = (mu(s(d)) / mu(t(d)))^{1/4}`. Its adjoint is the reverse
    /// orientation, and the full field is the sum of the two.
    pub fn half_field_op(&self, dedge: usize) -> SparseOperator {
        let op = self.graph.dedges()[dedge].op;
        let a = self.mass_ratio_root(dedge);
        if op == dedge {
            let c = self.creation(dedge);
            return c.scale(a).add(&self.adjoint(&c).scale(1.0 / a));
        }
        self.creation(dedge)
            .scale(a)
            .add(&self.adjoint(&self.creation(op)).scale(1.0 / a))
    }

    fn mass_ratio_root(&self, dedge: usize) -> f64 {
        let d = &self.graph.dedges()[dedge];
        (self.weights[d.source] / self.weights[d.target]).powf(0.25)
    }

    /// Forward direction (and reverse, absent for loops) of an undirected
    /// edge index.
    pub fn directions_of(&self, edge: usize) -> (usize, Option<usize>) {
        let mut fwd = None;
        for (i, d) in self.graph.dedges().iter().enumerate() {
            if d.origin == edge {
                match fwd {
                    None => fwd = Some(i),
                    Some(f) => return (f, Some(i)),
                }
            }
        }
        (fwd.expect("edge index out of range"), None)
    }

    /// Adjoint with respect to the weighted inner product:
    /// `x*[j,i] = x[i,j] * w_i / w_j`.
    pub fn adjoint(&self, x: &SparseOperator) -> SparseOperator {
        let entries = x
            .entries()
            .iter()
            .map(|&(i, j, v)| {
                (j, i, v * self.path_weight[i as usize] / self.path_weight[j as usize])
            })
            .collect();
        SparseOperator::from_entries(x.dim(), entries, x.gauge_grade().map(|g| -g))
    }

    /// Scalar coefficient of each vacuum in `x` applied to that vacuum,
    /// indexed by vertex in declared order.
    pub fn vacuum_expectation(&self, x: &SparseOperator) -> Vec<f64> {
        self.vacua.iter().map(|&i| x.get(i as u32, i as u32)).collect()
    }

    /// Weighted trace: sum of mu(v) times the vacuum coefficient at v.
    pub fn trace_mu(&self, x: &SparseOperator) -> f64 {
        self.vacuum_expectation(x)
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| c * w)
            .sum()
    }

    /// Indices of the interior columns (depth strictly below the cap).
    pub fn interior(&self) -> Vec<u32> {
        self.paths
            .iter()
            .enumerate()
            .filter(|(_, p)| p.depth() < self.depth)
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Matrix of a generator word (leftmost factor acts last).
    pub fn word_matrix(&self, word: &[Factor]) -> SparseOperator {
        let mut out = SparseOperator::identity(self.len());
        for f in word {
            out = out.mul(&self.factor_matrix(f));
        }
        out
    }

    fn factor_matrix(&self, f: &Factor) -> SparseOperator {
        match *f {
            Factor::Create(d) => self.creation(d),
            Factor::Annihilate(d) => self.annihilation(d),
            Factor::VertexProj(v) => self.vertex_proj(v),
            Factor::Field(e) => self.field_op(e),
            Factor::HalfField(d) => self.half_field_op(d),
            Factor::HalfFieldStar(d) => self.adjoint(&self.half_field_op(d)),
        }
    }
}

fn target_of(graph: &DirectedGraph, p: &Path) -> usize {
    p.dedges
        .last()
        .map(|&d| graph.dedges()[d as usize].target)
        .unwrap_or(p.start as usize)
}

/// Number of composable paths of depth <= depth, counted without
/// enumeration so oversized bases are rejected cheaply.
fn count_paths(graph: &DirectedGraph, depth: usize) -> u128 {
    let n = graph.vertex_count();
    let mut ending: Vec<u128> = vec![1; n];
    let mut total: u128 = n as u128;
    for _ in 1..=depth {
        let mut next = vec![0u128; n];
        for d in graph.dedges() {
            next[d.target] = next[d.target].saturating_add(ending[d.source]);
        }
        ending = next;
        total = total.saturating_add(ending.iter().fold(0u128, |a, &b| a.saturating_add(b)));
    }
    total
}

/// Generator of a word in the truncated representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// S_d for a directed edge.
    Create(usize),
    /// S_d^* for a directed edge.
    Annihilate(usize),
    /// p_v for a vertex.
    VertexProj(usize),
    /// Self-adjoint field T_e of an undirected edge.
    Field(usize),
    /// Oriented half of the field, indexed by a directed edge.
    HalfField(usize),
    /// Adjoint of the oriented half.
    HalfFieldStar(usize),
}

impl Factor {
    /// Possible depth increments of a single application.
    fn increments(&self) -> &'static [i64] {
        match self {
            Factor::Create(_) => &[1],
            Factor::Annihilate(_) => &[-1],
            Factor::VertexProj(_) => &[0],
            Factor::Field(_) | Factor::HalfField(_) | Factor::HalfFieldStar(_) => &[1, -1],
        }
    }
}

/// Minimal truncation depth at which the vacuum expectation of the word is
/// untouched by the cap: the highest depth visited by any walk that starts
/// and ends at depth zero and never goes negative. Words whose walks cannot
/// return to depth zero have expectation zero at every cap and certify at 0.
pub fn certified_depth(word: &[Factor]) -> usize {
    let k = word.len();
    let mut forward: Vec<Vec<bool>> = vec![vec![false; k + 2]; k + 1];
    forward[0][0] = true;
    // Rightmost factor applies first.
    for (step, f) in word.iter().rev().enumerate() {
        for d in 0..=k {
            if !forward[step][d] {
                continue;
            }
            for &inc in f.increments() {
                let nd = d as i64 + inc;
                if nd >= 0 {
                    forward[step + 1][nd as usize] = true;
                }
            }
        }
    }
    let mut backward: Vec<Vec<bool>> = vec![vec![false; k + 2]; k + 1];
    backward[k][0] = true;
    for step in (0..k).rev() {
        let f = word[k - 1 - step];
        for d in 0..=k {
            for &inc in f.increments() {
                let nd = d as i64 + inc;
                if nd >= 0 && nd as usize <= k + 1 && backward[step + 1][nd as usize] {
                    backward[step][d] = true;
                }
            }
        }
    }
    let mut needed = 0;
    for step in 0..=k {
        for d in 0..=k {
            if forward[step][d] && backward[step][d] {
                needed = needed.max(d);
            }
        }
    }
    needed
}

/// Certifies that the cap is deep enough for the word's expectation;
/// the refusal names the minimal sufficient depth.
pub fn exactness_certificate(word: &[Factor], depth: usize) -> Result<usize> {
    let required = certified_depth(word);
    if required <= depth {
        Ok(required)
    } else {
        Err(Error::DepthInsufficient { required, available: depth })
    }
}

/// Square sparse matrix over a Fock basis: sorted, deduplicated coordinate
/// triplets, optionally tagged with its gauge grade.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(u32, u32, f64)>,
    gauge_grade: Option<i64>,
}

impl SparseOperator {
    pub fn from_entries(
        dim: usize,
        mut entries: Vec<(u32, u32, f64)>,
        gauge_grade: Option<i64>,
    ) -> Self {
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != 0.0);
        SparseOperator { dim, entries: merged, gauge_grade }
    }

    pub fn zero(dim: usize) -> Self {
        SparseOperator { dim, entries: Vec::new(), gauge_grade: None }
    }

    pub fn identity(dim: usize) -> Self {
        let entries = (0..dim as u32).map(|i| (i, i, 1.0)).collect();
        SparseOperator { dim, entries, gauge_grade: Some(0) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    pub fn gauge_grade(&self) -> Option<i64> {
        self.gauge_grade
    }

    pub fn get(&self, i: u32, j: u32) -> f64 {
        self.entries
            .binary_search_by_key(&(i, j), |&(a, b, _)| (a, b))
            .map(|k| self.entries[k].2)
            .unwrap_or(0.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        let entries = self.entries.iter().map(|&(i, j, v)| (i, j, c * v)).collect();
        SparseOperator::from_entries(self.dim, entries, self.gauge_grade)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        let grade = match (self.gauge_grade, other.gauge_grade) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        SparseOperator::from_entries(self.dim, entries, grade)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        // Group the right factor by row for the accumulation pass.
        let mut by_row: HashMap<u32, Vec<(u32, f64)>> = HashMap::new();
        for &(i, j, v) in &other.entries {
            by_row.entry(i).or_default().push((j, v));
        }
        let mut acc: HashMap<(u32, u32), f64> = HashMap::new();
        for &(i, k, a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(j, b) in row {
                    *acc.entry((i, j)).or_insert(0.0) += a * b;
                }
            }
        }
        let entries = acc.into_iter().map(|((i, j), v)| (i, j, v)).collect();
        let grade = match (self.gauge_grade, other.gauge_grade) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        SparseOperator::from_entries(self.dim, entries, grade)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for &(i, j, x) in &self.entries {
            out[i as usize] += x * v[j as usize];
        }
        out
    }

    /// Largest absolute entry of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other)
            .entries
            .iter()
            .fold(0.0f64, |m, &(_, _, v)| m.max(v.abs()))
    }

    /// Same, restricted to the given columns.
    pub fn max_abs_diff_on(&self, other: &Self, cols: &[u32]) -> f64 {
        let keep: std::collections::HashSet<u32> = cols.iter().copied().collect();
        self.sub(other)
            .entries
            .iter()
            .filter(|&&(_, j, _)| keep.contains(&j))
            .fold(0.0f64, |m, &(_, _, v)| m.max(v.abs()))
    }
}

/// Pass/fail result of one operator identity.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
    pub max_residual: f64,
}

/// Verifies the generator relations on the truncated representation:
/// annihilation/creation products, range projections, adjoint symmetry,
/// and gauge covariance of creation under the number operator.
pub fn relation_suite(basis: &FockBasis) -> Vec<IdentityCheck> {
    let g = basis.graph();
    let interior = basis.interior();
    let mut checks = Vec::new();

    // S_e'^* S_e = delta p_{t(e)} on the interior.
    let mut worst = 0.0f64;
    for e in 0..g.dedges().len() {
        let se = basis.creation(e);
        for f in 0..g.dedges().len() {
            let lhs = basis.annihilation(f).mul(&se);
            let rhs = if e == f {
                basis.vertex_proj(g.dedges()[e].target)
            } else {
                SparseOperator::zero(basis.len())
            };
            worst = worst.max(lhs.max_abs_diff_on(&rhs, &interior));
        }
    }
    checks.push(IdentityCheck {
        name: "annihilation_creation_products".into(),
        pass: worst == 0.0,
        max_residual: worst,
    });

    // sum_{s(e)=v} S_e S_e^* = p_v - |vac_v><vac_v|, exact on the whole
    // truncated space (annihilation never overflows the cap).
    let mut worst = 0.0f64;
    for v in 0..g.vertex_count() {
        let mut lhs = SparseOperator::zero(basis.len());
        for e in 0..g.dedges().len() {
            if g.dedges()[e].source == v {
                let se = basis.creation(e);
                lhs = lhs.add(&se.mul(&basis.annihilation(e)));
            }
        }
        let rhs = basis.vertex_proj(v).sub(&basis.vacuum_proj(v));
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    checks.push(IdentityCheck {
        name: "range_projection_sum".into(),
        pass: worst == 0.0,
        max_residual: worst,
    });

    // Adjoint symmetry of the weighted inner product: W x vs (x^*)^T W.
    let mut worst = 0.0f64;
    for e in 0..g.dedges().len() {
        let s = basis.creation(e);
        let sstar = basis.adjoint(&s);
        for &(i, j, v) in s.entries() {
            let lhs = v * basis.path_weight(i as usize);
            let rhs = sstar.get(j, i) * basis.path_weight(j as usize);
            worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
        }
    }
    checks.push(IdentityCheck {
        name: "adjoint_inner_product".into(),
        pass: worst <= 1e-12,
        max_residual: worst,
    });

    // [N, S_e] = S_e on the interior.
    let nop = basis.number_op();
    let mut worst = 0.0f64;
    for e in 0..g.dedges().len() {
        let s = basis.creation(e);
        let comm = nop.mul(&s).sub(&s.mul(&nop));
        worst = worst.max(comm.max_abs_diff_on(&s, &interior));
    }
    checks.push(IdentityCheck {
        name: "gauge_commutator".into(),
        pass: worst == 0.0,
        max_residual: worst,
    });

    checks
}

/// Weighted trace moments of the field of one undirected edge, computed at
/// the certified depth for the highest power requested.
pub fn edge_moments(
    graph: &DirectedGraph,
    weights: &[f64],
    edge: usize,
    upto: usize,
    cap: usize,
) -> Result<Vec<f64>> {
    let word: Vec<Factor> = (0..upto).map(|_| Factor::Field(edge)).collect();
    let depth = certified_depth(&word);
    let basis = FockBasis::build(graph, weights, depth, cap)?;
    let t = basis.field_op(edge);
    let mut out = Vec::with_capacity(upto + 1);
    let mut power = SparseOperator::identity(basis.len());
    out.push(basis.trace_mu(&power));
    for _ in 1..=upto {
        power = power.mul(&t);
        out.push(basis.trace_mu(&power));
    }
    Ok(out)
}
