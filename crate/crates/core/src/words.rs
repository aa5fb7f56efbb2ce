//! Symbolic calculus in the Toeplitz graph-algebra generators: normal-form
//! words S_p S_q^*, the gauge grading, the core expectation, and KMS weight
//! evaluation at the Perron temperature.
//!
//! Rewriting uses only the annihilation/creation product rule and
//! projection absorption; the range-projection sum stays untouched, so
//! defect terms of the Toeplitz algebra survive reduction.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num::rational::BigRational;
use num::{One, Zero};

use crate::error::{Error, Result};
use crate::fock::Path;
use crate::graph::DirectedGraph;

/// Scalar field for word coefficients; instantiated at f64 and BigRational.
pub trait Scalar:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl Scalar for f64 {}
impl Scalar for BigRational {}

/// Single generator of a raw word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gen {
    /// S_d for a directed edge index.
    S(usize),
    /// S_d^*.
    SStar(usize),
    /// Vertex projection p_v.
    P(usize),
}

/// Normal-form term S_p S_q^* with t(p) = t(q); both paths empty means the
/// vertex projection at their common vertex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub p: Path,
    pub q: Path,
}

impl Term {
    pub fn vertex_proj(v: usize) -> Self {
        Term { p: Path::vacuum(v), q: Path::vacuum(v) }
    }

    pub fn grade(&self) -> i64 {
        self.p.depth() as i64 - self.q.depth() as i64
    }

    pub fn is_projection_like(&self) -> bool {
        self.p == self.q
    }

    pub fn adjoint(&self) -> Self {
        Term { p: self.q.clone(), q: self.p.clone() }
    }
}

/// Formal linear combination of normal-form terms; kept sorted with merged
/// coefficients and no zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Word<S: Scalar> {
    terms: Vec<(S, Term)>,
}

impl<S: Scalar> Word<S> {
    pub fn zero() -> Self {
        Word { terms: Vec::new() }
    }

    pub fn from_term(coeff: S, term: Term) -> Self {
        Word { terms: vec![(coeff, term)] }.normalized()
    }

    pub fn terms(&self) -> &[(S, Term)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn normalized(mut self) -> Self {
        self.terms.sort_by(|a, b| a.1.cmp(&b.1));
        let mut merged: Vec<(S, Term)> = Vec::with_capacity(self.terms.len());
        for (c, t) in self.terms {
            match merged.last_mut() {
                Some(last) if last.1 == t => {
                    last.0 = last.0.clone() + c;
                }
                _ => merged.push((c, t)),
            }
        }
        merged.retain(|(c, _)| !c.is_zero());
        Word { terms: merged }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Word { terms }.normalized()
    }

    pub fn scale(&self, c: &S) -> Self {
        Word {
            terms: self
                .terms
                .iter()
                .map(|(x, t)| (x.clone() * c.clone(), t.clone()))
                .collect(),
        }
        .normalized()
    }

    pub fn mul(&self, graph: &DirectedGraph, other: &Self) -> Self {
        let mut terms = Vec::new();
        for (a, s) in &self.terms {
            for (b, t) in &other.terms {
                if let Some(prod) = term_mul(graph, s, t) {
                    terms.push((a.clone() * b.clone(), prod));
                }
            }
        }
        Word { terms }.normalized()
    }

    pub fn adjoint(&self) -> Self {
        Word {
            terms: self
                .terms
                .iter()
                .map(|(c, t)| (c.clone(), t.adjoint()))
                .collect(),
        }
        .normalized()
    }

    /// Grade when gauge-homogeneous; the zero word counts as grade 0.
    pub fn grade(&self) -> Option<i64> {
        let mut grades = self.terms.iter().map(|(_, t)| t.grade());
        match grades.next() {
            None => Some(0),
            Some(g) => {
                if grades.all(|h| h == g) {
                    Some(g)
                } else {
                    None
                }
            }
        }
    }

    /// Conditional expectation onto the core: keeps exactly the grade-zero
    /// terms (circle integration kills every other grade).
    pub fn expectation(&self) -> Self {
        Word {
            terms: self
                .terms
                .iter()
                .filter(|(_, t)| t.grade() == 0)
                .cloned()
                .collect(),
        }
    }
}

fn target(graph: &DirectedGraph, p: &Path) -> usize {
    p.dedges
        .last()
        .map(|&d| graph.dedges()[d as usize].target)
        .unwrap_or(p.start as usize)
}

/// If `pre` is a prefix of `path`, the remainder (starting at t(pre)).
fn strip_prefix(graph: &DirectedGraph, path: &Path, pre: &Path) -> Option<Path> {
    if path.start != pre.start || path.dedges.len() < pre.dedges.len() {
        return None;
    }
    if path.dedges[..pre.dedges.len()] != pre.dedges[..] {
        return None;
    }
    Some(Path {
        start: target(graph, pre) as u32,
        dedges: path.dedges[pre.dedges.len()..].to_vec(),
    })
}

fn concat(p: &Path, r: &Path) -> Path {
    let mut dedges = p.dedges.clone();
    dedges.extend_from_slice(&r.dedges);
    Path { start: p.start, dedges }
}

/// Product of two normal-form terms; None encodes zero. The middle factor
/// S_q^* S_x collapses by the annihilation/creation rule, leaving either a
/// longer left path or a longer right path.
fn term_mul(graph: &DirectedGraph, s: &Term, t: &Term) -> Option<Term> {
    if let Some(r) = strip_prefix(graph, &t.p, &s.q) {
        Some(Term { p: concat(&s.p, &r), q: t.q.clone() })
    } else {
        strip_prefix(graph, &s.q, &t.p).map(|r| Term { p: s.p.clone(), q: concat(&t.q, &r) })
    }
}

fn gen_term(graph: &DirectedGraph, g: Gen) -> Term {
    match g {
        Gen::S(d) => {
            let de = &graph.dedges()[d];
            Term {
                p: Path { start: de.source as u32, dedges: vec![d as u32] },
                q: Path::vacuum(de.target),
            }
        }
        Gen::SStar(d) => gen_term(graph, Gen::S(d)).adjoint(),
        Gen::P(v) => Term::vertex_proj(v),
    }
}

/// Reduces a raw generator sequence to normal form; a pure generator
/// product is either zero or a single coefficient-one term.
pub fn reduce<S: Scalar>(graph: &DirectedGraph, gens: &[Gen]) -> Word<S> {
    let mut iter = gens.iter();
    let Some(&first) = iter.next() else {
        return Word::zero();
    };
    let mut current = gen_term(graph, first);
    for &g in iter {
        match term_mul(graph, &current, &gen_term(graph, g)) {
            Some(next) => current = next,
            None => return Word::zero(),
        }
    }
    Word::from_term(S::one(), current)
}

/// Signed creation count of a raw word (used by the gauge-equivariance
/// checks; reduction preserves it).
pub fn signed_creation_count(gens: &[Gen]) -> i64 {
    gens.iter()
        .map(|g| match g {
            Gen::S(_) => 1,
            Gen::SStar(_) => -1,
            Gen::P(_) => 0,
        })
        .sum()
}

/// KMS weight at the Perron temperature:
/// `Psi(S_p S_q^*) = [p = q] lambda^{-|p|} mu(t(p))`, extended linearly
/// after the core expectation.
pub fn kms_weight<S: Scalar>(
    graph: &DirectedGraph,
    w: &Word<S>,
    lambda: &S,
    mu: &[S],
) -> S {
    let mut acc = S::zero();
    for (c, t) in w.expectation().terms() {
        if !t.is_projection_like() {
            continue;
        }
        let mut factor = mu[target(graph, &t.p)].clone();
        for _ in 0..t.p.depth() {
            factor = factor / lambda.clone();
        }
        acc = acc + c.clone() * factor;
    }
    acc
}

/// KMS residual `|Psi(x sigma_{i beta}(y)) - Psi(y x)|` for homogeneous y,
/// where the analytic extension scales y by `exp(-beta grade(y))`.
pub fn kms_check(
    graph: &DirectedGraph,
    x: &Word<f64>,
    y: &Word<f64>,
    beta: f64,
    lambda: f64,
    mu: &[f64],
) -> Result<f64> {
    let grade = y.grade().ok_or(Error::InhomogeneousWord)?;
    let scaling = (-beta * grade as f64).exp();
    let xy = x.mul(graph, y);
    let yx = y.mul(graph, x);
    let lhs = scaling * kms_weight(graph, &xy, &lambda, mu);
    let rhs = kms_weight(graph, &yx, &lambda, mu);
    Ok((lhs - rhs).abs())
}

/// Exact version at beta = ln(lambda): the scaling factor is
/// `lambda^{-grade}`, rational whenever lambda is. Returns the signed
/// residual, which is exactly zero for a true KMS weight.
pub fn kms_check_exact(
    graph: &DirectedGraph,
    x: &Word<BigRational>,
    y: &Word<BigRational>,
    lambda: &BigRational,
    mu: &[BigRational],
) -> Result<BigRational> {
    let grade = y.grade().ok_or(Error::InhomogeneousWord)?;
    let mut scaling = BigRational::one();
    if grade >= 0 {
        for _ in 0..grade {
            scaling /= lambda.clone();
        }
    } else {
        for _ in 0..(-grade) {
            scaling *= lambda.clone();
        }
    }
    let lhs = scaling * kms_weight(graph, &x.mul(graph, y), lambda, mu);
    let rhs = kms_weight(graph, &y.mul(graph, x), lambda, mu);
    Ok(lhs - rhs)
}

/// The defect projection q_v = p_v - sum_{s(e)=v} S_e S_e^* as a word.
pub fn defect_projection<S: Scalar>(graph: &DirectedGraph, v: usize) -> Word<S> {
    let mut w = Word::from_term(S::one(), Term::vertex_proj(v));
    for (d, de) in graph.dedges().iter().enumerate() {
        if de.source == v {
            let term = Term {
                p: Path { start: v as u32, dedges: vec![d as u32] },
                q: Path { start: v as u32, dedges: vec![d as u32] },
            };
            w = w.add(&Word::from_term(S::zero() - S::one(), term));
        }
    }
    w
}

/// Renders a word in the surface syntax: `S(id)`, `S*(id)`, `P(id)`.
pub fn format_word(graph: &DirectedGraph, w: &Word<f64>) -> String {
    if w.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (c, t) in w.terms() {
        let mut factors = Vec::new();
        if t.p.dedges.is_empty() && t.q.dedges.is_empty() {
            factors.push(format!("P({})", graph.vertex_ids()[t.p.start as usize]));
        } else {
            for &d in &t.p.dedges {
                factors.push(format!("S({})", graph.dedges()[d as usize].id));
            }
            for &d in t.q.dedges.iter().rev() {
                factors.push(format!("S*({})", graph.dedges()[d as usize].id));
            }
        }
        let body = factors.join(" ");
        if (*c - 1.0).abs() < 1e-15 {
            parts.push(body);
        } else {
            parts.push(format!("{c} {body}"));
        }
    }
    parts.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::fock::{FockBasis, Factor, DEFAULT_BASIS_CAP};
    use crate::graph::{directify, perron_data};
    use num::BigInt;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn star_then_create_is_projection() {
        let g = families::path(3);
        let d = directify(&g).unwrap();
        let w: Word<f64> = reduce(&d, &[Gen::SStar(0), Gen::S(0)]);
        assert_eq!(w.terms().len(), 1);
        let (c, t) = &w.terms()[0];
        assert_eq!(*c, 1.0);
        assert_eq!(*t, Term::vertex_proj(d.dedges()[0].target));
    }

    #[test]
    fn mismatched_star_is_zero() {
        let g = families::path(3);
        let d = directify(&g).unwrap();
        let w: Word<f64> = reduce(&d, &[Gen::SStar(0), Gen::S(1)]);
        assert!(w.is_zero());
    }

    #[test]
    fn projection_absorbs_or_kills() {
        let g = families::path(3);
        let d = directify(&g).unwrap();
        let e0 = &d.dedges()[0];
        let w: Word<f64> = reduce(&d, &[Gen::P(e0.source), Gen::S(0)]);
        assert_eq!(w.terms().len(), 1);
        let other = (0..d.vertex_count()).find(|&v| v != e0.source).unwrap();
        let w: Word<f64> = reduce(&d, &[Gen::P(other), Gen::S(0)]);
        assert!(w.is_zero());
    }

    #[test]
    fn grades_and_expectation() {
        let g = families::path(3);
        let d = directify(&g).unwrap();
        // S S S* has grade 1 and no core part; S S* has grade 0.
        let up: Word<f64> = reduce(&d, &[Gen::S(1), Gen::S(0), Gen::SStar(1)]);
        if !up.is_zero() {
            assert_eq!(up.grade(), Some(1));
            assert!(up.expectation().is_zero());
        }
        let flat: Word<f64> = reduce(&d, &[Gen::S(0), Gen::SStar(0)]);
        assert_eq!(flat.grade(), Some(0));
        assert_eq!(flat.expectation(), flat);
        // A mixed sum is inhomogeneous and expectation keeps the flat part.
        let mixed = flat.add(&reduce(&d, &[Gen::S(0)]));
        assert_eq!(mixed.grade(), None);
        assert_eq!(mixed.expectation(), flat);
    }

    #[test]
    fn gauge_equivariance_of_reduction() {
        let g = families::bouquet(3);
        let d = directify(&g).unwrap();
        let raws: Vec<Vec<Gen>> = vec![
            vec![Gen::S(0), Gen::S(1), Gen::SStar(1)],
            vec![Gen::SStar(2), Gen::S(2), Gen::S(0)],
            vec![Gen::S(0), Gen::SStar(0), Gen::S(1), Gen::SStar(1)],
        ];
        for raw in raws {
            let w: Word<f64> = reduce(&d, &raw);
            if !w.is_zero() {
                assert_eq!(w.grade(), Some(signed_creation_count(&raw)));
            }
        }
    }

    #[test]
    fn weight_on_bouquet_two() {
        // Two loops, lambda = 2, mu = 1: Psi(S1 S1*) = 1/2, crossed pair 0.
        let g = families::bouquet(2);
        let d = directify(&g).unwrap();
        let w: Word<f64> = reduce(&d, &[Gen::S(0), Gen::SStar(0)]);
        let psi = kms_weight(&d, &w, &2.0, &[1.0]);
        assert_eq!(psi, 0.5);
        let w: Word<f64> = reduce(&d, &[Gen::S(0), Gen::SStar(1)]);
        let psi = kms_weight(&d, &w, &2.0, &[1.0]);
        assert_eq!(psi, 0.0);
        let w: Word<f64> = reduce(&d, &[Gen::P(0)]);
        assert_eq!(kms_weight(&d, &w, &2.0, &[1.0]), 1.0);
    }

    #[test]
    fn defect_projection_is_null_exactly() {
        for n in 1..=5 {
            let g = families::bouquet(n);
            let d = directify(&g).unwrap();
            let q: Word<BigRational> = defect_projection(&d, 0);
            let psi = kms_weight(&d, &q, &ratio(n as i64, 1), &[ratio(1, 1)]);
            assert!(psi.is_zero(), "bouquet {n}");
        }
    }

    #[test]
    fn defect_projection_null_with_fp_weights() {
        for g in families::connected_corpus() {
            let pd = perron_data(&g).unwrap();
            let d = directify(&g).unwrap();
            for v in 0..g.vertex_count() {
                let q: Word<f64> = defect_projection(&d, v);
                let psi = kms_weight(&d, &q, &pd.eigenvalue, &pd.weighting);
                assert!(psi.abs() <= 1e-12, "vertex {v}: {psi}");
            }
        }
    }

    #[test]
    fn kms_residual_vanishes_at_log_lambda() {
        let g = families::path(4);
        let pd = perron_data(&g).unwrap();
        let d = directify(&g).unwrap();
        let beta = pd.eigenvalue.ln();
        let mut gens: Vec<Gen> = Vec::new();
        for i in 0..d.dedges().len() {
            gens.push(Gen::S(i));
            gens.push(Gen::SStar(i));
        }
        for v in 0..d.vertex_count() {
            gens.push(Gen::P(v));
        }
        let mut above_detected = false;
        let mut below_detected = false;
        for &gx in &gens {
            for &gy in &gens {
                let x: Word<f64> = reduce(&d, &[gx]);
                let y: Word<f64> = reduce(&d, &[gy]);
                let r = kms_check(&d, &x, &y, beta, pd.eigenvalue, &pd.weighting).unwrap();
                assert!(r <= 1e-10, "residual {r} at beta = ln lambda");
                if kms_check(&d, &x, &y, beta + 0.1, pd.eigenvalue, &pd.weighting).unwrap() > 1e-3
                {
                    above_detected = true;
                }
                if kms_check(&d, &x, &y, beta - 0.1, pd.eigenvalue, &pd.weighting).unwrap() > 1e-3
                {
                    below_detected = true;
                }
            }
        }
        assert!(above_detected && below_detected, "off-temperature shifts undetected");
    }

    #[test]
    fn exact_kms_on_bouquet() {
        let g = families::bouquet(3);
        let d = directify(&g).unwrap();
        let lambda = ratio(3, 1);
        let mu = [ratio(1, 1)];
        let x: Word<BigRational> = reduce(&d, &[Gen::SStar(0)]);
        let y: Word<BigRational> = reduce(&d, &[Gen::S(0)]);
        let r = kms_check_exact(&d, &x, &y, &lambda, &mu).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn weight_is_positive_on_squares() {
        let g = families::path(4);
        let pd = perron_data(&g).unwrap();
        let d = directify(&g).unwrap();
        let words: Vec<Word<f64>> = vec![
            reduce(&d, &[Gen::S(0)]),
            reduce(&d, &[Gen::S(0), Gen::SStar(0)]),
            reduce::<f64>(&d, &[Gen::S(0), Gen::S(2)]).add(&reduce(&d, &[Gen::P(1)]).scale(&-0.5)),
            defect_projection(&d, 2),
        ];
        for w in words {
            let sq = w.adjoint().mul(&d, &w);
            let psi = kms_weight(&d, &sq, &pd.eigenvalue, &pd.weighting);
            assert!(psi >= -1e-12, "Psi(w* w) = {psi}");
        }
    }

    #[test]
    fn inhomogeneous_extension_rejected() {
        let g = families::bouquet(2);
        let d = directify(&g).unwrap();
        let x: Word<f64> = reduce(&d, &[Gen::P(0)]);
        let y = reduce::<f64>(&d, &[Gen::S(0)]).add(&reduce(&d, &[Gen::P(0)]));
        assert!(matches!(
            kms_check(&d, &x, &y, 1.0, 2.0, &[1.0]),
            Err(Error::InhomogeneousWord)
        ));
    }

    #[test]
    fn symbolic_vacuum_matches_fock_matrix() {
        // Reduce a word symbolically, then compare the coefficient of each
        // vertex projection against the truncated matrix representation.
        let g = families::path(3);
        let pd = perron_data(&g).unwrap();
        let d = directify(&g).unwrap();
        let words: Vec<Vec<Gen>> = vec![
            vec![Gen::SStar(0), Gen::S(0)],
            vec![Gen::S(0), Gen::SStar(0)],
            vec![Gen::P(1)],
            vec![Gen::SStar(1), Gen::P(1), Gen::S(1)],
            vec![Gen::SStar(0), Gen::S(2), Gen::SStar(2), Gen::S(0)],
        ];
        for gens in words {
            let creations = gens
                .iter()
                .filter(|g| matches!(g, Gen::S(_)))
                .count();
            let basis = FockBasis::build(&d, &pd.weighting, creations, DEFAULT_BASIS_CAP).unwrap();
            let factors: Vec<Factor> = gens
                .iter()
                .map(|g| match g {
                    Gen::S(d) => Factor::Create(*d),
                    Gen::SStar(d) => Factor::Annihilate(*d),
                    Gen::P(v) => Factor::VertexProj(*v),
                })
                .collect();
            let matrix = basis.word_matrix(&factors);
            let vac = basis.vacuum_expectation(&matrix);
            let word: Word<f64> = reduce(&d, &gens);
            for (v, &coeff) in vac.iter().enumerate() {
                let sym: f64 = word
                    .terms()
                    .iter()
                    .filter(|(_, t)| *t == Term::vertex_proj(v))
                    .map(|(c, _)| *c)
                    .sum();
                assert!(
                    (sym - coeff).abs() <= 1e-12,
                    "vertex {v}: symbolic {sym} vs matrix {coeff}"
                );
            }
        }
    }

    #[test]
    fn format_round_trip_style() {
        let g = families::path(2);
        let d = directify(&g).unwrap();
        let w: Word<f64> = reduce(&d, &[Gen::S(0), Gen::SStar(0)]);
        let s = format_word(&d, &w);
        assert_eq!(s, "S(e1.f) S*(e1.f)");
        let z: Word<f64> = Word::zero();
        assert_eq!(format_word(&d, &z), "0");
    }
}
