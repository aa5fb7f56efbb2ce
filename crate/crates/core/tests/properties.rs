//! Property tests for the structural invariants: the double construction
//! is a section of direction-forgetting, the Smith form is a verified
//! decomposition, matrix row sums count degrees, and the Perron data is
//! stable under an independent iteration route.

use std::collections::HashMap;

use num::{One, Signed, Zero};
use proptest::prelude::*;

use graphcstar::families;
use graphcstar::fock::{FockBasis, DEFAULT_BASIS_CAP};
use graphcstar::graph::{directify, perron_with_shift, structure_set, UndirectedGraph};
use graphcstar::intmat::{smith_normal_form, IntMatrix};
use graphcstar::words::{kms_weight, reduce, signed_creation_count, Gen, Word};

fn arb_multigraph() -> impl Strategy<Value = UndirectedGraph> {
    (1usize..=6).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..10).prop_map(move |pairs| {
            let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let edges = pairs
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| (format!("e{k}"), format!("v{a}"), format!("v{b}")))
                .collect();
            UndirectedGraph::new(vertices, None, edges, None).expect("well-formed")
        })
    })
}

fn arb_matrix() -> impl Strategy<Value = IntMatrix> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-9i64..=9, r * c)
            .prop_map(move |data| IntMatrix::from_i64(r, c, &data))
    })
}

proptest! {
    #[test]
    fn forgetting_directions_recovers_the_graph(g in arb_multigraph()) {
        let d = directify(&g).unwrap();
        let loops = g.edges().iter().filter(|e| e.is_loop()).count();
        let nonloops = g.edges().len() - loops;
        prop_assert_eq!(d.dedges().len(), loops + 2 * nonloops);

        // Merge op-pairs back into undirected edges and compare.
        let mut by_origin: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, de) in d.dedges().iter().enumerate() {
            by_origin.entry(de.origin).or_default().push(i);
        }
        prop_assert_eq!(by_origin.len(), g.edges().len(), "origin map must be onto");
        for (origin, members) in by_origin {
            let e = &g.edges()[origin];
            if e.is_loop() {
                prop_assert_eq!(members.len(), 1);
                let de = &d.dedges()[members[0]];
                prop_assert_eq!(de.op, members[0]);
                prop_assert_eq!((de.source, de.target), (e.ends.0, e.ends.0));
            } else {
                prop_assert_eq!(members.len(), 2);
                let (x, y) = (&d.dedges()[members[0]], &d.dedges()[members[1]]);
                prop_assert_eq!(x.op, members[1]);
                prop_assert_eq!(y.op, members[0]);
                prop_assert_eq!((x.source, x.target), (y.target, y.source));
                let pair = if x.source == e.ends.0 { (x.source, x.target) } else { (x.target, x.source) };
                prop_assert_eq!(pair, e.ends);
            }
        }
    }

    #[test]
    fn smith_form_is_a_verified_decomposition(m in arb_matrix()) {
        // The call itself recomputes u*m*v and both determinants; surviving
        // it is most of the assertion.
        let snf = smith_normal_form(&m);
        prop_assert!(snf.u.det().abs().is_one());
        prop_assert!(snf.v.det().abs().is_one());
        let diag = snf.diagonal();
        for w in diag.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
            prop_assert!(w[0] >= num::BigInt::from(1));
        }
    }

    #[test]
    fn matrix_row_sums_count_out_degrees(g in arb_multigraph()) {
        let d = directify(&g).unwrap();
        let a = d.edge_matrix();
        for (i, de) in d.dedges().iter().enumerate() {
            let row_sum: num::BigInt = (0..a.cols()).map(|j| a[(i, j)].clone()).sum();
            prop_assert_eq!(row_sum, num::BigInt::from(d.out_degree(de.target)));
        }
        let b = d.vertex_matrix();
        for v in 0..d.vertex_count() {
            let row_sum: num::BigInt = (0..b.cols()).map(|j| b[(v, j)].clone()).sum();
            prop_assert_eq!(row_sum, num::BigInt::from(d.out_degree(v)));
        }
    }

    #[test]
    fn perron_routes_agree(seed in 1u64..500) {
        let g = families::random_multigraph(seed);
        let first = perron_with_shift(&g, 1.0).unwrap();
        let second = perron_with_shift(&g, 0.5).unwrap();
        let scale = first.eigenvalue.abs().max(1e-3);
        prop_assert!(
            (first.eigenvalue - second.eigenvalue).abs() <= 1e-10 * scale,
            "{} vs {}", first.eigenvalue, second.eigenvalue
        );
        prop_assert!(first.max_residual <= 1e-10);
        // FP weighting always empties the A set.
        let s = structure_set(&g, &first.weighting);
        prop_assert!(s.a_set.is_empty());
    }

    #[test]
    fn adjoints_are_adjoint(seed in 1u64..100) {
        let g = families::random_multigraph(seed);
        if g.edges().is_empty() {
            return Ok(());
        }
        let d = directify(&g).unwrap();
        let w: Vec<f64> = (0..g.vertex_count()).map(|i| 1.0 + i as f64 * 0.37).collect();
        let basis = FockBasis::build(&d, &w, 2, DEFAULT_BASIS_CAP).unwrap();
        for e in 0..d.dedges().len().min(4) {
            let s = basis.creation(e);
            let sstar = basis.adjoint(&s);
            for &(i, j, v) in s.entries() {
                let lhs = v * basis.path_weight(i as usize);
                let rhs = sstar.get(j, i) * basis.path_weight(j as usize);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
            }
            // Double adjoint returns the original exactly.
            let back = basis.adjoint(&sstar);
            prop_assert!(s.max_abs_diff(&back) <= 1e-12);
        }
    }

    #[test]
    fn reduction_is_gauge_equivariant(seed in 1u64..200, picks in proptest::collection::vec((0usize..12, 0u8..3), 1..6)) {
        let g = families::random_multigraph(seed);
        if g.edges().is_empty() {
            return Ok(());
        }
        let d = directify(&g).unwrap();
        let gens: Vec<Gen> = picks
            .iter()
            .map(|&(i, kind)| match kind {
                0 => Gen::S(i % d.dedges().len()),
                1 => Gen::SStar(i % d.dedges().len()),
                _ => Gen::P(i % d.vertex_count()),
            })
            .collect();
        let w: Word<f64> = reduce(&d, &gens);
        if !w.is_zero() {
            prop_assert_eq!(w.grade(), Some(signed_creation_count(&gens)));
        }
        // Positivity of the weight on squares, with the FP data.
        let pd = perron_with_shift(&g, 1.0).unwrap();
        let sq = w.adjoint().mul(&d, &w);
        let psi = kms_weight(&d, &sq, &pd.eigenvalue, &pd.weighting);
        prop_assert!(psi >= -1e-12);
    }
}

/// Corpus-wide agreement between the truncated-representation moments and
/// the closed-form recursion, at the Frobenius-Perron weighting of each
/// graph (so the mass ratios are generically irrational).
#[test]
fn corpus_half_field_moments_match_recursion() {
    use graphcstar::laws::moment_recursion;
    for g in families::connected_corpus() {
        let pd = perron_with_shift(&g, 1.0).unwrap();
        let d = directify(&g).unwrap();
        let basis = FockBasis::build(&d, &pd.weighting, 4, DEFAULT_BASIS_CAP).unwrap();
        for edge in 0..g.edges().len().min(3) {
            if g.edges()[edge].is_loop() {
                continue;
            }
            let (fwd, _) = basis.directions_of(edge);
            let de = &d.dedges()[fwd];
            let a_sq = (pd.weighting[de.source] / pd.weighting[de.target]).sqrt();
            let rec = moment_recursion(a_sq, 4);
            let h = basis.half_field_op(fwd);
            let hs = basis.adjoint(&h);
            let hh = hs.mul(&h);
            let mut power = graphcstar::fock::SparseOperator::identity(basis.len());
            for n in 1..=4usize {
                power = power.mul(&hh);
                let got = basis.vacuum_expectation(&power)[de.target];
                let want = rec.forward[n];
                assert!(
                    (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                    "edge {edge} n={n} on {:?}: {got} vs {want}",
                    g.vertex_ids()
                );
            }
        }
    }
}

/// Perron data on the named corpus: residual bound and agreement of the
/// two iteration routes.
#[test]
fn corpus_perron_residuals() {
    use graphcstar::graph::{validate, ExcludedCase};
    for g in families::connected_corpus() {
        let a = perron_with_shift(&g, 1.0).unwrap();
        let b = perron_with_shift(&g, 0.5).unwrap();
        assert!(a.max_residual <= 1e-10, "residual on {:?}", g.vertex_ids());
        assert!(
            (a.eigenvalue - b.eigenvalue).abs() <= 1e-10 * a.eigenvalue.max(1e-3),
            "routes disagree on {:?}",
            g.vertex_ids()
        );
        // Outside the two flagged degenerate graphs the eigenvalue
        // strictly exceeds one.
        let c = validate(&g).unwrap();
        if c.excluded_case == ExcludedCase::None {
            assert!(a.eigenvalue > 1.0, "eigenvalue {} on {:?}", a.eigenvalue, g.vertex_ids());
        } else {
            assert!((a.eigenvalue - 1.0).abs() < 1e-10);
        }
    }
}
