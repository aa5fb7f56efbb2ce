//! Canonical C*-algebraic data of finite weighted undirected graphs.
//!
//! The pipeline starts from a weighted multigraph, forms its directed
//! double, and computes: K-groups through exact Smith normal forms, a
//! truncated path-space representation of the Toeplitz graph algebra with
//! verifiable generator relations, the spectral laws and von Neumann
//! structure of the free graph algebra, KMS weights at the Perron
//! temperature, and Bratteli diagrams of the gauge-invariant cores.

pub mod bratteli;
pub mod error;
pub mod families;
pub mod fock;
pub mod format;
pub mod graph;
pub mod intmat;
pub mod ktheory;
pub mod laws;
pub mod words;

pub use error::{Error, Result};
pub use graph::{
    directify, perron_data, structure_set, validate, DirectedGraph, ExcludedCase,
    GraphClassification, PerronData, StructureSet, UndirectedGraph,
};
pub use intmat::{smith_normal_form, IntMatrix, Snf};
pub use ktheory::{k_theory_cuntz_krieger, k_theory_free_graph, AbelianGroup, KTheory};
