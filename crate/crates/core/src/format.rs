//! The versioned graph file format: a JSON document carrying vertices with
//! optional weights, an optional base vertex, and edges as unordered
//! endpoint pairs. Schema problems (malformed JSON, wrong shapes, unknown
//! version) are reported separately from graph-level validation failures
//! so the front end can map them to different exit codes.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::UndirectedGraph;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub version: u32,
    pub vertices: Vec<VertexSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_vertex: Option<String>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub ends: [String; 2],
}

/// What went wrong while reading a graph file.
#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    /// The document does not match the schema; carries serde's
    /// line/column diagnostics.
    #[error("schema violation: {0}")]
    Schema(String),
    /// The document parses but the graph it describes is ill-formed.
    #[error(transparent)]
    Graph(#[from] Error),
}

pub fn parse_graph(text: &str) -> Result<UndirectedGraph, ReadError> {
    let file: GraphFile = serde_json::from_str(text)
        .map_err(|e| ReadError::Schema(format!("{e} (line {}, column {})", e.line(), e.column())))?;
    if file.version != FORMAT_VERSION {
        return Err(ReadError::Schema(format!(
            "unsupported version {} (expected {FORMAT_VERSION})",
            file.version
        )));
    }
    graph_from_file(&file).map_err(ReadError::Graph)
}

pub fn graph_from_file(file: &GraphFile) -> Result<UndirectedGraph, Error> {
    let with_weight = file.vertices.iter().filter(|v| v.weight.is_some()).count();
    let weights = if with_weight == 0 {
        None
    } else {
        if with_weight < file.vertices.len() {
            let missing = file
                .vertices
                .iter()
                .find(|v| v.weight.is_none())
                .expect("some vertex lacks a weight");
            return Err(Error::PartialWeights(missing.id.clone()));
        }
        Some(
            file.vertices
                .iter()
                .map(|v| (v.id.clone(), v.weight.expect("checked above")))
                .collect::<HashMap<_, _>>(),
        )
    };
    UndirectedGraph::new(
        file.vertices.iter().map(|v| v.id.clone()).collect(),
        file.base_vertex.as_deref(),
        file.edges
            .iter()
            .map(|e| (e.id.clone(), e.ends[0].clone(), e.ends[1].clone()))
            .collect(),
        weights,
    )
}

/// Re-emits a graph in the file format (weights included when present).
pub fn graph_to_file(g: &UndirectedGraph) -> GraphFile {
    GraphFile {
        version: FORMAT_VERSION,
        vertices: g
            .vertex_ids()
            .iter()
            .enumerate()
            .map(|(i, id)| VertexSpec {
                id: id.clone(),
                weight: g.weights().map(|w| w[i]),
            })
            .collect(),
        base_vertex: Some(g.vertex_ids()[g.base()].clone()),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeSpec {
                id: e.id.clone(),
                ends: [
                    g.vertex_id(e.ends.0).to_string(),
                    g.vertex_id(e.ends.1).to_string(),
                ],
            })
            .collect(),
    }
}
