//! Command-line front end: graph files in, JSON/CSV/DOT reports out.
//!
//! Exit codes: 0 success, 2 validation failure (a report is still
//! emitted), 3 schema violation, 4 resource cap exceeded. All numeric
//! tolerances are compiled into the library; no flag changes them.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use graphcstar::bratteli::{cuntz_core_bratteli, to_dot, toeplitz_core_bratteli, ToeplitzVariant};
use graphcstar::fock::{relation_suite, FockBasis, DEFAULT_BASIS_CAP};
use graphcstar::format::{parse_graph, ReadError};
use graphcstar::graph::{directify, perron_data, validate, UndirectedGraph};
use graphcstar::laws::{
    edge_law, loop_law, vn_structure, EdgeLawParams, Orientation, SpectralLaw,
};
use graphcstar::words::{format_word, kms_check, kms_weight, reduce, Gen, Word};
use graphcstar::Error;

const SCHEMA_VERSION: u32 = 1;

/// Tool, graph-format, and report-schema versions in one line.
const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (graph format v1, report schema v1)"
);

#[derive(Parser)]
#[command(name = "graphcstar", version = VERSION, about = "C*-algebraic invariants of finite weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the primary report here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the directed double of the graph.
    Directify { graph: PathBuf },
    /// Classify the graph: connectivity, excluded cases, matrix shape.
    Validate { graph: PathBuf },
    /// Frobenius-Perron eigenvalue and weighting (normalized at the base vertex).
    Fp { graph: PathBuf },
    /// K-groups of the chosen algebra.
    Ktheory {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Algebra::Ck)]
        algebra: Algebra,
    },
    /// Check the generator relations on the truncated Fock space.
    Verify {
        graph: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Use the Frobenius-Perron weighting instead of file weights.
        #[arg(long)]
        fp: bool,
    },
    /// Weighted trace moments of an edge field, as CSV.
    Moments {
        graph: PathBuf,
        #[arg(long)]
        edge: String,
        #[arg(long)]
        upto: usize,
        #[arg(long)]
        fp: bool,
    },
    /// Spectral law descriptor of an edge field (optionally with density samples).
    Laws {
        graph: PathBuf,
        #[arg(long)]
        edge: String,
        #[arg(long)]
        fp: bool,
        /// Write a 512-point density sample CSV here.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Von Neumann structure report of the free graph algebra.
    Structure {
        graph: PathBuf,
        #[arg(long)]
        fp: bool,
    },
    /// Bratteli diagram of a core.
    Bratteli {
        graph: PathBuf,
        #[arg(long, value_enum)]
        variant: Variant,
        #[arg(long)]
        depth: usize,
        /// Also write a DOT rendering here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Evaluate a word under the KMS weight and check the KMS condition.
    Kms {
        graph: PathBuf,
        #[arg(long)]
        word: String,
        /// Inverse temperature; "auto" means ln(Perron eigenvalue).
        #[arg(long, default_value = "auto")]
        beta: String,
        #[arg(long)]
        fp: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algebra {
    /// Cuntz-Krieger algebra of the directed double.
    Ck,
    /// Free graph algebra.
    Free,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Cuntz,
    Compressed,
    Zero,
}

enum Failure {
    Validation(String),
    Schema(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Schema(_) => 3,
            Failure::Resource(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Validation(_) => "validation",
            Failure::Schema(_) => "schema",
            Failure::Resource(_) => "resource",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Schema(m) | Failure::Resource(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BasisCap { .. } => Failure::Resource(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<ReadError> for Failure {
    fn from(e: ReadError) -> Self {
        match e {
            ReadError::Schema(m) => Failure::Schema(m),
            ReadError::Graph(g) => g.into(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(report) => {
            emit(&cli.output, &report);
            0
        }
        Err(f) => {
            let report = serde_json::json!({
                "error": f.message(),
                "kind": f.kind(),
            });
            emit(&cli.output, &pretty(&report));
            f.code()
        }
    };
    std::process::exit(code);
}

fn emit(target: &Option<PathBuf>, text: &str) {
    match target {
        Some(path) => std::fs::write(path, text).expect("cannot write output file"),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).expect("cannot write stdout");
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn basis_cap() -> usize {
    std::env::var("CSTAR_BASIS_CAP")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_BASIS_CAP)
}

fn load(path: &PathBuf) -> Result<UndirectedGraph, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Schema(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_graph(&text)?)
}

/// File weights, or the FP weighting under --fp; weight-dependent commands
/// reject weightless inputs without the flag.
fn weighting(g: &UndirectedGraph, fp: bool) -> Result<(Vec<f64>, &'static str), Failure> {
    if fp {
        let pd = perron_data(g)?;
        return Ok((pd.weighting, "frobenius_perron"));
    }
    match g.weights() {
        Some(w) => Ok((w.to_vec(), "file")),
        None => Err(Error::MissingWeights.into()),
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Directify { graph } => {
            let g = load(graph)?;
            let d = directify(&g)?;
            #[derive(Serialize)]
            struct DedgeOut<'a> {
                id: &'a str,
                source: &'a str,
                target: &'a str,
                op: &'a str,
                origin: &'a str,
            }
            let dedges: Vec<DedgeOut> = d
                .dedges()
                .iter()
                .map(|e| DedgeOut {
                    id: &e.id,
                    source: &d.vertex_ids()[e.source],
                    target: &d.vertex_ids()[e.target],
                    op: &d.dedges()[e.op].id,
                    origin: &g.edges()[e.origin].id,
                })
                .collect();
            Ok(pretty(&serde_json::json!({
                "version": SCHEMA_VERSION,
                "vertices": d.vertex_ids(),
                "dedges": dedges,
            })))
        }
        Command::Validate { graph } => {
            let g = load(graph)?;
            let c = validate(&g)?;
            Ok(pretty(&serde_json::json!({
                "version": SCHEMA_VERSION,
                "connected": c.connected,
                "locally_finite": c.locally_finite,
                "strongly_connected_double": c.strongly_connected_double,
                "edge_matrix_is_permutation": c.edge_matrix_is_permutation,
                "excluded_case": c.excluded_case,
            })))
        }
        Command::Fp { graph } => {
            let g = load(graph)?;
            let pd = perron_data(&g)?;
            let weighting: Vec<_> = g
                .vertex_ids()
                .iter()
                .zip(&pd.weighting)
                .map(|(id, w)| serde_json::json!({"id": id, "weight": w}))
                .collect();
            Ok(pretty(&serde_json::json!({
                "version": SCHEMA_VERSION,
                "eigenvalue": pd.eigenvalue,
                "weighting": weighting,
                "max_residual": pd.max_residual,
                "iterations": pd.iterations,
            })))
        }
        Command::Ktheory { graph, algebra } => {
            let g = load(graph)?;
            let (name, kt, warning) = match algebra {
                Algebra::Ck => {
                    let c = validate(&g)?;
                    let warning = match c.excluded_case {
                        graphcstar::ExcludedCase::None => None,
                        other => Some(format!(
                            "excluded case {other:?}: the standard K-theory hypotheses fail; groups are formulaic"
                        )),
                    };
                    ("cuntz_krieger", graphcstar::k_theory_cuntz_krieger(&g)?, warning)
                }
                Algebra::Free => ("free_graph", graphcstar::k_theory_free_graph(&g), None),
            };
            let mut body = serde_json::json!({
                "version": SCHEMA_VERSION,
                "algebra": name,
                "k0": kt.k0,
                "k1": kt.k1,
            });
            if let Some(u) = kt.unit_class {
                body["unit_class"] = serde_json::to_value(u).expect("serializes");
            }
            if let Some(w) = warning {
                body["warning"] = serde_json::Value::String(w);
            }
            Ok(pretty(&body))
        }
        Command::Verify { graph, depth, fp } => {
            let g = load(graph)?;
            let (w, source) = weighting(&g, *fp)?;
            let d = directify(&g)?;
            let basis = FockBasis::build(&d, &w, *depth, basis_cap())?;
            let checks = relation_suite(&basis);
            let all_pass = checks.iter().all(|c| c.pass);
            let report = pretty(&serde_json::json!({
                "version": SCHEMA_VERSION,
                "depth": depth,
                "basis_size": basis.len(),
                "weighting": source,
                "checks": checks,
                "all_pass": all_pass,
            }));
            if all_pass {
                Ok(report)
            } else {
                emit(&cli.output, &report);
                Err(Failure::Validation("relation checks failed".into()))
            }
        }
        Command::Moments { graph, edge, upto, fp } => {
            let g = load(graph)?;
            let (w, _) = weighting(&g, *fp)?;
            let e = g.edge_index(edge)?;
            let d = directify(&g)?;
            let values = graphcstar::fock::edge_moments(&d, &w, e, *upto, basis_cap())?;
            let mut csv = String::from("n,moment\n");
            for (n, v) in values.iter().enumerate() {
                csv.push_str(&format!("{n},{v}\n"));
            }
            Ok(csv)
        }
        Command::Laws { graph, edge, fp, samples } => {
            let g = load(graph)?;
            let (w, _) = weighting(&g, *fp)?;
            let e = g.edge_index(edge)?;
            let chosen = g.edges()[e].clone();
            let (body, sample_law) = if chosen.is_loop() {
                let law = loop_law(w[chosen.ends.0]);
                (
                    serde_json::json!({
                        "version": SCHEMA_VERSION,
                        "edge": chosen.id,
                        "case": "loop",
                        "loop": law,
                    }),
                    law,
                )
            } else {
                let params = EdgeLawParams::new(w[chosen.ends.0], w[chosen.ends.1]);
                let fwd = edge_law(&params, Orientation::Forward);
                let bwd = edge_law(&params, Orientation::Backward);
                let sample = fwd.clone();
                (
                    serde_json::json!({
                        "version": SCHEMA_VERSION,
                        "edge": chosen.id,
                        "case": "edge",
                        "params": params,
                        "forward": fwd,
                        "backward": bwd,
                    }),
                    sample,
                )
            };
            if let Some(path) = samples {
                std::fs::write(path, density_samples(&sample_law))
                    .expect("cannot write samples file");
            }
            Ok(pretty(&body))
        }
        Command::Structure { graph, fp } => {
            let g = load(graph)?;
            let (w, source) = weighting(&g, *fp)?;
            let rep = vn_structure(&g, &w);
            let mut body = serde_json::to_value(&rep).expect("serializes");
            body["version"] = serde_json::json!(SCHEMA_VERSION);
            body["weighting"] = serde_json::json!(source);
            Ok(pretty(&body))
        }
        Command::Bratteli { graph, variant, depth, dot } => {
            let g = load(graph)?;
            let diagram = match variant {
                Variant::Cuntz => cuntz_core_bratteli(&g, *depth)?,
                Variant::Compressed => {
                    toeplitz_core_bratteli(&g, *depth, ToeplitzVariant::Compressed)?
                }
                Variant::Zero => toeplitz_core_bratteli(&g, *depth, ToeplitzVariant::Zero)?,
            };
            if let Some(path) = dot {
                std::fs::write(path, to_dot(&diagram)).expect("cannot write dot file");
            }
            let mut body = serde_json::to_value(&diagram).expect("serializes");
            body["version"] = serde_json::json!(SCHEMA_VERSION);
            Ok(pretty(&body))
        }
        Command::Kms { graph, word, beta, fp } => {
            let g = load(graph)?;
            let (w, source) = weighting(&g, *fp)?;
            let d = directify(&g)?;
            let pd = perron_data(&g)?;
            let lambda = pd.eigenvalue;
            let beta_value = if beta == "auto" {
                lambda.ln()
            } else {
                beta.parse::<f64>()
                    .map_err(|_| Failure::Validation(format!("cannot parse beta `{beta}`")))?
            };
            let parsed = parse_word(&d, word)?;
            let value = kms_weight(&d, &parsed, &lambda, &w);
            let grade = parsed.grade();

            // KMS condition over all generator pairs at this beta, plus the
            // defect projections, which are null for the FP weighting.
            let mut gens: Vec<Gen> = Vec::new();
            for i in 0..d.dedges().len() {
                gens.push(Gen::S(i));
                gens.push(Gen::SStar(i));
            }
            for v in 0..d.vertex_count() {
                gens.push(Gen::P(v));
            }
            let mut max_residual = 0.0f64;
            let mut pairs = 0usize;
            for &gx in &gens {
                for &gy in &gens {
                    let x: Word<f64> = reduce(&d, &[gx]);
                    let y: Word<f64> = reduce(&d, &[gy]);
                    let r = kms_check(&d, &x, &y, beta_value, lambda, &w)
                        .map_err(|e| Failure::Validation(e.to_string()))?;
                    max_residual = max_residual.max(r);
                    pairs += 1;
                }
            }
            let defect_max = (0..d.vertex_count())
                .map(|v| {
                    let q: Word<f64> = graphcstar::words::defect_projection(&d, v);
                    kms_weight(&d, &q, &lambda, &w).abs()
                })
                .fold(0.0f64, f64::max);

            let mut body = serde_json::json!({
                "version": SCHEMA_VERSION,
                "word": format_word(&d, &parsed),
                "grade": grade,
                "value": value,
                "beta": beta_value,
                "lambda": lambda,
                "weighting": source,
                "kms_pairs_checked": pairs,
                "kms_max_residual": max_residual,
                "defect_weight_max": defect_max,
            });
            if fp_residual(&g, &w) > 1e-8 {
                body["warning"] = serde_json::json!(
                    "weighting does not satisfy the Frobenius-Perron condition; KMS residuals are expected to be positive"
                );
            }
            Ok(pretty(&body))
        }
    }
}

/// Relative failure of the eigenvector equation for the given weighting,
/// against the best-fitting eigenvalue.
fn fp_residual(g: &UndirectedGraph, w: &[f64]) -> f64 {
    let m = g.multiplicity_matrix();
    let n = g.vertex_count();
    let image: Vec<f64> = (0..n)
        .map(|p| (0..n).map(|q| m[p][q] as f64 * w[q]).sum())
        .collect();
    let num: f64 = image.iter().zip(w).map(|(a, b)| a * b).sum();
    let den: f64 = w.iter().map(|x| x * x).sum();
    let delta = num / den;
    (0..n)
        .map(|p| (delta * w[p] - image[p]).abs() / (delta * w[p]).abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

fn density_samples(law: &SpectralLaw) -> String {
    let (lo, hi) = law.support;
    let mut csv = String::from("x,density\n");
    for i in 0..512 {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / 512.0;
        csv.push_str(&format!("{x},{}\n", law.density(x)));
    }
    csv
}

/// Grammar: sum of terms joined by `+`; a term is an optional scalar
/// prefix followed by juxtaposed factors `S(id)`, `S*(id)`, `P(id)`.
fn parse_word(d: &graphcstar::DirectedGraph, text: &str) -> Result<Word<f64>, Failure> {
    let mut terms: Vec<Word<f64>> = Vec::new();
    for chunk in text.split('+') {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            return Err(Failure::Validation("empty term in word".into()));
        }
        let (coeff, rest) = split_scalar(chunk);
        let gens = parse_factors(d, rest)?;
        let word: Word<f64> = reduce(d, &gens);
        terms.push(word.scale(&coeff));
    }
    Ok(terms.into_iter().fold(Word::zero(), |acc, w| acc.add(&w)))
}

fn split_scalar(chunk: &str) -> (f64, &str) {
    let trimmed = chunk.trim_start();
    let end = trimmed
        .find(|c: char| !(c.is_ascii_digit() || "+-.eE".contains(c)))
        .unwrap_or(trimmed.len());
    if end == 0 {
        return (1.0, trimmed);
    }
    match trimmed[..end].parse::<f64>() {
        Ok(c) => (c, trimmed[end..].trim_start()),
        Err(_) => (1.0, trimmed),
    }
}

fn parse_factors(d: &graphcstar::DirectedGraph, text: &str) -> Result<Vec<Gen>, Failure> {
    let mut gens = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let (head, kind) = if let Some(r) = rest.strip_prefix("S*(") {
            (r, 's')
        } else if let Some(r) = rest.strip_prefix("S(") {
            (r, 'S')
        } else if let Some(r) = rest.strip_prefix("P(") {
            (r, 'P')
        } else {
            return Err(Failure::Validation(format!(
                "cannot parse word near `{rest}`: expected S(id), S*(id) or P(id)"
            )));
        };
        let close = head.find(')').ok_or_else(|| {
            Failure::Validation(format!("unclosed parenthesis near `{rest}`"))
        })?;
        let id = head[..close].trim();
        let gen = match kind {
            'S' => Gen::S(d.dedge_index(id).map_err(Failure::from)?),
            's' => Gen::SStar(d.dedge_index(id).map_err(Failure::from)?),
            _ => {
                let v = d
                    .vertex_ids()
                    .iter()
                    .position(|x| x == id)
                    .ok_or_else(|| Failure::from(Error::UnknownVertex(id.to_string())))?;
                Gen::P(v)
            }
        };
        gens.push(gen);
        rest = head[close + 1..].trim_start();
    }
    Ok(gens)
}
