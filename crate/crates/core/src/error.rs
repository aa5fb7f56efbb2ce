use thiserror::Error;

/// Errors shared by all graph-algebra computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),

    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),

    #[error("duplicate directed edge id `{0}` (rename the colliding undirected edges)")]
    DuplicateDedge(String),

    #[error("edge `{edge}` references undeclared vertex `{vertex}`")]
    DanglingEndpoint { edge: String, vertex: String },

    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),

    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),

    #[error("unknown directed edge id `{0}`")]
    UnknownDedge(String),

    #[error("base vertex `{0}` is not a declared vertex")]
    UnknownBaseVertex(String),

    #[error("weight of vertex `{0}` must be strictly positive and finite")]
    BadWeight(String),

    #[error("vertex `{0}` has no weight; weight all vertices or none")]
    PartialWeights(String),

    #[error("graph carries no weighting; supply per-vertex weights or request the Frobenius-Perron weighting")]
    MissingWeights,

    #[error("graph is disconnected; the Perron eigenvector is not unique up to scale")]
    Disconnected,

    #[error("graph has no vertices")]
    Empty,

    #[error("Perron iteration did not converge within {max_iter} iterations")]
    PerronNoConvergence { max_iter: usize },

    #[error("Fock basis with depth cap {depth} needs {needed} paths, over the cap of {cap}")]
    BasisCap { depth: usize, needed: usize, cap: usize },

    #[error("word needs truncation depth {required}, the basis only has depth {available}")]
    DepthInsufficient { required: usize, available: usize },

    #[error("quadrature did not converge; achieved estimate {estimate} with error ~{error}")]
    QuadratureNoConvergence { estimate: f64, error: f64 },

    #[error("Cauchy transform branch selection failed at z = {re}+{im}i; both roots violate the Herglotz property")]
    BranchSelection { re: f64, im: f64 },

    #[error("Cauchy transform requires Im(z) > 0, got {0}")]
    LowerHalfPlane(f64),

    #[error("word is not gauge-homogeneous; the analytic extension is only defined on homogeneous elements")]
    InhomogeneousWord,

    #[error("dimension overflow at level {level} of the Bratteli diagram")]
    DimOverflow { level: usize },

    #[error("invariant factor does not fit in 64 bits")]
    FactorOverflow,

    #[error("cannot parse word: {0}")]
    WordSyntax(String),
}

pub type Result<T> = std::result::Result<T, Error>;
