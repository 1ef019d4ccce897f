use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("boundary polyline self-intersects")]
    SelfIntersecting,
    #[error("outer parallel curve at t = {t} is not a simple closed curve ({components} components)")]
    NotSimple { t: f64, components: usize },
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("argument {0} outside the representable range")]
    OverflowRange(f64),
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
    #[error("mesh size too large: only {nodes} boundary nodes (need at least 16)")]
    MeshTooCoarse { nodes: usize },
    #[error("mesh boundary is not a single closed cycle")]
    DisconnectedBoundary,
    #[error("linear solver failure: {0}")]
    SolverFailure(String),
    #[error("level {0} degenerate after perturbation")]
    DegenerateLevel(f64),
    #[error("distribution function is not strictly decreasing; refine the mesh")]
    NonMonotoneMu,
    #[error("weight {value} at a = {a} is below 4π beyond mesh tolerance")]
    WeightBelowBound { a: f64, value: f64 },
    #[error("eigensolver stagnated after {iterations} iterations (residual {residual:e})")]
    EigensolverStagnation { iterations: usize, residual: f64 },
    #[error("routes disagree: {first} vs {second} (relative gap {gap:e})")]
    RouteMismatch { first: f64, second: f64, gap: f64 },
    #[error("quadratic form is not positive (b = {0})")]
    NonPositiveForm(f64),
    #[error("weight order violated: G1 <= G0 at a = {0}")]
    WeightOrderViolation(f64),
    #[error("root bracket failure: {0}")]
    BracketFailure(String),
    #[error("field strength outside the guarded regime: {0}")]
    RegimeViolation(String),
    #[error("torsion gauge requested but no torsion field supplied")]
    MissingTorsionField,
    #[error("interior block is not positive definite")]
    InteriorSolveFailure,
    #[error("radial truncation inadequate: {0}")]
    TruncationInadequate(String),
    #[error("domain violates the exterior comparison hypotheses: {0}")]
    HypothesisViolation(String),
    #[error("inequality chain violated: {0}")]
    ChainViolation(String),
    #[error("scan grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
