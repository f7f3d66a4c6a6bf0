use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid point ({birth}, {death}): {reason}")]
    InvalidPoint {
        birth: f64,
        death: f64,
        reason: &'static str,
    },

    #[error("non-finite input value {0}")]
    NonFinite(f64),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("all vertices coincide with the center")]
    ZeroSpread,

    #[error("axis vector is undefined (norm {norm:e} below {tolerance:e})")]
    DegenerateAxis { norm: f64, tolerance: f64 },

    #[error("vertex function has {values} values but mesh has {vertices} vertices")]
    FunctionLength { values: usize, vertices: usize },

    #[error("levels out of order: u = {u} > v = {v}")]
    LevelOrder { u: f64, v: f64 },

    #[error("epsilon {eps} does not isolate ({u}, {v}) among the function values")]
    EpsilonTooLarge { u: f64, v: f64, eps: f64 },

    #[error("padding width {target} is smaller than root list width {width}")]
    PaddingTooSmall { width: usize, target: usize },

    #[error("k = {k} out of range 1..={width}")]
    KOutOfRange { k: usize, width: usize },

    #[error("coefficient c_{index} is not finite (overflow)")]
    CoefficientOverflow { index: usize },

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("brute-force bottleneck is capped at {cap} points, got {total}")]
    OracleCap { total: u64, cap: u64 },

    #[error("unknown id {0:?}")]
    UnknownId(String),

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("invalid id {0:?}")]
    InvalidId(String),

    #[error("class {0:?} has a single member")]
    SingletonClass(String),

    #[error("need at least two classes, got {0}")]
    TooFewClasses(usize),

    #[error("{0}")]
    Index(String),

    #[error("missing embedding for {0:?}")]
    MissingEmbedding(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
