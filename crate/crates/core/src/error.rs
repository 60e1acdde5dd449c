use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("field is degenerate for this tensor: splitting vanishes and the quantization axis is undefined")]
    DegenerateField,

    #[error("ground and excited splittings coincide ({0} MHz): hole and antihole positions collide")]
    DegenerateSplittings(f64),

    #[error("optical density {0} is outside the thin-sample nutation model (D < 0.5)")]
    ModelValidity(f64),

    #[error("weak transition is forbidden (R = 0)")]
    ForbiddenTransition,

    #[error("invalid site frame set: {0}")]
    InvalidFrame(String),

    #[error("inconsistent data: {0}")]
    InconsistentData(String),

    #[error("fit did not converge after {iterations} evaluations: {reason}")]
    NonConvergence { iterations: usize, reason: String },

    #[error("no bracketing interval: {0}")]
    NoBracket(String),

    #[error("ambiguous solution: {0} intersections found")]
    AmbiguousIntersection(usize),

    #[error("root search failed: {0}")]
    RootSearch(String),

    #[error("configuration error: {0}")]
    Config(String),
}
