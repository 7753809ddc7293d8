use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("field shape does not match grid: {0}")]
    Shape(String),
    #[error("non-finite value in {what} at cell {index}")]
    NonFinite { what: String, index: usize },
    #[error("operator arity mismatch: {0}")]
    Arity(String),
    #[error("thermodynamic domain error: {0}")]
    Domain(String),
    #[error("non-positive density {value} at cell {index} (position {position:?})")]
    NonPositiveDensity {
        value: f64,
        index: usize,
        position: [f64; 3],
    },
    #[error("instability: L-inf of {field} grew from {before:e} to {after:e} in one step")]
    Instability {
        field: String,
        before: f64,
        after: f64,
    },
    #[error("time step {dt} exceeds the stable limit {limit}")]
    Unstable { dt: f64, limit: f64 },
    #[error("map folding: J = {jacobian} at label {index}")]
    Folding { jacobian: f64, index: usize },
    #[error("generator and state disagree: {0}")]
    LabelMismatch(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("singular foliation: Jacobian {det} at label {index}")]
    SingularFoliation { det: f64, index: usize },
    #[error("insufficient time levels: {0}")]
    TimeLevels(String),
    #[error("map and state are not synchronized (map t = {map_t}, state t = {state_t})")]
    Desynchronized { map_t: f64, state_t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
