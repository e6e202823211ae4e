use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("field and basis live on incompatible grids")]
    GridMismatch,

    #[error("grid too large for dense path: {nodes} nodes (limit {limit})")]
    TooLarge { nodes: usize, limit: usize },

    #[error("operator requires a {expected} grid, found {found}")]
    WrongBoundary {
        expected: crate::grid::BoundaryCondition,
        found: crate::grid::BoundaryCondition,
    },

    #[error("vanishing average: min |V[v]| = {min_abs} <= floor {floor}")]
    VanishingAverage { min_abs: f64, floor: f64 },

    #[error("iterate left the ball: norm {norm} > radius {radius}")]
    LeftBall { norm: f64, radius: f64 },

    #[error("Gaussian width lost positivity: Re a = {re_a} at t = {t}")]
    WidthLost { re_a: f64, t: f64 },

    #[error("window too small: {found} nodes (need at least {needed})")]
    WindowTooSmall { found: usize, needed: usize },

    #[error("{0}")]
    Numerical(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
