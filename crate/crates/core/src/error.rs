use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("x′ = {x} exceeds the neck chart |x′| ≤ {limit}")]
    ChartExceeded { x: f64, limit: f64 },
    #[error("point lies outside the gap at x′ = {x}")]
    OutOfGap { x: f64 },
    #[error("operation requires a {expected} profile")]
    WrongKind { expected: &'static str },
    #[error("matrix argument is not symmetric")]
    NotSymmetric,
    #[error("meshing failed in {region}: {reason}")]
    Meshing { region: String, reason: String },
    #[error("mesh parse error at line {line}: {reason}")]
    MeshParse { line: usize, reason: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("point ({x}, {y}) is outside the meshed domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("selected region contains no sample points")]
    EmptyRegion,
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error("linear system is singular or indefinite (diagonal ratio estimate {condition_estimate:.3e})")]
    Singular { condition_estimate: f64 },
    #[error("solver did not converge: {iterations} iterations, relative residual {residual:.3e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("quadrature did not converge: estimated error {error:.3e} on [{a}, {b}]")]
    Quadrature { error: f64, a: f64, b: f64 },
    #[error("symmetry defect {defect:.3e} exceeds tolerance")]
    Asymmetric { defect: f64 },
    #[error("fit needs at least 4 samples, got {0}")]
    TooFewSamples(usize),
    #[error("fit requires positive values, got {0}")]
    NonPositive(f64),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
