use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma pole at non-positive integer {0}")]
    Pole(f64),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("tangential contact at t = {t} (|d.grad f| / |grad f| = {cosine:e})")]
    TangencyDetected { t: f64, cosine: f64 },
    #[error("segment endpoint lies on the surface")]
    EndpointOnSurface,
    #[error("point is not on the surface (residual {0:e})")]
    PointNotOnSurface(f64),
    #[error("projection onto the tangent plane is degenerate (rho = {0:e})")]
    DegenerateProjection(f64),
    #[error("principal-value divergence did not cancel (residual coefficient {0:e})")]
    CancellationFailure(f64),
    #[error("near-singular refinement exceeded depth {0}")]
    NearSingularityUnresolved(usize),
    #[error("representation unavailable: {0}")]
    RepresentationUnavailable(String),
    #[error("sigma -> 1 extrapolation did not converge (successive estimates {0} and {1})")]
    NonConvergent(f64, f64),
    #[error("unsupported field decay: {0}")]
    UnsupportedDecay(String),
    #[error("field does not decay at the box boundary (ratio {0:e})")]
    PeriodizationError(f64),
    #[error("quadrature budget exceeded: {0}")]
    QuadBudgetExceeded(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
