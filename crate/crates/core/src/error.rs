use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("order parameter violates the manifold constraint: residual {residual:.3e} exceeds {tolerance:.1e}")]
    ConstraintViolation { residual: f64, tolerance: f64 },

    #[error("non-finite derivative in constitutive evaluation: {entry}")]
    NonFinite { entry: String },

    #[error("Legendre inversion did not converge in {iterations} iterations (residual {residual:.3e}); co-energy may be non-convex")]
    LegendreInversion { iterations: usize, residual: f64 },

    #[error("Legendre inversion failed at node {node}: {source}")]
    NodeInversion {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("model registration rejected: {0}")]
    Registration(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("file not found: {0}")]
    NotFound(String),

    #[error("schema error in {path}: {message}")]
    Schema { path: String, message: String },

    #[error("check `{check}` cannot run: {reason}")]
    Prerequisite { check: String, reason: String },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid symmetry family: {0}")]
    Symmetry(String),

    #[error("unsupported functional: {0}")]
    UnsupportedFunctional(String),

    #[error("caustic: characteristics {a} and {b} meet at t = {t}; shorten the window")]
    Caustic { a: usize, b: usize, t: f64 },

    #[error("unknown model id `{0}`")]
    UnknownModel(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotFound(_) => 3,
            Error::Schema { .. } | Error::Parse(_) => 4,
            Error::UnknownModel(_) => 5,
            Error::Prerequisite { .. } => 6,
            Error::Grid(_) => 7,
            Error::Config(_) | Error::Symmetry(_) | Error::UnsupportedFunctional(_) => 8,
            Error::Io { .. } => 9,
            _ => 10,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
