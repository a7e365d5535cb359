use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not symmetric positive definite (smallest eigenvalue {min_eigenvalue:.6e})")]
    NotSpd { min_eigenvalue: f64 },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("singular linear system")]
    Singular,

    #[error("closed loop not Hurwitz: {0}")]
    NotHurwitz(String),

    #[error("degenerate G matrix: rho == mu ({0:.6e})")]
    DegenerateG(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("design error: {0}")]
    Design(String),

    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// Process exit code for the CLI contract
    /// (0 ok / 1 feasibility fail / 2 config / 3 design / 4 simulation).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::OutOfRange(_) | Error::Io { .. } | Error::Json { .. } | Error::Dimension(_) => 2,
            Error::Simulation(_) => 4,
            _ => 3,
        }
    }
}
