use std::path::PathBuf;

/// Errors raised across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument outside the domain of a closed form or formulation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A function representation violated its class invariants.
    #[error("invalid function at index {index}: {reason}")]
    Construction { index: usize, reason: String },

    /// An integral that does not converge for the given input.
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// The integrand produced a non-finite value.
    #[error("integrand returned {value} at x = {abscissa}")]
    NonFiniteIntegrand { abscissa: f64, value: f64 },

    /// The requested representation cannot be produced for this input.
    #[error("unsupported: {0}")]
    Capability(String),

    /// A function that cannot be normalized against its constraint.
    #[error("cannot normalize: {0}")]
    Normalization(String),

    /// Grid or solver configuration that cannot produce a meaningful model.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input file.
    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
