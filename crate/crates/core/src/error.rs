use crate::modes::ModePair;

/// Errors raised by the numerical pipeline and its configuration layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("steady-state fixed point did not converge after {iterations} iterations (last step {last_step:e})")]
    NonConvergence { iterations: usize, last_step: f64 },

    #[error("eigenvalue routine did not converge")]
    EigenFailure,

    #[error("drift matrix is not stable (max real eigenvalue {max_real_eig:e} rad/s)")]
    Unstable { max_real_eig: f64 },

    #[error("Lyapunov system is numerically singular")]
    SingularSystem,

    #[error("time integration diverged at t = {time:e} s")]
    Divergence { time: f64 },

    #[error("unphysical two-mode covariance{}: {reason}", pair.map(|p| format!(" for pair {p}")).unwrap_or_default())]
    UnphysicalInput { pair: Option<ModePair>, reason: String },

    #[error("no stable point found in the search region")]
    NoStablePoint,

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config validation error for `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("unknown config key: {0}")]
    UnknownKey(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by user-supplied configuration rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Parse(_) | Error::Validation { .. } | Error::UnknownKey(_)
        )
    }
}
