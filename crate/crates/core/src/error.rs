use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("above lambda point: T = {t} K >= T_lambda = {t_lambda} K")]
    AboveLambda { t: f64, t_lambda: f64 },

    #[error("outside ideal Josephson regime: T_lambda - T = {below} K exceeds 1 mK")]
    OutsideJosephsonRegime { below: f64 },

    #[error("degenerate separation: d = {0} m")]
    DegenerateSeparation(f64),

    #[error("invalid parameter `{path}`: {reason}")]
    InvalidParameter { path: String, reason: String },

    #[error("compensation field out of range: no bracket below E_max = {e_max} V/m")]
    CompensationOutOfRange { e_max: f64 },

    #[error("state not normalized: norm² = {0}")]
    NotNormalized(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("modulation frequency {f_m} Hz is at or above Nyquist ({nyquist} Hz)")]
    AboveNyquist { f_m: f64, nyquist: f64 },

    #[error("missing null distribution")]
    MissingNull,

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed time series: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(path: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            path: path.to_string(),
            reason: reason.into(),
        }
    }
}
