use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dense models exist only for beta in {{1, 2, 4}}, got beta = {0}")]
    UnsupportedField(f64),
    #[error("degenerate input: {0} (resample)")]
    DegenerateInput(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("spectrum is not symmetric about 0: pairing error {0:e}")]
    SymmetryViolation(f64),
    #[error("ill-conditioned measure: {0}")]
    IllConditioned(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error("parameters outside the domain of validity: {0}")]
    Domain(String),
    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error:e}")]
    Accuracy { estimate: f64, error: f64 },
}

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
