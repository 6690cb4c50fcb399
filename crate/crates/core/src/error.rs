use std::sync::Mutex;

use crate::quadrature::QuadratureError;
use crate::specfun::SpecfunError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParameters(Vec<String>),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("density invalid at t = {t}: {reason}")]
    DensityInvalid { t: f64, reason: String },
    #[error("cannot normalize: normalization integral is {0}")]
    CannotNormalize(f64),
    #[error("distribution is not normalized")]
    NotNormalized,
    #[error("moment of order {order} diverges (tail decays like t^{exponent:.3})")]
    DivergentMoment { order: u32, exponent: f64 },
    #[error("degenerate scenario: {0}")]
    Degenerate(String),
    #[error("zero at {location} is tangential; a sign change is required")]
    BackflowSignatureInvalid { location: f64 },
    #[error("target probability {target} unreachable for epsilon in [{lo}, {hi}] s")]
    TargetUnreachable { target: f64, lo: f64, hi: f64 },
    #[error("insufficient trials: {0}")]
    InsufficientTrials(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error("output error: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidParameters(vec![msg.into()])
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Output(e.to_string())
    }
}

/// Lets fallible evaluators run inside the plain `Fn(f64) -> f64` numerics:
/// the first error is stored and NaN returned, which aborts the routine; the
/// stored error then replaces the generic non-finite report.
pub(crate) struct Trap {
    slot: Mutex<Option<Error>>,
}

impl Trap {
    pub fn new() -> Self {
        Trap {
            slot: Mutex::new(None),
        }
    }

    pub fn value(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                let mut slot = self.slot.lock().unwrap();
                if slot.is_none() {
                    *slot = Some(e);
                }
                f64::NAN
            }
        }
    }

    pub fn finish<T>(&self, r: std::result::Result<T, QuadratureError>) -> Result<T> {
        match r {
            Ok(v) => Ok(v),
            Err(q) => Err(self.slot.lock().unwrap().take().unwrap_or(Error::Quadrature(q))),
        }
    }
}
