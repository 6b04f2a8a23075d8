use thiserror::Error;

/// Errors raised by the flow library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// `level` is the first j with S_j(λ) not strictly positive.
    #[error("eigenvalues leave the {level}-positive cone{}", location(.point))]
    ConeViolation { level: usize, point: Option<Vec<usize>> },

    #[error("metric is not positive definite: {0}")]
    Metric(String),

    #[error("grid mismatch: {0}")]
    GeometryMismatch(String),

    #[error("non-finite values after step {step}")]
    NumericalBlowUp { step: usize },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("b estimates disagree: pointwise {pointwise}, integral {integral}, tolerance {tolerance}")]
    Consistency { pointwise: f64, integral: f64, tolerance: f64 },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("i/o: {0}")]
    Io(String),
}

fn location(point: &Option<Vec<usize>>) -> String {
    match point {
        Some(p) => format!(" at grid point {p:?}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Attaches grid coordinates to a cone violation; other errors pass through.
    pub fn at_point(self, coords: Vec<usize>) -> Self {
        match self {
            Error::ConeViolation { level, .. } => Error::ConeViolation { level, point: Some(coords) },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
