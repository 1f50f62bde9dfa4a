use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: element {element}{}: {msg}", face.map(|f| format!(", face {f}")).unwrap_or_default())]
    Validation {
        element: usize,
        face: Option<usize>,
        msg: String,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(element: usize, face: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Validation {
            element,
            face,
            msg: msg.into(),
        }
    }

    /// True for failures of the numerical kind (singular systems, divergence).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
