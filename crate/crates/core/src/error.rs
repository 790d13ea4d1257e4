use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Bytes or field values that do not form a valid packet.
    #[error("format error: {0}")]
    Format(String),

    /// A detector that needs fields the packet format does not carry.
    #[error("unsupported packet format: {0}")]
    UnsupportedFormat(String),

    /// An invalid parameter. `field` names the offending key.
    #[error("invalid {field}: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// The configuration key an error refers to, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::Config { field, .. } => Some(field),
            _ => None,
        }
    }
}
