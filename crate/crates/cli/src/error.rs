use thiserror::Error;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("missing required block or key `{0}`")]
    MissingBlock(&'static str),

    #[error("unit violation: {0}")]
    Unit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}")]
    Numerical {
        context: String,
        #[source]
        source: rytov_core::Error,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { source, .. } if !is_config(source) => 3,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn numerical(context: impl Into<String>) -> impl FnOnce(rytov_core::Error) -> Self {
        let context = context.into();
        move |source| CliError::Numerical { context, source }
    }
}

// Parameter checks inside the library are configuration errors from the
// scenario's point of view.
fn is_config(e: &rytov_core::Error) -> bool {
    use rytov_core::Error::*;
    matches!(e, InvalidParameter { .. } | CoincidentPoints(_) | Ordering(_) | OutOfRange { .. } | ProfileParse { .. } | AsymmetricGrid)
}
