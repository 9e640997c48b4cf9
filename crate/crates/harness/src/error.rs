use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dataset validation failed for {what}: {reason}")]
    Dataset { what: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0} exists; pass --force to overwrite")]
    Exists(PathBuf),

    #[error("oracle suite failed: {0}")]
    Oracle(String),

    #[error(transparent)]
    Core(#[from] platelab_core::Error),
}

impl HarnessError {
    /// Process exit code: 1 validation, 2 oracle failure, 3 numerical guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Oracle(_) => 2,
            HarnessError::Core(e) if is_guard(e) => 3,
            _ => 1,
        }
    }

    pub(crate) fn dataset(what: impl Into<String>, reason: impl Into<String>) -> Self {
        HarnessError::Dataset {
            what: what.into(),
            reason: reason.into(),
        }
    }
}

fn is_guard(e: &platelab_core::Error) -> bool {
    match e {
        platelab_core::Error::WrapAround { .. } => true,
        platelab_core::Error::Cell { source, .. } => is_guard(source),
        _ => false,
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
