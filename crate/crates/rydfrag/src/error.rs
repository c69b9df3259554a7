use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}:{line}:{column}: {message}", path.display())]
    ConfigParse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration field `{field}`: {reason}")]
    Field { field: &'static str, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}; reduce --length or raise RYDFRAG_MEM_BUDGET_MB")]
    Budget(rydfrag_core::Error),

    #[error(transparent)]
    Core(rydfrag_core::Error),

    #[error("RYDFRAG_MEM_BUDGET_MB must be a positive integer number of megabytes, got {0:?}")]
    BudgetVariable(String),

    #[error("worker pool: {0}")]
    Pool(String),
}

impl From<rydfrag_core::Error> for CliError {
    fn from(e: rydfrag_core::Error) -> Self {
        match e {
            rydfrag_core::Error::SizeBudget { .. } => CliError::Budget(e),
            other => CliError::Core(other),
        }
    }
}
