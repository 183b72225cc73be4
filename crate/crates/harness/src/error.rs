use std::path::Path;

use thiserror::Error;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] csucb_core::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("run {run} (master seed {seed}) failed: {source}")]
    Run {
        run: usize,
        seed: u64,
        #[source]
        source: csucb_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit status: 2 validation, 3 budget exceeded, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        let core = match self {
            Self::Core(e) | Self::Run { source: e, .. } => e,
            Self::Config(_) => return EXIT_VALIDATION,
            Self::Io { .. } => return EXIT_IO,
        };
        match core {
            csucb_core::Error::BudgetExceeded { .. } => EXIT_BUDGET,
            csucb_core::Error::Io(_) => EXIT_IO,
            _ => EXIT_VALIDATION,
        }
    }

    /// Remediation advice shown under the error message, if any.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            Self::Core(csucb_core::Error::BudgetExceeded { what, .. })
                if what.starts_with("all-subsets") =>
            {
                Some("use `--family realized` to range over the availability sets actually drawn (a lower-bound estimate), or reduce k")
            }
            Self::Core(csucb_core::Error::BudgetExceeded { .. }) => {
                Some("exact enumeration is capped; reduce k or the size of availability sets")
            }
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
