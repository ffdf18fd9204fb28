use std::path::PathBuf;

use mpr_core::MprError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] MprError),
}

impl CliError {
    /// 3 for computational guards, 2 for everything the user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_guard() => 3,
            _ => 2,
        }
    }

    /// Attach the file a core error came from.
    pub fn in_file(path: &std::path::Path) -> impl FnOnce(MprError) -> CliError + '_ {
        move |e| {
            if e.is_guard() {
                CliError::Core(e)
            } else {
                CliError::Input {
                    path: path.to_path_buf(),
                    message: e.to_string(),
                }
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
