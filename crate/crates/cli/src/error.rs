use std::path::PathBuf;

use symctl_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// A file that parses but breaks a format rule, or does not parse.
    #[error("{file}: {msg}")]
    Format { file: String, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// A named pipeline stage failed.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: Box<CliError>,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn format(file: impl Into<String>, msg: impl Into<String>) -> Self {
        CliError::Format {
            file: file.into(),
            msg: msg.into(),
        }
    }

    /// 1 for a failed check, 2 for bad input, 3 for a broken invariant.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } | CliError::Usage(_) | CliError::Csv(_) => 2,
            CliError::Stage { source, .. } => source.exit_code(),
            CliError::Core(e) => match e {
                CoreError::Condition { .. } => 1,
                CoreError::Domain(_)
                | CoreError::Invalid(_)
                | CoreError::Parse(_)
                | CoreError::Usage(_)
                | CoreError::Capability(_) => 2,
                CoreError::Inconsistent(_) | CoreError::Coverage(_) | CoreError::Internal(_) => 3,
            },
        }
    }
}

/// Tags errors of a pipeline step with its name.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T, E: Into<CliError>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| CliError::Stage {
            stage,
            source: Box::new(e.into()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stages_keep_the_inner_code() {
        let e: std::result::Result<(), CoreError> = Err(CoreError::Coverage("x".into()));
        let e = e.stage("synthesis").unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert_eq!(e.to_string(), "synthesis: coverage error: x");
        let c = CliError::Core(CoreError::Condition {
            condition: "input witness",
            counterexample: "u".into(),
        });
        assert_eq!(c.exit_code(), 1);
    }
}
