use std::fmt;
use std::path::PathBuf;

/// Error class reported on stderr and mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Domain,
    Parse,
    Ties,
    Degenerate,
    Io,
    RankCone,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Config | Category::Domain => 2,
            Category::Parse => 3,
            Category::Ties => 4,
            Category::Degenerate => 5,
            Category::Io => 6,
            Category::RankCone => 7,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::Config => "CONFIG",
            Category::Domain => "DOMAIN",
            Category::Parse => "PARSE",
            Category::Ties => "TIES",
            Category::Degenerate => "DEGENERATE",
            Category::Io => "IO",
            Category::RankCone => "RANKCONE",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] addhaz_core::Error),
    #[error("{path}: row {row}, column `{column}`: {message}")]
    Cell { path: PathBuf, row: usize, column: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl fmt::Display) -> Self {
        CliError::Parse { path: path.into(), message: message.to_string() }
    }

    pub fn category(&self) -> Category {
        use addhaz_core::Error as E;
        match self {
            CliError::Model(e) => match e {
                E::Config(_) | E::Size(_) => Category::Config,
                E::Domain(_) => Category::Domain,
                E::Ties { .. } => Category::Ties,
                E::DegenerateColumn { .. } | E::NoEvents | E::DegenerateRiskSet { .. } | E::NoPositiveRatio { .. } => {
                    Category::Degenerate
                }
                E::Rank { .. } | E::StartNotFeasible => Category::RankCone,
            },
            CliError::Cell { .. } | CliError::Parse { .. } => Category::Parse,
            CliError::Io { .. } => Category::Io,
            CliError::Config(_) => Category::Config,
        }
    }

    /// Single stderr line: `addhaz: CATEGORY: message`.
    pub fn report_line(&self) -> String {
        let message = self.to_string().replace(['\n', '\r'], " ");
        format!("addhaz: {}: {}", self.category(), message)
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
