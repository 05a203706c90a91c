use std::path::PathBuf;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const VERIFY_FAILED: i32 = 4;
    pub const IO: i32 = 5;
    pub const MISSING_FILE: i32 = 10;
    pub const MISSING_COLUMN: i32 = 11;
    pub const NO_ROWS: i32 = 12;
    pub const UNPARSEABLE: i32 = 13;
    pub const TOO_FEW_ROWS: i32 = 14;
}

/// Problems with an input table.
#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot open {path}: {source}")]
    MissingFile { path: PathBuf, source: std::io::Error },
    #[error("{path}: no column named {column:?} (have: {available})")]
    MissingColumn { path: PathBuf, column: String, available: String },
    #[error("{path}: no rows match {filter}")]
    NoRows { path: PathBuf, filter: String },
    #[error("{path}: row {row}: {column} = {value:?} is not a finite number")]
    Unparseable { path: PathBuf, row: usize, column: String, value: String },
    #[error("{path}: malformed CSV: {source}")]
    Malformed { path: PathBuf, source: csv::Error },
    #[error("{path}: need at least 2 rows, got {rows}")]
    TooFewRows { path: PathBuf, rows: usize },
}

impl DataError {
    pub fn exit_code(&self) -> i32 {
        match self {
            DataError::MissingFile { .. } => exit::MISSING_FILE,
            DataError::MissingColumn { .. } => exit::MISSING_COLUMN,
            DataError::NoRows { .. } => exit::NO_ROWS,
            DataError::Unparseable { .. } | DataError::Malformed { .. } => exit::UNPARSEABLE,
            DataError::TooFewRows { .. } => exit::TOO_FEW_ROWS,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("m = {m} does not divide n = {n}")]
    Divisor { m: usize, n: usize },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Core(#[from] groupci_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("grid file: {0}")]
    Grid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Divisor { .. } | CliError::Grid(_) => exit::USAGE,
            CliError::Data(e) => e.exit_code(),
            CliError::Core(groupci_core::Error::InsufficientData { .. }) => exit::TOO_FEW_ROWS,
            CliError::Core(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
