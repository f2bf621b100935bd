use std::path::PathBuf;

/// Broad failure classes. Front ends map these onto exit codes and HTTP
/// statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad arguments or options (exit 1, HTTP 400).
    Usage,
    /// Input data could not be read or parsed (exit 2, HTTP 400).
    Data,
    /// Input is well formed but the analysis is undefined on it (exit 3, HTTP 422).
    Degenerate,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dictionary: {0}")]
    DictionarySyntax(String),
    #[error("dictionary: no columns declared")]
    EmptyDictionary,
    #[error("dictionary entry {position} ({column:?}): {reason}")]
    DictionaryColumn {
        position: usize,
        column: String,
        reason: String,
    },

    #[error("csv: header is missing column {0:?}")]
    MissingColumn(String),
    #[error("csv: header has unexpected column {0:?}")]
    ExtraColumn(String),
    #[error("csv: header repeats column {0:?}")]
    DuplicateHeader(String),
    #[error("csv line {line}: expected {expected} fields, found {found}")]
    RowArity {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("csv line {line}, column {column:?}: cannot parse {value:?} ({reason})")]
    BadCell {
        line: u64,
        column: String,
        value: String,
        reason: String,
    },
    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("synthetic spec: {0}")]
    Synth(String),

    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("axis {axis} out of range (model retains {retained})")]
    AxisOutOfRange { axis: usize, retained: usize },
    #[error("age {age} outside [{lo}, {hi}]")]
    AgeOutOfRange { age: i64, lo: i64, hi: i64 },
    #[error("count {count} exceeds total {n}")]
    CountExceedsTotal { count: u64, n: u64 },

    #[error("empty result: {0}")]
    EmptyResult(String),
    #[error("variable {variable:?} has {count} observed categories; at least 2 are required")]
    TooFewCategories { variable: String, count: usize },
    #[error("dataset does not match model: {0}")]
    DatasetMismatch(String),
    #[error("degenerate analysis: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidArgument(_) | AxisOutOfRange { .. } | UnknownVariable(_) => ErrorClass::Usage,
            EmptyResult(_) | TooFewCategories { .. } | Degenerate(_) | DatasetMismatch(_) => {
                ErrorClass::Degenerate
            }
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
