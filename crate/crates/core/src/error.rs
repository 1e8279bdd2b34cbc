use thiserror::Error;

pub type Result<T> = std::result::Result<T, CodaError>;

/// Errors raised by the compositional toolkit.
///
/// Every variant maps to a stable machine-readable code via [`CodaError::code`],
/// which the command-line front end prints alongside the message.
#[derive(Debug, Error)]
pub enum CodaError {
    #[error("row '{row}' has zero total and cannot be closed")]
    ZeroRowTotal { row: String },

    #[error("row '{row}' has zero subtotal over the selected parts")]
    ZeroSubtotal { row: String },

    #[error("part '{part}' has no positive values")]
    ZeroColumn { part: String },

    #[error("{op}: zero value at row '{row}', part '{part}'; apply replace_zeros first")]
    ZeroEntries {
        op: &'static str,
        row: String,
        part: String,
    },

    #[error("negative value at row '{row}', part '{part}'")]
    NegativeEntry { row: String, part: String },

    #[error("{what}: index {index} out of range for length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("part {0} appears in more than one block")]
    OverlappingBlocks(usize),

    #[error("invalid contrast tree: {0}")]
    InvalidTree(String),

    #[error("group labels are required for {0}")]
    MissingGroups(&'static str),

    #[error("group '{group}' has {size} members, at least {min} required")]
    UndersizedGroup {
        group: String,
        size: usize,
        min: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CodaError {
    /// Stable short code, e.g. `E_ZERO_ENTRIES`.
    pub fn code(&self) -> &'static str {
        match self {
            CodaError::ZeroRowTotal { .. } => "E_ZERO_ROW",
            CodaError::ZeroSubtotal { .. } => "E_ZERO_SUBTOTAL",
            CodaError::ZeroColumn { .. } => "E_ZERO_COLUMN",
            CodaError::ZeroEntries { .. } => "E_ZERO_ENTRIES",
            CodaError::NegativeEntry { .. } => "E_NEGATIVE",
            CodaError::IndexOutOfRange { .. } => "E_INDEX",
            CodaError::DimensionMismatch { .. } => "E_DIMENSION",
            CodaError::OverlappingBlocks(_) => "E_OVERLAP",
            CodaError::InvalidTree(_) => "E_TREE",
            CodaError::MissingGroups(_) => "E_NO_GROUPS",
            CodaError::UndersizedGroup { .. } => "E_GROUP_SIZE",
            CodaError::InvalidArgument(_) => "E_ARGUMENT",
            CodaError::Degenerate(_) => "E_DEGENERATE",
            CodaError::Parse { .. } => "E_PARSE",
            CodaError::Io(_) => "E_IO",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> CodaError {
    CodaError::InvalidArgument(msg.into())
}
