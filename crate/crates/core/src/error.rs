use thiserror::Error;

/// Errors raised across the library.
///
/// The variants are grouped by how the CLI triages them: input and usage
/// problems, budget partiality (inconclusive), and theorem violations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabError {
    #[error("input error: {0}")]
    Input(String),

    #[error("model load error: {0}")]
    Load(String),

    #[error("vertex {word} lies outside the explored region ({region})")]
    OutOfRange { word: String, region: String },

    #[error("partial result at budget: {0}")]
    Partiality(String),

    #[error("widen the window: {0}")]
    WidenWindow(String),

    #[error("scheme rejected: truncation at depth {depth} is not geodesic ({detail})")]
    SchemeRejected { depth: usize, detail: String },

    #[error("precondition refused: {0}")]
    Precondition(String),

    #[error("theorem violation: {0}")]
    TheoremViolation(String),
}

impl LabError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::TheoremViolation(_) => 1,
            LabError::Input(_) | LabError::Load(_) => 2,
            LabError::OutOfRange { .. }
            | LabError::Partiality(_)
            | LabError::WidenWindow(_)
            | LabError::SchemeRejected { .. }
            | LabError::Precondition(_) => 3,
        }
    }

    pub fn is_partiality(&self) -> bool {
        self.exit_code() == 3
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
