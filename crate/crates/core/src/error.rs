use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the toolkit reports. Each variant carries a human readable
/// message; [`Error::kind`] gives a stable machine-parsable tag.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("window error: {0}")]
    Window(String),
    #[error("account is not a cohort member: {0}")]
    NotCohortMember(String),
    #[error("cardinality error: {0}")]
    Cardinality(String),
    #[error("length error: {0}")]
    Length(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("coverage error: {0}")]
    Coverage(String),
    #[error("undefined score: {0}")]
    UndefinedScore(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Format(_) => "format_error",
            Error::Alignment(_) => "alignment_error",
            Error::Window(_) => "window_error",
            Error::NotCohortMember(_) => "not_cohort_member",
            Error::Cardinality(_) => "cardinality_error",
            Error::Length(_) => "length_error",
            Error::Domain(_) => "domain_error",
            Error::Config(_) => "config_error",
            Error::DegenerateLabels(_) => "degenerate_labels",
            Error::Validation(_) => "validation_error",
            Error::Singular(_) => "singular_system",
            Error::Schema(_) => "schema_error",
            Error::Coverage(_) => "coverage_error",
            Error::UndefinedScore(_) => "undefined_score",
        }
    }
}
