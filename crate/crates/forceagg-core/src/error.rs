//! Error types shared across the aggregation pipeline.

use thiserror::Error;

/// Everything that can go wrong between a validated input model and a
/// finished aggregation run.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("type universe must contain at least one label")]
    EmptyUniverse,

    #[error("duplicate type label `{0}` in universe")]
    DuplicateTypeLabel(String),

    #[error("type universe has {count} labels; at most {max} are supported")]
    UniverseTooLarge { count: usize, max: usize },

    #[error("unknown type label `{0}`")]
    UnknownTypeLabel(String),

    #[error("a proposition's type set must not be empty")]
    EmptyTypeSet,

    #[error("a count set must not be empty")]
    EmptyCountSet,

    #[error("report `{report}`: focal masses must be positive")]
    NonPositiveMass { report: String },

    #[error("report `{report}`: ignorance mass must lie in [0,1]")]
    ThetaOutOfRange { report: String },

    #[error("report `{report}`: masses sum to {sum}, expected exactly 1")]
    MassSumMismatch { report: String, sum: String },

    #[error("cluster `{cluster}` carries no focal elements")]
    DegenerateCluster { cluster: String },

    #[error("cannot precombine an empty report group")]
    EmptySameObjectGroup,

    #[error("total conflict while precombining reports [{}]", reports.join(", "))]
    TotalConflict { reports: Vec<String> },

    #[error("joint frame would hold {required} hypotheses, over the limit of {limit}")]
    HypothesisLimitExceeded { required: u128, limit: u64 },

    #[error("prune threshold {threshold} would drop every hypothesis")]
    PruneEliminatesAll { threshold: String },

    #[error("template library for level {level} is empty")]
    EmptyTemplateLibrary { level: usize },

    #[error("no template library declared for level {level}")]
    MissingTemplateLevel { level: usize },

    #[error("template `{template}`: slot count must be at least 1")]
    ZeroSlotCount { template: String },

    #[error("template `{template}` references a type outside the cluster's universe")]
    TemplateOutsideUniverse { template: String },

    #[error("cluster `{cluster}` references unknown unit `{unit}`")]
    UnknownUnitRef { cluster: String, unit: String },

    #[error("unit `{unit}` produces `{label}`, which is not a type at level {level}")]
    UnknownProducesLabel {
        unit: String,
        label: String,
        level: usize,
    },
}

/// Coarse classification used by callers to map errors onto process exit
/// codes and log severities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistent input data.
    Input,
    /// An unusable run configuration (empty template library, bad limits).
    Config,
    /// The joint frame exceeded the configured hypothesis limit.
    Blowup,
    /// Dempster combination lost all mass to conflict.
    Conflict,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::TotalConflict { .. } => ErrorClass::Conflict,
            Error::HypothesisLimitExceeded { .. } => ErrorClass::Blowup,
            Error::EmptyTemplateLibrary { .. }
            | Error::MissingTemplateLevel { .. }
            | Error::PruneEliminatesAll { .. }
            | Error::UniverseTooLarge { .. } => ErrorClass::Config,
            _ => ErrorClass::Input,
        }
    }
}
