//! Text formats: scenario files, template files, and result rendering.
//!
//! Both input formats are line oriented with `#` comments, so that parse
//! errors can point at an exact line and emission can be byte
//! deterministic. See `docs/FORMATS.md` at the workspace root for the
//! normative description; the parsers here are its implementation.

mod emit;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::aggregation::{ClusterSpec, LevelSpec};
use crate::error::{Error, ErrorClass};
use crate::evidence::TypeUniverse;
use crate::templates::Template;

pub use emit::{emit_analysis, emit_joint, emit_run, emit_scenario, emit_templates};
pub use parse::{parse_scenario, parse_templates};

/// A parsed scenario: hierarchy levels ready for aggregation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioDoc {
    pub levels: Vec<LevelSpec>,
}

impl ScenarioDoc {
    /// Per-level type universes, as needed to parse a template file.
    pub fn universes(&self) -> BTreeMap<usize, Arc<TypeUniverse>> {
        self.levels
            .iter()
            .map(|l| (l.level, l.universe.clone()))
            .collect()
    }

    /// Looks a cluster up by id, returning its level too.
    pub fn find_cluster(&self, id: &str) -> Option<(&LevelSpec, &ClusterSpec)> {
        self.levels.iter().find_map(|level| {
            level
                .clusters
                .iter()
                .find(|c| c.id == id)
                .map(|c| (level, c))
        })
    }

    /// Total number of clusters across all levels.
    pub fn cluster_count(&self) -> usize {
        self.levels.iter().map(|l| l.clusters.len()).sum()
    }
}

/// Per-level template libraries keyed by hierarchy level.
pub type TemplateDoc = BTreeMap<usize, Vec<Template>>;

/// A parse failure, pinned to a 1-based input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// The line itself is malformed.
    Syntax(String),
    /// The line is well formed but describes an invalid model.
    Domain(Error),
}

impl ParseError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            kind: ParseErrorKind::Syntax(message.into()),
        }
    }

    pub(crate) fn domain(line: usize, error: Error) -> Self {
        ParseError {
            line,
            kind: ParseErrorKind::Domain(error),
        }
    }

    /// Coarse classification, for exit codes: syntax problems count as
    /// input errors, domain problems classify by their underlying error.
    pub fn class(&self) -> ErrorClass {
        match &self.kind {
            ParseErrorKind::Syntax(_) => ErrorClass::Input,
            ParseErrorKind::Domain(error) => error.class(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(message) => write!(f, "line {}: {}", self.line, message),
            ParseErrorKind::Domain(error) => write!(f, "line {}: {}", self.line, error),
        }
    }
}

impl std::error::Error for ParseError {}

/// How much of a run's working to print.
///
/// Each step up is a superset of the previous one: `Selection` prints the
/// chosen unit per cluster, `Ranking` adds the full ranked library,
/// `Tables` adds the marginal, requested and supported count tables plus
/// per-hypothesis fitness, and `Hypotheses` adds the raw joint frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verbosity {
    Selection,
    Ranking,
    Tables,
    Hypotheses,
}

impl Verbosity {
    pub const NAMES: [&'static str; 4] = ["selection", "ranking", "tables", "hypotheses"];
}

impl FromStr for Verbosity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "selection" => Ok(Verbosity::Selection),
            "ranking" => Ok(Verbosity::Ranking),
            "tables" => Ok(Verbosity::Tables),
            "hypotheses" => Ok(Verbosity::Hypotheses),
            other => Err(format!(
                "unknown verbosity `{other}` (expected one of: {})",
                Verbosity::NAMES.join(", ")
            )),
        }
    }
}

impl fmt::Display for Verbosity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Verbosity::Selection => "selection",
            Verbosity::Ranking => "ranking",
            Verbosity::Tables => "tables",
            Verbosity::Hypotheses => "hypotheses",
        };
        f.write_str(name)
    }
}
