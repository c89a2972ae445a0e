//! Parsers for the scenario and template file formats.
//!
//! Both parsers are single-pass state machines over trimmed lines. All
//! validation that can be pinned to a line happens here, so that a bad
//! file fails with `line N: ...` instead of a runtime error deep inside
//! aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::aggregation::{ClusterSpec, LevelSpec};
use crate::error::Error;
use crate::evidence::{
    precombine_same_object, CountSet, Proposition, Report, TypeUniverse,
};
use crate::rational::{parse_rational, Mass};
use crate::templates::Template;

use super::{ParseError, ScenarioDoc, TemplateDoc};

/// Largest object count a file may mention. Ignorance expands to the set
/// of all counts up to the scenario maximum, so unbounded counts would
/// let one stray digit allocate the moon.
pub const MAX_COUNT: u64 = 10_000;

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '+'))
}

fn ident(token: &str, what: &str, line: usize) -> Result<String, ParseError> {
    if is_ident(token) {
        Ok(token.to_string())
    } else {
        Err(ParseError::syntax(
            line,
            format!("invalid {what} `{token}` (letters, digits, `_.-+` only)"),
        ))
    }
}

fn attr<'a>(token: &'a str, key: &str, line: usize) -> Result<&'a str, ParseError> {
    token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .filter(|value| !value.is_empty())
        .ok_or_else(|| {
            ParseError::syntax(line, format!("expected `{key}=...`, found `{token}`"))
        })
}

fn parse_count(piece: &str, line: usize) -> Result<u64, ParseError> {
    let value: u64 = piece
        .parse()
        .map_err(|_| ParseError::syntax(line, format!("invalid count `{piece}`")))?;
    if value > MAX_COUNT {
        return Err(ParseError::syntax(
            line,
            format!("count {value} exceeds the maximum of {MAX_COUNT}"),
        ));
    }
    Ok(value)
}

/// `1,3..5` -> {1,3,4,5}. Ranges are inclusive.
fn parse_counts(value: &str, line: usize) -> Result<CountSet, ParseError> {
    let mut values = BTreeSet::new();
    for piece in value.split(',') {
        if let Some((lo, hi)) = piece.split_once("..") {
            let lo = parse_count(lo, line)?;
            let hi = parse_count(hi, line)?;
            if lo > hi {
                return Err(ParseError::syntax(
                    line,
                    format!("empty count range `{piece}`"),
                ));
            }
            values.extend(lo..=hi);
        } else {
            values.insert(parse_count(piece, line)?);
        }
    }
    CountSet::new(values).map_err(|e| ParseError::domain(line, e))
}

fn parse_mass(value: &str, line: usize) -> Result<Mass, ParseError> {
    parse_rational(value).map_err(|message| ParseError::syntax(line, message))
}

struct ReportBuilder {
    line: usize,
    id: String,
    focal_elements: Vec<(Proposition, Mass)>,
    theta: Option<Mass>,
}

struct ClusterBuilder {
    line: usize,
    id: String,
    reports: Vec<Report>,
    report_ids: BTreeSet<String>,
    report: Option<ReportBuilder>,
    precombine_groups: Vec<(usize, Vec<String>)>,
    precombined_ids: BTreeSet<String>,
    unit_refs: Vec<String>,
}

struct LevelBuilder {
    line: usize,
    number: usize,
    universe: Option<Arc<TypeUniverse>>,
    clusters: Vec<ClusterSpec>,
    cluster: Option<ClusterBuilder>,
    cluster_ids: BTreeSet<String>,
}

#[derive(Default)]
struct ScenarioParser {
    version_seen: bool,
    levels: Vec<LevelSpec>,
    level: Option<LevelBuilder>,
    all_cluster_ids: BTreeSet<String>,
    previous_level_ids: BTreeSet<String>,
}

/// Parses a scenario file. See `docs/FORMATS.md` for the grammar.
pub fn parse_scenario(text: &str) -> Result<ScenarioDoc, ParseError> {
    let mut parser = ScenarioParser::default();
    let mut last_line = 0;
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        last_line = line;
        let tokens: Vec<&str> = body.split_whitespace().collect();
        parser.directive(line, &tokens)?;
    }
    parser.finish(last_line.max(1))
}

impl ScenarioParser {
    fn directive(&mut self, line: usize, tokens: &[&str]) -> Result<(), ParseError> {
        let keyword = tokens[0];
        if keyword == "scenario-version" {
            if self.version_seen {
                return Err(ParseError::syntax(line, "duplicate scenario-version line"));
            }
            if tokens[1..] != ["1"] {
                return Err(ParseError::syntax(
                    line,
                    "unsupported scenario version (expected `scenario-version 1`)",
                ));
            }
            self.version_seen = true;
            return Ok(());
        }
        if !self.version_seen {
            return Err(ParseError::syntax(
                line,
                "the file must start with `scenario-version 1`",
            ));
        }

        match keyword {
            "level" => {
                self.finish_level()?;
                let expected = self.levels.len() + 1;
                let number: usize = tokens
                    .get(1)
                    .filter(|_| tokens.len() == 2)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| ParseError::syntax(line, "expected `level <number>`"))?;
                if number != expected {
                    return Err(ParseError::syntax(
                        line,
                        format!("levels must be declared in order; expected level {expected}"),
                    ));
                }
                self.level = Some(LevelBuilder {
                    line,
                    number,
                    universe: None,
                    clusters: Vec::new(),
                    cluster: None,
                    cluster_ids: BTreeSet::new(),
                });
                Ok(())
            }
            "types" => {
                let level = self.level.as_mut().ok_or_else(|| {
                    ParseError::syntax(line, "`types` outside a level")
                })?;
                if level.universe.is_some() {
                    return Err(ParseError::syntax(line, "duplicate `types` line"));
                }
                if tokens.len() < 2 {
                    return Err(ParseError::syntax(line, "expected `types <label>...`"));
                }
                let mut labels = Vec::with_capacity(tokens.len() - 1);
                for token in &tokens[1..] {
                    labels.push(ident(token, "type label", line)?);
                }
                let universe =
                    TypeUniverse::new(labels).map_err(|e| ParseError::domain(line, e))?;
                level.universe = Some(Arc::new(universe));
                Ok(())
            }
            "cluster" => {
                let level = self.level.as_mut().ok_or_else(|| {
                    ParseError::syntax(line, "`cluster` outside a level")
                })?;
                if level.universe.is_none() {
                    return Err(ParseError::syntax(
                        line,
                        "`cluster` before the level's `types` line",
                    ));
                }
                finish_cluster(level)?;
                let id = tokens
                    .get(1)
                    .filter(|_| tokens.len() == 2)
                    .ok_or_else(|| ParseError::syntax(line, "expected `cluster <id>`"))
                    .and_then(|t| ident(t, "cluster id", line))?;
                if !self.all_cluster_ids.insert(id.clone()) {
                    return Err(ParseError::syntax(
                        line,
                        format!("duplicate cluster id `{id}`"),
                    ));
                }
                level.cluster = Some(ClusterBuilder {
                    line,
                    id,
                    reports: Vec::new(),
                    report_ids: BTreeSet::new(),
                    report: None,
                    precombine_groups: Vec::new(),
                    precombined_ids: BTreeSet::new(),
                    unit_refs: Vec::new(),
                });
                Ok(())
            }
            "report" => {
                let cluster = self.open_cluster(line, "report")?;
                finish_report(cluster)?;
                let id = tokens
                    .get(1)
                    .filter(|_| tokens.len() == 2)
                    .ok_or_else(|| ParseError::syntax(line, "expected `report <id>`"))
                    .and_then(|t| ident(t, "report id", line))?;
                if !cluster.report_ids.insert(id.clone()) {
                    return Err(ParseError::syntax(
                        line,
                        format!("duplicate report id `{id}` in cluster `{}`", cluster.id),
                    ));
                }
                cluster.report = Some(ReportBuilder {
                    line,
                    id,
                    focal_elements: Vec::new(),
                    theta: None,
                });
                Ok(())
            }
            "focal" => {
                let cluster = self.open_cluster(line, "focal")?;
                if cluster.report.is_none() {
                    return Err(ParseError::syntax(line, "`focal` outside a report"));
                }
                if tokens.len() != 4 {
                    return Err(ParseError::syntax(
                        line,
                        "expected `focal counts=... types=... mass=...`",
                    ));
                }
                let counts = parse_counts(attr(tokens[1], "counts", line)?, line)?;
                let labels = attr(tokens[2], "types", line)?;
                let mass = parse_mass(attr(tokens[3], "mass", line)?, line)?;
                // The universe exists: clusters require it, reports
                // require a cluster.
                let universe = self
                    .level
                    .as_ref()
                    .and_then(|l| l.universe.as_ref())
                    .expect("focal implies an open cluster, which implies types");
                let types = universe
                    .type_set(labels.split(','))
                    .map_err(|e| ParseError::domain(line, e))?;
                let proposition = Proposition::new(counts, types)
                    .map_err(|e| ParseError::domain(line, e))?;
                let report = self
                    .level
                    .as_mut()
                    .and_then(|l| l.cluster.as_mut())
                    .and_then(|c| c.report.as_mut())
                    .expect("checked above");
                if !num::Signed::is_positive(&mass) {
                    return Err(ParseError::domain(
                        line,
                        Error::NonPositiveMass {
                            report: report.id.clone(),
                        },
                    ));
                }
                report.focal_elements.push((proposition, mass));
                Ok(())
            }
            "theta" => {
                let cluster = self.open_cluster(line, "theta")?;
                let report = cluster.report.as_mut().ok_or_else(|| {
                    ParseError::syntax(line, "`theta` outside a report")
                })?;
                if report.theta.is_some() {
                    return Err(ParseError::syntax(
                        line,
                        format!("duplicate `theta` line in report `{}`", report.id),
                    ));
                }
                if tokens.len() != 2 {
                    return Err(ParseError::syntax(line, "expected `theta mass=...`"));
                }
                report.theta = Some(parse_mass(attr(tokens[1], "mass", line)?, line)?);
                Ok(())
            }
            "precombine" => {
                let cluster = self.open_cluster(line, "precombine")?;
                finish_report(cluster)?;
                if tokens.len() < 3 {
                    return Err(ParseError::syntax(
                        line,
                        "expected `precombine <report-id> <report-id>...`",
                    ));
                }
                let mut group = Vec::with_capacity(tokens.len() - 1);
                for token in &tokens[1..] {
                    let id = ident(token, "report id", line)?;
                    if !cluster.report_ids.contains(&id) {
                        return Err(ParseError::syntax(
                            line,
                            format!(
                                "precombine references unknown report `{id}` (it must be declared above)"
                            ),
                        ));
                    }
                    if group.contains(&id) {
                        return Err(ParseError::syntax(
                            line,
                            format!("report `{id}` listed twice in one precombine"),
                        ));
                    }
                    if !cluster.precombined_ids.insert(id.clone()) {
                        return Err(ParseError::syntax(
                            line,
                            format!("report `{id}` already belongs to another precombine"),
                        ));
                    }
                    group.push(id);
                }
                cluster.precombine_groups.push((line, group));
                Ok(())
            }
            "unit" => {
                let level_number = self.level.as_ref().map(|l| l.number).unwrap_or(0);
                let previous = self.previous_level_ids.clone();
                let cluster = self.open_cluster(line, "unit")?;
                finish_report(cluster)?;
                if level_number < 2 {
                    return Err(ParseError::syntax(
                        line,
                        "level 1 clusters cannot reference aggregated units",
                    ));
                }
                let id = tokens
                    .get(1)
                    .filter(|_| tokens.len() == 2)
                    .ok_or_else(|| ParseError::syntax(line, "expected `unit <cluster-id>`"))
                    .and_then(|t| ident(t, "cluster id", line))?;
                if !previous.contains(&id) {
                    return Err(ParseError::domain(
                        line,
                        Error::UnknownUnitRef {
                            cluster: cluster.id.clone(),
                            unit: id,
                        },
                    ));
                }
                if cluster.unit_refs.contains(&id) {
                    return Err(ParseError::syntax(
                        line,
                        format!("duplicate unit reference `{id}`"),
                    ));
                }
                cluster.unit_refs.push(id);
                Ok(())
            }
            other => Err(ParseError::syntax(
                line,
                format!("unknown directive `{other}`"),
            )),
        }
    }

    fn open_cluster(&mut self, line: usize, what: &str) -> Result<&mut ClusterBuilder, ParseError> {
        self.level
            .as_mut()
            .and_then(|l| l.cluster.as_mut())
            .ok_or_else(|| ParseError::syntax(line, format!("`{what}` outside a cluster")))
    }

    fn finish_level(&mut self) -> Result<(), ParseError> {
        let Some(mut level) = self.level.take() else {
            return Ok(());
        };
        finish_cluster(&mut level)?;
        let universe = level.universe.ok_or_else(|| {
            ParseError::syntax(level.line, format!("level {} declares no types", level.number))
        })?;
        if level.clusters.is_empty() {
            return Err(ParseError::syntax(
                level.line,
                format!("level {} declares no clusters", level.number),
            ));
        }
        self.previous_level_ids = level.cluster_ids;
        self.levels.push(LevelSpec {
            level: level.number,
            universe,
            clusters: level.clusters,
        });
        Ok(())
    }

    fn finish(mut self, last_line: usize) -> Result<ScenarioDoc, ParseError> {
        if !self.version_seen {
            return Err(ParseError::syntax(
                last_line,
                "the file must start with `scenario-version 1`",
            ));
        }
        self.finish_level()?;
        if self.levels.is_empty() {
            return Err(ParseError::syntax(last_line, "the scenario declares no levels"));
        }
        Ok(ScenarioDoc {
            levels: self.levels,
        })
    }
}

fn finish_report(cluster: &mut ClusterBuilder) -> Result<(), ParseError> {
    let Some(builder) = cluster.report.take() else {
        return Ok(());
    };
    // An omitted `theta` line means "whatever mass the focal elements
    // leave over". An explicit one must agree: `Report::new` rejects any
    // report whose masses do not sum to exactly 1.
    let theta = match builder.theta {
        Some(mass) => mass,
        None => {
            let spoken: Mass = builder.focal_elements.iter().map(|(_, m)| m.clone()).sum();
            if spoken > crate::rational::whole(1) {
                return Err(ParseError::domain(
                    builder.line,
                    Error::MassSumMismatch {
                        report: builder.id,
                        sum: spoken.to_string(),
                    },
                ));
            }
            crate::rational::whole(1) - spoken
        }
    };
    let report = Report::new(builder.id, builder.focal_elements, theta)
        .map_err(|e| ParseError::domain(builder.line, e))?;
    cluster.reports.push(report);
    Ok(())
}

fn finish_cluster(level: &mut LevelBuilder) -> Result<(), ParseError> {
    let Some(mut cluster) = level.cluster.take() else {
        return Ok(());
    };
    finish_report(&mut cluster)?;

    // Merge each same-object group into a single report, placed where the
    // group's first member was declared.
    for (group_line, group) in &cluster.precombine_groups {
        let mut stash: BTreeMap<String, Report> = BTreeMap::new();
        let mut kept: Vec<Report> = Vec::with_capacity(cluster.reports.len());
        let mut insert_at = 0;
        for report in cluster.reports.drain(..) {
            if report.id() == group[0] {
                insert_at = kept.len();
            }
            if group.contains(&report.id().to_string()) {
                stash.insert(report.id().to_string(), report);
            } else {
                kept.push(report);
            }
        }
        let members: Vec<Report> = group
            .iter()
            .map(|id| stash.remove(id).expect("membership validated at the directive"))
            .collect();
        let combined = precombine_same_object(&members)
            .map_err(|e| ParseError::domain(*group_line, e))?;
        if cluster.report_ids.contains(combined.id())
            && !group.contains(&combined.id().to_string())
        {
            return Err(ParseError::syntax(
                *group_line,
                format!("merged report id `{}` collides with an existing report", combined.id()),
            ));
        }
        kept.insert(insert_at, combined);
        cluster.reports = kept;
    }

    let has_focals = cluster
        .reports
        .iter()
        .any(|r| !r.focal_elements().is_empty());
    if !has_focals && cluster.unit_refs.is_empty() {
        return Err(ParseError::domain(
            cluster.line,
            Error::DegenerateCluster {
                cluster: cluster.id,
            },
        ));
    }

    level.cluster_ids.insert(cluster.id.clone());
    level.clusters.push(ClusterSpec {
        id: cluster.id,
        reports: cluster.reports,
        unit_refs: cluster.unit_refs,
    });
    Ok(())
}

struct TemplateBuilder {
    line: usize,
    id: String,
    produces: String,
    slots: Vec<(String, u64)>,
}

struct TemplateLevelBuilder {
    line: usize,
    number: usize,
    /// `None` when the scenario has no such level; the level's lines are
    /// shape-checked but no templates are built.
    universe: Option<Arc<TypeUniverse>>,
    templates: Vec<Template>,
    template_ids: BTreeSet<String>,
    template: Option<TemplateBuilder>,
}

#[derive(Default)]
struct TemplateParser {
    version_seen: bool,
    last_level: usize,
    levels: TemplateDoc,
    level: Option<TemplateLevelBuilder>,
}

/// Parses a template file against the scenario's per-level universes.
/// Levels the scenario does not declare are checked for shape but
/// skipped, so one library file can serve several scenarios.
pub fn parse_templates(
    text: &str,
    universes: &BTreeMap<usize, Arc<TypeUniverse>>,
) -> Result<TemplateDoc, ParseError> {
    let mut parser = TemplateParser::default();
    let mut last_line = 0;
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        last_line = line;
        let tokens: Vec<&str> = body.split_whitespace().collect();
        parser.directive(line, &tokens, universes)?;
    }
    parser.finish(last_line.max(1))
}

impl TemplateParser {
    fn directive(
        &mut self,
        line: usize,
        tokens: &[&str],
        universes: &BTreeMap<usize, Arc<TypeUniverse>>,
    ) -> Result<(), ParseError> {
        let keyword = tokens[0];
        if keyword == "template-version" {
            if self.version_seen {
                return Err(ParseError::syntax(line, "duplicate template-version line"));
            }
            if tokens[1..] != ["1"] {
                return Err(ParseError::syntax(
                    line,
                    "unsupported template version (expected `template-version 1`)",
                ));
            }
            self.version_seen = true;
            return Ok(());
        }
        if !self.version_seen {
            return Err(ParseError::syntax(
                line,
                "the file must start with `template-version 1`",
            ));
        }

        match keyword {
            "level" => {
                self.finish_level()?;
                let number: usize = tokens
                    .get(1)
                    .filter(|_| tokens.len() == 2)
                    .and_then(|t| t.parse().ok())
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| ParseError::syntax(line, "expected `level <number>`"))?;
                if number <= self.last_level {
                    return Err(ParseError::syntax(
                        line,
                        "template levels must be declared in increasing order",
                    ));
                }
                self.last_level = number;
                self.level = Some(TemplateLevelBuilder {
                    line,
                    number,
                    universe: universes.get(&number).cloned(),
                    templates: Vec::new(),
                    template_ids: BTreeSet::new(),
                    template: None,
                });
                Ok(())
            }
            "template" => {
                let level = self.level.as_mut().ok_or_else(|| {
                    ParseError::syntax(line, "`template` outside a level")
                })?;
                finish_template(level)?;
                if tokens.len() != 3 {
                    return Err(ParseError::syntax(
                        line,
                        "expected `template <id> produces=<label>`",
                    ));
                }
                let id = ident(tokens[1], "template id", line)?;
                let produces = ident(attr(tokens[2], "produces", line)?, "type label", line)?;
                if !level.template_ids.insert(id.clone()) {
                    return Err(ParseError::syntax(
                        line,
                        format!("duplicate template id `{id}` in level {}", level.number),
                    ));
                }
                level.template = Some(TemplateBuilder {
                    line,
                    id,
                    produces,
                    slots: Vec::new(),
                });
                Ok(())
            }
            "slot" => {
                let level = self.level.as_mut().ok_or_else(|| {
                    ParseError::syntax(line, "`slot` outside a level")
                })?;
                let template = level.template.as_mut().ok_or_else(|| {
                    ParseError::syntax(line, "`slot` outside a template")
                })?;
                if tokens.len() != 3 {
                    return Err(ParseError::syntax(
                        line,
                        "expected `slot type=<label> count=<n>`",
                    ));
                }
                let label = ident(attr(tokens[1], "type", line)?, "type label", line)?;
                let count = parse_count(attr(tokens[2], "count", line)?, line)?;
                if count == 0 {
                    return Err(ParseError::domain(
                        line,
                        Error::ZeroSlotCount {
                            template: template.id.clone(),
                        },
                    ));
                }
                template.slots.push((label, count));
                Ok(())
            }
            other => Err(ParseError::syntax(
                line,
                format!("unknown directive `{other}`"),
            )),
        }
    }

    fn finish_level(&mut self) -> Result<(), ParseError> {
        let Some(mut level) = self.level.take() else {
            return Ok(());
        };
        finish_template(&mut level)?;
        match level.universe {
            Some(_) if level.templates.is_empty() => Err(ParseError::domain(
                level.line,
                Error::EmptyTemplateLibrary {
                    level: level.number,
                },
            )),
            Some(_) => {
                self.levels.insert(level.number, level.templates);
                Ok(())
            }
            // The scenario has no such level; nothing to build.
            None => Ok(()),
        }
    }

    fn finish(mut self, last_line: usize) -> Result<TemplateDoc, ParseError> {
        if !self.version_seen {
            return Err(ParseError::syntax(
                last_line,
                "the file must start with `template-version 1`",
            ));
        }
        self.finish_level()?;
        if self.last_level == 0 {
            return Err(ParseError::syntax(
                last_line,
                "the template file declares no levels",
            ));
        }
        Ok(self.levels)
    }
}

fn finish_template(level: &mut TemplateLevelBuilder) -> Result<(), ParseError> {
    let Some(builder) = level.template.take() else {
        return Ok(());
    };
    if builder.slots.is_empty() {
        return Err(ParseError::syntax(
            builder.line,
            format!("template `{}` declares no slots", builder.id),
        ));
    }
    if let Some(universe) = &level.universe {
        let template = Template::new(builder.id, builder.produces, universe.clone(), builder.slots)
            .map_err(|e| ParseError::domain(builder.line, e))?;
        level.templates.push(template);
    }
    Ok(())
}
