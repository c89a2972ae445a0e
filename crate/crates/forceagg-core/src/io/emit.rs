//! Deterministic text emission: scenario and template files (the inverse
//! of parsing) and human-readable result reports.
//!
//! Emission is byte deterministic: the same model always renders to the
//! same string, with no hashing, timestamps or locale anywhere. Result
//! masses render as exact rationals with a decimal gloss, so `5/8
//! (0.625)` can be checked against a calculator without losing exactness.

use crate::aggregation::{ClusterAnalysis, HierarchyRun, UnitNode};
use crate::combination::{JointBpa, MarginalAssignment};
use crate::evidence::{CountSet, TypeSet};
use crate::rational::render;
use crate::templates::{
    count_fitness, subset_fitness, supported_counts, worst_subset_fitness, Template,
};

use super::{ScenarioDoc, TemplateDoc, Verbosity};

/// Per-subset tables grow as 2^types; past this many types they are
/// replaced by a note.
const MAX_TABLE_TYPES: usize = 6;

fn counts_attr(counts: &CountSet) -> String {
    let contiguous = counts.len() as u64 == counts.max() - counts.min() + 1;
    if contiguous && counts.len() >= 4 {
        format!("{}..{}", counts.min(), counts.max())
    } else {
        counts
            .values()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn hypothesis_count(n: usize) -> String {
    if n == 1 {
        "1 hypothesis".to_string()
    } else {
        format!("{n} hypotheses")
    }
}

/// Renders a scenario in the normalized form `parse_scenario` accepts:
/// same-object merges already applied, ignorance always explicit.
pub fn emit_scenario(doc: &ScenarioDoc) -> String {
    let mut out = String::from("scenario-version 1\n");
    for level in &doc.levels {
        out.push_str(&format!("\nlevel {}\n", level.level));
        out.push_str(&format!("types {}\n", level.universe.labels().join(" ")));
        for cluster in &level.clusters {
            out.push_str(&format!("\ncluster {}\n", cluster.id));
            for report in &cluster.reports {
                out.push_str(&format!("report {}\n", report.id()));
                for (proposition, mass) in report.focal_elements() {
                    let labels: Vec<&str> = proposition
                        .types()
                        .indices()
                        .map(|i| level.universe.label(i))
                        .collect();
                    out.push_str(&format!(
                        "focal counts={} types={} mass={}\n",
                        counts_attr(proposition.counts()),
                        labels.join(","),
                        mass
                    ));
                }
                out.push_str(&format!("theta mass={}\n", report.theta_mass()));
            }
            for unit_ref in &cluster.unit_refs {
                out.push_str(&format!("unit {unit_ref}\n"));
            }
        }
    }
    out
}

/// Renders per-level template libraries as a template file.
pub fn emit_templates(doc: &TemplateDoc) -> String {
    let mut out = String::from("template-version 1\n");
    for (level, templates) in doc {
        out.push_str(&format!("\nlevel {level}\n"));
        for template in templates {
            out.push_str(&format!(
                "template {} produces={}\n",
                template.id(),
                template.produces()
            ));
            for (index, count) in template.slots() {
                out.push_str(&format!(
                    "slot type={} count={}\n",
                    template.universe().label(index),
                    count
                ));
            }
        }
    }
    out
}

/// Renders a combined joint frame and its marginal count distributions.
pub fn emit_joint(joint: &JointBpa, marginals: &MarginalAssignment) -> String {
    let universe = joint.universe();
    let mut out = format!("cluster {}\n", joint.cluster_id());
    out.push_str(&format!(
        "joint frame ({})\n",
        hypothesis_count(joint.hypotheses().len())
    ));
    for hypothesis in joint.hypotheses() {
        out.push_str(&format!(
            "  {} mass {}\n",
            hypothesis.render(universe),
            render(hypothesis.mass())
        ));
    }
    out.push_str("marginal counts\n");
    for (types, distribution) in marginals.per_type_set() {
        let cells: Vec<String> = distribution
            .iter()
            .map(|(counts, mass)| format!("{}={}", counts, render(mass)))
            .collect();
        out.push_str(&format!(
            "  {}: {}\n",
            universe.render_set(*types),
            cells.join(" ")
        ));
    }
    out
}

/// Renders one cluster's analysis at the requested verbosity. The result
/// has no base indentation; `emit_run` nests it under a level header.
pub fn emit_analysis(
    analysis: &ClusterAnalysis,
    templates: &[Template],
    verbosity: Verbosity,
) -> String {
    let unit = analysis.unit();
    let joint = analysis.joint();
    let universe = joint.universe();
    let full = universe.full_set();

    let mut out = format!(
        "cluster {}: {} ({}) fitness {} support {}\n",
        unit.cluster_id(),
        unit.template_id(),
        unit.produces(),
        render(unit.fitness()),
        render(unit.support())
    );
    if let Some(removed) = analysis.pruned_mass() {
        out.push_str(&format!("  pruned mass {}\n", render(removed)));
    }
    for warning in analysis.ledger().warnings() {
        out.push_str(&format!("  warning: {warning}\n"));
    }

    if verbosity >= Verbosity::Ranking {
        out.push_str("  ranking\n");
        for (place, score) in analysis.ledger().ranked().enumerate() {
            out.push_str(&format!(
                "    {}. {} ({}) fitness {} support {}\n",
                place + 1,
                score.template_id(),
                score.produces(),
                render(score.aggregate()),
                render(score.support())
            ));
        }
    }

    if verbosity >= Verbosity::Tables {
        out.push_str("  marginal counts\n");
        for (types, distribution) in analysis.marginals().per_type_set() {
            let cells: Vec<String> = distribution
                .iter()
                .map(|(counts, mass)| format!("{}={}", counts, render(mass)))
                .collect();
            out.push_str(&format!(
                "    {}: {}\n",
                universe.render_set(*types),
                cells.join(" ")
            ));
        }

        if universe.len() <= MAX_TABLE_TYPES {
            if !templates.is_empty() {
                out.push_str("  requested counts\n");
                for bits in 1..=full.bits() {
                    let subset = TypeSet::from_bits(bits);
                    let cells: Vec<String> = templates
                        .iter()
                        .map(|t| format!("{}={}", t.id(), t.requested_count(subset)))
                        .collect();
                    out.push_str(&format!(
                        "    {}: {}\n",
                        universe.render_set(subset),
                        cells.join(" ")
                    ));
                }
            }
            out.push_str("  supported counts\n");
            for hypothesis in joint.hypotheses() {
                let cells: Vec<String> = (1..=full.bits())
                    .map(|bits| {
                        let subset = TypeSet::from_bits(bits);
                        format!(
                            "{}={}",
                            universe.render_set(subset),
                            supported_counts(hypothesis, subset, full, joint.n_max())
                        )
                    })
                    .collect();
                out.push_str(&format!(
                    "    {}: {}\n",
                    hypothesis.render(universe),
                    cells.join(" ")
                ));
            }
            for template in templates {
                out.push_str(&format!(
                    "  subset fitness [{} ({})]\n",
                    template.id(),
                    template.produces()
                ));
                for hypothesis in joint.hypotheses() {
                    let cells: Vec<String> = (1..=full.bits())
                        .map(|bits| {
                            let subset = TypeSet::from_bits(bits);
                            let supported =
                                supported_counts(hypothesis, subset, full, joint.n_max());
                            format!(
                                "{}={}",
                                universe.render_set(subset),
                                render(&subset_fitness(
                                    &supported,
                                    template.requested_count(subset)
                                ))
                            )
                        })
                        .collect();
                    out.push_str(&format!(
                        "    {}: {} worst {}\n",
                        hypothesis.render(universe),
                        cells.join(" "),
                        render(&worst_subset_fitness(template, hypothesis, joint.n_max()))
                    ));
                }
            }
        } else {
            out.push_str(&format!(
                "  subset tables omitted (universe has {} types)\n",
                universe.len()
            ));
        }

        if !templates.is_empty() {
            out.push_str("  count fitness\n");
            for hypothesis in joint.hypotheses() {
                let cells: Vec<String> = templates
                    .iter()
                    .map(|t| {
                        format!(
                            "{}={}",
                            t.id(),
                            render(&count_fitness(t, hypothesis, joint.n_max()))
                        )
                    })
                    .collect();
                out.push_str(&format!(
                    "    {}: {}\n",
                    hypothesis.render(universe),
                    cells.join(" ")
                ));
            }
        }

        out.push_str("  fitness per hypothesis\n");
        for (k, hypothesis) in joint.hypotheses().iter().enumerate() {
            let cells: Vec<String> = analysis
                .ledger()
                .scores()
                .iter()
                .map(|s| format!("{}={}", s.template_id(), render(&s.per_hypothesis()[k])))
                .collect();
            out.push_str(&format!(
                "    {} mass {}: {}\n",
                hypothesis.render(universe),
                render(hypothesis.mass()),
                cells.join(" ")
            ));
        }
    }

    if verbosity >= Verbosity::Hypotheses {
        out.push_str(&format!(
            "  joint frame ({})\n",
            hypothesis_count(joint.hypotheses().len())
        ));
        for hypothesis in joint.hypotheses() {
            out.push_str(&format!(
                "    {} mass {}\n",
                hypothesis.render(universe),
                render(hypothesis.mass())
            ));
        }
    }

    out
}

fn push_forest(out: &mut String, nodes: &[UnitNode], depth: usize) {
    for node in nodes {
        out.push_str(&format!(
            "{}{}: {} [{}] support {}\n",
            "  ".repeat(depth + 1),
            node.unit.cluster_id(),
            node.unit.produces(),
            node.unit.template_id(),
            render(node.unit.support())
        ));
        push_forest(out, &node.children, depth + 1);
    }
}

/// Renders a whole hierarchical run: per-level cluster results (analyses
/// first, then recorded failures) followed by the recognized force
/// structure.
pub fn emit_run(run: &HierarchyRun, libraries: &TemplateDoc, verbosity: Verbosity) -> String {
    let mut out = String::new();
    for level in run.levels() {
        out.push_str(&format!("level {}\n", level.level()));
        let templates = libraries
            .get(&level.level())
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        for analysis in level.analyses() {
            for line in emit_analysis(analysis, templates, verbosity).lines() {
                out.push_str("  ");
                out.push_str(line);
                out.push('\n');
            }
        }
        for (cluster, error) in level.failures() {
            out.push_str(&format!("  cluster {cluster}: failed: {error}\n"));
        }
    }
    out.push_str("\nforce structure\n");
    let forest = run.forest();
    if forest.is_empty() {
        out.push_str("  (none)\n");
    } else {
        push_forest(&mut out, &forest, 0);
    }
    out
}
