//! Level-by-level force aggregation.
//!
//! One cluster aggregates in four steps: combine its reports into a joint
//! frame, optionally prune negligible hypotheses, marginalize for
//! reporting, and rank the level's template library to select the
//! best-fitting unit. The selected unit then feeds the next hierarchy
//! level as a fresh report whose uncertainty is the unit's basic
//! probability, which is how battalion-level aggregation can run on top
//! of company-level results, and so on up the force structure.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::combination::{combine, JointBpa, MarginalAssignment, DEFAULT_HYPOTHESIS_LIMIT};
use crate::error::Error;
use crate::evidence::{Cluster, CountSet, Proposition, Report, TypeUniverse};
use crate::rational::Mass;
use crate::templates::{rank, FitnessLedger, Template};

/// Knobs for a run. The defaults combine exhaustively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationOptions {
    /// Refuse joint frames with more hypotheses than this.
    pub hypothesis_limit: u64,
    /// When set, hypotheses with mass below the threshold are dropped and
    /// the rest renormalized before ranking.
    pub prune_threshold: Option<Mass>,
}

impl Default for AggregationOptions {
    fn default() -> Self {
        AggregationOptions {
            hypothesis_limit: DEFAULT_HYPOTHESIS_LIMIT,
            prune_threshold: None,
        }
    }
}

/// The unit a cluster was classified as.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregatedUnit {
    cluster_id: String,
    template_id: String,
    produces: String,
    fitness: Mass,
    support: Mass,
    level: usize,
    report_ids: Vec<String>,
}

impl AggregatedUnit {
    pub fn cluster_id(&self) -> &str {
        &self.cluster_id
    }

    pub fn template_id(&self) -> &str {
        &self.template_id
    }

    /// The recognized unit's type label, valid one level up.
    pub fn produces(&self) -> &str {
        &self.produces
    }

    /// Aggregate fitness of the selected template.
    pub fn fitness(&self) -> &Mass {
        &self.fitness
    }

    /// Basic probability that the selection is correct; becomes the focal
    /// mass of the lifted report.
    pub fn support(&self) -> &Mass {
        &self.support
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn report_ids(&self) -> &[String] {
        &self.report_ids
    }
}

/// Everything produced while aggregating one cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAnalysis {
    unit: AggregatedUnit,
    ledger: FitnessLedger,
    joint: JointBpa,
    marginals: MarginalAssignment,
    /// Mass discarded by pruning, when pruning ran.
    pruned_mass: Option<Mass>,
    unit_refs: Vec<String>,
}

impl ClusterAnalysis {
    pub fn unit(&self) -> &AggregatedUnit {
        &self.unit
    }

    pub fn ledger(&self) -> &FitnessLedger {
        &self.ledger
    }

    /// The joint frame the ranking ran on (after pruning, if any).
    pub fn joint(&self) -> &JointBpa {
        &self.joint
    }

    pub fn marginals(&self) -> &MarginalAssignment {
        &self.marginals
    }

    pub fn pruned_mass(&self) -> Option<&Mass> {
        self.pruned_mass.as_ref()
    }

    /// Previous-level cluster ids whose units fed this cluster.
    pub fn unit_refs(&self) -> &[String] {
        &self.unit_refs
    }
}

/// Runs the whole single-cluster pipeline and selects a unit.
pub fn aggregate_cluster(
    cluster: &Cluster,
    templates: &[Template],
    level: usize,
    options: &AggregationOptions,
) -> Result<ClusterAnalysis, Error> {
    let combined = combine(cluster, options.hypothesis_limit)?;
    let (joint, pruned_mass) = match &options.prune_threshold {
        Some(threshold) if threshold.is_positive() => {
            let (pruned, removed) = combined.prune(threshold)?;
            (pruned, Some(removed))
        }
        _ => (combined, None),
    };
    let marginals = joint.marginalize();
    let ledger = rank(&joint, templates, level)?;
    let best = ledger.best();
    let unit = AggregatedUnit {
        cluster_id: cluster.id().to_string(),
        template_id: best.template_id().to_string(),
        produces: best.produces().to_string(),
        fitness: best.aggregate().clone(),
        support: best.support().clone(),
        level,
        report_ids: joint.report_ids().to_vec(),
    };
    Ok(ClusterAnalysis {
        unit,
        ledger,
        joint,
        marginals,
        pruned_mass,
        unit_refs: Vec::new(),
    })
}

/// Turns an aggregated unit into a report for the next level up: one unit
/// of its produced type, believed to the unit's support, with the rest
/// left as ignorance. A unit with no support at all lifts into pure
/// ignorance.
pub fn lifted_report(
    unit: &AggregatedUnit,
    universe: &Arc<TypeUniverse>,
    level: usize,
) -> Result<Report, Error> {
    let types = universe
        .type_set([unit.produces()])
        .map_err(|_| Error::UnknownProducesLabel {
            unit: unit.cluster_id().to_string(),
            label: unit.produces().to_string(),
            level,
        })?;
    let support = unit.support().clone();
    let focal_elements = if support.is_zero() {
        Vec::new()
    } else {
        let one_of_it = Proposition::new(CountSet::singleton(1), types)
            .expect("type set came from the universe");
        vec![(one_of_it, support.clone())]
    };
    Report::new(unit.cluster_id(), focal_elements, Mass::one() - support)
}

/// One cluster of one scenario level, already validated and precombined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSpec {
    pub id: String,
    pub reports: Vec<Report>,
    /// Cluster ids from the previous level whose aggregated units feed
    /// this cluster.
    pub unit_refs: Vec<String>,
}

/// One hierarchy level of a scenario: its type universe and its clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSpec {
    pub level: usize,
    pub universe: Arc<TypeUniverse>,
    pub clusters: Vec<ClusterSpec>,
}

/// Everything one level produced: successful analyses and recorded
/// per-cluster failures, both sorted by cluster id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelOutcome {
    level: usize,
    analyses: Vec<ClusterAnalysis>,
    failures: Vec<(String, Error)>,
}

impl LevelOutcome {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn analyses(&self) -> &[ClusterAnalysis] {
        &self.analyses
    }

    pub fn failures(&self) -> &[(String, Error)] {
        &self.failures
    }

    pub fn analysis(&self, cluster_id: &str) -> Option<&ClusterAnalysis> {
        self.analyses
            .iter()
            .find(|a| a.unit().cluster_id() == cluster_id)
    }
}

/// The result of a full multi-level run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyRun {
    levels: Vec<LevelOutcome>,
}

/// An aggregated unit with the lower-level units that fed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitNode {
    pub unit: AggregatedUnit,
    pub children: Vec<UnitNode>,
}

impl HierarchyRun {
    pub fn levels(&self) -> &[LevelOutcome] {
        &self.levels
    }

    /// The recognized force structure as a forest. Roots are units no
    /// higher-level cluster consumed, highest level first; children keep
    /// their cluster's declaration order.
    pub fn forest(&self) -> Vec<UnitNode> {
        let mut unconsumed: BTreeMap<&str, UnitNode> = BTreeMap::new();
        for level in &self.levels {
            for analysis in &level.analyses {
                let children: Vec<UnitNode> = analysis
                    .unit_refs()
                    .iter()
                    .filter_map(|r| unconsumed.remove(r.as_str()))
                    .collect();
                unconsumed.insert(
                    analysis.unit().cluster_id(),
                    UnitNode {
                        unit: analysis.unit().clone(),
                        children,
                    },
                );
            }
        }
        let mut roots: Vec<UnitNode> = unconsumed.into_values().collect();
        roots.sort_by(|a, b| {
            b.unit
                .level
                .cmp(&a.unit.level)
                .then_with(|| a.unit.cluster_id.cmp(&b.unit.cluster_id))
        });
        roots
    }
}

/// Aggregates a whole scenario bottom-up.
///
/// Configuration problems (a level without a template library, a joint
/// frame over the hypothesis limit) abort the run. Problems confined to
/// one cluster's data (a degenerate cluster, a reference to a cluster
/// that itself failed, a unit type missing from the next level's
/// universe) are recorded against that cluster and aggregation moves on,
/// so one bad cluster cannot take down an entire corps picture.
pub fn aggregate_hierarchy(
    levels: &[LevelSpec],
    libraries: &BTreeMap<usize, Vec<Template>>,
    options: &AggregationOptions,
) -> Result<HierarchyRun, Error> {
    let mut outcomes: Vec<LevelOutcome> = Vec::with_capacity(levels.len());

    for spec in levels {
        let templates = libraries
            .get(&spec.level)
            .ok_or(Error::MissingTemplateLevel { level: spec.level })?;
        if templates.is_empty() {
            return Err(Error::EmptyTemplateLibrary { level: spec.level });
        }

        let mut analyses = Vec::new();
        let mut failures: Vec<(String, Error)> = Vec::new();
        for cluster_spec in &spec.clusters {
            match aggregate_one(cluster_spec, spec, templates, outcomes.last(), options) {
                Ok(analysis) => analyses.push(analysis),
                Err(error) if matches!(error, Error::HypothesisLimitExceeded { .. }) => {
                    return Err(error)
                }
                Err(error) => failures.push((cluster_spec.id.clone(), error)),
            }
        }
        analyses.sort_by(|a, b| a.unit().cluster_id().cmp(b.unit().cluster_id()));
        failures.sort_by(|a, b| a.0.cmp(&b.0));
        outcomes.push(LevelOutcome {
            level: spec.level,
            analyses,
            failures,
        });
    }

    Ok(HierarchyRun { levels: outcomes })
}

fn aggregate_one(
    cluster_spec: &ClusterSpec,
    level_spec: &LevelSpec,
    templates: &[Template],
    previous: Option<&LevelOutcome>,
    options: &AggregationOptions,
) -> Result<ClusterAnalysis, Error> {
    let mut reports = cluster_spec.reports.clone();
    for unit_ref in &cluster_spec.unit_refs {
        let fed = previous
            .and_then(|level| level.analysis(unit_ref))
            .ok_or_else(|| Error::UnknownUnitRef {
                cluster: cluster_spec.id.clone(),
                unit: unit_ref.clone(),
            })?;
        reports.push(lifted_report(
            fed.unit(),
            &level_spec.universe,
            level_spec.level,
        )?);
    }
    let cluster = Cluster::new(
        cluster_spec.id.clone(),
        level_spec.universe.clone(),
        reports,
    )?;
    let mut analysis = aggregate_cluster(&cluster, templates, level_spec.level, options)?;
    analysis.unit_refs = cluster_spec.unit_refs.clone();
    Ok(analysis)
}
