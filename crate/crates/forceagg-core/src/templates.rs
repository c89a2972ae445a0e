//! Templates and the fitness measure that ranks them against a joint
//! basic probability assignment.
//!
//! A template requests so-many objects of each of a few types. Fused
//! intelligence proposes counts for *sets* of types, so template and
//! intelligence are compared from the perspective of every subset of the
//! type universe: how many objects does the template request there, and
//! how many could the intelligence be supporting there? The per-subset
//! scores fold into a single fitness per joint hypothesis, and the
//! mass-weighted sum of those ranks the library.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{One, Zero};

use crate::combination::{JointBpa, JointHypothesis, Slot};
use crate::error::Error;
use crate::evidence::{direct_sum, CountSet, TypeSet, TypeUniverse};
use crate::rational::{ratio_u64, Mass};

/// A force-structure template: a named pattern of requested object counts
/// per type, recognizing a unit of the next hierarchical level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    id: String,
    produces: String,
    universe: Arc<TypeUniverse>,
    // Type index -> requested count; duplicate slot declarations for one
    // type merge by summing.
    slots: BTreeMap<usize, u64>,
}

impl Template {
    pub fn new<S: AsRef<str>>(
        id: impl Into<String>,
        produces: impl Into<String>,
        universe: Arc<TypeUniverse>,
        slots: impl IntoIterator<Item = (S, u64)>,
    ) -> Result<Self, Error> {
        let id = id.into();
        let mut merged: BTreeMap<usize, u64> = BTreeMap::new();
        for (label, count) in slots {
            if count == 0 {
                return Err(Error::ZeroSlotCount {
                    template: id.clone(),
                });
            }
            let index = universe
                .index_of(label.as_ref())
                .ok_or_else(|| Error::TemplateOutsideUniverse {
                    template: id.clone(),
                })?;
            *merged.entry(index).or_insert(0) += count;
        }
        // A template with no slots at all is degenerate but legal: it
        // requests nothing anywhere and therefore fits any intelligence
        // perfectly. Input parsing rejects it; constructing one directly
        // is allowed so the measure's edge case stays testable.
        Ok(Template {
            id,
            produces: produces.into(),
            universe,
            slots: merged,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Label of the unit this template recognizes, used as an object type
    /// one hierarchical level up.
    pub fn produces(&self) -> &str {
        &self.produces
    }

    pub fn universe(&self) -> &Arc<TypeUniverse> {
        &self.universe
    }

    /// `(type index, requested count)` pairs in universe order.
    pub fn slots(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.slots.iter().map(|(&i, &n)| (i, n))
    }

    /// Objects this template requests from the perspective of `types`:
    /// the summed counts of every slot whose type lies inside the set.
    pub fn requested_count(&self, types: TypeSet) -> u64 {
        self.slots
            .iter()
            .filter(|(&index, _)| types.contains(index))
            .map(|(_, &count)| count)
            .sum()
    }

    /// Total requested count, i.e. the request from the full universe.
    pub fn total_requested(&self) -> u64 {
        self.slots.values().sum()
    }
}

/// Counts a joint hypothesis could be supporting from the perspective of
/// `types`: the direct sum over every slot whose proposition refers only
/// to types inside the set. An ignorance slot reads as "zero up to
/// `n_max` objects of any type", so it contributes `{0..n_max}` when and
/// only when `types` is the whole universe. No contributing slot means
/// certain support for zero objects.
pub fn supported_counts(
    hypothesis: &JointHypothesis,
    types: TypeSet,
    full: TypeSet,
    n_max: u64,
) -> CountSet {
    let ignorance_range = CountSet::up_to(n_max);
    let contributions: Vec<&CountSet> = hypothesis
        .slots()
        .iter()
        .filter_map(|slot| match slot {
            Slot::Focal(p) if p.types().is_subset_of(types) => Some(p.counts()),
            Slot::Theta if full.is_subset_of(types) => Some(&ignorance_range),
            _ => None,
        })
        .collect();
    direct_sum(contributions)
}

/// Fitness of a requested count against a set of supported counts: the
/// best ratio `min(n/requested, requested/n)` over supported `n`. A
/// request of zero is trivially satisfied; support for only zero objects
/// against a positive request is a total mismatch.
pub fn subset_fitness(supported: &CountSet, requested: u64) -> Mass {
    if requested == 0 {
        return Mass::one();
    }
    // The ratio rises towards n = requested and falls beyond it, so only
    // the two supported counts bracketing the request can be optimal.
    let (below, above) = supported.neighbors(requested);
    let mut best = Mass::zero();
    if let Some(n) = below {
        if n > 0 {
            best = best.max(ratio_u64(n, requested));
        }
    }
    if let Some(n) = above {
        best = best.max(ratio_u64(requested, n));
    }
    best
}

/// Worst-case fitness of a template against one joint hypothesis over all
/// subsets of the universe. Subsets where the template requests nothing
/// score a perfect 1 and never drag the minimum down, so they are
/// skipped.
pub fn worst_subset_fitness(
    template: &Template,
    hypothesis: &JointHypothesis,
    n_max: u64,
) -> Mass {
    let universe = template.universe();
    let full = universe.full_set();
    let mut worst = Mass::one();
    for subset in universe.subsets() {
        let requested = template.requested_count(subset);
        if requested == 0 {
            continue;
        }
        let supported = supported_counts(hypothesis, subset, full, n_max);
        let fitness = subset_fitness(&supported, requested);
        if fitness.is_zero() {
            return fitness;
        }
        worst = worst.min(fitness);
    }
    worst
}

/// Fitness of a template against one joint hypothesis ignoring types
/// entirely: total requested count against totally supported counts.
pub fn count_fitness(template: &Template, hypothesis: &JointHypothesis, n_max: u64) -> Mass {
    let full = template.universe().full_set();
    let supported = supported_counts(hypothesis, full, full, n_max);
    subset_fitness(&supported, template.total_requested())
}

/// Fitness of a template against one joint hypothesis: the mean of the
/// worst-subset measure (strict, type-by-type) and the count measure
/// (lenient, type-blind). The strict half alone would punish templates
/// for small amounts of missing type detail; the lenient half alone would
/// ignore types altogether.
pub fn hypothesis_fitness(
    template: &Template,
    hypothesis: &JointHypothesis,
    n_max: u64,
) -> Mass {
    let strict = worst_subset_fitness(template, hypothesis, n_max);
    let lenient = count_fitness(template, hypothesis, n_max);
    (strict + lenient) / crate::rational::whole(2)
}

/// A template's full evaluation against one joint frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateScore {
    template_id: String,
    produces: String,
    /// Fitness against each joint hypothesis, in frame order.
    per_hypothesis: Vec<Mass>,
    /// Mass-weighted fitness over the whole frame; the ranking key.
    aggregate: Mass,
    /// Basic probability that this template is the right classification,
    /// from sharing each hypothesis's mass among its best-fitting
    /// templates.
    support: Mass,
}

impl TemplateScore {
    pub fn template_id(&self) -> &str {
        &self.template_id
    }

    pub fn produces(&self) -> &str {
        &self.produces
    }

    pub fn per_hypothesis(&self) -> &[Mass] {
        &self.per_hypothesis
    }

    pub fn aggregate(&self) -> &Mass {
        &self.aggregate
    }

    pub fn support(&self) -> &Mass {
        &self.support
    }
}

/// Every template's score against one joint frame, plus the rank order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitnessLedger {
    scores: Vec<TemplateScore>,
    ranking: Vec<usize>,
    warnings: Vec<String>,
}

impl FitnessLedger {
    /// Scores in template library order (the order `rank` was given).
    pub fn scores(&self) -> &[TemplateScore] {
        &self.scores
    }

    /// Scores best-first: aggregate fitness descending, then support
    /// descending, then template id ascending.
    pub fn ranked(&self) -> impl Iterator<Item = &TemplateScore> + '_ {
        self.ranking.iter().map(|&i| &self.scores[i])
    }

    /// The selected template's score.
    pub fn best(&self) -> &TemplateScore {
        &self.scores[self.ranking[0]]
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Evaluates a template library against a joint frame: per-hypothesis
/// fitness, aggregate fitness, and the fitness-weighted support shares.
///
/// Each hypothesis's mass goes to the templates that fit it best, split
/// in proportion to their (equal, maximal) fitness. A hypothesis no
/// template fits at all spreads its mass uniformly over the library and
/// leaves a warning. `level` only labels diagnostics.
pub fn rank(
    joint: &JointBpa,
    templates: &[Template],
    level: usize,
) -> Result<FitnessLedger, Error> {
    if templates.is_empty() {
        return Err(Error::EmptyTemplateLibrary { level });
    }
    for template in templates {
        if template.universe().labels() != joint.universe().labels() {
            return Err(Error::TemplateOutsideUniverse {
                template: template.id().to_string(),
            });
        }
    }

    let universe = joint.universe();
    let full = universe.full_set();
    let n_max = joint.n_max();

    // Fitness matrix, hypothesis-major so the supported-count sets can be
    // memoized per hypothesis and shared across the whole library.
    let mut fitness: Vec<Vec<Mass>> = vec![Vec::with_capacity(joint.hypotheses().len()); templates.len()];
    for hypothesis in joint.hypotheses() {
        let mut supported_memo: BTreeMap<TypeSet, CountSet> = BTreeMap::new();
        let mut supported = |types: TypeSet| -> CountSet {
            supported_memo
                .entry(types)
                .or_insert_with(|| supported_counts(hypothesis, types, full, n_max))
                .clone()
        };
        for (t, template) in templates.iter().enumerate() {
            let mut strict = Mass::one();
            for subset in universe.subsets() {
                let requested = template.requested_count(subset);
                if requested == 0 {
                    continue;
                }
                let f = subset_fitness(&supported(subset), requested);
                if f.is_zero() {
                    strict = f;
                    break;
                }
                strict = strict.min(f);
            }
            let lenient = subset_fitness(&supported(full), template.total_requested());
            fitness[t].push((strict + lenient) / crate::rational::whole(2));
        }
    }

    let mut aggregates = vec![Mass::zero(); templates.len()];
    let mut supports = vec![Mass::zero(); templates.len()];
    let mut warnings = Vec::new();
    for (k, hypothesis) in joint.hypotheses().iter().enumerate() {
        let mass = hypothesis.mass();
        let best = fitness
            .iter()
            .map(|row| &row[k])
            .max()
            .expect("library is non-empty");
        if best.is_zero() {
            // Nothing fits: no best set to share within, so be honest
            // about total ignorance and spread the mass evenly.
            warnings.push(format!(
                "hypothesis {} fits no template; its mass is spread uniformly over the library",
                hypothesis.render(universe)
            ));
            let share = mass.clone() / crate::rational::whole(templates.len() as i64);
            for support in supports.iter_mut() {
                *support += share.clone();
            }
        } else {
            let sharers: Vec<usize> = (0..templates.len())
                .filter(|&t| &fitness[t][k] == best)
                .collect();
            let denominator: Mass = sharers
                .iter()
                .map(|&t| fitness[t][k].clone())
                .fold(Mass::zero(), |a, b| a + b);
            for &t in &sharers {
                supports[t] += mass.clone() * fitness[t][k].clone() / denominator.clone();
            }
        }
        for t in 0..templates.len() {
            aggregates[t] += mass.clone() * fitness[t][k].clone();
        }
    }

    let scores: Vec<TemplateScore> = templates
        .iter()
        .zip(fitness)
        .zip(aggregates)
        .zip(supports)
        .map(|(((template, per_hypothesis), aggregate), support)| TemplateScore {
            template_id: template.id().to_string(),
            produces: template.produces().to_string(),
            per_hypothesis,
            aggregate,
            support,
        })
        .collect();

    let mut ranking: Vec<usize> = (0..scores.len()).collect();
    ranking.sort_by(|&a, &b| {
        scores[b]
            .aggregate
            .cmp(&scores[a].aggregate)
            .then_with(|| scores[b].support.cmp(&scores[a].support))
            .then_with(|| scores[a].template_id.cmp(&scores[b].template_id))
    });

    Ok(FitnessLedger {
        scores,
        ranking,
        warnings,
    })
}
