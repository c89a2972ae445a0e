//! Combination of a cluster's reports into a joint basic probability
//! assignment.
//!
//! Reports about *different* objects cannot be intersected the way
//! same-object evidence can. Instead each joint hypothesis keeps one slot
//! per report, holding either a focal proposition of that report or its
//! ignorance, with mass equal to the product of the chosen masses. No
//! conflict arises, so no normalization is needed and the masses sum to
//! exactly 1.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::Zero;

use crate::error::Error;
use crate::evidence::{direct_sum, Cluster, CountSet, Proposition, TypeSet, TypeUniverse};
use crate::rational::Mass;

/// Default ceiling on the joint frame size. The frame grows as the product
/// of per-report alternative counts, so runaway inputs are cut off early.
pub const DEFAULT_HYPOTHESIS_LIMIT: u64 = 1_000_000;

/// One coordinate of a joint hypothesis: what a single report contributes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    /// The report's ignorance was chosen; it constrains nothing.
    Theta,
    /// One focal proposition of the report was chosen.
    Focal(Proposition),
}

impl Slot {
    pub fn proposition(&self) -> Option<&Proposition> {
        match self {
            Slot::Theta => None,
            Slot::Focal(p) => Some(p),
        }
    }

    pub fn render(&self, universe: &TypeUniverse) -> String {
        match self {
            Slot::Theta => "theta".to_string(),
            Slot::Focal(p) => p.render(universe),
        }
    }
}

/// One joint alternative over all reports of a cluster, with its mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointHypothesis {
    slots: Vec<Slot>,
    mass: Mass,
}

impl JointHypothesis {
    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn mass(&self) -> &Mass {
        &self.mass
    }

    /// `<({2},{MBT}), theta>`
    pub fn render(&self, universe: &TypeUniverse) -> String {
        let parts: Vec<String> = self.slots.iter().map(|s| s.render(universe)).collect();
        format!("<{}>", parts.join(", "))
    }
}

/// The joint basic probability assignment over a cluster's reports.
///
/// Hypotheses are enumerated in a fixed order: the first report varies
/// slowest, the last report fastest, and within each report its focal
/// propositions come in declaration order with ignorance last. Every
/// consumer of a `JointBpa` sees the same order, which keeps downstream
/// output deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointBpa {
    cluster_id: String,
    universe: Arc<TypeUniverse>,
    report_ids: Vec<String>,
    n_max: u64,
    hypotheses: Vec<JointHypothesis>,
}

impl JointBpa {
    pub fn cluster_id(&self) -> &str {
        &self.cluster_id
    }

    pub fn universe(&self) -> &Arc<TypeUniverse> {
        &self.universe
    }

    pub fn report_ids(&self) -> &[String] {
        &self.report_ids
    }

    /// Count ceiling inherited from the cluster; ignorance slots are read
    /// as "anywhere from zero up to this many objects".
    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn hypotheses(&self) -> &[JointHypothesis] {
        &self.hypotheses
    }

    pub fn mass_sum(&self) -> Mass {
        self.hypotheses
            .iter()
            .fold(Mass::zero(), |acc, h| acc + h.mass())
    }

    /// Collapses the joint frame onto one type set: each hypothesis lends
    /// its whole mass to the direct sum of counts over slots whose type
    /// set is exactly `types`. Hypotheses with no such slot support zero
    /// objects of that description. Ignorance slots never match.
    pub fn marginal_for(&self, types: TypeSet) -> BTreeMap<CountSet, Mass> {
        let mut out: BTreeMap<CountSet, Mass> = BTreeMap::new();
        for hypothesis in &self.hypotheses {
            let matching: Vec<&CountSet> = hypothesis
                .slots
                .iter()
                .filter_map(Slot::proposition)
                .filter(|p| p.types() == types)
                .map(Proposition::counts)
                .collect();
            let counts = if matching.is_empty() {
                CountSet::zero()
            } else {
                direct_sum(matching)
            };
            *out.entry(counts).or_insert_with(Mass::zero) += hypothesis.mass();
        }
        out
    }

    /// Tabulates [`Self::marginal_for`] over every type set that occurs as
    /// a focal slot anywhere in the frame.
    pub fn marginalize(&self) -> MarginalAssignment {
        let type_sets: BTreeSet<TypeSet> = self
            .hypotheses
            .iter()
            .flat_map(|h| h.slots.iter().filter_map(Slot::proposition))
            .map(Proposition::types)
            .collect();
        let per_type_set = type_sets
            .into_iter()
            .map(|t| (t, self.marginal_for(t)))
            .collect();
        MarginalAssignment { per_type_set }
    }

    /// Drops hypotheses with mass below `threshold` and renormalizes the
    /// survivors. Returns the pruned frame and the total mass discarded
    /// (before renormalization). Fails when nothing survives.
    pub fn prune(&self, threshold: &Mass) -> Result<(JointBpa, Mass), Error> {
        let (kept, dropped): (Vec<&JointHypothesis>, Vec<&JointHypothesis>) = self
            .hypotheses
            .iter()
            .partition(|h| h.mass() >= threshold);
        if kept.is_empty() {
            return Err(Error::PruneEliminatesAll {
                threshold: threshold.to_string(),
            });
        }
        let removed: Mass = dropped
            .iter()
            .fold(Mass::zero(), |acc, h| acc + h.mass());
        let kept_total: Mass = kept.iter().fold(Mass::zero(), |acc, h| acc + h.mass());
        let hypotheses = kept
            .into_iter()
            .map(|h| JointHypothesis {
                slots: h.slots.clone(),
                mass: h.mass.clone() / kept_total.clone(),
            })
            .collect();
        Ok((
            JointBpa {
                cluster_id: self.cluster_id.clone(),
                universe: self.universe.clone(),
                report_ids: self.report_ids.clone(),
                n_max: self.n_max,
                hypotheses,
            },
            removed,
        ))
    }
}

/// Marginal count distributions per focal type set, as produced by
/// [`JointBpa::marginalize`]. Each inner distribution sums to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalAssignment {
    per_type_set: BTreeMap<TypeSet, BTreeMap<CountSet, Mass>>,
}

impl MarginalAssignment {
    pub fn per_type_set(&self) -> &BTreeMap<TypeSet, BTreeMap<CountSet, Mass>> {
        &self.per_type_set
    }

    pub fn get(&self, types: TypeSet) -> Option<&BTreeMap<CountSet, Mass>> {
        self.per_type_set.get(&types)
    }
}

/// Builds the joint basic probability assignment for a cluster, refusing
/// frames larger than `limit` hypotheses.
pub fn combine(cluster: &Cluster, limit: u64) -> Result<JointBpa, Error> {
    // Per report: focal propositions in declaration order, ignorance last
    // (only when it carries mass; zero-mass alternatives are pointless).
    let options: Vec<Vec<(Slot, &Mass)>> = cluster
        .reports()
        .iter()
        .map(|report| {
            let mut opts: Vec<(Slot, &Mass)> = report
                .focal_elements()
                .iter()
                .map(|(p, m)| (Slot::Focal(p.clone()), m))
                .collect();
            if num::Signed::is_positive(report.theta_mass()) {
                opts.push((Slot::Theta, report.theta_mass()));
            }
            opts
        })
        .collect();

    let mut required: u128 = 1;
    for opts in &options {
        required = required.saturating_mul(opts.len() as u128);
    }
    if required > u128::from(limit) {
        return Err(Error::HypothesisLimitExceeded { required, limit });
    }

    let mut hypotheses = Vec::with_capacity(required as usize);
    let mut digits = vec![0usize; options.len()];
    loop {
        let mut slots = Vec::with_capacity(options.len());
        let mut mass = Mass::from_integer(1.into());
        for (report_index, &choice) in digits.iter().enumerate() {
            let (slot, slot_mass) = &options[report_index][choice];
            slots.push(slot.clone());
            mass *= (*slot_mass).clone();
        }
        hypotheses.push(JointHypothesis { slots, mass });

        // Advance the odometer, last report fastest.
        let mut position = options.len();
        loop {
            if position == 0 {
                return Ok(JointBpa {
                    cluster_id: cluster.id().to_string(),
                    universe: cluster.universe().clone(),
                    report_ids: cluster.reports().iter().map(|r| r.id().to_string()).collect(),
                    n_max: cluster.n_max(),
                    hypotheses,
                });
            }
            position -= 1;
            digits[position] += 1;
            if digits[position] < options[position].len() {
                break;
            }
            digits[position] = 0;
        }
    }
}
