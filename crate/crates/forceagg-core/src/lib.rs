//! Evidential force aggregation.
//!
//! Intelligence reports about a clustered, partially observed force tell
//! us things like "two, maybe three armoured vehicles, at least one of
//! them a tank". This crate turns a set of such reports into a ranked
//! judgement about which known unit templates the cluster could be, and
//! stacks those judgements level by level into a force structure:
//! vehicles into companies, companies into battalions, and so on.
//!
//! The pipeline per cluster is:
//!
//! 1. [`combine`](combination::combine) the cluster's reports into a
//!    joint frame, one hypothesis per way of picking a focal element (or
//!    ignorance) from every report;
//! 2. optionally [`prune`](combination::JointBpa::prune) negligible
//!    hypotheses and renormalize;
//! 3. [`marginalize`](combination::JointBpa::marginalize) into count
//!    distributions per vehicle-type set;
//! 4. [`rank`](templates::rank) the level's template library by fitness
//!    against the frame and pick the best as the cluster's unit.
//!
//! [`aggregation::aggregate_hierarchy`] runs that pipeline across all
//! levels, lifting each recognized unit into a report for the cluster
//! that consumes it. All mass arithmetic is exact rational arithmetic;
//! results are reproducible to the byte.
//!
//! The `io` module reads and writes the scenario and template file
//! formats and renders results at selectable verbosity.

pub mod aggregation;
pub mod combination;
pub mod error;
pub mod evidence;
pub mod io;
pub mod rational;
pub mod templates;

#[cfg(test)]
pub(crate) mod fixtures;

pub use aggregation::{
    aggregate_cluster, aggregate_hierarchy, AggregatedUnit, AggregationOptions, ClusterAnalysis,
    ClusterSpec, HierarchyRun, LevelOutcome, LevelSpec, UnitNode,
};
pub use combination::{
    combine, JointBpa, JointHypothesis, MarginalAssignment, Slot, DEFAULT_HYPOTHESIS_LIMIT,
};
pub use error::{Error, ErrorClass};
pub use evidence::{
    direct_sum, precombine_same_object, Cluster, CountSet, Proposition, Report, TypeSet,
    TypeUniverse, MAX_TYPES,
};
pub use rational::Mass;
pub use templates::{rank, FitnessLedger, Template, TemplateScore};
