//! Domain model for uncertain intelligence about groups of objects.
//!
//! A [`Report`] carries alternative propositions of the form "n of one of
//! these types", each with a basic probability number, plus a residual
//! ignorance mass. Reports hypothesized to describe one unit are collected
//! into a [`Cluster`]. Reports known to describe the *same* objects are
//! merged first with [`precombine_same_object`].

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::error::Error;
use crate::rational::Mass;

/// Hard cap on universe cardinality. Fitness evaluation scans the subset
/// lattice of the universe, so the cost doubles per extra type.
pub const MAX_TYPES: usize = 24;

/// The ordered set of object (or unit) types under discussion at one
/// hierarchy level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeUniverse {
    labels: Vec<String>,
}

impl TypeUniverse {
    pub fn new<I, S>(labels: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        if labels.len() > MAX_TYPES {
            return Err(Error::UniverseTooLarge {
                count: labels.len(),
                max: MAX_TYPES,
            });
        }
        let mut seen = BTreeSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateTypeLabel(label.clone()));
            }
        }
        Ok(TypeUniverse { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The full type set: every label in the universe.
    pub fn full_set(&self) -> TypeSet {
        TypeSet::from_bits(if self.labels.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.labels.len()) - 1
        })
    }

    /// Builds a type set from labels, failing on any label not in the
    /// universe or on an empty result.
    pub fn type_set<'a, I>(&self, labels: I) -> Result<TypeSet, Error>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut bits = 0u32;
        for label in labels {
            let index = self
                .index_of(label)
                .ok_or_else(|| Error::UnknownTypeLabel(label.to_string()))?;
            bits |= 1 << index;
        }
        if bits == 0 {
            return Err(Error::EmptyTypeSet);
        }
        Ok(TypeSet::from_bits(bits))
    }

    /// Renders a type set as `{A,B}` using this universe's labels.
    pub fn render_set(&self, set: TypeSet) -> String {
        let labels: Vec<&str> = set.indices().map(|i| self.label(i)).collect();
        format!("{{{}}}", labels.join(","))
    }

    /// Iterates every non-empty subset of the universe, in descending
    /// bitmask order (carry-rippler over the full mask).
    pub fn subsets(&self) -> impl Iterator<Item = TypeSet> {
        SubsetIter {
            mask: self.full_set().bits(),
            next: Some(self.full_set().bits()),
        }
        .filter(|s| !s.is_empty())
    }
}

struct SubsetIter {
    mask: u32,
    next: Option<u32>,
}

impl Iterator for SubsetIter {
    type Item = TypeSet;

    fn next(&mut self) -> Option<TypeSet> {
        let current = self.next?;
        self.next = if current == 0 {
            None
        } else {
            Some((current - 1) & self.mask)
        };
        Some(TypeSet::from_bits(current))
    }
}

/// A subset of a [`TypeUniverse`], as a bitmask over its label ordering.
///
/// May be empty only as an intermediate value (e.g. an intersection during
/// combination); propositions reject empty type sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeSet(u32);

impl TypeSet {
    pub const EMPTY: TypeSet = TypeSet(0);

    pub fn from_bits(bits: u32) -> Self {
        TypeSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        self.0 & (1 << index) != 0
    }

    pub fn is_subset_of(self, other: TypeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersection(self, other: TypeSet) -> TypeSet {
        TypeSet(self.0 & other.0)
    }

    pub fn union(self, other: TypeSet) -> TypeSet {
        TypeSet(self.0 | other.0)
    }

    /// Indices of the member types, ascending.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let index = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(index)
            }
        })
    }
}

/// A finite, non-empty set of non-negative object counts.
///
/// Zero is a legal count: "certainly no objects" is a proposition in its
/// own right, distinct from ignorance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountSet(BTreeSet<u64>);

impl CountSet {
    pub fn new<I: IntoIterator<Item = u64>>(values: I) -> Result<Self, Error> {
        let values: BTreeSet<u64> = values.into_iter().collect();
        if values.is_empty() {
            return Err(Error::EmptyCountSet);
        }
        Ok(CountSet(values))
    }

    pub fn singleton(value: u64) -> Self {
        CountSet(BTreeSet::from([value]))
    }

    /// `{0}`, the identity of the direct sum.
    pub fn zero() -> Self {
        CountSet::singleton(0)
    }

    /// `{0, 1, ..., max}` — what an uncommitted report supports.
    pub fn up_to(max: u64) -> Self {
        CountSet((0..=max).collect())
    }

    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor rejects empty sets
    }

    pub fn contains(&self, value: u64) -> bool {
        self.0.contains(&value)
    }

    pub fn max(&self) -> u64 {
        *self.0.iter().next_back().expect("count set is non-empty")
    }

    pub fn min(&self) -> u64 {
        *self.0.iter().next().expect("count set is non-empty")
    }

    /// The largest member `<= value` and the smallest member `>= value`.
    /// Together they bracket `value`, which is all a best-ratio search
    /// over a count set ever needs to inspect.
    pub fn neighbors(&self, value: u64) -> (Option<u64>, Option<u64>) {
        let below = self.0.range(..=value).next_back().copied();
        let above = self.0.range(value..).next().copied();
        (below, above)
    }

    /// Set intersection; `None` when the sets share no count.
    pub fn intersection(&self, other: &CountSet) -> Option<CountSet> {
        let values: BTreeSet<u64> = self.0.intersection(&other.0).copied().collect();
        if values.is_empty() {
            None
        } else {
            Some(CountSet(values))
        }
    }
}

impl fmt::Display for CountSet {
    /// `{1,2}`; contiguous runs of four or more render as `{2,...,6}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let contiguous = self.len() as u64 == self.max() - self.min() + 1;
        if contiguous && self.len() >= 4 {
            write!(f, "{{{},...,{}}}", self.min(), self.max())
        } else {
            let parts: Vec<String> = self.values().map(|v| v.to_string()).collect();
            write!(f, "{{{}}}", parts.join(","))
        }
    }
}

/// The direct sum of count sets: every way of picking one count from each
/// operand and adding them up. The empty operand list yields `{0}`.
pub fn direct_sum<'a, I>(operands: I) -> CountSet
where
    I: IntoIterator<Item = &'a CountSet>,
{
    let mut acc = BTreeSet::from([0u64]);
    for operand in operands {
        let mut next = BTreeSet::new();
        for &a in &acc {
            for b in operand.values() {
                next.insert(a + b);
            }
        }
        acc = next;
    }
    CountSet(acc)
}

/// One alternative statement inside a report: a count set paired with a
/// type set, read as "that many objects, of one of these types".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Proposition {
    counts: CountSet,
    types: TypeSet,
}

impl Proposition {
    pub fn new(counts: CountSet, types: TypeSet) -> Result<Self, Error> {
        if types.is_empty() {
            return Err(Error::EmptyTypeSet);
        }
        Ok(Proposition { counts, types })
    }

    pub fn counts(&self) -> &CountSet {
        &self.counts
    }

    pub fn types(&self) -> TypeSet {
        self.types
    }

    pub fn render(&self, universe: &TypeUniverse) -> String {
        format!("({},{})", self.counts, universe.render_set(self.types))
    }
}

/// One intelligence report: focal propositions with positive masses plus
/// an explicit ignorance mass, all summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    id: String,
    focal_elements: Vec<(Proposition, Mass)>,
    theta_mass: Mass,
}

impl Report {
    pub fn new(
        id: impl Into<String>,
        focal_elements: Vec<(Proposition, Mass)>,
        theta_mass: Mass,
    ) -> Result<Self, Error> {
        let id = id.into();
        if theta_mass.is_negative() || theta_mass > Mass::one() {
            return Err(Error::ThetaOutOfRange { report: id });
        }
        let mut sum = theta_mass.clone();
        for (_, mass) in &focal_elements {
            if !mass.is_positive() {
                return Err(Error::NonPositiveMass { report: id });
            }
            sum += mass;
        }
        if !sum.is_one() {
            return Err(Error::MassSumMismatch {
                report: id,
                sum: sum.to_string(),
            });
        }
        Ok(Report {
            id,
            focal_elements,
            theta_mass,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn focal_elements(&self) -> &[(Proposition, Mass)] {
        &self.focal_elements
    }

    pub fn theta_mass(&self) -> &Mass {
        &self.theta_mass
    }

    /// Largest count mentioned by any focal element, if there is one.
    pub fn max_count(&self) -> Option<u64> {
        self.focal_elements
            .iter()
            .map(|(p, _)| p.counts().max())
            .max()
    }
}

/// A set of reports hypothesized to describe a single higher-level unit,
/// together with the largest object count any of them mentions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    id: String,
    universe: Arc<TypeUniverse>,
    reports: Vec<Report>,
    n_max: u64,
}

impl Cluster {
    /// Validates the reports against the universe and derives the count
    /// ceiling. A cluster without a single focal element anywhere is
    /// degenerate: there is nothing to aggregate.
    pub fn new(
        id: impl Into<String>,
        universe: Arc<TypeUniverse>,
        reports: Vec<Report>,
    ) -> Result<Self, Error> {
        let id = id.into();
        let full = universe.full_set();
        for report in &reports {
            for (prop, _) in report.focal_elements() {
                if !prop.types().is_subset_of(full) {
                    return Err(Error::UnknownTypeLabel(format!(
                        "report `{}` uses a type outside the universe",
                        report.id()
                    )));
                }
            }
        }
        let n_max = reports
            .iter()
            .filter_map(Report::max_count)
            .max()
            .ok_or(Error::DegenerateCluster {
                cluster: id.clone(),
            })?;
        Ok(Cluster {
            id,
            universe,
            reports,
            n_max,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn universe(&self) -> &Arc<TypeUniverse> {
        &self.universe
    }

    pub fn reports(&self) -> &[Report] {
        &self.reports
    }

    /// The maximum object count over all focal elements of all reports.
    pub fn n_max(&self) -> u64 {
        self.n_max
    }
}

/// Dempster combination of reports that describe the same objects.
///
/// Focal elements intersect coordinate-wise (counts with counts, types
/// with types); ignorance is the neutral element; mass landing on an empty
/// intersection is conflict and is normalized away at the end. Fails when
/// every combination conflicts.
pub fn precombine_same_object(reports: &[Report]) -> Result<Report, Error> {
    let first = reports.first().ok_or(Error::EmptySameObjectGroup)?;
    if reports.len() == 1 {
        return Ok(first.clone());
    }

    // Accumulate unnormalized products; the `None` key is ignorance.
    // Normalizing once at the end equals normalizing per step.
    let mut acc: BTreeMap<Option<Proposition>, Mass> = BTreeMap::new();
    for (prop, mass) in first.focal_elements() {
        acc.insert(Some(prop.clone()), mass.clone());
    }
    if first.theta_mass().is_positive() {
        acc.insert(None, first.theta_mass().clone());
    }

    for report in &reports[1..] {
        let mut next: BTreeMap<Option<Proposition>, Mass> = BTreeMap::new();
        let mut options: Vec<(Option<&Proposition>, &Mass)> = report
            .focal_elements()
            .iter()
            .map(|(p, m)| (Some(p), m))
            .collect();
        if report.theta_mass().is_positive() {
            options.push((None, report.theta_mass()));
        }
        for (left, left_mass) in &acc {
            for (right, right_mass) in &options {
                let joined = match (left, right) {
                    (None, None) => Some(None),
                    (None, Some(p)) => Some(Some((*p).clone())),
                    (Some(p), None) => Some(Some(p.clone())),
                    (Some(p), Some(q)) => {
                        let types = p.types().intersection(q.types());
                        match (p.counts().intersection(q.counts()), types.is_empty()) {
                            (Some(counts), false) => {
                                Some(Some(Proposition { counts, types }))
                            }
                            _ => None, // conflict in either coordinate
                        }
                    }
                };
                if let Some(key) = joined {
                    let product = left_mass.clone() * (*right_mass).clone();
                    *next.entry(key).or_insert_with(Mass::zero) += product;
                }
            }
        }
        acc = next;
    }

    let total: Mass = acc.values().fold(Mass::zero(), |a, b| a + b);
    if total.is_zero() {
        return Err(Error::TotalConflict {
            reports: reports.iter().map(|r| r.id().to_string()).collect(),
        });
    }

    let id = reports
        .iter()
        .map(Report::id)
        .collect::<Vec<_>>()
        .join("+");
    let theta = acc
        .remove(&None)
        .map(|m| m / total.clone())
        .unwrap_or_else(Mass::zero);
    let focal_elements = acc
        .into_iter()
        .map(|(key, mass)| (key.expect("theta removed above"), mass / total.clone()))
        .collect();
    Report::new(id, focal_elements, theta)
}
