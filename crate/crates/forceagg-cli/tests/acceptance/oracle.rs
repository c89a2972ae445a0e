//! Straight-line brute-force recomputation of the pipeline, written
//! independently of the library's code paths: recursive product
//! enumeration instead of the odometer, linear scans over every subset
//! and every supported count instead of range queries, and no
//! memoization anywhere. Slow and obviously correct.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;

use forceagg_core::rational::{ratio, whole};
use forceagg_core::{Cluster, Mass, Proposition, Template, TypeSet};

/// One way to read the cluster: a chosen proposition (or ignorance) per
/// report, with the product of the chosen masses.
pub struct Reading {
    pub slots: Vec<Option<Proposition>>,
    pub mass: Mass,
}

pub fn enumerate_readings(cluster: &Cluster) -> Vec<Reading> {
    let mut readings = vec![Reading {
        slots: Vec::new(),
        mass: whole(1),
    }];
    for report in cluster.reports() {
        let mut extended = Vec::new();
        for reading in &readings {
            for (proposition, mass) in report.focal_elements() {
                let mut slots = reading.slots.clone();
                slots.push(Some(proposition.clone()));
                extended.push(Reading {
                    slots,
                    mass: reading.mass.clone() * mass,
                });
            }
            if !report.theta_mass().is_zero() {
                let mut slots = reading.slots.clone();
                slots.push(None);
                extended.push(Reading {
                    slots,
                    mass: reading.mass.clone() * report.theta_mass(),
                });
            }
        }
        readings = extended;
    }
    readings
}

/// All sums picking one element from every operand; no operands means
/// the empty sum.
pub fn sums_of(operands: &[BTreeSet<u64>]) -> BTreeSet<u64> {
    let mut acc = BTreeSet::from([0u64]);
    for set in operands {
        let mut next = BTreeSet::new();
        for a in &acc {
            for b in set {
                next.insert(a + b);
            }
        }
        acc = next;
    }
    acc
}

/// Marginal count distribution per type set occurring in the cluster:
/// each reading contributes its whole mass to the direct sum of the
/// slots matching the type set exactly.
pub fn marginals(
    cluster: &Cluster,
    readings: &[Reading],
) -> BTreeMap<TypeSet, BTreeMap<BTreeSet<u64>, Mass>> {
    let type_sets: BTreeSet<TypeSet> = cluster
        .reports()
        .iter()
        .flat_map(|r| r.focal_elements().iter().map(|(p, _)| p.types()))
        .collect();

    let mut out: BTreeMap<TypeSet, BTreeMap<BTreeSet<u64>, Mass>> =
        type_sets.iter().map(|t| (*t, BTreeMap::new())).collect();
    for reading in readings {
        for types in &type_sets {
            let matching: Vec<BTreeSet<u64>> = reading
                .slots
                .iter()
                .flatten()
                .filter(|p| p.types() == *types)
                .map(|p| p.counts().values().collect())
                .collect();
            let counts = if matching.is_empty() {
                BTreeSet::from([0])
            } else {
                sums_of(&matching)
            };
            *out.get_mut(types)
                .expect("initialized above")
                .entry(counts)
                .or_insert_with(Mass::zero) += &reading.mass;
        }
    }
    out
}

fn best_count_ratio(supported: &BTreeSet<u64>, requested: u64) -> Mass {
    if requested == 0 {
        return whole(1);
    }
    let mut best = whole(0);
    for &n in supported {
        let r = if n == 0 {
            whole(0)
        } else if n <= requested {
            ratio(n as i64, requested as i64)
        } else {
            ratio(requested as i64, n as i64)
        };
        if r > best {
            best = r;
        }
    }
    best
}

/// Template fitness against one reading: mean of the worst ratio over
/// every non-empty type subset and the ratio over the full universe.
pub fn fitness(template: &Template, reading: &Reading, full: TypeSet, n_max: u64) -> Mass {
    let supported = |x: TypeSet| -> BTreeSet<u64> {
        let mut operands: Vec<BTreeSet<u64>> = Vec::new();
        for slot in &reading.slots {
            match slot {
                Some(p) if p.types().is_subset_of(x) => {
                    operands.push(p.counts().values().collect());
                }
                None if full.is_subset_of(x) => operands.push((0..=n_max).collect()),
                _ => {}
            }
        }
        sums_of(&operands)
    };
    let requested = |x: TypeSet| -> u64 {
        template
            .slots()
            .filter(|(t, _)| x.contains(*t))
            .map(|(_, c)| c)
            .sum()
    };

    let mut strict = whole(1);
    for bits in 1..=full.bits() {
        let x = TypeSet::from_bits(bits);
        let f = best_count_ratio(&supported(x), requested(x));
        if f < strict {
            strict = f;
        }
    }
    let lenient = best_count_ratio(&supported(full), requested(full));
    (strict + lenient) / whole(2)
}

pub struct LibraryScores {
    pub aggregates: Vec<Mass>,
    pub supports: Vec<Mass>,
}

/// Aggregate fitness and support share per template over a whole
/// cluster: each reading's mass weights its fitness into the aggregates
/// and goes in full to the best-fitting templates, split evenly on ties.
/// When nothing fits, the mass spreads evenly over the library.
pub fn score_library(cluster: &Cluster, templates: &[Template]) -> LibraryScores {
    let readings = enumerate_readings(cluster);
    let full = cluster.universe().full_set();
    let n_max = cluster
        .reports()
        .iter()
        .flat_map(|r| r.focal_elements().iter())
        .flat_map(|(p, _)| p.counts().values())
        .max()
        .expect("clusters always hold at least one focal element");

    let mut aggregates = vec![whole(0); templates.len()];
    let mut supports = vec![whole(0); templates.len()];
    for reading in &readings {
        let fits: Vec<Mass> = templates
            .iter()
            .map(|t| fitness(t, reading, full, n_max))
            .collect();
        let best = fits.iter().max().expect("library is non-empty").clone();
        if best.is_zero() {
            let share = reading.mass.clone() / whole(templates.len() as i64);
            for support in supports.iter_mut() {
                *support += &share;
            }
        } else {
            let winners: Vec<usize> = (0..fits.len()).filter(|&t| fits[t] == best).collect();
            let share = reading.mass.clone() / whole(winners.len() as i64);
            for &t in &winners {
                supports[t] += &share;
            }
        }
        for (t, fit) in fits.iter().enumerate() {
            aggregates[t] += reading.mass.clone() * fit;
        }
    }
    LibraryScores {
        aggregates,
        supports,
    }
}
