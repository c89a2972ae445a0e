//! Shared fixtures for the in-crate test suites: a small armour-sighting
//! scenario whose every intermediate value has been worked out by hand.
//!
//! Two reports about one suspected unit. The first saw two vehicles,
//! probably tanks, possibly carriers (mass 1/2 on "two tanks", 3/10 on
//! "two of either", 1/5 open). The second saw one or two vehicles of
//! either kind (mass 3/5, 2/5 open). The library offers a four-tank
//! company template and a three-carrier company template.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::Zero;

use crate::aggregation::{ClusterSpec, LevelSpec};
use crate::evidence::{Cluster, CountSet, Proposition, Report, TypeUniverse};
use crate::rational::{ratio, Mass};
use crate::templates::Template;

pub(crate) fn armour_universe() -> Arc<TypeUniverse> {
    Arc::new(TypeUniverse::new(["MBT", "APC"]).unwrap())
}

pub(crate) fn proposition(
    universe: &TypeUniverse,
    counts: &[u64],
    labels: &[&str],
) -> Proposition {
    Proposition::new(
        CountSet::new(counts.iter().copied()).unwrap(),
        universe.type_set(labels.iter().copied()).unwrap(),
    )
    .unwrap()
}

pub(crate) fn sighting_reports(universe: &TypeUniverse) -> (Report, Report) {
    let r1 = Report::new(
        "r1",
        vec![
            (proposition(universe, &[2], &["MBT"]), ratio(1, 2)),
            (proposition(universe, &[2], &["MBT", "APC"]), ratio(3, 10)),
        ],
        ratio(1, 5),
    )
    .unwrap();
    let r2 = Report::new(
        "r2",
        vec![(
            proposition(universe, &[1, 2], &["MBT", "APC"]),
            ratio(3, 5),
        )],
        ratio(2, 5),
    )
    .unwrap();
    (r1, r2)
}

pub(crate) fn sighting_cluster() -> Cluster {
    let universe = armour_universe();
    let (r1, r2) = sighting_reports(&universe);
    Cluster::new("alpha", universe, vec![r1, r2]).unwrap()
}

pub(crate) fn armour_templates(universe: Arc<TypeUniverse>) -> Vec<Template> {
    vec![
        Template::new("T1", "TankCoy", universe.clone(), [("MBT", 4)]).unwrap(),
        Template::new("T2", "CarrierCoy", universe, [("APC", 3)]).unwrap(),
    ]
}

/// Two levels: the worked armour cluster plus a certain carrier sighting
/// at level one, both feeding one battalion cluster at level two.
pub(crate) fn two_level_scenario() -> (Vec<LevelSpec>, BTreeMap<usize, Vec<Template>>) {
    let u1 = armour_universe();
    let (r1, r2) = sighting_reports(&u1);
    let carriers = Report::new(
        "r3",
        vec![(proposition(&u1, &[3], &["APC"]), ratio(1, 1))],
        Mass::zero(),
    )
    .unwrap();
    let level1 = LevelSpec {
        level: 1,
        universe: u1.clone(),
        clusters: vec![
            ClusterSpec {
                id: "alpha".into(),
                reports: vec![r1, r2],
                unit_refs: vec![],
            },
            ClusterSpec {
                id: "beta".into(),
                reports: vec![carriers],
                unit_refs: vec![],
            },
        ],
    };

    let u2 = Arc::new(TypeUniverse::new(["TankCoy", "CarrierCoy"]).unwrap());
    let level2 = LevelSpec {
        level: 2,
        universe: u2.clone(),
        clusters: vec![ClusterSpec {
            id: "gamma".into(),
            reports: vec![],
            unit_refs: vec!["alpha".into(), "beta".into()],
        }],
    };

    let libraries = BTreeMap::from([
        (1, armour_templates(u1)),
        (
            2,
            vec![
                Template::new(
                    "B1",
                    "MixBn",
                    u2.clone(),
                    [("TankCoy", 1), ("CarrierCoy", 1)],
                )
                .unwrap(),
                Template::new("B2", "CarrierBn", u2, [("CarrierCoy", 2)]).unwrap(),
            ],
        ),
    ]);
    (vec![level1, level2], libraries)
}
