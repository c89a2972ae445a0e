//! Acceptance gate for the whole workspace: seven checks covering the
//! worked armour example end to end, randomized equivalence against a
//! brute-force oracle, algebraic properties, and CLI determinism. Each
//! check prints one PASS line (visible with `--nocapture`); its test
//! name doubles as the pass/fail line in the default runner output.

mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use forceagg_core::rational::{ratio, whole};
use forceagg_core::templates::{
    count_fitness, hypothesis_fitness, subset_fitness, supported_counts, worst_subset_fitness,
};
use forceagg_core::{
    combine, direct_sum, rank, Cluster, CountSet, Mass, Proposition, Report, Template, TypeSet,
    TypeUniverse, DEFAULT_HYPOTHESIS_LIMIT,
};

// --- the worked example, built through the public API -------------------

fn armour_universe() -> Arc<TypeUniverse> {
    Arc::new(TypeUniverse::new(["MBT", "APC"]).unwrap())
}

fn proposition(universe: &TypeUniverse, counts: &[u64], labels: &[&str]) -> Proposition {
    Proposition::new(
        CountSet::new(counts.iter().copied()).unwrap(),
        universe.type_set(labels.iter().copied()).unwrap(),
    )
    .unwrap()
}

fn worked_cluster() -> Cluster {
    let universe = armour_universe();
    let r1 = Report::new(
        "r1",
        vec![
            (proposition(&universe, &[2], &["MBT"]), ratio(1, 2)),
            (proposition(&universe, &[2], &["MBT", "APC"]), ratio(3, 10)),
        ],
        ratio(1, 5),
    )
    .unwrap();
    let r2 = Report::new(
        "r2",
        vec![(
            proposition(&universe, &[1, 2], &["MBT", "APC"]),
            ratio(3, 5),
        )],
        ratio(2, 5),
    )
    .unwrap();
    Cluster::new("alpha", universe, vec![r1, r2]).unwrap()
}

fn company_templates(universe: Arc<TypeUniverse>) -> Vec<Template> {
    vec![
        Template::new("T1", "TankCoy", universe.clone(), [("MBT", 4)]).unwrap(),
        Template::new("T2", "CarrierCoy", universe, [("APC", 3)]).unwrap(),
    ]
}

// --- random instance generation (criteria 5 and 6) ----------------------

struct Instance {
    cluster: Cluster,
    templates: Vec<Template>,
}

/// A random cluster and library within the stated envelope: up to 3
/// reports of up to 3 focal elements, up to 3 templates, counts from
/// {0..5}, masses as exact weight fractions.
fn random_instance(rng: &mut ChaCha8Rng, max_types: usize) -> Instance {
    let types = rng.random_range(1..=max_types);
    let universe = Arc::new(TypeUniverse::new((0..types).map(|i| format!("Y{i}"))).unwrap());

    let n_reports = rng.random_range(1..=3);
    let reports = (0..n_reports)
        .map(|i| {
            let n_focals = rng.random_range(1..=3usize);
            let focals: Vec<(BTreeSet<u64>, u32, u32)> = (0..n_focals)
                .map(|_| {
                    let mut counts = BTreeSet::new();
                    for _ in 0..rng.random_range(1..=3) {
                        counts.insert(rng.random_range(0..=5u64));
                    }
                    let bits = rng.random_range(1..(1u32 << types));
                    let weight = rng.random_range(1..=9u32);
                    (counts, bits, weight)
                })
                .collect();
            let theta_weight = rng.random_range(0..=9u32);
            let total: u32 = focals.iter().map(|(_, _, w)| *w).sum::<u32>() + theta_weight;
            let focal_elements = focals
                .into_iter()
                .map(|(counts, bits, weight)| {
                    (
                        Proposition::new(
                            CountSet::new(counts).unwrap(),
                            TypeSet::from_bits(bits),
                        )
                        .unwrap(),
                        ratio(i64::from(weight), i64::from(total)),
                    )
                })
                .collect();
            Report::new(
                format!("r{i}"),
                focal_elements,
                ratio(i64::from(theta_weight), i64::from(total)),
            )
            .unwrap()
        })
        .collect();
    let cluster = Cluster::new("c", universe.clone(), reports).unwrap();

    let n_templates = rng.random_range(1..=3usize);
    let templates = (0..n_templates)
        .map(|i| {
            let mut pairs: Vec<(String, u64)> = Vec::new();
            for t in 0..types {
                if rng.random_bool(0.6) {
                    pairs.push((format!("Y{t}"), rng.random_range(1..=5)));
                }
            }
            if pairs.is_empty() {
                pairs.push((
                    format!("Y{}", rng.random_range(0..types)),
                    rng.random_range(1..=5),
                ));
            }
            Template::new(format!("K{i}"), format!("U{i}"), universe.clone(), pairs).unwrap()
        })
        .collect();

    Instance { cluster, templates }
}

// --- criteria ------------------------------------------------------------

#[test]
fn criterion_1_worked_example_combination() {
    let start = Instant::now();
    let joint = combine(&worked_cluster(), DEFAULT_HYPOTHESIS_LIMIT).unwrap();
    let universe = joint.universe().clone();

    let rendered: Vec<(String, Mass)> = joint
        .hypotheses()
        .iter()
        .map(|h| (h.render(&universe), h.mass().clone()))
        .collect();
    let expected = [
        ("<({2},{MBT}), ({1,2},{MBT,APC})>", ratio(3, 10)),
        ("<({2},{MBT}), theta>", ratio(1, 5)),
        ("<({2},{MBT,APC}), ({1,2},{MBT,APC})>", ratio(9, 50)),
        ("<({2},{MBT,APC}), theta>", ratio(3, 25)),
        ("<theta, ({1,2},{MBT,APC})>", ratio(3, 25)),
        ("<theta, theta>", ratio(2, 25)),
    ];
    assert_eq!(rendered.len(), expected.len());
    for ((slots, mass), (want_slots, want_mass)) in rendered.iter().zip(expected.iter()) {
        assert_eq!(slots, want_slots);
        assert_eq!(mass, want_mass);
    }
    assert_eq!(joint.mass_sum(), whole(1));

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "combination took {elapsed:?}");
    println!("PASS criterion 1: joint combination reproduces all six hypotheses exactly ({elapsed:?})");
}

#[test]
fn criterion_2_worked_example_marginalization() {
    let joint = combine(&worked_cluster(), DEFAULT_HYPOTHESIS_LIMIT).unwrap();
    let universe = joint.universe().clone();

    let tanks = joint.marginal_for(universe.type_set(["MBT"]).unwrap());
    assert_eq!(
        tanks,
        BTreeMap::from([
            (CountSet::singleton(2), ratio(1, 2)),
            (CountSet::singleton(0), ratio(1, 2)),
        ])
    );

    let armour = joint.marginal_for(universe.full_set());
    assert_eq!(
        armour,
        BTreeMap::from([
            (CountSet::new([3, 4]).unwrap(), ratio(9, 50)),
            (CountSet::singleton(2), ratio(3, 25)),
            (CountSet::new([1, 2]).unwrap(), ratio(21, 50)),
            (CountSet::singleton(0), ratio(7, 25)),
        ])
    );

    for dist in [&tanks, &armour] {
        let total: Mass = dist.values().sum();
        assert_eq!(total, whole(1));
    }
    println!("PASS criterion 2: both marginal count distributions match and sum to 1");
}

#[test]
fn criterion_3_fitness_tables() {
    let joint = combine(&worked_cluster(), DEFAULT_HYPOTHESIS_LIMIT).unwrap();
    let universe = joint.universe().clone();
    let full = universe.full_set();
    let n_max = joint.n_max();
    let templates = company_templates(universe.clone());

    let subsets = [
        universe.type_set(["MBT"]).unwrap(),
        universe.type_set(["APC"]).unwrap(),
        full,
    ];

    // Requested counts per subset.
    assert_eq!(
        subsets.map(|s| templates[0].requested_count(s)),
        [4, 0, 4]
    );
    assert_eq!(
        subsets.map(|s| templates[1].requested_count(s)),
        [0, 3, 3]
    );

    // Supported counts per hypothesis and subset.
    let supported_expected: [[&[u64]; 3]; 6] = [
        [&[2], &[0], &[3, 4]],
        [&[2], &[0], &[2, 3, 4]],
        [&[0], &[0], &[3, 4]],
        [&[0], &[0], &[2, 3, 4]],
        [&[0], &[0], &[1, 2, 3, 4]],
        [&[0], &[0], &[0, 1, 2, 3, 4]],
    ];
    for (hypothesis, row) in joint.hypotheses().iter().zip(supported_expected) {
        for (subset, want) in subsets.iter().zip(row) {
            assert_eq!(
                supported_counts(hypothesis, *subset, full, n_max),
                CountSet::new(want.iter().copied()).unwrap()
            );
        }
    }

    // Per-subset fitness, all 36 entries.
    let h = ratio(1, 2);
    let one = whole(1);
    let zero = whole(0);
    let per_subset_expected: [[[Mass; 3]; 6]; 2] = [
        [
            [h.clone(), one.clone(), one.clone()],
            [h.clone(), one.clone(), one.clone()],
            [zero.clone(), one.clone(), one.clone()],
            [zero.clone(), one.clone(), one.clone()],
            [zero.clone(), one.clone(), one.clone()],
            [zero.clone(), one.clone(), one.clone()],
        ],
        [
            [one.clone(), zero.clone(), one.clone()],
            [one.clone(), zero.clone(), one.clone()],
            [one.clone(), zero.clone(), one.clone()],
            [one.clone(), zero.clone(), one.clone()],
            [one.clone(), zero.clone(), one.clone()],
            [one.clone(), zero.clone(), one.clone()],
        ],
    ];
    let mut checked = 0;
    for (t, template) in templates.iter().enumerate() {
        for (k, hypothesis) in joint.hypotheses().iter().enumerate() {
            for (x, subset) in subsets.iter().enumerate() {
                let supported = supported_counts(hypothesis, *subset, full, n_max);
                assert_eq!(
                    subset_fitness(&supported, template.requested_count(*subset)),
                    per_subset_expected[t][k][x],
                    "template {t}, hypothesis {k}, subset {x}"
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 36);

    // Count-only fitness is 1 everywhere for both templates.
    for template in &templates {
        for hypothesis in joint.hypotheses() {
            assert_eq!(count_fitness(template, hypothesis, n_max), whole(1));
        }
    }

    // Worst-subset fitness.
    let strict_t1: Vec<Mass> = joint
        .hypotheses()
        .iter()
        .map(|hyp| worst_subset_fitness(&templates[0], hyp, n_max))
        .collect();
    assert_eq!(
        strict_t1,
        vec![h.clone(), h.clone(), zero.clone(), zero.clone(), zero.clone(), zero.clone()]
    );
    for hypothesis in joint.hypotheses() {
        assert_eq!(
            worst_subset_fitness(&templates[1], hypothesis, n_max),
            whole(0)
        );
    }

    // Combined per-hypothesis fitness.
    let q = ratio(3, 4);
    let combined_t1: Vec<Mass> = joint
        .hypotheses()
        .iter()
        .map(|hyp| hypothesis_fitness(&templates[0], hyp, n_max))
        .collect();
    assert_eq!(
        combined_t1,
        vec![q.clone(), q, h.clone(), h.clone(), h.clone(), h.clone()]
    );
    for hypothesis in joint.hypotheses() {
        assert_eq!(
            hypothesis_fitness(&templates[1], hypothesis, n_max),
            ratio(1, 2)
        );
    }

    println!("PASS criterion 3: all fitness tables reproduce the reference values exactly");
}

#[test]
fn criterion_4_ranking_and_support() {
    let cluster = worked_cluster();
    let templates = company_templates(cluster.universe().clone());
    let joint = combine(&cluster, DEFAULT_HYPOTHESIS_LIMIT).unwrap();
    let ledger = rank(&joint, &templates, 1).unwrap();

    assert_eq!(*ledger.scores()[0].aggregate(), ratio(5, 8));
    assert_eq!(*ledger.scores()[1].aggregate(), ratio(1, 2));
    assert_eq!(ledger.best().template_id(), "T1");
    assert_eq!(ledger.best().produces(), "TankCoy");
    assert_eq!(*ledger.scores()[0].support(), ratio(3, 4));
    assert_eq!(*ledger.scores()[1].support(), ratio(1, 4));
    println!("PASS criterion 4: ranking selects T1 with fitness 5/8 and support 3/4");
}

#[test]
fn criterion_5_oracle_equivalence_on_random_instances() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_F0CE);
    let instances = 200;
    for round in 0..instances {
        let Instance { cluster, templates } = random_instance(&mut rng, 3);
        let joint = combine(&cluster, DEFAULT_HYPOTHESIS_LIMIT).unwrap();
        let readings = oracle::enumerate_readings(&cluster);

        let fast: BTreeMap<TypeSet, BTreeMap<BTreeSet<u64>, Mass>> = joint
            .marginalize()
            .per_type_set()
            .iter()
            .map(|(types, dist)| {
                (
                    *types,
                    dist.iter()
                        .map(|(counts, mass)| (counts.values().collect(), mass.clone()))
                        .collect(),
                )
            })
            .collect();
        assert_eq!(
            fast,
            oracle::marginals(&cluster, &readings),
            "marginal mismatch in round {round}"
        );

        let ledger = rank(&joint, &templates, 1).unwrap();
        let slow = oracle::score_library(&cluster, &templates);
        for (t, score) in ledger.scores().iter().enumerate() {
            assert_eq!(
                *score.aggregate(),
                slow.aggregates[t],
                "aggregate mismatch in round {round}, template {t}"
            );
            assert_eq!(
                *score.support(),
                slow.supports[t],
                "support mismatch in round {round}, template {t}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "oracle suite took {elapsed:?}");
    println!("PASS criterion 5: {instances} random instances match the brute-force oracle exactly ({elapsed:?})");
}

#[test]
fn criterion_6_property_suites() {
    // Normalization and bounds over random instances.
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0B5_1ED5);
    for _ in 0..100 {
        let Instance { cluster, templates } = random_instance(&mut rng, 3);
        let joint = combine(&cluster, DEFAULT_HYPOTHESIS_LIMIT).unwrap();
        assert_eq!(joint.mass_sum(), whole(1));

        let ledger = rank(&joint, &templates, 1).unwrap();
        let mut support_total = whole(0);
        for score in ledger.scores() {
            for fitness in score.per_hypothesis() {
                assert!(*fitness >= whole(0) && *fitness <= whole(1));
            }
            assert!(*score.aggregate() >= whole(0) && *score.aggregate() <= whole(1));
            support_total += score.support();
        }
        assert_eq!(support_total, whole(1));
    }

    // Direct-sum algebra, exhaustively over subsets of {0..5}.
    let sets: Vec<CountSet> = (1u32..64)
        .map(|bits| CountSet::new((0..6).filter(|i| bits & (1 << i) != 0)).unwrap())
        .collect();
    let pairwise = |a: &CountSet, b: &CountSet| direct_sum([a, b]);
    let zero_set = CountSet::singleton(0);
    for a in &sets {
        assert_eq!(&pairwise(a, &zero_set), a, "identity");
        assert_eq!(&direct_sum([a]), a, "single operand");
    }
    for a in &sets {
        for b in &sets {
            assert_eq!(pairwise(a, b), pairwise(b, a), "commutativity");
        }
    }
    let small: Vec<CountSet> = (1u32..16)
        .map(|bits| CountSet::new((0..4).filter(|i| bits & (1 << i) != 0)).unwrap())
        .collect();
    for a in &small {
        for b in &small {
            for c in &small {
                let left = pairwise(&pairwise(a, b), c);
                let right = pairwise(a, &pairwise(b, c));
                assert_eq!(left, right, "associativity");
                assert_eq!(left, direct_sum([a, b, c]), "three-way agreement");
            }
        }
    }

    // Skipping zero-request subsets in the worst-subset measure equals
    // scanning every subset, for universes up to four types.
    let mut rng = ChaCha8Rng::seed_from_u64(0xCAFE_D00D);
    for _ in 0..50 {
        let Instance { cluster, templates } = random_instance(&mut rng, 4);
        let joint = combine(&cluster, DEFAULT_HYPOTHESIS_LIMIT).unwrap();
        let full = joint.universe().full_set();
        for hypothesis in joint.hypotheses() {
            for template in &templates {
                let mut over_all_subsets = whole(1);
                for bits in 1..=full.bits() {
                    let subset = TypeSet::from_bits(bits);
                    let fitness = subset_fitness(
                        &supported_counts(hypothesis, subset, full, joint.n_max()),
                        template.requested_count(subset),
                    );
                    if fitness < over_all_subsets {
                        over_all_subsets = fitness;
                    }
                }
                assert_eq!(
                    over_all_subsets,
                    worst_subset_fitness(template, hypothesis, joint.n_max())
                );
            }
        }
    }

    println!("PASS criterion 6: normalization, bounds, direct-sum laws and subset-restriction equivalence hold");
}

#[test]
fn criterion_7_cli_output_is_byte_deterministic() {
    let scenario = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/worked_example.scn");
    let templates = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/worked_example.tpl");
    let run = |args: &[&str]| {
        let output = Command::new(env!("CARGO_BIN_EXE_forceagg"))
            .args(args)
            .env_remove("FORCEAGG_LIMIT")
            .output()
            .expect("binary should run");
        assert!(
            output.status.success(),
            "forceagg {args:?} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        output.stdout
    };

    for args in [
        vec![
            "aggregate",
            "--scenario",
            scenario,
            "--templates",
            templates,
            "--verbosity",
            "hypotheses",
        ],
        vec!["combine", "--scenario", scenario],
        vec![
            "fit",
            "--scenario",
            scenario,
            "--templates",
            templates,
            "--verbosity",
            "tables",
        ],
    ] {
        let first = run(&args);
        let second = run(&args);
        assert!(!first.is_empty());
        assert_eq!(first, second, "output differs between runs for {args:?}");
    }
    println!("PASS criterion 7: repeated CLI runs are byte-identical");
}
