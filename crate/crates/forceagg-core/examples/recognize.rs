//! Minimal library walkthrough: parse a scenario and a template file,
//! analyze the single cluster, and print the recognized unit.
//!
//! Run from the repository root:
//!
//! ```console
//! $ cargo run -p forceagg-core --example recognize
//! ```

use forceagg_core::io::{parse_scenario, parse_templates};
use forceagg_core::{aggregate_cluster, AggregationOptions, Cluster};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = parse_scenario(&std::fs::read_to_string("fixtures/worked_example.scn")?)?;
    let templates = parse_templates(
        &std::fs::read_to_string("fixtures/worked_example.tpl")?,
        &scenario.universes(),
    )?;

    let level = &scenario.levels[0];
    let spec = &level.clusters[0];
    let cluster = Cluster::new(spec.id.clone(), level.universe.clone(), spec.reports.clone())?;
    let analysis = aggregate_cluster(&cluster, &templates[&1], 1, &AggregationOptions::default())?;

    let unit = analysis.unit();
    println!(
        "cluster {} recognized as {} [{}] with support {}",
        unit.cluster_id(),
        unit.produces(),
        unit.template_id(),
        forceagg_core::rational::render(unit.support()),
    );
    Ok(())
}
