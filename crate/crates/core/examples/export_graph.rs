// JSON report, DOT graph and a per-rule explanation for the hub fixture.

use ruleprune::{explain_rule, export_dot, parse_rules, partition, report_json, GraphDoc, PartitionOptions};

fn main() {
    let rules = parse_rules(include_str!("../data/hub_rules.txt")).unwrap();
    let report = partition(&rules, &PartitionOptions::default(), None).unwrap();

    println!("{}", report_json(&report));
    print!("{}", export_dot(&GraphDoc::from_report(&report)));
    print!("{}", explain_rule("HLD002", &rules, &report).unwrap());
}
