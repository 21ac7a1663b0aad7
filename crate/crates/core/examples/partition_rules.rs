// Split the bundled 47-rule set into core and correlated rules.

use ruleprune::{parse_rules, partition, PartitionOptions};

fn main() {
    let rules = parse_rules(include_str!("../data/k7_rules.txt")).unwrap();
    let report = partition(&rules, &PartitionOptions::default(), None).unwrap();

    println!("core ({}):", report.core.len());
    println!("  {}", report.core.join(" "));
    println!("correlated ({}):", report.correlated.len());
    for c in &report.correlated {
        for w in &c.witnesses {
            println!("  {:<7} {} {} ({})", c.id, w.kind, w.by.join(","), w.detail);
        }
    }
    println!("{} of {} correlated", report.stats.correlated_pct, report.stats.total);
}
