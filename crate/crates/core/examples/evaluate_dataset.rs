// Evaluate rules on a positions snapshot, grouped by fund and date.

use ruleprune::{evaluate_all, parse_rules, Dataset};

fn main() {
    let rules = parse_rules(include_str!("../data/hub_rules.txt")).unwrap();
    let data = Dataset::from_csv_str(include_str!("../data/positions.csv")).unwrap();
    let matrix = evaluate_all(&rules, &data, false).unwrap();

    for id in matrix.rule_ids() {
        for (group, outcome) in matrix.groups().iter().zip(matrix.row(id).unwrap()) {
            println!("{id:<7} {} {}  {:<4} {}", group.fund_id, group.date, outcome.kind, outcome.detail);
        }
    }
    print!("{}", matrix.counts_csv());
}
