// Rules with the same body but different thresholds: predicate implication
// and evaluation on data both show the `= 0` rule adds nothing.

use ruleprune::{
    evaluate_all, parse_rules, partition, ContainmentMode, Dataset, PartitionOptions, ValueCheckConfig, ValueCheckMode,
};

const DATA: &str = "\
fund_id,date,position_id,asset_class,a,b
F1,2011-06-30,P1,equity,2,0.5
F1,2011-06-30,P2,equity,2,-0.5
F2,2011-06-30,P1,equity,1,0.1
F2,2011-06-30,P2,equity,0,3
F3,2011-06-30,P1,equity,4,2
";

fn main() {
    let rules = parse_rules("ZERO: IF sum(a * b) = 0 THEN FAIL\nSMALL: IF sum(a * b) <= 0.2 THEN FAIL\n").unwrap();
    let data = Dataset::from_csv_str(DATA).unwrap();
    let matrix = evaluate_all(&rules, &data, false).unwrap();

    for mode in [ValueCheckMode::Off, ValueCheckMode::Symbolic, ValueCheckMode::Empirical] {
        let options = PartitionOptions {
            mode: ContainmentMode::AcEmbed,
            value_check: ValueCheckConfig::new(mode, 1),
            parallel: false,
        };
        let report = partition(&rules, &options, Some(&matrix)).unwrap();
        print!("{mode}: core {:?}", report.core);
        for c in &report.correlated {
            print!(", {} <- {} ({})", c.id, c.witnesses[0].by.join(","), c.witnesses[0].detail);
        }
        println!();
    }
}
