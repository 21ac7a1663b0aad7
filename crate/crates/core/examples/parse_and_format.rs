// Parse a rules file and print each rule back in canonical one-line form.

use ruleprune::{format_rule, parse_rules};

fn main() {
    let source = "\
# cost of the holding
HLD001: IF sum(txn_price * units * fx_rate) = 0 THEN FAIL CONTEXT ccy=local
HLD005: IF accrued_income / coupon_rate > 1.5 THEN WARN CONTEXT class=bond AND period=[2011-01-01,2011-12-31]
";
    let rules = parse_rules(source).expect("valid rules");
    for rule in &rules {
        println!("{}", format_rule(rule));
    }

    // errors carry line and column
    match parse_rules("A: IF nav = 0 THEN FAIL\nB: IF nav + THEN FAIL\n") {
        Ok(_) => unreachable!(),
        Err(e) => println!("error: {e}"),
    }
}
