// Containment between rule bodies, with and without AC embedding.

use ruleprune::{canonicalize, contains, parse_expression, parse_rules, relate, ContainmentMode};

fn main() {
    let big = canonicalize(&parse_expression("mkt_price * units * fx_rate - prior_value").unwrap());
    let small = canonicalize(&parse_expression("units * mkt_price").unwrap());
    for mode in [ContainmentMode::Strict, ContainmentMode::AcEmbed] {
        println!("{mode}: {small} in {big} = {}", contains(&big, &small, mode));
    }

    // a narrower context cannot stand in for a wider one
    let rules = parse_rules(
        "NARROW: IF px_close - px_prev > 10 THEN WARN CONTEXT class=equity\n\
         WIDE: IF (px_close - px_prev) / px_prev > 0.25 THEN WARN\n\
         ANY: IF px_close - px_prev > 0 THEN WARN\n",
    )
    .unwrap();
    let wide = rules.get("WIDE").unwrap();
    for id in ["NARROW", "ANY"] {
        println!("relate({id}, WIDE) = {:?}", relate(rules.get(id).unwrap(), wide, ContainmentMode::AcEmbed));
    }
}
