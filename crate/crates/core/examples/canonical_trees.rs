// Bodies that differ only in the order or grouping of + and * share one
// canonical tree and digest.

use ruleprune::{canonicalize, parse_expression, subtrees};

fn main() {
    for text in ["sum(txn_price * units * fx_rate)", "sum(fx_rate * (units * txn_price))"] {
        let tree = canonicalize(&parse_expression(text).unwrap());
        println!("{text}");
        println!("  canonical {tree}");
        println!("  height    {}", tree.height());
        println!("  digest    {}", tree.digest().to_hex());
    }

    let tree = canonicalize(&parse_expression("sum(a * b) / nav").unwrap());
    println!("subtrees of {tree}:");
    for s in subtrees(&tree) {
        println!("  {s}");
    }
}
