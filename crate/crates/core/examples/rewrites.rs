//! The rewrite catalog checked in each annotated direction.
//!
//! cargo run --release --example rewrites -- [instances]

use treegex::equiv::{check_rule, directions_of, rewrite_catalog, EquivConfig};

fn main() {
    let n = std::env::args().nth(1).map_or(50, |a| a.parse().expect("a count"));
    let cfg = EquivConfig::default();
    for rule in rewrite_catalog() {
        if rule.valid.is_empty() && rule.invalid.is_empty() {
            println!("{:<46} not applicable", rule.name);
            continue;
        }
        let valid = directions_of(&rule.valid);
        println!("{:<46} valid {valid}", rule.name);
        for (d, expected) in rule.valid.iter().map(|d| (d, true)).chain(rule.invalid.iter().map(|d| (d, false))) {
            let c = check_rule(&rule, *d, n, &cfg).expect("within budget");
            let holds = c.failure.is_none();
            let mark = if holds == expected { "ok" } else { "UNEXPECTED" };
            print!("    {} {mark:<10} {} instances", d.arrow(), c.instantiations);
            match c.failure {
                Some((lhs, rhs, x)) => println!(", refuted by {lhs}  vs  {rhs}\n        {x}"),
                None => println!(),
            }
        }
    }
}
