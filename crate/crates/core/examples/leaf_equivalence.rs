//! Bounded leaf equivalence, and what it means inside a context.

use treegex::equiv::{all_strings, check_leaf_equiv, observational_difference, Context, EquivConfig};
use treegex::input::Direction;
use treegex::regex::{parse, Flags};

fn main() {
    let cfg = EquivConfig::default();
    let pairs = [
        ("c|c", "c"),
        ("(?:a|ab)(?:c|b)", "(?:(?:a|ab)c)|(?:(?:a|ab)b)"),
        ("|a", "|b"),
        ("a{2}", "a{2}?"),
        ("(a)", "a"),
    ];
    for (p1, p2) in pairs {
        let (r1, r2) = (parse(p1).expect("parses"), parse(p2).expect("parses"));
        for d in [Direction::Forward, Direction::Backward] {
            let v = check_leaf_equiv(&r1, &r2, d, &cfg).expect("within budget");
            match v.counterexample {
                None => println!("{} {p1}  vs  {p2}: equivalent on {} inputs", d.arrow(), v.inputs_checked),
                Some(c) => println!("{} {p1}  vs  {p2}: {c}", d.arrow()),
            }
        }
    }

    let strings = all_strings(&['a', 'b', 'c'], 6);
    let (lhs, rhs) = (parse("(?:a|b)(?:c|bc)").unwrap(), parse("(?:a(?:c|bc))|(?:b(?:c|bc))").unwrap());
    for ctx in ["□", "x□y", "abc(?<=(□))\\1", "(?=□)"] {
        let c = Context::parse(ctx).expect("one hole");
        let (a, b) = (c.plug(&lhs).unwrap(), c.plug(&rhs).unwrap());
        let diff = observational_difference(&a, &b, &strings, Flags::default());
        println!("{c:<16} {} hole: {}", c.direction(), diff.map_or("same matches".into(), |(s, k)| format!("differ on {s:?} from {k}")));
    }
}
