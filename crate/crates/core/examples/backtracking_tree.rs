//! Backtracking trees: rendering, the highest-priority leaf, and every
//! leaf in priority order, forward and backward.
//!
//! cargo run --example backtracking_tree -- [pattern] [input]

use treegex::input::{Direction, GroupMap, Input};
use treegex::regex::{parse, Flags};
use treegex::tree::{compute_tree, first_branch, leaves, Actions};

fn main() {
    let mut args = std::env::args().skip(1);
    let pattern = args.next().unwrap_or_else(|| "(?:a|(?:a(b)|a))bc".into());
    let text = args.next().unwrap_or_else(|| "abbc".into());
    let r = parse(&pattern).expect("pattern parses");
    let l = Actions::of_regex(&r);

    let i = Input::new(&text, 0).expect("valid input");
    let t = compute_tree(&l, &i, &GroupMap::new(), Direction::Forward, Flags::default());
    println!("/{pattern}/ on {text:?}, {} nodes\n{}", t.size(), t.to_text());
    match first_branch(&t, &i) {
        Some(leaf) => println!("first branch: {leaf}"),
        None => println!("first branch: no match"),
    }
    for leaf in leaves(&t, &i, Direction::Forward) {
        println!("  leaf {leaf}");
    }

    let end = i.at(i.len());
    let back = compute_tree(&l, &end, &GroupMap::new(), Direction::Backward, Flags::default());
    println!("\nbackward from the end:");
    for leaf in leaves(&back, &end, Direction::Backward) {
        println!("  leaf {leaf}");
    }
}
