//! Rewrites that fail in one direction, each with a context and a string
//! on which the two sides match differently.

use treegex::equiv::{counterexample_fixtures, run_fixture};

fn main() {
    for f in counterexample_fixtures() {
        let res = run_fixture(&f).expect("fixture runs");
        println!("{} ({}), context {} on {:?}", f.id, f.direction.arrow(), f.context, f.witness);
        for k in 0..2 {
            let found = res.results[k]
                .as_ref()
                .map_or("no match".to_string(), |(s, l)| format!("from {s}: {l}"));
            println!("  {:<50} {found}", res.plugged[k].to_string());
        }
        println!("  {}\n  {}", f.js[0], f.js[1]);
        if res.js_agrees != [true, true] {
            println!("  note: a JavaScript snippet differs from the schema instance");
        }
    }
}
