//! PikeTree run beside the PikeVM: both traces, the boolean tree they
//! walk, and the step correspondence between them.
//!
//! cargo run --example piketree -- [pattern] [input]

use treegex::input::Input;
use treegex::pikevm::{compile, render_trace, trace};
use treegex::piketree::{corun, pike_tree, pt_trace, render_pt_trace};
use treegex::regex::{parse, Flags};

fn main() {
    let mut args = std::env::args().skip(1);
    let pattern = args.next().unwrap_or_else(|| "(a*|a)b".into());
    let text = args.next().unwrap_or_else(|| "ab".into());
    let r = parse(&pattern).expect("pattern parses");
    let i = Input::new(&text, 0).expect("valid input");
    let flags = Flags::default();

    let t = pike_tree(&r, &i, flags);
    println!("{}", t.to_text());
    let (vm_rows, vm_leaf) = trace(&compile(&r), &i, flags);
    println!("PikeVM\n{}", render_trace(&vm_rows));
    let (pt_rows, pt_leaf) = pt_trace(&t, &i);
    println!("PikeTree\n{}", render_pt_trace(&pt_rows));
    println!("results: {vm_leaf:?}\n         {pt_leaf:?}");

    match corun(&r, &i, flags) {
        Ok(c) => println!(
            "co-run: {} VM steps, {} tree steps, {} stutters, {} skips",
            c.vm_steps, c.tree_steps, c.stutters, c.skips
        ),
        Err(e) => println!("co-run diverged: {e}"),
    }
}
