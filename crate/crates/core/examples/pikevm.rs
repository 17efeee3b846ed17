//! PikeVM bytecode and its linear step count on an input where a
//! backtracking matcher explodes.

use treegex::input::Input;
use treegex::oracle::{naive_match_input, DEFAULT_STEP_BUDGET};
use treegex::pikevm::{compile, step_census};
use treegex::regex::{parse, Flags};

fn main() {
    let r = parse("(a*|a)b").expect("pattern parses");
    print!("{}", compile(&r).disassemble());

    let r = parse("(a|a)*b").expect("pattern parses");
    let code = compile(&r);
    println!("\n/{r}/ on a^n, {} instructions", code.len());
    for n in [8, 16, 32, 64, 128, 256, 512] {
        let i = Input::new(&"a".repeat(n), 0).expect("valid input");
        let census = step_census(&code, &i, Flags::default());
        let naive = match naive_match_input(&r, &i, Flags::default(), DEFAULT_STEP_BUDGET) {
            Ok(_) => "finished",
            Err(_) => "over budget",
        };
        println!("n = {n:>3}: {:>6} VM steps, naive {naive}", census.total_steps);
    }
}
