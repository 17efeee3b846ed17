//! The same first match from three engines: the tree semantics, the naive
//! backtracking matcher and, inside the star fragment, the PikeVM.

use treegex::input::Input;
use treegex::oracle::naive_match;
use treegex::pikevm::{try_compile, vm_run};
use treegex::regex::{parse, Flags};
use treegex::tree::{first_branch, regex_tree};

fn main() {
    let cases = [
        ("a(.*)c", "abcd", ""),
        ("(?:(a)|b)*", "ab", ""),
        ("(a?)*", "b", ""),
        ("(?=(a))(?=a\\1)a", "a", ""),
        ("(?=a\\1)(?=(a))a", "a", ""),
        ("(?<=(\\w+))c", "abc", ""),
        ("^b$", "a\nb", "m"),
        ("[A-C]+", "abcd", "i"),
        ("(a|ab)(c|bcd)(d*)", "abcd", ""),
    ];
    for (pattern, text, flags) in cases {
        let r = parse(pattern).expect("pattern parses");
        let flags = Flags::parse(flags).expect("known flags");
        let i = Input::new(text, 0).expect("valid input");
        let show = |l: Option<treegex::input::Leaf>| l.map_or("no match".to_string(), |l| l.to_string());
        let tree = show(first_branch(&regex_tree(&r, &i, flags), &i));
        let naive = show(naive_match(&r, text, 0, flags).expect("within budget"));
        let vm = match try_compile(&r) {
            Ok(_) => show(vm_run(&r, text, 0, flags)),
            Err(_) => "outside the star fragment".into(),
        };
        println!("/{pattern}/ on {text:?}\n  tree  {tree}\n  naive {naive}\n  vm    {vm}");
    }
}
