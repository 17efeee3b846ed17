use std::process::Command;

use serde::de::DeserializeOwned;
use serde::Serialize;
use treegex::cli::{
    run, CompileReport, CounterexamplesReport, EquivReport, LeavesReport, MatchReport, RewriteReport, TraceReport,
    TreeReport, EXIT_BUDGET, EXIT_NEGATIVE, EXIT_OK, EXIT_PARSE, EXIT_SUBSET, EXIT_USAGE,
};
use treegex::fuzz::FuzzReport;

fn call(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("treegex").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn round_trip<T: Serialize + DeserializeOwned>(args: &[&str]) -> T {
    let mut args = args.to_vec();
    args.push("--json");
    let (_, out) = call(&args);
    let report: T = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{args:?}: {e}\n{out}"));
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", out, "{args:?}");
    report
}

#[test]
fn json_reports_round_trip() {
    let m: MatchReport = round_trip(&["match", "a(.*)c", "abcd"]);
    assert_eq!(m.leaf.unwrap().end, 3);
    let t: TreeReport = round_trip(&["tree", "(?:a|(?:a(b)|a))bc", "abbc"]);
    assert_eq!(t.first_branch.unwrap().groups["1"], Some([1, 2]));
    let l: LeavesReport = round_trip(&["leaves", "a|ab|", "ab", "--dir", "fwd"]);
    assert_eq!(l.leaves.iter().map(|x| x.end).collect::<Vec<_>>(), vec![1, 2, 0]);
    let l: LeavesReport = round_trip(&["leaves", "a|ab", "ab", "--dir", "bwd", "--start", "2"]);
    assert_eq!(l.leaves.iter().map(|x| x.end).collect::<Vec<_>>(), vec![0]);
    let c: CompileReport = round_trip(&["compile", "(a*|a)b"]);
    assert_eq!(c.instructions.len(), 12);
    let tr: TraceReport = round_trip(&["trace", "(a*|a)b", "ab"]);
    assert_eq!(tr.vm.len(), 23);
    let e: EquivReport = round_trip(&["equiv", "a|a", "a", "--dir", "fwd"]);
    assert!(e.holds);
    let r: RewriteReport = round_trip(&["rewrite-check", "--rule", "r1(?:r2|r3)", "--instances", "20", "--max-len", "3"]);
    assert!(r.consistent);
    assert_eq!(r.rules.len(), 2);
    let x: CounterexamplesReport = round_trip(&["counterexamples"]);
    assert!(x.all_differ);
    let f: FuzzReport = round_trip(&["fuzz", "--iters", "300", "--seed", "42"]);
    assert!(f.failures.is_empty());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        &["fuzz", "--iters", "300", "--seed", "9", "--mode", "star-fragment", "--json"][..],
        &["rewrite-check", "--instances", "5", "--max-len", "3", "--seed", "9", "--json"][..],
        &["equiv", "(?:a|ab)(?:c|b)", "(?:(?:a|ab)c)|(?:(?:a|ab)b)", "--json"][..],
    ] {
        assert_eq!(call(args), call(args), "{args:?}");
    }
}

#[test]
fn exit_statuses() {
    assert_eq!(call(&["match", "", ""]).0, EXIT_OK);
    assert_eq!(call(&["match", "x", ""]).0, EXIT_NEGATIVE);
    assert_eq!(call(&["match", "(?<n>a)\\k<m>", "a"]).0, EXIT_PARSE);
    assert_eq!(call(&["compile", "a\\1(a)"]).0, EXIT_SUBSET);
    assert_eq!(call(&["trace", "a{2}", "aa"]).0, EXIT_SUBSET);
    assert_eq!(call(&["match", "a", "a", "--flags", "g"]).0, EXIT_USAGE);
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["equiv", "a", "b"]).0, EXIT_NEGATIVE);
    assert_eq!(call(&["tree", "(?:a|a)*b", "aaaaaaaaaaaaaaaaaaaa", "--budget", "5000"]).0, EXIT_BUDGET);
    assert_eq!(call(&["match", "A", "a", "--flags", "i"]), (EXIT_OK, "end 1\n".into()));
    assert_eq!(call(&["match", "^b", "ab", "--start", "1"]).0, EXIT_NEGATIVE);
    assert_eq!(call(&["match", "^b", "a\nb", "--start", "2", "--flags", "m"]).0, EXIT_OK);
}

#[test]
fn binary_honours_the_budget_variable() {
    let bin = env!("CARGO_BIN_EXE_treegex");
    let pattern = "(?:a|a)*b";
    let input = "a".repeat(24);
    let status = |env: Option<&str>| {
        let mut c = Command::new(bin);
        c.args(["match", "--engine", "naive", pattern, &input]);
        c.env_remove("TREEGEX_BUDGET");
        if let Some(v) = env {
            c.env("TREEGEX_BUDGET", v);
        }
        c.output().unwrap().status.code().unwrap()
    };
    assert_eq!(status(Some("1000")), EXIT_BUDGET);
    assert_eq!(status(Some("lots")), EXIT_USAGE);
    let out = Command::new(bin).args(["match", "a(.*)c", "abcd"]).output().unwrap();
    assert_eq!((out.status.code(), String::from_utf8(out.stdout).unwrap()), (Some(0), "end 3 1=[1,2]\n".into()));
}
