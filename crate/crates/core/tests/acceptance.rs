//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::time::{Duration, Instant};

use rand::Rng;
use treegex::equiv::{check_rule, counterexample_fixtures, rewrite_catalog, run_fixture, EquivConfig};
use treegex::fuzz::{case_rng, check_case, gen_case, gen_regex, gen_string, run_fuzz, FuzzConfig, FuzzMode, GenConfig, Outcome};
use treegex::input::{Direction, GroupMap, Input};
use treegex::oracle::{naive_match_input, DEFAULT_STEP_BUDGET};
use treegex::pikevm::{compile, render_trace, step_census, trace};
use treegex::piketree::{pike_tree, pt_trace, render_pt_trace};
use treegex::regex::{parse, Flags};
use treegex::tree::{first_branch, fuel, regex_tree, Actions, TreeBuilder, TreeError};
use treegex::bool_semantics::compute_bool_tree;

type Check = Result<String, String>;

const FIG3_TREE: &str = "\
Choice
├─ Read a
│  Read b
│  Mismatch
└─ Choice
   ├─ Read a
   │  Open 1
   │  Read b
   │  Close 1
   │  Read b
   │  Read c
   │  Match
   └─ Read a
      Read b
      Mismatch
";

const FIG15A: &str = "\
0: SetOpen 1
1: Fork 2 8
2: Fork 3 7
3: BeginLoop
4: ResetRegs []
5: Consume a
6: EndLoop 2
7: Jmp 9
8: Consume a
9: SetClose 1
10: Consume b
11: Accept
";

const FIG15C_VM: &str = "  0  A [0]              B []         Open
  0  A [1]              B []         Fork
  0  A [2;8]            B []         Fork
  0  A [3;7;8]          B []         Begin
  0  A [4;7;8]          B []         Reset
  0  A [5;7;8]          B []         Block
  0  A [7;8]            B [6]        Jump
  0  A [9;8]            B [6]        Close
  0  A [10;8]           B [6]        FailBlock
  0  A [8]              B [6]        Block
  0  A []               B [6;9]      NextChar
  1  A [6;9]            B []         End
  1  A [2;9]            B []         Fork
  1  A [3;7;9]          B []         Begin
  1  A [4;7;9]          B []         Reset
  1  A [5;7;9]          B []         FailBlock
  1  A [7;9]            B []         Jump
  1  A [9;9]            B []         Close
  1  A [10;9]           B []         Block
  1  A [9]              B [11]       Skip
  1  A []               B [11]       NextChar
  2  A [11]             B []         Match
  2  A []               B []         Final
";

const FIG15C_TREE: &str = "  0  A [t0]                   B []             Open
  0  A [t1]                   B []             Choice
  0  A [t2;t14]               B []             Choice
  0  A [t3;t12;t14]           B []             Reset
  0  A [t4;t12;t14]           B []             Blocked
  0  A [t12;t14]              B [t5]           Close
  0  A [t13;t14]              B [t5]           Mismatch
  0  A [t14]                  B [t5]           Blocked
  0  A []                     B [t5;t15]       NextChar
  1  A [t5;t15]               B []             Progress
  1  A [t6;t15]               B []             Choice
  1  A [t7;t9;t15]            B []             Reset
  1  A [t8;t9;t15]            B []             Mismatch
  1  A [t9;t15]               B []             Close
  1  A [t10;t15]              B []             Blocked
  1  A [t15]                  B [t11]          Skip t15 = t9
  1  A []                     B [t11]          NextChar
  2  A [t11]                  B []             Match
  2  A []                     B []             Final
";

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    ensure(t.elapsed() < limit, || format!("took {:.1}s, limit {}s", t.elapsed().as_secs_f64(), limit.as_secs()))
}

fn fig3() -> Check {
    let t0 = Instant::now();
    let r = parse("(?:a|(?:a(b)|a))bc").unwrap();
    let i = Input::new("abbc", 0).unwrap();
    let t = regex_tree(&r, &i, Flags::default());
    ensure(t.to_text() == FIG3_TREE, || format!("rendering differs:\n{}", t.to_text()))?;
    let leaf = first_branch(&t, &i).ok_or("no match")?;
    ensure(leaf.end() == 4 && leaf.groups.closed(1) == Some((1, 2)), || format!("first branch {leaf}"))?;
    within(t0, Duration::from_secs(1))?;
    Ok("end 4, group 1 = [1,2]".into())
}

fn fig15a() -> Check {
    let code = compile(&parse("(a*|a)b").unwrap());
    ensure(code.disassemble() == FIG15A, || format!("listing differs:\n{}", code.disassemble()))?;
    Ok(format!("{} instructions", code.len()))
}

fn fig15c() -> Check {
    let r = parse("(a*|a)b").unwrap();
    let i = Input::new("ab", 0).unwrap();
    let (vm_rows, vm_leaf) = trace(&compile(&r), &i, Flags::default());
    let (pt_rows, pt_leaf) = pt_trace(&pike_tree(&r, &i, Flags::default()), &i);
    ensure(render_trace(&vm_rows) == FIG15C_VM, || format!("VM trace differs:\n{}", render_trace(&vm_rows)))?;
    ensure(render_pt_trace(&pt_rows) == FIG15C_TREE, || format!("tree trace differs:\n{}", render_pt_trace(&pt_rows)))?;
    ensure(vm_leaf.is_some() && vm_leaf == pt_leaf, || format!("results {vm_leaf:?} vs {pt_leaf:?}"))?;
    Ok(format!("{} VM rows, {} tree rows, same leaf", vm_rows.len(), pt_rows.len()))
}

const TREE_BUDGET: u64 = 2_000_000;

fn fuel_property() -> Check {
    let t0 = Instant::now();
    let (mut ok, mut over) = (0, 0);
    for k in 0..10_000u64 {
        let mut rng = case_rng(104, k);
        let r = gen_regex(&mut rng, &GenConfig::full());
        let s = gen_string(&mut rng, &['a', 'b', 'c', 'A', ' '], 8);
        let start = rng.gen_range(0..=s.chars().count());
        let i = Input::new(&s, start).unwrap();
        let d = if rng.gen_bool(0.8) { Direction::Forward } else { Direction::Backward };
        let l = Actions::of_regex(&r);
        let n = fuel(&l, &i, d) + 1;
        match TreeBuilder::new(Flags::default()).with_budget(TREE_BUDGET).build(&l, &i, &GroupMap::new(), d, n) {
            Ok(_) => ok += 1,
            Err(TreeError::BudgetExceeded(_)) => over += 1,
            Err(TreeError::OutOfFuel) => return Err(format!("out of fuel: /{r}/ on {s:?} from {start}")),
        }
    }
    within(t0, Duration::from_secs(60))?;
    Ok(format!("{ok} trees built, {over} over the node budget, 0 out of fuel"))
}

fn bool_equals_tree() -> Check {
    let mut n = 0;
    for k in 0..5_000u64 {
        let (r, i, flags) = gen_case(105, k, FuzzMode::StarFragment, 8);
        let l = Actions::of_regex(&r);
        let t = regex_tree(&r, &i, flags);
        let b = compute_bool_tree(&l, &i, true, flags);
        ensure(t == b, || format!("/{r}/ on {:?}", i.describe()))?;
        n += 1;
    }
    Ok(format!("{n} trees equal"))
}

fn four_way() -> Check {
    let t0 = Instant::now();
    let (mut agreed, mut skipped) = (0, 0);
    for k in 0..10_000u64 {
        let (r, i, flags) = gen_case(106, k, FuzzMode::StarFragment, 8);
        match check_case(FuzzMode::StarFragment, &r, &i, flags, DEFAULT_STEP_BUDGET) {
            Outcome::Agree => agreed += 1,
            Outcome::Skipped(_) => skipped += 1,
            Outcome::Disagree(d) => return Err(format!("/{r}/ on {}: {d}", i.describe())),
        }
    }
    within(t0, Duration::from_secs(120))?;
    Ok(format!("{agreed} agreed, {skipped} over budget"))
}

fn full_grammar() -> Check {
    let report = run_fuzz(&FuzzConfig {
        seed: 107,
        iters: 10_000,
        mode: FuzzMode::Full,
        ..FuzzConfig::default()
    });
    if let Some(f) = report.failures.first() {
        return Err(format!("{} failures, first: /{}/ on {:?}: {}", report.failures.len(), f.shrunk.pattern, f.shrunk.input, f.detail));
    }
    Ok(format!("{} agreed, {} over budget", report.agreed, report.skipped))
}

fn linearity() -> Check {
    let mut worst = 0.0f64;
    for k in 0..1_000u64 {
        let (r, i, flags) = gen_case(108, k, FuzzMode::StarFragment, 12);
        let code = compile(&r);
        let c = step_census(&code, &i, flags);
        let bound = 4 * (i.len() as u64 + 1) * code.len() as u64;
        ensure(c.processed() <= bound, || format!("/{r}/ on {}: {} > {bound}", i.describe(), c.processed()))?;
        worst = worst.max(c.processed() as f64 / bound as f64);
    }
    let r = parse("(a|a)*b").unwrap();
    let code = compile(&r);
    let mut steps = Vec::new();
    for n in [64, 128, 256, 512] {
        let i = Input::new(&"a".repeat(n), 0).unwrap();
        steps.push(step_census(&code, &i, Flags::default()).total_steps);
    }
    for w in steps.windows(2) {
        let ratio = w[1] as f64 / w[0] as f64;
        ensure(ratio <= 2.2, || format!("step ratio {ratio:.3} for {steps:?}"))?;
    }
    let i = Input::new(&"a".repeat(64), 0).unwrap();
    ensure(naive_match_input(&r, &i, Flags::default(), DEFAULT_STEP_BUDGET).is_err(), || {
        "naive matcher finished within budget at n = 64".into()
    })?;
    Ok(format!("census at most {:.0}% of bound; adversarial steps {steps:?}; naive over budget at 64", worst * 100.0))
}

fn rewrite_suite() -> Check {
    let t0 = Instant::now();
    let cfg = EquivConfig::default();
    let mut checked = 0;
    for rule in rewrite_catalog() {
        for d in &rule.valid {
            let c = check_rule(&rule, *d, 500, &cfg).map_err(|e| format!("{}: {e}", rule.name))?;
            if let Some((lhs, rhs, x)) = c.failure {
                return Err(format!("{} {} fails: {lhs} vs {rhs} {x}", rule.name, d.arrow()));
            }
            checked += 1;
        }
    }
    let fixtures = counterexample_fixtures();
    for f in &fixtures {
        let res = run_fixture(f)?;
        let i = Input::new(f.witness, 0).unwrap();
        let anchored: Vec<_> = res.plugged.iter().map(|r| first_branch(&regex_tree(r, &i, Flags::default()), &i)).collect();
        ensure(res.differ && anchored[0] != anchored[1], || format!("{}: results agree", f.id))?;
    }
    within(t0, Duration::from_secs(300))?;
    Ok(format!(
        "{checked} valid rule directions hold, {} fixtures differ, {:.0}s",
        fixtures.len(),
        t0.elapsed().as_secs_f64()
    ))
}

fn peculiarities() -> Check {
    let run = |p: &str, s: &str| {
        let i = Input::new(s, 0).unwrap();
        first_branch(&regex_tree(&parse(p).unwrap(), &i, Flags::default()), &i)
    };
    let l = run("(?:(a)|b)*", "ab").ok_or("capture reset: no match")?;
    ensure(l.end() == 2 && l.groups.get(1).is_none(), || format!("capture reset: {l}"))?;
    let l = run("(a?)*", "b").ok_or("nullable quantifier: no match")?;
    ensure(l.end() == 0, || format!("nullable quantifier: {l}"))?;
    ensure(run("(?=(a))(?=a\\1)a", "a").is_none(), || "lookarounds in order matched".into())?;
    let l = run("(?=a\\1)(?=(a))a", "a").ok_or("swapped lookarounds: no match")?;
    ensure(l.end() == 1 && l.groups.closed(1) == Some((0, 1)), || format!("swapped lookarounds: {l}"))?;
    Ok("capture reset, nullable quantifier, lookaround order".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("1 tree of (?:a|(?:a(b)|a))bc on abbc", fig3),
        ("2 compiled listing of (a*|a)b", fig15a),
        ("3 lockstep VM and tree traces", fig15c),
        ("4 fuel suffices on 10k triples", fuel_property),
        ("5 boolean tree equals tree on 5k triples", bool_equals_tree),
        ("6 four-way differential on 10k triples", four_way),
        ("7 full-grammar differential on 10k triples", full_grammar),
        ("8 PikeVM linearity", linearity),
        ("9 rewrite suite and counterexamples", rewrite_suite),
        ("10 semantic peculiarities", peculiarities),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{:.1}s]", t.elapsed().as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {name}: {e} [{:.1}s]", t.elapsed().as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
