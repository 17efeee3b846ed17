//! Command-line front end. `run` parses arguments, writes the report and
//! returns the process exit status.
//!
//! Exit status: 0 match / holds / agreement, 1 no match / fails /
//! disagreement, 2 pattern parse error, 3 pattern outside the star
//! fragment, 4 budget exceeded, 64 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::equiv::{
    check_leaf_equiv, check_rule, counterexample_fixtures, run_fixture, rewrite_catalog, Counterexample, EquivConfig,
    Found,
};
use crate::fuzz::{run_fuzz, FuzzConfig, FuzzMode, FuzzReport};
use crate::input::{Direction, GroupMap, GroupRange, Input, Leaf};
use crate::oracle::{naive_match_input, DEFAULT_STEP_BUDGET};
use crate::pikevm::{render_trace, trace, try_compile, vm_run_code};
use crate::piketree::{pike_tree, pt_trace, render_pt_trace};
use crate::regex::{parse, Flags, GroupId, Regex};
use crate::tree::{first_branch, replay_leaves, Actions, TreeBuilder, TreeError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SUBSET: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable overriding the default step budget.
pub const BUDGET_ENV: &str = "TREEGEX_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "treegex", version, about = "Backtracking trees for JavaScript regexes")]
pub struct Cli {
    /// Regex flags, any of i, m, s (commas allowed).
    #[arg(long, global = true, default_value = "")]
    pub flags: String,
    /// Start index in the input.
    #[arg(long, global = true, default_value_t = 0)]
    pub start: usize,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Step or node budget; defaults to $TREEGEX_BUDGET, then 10^7.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Tree,
    Pikevm,
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dir {
    Fwd,
    Bwd,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Direction {
        match d {
            Dir::Fwd => Direction::Forward,
            Dir::Bwd => Direction::Backward,
        }
    }
}

fn dir_name(d: Direction) -> String {
    match d {
        Direction::Forward => "fwd".into(),
        Direction::Backward => "bwd".into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Full,
    StarFragment,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// First match from the start index.
    Match {
        pattern: String,
        input: String,
        #[arg(long, value_enum, default_value = "tree")]
        engine: Engine,
    },
    /// Render the backtracking tree.
    Tree { pattern: String, input: String },
    /// All leaves of the tree in priority order.
    Leaves {
        pattern: String,
        input: String,
        #[arg(long, value_enum, default_value = "fwd")]
        dir: Dir,
    },
    /// PikeVM bytecode.
    Compile { pattern: String },
    /// Lockstep PikeVM and PikeTree traces.
    Trace { pattern: String, input: String },
    /// Bounded leaf-equivalence check.
    Equiv {
        left: String,
        right: String,
        #[arg(long, value_enum, default_value = "fwd")]
        dir: Dir,
        #[arg(long, default_value = "abc")]
        alphabet: String,
        #[arg(long, default_value_t = 5)]
        max_len: usize,
    },
    /// Check every rewrite of the catalog in each annotated direction.
    RewriteCheck {
        /// Only rules whose name contains this text.
        #[arg(long)]
        rule: Option<String>,
        #[arg(long, default_value_t = 500)]
        instances: usize,
        #[arg(long, default_value_t = 5)]
        max_len: usize,
    },
    /// Run the fixtures of rewrites that fail in context.
    Counterexamples,
    /// Differential fuzzing of the engines.
    Fuzz {
        #[arg(long, default_value_t = 10_000)]
        iters: u64,
        #[arg(long, value_enum, default_value = "full")]
        mode: Mode,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        /// File receiving the reproducers when some case disagrees.
        #[arg(long, default_value = "treegex-reproducer.json")]
        out: std::path::PathBuf,
    },
}

/// Options shared by every verb.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub flags: Flags,
    pub start: usize,
    pub json: bool,
    pub seed: u64,
    pub budget: u64,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<RunConfig, String> {
        let env = std::env::var(BUDGET_ENV).ok();
        let budget = match (cli.budget, env) {
            (Some(b), _) => b,
            (None, Some(v)) => v.trim().parse().map_err(|_| format!("{BUDGET_ENV} is not a number: {v}"))?,
            (None, None) => DEFAULT_STEP_BUDGET,
        };
        if budget == 0 {
            return Err("the budget must be positive".into());
        }
        Ok(RunConfig {
            flags: Flags::parse(&cli.flags)?,
            start: cli.start,
            json: cli.json,
            seed: cli.seed,
            budget,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafReport {
    pub end: usize,
    /// Every group of the pattern, `null` when undefined.
    pub groups: BTreeMap<String, Option<[usize; 2]>>,
}

impl LeafReport {
    pub fn new(l: &Leaf, groups: &[GroupId]) -> LeafReport {
        LeafReport {
            end: l.end(),
            groups: groups
                .iter()
                .map(|g| {
                    let v = match l.groups.get(*g) {
                        Some(GroupRange::Closed { start, end }) => Some([start, end]),
                        _ => None,
                    };
                    (g.to_string(), v)
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub pattern: String,
    pub input: String,
    pub start: usize,
    pub engine: String,
    pub leaf: Option<LeafReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeReport {
    pub pattern: String,
    pub input: String,
    pub start: usize,
    pub size: u64,
    pub tree: serde_json::Value,
    pub first_branch: Option<LeafReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeavesReport {
    pub pattern: String,
    pub input: String,
    pub start: usize,
    pub direction: String,
    pub leaves: Vec<LeafReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileReport {
    pub pattern: String,
    pub instructions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRowReport {
    pub idx: usize,
    pub best: Option<usize>,
    pub active: Vec<String>,
    pub blocked: Vec<String>,
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    pub pattern: String,
    pub input: String,
    pub vm: Vec<TraceRowReport>,
    pub tree: Vec<TraceRowReport>,
    pub vm_result: Option<LeafReport>,
    pub tree_result: Option<LeafReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CounterexampleReport {
    Groups {
        left: Vec<GroupId>,
        right: Vec<GroupId>,
    },
    Leaves {
        input: String,
        start: usize,
        direction: String,
        groups: String,
        left: Vec<LeafReport>,
        right: Vec<LeafReport>,
    },
}

impl CounterexampleReport {
    pub fn new(c: &Counterexample, groups: &[GroupId]) -> CounterexampleReport {
        match c {
            Counterexample::Groups { left, right } => CounterexampleReport::Groups {
                left: left.clone(),
                right: right.clone(),
            },
            Counterexample::Leaves {
                input,
                start,
                direction,
                groups: gm,
                left,
                right,
            } => CounterexampleReport::Leaves {
                input: input.clone(),
                start: *start,
                direction: dir_name(*direction),
                groups: gm.to_string(),
                left: left.iter().map(|l| LeafReport::new(l, groups)).collect(),
                right: right.iter().map(|l| LeafReport::new(l, groups)).collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivReport {
    pub left: String,
    pub right: String,
    pub direction: String,
    pub alphabet: String,
    pub max_len: usize,
    pub holds: bool,
    pub inputs_checked: u64,
    pub counterexample: Option<CounterexampleReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleFailure {
    pub lhs: String,
    pub rhs: String,
    pub counterexample: CounterexampleReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleReport {
    pub rule: String,
    pub direction: String,
    /// Whether the rewrite is expected to hold in this direction.
    pub expected: bool,
    pub holds: bool,
    pub instantiations: usize,
    pub over_budget: usize,
    pub inputs_checked: u64,
    pub failure: Option<RuleFailure>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteReport {
    pub seed: u64,
    pub instances: usize,
    pub max_len: usize,
    pub rules: Vec<RuleReport>,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoundReport {
    pub index: usize,
    pub leaf: LeafReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureReport {
    pub id: String,
    pub direction: String,
    pub lhs: String,
    pub rhs: String,
    pub context: String,
    pub witness: String,
    pub plugged: [String; 2],
    pub results: [Option<FoundReport>; 2],
    pub differ: bool,
    pub leaves_differ: bool,
    pub opposite_holds: Option<bool>,
    pub js: [String; 2],
    pub js_agrees: [bool; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexamplesReport {
    pub fixtures: Vec<FixtureReport>,
    pub all_differ: bool,
}

enum Failure {
    Exit(i32, String),
    Io(std::io::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Io(e)
    }
}

type Outcome = Result<i32, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Exit(EXIT_USAGE, msg.into())
}

fn pattern(p: &str) -> Result<Regex, Failure> {
    parse(p).map_err(|e| Failure::Exit(EXIT_PARSE, format!("parse error in {p:?}: {e}")))
}

fn input(s: &str, start: usize) -> Result<Input, Failure> {
    Input::new(s, start).ok_or_else(|| usage(format!("start {start} is past the end of the input")))
}

fn budget_error(budget: u64) -> Failure {
    Failure::Exit(EXIT_BUDGET, format!("budget of {budget} exceeded"))
}

fn build_tree(r: &Regex, i: &Input, cfg: &RunConfig, d: Direction) -> Result<crate::tree::BacktrackTree, Failure> {
    TreeBuilder::new(cfg.flags)
        .with_budget(cfg.budget)
        .build_total(&Actions::of_regex(r), i, &GroupMap::new(), d)
        .map_err(|e| match e {
            TreeError::BudgetExceeded(_) => budget_error(cfg.budget),
            TreeError::OutOfFuel => Failure::Exit(EXIT_BUDGET, "out of fuel".into()),
        })
}

fn emit<T: Serialize>(out: &mut dyn Write, cfg: &RunConfig, report: &T, text: impl FnOnce() -> String) -> std::io::Result<()> {
    if cfg.json {
        writeln!(out, "{}", serde_json::to_string_pretty(report).expect("reports serialize"))
    } else {
        write!(out, "{}", text())
    }
}

fn leaf_text(l: &Option<LeafReport>) -> String {
    match l {
        None => "no match\n".into(),
        Some(l) => {
            let groups: Vec<String> = l
                .groups
                .iter()
                .map(|(g, v)| match v {
                    Some([s, e]) => format!("{g}=[{s},{e}]"),
                    None => format!("{g}=undefined"),
                })
                .collect();
            if groups.is_empty() {
                format!("end {}\n", l.end)
            } else {
                format!("end {} {}\n", l.end, groups.join(" "))
            }
        }
    }
}

fn cmd_match(out: &mut dyn Write, cfg: &RunConfig, p: &str, s: &str, engine: Engine) -> Outcome {
    let r = pattern(p)?;
    let i = input(s, cfg.start)?;
    let leaf = match engine {
        Engine::Tree => first_branch(&build_tree(&r, &i, cfg, Direction::Forward)?, &i),
        Engine::Naive => naive_match_input(&r, &i, cfg.flags, cfg.budget).map_err(|_| budget_error(cfg.budget))?,
        Engine::Pikevm => {
            let code = try_compile(&r).map_err(|e| Failure::Exit(EXIT_SUBSET, e))?;
            vm_run_code(&code, &i, cfg.flags)
        }
    };
    let groups = r.def_groups();
    let report = MatchReport {
        pattern: p.into(),
        input: s.into(),
        start: cfg.start,
        engine: format!("{engine:?}").to_lowercase(),
        leaf: leaf.as_ref().map(|l| LeafReport::new(l, &groups)),
    };
    emit(out, cfg, &report, || leaf_text(&report.leaf))?;
    Ok(if leaf.is_some() { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_tree(out: &mut dyn Write, cfg: &RunConfig, p: &str, s: &str) -> Outcome {
    let r = pattern(p)?;
    let i = input(s, cfg.start)?;
    let t = build_tree(&r, &i, cfg, Direction::Forward)?;
    let leaf = first_branch(&t, &i);
    let report = TreeReport {
        pattern: p.into(),
        input: s.into(),
        start: cfg.start,
        size: t.size(),
        tree: t.to_json(),
        first_branch: leaf.as_ref().map(|l| LeafReport::new(l, &r.def_groups())),
    };
    emit(out, cfg, &report, || t.to_text())?;
    Ok(if leaf.is_some() { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_leaves(out: &mut dyn Write, cfg: &RunConfig, p: &str, s: &str, d: Direction) -> Outcome {
    let r = pattern(p)?;
    let i = input(s, cfg.start)?;
    let t = build_tree(&r, &i, cfg, d)?;
    let groups = r.def_groups();
    let leaves: Vec<LeafReport> = replay_leaves(&t, &i, &GroupMap::new(), d, None)
        .iter()
        .map(|l| LeafReport::new(l, &groups))
        .collect();
    let report = LeavesReport {
        pattern: p.into(),
        input: s.into(),
        start: cfg.start,
        direction: dir_name(d),
        leaves,
    };
    emit(out, cfg, &report, || report.leaves.iter().map(|l| leaf_text(&Some(l.clone()))).collect())?;
    Ok(if report.leaves.is_empty() { EXIT_NEGATIVE } else { EXIT_OK })
}

fn cmd_compile(out: &mut dyn Write, cfg: &RunConfig, p: &str) -> Outcome {
    let r = pattern(p)?;
    let code = try_compile(&r).map_err(|e| Failure::Exit(EXIT_SUBSET, e))?;
    let report = CompileReport {
        pattern: p.into(),
        instructions: code.0.iter().map(|ins| ins.to_string()).collect(),
    };
    emit(out, cfg, &report, || code.disassemble())?;
    Ok(EXIT_OK)
}

fn cmd_trace(out: &mut dyn Write, cfg: &RunConfig, p: &str, s: &str) -> Outcome {
    let r = pattern(p)?;
    let i = input(s, cfg.start)?;
    let code = try_compile(&r).map_err(|e| Failure::Exit(EXIT_SUBSET, e))?;
    let (vm_rows, vm_leaf) = trace(&code, &i, cfg.flags);
    let (pt_rows, pt_leaf) = pt_trace(&pike_tree(&r, &i, cfg.flags), &i);
    let groups = r.def_groups();
    let report = TraceReport {
        pattern: p.into(),
        input: s.into(),
        vm: vm_rows
            .iter()
            .map(|row| TraceRowReport {
                idx: row.idx,
                best: row.best,
                active: row.active.iter().map(|l| l.to_string()).collect(),
                blocked: row.blocked.iter().map(|l| l.to_string()).collect(),
                rule: row.rule.to_string(),
            })
            .collect(),
        tree: pt_rows
            .iter()
            .map(|row| TraceRowReport {
                idx: row.idx,
                best: row.best,
                active: row.active.iter().map(|n| format!("t{n}")).collect(),
                blocked: row.blocked.iter().map(|n| format!("t{n}")).collect(),
                rule: match row.same_as {
                    Some(orig) => format!("{} = t{orig}", row.rule),
                    None => row.rule.to_string(),
                },
            })
            .collect(),
        vm_result: vm_leaf.as_ref().map(|l| LeafReport::new(l, &groups)),
        tree_result: pt_leaf.as_ref().map(|l| LeafReport::new(l, &groups)),
    };
    emit(out, cfg, &report, || {
        format!(
            "PikeVM\n{}result: {}\nPikeTree\n{}result: {}",
            render_trace(&vm_rows),
            leaf_text(&report.vm_result),
            render_pt_trace(&pt_rows),
            leaf_text(&report.tree_result)
        )
    })?;
    Ok(if vm_leaf.is_some() { EXIT_OK } else { EXIT_NEGATIVE })
}

fn counterexample_text(c: &Option<CounterexampleReport>) -> String {
    let leaves = |ls: &[LeafReport]| ls.iter().map(|l| leaf_text(&Some(l.clone())).trim_end().to_string()).collect::<Vec<_>>().join("; ");
    match c {
        None => String::new(),
        Some(CounterexampleReport::Groups { left, right }) => format!("defined groups differ: {left:?} vs {right:?}"),
        Some(CounterexampleReport::Leaves {
            input,
            start,
            direction,
            left,
            right,
            ..
        }) => format!("input {input:?} start {start} {direction}\n  left:  [{}]\n  right: [{}]", leaves(left), leaves(right)),
    }
}

fn cmd_equiv(out: &mut dyn Write, cfg: &RunConfig, p1: &str, p2: &str, d: Direction, alphabet: &str, max_len: usize) -> Outcome {
    let (r1, r2) = (pattern(p1)?, pattern(p2)?);
    let ecfg = EquivConfig {
        alphabet: alphabet.chars().collect(),
        max_len,
        flags: cfg.flags,
        budget: cfg.budget,
        seed: cfg.seed,
        ..EquivConfig::default()
    };
    let v = check_leaf_equiv(&r1, &r2, d, &ecfg).map_err(|_| budget_error(cfg.budget))?;
    let report = EquivReport {
        left: p1.into(),
        right: p2.into(),
        direction: dir_name(d),
        alphabet: alphabet.into(),
        max_len,
        holds: v.holds,
        inputs_checked: v.inputs_checked,
        counterexample: v.counterexample.as_ref().map(|c| CounterexampleReport::new(c, &r1.def_groups())),
    };
    emit(out, cfg, &report, || {
        if report.holds {
            format!("holds ({} inputs)\n", report.inputs_checked)
        } else {
            format!("counterexample: {}\n", counterexample_text(&report.counterexample))
        }
    })?;
    Ok(if v.holds { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_rewrite_check(out: &mut dyn Write, cfg: &RunConfig, filter: Option<&str>, instances: usize, max_len: usize) -> Outcome {
    let ecfg = EquivConfig {
        max_len,
        budget: cfg.budget.min(2_000_000),
        seed: cfg.seed,
        ..EquivConfig::default()
    };
    let mut rules = Vec::new();
    for rule in rewrite_catalog() {
        if filter.is_some_and(|f| !rule.name.contains(f)) {
            continue;
        }
        for (d, expected) in rule.valid.iter().map(|d| (*d, true)).chain(rule.invalid.iter().map(|d| (*d, false))) {
            let c = check_rule(&rule, d, instances, &ecfg).map_err(|_| budget_error(ecfg.budget))?;
            let failure = c.failure.as_ref().map(|(lhs, rhs, x)| RuleFailure {
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
                counterexample: CounterexampleReport::new(x, &lhs.def_groups()),
            });
            rules.push(RuleReport {
                rule: rule.name.clone(),
                direction: dir_name(d),
                expected,
                holds: failure.is_none(),
                instantiations: c.instantiations,
                over_budget: c.over_budget,
                inputs_checked: c.inputs_checked,
                failure,
            });
        }
    }
    let consistent = rules.iter().all(|r| r.expected == r.holds);
    let report = RewriteReport {
        seed: cfg.seed,
        instances,
        max_len,
        rules,
        consistent,
    };
    emit(out, cfg, &report, || {
        let mut s = String::new();
        for r in &report.rules {
            let verdict = if r.holds { "holds" } else { "fails" };
            let mark = if r.expected == r.holds { "ok" } else { "UNEXPECTED" };
            s += &format!("{:<4} {:<46} {:<3} {:<5} ({} instances)\n", mark, r.rule, r.direction, verdict, r.instantiations);
            if let Some(f) = &r.failure {
                s += &format!("     {} vs {}\n     {}\n", f.lhs, f.rhs, counterexample_text(&Some(f.counterexample.clone())).replace('\n', "\n     "));
            }
        }
        s
    })?;
    Ok(if consistent { EXIT_OK } else { EXIT_NEGATIVE })
}

fn found(f: &Found, groups: &[GroupId]) -> Option<FoundReport> {
    f.as_ref().map(|(k, l)| FoundReport {
        index: *k,
        leaf: LeafReport::new(l, groups),
    })
}

fn cmd_counterexamples(out: &mut dyn Write, cfg: &RunConfig) -> Outcome {
    let mut fixtures = Vec::new();
    for f in counterexample_fixtures() {
        let res = run_fixture(&f).map_err(|e| Failure::Exit(EXIT_NEGATIVE, e))?;
        fixtures.push(FixtureReport {
            id: f.id.into(),
            direction: dir_name(f.direction),
            lhs: f.lhs.to_string(),
            rhs: f.rhs.to_string(),
            context: f.context.into(),
            witness: f.witness.into(),
            plugged: res.plugged.clone().map(|r| r.to_string()),
            results: [found(&res.results[0], &res.plugged[0].def_groups()), found(&res.results[1], &res.plugged[1].def_groups())],
            differ: res.differ,
            leaves_differ: res.leaves_differ,
            opposite_holds: res.opposite_holds,
            js: f.js.map(String::from),
            js_agrees: res.js_agrees,
        });
    }
    let all_differ = fixtures.iter().all(|f| f.differ);
    let report = CounterexamplesReport { fixtures, all_differ };
    emit(out, cfg, &report, || {
        let show = |f: &Option<FoundReport>| match f {
            None => "no match".to_string(),
            Some(f) => format!("at {}: {}", f.index, leaf_text(&Some(f.leaf.clone())).trim_end()),
        };
        report
            .fixtures
            .iter()
            .map(|f| {
                format!(
                    "{} ({}) on {:?}\n  {}  =>  {}\n  {}  =>  {}\n",
                    f.id,
                    f.direction,
                    f.witness,
                    f.plugged[0],
                    show(&f.results[0]),
                    f.plugged[1],
                    show(&f.results[1])
                )
            })
            .collect()
    })?;
    Ok(if all_differ { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_fuzz(out: &mut dyn Write, cfg: &RunConfig, iters: u64, mode: Mode, max_len: usize, file: &std::path::Path) -> Outcome {
    let fcfg = FuzzConfig {
        seed: cfg.seed,
        iters,
        mode: match mode {
            Mode::Full => FuzzMode::Full,
            Mode::StarFragment => FuzzMode::StarFragment,
        },
        budget: cfg.budget,
        max_len,
    };
    let report: FuzzReport = run_fuzz(&fcfg);
    if !report.failures.is_empty() {
        std::fs::write(file, serde_json::to_string_pretty(&report.failures).expect("reproducers serialize"))?;
    }
    emit(out, cfg, &report, || {
        let mut s = format!(
            "seed {} {:?}: {} agreed, {} skipped, {} failures\n",
            report.seed,
            report.mode,
            report.agreed,
            report.skipped,
            report.failures.len()
        );
        for f in &report.failures {
            s += &format!(
                "  #{} /{}/ on {:?} from {}: {}\n",
                f.iteration, f.shrunk.pattern, f.shrunk.input, f.shrunk.start, f.detail
            );
        }
        if !report.failures.is_empty() {
            s += &format!("reproducers written to {}\n", file.display());
        }
        s
    })?;
    Ok(if report.failures.is_empty() { EXIT_OK } else { EXIT_NEGATIVE })
}

/// Runs the command line `args` (program name first), writing the report
/// to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let cfg = match RunConfig::from_cli(&cli) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return EXIT_USAGE;
        }
    };
    let res = match &cli.command {
        Command::Match { pattern, input, engine } => cmd_match(out, &cfg, pattern, input, *engine),
        Command::Tree { pattern, input } => cmd_tree(out, &cfg, pattern, input),
        Command::Leaves { pattern, input, dir } => cmd_leaves(out, &cfg, pattern, input, (*dir).into()),
        Command::Compile { pattern } => cmd_compile(out, &cfg, pattern),
        Command::Trace { pattern, input } => cmd_trace(out, &cfg, pattern, input),
        Command::Equiv {
            left,
            right,
            dir,
            alphabet,
            max_len,
        } => cmd_equiv(out, &cfg, left, right, (*dir).into(), alphabet, *max_len),
        Command::RewriteCheck { rule, instances, max_len } => cmd_rewrite_check(out, &cfg, rule.as_deref(), *instances, *max_len),
        Command::Counterexamples => cmd_counterexamples(out, &cfg),
        Command::Fuzz {
            iters,
            mode,
            max_len,
            out: file,
        } => cmd_fuzz(out, &cfg, *iters, *mode, *max_len, file),
    };
    match res {
        Ok(code) => code,
        Err(Failure::Exit(code, msg)) => {
            let _ = writeln!(err, "{msg}");
            code
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "{e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("treegex").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn match_verb() {
        let (code, out) = call(&["match", "--engine", "tree", "a(.*)c", "abcd", "--json"]);
        assert_eq!(code, EXIT_OK);
        let r: MatchReport = serde_json::from_str(&out).unwrap();
        let leaf = r.leaf.unwrap();
        assert_eq!((leaf.end, leaf.groups["1"]), (3, Some([1, 2])));
        assert_eq!(call(&["match", "", ""]), (EXIT_OK, "end 0\n".into()));
        assert_eq!(call(&["match", "--engine", "pikevm", "(?=a)", "x"]).0, EXIT_SUBSET);
        assert_eq!(call(&["match", "a(", "x"]).0, EXIT_PARSE);
        assert_eq!(call(&["match", "b", "a"]).0, EXIT_NEGATIVE);
        assert_eq!(call(&["match", "a", "a", "--start", "5"]).0, EXIT_USAGE);
        assert_eq!(call(&["match", "--engine", "naive", "(a*)*b", "aaaaaaaaaaaaaaaaaaaa", "--budget", "1000"]).0, EXIT_BUDGET);
    }

    #[test]
    fn equiv_verb() {
        assert_eq!(call(&["equiv", "a|a", "a", "--dir", "fwd"]).0, EXIT_OK);
        assert_eq!(call(&["equiv", "a", "a", "--dir", "bwd"]).0, EXIT_OK);
        let (code, out) = call(&["equiv", "(?:a|ab)(?:c|b)", "(?:(?:a|ab)c)|(?:(?:a|ab)b)", "--json"]);
        assert_eq!(code, EXIT_NEGATIVE);
        let r: EquivReport = serde_json::from_str(&out).unwrap();
        match r.counterexample.unwrap() {
            CounterexampleReport::Leaves { input, .. } => assert_eq!(input, "abc"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn compile_and_trace_verbs() {
        let (code, out) = call(&["compile", "(a*|a)b"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), 12);
        let (code, out) = call(&["trace", "(a*|a)b", "ab", "--json"]);
        assert_eq!(code, EXIT_OK);
        let r: TraceReport = serde_json::from_str(&out).unwrap();
        assert_eq!(r.vm_result, r.tree_result);
        assert!(r.tree.iter().any(|row| row.rule == "Skip = t9"));
    }

    #[test]
    fn budget_from_environment_is_validated() {
        let cli = Cli::try_parse_from(["treegex", "--budget", "0", "compile", "a"]).unwrap();
        assert!(RunConfig::from_cli(&cli).is_err());
    }
}
