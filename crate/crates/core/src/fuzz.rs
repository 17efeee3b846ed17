//! Random regex and subject generation, differential checks between the
//! engines, and a structural shrinker for failing cases.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bool_semantics::compute_bool_tree;
use crate::input::{Direction, GroupMap, Input, Leaf};
use crate::oracle::{naive_match_input, DEFAULT_STEP_BUDGET};
use crate::pikevm::{compile, vm_run_code};
use crate::piketree::{corun, pt_run};
use crate::regex::{
    Anchor, CharDescriptor, ClassEscape, ClassItem, Delta, Flags, GroupId, LookKind, Quantity, Regex,
};
use crate::tree::{fuel, first_branch, Actions, TreeBuilder, TreeError};

/// Shape of generated regexes.
#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_depth: u32,
    pub alphabet: Vec<char>,
    pub groups: bool,
    pub classes: bool,
    pub anchors: bool,
    pub backrefs: bool,
    pub lookarounds: bool,
    /// Counted and optional quantifiers in addition to stars.
    pub counted: bool,
}

impl GenConfig {
    /// Every construct of the grammar.
    pub fn full() -> GenConfig {
        GenConfig {
            max_depth: 6,
            alphabet: vec!['a', 'b', 'c'],
            groups: true,
            classes: true,
            anchors: true,
            backrefs: true,
            lookarounds: true,
            counted: true,
        }
    }

    /// The star fragment run by the PikeVM.
    pub fn star_fragment() -> GenConfig {
        GenConfig {
            max_depth: 6,
            alphabet: vec!['a', 'b', 'c'],
            groups: true,
            classes: true,
            anchors: false,
            backrefs: false,
            lookarounds: false,
            counted: false,
        }
    }

    /// Small group-free regexes used to instantiate rewrite schemas.
    pub fn schema_part() -> GenConfig {
        GenConfig {
            max_depth: 2,
            alphabet: vec!['a', 'b', 'c'],
            groups: false,
            classes: false,
            anchors: false,
            backrefs: false,
            lookarounds: false,
            counted: true,
        }
    }

    pub fn with_depth(mut self, d: u32) -> GenConfig {
        self.max_depth = d;
        self
    }

    pub fn with_groups(mut self, on: bool) -> GenConfig {
        self.groups = on;
        self
    }
}

struct Gen<'a, R> {
    cfg: &'a GenConfig,
    rng: &'a mut R,
    next_group: GroupId,
}

impl<R: Rng> Gen<'_, R> {
    fn descriptor(&mut self) -> CharDescriptor {
        let single = |rng: &mut R, alphabet: &[char]| *alphabet.choose(rng).expect("nonempty alphabet") as u16;
        if !self.cfg.classes || self.rng.gen_bool(0.75) {
            return CharDescriptor::Single(single(self.rng, &self.cfg.alphabet));
        }
        match self.rng.gen_range(0..4) {
            0 => CharDescriptor::Dot,
            1 => {
                let e = [ClassEscape::Word, ClassEscape::NotWord, ClassEscape::Space, ClassEscape::Digit]
                    .choose(self.rng)
                    .copied()
                    .expect("nonempty");
                CharDescriptor::Escape(e)
            }
            _ => {
                let n = self.rng.gen_range(1..=2);
                let items = (0..n)
                    .map(|_| {
                        let c = single(self.rng, &self.cfg.alphabet);
                        ClassItem::Range(c, c)
                    })
                    .collect();
                CharDescriptor::Class {
                    items,
                    negated: self.rng.gen_bool(0.3),
                }
            }
        }
    }

    fn quantity(&mut self) -> Quantity {
        let greedy = self.rng.gen_bool(0.6);
        if !self.cfg.counted || self.rng.gen_bool(0.4) {
            return Quantity::new(0, Delta::Infinite, greedy);
        }
        let min = self.rng.gen_range(0..=2);
        let delta = match self.rng.gen_range(0..4) {
            0 => Delta::Infinite,
            k => Delta::Finite(k - 1),
        };
        Quantity::new(min, delta, greedy)
    }

    fn leaf(&mut self) -> Regex {
        let roll = self.rng.gen_range(0..100);
        if roll < 8 {
            Regex::Epsilon
        } else if self.cfg.anchors && roll < 16 {
            let a = [Anchor::InputStart, Anchor::InputEnd, Anchor::WordBoundary, Anchor::NotWordBoundary]
                .choose(self.rng)
                .copied()
                .expect("nonempty");
            Regex::Anchor(a)
        } else if self.cfg.backrefs && roll < 19 {
            Regex::Backref(self.rng.gen_range(1..=3))
        } else {
            Regex::Char(self.descriptor())
        }
    }

    fn regex(&mut self, depth: u32) -> Regex {
        if depth >= self.cfg.max_depth || self.rng.gen_bool(0.1 + 0.1 * depth as f64) {
            return self.leaf();
        }
        let roll = self.rng.gen_range(0..100);
        match roll {
            0..=29 => {
                let a = self.regex(depth + 1);
                Regex::seq(a, self.regex(depth + 1))
            }
            30..=49 => {
                let a = self.regex(depth + 1);
                Regex::disj(a, self.regex(depth + 1))
            }
            50..=67 if self.cfg.groups => {
                self.next_group += 1;
                let g = self.next_group;
                Regex::group(g, self.regex(depth + 1))
            }
            78..=83 if self.cfg.lookarounds => {
                let lk = [LookKind::Lookahead, LookKind::NegLookahead, LookKind::Lookbehind, LookKind::NegLookbehind]
                    .choose(self.rng)
                    .copied()
                    .expect("nonempty");
                Regex::look(lk, self.regex(depth + 1))
            }
            _ => {
                let inner = self.regex(depth + 1);
                let q = self.quantity();
                match inner {
                    Regex::Look(..) | Regex::Anchor(_) => Regex::seq(inner, Regex::Epsilon),
                    _ => Regex::quant(inner, q),
                }
            }
        }
    }
}

/// Random regex with groups numbered in opening order and every
/// backreference pointing at an existing group.
pub fn gen_regex<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Regex {
    let mut g = Gen {
        cfg,
        rng,
        next_group: 0,
    };
    let r = g.regex(0);
    normalize_groups(&r)
}

pub fn gen_string<R: Rng>(rng: &mut R, alphabet: &[char], max_len: usize) -> String {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| *alphabet.choose(rng).expect("nonempty alphabet")).collect()
}

pub fn gen_flags<R: Rng>(rng: &mut R) -> Flags {
    Flags {
        ignore_case: rng.gen_bool(0.2),
        multiline: rng.gen_bool(0.2),
        dot_all: rng.gen_bool(0.2),
    }
}

/// Renumbers groups 1..n in opening order and maps backreferences along;
/// backreferences to missing groups are folded onto existing ones, or
/// dropped when there are none.
pub fn normalize_groups(r: &Regex) -> Regex {
    let old = r.def_groups();
    let renumber = |g: GroupId| -> GroupId { old.iter().position(|&o| o == g).map_or(0, |k| k as GroupId + 1) };
    fn go(r: &Regex, n: usize, f: &dyn Fn(GroupId) -> GroupId) -> Regex {
        match r {
            Regex::Epsilon | Regex::Char(_) | Regex::Anchor(_) => r.clone(),
            Regex::Backref(g) => match f(*g) {
                0 if n == 0 => Regex::Epsilon,
                0 => Regex::Backref((*g - 1) % n as GroupId + 1),
                k => Regex::Backref(k),
            },
            Regex::Disjunction(a, b) => Regex::disj(go(a, n, f), go(b, n, f)),
            Regex::Sequence(a, b) => Regex::seq(go(a, n, f), go(b, n, f)),
            Regex::Group(g, inner) => Regex::group(f(*g), go(inner, n, f)),
            Regex::Quantified(inner, q) => Regex::quant(go(inner, n, f), *q),
            Regex::Look(lk, inner) => Regex::look(*lk, go(inner, n, f)),
        }
    }
    go(r, old.len(), &renumber)
}

/// One regex/subject pair to run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub pattern: String,
    pub input: String,
    pub start: usize,
    pub flags: Flags,
}

/// How a case was resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Agree,
    /// Some engine hit its step or node budget.
    Skipped(String),
    Disagree(String),
}

fn leaf_str(l: &Option<Leaf>) -> String {
    match l {
        Some(l) => l.to_string(),
        None => "no match".into(),
    }
}

/// Tree construction with `fuel + 1`, reporting exhaustion as a failure
/// and the node budget as a skip.
pub fn tree_first_branch(r: &Regex, i: &Input, flags: Flags, budget: u64) -> Result<Option<Leaf>, Outcome> {
    let l = Actions::of_regex(r);
    let n = fuel(&l, i, Direction::Forward).saturating_add(1);
    match TreeBuilder::new(flags).with_budget(budget).build(&l, i, &GroupMap::new(), Direction::Forward, n) {
        Ok(t) => Ok(first_branch(&t, i)),
        Err(TreeError::OutOfFuel) => Err(Outcome::Disagree(format!("fuel {} was not enough", n - 1))),
        Err(TreeError::BudgetExceeded(b)) => Err(Outcome::Skipped(format!("tree exceeded {b} nodes"))),
    }
}

/// Tree semantics against the naive matcher.
pub fn check_full(r: &Regex, i: &Input, flags: Flags, budget: u64) -> Outcome {
    let tree = match tree_first_branch(r, i, flags, budget) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let naive = match naive_match_input(r, i, flags, budget) {
        Ok(n) => n,
        Err(e) => return Outcome::Skipped(e.to_string()),
    };
    if tree == naive {
        Outcome::Agree
    } else {
        Outcome::Disagree(format!("tree {} vs naive {}", leaf_str(&tree), leaf_str(&naive)))
    }
}

/// PikeVM, PikeTree, tree semantics and the naive matcher on a regex of
/// the star fragment, plus the boolean tree and the lockstep co-run.
pub fn check_star_fragment(r: &Regex, i: &Input, flags: Flags, budget: u64) -> Outcome {
    let l = Actions::of_regex(r);
    let n = fuel(&l, i, Direction::Forward).saturating_add(1);
    let tree = match TreeBuilder::new(flags).with_budget(budget).build(&l, i, &GroupMap::new(), Direction::Forward, n) {
        Ok(t) => t,
        Err(TreeError::OutOfFuel) => return Outcome::Disagree("fuel was not enough".into()),
        Err(TreeError::BudgetExceeded(b)) => return Outcome::Skipped(format!("tree exceeded {b} nodes")),
    };
    let naive = match naive_match_input(r, i, flags, budget) {
        Ok(n) => n,
        Err(e) => return Outcome::Skipped(e.to_string()),
    };
    let btree = compute_bool_tree(&l, i, true, flags);
    if btree != tree {
        return Outcome::Disagree("boolean tree differs from the backtracking tree".into());
    }
    let fb = first_branch(&tree, i);
    let vm = vm_run_code(&compile(r), i, flags);
    let pt = pt_run(&btree, i);
    if !(fb == naive && vm == fb && pt == fb) {
        return Outcome::Disagree(format!(
            "tree {} naive {} pikevm {} piketree {}",
            leaf_str(&fb),
            leaf_str(&naive),
            leaf_str(&vm),
            leaf_str(&pt)
        ));
    }
    match corun(r, i, flags) {
        Ok(_) => Outcome::Agree,
        Err(e) => Outcome::Disagree(format!("co-run: {e}")),
    }
}

fn children(r: &Regex) -> Vec<Regex> {
    match r {
        Regex::Epsilon | Regex::Char(_) | Regex::Anchor(_) | Regex::Backref(_) => vec![],
        Regex::Disjunction(a, b) | Regex::Sequence(a, b) => vec![(**a).clone(), (**b).clone()],
        Regex::Group(_, x) | Regex::Quantified(x, _) | Regex::Look(_, x) => vec![(**x).clone()],
    }
}

fn with_child(r: &Regex, k: usize, c: Regex) -> Regex {
    match (r, k) {
        (Regex::Disjunction(_, b), 0) => Regex::disj(c, (**b).clone()),
        (Regex::Disjunction(a, _), _) => Regex::disj((**a).clone(), c),
        (Regex::Sequence(_, b), 0) => Regex::seq(c, (**b).clone()),
        (Regex::Sequence(a, _), _) => Regex::seq((**a).clone(), c),
        (Regex::Group(g, _), _) => Regex::group(*g, c),
        (Regex::Quantified(_, q), _) => Regex::quant(c, *q),
        (Regex::Look(lk, _), _) => Regex::look(*lk, c),
        _ => r.clone(),
    }
}

/// Smaller variants of `r`: replace a subterm by `ε` or by one of its
/// children, or weaken a quantifier.
pub fn shrink_candidates(r: &Regex) -> Vec<Regex> {
    let mut out = Vec::new();
    if *r != Regex::Epsilon {
        out.push(Regex::Epsilon);
    }
    out.extend(children(r));
    if let Regex::Quantified(x, q) = r {
        if q.min > 0 {
            out.push(Regex::quant((**x).clone(), Quantity { min: q.min - 1, ..*q }));
        }
        if let Delta::Finite(d) = q.delta {
            if d > 0 {
                out.push(Regex::quant((**x).clone(), Quantity { delta: Delta::Finite(d - 1), ..*q }));
            }
        }
    }
    for (k, c) in children(r).into_iter().enumerate() {
        for c2 in shrink_candidates(&c) {
            out.push(with_child(r, k, c2));
        }
    }
    out
}

/// Greedy fixed-point shrinking of a failing case. `fails` must hold on
/// the initial case.
pub fn shrink(r: &Regex, s: &str, start: usize, fails: &dyn Fn(&Regex, &str, usize) -> bool) -> (Regex, String, usize) {
    let (mut r, mut s, mut start) = (r.clone(), s.to_string(), start);
    loop {
        let mut progressed = false;
        for c in shrink_candidates(&r) {
            let c = normalize_groups(&c);
            if c.size() < r.size() && fails(&c, &s, start) {
                r = c;
                progressed = true;
                break;
            }
        }
        let chars: Vec<char> = s.chars().collect();
        for k in 0..chars.len() {
            let t: String = chars.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, c)| c).collect();
            let st = if start > k { start - 1 } else { start.min(t.chars().count()) };
            if fails(&r, &t, st) {
                s = t;
                start = st;
                progressed = true;
                break;
            }
        }
        if start > 0 && fails(&r, &s, start - 1) {
            start -= 1;
            progressed = true;
        }
        if !progressed {
            return (r, s, start);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FuzzMode {
    /// Tree semantics against the naive matcher over the whole grammar.
    Full,
    /// All four engines on the star fragment.
    StarFragment,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub seed: u64,
    pub iters: u64,
    pub mode: FuzzMode,
    pub budget: u64,
    pub max_len: usize,
}

impl Default for FuzzConfig {
    fn default() -> FuzzConfig {
        FuzzConfig {
            seed: 0,
            iters: 10_000,
            mode: FuzzMode::Full,
            budget: DEFAULT_STEP_BUDGET,
            max_len: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reproducer {
    pub iteration: u64,
    pub case: Case,
    pub shrunk: Case,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub iters: u64,
    pub mode: FuzzMode,
    pub agreed: u64,
    pub skipped: u64,
    pub failures: Vec<Reproducer>,
}

/// Deterministic generator for iteration `k` of a run seeded with `seed`.
pub fn case_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// The `k`-th generated case of a run.
pub fn gen_case(seed: u64, k: u64, mode: FuzzMode, max_len: usize) -> (Regex, Input, Flags) {
    let mut rng = case_rng(seed, k);
    let (cfg, alphabet, flags) = match mode {
        FuzzMode::Full => (GenConfig::full(), vec!['a', 'b', 'c', 'a', 'b', 'A', ' ', '\n'], gen_flags(&mut rng)),
        FuzzMode::StarFragment => (GenConfig::star_fragment(), vec!['a', 'b', 'c'], Flags::default()),
    };
    let r = gen_regex(&mut rng, &cfg);
    let s = gen_string(&mut rng, &alphabet, max_len);
    let start = rng.gen_range(0..=s.encode_utf16().count());
    (r, Input::new(&s, start).expect("start within the subject"), flags)
}

pub fn check_case(mode: FuzzMode, r: &Regex, i: &Input, flags: Flags, budget: u64) -> Outcome {
    match mode {
        FuzzMode::Full => check_full(r, i, flags, budget),
        FuzzMode::StarFragment => check_star_fragment(r, i, flags, budget),
    }
}

fn case_of(r: &Regex, i: &Input, flags: Flags) -> Case {
    Case {
        pattern: r.to_string(),
        input: String::from_utf16_lossy(i.text()),
        start: i.idx(),
        flags,
    }
}

pub fn run_fuzz(cfg: &FuzzConfig) -> FuzzReport {
    let outcomes: Vec<(u64, Outcome, Case, Option<Case>)> = (0..cfg.iters)
        .into_par_iter()
        .map(|k| {
            let (r, i, flags) = gen_case(cfg.seed, k, cfg.mode, cfg.max_len);
            let out = check_case(cfg.mode, &r, &i, flags, cfg.budget);
            let shrunk = if let Outcome::Disagree(_) = out {
                let fails = |r: &Regex, s: &str, st: usize| {
                    let i = Input::new(s, st).expect("shrinking keeps start in range");
                    matches!(check_case(cfg.mode, r, &i, flags, cfg.budget), Outcome::Disagree(_))
                };
                let (r2, s2, st2) = shrink(&r, &String::from_utf16_lossy(i.text()), i.idx(), &fails);
                Some(case_of(&r2, &Input::new(&s2, st2).expect("in range"), flags))
            } else {
                None
            };
            (k, out, case_of(&r, &i, flags), shrunk)
        })
        .collect();
    let mut report = FuzzReport {
        seed: cfg.seed,
        iters: cfg.iters,
        mode: cfg.mode,
        agreed: 0,
        skipped: 0,
        failures: Vec::new(),
    };
    for (k, out, case, shrunk) in outcomes {
        match out {
            Outcome::Agree => report.agreed += 1,
            Outcome::Skipped(_) => report.skipped += 1,
            Outcome::Disagree(detail) => report.failures.push(Reproducer {
                iteration: k,
                shrunk: shrunk.unwrap_or_else(|| case.clone()),
                case,
                detail,
            }),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::{check_well_formed, in_subset_P, parse};

    #[test]
    fn generated_regexes_are_well_formed_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let r = gen_regex(&mut rng, &GenConfig::full());
            check_well_formed(&r).unwrap();
            assert_eq!(parse(&r.to_string()).unwrap(), r, "{r}");
            let p = gen_regex(&mut rng, &GenConfig::star_fragment());
            assert!(in_subset_P(&p), "{p}");
        }
    }

    #[test]
    fn normalization_renumbers_and_repairs() {
        let r = Regex::seq(Regex::group(3, Regex::char('a')), Regex::Backref(5));
        assert_eq!(normalize_groups(&r).to_string(), "(a)\\1");
        assert_eq!(normalize_groups(&Regex::Backref(2)), Regex::Epsilon);
    }

    #[test]
    fn shrinker_reaches_a_small_case() {
        let r = parse("(?:x|ab*c)(d|e)").unwrap();
        let fails = |r: &Regex, s: &str, _: usize| r.to_string().contains('b') && s.contains('q');
        let (r2, s2, st) = shrink(&r, "zzqzz", 3, &fails);
        assert_eq!(r2.to_string(), "b");
        assert_eq!(s2, "q");
        assert_eq!(st, 0);
        assert!(fails(&r2, &s2, st));
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = FuzzConfig {
            seed: 3,
            iters: 200,
            ..FuzzConfig::default()
        };
        let a = run_fuzz(&cfg);
        assert_eq!(a, run_fuzz(&cfg));
        assert!(a.failures.is_empty(), "{:?}", a.failures);
    }
}
