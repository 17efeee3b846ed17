//! Leaf equivalence, contexts with a hole, the rewrite catalog and the
//! counterexample fixtures for rewrites that do not hold.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fuzz::{gen_regex, GenConfig};
use crate::input::{Direction, GroupMap, GroupRange, Input, Leaf};
use crate::regex::{
    parse, Anchor, Char, CharDescriptor, ClassEscape, Delta, Flags, GroupId, LookKind, Quantity, Regex,
    WellFormedError,
};
use crate::tree::{first_branch, replay_leaves, Actions, TreeBuilder, TreeError};

/// Code unit standing for the hole of a context.
pub const HOLE: Char = 0xE000;
const HOLE_GLYPH: char = '□';

/// Drops every leaf already present earlier in the list.
pub fn dedup_leaves(l: &[Leaf]) -> Vec<Leaf> {
    let mut seen = HashSet::new();
    l.iter().filter(|x| seen.insert((x.end(), x.groups.clone()))).cloned().collect()
}

pub fn leaves_equiv(l1: &[Leaf], l2: &[Leaf]) -> bool {
    let (a, b) = (dedup_leaves(l1), dedup_leaves(l2));
    a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.end() == y.end() && x.groups == y.groups)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HoleDirection {
    Bidirectional,
    Forward,
    Backward,
}

impl fmt::Display for HoleDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HoleDirection::Bidirectional => "bidirectional",
            HoleDirection::Forward => "forward",
            HoleDirection::Backward => "backward",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("a context needs exactly one hole, found {0}")]
    Holes(usize),
    #[error(transparent)]
    Parse(#[from] crate::regex::ParseError),
}

/// A regex with exactly one hole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    regex: Regex,
}

fn is_hole(r: &Regex) -> bool {
    matches!(r, Regex::Char(CharDescriptor::Single(HOLE)))
}

fn count_holes(r: &Regex) -> usize {
    match r {
        _ if is_hole(r) => 1,
        Regex::Epsilon | Regex::Char(_) | Regex::Anchor(_) | Regex::Backref(_) => 0,
        Regex::Disjunction(a, b) | Regex::Sequence(a, b) => count_holes(a) + count_holes(b),
        Regex::Group(_, x) | Regex::Quantified(x, _) | Regex::Look(_, x) => count_holes(x),
    }
}

fn fill(r: &Regex, with: &Regex) -> Regex {
    match r {
        _ if is_hole(r) => with.clone(),
        Regex::Epsilon | Regex::Char(_) | Regex::Anchor(_) | Regex::Backref(_) => r.clone(),
        Regex::Disjunction(a, b) => Regex::disj(fill(a, with), fill(b, with)),
        Regex::Sequence(a, b) => Regex::seq(fill(a, with), fill(b, with)),
        Regex::Group(g, x) => Regex::group(*g, fill(x, with)),
        Regex::Quantified(x, q) => Regex::quant(fill(x, with), *q),
        Regex::Look(lk, x) => Regex::look(*lk, fill(x, with)),
    }
}

impl Context {
    pub fn hole() -> Context {
        Context {
            regex: Regex::Char(CharDescriptor::Single(HOLE)),
        }
    }

    pub fn new(regex: Regex) -> Result<Context, ContextError> {
        match count_holes(&regex) {
            1 => Ok(Context { regex }),
            n => Err(ContextError::Holes(n)),
        }
    }

    /// Parses a pattern in which `□` marks the hole.
    pub fn parse(s: &str) -> Result<Context, ContextError> {
        let marked = s.replace(HOLE_GLYPH, &char::from_u32(HOLE as u32).expect("valid").to_string());
        Context::new(parse(&marked)?)
    }

    pub fn regex(&self) -> &Regex {
        &self.regex
    }

    /// Set by the innermost lookaround around the hole.
    pub fn direction(&self) -> HoleDirection {
        fn go(r: &Regex, here: HoleDirection) -> Option<HoleDirection> {
            match r {
                _ if is_hole(r) => Some(here),
                Regex::Epsilon | Regex::Char(_) | Regex::Anchor(_) | Regex::Backref(_) => None,
                Regex::Disjunction(a, b) | Regex::Sequence(a, b) => go(a, here).or_else(|| go(b, here)),
                Regex::Group(_, x) | Regex::Quantified(x, _) => go(x, here),
                Regex::Look(lk, x) => go(
                    x,
                    if lk.is_ahead() {
                        HoleDirection::Forward
                    } else {
                        HoleDirection::Backward
                    },
                ),
            }
        }
        go(&self.regex, HoleDirection::Bidirectional).expect("a context has a hole")
    }

    /// Replaces the hole by `r`. The context's own groups are shifted past
    /// those of `r` so that the two never collide.
    pub fn plug(&self, r: &Regex) -> Result<Regex, WellFormedError> {
        let offset = r.def_groups().into_iter().chain(r.backrefs()).max().unwrap_or(0);
        let shifted = self.regex.map_groups(&|g| g + offset);
        let out = fill(&shifted, r);
        let mut seen = HashSet::new();
        for g in out.def_groups() {
            if !seen.insert(g) {
                return Err(WellFormedError::DuplicateGroup(g));
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.regex.to_string().replace("\\uE000", &HOLE_GLYPH.to_string()))
    }
}

/// Random context whose hole has the requested direction.
pub fn gen_context<R: Rng>(rng: &mut R, target: HoleDirection, wrappers: usize) -> Context {
    let part = GenConfig::schema_part().with_depth(1);
    let mut r = Regex::Char(CharDescriptor::Single(HOLE));
    let mut in_look = false;
    let mut groups = 0;
    let n = wrappers.max(1);
    for k in 0..n {
        let must_look = !in_look && target != HoleDirection::Bidirectional && k + 1 == n;
        let roll = if must_look { 99 } else { rng.gen_range(0..100) };
        r = match roll {
            0..=19 => Regex::seq(gen_regex(rng, &part), r),
            20..=39 => Regex::seq(r, gen_regex(rng, &part)),
            40..=49 => Regex::disj(gen_regex(rng, &part), r),
            50..=59 => Regex::disj(r, gen_regex(rng, &part)),
            60..=69 if !matches!(r, Regex::Look(..)) => {
                let q = Quantity::new(rng.gen_range(0..=1), [Delta::Finite(1), Delta::Infinite][rng.gen_range(0..2)], rng.gen_bool(0.5));
                Regex::quant(r, q)
            }
            70..=84 => {
                groups += 1;
                let g = Regex::group(groups, r);
                if rng.gen_bool(0.5) {
                    Regex::seq(g, Regex::Backref(groups))
                } else {
                    g
                }
            }
            _ if target != HoleDirection::Bidirectional => {
                let ahead = if in_look { rng.gen_bool(0.5) } else { target == HoleDirection::Forward };
                let positive = rng.gen_bool(0.75);
                let lk = match (ahead, positive) {
                    (true, true) => LookKind::Lookahead,
                    (true, false) => LookKind::NegLookahead,
                    (false, true) => LookKind::Lookbehind,
                    (false, false) => LookKind::NegLookbehind,
                };
                in_look = true;
                let prefix = gen_regex(rng, &part);
                Regex::seq(prefix, Regex::look(lk, r))
            }
            _ => Regex::seq(gen_regex(rng, &part), r),
        };
    }
    let ctx = Context::new(crate::fuzz::normalize_groups(&r)).expect("one hole");
    debug_assert_eq!(ctx.direction(), target);
    ctx
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Counterexample {
    Groups {
        left: Vec<GroupId>,
        right: Vec<GroupId>,
    },
    Leaves {
        input: String,
        start: usize,
        direction: Direction,
        groups: GroupMap,
        left: Vec<Leaf>,
        right: Vec<Leaf>,
    },
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |ls: &[Leaf]| ls.iter().map(Leaf::to_string).collect::<Vec<_>>().join("; ");
        match self {
            Counterexample::Groups { left, right } => write!(f, "defined groups differ: {left:?} vs {right:?}"),
            Counterexample::Leaves {
                input,
                start,
                direction,
                left,
                right,
                ..
            } => write!(
                f,
                "on {input:?} from {start} {}: [{}] vs [{}]",
                direction.arrow(),
                show(left),
                show(right)
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivVerdict {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
    pub inputs_checked: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("a tree exceeded the budget of {0} nodes")]
    BudgetExceeded(u64),
}

#[derive(Clone, Debug)]
pub struct EquivConfig {
    pub alphabet: Vec<char>,
    pub max_len: usize,
    pub flags: Flags,
    /// Node budget per tree.
    pub budget: u64,
    /// Random starting group maps tried per input when a backreference
    /// occurs, on top of the empty one.
    pub gm_samples: usize,
    pub seed: u64,
}

impl Default for EquivConfig {
    fn default() -> EquivConfig {
        EquivConfig {
            alphabet: vec!['a', 'b', 'c'],
            max_len: 5,
            flags: Flags::default(),
            budget: 2_000_000,
            gm_samples: 3,
            seed: 0,
        }
    }
}

/// Every string over `alphabet` of length at most `max_len`, shortest
/// first and lexicographic within a length.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| alphabet.iter().map(move |c| format!("{s}{c}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

struct LeafComputer {
    builder: TreeBuilder,
    budget: u64,
}

impl LeafComputer {
    fn new(flags: Flags, budget: u64) -> LeafComputer {
        LeafComputer {
            builder: TreeBuilder::new(flags).with_budget(budget),
            budget,
        }
    }

    fn leaves(&mut self, r: &Regex, i: &Input, gm: &GroupMap, d: Direction) -> Result<Vec<Leaf>, EquivError> {
        let l = Actions::of_regex(r);
        match self.builder.build_total(&l, i, gm, d) {
            Ok(t) => Ok(replay_leaves(&t, i, gm, d, None)),
            Err(TreeError::BudgetExceeded(_)) => Err(EquivError::BudgetExceeded(self.budget)),
            Err(TreeError::OutOfFuel) => unreachable!("fuel bound is sufficient"),
        }
    }

    fn reset_if_large(&mut self, flags: Flags) {
        if self.builder.interner().len() > 200_000 {
            self.builder = TreeBuilder::new(flags).with_budget(self.budget);
        }
    }
}

fn sample_gm<R: Rng>(rng: &mut R, groups: &[GroupId], len: usize) -> GroupMap {
    let mut gm = GroupMap::new();
    for &g in groups {
        if rng.gen_bool(0.7) {
            let a = rng.gen_range(0..=len);
            let b = rng.gen_range(0..=len);
            gm.set(
                g,
                GroupRange::Closed {
                    start: a.min(b),
                    end: a.max(b),
                },
            );
        }
    }
    gm
}

/// Leaf equivalence of `r1` and `r2` in direction `d` on every string of
/// `strings`, from every start position.
pub fn check_leaf_equiv_on(
    r1: &Regex,
    r2: &Regex,
    d: Direction,
    strings: &[String],
    cfg: &EquivConfig,
) -> Result<EquivVerdict, EquivError> {
    let (g1, g2) = (r1.def_groups(), r2.def_groups());
    if g1 != g2 {
        return Ok(EquivVerdict {
            holds: false,
            counterexample: Some(Counterexample::Groups { left: g1, right: g2 }),
            inputs_checked: 0,
        });
    }
    let mut refs: Vec<GroupId> = r1.backrefs().into_iter().chain(r2.backrefs()).collect();
    refs.sort_unstable();
    refs.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut lc = LeafComputer::new(cfg.flags, cfg.budget);
    let mut checked = 0;
    for s in strings {
        let base = Input::new(s, 0).expect("start 0 is valid");
        for start in 0..=base.len() {
            let i = base.at(start);
            let mut gms = vec![GroupMap::new()];
            if !refs.is_empty() {
                gms.extend((0..cfg.gm_samples).map(|_| sample_gm(&mut rng, &refs, base.len())));
            }
            for gm in gms {
                checked += 1;
                let left = lc.leaves(r1, &i, &gm, d)?;
                let right = lc.leaves(r2, &i, &gm, d)?;
                if !leaves_equiv(&left, &right) {
                    return Ok(EquivVerdict {
                        holds: false,
                        counterexample: Some(Counterexample::Leaves {
                            input: s.clone(),
                            start,
                            direction: d,
                            groups: gm,
                            left,
                            right,
                        }),
                        inputs_checked: checked,
                    });
                }
            }
        }
        lc.reset_if_large(cfg.flags);
    }
    Ok(EquivVerdict {
        holds: true,
        counterexample: None,
        inputs_checked: checked,
    })
}

/// Bounded check of leaf equivalence over all strings up to
/// `cfg.max_len`. The reported counterexample is the first in shortlex
/// order.
pub fn check_leaf_equiv(r1: &Regex, r2: &Regex, d: Direction, cfg: &EquivConfig) -> Result<EquivVerdict, EquivError> {
    check_leaf_equiv_on(r1, r2, d, &all_strings(&cfg.alphabet, cfg.max_len), cfg)
}

/// First match found by trying each start position in turn, as a
/// non-global JavaScript `match` does.
pub fn search(r: &Regex, s: &str, flags: Flags) -> Option<(usize, Leaf)> {
    let base = Input::new(s, 0).expect("start 0 is valid");
    (0..=base.len()).find_map(|k| {
        let i = base.at(k);
        let t = crate::tree::regex_tree(r, &i, flags);
        first_branch(&t, &i).map(|l| (k, l))
    })
}

/// Whether `r1` and `r2` give the same first match from every start of
/// every string in `strings`; returns the first differing input.
pub fn observational_difference(r1: &Regex, r2: &Regex, strings: &[String], flags: Flags) -> Option<(String, usize)> {
    for s in strings {
        let base = Input::new(s, 0).expect("start 0 is valid");
        for k in 0..=base.len() {
            let i = base.at(k);
            let a = first_branch(&crate::tree::regex_tree(r1, &i, flags), &i);
            let b = first_branch(&crate::tree::regex_tree(r2, &i, flags), &i);
            if a != b {
                return Some((s.clone(), k));
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QKind {
    /// `r{min}`: only forced iterations.
    Forced,
    /// `r{0,Δ}`.
    Greedy,
    /// `r{0,Δ}?`.
    Lazy,
}

impl QKind {
    fn symbol(self) -> &'static str {
        match self {
            QKind::Forced => "{min}",
            QKind::Greedy => "{0,Δ}",
            QKind::Lazy => "{0,Δ}?",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Schema {
    DisjAssoc,
    SeqAssoc,
    /// `r1(?:r2|r3)` and `(?:r1r2)|(?:r1r3)`.
    DistrLeft,
    /// `(?:r2|r3)r1` and `(?:r2r1)|(?:r3r1)`.
    DistrRight,
    InputStart,
    InputEnd,
    WordBoundary,
    NotWordBoundary,
    /// `r{min}` and `r{min}?`.
    GreedinessFlip,
    Merge(QKind, QKind),
}

/// A rewrite `lhs ≃ rhs` with the directions in which it holds and those
/// in which it is known to fail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub schema: Schema,
    pub valid: Vec<Direction>,
    pub invalid: Vec<Direction>,
}

const BOTH: [Direction; 2] = [Direction::Forward, Direction::Backward];

fn dirs(fwd: Option<bool>, bwd: Option<bool>) -> (Vec<Direction>, Vec<Direction>) {
    let mut valid = Vec::new();
    let mut invalid = Vec::new();
    for (flag, d) in [(fwd, Direction::Forward), (bwd, Direction::Backward)] {
        match flag {
            Some(true) => valid.push(d),
            Some(false) => invalid.push(d),
            None => {}
        }
    }
    (valid, invalid)
}

fn word() -> Regex {
    Regex::Char(CharDescriptor::Escape(ClassEscape::Word))
}

fn shift(r: &Regex, by: GroupId) -> Regex {
    r.map_groups(&|g| g + by)
}

/// Builds `r{q1} r{q2}` and its merged form.
pub fn merge_sides(r: &Regex, q1: Quantity, q2: Quantity) -> (Regex, Regex) {
    let greedy = if q2.delta.is_zero() { q1.greedy } else { q2.greedy };
    let merged = Quantity::new(q1.min + q2.min, q1.delta.add(q2.delta), greedy);
    (
        Regex::seq(Regex::quant(r.clone(), q1), Regex::quant(r.clone(), q2)),
        Regex::quant(r.clone(), merged),
    )
}

pub fn distr_sides(schema: Schema, r1: &Regex, r2: &Regex, r3: &Regex) -> (Regex, Regex) {
    let alt = Regex::disj(r2.clone(), r3.clone());
    match schema {
        Schema::DistrLeft => (
            Regex::seq(r1.clone(), alt),
            Regex::disj(Regex::seq(r1.clone(), r2.clone()), Regex::seq(r1.clone(), r3.clone())),
        ),
        Schema::DistrRight => (
            Regex::seq(alt, r1.clone()),
            Regex::disj(Regex::seq(r2.clone(), r1.clone()), Regex::seq(r3.clone(), r1.clone())),
        ),
        other => panic!("{other:?} is not a distributivity schema"),
    }
}

impl Schema {
    pub fn is_parametric(self) -> bool {
        !matches!(
            self,
            Schema::InputStart | Schema::InputEnd | Schema::WordBoundary | Schema::NotWordBoundary
        )
    }

    fn quantity<R: Rng>(rng: &mut R, kind: QKind, forced_greedy: bool) -> Quantity {
        let delta = [Delta::Finite(1), Delta::Finite(2), Delta::Infinite][rng.gen_range(0..3)];
        match kind {
            QKind::Forced => Quantity::new(rng.gen_range(0..=2), Delta::Finite(0), forced_greedy),
            QKind::Greedy => Quantity::new(0, delta, true),
            QKind::Lazy => Quantity::new(0, delta, false),
        }
    }

    /// A random instance of both sides. Parts that may carry groups get
    /// disjoint, left-to-right numbering.
    pub fn instantiate<R: Rng>(self, rng: &mut R) -> (Regex, Regex) {
        let plain = GenConfig::schema_part();
        let grouped = GenConfig::schema_part().with_groups(true);
        let grouped_parts = |rng: &mut R, n: usize| -> Vec<Regex> {
            let mut out = Vec::new();
            let mut offset = 0;
            for _ in 0..n {
                let r = gen_regex(rng, &grouped);
                let k = r.def_groups().len() as GroupId;
                out.push(shift(&r, offset));
                offset += k;
            }
            out
        };
        match self {
            Schema::DisjAssoc => {
                let p = grouped_parts(rng, 3);
                (
                    Regex::disj(p[0].clone(), Regex::disj(p[1].clone(), p[2].clone())),
                    Regex::disj(Regex::disj(p[0].clone(), p[1].clone()), p[2].clone()),
                )
            }
            Schema::SeqAssoc => {
                let p = grouped_parts(rng, 3);
                (
                    Regex::seq(p[0].clone(), Regex::seq(p[1].clone(), p[2].clone())),
                    Regex::seq(Regex::seq(p[0].clone(), p[1].clone()), p[2].clone()),
                )
            }
            Schema::DistrLeft | Schema::DistrRight => {
                let r1 = gen_regex(rng, &plain);
                let p = grouped_parts(rng, 2);
                distr_sides(self, &r1, &p[0], &p[1])
            }
            Schema::InputStart => (
                Regex::Anchor(Anchor::InputStart),
                Regex::look(LookKind::NegLookbehind, Regex::Char(CharDescriptor::all())),
            ),
            Schema::InputEnd => (
                Regex::Anchor(Anchor::InputEnd),
                Regex::look(LookKind::NegLookahead, Regex::Char(CharDescriptor::all())),
            ),
            Schema::WordBoundary => (
                Regex::Anchor(Anchor::WordBoundary),
                Regex::disj(
                    Regex::seq(Regex::look(LookKind::NegLookbehind, word()), Regex::look(LookKind::Lookahead, word())),
                    Regex::seq(Regex::look(LookKind::Lookbehind, word()), Regex::look(LookKind::NegLookahead, word())),
                ),
            ),
            Schema::NotWordBoundary => (
                Regex::Anchor(Anchor::NotWordBoundary),
                Regex::seq(
                    Regex::disj(Regex::look(LookKind::Lookbehind, word()), Regex::look(LookKind::NegLookahead, word())),
                    Regex::disj(Regex::look(LookKind::NegLookbehind, word()), Regex::look(LookKind::Lookahead, word())),
                ),
            ),
            Schema::GreedinessFlip => {
                let r = gen_regex(rng, &grouped);
                let min = rng.gen_range(0..=3);
                (
                    Regex::quant(r.clone(), Quantity::new(min, Delta::Finite(0), true)),
                    Regex::quant(r, Quantity::new(min, Delta::Finite(0), false)),
                )
            }
            Schema::Merge(k1, k2) => {
                let r = gen_regex(rng, &plain);
                let p = rng.gen_bool(0.5);
                let q1 = Schema::quantity(rng, k1, p);
                let q2 = Schema::quantity(rng, k2, p);
                merge_sides(&r, q1, q2)
            }
        }
    }

    fn describe(self) -> String {
        match self {
            Schema::DisjAssoc => "r1|(?:r2|r3) ~ (?:r1|r2)|r3".into(),
            Schema::SeqAssoc => "r1(?:r2r3) ~ (?:r1r2)r3".into(),
            Schema::DistrLeft => "r1(?:r2|r3) ~ (?:r1r2)|(?:r1r3)".into(),
            Schema::DistrRight => "(?:r2|r3)r1 ~ (?:r2r1)|(?:r3r1)".into(),
            Schema::InputStart => "^ ~ (?<![^])".into(),
            Schema::InputEnd => "$ ~ (?![^])".into(),
            Schema::WordBoundary => "\\b ~ (?<!\\w)(?=\\w)|(?<=\\w)(?!\\w)".into(),
            Schema::NotWordBoundary => "\\B ~ (?:(?<=\\w)|(?!\\w))(?:(?<!\\w)|(?=\\w))".into(),
            Schema::GreedinessFlip => "r{min} ~ r{min}?".into(),
            Schema::Merge(a, b) => format!("r{}r{} ~ merged", a.symbol(), b.symbol()),
        }
    }
}

/// The rewrites: associativity, distributivity, anchors as lookarounds,
/// the greediness flip and the nine cells of the quantifier-merging table
/// (two of which are not applicable and carry no directions).
pub fn rewrite_catalog() -> Vec<Rule> {
    let rule = |schema: Schema, fwd: Option<bool>, bwd: Option<bool>| {
        let (valid, invalid) = dirs(fwd, bwd);
        Rule {
            name: schema.describe(),
            schema,
            valid,
            invalid,
        }
    };
    use QKind::*;
    let (y, n) = (Some(true), Some(false));
    vec![
        rule(Schema::DisjAssoc, y, y),
        rule(Schema::SeqAssoc, y, y),
        rule(Schema::DistrLeft, n, y),
        rule(Schema::DistrRight, y, n),
        rule(Schema::InputStart, y, y),
        rule(Schema::InputEnd, y, y),
        rule(Schema::WordBoundary, y, y),
        rule(Schema::NotWordBoundary, y, y),
        rule(Schema::GreedinessFlip, y, y),
        rule(Schema::Merge(Forced, Forced), y, y),
        rule(Schema::Merge(Forced, Greedy), y, n),
        rule(Schema::Merge(Forced, Lazy), y, n),
        rule(Schema::Merge(Greedy, Forced), n, y),
        rule(Schema::Merge(Greedy, Greedy), y, y),
        rule(Schema::Merge(Greedy, Lazy), None, None),
        rule(Schema::Merge(Lazy, Forced), n, y),
        rule(Schema::Merge(Lazy, Greedy), None, None),
        rule(Schema::Merge(Lazy, Lazy), n, n),
    ]
}

/// Outcome of checking one rule in one direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleCheck {
    pub rule: String,
    pub direction: Direction,
    pub instantiations: usize,
    /// Instances dropped and redrawn because a tree went over budget.
    pub over_budget: usize,
    pub inputs_checked: u64,
    /// The first instance found not to be leaf equivalent.
    pub failure: Option<(Regex, Regex, Counterexample)>,
}

/// Checks `rule` in direction `d` on `instantiations` random instances
/// (one for rules without parameters). Instances whose trees exceed the
/// budget are redrawn, up to three times the requested count.
pub fn check_rule(rule: &Rule, d: Direction, instantiations: usize, cfg: &EquivConfig) -> Result<RuleCheck, EquivError> {
    let n = if rule.schema.is_parametric() { instantiations } else { 1 };
    let mut alphabet = cfg.alphabet.clone();
    if !rule.schema.is_parametric() && !alphabet.contains(&' ') {
        alphabet.push(' ');
    }
    let strings = all_strings(&alphabet, cfg.max_len);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = RuleCheck {
        rule: rule.name.clone(),
        direction: d,
        instantiations: 0,
        over_budget: 0,
        inputs_checked: 0,
        failure: None,
    };
    while out.instantiations < n {
        let (lhs, rhs) = rule.schema.instantiate(&mut rng);
        let v = match check_leaf_equiv_on(&lhs, &rhs, d, &strings, cfg) {
            Ok(v) => v,
            Err(e) => {
                out.over_budget += 1;
                if out.over_budget > 3 * n {
                    return Err(e);
                }
                continue;
            }
        };
        out.instantiations += 1;
        out.inputs_checked += v.inputs_checked;
        if let Some(c) = v.counterexample {
            out.failure = Some((lhs, rhs, c));
            break;
        }
    }
    Ok(out)
}

/// A rewrite instance shown not to hold in one direction, with a context
/// in which the two sides give different matches.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub id: &'static str,
    pub schema: Schema,
    /// Direction in which the rewrite fails.
    pub direction: Direction,
    pub lhs: Regex,
    pub rhs: Regex,
    pub context: &'static str,
    pub witness: &'static str,
    /// The two plugged regexes as ready-to-run JavaScript.
    pub js: [&'static str; 2],
}

fn p(s: &str) -> Regex {
    parse(s).expect("fixture pattern parses")
}

pub fn counterexample_fixtures() -> Vec<Fixture> {
    let q = |min, delta, greedy| Quantity::new(min, Delta::Finite(delta), greedy);
    let merge = |r: &str, q1, q2| merge_sides(&p(r), q1, q2);
    let d1 = distr_sides(Schema::DistrLeft, &p("(?:a|(?:ab))"), &p("c"), &p("b"));
    let d2 = distr_sides(Schema::DistrRight, &p("(?:c|(?:bc))"), &p("a"), &p("b"));
    let q1 = merge("(?:a|(?:ab))", q(0, 1, true), q(1, 0, true));
    let q2 = merge("(?:(?:ab)|(?:aba))", q(0, 1, false), q(1, 0, false));
    let q3 = merge("(?:a|(?:ba))", q(1, 0, true), q(0, 1, true));
    let q4 = merge("(?:(?:ba)|(?:aba))", q(1, 0, true), q(0, 1, false));
    let q5 = merge("(?:(?:ab)|(?:aba))", q(0, 1, false), q(0, 1, false));
    let q6 = merge("(?:(?:ba)|(?:aba))", q(0, 1, false), q(0, 1, false));
    use QKind::*;
    vec![
        Fixture {
            id: "distributivity-forward",
            schema: Schema::DistrLeft,
            direction: Direction::Forward,
            lhs: d1.0,
            rhs: d1.1,
            context: "□",
            witness: "abc",
            js: [
                r#""abc".match(/(?:a|(?:ab))(?:c|b)/);"#,
                r#""abc".match(/(?:(?:a|(?:ab))c)(?:(?:a|(?:ab))b)/);"#,
            ],
        },
        Fixture {
            id: "distributivity-backward",
            schema: Schema::DistrRight,
            direction: Direction::Backward,
            lhs: d2.0,
            rhs: d2.1,
            context: "abc(?<=(□))\\1",
            witness: "abcabc",
            js: [
                r#""abcabc".match(/abc(?<=((?:a|b)(?:c|(?:bc))))\1/);"#,
                r#""abcabc".match(/abc(?<=((?:a(?:c|(?:bc))|(?:b(?:c|(?:bc))))))\1/);"#,
            ],
        },
        Fixture {
            id: "merge-greedy-forced-forward",
            schema: Schema::Merge(Greedy, Forced),
            direction: Direction::Forward,
            lhs: q1.0,
            rhs: q1.1,
            context: "□",
            witness: "aba",
            js: [
                r#""aba".match(/(?:a|(?:ab)){0,1}(?:a|(?:ab)){1}/);"#,
                r#""aba".match(/(?:a|(?:ab)){1,2}/);"#,
            ],
        },
        Fixture {
            id: "merge-lazy-forced-forward",
            schema: Schema::Merge(Lazy, Forced),
            direction: Direction::Forward,
            lhs: q2.0,
            rhs: q2.1,
            context: "□(?:(?:bcd)|c)",
            witness: "ababcd",
            js: [
                r#""ababcd".match(/(?:(?:ab)|(?:aba)){0,1}?(?:(?:ab)|(?:aba)){1}?(?:(?:bcd)|c)/);"#,
                r#""ababcd".match(/(?:(?:ab)|(?:aba)){1,2}?(?:(?:bcd)|c)/);"#,
            ],
        },
        Fixture {
            id: "merge-forced-greedy-backward",
            schema: Schema::Merge(Forced, Greedy),
            direction: Direction::Backward,
            lhs: q3.0,
            rhs: q3.1,
            context: "caba(?<=(?:(?:cab)|c)(□))\\1",
            witness: "cabaa",
            js: [
                r#""cabaa".match(/caba(?<=(?:(?:cab)|c)((?:a|(?:ba)){1}(?:a|(?:ba)){0,1}))\1/);"#,
                r#""cabaa".match(/caba(?<=(?:(?:cab)|c)((?:a|(?:ba)){1,2}))\1/);"#,
            ],
        },
        Fixture {
            id: "merge-forced-lazy-backward",
            schema: Schema::Merge(Forced, Lazy),
            direction: Direction::Backward,
            lhs: q4.0,
            rhs: q4.1,
            context: "cbaba(?<=(?:c|(?:cb))(□))\\1",
            witness: "cbabababa",
            js: [
                r#""cbabababa".match(/cbaba(?<=(?:c|(?:cb))((?:(?:ba)|(?:aba)){1}(?:(?:ba)|(?:aba)){0,1}?))\1/);"#,
                r#""cbabababa".match(/cbaba(?<=(?:c|(?:cb))((?:(?:ba)|(?:aba)){1,2}?))\1/);"#,
            ],
        },
        Fixture {
            id: "merge-lazy-lazy-forward",
            schema: Schema::Merge(Lazy, Lazy),
            direction: Direction::Forward,
            lhs: q5.0,
            rhs: q5.1,
            context: "□(?:b|c)",
            witness: "ababc",
            js: [
                r#""ababc".match(/(?:(?:ab)|(?:aba)){0,1}?(?:(?:ab)|(?:aba)){0,1}?(?:b|c)/);"#,
                r#""ababc".match(/(?:(?:ab)|(?:aba)){0,2}?(?:b|c)/);"#,
            ],
        },
        Fixture {
            id: "merge-lazy-lazy-backward",
            schema: Schema::Merge(Lazy, Lazy),
            direction: Direction::Backward,
            lhs: q6.0,
            rhs: q6.1,
            context: "cbaba(?<=(?:c|(?:cb))(□))\\1",
            witness: "cbabababa",
            js: [
                r#""cbabababa".match(/cbaba(?<=(?:c|(?:cb))((?:(?:ba)|(?:aba)){0,1}?(?:(?:ba)|(?:aba)){0,1}?))\1/);"#,
                r#""cbabababa".match(/cbaba(?<=(?:c|(?:cb))((?:(?:ba)|(?:aba)){1,2}?))\1/);"#,
            ],
        },
    ]
}

/// The regex literal inside a `"s".match(/…/);` snippet.
pub fn js_pattern(js: &str) -> &str {
    let start = js.find("(/").map_or(0, |k| k + 2);
    let end = js.rfind("/)").unwrap_or(js.len());
    &js[start..end]
}

pub type Found = Option<(usize, Leaf)>;

#[derive(Clone, Debug)]
pub struct FixtureResult {
    pub id: &'static str,
    pub direction: Direction,
    pub plugged: [Regex; 2],
    pub results: [Found; 2],
    pub differ: bool,
    /// Whether leaf equivalence fails on the witness in the fixture's
    /// direction.
    pub leaves_differ: bool,
    /// Leaf equivalence on the witness in the opposite direction, for
    /// rules valid there.
    pub opposite_holds: Option<bool>,
    /// Whether the JavaScript snippets give the same results as the
    /// plugged regexes.
    pub js_agrees: [bool; 2],
}

pub fn run_fixture(f: &Fixture) -> Result<FixtureResult, String> {
    let ctx = Context::parse(f.context).map_err(|e| e.to_string())?;
    let plugged = [
        ctx.plug(&f.lhs).map_err(|e| e.to_string())?,
        ctx.plug(&f.rhs).map_err(|e| e.to_string())?,
    ];
    let flags = Flags::default();
    let results = [search(&plugged[0], f.witness, flags), search(&plugged[1], f.witness, flags)];
    let cfg = EquivConfig::default();
    let witness = [f.witness.to_string()];
    let leaves_differ = !check_leaf_equiv_on(&f.lhs, &f.rhs, f.direction, &witness, &cfg)
        .map_err(|e| e.to_string())?
        .holds;
    let other = match f.direction {
        Direction::Forward => Direction::Backward,
        Direction::Backward => Direction::Forward,
    };
    let rule = rewrite_catalog().into_iter().find(|r| r.schema == f.schema);
    let opposite_holds = match rule {
        Some(r) if r.valid.contains(&other) => Some(
            check_leaf_equiv_on(&f.lhs, &f.rhs, other, &witness, &cfg)
                .map_err(|e| e.to_string())?
                .holds,
        ),
        _ => None,
    };
    let mut js_agrees = [false; 2];
    for k in 0..2 {
        let r = parse(js_pattern(f.js[k])).map_err(|e| e.to_string())?;
        js_agrees[k] = search(&r, f.witness, flags) == results[k];
    }
    Ok(FixtureResult {
        id: f.id,
        direction: f.direction,
        differ: results[0] != results[1],
        plugged,
        results,
        leaves_differ,
        opposite_holds,
        js_agrees,
    })
}

pub fn run_counterexample_suite() -> Result<Vec<FixtureResult>, String> {
    counterexample_fixtures().iter().map(run_fixture).collect()
}

pub fn directions_of(valid: &[Direction]) -> String {
    if valid.is_empty() {
        "none".into()
    } else if valid == BOTH {
        "↔".into()
    } else {
        valid.iter().map(|d| d.arrow()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(s: &str, end: usize, gm: GroupMap) -> Leaf {
        Leaf {
            input: Input::new(s, end).unwrap(),
            groups: gm,
        }
    }

    #[test]
    fn dedup_keeps_first_occurrences() {
        let mut g = GroupMap::new();
        g.set(1, GroupRange::Closed { start: 0, end: 1 });
        let a = leaf("ab", 1, g.clone());
        let b = leaf("ab", 2, GroupMap::new());
        assert!(leaves_equiv(&[a.clone(), b.clone(), a.clone()], &[a.clone(), b.clone()]));
        assert!(!leaves_equiv(&[b.clone(), a.clone()], &[a.clone(), b]));
        assert!(!leaves_equiv(&[], &[a]));
    }

    #[test]
    fn shortlex_strings() {
        assert_eq!(all_strings(&['a', 'b'], 2), vec!["", "a", "b", "aa", "ab", "ba", "bb"]);
    }

    #[test]
    fn basic_verdicts() {
        let cfg = EquivConfig::default();
        let eq = |a: &str, b: &str, d| check_leaf_equiv(&p(a), &p(b), d, &cfg).unwrap();
        assert!(eq("c|c", "c", Direction::Forward).holds);
        assert!(eq("a(b)", "a(b)", Direction::Backward).holds);
        let v = eq("|a", "|b", Direction::Forward);
        assert!(!v.holds);
        match v.counterexample.unwrap() {
            Counterexample::Leaves { input, start, .. } => assert_eq!((input.as_str(), start), ("a", 0)),
            other => panic!("{other}"),
        }
        let v = eq("(?:a|ab)(?:c|b)", "(?:(?:a|ab)c)|(?:(?:a|ab)b)", Direction::Forward);
        match v.counterexample.unwrap() {
            Counterexample::Leaves { input, left, right, .. } => {
                assert_eq!(input, "abc");
                assert_eq!((left[0].end(), right[0].end()), (2, 3));
            }
            other => panic!("{other}"),
        }
        assert!(matches!(
            eq("(a)", "a", Direction::Forward).counterexample,
            Some(Counterexample::Groups { .. })
        ));
    }

    #[test]
    fn contexts() {
        let c = Context::parse("c□c").unwrap();
        assert_eq!(c.plug(&p("|a")).unwrap().to_string(), "c(?:|a)c");
        assert_eq!(c.direction(), HoleDirection::Bidirectional);
        assert_eq!(Context::hole().plug(&p("a(b)")).unwrap(), p("a(b)"));
        let b = Context::parse("abc(?<=(□))\\1").unwrap();
        assert_eq!(b.direction(), HoleDirection::Backward);
        assert_eq!(b.to_string(), "abc(?<=(□))\\1");
        assert_eq!(b.plug(&p("(x)")).unwrap().to_string(), "abc(?<=((x)))\\2");
        assert_eq!(Context::parse("(?<=(?=□))").unwrap().direction(), HoleDirection::Forward);
        assert_eq!(Context::parse("ab").unwrap_err(), ContextError::Holes(0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for target in [HoleDirection::Bidirectional, HoleDirection::Forward, HoleDirection::Backward] {
            for _ in 0..50 {
                let ctx = gen_context(&mut rng, target, 3);
                assert_eq!(ctx.direction(), target, "{ctx}");
                parse(&ctx.plug(&p("a")).unwrap().to_string()).unwrap();
            }
        }
    }

    #[test]
    fn catalog_shape() {
        let cat = rewrite_catalog();
        let find = |s: Schema| cat.iter().find(|r| r.schema == s).unwrap();
        let fg = find(Schema::Merge(QKind::Forced, QKind::Greedy));
        assert_eq!((fg.valid.as_slice(), fg.invalid.as_slice()), (&[Direction::Forward][..], &[Direction::Backward][..]));
        let ll = find(Schema::Merge(QKind::Lazy, QKind::Lazy));
        assert!(ll.valid.is_empty() && ll.invalid.len() == 2);
        let (lhs, rhs) = find(Schema::InputStart).schema.instantiate(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!((lhs.to_string(), rhs.to_string()), ("^".to_string(), "(?<![^])".to_string()));
    }

    #[test]
    fn merge_addition_saturates_at_infinity() {
        let (_, rhs) = merge_sides(&p("a"), Quantity::new(1, Delta::Finite(0), true), Quantity::star());
        assert_eq!(rhs.to_string(), "a+");
    }

    fn flat(r: &Regex) -> Regex {
        fn parts(r: &Regex, out: &mut Vec<Regex>) {
            match r {
                Regex::Sequence(a, b) => {
                    parts(a, out);
                    parts(b, out);
                }
                other => out.push(flat(other)),
            }
        }
        match r {
            Regex::Sequence(..) => {
                let mut v = Vec::new();
                parts(r, &mut v);
                Regex::seq_all(v)
            }
            Regex::Disjunction(a, b) => Regex::disj(flat(a), flat(b)),
            Regex::Group(g, x) => Regex::group(*g, flat(x)),
            Regex::Quantified(x, q) => Regex::quant(flat(x), *q),
            Regex::Look(k, x) => Regex::look(*k, flat(x)),
            other => other.clone(),
        }
    }

    #[test]
    fn fixtures_match_their_javascript() {
        for f in counterexample_fixtures() {
            let ctx = Context::parse(f.context).unwrap();
            let lhs = ctx.plug(&f.lhs).unwrap();
            assert_eq!(flat(&parse(js_pattern(f.js[0])).unwrap()), flat(&lhs), "{}", f.id);
        }
    }
}
