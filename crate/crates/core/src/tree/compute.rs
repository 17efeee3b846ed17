use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::extract::lk_result;
use super::{BacktrackTree, Interner, Node};
use crate::input::{check_anchor, inp_gt, read_backref, Direction, GroupMap, Input};
use crate::regex::{Flags, GroupId, Quantity, Regex};

/// An entry of the action stack.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    /// Match a regex.
    Reg(Regex),
    /// Close a group at the current position.
    Close(GroupId),
    /// Require progress relative to the recorded input.
    Check(Input),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Reg(r) => write!(f, "/{r}/"),
            Action::Close(g) => write!(f, "close {g}"),
            Action::Check(i) => write!(f, "check@{}", i.idx()),
        }
    }
}

struct Cell {
    head: Action,
    tail: Actions,
}

/// Persistent stack of actions; pushing shares the tail.
#[derive(Clone, Default)]
pub struct Actions(Option<Arc<Cell>>);

impl Actions {
    pub fn new() -> Actions {
        Actions(None)
    }

    pub fn single(a: Action) -> Actions {
        Actions::new().push(a)
    }

    pub fn of_regex(r: &Regex) -> Actions {
        Actions::single(Action::Reg(r.clone()))
    }

    /// `a :: self`
    pub fn push(&self, a: Action) -> Actions {
        Actions(Some(Arc::new(Cell {
            head: a,
            tail: self.clone(),
        })))
    }

    pub fn uncons(&self) -> Option<(&Action, &Actions)> {
        self.0.as_ref().map(|c| (&c.head, &c.tail))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Action> {
        let mut cur = self;
        std::iter::from_fn(move || {
            let (h, t) = cur.uncons()?;
            cur = t;
            Some(h)
        })
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn to_vec(&self) -> Vec<Action> {
        self.iter().cloned().collect()
    }
}

impl FromIterator<Action> for Actions {
    fn from_iter<T: IntoIterator<Item = Action>>(iter: T) -> Actions {
        let items: Vec<Action> = iter.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(Actions::new(), |acc, a| acc.push(a))
    }
}

impl PartialEq for Actions {
    fn eq(&self, other: &Actions) -> bool {
        let (mut a, mut b) = (self, other);
        loop {
            match (&a.0, &b.0) {
                (None, None) => return true,
                (Some(x), Some(y)) => {
                    if Arc::ptr_eq(x, y) {
                        return true;
                    }
                    if x.head != y.head {
                        return false;
                    }
                    a = &x.tail;
                    b = &y.tail;
                }
                _ => return false,
            }
        }
    }
}

impl Eq for Actions {}

impl fmt::Debug for Actions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl fmt::Display for Actions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, a) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(" :: ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("out of fuel")]
    OutOfFuel,
    #[error("tree construction exceeded its budget of {0} calls")]
    BudgetExceeded(u64),
}

/// Upper bound on the number of nested calls needed to build the tree of
/// `l` at `i` in direction `d`.
pub fn fuel(l: &Actions, i: &Input, d: Direction) -> u64 {
    match l.uncons() {
        None => 1,
        Some((Action::Reg(r), tail)) => fuel_regex(r, i, d).saturating_add(fuel(tail, i, d)),
        Some((Action::Close(_), tail)) => 1u64.saturating_add(fuel(tail, i, d)),
        Some((Action::Check(ic), tail)) => match ic.step(d) {
            None => 0,
            Some(next) => 1u64.saturating_add(fuel(tail, &next, d)),
        },
    }
}

pub fn fuel_regex(r: &Regex, i: &Input, d: Direction) -> u64 {
    match r {
        Regex::Epsilon | Regex::Char(_) | Regex::Anchor(_) | Regex::Backref(_) => 1,
        Regex::Disjunction(a, b) | Regex::Sequence(a, b) => {
            1u64.saturating_add(fuel_regex(a, i, d)).saturating_add(fuel_regex(b, i, d))
        }
        Regex::Group(_, inner) => 2u64.saturating_add(fuel_regex(inner, i, d)),
        Regex::Look(lk, inner) => {
            let worst = if lk.is_ahead() { i.at(0) } else { i.at(i.len()) };
            2u64.saturating_add(fuel_regex(inner, &worst, Direction::of_look(*lk)))
        }
        Regex::Quantified(inner, q) => {
            let iterations = 1u64
                .saturating_add(q.min as u64)
                .saturating_add(i.remaining(d) as u64);
            2u64.saturating_add(fuel_regex(inner, i, d)).saturating_mul(iterations)
        }
    }
}

/// Tree construction with flags, interning and optional call budget.
pub struct TreeBuilder {
    flags: Flags,
    interner: Interner,
    calls: u64,
    max_depth: u64,
    budget: Option<u64>,
}

impl TreeBuilder {
    pub fn new(flags: Flags) -> TreeBuilder {
        TreeBuilder {
            flags,
            interner: Interner::new(),
            calls: 0,
            max_depth: 0,
            budget: None,
        }
    }

    /// Fails with `BudgetExceeded` once more than `calls` nodes are computed.
    pub fn with_budget(mut self, calls: u64) -> TreeBuilder {
        self.budget = Some(calls);
        self
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    /// Deepest nesting of recursive calls seen so far (the root is depth 1).
    pub fn max_depth(&self) -> u64 {
        self.max_depth
    }

    pub fn interner(&mut self) -> &mut Interner {
        &mut self.interner
    }

    /// Builds the tree with at most `n` nested calls.
    pub fn build(
        &mut self,
        l: &Actions,
        i: &Input,
        gm: &GroupMap,
        d: Direction,
        n: u64,
    ) -> Result<BacktrackTree, TreeError> {
        self.tree(l, i, gm, d, n, 1)
    }

    /// Builds the tree with the fuel bound plus one.
    pub fn build_total(
        &mut self,
        l: &Actions,
        i: &Input,
        gm: &GroupMap,
        d: Direction,
    ) -> Result<BacktrackTree, TreeError> {
        let n = fuel(l, i, d).saturating_add(1);
        self.build(l, i, gm, d, n)
    }

    fn mk(&mut self, node: Node) -> BacktrackTree {
        self.interner.make(node)
    }

    #[allow(clippy::too_many_arguments)]
    fn tree(
        &mut self,
        l: &Actions,
        i: &Input,
        gm: &GroupMap,
        d: Direction,
        n: u64,
        depth: u64,
    ) -> Result<BacktrackTree, TreeError> {
        if n == 0 {
            return Err(TreeError::OutOfFuel);
        }
        self.calls += 1;
        if let Some(b) = self.budget {
            if self.calls > b {
                return Err(TreeError::BudgetExceeded(b));
            }
        }
        self.max_depth = self.max_depth.max(depth);
        let (n, depth) = (n - 1, depth + 1);
        let Some((head, tail)) = l.uncons() else {
            return Ok(self.mk(Node::Match));
        };
        let node = match head {
            Action::Close(g) => {
                let t = self.tree(tail, i, &gm.close(*g, i.idx()), d, n, depth)?;
                Node::GroupClose(*g, t)
            }
            Action::Check(ic) => {
                if inp_gt(i, ic, d) {
                    Node::Progress(self.tree(tail, i, gm, d, n, depth)?)
                } else {
                    Node::Mismatch
                }
            }
            Action::Reg(r) => match r {
                Regex::Epsilon => return self.tree(tail, i, gm, d, n, depth),
                Regex::Char(cd) => match i.advance(cd, self.flags, d) {
                    Some(next) => {
                        let c = i.peek(d).expect("advance read a character");
                        Node::Read(c, self.tree(tail, &next, gm, d, n, depth)?)
                    }
                    None => Node::Mismatch,
                },
                Regex::Disjunction(r1, r2) => {
                    let t1 = self.tree(&tail.push(Action::Reg((**r1).clone())), i, gm, d, n, depth)?;
                    let t2 = self.tree(&tail.push(Action::Reg((**r2).clone())), i, gm, d, n, depth)?;
                    Node::Choice(t1, t2)
                }
                Regex::Sequence(r1, r2) => {
                    let (first, second) = match d {
                        Direction::Forward => (r1, r2),
                        Direction::Backward => (r2, r1),
                    };
                    let l2 = tail
                        .push(Action::Reg((**second).clone()))
                        .push(Action::Reg((**first).clone()));
                    return self.tree(&l2, i, gm, d, n, depth);
                }
                Regex::Group(g, inner) => {
                    let l2 = tail.push(Action::Close(*g)).push(Action::Reg((**inner).clone()));
                    Node::GroupOpen(*g, self.tree(&l2, i, &gm.open(*g, i.idx()), d, n, depth)?)
                }
                Regex::Anchor(a) => {
                    if check_anchor(*a, i, self.flags) {
                        Node::AnchorPass(*a, self.tree(tail, i, gm, d, n, depth)?)
                    } else {
                        Node::Mismatch
                    }
                }
                Regex::Backref(g) => match read_backref(gm, *g, i, self.flags, d) {
                    Some(next) => {
                        let (lo, hi) = (i.idx().min(next.idx()), i.idx().max(next.idx()));
                        let s: Arc<[_]> = i.text()[lo..hi].into();
                        Node::ReadBackRef(s, self.tree(tail, &next, gm, d, n, depth)?)
                    }
                    None => Node::Mismatch,
                },
                Regex::Quantified(inner, q) => {
                    return self.quantifier(inner, *q, tail, i, gm, d, n, depth);
                }
                Regex::Look(lk, inner) => {
                    let t_look = self.tree(&Actions::of_regex(inner), i, gm, Direction::of_look(*lk), n, depth)?;
                    match lk_result(*lk, &t_look, gm, i) {
                        Some(gm2) => Node::Lk(*lk, t_look, self.tree(tail, i, &gm2, d, n, depth)?),
                        None => Node::LkFail(*lk, t_look),
                    }
                }
            },
        };
        Ok(self.mk(node))
    }

    #[allow(clippy::too_many_arguments)]
    fn quantifier(
        &mut self,
        inner: &Arc<Regex>,
        q: Quantity,
        tail: &Actions,
        i: &Input,
        gm: &GroupMap,
        d: Direction,
        n: u64,
        depth: u64,
    ) -> Result<BacktrackTree, TreeError> {
        let groups = inner.def_groups();
        if q.min > 0 {
            let rest = Regex::Quantified(inner.clone(), Quantity { min: q.min - 1, ..q });
            let l2 = tail.push(Action::Reg(rest)).push(Action::Reg((**inner).clone()));
            let t = self.tree(&l2, i, &gm.reset(&groups), d, n, depth)?;
            return Ok(self.mk(Node::GroupReset(groups, t)));
        }
        let Some(delta) = q.delta.pred() else {
            return self.tree(tail, i, gm, d, n, depth);
        };
        let rest = Regex::Quantified(inner.clone(), Quantity { delta, ..q });
        let l_iter = tail
            .push(Action::Reg(rest))
            .push(Action::Check(i.clone()))
            .push(Action::Reg((**inner).clone()));
        let (t_iter, t_skip) = if q.greedy {
            let t_iter = self.tree(&l_iter, i, &gm.reset(&groups), d, n, depth)?;
            (t_iter, self.tree(tail, i, gm, d, n, depth)?)
        } else {
            let t_skip = self.tree(tail, i, gm, d, n, depth)?;
            (self.tree(&l_iter, i, &gm.reset(&groups), d, n, depth)?, t_skip)
        };
        let reset = self.mk(Node::GroupReset(groups, t_iter));
        Ok(self.mk(if q.greedy {
            Node::Choice(reset, t_skip)
        } else {
            Node::Choice(t_skip, reset)
        }))
    }
}

/// Fuel-bounded construction: `None` when `n` nested calls do not suffice.
pub fn compute_tree_fuel(
    l: &Actions,
    i: &Input,
    gm: &GroupMap,
    d: Direction,
    flags: Flags,
    n: u64,
) -> Option<BacktrackTree> {
    match TreeBuilder::new(flags).build(l, i, gm, d, n) {
        Ok(t) => Some(t),
        Err(TreeError::OutOfFuel) => None,
        Err(TreeError::BudgetExceeded(_)) => unreachable!("no budget set"),
    }
}

/// The backtracking tree of `l`, built with `fuel(l, i, d) + 1`.
pub fn compute_tree(l: &Actions, i: &Input, gm: &GroupMap, d: Direction, flags: Flags) -> BacktrackTree {
    let n = fuel(l, i, d).saturating_add(1);
    compute_tree_fuel(l, i, gm, d, flags, n).expect("fuel bound was insufficient")
}

/// Tree of a whole regex matched forward from `i` with no groups set.
pub fn regex_tree(r: &Regex, i: &Input, flags: Flags) -> BacktrackTree {
    compute_tree(&Actions::of_regex(r), i, &GroupMap::new(), Direction::Forward, flags)
}

/// Smallest `n` for which `compute_tree_fuel` succeeds.
pub fn required_fuel(l: &Actions, i: &Input, gm: &GroupMap, d: Direction, flags: Flags) -> u64 {
    let mut b = TreeBuilder::new(flags);
    b.build(l, i, gm, d, u64::MAX)
        .expect("unbounded construction cannot run out of fuel");
    b.max_depth()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::parse;

    fn inp(s: &str) -> Input {
        Input::new(s, 0).unwrap()
    }

    #[test]
    fn fuel_examples() {
        assert_eq!(fuel(&Actions::new(), &inp("xyz"), Direction::Forward), 1);
        let a = parse("a").unwrap();
        assert_eq!(fuel_regex(&a, &inp("aa"), Direction::Forward), 1);
        let star = parse("a*").unwrap();
        assert_eq!(fuel_regex(&star, &inp("aa"), Direction::Forward), 9);
        assert_eq!(fuel(&Actions::of_regex(&star), &inp("aa"), Direction::Forward), 10);
    }

    #[test]
    fn check_at_end_has_no_fuel() {
        let end = Input::new("ab", 2).unwrap();
        let l = Actions::single(Action::Check(end.clone()));
        assert_eq!(fuel(&l, &end, Direction::Forward), 0);
        let start = end.at(0);
        let l = Actions::single(Action::Check(start.clone()));
        assert_eq!(fuel(&l, &start, Direction::Backward), 0);
        assert_eq!(fuel(&l, &start, Direction::Forward), 2);
    }

    #[test]
    fn fuel_is_sufficient_and_required_fuel_is_tight() {
        for (p, s) in [("(a*|a)b", "ab"), ("(?:a|b)*c", "abac"), ("(?<=(a+))b", "aab"), ("(a?)*", "b")] {
            let r = parse(p).unwrap();
            let i = inp(s);
            let l = Actions::of_regex(&r);
            let gm = GroupMap::new();
            let f = Flags::default();
            let need = required_fuel(&l, &i, &gm, Direction::Forward, f);
            assert!(compute_tree_fuel(&l, &i, &gm, Direction::Forward, f, need).is_some());
            assert!(compute_tree_fuel(&l, &i, &gm, Direction::Forward, f, need - 1).is_none());
            assert!(fuel(&l, &i, Direction::Forward) + 1 >= need, "{p}");
        }
    }

    #[test]
    fn actions_list_ops() {
        let l: Actions = vec![Action::Close(1), Action::Close(2)].into_iter().collect();
        assert_eq!(l.len(), 2);
        assert_eq!(l.to_vec()[0], Action::Close(1));
        assert_eq!(l.push(Action::Close(0)).uncons().unwrap().1, &l);
    }
}
