//! A naive continuation-passing backtracking matcher, independent of the
//! tree semantics. Used as the reference for differential testing.

use thiserror::Error;

use crate::input::{check_anchor, read_backref, Direction, GroupMap, GroupRange, Input, Leaf};
use crate::regex::{Flags, GroupId, Quantity, Regex};

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("naive matcher exceeded its budget of {0} steps")]
pub struct StepLimitExceeded(pub u64);

#[derive(Clone)]
struct State {
    pos: usize,
    caps: GroupMap,
}

type Res = Result<Option<State>, StepLimitExceeded>;
type Cont<'a> = &'a dyn Fn(&mut Ctx, State) -> Res;

struct Ctx {
    base: Input,
    flags: Flags,
    steps: u64,
    budget: u64,
    collected: Option<Vec<Leaf>>,
}

impl Ctx {
    fn tick(&mut self) -> Result<(), StepLimitExceeded> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(StepLimitExceeded(self.budget))
        } else {
            Ok(())
        }
    }

    fn input(&self, pos: usize) -> Input {
        self.base.at(pos)
    }
}

fn m(c: &mut Ctx, r: &Regex, d: Direction, x: State, k: Cont) -> Res {
    c.tick()?;
    match r {
        Regex::Epsilon => k(c, x),
        Regex::Char(cd) => match c.input(x.pos).advance(cd, c.flags, d) {
            Some(next) => k(c, State { pos: next.idx(), ..x }),
            None => Ok(None),
        },
        Regex::Disjunction(r1, r2) => {
            if let Some(y) = m(c, r1, d, x.clone(), k)? {
                return Ok(Some(y));
            }
            m(c, r2, d, x, k)
        }
        Regex::Sequence(r1, r2) => {
            let (first, second) = match d {
                Direction::Forward => (r1, r2),
                Direction::Backward => (r2, r1),
            };
            m(c, first, d, x, &|c: &mut Ctx, y| m(c, second, d, y, k))
        }
        Regex::Group(g, inner) => {
            let from = x.pos;
            let g = *g;
            m(c, inner, d, x, &move |c: &mut Ctx, mut y: State| {
                let (start, end) = (from.min(y.pos), from.max(y.pos));
                y.caps.set(g, GroupRange::Closed { start, end });
                k(c, y)
            })
        }
        Regex::Anchor(a) => {
            if check_anchor(*a, &c.input(x.pos), c.flags) {
                k(c, x)
            } else {
                Ok(None)
            }
        }
        Regex::Backref(g) => match read_backref(&x.caps, *g, &c.input(x.pos), c.flags, d) {
            Some(next) => k(c, State { pos: next.idx(), ..x }),
            None => Ok(None),
        },
        Regex::Look(lk, inner) => {
            let inner_dir = Direction::of_look(*lk);
            let found = m(c, inner, inner_dir, x.clone(), &|_: &mut Ctx, y| Ok(Some(y)))?;
            match (lk.is_positive(), found) {
                (true, Some(y)) => k(c, State { pos: x.pos, caps: y.caps }),
                (false, None) => k(c, x),
                _ => Ok(None),
            }
        }
        Regex::Quantified(inner, q) => {
            let groups = inner.def_groups();
            repeat(c, inner, *q, &groups, d, x, k)
        }
    }
}

fn repeat(c: &mut Ctx, r: &Regex, q: Quantity, groups: &[GroupId], d: Direction, x: State, k: Cont) -> Res {
    c.tick()?;
    if q.max() == Some(0) {
        return k(c, x);
    }
    let start = x.pos;
    let body_cont = move |c: &mut Ctx, y: State| -> Res {
        if q.min == 0 && y.pos == start {
            return Ok(None);
        }
        let next = Quantity {
            min: q.min.saturating_sub(1),
            delta: if q.min == 0 {
                q.delta.pred().expect("max checked above")
            } else {
                q.delta
            },
            greedy: q.greedy,
        };
        repeat(c, r, next, groups, d, y, k)
    };
    let reset = State {
        pos: x.pos,
        caps: x.caps.reset(groups),
    };
    if q.min > 0 {
        return m(c, r, d, reset, &body_cont);
    }
    if q.greedy {
        if let Some(z) = m(c, r, d, reset, &body_cont)? {
            return Ok(Some(z));
        }
        k(c, x)
    } else {
        if let Some(z) = k(c, x)? {
            return Ok(Some(z));
        }
        m(c, r, d, reset, &body_cont)
    }
}

/// Top-priority match of `r` anchored at `i`, or `None`.
pub fn naive_match_input(r: &Regex, i: &Input, flags: Flags, budget: u64) -> Result<Option<Leaf>, StepLimitExceeded> {
    let mut c = Ctx {
        base: i.clone(),
        flags,
        steps: 0,
        budget,
        collected: None,
    };
    let x = State {
        pos: i.idx(),
        caps: GroupMap::new(),
    };
    let res = m(&mut c, r, Direction::Forward, x, &|_: &mut Ctx, y| Ok(Some(y)))?;
    Ok(res.map(|y| Leaf {
        input: i.at(y.pos),
        groups: y.caps,
    }))
}

/// Every accepting path of `r` at `i`, in priority order.
pub fn naive_all_leaves_input(r: &Regex, i: &Input, flags: Flags, budget: u64) -> Result<Vec<Leaf>, StepLimitExceeded> {
    let mut c = Ctx {
        base: i.clone(),
        flags,
        steps: 0,
        budget,
        collected: Some(Vec::new()),
    };
    let x = State {
        pos: i.idx(),
        caps: GroupMap::new(),
    };
    m(&mut c, r, Direction::Forward, x, &|c: &mut Ctx, y: State| {
        let leaf = Leaf {
            input: c.input(y.pos),
            groups: y.caps,
        };
        c.collected.as_mut().expect("collecting").push(leaf);
        Ok(None)
    })?;
    Ok(c.collected.unwrap_or_default())
}

/// Top-priority match of `r` on `s` starting exactly at `start`.
///
/// # Panics
/// If `start` exceeds the length of `s` in UTF-16 code units.
pub fn naive_match(r: &Regex, s: &str, start: usize, flags: Flags) -> Result<Option<Leaf>, StepLimitExceeded> {
    let i = Input::new(s, start).expect("start within the subject");
    naive_match_input(r, &i, flags, DEFAULT_STEP_BUDGET)
}

pub fn naive_all_leaves(r: &Regex, s: &str, start: usize, flags: Flags) -> Result<Vec<Leaf>, StepLimitExceeded> {
    let i = Input::new(s, start).expect("start within the subject");
    naive_all_leaves_input(r, &i, flags, DEFAULT_STEP_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::parse;

    fn run(p: &str, s: &str) -> Option<Leaf> {
        naive_match(&parse(p).unwrap(), s, 0, Flags::default()).unwrap()
    }

    #[test]
    fn priority_examples() {
        assert_eq!(run("(a|ab)", "ab").unwrap().end(), 1);
        assert!(run("a$", "ab").is_none());
        let l = run("(a*)*", "aa").unwrap();
        assert_eq!(l.end(), 2);
        assert_eq!(l.groups.closed(1), Some((0, 2)));
    }

    #[test]
    fn enumerates_leaves_in_order() {
        let f = Flags::default();
        let ends = |p: &str, s: &str| -> Vec<usize> {
            naive_all_leaves(&parse(p).unwrap(), s, 0, f)
                .unwrap()
                .iter()
                .map(Leaf::end)
                .collect()
        };
        assert_eq!(ends("(a|a)", "a"), vec![1, 1]);
        assert_eq!(ends("", "x"), vec![0]);
        assert_eq!(ends("(?:a|ab)(?:c|b)", "abc"), vec![2, 3]);
    }

    #[test]
    fn lookbehind_captures_are_normalized() {
        let l = run("ab(?<=(ab))", "ab").unwrap();
        assert_eq!(l.groups.closed(1), Some((0, 2)));
    }

    #[test]
    fn budget_is_enforced() {
        let r = parse("(?:a|a)*b").unwrap();
        let s = "a".repeat(40);
        let i = Input::new(&s, 0).unwrap();
        assert_eq!(naive_match_input(&r, &i, Flags::default(), 10_000), Err(StepLimitExceeded(10_000)));
    }
}
