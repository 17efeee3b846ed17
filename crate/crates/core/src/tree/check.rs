use super::extract::lk_result;
use super::{Action, Actions, BacktrackTree, Node};
use crate::input::{check_anchor, inp_gt, read_backref, Direction, GroupMap, Input};
use crate::regex::{Flags, Quantity, Regex};

/// Checks that `t` is derivable for `(l, i, gm, d)` by the inference rules,
/// node by node. Returns a description of the first disagreement.
pub fn is_tree(
    l: &Actions,
    i: &Input,
    gm: &GroupMap,
    d: Direction,
    t: &BacktrackTree,
    flags: Flags,
) -> Result<(), String> {
    Checker { flags }.check(l, i, gm, d, t)
}

struct Checker {
    flags: Flags,
}

fn fail<T>(rule: &str, t: &BacktrackTree) -> Result<T, String> {
    Err(format!("rule {rule} does not produce node {}", t.node().label()))
}

impl Checker {
    fn check(&self, l: &Actions, i: &Input, gm: &GroupMap, d: Direction, t: &BacktrackTree) -> Result<(), String> {
        let Some((head, tail)) = l.uncons() else {
            return match t.node() {
                Node::Match => Ok(()),
                _ => fail("Match", t),
            };
        };
        match (head, t.node()) {
            (Action::Close(g), Node::GroupClose(g2, next)) if g == g2 => {
                self.check(tail, i, &gm.close(*g, i.idx()), d, next)
            }
            (Action::Close(_), _) => fail("Close", t),
            (Action::Check(ic), node) => match (inp_gt(i, ic, d), node) {
                (true, Node::Progress(next)) => self.check(tail, i, gm, d, next),
                (false, Node::Mismatch) => Ok(()),
                (true, _) => fail("Check", t),
                (false, _) => fail("CheckFail", t),
            },
            (Action::Reg(r), _) => self.check_regex(r, tail, i, gm, d, t),
        }
    }

    fn check_regex(
        &self,
        r: &Regex,
        tail: &Actions,
        i: &Input,
        gm: &GroupMap,
        d: Direction,
        t: &BacktrackTree,
    ) -> Result<(), String> {
        let node = t.node();
        match r {
            Regex::Epsilon => self.check(tail, i, gm, d, t),
            Regex::Char(cd) => match (i.advance(cd, self.flags, d), node) {
                (Some(next), Node::Read(c, sub)) if Some(*c) == i.peek(d) => self.check(tail, &next, gm, d, sub),
                (None, Node::Mismatch) => Ok(()),
                (Some(_), _) => fail("Read", t),
                (None, _) => fail("ReadFail", t),
            },
            Regex::Disjunction(r1, r2) => match node {
                Node::Choice(t1, t2) => {
                    self.check(&tail.push(Action::Reg((**r1).clone())), i, gm, d, t1)?;
                    self.check(&tail.push(Action::Reg((**r2).clone())), i, gm, d, t2)
                }
                _ => fail("Disj", t),
            },
            Regex::Sequence(r1, r2) => {
                let (a, b) = match d {
                    Direction::Forward => (r1, r2),
                    Direction::Backward => (r2, r1),
                };
                let l2 = tail.push(Action::Reg((**b).clone())).push(Action::Reg((**a).clone()));
                self.check(&l2, i, gm, d, t)
            }
            Regex::Group(g, inner) => match node {
                Node::GroupOpen(g2, sub) if g == g2 => {
                    let l2 = tail.push(Action::Close(*g)).push(Action::Reg((**inner).clone()));
                    self.check(&l2, i, &gm.open(*g, i.idx()), d, sub)
                }
                _ => fail("Group", t),
            },
            Regex::Anchor(a) => match (check_anchor(*a, i, self.flags), node) {
                (true, Node::AnchorPass(a2, sub)) if a == a2 => self.check(tail, i, gm, d, sub),
                (false, Node::Mismatch) => Ok(()),
                (true, _) => fail("Anchor", t),
                (false, _) => fail("AnchorFail", t),
            },
            Regex::Backref(g) => match (read_backref(gm, *g, i, self.flags, d), node) {
                (Some(next), Node::ReadBackRef(s, sub)) if s.len() == i.idx().abs_diff(next.idx()) => {
                    self.check(tail, &next, gm, d, sub)
                }
                (None, Node::Mismatch) => Ok(()),
                (Some(_), _) => fail("Backref", t),
                (None, _) => fail("BackrefFail", t),
            },
            Regex::Quantified(inner, q) => {
                let groups = inner.def_groups();
                if q.min > 0 {
                    let Node::GroupReset(gl, sub) = node else {
                        return fail("Forced", t);
                    };
                    if *gl != groups {
                        return fail("Forced", t);
                    }
                    let rest = Regex::Quantified(inner.clone(), Quantity { min: q.min - 1, ..*q });
                    let l2 = tail.push(Action::Reg(rest)).push(Action::Reg((**inner).clone()));
                    return self.check(&l2, i, &gm.reset(&groups), d, sub);
                }
                let Some(delta) = q.delta.pred() else {
                    return self.check(tail, i, gm, d, t);
                };
                let rule = if q.greedy { "Greedy" } else { "Lazy" };
                let Node::Choice(left, right) = node else {
                    return fail(rule, t);
                };
                let (reset, skip) = if q.greedy { (left, right) } else { (right, left) };
                let Node::GroupReset(gl, t_iter) = reset.node() else {
                    return fail(rule, t);
                };
                if *gl != groups {
                    return fail(rule, t);
                }
                let rest = Regex::Quantified(inner.clone(), Quantity { delta, ..*q });
                let l_iter = tail
                    .push(Action::Reg(rest))
                    .push(Action::Check(i.clone()))
                    .push(Action::Reg((**inner).clone()));
                self.check(&l_iter, i, &gm.reset(&groups), d, t_iter)?;
                self.check(tail, i, gm, d, skip)
            }
            Regex::Look(lk, inner) => {
                let d2 = Direction::of_look(*lk);
                let (lk2, t_look) = match node {
                    Node::Lk(lk2, tl, _) | Node::LkFail(lk2, tl) => (lk2, tl),
                    _ => return fail("Lookaround", t),
                };
                if lk2 != lk {
                    return fail("Lookaround", t);
                }
                self.check(&Actions::of_regex(inner), i, gm, d2, t_look)?;
                match (lk_result(*lk, t_look, gm, i), node) {
                    (Some(gm2), Node::Lk(_, _, sub)) => self.check(tail, i, &gm2, d, sub),
                    (None, Node::LkFail(..)) => Ok(()),
                    (Some(_), _) => fail("Lookaround", t),
                    (None, _) => fail("LookaroundFail", t),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::parse;
    use crate::tree::regex_tree;

    #[test]
    fn accepts_computed_and_rejects_altered_trees() {
        let r = parse("(?:a|(?:a(b)|a))bc").unwrap();
        let i = Input::new("abbc", 0).unwrap();
        let f = Flags::default();
        let t = regex_tree(&r, &i, f);
        let l = Actions::of_regex(&r);
        assert!(is_tree(&l, &i, &GroupMap::new(), Direction::Forward, &t, f).is_ok());
        let Node::Choice(a, b) = t.node() else { panic!() };
        let swapped = BacktrackTree::new(Node::Choice(b.clone(), a.clone()));
        assert!(is_tree(&l, &i, &GroupMap::new(), Direction::Forward, &swapped, f).is_err());
    }
}
