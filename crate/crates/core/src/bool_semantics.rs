//! Tree semantics for the star fragment where progress checks consult a
//! single boolean instead of a stored input position.

use crate::input::{inp_gt, Direction, Input};
use crate::regex::{subset_violation, Flags, Regex};
use crate::tree::{Action, Actions, BacktrackTree, Interner, Node};

/// Backtracking tree of `l` at `i` where `b` records whether a character
/// was read since the innermost star iteration began.
///
/// # Panics
/// If an action regex lies outside the star fragment.
pub fn compute_bool_tree(l: &Actions, i: &Input, b: bool, flags: Flags) -> BacktrackTree {
    for a in l.iter() {
        if let Action::Reg(r) = a {
            if let Some(v) = subset_violation(r) {
                panic!("boolean semantics outside the star fragment: {v}");
            }
        }
    }
    BoolBuilder {
        flags,
        interner: Interner::new(),
    }
    .tree(l, i, b)
}

struct BoolBuilder {
    flags: Flags,
    interner: Interner,
}

impl BoolBuilder {
    fn tree(&mut self, l: &Actions, i: &Input, b: bool) -> BacktrackTree {
        let Some((head, tail)) = l.uncons() else {
            return self.interner.make(Node::Match);
        };
        let node = match head {
            Action::Close(g) => Node::GroupClose(*g, self.tree(tail, i, b)),
            Action::Check(_) => {
                if b {
                    Node::Progress(self.tree(tail, i, true))
                } else {
                    Node::Mismatch
                }
            }
            Action::Reg(r) => match r {
                Regex::Epsilon => return self.tree(tail, i, b),
                Regex::Char(cd) => match i.advance(cd, self.flags, Direction::Forward) {
                    Some(next) => {
                        let c = i.peek(Direction::Forward).expect("advance read a character");
                        Node::Read(c, self.tree(tail, &next, true))
                    }
                    None => Node::Mismatch,
                },
                Regex::Disjunction(r1, r2) => {
                    let t1 = self.tree(&tail.push(Action::Reg((**r1).clone())), i, b);
                    let t2 = self.tree(&tail.push(Action::Reg((**r2).clone())), i, b);
                    Node::Choice(t1, t2)
                }
                Regex::Sequence(r1, r2) => {
                    let l2 = tail
                        .push(Action::Reg((**r2).clone()))
                        .push(Action::Reg((**r1).clone()));
                    return self.tree(&l2, i, b);
                }
                Regex::Group(g, inner) => {
                    let l2 = tail.push(Action::Close(*g)).push(Action::Reg((**inner).clone()));
                    Node::GroupOpen(*g, self.tree(&l2, i, b))
                }
                Regex::Quantified(inner, q) if q.is_star() => {
                    let groups = inner.def_groups();
                    let l_iter = tail
                        .push(Action::Reg(r.clone()))
                        .push(Action::Check(i.clone()))
                        .push(Action::Reg((**inner).clone()));
                    let t_iter = self.tree(&l_iter, i, false);
                    let t_skip = self.tree(tail, i, b);
                    let reset = self.interner.make(Node::GroupReset(groups, t_iter));
                    if q.greedy {
                        Node::Choice(reset, t_skip)
                    } else {
                        Node::Choice(t_skip, reset)
                    }
                }
                other => panic!("boolean semantics outside the star fragment: {other}"),
            },
        };
        self.interner.make(node)
    }
}

/// Whether the boolean `b` faithfully summarizes the progress checks in
/// `l` at input `i`.
pub fn encodes(l: &Actions, i: &Input, b: bool) -> bool {
    match l.uncons() {
        None => true,
        Some((Action::Reg(_) | Action::Close(_), tail)) => encodes(tail, i, b),
        Some((Action::Check(ic), tail)) => {
            if b {
                inp_gt(i, ic, Direction::Forward) && encodes(tail, i, true)
            } else {
                ic.idx() == i.idx() && (encodes(tail, i, true) || encodes(tail, i, false))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::GroupMap;
    use crate::regex::parse;
    use crate::tree::compute_tree;

    fn inp(s: &str, k: usize) -> Input {
        Input::new(s, k).unwrap()
    }

    #[test]
    fn read_restores_progress() {
        let l = Actions::of_regex(&parse("a").unwrap());
        let t = compute_bool_tree(&l, &inp("a", 0), false, Flags::default());
        assert_eq!(t.to_text(), "Read a\nMatch\n");
    }

    #[test]
    fn star_on_empty_input() {
        let l = Actions::of_regex(&parse("a*").unwrap());
        let t = compute_bool_tree(&l, &inp("", 0), true, Flags::default());
        assert_eq!(t.to_text(), "Choice\n├─ Reset []\n│  Mismatch\n└─ Match\n");
    }

    #[test]
    fn agrees_with_tree_semantics_on_fig16_regex() {
        let r = parse("(a*|a)b").unwrap();
        let i = inp("ab", 0);
        let l = Actions::of_regex(&r);
        let t = compute_tree(&l, &i, &GroupMap::new(), Direction::Forward, Flags::default());
        assert_eq!(compute_bool_tree(&l, &i, true, Flags::default()), t);
    }

    #[test]
    fn encoding_rules() {
        let i = inp("ab", 1);
        assert!(encodes(&Actions::new(), &i, false));
        let here = Actions::single(Action::Check(i.clone()));
        assert!(encodes(&here, &i, false));
        assert!(!encodes(&here, &i, true));
        let before = Actions::single(Action::Check(i.at(0)));
        assert!(encodes(&before, &i, true));
        assert!(!encodes(&before, &i, false));
    }

    #[test]
    #[should_panic]
    fn rejects_regexes_outside_the_fragment() {
        compute_bool_tree(&Actions::of_regex(&parse("a+").unwrap()), &inp("a", 0), true, Flags::default());
    }
}
