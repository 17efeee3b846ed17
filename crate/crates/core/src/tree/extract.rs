use super::{BacktrackTree, Node};
use crate::input::{Direction, GroupMap, Input, Leaf};
use crate::regex::LookKind;

/// Leaves of the accepting branches of `t`, replaying reads and group
/// operations from `i` and `gm`. Stops after `limit` leaves if given.
pub fn replay_leaves(
    t: &BacktrackTree,
    i: &Input,
    gm: &GroupMap,
    d: Direction,
    limit: Option<usize>,
) -> Vec<Leaf> {
    let mut out = Vec::new();
    let mut stack = vec![(t.clone(), i.clone(), gm.clone())];
    while let Some((t, i, gm)) = stack.pop() {
        if limit.is_some_and(|k| out.len() >= k) {
            break;
        }
        match t.node() {
            Node::Match => out.push(Leaf { input: i, groups: gm }),
            Node::Mismatch | Node::LkFail(..) => {}
            Node::Choice(t1, t2) => {
                stack.push((t2.clone(), i.clone(), gm.clone()));
                stack.push((t1.clone(), i, gm));
            }
            Node::Read(_, next) => {
                let i2 = i.step(d).expect("read past the end of the input");
                stack.push((next.clone(), i2, gm));
            }
            Node::ReadBackRef(s, next) => {
                let idx = match d {
                    Direction::Forward => i.idx() + s.len(),
                    Direction::Backward => i.idx() - s.len(),
                };
                stack.push((next.clone(), i.at(idx), gm));
            }
            Node::Progress(next) | Node::AnchorPass(_, next) => stack.push((next.clone(), i, gm)),
            Node::GroupOpen(g, next) => {
                let gm2 = gm.open(*g, i.idx());
                stack.push((next.clone(), i, gm2));
            }
            Node::GroupClose(g, next) => {
                let gm2 = gm.close(*g, i.idx());
                stack.push((next.clone(), i, gm2));
            }
            Node::GroupReset(gl, next) => {
                let gm2 = gm.reset(gl);
                stack.push((next.clone(), i, gm2));
            }
            Node::Lk(lk, t_look, next) => {
                let gm2 = lk_result(*lk, t_look, &gm, &i)
                    .expect("lookaround node whose lookaround does not succeed");
                stack.push((next.clone(), i, gm2));
            }
        }
    }
    out
}

pub fn first_leaf(t: &BacktrackTree, i: &Input, gm: &GroupMap, d: Direction) -> Option<Leaf> {
    replay_leaves(t, i, gm, d, Some(1)).into_iter().next()
}

/// The result of a backtracking matcher: the first accepting branch of a
/// tree built forward from `i` with no groups set.
pub fn first_branch(t: &BacktrackTree, i: &Input) -> Option<Leaf> {
    first_leaf(t, i, &GroupMap::new(), Direction::Forward)
}

/// All leaves in priority order, starting with no groups set.
pub fn leaves(t: &BacktrackTree, i: &Input, d: Direction) -> Vec<Leaf> {
    replay_leaves(t, i, &GroupMap::new(), d, None)
}

/// Outcome of a lookaround whose tree `t_look` was built at `i`: the group
/// map to continue with, or `None` if the lookaround fails.
pub fn lk_result(lk: LookKind, t_look: &BacktrackTree, gm: &GroupMap, i: &Input) -> Option<GroupMap> {
    let first = first_leaf(t_look, i, gm, Direction::of_look(lk));
    match (lk.is_positive(), first) {
        (true, Some(leaf)) => Some(leaf.groups),
        (true, None) => None,
        (false, Some(_)) => None,
        (false, None) => Some(gm.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::{parse, Flags};
    use crate::tree::regex_tree;

    #[test]
    fn choice_takes_the_right_branch_when_left_fails() {
        let m = BacktrackTree::new(Node::Match);
        let t = BacktrackTree::new(Node::Choice(BacktrackTree::new(Node::Mismatch), m));
        let i = Input::new("x", 0).unwrap();
        assert_eq!(first_branch(&t, &i).unwrap().input, i);
        assert!(first_branch(&BacktrackTree::new(Node::Mismatch), &i).is_none());
    }

    #[test]
    fn positive_lookahead_sets_groups() {
        let r = parse("(?=(b|c))").unwrap();
        let i = Input::new("ab", 1).unwrap();
        let t = regex_tree(&r, &i, Flags::default());
        let leaf = first_branch(&t, &i).unwrap();
        assert_eq!(leaf.end(), 1);
        assert_eq!(leaf.groups.closed(1), Some((1, 2)));
    }

    #[test]
    fn negative_lookahead_result() {
        let i = Input::new("ab", 0).unwrap();
        let t = BacktrackTree::new(Node::Mismatch);
        let gm = GroupMap::new().open(3, 0);
        assert_eq!(lk_result(LookKind::NegLookahead, &t, &gm, &i), Some(gm));
        let r = parse("(?!a)").unwrap();
        assert!(first_branch(&regex_tree(&r, &i, Flags::default()), &i).is_none());
    }

    #[test]
    fn duplicate_leaves_are_kept() {
        let r = parse("a|a").unwrap();
        let i = Input::new("a", 0).unwrap();
        let ls = leaves(&regex_tree(&r, &i, Flags::default()), &i, Direction::Forward);
        assert_eq!(ls.len(), 2);
        assert_eq!(ls[0], ls[1]);
    }
}
