//! PikeTree: the PikeVM exploration order run directly on backtracking
//! trees, and a lockstep co-run checking the VM against it.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::bool_semantics::compute_bool_tree;
use crate::input::{Direction, GroupMap, Input, Leaf};
use crate::pikevm::{compile, list, vm_step, Code, PikeState, VmRule};
use crate::regex::{Flags, Regex};
use crate::tree::{Actions, BacktrackTree, Node};

/// How trees are compared for membership in the seen set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SeenMode {
    /// Same shared node.
    #[default]
    Identity,
    /// Structurally equal subtree.
    Structural,
}

#[derive(Clone, Debug)]
enum Seen {
    Identity(HashSet<usize>),
    Structural(HashSet<BacktrackTree>),
}

impl Seen {
    fn new(mode: SeenMode) -> Seen {
        match mode {
            SeenMode::Identity => Seen::Identity(HashSet::new()),
            SeenMode::Structural => Seen::Structural(HashSet::new()),
        }
    }

    fn contains(&self, t: &BacktrackTree) -> bool {
        match self {
            Seen::Identity(s) => s.contains(&t.id()),
            Seen::Structural(s) => s.contains(t),
        }
    }

    fn insert(&mut self, t: &BacktrackTree) {
        match self {
            Seen::Identity(s) => {
                s.insert(t.id());
            }
            Seen::Structural(s) => {
                s.insert(t.clone());
            }
        }
    }

    fn clear(&mut self) {
        match self {
            Seen::Identity(s) => s.clear(),
            Seen::Structural(s) => s.clear(),
        }
    }
}

/// A tree in a thread list. `id` is its preorder number in the root tree
/// and only serves to name it in traces.
#[derive(Clone, Debug)]
pub struct Entry {
    pub tree: BacktrackTree,
    pub gm: GroupMap,
    pub id: u64,
}

#[derive(Clone, Debug)]
pub struct TreeRunning {
    pub input: Input,
    pub best: Option<Leaf>,
    pub active: VecDeque<Entry>,
    pub blocked: Vec<Entry>,
    seen: Seen,
}

impl TreeRunning {
    pub fn is_seen(&self, t: &BacktrackTree) -> bool {
        self.seen.contains(t)
    }
}

#[derive(Clone, Debug)]
pub enum TreeState {
    Final(Option<Leaf>),
    Running(TreeRunning),
}

impl TreeState {
    pub fn initial(t: &BacktrackTree, i: &Input, mode: SeenMode) -> TreeState {
        TreeState::Running(TreeRunning {
            input: i.clone(),
            best: None,
            active: VecDeque::from([Entry {
                tree: t.clone(),
                gm: GroupMap::new(),
                id: 0,
            }]),
            blocked: Vec::new(),
            seen: Seen::new(mode),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PtRule {
    Final,
    NextChar,
    Skip,
    Match,
    Mismatch,
    Blocked,
    Choice,
    Progress,
    Open,
    Close,
    Reset,
}

impl fmt::Display for PtRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One step, skipping the head tree whenever it has been seen.
pub fn pt_step(st: &mut TreeState) -> PtRule {
    pt_step_policy(st, true)
}

/// One step. A seen head tree is skipped only when `skip` is set.
///
/// # Panics
/// If `st` is final or the head tree has a node kind the star fragment
/// cannot produce.
pub fn pt_step_policy(st: &mut TreeState, skip: bool) -> PtRule {
    let TreeState::Running(run) = st else {
        panic!("pt_step on a final state");
    };
    let Some(Entry { tree, gm, id }) = run.active.pop_front() else {
        if run.blocked.is_empty() {
            *st = TreeState::Final(run.best.take());
            return PtRule::Final;
        }
        return match run.input.step(Direction::Forward) {
            Some(next) => {
                run.input = next;
                run.active = std::mem::take(&mut run.blocked).into();
                run.seen.clear();
                PtRule::NextChar
            }
            None => {
                *st = TreeState::Final(run.best.take());
                PtRule::Final
            }
        };
    };
    if skip && run.seen.contains(&tree) {
        return PtRule::Skip;
    }
    run.seen.insert(&tree);
    let idx = run.input.idx();
    let mut then = |t: &BacktrackTree, gm: GroupMap| {
        run.active.push_front(Entry {
            tree: t.clone(),
            gm,
            id: id + 1,
        })
    };
    match tree.node() {
        Node::Match => {
            run.best = Some(Leaf {
                input: run.input.clone(),
                groups: gm,
            });
            run.active.clear();
            PtRule::Match
        }
        Node::Mismatch => PtRule::Mismatch,
        Node::Read(_, t) => {
            run.blocked.push(Entry {
                tree: t.clone(),
                gm,
                id: id + 1,
            });
            PtRule::Blocked
        }
        Node::Choice(t1, t2) => {
            run.active.push_front(Entry {
                tree: t2.clone(),
                gm: gm.clone(),
                id: id.saturating_add(1).saturating_add(t1.size()),
            });
            run.active.push_front(Entry {
                tree: t1.clone(),
                gm,
                id: id + 1,
            });
            PtRule::Choice
        }
        Node::Progress(t) => {
            then(t, gm);
            PtRule::Progress
        }
        Node::GroupOpen(g, t) => {
            then(t, gm.open(*g, idx));
            PtRule::Open
        }
        Node::GroupClose(g, t) => {
            then(t, gm.close(*g, idx));
            PtRule::Close
        }
        Node::GroupReset(gl, t) => {
            then(t, gm.reset(gl));
            PtRule::Reset
        }
        other => panic!("PikeTree cannot step a {} node", other.label()),
    }
}

pub fn pt_run_with(t: &BacktrackTree, i: &Input, mode: SeenMode) -> Option<Leaf> {
    let mut st = TreeState::initial(t, i, mode);
    loop {
        pt_step(&mut st);
        if let TreeState::Final(best) = st {
            return best;
        }
    }
}

pub fn pt_run(t: &BacktrackTree, i: &Input) -> Option<Leaf> {
    pt_run_with(t, i, SeenMode::Identity)
}

/// Tree for `r` at `i` in the form PikeTree expects.
///
/// # Panics
/// If `r` lies outside the star fragment.
pub fn pike_tree(r: &Regex, i: &Input, flags: Flags) -> BacktrackTree {
    compute_bool_tree(&Actions::of_regex(r), i, true, flags)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PtTraceRow {
    pub idx: usize,
    pub best: Option<usize>,
    pub active: Vec<u64>,
    pub blocked: Vec<u64>,
    pub rule: PtRule,
    /// For a skip, the id under which the skipped tree was first processed
    /// at this position.
    pub same_as: Option<u64>,
}

pub fn pt_trace(t: &BacktrackTree, i: &Input) -> (Vec<PtTraceRow>, Option<Leaf>) {
    let mut st = TreeState::initial(t, i, SeenMode::Identity);
    let mut first_id: HashMap<usize, u64> = HashMap::new();
    let mut rows = Vec::new();
    loop {
        let (row, head) = match &st {
            TreeState::Final(best) => return (rows, best.clone()),
            TreeState::Running(run) => (
                PtTraceRow {
                    idx: run.input.idx(),
                    best: run.best.as_ref().map(Leaf::end),
                    active: run.active.iter().map(|e| e.id).collect(),
                    blocked: run.blocked.iter().map(|e| e.id).collect(),
                    rule: PtRule::Final,
                    same_as: None,
                },
                run.active.front().map(|e| (e.tree.id(), e.id)),
            ),
        };
        let rule = pt_step(&mut st);
        let same_as = match (rule, head) {
            (PtRule::Skip, Some((key, _))) => first_id.get(&key).copied(),
            (PtRule::NextChar, _) => {
                first_id.clear();
                None
            }
            (_, Some((key, id))) => {
                first_id.entry(key).or_insert(id);
                None
            }
            _ => None,
        };
        rows.push(PtTraceRow { rule, same_as, ..row });
    }
}

pub fn render_pt_trace(rows: &[PtTraceRow]) -> String {
    let ids = |xs: &[u64]| list(&xs.iter().map(|n| format!("t{n}")).collect::<Vec<_>>());
    rows.iter()
        .map(|r| {
            let rule = match (r.rule, r.same_as, r.active.first()) {
                (PtRule::Skip, Some(orig), Some(head)) => format!("Skip t{head} = t{orig}"),
                _ => r.rule.to_string(),
            };
            format!("{:>3}  A {:<22} B {:<14} {}\n", r.idx, ids(&r.active), ids(&r.blocked), rule)
        })
        .collect()
}

/// The PikeTree rule a VM rule corresponds to, or `None` for a VM step
/// with no tree counterpart.
pub fn tree_rule_for(vm: VmRule) -> Option<PtRule> {
    Some(match vm {
        VmRule::Jump | VmRule::Begin => return None,
        VmRule::Final => PtRule::Final,
        VmRule::NextChar => PtRule::NextChar,
        VmRule::Skip => PtRule::Skip,
        VmRule::Match => PtRule::Match,
        VmRule::Block => PtRule::Blocked,
        VmRule::FailBlock | VmRule::EndStuck => PtRule::Mismatch,
        VmRule::Fork => PtRule::Choice,
        VmRule::Open => PtRule::Open,
        VmRule::Close => PtRule::Close,
        VmRule::Reset => PtRule::Reset,
        VmRule::End => PtRule::Progress,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CoRun {
    pub vm_steps: u64,
    pub tree_steps: u64,
    pub stutters: u64,
    pub skips: u64,
    pub result: Option<usize>,
}

fn corresponds(vm: &PikeState, pt: &TreeState) -> Result<(), String> {
    match (vm, pt) {
        (PikeState::Final(a), TreeState::Final(b)) => {
            if a == b {
                Ok(())
            } else {
                Err(format!("final results differ: {a:?} vs {b:?}"))
            }
        }
        (PikeState::Running(v), TreeState::Running(t)) => {
            if v.input.idx() != t.input.idx() {
                return Err(format!("positions differ: {} vs {}", v.input.idx(), t.input.idx()));
            }
            if v.best != t.best {
                return Err("best results differ".into());
            }
            let same = |a: &mut dyn Iterator<Item = &GroupMap>, b: &mut dyn Iterator<Item = &GroupMap>| {
                let (a, b): (Vec<_>, Vec<_>) = (a.collect(), b.collect());
                a == b
            };
            if !same(&mut v.active.iter().map(|th| &th.gm), &mut t.active.iter().map(|e| &e.gm)) {
                return Err(format!(
                    "active lists differ at {}: {} threads vs {} trees",
                    v.input.idx(),
                    v.active.len(),
                    t.active.len()
                ));
            }
            if !same(&mut v.blocked.iter().map(|th| &th.gm), &mut t.blocked.iter().map(|e| &e.gm)) {
                return Err(format!("blocked lists differ at {}", v.input.idx()));
            }
            Ok(())
        }
        _ => Err("one machine finished before the other".into()),
    }
}

/// Runs the VM and PikeTree side by side, letting PikeTree skip exactly
/// when the VM does, and checks after every VM step that the two states
/// agree on position, best result, and the group maps of both lists.
pub fn corun(r: &Regex, i: &Input, flags: Flags) -> Result<CoRun, String> {
    let code: Code = compile(r);
    let tree = pike_tree(r, i, flags);
    let mut vm = PikeState::initial(i);
    let mut pt = TreeState::initial(&tree, i, SeenMode::Identity);
    let mut stats = CoRun::default();
    loop {
        if let (PikeState::Final(best), TreeState::Final(_)) = (&vm, &pt) {
            stats.result = best.as_ref().map(Leaf::end);
            return Ok(stats);
        }
        let v = vm_step(&mut vm, &code, flags);
        stats.vm_steps += 1;
        match tree_rule_for(v) {
            None => stats.stutters += 1,
            Some(expected) => {
                if v == VmRule::Skip {
                    let seen = matches!(&pt, TreeState::Running(t)
                        if t.active.front().is_some_and(|e| t.is_seen(&e.tree)));
                    if !seen {
                        return Err(format!("VM skipped a thread whose tree is unseen (step {})", stats.vm_steps));
                    }
                    stats.skips += 1;
                }
                let got = pt_step_policy(&mut pt, v == VmRule::Skip);
                stats.tree_steps += 1;
                if got != expected {
                    return Err(format!("VM step {v} met tree step {got} (step {})", stats.vm_steps));
                }
            }
        }
        corresponds(&vm, &pt).map_err(|e| format!("after VM step {} ({v}): {e}", stats.vm_steps))?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::GroupRange;
    use crate::regex::parse;
    use crate::tree::first_branch;

    fn ab() -> Input {
        Input::new("ab", 0).unwrap()
    }

    #[test]
    fn trace_of_the_worked_example() {
        let t = pike_tree(&parse("(a*|a)b").unwrap(), &ab(), Flags::default());
        let (rows, best) = pt_trace(&t, &ab());
        let cols: Vec<(Vec<u64>, Vec<u64>)> = rows.iter().map(|r| (r.active.clone(), r.blocked.clone())).collect();
        let expected: Vec<(Vec<u64>, Vec<u64>)> = vec![
            (vec![0], vec![]),
            (vec![1], vec![]),
            (vec![2, 14], vec![]),
            (vec![3, 12, 14], vec![]),
            (vec![4, 12, 14], vec![]),
            (vec![12, 14], vec![5]),
            (vec![13, 14], vec![5]),
            (vec![14], vec![5]),
            (vec![], vec![5, 15]),
            (vec![5, 15], vec![]),
            (vec![6, 15], vec![]),
            (vec![7, 9, 15], vec![]),
            (vec![8, 9, 15], vec![]),
            (vec![9, 15], vec![]),
            (vec![10, 15], vec![]),
            (vec![15], vec![11]),
            (vec![], vec![11]),
            (vec![11], vec![]),
            (vec![], vec![]),
        ];
        assert_eq!(cols, expected);
        assert_eq!(rows[15].rule, PtRule::Skip);
        assert_eq!(rows[15].same_as, Some(9));
        assert!(render_pt_trace(&rows).contains("Skip t15 = t9"));
        let best = best.unwrap();
        assert_eq!(best.end(), 2);
        assert_eq!(best.groups.get(1), Some(GroupRange::Closed { start: 0, end: 1 }));
    }

    #[test]
    fn empty_lists_are_final() {
        let m = BacktrackTree::new(Node::Mismatch);
        let mut st = TreeState::initial(&m, &ab(), SeenMode::Identity);
        assert_eq!(pt_step(&mut st), PtRule::Mismatch);
        assert_eq!(pt_step(&mut st), PtRule::Final);
        assert!(matches!(st, TreeState::Final(None)));
    }

    #[test]
    fn match_clears_the_active_list() {
        let r = parse("|a").unwrap();
        let t = pike_tree(&r, &ab(), Flags::default());
        let mut st = TreeState::initial(&t, &ab(), SeenMode::Identity);
        assert_eq!(pt_step(&mut st), PtRule::Choice);
        assert_eq!(pt_step(&mut st), PtRule::Match);
        let TreeState::Running(run) = &st else { panic!() };
        assert!(run.active.is_empty());
        assert_eq!(run.best.as_ref().map(Leaf::end), Some(0));
    }

    #[test]
    fn agrees_with_first_branch() {
        for (p, s) in [("(a*|a)b", "ab"), ("(a|ab)(c|bcd)(d*)", "abcd"), ("(?:a*?)*b", "aab"), ("((a)|b)*", "abab")] {
            let i = Input::new(s, 0).unwrap();
            let t = pike_tree(&parse(p).unwrap(), &i, Flags::default());
            assert_eq!(pt_run(&t, &i), first_branch(&t, &i), "{p}");
            assert_eq!(pt_run_with(&t, &i, SeenMode::Structural), first_branch(&t, &i), "{p}");
        }
    }

    #[test]
    fn corun_on_the_worked_example() {
        let c = corun(&parse("(a*|a)b").unwrap(), &ab(), Flags::default()).unwrap();
        assert_eq!(c.result, Some(2));
        assert_eq!(c.skips, 1);
        assert_eq!(c.vm_steps, c.tree_steps + c.stutters);
        assert_eq!(c.stutters, 4);
    }
}
