//! Backtracking trees: construction, result extraction and rendering.

mod check;
mod compute;
mod extract;
mod render;

pub use check::is_tree;
pub use compute::{
    compute_tree, compute_tree_fuel, fuel, fuel_regex, regex_tree, required_fuel, Action, Actions,
    TreeBuilder, TreeError,
};
pub use extract::{first_branch, first_leaf, leaves, lk_result, replay_leaves};

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::regex::{Anchor, Char, GroupId, LookKind};

/// One node of a backtracking tree. Children are shared handles.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Match,
    Mismatch,
    Choice(BacktrackTree, BacktrackTree),
    Read(Char, BacktrackTree),
    ReadBackRef(Arc<[Char]>, BacktrackTree),
    Progress(BacktrackTree),
    AnchorPass(Anchor, BacktrackTree),
    GroupOpen(GroupId, BacktrackTree),
    GroupClose(GroupId, BacktrackTree),
    GroupReset(Vec<GroupId>, BacktrackTree),
    Lk(LookKind, BacktrackTree, BacktrackTree),
    LkFail(LookKind, BacktrackTree),
}

impl Node {
    pub fn children(&self) -> Vec<&BacktrackTree> {
        match self {
            Node::Match | Node::Mismatch => vec![],
            Node::Choice(a, b) | Node::Lk(_, a, b) => vec![a, b],
            Node::Read(_, t)
            | Node::ReadBackRef(_, t)
            | Node::Progress(t)
            | Node::AnchorPass(_, t)
            | Node::GroupOpen(_, t)
            | Node::GroupClose(_, t)
            | Node::GroupReset(_, t)
            | Node::LkFail(_, t) => vec![t],
        }
    }

    /// Short label in the style of the node names (`Read a`, `Open 1`, ...).
    pub fn label(&self) -> String {
        render::label(self)
    }
}

struct TreeInner {
    node: Node,
    hash: u64,
    size: u64,
}

/// Immutable, reference-counted backtracking tree with a cached structural
/// hash. Equality is structural, with pointer identity as a fast path.
#[derive(Clone)]
pub struct BacktrackTree(Arc<TreeInner>);

impl BacktrackTree {
    /// Builds a node without interning.
    pub fn new(node: Node) -> BacktrackTree {
        let mut h = DefaultHasher::new();
        node.hash(&mut h);
        let hash = h.finish();
        let size = node
            .children()
            .iter()
            .fold(1u64, |acc, c| acc.saturating_add(c.size()));
        BacktrackTree(Arc::new(TreeInner { node, hash, size }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    /// Number of nodes when the tree is unfolded (shared subtrees counted
    /// once per occurrence), saturating.
    pub fn size(&self) -> u64 {
        self.0.size
    }

    pub fn ptr_eq(&self, other: &BacktrackTree) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Address of the shared node, usable as an identity key.
    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn is_match(&self) -> bool {
        matches!(self.node(), Node::Match)
    }

    pub fn to_text(&self) -> String {
        render::to_text(self)
    }

    pub fn to_json(&self) -> serde_json::Value {
        render::to_json(self)
    }

    /// Number of distinct shared nodes reachable from the root.
    pub fn dag_size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if seen.insert(t.id()) {
                stack.extend(t.node().children().into_iter().cloned());
            }
        }
        seen.len()
    }
}

impl PartialEq for BacktrackTree {
    fn eq(&self, other: &BacktrackTree) -> bool {
        self.ptr_eq(other) || (self.0.hash == other.0.hash && self.0.node == other.0.node)
    }
}

impl Eq for BacktrackTree {}

impl Hash for BacktrackTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl std::fmt::Debug for BacktrackTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.node())
    }
}

impl std::fmt::Display for BacktrackTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Hash-consing table: structurally equal nodes built through the same
/// interner are the same allocation.
#[derive(Default)]
pub struct Interner {
    table: HashMap<Node, BacktrackTree>,
}

impl Interner {
    pub fn new() -> Interner {
        Interner::default()
    }

    pub fn make(&mut self, node: Node) -> BacktrackTree {
        if let Some(t) = self.table.get(&node) {
            return t.clone();
        }
        let t = BacktrackTree::new(node.clone());
        self.table.insert(node, t.clone());
        t
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_shares_equal_nodes() {
        let mut it = Interner::new();
        let a = it.make(Node::Read(b'a' as Char, BacktrackTree::new(Node::Match)));
        let m = it.make(Node::Match);
        let b = it.make(Node::Read(b'a' as Char, m.clone()));
        assert_eq!(a, b);
        let c = it.make(Node::Read(b'a' as Char, m));
        assert!(b.ptr_eq(&c));
    }

    #[test]
    fn size_counts_unfolded_nodes() {
        let m = BacktrackTree::new(Node::Match);
        let c = BacktrackTree::new(Node::Choice(m.clone(), m));
        assert_eq!(c.size(), 3);
        assert_eq!(c.dag_size(), 2);
    }
}
