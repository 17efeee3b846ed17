//! Executable backtracking-tree semantics for JavaScript regexes.
//!
//! The crate builds the tree of all match attempts a backtracking engine
//! explores, in priority order, and derives matching from it. Around that
//! core it provides an independent backtracking matcher used as an oracle,
//! a boolean-flag variant of the semantics, a PikeVM for the star fragment,
//! the PikeTree machine bridging the two, and a checker for contextual
//! equivalence of rewrites.

pub mod bool_semantics;
pub mod cli;
pub mod equiv;
pub mod fuzz;
pub mod input;
pub mod oracle;
pub mod pikevm;
pub mod piketree;
pub mod regex;
pub mod tree;

pub use input::{Direction, GroupMap, GroupRange, Input, Leaf};
pub use regex::{parse, Flags, Regex};
pub use tree::{compute_tree, first_branch, leaves, BacktrackTree};
