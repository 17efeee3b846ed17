//! Regex syntax: AST, parser, printer and static checks.

mod ast;
mod chars;
mod parse;
mod unparse;

pub use ast::{
    Anchor, Char, CharDescriptor, ClassEscape, ClassItem, Delta, Flags, GroupId, LookKind,
    Quantity, Regex,
};
pub use chars::{fold, is_line_terminator, is_word_char};
pub use parse::{parse, parse_full, ParseError, Parsed};
pub use unparse::unparse;

use std::collections::HashSet;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum WellFormedError {
    #[error("group {0} is defined more than once")]
    DuplicateGroup(GroupId),
    #[error("group index 0 is reserved")]
    ZeroGroup,
    #[error("backreference \\{0} has no matching group")]
    DanglingBackref(GroupId),
    #[error("group {found} appears where group {expected} was expected")]
    Numbering { expected: GroupId, found: GroupId },
}

/// Checks that groups are numbered 1..n in opening order, each defined
/// once, and that every backreference targets a defined group.
pub fn check_well_formed(r: &Regex) -> Result<(), WellFormedError> {
    let groups = r.def_groups();
    let mut seen = HashSet::new();
    for g in &groups {
        if *g == 0 {
            return Err(WellFormedError::ZeroGroup);
        }
        if !seen.insert(*g) {
            return Err(WellFormedError::DuplicateGroup(*g));
        }
    }
    for (k, g) in groups.iter().enumerate() {
        let expected = k as GroupId + 1;
        if *g != expected {
            return Err(WellFormedError::Numbering {
                expected,
                found: *g,
            });
        }
    }
    for b in r.backrefs() {
        if !seen.contains(&b) {
            return Err(WellFormedError::DanglingBackref(b));
        }
    }
    Ok(())
}

/// Membership in the fragment handled by the PikeVM: characters,
/// disjunction, sequence, groups and (greedy or lazy) star only.
#[allow(non_snake_case)]
pub fn in_subset_P(r: &Regex) -> bool {
    subset_violation(r).is_none()
}

/// The first construct that falls outside the PikeVM fragment, if any.
pub fn subset_violation(r: &Regex) -> Option<String> {
    match r {
        Regex::Epsilon | Regex::Char(_) => None,
        Regex::Disjunction(a, b) | Regex::Sequence(a, b) => {
            subset_violation(a).or_else(|| subset_violation(b))
        }
        Regex::Group(_, inner) => subset_violation(inner),
        Regex::Quantified(inner, q) if q.is_star() => subset_violation(inner),
        Regex::Quantified(..) => Some(format!("counted quantifier in {r}")),
        Regex::Anchor(_) => Some(format!("anchor {r}")),
        Regex::Backref(_) => Some(format!("backreference {r}")),
        Regex::Look(..) => Some(format!("lookaround {r}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formedness() {
        assert!(check_well_formed(&parse("(a)(b)\\2").unwrap()).is_ok());
        let dup = Regex::seq(Regex::group(1, Regex::char('a')), Regex::group(1, Regex::char('b')));
        assert_eq!(check_well_formed(&dup), Err(WellFormedError::DuplicateGroup(1)));
        let dangling = Regex::seq(Regex::group(1, Regex::char('a')), Regex::Backref(2));
        assert_eq!(check_well_formed(&dangling), Err(WellFormedError::DanglingBackref(2)));
        let gap = Regex::group(2, Regex::char('a'));
        assert_eq!(
            check_well_formed(&gap),
            Err(WellFormedError::Numbering {
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn subset() {
        assert!(in_subset_P(&parse("(a*|a)b").unwrap()));
        assert!(in_subset_P(&parse("(?:a|b)*?c").unwrap()));
        for p in ["a+", "a?", "a{2}", "^a", "(a)\\1", "(?=a)"] {
            assert!(!in_subset_P(&parse(p).unwrap()), "{p}");
        }
    }

    #[test]
    fn def_groups_order() {
        let r = parse("((a)|(b))(?=(c))").unwrap();
        assert_eq!(r.def_groups(), vec![1, 2, 3, 4]);
    }
}
