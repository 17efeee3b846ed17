//! Input positions, group maps and the primitive operations on them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::regex::{fold, is_line_terminator, is_word_char, Anchor, Char, CharDescriptor, Flags, GroupId, LookKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn of_look(lk: LookKind) -> Direction {
        if lk.is_ahead() {
            Direction::Forward
        } else {
            Direction::Backward
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            Direction::Forward => "->",
            Direction::Backward => "<-",
        }
    }
}

/// A position in a subject string. Conceptually a zipper: the characters
/// after the cursor (`next`) and the characters before it in reverse
/// (`prev`); `idx` is the length of `prev`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Input {
    text: Arc<[Char]>,
    idx: usize,
}

impl fmt::Debug for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Input({:?}@{})", String::from_utf16_lossy(&self.text), self.idx)
    }
}

impl Input {
    /// Position `start` in `s`; `None` if `start` exceeds the length in
    /// UTF-16 code units.
    pub fn new(s: &str, start: usize) -> Option<Input> {
        Input::from_units(s.encode_utf16().collect::<Vec<_>>(), start)
    }

    pub fn from_units(units: impl Into<Arc<[Char]>>, start: usize) -> Option<Input> {
        let text = units.into();
        (start <= text.len()).then_some(Input { text, idx: start })
    }

    pub fn idx(&self) -> usize {
        self.idx
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    pub fn text(&self) -> &[Char] {
        &self.text
    }

    pub fn same_text(&self, other: &Input) -> bool {
        Arc::ptr_eq(&self.text, &other.text) || self.text == other.text
    }

    /// Characters after the cursor.
    pub fn next(&self) -> &[Char] {
        &self.text[self.idx..]
    }

    /// Characters before the cursor, nearest first.
    pub fn prev(&self) -> impl Iterator<Item = Char> + '_ {
        self.text[..self.idx].iter().rev().copied()
    }

    /// The same subject at another index.
    pub fn at(&self, idx: usize) -> Input {
        assert!(idx <= self.text.len());
        Input {
            text: self.text.clone(),
            idx,
        }
    }

    pub fn at_end(&self, d: Direction) -> bool {
        match d {
            Direction::Forward => self.idx == self.text.len(),
            Direction::Backward => self.idx == 0,
        }
    }

    /// Number of characters left to read in direction `d`.
    pub fn remaining(&self, d: Direction) -> usize {
        match d {
            Direction::Forward => self.text.len() - self.idx,
            Direction::Backward => self.idx,
        }
    }

    /// The character that a read in direction `d` would consume.
    pub fn peek(&self, d: Direction) -> Option<Char> {
        match d {
            Direction::Forward => self.text.get(self.idx).copied(),
            Direction::Backward => self.idx.checked_sub(1).map(|k| self.text[k]),
        }
    }

    /// Moves one character in direction `d` without inspecting it.
    pub fn step(&self, d: Direction) -> Option<Input> {
        if self.at_end(d) {
            return None;
        }
        Some(match d {
            Direction::Forward => self.at(self.idx + 1),
            Direction::Backward => self.at(self.idx - 1),
        })
    }

    /// Reads one character matching `cd`.
    pub fn advance(&self, cd: &CharDescriptor, flags: Flags, d: Direction) -> Option<Input> {
        let c = self.peek(d)?;
        if cd.matches(c, flags) {
            self.step(d)
        } else {
            None
        }
    }

    /// The character text before and after the cursor as a debugging aid.
    pub fn describe(&self) -> String {
        let before = String::from_utf16_lossy(&self.text[..self.idx]);
        let after = String::from_utf16_lossy(&self.text[self.idx..]);
        format!("{before}|{after}")
    }
}

/// `i1` is strictly further along than `i2` when moving in direction `d`.
pub fn inp_gt(i1: &Input, i2: &Input, d: Direction) -> bool {
    match d {
        Direction::Forward => i1.idx > i2.idx,
        Direction::Backward => i1.idx < i2.idx,
    }
}

pub fn check_anchor(a: Anchor, i: &Input, flags: Flags) -> bool {
    let before = i.peek(Direction::Backward);
    let after = i.peek(Direction::Forward);
    match a {
        Anchor::InputStart => {
            before.is_none() || (flags.multiline && before.is_some_and(is_line_terminator))
        }
        Anchor::InputEnd => {
            after.is_none() || (flags.multiline && after.is_some_and(is_line_terminator))
        }
        Anchor::WordBoundary | Anchor::NotWordBoundary => {
            let boundary = before.is_some_and(is_word_char) != after.is_some_and(is_word_char);
            boundary == (a == Anchor::WordBoundary)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupRange {
    /// Matched substring `[start, end)`.
    Closed { start: usize, end: usize },
    /// Opened at the given index and not yet closed.
    Open(usize),
}

/// Finite map from group index to its current range. Absent groups have no
/// entry.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GroupMap(BTreeMap<GroupId, GroupRange>);

impl GroupMap {
    pub fn new() -> GroupMap {
        GroupMap::default()
    }

    pub fn get(&self, g: GroupId) -> Option<GroupRange> {
        self.0.get(&g).copied()
    }

    pub fn closed(&self, g: GroupId) -> Option<(usize, usize)> {
        match self.get(g) {
            Some(GroupRange::Closed { start, end }) => Some((start, end)),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GroupId, GroupRange)> + '_ {
        self.0.iter().map(|(g, r)| (*g, *r))
    }

    pub fn set(&mut self, g: GroupId, range: GroupRange) {
        self.0.insert(g, range);
    }

    pub fn open(&self, g: GroupId, idx: usize) -> GroupMap {
        let mut gm = self.clone();
        gm.0.insert(g, GroupRange::Open(idx));
        gm
    }

    /// Closes an open group at `idx`. The range is normalized so that it
    /// also works for groups matched backwards.
    pub fn close(&self, g: GroupId, idx: usize) -> GroupMap {
        let mut gm = self.clone();
        if let Some(GroupRange::Open(s)) = gm.0.get(&g).copied() {
            gm.0.insert(
                g,
                GroupRange::Closed {
                    start: s.min(idx),
                    end: s.max(idx),
                },
            );
        }
        gm
    }

    pub fn reset(&self, groups: &[GroupId]) -> GroupMap {
        if groups.iter().all(|g| !self.0.contains_key(g)) {
            return self.clone();
        }
        let mut gm = self.clone();
        for g in groups {
            gm.0.remove(g);
        }
        gm
    }

    /// JSON object `{"g": [start, end] | null}` over `groups`.
    pub fn to_json(&self, groups: &[GroupId]) -> Value {
        let mut m = Map::new();
        for g in groups {
            let v = match self.get(*g) {
                Some(GroupRange::Closed { start, end }) => json!([start, end]),
                _ => Value::Null,
            };
            m.insert(g.to_string(), v);
        }
        Value::Object(m)
    }
}

impl fmt::Display for GroupMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (g, r)) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            match r {
                GroupRange::Closed { start, end } => write!(f, "{g}: [{start},{end}]")?,
                GroupRange::Open(s) => write!(f, "{g}: [{s},?]")?,
            }
        }
        f.write_str("}")
    }
}

/// Reads the text of group `g` in direction `d`. An absent or still-open
/// group matches the empty string.
pub fn read_backref(gm: &GroupMap, g: GroupId, i: &Input, flags: Flags, d: Direction) -> Option<Input> {
    let Some((s, e)) = gm.closed(g) else {
        return Some(i.clone());
    };
    let len = e - s;
    let text = i.text();
    let from = match d {
        Direction::Forward => {
            if i.idx() + len > text.len() {
                return None;
            }
            i.idx()
        }
        Direction::Backward => i.idx().checked_sub(len)?,
    };
    let same = (0..len).all(|k| {
        let (a, b) = (text[s + k], text[from + k]);
        a == b || (flags.ignore_case && fold(a) == fold(b))
    });
    if !same {
        return None;
    }
    Some(match d {
        Direction::Forward => i.at(from + len),
        Direction::Backward => i.at(from),
    })
}

/// A successful match: the final position and the group map.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Leaf {
    pub input: Input,
    pub groups: GroupMap,
}

impl Leaf {
    pub fn end(&self) -> usize {
        self.input.idx()
    }

    pub fn to_json(&self, groups: &[GroupId]) -> Value {
        json!({ "end": self.end(), "groups": self.groups.to_json(groups) })
    }
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "end={} groups={}", self.end(), self.groups)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zipper_views() {
        let i = Input::new("abc", 1).unwrap();
        assert_eq!(i.next(), &[b'b' as u16, b'c' as u16]);
        assert_eq!(i.prev().collect::<Vec<_>>(), vec![b'a' as u16]);
        assert!(Input::new("abc", 4).is_none());
        assert!(Input::new("", 0).unwrap().at_end(Direction::Forward));
    }

    #[test]
    fn advance_both_ways() {
        let i = Input::new("ab", 1).unwrap();
        let a = CharDescriptor::Single(b'a' as u16);
        let b = CharDescriptor::Single(b'b' as u16);
        assert_eq!(i.advance(&b, Flags::default(), Direction::Forward).unwrap().idx(), 2);
        assert_eq!(i.advance(&a, Flags::default(), Direction::Backward).unwrap().idx(), 0);
        assert!(i.advance(&a, Flags::default(), Direction::Forward).is_none());
    }

    #[test]
    fn anchors() {
        let f = Flags::default();
        let m = Flags {
            multiline: true,
            ..f
        };
        let i = Input::new("a\nb", 2).unwrap();
        assert!(!check_anchor(Anchor::InputStart, &i, f));
        assert!(check_anchor(Anchor::InputStart, &i, m));
        let w = Input::new("ab c", 2).unwrap();
        assert!(check_anchor(Anchor::WordBoundary, &w, f));
        assert!(!check_anchor(Anchor::NotWordBoundary, &w, f));
    }

    #[test]
    fn group_close_normalizes() {
        let gm = GroupMap::new().open(1, 5).close(1, 2);
        assert_eq!(gm.closed(1), Some((2, 5)));
        assert_eq!(gm.reset(&[1]), GroupMap::new());
    }

    #[test]
    fn backrefs() {
        let mut gm = GroupMap::new();
        gm.set(1, GroupRange::Closed { start: 0, end: 2 });
        let i = Input::new("abAB", 2).unwrap();
        let f = Flags::default();
        assert!(read_backref(&gm, 1, &i, f, Direction::Forward).is_none());
        let fi = Flags {
            ignore_case: true,
            ..f
        };
        assert_eq!(read_backref(&gm, 1, &i, fi, Direction::Forward).unwrap().idx(), 4);
        assert_eq!(read_backref(&gm, 1, &i, f, Direction::Backward).unwrap().idx(), 0);
        assert_eq!(read_backref(&GroupMap::new(), 1, &i, f, Direction::Forward).unwrap(), i);
        let open = GroupMap::new().open(1, 0);
        assert_eq!(read_backref(&open, 1, &i, f, Direction::Forward).unwrap(), i);
    }
}
