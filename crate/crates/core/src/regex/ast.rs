use std::fmt;
use std::sync::Arc;

/// One UTF-16 code unit. Patterns and subjects are processed in
/// non-unicode mode, so every code unit is one character.
pub type Char = u16;

/// Capture group index. Groups are numbered from 1.
pub type GroupId = u32;

/// Character class escapes usable both standalone and inside brackets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassEscape {
    Word,
    NotWord,
    Digit,
    NotDigit,
    Space,
    NotSpace,
}

impl ClassEscape {
    pub fn letter(self) -> char {
        match self {
            ClassEscape::Word => 'w',
            ClassEscape::NotWord => 'W',
            ClassEscape::Digit => 'd',
            ClassEscape::NotDigit => 'D',
            ClassEscape::Space => 's',
            ClassEscape::NotSpace => 'S',
        }
    }

    pub fn from_letter(c: char) -> Option<ClassEscape> {
        Some(match c {
            'w' => ClassEscape::Word,
            'W' => ClassEscape::NotWord,
            'd' => ClassEscape::Digit,
            'D' => ClassEscape::NotDigit,
            's' => ClassEscape::Space,
            'S' => ClassEscape::NotSpace,
            _ => return None,
        })
    }
}

/// A member of a bracketed character class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassItem {
    /// Inclusive range; a single character is `Range(c, c)`.
    Range(Char, Char),
    Escape(ClassEscape),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CharDescriptor {
    Single(Char),
    Dot,
    Class { items: Vec<ClassItem>, negated: bool },
    Escape(ClassEscape),
}

impl CharDescriptor {
    /// The descriptor matching every character regardless of flags (`[^]`).
    pub fn all() -> CharDescriptor {
        CharDescriptor::Class {
            items: Vec::new(),
            negated: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Anchor {
    InputStart,
    InputEnd,
    WordBoundary,
    NotWordBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LookKind {
    Lookahead,
    NegLookahead,
    Lookbehind,
    NegLookbehind,
}

impl LookKind {
    pub fn is_positive(self) -> bool {
        matches!(self, LookKind::Lookahead | LookKind::Lookbehind)
    }

    pub fn is_ahead(self) -> bool {
        matches!(self, LookKind::Lookahead | LookKind::NegLookahead)
    }

    pub fn opener(self) -> &'static str {
        match self {
            LookKind::Lookahead => "(?=",
            LookKind::NegLookahead => "(?!",
            LookKind::Lookbehind => "(?<=",
            LookKind::NegLookbehind => "(?<!",
        }
    }
}

/// Difference between the maximum and minimum repetition count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Delta {
    Finite(u32),
    Infinite,
}

impl Delta {
    pub fn is_zero(self) -> bool {
        self == Delta::Finite(0)
    }

    /// `Some(d)` such that `self = d + 1`; `∞ = ∞ + 1`.
    pub fn pred(self) -> Option<Delta> {
        match self {
            Delta::Finite(0) => None,
            Delta::Finite(n) => Some(Delta::Finite(n - 1)),
            Delta::Infinite => Some(Delta::Infinite),
        }
    }

    /// Addition with `n + ∞ = ∞ + ∞ = ∞`.
    pub fn add(self, other: Delta) -> Delta {
        match (self, other) {
            (Delta::Finite(a), Delta::Finite(b)) => Delta::Finite(a + b),
            _ => Delta::Infinite,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Quantity {
    pub min: u32,
    pub delta: Delta,
    pub greedy: bool,
}

impl Quantity {
    pub fn new(min: u32, delta: Delta, greedy: bool) -> Quantity {
        Quantity { min, delta, greedy }
    }

    pub fn star() -> Quantity {
        Quantity::new(0, Delta::Infinite, true)
    }

    pub fn lazy_star() -> Quantity {
        Quantity::new(0, Delta::Infinite, false)
    }

    pub fn is_star(&self) -> bool {
        self.min == 0 && self.delta == Delta::Infinite
    }

    pub fn max(&self) -> Option<u32> {
        match self.delta {
            Delta::Finite(d) => Some(self.min + d),
            Delta::Infinite => None,
        }
    }
}

/// Abstract regex syntax. Subterms are reference counted so that the
/// semantics can build derived quantifiers (`r{min-1,Δ}`) without copying.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Regex {
    Epsilon,
    Char(CharDescriptor),
    Disjunction(Arc<Regex>, Arc<Regex>),
    Sequence(Arc<Regex>, Arc<Regex>),
    Group(GroupId, Arc<Regex>),
    Anchor(Anchor),
    Backref(GroupId),
    Quantified(Arc<Regex>, Quantity),
    Look(LookKind, Arc<Regex>),
}

impl Regex {
    pub fn char(c: char) -> Regex {
        Regex::Char(CharDescriptor::Single(c as Char))
    }

    pub fn disj(r1: Regex, r2: Regex) -> Regex {
        Regex::Disjunction(Arc::new(r1), Arc::new(r2))
    }

    pub fn seq(r1: Regex, r2: Regex) -> Regex {
        Regex::Sequence(Arc::new(r1), Arc::new(r2))
    }

    /// Right-nested sequence of the given parts; `ε` when empty.
    pub fn seq_all(parts: impl IntoIterator<Item = Regex>) -> Regex {
        let mut parts: Vec<Regex> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Regex::Epsilon;
        };
        while let Some(r) = parts.pop() {
            acc = Regex::seq(r, acc);
        }
        acc
    }

    pub fn group(g: GroupId, r: Regex) -> Regex {
        Regex::Group(g, Arc::new(r))
    }

    pub fn quant(r: Regex, q: Quantity) -> Regex {
        Regex::Quantified(Arc::new(r), q)
    }

    pub fn look(lk: LookKind, r: Regex) -> Regex {
        Regex::Look(lk, Arc::new(r))
    }

    /// Group indices defined in `self`, in opening-parenthesis order.
    pub fn def_groups(&self) -> Vec<GroupId> {
        let mut out = Vec::new();
        self.collect_groups(&mut out);
        out
    }

    fn collect_groups(&self, out: &mut Vec<GroupId>) {
        match self {
            Regex::Epsilon | Regex::Char(_) | Regex::Anchor(_) | Regex::Backref(_) => {}
            Regex::Disjunction(a, b) | Regex::Sequence(a, b) => {
                a.collect_groups(out);
                b.collect_groups(out);
            }
            Regex::Group(g, r) => {
                out.push(*g);
                r.collect_groups(out);
            }
            Regex::Quantified(r, _) | Regex::Look(_, r) => r.collect_groups(out),
        }
    }

    /// Backreference targets in traversal order.
    pub fn backrefs(&self) -> Vec<GroupId> {
        fn go(r: &Regex, out: &mut Vec<GroupId>) {
            match r {
                Regex::Epsilon | Regex::Char(_) | Regex::Anchor(_) => {}
                Regex::Backref(g) => out.push(*g),
                Regex::Disjunction(a, b) | Regex::Sequence(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Regex::Group(_, r) | Regex::Quantified(r, _) | Regex::Look(_, r) => go(r, out),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn has_backref(&self) -> bool {
        !self.backrefs().is_empty()
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Regex::Epsilon | Regex::Char(_) | Regex::Anchor(_) | Regex::Backref(_) => 1,
            Regex::Disjunction(a, b) | Regex::Sequence(a, b) => 1 + a.size() + b.size(),
            Regex::Group(_, r) | Regex::Quantified(r, _) | Regex::Look(_, r) => 1 + r.size(),
        }
    }

    /// Applies `f` to every group index and backreference target.
    pub fn map_groups(&self, f: &impl Fn(GroupId) -> GroupId) -> Regex {
        match self {
            Regex::Epsilon | Regex::Char(_) | Regex::Anchor(_) => self.clone(),
            Regex::Backref(g) => Regex::Backref(f(*g)),
            Regex::Disjunction(a, b) => Regex::disj(a.map_groups(f), b.map_groups(f)),
            Regex::Sequence(a, b) => Regex::seq(a.map_groups(f), b.map_groups(f)),
            Regex::Group(g, r) => Regex::group(f(*g), r.map_groups(f)),
            Regex::Quantified(r, q) => Regex::quant(r.map_groups(f), *q),
            Regex::Look(lk, r) => Regex::look(*lk, r.map_groups(f)),
        }
    }

    /// Canonical s-expression dump used by golden tests.
    pub fn sexpr(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(&mut s);
        s
    }

    fn write_sexpr(&self, out: &mut String) {
        match self {
            Regex::Epsilon => out.push_str("eps"),
            Regex::Char(cd) => {
                out.push_str("(char ");
                out.push_str(&cd_sexpr(cd));
                out.push(')');
            }
            Regex::Disjunction(a, b) => {
                out.push_str("(alt ");
                a.write_sexpr(out);
                out.push(' ');
                b.write_sexpr(out);
                out.push(')');
            }
            Regex::Sequence(a, b) => {
                out.push_str("(seq ");
                a.write_sexpr(out);
                out.push(' ');
                b.write_sexpr(out);
                out.push(')');
            }
            Regex::Group(g, r) => {
                out.push_str(&format!("(group {g} "));
                r.write_sexpr(out);
                out.push(')');
            }
            Regex::Anchor(a) => out.push_str(match a {
                Anchor::InputStart => "(anchor ^)",
                Anchor::InputEnd => "(anchor $)",
                Anchor::WordBoundary => "(anchor \\b)",
                Anchor::NotWordBoundary => "(anchor \\B)",
            }),
            Regex::Backref(g) => out.push_str(&format!("(backref {g})")),
            Regex::Quantified(r, q) => {
                let delta = match q.delta {
                    Delta::Finite(d) => d.to_string(),
                    Delta::Infinite => "inf".to_string(),
                };
                let p = if q.greedy { "greedy" } else { "lazy" };
                out.push_str(&format!("(quant {} {} {} ", q.min, delta, p));
                r.write_sexpr(out);
                out.push(')');
            }
            Regex::Look(lk, r) => {
                let name = match lk {
                    LookKind::Lookahead => "ahead",
                    LookKind::NegLookahead => "neg-ahead",
                    LookKind::Lookbehind => "behind",
                    LookKind::NegLookbehind => "neg-behind",
                };
                out.push_str(&format!("(look {name} "));
                r.write_sexpr(out);
                out.push(')');
            }
        }
    }
}

fn show_char(c: Char) -> String {
    match char::from_u32(c as u32) {
        Some(ch) if !ch.is_control() && ch != ' ' => ch.to_string(),
        _ => format!("\\u{{{c:04x}}}"),
    }
}

fn cd_sexpr(cd: &CharDescriptor) -> String {
    match cd {
        CharDescriptor::Single(c) => show_char(*c),
        CharDescriptor::Dot => ".".into(),
        CharDescriptor::Escape(e) => format!("\\{}", e.letter()),
        CharDescriptor::Class { items, negated } => {
            let mut s = String::from(if *negated { "[^" } else { "[" });
            for item in items {
                match item {
                    ClassItem::Range(lo, hi) if lo == hi => s.push_str(&show_char(*lo)),
                    ClassItem::Range(lo, hi) => {
                        s.push_str(&show_char(*lo));
                        s.push('-');
                        s.push_str(&show_char(*hi));
                    }
                    ClassItem::Escape(e) => {
                        s.push('\\');
                        s.push(e.letter());
                    }
                }
            }
            s.push(']');
            s
        }
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::unparse::unparse(self))
    }
}

/// Regex flags that influence matching (`i`, `m`, `s`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Flags {
    pub ignore_case: bool,
    pub multiline: bool,
    pub dot_all: bool,
}

impl Flags {
    /// Parses a flag string such as `"im"` or `"i,m,s"`.
    pub fn parse(s: &str) -> Result<Flags, String> {
        let mut flags = Flags::default();
        for c in s.chars() {
            match c {
                'i' => flags.ignore_case = true,
                'm' => flags.multiline = true,
                's' => flags.dot_all = true,
                ',' | ' ' => {}
                other => return Err(format!("unsupported flag '{other}'")),
            }
        }
        Ok(flags)
    }
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ignore_case {
            f.write_str("i")?;
        }
        if self.multiline {
            f.write_str("m")?;
        }
        if self.dot_all {
            f.write_str("s")?;
        }
        Ok(())
    }
}
