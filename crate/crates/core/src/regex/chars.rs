use super::ast::{Char, CharDescriptor, ClassEscape, ClassItem, Flags};

/// Case canonicalization used under the `i` flag (ASCII upper-casing).
pub fn fold(c: Char) -> Char {
    if (b'a' as Char..=b'z' as Char).contains(&c) {
        c - 32
    } else {
        c
    }
}

fn other_case(c: Char) -> Char {
    if (b'a' as Char..=b'z' as Char).contains(&c) {
        c - 32
    } else if (b'A' as Char..=b'Z' as Char).contains(&c) {
        c + 32
    } else {
        c
    }
}

pub fn is_line_terminator(c: Char) -> bool {
    matches!(c, 0x0a | 0x0d | 0x2028 | 0x2029)
}

pub fn is_word_char(c: Char) -> bool {
    c < 0x80 && ((c as u8).is_ascii_alphanumeric() || c == b'_' as Char)
}

fn is_space(c: Char) -> bool {
    matches!(
        c,
        0x09..=0x0d | 0x20 | 0xa0 | 0x1680 | 0x2000..=0x200a | 0x2028 | 0x2029 | 0x202f | 0x205f
            | 0x3000 | 0xfeff
    )
}

impl ClassEscape {
    pub fn contains(self, c: Char) -> bool {
        match self {
            ClassEscape::Word => is_word_char(c),
            ClassEscape::NotWord => !is_word_char(c),
            ClassEscape::Digit => (b'0' as Char..=b'9' as Char).contains(&c),
            ClassEscape::NotDigit => !(b'0' as Char..=b'9' as Char).contains(&c),
            ClassEscape::Space => is_space(c),
            ClassEscape::NotSpace => !is_space(c),
        }
    }
}

impl CharDescriptor {
    /// Whether the descriptor accepts `c` under `flags`.
    pub fn matches(&self, c: Char, flags: Flags) -> bool {
        match self {
            CharDescriptor::Single(x) => {
                if flags.ignore_case {
                    fold(*x) == fold(c)
                } else {
                    *x == c
                }
            }
            CharDescriptor::Dot => flags.dot_all || !is_line_terminator(c),
            CharDescriptor::Escape(e) => {
                e.contains(c) || (flags.ignore_case && e.contains(other_case(c)))
            }
            CharDescriptor::Class { items, negated } => {
                let member = |c: Char| {
                    items.iter().any(|item| match item {
                        ClassItem::Range(lo, hi) => (*lo..=*hi).contains(&c),
                        ClassItem::Escape(e) => e.contains(c),
                    })
                };
                let hit = member(c) || (flags.ignore_case && member(other_case(c)));
                hit != *negated
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Flags = Flags {
        ignore_case: true,
        multiline: false,
        dot_all: false,
    };

    #[test]
    fn single_and_fold() {
        let a = CharDescriptor::Single(b'a' as Char);
        assert!(a.matches(b'a' as Char, Flags::default()));
        assert!(!a.matches(b'A' as Char, Flags::default()));
        assert!(a.matches(b'A' as Char, I));
    }

    #[test]
    fn dot_and_terminators() {
        assert!(!CharDescriptor::Dot.matches(0x0a, Flags::default()));
        assert!(!CharDescriptor::Dot.matches(0x2028, Flags::default()));
        let s = Flags {
            dot_all: true,
            ..Flags::default()
        };
        assert!(CharDescriptor::Dot.matches(0x0a, s));
    }

    #[test]
    fn classes_under_case_folding() {
        let cls = CharDescriptor::Class {
            items: vec![ClassItem::Range(b'a' as Char, b'c' as Char)],
            negated: true,
        };
        assert!(!cls.matches(b'b' as Char, Flags::default()));
        assert!(cls.matches(b'B' as Char, Flags::default()));
        assert!(!cls.matches(b'B' as Char, I));
        assert!(CharDescriptor::all().matches(0x0a, Flags::default()));
    }
}
