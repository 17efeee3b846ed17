use std::collections::HashMap;

use thiserror::Error;

use super::ast::{
    Anchor, Char, CharDescriptor, ClassEscape, ClassItem, Delta, GroupId, LookKind, Quantity, Regex,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at offset {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parser output: the AST plus group bookkeeping.
#[derive(Clone, Debug)]
pub struct Parsed {
    pub regex: Regex,
    pub group_count: u32,
    pub names: Vec<(String, GroupId)>,
}

/// Parses a JavaScript pattern body in non-unicode mode. Legacy octal
/// escapes and quantified lookaheads are rejected.
pub fn parse(pattern: &str) -> Result<Regex, ParseError> {
    parse_full(pattern).map(|p| p.regex)
}

pub fn parse_full(pattern: &str) -> Result<Parsed, ParseError> {
    let src: Vec<Char> = pattern.encode_utf16().collect();
    let (group_count, names) = prescan(&src);
    for (k, (name, _)) in names.iter().enumerate() {
        if names[..k].iter().any(|(n, _)| n == name) {
            return Err(ParseError {
                pos: 0,
                msg: format!("duplicate group name '{name}'"),
            });
        }
    }
    let mut p = Parser {
        src,
        pos: 0,
        next_group: 1,
        group_count,
        names: names.iter().cloned().collect(),
    };
    let regex = p.disjunction()?;
    if p.pos < p.src.len() {
        return Err(p.err(if p.peek() == Some(')' as Char) {
            "unmatched ')'"
        } else {
            "unexpected character"
        }));
    }
    Ok(Parsed {
        regex,
        group_count,
        names,
    })
}

/// Counts capture groups and collects group names ahead of parsing so that
/// forward references resolve.
fn prescan(src: &[Char]) -> (u32, Vec<(String, GroupId)>) {
    let mut count = 0;
    let mut names = Vec::new();
    let mut i = 0;
    let mut in_class = false;
    while i < src.len() {
        let c = src[i];
        if c == '\\' as Char {
            i += 2;
            continue;
        }
        if in_class {
            if c == ']' as Char {
                in_class = false;
            }
        } else if c == '[' as Char {
            in_class = true;
        } else if c == '(' as Char {
            if src.get(i + 1) != Some(&('?' as Char)) {
                count += 1;
            } else if src.get(i + 2) == Some(&('<' as Char))
                && !matches!(src.get(i + 3).map(|&c| c as u8 as char), Some('=') | Some('!'))
            {
                count += 1;
                let mut j = i + 3;
                let mut name = String::new();
                while j < src.len() && src[j] != '>' as Char {
                    name.push(char::from_u32(src[j] as u32).unwrap_or('\u{fffd}'));
                    j += 1;
                }
                names.push((name, count));
            }
        }
        i += 1;
    }
    (count, names)
}

struct Parser {
    src: Vec<Char>,
    pos: usize,
    next_group: GroupId,
    group_count: u32,
    names: HashMap<String, GroupId>,
}

fn is(c: Option<Char>, ch: char) -> bool {
    c == Some(ch as Char)
}

impl Parser {
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<Char> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<Char> {
        self.src.get(self.pos + k).copied()
    }

    fn eat(&mut self, ch: char) -> bool {
        if is(self.peek(), ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn starts_with(&self, s: &str) -> bool {
        s.encode_utf16()
            .enumerate()
            .all(|(k, c)| self.peek_at(k) == Some(c))
    }

    fn disjunction(&mut self) -> Result<Regex, ParseError> {
        let first = self.alternative()?;
        if self.eat('|') {
            let rest = self.disjunction()?;
            Ok(Regex::disj(first, rest))
        } else {
            Ok(first)
        }
    }

    fn alternative(&mut self) -> Result<Regex, ParseError> {
        let mut terms = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' as Char || c == ')' as Char {
                break;
            }
            terms.push(self.term()?);
        }
        Ok(Regex::seq_all(terms))
    }

    fn term(&mut self) -> Result<Regex, ParseError> {
        let start = self.pos;
        let (atom, quantifiable) = self.atom()?;
        match self.quantifier()? {
            Some(q) => {
                if !quantifiable {
                    self.pos = start;
                    return Err(self.err("nothing to repeat"));
                }
                Ok(Regex::quant(atom, q))
            }
            None => Ok(atom),
        }
    }

    fn atom(&mut self) -> Result<(Regex, bool), ParseError> {
        let c = self.peek().expect("atom called at end of input");
        match c as u8 as char {
            _ if c > 0x7f => {
                self.pos += 1;
                Ok((Regex::Char(CharDescriptor::Single(c)), true))
            }
            '^' => {
                self.pos += 1;
                Ok((Regex::Anchor(Anchor::InputStart), false))
            }
            '$' => {
                self.pos += 1;
                Ok((Regex::Anchor(Anchor::InputEnd), false))
            }
            '.' => {
                self.pos += 1;
                Ok((Regex::Char(CharDescriptor::Dot), true))
            }
            '(' => self.group(),
            '[' => Ok((Regex::Char(self.class()?), true)),
            '\\' => self.escape(),
            '*' | '+' | '?' => Err(self.err("nothing to repeat")),
            '{' => {
                if self.try_braces().is_some() {
                    Err(self.err("nothing to repeat"))
                } else {
                    self.pos += 1;
                    Ok((Regex::Char(CharDescriptor::Single(c)), true))
                }
            }
            _ => {
                self.pos += 1;
                Ok((Regex::Char(CharDescriptor::Single(c)), true))
            }
        }
    }

    fn group(&mut self) -> Result<(Regex, bool), ParseError> {
        let open = self.pos;
        self.pos += 1;
        let (result, quantifiable) = if self.eat('?') {
            if self.eat(':') {
                (self.disjunction()?, true)
            } else if self.eat('=') {
                (Regex::look(LookKind::Lookahead, self.disjunction()?), false)
            } else if self.eat('!') {
                (Regex::look(LookKind::NegLookahead, self.disjunction()?), false)
            } else if self.starts_with("<=") {
                self.pos += 2;
                (Regex::look(LookKind::Lookbehind, self.disjunction()?), false)
            } else if self.starts_with("<!") {
                self.pos += 2;
                (Regex::look(LookKind::NegLookbehind, self.disjunction()?), false)
            } else if self.eat('<') {
                self.group_name()?;
                let g = self.next_group;
                self.next_group += 1;
                (Regex::group(g, self.disjunction()?), true)
            } else {
                return Err(self.err("invalid group"));
            }
        } else {
            let g = self.next_group;
            self.next_group += 1;
            (Regex::group(g, self.disjunction()?), true)
        };
        if !self.eat(')') {
            self.pos = open;
            return Err(self.err("unterminated group"));
        }
        Ok((result, quantifiable))
    }

    fn group_name(&mut self) -> Result<String, ParseError> {
        let mut name = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err("unterminated group name")),
                Some(c) if c == '>' as Char => {
                    self.pos += 1;
                    break;
                }
                Some(c) => {
                    let ch = char::from_u32(c as u32).unwrap_or('\u{fffd}');
                    let ok = if name.is_empty() {
                        ch.is_alphabetic() || ch == '$' || ch == '_'
                    } else {
                        ch.is_alphanumeric() || ch == '$' || ch == '_'
                    };
                    if !ok {
                        return Err(self.err("invalid group name"));
                    }
                    name.push(ch);
                    self.pos += 1;
                }
            }
        }
        if name.is_empty() {
            return Err(self.err("empty group name"));
        }
        Ok(name)
    }

    fn decimal(&mut self) -> Option<u32> {
        let start = self.pos;
        let mut n: u32 = 0;
        while let Some(c) = self.peek() {
            if (b'0' as Char..=b'9' as Char).contains(&c) {
                n = n.saturating_mul(10).saturating_add((c - b'0' as Char) as u32);
                self.pos += 1;
            } else {
                break;
            }
        }
        (self.pos > start).then_some(n)
    }

    /// Parses `{n}`, `{n,}` or `{n,m}` at the cursor. On failure the cursor
    /// is restored and `None` is returned.
    fn try_braces(&mut self) -> Option<(u32, Option<u32>)> {
        let save = self.pos;
        let res = (|| {
            if !self.eat('{') {
                return None;
            }
            let lo = self.decimal()?;
            let hi = if self.eat(',') {
                if is(self.peek(), '}') {
                    None
                } else {
                    Some(self.decimal()?)
                }
            } else {
                Some(lo)
            };
            self.eat('}').then_some((lo, hi))
        })();
        if res.is_none() {
            self.pos = save;
        }
        res
    }

    fn quantifier(&mut self) -> Result<Option<Quantity>, ParseError> {
        let start = self.pos;
        let (min, delta) = match self.peek().map(|c| c as u8 as char) {
            Some('*') if self.peek().unwrap() < 0x80 => {
                self.pos += 1;
                (0, Delta::Infinite)
            }
            Some('+') if self.peek().unwrap() < 0x80 => {
                self.pos += 1;
                (1, Delta::Infinite)
            }
            Some('?') if self.peek().unwrap() < 0x80 => {
                self.pos += 1;
                (0, Delta::Finite(1))
            }
            Some('{') if self.peek().unwrap() < 0x80 => match self.try_braces() {
                Some((lo, None)) => (lo, Delta::Infinite),
                Some((lo, Some(hi))) => {
                    if hi < lo {
                        self.pos = start;
                        return Err(self.err("numbers out of order in quantifier"));
                    }
                    (lo, Delta::Finite(hi - lo))
                }
                None => return Ok(None),
            },
            _ => return Ok(None),
        };
        let greedy = !self.eat('?');
        Ok(Some(Quantity::new(min, delta, greedy)))
    }

    fn escape(&mut self) -> Result<(Regex, bool), ParseError> {
        self.pos += 1;
        let Some(c) = self.peek() else {
            return Err(self.err("\\ at end of pattern"));
        };
        let ch = char::from_u32(c as u32).unwrap_or('\u{fffd}');
        match ch {
            'b' => {
                self.pos += 1;
                Ok((Regex::Anchor(Anchor::WordBoundary), false))
            }
            'B' => {
                self.pos += 1;
                Ok((Regex::Anchor(Anchor::NotWordBoundary), false))
            }
            '1'..='9' => {
                let save = self.pos;
                let n = self.decimal().unwrap();
                if n <= self.group_count {
                    return Ok((Regex::Backref(n), true));
                }
                self.pos = save;
                Err(self.err("backreference to a nonexistent group"))
            }
            'k' if self.starts_with("k<") => {
                if self.names.is_empty() {
                    return Err(self.err("\\k<name> requires named groups"));
                }
                self.pos += 2;
                let name = self.group_name()?;
                match self.names.get(&name) {
                    Some(&g) => Ok((Regex::Backref(g), true)),
                    None => Err(self.err("reference to unknown group name")),
                }
            }
            'k' if !self.names.is_empty() => Err(self.err("invalid named reference")),
            _ => {
                if let Some(e) = ClassEscape::from_letter(ch) {
                    self.pos += 1;
                    return Ok((Regex::Char(CharDescriptor::Escape(e)), true));
                }
                let c = self.char_escape()?;
                Ok((Regex::Char(CharDescriptor::Single(c)), true))
            }
        }
    }

    fn hex(&mut self, n: usize) -> Option<Char> {
        let mut v: u32 = 0;
        for k in 0..n {
            let c = self.peek_at(k)?;
            let d = char::from_u32(c as u32)?.to_digit(16)?;
            v = v * 16 + d;
        }
        self.pos += n;
        Some(v as Char)
    }

    /// Character escapes shared by atoms and class members. The cursor is
    /// just past the backslash.
    fn char_escape(&mut self) -> Result<Char, ParseError> {
        let c = self.peek().unwrap();
        let ch = char::from_u32(c as u32).unwrap_or('\u{fffd}');
        self.pos += 1;
        Ok(match ch {
            't' => 0x09,
            'n' => 0x0a,
            'v' => 0x0b,
            'f' => 0x0c,
            'r' => 0x0d,
            '0' if !self.peek().is_some_and(|d| ('0' as Char..='9' as Char).contains(&d)) => 0,
            '0'..='9' => {
                self.pos -= 1;
                return Err(self.err("octal escapes are not supported"));
            }
            'c' => match self.peek() {
                Some(l) if (l as u8).is_ascii_alphabetic() && l < 0x80 => {
                    self.pos += 1;
                    l % 32
                }
                _ => {
                    self.pos -= 1;
                    '\\' as Char
                }
            },
            'x' => self.hex(2).unwrap_or('x' as Char),
            'u' => self.hex(4).unwrap_or('u' as Char),
            _ => c,
        })
    }

    fn class(&mut self) -> Result<CharDescriptor, ParseError> {
        let open = self.pos;
        self.pos += 1;
        let negated = self.eat('^');
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None => {
                    self.pos = open;
                    return Err(self.err("unterminated character class"));
                }
                Some(c) if c == ']' as Char => {
                    self.pos += 1;
                    break;
                }
                _ => {}
            }
            let lo = self.class_atom()?;
            if is(self.peek(), '-') && !is(self.peek_at(1), ']') && self.peek_at(1).is_some() {
                let save = self.pos;
                self.pos += 1;
                let hi = self.class_atom()?;
                match (lo, hi) {
                    (ClassItem::Range(a, _), ClassItem::Range(b, _)) => {
                        if a > b {
                            self.pos = save;
                            return Err(self.err("range out of order in character class"));
                        }
                        items.push(ClassItem::Range(a, b));
                    }
                    _ => {
                        items.push(lo);
                        items.push(ClassItem::Range('-' as Char, '-' as Char));
                        items.push(hi);
                    }
                }
            } else {
                items.push(lo);
            }
        }
        Ok(CharDescriptor::Class { items, negated })
    }

    fn class_atom(&mut self) -> Result<ClassItem, ParseError> {
        let c = self.peek().unwrap();
        self.pos += 1;
        if c != '\\' as Char {
            return Ok(ClassItem::Range(c, c));
        }
        let Some(e) = self.peek() else {
            return Err(self.err("\\ at end of pattern"));
        };
        let ch = char::from_u32(e as u32).unwrap_or('\u{fffd}');
        if let Some(esc) = ClassEscape::from_letter(ch) {
            self.pos += 1;
            return Ok(ClassItem::Escape(esc));
        }
        let v = match ch {
            'b' => {
                self.pos += 1;
                0x08
            }
            '-' => {
                self.pos += 1;
                '-' as Char
            }
            '1'..='9' => return Err(self.err("octal escapes are not supported")),
            _ => self.char_escape()?,
        };
        Ok(ClassItem::Range(v, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sx(p: &str) -> String {
        parse(p).unwrap().sexpr()
    }

    #[test]
    fn quantifier_desugaring() {
        assert_eq!(sx("a*"), "(quant 0 inf greedy (char a))");
        assert_eq!(sx("a+?"), "(quant 1 inf lazy (char a))");
        assert_eq!(sx("a?"), "(quant 0 1 greedy (char a))");
        assert_eq!(sx("a{3}"), "(quant 3 0 greedy (char a))");
        assert_eq!(sx("a{2,}"), "(quant 2 inf greedy (char a))");
        assert_eq!(sx("a{2,5}?"), "(quant 2 3 lazy (char a))");
    }

    #[test]
    fn structure() {
        assert_eq!(sx(""), "eps");
        assert_eq!(sx("a|b|c"), "(alt (char a) (alt (char b) (char c)))");
        assert_eq!(sx("abc"), "(seq (char a) (seq (char b) (char c)))");
        assert_eq!(sx("(?:ab)c"), "(seq (seq (char a) (char b)) (char c))");
        assert_eq!(sx("(a)(b)\\2"), "(seq (group 1 (char a)) (seq (group 2 (char b)) (backref 2)))");
        assert_eq!(sx("a|"), "(alt (char a) eps)");
        assert_eq!(sx("(?<=a)(?!b)"), "(seq (look behind (char a)) (look neg-ahead (char b)))");
    }

    #[test]
    fn named_groups() {
        assert_eq!(sx("(?<x>a)\\k<x>"), "(seq (group 1 (char a)) (backref 1))");
        assert!(parse("\\k<x>").is_err());
        assert!(parse("(?<x>a)\\k<y>").is_err());
    }

    #[test]
    fn literal_braces_and_forward_refs() {
        assert_eq!(sx("a{"), "(seq (char a) (char {))");
        assert_eq!(sx("]"), "(char ])");
        assert_eq!(sx("\\1(a)"), "(seq (backref 1) (group 1 (char a)))");
        assert_eq!(sx("\\0"), "(char \\u{0000})");
    }

    #[test]
    fn classes() {
        assert_eq!(sx("[a-c\\d-]"), "(char [a-c\\d-])");
        assert_eq!(sx("[^]"), "(char [^])");
        assert_eq!(sx("[\\w-z]"), "(char [\\w-z])");
        assert!(parse("[z-a]").is_err());
    }

    #[test]
    fn errors() {
        for bad in ["(", "a)", "*", "a**", "^*", "(?<=a)+", "[a", "a{2,1}", "\\", "(?<>a)", "\\2(a)", "\\01", "(?=a)*", "(?<x>a)(?<x>b)"] {
            assert!(parse(bad).is_err(), "{bad} should not parse");
        }
    }
}
