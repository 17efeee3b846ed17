use super::ast::{Anchor, Char, CharDescriptor, ClassItem, Delta, Quantity, Regex};

/// Renders `r` as a JavaScript pattern. Parsing the result yields `r` back
/// whenever the groups of `r` are numbered 1, 2, ... in textual order.
pub fn unparse(r: &Regex) -> String {
    let mut out = String::new();
    disjunction(r, &mut out);
    out
}

fn disjunction(r: &Regex, out: &mut String) {
    match r {
        Regex::Disjunction(a, b) => {
            if matches!(**a, Regex::Disjunction(..)) {
                wrapped(a, out);
            } else {
                alternative(a, out);
            }
            out.push('|');
            disjunction(b, out);
        }
        _ => alternative(r, out),
    }
}

fn alternative(r: &Regex, out: &mut String) {
    if let Regex::Epsilon = r {
        return;
    }
    let mut parts = Vec::new();
    let mut cur = r;
    while let Regex::Sequence(a, b) = cur {
        parts.push(&**a);
        cur = b;
    }
    parts.push(cur);
    let single = parts.len() == 1;
    for (k, part) in parts.iter().enumerate() {
        let next_digit = parts
            .get(k + 1)
            .map(|p| term_string(p, single))
            .is_some_and(|s| s.starts_with(|c: char| c.is_ascii_digit()));
        match part {
            Regex::Backref(_) if next_digit => wrapped(part, out),
            _ => out.push_str(&term_string(part, single)),
        }
    }
}

fn term_string(r: &Regex, only: bool) -> String {
    let mut s = String::new();
    match r {
        Regex::Epsilon if only => {}
        Regex::Epsilon | Regex::Sequence(..) | Regex::Disjunction(..) => wrapped(r, &mut s),
        _ => term(r, &mut s),
    }
    s
}

fn wrapped(r: &Regex, out: &mut String) {
    out.push_str("(?:");
    disjunction(r, out);
    out.push(')');
}

fn term(r: &Regex, out: &mut String) {
    match r {
        Regex::Epsilon | Regex::Sequence(..) | Regex::Disjunction(..) => wrapped(r, out),
        Regex::Char(cd) => descriptor(cd, out),
        Regex::Group(_, inner) => {
            out.push('(');
            disjunction(inner, out);
            out.push(')');
        }
        Regex::Anchor(a) => out.push_str(match a {
            Anchor::InputStart => "^",
            Anchor::InputEnd => "$",
            Anchor::WordBoundary => "\\b",
            Anchor::NotWordBoundary => "\\B",
        }),
        Regex::Backref(g) => out.push_str(&format!("\\{g}")),
        Regex::Look(lk, inner) => {
            out.push_str(lk.opener());
            disjunction(inner, out);
            out.push(')');
        }
        Regex::Quantified(inner, q) => {
            match &**inner {
                Regex::Char(_) | Regex::Group(..) | Regex::Backref(_) => term(inner, out),
                _ => wrapped(inner, out),
            }
            quantifier(q, out);
        }
    }
}

fn quantifier(q: &Quantity, out: &mut String) {
    match (q.min, q.delta) {
        (0, Delta::Infinite) => out.push('*'),
        (1, Delta::Infinite) => out.push('+'),
        (0, Delta::Finite(1)) => out.push('?'),
        (m, Delta::Finite(0)) => out.push_str(&format!("{{{m}}}")),
        (m, Delta::Infinite) => out.push_str(&format!("{{{m},}}")),
        (m, Delta::Finite(d)) => out.push_str(&format!("{{{m},{}}}", m + d)),
    }
    if !q.greedy {
        out.push('?');
    }
}

fn push_char(c: Char, specials: &str, out: &mut String) {
    match char::from_u32(c as u32) {
        Some(ch) if specials.contains(ch) => {
            out.push('\\');
            out.push(ch);
        }
        Some(ch) if (' '..='~').contains(&ch) => out.push(ch),
        _ => out.push_str(&format!("\\u{c:04X}")),
    }
}

fn descriptor(cd: &CharDescriptor, out: &mut String) {
    match cd {
        CharDescriptor::Single(c) => push_char(*c, "^$\\.*+?()[]{}|/", out),
        CharDescriptor::Dot => out.push('.'),
        CharDescriptor::Escape(e) => {
            out.push('\\');
            out.push(e.letter());
        }
        CharDescriptor::Class { items, negated } => {
            out.push('[');
            if *negated {
                out.push('^');
            }
            for item in items {
                match item {
                    ClassItem::Range(lo, hi) => {
                        push_char(*lo, "\\]^-[", out);
                        if lo != hi {
                            out.push('-');
                            push_char(*hi, "\\]^-[", out);
                        }
                    }
                    ClassItem::Escape(e) => {
                        out.push('\\');
                        out.push(e.letter());
                    }
                }
            }
            out.push(']');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;
    use super::*;

    #[test]
    fn round_trips() {
        for p in [
            "",
            "a|b|c",
            "(?:a|b)|c",
            "(?:ab)c",
            "a(?:)b",
            "(a)\\1(?:\\1)0",
            "(?:a*)*",
            "[^a-z\\]\\-]x{2,5}?",
            "(?<=a|b)(?!c)\\b\\B^$",
            "(?:(?=a))*",
            "\\u00E9.\\{",
            "(?:)*",
        ] {
            let r = parse(p).unwrap();
            let text = unparse(&r);
            assert_eq!(parse(&text).unwrap(), r, "{p} -> {text}");
        }
    }
}
