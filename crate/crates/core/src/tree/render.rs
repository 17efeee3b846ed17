use serde_json::{json, Value};

use super::{BacktrackTree, Node};
use crate::regex::{Anchor, Char, LookKind};

fn show(c: Char) -> String {
    match char::from_u32(c as u32) {
        Some(ch) if !ch.is_control() => ch.to_string(),
        _ => format!("\\u{c:04X}"),
    }
}

fn anchor(a: Anchor) -> &'static str {
    match a {
        Anchor::InputStart => "^",
        Anchor::InputEnd => "$",
        Anchor::WordBoundary => "\\b",
        Anchor::NotWordBoundary => "\\B",
    }
}

fn look(lk: LookKind) -> &'static str {
    match lk {
        LookKind::Lookahead => "(?=)",
        LookKind::NegLookahead => "(?!)",
        LookKind::Lookbehind => "(?<=)",
        LookKind::NegLookbehind => "(?<!)",
    }
}

pub(super) fn label(n: &Node) -> String {
    match n {
        Node::Match => "Match".into(),
        Node::Mismatch => "Mismatch".into(),
        Node::Choice(..) => "Choice".into(),
        Node::Read(c, _) => format!("Read {}", show(*c)),
        Node::ReadBackRef(s, _) => format!("Backref \"{}\"", String::from_utf16_lossy(s)),
        Node::Progress(_) => "Progress".into(),
        Node::AnchorPass(a, _) => format!("Anchor {}", anchor(*a)),
        Node::GroupOpen(g, _) => format!("Open {g}"),
        Node::GroupClose(g, _) => format!("Close {g}"),
        Node::GroupReset(gl, _) => {
            let gs: Vec<String> = gl.iter().map(|g| g.to_string()).collect();
            format!("Reset [{}]", gs.join(","))
        }
        Node::Lk(lk, ..) => format!("LK {}", look(*lk)),
        Node::LkFail(lk, _) => format!("LKFail {}", look(*lk)),
    }
}

/// Indented text form. Unary chains stay at one indentation level; the two
/// subtrees of a `Choice` (and the lookaround tree of `LK`) are drawn as
/// branches.
pub(super) fn to_text(t: &BacktrackTree) -> String {
    let mut out = String::new();
    write(t, "", &mut out);
    out
}

fn write(t: &BacktrackTree, prefix: &str, out: &mut String) {
    let mut cur = t.clone();
    loop {
        out.push_str(prefix);
        out.push_str(&label(cur.node()));
        out.push('\n');
        match cur.node() {
            Node::Choice(a, b) | Node::Lk(_, a, b) => {
                let first = if matches!(cur.node(), Node::Lk(..)) { "look " } else { "" };
                branch(a, prefix, true, first, out);
                branch(b, prefix, false, "", out);
                return;
            }
            Node::LkFail(_, a) => {
                branch(a, prefix, false, "look ", out);
                return;
            }
            Node::Match | Node::Mismatch => return,
            _ => cur = cur.node().children()[0].clone(),
        }
    }
}

fn branch(t: &BacktrackTree, prefix: &str, more: bool, tag: &str, out: &mut String) {
    let (head, rest) = if more { ("├─ ", "│  ") } else { ("└─ ", "   ") };
    let mut sub = String::new();
    write(t, "", &mut sub);
    for (k, line) in sub.lines().enumerate() {
        out.push_str(prefix);
        if k == 0 {
            out.push_str(head);
            out.push_str(tag);
        } else {
            out.push_str(rest);
        }
        out.push_str(line);
        out.push('\n');
    }
}

pub(super) fn to_json(t: &BacktrackTree) -> Value {
    match t.node() {
        Node::Match => json!({"node": "Match"}),
        Node::Mismatch => json!({"node": "Mismatch"}),
        Node::Choice(a, b) => json!({"node": "Choice", "left": to_json(a), "right": to_json(b)}),
        Node::Read(c, n) => json!({"node": "Read", "char": show(*c), "next": to_json(n)}),
        Node::ReadBackRef(s, n) => json!({
            "node": "ReadBackRef",
            "string": String::from_utf16_lossy(s),
            "next": to_json(n)
        }),
        Node::Progress(n) => json!({"node": "Progress", "next": to_json(n)}),
        Node::AnchorPass(a, n) => json!({"node": "AnchorPass", "anchor": anchor(*a), "next": to_json(n)}),
        Node::GroupOpen(g, n) => json!({"node": "GroupOpen", "group": g, "next": to_json(n)}),
        Node::GroupClose(g, n) => json!({"node": "GroupClose", "group": g, "next": to_json(n)}),
        Node::GroupReset(gl, n) => json!({"node": "GroupReset", "groups": gl, "next": to_json(n)}),
        Node::Lk(lk, tl, n) => json!({
            "node": "LK",
            "kind": look(*lk),
            "look": to_json(tl),
            "next": to_json(n)
        }),
        Node::LkFail(lk, tl) => json!({"node": "LKFail", "kind": look(*lk), "look": to_json(tl)}),
    }
}

#[cfg(test)]
mod tests {
    use crate::input::Input;
    use crate::regex::{parse, Flags};
    use crate::tree::regex_tree;

    #[test]
    fn text_layout() {
        let r = parse("a|b").unwrap();
        let i = Input::new("b", 0).unwrap();
        let t = regex_tree(&r, &i, Flags::default());
        assert_eq!(t.to_text(), "Choice\n├─ Mismatch\n└─ Read b\n   Match\n");
        assert_eq!(t.to_json()["right"]["char"], "b");
    }
}
