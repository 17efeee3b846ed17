//! Compares first-branch results on generated full-grammar cases against
//! the regex engine of a local `node`, using sticky matching from the
//! start index.
//!
//! cargo run --release --example v8_crosscheck -- [seed] [cases]

use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::{json, Value};
use treegex::fuzz::{gen_case, FuzzMode};
use treegex::input::{Direction, GroupMap, GroupRange};
use treegex::tree::{first_branch, Actions, TreeBuilder};

const SCRIPT: &str = r#"
const cases = JSON.parse(require('fs').readFileSync(0));
let bad = 0;
for (const c of cases) {
  const re = new RegExp(c.p, c.f + 'yd');
  re.lastIndex = c.start;
  const m = re.exec(c.s);
  const got = m ? [c.start + m[0].length, ...m.indices.slice(1).map(x => x ? [x[0], x[1]] : null)] : null;
  if (JSON.stringify(got) !== JSON.stringify(c.res)) {
    bad++;
    console.log('mismatch', JSON.stringify(c), JSON.stringify(got));
  }
}
console.log(`${cases.length - bad} agree, ${bad} differ`);
process.exit(bad ? 1 : 0);
"#;

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let seed = args.first().copied().unwrap_or(7);
    let n = args.get(1).copied().unwrap_or(20_000);
    let mut cases = Vec::new();
    for k in 0..n {
        let (r, i, flags) = gen_case(seed, k, FuzzMode::Full, 8);
        let Ok(t) = TreeBuilder::new(flags)
            .with_budget(1_000_000)
            .build_total(&Actions::of_regex(&r), &i, &GroupMap::new(), Direction::Forward)
        else {
            continue;
        };
        let res = first_branch(&t, &i).map(|l| {
            let mut v = vec![json!(l.end())];
            for g in r.def_groups() {
                v.push(match l.groups.get(g) {
                    Some(GroupRange::Closed { start, end }) => json!([start, end]),
                    _ => Value::Null,
                });
            }
            v
        });
        let f: String = [(flags.ignore_case, 'i'), (flags.multiline, 'm'), (flags.dot_all, 's')]
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, c)| *c)
            .collect();
        cases.push(json!({
            "p": r.to_string(),
            "s": String::from_utf16_lossy(i.text()),
            "start": i.idx(),
            "f": f,
            "res": res,
        }));
    }
    let child = Command::new("node")
        .args(["-e", SCRIPT])
        .stdin(Stdio::piped())
        .spawn();
    let Ok(mut child) = child else {
        println!("node not found, nothing compared");
        return;
    };
    child
        .stdin
        .take()
        .expect("piped stdin")
        .write_all(serde_json::to_string(&cases).expect("cases serialize").as_bytes())
        .expect("write cases");
    let status = child.wait().expect("node runs");
    std::process::exit(status.code().unwrap_or(1));
}
