//! Bytecode compiler and small-step PikeVM for the star fragment.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::input::{Direction, GroupMap, Input, Leaf};
use crate::regex::{parse, subset_violation, CharDescriptor, Flags, GroupId, Regex};

pub type Label = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instr {
    Accept,
    Consume(CharDescriptor),
    Jmp(Label),
    Fork(Label, Label),
    SetOpen(GroupId),
    SetClose(GroupId),
    ResetRegs(Vec<GroupId>),
    BeginLoop,
    EndLoop(Label),
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Accept => write!(f, "Accept"),
            Instr::Consume(cd) => write!(f, "Consume {}", Regex::Char(cd.clone())),
            Instr::Jmp(l) => write!(f, "Jmp {l}"),
            Instr::Fork(l1, l2) => write!(f, "Fork {l1} {l2}"),
            Instr::SetOpen(g) => write!(f, "SetOpen {g}"),
            Instr::SetClose(g) => write!(f, "SetClose {g}"),
            Instr::ResetRegs(gl) => {
                let gs: Vec<String> = gl.iter().map(u32::to_string).collect();
                write!(f, "ResetRegs [{}]", gs.join(","))
            }
            Instr::BeginLoop => write!(f, "BeginLoop"),
            Instr::EndLoop(l) => write!(f, "EndLoop {l}"),
        }
    }
}

/// A compiled program; the label of an instruction is its position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Code(pub Vec<Instr>);

impl Code {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, pc: Label) -> &Instr {
        &self.0[pc]
    }

    /// One `label: OPCODE args` line per instruction.
    pub fn disassemble(&self) -> String {
        self.0
            .iter()
            .enumerate()
            .map(|(l, ins)| format!("{l}: {ins}\n"))
            .collect()
    }

    /// Inverse of [`Code::disassemble`].
    pub fn assemble(text: &str) -> Result<Code, String> {
        let mut out = Vec::new();
        for (n, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let (label, body) = line.split_once(':').ok_or_else(|| format!("line {n}: missing label"))?;
            if label.trim().parse::<usize>().ok() != Some(n) {
                return Err(format!("line {n}: expected label {n}"));
            }
            let body = body.trim();
            let (op, args) = body.split_once(' ').unwrap_or((body, ""));
            let nums = || -> Result<Vec<usize>, String> {
                args.split_whitespace()
                    .map(|a| a.parse::<usize>().map_err(|e| format!("line {n}: {e}")))
                    .collect()
            };
            let ins = match (op, nums()) {
                ("Accept", _) => Instr::Accept,
                ("BeginLoop", _) => Instr::BeginLoop,
                ("Jmp", Ok(v)) if v.len() == 1 => Instr::Jmp(v[0]),
                ("EndLoop", Ok(v)) if v.len() == 1 => Instr::EndLoop(v[0]),
                ("Fork", Ok(v)) if v.len() == 2 => Instr::Fork(v[0], v[1]),
                ("SetOpen", Ok(v)) if v.len() == 1 => Instr::SetOpen(v[0] as GroupId),
                ("SetClose", Ok(v)) if v.len() == 1 => Instr::SetClose(v[0] as GroupId),
                ("ResetRegs", _) => {
                    let inner = args
                        .strip_prefix('[')
                        .and_then(|a| a.strip_suffix(']'))
                        .ok_or_else(|| format!("line {n}: bad group list"))?;
                    let gl = inner
                        .split(',')
                        .filter(|s| !s.is_empty())
                        .map(|s| s.trim().parse::<GroupId>().map_err(|e| format!("line {n}: {e}")))
                        .collect::<Result<_, _>>()?;
                    Instr::ResetRegs(gl)
                }
                ("Consume", _) => match parse(args) {
                    Ok(Regex::Char(cd)) => Instr::Consume(cd),
                    _ => return Err(format!("line {n}: bad character descriptor {args:?}")),
                },
                _ => return Err(format!("line {n}: cannot read {body:?}")),
            };
            out.push(ins);
        }
        Ok(Code(out))
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.disassemble())
    }
}

fn emit(r: &Regex, out: &mut Vec<Instr>) {
    match r {
        Regex::Epsilon => {}
        Regex::Char(cd) => out.push(Instr::Consume(cd.clone())),
        Regex::Sequence(r1, r2) => {
            emit(r1, out);
            emit(r2, out);
        }
        Regex::Disjunction(r1, r2) => {
            let fork = out.len();
            out.push(Instr::Fork(fork + 1, 0));
            emit(r1, out);
            let jmp = out.len();
            out.push(Instr::Jmp(0));
            out[fork] = Instr::Fork(fork + 1, out.len());
            emit(r2, out);
            out[jmp] = Instr::Jmp(out.len());
        }
        Regex::Group(g, inner) => {
            out.push(Instr::SetOpen(*g));
            emit(inner, out);
            out.push(Instr::SetClose(*g));
        }
        Regex::Quantified(inner, q) if q.is_star() => {
            let start = out.len();
            out.push(Instr::Fork(0, 0));
            out.push(Instr::BeginLoop);
            out.push(Instr::ResetRegs(inner.def_groups()));
            emit(inner, out);
            out.push(Instr::EndLoop(start));
            let (l_in, l_out) = (start + 1, out.len());
            out[start] = if q.greedy {
                Instr::Fork(l_in, l_out)
            } else {
                Instr::Fork(l_out, l_in)
            };
        }
        other => unreachable!("not in the star fragment: {other}"),
    }
}

/// Compiles `r` and appends `Accept`, or explains why `r` is unsupported.
pub fn try_compile(r: &Regex) -> Result<Code, String> {
    if let Some(v) = subset_violation(r) {
        return Err(v);
    }
    let mut out = Vec::new();
    emit(r, &mut out);
    out.push(Instr::Accept);
    Ok(Code(out))
}

/// # Panics
/// If `r` lies outside the star fragment.
pub fn compile(r: &Regex) -> Code {
    try_compile(r).unwrap_or_else(|v| panic!("cannot compile to bytecode: {v}"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thread {
    pub pc: Label,
    pub gm: GroupMap,
    pub b: bool,
}

#[derive(Clone, Debug)]
pub struct Running {
    pub input: Input,
    pub best: Option<Leaf>,
    pub active: VecDeque<Thread>,
    pub blocked: Vec<Thread>,
    pub seen: HashSet<(Label, bool)>,
}

#[derive(Clone, Debug)]
pub enum PikeState {
    Final(Option<Leaf>),
    Running(Running),
}

impl PikeState {
    pub fn initial(i: &Input) -> PikeState {
        PikeState::Running(Running {
            input: i.clone(),
            best: None,
            active: VecDeque::from([Thread {
                pc: 0,
                gm: GroupMap::new(),
                b: true,
            }]),
            blocked: Vec::new(),
            seen: HashSet::new(),
        })
    }

    pub fn is_final(&self) -> bool {
        matches!(self, PikeState::Final(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VmRule {
    Final,
    NextChar,
    Skip,
    Match,
    Block,
    FailBlock,
    Jump,
    Fork,
    Open,
    Close,
    Reset,
    Begin,
    End,
    EndStuck,
}

impl VmRule {
    /// Whether the rule processes a thread rather than skipping it or
    /// moving between positions.
    pub fn processes_thread(self) -> bool {
        !matches!(self, VmRule::Final | VmRule::NextChar | VmRule::Skip)
    }
}

impl fmt::Display for VmRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Performs one transition in place and reports the rule used.
///
/// # Panics
/// If `st` is already final.
pub fn vm_step(st: &mut PikeState, code: &Code, flags: Flags) -> VmRule {
    let PikeState::Running(run) = st else {
        panic!("vm_step on a final state");
    };
    let Some(th) = run.active.pop_front() else {
        if run.blocked.is_empty() {
            *st = PikeState::Final(run.best.take());
            return VmRule::Final;
        }
        return match run.input.step(Direction::Forward) {
            Some(next) => {
                run.input = next;
                run.active = std::mem::take(&mut run.blocked).into();
                run.seen.clear();
                VmRule::NextChar
            }
            None => {
                *st = PikeState::Final(run.best.take());
                VmRule::Final
            }
        };
    };
    if !run.seen.insert((th.pc, th.b)) {
        return VmRule::Skip;
    }
    let idx = run.input.idx();
    match code.get(th.pc) {
        Instr::Accept => {
            run.best = Some(Leaf {
                input: run.input.clone(),
                groups: th.gm,
            });
            run.active.clear();
            VmRule::Match
        }
        Instr::Consume(cd) => {
            if run.input.advance(cd, flags, Direction::Forward).is_some() {
                run.blocked.push(Thread {
                    pc: th.pc + 1,
                    gm: th.gm,
                    b: true,
                });
                VmRule::Block
            } else {
                VmRule::FailBlock
            }
        }
        Instr::Jmp(l) => {
            run.active.push_front(Thread { pc: *l, ..th });
            VmRule::Jump
        }
        Instr::Fork(l1, l2) => {
            run.active.push_front(Thread { pc: *l2, ..th.clone() });
            run.active.push_front(Thread { pc: *l1, ..th });
            VmRule::Fork
        }
        Instr::SetOpen(g) => {
            run.active.push_front(Thread {
                pc: th.pc + 1,
                gm: th.gm.open(*g, idx),
                b: th.b,
            });
            VmRule::Open
        }
        Instr::SetClose(g) => {
            run.active.push_front(Thread {
                pc: th.pc + 1,
                gm: th.gm.close(*g, idx),
                b: th.b,
            });
            VmRule::Close
        }
        Instr::ResetRegs(gl) => {
            run.active.push_front(Thread {
                pc: th.pc + 1,
                gm: th.gm.reset(gl),
                b: th.b,
            });
            VmRule::Reset
        }
        Instr::BeginLoop => {
            run.active.push_front(Thread {
                pc: th.pc + 1,
                gm: th.gm,
                b: false,
            });
            VmRule::Begin
        }
        Instr::EndLoop(l) => {
            if th.b {
                run.active.push_front(Thread { pc: *l, ..th });
                VmRule::End
            } else {
                VmRule::EndStuck
            }
        }
    }
}

/// Runs compiled code from `i` to completion.
pub fn vm_run_code(code: &Code, i: &Input, flags: Flags) -> Option<Leaf> {
    let mut st = PikeState::initial(i);
    loop {
        vm_step(&mut st, code, flags);
        if let PikeState::Final(best) = st {
            return best;
        }
    }
}

/// # Panics
/// If `r` lies outside the star fragment or `start` is past the end of `s`.
pub fn vm_run(r: &Regex, s: &str, start: usize, flags: Flags) -> Option<Leaf> {
    let i = Input::new(s, start).expect("start within the subject");
    vm_run_code(&compile(r), &i, flags)
}

/// Counts of thread-processing steps, indexed by input position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Census {
    pub per_position: Vec<u64>,
    pub total_steps: u64,
    pub result: Option<usize>,
}

impl Census {
    pub fn processed(&self) -> u64 {
        self.per_position.iter().sum()
    }
}

pub fn step_census(code: &Code, i: &Input, flags: Flags) -> Census {
    let mut st = PikeState::initial(i);
    let mut per_position = vec![0u64; i.len() + 1];
    let mut total_steps = 0;
    loop {
        let idx = match &st {
            PikeState::Running(run) => run.input.idx(),
            PikeState::Final(best) => {
                return Census {
                    per_position,
                    total_steps,
                    result: best.as_ref().map(Leaf::end),
                }
            }
        };
        total_steps += 1;
        if vm_step(&mut st, code, flags).processes_thread() {
            per_position[idx] += 1;
        }
    }
}

/// State of the machine before one step, and the rule that step used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VmTraceRow {
    pub idx: usize,
    pub best: Option<usize>,
    pub active: Vec<Label>,
    pub blocked: Vec<Label>,
    pub rule: VmRule,
}

pub fn trace(code: &Code, i: &Input, flags: Flags) -> (Vec<VmTraceRow>, Option<Leaf>) {
    let mut st = PikeState::initial(i);
    let mut rows = Vec::new();
    loop {
        let row = match &st {
            PikeState::Final(best) => return (rows, best.clone()),
            PikeState::Running(run) => VmTraceRow {
                idx: run.input.idx(),
                best: run.best.as_ref().map(Leaf::end),
                active: run.active.iter().map(|t| t.pc).collect(),
                blocked: run.blocked.iter().map(|t| t.pc).collect(),
                rule: VmRule::Final,
            },
        };
        let rule = vm_step(&mut st, code, flags);
        rows.push(VmTraceRow { rule, ..row });
    }
}

pub(crate) fn list<T: fmt::Display>(xs: &[T]) -> String {
    let parts: Vec<String> = xs.iter().map(T::to_string).collect();
    format!("[{}]", parts.join(";"))
}

pub fn render_trace(rows: &[VmTraceRow]) -> String {
    rows.iter()
        .map(|r| {
            format!(
                "{:>3}  A {:<16} B {:<10} {}\n",
                r.idx,
                list(&r.active),
                list(&r.blocked),
                r.rule
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::GroupRange;

    const FIG_CODE: &str = "\
0: SetOpen 1
1: Fork 2 8
2: Fork 3 7
3: BeginLoop
4: ResetRegs []
5: Consume a
6: EndLoop 2
7: Jmp 9
8: Consume a
9: SetClose 1
10: Consume b
11: Accept
";

    #[test]
    fn compiles_the_worked_example() {
        let code = compile(&parse("(a*|a)b").unwrap());
        assert_eq!(code.disassemble(), FIG_CODE);
        assert_eq!(Code::assemble(FIG_CODE).unwrap(), code);
    }

    #[test]
    fn small_programs() {
        assert_eq!(compile(&Regex::Epsilon).0, vec![Instr::Accept]);
        assert_eq!(compile(&parse("ab").unwrap()).disassemble(), "0: Consume a\n1: Consume b\n2: Accept\n");
        assert_eq!(
            compile(&parse("(?:a|b)*?").unwrap()).disassemble(),
            "0: Fork 8 1\n1: BeginLoop\n2: ResetRegs []\n3: Fork 4 6\n4: Consume a\n5: Jmp 7\n6: Consume b\n7: EndLoop 0\n8: Accept\n"
        );
        assert!(try_compile(&parse("a+").unwrap()).is_err());
    }

    #[test]
    fn trace_of_the_worked_example() {
        let code = compile(&parse("(a*|a)b").unwrap());
        let (rows, best) = trace(&code, &Input::new("ab", 0).unwrap(), Flags::default());
        let cols: Vec<(Vec<usize>, Vec<usize>)> = rows.iter().map(|r| (r.active.clone(), r.blocked.clone())).collect();
        let expected: Vec<(Vec<usize>, Vec<usize>)> = vec![
            (vec![0], vec![]),
            (vec![1], vec![]),
            (vec![2, 8], vec![]),
            (vec![3, 7, 8], vec![]),
            (vec![4, 7, 8], vec![]),
            (vec![5, 7, 8], vec![]),
            (vec![7, 8], vec![6]),
            (vec![9, 8], vec![6]),
            (vec![10, 8], vec![6]),
            (vec![8], vec![6]),
            (vec![], vec![6, 9]),
            (vec![6, 9], vec![]),
            (vec![2, 9], vec![]),
            (vec![3, 7, 9], vec![]),
            (vec![4, 7, 9], vec![]),
            (vec![5, 7, 9], vec![]),
            (vec![7, 9], vec![]),
            (vec![9, 9], vec![]),
            (vec![10, 9], vec![]),
            (vec![9], vec![11]),
            (vec![], vec![11]),
            (vec![11], vec![]),
            (vec![], vec![]),
        ];
        assert_eq!(cols, expected);
        let rules: Vec<VmRule> = rows.iter().map(|r| r.rule).collect();
        assert_eq!(rules[19], VmRule::Skip);
        assert_eq!(rules[10], VmRule::NextChar);
        assert_eq!(rules[21], VmRule::Match);
        assert_eq!(*rules.last().unwrap(), VmRule::Final);
        let best = best.unwrap();
        assert_eq!(best.end(), 2);
        assert_eq!(best.groups.get(1), Some(GroupRange::Closed { start: 0, end: 1 }));
    }

    #[test]
    fn empty_lists_are_final() {
        let mut st = PikeState::Running(Running {
            input: Input::new("x", 0).unwrap(),
            best: None,
            active: VecDeque::new(),
            blocked: vec![],
            seen: HashSet::new(),
        });
        assert_eq!(vm_step(&mut st, &compile(&Regex::Epsilon), Flags::default()), VmRule::Final);
        assert!(matches!(st, PikeState::Final(None)));
    }

    #[test]
    fn failed_consume_is_dropped_and_seen() {
        let code = compile(&parse("a").unwrap());
        let mut st = PikeState::initial(&Input::new("b", 0).unwrap());
        assert_eq!(vm_step(&mut st, &code, Flags::default()), VmRule::FailBlock);
        let PikeState::Running(run) = &st else { panic!() };
        assert!(run.active.is_empty() && run.seen.contains(&(0, true)));
        assert!(vm_run(&parse("a").unwrap(), "b", 0, Flags::default()).is_none());
    }

    #[test]
    fn census_stays_within_the_seen_bound() {
        let r = parse("(?:a|a|a)*b").unwrap();
        let code = compile(&r);
        let s = "a".repeat(30);
        let c = step_census(&code, &Input::new(&s, 0).unwrap(), Flags::default());
        assert!(c.per_position.iter().all(|&n| n <= 2 * code.len() as u64));
        assert_eq!(c.result, None);
        let e = step_census(&compile(&Regex::Epsilon), &Input::new("", 0).unwrap(), Flags::default());
        assert_eq!(e.per_position, vec![1]);
    }
}
