//! Programs in the assembly-like input language.
//!
//! A program declares a value domain `0..D`, a list of shared variables and a
//! list of processes. Every process owns a disjoint set of registers and a
//! sequence of labelled instructions ending in `term`:
//!
//! ```text
//! domain 2
//! vars x
//! proc P weight 1
//! regs a
//! 0: x := a
//! 1: term
//! ```
//!
//! Identifiers are resolved at parse time: `x := a` is a write when `x` is a
//! shared variable and `a` a register of the process, a read in the opposite
//! direction and a register assignment when both are registers.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

/// Values stored in registers and shared variables.
pub type Value = u8;

/// Domain size used when the `domain` header is omitted.
pub const DEFAULT_DOMAIN: u32 = 4;

const KEYWORDS: &[&str] = &[
    "domain", "vars", "proc", "weight", "regs", "if", "then", "term", "CAS", "goto",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}: undeclared identifier `{name}`")]
    Undeclared { line: usize, name: String },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("instruction `{0}` branches to itself")]
    IfSelfTarget(String),
    #[error("label `{label}` targeted from process `{process}` belongs to another process")]
    ForeignLabel { label: String, process: String },
    #[error("name `{0}` is declared both as a shared variable and as a register")]
    NameCollision(String),
    #[error("register `{0}` is declared by more than one process")]
    RegisterCollision(String),
    #[error("duplicate declaration of `{0}`")]
    DuplicateName(String),
    #[error("process `{0}` must end with exactly one `term` instruction")]
    MissingTerm(String),
    #[error("process `{0}` has no instructions")]
    EmptyProcess(String),
    #[error("process `{0}` has weight 0")]
    ZeroWeight(String),
    #[error("domain size must be between 2 and 256, got {0}")]
    BadDomain(u32),
    #[error("constant {value} is outside the domain 0..{domain}")]
    ConstantOutOfDomain { value: u32, domain: u32 },
    #[error("program declares no processes")]
    NoProcesses,
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("label `{0}` is a `term` instruction and has no successor")]
    NextOfTerm(String),
    #[error("instruction `{0}` is a goto and has no surface syntax")]
    NotPrintable(String),
}

/// Right-hand side of a register assignment. Register operands are indices
/// into the owning process's register list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Value),
    Reg(usize),
    /// Addition modulo the domain size.
    Add(usize, usize),
    /// 1 when both registers hold the same value, 0 otherwise.
    Eq(usize, usize),
}

/// Statements with resolved operands. Variables index [`Program::vars`],
/// registers index the process-local register list and branch targets index
/// the process's instruction list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Statement {
    Write { var: usize, reg: usize },
    Read { reg: usize, var: usize },
    Assign { reg: usize, expr: Expr },
    Cas { out: usize, var: usize, cmp: usize, new: usize },
    If { reg: usize, target: usize },
    Term,
    /// Only produced by [`Program::remove_label`].
    Goto { target: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    pub label: String,
    pub stmt: Statement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessDef {
    pub name: String,
    pub weight: u32,
    pub regs: Vec<String>,
    pub instrs: Vec<Instruction>,
}

/// Position of an instruction: process index and instruction index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Loc {
    pub process: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub domain: u32,
    pub vars: Vec<String>,
    pub processes: Vec<ProcessDef>,
}

impl Program {
    pub fn parse(text: &str) -> Result<Program, LangError> {
        parse_program(text)
    }

    pub fn num_processes(&self) -> usize {
        self.processes.len()
    }

    /// Offset of each process's registers in a flattened register vector.
    pub fn reg_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.processes.len());
        let mut acc = 0;
        for p in &self.processes {
            offsets.push(acc);
            acc += p.regs.len();
        }
        offsets
    }

    pub fn num_regs(&self) -> usize {
        self.processes.iter().map(|p| p.regs.len()).sum()
    }

    pub fn locate(&self, label: &str) -> Option<Loc> {
        self.processes.iter().enumerate().find_map(|(pi, p)| {
            p.instrs
                .iter()
                .position(|i| i.label == label)
                .map(|index| Loc { process: pi, index })
        })
    }

    pub fn label_at(&self, loc: Loc) -> &str {
        &self.processes[loc.process].instrs[loc.index].label
    }

    pub fn stmt_at(&self, loc: Loc) -> &Statement {
        &self.processes[loc.process].instrs[loc.index].stmt
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.processes
            .iter()
            .flat_map(|p| p.instrs.iter().map(|i| i.label.as_str()))
    }

    pub fn process_index(&self, name: &str) -> Option<usize> {
        self.processes.iter().position(|p| p.name == name)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Label of the instruction textually following `label`.
    pub fn next_label(&self, label: &str) -> Result<&str, LangError> {
        let loc = self
            .locate(label)
            .ok_or_else(|| LangError::UnknownLabel(label.to_string()))?;
        if *self.stmt_at(loc) == Statement::Term {
            return Err(LangError::NextOfTerm(label.to_string()));
        }
        let p = &self.processes[loc.process];
        // Validated programs end every process with `term`, so a successor exists.
        Ok(&p.instrs[loc.index + 1].label)
    }

    /// Replaces the statement at `label` by a jump to a fresh `term`
    /// instruction appended to the owning process. Reaching `label` in the
    /// resulting program terminates its process immediately.
    pub fn remove_label(&self, label: &str) -> Result<Program, LangError> {
        let loc = self
            .locate(label)
            .ok_or_else(|| LangError::UnknownLabel(label.to_string()))?;
        let taken: HashSet<&str> = self.labels().collect();
        let mut fresh = format!("term_new_{label}");
        let mut n = 1;
        while taken.contains(fresh.as_str()) {
            fresh = format!("term_new_{label}_{n}");
            n += 1;
        }
        let mut out = self.clone();
        let proc = &mut out.processes[loc.process];
        let target = proc.instrs.len();
        proc.instrs.push(Instruction { label: fresh, stmt: Statement::Term });
        proc.instrs[loc.index].stmt = Statement::Goto { target };
        Ok(out)
    }

    pub fn print(&self) -> Result<String, LangError> {
        print_program(self)
    }
}

pub fn print_program(p: &Program) -> Result<String, LangError> {
    let mut out = String::new();
    let _ = writeln!(out, "domain {}", p.domain);
    let _ = writeln!(out, "vars {}", p.vars.join(" "));
    for proc in &p.processes {
        let _ = writeln!(out, "proc {} weight {}", proc.name, proc.weight);
        if proc.regs.is_empty() {
            out.push_str("regs\n");
        } else {
            let _ = writeln!(out, "regs {}", proc.regs.join(" "));
        }
        let r = |i: usize| proc.regs[i].as_str();
        let v = |i: usize| p.vars[i].as_str();
        for instr in &proc.instrs {
            let body = match &instr.stmt {
                Statement::Write { var, reg } => format!("{} := {}", v(*var), r(*reg)),
                Statement::Read { reg, var } => format!("{} := {}", r(*reg), v(*var)),
                Statement::Assign { reg, expr } => match expr {
                    Expr::Const(c) => format!("{} := {}", r(*reg), c),
                    Expr::Reg(a) => format!("{} := {}", r(*reg), r(*a)),
                    Expr::Add(a, b) => format!("{} := {} + {}", r(*reg), r(*a), r(*b)),
                    Expr::Eq(a, b) => format!("{} := {} == {}", r(*reg), r(*a), r(*b)),
                },
                Statement::Cas { out, var, cmp, new } => {
                    format!("{} := CAS({}, {}, {})", r(*out), v(*var), r(*cmp), r(*new))
                }
                Statement::If { reg, target } => {
                    format!("if {} then {}", r(*reg), proc.instrs[*target].label)
                }
                Statement::Term => "term".to_string(),
                Statement::Goto { .. } => return Err(LangError::NotPrintable(instr.label.clone())),
            };
            let _ = writeln!(out, "{}: {}", instr.label, body);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u32),
    Assign,
    Colon,
    Plus,
    EqEq,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>, LangError> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse::<u32>().map_err(|_| LangError::Syntax {
                line: lineno,
                col,
                msg: format!("number `{s}` is too large"),
            })?;
            toks.push(Token { tok: Tok::Nat(n), col });
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, len) = match (c, two.as_str()) {
            (_, ":=") => (Tok::Assign, 2),
            (_, "==") => (Tok::EqEq, 2),
            (':', _) => (Tok::Colon, 1),
            ('+', _) => (Tok::Plus, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            _ => {
                return Err(LangError::Syntax {
                    line: lineno,
                    col,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        };
        toks.push(Token { tok, col });
        i += len;
    }
    Ok(toks)
}

/// Unresolved statement as written in the source.
#[derive(Debug)]
enum RawStmt {
    Move(String, String),
    Const(String, u32),
    Add(String, String, String),
    Eq(String, String, String),
    Cas(String, String, String, String),
    If(String, String),
    Term,
}

#[derive(Debug)]
struct RawInstr {
    line: usize,
    label: String,
    stmt: RawStmt,
}

#[derive(Debug)]
struct RawProc {
    name: String,
    weight: u32,
    regs: Vec<String>,
    instrs: Vec<RawInstr>,
}

struct LineCursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> LineCursor<'a> {
    fn err(&self, msg: impl Into<String>) -> LangError {
        let col = self.toks.get(self.pos).map_or(self.end_col, |t| t.col);
        LangError::Syntax { line: self.line, col, msg: msg.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.tok);
        self.pos += 1;
        t
    }

    fn ident(&mut self, what: &str) -> Result<String, LangError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn nat(&mut self, what: &str) -> Result<u32, LangError> {
        match self.peek() {
            Some(Tok::Nat(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn label(&mut self) -> Result<String, LangError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Nat(n)) => {
                let s = n.to_string();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected label")),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LangError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), LangError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn finish(&self) -> Result<(), LangError> {
        if self.pos < self.toks.len() {
            Err(self.err("unexpected trailing input"))
        } else {
            Ok(())
        }
    }
}

fn parse_stmt(cur: &mut LineCursor<'_>) -> Result<RawStmt, LangError> {
    if cur.at_keyword("term") {
        cur.pos += 1;
        return Ok(RawStmt::Term);
    }
    if cur.at_keyword("if") {
        cur.pos += 1;
        let reg = cur.ident("register")?;
        cur.keyword("then")?;
        let target = cur.label()?;
        return Ok(RawStmt::If(reg, target));
    }
    let lhs = cur.ident("statement")?;
    cur.expect(Tok::Assign, "`:=`")?;
    if cur.at_keyword("CAS") {
        cur.pos += 1;
        cur.expect(Tok::LParen, "`(`")?;
        let var = cur.ident("variable")?;
        cur.expect(Tok::Comma, "`,`")?;
        let cmp = cur.ident("register")?;
        cur.expect(Tok::Comma, "`,`")?;
        let new = cur.ident("register")?;
        cur.expect(Tok::RParen, "`)`")?;
        return Ok(RawStmt::Cas(lhs, var, cmp, new));
    }
    match cur.peek() {
        Some(Tok::Nat(_)) => {
            let n = cur.nat("constant")?;
            Ok(RawStmt::Const(lhs, n))
        }
        Some(Tok::Ident(_)) => {
            let a = cur.ident("operand")?;
            match cur.peek() {
                Some(Tok::Plus) => {
                    cur.next();
                    let b = cur.ident("register")?;
                    Ok(RawStmt::Add(lhs, a, b))
                }
                Some(Tok::EqEq) => {
                    cur.next();
                    let b = cur.ident("register")?;
                    Ok(RawStmt::Eq(lhs, a, b))
                }
                _ => Ok(RawStmt::Move(lhs, a)),
            }
        }
        _ => Err(cur.err("expected expression")),
    }
}

pub fn parse_program(text: &str) -> Result<Program, LangError> {
    let mut domain: Option<u32> = None;
    let mut vars: Option<Vec<String>> = None;
    let mut procs: Vec<RawProc> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw_line, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur =
            LineCursor { toks: &toks, pos: 0, line, end_col: raw_line.chars().count() + 1 };
        if cur.at_keyword("domain") {
            if domain.is_some() || vars.is_some() || !procs.is_empty() {
                return Err(cur.err("`domain` must be the first declaration"));
            }
            cur.pos += 1;
            domain = Some(cur.nat("domain size")?);
            cur.finish()?;
        } else if cur.at_keyword("vars") {
            if vars.is_some() || !procs.is_empty() {
                return Err(cur.err("`vars` must appear once, before any process"));
            }
            cur.pos += 1;
            let mut names = Vec::new();
            while cur.peek().is_some() {
                names.push(cur.ident("variable name")?);
            }
            if names.is_empty() {
                return Err(cur.err("expected at least one variable"));
            }
            vars = Some(names);
        } else if cur.at_keyword("proc") {
            if vars.is_none() {
                return Err(cur.err("`vars` must precede the first process"));
            }
            cur.pos += 1;
            let name = cur.ident("process name")?;
            cur.keyword("weight")?;
            let weight = cur.nat("weight")?;
            cur.finish()?;
            procs.push(RawProc { name, weight, regs: Vec::new(), instrs: Vec::new() });
        } else if cur.at_keyword("regs") {
            let Some(p) = procs.last_mut() else {
                return Err(cur.err("`regs` outside of a process"));
            };
            if !p.instrs.is_empty() || !p.regs.is_empty() {
                return Err(cur.err("`regs` must directly follow the `proc` line"));
            }
            cur.pos += 1;
            while cur.peek().is_some() {
                p.regs.push(cur.ident("register name")?);
            }
        } else {
            if procs.is_empty() {
                return Err(cur.err("instruction outside of a process"));
            }
            let label = cur.label()?;
            cur.expect(Tok::Colon, "`:` after label")?;
            let stmt = parse_stmt(&mut cur)?;
            cur.finish()?;
            procs.last_mut().unwrap().instrs.push(RawInstr { line, label, stmt });
        }
    }

    let Some(vars) = vars else {
        return Err(LangError::Syntax { line: 1, col: 1, msg: "missing `vars` declaration".into() });
    };
    resolve(domain.unwrap_or(DEFAULT_DOMAIN), vars, procs)
}

fn resolve(domain: u32, vars: Vec<String>, procs: Vec<RawProc>) -> Result<Program, LangError> {
    if !(2..=256).contains(&domain) {
        return Err(LangError::BadDomain(domain));
    }
    if procs.is_empty() {
        return Err(LangError::NoProcesses);
    }
    let mut seen = HashSet::new();
    for v in &vars {
        if KEYWORDS.contains(&v.as_str()) || !seen.insert(v.as_str()) {
            return Err(LangError::DuplicateName(v.clone()));
        }
    }
    let var_ix: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();

    let mut proc_names = HashSet::new();
    let mut all_regs: HashSet<String> = HashSet::new();
    let mut all_labels: HashSet<String> = HashSet::new();
    for p in &procs {
        if !proc_names.insert(p.name.as_str()) {
            return Err(LangError::DuplicateName(p.name.clone()));
        }
        let mut own = HashSet::new();
        for r in &p.regs {
            if var_ix.contains_key(r.as_str()) {
                return Err(LangError::NameCollision(r.clone()));
            }
            if KEYWORDS.contains(&r.as_str()) || !own.insert(r.as_str()) {
                return Err(LangError::DuplicateName(r.clone()));
            }
            if !all_regs.insert(r.clone()) {
                return Err(LangError::RegisterCollision(r.clone()));
            }
        }
        for i in &p.instrs {
            if !all_labels.insert(i.label.clone()) {
                return Err(LangError::DuplicateLabel(i.label.clone()));
            }
        }
    }

    let mut processes = Vec::with_capacity(procs.len());
    for p in procs {
        if p.weight == 0 {
            return Err(LangError::ZeroWeight(p.name));
        }
        if p.instrs.is_empty() {
            return Err(LangError::EmptyProcess(p.name));
        }
        let terms = p.instrs.iter().filter(|i| matches!(i.stmt, RawStmt::Term)).count();
        if terms != 1 || !matches!(p.instrs.last().unwrap().stmt, RawStmt::Term) {
            return Err(LangError::MissingTerm(p.name));
        }
        let reg_ix: HashMap<&str, usize> =
            p.regs.iter().enumerate().map(|(i, r)| (r.as_str(), i)).collect();
        let label_ix: HashMap<&str, usize> =
            p.instrs.iter().enumerate().map(|(i, ins)| (ins.label.as_str(), i)).collect();

        let mut instrs = Vec::with_capacity(p.instrs.len());
        for ins in &p.instrs {
            let line = ins.line;
            let reg = |name: &str| {
                reg_ix.get(name).copied().ok_or_else(|| LangError::Undeclared { line, name: name.into() })
            };
            let var = |name: &str| {
                var_ix.get(name).copied().ok_or_else(|| LangError::Undeclared { line, name: name.into() })
            };
            let stmt = match &ins.stmt {
                RawStmt::Term => Statement::Term,
                RawStmt::Move(lhs, rhs) => {
                    match (reg_ix.get(lhs.as_str()), reg_ix.get(rhs.as_str())) {
                        (Some(&r), Some(&a)) => Statement::Assign { reg: r, expr: Expr::Reg(a) },
                        (Some(&r), None) => Statement::Read { reg: r, var: var(rhs)? },
                        (None, Some(&a)) => Statement::Write { var: var(lhs)?, reg: a },
                        (None, None) => {
                            // var := var is not a statement; report whichever side is unknown.
                            var(lhs)?;
                            var(rhs)?;
                            return Err(LangError::Syntax {
                                line,
                                col: 1,
                                msg: format!("`{lhs} := {rhs}` moves between two shared variables"),
                            });
                        }
                    }
                }
                RawStmt::Const(lhs, n) => {
                    if *n >= domain {
                        return Err(LangError::ConstantOutOfDomain { value: *n, domain });
                    }
                    Statement::Assign { reg: reg(lhs)?, expr: Expr::Const(*n as Value) }
                }
                RawStmt::Add(lhs, a, b) => {
                    Statement::Assign { reg: reg(lhs)?, expr: Expr::Add(reg(a)?, reg(b)?) }
                }
                RawStmt::Eq(lhs, a, b) => {
                    Statement::Assign { reg: reg(lhs)?, expr: Expr::Eq(reg(a)?, reg(b)?) }
                }
                RawStmt::Cas(out, v, cmp, new) => Statement::Cas {
                    out: reg(out)?,
                    var: var(v)?,
                    cmp: reg(cmp)?,
                    new: reg(new)?,
                },
                RawStmt::If(r, target) => {
                    let r = reg(r)?;
                    if *target == ins.label {
                        return Err(LangError::IfSelfTarget(ins.label.clone()));
                    }
                    let Some(&t) = label_ix.get(target.as_str()) else {
                        if all_labels.contains(target) {
                            return Err(LangError::ForeignLabel {
                                label: target.clone(),
                                process: p.name.clone(),
                            });
                        }
                        return Err(LangError::Undeclared { line, name: target.clone() });
                    };
                    Statement::If { reg: r, target: t }
                }
            };
            instrs.push(Instruction { label: ins.label.clone(), stmt });
        }
        processes.push(ProcessDef { name: p.name, weight: p.weight, regs: p.regs, instrs });
    }
    Ok(Program { domain, vars, processes })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "domain 2\nvars x\nproc P weight 1\nregs a\n0: x := a\n1: term\n";

    #[test]
    fn parses_minimal_program() {
        let p = parse_program(MINIMAL).unwrap();
        assert_eq!(p.domain, 2);
        assert_eq!(p.processes.len(), 1);
        assert_eq!(p.processes[0].instrs.len(), 2);
        assert_eq!(p.processes[0].instrs[0].stmt, Statement::Write { var: 0, reg: 0 });
    }

    #[test]
    fn resolves_read_write_assign() {
        let src = "vars x\nproc P weight 2\nregs a b\nl0: a := x\nl1: x := a\nl2: b := a\nl3: b := 3\nl4: b := a + b\nl5: b := a == b\nl6: b := CAS(x, a, b)\nl7: if b then l0\nl8: term\n";
        let p = parse_program(src).unwrap();
        assert_eq!(p.domain, DEFAULT_DOMAIN);
        let s: Vec<_> = p.processes[0].instrs.iter().map(|i| i.stmt.clone()).collect();
        assert_eq!(s[0], Statement::Read { reg: 0, var: 0 });
        assert_eq!(s[1], Statement::Write { var: 0, reg: 0 });
        assert_eq!(s[2], Statement::Assign { reg: 1, expr: Expr::Reg(0) });
        assert_eq!(s[3], Statement::Assign { reg: 1, expr: Expr::Const(3) });
        assert_eq!(s[4], Statement::Assign { reg: 1, expr: Expr::Add(0, 1) });
        assert_eq!(s[5], Statement::Assign { reg: 1, expr: Expr::Eq(0, 1) });
        assert_eq!(s[6], Statement::Cas { out: 1, var: 0, cmp: 0, new: 1 });
        assert_eq!(s[7], Statement::If { reg: 1, target: 0 });
    }

    #[test]
    fn rejects_if_self_target() {
        let src = "vars x\nproc P weight 1\nregs a\n3: if a then 3\n4: term\n";
        assert_eq!(parse_program(src), Err(LangError::IfSelfTarget("3".into())));
    }

    #[test]
    fn rejects_shared_register_names() {
        let src = "vars x\nproc P weight 1\nregs a\n0: term\nproc Q weight 1\nregs a\n1: term\n";
        assert_eq!(parse_program(src), Err(LangError::RegisterCollision("a".into())));
    }

    #[test]
    fn rejects_other_errors() {
        let dup = "vars x\nproc P weight 1\nregs a\n0: a := x\n0: term\n";
        assert_eq!(parse_program(dup), Err(LangError::DuplicateLabel("0".into())));
        let undeclared = "vars x\nproc P weight 1\nregs a\n0: a := y\n1: term\n";
        assert!(matches!(parse_program(undeclared), Err(LangError::Undeclared { line: 4, .. })));
        let collision = "vars x\nproc P weight 1\nregs x\n0: term\n";
        assert_eq!(parse_program(collision), Err(LangError::NameCollision("x".into())));
        let syntax = "vars x\nproc P weight 1\nregs a\n0: a := := x\n1: term\n";
        assert!(matches!(parse_program(syntax), Err(LangError::Syntax { line: 4, col: 9, .. })));
        let no_term = "vars x\nproc P weight 1\nregs a\n0: a := x\n";
        assert_eq!(parse_program(no_term), Err(LangError::MissingTerm("P".into())));
        let foreign = "vars x\nproc P weight 1\nregs a\n0: if a then 1\n2: term\nproc Q weight 1\nregs\n1: term\n";
        assert!(matches!(parse_program(foreign), Err(LangError::ForeignLabel { .. })));
        let big = "domain 2\nvars x\nproc P weight 1\nregs a\n0: a := 2\n1: term\n";
        assert!(matches!(parse_program(big), Err(LangError::ConstantOutOfDomain { .. })));
    }

    #[test]
    fn comments_and_blank_lines() {
        let src = "# header\n\nvars x # shared\nproc P weight 1\nregs\n0: term # done\n";
        let p = parse_program(src).unwrap();
        assert!(p.processes[0].regs.is_empty());
    }

    #[test]
    fn print_round_trips() {
        let p = parse_program(MINIMAL).unwrap();
        let text = print_program(&p).unwrap();
        assert_eq!(text, MINIMAL);
        let src = "domain 3\nvars x y\nproc P weight 1\nregs a b\nL: b := CAS(x, a, b)\nM: if b then L\nN: term\n";
        let p = parse_program(src).unwrap();
        assert_eq!(parse_program(&print_program(&p).unwrap()).unwrap(), p);
    }

    #[test]
    fn remove_label_replaces_with_goto() {
        let p = parse_program(MINIMAL).unwrap();
        let q = p.remove_label("0").unwrap();
        let instrs = &q.processes[0].instrs;
        assert_eq!(instrs.len(), 3);
        assert_eq!(instrs[0].stmt, Statement::Goto { target: 2 });
        assert_eq!(instrs[2].stmt, Statement::Term);
        assert_eq!(instrs[1], p.processes[0].instrs[1]);
        assert!(matches!(print_program(&q), Err(LangError::NotPrintable(_))));
        assert_eq!(p.remove_label("zz"), Err(LangError::UnknownLabel("zz".into())));
    }

    #[test]
    fn remove_label_twice_adds_two_fresh_terms() {
        let src = "vars x\nproc P weight 1\nregs a\n0: x := a\n1: a := x\n2: term\n";
        let p = parse_program(src).unwrap();
        let q = p.remove_label("0").unwrap().remove_label("1").unwrap();
        let instrs = &q.processes[0].instrs;
        assert_eq!(instrs.len(), 5);
        assert!(matches!(instrs[0].stmt, Statement::Goto { target: 3 }));
        assert!(matches!(instrs[1].stmt, Statement::Goto { target: 4 }));
        assert_ne!(instrs[3].label, instrs[4].label);
    }

    #[test]
    fn next_label_cases() {
        let src = "vars x\nproc P weight 1\nregs a\n0: x := a\n1: a := x\n2: term\n";
        let p = parse_program(src).unwrap();
        assert_eq!(p.next_label("0").unwrap(), "1");
        assert_eq!(p.next_label("1").unwrap(), "2");
        assert_eq!(p.next_label("2"), Err(LangError::NextOfTerm("2".into())));
    }
}
