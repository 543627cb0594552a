//! The classical TSO transition system of a program.
//!
//! A step of the system is a process transition (one instruction of one
//! enabled process, or the identity when every process is disabled) followed
//! by an update transition that pops a, possibly empty, sequence of oldest
//! buffered writes into shared memory.
//!
//! Buffers are stored newest-first: a write inserts at index 0 and an update
//! pops the last element.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::lang::{Expr, Loc, Program, Statement, Value};

/// Buffered totals at or below this size are "small".
pub const SMALL_SIZE: usize = 4;

/// Largest total buffer size for which schedule counts fit in `u128`.
pub const MAX_UPDATE_SIZE: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("process {0} is disabled")]
    Disabled(usize),
    #[error("configuration is not disabled")]
    NotDisabled,
    #[error("schedule pops more messages from process {0} than its buffer holds")]
    InfeasibleSchedule(usize),
    #[error("invalid configuration: {0}")]
    BadConfiguration(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Message {
    pub var: u16,
    pub value: Value,
}

/// A configuration of the transition system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    /// Instruction index of each process.
    pub pcs: Vec<u32>,
    /// All registers, flattened in process order.
    pub regs: Vec<Value>,
    /// One store buffer per process, newest message first.
    pub buffers: Vec<Vec<Message>>,
    pub memory: Vec<Value>,
}

impl Configuration {
    /// Total number of buffered messages.
    pub fn size(&self) -> usize {
        self.buffers.iter().map(Vec::len).sum()
    }

    pub fn is_plain(&self) -> bool {
        self.buffers.iter().all(Vec::is_empty)
    }

    pub fn is_small(&self) -> bool {
        self.size() <= SMALL_SIZE
    }

    /// 0 for small configurations, the size otherwise.
    pub fn level(&self) -> usize {
        match self.size() {
            s if s <= SMALL_SIZE => 0,
            s => s,
        }
    }

    pub fn at(&self, loc: Loc) -> bool {
        self.pcs[loc.process] as usize == loc.index
    }

    /// Current instruction of `process`.
    pub fn loc_of(&self, process: usize) -> Loc {
        Loc { process, index: self.pcs[process] as usize }
    }
}

/// A word over processes; each letter pops the oldest remaining message of
/// that process. Letters are executed front to back.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct UpdateSchedule(pub Vec<usize>);

/// What the process transition of a step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Choice {
    Process(usize),
    Disabled,
}

pub fn initial_config(p: &Program) -> Configuration {
    Configuration {
        pcs: vec![0; p.processes.len()],
        regs: vec![0; p.num_regs()],
        buffers: vec![Vec::new(); p.processes.len()],
        memory: vec![0; p.vars.len()],
    }
}

/// Value of `var` as seen by a process with buffer `buf`: the newest buffered
/// write to `var`, or memory when there is none.
pub fn fetch_val(var: usize, buf: &[Message], mem: &[Value]) -> Value {
    buf.iter()
        .find(|m| m.var as usize == var)
        .map_or(mem[var], |m| m.value)
}

fn process_disabled(p: &Program, c: &Configuration, proc: usize) -> bool {
    match p.stmt_at(c.loc_of(proc)) {
        Statement::Term => true,
        Statement::Cas { .. } => !c.buffers[proc].is_empty(),
        _ => false,
    }
}

pub fn enabled_set(p: &Program, c: &Configuration) -> Vec<usize> {
    (0..p.processes.len())
        .filter(|&q| !process_disabled(p, c, q))
        .collect()
}

pub fn is_disabled(p: &Program, c: &Configuration) -> bool {
    (0..p.processes.len()).all(|q| process_disabled(p, c, q))
}

fn reg_offset(p: &Program, proc: usize) -> usize {
    p.processes[..proc].iter().map(|q| q.regs.len()).sum()
}

/// Executes the next instruction of `proc`.
pub fn process_step(
    p: &Program,
    c: &Configuration,
    proc: usize,
) -> Result<Configuration, SemanticsError> {
    if process_disabled(p, c, proc) {
        return Err(SemanticsError::Disabled(proc));
    }
    let off = reg_offset(p, proc);
    let domain = p.domain as u16;
    let mut next = c.clone();
    let pc = c.pcs[proc];
    next.pcs[proc] = pc + 1;
    match p.stmt_at(c.loc_of(proc)) {
        Statement::Write { var, reg } => {
            let msg = Message { var: *var as u16, value: c.regs[off + reg] };
            next.buffers[proc].insert(0, msg);
        }
        Statement::Read { reg, var } => {
            next.regs[off + reg] = fetch_val(*var, &c.buffers[proc], &c.memory);
        }
        Statement::Assign { reg, expr } => {
            let r = |i: usize| c.regs[off + i];
            next.regs[off + reg] = match expr {
                Expr::Const(v) => *v,
                Expr::Reg(a) => r(*a),
                Expr::Add(a, b) => ((r(*a) as u16 + r(*b) as u16) % domain) as Value,
                Expr::Eq(a, b) => Value::from(r(*a) == r(*b)),
            };
        }
        Statement::Cas { out, var, cmp, new } => {
            if c.memory[*var] == c.regs[off + cmp] {
                next.memory[*var] = c.regs[off + new];
                next.regs[off + out] = 1;
            } else {
                next.regs[off + out] = 0;
            }
        }
        Statement::If { reg, target } => {
            if c.regs[off + reg] != 0 {
                next.pcs[proc] = *target as u32;
            }
        }
        Statement::Goto { target } => next.pcs[proc] = *target as u32,
        Statement::Term => unreachable!("term is always disabled"),
    }
    Ok(next)
}

/// The identity step taken when every process is disabled.
pub fn disabled_step(p: &Program, c: &Configuration) -> Result<Configuration, SemanticsError> {
    if is_disabled(p, c) {
        Ok(c.clone())
    } else {
        Err(SemanticsError::NotDisabled)
    }
}

/// Process transition for `choice`.
pub fn choice_step(
    p: &Program,
    c: &Configuration,
    choice: Choice,
) -> Result<Configuration, SemanticsError> {
    match choice {
        Choice::Process(q) => process_step(p, c, q),
        Choice::Disabled => disabled_step(p, c),
    }
}

/// All process transitions available at `c`.
pub fn process_moves(p: &Program, c: &Configuration) -> Vec<(Choice, Configuration)> {
    let enabled = enabled_set(p, c);
    if enabled.is_empty() {
        return vec![(Choice::Disabled, c.clone())];
    }
    enabled
        .into_iter()
        .map(|q| (Choice::Process(q), process_step(p, c, q).expect("enabled process steps")))
        .collect()
}

pub fn apply_schedule(
    c: &Configuration,
    w: &UpdateSchedule,
) -> Result<Configuration, SemanticsError> {
    let mut next = c.clone();
    for &q in &w.0 {
        let msg = next
            .buffers
            .get_mut(q)
            .and_then(Vec::pop)
            .ok_or(SemanticsError::InfeasibleSchedule(q))?;
        next.memory[msg.var as usize] = msg.value;
    }
    Ok(next)
}

/// Update successors of a configuration with the number of schedules
/// reaching each of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateSuccessors {
    pub counts: BTreeMap<Configuration, u128>,
    pub total: u128,
}

/// Enumerates the feasible update schedules of `c` grouped by the
/// configuration they produce.
///
/// A schedule is a monotone path in the lattice of per-process pop counts
/// starting at the origin, and the resulting memory depends only on the path.
/// The enumeration is a dynamic program over lattice points and memory
/// states, so schedules that agree on both are counted together.
pub fn update_successors(c: &Configuration) -> UpdateSuccessors {
    assert!(
        c.size() <= MAX_UPDATE_SIZE,
        "buffers hold {} messages, more than the supported {MAX_UPDATE_SIZE}",
        c.size()
    );
    let lens: Vec<usize> = c.buffers.iter().map(Vec::len).collect();
    let mut counts: BTreeMap<Configuration, u128> = BTreeMap::new();
    let mut total: u128 = 0;
    let mut layer: HashMap<(Vec<u8>, Vec<Value>), u128> = HashMap::new();
    layer.insert((vec![0; lens.len()], c.memory.clone()), 1);
    while !layer.is_empty() {
        let mut next_layer: HashMap<(Vec<u8>, Vec<Value>), u128> = HashMap::new();
        for ((popped, mem), n) in layer {
            total += n;
            let succ = Configuration {
                pcs: c.pcs.clone(),
                regs: c.regs.clone(),
                buffers: c
                    .buffers
                    .iter()
                    .zip(&popped)
                    .map(|(b, &k)| b[..b.len() - k as usize].to_vec())
                    .collect(),
                memory: mem.clone(),
            };
            *counts.entry(succ).or_insert(0) += n;
            for (q, &len) in lens.iter().enumerate() {
                let k = popped[q] as usize;
                if k < len {
                    let msg = c.buffers[q][len - 1 - k];
                    let mut popped2 = popped.clone();
                    popped2[q] += 1;
                    let mut mem2 = mem.clone();
                    mem2[msg.var as usize] = msg.value;
                    *next_layer.entry((popped2, mem2)).or_insert(0) += n;
                }
            }
        }
        layer = next_layer;
    }
    UpdateSuccessors { counts, total }
}

/// Number of update schedules available to buffers with the given lengths:
/// the sum over pop-count tuples of the multinomial coefficients.
pub fn schedule_count(lens: &[usize]) -> u128 {
    let mut memo = HashMap::new();
    schedules_from(lens, &mut memo)
}

/// Number of schedule words (including the empty one) available when the
/// buffers still hold `remaining` messages.
pub(crate) fn schedules_from(remaining: &[usize], memo: &mut HashMap<Vec<usize>, u128>) -> u128 {
    let mut key: Vec<usize> = remaining.iter().copied().filter(|&r| r > 0).collect();
    key.sort_unstable();
    if key.is_empty() {
        return 1;
    }
    if let Some(&n) = memo.get(&key) {
        return n;
    }
    let mut n: u128 = 1;
    for i in 0..key.len() {
        let mut rest = key.clone();
        rest[i] -= 1;
        n += schedules_from(&rest, memo);
    }
    memo.insert(key, n);
    n
}

/// Successors of `c` in the transition system.
pub fn ts_successors(p: &Program, c: &Configuration) -> BTreeSet<Configuration> {
    let mut out = BTreeSet::new();
    for (_, mid) in process_moves(p, c) {
        out.extend(update_successors(&mid).counts.into_keys());
    }
    out
}

/// Finds a process choice and schedule leading from `c` to `target` in one
/// step, if there is one.
pub fn find_transition(
    p: &Program,
    c: &Configuration,
    target: &Configuration,
) -> Option<(Choice, UpdateSchedule)> {
    for (choice, mid) in process_moves(p, c) {
        if mid.pcs != target.pcs || mid.regs != target.regs {
            continue;
        }
        if let Some(w) = find_schedule(&mid, target) {
            return Some((choice, w));
        }
    }
    None
}

/// Finds a schedule turning `c` into `target`.
pub fn find_schedule(c: &Configuration, target: &Configuration) -> Option<UpdateSchedule> {
    let pops: Vec<usize> = c
        .buffers
        .iter()
        .zip(&target.buffers)
        .map(|(b, t)| b.len().checked_sub(t.len()))
        .collect::<Option<_>>()?;
    if c.buffers.iter().zip(&target.buffers).any(|(b, t)| b[..t.len()] != t[..]) {
        return None;
    }
    let mut word = Vec::new();
    let mut seen = std::collections::HashSet::new();
    fn dfs(
        c: &Configuration,
        pops: &[usize],
        done: &mut Vec<usize>,
        mem: &mut Vec<Value>,
        word: &mut Vec<usize>,
        target: &[Value],
        seen: &mut std::collections::HashSet<(Vec<usize>, Vec<Value>)>,
    ) -> bool {
        if done[..] == pops[..] {
            return mem[..] == target[..];
        }
        if !seen.insert((done.clone(), mem.clone())) {
            return false;
        }
        for q in 0..pops.len() {
            if done[q] < pops[q] {
                let len = c.buffers[q].len();
                let msg = c.buffers[q][len - 1 - done[q]];
                let old = mem[msg.var as usize];
                mem[msg.var as usize] = msg.value;
                done[q] += 1;
                word.push(q);
                if dfs(c, pops, done, mem, word, target, seen) {
                    return true;
                }
                word.pop();
                done[q] -= 1;
                mem[msg.var as usize] = old;
            }
        }
        false
    }
    let mut done = vec![0; pops.len()];
    let mut mem = c.memory.clone();
    dfs(c, &pops, &mut done, &mut mem, &mut word, &target.memory, &mut seen)
        .then_some(UpdateSchedule(word))
}

/// Canonical JSON rendering, buffers listed newest first.
pub fn render_config(p: &Program, c: &Configuration) -> Json {
    let mut labels = Map::new();
    let mut regs = Map::new();
    let mut bufs = Map::new();
    let mut off = 0;
    for (i, proc) in p.processes.iter().enumerate() {
        labels.insert(proc.name.clone(), json!(proc.instrs[c.pcs[i] as usize].label));
        for (j, r) in proc.regs.iter().enumerate() {
            regs.insert(r.clone(), json!(c.regs[off + j]));
        }
        off += proc.regs.len();
        let msgs: Vec<Json> = c.buffers[i]
            .iter()
            .map(|m| json!([p.vars[m.var as usize], m.value]))
            .collect();
        bufs.insert(proc.name.clone(), Json::Array(msgs));
    }
    let mem: Map<String, Json> = p
        .vars
        .iter()
        .zip(&c.memory)
        .map(|(v, x)| (v.clone(), json!(x)))
        .collect();
    json!({ "labels": labels, "regs": regs, "bufs": bufs, "mem": mem })
}

/// Inverse of [`render_config`]. Omitted registers, variables and buffers
/// default to 0 / empty; omitted labels default to the first instruction.
pub fn parse_config(p: &Program, v: &Json) -> Result<Configuration, SemanticsError> {
    let bad = |m: String| SemanticsError::BadConfiguration(m);
    let obj = v.as_object().ok_or_else(|| bad("expected a JSON object".into()))?;
    let mut c = initial_config(p);
    let value = |x: &Json| -> Result<Value, SemanticsError> {
        x.as_u64()
            .filter(|&n| n < p.domain as u64)
            .map(|n| n as Value)
            .ok_or_else(|| bad(format!("value {x} outside the domain")))
    };
    if let Some(labels) = obj.get("labels").and_then(Json::as_object) {
        for (name, l) in labels {
            let q = p.process_index(name).ok_or_else(|| bad(format!("unknown process {name}")))?;
            let l = l.as_str().ok_or_else(|| bad("labels must be strings".into()))?;
            let loc = p.locate(l).filter(|loc| loc.process == q);
            let loc = loc.ok_or_else(|| bad(format!("label {l} is not in process {name}")))?;
            c.pcs[q] = loc.index as u32;
        }
    }
    if let Some(regs) = obj.get("regs").and_then(Json::as_object) {
        let offsets = p.reg_offsets();
        for (name, x) in regs {
            let slot = p.processes.iter().enumerate().find_map(|(i, proc)| {
                proc.regs.iter().position(|r| r == name).map(|j| offsets[i] + j)
            });
            let slot = slot.ok_or_else(|| bad(format!("unknown register {name}")))?;
            c.regs[slot] = value(x)?;
        }
    }
    if let Some(bufs) = obj.get("bufs").and_then(Json::as_object) {
        for (name, msgs) in bufs {
            let q = p.process_index(name).ok_or_else(|| bad(format!("unknown process {name}")))?;
            let msgs = msgs.as_array().ok_or_else(|| bad("buffers must be arrays".into()))?;
            for m in msgs {
                let pair = m.as_array().filter(|a| a.len() == 2);
                let pair = pair.ok_or_else(|| bad("messages are [var, value] pairs".into()))?;
                let var = pair[0].as_str().and_then(|s| p.var_index(s));
                let var = var.ok_or_else(|| bad(format!("unknown variable {}", pair[0])))?;
                c.buffers[q].push(Message { var: var as u16, value: value(&pair[1])? });
            }
        }
    }
    if let Some(mem) = obj.get("mem").and_then(Json::as_object) {
        for (name, x) in mem {
            let var = p.var_index(name).ok_or_else(|| bad(format!("unknown variable {name}")))?;
            c.memory[var] = value(x)?;
        }
    }
    Ok(c)
}
