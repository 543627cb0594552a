//! Independent reference implementation for the integration tests: a naive
//! interpreter, brute-force enumeration of update words, full state-space
//! exploration and exact absorption probabilities by sparse elimination.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, VecDeque};

use num::{One, Zero};
use ptso_core::lang::{Expr, Program, Statement};
use ptso_core::markov::{rat, Rational};
use ptso_core::semantics::{Configuration, Message};

pub const CORPUS: &[(&str, &str)] = &[
    ("lr_loop", include_str!("../../../../corpus/lr_loop.ptso")),
    ("race_sb", include_str!("../../../../corpus/race_sb.ptso")),
    ("race_writers", include_str!("../../../../corpus/race_writers.ptso")),
    ("race_cas", include_str!("../../../../corpus/race_cas.ptso")),
    ("race_spin", include_str!("../../../../corpus/race_spin.ptso")),
    ("rep_two_loops", include_str!("../../../../corpus/rep_two_loops.ptso")),
    ("cost_branch", include_str!("../../../../corpus/cost_branch.ptso")),
    ("straight", include_str!("../../../../corpus/straight.ptso")),
    ("writers", include_str!("../../../../corpus/writers.ptso")),
];

pub const BRANCH_COSTS: &str = include_str!("../../../../corpus/branch_costs.json");

pub fn corpus(name: &str) -> Program {
    let src = CORPUS.iter().find(|(n, _)| *n == name).expect("corpus program").1;
    ptso_core::lang::parse_program(src).expect("corpus program parses")
}

fn reg_base(p: &Program, q: usize) -> usize {
    p.processes.iter().take(q).map(|d| d.regs.len()).sum()
}

fn stmt<'a>(p: &'a Program, c: &Configuration, q: usize) -> &'a Statement {
    &p.processes[q].instrs[c.pcs[q] as usize].stmt
}

fn can_move(p: &Program, c: &Configuration, q: usize) -> bool {
    match stmt(p, c, q) {
        Statement::Term => false,
        Statement::Cas { .. } => c.buffers[q].is_empty(),
        _ => true,
    }
}

/// Executes one instruction of `q`, or `None` when it cannot move.
pub fn naive_process_step(p: &Program, c: &Configuration, q: usize) -> Option<Configuration> {
    if !can_move(p, c, q) {
        return None;
    }
    let b = reg_base(p, q);
    let mut d = c.clone();
    d.pcs[q] += 1;
    match stmt(p, c, q).clone() {
        Statement::Write { var, reg } => {
            d.buffers[q].insert(0, Message { var: var as u16, value: c.regs[b + reg] });
        }
        Statement::Read { reg, var } => {
            let mut v = c.memory[var];
            for m in c.buffers[q].iter().rev() {
                if m.var as usize == var {
                    v = m.value;
                }
            }
            d.regs[b + reg] = v;
        }
        Statement::Assign { reg, expr } => {
            d.regs[b + reg] = match expr {
                Expr::Const(v) => v,
                Expr::Reg(a) => c.regs[b + a],
                Expr::Add(x, y) => ((c.regs[b + x] as u32 + c.regs[b + y] as u32) % p.domain) as u8,
                Expr::Eq(x, y) => (c.regs[b + x] == c.regs[b + y]) as u8,
            };
        }
        Statement::Cas { out, var, cmp, new } => {
            let ok = c.memory[var] == c.regs[b + cmp];
            if ok {
                d.memory[var] = c.regs[b + new];
            }
            d.regs[b + out] = ok as u8;
        }
        Statement::If { reg, target } => {
            if c.regs[b + reg] != 0 {
                d.pcs[q] = target as u32;
            }
        }
        Statement::Goto { target } => d.pcs[q] = target as u32,
        Statement::Term => unreachable!(),
    }
    Some(d)
}

/// Every update word over `c`'s buffers, applied one by one.
pub fn all_update_words(c: &Configuration) -> Vec<(Vec<usize>, Configuration)> {
    let mut out = vec![(Vec::new(), c.clone())];
    let mut i = 0;
    while i < out.len() {
        let (w, d) = out[i].clone();
        for q in 0..d.buffers.len() {
            if let Some(m) = d.buffers[q].last().copied() {
                let mut e = d.clone();
                e.buffers[q].pop();
                e.memory[m.var as usize] = m.value;
                let mut w2 = w.clone();
                w2.push(q);
                out.push((w2, e));
            }
        }
        i += 1;
    }
    out
}

pub fn naive_updates(c: &Configuration) -> BTreeMap<Configuration, Rational> {
    let words = all_update_words(c);
    let each = rat(1, words.len() as i64);
    let mut m: BTreeMap<Configuration, Rational> = BTreeMap::new();
    for (_, d) in words {
        *m.entry(d).or_insert_with(Rational::zero) += &each;
    }
    m
}

/// One row of the chain, split by the cost of the instruction executed.
pub fn naive_step(p: &Program, c: &Configuration, cost: &dyn Fn(usize, usize) -> u64) -> Vec<(Configuration, Rational, u64)> {
    let movers: Vec<usize> = (0..p.processes.len()).filter(|&q| can_move(p, c, q)).collect();
    let mut row = Vec::new();
    if movers.is_empty() {
        for (d, pu) in naive_updates(c) {
            row.push((d, pu, 0));
        }
        return row;
    }
    let total: u32 = movers.iter().map(|&q| p.processes[q].weight).sum();
    for q in movers {
        let pq = rat(p.processes[q].weight as i64, total as i64);
        let mid = naive_process_step(p, c, q).unwrap();
        let k = cost(q, c.pcs[q] as usize);
        for (d, pu) in naive_updates(&mid) {
            row.push((d, &pq * pu, k));
        }
    }
    row
}

pub fn merged_row(p: &Program, c: &Configuration) -> BTreeMap<Configuration, Rational> {
    let mut m: BTreeMap<Configuration, Rational> = BTreeMap::new();
    for (d, pr, _) in naive_step(p, c, &|_, _| 0) {
        *m.entry(d).or_insert_with(Rational::zero) += pr;
    }
    m
}

pub struct Explicit {
    pub states: Vec<Configuration>,
    pub rows: Vec<Vec<(usize, Rational, u64)>>,
}

/// Explores everything reachable from `iota`; panics beyond `limit` states.
pub fn explore(p: &Program, iota: &Configuration, limit: usize, cost: &dyn Fn(usize, usize) -> u64) -> Explicit {
    let mut index: HashMap<Configuration, usize> = HashMap::new();
    let mut states = vec![iota.clone()];
    index.insert(iota.clone(), 0);
    let mut rows = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let c = states[i].clone();
        let mut row = Vec::new();
        for (d, pr, k) in naive_step(p, &c, cost) {
            let j = *index.entry(d.clone()).or_insert_with(|| {
                states.push(d);
                states.len() - 1
            });
            row.push((j, pr, k));
        }
        rows.push(row);
        i += 1;
        assert!(states.len() <= limit, "state space exceeds {limit}");
    }
    Explicit { states, rows }
}

/// States from which some state in `target` is reachable.
fn backward(x: &Explicit, target: &[bool]) -> Vec<bool> {
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); x.states.len()];
    for (i, row) in x.rows.iter().enumerate() {
        for (j, _, _) in row {
            pred[*j].push(i);
        }
    }
    let mut seen = target.to_vec();
    let mut queue: VecDeque<usize> = (0..seen.len()).filter(|&i| seen[i]).collect();
    while let Some(j) = queue.pop_front() {
        for &i in &pred[j] {
            if !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    seen
}

/// Solves `x_i = sum_j a_ij x_j + b_i` over the unknown states by Gaussian
/// elimination on sparse rows.
fn solve(rows: Vec<(BTreeMap<usize, Rational>, Rational)>, unknown: &[usize]) -> HashMap<usize, Rational> {
    let mut eqs: HashMap<usize, (BTreeMap<usize, Rational>, Rational)> = HashMap::new();
    // equation for unknown u: x_u - sum a x = b, stored as coefficients on the left
    for (&u, (a, b)) in unknown.iter().zip(rows) {
        let mut lhs = BTreeMap::new();
        lhs.insert(u, Rational::one());
        for (j, v) in a {
            *lhs.entry(j).or_insert_with(Rational::zero) -= v;
        }
        lhs.retain(|_, v| !v.is_zero());
        eqs.insert(u, (lhs, b));
    }
    let mut solved: Vec<(usize, BTreeMap<usize, Rational>, Rational)> = Vec::new();
    for &u in unknown {
        let (mut lhs, mut b) = eqs.remove(&u).unwrap();
        // substitute earlier pivots
        for (v, vl, vb) in &solved {
            if let Some(k) = lhs.remove(v) {
                for (j, c) in vl {
                    *lhs.entry(*j).or_insert_with(Rational::zero) -= &k * c;
                }
                b -= &k * vb;
                lhs.retain(|_, c| !c.is_zero());
            }
        }
        let piv = lhs.remove(&u).expect("nonsingular system");
        for c in lhs.values_mut() {
            *c /= &piv;
        }
        b /= &piv;
        // eliminate u from earlier pivots to keep them in terms of later unknowns only
        for (_, vl, vb) in solved.iter_mut() {
            if let Some(k) = vl.remove(&u) {
                for (j, c) in &lhs {
                    *vl.entry(*j).or_insert_with(Rational::zero) -= &k * c;
                }
                *vb -= &k * &b;
                vl.retain(|_, c| !c.is_zero());
            }
        }
        solved.push((u, lhs, b));
    }
    solved
        .into_iter()
        .map(|(u, lhs, b)| {
            assert!(lhs.is_empty(), "system not fully reduced");
            (u, b)
        })
        .collect()
}

/// Probability of eventually reaching a `target` state from each state.
pub fn absorption(x: &Explicit, target: &[bool]) -> Vec<Rational> {
    let can = backward(x, target);
    let unknown: Vec<usize> = (0..x.states.len()).filter(|&i| can[i] && !target[i]).collect();
    let rows = unknown
        .iter()
        .map(|&i| {
            let mut a: BTreeMap<usize, Rational> = BTreeMap::new();
            let mut b = Rational::zero();
            for (j, pr, _) in &x.rows[i] {
                if target[*j] {
                    b += pr;
                } else if can[*j] {
                    *a.entry(*j).or_insert_with(Rational::zero) += pr;
                }
            }
            (a, b)
        })
        .collect();
    let sol = solve(rows, &unknown);
    (0..x.states.len())
        .map(|i| {
            if target[i] {
                Rational::one()
            } else {
                sol.get(&i).cloned().unwrap_or_else(Rational::zero)
            }
        })
        .collect()
}

/// Probability of eventually entering a bottom component containing a
/// `good` state, i.e. of visiting `good` infinitely often.
pub fn repeated_absorption(x: &Explicit, good: &[bool]) -> Vec<Rational> {
    let n = x.states.len();
    let succ: Vec<Vec<usize>> = x.rows.iter().map(|r| r.iter().map(|e| e.0).collect()).collect();
    // a state is in a bottom component iff everything it reaches reaches it back
    let reach_from = |s: usize| {
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut st = vec![s];
        while let Some(i) = st.pop() {
            for &j in &succ[i] {
                if !seen[j] {
                    seen[j] = true;
                    st.push(j);
                }
            }
        }
        seen
    };
    let closures: Vec<Vec<bool>> = (0..n).map(reach_from).collect();
    let mut target = vec![false; n];
    for s in 0..n {
        let bottom = (0..n).all(|t| !closures[s][t] || closures[t][s]);
        if bottom && (0..n).any(|t| closures[s][t] && good[t]) {
            target[s] = true;
        }
    }
    absorption(x, &target)
}

/// Probability of reaching `target` and expected cost accumulated before
/// the first hit, conditioned on hitting.
pub fn conditional_cost(x: &Explicit, target: &[bool]) -> (Rational, Rational) {
    let h = absorption(x, target);
    let can: Vec<bool> = h.iter().map(|v| !v.is_zero()).collect();
    let unknown: Vec<usize> = (0..x.states.len()).filter(|&i| can[i] && !target[i]).collect();
    // g_i = sum_j p_ij (k_ij h_j + g_j), g = 0 on targets
    let rows = unknown
        .iter()
        .map(|&i| {
            let mut a: BTreeMap<usize, Rational> = BTreeMap::new();
            let mut b = Rational::zero();
            for (j, pr, k) in &x.rows[i] {
                b += pr * Rational::from_integer((*k).into()) * &h[*j];
                if can[*j] && !target[*j] {
                    *a.entry(*j).or_insert_with(Rational::zero) += pr;
                }
            }
            (a, b)
        })
        .collect();
    let g = solve(rows, &unknown);
    let g0 = if target[0] { Rational::zero() } else { g.get(&0).cloned().unwrap_or_else(Rational::zero) };
    if h[0].is_zero() {
        (h[0].clone(), Rational::zero())
    } else {
        (h[0].clone(), g0 / &h[0])
    }
}

/// Exhaustive reachability probability of `label` from `iota`.
pub fn exact_reach(p: &Program, iota: &Configuration, label: &str, limit: usize) -> Rational {
    let loc = p.locate(label).unwrap();
    let x = explore(p, iota, limit, &|_, _| 0);
    let target: Vec<bool> = x.states.iter().map(|c| c.pcs[loc.process] as usize == loc.index).collect();
    absorption(&x, &target)[0].clone()
}

pub fn exact_rep_reach(p: &Program, iota: &Configuration, label: &str, limit: usize) -> Rational {
    let loc = p.locate(label).unwrap();
    let x = explore(p, iota, limit, &|_, _| 0);
    let good: Vec<bool> = x.states.iter().map(|c| c.pcs[loc.process] as usize == loc.index).collect();
    repeated_absorption(&x, &good)[0].clone()
}

/// Gambler's-ruin first passage: probability that a walk moving towards
/// the target with probability `q = 1 - p` first gets one step closer than
/// its start at exactly step `n`, by enumerating paths that have not yet
/// arrived.
pub fn brute_first_passage(p: &Rational, n: u32) -> Rational {
    fn go(p: &Rational, q: &Rational, pos: i32, left: u32, pr: Rational) -> Rational {
        if pos == -1 {
            return if left == 0 { pr } else { Rational::zero() };
        }
        if left == 0 {
            return Rational::zero();
        }
        go(p, q, pos + 1, left - 1, &pr * p) + go(p, q, pos - 1, left - 1, &pr * q)
    }
    let q = Rational::one() - p;
    go(p, &q, 0, n, Rational::one())
}
