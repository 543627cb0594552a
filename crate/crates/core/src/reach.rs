//! Reachability oracle over the buffer-bounded transition system.
//!
//! Exact reachability for unbounded buffers is out of reach in practice, so
//! the oracle explores the sub-system whose configurations hold at most `K`
//! buffered messages. The explored graph is shared between queries and every
//! answer is memoised per target. A "No" is exact for the bounded system; when
//! the search had to prune successors above the bound, the answer is either
//! trusted (`AssumeNo`) or surfaced as `Unknown` (`ReportUnknown`).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::lang::{Loc, Program, Value};
use crate::scc;
use crate::semantics::{self, Choice, Configuration, MAX_UPDATE_SIZE};

pub const DEFAULT_BOUND: usize = 8;
pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;
pub const DEFAULT_PLAIN_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    Bounded(usize),
    /// Retry with a larger bound while answers depend on pruned successors.
    Iterative { start: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    AssumeNo,
    ReportUnknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub mode: BoundMode,
    pub strictness: Strictness,
    /// Maximum number of explored configurations per bound.
    pub node_budget: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            mode: BoundMode::Bounded(DEFAULT_BOUND),
            strictness: Strictness::AssumeNo,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl OracleConfig {
    pub fn bounded(k: usize) -> Self {
        OracleConfig { mode: BoundMode::Bounded(k), ..Default::default() }
    }

    pub fn iterative(start: usize, max: usize) -> Self {
        OracleConfig { mode: BoundMode::Iterative { start, max }, ..Default::default() }
    }

    pub fn strict(mut self) -> Self {
        self.strictness = Strictness::ReportUnknown;
        self
    }

    fn bounds(&self) -> Vec<usize> {
        match self.mode {
            BoundMode::Bounded(k) => vec![k],
            BoundMode::Iterative { start, max } => (start..=max).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let (lo, hi) = match self.mode {
            BoundMode::Bounded(k) => (k, k),
            BoundMode::Iterative { start, max } => (start, max),
        };
        if lo < 1 || lo > hi || hi >= MAX_UPDATE_SIZE {
            return Err(OracleError::InvalidConfig(format!(
                "bounds must satisfy 1 <= K0 <= Kmax < {MAX_UPDATE_SIZE}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("invalid oracle configuration: {0}")]
    InvalidConfig(String),
    #[error("target configuration is not plain")]
    NonPlainTarget,
    #[error("unknown label {0}")]
    UnknownLabel(String),
    #[error("answer unknown: exploration was pruned at buffer bound {bound}")]
    Unknown { bound: usize },
    #[error("exploration exceeded the budget of {budget} configurations")]
    Budget { budget: usize },
    #[error("{count} plain configurations exceed the cap of {cap}")]
    PlainCap { count: u128, cap: usize },
}

/// A path in the transition system, both ends included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub path: Vec<Configuration>,
}

impl Witness {
    pub fn steps(&self) -> usize {
        self.path.len() - 1
    }

    /// Configurations with the process choice and update schedule of each step.
    pub fn to_json(&self, p: &Program) -> Json {
        let mut steps = vec![json!({ "config": semantics::render_config(p, &self.path[0]) })];
        for pair in self.path.windows(2) {
            let (choice, w) = semantics::find_transition(p, &pair[0], &pair[1])
                .expect("witness steps are transitions");
            let process = match choice {
                Choice::Process(q) => json!(p.processes[q].name),
                Choice::Disabled => Json::Null,
            };
            let schedule: Vec<&str> = w.0.iter().map(|&q| p.processes[q].name.as_str()).collect();
            steps.push(json!({
                "process": process,
                "schedule": schedule,
                "config": semantics::render_config(p, &pair[1]),
            }));
        }
        Json::Array(steps)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReachAnswer {
    Yes(Witness),
    No,
    Unknown { bound: usize },
}

impl ReachAnswer {
    pub fn is_yes(&self) -> bool {
        matches!(self, ReachAnswer::Yes(_))
    }

    pub fn to_bool(&self) -> Result<bool, OracleError> {
        match self {
            ReachAnswer::Yes(_) => Ok(true),
            ReachAnswer::No => Ok(false),
            ReachAnswer::Unknown { bound } => Err(OracleError::Unknown { bound: *bound }),
        }
    }
}

/// Handle of a configuration set registered with [`Oracle::register_set`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SetId(usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Target {
    Loc(Loc),
    Config(Configuration),
    Set(SetId),
}

#[derive(Default)]
struct Memo {
    /// Nodes known to reach the target, with the next node of a witness
    /// path (`None` when the node itself is a target).
    yes: HashMap<u32, Option<u32>>,
    /// Nodes known not to reach it; the flag records pruning.
    no: HashMap<u32, bool>,
}

struct Graph {
    bound: usize,
    nodes: Vec<Configuration>,
    index: HashMap<Configuration, u32>,
    succ: Vec<Option<Vec<u32>>>,
    pruned: Vec<bool>,
}

impl Graph {
    fn new(bound: usize) -> Self {
        Graph { bound, nodes: Vec::new(), index: HashMap::new(), succ: Vec::new(), pruned: Vec::new() }
    }

    fn intern(&mut self, c: &Configuration) -> u32 {
        if let Some(&i) = self.index.get(c) {
            return i;
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(c.clone());
        self.index.insert(c.clone(), i);
        self.succ.push(None);
        self.pruned.push(false);
        i
    }

    fn expand(&mut self, v: u32, p: &Program, budget: usize) -> Result<(), OracleError> {
        if self.succ[v as usize].is_some() {
            return Ok(());
        }
        let c = self.nodes[v as usize].clone();
        let mut out = Vec::new();
        let mut pruned = false;
        for s in semantics::ts_successors(p, &c) {
            if s.size() > self.bound {
                pruned = true;
            } else {
                out.push(self.intern(&s));
            }
        }
        if self.nodes.len() > budget {
            return Err(OracleError::Budget { budget });
        }
        self.succ[v as usize] = Some(out);
        self.pruned[v as usize] = pruned;
        Ok(())
    }

    /// Forward closure of `v`, and whether any node in it was pruned.
    fn closure(&mut self, v: u32, p: &Program, budget: usize) -> Result<(Vec<u32>, bool), OracleError> {
        let mut seen = HashSet::from([v]);
        let mut order = vec![v];
        let mut tainted = false;
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            self.expand(u, p, budget)?;
            tainted |= self.pruned[u as usize];
            for &w in self.succ[u as usize].as_ref().unwrap() {
                if seen.insert(w) {
                    order.push(w);
                }
            }
        }
        Ok((order, tainted))
    }
}

enum Search {
    Found(Vec<u32>),
    NotFound { tainted: bool },
}

fn search(
    p: &Program,
    graph: &mut Graph,
    memo: &mut Memo,
    start: &Configuration,
    is_target: &dyn Fn(&Configuration) -> bool,
    budget: usize,
) -> Result<Search, OracleError> {
    let s = graph.intern(start);
    if let Some(&tainted) = memo.no.get(&s) {
        return Ok(Search::NotFound { tainted });
    }
    let mut parent: HashMap<u32, u32> = HashMap::new();
    let mut visited = vec![s];
    let mut seen = HashSet::from([s]);
    let mut queue = VecDeque::from([s]);
    let mut tainted = false;
    while let Some(v) = queue.pop_front() {
        let hit = match memo.yes.get(&v) {
            Some(_) => true,
            None if is_target(&graph.nodes[v as usize]) => {
                memo.yes.insert(v, None);
                true
            }
            None => false,
        };
        if hit {
            let mut path = vec![v];
            while let Some(&u) = parent.get(path.last().unwrap()) {
                path.push(u);
            }
            path.reverse();
            for pair in path.windows(2) {
                memo.yes.insert(pair[0], Some(pair[1]));
            }
            let mut last = v;
            while let Some(&Some(next)) = memo.yes.get(&last) {
                path.push(next);
                last = next;
            }
            return Ok(Search::Found(path));
        }
        if let Some(&t) = memo.no.get(&v) {
            tainted |= t;
            continue;
        }
        graph.expand(v, p, budget)?;
        tainted |= graph.pruned[v as usize];
        for &w in graph.succ[v as usize].as_ref().unwrap() {
            if seen.insert(w) {
                parent.insert(w, v);
                visited.push(w);
                queue.push_back(w);
            }
        }
    }
    for v in visited {
        memo.no.insert(v, tainted);
    }
    Ok(Search::NotFound { tainted })
}

/// Memoising reachability oracle for one program.
pub struct Oracle {
    program: Program,
    config: OracleConfig,
    graphs: BTreeMap<usize, Graph>,
    memos: HashMap<(usize, Target), Memo>,
    sets: Vec<HashSet<Configuration>>,
    max_bound_used: usize,
    pruned_no: usize,
}

impl Oracle {
    pub fn new(program: &Program, config: OracleConfig) -> Result<Self, OracleError> {
        config.validate()?;
        Ok(Oracle {
            program: program.clone(),
            config,
            graphs: BTreeMap::new(),
            memos: HashMap::new(),
            sets: Vec::new(),
            max_bound_used: 0,
            pruned_no: 0,
        })
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    /// Largest buffer bound any query needed.
    pub fn bound_used(&self) -> usize {
        self.max_bound_used
    }

    /// Number of "No" answers that relied on pruned exploration.
    pub fn assumed_no_count(&self) -> usize {
        self.pruned_no
    }

    /// Largest configuration size in any explored graph.
    pub fn max_size_seen(&self) -> usize {
        self.graphs
            .values()
            .flat_map(|g| g.nodes.iter().map(Configuration::size))
            .max()
            .unwrap_or(0)
    }

    /// Number of explored configurations over all bounds.
    pub fn explored(&self) -> usize {
        self.graphs.values().map(|g| g.nodes.len()).sum()
    }

    pub fn register_set(&mut self, set: impl IntoIterator<Item = Configuration>) -> SetId {
        self.sets.push(set.into_iter().collect());
        SetId(self.sets.len() - 1)
    }

    fn query(&mut self, c: &Configuration, target: Target) -> Result<ReachAnswer, OracleError> {
        let bounds = self.config.bounds();
        let budget = self.config.node_budget;
        let sets = &self.sets;
        let is_target: Box<dyn Fn(&Configuration) -> bool + '_> = match &target {
            Target::Loc(loc) => {
                let loc = *loc;
                Box::new(move |d: &Configuration| d.at(loc))
            }
            Target::Config(t) => Box::new(move |d: &Configuration| d == t),
            Target::Set(id) => Box::new(move |d: &Configuration| sets[id.0].contains(d)),
        };
        for (i, &k) in bounds.iter().enumerate() {
            self.max_bound_used = self.max_bound_used.max(k);
            let graph = self.graphs.entry(k).or_insert_with(|| Graph::new(k));
            let memo = self.memos.entry((k, target.clone())).or_default();
            match search(&self.program, graph, memo, c, &*is_target, budget)? {
                Search::Found(path) => {
                    let path = path.into_iter().map(|v| graph.nodes[v as usize].clone()).collect();
                    return Ok(ReachAnswer::Yes(Witness { path }));
                }
                Search::NotFound { tainted: false } => return Ok(ReachAnswer::No),
                Search::NotFound { tainted: true } if i + 1 < bounds.len() => continue,
                Search::NotFound { tainted: true } => {
                    return Ok(match self.config.strictness {
                        Strictness::AssumeNo => {
                            self.pruned_no += 1;
                            ReachAnswer::No
                        }
                        Strictness::ReportUnknown => ReachAnswer::Unknown { bound: k },
                    })
                }
            }
        }
        unreachable!("at least one bound is configured")
    }

    /// Whether some configuration at `loc` is reachable from `c`.
    pub fn reaches_loc(&mut self, c: &Configuration, loc: Loc) -> Result<ReachAnswer, OracleError> {
        self.query(c, Target::Loc(loc))
    }

    pub fn reaches_label(&mut self, c: &Configuration, label: &str) -> Result<ReachAnswer, OracleError> {
        let loc = self
            .program
            .locate(label)
            .ok_or_else(|| OracleError::UnknownLabel(label.to_string()))?;
        self.reaches_loc(c, loc)
    }

    /// Whether the plain configuration `target` is reachable from `c`.
    pub fn reaches_config(
        &mut self,
        c: &Configuration,
        target: &Configuration,
    ) -> Result<ReachAnswer, OracleError> {
        if !target.is_plain() {
            return Err(OracleError::NonPlainTarget);
        }
        self.query(c, Target::Config(target.clone()))
    }

    pub fn reaches_set(&mut self, c: &Configuration, set: SetId) -> Result<ReachAnswer, OracleError> {
        self.query(c, Target::Set(set))
    }

    /// Runs `f` on the explored closure of `c`, growing the bound in
    /// iterative mode until no node of the closure was pruned.
    fn with_closure<T>(
        &mut self,
        c: &Configuration,
        mut f: impl FnMut(&Graph, &[u32]) -> T,
    ) -> Result<T, OracleError> {
        let bounds = self.config.bounds();
        let budget = self.config.node_budget;
        for (i, &k) in bounds.iter().enumerate() {
            self.max_bound_used = self.max_bound_used.max(k);
            let graph = self.graphs.entry(k).or_insert_with(|| Graph::new(k));
            let s = graph.intern(c);
            let (closure, tainted) = graph.closure(s, &self.program, budget)?;
            if tainted && i + 1 < bounds.len() {
                continue;
            }
            if tainted && self.config.strictness == Strictness::ReportUnknown {
                return Err(OracleError::Unknown { bound: k });
            }
            return Ok(f(graph, &closure));
        }
        unreachable!("at least one bound is configured")
    }

    /// Configurations reachable from `c` (including `c`) that satisfy `pred`.
    pub fn reachable_where(
        &mut self,
        c: &Configuration,
        pred: impl Fn(&Configuration) -> bool,
    ) -> Result<BTreeSet<Configuration>, OracleError> {
        self.with_closure(c, |g, closure| {
            closure
                .iter()
                .map(|&v| &g.nodes[v as usize])
                .filter(|d| pred(d))
                .cloned()
                .collect()
        })
    }

    /// Plain configurations reachable from `c`, including `c` if plain.
    pub fn reachable_plain(&mut self, c: &Configuration) -> Result<BTreeSet<Configuration>, OracleError> {
        self.reachable_where(c, Configuration::is_plain)
    }

    /// Plain configurations reachable from `c` that lie in a bottom strongly
    /// connected component of the plain-to-plain reachability graph.
    ///
    /// Computed on the condensation of the explored closure: a plain node is
    /// B-plain iff no plain node outside its component is reachable from it.
    pub fn bplain_from(&mut self, c: &Configuration) -> Result<BTreeSet<Configuration>, OracleError> {
        self.with_closure(c, |g, closure| {
            let local: HashMap<u32, usize> = closure.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let adj: Vec<Vec<usize>> = closure
                .iter()
                .map(|&v| g.succ[v as usize].as_ref().unwrap().iter().map(|w| local[w]).collect())
                .collect();
            let comps = scc::sccs(&adj);
            let mut comp_of = vec![0; adj.len()];
            for (i, comp) in comps.iter().enumerate() {
                for &v in comp {
                    comp_of[v] = i;
                }
            }
            let plain = |v: usize| g.nodes[closure[v] as usize].is_plain();
            // Components come sinks first, so successors are already settled.
            let mut has_plain = vec![false; comps.len()];
            let mut escapes = vec![false; comps.len()];
            for (i, comp) in comps.iter().enumerate() {
                has_plain[i] = comp.iter().any(|&v| plain(v));
                escapes[i] = comp.iter().any(|&v| {
                    adj[v].iter().any(|&w| {
                        let j = comp_of[w];
                        j != i && (has_plain[j] || escapes[j])
                    })
                });
            }
            (0..adj.len())
                .filter(|&v| plain(v) && !escapes[comp_of[v]])
                .map(|v| g.nodes[closure[v] as usize].clone())
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlainRestrict {
    ReachableOnly(Configuration),
    All,
}

/// Number of plain configurations of `p`.
pub fn plain_count(p: &Program) -> u128 {
    let d = p.domain as u128;
    let mut n: u128 = 1;
    for proc in &p.processes {
        n = n.saturating_mul(proc.instrs.len() as u128);
    }
    for _ in 0..(p.num_regs() + p.vars.len()) {
        n = n.saturating_mul(d);
    }
    n
}

/// Every plain configuration of `p`, refusing more than `cap` of them.
pub fn all_plain_configs(p: &Program, cap: usize) -> Result<Vec<Configuration>, OracleError> {
    let count = plain_count(p);
    if count > cap as u128 {
        return Err(OracleError::PlainCap { count, cap });
    }
    let np = p.processes.len();
    let nr = p.num_regs();
    let nv = p.vars.len();
    let mut radix: Vec<u32> = p.processes.iter().map(|q| q.instrs.len() as u32).collect();
    radix.extend(std::iter::repeat_n(p.domain, nr + nv));
    let mut digits = vec![0u32; radix.len()];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        out.push(Configuration {
            pcs: digits[..np].to_vec(),
            regs: digits[np..np + nr].iter().map(|&x| x as Value).collect(),
            buffers: vec![Vec::new(); np],
            memory: digits[np + nr..].iter().map(|&x| x as Value).collect(),
        });
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(out);
            }
            digits[i] += 1;
            if digits[i] < radix[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Plain configurations, either all of them or those reachable from a source.
pub fn plain_configs(
    oracle: &mut Oracle,
    restrict: &PlainRestrict,
    cap: usize,
) -> Result<BTreeSet<Configuration>, OracleError> {
    match restrict {
        PlainRestrict::ReachableOnly(c) => oracle.reachable_plain(c),
        PlainRestrict::All => Ok(all_plain_configs(oracle.program(), cap)?.into_iter().collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;
    use crate::semantics::initial_config;

    fn oracle(src: &str) -> (Program, Oracle) {
        let p = parse_program(src).unwrap();
        let o = Oracle::new(&p, OracleConfig::default()).unwrap();
        (p, o)
    }

    #[test]
    fn label_at_source_has_empty_witness() {
        let (p, mut o) = oracle("vars x\nproc P weight 1\nregs a\n0: term\n");
        let c = initial_config(&p);
        match o.reaches_label(&c, "0").unwrap() {
            ReachAnswer::Yes(w) => assert_eq!(w.steps(), 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dead_branch_is_unreachable() {
        let (p, mut o) = oracle(
            "vars x\nproc P weight 1\nregs a o\n0: o := 1\n1: a := x\n2: if a then 4\n3: if o then 1\n4: term\n",
        );
        let c = initial_config(&p);
        assert_eq!(o.reaches_label(&c, "4").unwrap(), ReachAnswer::No);
        assert!(o.reaches_label(&c, "3").unwrap().is_yes());
    }

    #[test]
    fn witness_replays() {
        let (p, mut o) = oracle(
            "vars x\nproc P weight 1\nregs a\np0: a := 1\np1: x := a\np2: term\nproc Q weight 1\nregs b o\nq0: o := 1\nq1: b := x\nq2: if b then q4\nq3: if o then q1\nq4: term\n",
        );
        let c = initial_config(&p);
        let ReachAnswer::Yes(w) = o.reaches_label(&c, "q4").unwrap() else { panic!() };
        assert!(w.steps() >= 4);
        for pair in w.path.windows(2) {
            assert!(semantics::ts_successors(&p, &pair[0]).contains(&pair[1]));
        }
        assert_eq!(w.to_json(&p).as_array().unwrap().len(), w.path.len());
        // a memoised second query returns an equally valid path
        let ReachAnswer::Yes(w2) = o.reaches_label(&c, "q4").unwrap() else { panic!() };
        assert_eq!(w2.path.first(), Some(&c));
        assert!(w2.path.last().unwrap().at(p.locate("q4").unwrap()));
    }

    #[test]
    fn config_targets() {
        let (p, mut o) = oracle("vars x\nproc P weight 1\nregs a\n0: a := 1\n1: x := a\n2: term\n");
        let c = initial_config(&p);
        assert!(o.reaches_config(&c, &c).unwrap().is_yes());
        let mut end = c.clone();
        end.pcs[0] = 2;
        end.regs[0] = 1;
        end.memory[0] = 1;
        assert!(o.reaches_config(&c, &end).unwrap().is_yes());
        let mut wrong = end.clone();
        wrong.regs[0] = 2;
        assert_eq!(o.reaches_config(&c, &wrong).unwrap(), ReachAnswer::No);
        let mut buffered = c.clone();
        buffered.buffers[0].push(semantics::Message { var: 0, value: 1 });
        assert_eq!(o.reaches_config(&c, &buffered), Err(OracleError::NonPlainTarget));
    }

    #[test]
    fn plain_enumeration() {
        let (p, mut o) = oracle("domain 2\nvars x\nproc P weight 1\nregs a\n0: a := x\n1: term\n");
        let all = plain_configs(&mut o, &PlainRestrict::All, 100).unwrap();
        assert_eq!(all.len(), 8);
        let reach = plain_configs(&mut o, &PlainRestrict::ReachableOnly(initial_config(&p)), 100).unwrap();
        assert_eq!(reach.len(), 2);
        assert!(reach.is_subset(&all));
        assert!(matches!(all_plain_configs(&p, 7), Err(OracleError::PlainCap { count: 8, cap: 7 })));
    }

    #[test]
    fn bplain_cases() {
        let (p, mut o) = oracle("vars x\nproc P weight 1\nregs a\n0: term\n");
        let c = initial_config(&p);
        assert_eq!(o.bplain_from(&c).unwrap(), BTreeSet::from([c]));

        let (p, mut o) = oracle("vars x\nproc P weight 1\nregs a\n0: a := 1\n1: x := a\n2: term\n");
        let b = o.bplain_from(&initial_config(&p)).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b.iter().all(|c| c.pcs == vec![2]));

        // a loop through every label: all reachable plain configurations are B-plain
        let (p, mut o) = oracle("domain 2\nvars x\nproc P weight 1\nregs a o\n0: a := x\n1: o := 1\n2: if o then 0\n3: term\n");
        let c = initial_config(&p);
        let looping: BTreeSet<_> = o.reachable_plain(&c).unwrap().into_iter().filter(|d| d.regs[1] == 1).collect();
        assert_eq!(looping.len(), 3);
        assert_eq!(o.bplain_from(&c).unwrap(), looping);
    }

    #[test]
    fn strict_mode_reports_pruning() {
        let src = "vars x\nproc P weight 1\nregs a b\n0: a := 1\n1: x := a\n2: x := a\n3: b := x\n4: if b then 6\n5: b := 0\n6: term\n";
        let p = parse_program(src).unwrap();
        let c = initial_config(&p);
        let mut o = Oracle::new(&p, OracleConfig::bounded(1).strict()).unwrap();
        assert!(matches!(o.reaches_label(&c, "5").unwrap(), ReachAnswer::Unknown { bound: 1 }));
        let mut o = Oracle::new(&p, OracleConfig::bounded(1)).unwrap();
        assert_eq!(o.reaches_label(&c, "5").unwrap(), ReachAnswer::No);
        assert_eq!(o.assumed_no_count(), 1);
        let mut o = Oracle::new(&p, OracleConfig::iterative(1, 3).strict()).unwrap();
        assert_eq!(o.reaches_label(&c, "5").unwrap(), ReachAnswer::No);
        assert_eq!(o.bound_used(), 2);
    }

    #[test]
    fn rejects_bad_bounds() {
        let p = parse_program("vars x\nproc P weight 1\nregs a\n0: term\n").unwrap();
        assert!(Oracle::new(&p, OracleConfig::bounded(0)).is_err());
        assert!(Oracle::new(&p, OracleConfig::iterative(4, 3)).is_err());
        assert!(Oracle::new(&p, OracleConfig::bounded(MAX_UPDATE_SIZE)).is_err());
    }
}
