//! Conditional expected cost of reaching a label.
//!
//! Every instruction label carries a positive cost; a run accumulates the
//! cost of each instruction it executes until it first reaches the target.
//! Paths are explored breadth first, keyed by configuration and accumulated
//! cost. After `n` layers the explored mass gives exact partial sums of the
//! cost and of the probability, and the eagerness certificate bounds what the
//! unexplored paths can still add. Exploration stops once the resulting
//! interval for the conditional expectation is narrower than `epsilon` and
//! at least `n_threshold` layers have been accounted for.
//!
//! Paths that can no longer reach the target never contribute to either sum
//! and are dropped. When no path is left, the remaining layers change
//! nothing but the error terms, so the loop jumps directly to the first
//! layer at which the stopping condition holds.

use std::collections::{BTreeMap, HashMap};

use num::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::eagerness::EagernessParams;
use crate::lang::{LangError, Loc, Program, Statement};
use crate::markov::{rat_f64, rat_json, Chain, Rational};
use crate::reach::{Oracle, OracleConfig, OracleError};
use crate::semantics::{self, Choice, Configuration};

pub const DEFAULT_MAX_LAYERS: u64 = 20_000;
pub const DEFAULT_MAX_FRONTIER: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("costs must be positive integers; label {0} has an invalid cost")]
    BadCost(String),
    #[error("cost file: {0}")]
    BadCostFile(String),
    #[error("precision must be positive")]
    BadEpsilon,
    #[error("the start configuration must be plain")]
    NotPlain,
    #[error("label {0} is unreachable, so the conditional expected cost is undefined")]
    Unreachable(String),
    #[error("eagerness parameters were computed for label {0}")]
    WrongLabel(String),
    #[error("{what} budget exhausted after {} layers", partial.n)]
    Budget { what: &'static str, partial: Box<CostResult> },
}

/// Cost of executing the instruction at each label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostFunction {
    costs: Vec<Vec<u64>>,
}

/// Default cost of an instruction by kind.
pub fn default_statement_cost(stmt: &Statement) -> u64 {
    match stmt {
        Statement::Cas { .. } => 2,
        _ => 1,
    }
}

impl CostFunction {
    pub fn uniform(p: &Program, cost: u64) -> Self {
        assert!(cost > 0);
        CostFunction { costs: p.processes.iter().map(|q| vec![cost; q.instrs.len()]).collect() }
    }

    /// Statement-kind defaults: CAS costs 2, everything else 1.
    pub fn default_table(p: &Program) -> Self {
        CostFunction {
            costs: p
                .processes
                .iter()
                .map(|q| q.instrs.iter().map(|i| default_statement_cost(&i.stmt)).collect())
                .collect(),
        }
    }

    /// Reads a `{label: cost}` map; labels it omits keep their default cost.
    pub fn from_json(p: &Program, v: &Json) -> Result<Self, CostError> {
        let obj = v.as_object().ok_or_else(|| CostError::BadCostFile("expected a JSON object".into()))?;
        let mut f = Self::default_table(p);
        for (label, c) in obj {
            let loc = p.locate(label).ok_or_else(|| LangError::UnknownLabel(label.clone()))?;
            let c = c.as_u64().filter(|&c| c > 0).ok_or_else(|| CostError::BadCost(label.clone()))?;
            f.costs[loc.process][loc.index] = c;
        }
        Ok(f)
    }

    pub fn set(&mut self, p: &Program, label: &str, cost: u64) -> Result<(), CostError> {
        let loc = p.locate(label).ok_or_else(|| LangError::UnknownLabel(label.to_string()))?;
        if cost == 0 {
            return Err(CostError::BadCost(label.to_string()));
        }
        self.costs[loc.process][loc.index] = cost;
        Ok(())
    }

    pub fn at(&self, loc: Loc) -> u64 {
        self.costs[loc.process][loc.index]
    }

    /// The maximum cost `kappa`.
    pub fn max_cost(&self) -> u64 {
        self.costs.iter().flatten().copied().max().unwrap_or(1)
    }

    pub fn to_json(&self, p: &Program) -> Json {
        let mut m = Map::new();
        for (q, proc) in p.processes.iter().enumerate() {
            for (i, instr) in proc.instrs.iter().enumerate() {
                m.insert(instr.label.clone(), json!(self.costs[q][i]));
            }
        }
        Json::Object(m)
    }

    fn choice_cost(&self, c: &Configuration, choice: Choice) -> u64 {
        match choice {
            Choice::Process(q) => self.at(c.loc_of(q)),
            Choice::Disabled => 0,
        }
    }
}

/// Cost of the step from `c` to `d`: the cost of the instruction executed by
/// the moving process, or 0 when `c` is disabled or `d` is not a successor.
pub fn step_cost(p: &Program, cost: &CostFunction, c: &Configuration, d: &Configuration) -> u64 {
    match semantics::find_transition(p, c, d) {
        Some((choice, _)) => cost.choice_cost(c, choice),
        None => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostOptions {
    pub epsilon: Rational,
    /// Drop paths that can no longer reach the label.
    pub prune: bool,
    /// Maximum number of layers actually expanded.
    pub max_layers: u64,
    /// Maximum number of (configuration, cost) entries in one layer.
    pub max_frontier: usize,
}

impl CostOptions {
    pub fn new(epsilon: Rational) -> Self {
        CostOptions { epsilon, prune: true, max_layers: DEFAULT_MAX_LAYERS, max_frontier: DEFAULT_MAX_FRONTIER }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostResult {
    pub label: String,
    /// `cost_apprx / (prob_apprx + p_error)`: a lower bound on the
    /// conditional expected cost.
    pub value: Rational,
    /// `(cost_apprx + c_error) / prob_apprx`: an upper bound on it.
    pub upper: Option<Rational>,
    pub cost_apprx: Rational,
    pub prob_apprx: Rational,
    /// Upper bounds on `kappa alpha^n / (1 - alpha)^2` and
    /// `alpha^n / (1 - alpha)`.
    pub c_error: Rational,
    pub p_error: Rational,
    pub n: u64,
    pub epsilon: Rational,
    pub n_threshold: u64,
    pub kappa: u64,
    /// Number of layers explored before the frontier was exhausted (equal to
    /// `n` when it never was).
    pub layers_explored: u64,
    pub max_frontier_seen: usize,
    pub converged: bool,
}

impl CostResult {
    pub fn to_json(&self) -> Json {
        json!({
            "label": self.label,
            "value": crate::markov::rat_string(&self.value),
            "value_float": rat_f64(&self.value),
            "upper": self.upper.as_ref().map(rat_json),
            "cost_apprx": rat_json(&self.cost_apprx),
            "prob_apprx": rat_json(&self.prob_apprx),
            "c_error": rat_json(&self.c_error),
            "p_error": rat_json(&self.p_error),
            "n": self.n,
            "n_threshold": self.n_threshold,
            "kappa": self.kappa,
            "epsilon": rat_json(&self.epsilon),
            "layers_explored": self.layers_explored,
            "max_frontier_seen": self.max_frontier_seen,
            "converged": self.converged,
        })
    }
}

/// Error terms after `n` layers: upper bounds on `kappa alpha^n/(1-alpha)^2`
/// and `alpha^n/(1-alpha)` as exact rationals.
pub fn error_terms(e: &EagernessParams, kappa: u64, n: u64) -> (Rational, Rational) {
    let pow = crate::interval::Interval::to_rationals(&e.alpha.pow(n)).1;
    let gap = e.alpha.gap_rational();
    let p_error = &pow / &gap;
    let c_error = Rational::from_integer(kappa.into()) * &pow / (&gap * &gap);
    (c_error, p_error)
}

struct Sums<'a> {
    e: &'a EagernessParams,
    kappa: u64,
    epsilon: &'a Rational,
    cost: Rational,
    prob: Rational,
}

impl Sums<'_> {
    fn result(&self, label: &str, n: u64, layers: u64, max_frontier: usize) -> CostResult {
        let (c_error, p_error) = error_terms(self.e, self.kappa, n);
        let value = &self.cost / (&self.prob + &p_error);
        let upper = (!self.prob.is_zero()).then(|| (&self.cost + &c_error) / &self.prob);
        let converged = self.stops(n);
        CostResult {
            label: label.to_string(),
            value,
            upper,
            cost_apprx: self.cost.clone(),
            prob_apprx: self.prob.clone(),
            c_error,
            p_error,
            n,
            epsilon: self.epsilon.clone(),
            n_threshold: self.e.n_threshold,
            kappa: self.kappa,
            layers_explored: layers,
            max_frontier_seen: max_frontier,
            converged,
        }
    }

    /// The stopping condition after `n` layers.
    fn stops(&self, n: u64) -> bool {
        if n < self.e.n_threshold || self.prob.is_zero() {
            return false;
        }
        let (c_error, p_error) = error_terms(self.e, self.kappa, n);
        let gap = (&self.cost + c_error) / &self.prob - &self.cost / (&self.prob + p_error);
        gap < *self.epsilon
    }
}

/// Approximates the expected cost of reaching `label` from `iota`,
/// conditioned on reaching it.
///
/// On success `value <= E < value + epsilon`.
pub fn expected_avg_cost(
    p: &Program,
    iota: &Configuration,
    label: &str,
    cost: &CostFunction,
    opts: &CostOptions,
    config: OracleConfig,
    eagerness: &EagernessParams,
) -> Result<CostResult, CostError> {
    if !opts.epsilon.is_positive() {
        return Err(CostError::BadEpsilon);
    }
    if !iota.is_plain() {
        return Err(CostError::NotPlain);
    }
    if eagerness.label != label {
        return Err(CostError::WrongLabel(eagerness.label.clone()));
    }
    let loc = p.locate(label).ok_or_else(|| LangError::UnknownLabel(label.to_string()))?;
    let mut oracle = Oracle::new(p, config)?;
    if !oracle.reaches_loc(iota, loc)?.to_bool()? {
        return Err(CostError::Unreachable(label.to_string()));
    }
    let chain = Chain::new(p);
    let mut sums = Sums {
        e: eagerness,
        kappa: cost.max_cost(),
        epsilon: &opts.epsilon,
        cost: Rational::zero(),
        prob: Rational::zero(),
    };
    let mut live: HashMap<Configuration, bool> = HashMap::new();
    let mut layer: BTreeMap<(Configuration, u64), Rational> = BTreeMap::from([((iota.clone(), 0), Rational::one())]);
    let mut n: u64 = 0;
    let mut max_frontier = 1;

    loop {
        n += 1;
        let mut open = Vec::new();
        for ((c, psi), phi) in layer {
            if c.at(loc) {
                sums.cost += Rational::from_integer(psi.into()) * &phi;
                sums.prob += phi;
                continue;
            }
            if opts.prune {
                let alive = match live.get(&c) {
                    Some(&a) => a,
                    None => {
                        let a = oracle.reaches_loc(&c, loc)?.to_bool()?;
                        live.insert(c.clone(), a);
                        a
                    }
                };
                if !alive {
                    continue;
                }
            }
            open.push((c, psi, phi));
        }
        let rows: Vec<Vec<((Configuration, u64), Rational)>> = open
            .into_par_iter()
            .map(|(c, psi, phi)| {
                let mut out = Vec::new();
                for (choice, pr, mid) in chain.process_moves(&c) {
                    let psi2 = psi + cost.choice_cost(&c, choice);
                    let w = &phi * pr;
                    for (d, pu) in crate::markov::update_distribution(&mid).into_iter() {
                        out.push(((d, psi2), &w * pu));
                    }
                }
                out
            })
            .collect();
        let mut next: BTreeMap<(Configuration, u64), Rational> = BTreeMap::new();
        for (key, pr) in rows.into_iter().flatten() {
            *next.entry(key).or_insert_with(Rational::zero) += pr;
        }
        layer = next;
        max_frontier = max_frontier.max(layer.len());

        if sums.stops(n) {
            return Ok(sums.result(label, n, n, max_frontier));
        }
        if layer.is_empty() {
            // Only the error terms change from here on; find the first layer
            // at which they are small enough.
            let layers = n;
            let target = first_stop(&sums, n);
            return Ok(sums.result(label, target, layers, max_frontier));
        }
        let what = if layer.len() > opts.max_frontier {
            Some("frontier")
        } else if n >= opts.max_layers {
            Some("layer")
        } else {
            None
        };
        if let Some(what) = what {
            return Err(CostError::Budget { what, partial: Box::new(sums.result(label, n, n, max_frontier)) });
        }
    }
}

/// Least `m >= n` at which the stopping condition holds; it is monotone in
/// `m` once the sums are fixed.
fn first_stop(sums: &Sums<'_>, n: u64) -> u64 {
    let n = n.max(sums.e.n_threshold);
    if sums.stops(n) {
        return n;
    }
    let mut lo = n;
    let mut step = 1u64;
    let mut hi = loop {
        let cand = lo + step;
        if sums.stops(cand) {
            break cand;
        }
        lo = cand;
        step *= 2;
    };
    while hi - lo > 1 {
        let m = lo + (hi - lo) / 2;
        if sums.stops(m) {
            hi = m;
        } else {
            lo = m;
        }
    }
    hi
}
