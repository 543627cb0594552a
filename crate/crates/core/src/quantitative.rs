//! Approximation of (repeated) reachability probabilities to a given
//! precision.
//!
//! Paths from the start are explored breadth first. Each path ends in a
//! configuration that either settles the property positively, settles it
//! negatively, or is undetermined and extended by one more step. The mass of
//! settled paths gives lower bounds on both the probability and its
//! complement; exploration stops once they are within `epsilon` of each other.
//! Paths that end in the same configuration at the same depth are merged.

use std::collections::{BTreeMap, HashMap};

use num::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::lang::{LangError, Loc, Program};
use crate::markov::{self, rat_f64, rat_json, rat_string, Distribution, Rational};
use crate::reach::{Oracle, OracleConfig, OracleError, SetId};
use crate::semantics::Configuration;

pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;
pub const DEFAULT_MAX_FRONTIER: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantOptions {
    pub epsilon: Rational,
    /// Maximum number of layers.
    pub max_iterations: usize,
    /// Maximum number of distinct configurations in one layer.
    pub max_frontier: usize,
}

impl QuantOptions {
    pub fn new(epsilon: Rational) -> Self {
        QuantOptions {
            epsilon,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            max_frontier: DEFAULT_MAX_FRONTIER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Reach,
    RepReach,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantResult {
    pub property: Property,
    pub label: String,
    /// Lower bound on the probability.
    pub value: Rational,
    /// Lower bound on the probability of the complement.
    pub neg: Rational,
    pub epsilon: Rational,
    /// Number of layers (path lengths) explored.
    pub iterations: usize,
    /// Mass of undetermined paths: `1 - value - neg`.
    pub frontier_mass: Rational,
    pub max_config_size_seen: usize,
    pub bound_used: usize,
    /// Negative oracle answers that relied on pruned exploration.
    pub assumed_no: usize,
}

impl QuantResult {
    /// Upper bound on the probability.
    pub fn upper(&self) -> Rational {
        Rational::one() - &self.neg
    }

    pub fn to_json(&self) -> Json {
        json!({
            "property": match self.property { Property::Reach => "reach", Property::RepReach => "rep-reach" },
            "label": self.label,
            "value": rat_string(&self.value),
            "value_float": rat_f64(&self.value),
            "upper": rat_json(&self.upper()),
            "neg": rat_json(&self.neg),
            "epsilon": rat_json(&self.epsilon),
            "frontier_mass": rat_json(&self.frontier_mass),
            "iterations": self.iterations,
            "max_config_size_seen": self.max_config_size_seen,
            "bound_used": self.bound_used,
            "assumed_no": self.assumed_no,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("precision must be positive")]
    BadEpsilon,
    #[error("{what} budget exhausted before reaching the requested precision")]
    Budget { what: &'static str, partial: Box<QuantResult> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Pos,
    Neg,
    Open,
}

struct Classifier {
    oracle: Oracle,
    loc: Loc,
    /// For repeated reachability: B-plain configurations that cannot reach
    /// the label, reachable from the start.
    bad: Option<SetId>,
    memo: HashMap<Configuration, Class>,
}

impl Classifier {
    fn classify(&mut self, c: &Configuration) -> Result<Class, OracleError> {
        if let Some(&k) = self.memo.get(c) {
            return Ok(k);
        }
        let class = match self.bad {
            None if c.at(self.loc) => Class::Pos,
            None => match self.oracle.reaches_loc(c, self.loc)?.to_bool()? {
                true => Class::Open,
                false => Class::Neg,
            },
            Some(bad) => {
                if !self.oracle.reaches_set(c, bad)?.to_bool()? {
                    Class::Pos
                } else if !self.oracle.reaches_loc(c, self.loc)?.to_bool()? {
                    Class::Neg
                } else {
                    Class::Open
                }
            }
        };
        self.memo.insert(c.clone(), class);
        Ok(class)
    }
}

fn check_epsilon(eps: &Rational) -> Result<(), QuantError> {
    if eps.is_positive() {
        Ok(())
    } else {
        Err(QuantError::BadEpsilon)
    }
}

fn locate(p: &Program, label: &str) -> Result<Loc, QuantError> {
    p.locate(label).ok_or_else(|| LangError::UnknownLabel(label.to_string()).into())
}

/// Approximates the probability of eventually reaching `label` from `iota`.
///
/// The returned `value` satisfies `value <= P <= value + epsilon`.
pub fn quant_reach(
    p: &Program,
    iota: &Configuration,
    label: &str,
    opts: &QuantOptions,
    config: OracleConfig,
) -> Result<QuantResult, QuantError> {
    check_epsilon(&opts.epsilon)?;
    let loc = locate(p, label)?;
    let oracle = Oracle::new(p, config)?;
    let classifier = Classifier { oracle, loc, bad: None, memo: HashMap::new() };
    explore(p, iota, label, Property::Reach, opts, classifier)
}

/// Approximates the probability of visiting `label` infinitely often.
///
/// A path is settled positively once every B-plain configuration it can
/// reach can also reach `label`, and negatively once `label` is unreachable.
pub fn quant_rep_reach(
    p: &Program,
    iota: &Configuration,
    label: &str,
    opts: &QuantOptions,
    config: OracleConfig,
) -> Result<QuantResult, QuantError> {
    check_epsilon(&opts.epsilon)?;
    let loc = locate(p, label)?;
    let mut oracle = Oracle::new(p, config)?;
    let mut bad = Vec::new();
    for c in oracle.bplain_from(iota)? {
        if !oracle.reaches_loc(&c, loc)?.to_bool()? {
            bad.push(c);
        }
    }
    let bad = Some(oracle.register_set(bad));
    let classifier = Classifier { oracle, loc, bad, memo: HashMap::new() };
    explore(p, iota, label, Property::RepReach, opts, classifier)
}

fn explore(
    p: &Program,
    iota: &Configuration,
    label: &str,
    property: Property,
    opts: &QuantOptions,
    mut classifier: Classifier,
) -> Result<QuantResult, QuantError> {
    let target = Rational::one() - &opts.epsilon;
    let mut pos = Rational::zero();
    let mut neg = Rational::zero();
    let mut layer: BTreeMap<Configuration, Rational> = BTreeMap::from([(iota.clone(), Rational::one())]);
    let mut iterations = 0;
    let mut max_size = iota.size();

    let result = |pos: &Rational, neg: &Rational, iterations: usize, max_size: usize, c: &Classifier| QuantResult {
        property,
        label: label.to_string(),
        value: pos.clone(),
        neg: neg.clone(),
        epsilon: opts.epsilon.clone(),
        iterations,
        frontier_mass: Rational::one() - pos - neg,
        max_config_size_seen: max_size.max(c.oracle.max_size_seen()),
        bound_used: c.oracle.bound_used(),
        assumed_no: c.oracle.assumed_no_count(),
    };

    while &pos + &neg < target {
        if iterations == opts.max_iterations {
            let partial = result(&pos, &neg, iterations, max_size, &classifier);
            return Err(QuantError::Budget { what: "iteration", partial: Box::new(partial) });
        }
        iterations += 1;
        // Settle entries in order until the precision is reached; the rest
        // stay undetermined.
        let mut open = Vec::new();
        for (c, pr) in layer {
            if &pos + &neg >= target {
                open.push((c, pr));
                continue;
            }
            match classifier.classify(&c)? {
                Class::Pos => pos += pr,
                Class::Neg => neg += pr,
                Class::Open => open.push((c, pr)),
            }
        }
        if &pos + &neg >= target {
            break;
        }
        let rows: Vec<(Rational, Distribution)> = open
            .into_par_iter()
            .map(|(c, pr)| (pr, markov::step_distribution(p, &c)))
            .collect();
        let mut next: BTreeMap<Configuration, Rational> = BTreeMap::new();
        for (pr, row) in rows {
            for (d, q) in row.into_iter() {
                max_size = max_size.max(d.size());
                *next.entry(d).or_insert_with(Rational::zero) += &pr * q;
            }
        }
        layer = next;
        debug_assert_eq!(
            &pos + &neg + layer.values().fold(Rational::zero(), |a, b| a + b),
            Rational::one()
        );
        if layer.len() > opts.max_frontier {
            let partial = result(&pos, &neg, iterations, max_size, &classifier);
            return Err(QuantError::Budget { what: "frontier", partial: Box::new(partial) });
        }
    }
    Ok(result(&pos, &neg, iterations, max_size, &classifier))
}
