//! Transition probabilities of the PTSO Markov chain.
//!
//! A step picks an enabled process with probability proportional to its
//! weight (or takes the identity step when every process is disabled), then
//! picks an update schedule uniformly among all feasible ones. All
//! probabilities are exact rationals.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde_json::{json, Value as Json};

use crate::lang::Program;
use crate::semantics::{self, Choice, Configuration};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_u128(num: u128, den: u128) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `"num/den"` rendering (integers render as `"n/1"`).
pub fn rat_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rat_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// JSON pair of the exact value and its float approximation.
pub fn rat_json(r: &Rational) -> Json {
    json!({ "exact": rat_string(r), "float": rat_f64(r) })
}

/// Parses `"num/den"`, an integer, or a finite decimal such as `"0.01"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches('-');
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Some(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rational::from_integer(n))
}

/// A finitely supported probability distribution over configurations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Distribution {
    support: BTreeMap<Configuration, Rational>,
}

impl Distribution {
    pub fn point(c: Configuration) -> Self {
        let mut support = BTreeMap::new();
        support.insert(c, Rational::one());
        Distribution { support }
    }

    /// Adds mass to `c`; zero mass is ignored so the support stays positive.
    pub fn add(&mut self, c: Configuration, p: Rational) {
        if p.is_zero() {
            return;
        }
        *self.support.entry(c).or_insert_with(Rational::zero) += p;
    }

    pub fn get(&self, c: &Configuration) -> Rational {
        self.support.get(c).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.support.values().fold(Rational::zero(), |acc, p| acc + p)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, &Rational)> {
        self.support.iter()
    }

    pub fn into_iter(self) -> impl Iterator<Item = (Configuration, Rational)> {
        self.support.into_iter()
    }

    pub fn to_json(&self, p: &Program) -> Json {
        Json::Array(
            self.support
                .iter()
                .map(|(c, pr)| {
                    json!({
                        "config": semantics::render_config(p, c),
                        "p": rat_string(pr),
                        "p_float": rat_f64(pr),
                    })
                })
                .collect(),
        )
    }
}

/// Scheduler and memory-update policy of the chain.
pub trait Policy {
    /// Probability of each enabled process. Empty when `c` is disabled.
    fn sched_distribution(&self, p: &Program, c: &Configuration) -> Vec<(usize, Rational)>;

    /// Distribution over update successors of `c`.
    fn update_distribution(&self, c: &Configuration) -> Distribution;

    /// Whether this is the fixed-weight scheduler with uniform updates, the
    /// only policy the eagerness constants are valid for.
    fn is_reference(&self) -> bool {
        false
    }
}

/// Fixed-weight scheduler and uniform distribution over update schedules.
#[derive(Debug, Clone, Copy, Default)]
pub struct Ptso;

impl Policy for Ptso {
    fn sched_distribution(&self, p: &Program, c: &Configuration) -> Vec<(usize, Rational)> {
        sched_distribution(p, c)
    }

    fn update_distribution(&self, c: &Configuration) -> Distribution {
        update_distribution(c)
    }

    fn is_reference(&self) -> bool {
        true
    }
}

/// Relative weight of every enabled process.
pub fn sched_distribution(p: &Program, c: &Configuration) -> Vec<(usize, Rational)> {
    let enabled = semantics::enabled_set(p, c);
    let total: i64 = enabled.iter().map(|&q| p.processes[q].weight as i64).sum();
    enabled
        .into_iter()
        .map(|q| (q, rat(p.processes[q].weight as i64, total)))
        .collect()
}

/// Uniform distribution over update schedules, grouped by outcome.
pub fn update_distribution(c: &Configuration) -> Distribution {
    let succ = semantics::update_successors(c);
    let mut d = Distribution::default();
    for (cfg, n) in succ.counts {
        d.add(cfg, rat_u128(n, succ.total));
    }
    d
}

/// A program together with the policy that turns it into a Markov chain.
#[derive(Debug, Clone, Copy)]
pub struct Chain<'a, P: Policy = Ptso> {
    pub program: &'a Program,
    pub policy: P,
}

impl<'a> Chain<'a, Ptso> {
    pub fn new(program: &'a Program) -> Self {
        Chain { program, policy: Ptso }
    }
}

impl<'a, P: Policy> Chain<'a, P> {
    pub fn with_policy(program: &'a Program, policy: P) -> Self {
        Chain { program, policy }
    }

    /// Process choices with their probabilities and resulting configurations.
    pub fn process_moves(&self, c: &Configuration) -> Vec<(Choice, Rational, Configuration)> {
        let sched = self.policy.sched_distribution(self.program, c);
        if sched.is_empty() {
            return vec![(Choice::Disabled, Rational::one(), c.clone())];
        }
        sched
            .into_iter()
            .map(|(q, pr)| {
                let mid = semantics::process_step(self.program, c, q)
                    .expect("scheduled process must be enabled");
                (Choice::Process(q), pr, mid)
            })
            .collect()
    }

    /// One row of the probability matrix.
    pub fn step_distribution(&self, c: &Configuration) -> Distribution {
        let mut d = Distribution::default();
        for (_, pr, mid) in self.process_moves(c) {
            for (succ, pu) in self.policy.update_distribution(&mid).into_iter() {
                d.add(succ, &pr * pu);
            }
        }
        d
    }
}

pub fn step_distribution(p: &Program, c: &Configuration) -> Distribution {
    Chain::new(p).step_distribution(c)
}

/// Probability of moving from `c` to `d` in one step.
pub fn transition_probability(p: &Program, c: &Configuration, d: &Configuration) -> Rational {
    step_distribution(p, c).get(d)
}
