//! Eagerness certificates: constants `alpha < 1` and `n_threshold` such
//! that the probability of first reaching a label at step `n` or later is at
//! most `alpha^n` for every `n >= n_threshold`.
//!
//! The certificate combines two geometric bounds. Runs that rarely visit
//! small configurations behave like a biased random walk on buffer sizes
//! (gambler's ruin with the universal drift `q* = 2/3`), which gives the
//! rate `alpha_s`. Runs that visit small configurations often but keep
//! missing the label are bounded through `mu`, a lower bound on the chance
//! of reaching the label before returning, which gives `alpha_d`.
//!
//! The chosen rates `alpha_d`, `alpha_hat` and `alpha` are dyadic rationals
//! (`1 - g` with `g` an `f64`), so the cost algorithm can use them exactly.
//! Irrational intermediate values are certified [`Interval`]s.

use std::collections::{BTreeMap, HashMap, HashSet};

use num::{BigInt, BigRational, One, Zero};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::interval::Interval;
use crate::lang::{LangError, Loc, Program};
use crate::markov::{rat, rat_f64, rat_json, Chain, Policy, Rational};
use crate::reach::{Oracle, OracleConfig, OracleError};
use crate::semantics::Configuration;

pub const DEFAULT_BETA: u32 = 150;
/// Layer budget of a single `mu` search.
pub const MU_SEARCH_BUDGET: usize = 200_000;

pub fn q_star() -> Rational {
    rat(2, 3)
}

pub fn p_star() -> Rational {
    rat(1, 3)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EagerError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("eagerness constants only hold for the fixed-weight scheduler with uniform updates")]
    NotReference,
    #[error("the start configuration must be plain")]
    NotPlain,
    #[error("label {0} is unreachable from the start configuration")]
    Unreachable(String),
    #[error("beta = {beta} gives an S-run rate of at least {rate_lo}, which is not below 1")]
    BetaTooSmall { beta: u32, rate_lo: f64 },
    #[error("gambler parameters need 0 < p < 1")]
    BadGambler,
    #[error("path search from a small configuration exceeded {0} configurations")]
    MuBudget(usize),
    #[error("threshold search overflowed")]
    Overflow,
}

/// Random walk on the naturals stepping up with probability `p` and down
/// with probability `q = 1 - p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GamblerParams {
    pub p: Rational,
    pub q: Rational,
}

impl GamblerParams {
    pub fn new(p: Rational) -> Result<Self, EagerError> {
        if p <= Rational::zero() || p >= Rational::one() {
            return Err(EagerError::BadGambler);
        }
        let q = Rational::one() - &p;
        Ok(GamblerParams { p, q })
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn rpow(x: &Rational, k: u32) -> Rational {
    num::pow(x.clone(), k as usize)
}

/// Probability that the walk started at 1 first hits 0 at step `n`.
pub fn gambler_first_passage(g: &GamblerParams, n: u32) -> Rational {
    assert!(n >= 1);
    if n % 2 == 0 {
        return Rational::zero();
    }
    let c = Rational::from_integer(binomial(n, (n + 1) / 2));
    c * rpow(&g.p, (n - 1) / 2) * rpow(&g.q, (n + 1) / 2) / Rational::from_integer(n.into())
}

/// Upper bound `(3q / sqrt(pi)) (4pq)^floor(n/2)` on the probability that
/// the walk started at 1 takes `n` or more steps to reach 0.
pub fn gambler_tail_bound(g: &GamblerParams, n: u32) -> Interval {
    assert!(n >= 2);
    let q = Interval::from_rational(&g.q);
    let four_pq = Interval::from_rational(&(rat(4, 1) * &g.p * &g.q));
    let sqrt_pi = Interval::pi().sqrt();
    q.scale(3.0).div(sqrt_pi).mul(four_pq.powi(n / 2))
}

/// `2 sqrt(p* q*) = 2 sqrt(2) / 3`, the rate at which runs return to small
/// configurations.
pub fn gamma() -> Interval {
    Interval::from_rational(&(p_star() * q_star())).sqrt().scale(2.0)
}

/// `(b/(b-1)) (2b)^(1/b) (1/b + 1/gamma)^floor(1/b) gamma`, the geometric
/// rate bounding runs that visit small configurations at most `n / b` times
/// in `n` steps.
pub fn srun_rate(beta: u32) -> Interval {
    assert!(beta >= 2, "beta must be at least 2");
    let b = Interval::point(beta as f64);
    let g = gamma();
    let lead = b.div(Interval::point((beta - 1) as f64));
    let root = b.scale(2.0).ln().div(b).exp();
    let mid = Interval::point(1.0).div(b).add(Interval::point(1.0).div(g)).powi(1 / beta);
    lead.mul(root).mul(mid).mul(g)
}

/// A dyadic rate `1 - gap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub gap: f64,
}

impl Rate {
    pub fn value(&self) -> Rational {
        Rational::one() - BigRational::from_float(self.gap).expect("finite gap")
    }

    pub fn gap_rational(&self) -> Rational {
        BigRational::from_float(self.gap).expect("finite gap")
    }

    /// `ln(1 - gap)`.
    pub fn ln(&self) -> Interval {
        Interval::point(-self.gap).ln_1p()
    }

    /// Certified enclosure of `(1 - gap)^n`.
    pub fn pow(&self, n: u64) -> Interval {
        self.ln().scale(n as f64).exp()
    }

    fn to_json(self) -> Json {
        let v = self.value();
        json!({ "exact": crate::markov::rat_string(&v), "float": rat_f64(&v), "gap": self.gap })
    }
}

/// Shortest path from `c` to the label that does not return to `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuPath {
    pub probability: Rational,
    pub path: Vec<Configuration>,
}

/// Breadth-first search for the first layer of paths from `c` that reach
/// `loc` without revisiting `c`; among those paths the most likely one is
/// returned (ties broken by configuration order).
pub fn mu_path<P: Policy>(
    chain: &Chain<'_, P>,
    c: &Configuration,
    loc: Loc,
    budget: usize,
) -> Result<Option<MuPath>, EagerError> {
    // best probability and predecessor of each configuration at its first depth
    let mut best: HashMap<Configuration, (Rational, Option<Configuration>)> = HashMap::new();
    let mut seen: HashSet<Configuration> = HashSet::from([c.clone()]);
    let mut layer: BTreeMap<Configuration, Rational> = BTreeMap::new();
    for (d, pr) in chain.step_distribution(c).into_iter() {
        if &d != c {
            layer.insert(d, pr);
        }
    }
    for d in layer.keys() {
        seen.insert(d.clone());
        best.insert(d.clone(), (layer[d].clone(), None));
    }
    while !layer.is_empty() {
        let hit = layer
            .iter()
            .filter(|(d, _)| d.at(loc))
            .fold(None::<(&Configuration, &Rational)>, |acc, (d, pr)| match acc {
                Some((_, bp)) if bp >= pr => acc,
                _ => Some((d, pr)),
            });
        if let Some((d, pr)) = hit {
            let mut path = vec![d.clone()];
            while let Some((_, Some(prev))) = best.get(path.last().unwrap()) {
                path.push(prev.clone());
            }
            path.push(c.clone());
            path.reverse();
            return Ok(Some(MuPath { probability: pr.clone(), path }));
        }
        let mut next: BTreeMap<Configuration, Rational> = BTreeMap::new();
        let mut parent: HashMap<Configuration, Configuration> = HashMap::new();
        for (u, pu) in &layer {
            for (d, q) in chain.step_distribution(u).into_iter() {
                if seen.contains(&d) {
                    continue;
                }
                let cand = pu * q;
                match next.get(&d) {
                    Some(old) if *old >= cand => {}
                    _ => {
                        parent.insert(d.clone(), u.clone());
                        next.insert(d, cand);
                    }
                }
            }
        }
        for (d, pr) in &next {
            seen.insert(d.clone());
            best.insert(d.clone(), (pr.clone(), parent.remove(d)));
        }
        if seen.len() > budget {
            return Err(EagerError::MuBudget(budget));
        }
        layer = next;
    }
    Ok(None)
}

/// Least `n >= from` satisfying a predicate that is monotone in `n`.
fn least_n(from: u64, pred: impl Fn(u64) -> bool) -> Result<u64, EagerError> {
    if pred(from) {
        return Ok(from);
    }
    let mut lo = from;
    let mut step = 1u64;
    let hi = loop {
        let cand = lo.checked_add(step).ok_or(EagerError::Overflow)?;
        if cand > 1 << 60 {
            return Err(EagerError::Overflow);
        }
        if pred(cand) {
            break cand;
        }
        lo = cand;
        step *= 2;
    };
    // pred(lo) is false, pred(hi) is true
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1 {
        let m = lo + (hi - lo) / 2;
        if pred(m) {
            hi = m;
        } else {
            lo = m;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EagernessParams {
    pub label: String,
    pub q_star: Rational,
    pub p_star: Rational,
    pub gamma: Interval,
    pub beta: u32,
    pub alpha_s: Interval,
    /// Small configurations reachable from the start that can reach the label.
    pub a_set: Vec<Configuration>,
    /// Minimum over `a_set` (configurations already at the label excluded)
    /// of the probability of the path found by [`mu_path`]; 1 when there is
    /// nothing to minimise over.
    pub mu: Rational,
    /// `min(mu, 1/2)`, the value the constants are derived from.
    pub mu_used: Rational,
    /// `(1 - mu)^(1 / (beta |A|))`.
    pub r: Interval,
    pub alpha_d: Rate,
    /// `|A| / ((1 - mu) (1 - (1 - mu)^(1/|A|)))`.
    pub d_run_constant: Interval,
    pub n_d: u64,
    pub alpha_hat: Rate,
    /// Least `n` with `alpha_s^n + alpha_d^n <= alpha_hat^n`.
    pub eta: u64,
    /// `max(n_d, 2 beta, eta)`.
    pub n_hat: u64,
    pub alpha: Rate,
    pub n_threshold: u64,
}

impl EagernessParams {
    pub fn to_json(&self) -> Json {
        let iv = |i: &Interval| json!([i.lo, i.hi]);
        json!({
            "label": self.label,
            "q_star": rat_json(&self.q_star),
            "p_star": rat_json(&self.p_star),
            "gamma": iv(&self.gamma),
            "beta": self.beta,
            "alpha_s": iv(&self.alpha_s),
            "a_size": self.a_set.len(),
            "mu": rat_json(&self.mu),
            "mu_used": rat_json(&self.mu_used),
            "r": iv(&self.r),
            "alpha_d": self.alpha_d.to_json(),
            "d_run_constant": iv(&self.d_run_constant),
            "n_d": self.n_d,
            "alpha_hat": self.alpha_hat.to_json(),
            "eta": self.eta,
            "n_hat": self.n_hat,
            "alpha": self.alpha.to_json(),
            "n_threshold": self.n_threshold,
        })
    }
}

/// Computes the eagerness certificate of `label` for runs from `iota`.
///
/// The set `A` is restricted to small configurations reachable from `iota`,
/// the only ones its runs can visit.
pub fn compute_eagerness<P: Policy>(
    chain: &Chain<'_, P>,
    iota: &Configuration,
    label: &str,
    config: OracleConfig,
    beta: u32,
) -> Result<EagernessParams, EagerError> {
    if !chain.policy.is_reference() {
        return Err(EagerError::NotReference);
    }
    if !iota.is_plain() {
        return Err(EagerError::NotPlain);
    }
    let p: &Program = chain.program;
    let loc = p.locate(label).ok_or_else(|| LangError::UnknownLabel(label.to_string()))?;
    let mut oracle = Oracle::new(p, config)?;
    if !oracle.reaches_loc(iota, loc)?.to_bool()? {
        return Err(EagerError::Unreachable(label.to_string()));
    }

    let alpha_s = srun_rate(beta);
    let gap_s = Interval::point(1.0).sub(alpha_s).lo;
    if gap_s <= 0.0 {
        return Err(EagerError::BetaTooSmall { beta, rate_lo: alpha_s.lo });
    }

    let mut a_set = Vec::new();
    for c in oracle.reachable_where(iota, Configuration::is_small)? {
        if oracle.reaches_loc(&c, loc)?.to_bool()? {
            a_set.push(c);
        }
    }
    let mut mu: Option<Rational> = None;
    for c in a_set.iter().filter(|c| !c.at(loc)) {
        let found = mu_path(chain, c, loc, MU_SEARCH_BUDGET)?
            .expect("configurations in A reach the label");
        if mu.as_ref().is_none_or(|m| found.probability < *m) {
            mu = Some(found.probability);
        }
    }
    let mu = mu.unwrap_or_else(Rational::one);
    let half = rat(1, 2);
    let mu_used = if mu > half { half } else { mu.clone() };

    let size_a = a_set.len() as f64;
    let ln_keep = Interval::from_rational(&mu_used).scale(-1.0).ln_1p();
    let ln_r = ln_keep.div(Interval::point(beta as f64 * size_a));
    let r = ln_r.exp();
    let gap_r = ln_r.exp_m1().scale(-1.0);
    let alpha_d = Rate { gap: gap_r.lo / 2.0 };
    let keep = Interval::point(1.0).sub(Interval::from_rational(&mu_used));
    let gap_a = ln_keep.div(Interval::point(size_a)).exp_m1().scale(-1.0);
    let d_run_constant = Interval::point(size_a).div(keep.mul(gap_a));

    let ln_k = d_run_constant.ln();
    let ln_d = alpha_d.ln();
    let n_d = least_n(1, |n| {
        let nf = Interval::point(n as f64);
        ln_k.add(ln_r.mul(nf)).hi <= ln_d.mul(nf).lo
    })?;

    let alpha_hat = Rate { gap: gap_s.min(alpha_d.gap) / 2.0 };
    let ln_s = alpha_s.ln();
    let ln_h = alpha_hat.ln();
    let eta = least_n(1, |n| {
        let nf = Interval::point(n as f64);
        let a = ln_s.sub(ln_h).mul(nf).exp();
        let b = ln_d.sub(ln_h).mul(nf).exp();
        a.add(b).hi <= 1.0
    })?;
    let n_hat = n_d.max(2 * beta as u64).max(eta);

    let alpha = Rate { gap: alpha_hat.gap / 2.0 };
    let ln_a = alpha.ln();
    let ln_gap_h = Interval::point(alpha_hat.gap).ln();
    let n_threshold = least_n(n_hat, |n| {
        let nf = Interval::point(n as f64);
        ln_h.sub(ln_a).mul(nf).hi <= ln_gap_h.lo
    })?;

    // strict ordering of the rates, by construction
    assert!(alpha_s.hi < 1.0 - alpha_hat.gap && r.hi < 1.0 - alpha_d.gap);
    assert!(alpha_d.gap > alpha_hat.gap && alpha_hat.gap > alpha.gap && alpha.gap > 0.0);

    Ok(EagernessParams {
        label: label.to_string(),
        q_star: q_star(),
        p_star: p_star(),
        gamma: gamma(),
        beta,
        alpha_s,
        a_set,
        mu,
        mu_used,
        r,
        alpha_d,
        d_run_constant,
        n_d,
        alpha_hat,
        eta,
        n_hat,
        alpha,
        n_threshold,
    })
}
