//! Sampling runs of the chain.
//!
//! Every run draws from its own ChaCha stream, selected by the run index
//! under a master seed, so results do not depend on how runs are spread over
//! threads.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::cost::CostFunction;
use crate::lang::{LangError, Loc, Program};
use crate::markov::{rat, rat_json};
use crate::semantics::{self, schedules_from, Choice, Configuration, UpdateSchedule, MAX_UPDATE_SIZE};

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("at least one run is required")]
    NoRuns,
    #[error("no sampled run reached the label within {horizon} steps")]
    NoHits { horizon: usize },
}

/// The random stream of run `index` under `seed`.
pub fn run_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws an enabled process with probability proportional to its weight,
/// or `Disabled` when there is none.
pub fn sample_choice<R: Rng>(p: &Program, c: &Configuration, rng: &mut R) -> Choice {
    let enabled = semantics::enabled_set(p, c);
    if enabled.is_empty() {
        return Choice::Disabled;
    }
    let total: u64 = enabled.iter().map(|&q| p.processes[q].weight as u64).sum();
    let mut x = rng.gen_range(0..total);
    for q in enabled {
        let w = p.processes[q].weight as u64;
        if x < w {
            return Choice::Process(q);
        }
        x -= w;
    }
    unreachable!("weights sum to the total")
}

/// Draws an update schedule uniformly among all feasible ones.
///
/// With `N(r)` the number of schedules available when `r` messages remain,
/// `N(r) = 1 + sum_i N(r - e_i)`: stopping has probability `1/N(r)` and
/// popping from buffer `i` has probability `N(r - e_i)/N(r)`, which makes
/// every complete word equally likely. Counts are exact up to
/// `MAX_UPDATE_SIZE` messages; beyond that they are approximated in `f64`.
pub fn sample_schedule<R: Rng>(
    c: &Configuration,
    rng: &mut R,
    memo: &mut HashMap<Vec<usize>, u128>,
) -> UpdateSchedule {
    let mut remaining: Vec<usize> = c.buffers.iter().map(Vec::len).collect();
    if c.size() > MAX_UPDATE_SIZE {
        return sample_schedule_approx(remaining, rng);
    }
    let mut word = Vec::new();
    loop {
        let total = schedules_from(&remaining, memo);
        let mut x = rng.gen_range(0..total);
        if x == 0 {
            return UpdateSchedule(word);
        }
        x -= 1;
        let mut picked = None;
        for q in 0..remaining.len() {
            if remaining[q] == 0 {
                continue;
            }
            remaining[q] -= 1;
            let n = schedules_from(&remaining, memo);
            if x < n {
                picked = Some(q);
                break;
            }
            remaining[q] += 1;
            x -= n;
        }
        word.push(picked.expect("counts add up"));
    }
}

fn count_f64(remaining: &[usize], memo: &mut HashMap<Vec<usize>, f64>) -> f64 {
    let mut key: Vec<usize> = remaining.iter().copied().filter(|&r| r > 0).collect();
    key.sort_unstable();
    if key.is_empty() {
        return 1.0;
    }
    if let Some(&n) = memo.get(&key) {
        return n;
    }
    let mut n = 1.0;
    for i in 0..key.len() {
        let mut rest = key.clone();
        rest[i] -= 1;
        n += count_f64(&rest, memo);
    }
    memo.insert(key, n);
    n
}

fn sample_schedule_approx<R: Rng>(mut remaining: Vec<usize>, rng: &mut R) -> UpdateSchedule {
    let mut memo = HashMap::new();
    let mut word = Vec::new();
    loop {
        let total = count_f64(&remaining, &mut memo);
        let mut x = rng.gen::<f64>() * total;
        if x < 1.0 {
            return UpdateSchedule(word);
        }
        x -= 1.0;
        let candidates: Vec<usize> = (0..remaining.len()).filter(|&q| remaining[q] > 0).collect();
        let mut picked = *candidates.last().expect("some buffer is nonempty");
        for &q in &candidates {
            remaining[q] -= 1;
            let n = count_f64(&remaining, &mut memo);
            remaining[q] += 1;
            if x < n {
                picked = q;
                break;
            }
            x -= n;
        }
        remaining[picked] -= 1;
        word.push(picked);
    }
}

/// One step of the chain.
pub fn sample_step<R: Rng>(
    p: &Program,
    c: &Configuration,
    rng: &mut R,
    memo: &mut HashMap<Vec<usize>, u128>,
) -> (Choice, UpdateSchedule, Configuration) {
    let choice = sample_choice(p, c, rng);
    let mid = semantics::choice_step(p, c, choice).expect("sampled choice is enabled");
    let w = sample_schedule(&mid, rng, memo);
    let next = semantics::apply_schedule(&mid, &w).expect("sampled schedule is feasible");
    (choice, w, next)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSample {
    pub seed: u64,
    pub index: u64,
    pub steps: Vec<(Choice, UpdateSchedule, Configuration)>,
    /// Step at which the label was first reached (0 if the run starts there).
    pub first_hit: Option<usize>,
    /// Cost accumulated up to the first hit (or the horizon).
    pub total_cost: u64,
}

/// Samples run `index` under `seed` for at most `horizon` steps, stopping at
/// the first visit to `loc` when `stop_at_hit` is set.
#[allow(clippy::too_many_arguments)]
pub fn sample_run(
    p: &Program,
    iota: &Configuration,
    loc: Option<Loc>,
    cost: Option<&CostFunction>,
    horizon: usize,
    seed: u64,
    index: u64,
    stop_at_hit: bool,
) -> RunSample {
    let mut rng = run_rng(seed, index);
    let mut memo = HashMap::new();
    let mut c = iota.clone();
    let mut steps = Vec::new();
    let mut first_hit = loc.filter(|&l| c.at(l)).map(|_| 0);
    let mut total_cost = 0;
    for i in 1..=horizon {
        if first_hit.is_some() && stop_at_hit {
            break;
        }
        let (choice, w, next) = sample_step(p, &c, &mut rng, &mut memo);
        if let (Some(f), Choice::Process(q)) = (cost, choice) {
            if first_hit.is_none() {
                total_cost += f.at(c.loc_of(q));
            }
        }
        if first_hit.is_none() && loc.is_some_and(|l| next.at(l)) {
            first_hit = Some(i);
        }
        steps.push((choice, w, next.clone()));
        c = next;
    }
    RunSample { seed, index, steps, first_hit, total_cost }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(hits: u64, runs: u64) -> (f64, f64) {
    let n = runs as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachEstimate {
    pub label: String,
    pub runs: u64,
    pub hits: u64,
    pub fraction: f64,
    pub interval: (f64, f64),
    pub horizon: usize,
    /// Runs that had not reached the label when the horizon was hit.
    pub censored: u64,
    pub seed: u64,
}

impl ReachEstimate {
    pub fn to_json(&self) -> Json {
        json!({
            "label": self.label,
            "runs": self.runs,
            "hits": self.hits,
            "fraction": rat_json(&rat(self.hits as i64, self.runs as i64)),
            "wilson95": [self.interval.0, self.interval.1],
            "horizon": self.horizon,
            "censored": self.censored,
            "seed": self.seed,
        })
    }
}

fn locate(p: &Program, label: &str) -> Result<Loc, SimError> {
    p.locate(label).ok_or_else(|| LangError::UnknownLabel(label.to_string()).into())
}

fn runs_par<T: Send>(runs: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..runs).into_par_iter().map(f).collect()
}

/// Fraction of runs reaching `label` within `horizon` steps.
pub fn estimate_reach(
    p: &Program,
    iota: &Configuration,
    label: &str,
    runs: u64,
    horizon: usize,
    seed: u64,
) -> Result<ReachEstimate, SimError> {
    if runs == 0 {
        return Err(SimError::NoRuns);
    }
    let loc = locate(p, label)?;
    let hit = runs_par(runs, |i| sample_run(p, iota, Some(loc), None, horizon, seed, i, true).first_hit.is_some());
    let hits = hit.iter().filter(|&&h| h).count() as u64;
    Ok(ReachEstimate {
        label: label.to_string(),
        runs,
        hits,
        fraction: hits as f64 / runs as f64,
        interval: wilson_interval(hits, runs),
        horizon,
        censored: runs - hits,
        seed,
    })
}

/// Fraction of runs visiting `label` during the last `window` steps of the
/// horizon, an estimate of the probability of visiting it infinitely often.
pub fn estimate_late_visits(
    p: &Program,
    iota: &Configuration,
    label: &str,
    runs: u64,
    horizon: usize,
    window: usize,
    seed: u64,
) -> Result<ReachEstimate, SimError> {
    if runs == 0 {
        return Err(SimError::NoRuns);
    }
    let loc = locate(p, label)?;
    let start = horizon.saturating_sub(window);
    let hit = runs_par(runs, |i| {
        let r = sample_run(p, iota, None, None, horizon, seed, i, false);
        r.steps[start.min(r.steps.len())..].iter().any(|(_, _, c)| c.at(loc))
    });
    let hits = hit.iter().filter(|&&h| h).count() as u64;
    Ok(ReachEstimate {
        label: label.to_string(),
        runs,
        hits,
        fraction: hits as f64 / runs as f64,
        interval: wilson_interval(hits, runs),
        horizon,
        censored: 0,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostEstimate {
    pub label: String,
    pub runs: u64,
    pub hits: u64,
    pub mean: f64,
    /// Normal-approximation 95% interval for the mean.
    pub interval: (f64, f64),
    pub horizon: usize,
    pub censored: u64,
    pub seed: u64,
}

impl CostEstimate {
    pub fn to_json(&self) -> Json {
        json!({
            "label": self.label,
            "runs": self.runs,
            "hits": self.hits,
            "mean_cost": self.mean,
            "ci95": [self.interval.0, self.interval.1],
            "horizon": self.horizon,
            "censored": self.censored,
            "seed": self.seed,
        })
    }
}

/// Mean cost to the first visit of `label` over the runs that reach it.
pub fn estimate_cond_cost(
    p: &Program,
    iota: &Configuration,
    label: &str,
    cost: &CostFunction,
    runs: u64,
    horizon: usize,
    seed: u64,
) -> Result<CostEstimate, SimError> {
    if runs == 0 {
        return Err(SimError::NoRuns);
    }
    let loc = locate(p, label)?;
    let samples = runs_par(runs, |i| {
        let r = sample_run(p, iota, Some(loc), Some(cost), horizon, seed, i, true);
        r.first_hit.map(|_| r.total_cost)
    });
    let costs: Vec<f64> = samples.into_iter().flatten().map(|c| c as f64).collect();
    if costs.is_empty() {
        return Err(SimError::NoHits { horizon });
    }
    let k = costs.len() as f64;
    let mean = costs.iter().sum::<f64>() / k;
    let var = if costs.len() > 1 {
        costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let half = Z95 * (var / k).sqrt();
    Ok(CostEstimate {
        label: label.to_string(),
        runs,
        hits: costs.len() as u64,
        mean,
        interval: (mean - half, mean + half),
        horizon,
        censored: runs - costs.len() as u64,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorStats {
    pub runs: u64,
    pub horizon: usize,
    pub window: usize,
    /// Fraction of runs in which every stretch of `window` steps contains a
    /// plain configuration.
    pub plain_return_fraction: f64,
    /// Number of sampled steps taken from a configuration of size at least 5.
    pub large_samples: u64,
    pub mean_size_change: f64,
    pub std_err: f64,
}

impl AttractorStats {
    pub fn to_json(&self) -> Json {
        json!({
            "runs": self.runs,
            "horizon": self.horizon,
            "window": self.window,
            "plain_return_fraction": self.plain_return_fraction,
            "large_samples": self.large_samples,
            "mean_size_change": self.mean_size_change,
            "std_err": self.std_err,
        })
    }
}

/// Empirical return-to-plain frequency and size drift from large
/// configurations.
pub fn attractor_stats(
    p: &Program,
    iota: &Configuration,
    runs: u64,
    horizon: usize,
    window: usize,
    seed: u64,
) -> Result<AttractorStats, SimError> {
    if runs == 0 {
        return Err(SimError::NoRuns);
    }
    let per_run = runs_par(runs, |i| {
        let r = sample_run(p, iota, None, None, horizon, seed, i, false);
        let mut sizes = vec![iota.size()];
        sizes.extend(r.steps.iter().map(|(_, _, c)| c.size()));
        let mut last_plain = 0usize;
        let mut ok = iota.is_plain();
        for (t, &s) in sizes.iter().enumerate() {
            if s == 0 {
                last_plain = t;
            }
            if t - last_plain > window || (!ok && t > window) {
                ok = false;
                break;
            }
            ok |= s == 0;
        }
        let changes: Vec<f64> = sizes
            .windows(2)
            .filter(|w| w[0] >= 5)
            .map(|w| w[1] as f64 - w[0] as f64)
            .collect();
        (ok, changes)
    });
    let good = per_run.iter().filter(|(ok, _)| *ok).count();
    let changes: Vec<f64> = per_run.into_iter().flat_map(|(_, c)| c).collect();
    let k = changes.len() as f64;
    let (mean, std_err) = if changes.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let mean = changes.iter().sum::<f64>() / k;
        let var = if changes.len() > 1 {
            changes.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        (mean, (var / k).sqrt())
    };
    Ok(AttractorStats {
        runs,
        horizon,
        window,
        plain_return_fraction: good as f64 / runs as f64,
        large_samples: changes.len() as u64,
        mean_size_change: mean,
        std_err,
    })
}
