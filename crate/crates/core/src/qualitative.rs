//! Almost-sure and almost-never (repeated) reachability.
//!
//! Each analysis reduces to finitely many oracle queries over plain
//! configurations: plain configurations are visited infinitely often with
//! probability 1, so the fate of a run is decided by which plain
//! configurations it can reach.

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::lang::{LangError, Loc, Program};
use crate::reach::{Oracle, OracleConfig, OracleError, ReachAnswer, Witness};
use crate::semantics::{render_config, Configuration};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QualError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    QualReach,
    QualRepReach,
    NeverReach,
    NeverRepReach,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::QualReach => "qual-reach",
            Analysis::QualRepReach => "qual-rep-reach",
            Analysis::NeverReach => "never-reach",
            Analysis::NeverRepReach => "never-rep-reach",
        }
    }
}

/// Evidence for a verdict: a plain configuration reachable from the start,
/// the path to it, and whether it can reach the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualWitness {
    pub plain_config: Configuration,
    pub path: Witness,
    pub reaches_label: bool,
    path_json: Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub analysis: Analysis,
    pub label: String,
    pub verdict: bool,
    pub witness: Option<QualWitness>,
    pub bound_used: usize,
    /// Negative oracle answers that relied on pruned exploration.
    pub assumed_no: usize,
}

impl Verdict {
    fn new(analysis: Analysis, label: &str, verdict: bool, oracle: &Oracle) -> Self {
        Verdict {
            analysis,
            label: label.to_string(),
            verdict,
            witness: None,
            bound_used: oracle.bound_used(),
            assumed_no: oracle.assumed_no_count(),
        }
    }

    pub fn to_json(&self, p: &Program) -> Json {
        let mut out = json!({
            "analysis": self.analysis.name(),
            "label": self.label,
            "verdict": self.verdict,
            "bound_used": self.bound_used,
            "assumed_no": self.assumed_no,
        });
        if let Some(w) = &self.witness {
            let key = if w.reaches_label { "reachable_label" } else { "unreachable_label" };
            out["witness"] = json!({
                "plain_config": render_config(p, &w.plain_config),
                "path_to_it": w.path_json,
                key: self.label,
            });
        }
        out
    }
}

fn locate(p: &Program, label: &str) -> Result<Loc, QualError> {
    p.locate(label).ok_or_else(|| LangError::UnknownLabel(label.to_string()).into())
}

fn witness(
    oracle: &mut Oracle,
    iota: &Configuration,
    c: &Configuration,
    reaches_label: bool,
) -> Result<QualWitness, QualError> {
    let ReachAnswer::Yes(path) = oracle.reaches_config(iota, c)? else {
        unreachable!("enumerated plain configurations are reachable");
    };
    let path_json = path.to_json(oracle.program());
    Ok(QualWitness { plain_config: c.clone(), path, reaches_label, path_json })
}

/// First plain configuration reachable from `iota` that cannot reach `loc`,
/// ignoring those rejected by `skip`.
fn find_trap(
    oracle: &mut Oracle,
    iota: &Configuration,
    loc: Loc,
    skip: impl Fn(&Configuration) -> bool,
) -> Result<Option<QualWitness>, QualError> {
    for c in oracle.reachable_plain(iota)? {
        if skip(&c) {
            continue;
        }
        if !oracle.reaches_loc(&c, loc)?.to_bool()? {
            return Ok(Some(witness(oracle, iota, &c, false)?));
        }
    }
    Ok(None)
}

/// Whether `label` is reached with probability 1 from `iota`.
///
/// Works on the program with `label` replaced by a jump to a fresh
/// terminal instruction, so runs stop once they have visited it.
pub fn qual_reach(
    p: &Program,
    iota: &Configuration,
    label: &str,
    config: OracleConfig,
) -> Result<Verdict, QualError> {
    let loc = locate(p, label)?;
    let cut = p.remove_label(label)?;
    let mut oracle = Oracle::new(&cut, config)?;
    if iota.at(loc) {
        return Ok(Verdict::new(Analysis::QualReach, label, true, &oracle));
    }
    let done = Loc { process: loc.process, index: cut.processes[loc.process].instrs.len() - 1 };
    let trap = find_trap(&mut oracle, iota, loc, |c| c.at(done))?;
    let mut v = Verdict::new(Analysis::QualReach, label, trap.is_none(), &oracle);
    v.witness = trap;
    Ok(v)
}

/// Whether `label` is visited infinitely often with probability 1.
pub fn qual_rep_reach(
    p: &Program,
    iota: &Configuration,
    label: &str,
    config: OracleConfig,
) -> Result<Verdict, QualError> {
    let loc = locate(p, label)?;
    let mut oracle = Oracle::new(p, config)?;
    let trap = find_trap(&mut oracle, iota, loc, |_| false)?;
    let mut v = Verdict::new(Analysis::QualRepReach, label, trap.is_none(), &oracle);
    v.witness = trap;
    Ok(v)
}

/// Whether `label` is reached with probability 0: it is unreachable.
pub fn never_qual_reach(
    p: &Program,
    iota: &Configuration,
    label: &str,
    config: OracleConfig,
) -> Result<Verdict, QualError> {
    let loc = locate(p, label)?;
    let mut oracle = Oracle::new(p, config)?;
    let reachable = oracle.reaches_loc(iota, loc)?.to_bool()?;
    Ok(Verdict::new(Analysis::NeverReach, label, !reachable, &oracle))
}

/// Whether `label` is visited infinitely often with probability 0: no
/// B-plain configuration reachable from `iota` can reach it.
pub fn never_qual_rep_reach(
    p: &Program,
    iota: &Configuration,
    label: &str,
    config: OracleConfig,
) -> Result<Verdict, QualError> {
    let loc = locate(p, label)?;
    let mut oracle = Oracle::new(p, config)?;
    let mut found = None;
    for c in oracle.bplain_from(iota)? {
        if oracle.reaches_loc(&c, loc)?.to_bool()? {
            found = Some(witness(&mut oracle, iota, &c, true)?);
            break;
        }
    }
    let mut v = Verdict::new(Analysis::NeverRepReach, label, found.is_none(), &oracle);
    v.witness = found;
    Ok(v)
}

pub fn run(
    analysis: Analysis,
    p: &Program,
    iota: &Configuration,
    label: &str,
    config: OracleConfig,
) -> Result<Verdict, QualError> {
    match analysis {
        Analysis::QualReach => qual_reach(p, iota, label, config),
        Analysis::QualRepReach => qual_rep_reach(p, iota, label, config),
        Analysis::NeverReach => never_qual_reach(p, iota, label, config),
        Analysis::NeverRepReach => never_qual_rep_reach(p, iota, label, config),
    }
}
