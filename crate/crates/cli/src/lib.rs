//! The `ptso-verify` command line.
//!
//! Every invocation prints one JSON document on standard output and a short
//! human-readable summary on standard error. [`run`] does all the work and
//! returns both streams, so the binary is a thin wrapper.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

use ptso_core::cost::{self, CostError, CostFunction, CostOptions};
use ptso_core::eagerness::{self, EagerError, DEFAULT_BETA};
use ptso_core::lang::{print_program, LangError, Program};
use ptso_core::markov::{parse_rational, rat_f64, rat_string, Chain, Rational};
use ptso_core::montecarlo::{self, SimError};
use ptso_core::qualitative::{self, Analysis, QualError};
use ptso_core::quantitative::{self, QuantError, QuantOptions};
use ptso_core::reach::{self, OracleConfig, OracleError};
use ptso_core::semantics::{self, Configuration};

pub const SCHEMA: &str = "ptso-verify/1";

pub const EXIT_OK: i32 = 0;
/// A qualitative property does not hold.
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
/// The oracle could not decide a query in strict mode.
pub const EXIT_UNKNOWN: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ptso-verify", version, about = "Probabilistic verification of programs under TSO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a program and print its canonical form and basic statistics.
    Parse {
        program: PathBuf,
    },
    /// Is the label reached with probability 1?
    QualReach(QualArgs),
    /// Is the label visited infinitely often with probability 1?
    QualRepReach(QualArgs),
    /// Is the label reached with probability 0?
    NeverReach(QualArgs),
    /// Is the label visited infinitely often with probability 0?
    NeverRepReach(QualArgs),
    /// Approximate the probability of reaching the label.
    QuantReach(QuantArgs),
    /// Approximate the probability of visiting the label infinitely often.
    QuantRepReach(QuantArgs),
    /// Approximate the expected cost of reaching the label, given that it is reached.
    Cost(CostArgs),
    /// Estimate probabilities and costs by sampling runs.
    Simulate(SimArgs),
    /// Compute the eagerness certificate of the label.
    Eagerness(EagerArgs),
}

#[derive(Debug, Args)]
struct Target {
    /// Program file.
    program: PathBuf,
    /// Target label.
    #[arg(long)]
    label: String,
    /// JSON file with the start configuration (default: the initial one).
    #[arg(long)]
    init: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Buffer bound of the reachability oracle.
    #[arg(long, default_value_t = reach::DEFAULT_BOUND)]
    bound: usize,
    /// Retry pruned queries with bounds up to this value.
    #[arg(long)]
    bound_max: Option<usize>,
    /// Report pruned negative answers as unknown instead of assuming no.
    #[arg(long)]
    strict: bool,
    /// Maximum number of configurations explored per bound.
    #[arg(long, default_value_t = reach::DEFAULT_NODE_BUDGET)]
    node_budget: usize,
}

impl OracleArgs {
    fn config(&self) -> OracleConfig {
        let mut cfg = match self.bound_max {
            Some(max) => OracleConfig::iterative(self.bound, max),
            None => OracleConfig::bounded(self.bound),
        };
        if self.strict {
            cfg = cfg.strict();
        }
        cfg.node_budget = self.node_budget;
        cfg
    }
}

#[derive(Debug, Args)]
struct QualArgs {
    #[command(flatten)]
    target: Target,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Debug, Args)]
struct QuantArgs {
    #[command(flatten)]
    target: Target,
    #[command(flatten)]
    oracle: OracleArgs,
    /// Precision, as "num/den" or a decimal.
    #[arg(long, default_value = "1/100", value_parser = rational)]
    epsilon: Rational,
    #[arg(long, default_value_t = quantitative::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    #[arg(long, default_value_t = quantitative::DEFAULT_MAX_FRONTIER)]
    max_frontier: usize,
}

#[derive(Debug, Args)]
struct CostArgs {
    #[command(flatten)]
    target: Target,
    #[command(flatten)]
    oracle: OracleArgs,
    /// Precision, as "num/den" or a decimal.
    #[arg(long, default_value = "1/10", value_parser = rational)]
    epsilon: Rational,
    /// JSON object mapping labels to positive integer costs.
    #[arg(long)]
    costs: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: u32,
    #[arg(long, default_value_t = cost::DEFAULT_MAX_LAYERS)]
    max_layers: u64,
    #[arg(long, default_value_t = cost::DEFAULT_MAX_FRONTIER)]
    max_frontier: usize,
    /// Keep paths that can no longer reach the label.
    #[arg(long)]
    no_prune: bool,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// Program file.
    program: PathBuf,
    /// Target label; without it only run statistics are reported.
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    #[arg(long, default_value_t = 1000)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also estimate the conditional cost, using these costs.
    #[arg(long)]
    costs: Option<PathBuf>,
    /// Also report return-to-plain and size-drift statistics.
    #[arg(long)]
    attractor: bool,
    /// Window for the return-to-plain statistic.
    #[arg(long, default_value_t = 200)]
    window: usize,
}

#[derive(Debug, Args)]
struct EagerArgs {
    #[command(flatten)]
    target: Target,
    #[command(flatten)]
    oracle: OracleArgs,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: u32,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not a rational number"))
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
    partial: Option<Json>,
}

impl Failure {
    fn usage(kind: &'static str, message: impl ToString) -> Self {
        Failure { code: EXIT_USAGE, kind, message: message.to_string(), partial: None }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let (code, kind) = match e {
            OracleError::Unknown { .. } => (EXIT_UNKNOWN, "unknown"),
            OracleError::Budget { .. } | OracleError::PlainCap { .. } => (EXIT_BUDGET, "budget"),
            _ => (EXIT_USAGE, "oracle"),
        };
        Failure { code, kind, message: e.to_string(), partial: None }
    }
}

impl From<LangError> for Failure {
    fn from(e: LangError) -> Self {
        Failure::usage("program", e)
    }
}

impl From<QualError> for Failure {
    fn from(e: QualError) -> Self {
        match e {
            QualError::Lang(e) => e.into(),
            QualError::Oracle(e) => e.into(),
        }
    }
}

impl From<QuantError> for Failure {
    fn from(e: QuantError) -> Self {
        match e {
            QuantError::Lang(e) => e.into(),
            QuantError::Oracle(e) => e.into(),
            QuantError::Budget { what, partial } => Failure {
                code: EXIT_BUDGET,
                kind: "budget",
                message: format!("{what} budget exhausted"),
                partial: Some(partial.to_json()),
            },
            e @ QuantError::BadEpsilon => Failure::usage("argument", e),
        }
    }
}

impl From<EagerError> for Failure {
    fn from(e: EagerError) -> Self {
        match e {
            EagerError::Lang(e) => e.into(),
            EagerError::Oracle(e) => e.into(),
            e @ (EagerError::MuBudget(_) | EagerError::Overflow) => {
                Failure { code: EXIT_BUDGET, kind: "budget", message: e.to_string(), partial: None }
            }
            e => Failure::usage("eagerness", e),
        }
    }
}

impl From<CostError> for Failure {
    fn from(e: CostError) -> Self {
        match e {
            CostError::Lang(e) => e.into(),
            CostError::Oracle(e) => e.into(),
            CostError::Budget { what, partial } => Failure {
                code: EXIT_BUDGET,
                kind: "budget",
                message: format!("{what} budget exhausted after {} layers", partial.n),
                partial: Some(partial.to_json()),
            },
            e => Failure::usage("cost", e),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Lang(e) => e.into(),
            e => Failure::usage("simulation", e),
        }
    }
}

struct Success {
    code: i32,
    result: Json,
    summary: String,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage("io", format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    Ok(ptso_core::parse_program(&read(path)?)?)
}

fn load_json(path: &Path) -> Result<Json, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::usage("json", format!("{}: {e}", path.display())))
}

fn start(p: &Program, init: Option<&Path>) -> Result<Configuration, Failure> {
    match init {
        None => Ok(semantics::initial_config(p)),
        Some(path) => semantics::parse_config(p, &load_json(path)?).map_err(|e| Failure::usage("configuration", e)),
    }
}

fn load_costs(p: &Program, path: Option<&Path>) -> Result<CostFunction, Failure> {
    match path {
        None => Ok(CostFunction::default_table(p)),
        Some(path) => Ok(CostFunction::from_json(p, &load_json(path)?)?),
    }
}

fn parse_cmd(path: &Path) -> Result<Success, Failure> {
    let p = load_program(path)?;
    let processes: Vec<Json> = p
        .processes
        .iter()
        .map(|d| {
            json!({
                "name": d.name,
                "weight": d.weight,
                "regs": d.regs,
                "labels": d.instrs.iter().map(|i| i.label.as_str()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let plain = reach::plain_count(&p);
    let result = json!({
        "domain": p.domain,
        "vars": p.vars,
        "processes": processes,
        "plain_configs": plain.to_string(),
        "canonical": print_program(&p)?,
    });
    let summary = format!(
        "{} processes, {} variables, {} plain configurations",
        p.processes.len(),
        p.vars.len(),
        plain
    );
    Ok(Success { code: EXIT_OK, result, summary })
}

fn qual_cmd(analysis: Analysis, a: &QualArgs) -> Result<Success, Failure> {
    let p = load_program(&a.target.program)?;
    let iota = start(&p, a.target.init.as_deref())?;
    let v = qualitative::run(analysis, &p, &iota, &a.target.label, a.oracle.config())?;
    let mut summary = format!("{} {}: {}", analysis.name(), a.target.label, v.verdict);
    if v.assumed_no > 0 {
        let _ = write!(summary, " ({} pruned searches assumed negative at bound {})", v.assumed_no, v.bound_used);
    }
    Ok(Success { code: if v.verdict { EXIT_OK } else { EXIT_FALSE }, result: v.to_json(&p), summary })
}

fn quant_cmd(rep: bool, a: &QuantArgs) -> Result<Success, Failure> {
    let p = load_program(&a.target.program)?;
    let iota = start(&p, a.target.init.as_deref())?;
    let opts = QuantOptions { epsilon: a.epsilon.clone(), max_iterations: a.max_iterations, max_frontier: a.max_frontier };
    let cfg = a.oracle.config();
    let r = if rep {
        quantitative::quant_rep_reach(&p, &iota, &a.target.label, &opts, cfg)?
    } else {
        quantitative::quant_reach(&p, &iota, &a.target.label, &opts, cfg)?
    };
    let summary = format!(
        "P({}{}) in [{}, {}] after {} iterations",
        if rep { "infinitely often " } else { "reach " },
        a.target.label,
        rat_f64(&r.value),
        rat_f64(&r.upper()),
        r.iterations
    );
    Ok(Success { code: EXIT_OK, result: r.to_json(), summary })
}

fn eagerness_cmd(a: &EagerArgs) -> Result<Success, Failure> {
    let p = load_program(&a.target.program)?;
    let iota = start(&p, a.target.init.as_deref())?;
    let e = eagerness::compute_eagerness(&Chain::new(&p), &iota, &a.target.label, a.oracle.config(), a.beta)?;
    let summary = format!(
        "alpha = 1 - {:e}, threshold n = {}, |A| = {}, mu = {}",
        e.alpha.gap,
        e.n_threshold,
        e.a_set.len(),
        rat_string(&e.mu)
    );
    Ok(Success { code: EXIT_OK, result: e.to_json(), summary })
}

fn cost_cmd(a: &CostArgs) -> Result<Success, Failure> {
    let p = load_program(&a.target.program)?;
    let iota = start(&p, a.target.init.as_deref())?;
    let costs = load_costs(&p, a.costs.as_deref())?;
    let cfg = a.oracle.config();
    let e = eagerness::compute_eagerness(&Chain::new(&p), &iota, &a.target.label, cfg, a.beta)?;
    let opts = CostOptions {
        epsilon: a.epsilon.clone(),
        prune: !a.no_prune,
        max_layers: a.max_layers,
        max_frontier: a.max_frontier,
    };
    let r = match cost::expected_avg_cost(&p, &iota, &a.target.label, &costs, &opts, cfg, &e) {
        Ok(r) => r,
        Err(CostError::Budget { what, partial }) => {
            return Err(Failure {
                code: EXIT_BUDGET,
                kind: "budget",
                message: format!("{what} budget exhausted after {} layers", partial.n),
                partial: Some(json!({ "cost": partial.to_json(), "eagerness": e.to_json() })),
            })
        }
        Err(err) => return Err(err.into()),
    };
    let summary = format!(
        "E[cost to {} | reached] in [{}, {}], {} layers",
        a.target.label,
        rat_f64(&r.value),
        rat_f64(&(&r.value + &r.epsilon)),
        r.layers_explored
    );
    let result = json!({ "cost": r.to_json(), "eagerness": e.to_json(), "costs": costs.to_json(&p) });
    Ok(Success { code: EXIT_OK, result, summary })
}

fn simulate_cmd(a: &SimArgs) -> Result<Success, Failure> {
    let p = load_program(&a.program)?;
    let iota = start(&p, a.init.as_deref())?;
    let mut result = serde_json::Map::new();
    let mut summary = Vec::new();
    if let Some(label) = &a.label {
        let r = montecarlo::estimate_reach(&p, &iota, label, a.runs, a.horizon, a.seed)?;
        summary.push(format!(
            "{label}: {}/{} runs within {} steps, 95% interval [{:.4}, {:.4}]",
            r.hits, r.runs, r.horizon, r.interval.0, r.interval.1
        ));
        result.insert("reach".into(), r.to_json());
        if let Some(path) = &a.costs {
            let costs = load_costs(&p, Some(path))?;
            match montecarlo::estimate_cond_cost(&p, &iota, label, &costs, a.runs, a.horizon, a.seed) {
                Ok(c) => {
                    summary.push(format!("mean cost {:.4}", c.mean));
                    result.insert("cond_cost".into(), c.to_json());
                }
                Err(SimError::NoHits { .. }) => {
                    summary.push("no run reached the label; no cost estimate".into());
                    result.insert("cond_cost".into(), Json::Null);
                }
                Err(e) => return Err(e.into()),
            }
        }
    } else if a.runs == 0 {
        return Err(SimError::NoRuns.into());
    }
    if a.attractor || a.label.is_none() {
        let s = montecarlo::attractor_stats(&p, &iota, a.runs, a.horizon, a.window, a.seed)?;
        summary.push(format!(
            "plain within every {} steps in {:.4} of runs; mean size change from size >= 5: {:.3} ({} samples)",
            s.window, s.plain_return_fraction, s.mean_size_change, s.large_samples
        ));
        result.insert("attractor".into(), s.to_json());
    }
    result.insert("seed".into(), json!(a.seed));
    Ok(Success { code: EXIT_OK, result: Json::Object(result), summary: summary.join("\n") })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Parse { .. } => "parse",
        Command::QualReach(_) => "qual-reach",
        Command::QualRepReach(_) => "qual-rep-reach",
        Command::NeverReach(_) => "never-reach",
        Command::NeverRepReach(_) => "never-rep-reach",
        Command::QuantReach(_) => "quant-reach",
        Command::QuantRepReach(_) => "quant-rep-reach",
        Command::Cost(_) => "cost",
        Command::Simulate(_) => "simulate",
        Command::Eagerness(_) => "eagerness",
    }
}

fn program_path(c: &Command) -> &Path {
    match c {
        Command::Parse { program } => program,
        Command::QualReach(a) | Command::QualRepReach(a) | Command::NeverReach(a) | Command::NeverRepReach(a) => {
            &a.target.program
        }
        Command::QuantReach(a) | Command::QuantRepReach(a) => &a.target.program,
        Command::Cost(a) => &a.target.program,
        Command::Simulate(a) => &a.program,
        Command::Eagerness(a) => &a.target.program,
    }
}

fn dispatch(c: &Command) -> Result<Success, Failure> {
    match c {
        Command::Parse { program } => parse_cmd(program),
        Command::QualReach(a) => qual_cmd(Analysis::QualReach, a),
        Command::QualRepReach(a) => qual_cmd(Analysis::QualRepReach, a),
        Command::NeverReach(a) => qual_cmd(Analysis::NeverReach, a),
        Command::NeverRepReach(a) => qual_cmd(Analysis::NeverRepReach, a),
        Command::QuantReach(a) => quant_cmd(false, a),
        Command::QuantRepReach(a) => quant_cmd(true, a),
        Command::Cost(a) => cost_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Eagerness(a) => eagerness_cmd(a),
    }
}

fn render(doc: &Json) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome { code: EXIT_OK, stdout: e.to_string(), stderr: String::new() };
            }
            let doc = json!({
                "schema": SCHEMA,
                "error": { "kind": "usage", "message": e.kind().to_string() },
            });
            return Outcome { code: EXIT_USAGE, stdout: render(&doc), stderr: e.to_string() };
        }
    };
    let command = command_name(&cli.command);
    let program = program_path(&cli.command).display().to_string();
    match dispatch(&cli.command) {
        Ok(s) => {
            let doc = json!({ "schema": SCHEMA, "command": command, "program": program, "result": s.result });
            Outcome { code: s.code, stdout: render(&doc), stderr: format!("{}\n", s.summary) }
        }
        Err(f) => {
            let mut doc = json!({
                "schema": SCHEMA,
                "command": command,
                "program": program,
                "error": { "kind": f.kind, "message": f.message },
            });
            if let Some(partial) = f.partial {
                doc["partial"] = partial;
            }
            Outcome { code: f.code, stdout: render(&doc), stderr: format!("error: {}\n", f.message) }
        }
    }
}
