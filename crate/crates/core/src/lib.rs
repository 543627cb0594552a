//! Probabilistic verification of finite-state concurrent programs running
//! under Total Store Ordering with a probabilistic scheduler and a uniform
//! memory-update policy.
//!
//! The crate is organised bottom-up:
//!
//! - [`lang`]: the program language (parse, print, transform);
//! - [`semantics`]: configurations and the TSO transition relation;
//! - [`markov`]: exact-rational transition probabilities;
//! - [`reach`]: a bounded reachability oracle and plain / B-plain enumeration;
//! - [`qualitative`], [`quantitative`], [`cost`]: the analyses;
//! - [`eagerness`]: gambler's-ruin bounds and the eagerness certificate;
//! - [`montecarlo`]: a run sampler used as a statistical cross-check.

pub mod cost;
pub mod eagerness;
pub mod interval;
pub mod lang;
pub mod markov;
pub mod montecarlo;
pub mod qualitative;
pub mod quantitative;
pub mod reach;
pub mod scc;
pub mod semantics;

pub use lang::{parse_program, LangError, Loc, Program, Statement, Value};
pub use semantics::{initial_config, Choice, Configuration, Message, UpdateSchedule};
