//! A Datalog engine that answers queries over rules with stratified negation
//! by rewriting the rules to be driven by the demand from the query and then
//! evaluating them bottom-up, resolving negation stratum by stratum.
//!
//! The crate is organized as a pipeline:
//!
//! - [`ast`]: terms, atoms, rules, facts, programs, queries
//! - [`parser`]: text syntax for `.dl` programs, `.facts` files, queries
//! - [`analysis`]: dependency graph, stratification, demand patterns,
//!   floundering detection
//! - [`transform`]: demand transformation, the complement-predicate
//!   extension for negation, normalization, and left decomposition
//! - [`engine`]: indexed fact store and the incremental bottom-up evaluator
//!   with per-rule firing counters
//! - [`oracles`]: two independent reference evaluators (naive stratified
//!   full-model, and tabled top-down) used to validate the engine
//! - [`complexity`]: firing-count bounds computed from store statistics
//! - [`pipeline`], [`bench`], [`cli`]: the assembled end-to-end paths and
//!   the command-line front end

pub mod analysis;
pub mod ast;
pub mod bench;
pub mod cli;
pub mod complexity;
pub mod engine;
pub mod names;
pub mod oracles;
pub mod parser;
pub mod pipeline;
pub mod transform;

pub use ast::{
    Atom, Binding, BindingPattern, DemandPattern, Fact, Literal, Program, Query, Rule, Term,
};
pub use parser::{parse_program, parse_query, render_program};
