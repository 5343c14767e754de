//! Independent reference evaluators used to validate the engine: a naive
//! stratified full-model evaluator and a tabled top-down evaluator. Neither
//! shares evaluation code with the engine.

mod naive;
mod topdown;

pub use naive::naive_stratified_evaluate;
pub use topdown::{tabled_topdown_evaluate, SubqueryLog, SubqueryRecord, TopdownError};
