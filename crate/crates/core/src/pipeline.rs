//! Assembled end-to-end evaluation paths: parse results in, sorted answers
//! out. Shared by the command-line front end, the benchmarks, and the C ABI.

use crate::analysis::{
    build_dependency_graph, stratify, FlounderingReport, NegativeCycle, Stratification,
};
use crate::ast::{matches, Fact, Literal, Program, Query, Rule};
use crate::engine::{
    answer_query, ebu_evaluate, store_for, EngineError, FactStore, FiringCounter, Resolution,
    UnknownPredicate,
};
use crate::names::GeneratedName;
use crate::oracles::{naive_stratified_evaluate, tabled_topdown_evaluate, SubqueryLog, TopdownError};
use crate::transform::{
    decompose_left, extended_demand_transform, normalize_rules, DecomposedProgram,
    ExtendedTransform, ExtendedTransformError, TransformError,
};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineError {
    NotStratified(NegativeCycle),
    Floundering(FlounderingReport),
    /// A negated subquery with an unbound argument reached at run time;
    /// analysis should have rejected the query first.
    RuntimeFloundering { predicate: String },
    Transform(TransformError),
    Engine(EngineError),
    UnknownPredicate(String),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::NotStratified(c) => write!(f, "not stratified: {c}"),
            PipelineError::Floundering(r) => write!(f, "{r}"),
            PipelineError::RuntimeFloundering { predicate } => {
                write!(f, "floundered on a negated subquery of `{predicate}`")
            }
            PipelineError::Transform(e) => write!(f, "{e}"),
            PipelineError::Engine(e) => write!(f, "{e}"),
            PipelineError::UnknownPredicate(p) => write!(f, "unknown predicate `{p}`"),
        }
    }
}

impl std::error::Error for PipelineError {}

impl From<ExtendedTransformError> for PipelineError {
    fn from(e: ExtendedTransformError) -> Self {
        match e {
            ExtendedTransformError::NotStratified(c) => PipelineError::NotStratified(c),
            ExtendedTransformError::Floundering(r) => PipelineError::Floundering(r),
            ExtendedTransformError::Transform(t) => PipelineError::Transform(t),
        }
    }
}

impl From<TransformError> for PipelineError {
    fn from(e: TransformError) -> Self {
        PipelineError::Transform(e)
    }
}

impl From<EngineError> for PipelineError {
    fn from(e: EngineError) -> Self {
        PipelineError::Engine(e)
    }
}

impl From<UnknownPredicate> for PipelineError {
    fn from(e: UnknownPredicate) -> Self {
        PipelineError::UnknownPredicate(e.predicate)
    }
}

impl From<NegativeCycle> for PipelineError {
    fn from(c: NegativeCycle) -> Self {
        PipelineError::NotStratified(c)
    }
}

impl From<TopdownError> for PipelineError {
    fn from(e: TopdownError) -> Self {
        match e {
            TopdownError::NotStratified(c) => PipelineError::NotStratified(c),
            TopdownError::Floundering { predicate } => {
                PipelineError::RuntimeFloundering { predicate }
            }
        }
    }
}

/// Everything a finished evaluation leaves behind.
#[derive(Debug)]
pub struct EvalRun {
    pub decomposed: DecomposedProgram,
    pub store: FactStore,
    pub firings: FiringCounter,
    pub resolutions: Vec<Resolution>,
    /// Facts present before evaluation: extensional tuples plus seeds.
    pub given_facts: u64,
    /// Sorted by predicate, then argument tuple.
    pub answers: Vec<Fact>,
}

/// An evaluation together with the transformation that produced its rules.
#[derive(Debug)]
pub struct PipelineRun {
    pub transform: ExtendedTransform,
    pub eval: EvalRun,
}

fn evaluate_transformed(
    transformed: &Program,
    original_predicates: &Program,
    query: &Query,
    strata: &Stratification,
) -> Result<EvalRun, PipelineError> {
    let decomposed = decompose_left(&normalize_rules(transformed))?;
    let mut store = store_for(&decomposed.program);
    // Original predicates may be absent from the transformed rules (no
    // demand ever reaches them) but still need to answer queries.
    for (name, arity) in original_predicates.arities() {
        store.declare(&name, arity, GeneratedName::parse(&name).is_some());
    }
    let given_facts = store.total_facts() as u64;
    let out = ebu_evaluate(&decomposed, store, strata)?;
    let mut answers = answer_query(&out.store, query)?;
    answers.sort();
    Ok(EvalRun {
        decomposed,
        store: out.store,
        firings: out.firings,
        resolutions: out.resolutions,
        given_facts,
        answers,
    })
}

/// Transform for the query and evaluate with the extended loop.
pub fn run_ebu(program: &Program, query: &Query) -> Result<PipelineRun, PipelineError> {
    let transform = extended_demand_transform(program, query)?;
    let transformed = transform
        .output
        .clone()
        .into_program(program.facts.clone());
    let eval = evaluate_transformed(&transformed, program, query, &transform.stratification)?;
    Ok(PipelineRun { transform, eval })
}

/// Evaluate a program that is already the output of the transformation,
/// e.g. reparsed from a rendered listing. Strata of the underlying original
/// program are reconstructed from the transformed rules.
pub fn run_pretransformed(program: &Program, query: &Query) -> Result<EvalRun, PipelineError> {
    let strata = reconstruct_strata(program)?;
    evaluate_transformed(program, program, query, &strata)
}

/// Recover the original program's shape from transformed rules: drop demand
/// hypotheses and rules concluding generated predicates, and read a
/// complement hypothesis `n.p(args)` back as `not p(args)`.
fn reconstruct_strata(program: &Program) -> Result<Stratification, PipelineError> {
    let mut rules: Vec<Rule> = Vec::new();
    for rule in &program.rules {
        if GeneratedName::parse(&rule.conclusion.predicate).is_some() {
            continue;
        }
        let hypotheses: Vec<Literal> = rule
            .hypotheses
            .iter()
            .filter_map(|h| match GeneratedName::parse(&h.atom.predicate) {
                Some(GeneratedName::Complement { base }) => Some(Literal::neg(
                    crate::ast::Atom::new(base, h.atom.args.clone()),
                )),
                Some(_) => None,
                None => Some(h.clone()),
            })
            .collect();
        if hypotheses.is_empty() {
            continue;
        }
        rules.push(Rule::new(rule.conclusion.clone(), hypotheses));
    }
    let facts: Vec<Fact> = program
        .facts
        .iter()
        .filter(|f| GeneratedName::parse(f.predicate()).is_none())
        .cloned()
        .collect();
    let graph = build_dependency_graph(&Program::new(rules, facts));
    Ok(stratify(&graph)?)
}

/// Full model of the original program filtered by the query, via the naive
/// oracle.
pub fn run_naive(program: &Program, query: &Query) -> Result<Vec<Fact>, PipelineError> {
    let model = naive_stratified_evaluate(program)?;
    let mut answers: Vec<Fact> = model
        .into_iter()
        .filter(|f| matches(f, query).is_some())
        .collect();
    answers.sort();
    Ok(answers)
}

/// Tabled top-down answers and subquery log.
pub fn run_td(program: &Program, query: &Query) -> Result<(Vec<Fact>, SubqueryLog), PipelineError> {
    let (answers, log) = tabled_topdown_evaluate(program, query)?;
    let mut answers: Vec<Fact> = answers.into_iter().collect();
    answers.sort();
    Ok((answers, log))
}
