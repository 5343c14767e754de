//! Incremental bottom-up evaluation over decomposed rules, and its
//! extension that resolves complement predicates stratum by stratum.
//!
//! Facts are considered one at a time from a FIFO worklist. For a
//! two-hypothesis rule, a fact matching one hypothesis probes a hash index
//! of already-considered facts matching the other, so each combination of
//! facts that makes a rule body true is found once, in constant time, and
//! counted as one firing.
//!
//! The extended loop alternates: run plain evaluation with the complement
//! rules switched off; then, among demanded complement tuples not yet
//! decided, take those whose underlying predicate has the lowest stratum in
//! the original program. Everything such a predicate depends on has already
//! reached fixpoint, so `p(args)` absent from the store means `p(args)` is
//! false, and `n.p(args)` can be inserted.

mod store;

pub use store::{ConstId, FactStore, PredId, UnknownPredicate};

use crate::analysis::Stratification;
use crate::ast::{matches, Fact, Program, Query, Term};
use crate::names::{demanded_predicate, GeneratedName};
use crate::transform::DecomposedProgram;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

/// Firings per rule, indexed like the decomposed program's rules. A firing
/// is one combination of facts simultaneously matching all hypotheses of a
/// rule; duplicate conclusions still count, duplicate combinations cannot
/// occur.
#[derive(Debug, Clone, Default)]
pub struct FiringCounter {
    counts: Vec<u64>,
}

impl FiringCounter {
    pub fn get(&self, rule: usize) -> u64 {
        self.counts.get(rule).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().copied().enumerate()
    }
}

/// One step-2 decision about a demanded complement tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    /// The underlying predicate `p` of the complement `n.p`.
    pub predicate: String,
    pub values: Vec<String>,
    /// Stratum of `p` in the original program.
    pub stratum: u32,
    /// Minimum stratum over all pending demands when this one was picked.
    pub min_pending_stratum: u32,
    /// True when `p(values)` was absent and `n.p(values)` was inserted.
    pub inserted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    /// A rule body still contains negation but is not a two-hypothesis
    /// complement rule of the shape `n.p(args) :- d_n.p_s(args), not p(args)`.
    MalformedComplementRule { rule: String },
    /// A complement rule's demand pattern is not all bound; floundering
    /// should have been rejected before evaluation.
    UnboundComplementDemand { rule: String },
    /// A negated rule was left out of the excluded set of a plain run.
    NegationRequiresEbu { rule: String },
    /// No stratum is known for the underlying predicate of a complement.
    MissingStratum { predicate: String },
    /// Predicate used with two different arities.
    ArityConflict { predicate: String },
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::MalformedComplementRule { rule } => {
                write!(f, "malformed complement rule: {rule}")
            }
            EngineError::UnboundComplementDemand { rule } => {
                write!(f, "complement demand is not all bound: {rule}")
            }
            EngineError::NegationRequiresEbu { rule } => {
                write!(f, "negated rule outside the extended loop: {rule}")
            }
            EngineError::MissingStratum { predicate } => {
                write!(f, "no stratum for predicate `{predicate}`")
            }
            EngineError::ArityConflict { predicate } => {
                write!(f, "conflicting arities for predicate `{predicate}`")
            }
        }
    }
}

impl std::error::Error for EngineError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Const(ConstId),
    Var(usize),
}

#[derive(Debug, Clone)]
struct Hypothesis {
    pred: PredId,
    slots: Vec<Slot>,
    negated: bool,
}

/// How to probe the opposite hypothesis once this one is matched: the key
/// positions in the opposite relation and where each key value comes from.
#[derive(Debug, Clone, Default)]
struct ProbePlan {
    positions: Vec<usize>,
    sources: Vec<Slot>,
}

#[derive(Debug, Clone)]
struct CompiledRule {
    conclusion: (PredId, Vec<Slot>),
    hypotheses: Vec<Hypothesis>,
    /// For two-hypothesis rules, `probe[i]` drives the probe of hypothesis
    /// `1 - i` after a fact matched hypothesis `i`.
    probe: [ProbePlan; 2],
    var_count: usize,
}

/// A complement rule, ready for step-2 resolution.
#[derive(Debug, Clone)]
struct ComplementRule {
    rule: usize,
    complement: PredId,
    underlying: PredId,
    stratum: u32,
}

struct Machine {
    store: FactStore,
    rules: Vec<CompiledRule>,
    /// `(rule, side)` pairs listening for facts of each predicate.
    watchers: HashMap<PredId, Vec<(usize, usize)>>,
    /// Demand predicate of each complement rule.
    complements: HashMap<PredId, ComplementRule>,
    firings: FiringCounter,
    queue: VecDeque<(PredId, usize)>,
    /// Per-predicate count of already-considered tuples; the probe filter.
    cursor: Vec<usize>,
    pending: VecDeque<(PredId, usize)>,
    resolutions: Vec<Resolution>,
}

fn compile_rules(
    program: &DecomposedProgram,
    store: &mut FactStore,
) -> Result<Vec<CompiledRule>, EngineError> {
    let declare = |store: &mut FactStore, name: &str, arity: usize| {
        if let Some(id) = store.pred_id(name) {
            if store.arity(id) != arity {
                return Err(EngineError::ArityConflict {
                    predicate: name.to_owned(),
                });
            }
            return Ok(id);
        }
        Ok(store.declare(name, arity, GeneratedName::parse(name).is_some()))
    };
    program
        .rules()
        .iter()
        .map(|rule| {
            let mut vars: Vec<String> = Vec::new();
            let mut compile_atom = |store: &mut FactStore,
                                    atom: &crate::ast::Atom|
             -> Result<(PredId, Vec<Slot>), EngineError> {
                let pred = declare(store, &atom.predicate, atom.arity())?;
                let slots = atom
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Constant(c) => Slot::Const(store.intern(c)),
                        Term::Variable(v) => Slot::Var(match vars.iter().position(|n| n == v) {
                            Some(i) => i,
                            None => {
                                vars.push(v.clone());
                                vars.len() - 1
                            }
                        }),
                    })
                    .collect();
                Ok((pred, slots))
            };
            let hypotheses: Vec<Hypothesis> = rule
                .hypotheses
                .iter()
                .map(|h| {
                    let (pred, slots) = compile_atom(store, &h.atom)?;
                    Ok(Hypothesis {
                        pred,
                        slots,
                        negated: h.negated,
                    })
                })
                .collect::<Result<_, EngineError>>()?;
            let conclusion = compile_atom(store, &rule.conclusion)?;
            let mut probe: [ProbePlan; 2] = [ProbePlan::default(), ProbePlan::default()];
            if hypotheses.len() == 2 {
                for side in 0..2 {
                    let this = &hypotheses[side];
                    let other = &hypotheses[1 - side];
                    let this_vars: BTreeSet<usize> = this
                        .slots
                        .iter()
                        .filter_map(|s| match s {
                            Slot::Var(v) => Some(*v),
                            Slot::Const(_) => None,
                        })
                        .collect();
                    let mut plan = ProbePlan::default();
                    for (j, slot) in other.slots.iter().enumerate() {
                        let keyed = match slot {
                            Slot::Const(_) => true,
                            Slot::Var(v) => this_vars.contains(v),
                        };
                        if keyed {
                            plan.positions.push(j);
                            plan.sources.push(*slot);
                        }
                    }
                    probe[side] = plan;
                }
            }
            Ok(CompiledRule {
                conclusion,
                hypotheses,
                probe,
                var_count: vars.len(),
            })
        })
        .collect()
}

impl Machine {
    fn new(
        program: &DecomposedProgram,
        mut store: FactStore,
        excluded: BTreeSet<usize>,
        strata: Option<&Stratification>,
    ) -> Result<Self, EngineError> {
        let rules = compile_rules(program, &mut store)?;

        let mut complements = HashMap::new();
        for (i, rule) in rules.iter().enumerate() {
            if rule.hypotheses.iter().all(|h| !h.negated) {
                continue;
            }
            let rendered = program.rules()[i].to_string();
            // The only admissible negated shape is the complement rule.
            let [demand_hyp, negated_hyp] = rule.hypotheses.as_slice() else {
                return Err(EngineError::MalformedComplementRule { rule: rendered });
            };
            let same_slots = demand_hyp.slots == negated_hyp.slots
                && rule.conclusion.1 == negated_hyp.slots;
            let complement_name = store.pred_name(rule.conclusion.0).to_owned();
            let underlying_name = store.pred_name(negated_hyp.pred).to_owned();
            let demand_name = store.pred_name(demand_hyp.pred).to_owned();
            let demand_parse = GeneratedName::parse(&demand_name);
            let shape_ok = !demand_hyp.negated
                && negated_hyp.negated
                && same_slots
                && complement_name == crate::names::complement_predicate(&underlying_name)
                && matches!(
                    &demand_parse,
                    Some(GeneratedName::Demand { base, .. }) if *base == complement_name
                );
            if !shape_ok {
                return Err(EngineError::MalformedComplementRule { rule: rendered });
            }
            if let Some(GeneratedName::Demand { pattern, .. }) = demand_parse {
                if !pattern.is_all_bound() {
                    return Err(EngineError::UnboundComplementDemand { rule: rendered });
                }
            }
            if !excluded.contains(&i) {
                return Err(EngineError::NegationRequiresEbu { rule: rendered });
            }
            let stratum = match strata.and_then(|s| s.stratum(&underlying_name)) {
                Some(s) => s,
                None if strata.is_none() => 0,
                None => {
                    return Err(EngineError::MissingStratum {
                        predicate: underlying_name,
                    })
                }
            };
            complements.insert(
                demand_hyp.pred,
                ComplementRule {
                    rule: i,
                    complement: rule.conclusion.0,
                    underlying: negated_hyp.pred,
                    stratum,
                },
            );
        }

        let mut watchers: HashMap<PredId, Vec<(usize, usize)>> = HashMap::new();
        for (i, rule) in rules.iter().enumerate() {
            if excluded.contains(&i) {
                continue;
            }
            for (side, hyp) in rule.hypotheses.iter().enumerate() {
                watchers.entry(hyp.pred).or_default().push((i, side));
            }
        }

        let cursor = vec![0; store.predicate_count()];
        let firings = FiringCounter {
            counts: vec![0; rules.len()],
        };
        let mut machine = Machine {
            rules,
            watchers,
            complements,
            firings,
            queue: VecDeque::new(),
            cursor,
            pending: VecDeque::new(),
            resolutions: Vec::new(),
            store,
        };
        // Everything already in the store goes through the same intake as
        // freshly inferred facts.
        for pred in 0..machine.store.predicate_count() {
            for idx in 0..machine.store.len_of(pred) {
                machine.enqueue(pred, idx);
            }
        }
        Ok(machine)
    }

    fn enqueue(&mut self, pred: PredId, idx: usize) {
        self.queue.push_back((pred, idx));
        if self.complements.contains_key(&pred) {
            self.pending.push_back((pred, idx));
        }
    }

    fn insert(&mut self, pred: PredId, tuple: Box<[ConstId]>) {
        let (idx, new) = self.store.insert(pred, tuple);
        if new {
            self.enqueue(pred, idx);
        }
    }

    fn fire(&mut self, rule_index: usize, env: &[Option<ConstId>]) {
        self.firings.counts[rule_index] += 1;
        let (pred, slots) = &self.rules[rule_index].conclusion;
        let tuple: Box<[ConstId]> = slots
            .iter()
            .map(|s| match s {
                Slot::Const(c) => *c,
                Slot::Var(v) => env[*v].expect("conclusion variable bound by body"),
            })
            .collect();
        self.insert(*pred, tuple);
    }

    fn match_tuple(slots: &[Slot], tuple: &[ConstId], env: &mut [Option<ConstId>]) -> bool {
        slots.iter().zip(tuple).all(|(slot, &value)| match slot {
            Slot::Const(c) => *c == value,
            Slot::Var(v) => match env[*v] {
                Some(bound) => bound == value,
                None => {
                    env[*v] = Some(value);
                    true
                }
            },
        })
    }

    /// Drain the worklist: consider each fact once against every rule side
    /// that listens for its predicate.
    fn run_to_fixpoint(&mut self) {
        while let Some((pred, idx)) = self.queue.pop_front() {
            debug_assert_eq!(idx, self.cursor[pred], "worklist follows insertion order");
            self.cursor[pred] = idx + 1;
            let watchers = match self.watchers.get(&pred) {
                Some(w) => w.clone(),
                None => continue,
            };
            for (rule_index, side) in watchers {
                let rule = &self.rules[rule_index];
                let mut env = vec![None; rule.var_count];
                let this = &rule.hypotheses[side];
                if !Self::match_tuple(&this.slots, self.store.tuple_at(pred, idx), &mut env) {
                    continue;
                }
                if rule.hypotheses.len() == 1 {
                    self.fire(rule_index, &env);
                    continue;
                }
                let other = rule.hypotheses[1 - side].clone();
                let plan = rule.probe[side].clone();
                let key: Box<[ConstId]> = plan
                    .sources
                    .iter()
                    .map(|s| match s {
                        Slot::Const(c) => *c,
                        Slot::Var(v) => env[*v].expect("key variable bound by this side"),
                    })
                    .collect();
                self.store.ensure_index(other.pred, &plan.positions);
                let bucket: Vec<usize> = self
                    .store
                    .bucket(other.pred, &plan.positions, &key)
                    .to_vec();
                for other_idx in bucket {
                    // Only already-considered facts, so each combination is
                    // found exactly once: when its later fact is considered.
                    if other_idx >= self.cursor[other.pred] {
                        continue;
                    }
                    // The pair (fact, fact) is found while probing from the
                    // first hypothesis; skip its mirror image.
                    if side == 1 && other.pred == pred && other_idx == idx {
                        continue;
                    }
                    let mut env2 = env.clone();
                    if Self::match_tuple(
                        &other.slots,
                        self.store.tuple_at(other.pred, other_idx),
                        &mut env2,
                    ) {
                        self.fire(rule_index, &env2);
                    }
                }
            }
        }
    }

    /// Step 2 of the extended loop: decide every pending complement demand
    /// whose underlying predicate has the lowest stratum.
    fn resolve_lowest_stratum(&mut self) {
        let min = self
            .pending
            .iter()
            .map(|(pred, _)| self.complements[pred].stratum)
            .min()
            .expect("pending is non-empty");
        let mut rest = VecDeque::new();
        for (pred, idx) in std::mem::take(&mut self.pending) {
            let info = self.complements[&pred].clone();
            if info.stratum != min {
                rest.push_back((pred, idx));
                continue;
            }
            let tuple: Box<[ConstId]> = self.store.tuple_at(pred, idx).into();
            let inserted = !self.store.contains(info.underlying, &tuple);
            self.resolutions.push(Resolution {
                predicate: self.store.pred_name(info.underlying).to_owned(),
                values: tuple
                    .iter()
                    .map(|&c| self.store.constant_name(c).to_owned())
                    .collect(),
                stratum: info.stratum,
                min_pending_stratum: min,
                inserted,
            });
            if inserted {
                self.firings.counts[info.rule] += 1;
                self.insert(info.complement, tuple);
            }
        }
        self.pending = rest;
    }
}

/// Result of a plain bottom-up run.
#[derive(Debug)]
pub struct EvalOutcome {
    pub store: FactStore,
    pub firings: FiringCounter,
}

/// Result of an extended bottom-up run.
#[derive(Debug)]
pub struct EbuOutcome {
    pub store: FactStore,
    pub firings: FiringCounter,
    pub resolutions: Vec<Resolution>,
}

/// Least fixed point of the non-excluded rules over the store. `excluded`
/// must cover every rule with a negated hypothesis.
pub fn bu_evaluate(
    program: &DecomposedProgram,
    store: FactStore,
    excluded: &BTreeSet<usize>,
) -> Result<EvalOutcome, EngineError> {
    let mut machine = Machine::new(program, store, excluded.clone(), None)?;
    machine.run_to_fixpoint();
    Ok(EvalOutcome {
        store: machine.store,
        firings: machine.firings,
    })
}

/// The extended loop: plain evaluation with complement rules off,
/// alternated with lowest-stratum complement resolution, to fixpoint.
/// `strata` must come from the original program.
pub fn ebu_evaluate(
    program: &DecomposedProgram,
    store: FactStore,
    strata: &Stratification,
) -> Result<EbuOutcome, EngineError> {
    let excluded: BTreeSet<usize> = program
        .rules()
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.hypotheses.iter().any(|h| h.negated).then_some(i))
        .collect();
    let mut machine = Machine::new(program, store, excluded, Some(strata))?;
    loop {
        machine.run_to_fixpoint();
        if machine.pending.is_empty() {
            break;
        }
        machine.resolve_lowest_stratum();
    }
    Ok(EbuOutcome {
        store: machine.store,
        firings: machine.firings,
        resolutions: machine.resolutions,
    })
}

/// All stored facts of the query's predicate that match the query.
pub fn answer_query(store: &FactStore, query: &Query) -> Result<Vec<Fact>, UnknownPredicate> {
    let pred = store
        .pred_id(&query.atom.predicate)
        .ok_or_else(|| UnknownPredicate {
            predicate: query.atom.predicate.clone(),
        })?;
    let mut answers = Vec::new();
    for idx in 0..store.len_of(pred) {
        let fact = store.fact_at(pred, idx);
        if matches(&fact, query).is_some() {
            answers.push(fact);
        }
    }
    Ok(answers)
}

/// Demanded `(predicate, bound values)` pairs for the original intensional
/// predicates, read off the demand relations. Demand on a complement is
/// demand on its underlying predicate.
pub fn demand_entries(
    store: &FactStore,
    intensional: &BTreeSet<String>,
) -> BTreeSet<(String, Vec<String>)> {
    let mut entries = BTreeSet::new();
    for pred in 0..store.predicate_count() {
        let Some(target) = demanded_predicate(store.pred_name(pred)) else {
            continue;
        };
        if !intensional.contains(&target) {
            continue;
        }
        for tuple in store.tuples_of(pred) {
            entries.insert((
                target.clone(),
                tuple.iter().map(|&c| store.constant_name(c).to_owned()).collect(),
            ));
        }
    }
    entries
}

/// Build a store over a program's predicates and load its facts.
pub fn store_for(program: &Program) -> FactStore {
    let mut store = FactStore::new();
    for (name, arity) in program.arities() {
        store.declare(&name, arity, GeneratedName::parse(&name).is_some());
    }
    for fact in &program.facts {
        store.insert_fact(fact).expect("predicates declared above");
    }
    store
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{build_dependency_graph, stratify};
    use crate::parser::{parse_program, parse_query};
    use crate::transform::{decompose_left, extended_demand_transform, normalize_rules};

    fn positive_fixture(rules: &str, facts: &str) -> (DecomposedProgram, FactStore) {
        let program = parse_program(&format!("{rules}{facts}")).unwrap();
        let decomposed = decompose_left(&normalize_rules(&program)).unwrap();
        let store = store_for(&decomposed.program);
        (decomposed, store)
    }

    #[test]
    fn transformed_reachability_reaches_its_fixpoint() {
        // Demand-restricted reachability from node 1, already transformed.
        let rules = concat!(
            "p(X,Y) :- d_p_bf(X), e(X,Y).\n",
            "p(X,Z) :- d_p_bf(X), e(X,Y), p(Y,Z).\n",
            "d_p_bf(Y) :- d_p_bf(X), e(X,Y).\n",
        );
        let (decomposed, store) = positive_fixture(rules, "d_p_bf(1).\ne(1,2).\ne(2,3).\n");
        let out = bu_evaluate(&decomposed, store, &BTreeSet::new()).unwrap();
        let p = out.store.pred_id("p").unwrap();
        let mut found: Vec<String> = (0..out.store.len_of(p))
            .map(|i| out.store.fact_at(p, i).to_string())
            .collect();
        found.sort();
        assert_eq!(found, ["p(1,2)", "p(1,3)", "p(2,3)"]);
        let d = out.store.pred_id("d_p_bf").unwrap();
        assert_eq!(out.store.len_of(d), 3);
    }

    #[test]
    fn empty_rule_set_changes_nothing() {
        let (decomposed, store) = positive_fixture("", "e(1,2).\n");
        let before = store.total_facts();
        let out = bu_evaluate(&decomposed, store, &BTreeSet::new()).unwrap();
        assert_eq!(out.store.total_facts(), before);
        assert_eq!(out.firings.total(), 0);
    }

    #[test]
    fn set_semantics_fires_once_per_combination() {
        let (decomposed, store) = positive_fixture("a(X) :- b(X).\n", "b(1).\nb(1).\n");
        let out = bu_evaluate(&decomposed, store, &BTreeSet::new()).unwrap();
        assert_eq!(out.firings.get(0), 1);
        let a = out.store.pred_id("a").unwrap();
        assert_eq!(out.store.len_of(a), 1);
    }

    #[test]
    fn self_join_counts_each_ordered_pair_once() {
        let (decomposed, store) =
            positive_fixture("t(X,Z) :- e(X,Y), e(Y,Z).\n", "e(1,1).\ne(1,2).\n");
        let out = bu_evaluate(&decomposed, store, &BTreeSet::new()).unwrap();
        // Combinations: (11,11), (11,12) for X=1; none start from (1,2).
        assert_eq!(out.firings.get(0), 2);
    }

    #[test]
    fn negated_rules_require_the_extended_loop() {
        let program =
            parse_program("n.p(X) :- d_n.p_b(X), not p(X).\np(X) :- e(X).\n").unwrap();
        let decomposed = decompose_left(&normalize_rules(&program)).unwrap();
        let store = store_for(&decomposed.program);
        let err = bu_evaluate(&decomposed, store, &BTreeSet::new()).unwrap_err();
        assert!(matches!(err, EngineError::NegationRequiresEbu { .. }));
    }

    fn ebu_fixture(text: &str, query: &str) -> EbuOutcome {
        let program = parse_program(text).unwrap();
        let query = parse_query(query).unwrap();
        let transform = extended_demand_transform(&program, &query).unwrap();
        let strata = stratify(&build_dependency_graph(&program)).unwrap();
        let transformed = transform.output.into_program(program.facts.clone());
        let decomposed = decompose_left(&normalize_rules(&transformed)).unwrap();
        let store = store_for(&decomposed.program);
        ebu_evaluate(&decomposed, store, &strata).unwrap()
    }

    const EXTENDED: &str = concat!(
        "p(X,Y) :- e(X,Y).\n",
        "p(X,Z) :- e(X,Y), p(Y,Z).\n",
        "p2(X,Y) :- not p(X,Y), e2(X,Y).\n",
        "p2(X,Z) :- not p(X,Z), e2(X,Y), p2(Y,Z).\n",
    );

    #[test]
    fn complement_suppressed_when_the_fact_holds() {
        let out = ebu_fixture(
            &format!("{EXTENDED}e(1,2).\ne2(1,2).\n"),
            "p2(1,2)?",
        );
        let store = &out.store;
        assert!(store.pred_id("n.p").is_some_and(|p| store.len_of(p) == 0));
        let p2 = store.pred_id("p2").unwrap();
        assert_eq!(store.len_of(p2), 0);
        assert_eq!(
            out.resolutions,
            vec![Resolution {
                predicate: "p".into(),
                values: vec!["1".into(), "2".into()],
                stratum: 0,
                min_pending_stratum: 0,
                inserted: false,
            }]
        );
    }

    #[test]
    fn complement_inferred_when_the_fact_is_absent() {
        let out = ebu_fixture(&format!("{EXTENDED}e2(1,2).\n"), "p2(1,2)?");
        let store = &out.store;
        // Demand also reaches p2(2,2) through the recursive rule, so both
        // complements on p are decided and inserted.
        let np = store.pred_id("n.p").unwrap();
        assert_eq!(store.len_of(np), 2);
        let p2 = store.pred_id("p2").unwrap();
        assert_eq!(store.len_of(p2), 1);
        assert_eq!(store.fact_at(p2, 0).to_string(), "p2(1,2)");
        assert!(out.resolutions.iter().all(|r| r.inserted));
    }

    #[test]
    fn answers_filter_by_query_constants() {
        let rules = "p(X,Y) :- d_p_bf(X), e(X,Y).\nd_p_bf(Y) :- d_p_bf(X), e(X,Y).\n";
        let (decomposed, store) =
            positive_fixture(rules, "d_p_bf(1).\ne(1,2).\ne(1,3).\ne(2,3).\n");
        let out = bu_evaluate(&decomposed, store, &BTreeSet::new()).unwrap();
        let query = parse_query("p(1,X)?").unwrap();
        let answers: Vec<String> = answer_query(&out.store, &query)
            .unwrap()
            .iter()
            .map(|f| f.to_string())
            .collect();
        assert_eq!(answers, ["p(1,2)", "p(1,3)"]);
        assert!(answer_query(&out.store, &parse_query("zz(1)?").unwrap()).is_err());
    }

    #[test]
    fn demand_entries_unwrap_complements() {
        let out = ebu_fixture(&format!("{EXTENDED}e2(1,2).\n"), "p2(1,2)?");
        let intensional: BTreeSet<String> = ["p".to_owned(), "p2".to_owned()].into();
        let entries = demand_entries(&out.store, &intensional);
        assert!(entries.contains(&("p2".into(), vec!["1".into(), "2".into()])));
        assert!(entries.contains(&("p".into(), vec!["1".into(), "2".into()])));
    }
}
