//! Top-down evaluation with tabling and no early completion.
//!
//! Subqueries are memoized by binding pattern: constants verbatim, free
//! variables renamed apart, so `p(1,Z)` and `p(1,W)` share a table and so
//! do `p(Z,Z)` and `p(Z,W)`. Repetition in a hypothesis is still enforced
//! when answers return to it, so answer sets are those of variant tabling;
//! only the table identities are coarser, mirroring how demand is tracked
//! on the bottom-up side. Rule bodies are walked left to right through an
//! explicit job queue, suspending on tables and resuming as answers arrive,
//! so recursion depth never depends on the data. A ground negated
//! hypothesis suspends until every table it could depend on has quiesced;
//! suspended negations are then released lowest stratum first, at which
//! point the negated subquery's table is necessarily complete.

use crate::analysis::{build_dependency_graph, stratify, NegativeCycle};
use crate::ast::{matches, BindingPattern, Fact, Program, Query, Term};
use indexmap::IndexSet;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

/// One tabled subquery: its predicate, binding pattern, bound constants in
/// position order, and (once evaluation finishes) its answer tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubqueryRecord {
    pub predicate: String,
    pub pattern: BindingPattern,
    pub bound: Vec<String>,
    pub answers: BTreeSet<Vec<String>>,
}

/// Subqueries in the order they were first encountered; variants appear
/// once.
#[derive(Debug, Clone, Default)]
pub struct SubqueryLog {
    pub entries: Vec<SubqueryRecord>,
}

impl SubqueryLog {
    /// The `(predicate, bound constants)` view used for demand comparisons.
    pub fn key_set(&self) -> BTreeSet<(String, Vec<String>)> {
        self.entries
            .iter()
            .map(|e| (e.predicate.clone(), e.bound.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopdownError {
    NotStratified(NegativeCycle),
    /// A negated subquery was reached with an unbound argument.
    Floundering { predicate: String },
}

impl fmt::Display for TopdownError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopdownError::NotStratified(c) => write!(f, "not stratified: {c}"),
            TopdownError::Floundering { predicate } => {
                write!(f, "floundered on a negated subquery of `{predicate}`")
            }
        }
    }
}

impl std::error::Error for TopdownError {}

/// A rule argument compiled to a local variable slot or a constant.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Slot {
    Const(String),
    Var(usize),
}

struct CompiledRule {
    conclusion: (String, Vec<Slot>),
    hypotheses: Vec<(String, Vec<Slot>, bool)>,
    var_count: usize,
}

fn compile(program: &Program) -> Vec<CompiledRule> {
    program
        .rules
        .iter()
        .map(|rule| {
            let mut names: Vec<String> = Vec::new();
            let mut slot = |term: &Term| match term {
                Term::Constant(c) => Slot::Const(c.clone()),
                Term::Variable(v) => Slot::Var(match names.iter().position(|n| n == v) {
                    Some(i) => i,
                    None => {
                        names.push(v.clone());
                        names.len() - 1
                    }
                }),
            };
            let conclusion = (
                rule.conclusion.predicate.clone(),
                rule.conclusion.args.iter().map(&mut slot).collect(),
            );
            let hypotheses = rule
                .hypotheses
                .iter()
                .map(|h| {
                    (
                        h.atom.predicate.clone(),
                        h.atom.args.iter().map(&mut slot).collect(),
                        h.negated,
                    )
                })
                .collect();
            CompiledRule {
                conclusion,
                hypotheses,
                var_count: names.len(),
            }
        })
        .collect()
}

/// Rule-local bindings with aliasing, so a subquery like `p(V0,V0)` can
/// constrain two conclusion variables to be equal before either has a value.
#[derive(Debug, Clone)]
struct Env {
    parent: Vec<usize>,
    value: Vec<Option<String>>,
}

impl Env {
    fn new(n: usize) -> Self {
        Env {
            parent: (0..n).collect(),
            value: vec![None; n],
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn get(&self, x: usize) -> Option<&str> {
        self.value[self.find(x)].as_deref()
    }

    fn bind(&mut self, x: usize, c: &str) -> bool {
        let root = self.find(x);
        match &self.value[root] {
            Some(v) => v == c,
            None => {
                self.value[root] = Some(c.to_owned());
                true
            }
        }
    }

    fn alias(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return true;
        }
        match (&self.value[rx], &self.value[ry]) {
            (Some(a), Some(b)) => a == b,
            (Some(_), None) => {
                self.parent[ry] = rx;
                true
            }
            (None, _) => {
                self.parent[rx] = ry;
                true
            }
        }
    }

    fn resolve(&self, slot: &Slot) -> Option<String> {
        match slot {
            Slot::Const(c) => Some(c.clone()),
            Slot::Var(v) => self.get(*v).map(str::to_owned),
        }
    }

    fn unify_tuple(&mut self, slots: &[Slot], values: &[String]) -> bool {
        slots.iter().zip(values).all(|(slot, value)| match slot {
            Slot::Const(c) => c == value,
            Slot::Var(v) => self.bind(*v, value),
        })
    }
}

/// A subquery atom up to renaming: constants verbatim, variables numbered by
/// first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Variant {
    predicate: String,
    args: Vec<CanonTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum CanonTerm {
    Const(String),
    Var(usize),
}

type TableId = usize;

/// A consumer is a rule traversal suspended at hypothesis `hyp` of rule
/// `rule`, producing into `origin`.
#[derive(Debug, Clone)]
struct Consumer {
    origin: TableId,
    rule: usize,
    env: Env,
    hyp: usize,
}

struct Table {
    answers: IndexSet<Vec<String>>,
    consumers: Vec<Consumer>,
}

enum Job {
    /// Continue a rule traversal at hypothesis `next`.
    Continue {
        origin: TableId,
        rule: usize,
        env: Env,
        next: usize,
    },
    /// Feed answer `answer` of table `table` to its consumer `consumer`.
    Resume {
        table: TableId,
        consumer: usize,
        answer: usize,
    },
}

struct Machine<'p> {
    rules: Vec<CompiledRule>,
    rules_for: HashMap<String, Vec<usize>>,
    facts_for: HashMap<String, Vec<Vec<String>>>,
    intensional: BTreeSet<String>,
    strata: crate::analysis::Stratification,
    tables: Vec<Table>,
    variants: HashMap<Variant, TableId>,
    log: Vec<(String, BindingPattern, Vec<String>)>,
    jobs: VecDeque<Job>,
    blocked: Vec<(Consumer, TableId, u32)>,
    program: &'p Program,
}

impl<'p> Machine<'p> {
    fn new(program: &'p Program) -> Result<Self, TopdownError> {
        let strata =
            stratify(&build_dependency_graph(program)).map_err(TopdownError::NotStratified)?;
        let rules = compile(program);
        let mut rules_for: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, rule) in rules.iter().enumerate() {
            rules_for
                .entry(rule.conclusion.0.clone())
                .or_default()
                .push(i);
        }
        let mut facts_for: HashMap<String, Vec<Vec<String>>> = HashMap::new();
        for fact in &program.facts {
            facts_for
                .entry(fact.predicate().to_owned())
                .or_default()
                .push(fact.values().iter().map(|v| (*v).to_owned()).collect());
        }
        Ok(Machine {
            rules,
            rules_for,
            facts_for,
            intensional: program.intensional_predicates(),
            strata,
            tables: Vec::new(),
            variants: HashMap::new(),
            log: Vec::new(),
            jobs: VecDeque::new(),
            blocked: Vec::new(),
            program,
        })
    }

    /// Get or create the table for a subquery; creating one spawns a
    /// traversal of every rule whose conclusion unifies with it.
    fn ensure_table(&mut self, variant: Variant) -> TableId {
        if let Some(&tid) = self.variants.get(&variant) {
            return tid;
        }
        let tid = self.tables.len();
        self.tables.push(Table {
            answers: IndexSet::new(),
            consumers: Vec::new(),
        });
        let pattern_chars: String = variant
            .args
            .iter()
            .map(|a| match a {
                CanonTerm::Const(_) => 'b',
                CanonTerm::Var(_) => 'f',
            })
            .collect();
        let bound = variant
            .args
            .iter()
            .filter_map(|a| match a {
                CanonTerm::Const(c) => Some(c.clone()),
                CanonTerm::Var(_) => None,
            })
            .collect();
        self.log.push((
            variant.predicate.clone(),
            BindingPattern::from_chars(pattern_chars).expect("b/f chars"),
            bound,
        ));
        for &rule_index in self
            .rules_for
            .get(&variant.predicate)
            .map(Vec::as_slice)
            .unwrap_or_default()
        {
            let rule = &self.rules[rule_index];
            let mut env = Env::new(rule.var_count);
            // Unify the conclusion with the subquery: constants constrain
            // directly; a repeated subquery variable aliases the conclusion
            // terms at its positions.
            let mut rep: HashMap<usize, Slot> = HashMap::new();
            let mut ok = true;
            for (slot, arg) in rule.conclusion.1.iter().zip(&variant.args) {
                match arg {
                    CanonTerm::Const(c) => {
                        ok = match slot {
                            Slot::Const(k) => k == c,
                            Slot::Var(v) => env.bind(*v, c),
                        };
                    }
                    CanonTerm::Var(j) => {
                        if let Some(prev) = rep.get(j) {
                            ok = match (prev.clone(), slot) {
                                (Slot::Const(a), Slot::Const(b)) => a == *b,
                                (Slot::Const(a), Slot::Var(v)) => env.bind(*v, &a),
                                (Slot::Var(v), Slot::Const(b)) => env.bind(v, b),
                                (Slot::Var(v), Slot::Var(w)) => env.alias(v, *w),
                            };
                        } else {
                            rep.insert(*j, slot.clone());
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok {
                self.jobs.push_back(Job::Continue {
                    origin: tid,
                    rule: rule_index,
                    env,
                    next: 0,
                });
            }
        }
        self.variants.insert(variant, tid);
        tid
    }

    /// Canonical subquery for hypothesis slots under an environment. Every
    /// unbound position gets a fresh variable; repetition is enforced when
    /// the table's answers are unified back into the hypothesis.
    fn subquery(&self, predicate: &str, slots: &[Slot], env: &Env) -> Variant {
        let mut fresh = 0;
        let args = slots
            .iter()
            .map(|slot| match env.resolve(slot) {
                Some(c) => CanonTerm::Const(c),
                None => {
                    fresh += 1;
                    CanonTerm::Var(fresh - 1)
                }
            })
            .collect();
        Variant {
            predicate: predicate.to_owned(),
            args,
        }
    }

    fn add_answer(&mut self, table: TableId, tuple: Vec<String>) {
        let (new, answer) = {
            let t = &mut self.tables[table];
            let (idx, new) = t.answers.insert_full(tuple);
            (new, idx)
        };
        if new {
            for consumer in 0..self.tables[table].consumers.len() {
                self.jobs.push_back(Job::Resume {
                    table,
                    consumer,
                    answer,
                });
            }
        }
    }

    fn register_consumer(&mut self, table: TableId, consumer: Consumer) {
        let t = &mut self.tables[table];
        t.consumers.push(consumer);
        let consumer = t.consumers.len() - 1;
        for answer in 0..self.tables[table].answers.len() {
            self.jobs.push_back(Job::Resume {
                table,
                consumer,
                answer,
            });
        }
    }

    fn advance(
        &mut self,
        origin: TableId,
        rule_index: usize,
        env: Env,
        next: usize,
    ) -> Result<(), TopdownError> {
        let rule = &self.rules[rule_index];
        if next == rule.hypotheses.len() {
            let tuple: Vec<String> = rule
                .conclusion
                .1
                .iter()
                .map(|s| env.resolve(s).expect("conclusion bound by body"))
                .collect();
            self.add_answer(origin, tuple);
            return Ok(());
        }
        let (pred, slots, negated) = rule.hypotheses[next].clone();
        if negated {
            let values: Option<Vec<String>> = slots.iter().map(|s| env.resolve(s)).collect();
            let Some(values) = values else {
                return Err(TopdownError::Floundering { predicate: pred });
            };
            if self.intensional.contains(&pred) {
                let variant = Variant {
                    predicate: pred.clone(),
                    args: values.into_iter().map(CanonTerm::Const).collect(),
                };
                let tid = self.ensure_table(variant);
                let stratum = self.strata.stratum(&pred).unwrap_or(0);
                self.blocked.push((
                    Consumer {
                        origin,
                        rule: rule_index,
                        env,
                        hyp: next,
                    },
                    tid,
                    stratum,
                ));
            } else {
                let held = self
                    .facts_for
                    .get(&pred)
                    .is_some_and(|facts| facts.iter().any(|f| f == &values));
                if !held {
                    self.jobs.push_back(Job::Continue {
                        origin,
                        rule: rule_index,
                        env,
                        next: next + 1,
                    });
                }
            }
        } else if self.intensional.contains(&pred) {
            let variant = self.subquery(&pred, &slots, &env);
            let tid = self.ensure_table(variant);
            self.register_consumer(
                tid,
                Consumer {
                    origin,
                    rule: rule_index,
                    env,
                    hyp: next,
                },
            );
        } else {
            for tuple in self
                .facts_for
                .get(&pred)
                .map(Vec::as_slice)
                .unwrap_or_default()
            {
                let mut env = env.clone();
                if env.unify_tuple(&slots, tuple) {
                    self.jobs.push_back(Job::Continue {
                        origin,
                        rule: rule_index,
                        env,
                        next: next + 1,
                    });
                }
            }
        }
        Ok(())
    }

    fn pump(&mut self) -> Result<(), TopdownError> {
        loop {
            while let Some(job) = self.jobs.pop_front() {
                match job {
                    Job::Continue {
                        origin,
                        rule,
                        env,
                        next,
                    } => self.advance(origin, rule, env, next)?,
                    Job::Resume {
                        table,
                        consumer,
                        answer,
                    } => {
                        let c = self.tables[table].consumers[consumer].clone();
                        let tuple = self.tables[table].answers[answer].clone();
                        let (_, slots, _) = self.rules[c.rule].hypotheses[c.hyp].clone();
                        let mut env = c.env;
                        if env.unify_tuple(&slots, &tuple) {
                            self.advance(c.origin, c.rule, env, c.hyp + 1)?;
                        }
                    }
                }
            }
            if self.blocked.is_empty() {
                return Ok(());
            }
            // Positive work has quiesced. Every table a minimal-stratum
            // negated subquery depends on is complete, so those negations
            // can be decided now.
            let min = self.blocked.iter().map(|(_, _, s)| *s).min().unwrap();
            let mut rest = Vec::new();
            for (consumer, tid, stratum) in std::mem::take(&mut self.blocked) {
                if stratum == min {
                    if self.tables[tid].answers.is_empty() {
                        self.jobs.push_back(Job::Continue {
                            origin: consumer.origin,
                            rule: consumer.rule,
                            env: consumer.env,
                            next: consumer.hyp + 1,
                        });
                    }
                } else {
                    rest.push((consumer, tid, stratum));
                }
            }
            self.blocked = rest;
        }
    }

    fn into_log(self) -> SubqueryLog {
        let entries = self
            .log
            .into_iter()
            .enumerate()
            .map(|(tid, (predicate, pattern, bound))| SubqueryRecord {
                predicate,
                pattern,
                bound,
                answers: self.tables[tid].answers.iter().cloned().collect(),
            })
            .collect();
        SubqueryLog { entries }
    }
}

/// Evaluate a query top-down with variant tabling. Returns the answers and
/// the log of subqueries encountered.
pub fn tabled_topdown_evaluate(
    program: &Program,
    query: &Query,
) -> Result<(BTreeSet<Fact>, SubqueryLog), TopdownError> {
    let mut machine = Machine::new(program)?;
    let predicate = query.atom.predicate.clone();

    if machine.intensional.contains(&predicate) {
        let mut fresh = 0;
        let args = query
            .atom
            .args
            .iter()
            .map(|t| match t {
                Term::Constant(c) => CanonTerm::Const(c.clone()),
                Term::Variable(_) => {
                    fresh += 1;
                    CanonTerm::Var(fresh - 1)
                }
            })
            .collect();
        let root = machine.ensure_table(Variant { predicate, args });
        machine.pump()?;
        // A query with repeated variables shares its table with the
        // renamed-apart pattern; re-filter for the repetition here.
        let answers = machine.tables[root]
            .answers
            .iter()
            .map(|tuple| Fact::from_values(query.atom.predicate.clone(), tuple.clone()))
            .filter(|fact| matches(fact, query).is_some())
            .collect();
        Ok((answers, machine.into_log()))
    } else {
        // Extensional or unknown: answers come straight from given facts,
        // and the log records just the root subquery.
        let answers: BTreeSet<Fact> = machine
            .program
            .facts
            .iter()
            .filter(|f| matches(f, query).is_some())
            .cloned()
            .collect();
        let record = SubqueryRecord {
            predicate: query.atom.predicate.clone(),
            pattern: BindingPattern::from_atom(&query.atom),
            bound: query
                .atom
                .args
                .iter()
                .filter_map(|t| t.as_constant().map(str::to_owned))
                .collect(),
            answers: answers
                .iter()
                .map(|f| f.values().iter().map(|v| (*v).to_owned()).collect())
                .collect(),
        };
        Ok((
            answers,
            SubqueryLog {
                entries: vec![record],
            },
        ))
    }
}
