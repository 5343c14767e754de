//! Query-driven rewrites.
//!
//! [`demand_transform`] restricts each demanded rule with a demand
//! hypothesis, seeds demand from the query, and propagates demand into
//! intensional hypotheses. [`extend_for_negation`] replaces every negated
//! hypothesis `not p(args)` with a complement predicate `n.p(args)` and
//! appends one defining rule per complemented predicate, so that demand can
//! flow through negation. [`extended_demand_transform`] composes the two.
//!
//! [`normalize_rules`] and [`decompose_left`] then shape the rules for the
//! evaluator: no within-hypothesis repeated variables, no variables confined
//! to a single hypothesis, and at most two hypotheses per rule.

mod decompose;
mod normalize;

pub use decompose::{decompose_left, DecomposedProgram};
pub use normalize::normalize_rules;

use crate::analysis::{
    build_dependency_graph, check_non_floundering, compute_demand_patterns, stratify, DemandSet,
    FlounderingReport, NegativeCycle, Stratification,
};
use crate::ast::{
    Atom, BindingPattern, DemandPattern, Fact, Literal, Program, Query, Rule, Term,
};
use crate::names::{complement_predicate, demand_predicate};
use std::collections::{BTreeSet, HashSet};
use std::fmt;

/// Errors raised by the rewrites themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformError {
    /// A name about to be generated already exists in the program.
    NameCollision { name: String },
    /// A demand pattern names a predicate the program does not define.
    UnknownDemandPredicate { predicate: String },
    /// A rule with more than two hypotheses still contains negation; only
    /// complement-defining rules may be negated by the time of decomposition.
    ResidualNegation { rule: String },
}

impl fmt::Display for TransformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformError::NameCollision { name } => {
                write!(f, "generated predicate `{name}` collides with a user predicate")
            }
            TransformError::UnknownDemandPredicate { predicate } => {
                write!(f, "demand pattern for unknown predicate `{predicate}`")
            }
            TransformError::ResidualNegation { rule } => {
                write!(f, "cannot decompose a negated rule body: {rule}")
            }
        }
    }
}

impl std::error::Error for TransformError {}

/// Where a generated rule came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceRule {
    /// Index into the rules of the program handed to the transform.
    Given(usize),
    /// The appended complement-defining rule for this predicate.
    Complement(String),
}

/// Which transform step emitted a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformStep {
    /// Step 1: the source rule restricted by a demand hypothesis.
    Restrict { pattern: BindingPattern },
    /// Step 3: demand propagated to the hypothesis at `hyp_index`
    /// (zero-based, in the source rule) from everything to its left.
    Propagate { hyp_index: usize, demand: DemandPattern },
}

/// Provenance of one generated rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleProvenance {
    pub step: TransformStep,
    pub source: SourceRule,
}

/// Rules, seed facts, and provenance produced by a demand transformation.
/// Restricted (step 1) rules come first, then demand-propagation (step 3)
/// rules; `provenance` runs parallel to `rules`.
#[derive(Debug, Clone, Default)]
pub struct TransformOutput {
    pub rules: Vec<Rule>,
    pub seed_facts: Vec<Fact>,
    pub provenance: Vec<RuleProvenance>,
}

impl TransformOutput {
    /// The generated rules and seeds as a program, on top of `facts`.
    pub fn into_program(self, facts: Vec<Fact>) -> Program {
        let mut all_facts = facts;
        for seed in self.seed_facts {
            if !all_facts.contains(&seed) {
                all_facts.push(seed);
            }
        }
        Program::new(self.rules, all_facts)
    }

    /// Collapse rules that are equal up to consistent variable renaming,
    /// keeping the first of each class.
    pub fn dedup_alpha_equivalent(&mut self) {
        let mut seen = HashSet::new();
        let mut keep = Vec::with_capacity(self.rules.len());
        for rule in &self.rules {
            keep.push(seen.insert(alpha_canonical(rule)));
        }
        let mut it = keep.iter();
        self.rules.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.provenance.retain(|_| *it.next().unwrap());
    }
}

/// Rename variables to v0, v1, ... by first occurrence, conclusion first.
fn alpha_canonical(rule: &Rule) -> Rule {
    let mut mapping: Vec<String> = Vec::new();
    let mut rename = |term: &Term| -> Term {
        match term {
            Term::Constant(_) => term.clone(),
            Term::Variable(v) => {
                let idx = match mapping.iter().position(|m| m == v) {
                    Some(i) => i,
                    None => {
                        mapping.push(v.clone());
                        mapping.len() - 1
                    }
                };
                Term::Variable(format!("V{idx}"))
            }
        }
    };
    let conclusion = Atom::new(
        rule.conclusion.predicate.clone(),
        rule.conclusion.args.iter().map(&mut rename).collect(),
    );
    let hypotheses = rule
        .hypotheses
        .iter()
        .map(|h| Literal {
            atom: Atom::new(
                h.atom.predicate.clone(),
                h.atom.args.iter().map(&mut rename).collect(),
            ),
            negated: h.negated,
        })
        .collect();
    Rule::new(conclusion, hypotheses)
}

/// Args of `atom` at the bound positions of `pattern`.
fn bound_args(atom: &Atom, pattern: &BindingPattern) -> Vec<Term> {
    pattern
        .bound_positions()
        .into_iter()
        .map(|i| atom.args[i].clone())
        .collect()
}

/// The demand transformation proper.
///
/// - Step 1: for each demand pattern and each rule concluding that
///   predicate, prepend a demand hypothesis over the bound conclusion args.
/// - Step 2: emit one seed fact carrying the query's constants.
/// - Step 3: for each restricted rule and each of its intensional
///   hypotheses, emit a rule inferring that hypothesis's demand from the
///   demand hypothesis and everything to its left. Demand for a negated
///   hypothesis is demand for the underlying predicate.
pub fn demand_transform(
    program: &Program,
    query: &Query,
    demand: &DemandSet,
) -> Result<TransformOutput, TransformError> {
    let predicates = program.predicates();
    let intensional = program.intensional_predicates();

    let mut generated_names = BTreeSet::new();
    for dp in demand.iter() {
        if !predicates.contains(&dp.predicate) {
            return Err(TransformError::UnknownDemandPredicate {
                predicate: dp.predicate.clone(),
            });
        }
        generated_names.insert(demand_predicate(&dp.predicate, &dp.pattern));
    }
    let query_pattern = BindingPattern::from_atom(&query.atom);
    generated_names.insert(demand_predicate(&query.atom.predicate, &query_pattern));
    for name in &generated_names {
        if predicates.contains(name) {
            return Err(TransformError::NameCollision { name: name.clone() });
        }
    }

    let mut output = TransformOutput::default();

    // Step 1, in source-rule order with patterns ordered within a rule.
    let mut restricted: Vec<(Rule, usize, BindingPattern)> = Vec::new();
    for (rule_index, rule) in program.rules.iter().enumerate() {
        for pattern in demand.patterns_for(&rule.conclusion.predicate) {
            let demand_hyp = Literal::pos(Atom::new(
                demand_predicate(&rule.conclusion.predicate, pattern),
                bound_args(&rule.conclusion, pattern),
            ));
            let mut hypotheses = Vec::with_capacity(rule.hypotheses.len() + 1);
            hypotheses.push(demand_hyp);
            hypotheses.extend(rule.hypotheses.iter().cloned());
            restricted.push((
                Rule::new(rule.conclusion.clone(), hypotheses),
                rule_index,
                pattern.clone(),
            ));
        }
    }
    for (rule, rule_index, pattern) in &restricted {
        output.rules.push(rule.clone());
        output.provenance.push(RuleProvenance {
            step: TransformStep::Restrict {
                pattern: pattern.clone(),
            },
            source: SourceRule::Given(*rule_index),
        });
    }

    // Step 2.
    let seed_values: Vec<String> = query
        .atom
        .args
        .iter()
        .filter_map(|t| t.as_constant().map(str::to_owned))
        .collect();
    output.seed_facts.push(Fact::from_values(
        demand_predicate(&query.atom.predicate, &query_pattern),
        seed_values,
    ));

    // Step 3. The walk mirrors demand inference: bound variables start from
    // the demand hypothesis and grow across positive hypotheses.
    for (rule, rule_index, _) in &restricted {
        let demand_hyp = &rule.hypotheses[0];
        let mut bound: BTreeSet<String> = demand_hyp
            .atom
            .variables()
            .map(str::to_owned)
            .collect();
        for (hyp_offset, hyp) in rule.hypotheses.iter().enumerate().skip(1) {
            if intensional.contains(&hyp.atom.predicate) {
                let pattern = BindingPattern::from_atom_with_bound(&hyp.atom, &bound);
                let head = Atom::new(
                    demand_predicate(&hyp.atom.predicate, &pattern),
                    bound_args(&hyp.atom, &pattern),
                );
                let body: Vec<Literal> = rule.hypotheses[..hyp_offset].to_vec();
                output.rules.push(Rule::new(head, body));
                output.provenance.push(RuleProvenance {
                    step: TransformStep::Propagate {
                        hyp_index: hyp_offset - 1,
                        demand: DemandPattern {
                            predicate: hyp.atom.predicate.clone(),
                            pattern,
                        },
                    },
                    source: SourceRule::Given(*rule_index),
                });
            }
            if !hyp.negated {
                bound.extend(hyp.atom.variables().map(str::to_owned));
            }
        }
    }

    Ok(output)
}

/// The rewritten program plus the origin of each of its rules.
#[derive(Debug, Clone)]
pub struct ExtendedProgram {
    pub program: Program,
    pub origins: Vec<SourceRule>,
}

/// Fresh variable names for the appended complement rules.
fn fresh_variables(arity: usize) -> Vec<Term> {
    const POOL: [&str; 6] = ["X", "Y", "Z", "W", "V", "U"];
    (0..arity)
        .map(|i| {
            Term::Variable(match POOL.get(i) {
                Some(v) => (*v).to_owned(),
                None => format!("V{i}"),
            })
        })
        .collect()
}

/// Replace each negated hypothesis `not p(args)` with a complement atom
/// `n.p(args)`, and append one rule `n.p(X1,...,Xk) :- not p(X1,...,Xk).`
/// per distinct complemented predicate. The result's only negations are in
/// the appended rules.
pub fn extend_for_negation(program: &Program) -> Result<ExtendedProgram, TransformError> {
    let predicates = program.predicates();
    let arities = program.arities();

    // Complemented predicates in first-occurrence order.
    let mut complemented: Vec<String> = Vec::new();
    for rule in &program.rules {
        for hyp in &rule.hypotheses {
            if hyp.negated && !complemented.contains(&hyp.atom.predicate) {
                complemented.push(hyp.atom.predicate.clone());
            }
        }
    }
    for p in &complemented {
        let name = complement_predicate(p);
        if predicates.contains(&name) {
            return Err(TransformError::NameCollision { name });
        }
    }

    let mut rules: Vec<Rule> = Vec::with_capacity(program.rules.len() + complemented.len());
    let mut origins: Vec<SourceRule> = Vec::new();
    for (i, rule) in program.rules.iter().enumerate() {
        let hypotheses = rule
            .hypotheses
            .iter()
            .map(|h| {
                if h.negated {
                    Literal::pos(Atom::new(
                        complement_predicate(&h.atom.predicate),
                        h.atom.args.clone(),
                    ))
                } else {
                    h.clone()
                }
            })
            .collect();
        rules.push(Rule::new(rule.conclusion.clone(), hypotheses));
        origins.push(SourceRule::Given(i));
    }
    for p in complemented {
        let vars = fresh_variables(arities[&p]);
        rules.push(Rule::new(
            Atom::new(complement_predicate(&p), vars.clone()),
            vec![Literal::neg(Atom::new(p.clone(), vars))],
        ));
        origins.push(SourceRule::Complement(p));
    }

    Ok(ExtendedProgram {
        program: Program::new(rules, program.facts.clone()),
        origins,
    })
}

/// Errors from the composed pipeline entry points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtendedTransformError {
    NotStratified(NegativeCycle),
    Floundering(FlounderingReport),
    Transform(TransformError),
}

impl fmt::Display for ExtendedTransformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedTransformError::NotStratified(c) => write!(f, "not stratified: {c}"),
            ExtendedTransformError::Floundering(r) => write!(f, "{r}"),
            ExtendedTransformError::Transform(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ExtendedTransformError {}

impl From<TransformError> for ExtendedTransformError {
    fn from(e: TransformError) -> Self {
        ExtendedTransformError::Transform(e)
    }
}

/// Result of the extended demand transformation.
#[derive(Debug, Clone)]
pub struct ExtendedTransform {
    /// Rules with step-1/step-3 provenance whose `Given` indices refer to
    /// the rewritten (extended) program.
    pub output: TransformOutput,
    /// The rewritten program and the origin of each of its rules in the
    /// original one.
    pub extended: ExtendedProgram,
    /// Demand patterns of the rewritten program.
    pub demand: DemandSet,
    /// Strata of the original program; the evaluator resolves complements
    /// lowest stratum first.
    pub stratification: Stratification,
}

impl ExtendedTransform {
    /// Provenance of output rule `i` mapped back to the original program.
    pub fn origin(&self, i: usize) -> (TransformStep, SourceRule) {
        let prov = &self.output.provenance[i];
        let source = match &prov.source {
            SourceRule::Given(idx) => self.extended.origins[*idx].clone(),
            other => other.clone(),
        };
        (prov.step.clone(), source)
    }
}

/// Stratify, check floundering, rewrite negation through complement
/// predicates, and apply the demand transformation, treating demand for
/// `not p(args)` as demand for `p(args)`.
pub fn extended_demand_transform(
    program: &Program,
    query: &Query,
) -> Result<ExtendedTransform, ExtendedTransformError> {
    let graph = build_dependency_graph(program);
    let stratification = stratify(&graph).map_err(ExtendedTransformError::NotStratified)?;
    check_non_floundering(program, query).map_err(ExtendedTransformError::Floundering)?;
    let extended = extend_for_negation(program)?;
    let demand = compute_demand_patterns(&extended.program, query);
    let output = demand_transform(&extended.program, query, &demand)?;
    Ok(ExtendedTransform {
        output,
        extended,
        demand,
        stratification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_query};

    const REACH: &str = "p(X,Y) :- e(X,Y).\np(X,Z) :- e(X,Y), p(Y,Z).\n";
    const REACH_NEG: &str = concat!(
        "p(X,Y) :- e(X,Y).\n",
        "p(X,Z) :- e(X,Y), p(Y,Z).\n",
        "p2(X,Y) :- not p(X,Y), e2(X,Y).\n",
        "p2(X,Z) :- not p(X,Z), e2(X,Y), p2(Y,Z).\n",
    );

    fn rendered(program: &str, query: &str) -> (Vec<String>, Vec<String>) {
        let program = parse_program(program).unwrap();
        let query = parse_query(query).unwrap();
        let demand = compute_demand_patterns(&program, &query);
        let out = demand_transform(&program, &query, &demand).unwrap();
        (
            out.rules.iter().map(|r| r.to_string()).collect(),
            out.seed_facts.iter().map(|f| format!("{f}.")).collect(),
        )
    }

    #[test]
    fn restricts_reachability_by_demand() {
        let (rules, seeds) = rendered(REACH, "p(1,X)?");
        assert_eq!(
            rules,
            vec![
                "p(X,Y) :- d_p_bf(X), e(X,Y).",
                "p(X,Z) :- d_p_bf(X), e(X,Y), p(Y,Z).",
                "d_p_bf(Y) :- d_p_bf(X), e(X,Y).",
            ]
        );
        assert_eq!(seeds, vec!["d_p_bf(1)."]);
    }

    #[test]
    fn transforms_negated_rules_in_place() {
        let (rules, seeds) = rendered(REACH_NEG, "p2(1,2)?");
        assert_eq!(
            rules,
            vec![
                "p(X,Y) :- d_p_bb(X,Y), e(X,Y).",
                "p(X,Z) :- d_p_bb(X,Z), e(X,Y), p(Y,Z).",
                "p2(X,Y) :- d_p2_bb(X,Y), not p(X,Y), e2(X,Y).",
                "p2(X,Z) :- d_p2_bb(X,Z), not p(X,Z), e2(X,Y), p2(Y,Z).",
                "d_p_bb(Y,Z) :- d_p_bb(X,Z), e(X,Y).",
                "d_p_bb(X,Y) :- d_p2_bb(X,Y).",
                "d_p_bb(X,Z) :- d_p2_bb(X,Z).",
                "d_p2_bb(Y,Z) :- d_p2_bb(X,Z), not p(X,Z), e2(X,Y).",
            ]
        );
        assert_eq!(seeds, vec!["d_p2_bb(1,2)."]);
    }

    #[test]
    fn query_without_rules_yields_only_the_seed() {
        let (rules, seeds) = rendered("p(X) :- e(X).\n", "q(3)?");
        assert!(rules.is_empty());
        assert_eq!(seeds, vec!["d_q_b(3)."]);
    }

    #[test]
    fn extension_replaces_negation_and_appends_one_rule_per_predicate() {
        let program = parse_program(REACH_NEG).unwrap();
        let ext = extend_for_negation(&program).unwrap();
        let rendered: Vec<String> = ext.program.rules.iter().map(|r| r.to_string()).collect();
        assert_eq!(
            rendered,
            vec![
                "p(X,Y) :- e(X,Y).",
                "p(X,Z) :- e(X,Y), p(Y,Z).",
                "p2(X,Y) :- n.p(X,Y), e2(X,Y).",
                "p2(X,Z) :- n.p(X,Z), e2(X,Y), p2(Y,Z).",
                "n.p(X,Y) :- not p(X,Y).",
            ]
        );
        assert_eq!(
            ext.origins.last(),
            Some(&SourceRule::Complement("p".into()))
        );
    }

    #[test]
    fn positive_programs_are_left_unchanged() {
        let program = parse_program(REACH).unwrap();
        let ext = extend_for_negation(&program).unwrap();
        assert_eq!(ext.program, program);
    }

    #[test]
    fn two_negations_of_one_predicate_share_the_complement_rule() {
        let program = parse_program(REACH_NEG).unwrap();
        let ext = extend_for_negation(&program).unwrap();
        let complements = ext
            .program
            .rules
            .iter()
            .filter(|r| r.conclusion.predicate == "n.p")
            .count();
        assert_eq!(complements, 1);
    }

    #[test]
    fn extended_transform_matches_the_expected_listing() {
        let program = parse_program(REACH_NEG).unwrap();
        let query = parse_query("p2(1,2)?").unwrap();
        let result = extended_demand_transform(&program, &query).unwrap();
        let rules: Vec<String> = result.output.rules.iter().map(|r| r.to_string()).collect();
        assert_eq!(
            rules,
            vec![
                "p(X,Y) :- d_p_bb(X,Y), e(X,Y).",
                "p(X,Z) :- d_p_bb(X,Z), e(X,Y), p(Y,Z).",
                "p2(X,Y) :- d_p2_bb(X,Y), n.p(X,Y), e2(X,Y).",
                "p2(X,Z) :- d_p2_bb(X,Z), n.p(X,Z), e2(X,Y), p2(Y,Z).",
                "n.p(X,Y) :- d_n.p_bb(X,Y), not p(X,Y).",
                "d_p_bb(Y,Z) :- d_p_bb(X,Z), e(X,Y).",
                "d_n.p_bb(X,Y) :- d_p2_bb(X,Y).",
                "d_n.p_bb(X,Z) :- d_p2_bb(X,Z).",
                "d_p2_bb(Y,Z) :- d_p2_bb(X,Z), n.p(X,Z), e2(X,Y).",
                "d_p_bb(X,Y) :- d_n.p_bb(X,Y).",
            ]
        );
        assert_eq!(result.output.seed_facts[0].to_string(), "d_p2_bb(1,2)");
        // Only the complement rule is negated, and its demand is all-bound.
        for rule in &result.output.rules {
            for hyp in &rule.hypotheses {
                if hyp.negated {
                    assert_eq!(rule.conclusion.predicate, "n.p");
                    assert_eq!(rule.hypotheses[0].atom.predicate, "d_n.p_bb");
                }
            }
        }
    }

    #[test]
    fn dedup_collapses_alpha_equivalent_demand_rules() {
        let program = parse_program(REACH_NEG).unwrap();
        let query = parse_query("p2(1,2)?").unwrap();
        let mut result = extended_demand_transform(&program, &query).unwrap();
        let before = result.output.rules.len();
        result.output.dedup_alpha_equivalent();
        assert_eq!(result.output.rules.len(), before - 1);
        assert_eq!(result.output.rules.len(), result.output.provenance.len());
    }

    #[test]
    fn floundering_queries_are_rejected() {
        let program = parse_program(REACH_NEG).unwrap();
        let query = parse_query("p2(1,X)?").unwrap();
        match extended_demand_transform(&program, &query) {
            Err(ExtendedTransformError::Floundering(_)) => {}
            other => panic!("expected floundering, got {other:?}"),
        }
    }

    #[test]
    fn non_stratified_programs_are_rejected() {
        let program = parse_program("t(X) :- not t(X).\nt(1).").unwrap();
        let query = parse_query("t(1)?").unwrap();
        match extended_demand_transform(&program, &query) {
            Err(ExtendedTransformError::NotStratified(_)) => {}
            other => panic!("expected stratification failure, got {other:?}"),
        }
    }

    #[test]
    fn collisions_with_user_predicates_are_rejected() {
        let program = parse_program("p(X) :- d_p_b(X).\nd_p_b(1).").unwrap();
        let query = parse_query("p(1)?").unwrap();
        let demand = compute_demand_patterns(&program, &query);
        match demand_transform(&program, &query, &demand) {
            Err(TransformError::NameCollision { name }) => assert_eq!(name, "d_p_b"),
            other => panic!("expected collision, got {other:?}"),
        }
    }
}
