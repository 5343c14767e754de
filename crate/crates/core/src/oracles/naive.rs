//! Naive stratified evaluation by exhaustive grounding. Deliberately slow
//! and deliberately independent of the engine: rules are instantiated over
//! every combination of known constants, stratum by stratum, until nothing
//! changes. Intended for desk-scale cross-checking only.

use crate::analysis::{build_dependency_graph, stratify, NegativeCycle};
use crate::ast::{substitute, Binding, Fact, Program, Rule};
use std::collections::BTreeSet;

/// Compute the full model of a stratified program: per stratum ascending,
/// apply every rule under every ground substitution to fixpoint. A negated
/// hypothesis holds when the corresponding fact has not been inferred, which
/// is settled because its predicate's stratum is already complete.
pub fn naive_stratified_evaluate(program: &Program) -> Result<BTreeSet<Fact>, NegativeCycle> {
    let strata = stratify(&build_dependency_graph(program))?;
    let constants: Vec<String> = program.constants().into_iter().collect();

    let mut model: BTreeSet<Fact> = program.facts.iter().cloned().collect();
    for level in 0..=strata.max_stratum() {
        let rules: Vec<&Rule> = program
            .rules
            .iter()
            .filter(|r| strata.stratum(&r.conclusion.predicate) == Some(level))
            .collect();
        loop {
            let mut fresh: Vec<Fact> = Vec::new();
            for rule in &rules {
                let vars: Vec<&str> = rule.variables().into_iter().collect();
                if !vars.is_empty() && constants.is_empty() {
                    continue;
                }
                let mut counters = vec![0usize; vars.len()];
                'grounding: loop {
                    let binding: Binding = vars
                        .iter()
                        .zip(&counters)
                        .map(|(v, &c)| (v.to_string(), constants[c].clone()))
                        .collect();
                    if satisfied(rule, &binding, &model) {
                        let conclusion = substitute(&rule.conclusion, &binding);
                        let fact = Fact::new(conclusion).expect("grounded conclusion");
                        if !model.contains(&fact) {
                            fresh.push(fact);
                        }
                    }
                    // Advance the odometer over constant indices.
                    for digit in counters.iter_mut() {
                        *digit += 1;
                        if *digit < constants.len() {
                            continue 'grounding;
                        }
                        *digit = 0;
                    }
                    break;
                }
            }
            if fresh.is_empty() {
                break;
            }
            model.extend(fresh);
        }
    }
    Ok(model)
}

fn satisfied(rule: &Rule, binding: &Binding, model: &BTreeSet<Fact>) -> bool {
    rule.hypotheses.iter().all(|hyp| {
        let ground = substitute(&hyp.atom, binding);
        match Fact::new(ground) {
            Ok(fact) => model.contains(&fact) != hyp.negated,
            Err(_) => false,
        }
    })
}
