//! Left decomposition: fold the two leftmost hypotheses of a long rule into
//! a fresh intermediate predicate until every rule has at most two
//! hypotheses. An intermediate carries exactly the variables of the joined
//! pair that are still needed later in the rule.

use super::TransformError;
use crate::ast::{Atom, Literal, Program, Rule, Term};
use crate::names::GeneratedName;
use std::collections::BTreeSet;

/// A program whose rules all have one or two hypotheses, with the mapping
/// from each rule back to the rule it was cut from.
#[derive(Debug, Clone)]
pub struct DecomposedProgram {
    pub program: Program,
    /// Predicates introduced by the decomposition.
    pub intermediates: BTreeSet<String>,
    /// For each output rule, the index of its source rule in the input.
    pub sources: Vec<usize>,
}

impl DecomposedProgram {
    pub fn rules(&self) -> &[Rule] {
        &self.program.rules
    }
}

/// Decompose every rule with more than two hypotheses. Negation may only
/// remain in two-hypothesis complement rules, which pass through untouched.
pub fn decompose_left(program: &Program) -> Result<DecomposedProgram, TransformError> {
    let user_predicates = program.predicates();
    let mut out = DecomposedProgram {
        program: Program::new(Vec::new(), program.facts.clone()),
        intermediates: BTreeSet::new(),
        sources: Vec::new(),
    };

    for (rule_index, rule) in program.rules.iter().enumerate() {
        if rule.hypotheses.len() <= 2 {
            out.program.rules.push(rule.clone());
            out.sources.push(rule_index);
            continue;
        }
        if rule.hypotheses.iter().any(|h| h.negated) {
            return Err(TransformError::ResidualNegation {
                rule: rule.to_string(),
            });
        }

        let mut remaining = rule.hypotheses.clone();
        let mut index = 0;
        while remaining.len() > 2 {
            index += 1;
            let left = remaining[0].clone();
            let right = remaining[1].clone();

            // Variables of the pair still needed by later hypotheses or the
            // conclusion, in name order.
            let mut pair_vars: BTreeSet<&str> =
                left.atom.variables().chain(right.atom.variables()).collect();
            let later: BTreeSet<&str> = remaining[2..]
                .iter()
                .flat_map(|h| h.atom.variables())
                .chain(rule.conclusion.variables())
                .collect();
            pair_vars.retain(|v| later.contains(v));

            let name = GeneratedName::Intermediate {
                rule: rule_index,
                index,
            }
            .render();
            if user_predicates.contains(&name) {
                return Err(TransformError::NameCollision { name });
            }
            let head = Atom::new(
                name.clone(),
                pair_vars.iter().map(|v| Term::variable(*v)).collect(),
            );
            out.program
                .rules
                .push(Rule::new(head.clone(), vec![left, right]));
            out.sources.push(rule_index);
            out.intermediates.insert(name);

            remaining.splice(0..2, [Literal::pos(head)]);
        }
        out.program
            .rules
            .push(Rule::new(rule.conclusion.clone(), remaining));
        out.sources.push(rule_index);
    }

    Ok(out)
}
