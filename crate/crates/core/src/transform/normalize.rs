//! Removal of singleton variables (variables occurring in only one
//! hypothesis and not in the conclusion) and of repeated variables within a
//! single hypothesis. Each removal routes the hypothesis through a generated
//! predicate with one defining rule, emitted once per distinct shape.

use crate::ast::{Atom, Literal, Program, Rule, Term};
use crate::names::GeneratedName;
use std::collections::{BTreeSet, HashMap};

/// Canonical shape of a hypothesis: constants verbatim, variables numbered
/// by first occurrence. Two hypotheses with the same shape share one
/// generated predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct HypShape {
    predicate: String,
    args: Vec<ShapeArg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum ShapeArg {
    Constant(String),
    Var(usize),
    /// Variable position being projected away.
    Dropped(usize),
}

struct Generator {
    /// Shape -> generated predicate name.
    emitted: HashMap<HypShape, String>,
    /// Next index per (base predicate, kind).
    counters: HashMap<(String, bool), usize>,
    /// Defining rules, in first-need order.
    definitions: Vec<Rule>,
}

impl Generator {
    fn predicate_for(&mut self, shape: HypShape, atom: &Atom, kept: &[usize], eq: bool) -> String {
        if let Some(name) = self.emitted.get(&shape) {
            return name.clone();
        }
        let counter = self
            .counters
            .entry((atom.predicate.clone(), eq))
            .or_insert(0);
        *counter += 1;
        let name = if eq {
            GeneratedName::EqualityFilter {
                base: atom.predicate.clone(),
                index: *counter,
            }
        } else {
            GeneratedName::Projection {
                base: atom.predicate.clone(),
                index: *counter,
            }
        }
        .render();
        let head_args: Vec<Term> = kept.iter().map(|&i| atom.args[i].clone()).collect();
        self.definitions.push(Rule::new(
            Atom::new(name.clone(), head_args),
            vec![Literal::pos(atom.clone())],
        ));
        self.emitted.insert(shape, name.clone());
        name
    }
}

fn shape_of(atom: &Atom, dropped: &[usize]) -> HypShape {
    let mut seen: Vec<&str> = Vec::new();
    let args = atom
        .args
        .iter()
        .enumerate()
        .map(|(i, t)| match t {
            Term::Constant(c) => ShapeArg::Constant(c.clone()),
            Term::Variable(v) => {
                let idx = match seen.iter().position(|s| s == v) {
                    Some(idx) => idx,
                    None => {
                        seen.push(v);
                        seen.len() - 1
                    }
                };
                if dropped.contains(&i) {
                    ShapeArg::Dropped(idx)
                } else {
                    ShapeArg::Var(idx)
                }
            }
        })
        .collect();
    HypShape {
        predicate: atom.predicate.clone(),
        args,
    }
}

/// Positions of the first occurrence of each distinct variable, plus all
/// constant positions.
fn distinct_positions(atom: &Atom) -> Vec<usize> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut kept = Vec::new();
    for (i, t) in atom.args.iter().enumerate() {
        match t {
            Term::Constant(_) => kept.push(i),
            Term::Variable(v) => {
                if seen.insert(v) {
                    kept.push(i);
                }
            }
        }
    }
    kept
}

/// Normalize every rule of the program. Negated hypotheses are left alone:
/// by the time this runs they are fully bound complement checks, and
/// projecting under negation would change meaning.
pub fn normalize_rules(program: &Program) -> Program {
    let mut generator = Generator {
        emitted: HashMap::new(),
        counters: HashMap::new(),
        definitions: Vec::new(),
    };

    let rules = program
        .rules
        .iter()
        .map(|rule| {
            // How many hypotheses mention each variable, and whether it is
            // needed outside a single hypothesis.
            let mut hyp_count: HashMap<&str, usize> = HashMap::new();
            for hyp in &rule.hypotheses {
                for v in hyp.atom.variables().collect::<BTreeSet<_>>() {
                    *hyp_count.entry(v).or_insert(0) += 1;
                }
            }
            let conclusion_vars: BTreeSet<&str> = rule.conclusion.variables().collect();

            let hypotheses = rule
                .hypotheses
                .iter()
                .map(|hyp| {
                    if hyp.negated {
                        return hyp.clone();
                    }
                    let mut atom = hyp.atom.clone();

                    // Repeated variables within the hypothesis.
                    let distinct = distinct_positions(&atom);
                    if distinct.len() < atom.arity() {
                        let shape = shape_of(&atom, &[]);
                        let name = generator.predicate_for(shape, &atom, &distinct, true);
                        atom = Atom::new(
                            name,
                            distinct.iter().map(|&i| atom.args[i].clone()).collect(),
                        );
                    }

                    // Variables confined to this hypothesis.
                    let dropped: Vec<usize> = atom
                        .args
                        .iter()
                        .enumerate()
                        .filter_map(|(i, t)| {
                            let v = t.as_variable()?;
                            (hyp_count[v] == 1 && !conclusion_vars.contains(v)).then_some(i)
                        })
                        .collect();
                    if !dropped.is_empty() {
                        let kept: Vec<usize> = (0..atom.arity())
                            .filter(|i| !dropped.contains(i))
                            .collect();
                        let shape = shape_of(&atom, &dropped);
                        let name = generator.predicate_for(shape, &atom, &kept, false);
                        atom = Atom::new(
                            name,
                            kept.iter().map(|&i| atom.args[i].clone()).collect(),
                        );
                    }

                    Literal::pos(atom)
                })
                .collect();
            Rule::new(rule.conclusion.clone(), hypotheses)
        })
        .collect::<Vec<_>>();

    let mut all_rules = rules;
    all_rules.extend(generator.definitions);
    Program::new(all_rules, program.facts.clone())
}
