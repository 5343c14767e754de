//! Seeded generator of random stratified programs with bound queries.
//!
//! Shape limits: at most two extensional and four intensional predicates,
//! arity at most three, three strata, constants drawn from 1..=6, at most
//! three variables per rule. Negative hypotheses only point at predicates
//! placed on a strictly lower stratum, so every generated program is
//! stratified by construction; floundering queries are discarded and
//! regenerated.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

use stratalog::analysis::{build_dependency_graph, check_non_floundering, stratify};
use stratalog::ast::{Atom, Fact, Literal, Program, Query, Rule, Term};

pub const DEFAULT_SEED: u64 = 0xda7a_d06;
pub const DEFAULT_SIZE: usize = 220;

pub struct Case {
    pub program: Program,
    pub query: Query,
}

const VARS: [&str; 3] = ["X", "Y", "Z"];

struct PredSpec {
    name: String,
    arity: usize,
    stratum: u32,
    extensional: bool,
}

pub fn generate_corpus(seed: u64, size: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| generate_case(&mut rng)).collect()
}

fn generate_case(rng: &mut ChaCha8Rng) -> Case {
    loop {
        if let Some(case) = try_generate(rng) {
            return case;
        }
    }
}

fn constant(rng: &mut ChaCha8Rng) -> Term {
    Term::constant(rng.random_range(1..=6u32).to_string())
}

fn try_generate(rng: &mut ChaCha8Rng) -> Option<Case> {
    let mut preds: Vec<PredSpec> = Vec::new();
    let n_ext = rng.random_range(1..=2);
    for i in 0..n_ext {
        let arity = if rng.random_bool(0.15) {
            3
        } else {
            rng.random_range(1..=2)
        };
        preds.push(PredSpec {
            name: format!("e{}", i + 1),
            arity,
            stratum: 0,
            extensional: true,
        });
    }
    let n_int = rng.random_range(1..=4);
    for i in 0..n_int {
        preds.push(PredSpec {
            name: format!("p{}", i + 1),
            arity: rng.random_range(1..=2),
            stratum: rng.random_range(0..=2),
            extensional: false,
        });
    }

    let mut rules = Vec::new();
    for head_idx in n_ext..preds.len() {
        let head = &preds[head_idx];
        let n_rules = 1 + usize::from(rng.random_bool(0.5));
        for _ in 0..n_rules {
            let body_len = rng.random_range(1..=3);
            let mut hypotheses = Vec::with_capacity(body_len);
            for _ in 0..body_len {
                let negatable: Vec<usize> = (0..preds.len())
                    .filter(|&i| preds[i].extensional || preds[i].stratum < head.stratum)
                    .collect();
                let positive: Vec<usize> = (0..preds.len())
                    .filter(|&i| preds[i].extensional || preds[i].stratum <= head.stratum)
                    .collect();
                let (negated, pick) = if !negatable.is_empty() && rng.random_bool(0.3) {
                    (true, negatable[rng.random_range(0..negatable.len())])
                } else {
                    (false, positive[rng.random_range(0..positive.len())])
                };
                let spec = &preds[pick];
                let args = (0..spec.arity)
                    .map(|_| {
                        if rng.random_bool(0.25) {
                            constant(rng)
                        } else {
                            Term::variable(VARS[rng.random_range(0..VARS.len())])
                        }
                    })
                    .collect();
                let atom = Atom::new(spec.name.clone(), args);
                hypotheses.push(if negated {
                    Literal::neg(atom)
                } else {
                    Literal::pos(atom)
                });
            }
            let body_vars: Vec<&str> = {
                let set: BTreeSet<&str> = hypotheses
                    .iter()
                    .flat_map(|h| h.atom.variables())
                    .collect();
                set.into_iter().collect()
            };
            let head_args = (0..head.arity)
                .map(|_| {
                    if !body_vars.is_empty() && rng.random_bool(0.75) {
                        Term::variable(body_vars[rng.random_range(0..body_vars.len())])
                    } else {
                        constant(rng)
                    }
                })
                .collect();
            rules.push(Rule::new(Atom::new(head.name.clone(), head_args), hypotheses));
        }
    }

    let mut facts: BTreeSet<Fact> = BTreeSet::new();
    for spec in preds.iter().filter(|s| s.extensional) {
        for _ in 0..rng.random_range(0..=8) {
            let values = (0..spec.arity)
                .map(|_| rng.random_range(1..=6u32).to_string())
                .collect();
            facts.insert(Fact::from_values(&spec.name, values));
        }
    }

    let program = Program::new(rules, facts.into_iter().collect());
    stratify(&build_dependency_graph(&program)).ok()?;

    // Several query attempts per program; mostly-bound queries survive the
    // floundering check far more often.
    for _ in 0..6 {
        let target = &preds[rng.random_range(n_ext..preds.len())];
        let mut free: Vec<String> = Vec::new();
        let args = (0..target.arity)
            .map(|_| {
                if rng.random_bool(0.6) {
                    constant(rng)
                } else if !free.is_empty() && rng.random_bool(0.15) {
                    Term::variable(free[rng.random_range(0..free.len())].clone())
                } else {
                    let v = format!("Q{}", free.len());
                    free.push(v.clone());
                    Term::variable(v)
                }
            })
            .collect();
        let query = Query::new(Atom::new(target.name.clone(), args));
        if check_non_floundering(&program, &query).is_ok() {
            return Some(Case { program, query });
        }
    }
    None
}
