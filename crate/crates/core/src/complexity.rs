//! Firing-count bounds computed from store statistics.
//!
//! Two parameters describe a relation: `#p`, its size, and `#p.i../j..`,
//! the maximum number of distinct value combinations of the `i` arguments
//! over facts agreeing on the `j` arguments. A two-hypothesis rule is
//! bounded in both join directions and takes the smaller; a one-hypothesis
//! rule fires once per fact of its hypothesis. Parameters are measured
//! exactly on a finished store, so the report is a verifier of the bounds,
//! not an estimator.

use crate::ast::Rule;
use crate::engine::{FactStore, FiringCounter};
use crate::transform::DecomposedProgram;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

/// `#p.i../j..`: positions are zero-based internally, one-based in display.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Combinations {
    pub predicate: String,
    pub value_positions: Vec<usize>,
    pub given_positions: Vec<usize>,
}

impl fmt::Display for Combinations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |ps: &[usize]| {
            ps.iter()
                .map(|p| (p + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "#{}.{}/{}",
            self.predicate,
            list(&self.value_positions),
            list(&self.given_positions)
        )
    }
}

/// A requested statistic over the store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamDescriptor {
    Size { predicate: String },
    Combinations(Combinations),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamError {
    UnknownPredicate { predicate: String },
    PositionOutOfRange { predicate: String, position: usize },
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::UnknownPredicate { predicate } => {
                write!(f, "unknown predicate `{predicate}`")
            }
            ParamError::PositionOutOfRange {
                predicate,
                position,
            } => write!(
                f,
                "argument position {} is out of range for `{predicate}`",
                position + 1
            ),
        }
    }
}

impl std::error::Error for ParamError {}

/// Exact measurement by enumeration and grouping.
pub fn measure_params(
    store: &FactStore,
    requests: &[ParamDescriptor],
) -> Result<Vec<u64>, ParamError> {
    requests
        .iter()
        .map(|request| match request {
            ParamDescriptor::Size { predicate } => {
                let pred =
                    store
                        .pred_id(predicate)
                        .ok_or_else(|| ParamError::UnknownPredicate {
                            predicate: predicate.clone(),
                        })?;
                Ok(store.len_of(pred) as u64)
            }
            ParamDescriptor::Combinations(c) => {
                let pred =
                    store
                        .pred_id(&c.predicate)
                        .ok_or_else(|| ParamError::UnknownPredicate {
                            predicate: c.predicate.clone(),
                        })?;
                let arity = store.arity(pred);
                for &p in c.value_positions.iter().chain(&c.given_positions) {
                    if p >= arity {
                        return Err(ParamError::PositionOutOfRange {
                            predicate: c.predicate.clone(),
                            position: p,
                        });
                    }
                }
                let mut groups: HashMap<Vec<u32>, HashSet<Vec<u32>>> = HashMap::new();
                for tuple in store.tuples_of(pred) {
                    let given: Vec<u32> = c.given_positions.iter().map(|&i| tuple[i]).collect();
                    let values: Vec<u32> = c.value_positions.iter().map(|&i| tuple[i]).collect();
                    groups.entry(given).or_default().insert(values);
                }
                Ok(groups.values().map(|s| s.len() as u64).max().unwrap_or(0))
            }
        })
        .collect()
}

/// Symbolic firing bound of one rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundExpr {
    /// `#p`.
    Size { predicate: String },
    /// `#q * #r.i../j..`.
    Product {
        size_of: String,
        per_fact: Combinations,
    },
    Min(Box<BoundExpr>, Box<BoundExpr>),
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundExpr::Size { predicate } => write!(f, "#{predicate}"),
            BoundExpr::Product { size_of, per_fact } => write!(f, "#{size_of} * {per_fact}"),
            BoundExpr::Min(a, b) => write!(f, "min({a}, {b})"),
        }
    }
}

impl BoundExpr {
    pub fn evaluate(&self, store: &FactStore) -> Result<u64, ParamError> {
        match self {
            BoundExpr::Size { predicate } => Ok(measure_params(
                store,
                &[ParamDescriptor::Size {
                    predicate: predicate.clone(),
                }],
            )?[0]),
            BoundExpr::Product { size_of, per_fact } => {
                let values = measure_params(
                    store,
                    &[
                        ParamDescriptor::Size {
                            predicate: size_of.clone(),
                        },
                        ParamDescriptor::Combinations(per_fact.clone()),
                    ],
                )?;
                Ok(values[0].saturating_mul(values[1]))
            }
            BoundExpr::Min(a, b) => Ok(a.evaluate(store)?.min(b.evaluate(store)?)),
        }
    }
}

/// The symbolic bound and its value on a given store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleBound {
    pub rule_index: usize,
    pub expr: BoundExpr,
    pub value: u64,
    /// Evaluated value of each min branch; one entry for single-hypothesis
    /// and complement rules.
    pub branches: Vec<u64>,
    /// One-hypothesis rules are reported but add nothing beyond the size of
    /// their hypothesis, which is accounted for elsewhere.
    pub omittable: bool,
}

/// Symbolic bound of a decomposed rule.
///
/// For two positive hypotheses `q`, `r`: let `C12` be the positions of `r`
/// holding variables shared with `q` (constants count as bound); each fact
/// of `q` can meet at most `#r.{not C12}/{C12}` facts of `r`, and
/// symmetrically, so the bound is the minimum of the two products. A
/// complement rule fires at most once per demand fact.
pub fn bound_expr(rule: &Rule) -> BoundExpr {
    match rule.hypotheses.as_slice() {
        [single] => BoundExpr::Size {
            predicate: single.atom.predicate.clone(),
        },
        [first, second] => {
            if second.negated {
                return BoundExpr::Size {
                    predicate: first.atom.predicate.clone(),
                };
            }
            let direction = |a: &crate::ast::Literal, b: &crate::ast::Literal| {
                let a_vars: BTreeSet<&str> = a.atom.variables().collect();
                let mut shared = Vec::new();
                let mut unshared = Vec::new();
                for (j, term) in b.atom.args.iter().enumerate() {
                    let keyed = match term.as_variable() {
                        Some(v) => a_vars.contains(v),
                        None => true,
                    };
                    if keyed {
                        shared.push(j);
                    } else {
                        unshared.push(j);
                    }
                }
                BoundExpr::Product {
                    size_of: a.atom.predicate.clone(),
                    per_fact: Combinations {
                        predicate: b.atom.predicate.clone(),
                        value_positions: unshared,
                        given_positions: shared,
                    },
                }
            };
            BoundExpr::Min(
                Box::new(direction(first, second)),
                Box::new(direction(second, first)),
            )
        }
        _ => unreachable!("rules are decomposed to at most two hypotheses"),
    }
}

/// Evaluate the bound of one decomposed rule against a store.
pub fn rule_bound(
    rule_index: usize,
    rule: &Rule,
    store: &FactStore,
) -> Result<RuleBound, ParamError> {
    let expr = bound_expr(rule);
    let (value, branches) = match &expr {
        BoundExpr::Min(a, b) => {
            let (va, vb) = (a.evaluate(store)?, b.evaluate(store)?);
            (va.min(vb), vec![va, vb])
        }
        other => {
            let v = other.evaluate(store)?;
            (v, vec![v])
        }
    };
    Ok(RuleBound {
        rule_index,
        expr,
        value,
        branches,
        omittable: rule.hypotheses.len() == 1,
    })
}

/// Per-rule verification of measured firings against evaluated bounds.
#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub rows: Vec<BoundsRow>,
    pub total_firings: u64,
    /// Facts present before evaluation started: extensional tuples plus
    /// demand seeds.
    pub given_facts: u64,
}

#[derive(Debug, Clone)]
pub struct BoundsRow {
    pub rule: String,
    pub bound: RuleBound,
    pub firings: u64,
    pub ok: bool,
}

impl BoundsReport {
    /// Sum of firings plus given facts: the unit-cost account of the run.
    pub fn time_witness(&self) -> u64 {
        self.total_firings + self.given_facts
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }
}

/// Check every decomposed rule's measured firings against its bound on the
/// final store.
pub fn check_bounds(
    program: &DecomposedProgram,
    store: &FactStore,
    firings: &FiringCounter,
    given_facts: u64,
) -> Result<BoundsReport, ParamError> {
    let mut rows = Vec::new();
    for (i, rule) in program.rules().iter().enumerate() {
        let bound = rule_bound(i, rule, store)?;
        let fired = firings.get(i);
        rows.push(BoundsRow {
            rule: rule.to_string(),
            ok: fired <= bound.value,
            bound,
            firings: fired,
        });
    }
    Ok(BoundsReport {
        rows,
        total_firings: firings.total(),
        given_facts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::store_for;
    use crate::parser::parse_program;

    fn store_with(facts: &str) -> FactStore {
        store_for(&parse_program(facts).unwrap())
    }

    fn comb(pred: &str, values: &[usize], given: &[usize]) -> ParamDescriptor {
        ParamDescriptor::Combinations(Combinations {
            predicate: pred.into(),
            value_positions: values.to_vec(),
            given_positions: given.to_vec(),
        })
    }

    #[test]
    fn size_is_cardinality() {
        let store = store_with("e(1,2).\ne(2,3).\ne(1,3).\n");
        let v = measure_params(
            &store,
            &[ParamDescriptor::Size {
                predicate: "e".into(),
            }],
        )
        .unwrap();
        assert_eq!(v, [3]);
    }

    #[test]
    fn combinations_group_by_given_positions() {
        let store = store_with("e(1,2).\ne(2,3).\ne(1,3).\n");
        // Key 1 has second arguments {2,3}.
        assert_eq!(measure_params(&store, &[comb("e", &[1], &[0])]).unwrap(), [2]);
        assert_eq!(measure_params(&store, &[comb("e", &[0], &[1])]).unwrap(), [2]);
    }

    #[test]
    fn empty_relations_measure_zero() {
        let mut store = FactStore::new();
        store.declare("p", 2, false);
        assert_eq!(measure_params(&store, &[comb("p", &[1], &[0])]).unwrap(), [0]);
    }

    #[test]
    fn position_out_of_range_is_an_error() {
        let store = store_with("e(1,2).\n");
        assert!(matches!(
            measure_params(&store, &[comb("e", &[2], &[])]),
            Err(ParamError::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn two_hypothesis_bound_takes_both_directions() {
        let program = parse_program("p(X,Z) :- e(X,Y), p(Y,Z).\n").unwrap();
        let expr = bound_expr(&program.rules[0]);
        assert_eq!(expr.to_string(), "min(#e * #p.2/1, #p * #e.1/2)");
    }

    #[test]
    fn full_overlap_join_degenerates_to_the_smaller_side() {
        let program = parse_program("i1(X,Z) :- d(X,Z), np(X,Z).\n").unwrap();
        let expr = bound_expr(&program.rules[0]);
        assert_eq!(expr.to_string(), "min(#d * #np./1,2, #np * #d./1,2)");
        let store = store_with("d(1,2).\nd(2,2).\nnp(1,2).\n");
        // One empty-tuple combination per non-empty group, so the branches
        // are #d * 1 = 2 and #np * 1 = 1.
        assert_eq!(expr.evaluate(&store).unwrap(), 1);
    }

    #[test]
    fn one_hypothesis_rules_are_omittable() {
        let program = parse_program("a(X) :- b(X).\nb(1).\n").unwrap();
        let store = store_with("b(1).\nb(2).\n");
        let bound = rule_bound(0, &program.rules[0], &store).unwrap();
        assert!(bound.omittable);
        assert_eq!(bound.expr.to_string(), "#b");
        assert_eq!(bound.value, 2);
    }

    #[test]
    fn complement_rules_are_bounded_by_their_demand() {
        let program = parse_program("n.p(X) :- d_n.p_b(X), not p(X).\np(X) :- e(X).\n").unwrap();
        let expr = bound_expr(&program.rules[0]);
        assert_eq!(expr.to_string(), "#d_n.p_b");
    }
}
