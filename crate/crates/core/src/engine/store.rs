//! Indexed ground-fact storage with set semantics.
//!
//! Constants and predicates are interned; a fact is a predicate id plus a
//! tuple of constant ids. Tuples keep their insertion order, which doubles
//! as the worklist order during evaluation. Hash indexes over key-position
//! sets are created lazily on first probe and kept consistent with the base
//! relation on every insert.

use crate::ast::{Atom, Fact, Term};
use indexmap::{IndexMap, IndexSet};
use std::collections::HashMap;
use std::fmt;

pub type PredId = usize;
pub type ConstId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPredicate {
    pub predicate: String,
}

impl fmt::Display for UnknownPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown predicate `{}`", self.predicate)
    }
}

impl std::error::Error for UnknownPredicate {}

#[derive(Debug, Default)]
struct Relation {
    arity: usize,
    generated: bool,
    tuples: IndexSet<Box<[ConstId]>>,
}

type IndexKey = (PredId, Box<[usize]>);

#[derive(Debug, Default)]
pub struct FactStore {
    constants: IndexSet<String>,
    relations: IndexMap<String, Relation>,
    indexes: HashMap<IndexKey, HashMap<Box<[ConstId]>, Vec<usize>>>,
}

impl FactStore {
    pub fn new() -> Self {
        FactStore::default()
    }

    /// Register a predicate. Re-declaring must agree on the arity.
    pub fn declare(&mut self, name: &str, arity: usize, generated: bool) -> PredId {
        match self.relations.get_full_mut(name) {
            Some((id, _, rel)) => {
                assert_eq!(rel.arity, arity, "conflicting arity for `{name}`");
                rel.generated |= generated;
                id
            }
            None => {
                self.relations
                    .insert_full(
                        name.to_owned(),
                        Relation {
                            arity,
                            generated,
                            tuples: IndexSet::new(),
                        },
                    )
                    .0
            }
        }
    }

    pub fn pred_id(&self, name: &str) -> Option<PredId> {
        self.relations.get_index_of(name)
    }

    pub fn pred_name(&self, id: PredId) -> &str {
        self.relations.get_index(id).expect("valid pred id").0
    }

    pub fn arity(&self, id: PredId) -> usize {
        self.relations[id].arity
    }

    pub fn is_generated(&self, id: PredId) -> bool {
        self.relations[id].generated
    }

    pub fn predicate_count(&self) -> usize {
        self.relations.len()
    }

    pub fn intern(&mut self, constant: &str) -> ConstId {
        self.constants.insert_full(constant.to_owned()).0 as ConstId
    }

    pub fn constant_id(&self, constant: &str) -> Option<ConstId> {
        self.constants.get_index_of(constant).map(|i| i as ConstId)
    }

    pub fn constant_name(&self, id: ConstId) -> &str {
        self.constants.get_index(id as usize).expect("valid const id")
    }

    /// Insert a tuple; returns its index and whether it was new. A duplicate
    /// is a no-op.
    pub fn insert(&mut self, pred: PredId, tuple: Box<[ConstId]>) -> (usize, bool) {
        debug_assert_eq!(tuple.len(), self.relations[pred].arity);
        let (idx, new) = self.relations[pred].tuples.insert_full(tuple);
        if new {
            let tuple = self.relations[pred].tuples[idx].clone();
            for ((p, positions), buckets) in self.indexes.iter_mut() {
                if *p == pred {
                    let key: Box<[ConstId]> = positions.iter().map(|&i| tuple[i]).collect();
                    buckets.entry(key).or_default().push(idx);
                }
            }
        }
        (idx, new)
    }

    /// Insert a named fact, interning its constants. The predicate must be
    /// declared.
    pub fn insert_fact(&mut self, fact: &Fact) -> Result<bool, UnknownPredicate> {
        let pred = self
            .pred_id(fact.predicate())
            .ok_or_else(|| UnknownPredicate {
                predicate: fact.predicate().to_owned(),
            })?;
        let tuple: Box<[ConstId]> = fact.values().iter().map(|v| self.intern(v)).collect();
        Ok(self.insert(pred, tuple).1)
    }

    pub fn contains(&self, pred: PredId, tuple: &[ConstId]) -> bool {
        self.relations[pred].tuples.contains(tuple)
    }

    pub fn len_of(&self, pred: PredId) -> usize {
        self.relations[pred].tuples.len()
    }

    pub fn total_facts(&self) -> usize {
        self.relations.values().map(|r| r.tuples.len()).sum()
    }

    pub fn tuple_at(&self, pred: PredId, idx: usize) -> &[ConstId] {
        &self.relations[pred].tuples[idx]
    }

    pub fn tuples_of(&self, pred: PredId) -> impl Iterator<Item = &[ConstId]> {
        self.relations[pred].tuples.iter().map(|t| t.as_ref())
    }

    /// Render one tuple of a relation as a fact.
    pub fn fact_at(&self, pred: PredId, idx: usize) -> Fact {
        let values: Vec<String> = self
            .tuple_at(pred, idx)
            .iter()
            .map(|&c| self.constant_name(c).to_owned())
            .collect();
        Fact::new(Atom::new(
            self.pred_name(pred),
            values.into_iter().map(Term::Constant).collect(),
        ))
        .expect("constants are ground")
    }

    /// Build the index for `(pred, positions)` if missing.
    pub fn ensure_index(&mut self, pred: PredId, positions: &[usize]) {
        let key = (pred, positions.to_vec().into_boxed_slice());
        if self.indexes.contains_key(&key) {
            return;
        }
        let mut buckets: HashMap<Box<[ConstId]>, Vec<usize>> = HashMap::new();
        for (idx, tuple) in self.relations[pred].tuples.iter().enumerate() {
            let k: Box<[ConstId]> = positions.iter().map(|&i| tuple[i]).collect();
            buckets.entry(k).or_default().push(idx);
        }
        self.indexes.insert(key, buckets);
    }

    /// Tuple indices whose projection to `positions` equals `key`. The index
    /// must have been created with [`ensure_index`](Self::ensure_index).
    pub fn bucket(&self, pred: PredId, positions: &[usize], key: &[ConstId]) -> &[usize] {
        self.indexes
            .get(&(pred, positions.to_vec().into_boxed_slice()) as &IndexKey)
            .expect("index created before probe")
            .get(key)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    /// Relation sizes by name, generated predicates included.
    pub fn sizes(&self) -> Vec<(String, usize)> {
        self.relations
            .iter()
            .map(|(name, rel)| (name.clone(), rel.tuples.len()))
            .collect()
    }
}
