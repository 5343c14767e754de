//! Core data model shared by every stage of the pipeline: terms, atoms,
//! literals, rules, facts, programs, queries, and binding patterns.
//!
//! All values here are immutable once constructed and cheap to clone at the
//! scale this engine targets. The evaluation engine compiles them into a
//! denser interned form; everything else works on these types directly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Assignment of variable names to constant names.
pub type Binding = BTreeMap<String, String>;

/// A constant or a variable. The two draw from disjoint lexical spaces:
/// constants start with a lowercase letter or digit, variables with an
/// uppercase letter or underscore.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Constant(String),
    Variable(String),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Constant(name.into())
    }

    pub fn variable(name: impl Into<String>) -> Self {
        Term::Variable(name.into())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Term::Constant(_))
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Constant(n) | Term::Variable(n) => n,
        }
    }

    pub fn as_variable(&self) -> Option<&str> {
        match self {
            Term::Variable(n) => Some(n),
            Term::Constant(_) => None,
        }
    }

    pub fn as_constant(&self) -> Option<&str> {
        match self {
            Term::Constant(n) => Some(n),
            Term::Variable(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A predicate applied to a tuple of terms. Arity is the argument count and
/// is fixed per predicate across a program.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_constant)
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::as_variable)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, arg) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{arg}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A possibly negated atom. Negated literals may only appear as hypotheses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// A rule with a conclusion and an ordered, non-empty hypothesis list.
/// Hypothesis order is significant: it is the left-to-right evaluation
/// contract shared by the transformations and both evaluators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub conclusion: Atom,
    pub hypotheses: Vec<Literal>,
}

impl Rule {
    pub fn new(conclusion: Atom, hypotheses: Vec<Literal>) -> Self {
        Rule {
            conclusion,
            hypotheses,
        }
    }

    /// All variable names appearing anywhere in the rule.
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut vars: BTreeSet<&str> = self.conclusion.variables().collect();
        for hyp in &self.hypotheses {
            vars.extend(hyp.atom.variables());
        }
        vars
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :- ", self.conclusion)?;
        for (i, hyp) in self.hypotheses.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{hyp}")?;
        }
        write!(f, ".")
    }
}

/// A ground atom. Construction checks groundness.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    atom: Atom,
}

/// Error for an attempt to build a fact from a non-ground atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonGroundFact {
    pub atom: Atom,
}

impl fmt::Display for NonGroundFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fact contains a variable: {}", self.atom)
    }
}

impl std::error::Error for NonGroundFact {}

impl Fact {
    pub fn new(atom: Atom) -> Result<Self, NonGroundFact> {
        if atom.is_ground() {
            Ok(Fact { atom })
        } else {
            Err(NonGroundFact { atom })
        }
    }

    /// Build a fact from a predicate and constant values.
    pub fn from_values<S: Into<String>>(predicate: impl Into<String>, values: Vec<S>) -> Self {
        Fact {
            atom: Atom::new(
                predicate,
                values.into_iter().map(|v| Term::Constant(v.into())).collect(),
            ),
        }
    }

    pub fn atom(&self) -> &Atom {
        &self.atom
    }

    pub fn predicate(&self) -> &str {
        &self.atom.predicate
    }

    /// Constant names, in argument order.
    pub fn values(&self) -> Vec<&str> {
        self.atom.args.iter().map(Term::name).collect()
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atom)
    }
}

/// A set of rules plus given facts. Predicates that appear in some
/// conclusion are intensional; all others are extensional.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub facts: Vec<Fact>,
}

impl Program {
    pub fn new(rules: Vec<Rule>, facts: Vec<Fact>) -> Self {
        Program { rules, facts }
    }

    /// Predicates appearing in some rule conclusion.
    pub fn intensional_predicates(&self) -> BTreeSet<String> {
        self.rules
            .iter()
            .map(|r| r.conclusion.predicate.clone())
            .collect()
    }

    /// Predicates appearing only in hypotheses or given facts.
    pub fn extensional_predicates(&self) -> BTreeSet<String> {
        let intensional = self.intensional_predicates();
        self.predicates()
            .into_iter()
            .filter(|p| !intensional.contains(p))
            .collect()
    }

    /// Every predicate mentioned anywhere in the program.
    pub fn predicates(&self) -> BTreeSet<String> {
        let mut preds = BTreeSet::new();
        for rule in &self.rules {
            preds.insert(rule.conclusion.predicate.clone());
            for hyp in &rule.hypotheses {
                preds.insert(hyp.atom.predicate.clone());
            }
        }
        for fact in &self.facts {
            preds.insert(fact.predicate().to_owned());
        }
        preds
    }

    /// Arity of each predicate, taken from its first occurrence. The parser
    /// guarantees consistency for parsed programs.
    pub fn arities(&self) -> BTreeMap<String, usize> {
        let mut map = BTreeMap::new();
        let mut note = |atom: &Atom| {
            map.entry(atom.predicate.clone()).or_insert(atom.arity());
        };
        for rule in &self.rules {
            note(&rule.conclusion);
            for hyp in &rule.hypotheses {
                note(&hyp.atom);
            }
        }
        for fact in &self.facts {
            note(fact.atom());
        }
        map
    }

    pub fn is_positive(&self) -> bool {
        self.rules
            .iter()
            .all(|r| r.hypotheses.iter().all(|h| !h.negated))
    }

    /// All constant names appearing in rules or facts.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut consts = BTreeSet::new();
        for rule in &self.rules {
            for term in rule
                .conclusion
                .args
                .iter()
                .chain(rule.hypotheses.iter().flat_map(|h| h.atom.args.iter()))
            {
                if let Term::Constant(c) = term {
                    consts.insert(c.clone());
                }
            }
        }
        for fact in &self.facts {
            for v in fact.values() {
                consts.insert(v.to_owned());
            }
        }
        consts
    }
}

/// A query atom; constants and variables allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Query {
    pub atom: Atom,
}

impl Query {
    pub fn new(atom: Atom) -> Self {
        Query { atom }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}?", self.atom)
    }
}

/// A string over {b, f} with one character per argument position: `b` where
/// the argument is bound (a constant), `f` where it is free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BindingPattern {
    chars: String,
}

/// Error for a pattern string containing characters other than b/f.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidPattern {
    pub text: String,
}

impl fmt::Display for InvalidPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid binding pattern {:?}", self.text)
    }
}

impl std::error::Error for InvalidPattern {}

impl BindingPattern {
    pub fn from_chars(text: impl Into<String>) -> Result<Self, InvalidPattern> {
        let text = text.into();
        if text.chars().all(|c| c == 'b' || c == 'f') {
            Ok(BindingPattern { chars: text })
        } else {
            Err(InvalidPattern { text })
        }
    }

    /// Pattern of an atom: `b` at constant positions, `f` at variables.
    pub fn from_atom(atom: &Atom) -> Self {
        BindingPattern {
            chars: atom
                .args
                .iter()
                .map(|t| if t.is_constant() { 'b' } else { 'f' })
                .collect(),
        }
    }

    /// Pattern of an atom relative to a set of bound variables: an argument
    /// is bound iff it is a constant or a bound variable.
    pub fn from_atom_with_bound(atom: &Atom, bound: &BTreeSet<String>) -> Self {
        BindingPattern {
            chars: atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Constant(_) => 'b',
                    Term::Variable(v) => {
                        if bound.contains(v) {
                            'b'
                        } else {
                            'f'
                        }
                    }
                })
                .collect(),
        }
    }

    pub fn all_bound(arity: usize) -> Self {
        BindingPattern {
            chars: "b".repeat(arity),
        }
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn is_all_bound(&self) -> bool {
        self.chars.chars().all(|c| c == 'b')
    }

    pub fn as_str(&self) -> &str {
        &self.chars
    }

    /// Zero-based positions marked `b`.
    pub fn bound_positions(&self) -> Vec<usize> {
        self.chars
            .chars()
            .enumerate()
            .filter_map(|(i, c)| (c == 'b').then_some(i))
            .collect()
    }
}

impl fmt::Display for BindingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.chars)
    }
}

/// A predicate demanded with a particular binding pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DemandPattern {
    pub predicate: String,
    pub pattern: BindingPattern,
}

impl fmt::Display for DemandPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.predicate, self.pattern)
    }
}

/// Replace every variable with an entry in `binding`; other terms are
/// unchanged. The binding may be partial.
pub fn substitute(atom: &Atom, binding: &Binding) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Variable(v) => match binding.get(v) {
                    Some(c) => Term::Constant(c.clone()),
                    None => t.clone(),
                },
                Term::Constant(_) => t.clone(),
            })
            .collect(),
    }
}

/// The unique binding under which the query equals the fact, or `None` if a
/// constant conflicts or a repeated variable would bind inconsistently.
/// Predicate or arity mismatch also yields `None`.
pub fn matches(fact: &Fact, query: &Query) -> Option<Binding> {
    let q = &query.atom;
    let f = fact.atom();
    if q.predicate != f.predicate || q.arity() != f.arity() {
        return None;
    }
    let mut binding = Binding::new();
    for (qt, ft) in q.args.iter().zip(f.args.iter()) {
        let value = ft.name();
        match qt {
            Term::Constant(c) => {
                if c != value {
                    return None;
                }
            }
            Term::Variable(v) => match binding.get(v) {
                Some(prev) if prev != value => return None,
                Some(_) => {}
                None => {
                    binding.insert(v.clone(), value.to_owned());
                }
            },
        }
    }
    Some(binding)
}
