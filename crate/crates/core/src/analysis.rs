//! Dependency analysis over programs: the predicate dependency graph,
//! stratification, demand-pattern inference, and floundering detection.
//!
//! Demand patterns are inferred by walking each demanded rule's hypotheses
//! left to right, tracking which variables are bound. The seed is the
//! query's own pattern. A negated hypothesis demands the underlying
//! predicate but binds nothing; a positive hypothesis binds all of its
//! variables once passed.

use crate::ast::{BindingPattern, DemandPattern, Program, Query};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

/// Predicate-level dependency graph. An edge `(from, to)` means some rule
/// concludes `from` with a hypothesis on `to`; the flag is true if any
/// contributing hypothesis is negated.
#[derive(Debug, Clone, Default)]
pub struct DependencyGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), bool>,
}

impl DependencyGraph {
    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    /// Edges as `(from, to, negative)`.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, bool)> {
        self.edges
            .iter()
            .map(|((f, t), neg)| (f.as_str(), t.as_str(), *neg))
    }

    pub fn contains_edge(&self, from: &str, to: &str) -> Option<bool> {
        self.edges.get(&(from.to_owned(), to.to_owned())).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Build the dependency graph of a program. Extensional predicates appear
/// as sink nodes.
pub fn build_dependency_graph(program: &Program) -> DependencyGraph {
    let mut graph = DependencyGraph::default();
    for rule in &program.rules {
        let from = rule.conclusion.predicate.clone();
        graph.nodes.insert(from.clone());
        for hyp in &rule.hypotheses {
            let to = hyp.atom.predicate.clone();
            graph.nodes.insert(to.clone());
            let entry = graph.edges.entry((from.clone(), to)).or_insert(false);
            *entry |= hyp.negated;
        }
    }
    for fact in &program.facts {
        graph.nodes.insert(fact.predicate().to_owned());
    }
    graph
}

/// Minimal stratum numbers: extensional predicates and the lowest
/// intensional predicates sit at 0, and each negative dependency forces a
/// strictly higher stratum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratification {
    stratum: BTreeMap<String, u32>,
}

impl Stratification {
    pub fn stratum(&self, predicate: &str) -> Option<u32> {
        self.stratum.get(predicate).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.stratum.iter().map(|(p, s)| (p.as_str(), *s))
    }

    pub fn max_stratum(&self) -> u32 {
        self.stratum.values().copied().max().unwrap_or(0)
    }
}

/// A dependency cycle passing through at least one negative edge. The
/// `negative` flag on each step describes the edge to the next predicate in
/// the cycle (the last step closes back to the first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeCycle {
    pub steps: Vec<(String, bool)>,
}

impl fmt::Display for NegativeCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cycle through negation: ")?;
        for (pred, negative) in &self.steps {
            write!(f, "{pred} {}> ", if *negative { "-[not]-" } else { "--" })?;
        }
        if let Some((first, _)) = self.steps.first() {
            write!(f, "{first}")?;
        }
        Ok(())
    }
}

impl std::error::Error for NegativeCycle {}

struct Tarjan<'g> {
    nodes: Vec<&'g str>,
    node_ids: HashMap<&'g str, usize>,
    succ: Vec<Vec<(usize, bool)>>,
    index: Vec<Option<u32>>,
    lowlink: Vec<u32>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next_index: u32,
    /// SCCs in completion order: every successor SCC comes earlier.
    sccs: Vec<Vec<usize>>,
}

impl<'g> Tarjan<'g> {
    fn new(graph: &'g DependencyGraph) -> Self {
        let nodes: Vec<&str> = graph.nodes().collect();
        let node_ids: HashMap<&str, usize> =
            nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut succ = vec![Vec::new(); nodes.len()];
        for (from, to, neg) in graph.edges() {
            succ[node_ids[from]].push((node_ids[to], neg));
        }
        Tarjan {
            index: vec![None; nodes.len()],
            lowlink: vec![0; nodes.len()],
            on_stack: vec![false; nodes.len()],
            stack: Vec::new(),
            next_index: 0,
            sccs: Vec::new(),
            nodes,
            node_ids,
            succ,
        }
    }

    fn run(&mut self) {
        for v in 0..self.nodes.len() {
            if self.index[v].is_none() {
                self.visit(v);
            }
        }
    }

    fn visit(&mut self, v: usize) {
        // Explicit stack; rule sets are small but there is no reason to
        // depend on recursion depth.
        let mut work = vec![(v, 0usize)];
        self.open(v);
        while let Some(&mut (u, ref mut next)) = work.last_mut() {
            if *next < self.succ[u].len() {
                let (w, _) = self.succ[u][*next];
                *next += 1;
                if self.index[w].is_none() {
                    self.open(w);
                    work.push((w, 0));
                } else if self.on_stack[w] {
                    self.lowlink[u] = self.lowlink[u].min(self.index[w].unwrap());
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    self.lowlink[parent] = self.lowlink[parent].min(self.lowlink[u]);
                }
                if self.lowlink[u] == self.index[u].unwrap() {
                    let mut scc = Vec::new();
                    loop {
                        let w = self.stack.pop().unwrap();
                        self.on_stack[w] = false;
                        scc.push(w);
                        if w == u {
                            break;
                        }
                    }
                    self.sccs.push(scc);
                }
            }
        }
    }

    fn open(&mut self, v: usize) {
        self.index[v] = Some(self.next_index);
        self.lowlink[v] = self.next_index;
        self.next_index += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
    }
}

/// Compute minimal strata, or report one cycle through a negative edge.
pub fn stratify(graph: &DependencyGraph) -> Result<Stratification, NegativeCycle> {
    let mut tarjan = Tarjan::new(graph);
    tarjan.run();

    let mut scc_of = vec![usize::MAX; tarjan.nodes.len()];
    for (i, scc) in tarjan.sccs.iter().enumerate() {
        for &v in scc {
            scc_of[v] = i;
        }
    }

    // A negative edge inside one SCC means a predicate depends on its own
    // negation, transitively.
    for (from, to, neg) in graph.edges() {
        let (u, v) = (tarjan.node_ids[from], tarjan.node_ids[to]);
        if neg && scc_of[u] == scc_of[v] {
            return Err(negative_cycle(&tarjan, &scc_of, u, v));
        }
    }

    // Tarjan emits each SCC only after everything it depends on, so one pass
    // in emission order settles the strata.
    let mut scc_stratum = vec![0u32; tarjan.sccs.len()];
    for (i, scc) in tarjan.sccs.iter().enumerate() {
        let mut stratum = 0;
        for &u in scc {
            for &(w, neg) in &tarjan.succ[u] {
                if scc_of[w] != i {
                    stratum = stratum.max(scc_stratum[scc_of[w]] + u32::from(neg));
                }
            }
        }
        scc_stratum[i] = stratum;
    }

    let stratum = tarjan
        .nodes
        .iter()
        .enumerate()
        .map(|(v, name)| (name.to_string(), scc_stratum[scc_of[v]]))
        .collect();
    Ok(Stratification { stratum })
}

/// Shortest cycle through the negative edge `from -> to`, found by walking
/// back from `to` to `from` inside their common SCC.
fn negative_cycle(tarjan: &Tarjan<'_>, scc_of: &[usize], from: usize, to: usize) -> NegativeCycle {
    let scc = scc_of[from];
    let mut prev: HashMap<usize, (usize, bool)> = HashMap::new();
    let mut queue = VecDeque::from([to]);
    while let Some(u) = queue.pop_front() {
        if u == from {
            break;
        }
        for &(w, neg) in &tarjan.succ[u] {
            if scc_of[w] == scc && !prev.contains_key(&w) && w != to {
                prev.insert(w, (u, neg));
                queue.push_back(w);
            }
        }
    }
    // Path to -> ... -> from, then the negative edge closes the cycle.
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        let (p, _) = prev[&cur];
        path.push(p);
        cur = p;
    }
    path.reverse(); // now to, ..., from
    let mut steps = Vec::new();
    for (i, &u) in path.iter().enumerate() {
        let negative = if i + 1 < path.len() {
            prev[&path[i + 1]].1
        } else {
            true // the closing edge from -> to is the negative one
        };
        steps.push((tarjan.nodes[u].to_owned(), negative));
    }
    NegativeCycle { steps }
}

/// The set of demand patterns reachable from a query.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DemandSet {
    patterns: BTreeSet<DemandPattern>,
}

impl DemandSet {
    pub fn contains(&self, dp: &DemandPattern) -> bool {
        self.patterns.contains(dp)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DemandPattern> {
        self.patterns.iter()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Patterns demanded for one predicate, in lexicographic order.
    pub fn patterns_for<'a>(&'a self, predicate: &str) -> Vec<&'a BindingPattern> {
        self.patterns
            .iter()
            .filter(|dp| dp.predicate == predicate)
            .map(|dp| &dp.pattern)
            .collect()
    }
}

/// A negated hypothesis reached with some demand context.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NegatedUse {
    pub rule_index: usize,
    pub hyp_index: usize,
    pub predicate: String,
    pub pattern: BindingPattern,
}

fn demand_walk(program: &Program, query: &Query) -> (DemandSet, BTreeSet<NegatedUse>) {
    let intensional = program.intensional_predicates();
    let mut demands = DemandSet::default();
    let mut negated_uses = BTreeSet::new();
    let mut worklist = VecDeque::new();

    if intensional.contains(&query.atom.predicate) {
        let seed = DemandPattern {
            predicate: query.atom.predicate.clone(),
            pattern: BindingPattern::from_atom(&query.atom),
        };
        demands.patterns.insert(seed.clone());
        worklist.push_back(seed);
    }

    while let Some(dp) = worklist.pop_front() {
        for (rule_index, rule) in program.rules.iter().enumerate() {
            if rule.conclusion.predicate != dp.predicate {
                continue;
            }
            let mut bound: BTreeSet<String> = dp
                .pattern
                .bound_positions()
                .into_iter()
                .filter_map(|i| rule.conclusion.args[i].as_variable())
                .map(str::to_owned)
                .collect();
            for (hyp_index, hyp) in rule.hypotheses.iter().enumerate() {
                let pattern = BindingPattern::from_atom_with_bound(&hyp.atom, &bound);
                if hyp.negated {
                    negated_uses.insert(NegatedUse {
                        rule_index,
                        hyp_index,
                        predicate: hyp.atom.predicate.clone(),
                        pattern: pattern.clone(),
                    });
                }
                if intensional.contains(&hyp.atom.predicate) {
                    let next = DemandPattern {
                        predicate: hyp.atom.predicate.clone(),
                        pattern,
                    };
                    if demands.patterns.insert(next.clone()) {
                        worklist.push_back(next);
                    }
                }
                if !hyp.negated {
                    bound.extend(hyp.atom.variables().map(str::to_owned));
                }
            }
        }
    }
    (demands, negated_uses)
}

/// Least fixed point of demand propagation from the query. Demand for a
/// negated hypothesis counts as demand for the underlying predicate. A
/// query on an extensional predicate demands nothing.
pub fn compute_demand_patterns(program: &Program, query: &Query) -> DemandSet {
    demand_walk(program, query).0
}

/// Report of negated hypotheses reachable with unbound arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlounderingReport {
    pub violations: Vec<NegatedUse>,
}

impl fmt::Display for FlounderingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "query flounders: ")?;
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(
                f,
                "hypothesis {} of rule {} reaches `not {}` with pattern {}",
                v.hyp_index + 1,
                v.rule_index + 1,
                v.predicate,
                v.pattern
            )?;
        }
        Ok(())
    }
}

impl std::error::Error for FlounderingReport {}

/// A query is non-floundering when every negated hypothesis it can reach is
/// fully bound at that point. Checked on the original program, before the
/// complement-predicate extension.
pub fn check_non_floundering(program: &Program, query: &Query) -> Result<(), FlounderingReport> {
    let (_, negated_uses) = demand_walk(program, query);
    let violations: Vec<NegatedUse> = negated_uses
        .into_iter()
        .filter(|u| !u.pattern.is_all_bound())
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(FlounderingReport { violations })
    }
}
