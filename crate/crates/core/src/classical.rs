//! Backtracking ALC tableau for unlabelled ontologies.
//!
//! Every concept in the completion graph carries the set of branch points it
//! depends on, so a clash can jump back over choices that did not cause it.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::ontology::{Axiom, Concept, Symbol, IMPLICIT_INDIVIDUAL};

type Deps = BTreeSet<usize>;

/// Completion graph: named individuals first, then generated ones.
#[derive(Debug, Clone)]
pub struct ClassicalAbox {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    gcis: Arc<Vec<Concept>>,
    clash: Option<Deps>,
    branches: usize,
}

#[derive(Debug, Clone)]
struct Node {
    name: Option<Symbol>,
    concepts: Vec<Concept>,
    deps: HashMap<Concept, Deps>,
    parent: Option<usize>,
}

#[derive(Debug, Clone)]
struct Edge {
    role: Symbol,
    from: usize,
    to: usize,
    deps: Deps,
}

enum Step {
    Changed,
    Branch(Concept, Concept, usize, Deps),
    Complete,
}

/// Decides whether the ontology has a model.
pub fn is_classically_consistent(onto: &[Axiom]) -> bool {
    match ClassicalAbox::new(onto) {
        Some(abox) => abox.solve(),
        None => false,
    }
}

fn complement(c: &Concept) -> Option<Concept> {
    match c {
        Concept::Name(_) => Some(Concept::not(c.clone())),
        Concept::Not(inner) => Some((**inner).clone()),
        _ => None,
    }
}

impl ClassicalAbox {
    /// Returns `None` when the initial assertions already clash.
    pub fn new(onto: &[Axiom]) -> Option<Self> {
        let gcis: Vec<Concept> = onto
            .iter()
            .filter_map(|ax| match ax {
                Axiom::Gci(c, d) => Some(Concept::or(c.negated_nnf(), d.nnf())),
                _ => None,
            })
            .collect();
        let mut abox = ClassicalAbox {
            nodes: Vec::new(),
            edges: Vec::new(),
            gcis: Arc::new(gcis),
            clash: None,
            branches: 0,
        };
        for ax in onto {
            match ax {
                Axiom::Gci(..) => {}
                Axiom::ConceptAssertion(c, a) => {
                    let n = abox.named(a);
                    abox.add(n, c.nnf(), Deps::new());
                }
                Axiom::RoleAssertion(r, a, b) => {
                    let (x, y) = (abox.named(a), abox.named(b));
                    abox.add_edge(r.clone(), x, y, Deps::new());
                }
            }
        }
        if abox.nodes.is_empty() {
            abox.named(&Symbol::from(IMPLICIT_INDIVIDUAL));
        }
        abox.clash.is_none().then_some(abox)
    }

    fn named(&mut self, a: &Symbol) -> usize {
        if let Some(i) = self.nodes.iter().position(|n| n.name.as_ref() == Some(a)) {
            return i;
        }
        self.new_node(Some(a.clone()), None, Deps::new())
    }

    fn new_node(&mut self, name: Option<Symbol>, parent: Option<usize>, deps: Deps) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            name,
            concepts: Vec::new(),
            deps: HashMap::new(),
            parent,
        });
        let gcis = Arc::clone(&self.gcis);
        for g in gcis.iter() {
            self.add(id, g.clone(), deps.clone());
        }
        id
    }

    fn add_edge(&mut self, role: Symbol, from: usize, to: usize, deps: Deps) {
        if !self
            .edges
            .iter()
            .any(|e| e.role == role && e.from == from && e.to == to)
        {
            self.edges.push(Edge {
                role,
                from,
                to,
                deps,
            });
        }
    }

    fn add(&mut self, n: usize, c: Concept, deps: Deps) -> bool {
        let node = &mut self.nodes[n];
        if node.deps.contains_key(&c) {
            return false;
        }
        if let Some(other) = complement(&c).and_then(|k| node.deps.get(&k)) {
            if self.clash.is_none() {
                self.clash = Some(deps.union(other).copied().collect());
            }
        }
        node.deps.insert(c.clone(), deps);
        node.concepts.push(c);
        true
    }

    fn has(&self, n: usize, c: &Concept) -> bool {
        self.nodes[n].deps.contains_key(c)
    }

    fn deps(&self, n: usize, c: &Concept) -> &Deps {
        &self.nodes[n].deps[c]
    }

    /// Generated node whose concepts are contained in some proper ancestor's.
    fn is_blocked(&self, y: usize) -> bool {
        let node = &self.nodes[y];
        if node.name.is_some() {
            return false;
        }
        let mut cur = node.parent;
        while let Some(x) = cur {
            if node
                .concepts
                .iter()
                .all(|c| self.nodes[x].deps.contains_key(c))
            {
                return true;
            }
            cur = self.nodes[x].parent;
        }
        false
    }

    fn step(&mut self) -> Step {
        for n in 0..self.nodes.len() {
            let mut i = 0;
            while i < self.nodes[n].concepts.len() {
                if let Concept::And(c, d) = &self.nodes[n].concepts[i] {
                    let (c, d) = ((**c).clone(), (**d).clone());
                    let deps = self.deps(n, &self.nodes[n].concepts[i]).clone();
                    if self.add(n, c, deps.clone()) | self.add(n, d, deps) {
                        return Step::Changed;
                    }
                }
                i += 1;
            }
        }
        let mut open = None;
        let mut forced = None;
        'scan: for n in 0..self.nodes.len() {
            for c in &self.nodes[n].concepts {
                if let Concept::Or(a, b) = c {
                    if self.has(n, a) || self.has(n, b) {
                        continue;
                    }
                    let deps = self.deps(n, c);
                    // A disjunct whose complement is present leaves only the other.
                    for (x, y) in [(a, b), (b, a)] {
                        if let Some(k) = complement(x).filter(|k| self.has(n, k)) {
                            let d: Deps = deps.union(self.deps(n, &k)).copied().collect();
                            forced = Some((n, (**y).clone(), d));
                            break 'scan;
                        }
                    }
                    if open.is_none() {
                        open = Some(((**a).clone(), (**b).clone(), n, deps.clone()));
                    }
                }
            }
        }
        if let Some((n, c, deps)) = forced {
            self.add(n, c, deps);
            return Step::Changed;
        }
        if let Some((a, b, n, deps)) = open {
            return Step::Branch(a, b, n, deps);
        }
        for n in 0..self.nodes.len() {
            let foralls: Vec<(Symbol, Concept, Deps)> = self.nodes[n]
                .concepts
                .iter()
                .filter_map(|c| match c {
                    Concept::Forall(r, d) => {
                        Some((r.clone(), (**d).clone(), self.deps(n, c).clone()))
                    }
                    _ => None,
                })
                .collect();
            for (r, d, deps) in foralls {
                let succ: Vec<(usize, Deps)> = self
                    .edges
                    .iter()
                    .filter(|e| e.role == r && e.from == n)
                    .map(|e| (e.to, deps.union(&e.deps).copied().collect()))
                    .collect();
                let mut changed = false;
                for (m, deps) in succ {
                    changed |= self.add(m, d.clone(), deps);
                }
                if changed {
                    return Step::Changed;
                }
            }
        }
        for n in 0..self.nodes.len() {
            if self.is_blocked(n) {
                continue;
            }
            let exists: Vec<(Symbol, Concept, Deps)> = self.nodes[n]
                .concepts
                .iter()
                .filter_map(|c| match c {
                    Concept::Exists(r, d) => {
                        Some((r.clone(), (**d).clone(), self.deps(n, c).clone()))
                    }
                    _ => None,
                })
                .collect();
            for (r, d, deps) in exists {
                if self
                    .edges
                    .iter()
                    .any(|e| e.role == r && e.from == n && self.has(e.to, &d))
                {
                    continue;
                }
                let m = self.new_node(None, Some(n), deps.clone());
                self.add_edge(r, n, m, deps.clone());
                self.add(m, d, deps);
                return Step::Changed;
            }
        }
        Step::Complete
    }

    /// Saturates, backtracking over disjunctions. Returns whether a clash-free
    /// completion exists.
    pub fn solve(self) -> bool {
        self.search().is_ok()
    }

    fn search(mut self) -> Result<(), Deps> {
        loop {
            if let Some(deps) = self.clash.take() {
                return Err(deps);
            }
            match self.step() {
                Step::Changed => {}
                Step::Complete => return Ok(()),
                Step::Branch(a, b, n, deps) => {
                    let level = self.branches;
                    self.branches += 1;
                    let mut left = self.clone();
                    let mut with_level = deps.clone();
                    with_level.insert(level);
                    left.add(n, a, with_level);
                    match left.search() {
                        Ok(()) => return Ok(()),
                        Err(cause) if !cause.contains(&level) => return Err(cause),
                        Err(mut cause) => {
                            cause.remove(&level);
                            cause.extend(deps);
                            self.add(n, b, cause);
                        }
                    }
                }
            }
        }
    }
}
