//! ALC concepts and axioms, context-labelled ontologies, restriction to a
//! world, and a finite-interpretation model checker.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::bayes::BayesNet;
use crate::context::{ComplexContext, World};
use crate::error::{Error, Result};

/// Interned-ish name of a concept, role or individual.
pub type Symbol = Arc<str>;

/// Concept name reserved for the top/bottom abbreviations.
pub const RESERVED_CONCEPT: &str = "__T";
/// Individual used for the implicit ABox of an assertion-free ontology.
pub const IMPLICIT_INDIVIDUAL: &str = "__a0";
/// Individual used by query reductions.
pub const QUERY_INDIVIDUAL: &str = "__query0";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Concept {
    Name(Symbol),
    Not(Arc<Concept>),
    And(Arc<Concept>, Arc<Concept>),
    Or(Arc<Concept>, Arc<Concept>),
    Exists(Symbol, Arc<Concept>),
    Forall(Symbol, Arc<Concept>),
}

impl Concept {
    pub fn name(n: &str) -> Concept {
        Concept::Name(n.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Concept) -> Concept {
        Concept::Not(Arc::new(c))
    }

    pub fn and(c: Concept, d: Concept) -> Concept {
        Concept::And(Arc::new(c), Arc::new(d))
    }

    pub fn or(c: Concept, d: Concept) -> Concept {
        Concept::Or(Arc::new(c), Arc::new(d))
    }

    pub fn exists(role: &str, c: Concept) -> Concept {
        Concept::Exists(role.into(), Arc::new(c))
    }

    pub fn forall(role: &str, c: Concept) -> Concept {
        Concept::Forall(role.into(), Arc::new(c))
    }

    /// `A ⊔ ¬A` over the reserved name.
    pub fn top() -> Concept {
        let a = Concept::name(RESERVED_CONCEPT);
        Concept::or(a.clone(), Concept::not(a))
    }

    /// `A ⊓ ¬A` over the reserved name.
    pub fn bottom() -> Concept {
        let a = Concept::name(RESERVED_CONCEPT);
        Concept::and(a.clone(), Concept::not(a))
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Concept::Or(a, b) if is_reserved_pair(a, b))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Concept::And(a, b) if is_reserved_pair(a, b))
    }

    /// Negation normal form: pushes negation inward with De Morgan, quantifier
    /// duality and double-negation elimination.
    pub fn nnf(&self) -> Concept {
        match self {
            Concept::Name(_) => self.clone(),
            Concept::Not(inner) => inner.negated_nnf(),
            Concept::And(c, d) => Concept::and(c.nnf(), d.nnf()),
            Concept::Or(c, d) => Concept::or(c.nnf(), d.nnf()),
            Concept::Exists(r, c) => Concept::Exists(r.clone(), Arc::new(c.nnf())),
            Concept::Forall(r, c) => Concept::Forall(r.clone(), Arc::new(c.nnf())),
        }
    }

    /// A concept name or a negated concept name.
    pub fn is_literal(&self) -> bool {
        match self {
            Concept::Name(_) => true,
            Concept::Not(inner) => matches!(**inner, Concept::Name(_)),
            _ => false,
        }
    }

    /// `nnf(¬self)`.
    pub fn negated_nnf(&self) -> Concept {
        if self.is_top() {
            return Concept::bottom();
        }
        if self.is_bottom() {
            return Concept::top();
        }
        match self {
            Concept::Name(_) => Concept::Not(Arc::new(self.clone())),
            Concept::Not(inner) => inner.nnf(),
            Concept::And(c, d) => Concept::or(c.negated_nnf(), d.negated_nnf()),
            Concept::Or(c, d) => Concept::and(c.negated_nnf(), d.negated_nnf()),
            Concept::Exists(r, c) => Concept::Forall(r.clone(), Arc::new(c.negated_nnf())),
            Concept::Forall(r, c) => Concept::Exists(r.clone(), Arc::new(c.negated_nnf())),
        }
    }

    /// Negation occurs only directly above concept names.
    pub fn is_nnf(&self) -> bool {
        match self {
            Concept::Name(_) => true,
            Concept::Not(inner) => matches!(**inner, Concept::Name(_)),
            Concept::And(c, d) | Concept::Or(c, d) => c.is_nnf() && d.is_nnf(),
            Concept::Exists(_, c) | Concept::Forall(_, c) => c.is_nnf(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Concept::Name(_) => 1,
            Concept::Not(c) | Concept::Exists(_, c) | Concept::Forall(_, c) => 1 + c.size(),
            Concept::And(c, d) | Concept::Or(c, d) => 1 + c.size() + d.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Concept::Name(_) => 0,
            Concept::Not(c) | Concept::Exists(_, c) | Concept::Forall(_, c) => 1 + c.depth(),
            Concept::And(c, d) | Concept::Or(c, d) => 1 + c.depth().max(d.depth()),
        }
    }

    pub fn collect_symbols(&self, concepts: &mut BTreeSet<Symbol>, roles: &mut BTreeSet<Symbol>) {
        match self {
            Concept::Name(n) => {
                concepts.insert(n.clone());
            }
            Concept::Not(c) => c.collect_symbols(concepts, roles),
            Concept::And(c, d) | Concept::Or(c, d) => {
                c.collect_symbols(concepts, roles);
                d.collect_symbols(concepts, roles);
            }
            Concept::Exists(r, c) | Concept::Forall(r, c) => {
                roles.insert(r.clone());
                c.collect_symbols(concepts, roles);
            }
        }
    }
}

fn is_reserved_pair(a: &Concept, b: &Concept) -> bool {
    match (a, b) {
        (Concept::Name(x), Concept::Not(n)) => {
            &**x == RESERVED_CONCEPT && matches!(&**n, Concept::Name(y) if &**y == RESERVED_CONCEPT)
        }
        _ => false,
    }
}

/// A classical ALC axiom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    /// `C ⊑ D`
    Gci(Concept, Concept),
    /// `C(a)`
    ConceptAssertion(Concept, Symbol),
    /// `r(a, b)`
    RoleAssertion(Symbol, Symbol, Symbol),
}

impl Axiom {
    pub fn gci(c: Concept, d: Concept) -> Axiom {
        Axiom::Gci(c, d)
    }

    pub fn concept(c: Concept, a: &str) -> Axiom {
        Axiom::ConceptAssertion(c, a.into())
    }

    pub fn role(r: &str, a: &str, b: &str) -> Axiom {
        Axiom::RoleAssertion(r.into(), a.into(), b.into())
    }

    pub fn is_assertion(&self) -> bool {
        !matches!(self, Axiom::Gci(..))
    }

    pub fn individuals(&self) -> Vec<&Symbol> {
        match self {
            Axiom::Gci(..) => vec![],
            Axiom::ConceptAssertion(_, a) => vec![a],
            Axiom::RoleAssertion(_, a, b) => vec![a, b],
        }
    }
}

/// An axiom that is required to hold in the worlds of its label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VAxiom {
    pub axiom: Axiom,
    pub label: ComplexContext,
}

impl VAxiom {
    pub fn new(axiom: Axiom, label: ComplexContext) -> Self {
        VAxiom { axiom, label }
    }

    /// Labelled with the empty context, so it holds everywhere.
    pub fn always(axiom: Axiom) -> Self {
        VAxiom::new(axiom, ComplexContext::top())
    }
}

/// A finite, ordered collection of labelled axioms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ontology {
    axioms: Vec<VAxiom>,
}

impl Ontology {
    pub fn new(axioms: Vec<VAxiom>) -> Self {
        Ontology { axioms }
    }

    pub fn push(&mut self, ax: VAxiom) {
        self.axioms.push(ax);
    }

    pub fn with(&self, extra: impl IntoIterator<Item = VAxiom>) -> Ontology {
        let mut o = self.clone();
        o.axioms.extend(extra);
        o
    }

    pub fn axioms(&self) -> &[VAxiom] {
        &self.axioms
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn has_assertions(&self) -> bool {
        self.axioms.iter().any(|a| a.axiom.is_assertion())
    }

    /// Named individuals in first-occurrence order.
    pub fn individuals(&self) -> Vec<Symbol> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for ax in &self.axioms {
            for a in ax.axiom.individuals() {
                if seen.insert(a.clone()) {
                    out.push(a.clone());
                }
            }
        }
        out
    }

    /// The classical ontology of axioms whose label `world` satisfies.
    pub fn restriction(&self, world: &World) -> Vec<Axiom> {
        self.axioms
            .iter()
            .filter(|a| world.satisfies(&a.label))
            .map(|a| a.axiom.clone())
            .collect()
    }
}

/// Labelled ontology together with the network its labels range over.
#[derive(Debug, Clone)]
pub struct Kb {
    pub ontology: Ontology,
    pub bn: BayesNet,
}

impl Kb {
    /// Checks that every label only uses literals of the network's signature.
    pub fn new(ontology: Ontology, bn: BayesNet) -> Result<Self> {
        for ax in ontology.axioms() {
            ax.label.check(bn.signature())?;
        }
        Ok(Kb { ontology, bn })
    }

    pub fn with(&self, extra: impl IntoIterator<Item = VAxiom>) -> Kb {
        Kb {
            ontology: self.ontology.with(extra),
            bn: self.bn.clone(),
        }
    }
}

/// Finite interpretation over the domain `0..domain_size`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiniteInterpretation {
    pub domain_size: usize,
    pub concepts: BTreeMap<Symbol, BTreeSet<usize>>,
    pub roles: BTreeMap<Symbol, BTreeSet<(usize, usize)>>,
    pub individuals: BTreeMap<Symbol, usize>,
}

impl FiniteInterpretation {
    pub fn domain(&self) -> BTreeSet<usize> {
        (0..self.domain_size).collect()
    }

    fn individual(&self, a: &Symbol) -> Result<usize> {
        self.individuals
            .get(a)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(a.to_string()))
    }

    fn role(&self, r: &Symbol) -> Result<&BTreeSet<(usize, usize)>> {
        self.roles
            .get(r)
            .ok_or_else(|| Error::UnknownSymbol(r.to_string()))
    }

    /// Extension of `c`.
    pub fn interpret(&self, c: &Concept) -> Result<BTreeSet<usize>> {
        Ok(match c {
            Concept::Name(n) => self
                .concepts
                .get(n)
                .ok_or_else(|| Error::UnknownSymbol(n.to_string()))?
                .clone(),
            Concept::Not(inner) => {
                let ext = self.interpret(inner)?;
                self.domain().difference(&ext).copied().collect()
            }
            Concept::And(x, y) => {
                let (a, b) = (self.interpret(x)?, self.interpret(y)?);
                a.intersection(&b).copied().collect()
            }
            Concept::Or(x, y) => {
                let (a, b) = (self.interpret(x)?, self.interpret(y)?);
                a.union(&b).copied().collect()
            }
            Concept::Exists(r, inner) => {
                let ext = self.interpret(inner)?;
                self.role(r)?
                    .iter()
                    .filter(|(_, e)| ext.contains(e))
                    .map(|&(d, _)| d)
                    .collect()
            }
            Concept::Forall(r, inner) => {
                let ext = self.interpret(inner)?;
                let rel = self.role(r)?;
                self.domain()
                    .into_iter()
                    .filter(|d| {
                        rel.range((*d, 0)..(*d + 1, 0))
                            .all(|(_, e)| ext.contains(e))
                    })
                    .collect()
            }
        })
    }

    pub fn satisfies(&self, axiom: &Axiom) -> Result<bool> {
        Ok(match axiom {
            Axiom::Gci(c, d) => self.interpret(c)?.is_subset(&self.interpret(d)?),
            Axiom::ConceptAssertion(c, a) => self.interpret(c)?.contains(&self.individual(a)?),
            Axiom::RoleAssertion(r, a, b) => self
                .role(r)?
                .contains(&(self.individual(a)?, self.individual(b)?)),
        })
    }

    pub fn is_model(&self, axioms: &[Axiom]) -> Result<bool> {
        for ax in axioms {
            if !self.satisfies(ax)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
