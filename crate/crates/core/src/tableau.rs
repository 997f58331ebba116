//! Context-labelled tableau computing the inconsistency context of a KB.
//!
//! Every assertion carries a complex context; a rule only adds an assertion
//! when its label says something new. Each saturated ABox contributes the
//! disjunction of its clash contexts and the result is their conjunction.
//!
//! The default strategy processes ABoxes depth first and relativizes each one
//! to the worlds that can still change the answer: those in the running
//! conjunction and not already covered by the ABox's own clashes. Rules whose
//! effect lies entirely outside that region are skipped and ABoxes with an
//! empty region are dropped. [`Strategy::Full`] applies the rules exactly as
//! stated, without pruning.
//!
//! Assertions also record the ⊔-forks they depend on. When every world of a
//! region is closed by clashes that do not depend on the latest fork, the
//! other branch of that fork would close the same way and is skipped.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::context::{ComplexContext, Signature};
use crate::error::{Error, ResourceLimit, Result};
use crate::ontology::{Axiom, Concept, Kb, Symbol, IMPLICIT_INDIVIDUAL};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Individual {
    Named(Symbol),
    Fresh(u32),
}

impl fmt::Display for Individual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Individual::Named(n) => f.write_str(n),
            Individual::Fresh(k) => write!(f, "__b{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Assertion {
    Concept(Concept, Individual),
    Role(Symbol, Individual, Individual),
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assertion::Concept(c, a) => match c {
                Concept::Name(_) | Concept::Not(_) => write!(f, "{c}({a})"),
                _ => write!(f, "({c})({a})"),
            },
            Assertion::Role(r, a, b) => write!(f, "{r}({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledAssertion {
    pub assertion: Assertion,
    pub label: ComplexContext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Gci,
    And,
    Or,
    Forall,
    Exists,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Gci => "gci",
            Rule::And => "and",
            Rule::Or => "or",
            Rule::Forall => "forall",
            Rule::Exists => "exists",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Relativized,
    Full,
}

#[derive(Debug, Clone)]
pub struct TableauConfig {
    pub strategy: Strategy,
    pub max_rule_applications: usize,
    pub max_aboxes: usize,
    pub trace: bool,
}

impl Default for TableauConfig {
    fn default() -> Self {
        TableauConfig {
            strategy: Strategy::Relativized,
            max_rule_applications: 10_000,
            max_aboxes: 4_096,
            trace: false,
        }
    }
}

/// Fork levels an assertion depends on.
type Deps = BTreeSet<u32>;

/// A set of labelled assertions with at most one label per assertion.
#[derive(Debug, Clone)]
pub struct LabelledAbox {
    id: String,
    assertions: Vec<LabelledAssertion>,
    deps: Vec<Deps>,
    /// Per assertion, the rules found not to apply since its label last grew.
    settled: Vec<u8>,
    index: HashMap<Assertion, usize>,
    individuals: Vec<Individual>,
    creator: HashMap<Individual, Individual>,
    concepts_of: HashMap<Individual, Vec<usize>>,
    edges_of: HashMap<Individual, Vec<usize>>,
    next_fresh: u32,
    forks: u32,
    clash: ComplexContext,
    clash_deps: Deps,
    depth: u32,
    applications: usize,
    /// Individuals before this index carry every GCI within the current
    /// region; regions only shrink during a saturation.
    gci_done: usize,
}

impl LabelledAbox {
    pub fn new(id: impl Into<String>) -> Self {
        LabelledAbox {
            id: id.into(),
            assertions: Vec::new(),
            deps: Vec::new(),
            settled: Vec::new(),
            index: HashMap::new(),
            individuals: Vec::new(),
            creator: HashMap::new(),
            concepts_of: HashMap::new(),
            edges_of: HashMap::new(),
            next_fresh: 0,
            forks: 0,
            clash: ComplexContext::bottom(),
            clash_deps: Deps::new(),
            depth: 0,
            applications: 0,
            gci_done: 0,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn assertions(&self) -> &[LabelledAssertion] {
        &self.assertions
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn label(&self, assertion: &Assertion) -> Option<&ComplexContext> {
        self.index
            .get(assertion)
            .map(|&i| &self.assertions[i].label)
    }

    /// Ancestors through the individuals that generated `y`, nearest first.
    pub fn ancestors(&self, y: &Individual) -> Vec<Individual> {
        let mut out = Vec::new();
        let mut cur = self.creator.get(y);
        while let Some(x) = cur {
            out.push(x.clone());
            cur = self.creator.get(x);
        }
        out
    }

    pub fn fresh_individual(&mut self, creator: &Individual) -> Individual {
        let b = Individual::Fresh(self.next_fresh);
        self.next_fresh += 1;
        self.creator.insert(b.clone(), creator.clone());
        self.note_individual(&b);
        b
    }

    fn note_individual(&mut self, a: &Individual) {
        if !self.concepts_of.contains_key(a) {
            self.individuals.push(a.clone());
            self.concepts_of.insert(a.clone(), Vec::new());
            self.edges_of.insert(a.clone(), Vec::new());
        }
    }

    /// Adds `assertion` under `label`, or disjoins `label` into the existing one.
    pub fn oplus(&mut self, assertion: Assertion, label: ComplexContext) {
        self.add(assertion, label, Deps::new());
    }

    fn add(&mut self, assertion: Assertion, label: ComplexContext, deps: Deps) {
        if let Some(&i) = self.index.get(&assertion) {
            let merged = self.assertions[i].label.disjoin(&label);
            self.assertions[i].label = merged;
            self.deps[i].extend(deps);
            self.settled[i] = 0;
            if let Assertion::Role(_, a, _) = &self.assertions[i].assertion {
                self.unsettle_foralls(&a.clone());
            }
            self.update_clash(i);
            return;
        }
        let i = self.assertions.len();
        match &assertion {
            Assertion::Concept(_, a) => {
                self.note_individual(a);
                self.concepts_of.get_mut(a).expect("noted").push(i);
            }
            Assertion::Role(_, a, b) => {
                self.note_individual(a);
                self.note_individual(b);
                self.edges_of.get_mut(a).expect("noted").push(i);
                self.unsettle_foralls(&a.clone());
            }
        }
        self.index.insert(assertion.clone(), i);
        self.assertions.push(LabelledAssertion { assertion, label });
        self.deps.push(deps);
        self.settled.push(0);
        self.update_clash(i);
    }

    fn unsettle_foralls(&mut self, a: &Individual) {
        for &k in &self.concepts_of[a] {
            self.settled[k] &= !FORALL;
        }
    }

    fn update_clash(&mut self, i: usize) {
        let Assertion::Concept(c, a) = &self.assertions[i].assertion else {
            return;
        };
        let partner = match c {
            Concept::Name(_) => Concept::not(c.clone()),
            Concept::Not(inner) if matches!(**inner, Concept::Name(_)) => (**inner).clone(),
            _ => return,
        };
        let partner = Assertion::Concept(partner, a.clone());
        if let Some(&j) = self.index.get(&partner) {
            let term = self.assertions[i].label.conjoin(&self.assertions[j].label);
            if term.is_satisfiable() {
                self.clash = self.clash.disjoin(&term);
                let (di, dj) = (self.deps[i].clone(), self.deps[j].clone());
                self.clash_deps.extend(di);
                self.clash_deps.extend(dj);
            }
        }
    }

    /// Concept assertions grouped by individual in creation order, oldest
    /// first within an individual.
    fn concept_order(&self) -> Vec<usize> {
        self.individuals
            .iter()
            .flat_map(|a| self.concepts_of[a].iter().copied())
            .collect()
    }

    /// Disjunction of `φ ∧ ψ` over all pairs `A(x)^φ`, `¬A(x)^ψ`.
    pub fn clash_context(&self) -> &ComplexContext {
        &self.clash
    }
}

const AND: u8 = 1;
const OR: u8 = 2;
const FORALL: u8 = 4;

/// `α^φ` is insertable iff `φ` does not entail the label `α` already carries,
/// evaluated within `region`. Unsatisfiable labels are never insertable.
pub fn insertable(
    abox: &LabelledAbox,
    assertion: &Assertion,
    label: &ComplexContext,
    region: &ComplexContext,
    sig: &Signature,
) -> bool {
    let phi = relativize(label, region);
    if !phi.is_satisfiable() {
        return false;
    }
    match abox.label(assertion) {
        None => true,
        Some(psi) => !phi.entails(psi, sig),
    }
}

fn relativize(label: &ComplexContext, region: &ComplexContext) -> ComplexContext {
    if region.is_top() {
        label.clone()
    } else {
        label.conjoin(region)
    }
}

/// A generated `y` is blocked by an ancestor `x` when every concept assertion
/// `C(y)^ψ` has a matching `C(x)^φ` with `ψ` entailing `φ` within `region`.
pub fn is_blocked(
    abox: &LabelledAbox,
    y: &Individual,
    region: &ComplexContext,
    sig: &Signature,
) -> bool {
    if !matches!(y, Individual::Fresh(_)) {
        return false;
    }
    let own = &abox.concepts_of[y];
    abox.ancestors(y).iter().any(|x| {
        own.iter().all(|&i| {
            let LabelledAssertion { assertion, label } = &abox.assertions[i];
            let Assertion::Concept(c, _) = assertion else {
                unreachable!()
            };
            let psi = relativize(label, region);
            match abox.label(&Assertion::Concept(c.clone(), x.clone())) {
                Some(phi) => psi.entails(phi, sig),
                None => !psi.is_satisfiable(),
            }
        })
    })
}

/// One rule application.
#[derive(Debug, Clone)]
pub struct Application {
    pub rule: Rule,
    pub target: String,
    pub label: ComplexContext,
    /// Present when the ⊔-rule forked: the second copy.
    pub fork: Option<LabelledAbox>,
}

/// Immutable inputs shared by every ABox of one saturation.
pub struct Rules<'a> {
    sig: &'a Signature,
    gcis: Vec<(Concept, ComplexContext)>,
}

impl<'a> Rules<'a> {
    pub fn new(kb: &'a Kb) -> Self {
        let gcis = kb
            .ontology
            .axioms()
            .iter()
            .filter_map(|ax| match &ax.axiom {
                Axiom::Gci(c, d) => Some((Concept::or(c.negated_nnf(), d.nnf()), ax.label.clone())),
                _ => None,
            })
            .collect();
        Rules {
            sig: kb.bn.signature(),
            gcis,
        }
    }

    /// The ABox holding the KB's assertions, or `⊤(a₀)` if it has none.
    pub fn initial_abox(&self, kb: &Kb) -> LabelledAbox {
        let mut abox = LabelledAbox::new("0");
        for ax in kb.ontology.axioms() {
            if !ax.label.is_satisfiable() {
                continue;
            }
            match &ax.axiom {
                Axiom::Gci(..) => {}
                Axiom::ConceptAssertion(c, a) => abox.oplus(
                    Assertion::Concept(c.nnf(), Individual::Named(a.clone())),
                    ax.label.clone(),
                ),
                Axiom::RoleAssertion(r, a, b) => abox.oplus(
                    Assertion::Role(
                        r.clone(),
                        Individual::Named(a.clone()),
                        Individual::Named(b.clone()),
                    ),
                    ax.label.clone(),
                ),
            }
        }
        if !kb.ontology.has_assertions() {
            abox.oplus(
                Assertion::Concept(
                    Concept::top(),
                    Individual::Named(IMPLICIT_INDIVIDUAL.into()),
                ),
                ComplexContext::top(),
            );
        }
        abox
    }

    fn insertable(
        &self,
        abox: &LabelledAbox,
        a: &Assertion,
        label: &ComplexContext,
        region: &ComplexContext,
    ) -> bool {
        insertable(abox, a, label, region, self.sig)
    }

    /// Applies the first applicable rule to `abox` in place, in the order
    /// ⊑, ⊓, ∀, ∃, ⊔. Within a rule, individuals are visited in creation
    /// order and each individual's assertions oldest first.
    pub fn step(&self, abox: &mut LabelledAbox, region: &ComplexContext) -> Option<Application> {
        self.gci_rule(abox, region)
            .or_else(|| self.and_rule(abox, region))
            .or_else(|| self.forall_rule(abox, region))
            .or_else(|| self.exists_rule(abox, region))
            .or_else(|| self.or_rule(abox, region))
    }

    fn gci_rule(&self, abox: &mut LabelledAbox, region: &ComplexContext) -> Option<Application> {
        while abox.gci_done < abox.individuals.len() {
            let a = abox.individuals[abox.gci_done].clone();
            for (g, phi) in &self.gcis {
                let target = Assertion::Concept(g.clone(), a.clone());
                if self.insertable(abox, &target, phi, region) {
                    let app = applied(Rule::Gci, &target, phi);
                    abox.oplus(target, phi.clone());
                    return Some(app);
                }
            }
            abox.gci_done += 1;
        }
        None
    }

    fn and_rule(&self, abox: &mut LabelledAbox, region: &ComplexContext) -> Option<Application> {
        for i in abox.concept_order() {
            let LabelledAssertion { assertion, label } = &abox.assertions[i];
            let Assertion::Concept(Concept::And(c, d), a) = assertion else {
                continue;
            };
            if abox.settled[i] & AND != 0 {
                continue;
            }
            let left = Assertion::Concept((**c).clone(), a.clone());
            let right = Assertion::Concept((**d).clone(), a.clone());
            if self.insertable(abox, &left, label, region)
                || self.insertable(abox, &right, label, region)
            {
                let (app, phi) = (applied(Rule::And, assertion, label), label.clone());
                let deps = abox.deps[i].clone();
                abox.add(left, phi.clone(), deps.clone());
                abox.add(right, phi, deps);
                return Some(app);
            }
            abox.settled[i] |= AND;
        }
        None
    }

    fn or_rule(&self, abox: &mut LabelledAbox, region: &ComplexContext) -> Option<Application> {
        if let Some(app) = self.forced_or(abox, region) {
            return Some(app);
        }
        for i in abox.concept_order() {
            let LabelledAssertion { assertion, label } = &abox.assertions[i];
            let Assertion::Concept(Concept::Or(c, d), a) = assertion else {
                continue;
            };
            if abox.settled[i] & OR != 0 {
                continue;
            }
            let left = Assertion::Concept((**c).clone(), a.clone());
            let right = Assertion::Concept((**d).clone(), a.clone());
            if self.insertable(abox, &left, label, region)
                && self.insertable(abox, &right, label, region)
            {
                let (mut app, phi) = (applied(Rule::Or, assertion, label), label.clone());
                let mut deps = abox.deps[i].clone();
                // `⊤` is `__T ⊔ ¬__T`; taking `__T` everywhere loses no model.
                if assertion_is_top(assertion) {
                    abox.add(left, phi, deps);
                    return Some(app);
                }
                deps.insert(abox.depth);
                abox.depth += 1;
                abox.forks += 1;
                let mut other = abox.clone();
                other.id = format!("{}.{}", abox.id, 2 * abox.forks);
                other.forks = 0;
                abox.id = format!("{}.{}", abox.id, 2 * abox.forks - 1);
                abox.forks = 0;
                abox.add(left, phi.clone(), deps.clone());
                other.add(right, phi, deps);
                app.fork = Some(other);
                return Some(app);
            }
        }
        None
    }

    /// A disjunct whose complementary literal already holds wherever the
    /// disjunction does cannot be chosen, so the other one is added without
    /// forking.
    fn forced_or(&self, abox: &mut LabelledAbox, region: &ComplexContext) -> Option<Application> {
        for i in abox.concept_order() {
            let LabelledAssertion { assertion, label } = &abox.assertions[i];
            let Assertion::Concept(Concept::Or(c, d), a) = assertion else {
                continue;
            };
            if abox.settled[i] & OR != 0 {
                continue;
            }
            let left = Assertion::Concept((**c).clone(), a.clone());
            let right = Assertion::Concept((**d).clone(), a.clone());
            if !self.insertable(abox, &left, label, region)
                || !self.insertable(abox, &right, label, region)
            {
                abox.settled[i] |= OR;
                continue;
            }
            let phi = relativize(label, region);
            let closed = |x: &Concept| -> Option<usize> {
                if !x.is_literal() {
                    return None;
                }
                let j = *abox
                    .index
                    .get(&Assertion::Concept(x.negated_nnf(), a.clone()))?;
                phi.entails(&abox.assertions[j].label, self.sig)
                    .then_some(j)
            };
            let (target, j) = match (closed(c), closed(d)) {
                (Some(j), _) => (right, j),
                (None, Some(j)) => (left, j),
                (None, None) => continue,
            };
            let (app, phi) = (applied(Rule::Or, assertion, label), label.clone());
            let deps = abox.deps[i].union(&abox.deps[j]).copied().collect();
            abox.add(target, phi, deps);
            return Some(app);
        }
        None
    }

    fn forall_rule(&self, abox: &mut LabelledAbox, region: &ComplexContext) -> Option<Application> {
        for i in abox.concept_order() {
            let LabelledAssertion {
                assertion,
                label: phi,
            } = &abox.assertions[i];
            let Assertion::Concept(Concept::Forall(r, c), a) = assertion else {
                continue;
            };
            if abox.settled[i] & FORALL != 0 {
                continue;
            }
            for &j in &abox.edges_of[a] {
                let LabelledAssertion {
                    assertion: edge,
                    label: psi,
                } = &abox.assertions[j];
                let Assertion::Role(s, _, b) = edge else {
                    unreachable!()
                };
                if s != r {
                    continue;
                }
                let chi = phi.conjoin(psi);
                let target = Assertion::Concept((**c).clone(), b.clone());
                if self.insertable(abox, &target, &chi, region) {
                    let app = applied(Rule::Forall, assertion, phi);
                    let deps = abox.deps[i].union(&abox.deps[j]).copied().collect();
                    abox.add(target, chi, deps);
                    return Some(app);
                }
            }
            abox.settled[i] |= FORALL;
        }
        None
    }

    fn exists_rule(&self, abox: &mut LabelledAbox, region: &ComplexContext) -> Option<Application> {
        let mut blocked: HashMap<Individual, bool> = HashMap::new();
        for i in abox.concept_order() {
            let LabelledAssertion {
                assertion,
                label: phi,
            } = &abox.assertions[i];
            let Assertion::Concept(Concept::Exists(r, c), a) = assertion else {
                continue;
            };
            if !relativize(phi, region).is_satisfiable() {
                continue;
            }
            let is_blocked = *blocked
                .entry(a.clone())
                .or_insert_with(|| is_blocked(abox, a, region, self.sig));
            if is_blocked {
                continue;
            }
            let witnessed = abox.edges_of[a].iter().any(|&j| {
                let Assertion::Role(s, _, w) = &abox.assertions[j].assertion else {
                    unreachable!()
                };
                s == r
                    && !self.insertable(abox, &abox.assertions[j].assertion, phi, region)
                    && !self.insertable(
                        abox,
                        &Assertion::Concept((**c).clone(), w.clone()),
                        phi,
                        region,
                    )
            });
            if witnessed {
                continue;
            }
            let (app, phi, r, c, a) = (
                applied(Rule::Exists, assertion, phi),
                phi.clone(),
                r.clone(),
                (**c).clone(),
                a.clone(),
            );
            let deps = abox.deps[i].clone();
            let b = abox.fresh_individual(&a);
            abox.add(Assertion::Role(r, a, b.clone()), phi.clone(), deps.clone());
            abox.add(Assertion::Concept(c, b), phi, deps);
            return Some(app);
        }
        None
    }
}

fn assertion_is_top(a: &Assertion) -> bool {
    matches!(a, Assertion::Concept(c, _) if c.is_top())
}

fn applied(rule: Rule, target: &Assertion, label: &ComplexContext) -> Application {
    Application {
        rule,
        target: target.to_string(),
        label: label.clone(),
        fork: None,
    }
}

/// Result of a saturation run.
#[derive(Debug, Clone)]
pub struct TableauState {
    /// Saturated ABoxes with the region each was saturated within.
    pub aboxes: Vec<(LabelledAbox, ComplexContext)>,
    /// ABoxes discarded because they could no longer affect the result.
    pub pruned: usize,
    pub inconsistency_context: ComplexContext,
    pub trace: Vec<String>,
}

/// Applies one rule to a copy of `abox`; returns the replacing ABoxes.
pub fn apply_rule(
    kb: &Kb,
    abox: &LabelledAbox,
    region: &ComplexContext,
) -> Option<Vec<LabelledAbox>> {
    let rules = Rules::new(kb);
    let mut a = abox.clone();
    let app = rules.step(&mut a, region)?;
    Some(std::iter::once(a).chain(app.fork).collect())
}

/// How a subtree of the search ended.
enum Outcome {
    /// Every world of the region was closed by clashes with these fork
    /// dependencies.
    Closed(Deps),
    /// Some ABox was saturated or the subtree could not be skipped.
    Open,
    /// The running conjunction became unsatisfiable.
    Done,
}

struct Search<'a> {
    kb: &'a Kb,
    rules: Rules<'a>,
    config: &'a TableauConfig,
    relativized: bool,
    phi: ComplexContext,
    created: usize,
    state: TableauState,
}

/// What happened to one ABox before it forked or ended.
enum Run {
    Forked(Box<LabelledAbox>, Box<LabelledAbox>, u32),
    Ended(Outcome),
}

/// A ⊔-fork whose second branch is pending or running.
struct Fork {
    level: u32,
    other: Option<LabelledAbox>,
    first: Option<Outcome>,
}

impl Search<'_> {
    /// Applies rules to `abox` until it forks, closes or saturates.
    fn run(&mut self, mut abox: LabelledAbox) -> Result<Run> {
        let sig = self.kb.bn.signature();
        let mut region = ComplexContext::top();
        let mut seen_clash = None;
        loop {
            if self.relativized {
                if !self.phi.is_satisfiable() {
                    self.state.pruned += 1;
                    return Ok(Run::Ended(Outcome::Done));
                }
                if seen_clash.as_ref() != Some(abox.clash_context()) {
                    region = self.phi.conjoin(&abox.clash_context().negate(sig));
                    seen_clash = Some(abox.clash_context().clone());
                    if !region.is_satisfiable() {
                        self.state.pruned += 1;
                        return Ok(Run::Ended(Outcome::Closed(abox.clash_deps)));
                    }
                }
            }
            let before = abox.id.clone();
            let Some(app) = self.rules.step(&mut abox, &region) else {
                break;
            };
            abox.applications += 1;
            if self.config.trace {
                self.state.trace.push(format!(
                    "rule={} abox={} target={} label={}",
                    app.rule,
                    before,
                    app.target,
                    app.label.display(sig)
                ));
            }
            if abox.applications > self.config.max_rule_applications {
                return Err(Error::ResourceLimit(ResourceLimit::RuleApplications {
                    abox: self.created,
                    limit: self.config.max_rule_applications,
                }));
            }
            if let Some(other) = app.fork {
                self.created += 1;
                if self.created > self.config.max_aboxes {
                    return Err(Error::ResourceLimit(ResourceLimit::Aboxes {
                        limit: self.config.max_aboxes,
                    }));
                }
                let level = other.depth - 1;
                return Ok(Run::Forked(Box::new(abox), Box::new(other), level));
            }
        }
        self.phi = self.phi.conjoin(abox.clash_context());
        self.state.aboxes.push((abox, region));
        Ok(Run::Ended(Outcome::Open))
    }

    /// Depth-first search over the fork tree; the first branch of a fork is
    /// explored before the second.
    fn explore(&mut self, initial: LabelledAbox) -> Result<()> {
        let mut forks: Vec<Fork> = Vec::new();
        let mut current = initial;
        loop {
            let mut outcome = match self.run(current)? {
                Run::Forked(first, other, level) => {
                    forks.push(Fork {
                        level,
                        other: Some(*other),
                        first: None,
                    });
                    current = *first;
                    continue;
                }
                Run::Ended(outcome) => outcome,
            };
            loop {
                let Some(fork) = forks.last_mut() else {
                    return Ok(());
                };
                let level = fork.level;
                match fork.other.take() {
                    Some(other) => match outcome {
                        Outcome::Done => {
                            self.state.pruned += 1;
                            forks.pop();
                        }
                        Outcome::Closed(ref deps) if !deps.contains(&level) => {
                            self.state.pruned += 1;
                            forks.pop();
                        }
                        first => {
                            fork.first = Some(first);
                            current = other;
                            break;
                        }
                    },
                    None => {
                        let first = fork.first.take().expect("first branch finished");
                        forks.pop();
                        outcome = match (first, outcome) {
                            (Outcome::Closed(mut deps), Outcome::Closed(more)) => {
                                deps.extend(more);
                                deps.remove(&level);
                                Outcome::Closed(deps)
                            }
                            (_, Outcome::Done) => Outcome::Done,
                            _ => Outcome::Open,
                        };
                    }
                }
            }
        }
    }
}

/// Expands ABoxes until no rule applies.
pub fn saturate(kb: &Kb, config: &TableauConfig) -> Result<TableauState> {
    let rules = Rules::new(kb);
    let initial = rules.initial_abox(kb);
    let mut search = Search {
        kb,
        rules,
        config,
        relativized: config.strategy == Strategy::Relativized,
        phi: ComplexContext::top(),
        created: 1,
        state: TableauState {
            aboxes: Vec::new(),
            pruned: 0,
            inconsistency_context: ComplexContext::top(),
            trace: Vec::new(),
        },
    };
    search.explore(initial)?;
    search.state.inconsistency_context = search.phi;
    Ok(search.state)
}

/// The context of exactly those worlds whose restriction is inconsistent.
pub fn inconsistency_context(kb: &Kb, config: &TableauConfig) -> Result<ComplexContext> {
    saturate(kb, config).map(|s| s.inconsistency_context)
}
