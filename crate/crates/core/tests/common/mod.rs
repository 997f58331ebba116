#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::PathBuf;
use std::sync::Arc;

use balc::io::{parse_bn, parse_ontology};
use balc::ontology::{FiniteInterpretation, Symbol};
use balc::{
    Axiom, BayesNet, ComplexContext, Concept, Kb, Ontology, PrimitiveContext, Signature, VAxiom,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 1e-9;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn load_bn(name: &str) -> BayesNet {
    parse_bn(&read_fixture(name)).unwrap()
}

pub fn load_kb(onto: &str, bn: &str) -> Kb {
    let bn = load_bn(bn);
    let onto = parse_ontology(&read_fixture(onto), bn.signature()).unwrap();
    Kb::new(onto, bn).unwrap()
}

pub fn fig1() -> BayesNet {
    load_bn("fig1.bn")
}

pub fn ctx(sig: &Signature, text: &str) -> ComplexContext {
    balc::io::parse_context(text, sig).unwrap()
}

pub fn concept(text: &str) -> Concept {
    balc::io::parse_concept(text).unwrap()
}

// ---------------------------------------------------------------------------
// Classical oracle: type elimination over requirement sets.

fn nnf(c: &Concept) -> Concept {
    match c {
        Concept::Name(_) => c.clone(),
        Concept::Not(inner) => neg(inner),
        Concept::And(x, y) => Concept::And(Arc::new(nnf(x)), Arc::new(nnf(y))),
        Concept::Or(x, y) => Concept::Or(Arc::new(nnf(x)), Arc::new(nnf(y))),
        Concept::Exists(r, x) => Concept::Exists(r.clone(), Arc::new(nnf(x))),
        Concept::Forall(r, x) => Concept::Forall(r.clone(), Arc::new(nnf(x))),
    }
}

fn neg(c: &Concept) -> Concept {
    match c {
        Concept::Name(_) => Concept::Not(Arc::new(c.clone())),
        Concept::Not(inner) => nnf(inner),
        Concept::And(x, y) => Concept::Or(Arc::new(neg(x)), Arc::new(neg(y))),
        Concept::Or(x, y) => Concept::And(Arc::new(neg(x)), Arc::new(neg(y))),
        Concept::Exists(r, x) => Concept::Forall(r.clone(), Arc::new(neg(x))),
        Concept::Forall(r, x) => Concept::Exists(r.clone(), Arc::new(neg(x))),
    }
}

type Set = BTreeSet<Concept>;

struct TypeElimination {
    tbox: Vec<Concept>,
    memo: HashMap<Set, bool>,
}

impl TypeElimination {
    fn new(tbox: Vec<Concept>) -> Self {
        TypeElimination {
            tbox,
            memo: HashMap::new(),
        }
    }

    /// All clash-free Hintikka completions of `req` plus the TBox.
    fn expansions(&self, req: &Set) -> Vec<Set> {
        let mut start = req.clone();
        start.extend(self.tbox.iter().cloned());
        let mut out = BTreeSet::new();
        let mut stack = vec![start];
        'next: while let Some(mut set) = stack.pop() {
            loop {
                let mut grew = false;
                let ands: Vec<_> = set
                    .iter()
                    .filter_map(|c| match c {
                        Concept::And(x, y) => Some(((**x).clone(), (**y).clone())),
                        _ => None,
                    })
                    .collect();
                for (x, y) in ands {
                    grew |= set.insert(x);
                    grew |= set.insert(y);
                }
                if !grew {
                    break;
                }
            }
            for c in &set {
                if let Concept::Not(inner) = c {
                    if set.contains(&**inner) {
                        continue 'next;
                    }
                }
            }
            let open = set.iter().find_map(|c| match c {
                Concept::Or(x, y) if !set.contains(&**x) && !set.contains(&**y) => {
                    Some(((**x).clone(), (**y).clone()))
                }
                _ => None,
            });
            match open {
                Some((x, y)) => {
                    let mut left = set.clone();
                    left.insert(x);
                    set.insert(y);
                    stack.push(set);
                    stack.push(left);
                }
                None => {
                    out.insert(set);
                }
            }
        }
        out.into_iter().collect()
    }

    fn successors(h: &Set) -> Vec<Set> {
        h.iter()
            .filter_map(|c| match c {
                Concept::Exists(r, x) => {
                    let mut req: Set = h
                        .iter()
                        .filter_map(|d| match d {
                            Concept::Forall(s, y) if s == r => Some((**y).clone()),
                            _ => None,
                        })
                        .collect();
                    req.insert((**x).clone());
                    Some(req)
                }
                _ => None,
            })
            .collect()
    }

    /// Greatest fixpoint over every requirement set reachable from `root`.
    fn satisfiable(&mut self, root: &Set) -> bool {
        if let Some(&v) = self.memo.get(root) {
            return v;
        }
        let mut graph: BTreeMap<Set, Vec<Vec<Set>>> = BTreeMap::new();
        let mut todo = vec![root.clone()];
        while let Some(s) = todo.pop() {
            if graph.contains_key(&s) || self.memo.contains_key(&s) {
                continue;
            }
            let options: Vec<Vec<Set>> = self.expansions(&s).iter().map(Self::successors).collect();
            for succ in options.iter().flatten() {
                todo.push(succ.clone());
            }
            graph.insert(s, options);
        }
        let mut good: BTreeSet<Set> = graph.keys().cloned().collect();
        loop {
            let memo = &self.memo;
            let ok = |s: &Set, good: &BTreeSet<Set>| {
                memo.get(s).copied().unwrap_or_else(|| good.contains(s))
            };
            let dead: Vec<Set> = good
                .iter()
                .filter(|s| {
                    !graph[*s]
                        .iter()
                        .any(|succs| succs.iter().all(|t| ok(t, &good)))
                })
                .cloned()
                .collect();
            if dead.is_empty() {
                break;
            }
            for s in dead {
                good.remove(&s);
            }
        }
        for s in graph.keys() {
            self.memo.insert(s.clone(), good.contains(s));
        }
        self.memo[root]
    }

    fn abox(
        &mut self,
        reqs: Vec<Set>,
        roles: &[(Symbol, usize, usize)],
        seen: &mut HashSet<Vec<Set>>,
    ) -> bool {
        if !seen.insert(reqs.clone()) {
            return false;
        }
        let mut options = Vec::new();
        for req in &reqs {
            let opts: Vec<Set> = self
                .expansions(req)
                .into_iter()
                .filter(|h| Self::successors(h).iter().all(|s| self.satisfiable(s)))
                .collect();
            if opts.is_empty() {
                return false;
            }
            options.push(opts);
        }
        let mut choice = vec![0; reqs.len()];
        loop {
            let chosen: Vec<&Set> = choice.iter().zip(&options).map(|(&i, o)| &o[i]).collect();
            let mut next = reqs.clone();
            for (r, a, b) in roles {
                for c in chosen[*a] {
                    if let Concept::Forall(s, x) = c {
                        if s == r {
                            next[*b].insert((**x).clone());
                        }
                    }
                }
            }
            if next.iter().zip(&chosen).all(|(n, h)| n.is_subset(h)) {
                return true;
            }
            if self.abox(next, roles, seen) {
                return true;
            }
            let mut k = 0;
            loop {
                if k == choice.len() {
                    return false;
                }
                choice[k] += 1;
                if choice[k] < options[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
}

/// Independent decision procedure for classical ALC consistency.
pub fn oracle_consistent(axioms: &[Axiom]) -> bool {
    let mut tbox = Vec::new();
    let mut names: Vec<Symbol> = Vec::new();
    let index = |names: &mut Vec<Symbol>, a: &Symbol| match names.iter().position(|n| n == a) {
        Some(i) => i,
        None => {
            names.push(a.clone());
            names.len() - 1
        }
    };
    let mut asserted = Vec::new();
    let mut roles = Vec::new();
    for ax in axioms {
        match ax {
            Axiom::Gci(c, d) => tbox.push(Concept::Or(Arc::new(neg(c)), Arc::new(nnf(d)))),
            Axiom::ConceptAssertion(c, a) => {
                let i = index(&mut names, a);
                asserted.push((i, nnf(c)));
            }
            Axiom::RoleAssertion(r, a, b) => {
                let (i, j) = (index(&mut names, a), index(&mut names, b));
                roles.push((r.clone(), i, j));
            }
        }
    }
    let mut reqs = vec![Set::new(); names.len().max(1)];
    for (i, c) in asserted {
        reqs[i].insert(c);
    }
    TypeElimination::new(tbox).abox(reqs, &roles, &mut HashSet::new())
}

/// `O ⊨ C ⊑ D` classically.
pub fn oracle_subsumes(axioms: &[Axiom], c: &Concept, d: &Concept) -> bool {
    let mut ext = axioms.to_vec();
    ext.push(Axiom::concept(c.clone(), "__probe"));
    ext.push(Axiom::concept(Concept::not(d.clone()), "__probe"));
    !oracle_consistent(&ext)
}

/// `O ⊨ C(a)` classically.
pub fn oracle_instance(axioms: &[Axiom], c: &Concept, a: &str) -> bool {
    let mut ext = axioms.to_vec();
    ext.push(Axiom::concept(Concept::not(c.clone()), a));
    !oracle_consistent(&ext)
}

// ---------------------------------------------------------------------------
// Exhaustive finite model search.

fn symbols(axioms: &[Axiom]) -> (BTreeSet<Symbol>, BTreeSet<Symbol>, BTreeSet<Symbol>) {
    let (mut cs, mut rs, mut is) = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
    cs.insert(Symbol::from(balc::ontology::RESERVED_CONCEPT));
    for ax in axioms {
        match ax {
            Axiom::Gci(c, d) => {
                c.collect_symbols(&mut cs, &mut rs);
                d.collect_symbols(&mut cs, &mut rs);
            }
            Axiom::ConceptAssertion(c, a) => {
                c.collect_symbols(&mut cs, &mut rs);
                is.insert(a.clone());
            }
            Axiom::RoleAssertion(r, a, b) => {
                rs.insert(r.clone());
                is.insert(a.clone());
                is.insert(b.clone());
            }
        }
    }
    (cs, rs, is)
}

/// Searches every interpretation with at most `max_domain` elements. Returns
/// `None` when the search space exceeds `budget` interpretations.
pub fn small_model(
    axioms: &[Axiom],
    max_domain: usize,
    budget: u64,
) -> Option<Option<FiniteInterpretation>> {
    let (cs, rs, is) = symbols(axioms);
    for n in 1..=max_domain {
        let bits = cs.len() * n + rs.len() * n * n;
        let size = (1u64 << bits).saturating_mul((n as u64).pow(is.len() as u32));
        if bits >= 40 || size > budget {
            return None;
        }
        for code in 0..(1u64 << bits) {
            let mut bit = 0;
            let mut interp = FiniteInterpretation {
                domain_size: n,
                ..Default::default()
            };
            for c in &cs {
                let ext = (0..n).filter(|i| code >> (bit + i) & 1 == 1).collect();
                bit += n;
                interp.concepts.insert(c.clone(), ext);
            }
            for r in &rs {
                let ext = (0..n * n)
                    .filter(|i| code >> (bit + i) & 1 == 1)
                    .map(|i| (i / n, i % n))
                    .collect();
                bit += n * n;
                interp.roles.insert(r.clone(), ext);
            }
            for mut assign in 0..(n as u64).pow(is.len() as u32) {
                for a in &is {
                    interp
                        .individuals
                        .insert(a.clone(), (assign % n as u64) as usize);
                    assign /= n as u64;
                }
                if interp.is_model(axioms).unwrap() {
                    return Some(Some(interp));
                }
            }
        }
    }
    Some(None)
}

// ---------------------------------------------------------------------------
// Probability oracles by world enumeration.

/// Worlds of positive probability.
pub fn positive_worlds(bn: &BayesNet) -> Vec<(balc::World, f64)> {
    bn.weighted_worlds().filter(|(_, p)| *p > 0.0).collect()
}

pub fn oracle_kb_consistent(kb: &Kb) -> bool {
    positive_worlds(&kb.bn)
        .iter()
        .all(|(w, _)| oracle_consistent(&kb.ontology.restriction(w)))
}

/// Probability of `(C ⊑ D)^κ` given `λ`, summed over a minimal model built
/// from one interpretation per positive world.
pub fn oracle_conditional_subsumption(
    kb: &Kb,
    c: &Concept,
    d: &Concept,
    kappa: &ComplexContext,
    lambda: &ComplexContext,
) -> f64 {
    if !oracle_kb_consistent(kb) {
        return 1.0;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, p) in positive_worlds(&kb.bn) {
        if !w.satisfies(lambda) {
            continue;
        }
        den += p;
        if !w.satisfies(kappa) || oracle_subsumes(&kb.ontology.restriction(&w), c, d) {
            num += p;
        }
    }
    num / den
}

pub fn oracle_conditional_instance(
    kb: &Kb,
    c: &Concept,
    a: &str,
    kappa: &ComplexContext,
    lambda: &ComplexContext,
) -> f64 {
    if !oracle_kb_consistent(kb) {
        return 1.0;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, p) in positive_worlds(&kb.bn) {
        if !w.satisfies(lambda) {
            continue;
        }
        den += p;
        if !w.satisfies(kappa) || oracle_instance(&kb.ontology.restriction(&w), c, a) {
            num += p;
        }
    }
    num / den
}

// ---------------------------------------------------------------------------
// Random knowledge bases.

pub const CONCEPT_NAMES: [&str; 3] = ["A", "B", "C"];
pub const ROLE_NAMES: [&str; 2] = ["r", "s"];
pub const INDIVIDUALS: [&str; 2] = ["a", "b"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bn(rng: &mut impl Rng) -> BayesNet {
    let n = rng.gen_range(1..=3);
    let sig = Signature::boolean(["X", "Y", "Z"].into_iter().take(n)).unwrap();
    let mut parents = Vec::new();
    let mut cpts = Vec::new();
    for v in 0..n {
        let ps: Vec<usize> = (0..v).filter(|_| rng.gen_bool(0.4)).collect();
        let rows = (0..1usize << ps.len())
            .map(|_| {
                let p = *[0.0, 0.2, 0.5, 0.7, 1.0].choose(rng).unwrap();
                vec![p, 1.0 - p]
            })
            .collect();
        parents.push(ps);
        cpts.push(rows);
    }
    BayesNet::new(sig, parents, cpts).unwrap()
}

pub fn random_concept(rng: &mut impl Rng, depth: usize) -> Concept {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0 => Concept::top(),
            1 => Concept::bottom(),
            2..=3 => Concept::not(Concept::name(CONCEPT_NAMES.choose(rng).unwrap())),
            _ => Concept::name(CONCEPT_NAMES.choose(rng).unwrap()),
        };
    }
    let role = *ROLE_NAMES.choose(rng).unwrap();
    match rng.gen_range(0..5) {
        0 => Concept::not(random_concept(rng, depth - 1)),
        1 => Concept::and(
            random_concept(rng, depth - 1),
            random_concept(rng, depth - 1),
        ),
        2 => Concept::or(
            random_concept(rng, depth - 1),
            random_concept(rng, depth - 1),
        ),
        3 => Concept::exists(role, random_concept(rng, depth - 1)),
        _ => Concept::forall(role, random_concept(rng, depth - 1)),
    }
}

pub fn random_primitive(rng: &mut impl Rng, sig: &Signature) -> PrimitiveContext {
    let mut kappa = PrimitiveContext::empty();
    for v in 0..sig.len() {
        if rng.gen_bool(0.35) {
            kappa.insert(balc::Literal::new(v, rng.gen_range(0..2)));
        }
    }
    kappa
}

pub fn random_context(rng: &mut impl Rng, sig: &Signature) -> ComplexContext {
    match rng.gen_range(0..10) {
        0..=2 => ComplexContext::top(),
        3..=7 => random_primitive(rng, sig).into(),
        _ => ComplexContext::from_members([random_primitive(rng, sig), random_primitive(rng, sig)]),
    }
}

pub fn random_kb(seed: u64) -> Kb {
    let mut rng = rng(seed);
    let bn = random_bn(&mut rng);
    let sig = bn.signature().clone();
    let n = rng.gen_range(1..=6);
    let mut onto = Ontology::default();
    for _ in 0..n {
        let axiom = match rng.gen_range(0..10) {
            0..=5 => Axiom::gci(random_concept(&mut rng, 2), random_concept(&mut rng, 3)),
            6..=8 => Axiom::concept(
                random_concept(&mut rng, 3),
                INDIVIDUALS.choose(&mut rng).unwrap(),
            ),
            _ => Axiom::role(
                ROLE_NAMES.choose(&mut rng).unwrap(),
                INDIVIDUALS.choose(&mut rng).unwrap(),
                INDIVIDUALS.choose(&mut rng).unwrap(),
            ),
        };
        onto.push(VAxiom::new(axiom, random_context(&mut rng, &sig)));
    }
    Kb::new(onto, bn).unwrap()
}

/// A query drawn alongside a random KB.
pub struct RandomQuery {
    pub c: Concept,
    pub d: Concept,
    pub kappa: ComplexContext,
    pub lambda: ComplexContext,
}

pub fn random_query(seed: u64, sig: &Signature) -> RandomQuery {
    let mut rng = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    RandomQuery {
        c: random_concept(&mut rng, 2),
        d: random_concept(&mut rng, 2),
        kappa: random_context(&mut rng, sig),
        lambda: random_context(&mut rng, sig),
    }
}

/// The fixed randomized corpus.
pub fn corpus() -> impl Iterator<Item = (u64, Kb)> {
    (0..200u64).map(|seed| (seed, random_kb(seed)))
}
