//! Primitive and complex contexts over multi-valued random variables.
//!
//! A [`PrimitiveContext`] is a conjunction of variable/value literals and a
//! [`ComplexContext`] is a disjunction of primitive contexts. Literals refer
//! to variables and values by their position in a [`Signature`], so contexts
//! are only meaningful together with the signature they were built against.
//!
//! Complex contexts are kept in a canonical form: inconsistent members are
//! dropped and so is every member that is a superset of another member. The
//! empty set of members is bottom (no world satisfies it) and the singleton
//! containing the empty primitive context is top.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Ordered list of variables, each with an ordered, non-empty value domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    vars: Vec<Variable>,
    by_name: HashMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Variable {
    name: String,
    values: Vec<String>,
}

impl Signature {
    pub fn new<N, V>(vars: impl IntoIterator<Item = (N, V)>) -> Result<Self>
    where
        N: Into<String>,
        V: IntoIterator,
        V::Item: Into<String>,
    {
        let mut sig = Signature {
            vars: Vec::new(),
            by_name: HashMap::new(),
        };
        for (name, values) in vars {
            sig.push(name.into(), values.into_iter().map(Into::into).collect())?;
        }
        Ok(sig)
    }

    /// Builds a signature of two-valued variables with domain `t f`.
    pub fn boolean<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(names.into_iter().map(|n| (n.into(), ["t", "f"])))
    }

    fn push(&mut self, name: String, values: Vec<String>) -> Result<()> {
        if self.by_name.contains_key(&name) {
            return Err(Error::Signature(format!(
                "variable `{name}` declared twice"
            )));
        }
        if values.is_empty() {
            return Err(Error::Signature(format!(
                "variable `{name}` has an empty domain"
            )));
        }
        let mut seen = BTreeSet::new();
        for v in &values {
            if !seen.insert(v) {
                return Err(Error::Signature(format!(
                    "value `{v}` repeated in the domain of `{name}`"
                )));
            }
        }
        self.by_name.insert(name.clone(), self.vars.len());
        self.vars.push(Variable { name, values });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn var_name(&self, var: usize) -> &str {
        &self.vars[var].name
    }

    pub fn domain(&self, var: usize) -> &[String] {
        &self.vars[var].values
    }

    pub fn domain_size(&self, var: usize) -> usize {
        self.vars[var].values.len()
    }

    pub fn value_index(&self, var: usize, value: &str) -> Option<usize> {
        self.vars[var].values.iter().position(|v| v == value)
    }

    /// True when the variable's domain is exactly `{t, f}` (in any order).
    pub fn is_boolean(&self, var: usize) -> bool {
        let d = &self.vars[var].values;
        d.len() == 2 && d.iter().any(|v| v == "t") && d.iter().any(|v| v == "f")
    }

    pub fn var_names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|v| v.name.as_str())
    }

    /// Resolves a `name=value` pair into a literal.
    pub fn literal(&self, var: &str, value: &str) -> Result<Literal> {
        let v = self
            .var_index(var)
            .ok_or_else(|| Error::MalformedContext(format!("undeclared variable `{var}`")))?;
        let x = self.value_index(v, value).ok_or_else(|| {
            Error::MalformedContext(format!("`{value}` is not a value of `{var}`"))
        })?;
        Ok(Literal::new(v, x))
    }

    /// Number of worlds, or `None` if it does not fit in a `usize`.
    pub fn world_count(&self) -> Option<usize> {
        self.vars
            .iter()
            .try_fold(1usize, |acc, v| acc.checked_mul(v.values.len()))
    }

    /// Every world in lexicographic order: the first variable varies slowest
    /// and values follow domain order.
    pub fn worlds(&self) -> Worlds<'_> {
        Worlds {
            sizes: self.vars.iter().map(|v| v.values.len()).collect(),
            next: Some(vec![0; self.vars.len()]),
            _sig: std::marker::PhantomData,
        }
    }

    pub(crate) fn check_literal(&self, lit: Literal) -> Result<()> {
        if lit.var >= self.vars.len() {
            return Err(Error::MalformedContext(format!(
                "variable index {} outside the signature",
                lit.var
            )));
        }
        if lit.value >= self.vars[lit.var].values.len() {
            return Err(Error::MalformedContext(format!(
                "value index {} outside the domain of `{}`",
                lit.value, self.vars[lit.var].name
            )));
        }
        Ok(())
    }
}

/// Iterator over all worlds of a signature.
pub struct Worlds<'a> {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
    _sig: std::marker::PhantomData<&'a Signature>,
}

impl Iterator for Worlds<'_> {
    type Item = World;

    fn next(&mut self) -> Option<World> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        let mut carried = true;
        while i > 0 && carried {
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.sizes[i] {
                carried = false;
            } else {
                succ[i] = 0;
            }
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(World(current))
    }
}

/// A variable/value pair, by signature position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: usize,
    pub value: usize,
}

impl Literal {
    pub fn new(var: usize, value: usize) -> Self {
        Literal { var, value }
    }

    pub fn display<'a>(&self, sig: &'a Signature) -> impl fmt::Display + 'a {
        let lit = *self;
        DisplayWith(move |f: &mut fmt::Formatter<'_>| {
            write!(
                f,
                "{}={}",
                sig.var_name(lit.var),
                sig.domain(lit.var)[lit.value]
            )
        })
    }
}

/// Total assignment of a value index to every variable of a signature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(pub Vec<usize>);

impl World {
    pub fn new(sig: &Signature, values: Vec<usize>) -> Result<Self> {
        if values.len() != sig.len() {
            return Err(Error::MalformedWorld(format!(
                "expected {} values, got {}",
                sig.len(),
                values.len()
            )));
        }
        for (var, &value) in values.iter().enumerate() {
            if value >= sig.domain_size(var) {
                return Err(Error::MalformedWorld(format!(
                    "value index {value} outside the domain of `{}`",
                    sig.var_name(var)
                )));
            }
        }
        Ok(World(values))
    }

    /// Builds a world from `(variable, value)` names; every variable must be
    /// assigned exactly once.
    pub fn from_names<'a>(
        sig: &Signature,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut values = vec![None; sig.len()];
        for (var, value) in pairs {
            let lit = sig
                .literal(var, value)
                .map_err(|e| Error::MalformedWorld(e.to_string()))?;
            if values[lit.var].replace(lit.value).is_some() {
                return Err(Error::MalformedWorld(format!("`{var}` assigned twice")));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(var, v)| {
                v.ok_or_else(|| {
                    Error::MalformedWorld(format!("`{}` is unassigned", sig.var_name(var)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(World(values))
    }

    pub fn value(&self, var: usize) -> usize {
        self.0[var]
    }

    pub fn satisfies_literal(&self, lit: Literal) -> bool {
        self.0.get(lit.var) == Some(&lit.value)
    }

    pub fn satisfies_primitive(&self, kappa: &PrimitiveContext) -> bool {
        kappa.iter().all(|&l| self.satisfies_literal(l))
    }

    pub fn satisfies(&self, phi: &ComplexContext) -> bool {
        phi.iter().any(|k| self.satisfies_primitive(k))
    }

    /// The world as a primitive context with one literal per variable.
    pub fn to_primitive(&self) -> PrimitiveContext {
        self.0
            .iter()
            .enumerate()
            .map(|(var, &value)| Literal::new(var, value))
            .collect()
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DisplayWith(move |f: &mut fmt::Formatter<'_>| {
            write!(f, "{}", self.to_primitive().display(sig))
        })
    }
}

/// Conjunction of literals. May be inconsistent.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimitiveContext(BTreeSet<Literal>);

impl PrimitiveContext {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, lit: Literal) -> bool {
        self.0.insert(lit)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Literal> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.0.contains(lit)
    }

    pub fn is_subset(&self, other: &PrimitiveContext) -> bool {
        self.0.is_subset(&other.0)
    }

    /// At most one literal per variable.
    pub fn is_consistent(&self) -> bool {
        // Literals are ordered by variable first, so clashes are adjacent.
        let mut prev: Option<usize> = None;
        for l in &self.0 {
            if prev == Some(l.var) {
                return false;
            }
            prev = Some(l.var);
        }
        true
    }

    /// Checks well-formedness against `sig` before answering.
    pub fn checked_is_consistent(&self, sig: &Signature) -> Result<bool> {
        for &l in &self.0 {
            sig.check_literal(l)?;
        }
        Ok(self.is_consistent())
    }

    pub fn union(&self, other: &PrimitiveContext) -> PrimitiveContext {
        PrimitiveContext(self.0.union(&other.0).copied().collect())
    }

    /// The value this context fixes for `var`, if exactly one.
    fn value_of(&self, var: usize) -> Option<usize> {
        self.0
            .range(Literal::new(var, 0)..Literal::new(var + 1, 0))
            .next()
            .map(|l| l.value)
    }

    fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|l| l.var)
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DisplayWith(move |f: &mut fmt::Formatter<'_>| {
            f.write_str("{")?;
            for (i, l) in self.0.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", l.display(sig))?;
            }
            f.write_str("}")
        })
    }
}

impl FromIterator<Literal> for PrimitiveContext {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        PrimitiveContext(iter.into_iter().collect())
    }
}

/// Disjunction of primitive contexts, always held in canonical form.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComplexContext(BTreeSet<PrimitiveContext>);

impl ComplexContext {
    /// Satisfied by no world.
    pub fn bottom() -> Self {
        ComplexContext(BTreeSet::new())
    }

    /// Satisfied by every world.
    pub fn top() -> Self {
        ComplexContext(BTreeSet::from([PrimitiveContext::empty()]))
    }

    pub fn primitive(kappa: PrimitiveContext) -> Self {
        Self::from_members([kappa])
    }

    pub fn literal(lit: Literal) -> Self {
        Self::primitive(PrimitiveContext::from_iter([lit]))
    }

    /// Canonicalizes an arbitrary collection of primitive contexts.
    pub fn from_members(members: impl IntoIterator<Item = PrimitiveContext>) -> Self {
        let mut consistent: Vec<PrimitiveContext> =
            members.into_iter().filter(|k| k.is_consistent()).collect();
        consistent.sort_by_key(|k| k.len());
        consistent.dedup();
        let mut kept: Vec<PrimitiveContext> = Vec::with_capacity(consistent.len());
        for k in consistent {
            if !kept.iter().any(|m| m.is_subset(&k)) {
                kept.push(k);
            }
        }
        ComplexContext(kept.into_iter().collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &PrimitiveContext> {
        self.0.iter()
    }

    /// Number of primitive contexts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_bottom(&self) -> bool {
        self.0.is_empty()
    }

    /// Syntactic top: contains the empty primitive context.
    pub fn is_top(&self) -> bool {
        self.0.contains(&PrimitiveContext::empty())
    }

    /// Canonical members are consistent, so any member yields a world.
    pub fn is_satisfiable(&self) -> bool {
        self.0.iter().any(|k| k.is_consistent())
    }

    pub fn conjoin(&self, other: &ComplexContext) -> ComplexContext {
        if self.is_top() {
            return other.clone();
        }
        if other.is_top() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.len() * other.len());
        for k in &self.0 {
            for l in &other.0 {
                let u = k.union(l);
                if u.is_consistent() {
                    out.push(u);
                }
            }
        }
        ComplexContext::from_members(out)
    }

    pub fn disjoin(&self, other: &ComplexContext) -> ComplexContext {
        if self.is_bottom() {
            return other.clone();
        }
        if other.is_bottom() {
            return self.clone();
        }
        ComplexContext::from_members(self.0.iter().chain(other.0.iter()).cloned())
    }

    /// Complement relative to `sig`, via multi-valued De Morgan: each member
    /// is negated into the disjunction of its literals' alternative values,
    /// and the negated members are conjoined.
    pub fn negate(&self, sig: &Signature) -> ComplexContext {
        let mut acc = ComplexContext::top();
        for k in &self.0 {
            let alternatives = k.iter().flat_map(|l| {
                (0..sig.domain_size(l.var))
                    .filter(move |&v| v != l.value)
                    .map(move |v| PrimitiveContext::from_iter([Literal::new(l.var, v)]))
            });
            let neg = ComplexContext::from_members(alternatives);
            acc = acc.conjoin(&neg);
            if acc.is_bottom() {
                break;
            }
        }
        acc
    }

    /// True iff every world of `sig` satisfying `self` satisfies `other`.
    ///
    /// Each member of `self` is checked separately; only the variables that
    /// `other` mentions and the member leaves open need to be enumerated.
    pub fn entails(&self, other: &ComplexContext, sig: &Signature) -> bool {
        self.0.iter().all(|k| primitive_entails(k, other, sig))
    }

    pub fn equivalent(&self, other: &ComplexContext, sig: &Signature) -> bool {
        self.entails(other, sig) && other.entails(self, sig)
    }

    pub fn check(&self, sig: &Signature) -> Result<()> {
        for k in &self.0 {
            for &l in k.iter() {
                sig.check_literal(l)?;
            }
        }
        Ok(())
    }

    /// Variables mentioned anywhere in the context, in signature order.
    pub fn vars(&self) -> BTreeSet<usize> {
        self.0.iter().flat_map(|k| k.vars()).collect()
    }

    /// The unique set of prime implicants of the context, computed by
    /// enumeration over the mentioned variables. Returns `None` when more than
    /// `limit` candidate primitive contexts would have to be examined.
    pub fn prime_implicants(&self, sig: &Signature, limit: usize) -> Option<ComplexContext> {
        if self.is_bottom() || self.is_top() {
            return Some(self.clone());
        }
        let vars: Vec<usize> = self.vars().into_iter().collect();
        let mut candidates = 1usize;
        for &v in &vars {
            candidates = candidates.checked_mul(sig.domain_size(v) + 1)?;
            if candidates > limit {
                return None;
            }
        }
        // Candidates are partial assignments over `vars`; `None` leaves the
        // variable open. Enumerate them smallest-first so that every
        // implicant found later can be tested against the primes found so far.
        let mut by_size: BTreeMap<usize, Vec<PrimitiveContext>> = BTreeMap::new();
        let mut slot = vec![None::<usize>; vars.len()];
        loop {
            let kappa: PrimitiveContext = vars
                .iter()
                .zip(&slot)
                .filter_map(|(&var, v)| v.map(|x| Literal::new(var, x)))
                .collect();
            by_size.entry(kappa.len()).or_default().push(kappa);
            // Advance the odometer; `None` counts as the first position.
            let mut i = vars.len();
            let mut done = true;
            while i > 0 {
                i -= 1;
                let size = sig.domain_size(vars[i]);
                slot[i] = match slot[i] {
                    None => Some(0),
                    Some(x) if x + 1 < size => Some(x + 1),
                    Some(_) => None,
                };
                if slot[i].is_some() {
                    done = false;
                    break;
                }
            }
            if done {
                break;
            }
        }
        let mut primes: Vec<PrimitiveContext> = Vec::new();
        for (_, group) in by_size {
            for kappa in group {
                if primes.iter().any(|p| p.is_subset(&kappa)) {
                    continue;
                }
                if primitive_entails(&kappa, self, sig) {
                    primes.push(kappa);
                }
            }
        }
        Some(ComplexContext(primes.into_iter().collect()))
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DisplayWith(move |f: &mut fmt::Formatter<'_>| {
            if self.is_bottom() {
                return f.write_str("bottom");
            }
            for (i, k) in self.0.iter().enumerate() {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                write!(f, "{}", k.display(sig))?;
            }
            Ok(())
        })
    }
}

impl From<PrimitiveContext> for ComplexContext {
    fn from(kappa: PrimitiveContext) -> Self {
        ComplexContext::primitive(kappa)
    }
}

/// Does every world extending `kappa` satisfy `psi`?
fn primitive_entails(kappa: &PrimitiveContext, psi: &ComplexContext, sig: &Signature) -> bool {
    if !kappa.is_consistent() {
        return true;
    }
    if psi.iter().any(|l| l.is_subset(kappa)) {
        return true;
    }
    // Members of psi that contradict kappa can never help.
    let relevant: Vec<&PrimitiveContext> = psi
        .iter()
        .filter(|l| {
            l.iter()
                .all(|lit| kappa.value_of(lit.var).is_none_or(|v| v == lit.value))
        })
        .collect();
    if relevant.is_empty() {
        return false;
    }
    let open: Vec<usize> = relevant
        .iter()
        .flat_map(|l| l.vars())
        .filter(|&v| kappa.value_of(v).is_none())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut assignment = vec![0usize; open.len()];
    loop {
        let holds = relevant.iter().any(|l| {
            l.iter()
                .all(|lit| match open.iter().position(|&v| v == lit.var) {
                    Some(i) => assignment[i] == lit.value,
                    None => true,
                })
        });
        if !holds {
            return false;
        }
        let mut i = open.len();
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            assignment[i] += 1;
            if assignment[i] < sig.domain_size(open[i]) {
                break;
            }
            assignment[i] = 0;
        }
    }
}

struct DisplayWith<F>(F);

impl<F> fmt::Display for DisplayWith<F>
where
    F: Fn(&mut fmt::Formatter<'_>) -> fmt::Result,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        (self.0)(f)
    }
}
