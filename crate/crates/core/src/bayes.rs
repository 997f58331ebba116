//! Bayesian networks over a [`Signature`]: chain-rule evaluation, world
//! enumeration, context probabilities and the zero-probability context.

use std::fmt;

use crate::context::{ComplexContext, Literal, PrimitiveContext, Signature, World, Worlds};
use crate::error::{Error, Result};

/// Comparison tolerance for probabilities.
pub const TOLERANCE: f64 = 1e-9;

/// A DAG over the variables of a signature with one conditional probability
/// table per variable.
///
/// `cpts[x][row][value]` is `P(x = value | parents(x) = row)`, where rows
/// enumerate parent assignments lexicographically in parent-list order (the
/// first parent varies slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    signature: Signature,
    parents: Vec<Vec<usize>>,
    cpts: Vec<Vec<Vec<f64>>>,
}

/// A structural problem found by [`BayesNet::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ShapeMismatch {
        detail: String,
    },
    UnknownParent {
        var: String,
        parent: usize,
    },
    DuplicateParent {
        var: String,
        parent: String,
    },
    Cycle {
        vars: Vec<String>,
    },
    RowCount {
        var: String,
        expected: usize,
        found: usize,
    },
    RowWidth {
        var: String,
        row: String,
        expected: usize,
        found: usize,
    },
    OutOfRange {
        var: String,
        row: String,
        value: f64,
    },
    RowSum {
        var: String,
        row: String,
        sum: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ShapeMismatch { detail } => write!(f, "shape mismatch: {detail}"),
            Violation::UnknownParent { var, parent } => {
                write!(f, "`{var}` has unknown parent index {parent}")
            }
            Violation::DuplicateParent { var, parent } => {
                write!(f, "`{var}` lists parent `{parent}` twice")
            }
            Violation::Cycle { vars } => write!(f, "cycle through {}", vars.join(" -> ")),
            Violation::RowCount {
                var,
                expected,
                found,
            } => {
                write!(f, "`{var}` has {found} CPT rows, expected {expected}")
            }
            Violation::RowWidth {
                var,
                row,
                expected,
                found,
            } => write!(
                f,
                "CPT row `{var} | {row}` has {found} entries, expected {expected}"
            ),
            Violation::OutOfRange { var, row, value } => {
                write!(f, "CPT row `{var} | {row}` has entry {value} outside [0,1]")
            }
            Violation::RowSum { var, row, sum } => {
                write!(f, "CPT row `{var} | {row}` has row sum {sum}")
            }
        }
    }
}

impl BayesNet {
    /// Builds and validates a network.
    pub fn new(
        signature: Signature,
        parents: Vec<Vec<usize>>,
        cpts: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let bn = Self::from_parts(signature, parents, cpts);
        bn.validate()
            .map_err(|vs| Error::InvalidBayesNet(vs.iter().map(ToString::to_string).collect()))?;
        Ok(bn)
    }

    /// Assembles a network without validation. Only [`validate`](Self::validate)
    /// may be called on an unvalidated network.
    pub fn from_parts(
        signature: Signature,
        parents: Vec<Vec<usize>>,
        cpts: Vec<Vec<Vec<f64>>>,
    ) -> Self {
        BayesNet {
            signature,
            parents,
            cpts,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn parents(&self, var: usize) -> &[usize] {
        &self.parents[var]
    }

    pub fn cpt(&self, var: usize) -> &[Vec<f64>] {
        &self.cpts[var]
    }

    /// Number of CPT rows `var` must have.
    pub fn row_count(&self, var: usize) -> usize {
        self.parents[var]
            .iter()
            .map(|&p| self.signature.domain_size(p))
            .product()
    }

    /// Parent value indices for a row index.
    pub fn row_assignment(&self, var: usize, mut row: usize) -> Vec<usize> {
        let ps = &self.parents[var];
        let mut out = vec![0; ps.len()];
        for (i, &p) in ps.iter().enumerate().rev() {
            let size = self.signature.domain_size(p);
            out[i] = row % size;
            row /= size;
        }
        out
    }

    /// Row index for parent value indices.
    pub fn row_index(&self, var: usize, assignment: &[usize]) -> usize {
        self.parents[var]
            .iter()
            .zip(assignment)
            .fold(0, |acc, (&p, &v)| acc * self.signature.domain_size(p) + v)
    }

    pub(crate) fn row_label(&self, var: usize, row: usize) -> String {
        self.parents[var]
            .iter()
            .zip(self.row_assignment(var, row))
            .map(|(&p, v)| {
                format!(
                    "{}={}",
                    self.signature.var_name(p),
                    self.signature.domain(p)[v]
                )
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Reports every structural problem instead of stopping at the first.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let sig = &self.signature;
        let n = sig.len();
        let mut out = Vec::new();
        if self.parents.len() != n || self.cpts.len() != n {
            out.push(Violation::ShapeMismatch {
                detail: format!(
                    "{n} variables, {} parent lists, {} CPTs",
                    self.parents.len(),
                    self.cpts.len()
                ),
            });
            return Err(out);
        }
        let mut parents_ok = true;
        for (x, ps) in self.parents.iter().enumerate() {
            for (i, &p) in ps.iter().enumerate() {
                if p >= n {
                    out.push(Violation::UnknownParent {
                        var: sig.var_name(x).to_string(),
                        parent: p,
                    });
                    parents_ok = false;
                } else if ps[..i].contains(&p) {
                    out.push(Violation::DuplicateParent {
                        var: sig.var_name(x).to_string(),
                        parent: sig.var_name(p).to_string(),
                    });
                }
            }
        }
        if !parents_ok {
            return Err(out);
        }
        if let Some(cycle) = self.find_cycle() {
            out.push(Violation::Cycle {
                vars: cycle.iter().map(|&v| sig.var_name(v).to_string()).collect(),
            });
        }
        for x in 0..n {
            let name = sig.var_name(x).to_string();
            let expected = self.row_count(x);
            if self.cpts[x].len() != expected {
                out.push(Violation::RowCount {
                    var: name.clone(),
                    expected,
                    found: self.cpts[x].len(),
                });
                continue;
            }
            for (r, row) in self.cpts[x].iter().enumerate() {
                let label = self.row_label(x, r);
                if row.len() != sig.domain_size(x) {
                    out.push(Violation::RowWidth {
                        var: name.clone(),
                        row: label,
                        expected: sig.domain_size(x),
                        found: row.len(),
                    });
                    continue;
                }
                for &p in row {
                    if !(0.0..=1.0).contains(&p) {
                        out.push(Violation::OutOfRange {
                            var: name.clone(),
                            row: label.clone(),
                            value: p,
                        });
                    }
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > TOLERANCE {
                    out.push(Violation::RowSum {
                        var: name.clone(),
                        row: label,
                        sum,
                    });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// A cycle in the parent graph, listed from a variable back to itself.
    fn find_cycle(&self) -> Option<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        fn visit(
            bn: &BayesNet,
            v: usize,
            marks: &mut [Mark],
            stack: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            marks[v] = Mark::Active;
            stack.push(v);
            for &p in &bn.parents[v] {
                match marks[p] {
                    Mark::Active => {
                        let start = stack.iter().position(|&s| s == p).unwrap_or(0);
                        // Walks child -> parent, so reverse for parent -> child.
                        let mut cycle: Vec<usize> = stack[start..].to_vec();
                        cycle.push(p);
                        cycle.reverse();
                        return Some(cycle);
                    }
                    Mark::New => {
                        if let Some(c) = visit(bn, p, marks, stack) {
                            return Some(c);
                        }
                    }
                    Mark::Done => {}
                }
            }
            stack.pop();
            marks[v] = Mark::Done;
            None
        }
        let mut marks = vec![Mark::New; self.parents.len()];
        for v in 0..self.parents.len() {
            if marks[v] == Mark::New {
                if let Some(c) = visit(self, v, &mut marks, &mut Vec::new()) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// Conditional probability of `var` taking its value in `world`.
    fn factor(&self, var: usize, world: &World) -> f64 {
        let assignment: Vec<usize> = self.parents[var].iter().map(|&p| world.value(p)).collect();
        self.cpts[var][self.row_index(var, &assignment)][world.value(var)]
    }

    /// Chain rule: the product of every variable's conditional probability.
    pub fn world_probability(&self, world: &World) -> Result<f64> {
        World::new(&self.signature, world.0.clone())?;
        Ok(self.world_probability_unchecked(world))
    }

    pub(crate) fn world_probability_unchecked(&self, world: &World) -> f64 {
        (0..self.signature.len())
            .map(|x| self.factor(x, world))
            .product()
    }

    /// Every world exactly once, in the signature's lexicographic order.
    pub fn worlds(&self) -> Worlds<'_> {
        self.signature.worlds()
    }

    /// Worlds paired with their probabilities.
    pub fn weighted_worlds(&self) -> impl Iterator<Item = (World, f64)> + '_ {
        self.worlds().map(move |w| {
            let p = self.world_probability_unchecked(&w);
            (w, p)
        })
    }

    /// Sum of the probabilities of the worlds satisfying `phi`.
    pub fn context_probability(&self, phi: &ComplexContext) -> f64 {
        if phi.is_bottom() {
            return 0.0;
        }
        self.weighted_worlds()
            .filter(|(w, _)| w.satisfies(phi))
            .map(|(_, p)| p)
            .sum()
    }

    /// The context satisfied exactly by the zero-probability worlds: one
    /// disjunct `{X=x} ∪ parents` per CPT cell that is exactly `0.0`.
    pub fn zero_context(&self) -> ComplexContext {
        let mut members = Vec::new();
        for x in 0..self.signature.len() {
            for (r, row) in self.cpts[x].iter().enumerate() {
                for (value, &p) in row.iter().enumerate() {
                    if p == 0.0 {
                        let mut kappa: PrimitiveContext = self.parents[x]
                            .iter()
                            .zip(self.row_assignment(x, r))
                            .map(|(&parent, v)| Literal::new(parent, v))
                            .collect();
                        kappa.insert(Literal::new(x, value));
                        members.push(kappa);
                    }
                }
            }
        }
        ComplexContext::from_members(members)
    }
}
