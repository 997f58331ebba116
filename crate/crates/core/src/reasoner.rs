//! Consistency, subsumption, satisfiability and instance queries over a KB.
//!
//! Every query reduces to the inconsistency context of a (possibly extended)
//! KB and to world sums over the network. In [`Mode::Oracle`] that context is
//! computed world by world with the classical tableau instead.

use std::time::{Duration, Instant};

use crate::bayes::TOLERANCE;
use crate::classical::is_classically_consistent;
use crate::context::ComplexContext;
use crate::error::{Error, Result};
use crate::ontology::{Axiom, Concept, Kb, VAxiom, QUERY_INDIVIDUAL};
use crate::tableau::{saturate, TableauConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Tableau,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Answer {
    Decision(bool),
    Probability(f64),
}

impl Answer {
    pub fn decision(self) -> Option<bool> {
        match self {
            Answer::Decision(b) => Some(b),
            Answer::Probability(_) => None,
        }
    }

    pub fn probability(self) -> Option<f64> {
        match self {
            Answer::Probability(p) => Some(p),
            Answer::Decision(_) => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// Inconsistency contexts computed.
    pub saturations: usize,
    /// Saturated ABoxes over all tableau runs.
    pub aboxes: usize,
    pub pruned_aboxes: usize,
    /// Per-world classical checks in oracle mode.
    pub world_checks: usize,
    pub elapsed: Duration,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct QueryResult {
    pub answer: Answer,
    /// For consistency: the worlds of positive probability whose restriction
    /// is inconsistent, when there are any.
    pub witness: Option<ComplexContext>,
    pub diagnostics: Diagnostics,
}

impl QueryResult {
    pub fn decision(&self) -> Option<bool> {
        self.answer.decision()
    }

    pub fn probability(&self) -> Option<f64> {
        self.answer.probability()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PMode {
    AtLeast,
    Exactly,
    AlmostCertain,
}

pub struct Reasoner<'a> {
    kb: &'a Kb,
    mode: Mode,
    config: TableauConfig,
}

struct Run {
    start: Instant,
    diag: Diagnostics,
}

impl Run {
    fn new() -> Self {
        Run {
            start: Instant::now(),
            diag: Diagnostics::default(),
        }
    }

    fn finish(mut self, answer: Answer, witness: Option<ComplexContext>) -> QueryResult {
        self.diag.elapsed = self.start.elapsed();
        QueryResult {
            answer,
            witness,
            diagnostics: self.diag,
        }
    }
}

fn clamp(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

impl<'a> Reasoner<'a> {
    pub fn new(kb: &'a Kb) -> Self {
        Reasoner {
            kb,
            mode: Mode::Tableau,
            config: TableauConfig::default(),
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_config(mut self, config: TableauConfig) -> Self {
        self.config = config;
        self
    }

    pub fn kb(&self) -> &Kb {
        self.kb
    }

    fn check(&self, phi: &ComplexContext) -> Result<()> {
        phi.check(self.kb.bn.signature())
    }

    /// Inconsistency context of `kb` (the reasoner's KB or an extension).
    fn phi(&self, kb: &Kb, run: &mut Run) -> Result<ComplexContext> {
        run.diag.saturations += 1;
        match self.mode {
            Mode::Tableau => {
                let state = saturate(kb, &self.config)?;
                run.diag.aboxes += state.aboxes.len();
                run.diag.pruned_aboxes += state.pruned;
                run.diag.trace.extend(state.trace);
                Ok(state.inconsistency_context)
            }
            Mode::Oracle => {
                let mut members = Vec::new();
                for w in kb.bn.worlds() {
                    run.diag.world_checks += 1;
                    if !is_classically_consistent(&kb.ontology.restriction(&w)) {
                        members.push(w.to_primitive());
                    }
                }
                Ok(ComplexContext::from_members(members))
            }
        }
    }

    /// `φ ∧ ¬φ_B`: the inconsistent worlds of positive probability.
    fn positive_part(&self, phi: &ComplexContext) -> ComplexContext {
        let sig = self.kb.bn.signature();
        phi.conjoin(&self.kb.bn.zero_context().negate(sig))
    }

    fn inconsistent(&self, kb: &Kb, run: &mut Run) -> Result<Option<ComplexContext>> {
        let witness = self.positive_part(&self.phi(kb, run)?);
        Ok(witness.is_satisfiable().then_some(witness))
    }

    /// The worlds whose restriction is classically inconsistent.
    pub fn inconsistency_context(&self) -> Result<QueryResult> {
        let mut run = Run::new();
        let phi = self.phi(self.kb, &mut run)?;
        Ok(run.finish(Answer::Decision(!phi.is_satisfiable()), Some(phi)))
    }

    pub fn is_consistent(&self) -> Result<QueryResult> {
        let mut run = Run::new();
        let witness = self.inconsistent(self.kb, &mut run)?;
        Ok(run.finish(Answer::Decision(witness.is_none()), witness))
    }

    /// `P(φ_{K'}) + 1 − P(κ)` for `K'` extended by `extra`, or 1 when the KB
    /// itself is inconsistent.
    fn probability_of(
        &self,
        extra: Vec<VAxiom>,
        kappa: &ComplexContext,
        run: &mut Run,
    ) -> Result<f64> {
        if self.inconsistent(self.kb, run)?.is_some() {
            return Ok(1.0);
        }
        let phi = self.phi(&self.kb.with(extra), run)?;
        let bn = &self.kb.bn;
        Ok(clamp(
            bn.context_probability(&phi) + 1.0 - bn.context_probability(kappa),
        ))
    }

    fn subsumption_extra(c: &Concept, d: &Concept, kappa: &ComplexContext) -> Vec<VAxiom> {
        vec![
            VAxiom::new(Axiom::concept(c.clone(), QUERY_INDIVIDUAL), kappa.clone()),
            VAxiom::new(
                Axiom::concept(d.negated_nnf(), QUERY_INDIVIDUAL),
                kappa.clone(),
            ),
        ]
    }

    fn subsumption_value(
        &self,
        c: &Concept,
        d: &Concept,
        kappa: &ComplexContext,
        run: &mut Run,
    ) -> Result<f64> {
        self.check(kappa)?;
        self.probability_of(Self::subsumption_extra(c, d, kappa), kappa, run)
    }

    pub fn subsumption_probability(
        &self,
        c: &Concept,
        d: &Concept,
        kappa: &ComplexContext,
    ) -> Result<QueryResult> {
        let mut run = Run::new();
        let p = self.subsumption_value(c, d, kappa, &mut run)?;
        Ok(run.finish(Answer::Probability(p), None))
    }

    /// `K ⊨ (C ⊑ D)^κ`.
    pub fn decide_contextual_subsumption(
        &self,
        c: &Concept,
        d: &Concept,
        kappa: &ComplexContext,
    ) -> Result<QueryResult> {
        self.decide_p_subsumption(c, d, kappa, 1.0, PMode::AlmostCertain)
    }

    /// Subsumption probability is positive.
    pub fn decide_positive_subsumption(
        &self,
        c: &Concept,
        d: &Concept,
        kappa: &ComplexContext,
    ) -> Result<QueryResult> {
        let mut run = Run::new();
        let p = self.subsumption_value(c, d, kappa, &mut run)?;
        Ok(run.finish(Answer::Decision(p > TOLERANCE), None))
    }

    pub fn decide_p_subsumption(
        &self,
        c: &Concept,
        d: &Concept,
        kappa: &ComplexContext,
        p: f64,
        mode: PMode,
    ) -> Result<QueryResult> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "threshold {p} is outside [0,1]"
            )));
        }
        let mut run = Run::new();
        let value = self.subsumption_value(c, d, kappa, &mut run)?;
        let holds = match mode {
            PMode::AtLeast => value >= p - TOLERANCE,
            PMode::Exactly => (value - p).abs() <= TOLERANCE,
            PMode::AlmostCertain => value >= 1.0 - TOLERANCE,
        };
        Ok(run.finish(Answer::Decision(holds), None))
    }

    fn conditional(
        &self,
        lambda: &ComplexContext,
        joint: impl FnOnce(&mut Run) -> Result<f64>,
    ) -> Result<QueryResult> {
        self.check(lambda)?;
        let p_lambda = self.kb.bn.context_probability(lambda);
        if p_lambda <= TOLERANCE {
            return Err(Error::UndefinedConditioning);
        }
        let mut run = Run::new();
        let p = joint(&mut run)?;
        Ok(run.finish(
            Answer::Probability(clamp((p + p_lambda - 1.0) / p_lambda)),
            None,
        ))
    }

    /// Probability of `(C ⊑ D)^κ` given `λ`.
    pub fn conditional_subsumption_probability(
        &self,
        c: &Concept,
        d: &Concept,
        kappa: &ComplexContext,
        lambda: &ComplexContext,
    ) -> Result<QueryResult> {
        let joint = kappa.conjoin(lambda);
        self.conditional(lambda, |run| self.subsumption_value(c, d, &joint, run))
    }

    /// Without a context: `C` can be non-empty in a model of the KB. With
    /// `κ`: `C` is not subsumed by bottom in context `κ`.
    pub fn concept_satisfiability(
        &self,
        c: &Concept,
        kappa: Option<&ComplexContext>,
    ) -> Result<QueryResult> {
        match kappa {
            Some(kappa) => {
                let mut run = Run::new();
                let p = self.subsumption_value(c, &Concept::bottom(), kappa, &mut run)?;
                Ok(run.finish(Answer::Decision(p < 1.0 - TOLERANCE), None))
            }
            None => {
                let mut run = Run::new();
                let extended = self
                    .kb
                    .with([VAxiom::always(Axiom::concept(c.clone(), QUERY_INDIVIDUAL))]);
                let witness = self.inconsistent(&extended, &mut run)?;
                Ok(run.finish(Answer::Decision(witness.is_none()), witness))
            }
        }
    }

    /// Probability that `C` is empty in context `κ`.
    pub fn unsatisfiability_probability(
        &self,
        c: &Concept,
        kappa: &ComplexContext,
    ) -> Result<QueryResult> {
        self.subsumption_probability(c, &Concept::bottom(), kappa)
    }

    pub fn conditional_unsatisfiability_probability(
        &self,
        c: &Concept,
        kappa: &ComplexContext,
        lambda: &ComplexContext,
    ) -> Result<QueryResult> {
        self.conditional_subsumption_probability(c, &Concept::bottom(), kappa, lambda)
    }

    fn instance_extra(&self, c: &Concept, a: &str, kappa: &ComplexContext) -> Result<Vec<VAxiom>> {
        self.check(kappa)?;
        if !self.kb.ontology.individuals().iter().any(|i| &**i == a) {
            return Err(Error::InvalidArgument(format!("unknown individual `{a}`")));
        }
        Ok(vec![VAxiom::new(
            Axiom::concept(c.negated_nnf(), a),
            kappa.clone(),
        )])
    }

    /// `K ⊨ C(a)^κ`: every world of `κ` with positive probability makes
    /// `O ∪ {¬C(a)}` inconsistent. The witness holds the worlds that do not.
    pub fn decide_instance(
        &self,
        c: &Concept,
        a: &str,
        kappa: &ComplexContext,
    ) -> Result<QueryResult> {
        let extra = self.instance_extra(c, a, kappa)?;
        let mut run = Run::new();
        if self.inconsistent(self.kb, &mut run)?.is_some() {
            return Ok(run.finish(Answer::Decision(true), None));
        }
        let sig = self.kb.bn.signature();
        let phi = self.phi(&self.kb.with(extra), &mut run)?;
        let open = kappa.conjoin(&phi.negate(sig));
        let counter = open.conjoin(&self.kb.bn.zero_context().negate(sig));
        let holds = !counter.is_satisfiable();
        Ok(run.finish(Answer::Decision(holds), (!holds).then_some(counter)))
    }

    pub fn instance_probability(
        &self,
        c: &Concept,
        a: &str,
        kappa: &ComplexContext,
    ) -> Result<QueryResult> {
        let extra = self.instance_extra(c, a, kappa)?;
        let mut run = Run::new();
        let p = self.probability_of(extra, kappa, &mut run)?;
        Ok(run.finish(Answer::Probability(p), None))
    }

    pub fn conditional_instance_probability(
        &self,
        c: &Concept,
        a: &str,
        kappa: &ComplexContext,
        lambda: &ComplexContext,
    ) -> Result<QueryResult> {
        let joint = kappa.conjoin(lambda);
        let extra = self.instance_extra(c, a, &joint)?;
        self.conditional(lambda, |run| self.probability_of(extra, &joint, run))
    }

    /// Saturates once for `C ⊑ D` under the empty context so that positive
    /// subsumption can then be decided for any number of contexts.
    pub fn positive_subsumption(&self, c: &Concept, d: &Concept) -> Result<PositiveSubsumption> {
        let mut run = Run::new();
        let kb_inconsistent = self.inconsistent(self.kb, &mut run)?.is_some();
        let top = ComplexContext::top();
        let phi = self.phi(&self.kb.with(Self::subsumption_extra(c, d, &top)), &mut run)?;
        Ok(PositiveSubsumption {
            kb_inconsistent,
            phi_positive: self.positive_part(&phi),
            nonzero: self.kb.bn.zero_context().negate(self.kb.bn.signature()),
        })
    }
}

/// Positive subsumption decided from one precomputed inconsistency context.
#[derive(Debug, Clone)]
pub struct PositiveSubsumption {
    kb_inconsistent: bool,
    phi_positive: ComplexContext,
    nonzero: ComplexContext,
}

impl PositiveSubsumption {
    /// True iff the KB is inconsistent, `κ` misses a world of positive
    /// probability, or some positive world of `κ` forces the subsumption.
    pub fn decide(&self, kb: &Kb, kappa: &ComplexContext) -> bool {
        let sig = kb.bn.signature();
        self.kb_inconsistent
            || kappa.negate(sig).conjoin(&self.nonzero).is_satisfiable()
            || kappa.conjoin(&self.phi_positive).is_satisfiable()
    }
}
