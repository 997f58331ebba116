//! Reasoning over ALC knowledge bases whose axioms are labelled with contexts
//! of a Bayesian network.

pub mod bayes;
pub mod classical;
pub mod cli;
pub mod context;
pub mod error;
pub mod io;
pub mod ontology;
pub mod reasoner;
pub mod tableau;

pub use bayes::BayesNet;
pub use context::{ComplexContext, Literal, PrimitiveContext, Signature, World};
pub use error::{Error, Result};
pub use ontology::{Axiom, Concept, Kb, Ontology, VAxiom};
