//! Incremental rule learning and propositional reasoning over
//! attribute-value vectors.
//!
//! Examples, precepts and induced rules share one representation: a fixed
//! arity [`Vector`] of cells that are asserted, don't-care (`*`) or
//! don't-know (`?`), with one designated target attribute. A
//! [`KnowledgeBase`] evolves as vectors are learned: each vector is first
//! reasoned about, then the knowledge base adapts to it by counting,
//! covering, generalizing or storing it.

pub mod error;
pub mod fol;
pub mod format;
pub mod harness;
pub mod learner;
pub mod metrics;
pub mod model;
pub mod precepts;
pub mod reasoner;

pub use error::{Error, Result};
pub use learner::{adapt, learn, learn_as, AdaptAction, AdaptReport};
pub use model::{
    validate_vector, AttributeDef, AttributeKind, CellValue, KnowledgeBase, Schema, StoredRule,
    Value, Vector, Violation,
};
pub use reasoner::{query, reason, Mechanism, ReasonConfig, ReasonOutcome, TraceEntry};
