//! Deriving domain-specific precepts from general rules and a set of facts.

use crate::error::Result;
use crate::learner::learn;
use crate::model::{CellValue, KnowledgeBase, Schema, Vector};
use crate::reasoner::{query, ReasonConfig};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PreceptOptions {
    /// Keep cells asserted along the inference chain instead of resetting them to `*`.
    pub keep_intermediates: bool,
    pub static_priority: u32,
    pub definition: bool,
}

/// An emitted precept.
#[derive(Debug, Clone, PartialEq)]
pub struct Precept {
    pub vector: Vector,
    /// Greater than 0 when the target was reached by similarity.
    pub winner_distance: f64,
    pub winner: Option<String>,
}

/// Learns `general_rules` into a scratch knowledge base, reasons from `facts`
/// about attribute `target`, and emits a precept if the target is reached.
pub fn generate_precepts(
    schema: &Schema,
    general_rules: &[Vector],
    facts: &Vector,
    target: usize,
    cfg: &ReasonConfig,
    opts: &PreceptOptions,
) -> Result<Vec<Precept>> {
    let mut scratch = KnowledgeBase::new(schema.clone());
    for r in general_rules {
        if let Some(t) = r.target_value() {
            learn(&mut scratch, r, t, cfg)?;
        }
    }
    let mut q = facts.clone();
    q.target = target;
    q.cells[target] = CellValue::DontKnow;
    let outcome = query(&scratch, &q, cfg)?;
    if !outcome.derived_target.is_asserted() {
        return Ok(Vec::new());
    }
    let source = if opts.keep_intermediates { &outcome.completed } else { &q };
    let cells = source
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if i == target {
                outcome.derived_target
            } else if c.is_asserted() {
                *c
            } else {
                CellValue::DontCare
            }
        })
        .collect();
    let vector = Vector {
        cells,
        target,
        is_definition: opts.definition,
        static_priority: opts.static_priority,
    };
    Ok(vec![Precept {
        vector,
        winner_distance: outcome.winner_distance,
        winner: outcome.winner,
    }])
}
