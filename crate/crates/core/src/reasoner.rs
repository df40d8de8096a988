//! Reasoning: completion from definitions, forward chaining over subgoals,
//! target assertion by rule application or similarity, and conflict handling.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::{overlaps, premise_distance, premise_matches, specificity, TIE_EPSILON};
use crate::model::{CellValue, KnowledgeBase, Schema, StoredRule, Value, Vector};

/// Reasoning parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ReasonConfig {
    /// Distance threshold for similarity-based subgoal assertion; 0 disables it.
    pub td_threshold: f64,
    pub allow_dynamic_priority_update: bool,
    /// Seeds the draw among competing definitions during completion.
    pub rng_seed: u64,
}

impl Default for ReasonConfig {
    fn default() -> Self {
        ReasonConfig {
            td_threshold: 0.0,
            allow_dynamic_priority_update: true,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    Completion,
    Rule,
    Similarity,
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mechanism::Completion => "completion",
            Mechanism::Rule => "rule",
            Mechanism::Similarity => "similarity",
        })
    }
}

/// One assertion made while reasoning.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    /// 0 for completion, then the forward-chaining iteration.
    pub depth: usize,
    pub attribute: usize,
    pub value: Value,
    pub rule: String,
    pub mechanism: Mechanism,
}

impl TraceEntry {
    pub fn render(&self, schema: &Schema) -> String {
        let a = schema.attr(self.attribute);
        format!(
            "depth={} attr={} value={} via={} mech={}",
            self.depth,
            a.name,
            a.format_value(&self.value),
            self.rule,
            self.mechanism
        )
    }
}

/// Result of one reasoning call.
#[derive(Debug, Clone, PartialEq)]
pub struct ReasonOutcome {
    /// The input plus every deduced cell, including the derived target.
    pub completed: Vector,
    pub derived_target: CellValue,
    pub winner: Option<String>,
    pub winner_distance: f64,
    pub trace: Vec<TraceEntry>,
    /// Conflicting-defaults pairs seen at target assertion.
    pub conflicts: Vec<(String, String)>,
    /// Forward-chaining iterations, including the final one that asserted nothing.
    pub iterations: usize,
    /// Rules whose dynamic priority was incremented.
    pub dp_updates: Vec<String>,
}

impl ReasonOutcome {
    pub fn trace_lines(&self, schema: &Schema) -> Vec<String> {
        self.trace.iter().map(|t| t.render(schema)).collect()
    }

    /// Whether any non-target cell was asserted by reasoning.
    pub fn asserted_premises(&self) -> bool {
        self.trace
            .iter()
            .any(|t| t.attribute != self.completed.target)
    }
}

/// Indices of rules concluding about `attr` whose premises `v` satisfies.
pub fn applicable_rules(kb: &KnowledgeBase, v: &Vector, attr: usize) -> Vec<usize> {
    kb.rules_for_target(attr)
        .filter(|&i| premise_matches(kb.schema(), &kb.rule(i).vector, v))
        .collect()
}

/// Conflict resolution: specificity, static priority, dynamic priority,
/// cover count, then earliest insertion.
pub fn resolve(kb: &KnowledgeBase, candidates: &[usize]) -> Option<usize> {
    resolve_with(kb, candidates, &[])
}

fn resolve_with(kb: &KnowledgeBase, candidates: &[usize], bumped: &[usize]) -> Option<usize> {
    let key = |i: usize| {
        let r = kb.rule(i);
        let dp = r.dynamic_priority + u32::from(bumped.contains(&i));
        (specificity(&r.vector), r.vector.static_priority, dp, r.num_covers)
    };
    let mut best: Option<usize> = None;
    for &i in candidates {
        best = match best {
            None => Some(i),
            Some(b) => {
                let (ki, kb_) = (key(i), key(b));
                if ki > kb_ || (ki == kb_ && i < b) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// The five conflicting-defaults conditions over `v`.
pub fn conflicting_defaults(schema: &Schema, r: &StoredRule, s: &StoredRule, v: &Vector) -> bool {
    r.vector.target == s.vector.target
        && premise_matches(schema, &r.vector, v)
        && premise_matches(schema, &s.vector, v)
        && specificity(&r.vector) == specificity(&s.vector)
        && r.vector.static_priority == s.vector.static_priority
        && r.effective_target() != s.effective_target()
        && overlaps(schema, &r.vector, &s.vector)
}

/// Distance-minimizing rules for `attr` (ties resolved), with the distance.
/// Rules with no asserted premise are skipped.
fn nearest(kb: &KnowledgeBase, v: &Vector, attr: usize, bumped: &[usize]) -> Option<(usize, f64)> {
    let mut best = Vec::new();
    let mut bd = f64::INFINITY;
    for i in kb.rules_for_target(attr) {
        let Ok(d) = premise_distance(kb.schema(), &kb.rule(i).vector, v) else {
            continue;
        };
        if d < bd - TIE_EPSILON {
            bd = d;
            best.clear();
            best.push(i);
        } else if (d - bd).abs() <= TIE_EPSILON {
            best.push(i);
        }
    }
    resolve_with(kb, &best, bumped).map(|i| (i, bd))
}

/// The closest rule sharing `v`'s target attribute, ties resolved.
pub(crate) fn nearest_rule(kb: &KnowledgeBase, v: &Vector) -> Option<(usize, f64)> {
    nearest(kb, v, v.target, &[])
}

fn complete_traced(kb: &KnowledgeBase, v: &Vector, seed: u64) -> (Vector, Vec<TraceEntry>) {
    let schema = kb.schema();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = v.clone();
    let mut trace = Vec::new();
    let asserted: Vec<(usize, Value)> = v
        .premise_indices()
        .filter_map(|a| v.cells[a].value().map(|x| (a, x)))
        .collect();
    for (a, val) in asserted {
        let defs: Vec<usize> = kb
            .rules_for_target(a)
            .filter(|&i| {
                let r = kb.rule(i);
                r.vector.is_definition
                    && schema.attr(a).values_equal(&Value::Nominal(r.effective_target()), &val)
            })
            .collect();
        let pick = match defs.len() {
            0 => continue,
            1 => defs[0],
            n => defs[rng.gen_range(0..n)],
        };
        let d = kb.rule(pick);
        for b in 0..out.cells.len() {
            if b == a || out.cells[b] != CellValue::DontKnow {
                continue;
            }
            if let CellValue::Asserted(x) = d.vector.cells[b] {
                out.cells[b] = CellValue::Asserted(x);
                trace.push(TraceEntry {
                    depth: 0,
                    attribute: b,
                    value: x,
                    rule: d.label.clone(),
                    mechanism: Mechanism::Completion,
                });
            }
        }
    }
    (out, trace)
}

/// Completion: fills `?` cells from definitions whose conclusion `v` asserts.
pub fn complete(kb: &KnowledgeBase, v: &Vector, seed: u64) -> Vector {
    complete_traced(kb, v, seed).0
}

/// Checks write-once assertion and the iteration bound for an outcome.
pub fn fixed_point_guard(input: &Vector, outcome: &ReasonOutcome) -> Result<()> {
    for t in &outcome.trace {
        if t.attribute != input.target && input.cells[t.attribute].is_asserted() {
            return Err(Error::NonMonotonicAssertion { attr: t.attribute });
        }
    }
    for (i, c) in input.cells.iter().enumerate() {
        if i != input.target && c.is_asserted() && outcome.completed.cells[i] != *c {
            return Err(Error::NonMonotonicAssertion { attr: i });
        }
    }
    let open = input
        .premise_indices()
        .filter(|&i| !input.cells[i].is_asserted())
        .count();
    if outcome.iterations > open + 1 {
        return Err(Error::IterationBound {
            iterations: outcome.iterations,
            bound: open + 1,
        });
    }
    Ok(())
}

fn infer(
    kb: &KnowledgeBase,
    input: &Vector,
    cfg: &ReasonConfig,
    actual: Option<usize>,
) -> Result<(ReasonOutcome, Vec<usize>)> {
    let schema = kb.schema();
    crate::model::validate_vector(schema, input)
        .or_else(|errs| {
            // an all-* premise is a legal query
            let rest: Vec<_> = errs
                .into_iter()
                .filter(|e| *e != crate::model::Violation::AllDontCarePremise)
                .collect();
            if rest.is_empty() {
                Ok(())
            } else {
                Err(rest)
            }
        })
        .map_err(Error::SchemaMismatch)?;
    let mut query = input.clone();
    let t = query.target;
    query.cells[t] = CellValue::DontKnow;

    let (mut v, mut trace) = complete_traced(kb, &query, cfg.rng_seed);
    let mut iterations = 0;
    let mut productive = 0;
    let mut conflicts = Vec::new();
    let mut bumped = Vec::new();
    let mut winner = None;
    let mut winner_distance = 0.0;

    if let CellValue::Asserted(_) = v.cells[t] {
        // completion reached the target
        winner = trace.iter().rev().find(|e| e.attribute == t).map(|e| e.rule.clone());
    } else {
        loop {
            iterations += 1;
            let snapshot = v.clone();
            let mut any = false;
            for a in snapshot.premise_indices() {
                if snapshot.cells[a].is_asserted() {
                    continue;
                }
                let cands = applicable_rules(kb, &snapshot, a);
                let chosen = if let Some(w) = resolve(kb, &cands) {
                    Some((w, Mechanism::Rule))
                } else if cfg.td_threshold > 0.0 {
                    nearest(kb, &snapshot, a, &[])
                        .filter(|&(_, d)| d <= cfg.td_threshold)
                        .map(|(w, _)| (w, Mechanism::Similarity))
                } else {
                    None
                };
                if let Some((w, mechanism)) = chosen {
                    let r = kb.rule(w);
                    let value = Value::Nominal(r.effective_target());
                    v.cells[a] = CellValue::Asserted(value);
                    trace.push(TraceEntry {
                        depth: productive + 1,
                        attribute: a,
                        value,
                        rule: r.label.clone(),
                        mechanism,
                    });
                    any = true;
                }
            }
            if !any {
                break;
            }
            productive += 1;
        }

        let cands = applicable_rules(kb, &v, t);
        let chosen = if cands.is_empty() {
            nearest(kb, &v, t, &[]).map(|(w, d)| (w, d, Mechanism::Similarity))
        } else {
            for (x, &i) in cands.iter().enumerate() {
                for &j in &cands[x + 1..] {
                    if conflicting_defaults(schema, kb.rule(i), kb.rule(j), &v) {
                        conflicts.push((kb.rule(i).label.clone(), kb.rule(j).label.clone()));
                        if let (Some(act), true) = (actual, cfg.allow_dynamic_priority_update) {
                            for k in [i, j] {
                                if kb.rule(k).effective_target() == act && !bumped.contains(&k) {
                                    bumped.push(k);
                                }
                            }
                        }
                    }
                }
            }
            let w = resolve_with(kb, &cands, &bumped).expect("non-empty candidates");
            let d = premise_distance(schema, &kb.rule(w).vector, &v).unwrap_or(0.0);
            Some((w, d, Mechanism::Rule))
        };
        if let Some((w, d, mechanism)) = chosen {
            let r = kb.rule(w);
            let value = Value::Nominal(r.effective_target());
            v.cells[t] = CellValue::Asserted(value);
            trace.push(TraceEntry {
                depth: productive + 1,
                attribute: t,
                value,
                rule: r.label.clone(),
                mechanism,
            });
            winner = Some(r.label.clone());
            winner_distance = d;
        }
    }

    let outcome = ReasonOutcome {
        derived_target: v.cells[t],
        completed: v,
        winner,
        winner_distance,
        trace,
        conflicts,
        iterations,
        dp_updates: bumped.iter().map(|&i| kb.rule(i).label.clone()).collect(),
    };
    fixed_point_guard(&query, &outcome)?;
    Ok((outcome, bumped))
}

/// Reasons about `v`'s target. With `actual_target` given and updates
/// allowed, rules concordant with it in a conflicting-defaults pair gain one
/// dynamic priority point before the winner is chosen.
pub fn reason(
    kb: &mut KnowledgeBase,
    v: &Vector,
    cfg: &ReasonConfig,
    actual_target: Option<usize>,
) -> Result<ReasonOutcome> {
    let (outcome, bumped) = infer(kb, v, cfg, actual_target)?;
    for i in bumped {
        kb.rule_mut(i).dynamic_priority += 1;
    }
    Ok(outcome)
}

/// Read-only reasoning; never changes the knowledge base.
pub fn query(kb: &KnowledgeBase, v: &Vector, cfg: &ReasonConfig) -> Result<ReasonOutcome> {
    infer(kb, v, cfg, None).map(|(o, _)| o)
}
