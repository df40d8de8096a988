//! Adapting the knowledge base to a new vector, and the learn loop that
//! reasons first and adapts afterwards.

use std::fmt;

use crate::error::{Error, Result};
use crate::metrics::{cells_equal, concordant, covers, specificity};
use crate::model::{validate_vector, CellValue, KnowledgeBase, Schema, StoredRule, Vector};
use crate::reasoner::{nearest_rule, reason, ReasonConfig, ReasonOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptAction {
    StoredFirst,
    CounterUpdate,
    CoveredByMatch,
    ReplacedMatch,
    GeneralizedMatch,
    GeneralizedInput,
    StoredException,
    StoredDefault,
}

impl fmt::Display for AdaptAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdaptAction::StoredFirst => "stored_first",
            AdaptAction::CounterUpdate => "counter_update",
            AdaptAction::CoveredByMatch => "covered_by_match",
            AdaptAction::ReplacedMatch => "replaced_match",
            AdaptAction::GeneralizedMatch => "generalized_match",
            AdaptAction::GeneralizedInput => "generalized_input",
            AdaptAction::StoredException => "stored_exception",
            AdaptAction::StoredDefault => "stored_default",
        })
    }
}

/// What one adapt step did.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptReport {
    pub action: AdaptAction,
    /// Label of the closest match before adaptation.
    pub matched: Option<String>,
    /// Label of the rule stored or rewritten by this step.
    pub stored: Option<String>,
    /// Label of a rule that left the knowledge base.
    pub removed: Option<String>,
    pub predicted_target: CellValue,
    pub actual_target: usize,
    /// Metadata changes, e.g. `c(v7)=2` or `dp(v7)=1`.
    pub deltas: Vec<String>,
}

impl AdaptReport {
    /// One log line: `action=<branch> match=<id|-> stored=<id|-> ...deltas`.
    pub fn render(&self) -> String {
        let mut s = format!(
            "action={} match={} stored={}",
            self.action,
            self.matched.as_deref().unwrap_or("-"),
            self.stored.as_deref().unwrap_or("-")
        );
        if let Some(r) = &self.removed {
            s.push_str(&format!(" removed={r}"));
        }
        for d in &self.deltas {
            s.push(' ');
            s.push_str(d);
        }
        s
    }
}

/// The rule closest to `v_plus` among those sharing its target attribute.
pub fn closest_match(kb: &KnowledgeBase, v_plus: &Vector) -> Option<usize> {
    nearest_rule(kb, v_plus).map(|(i, _)| i)
}

/// Cellwise equality of the non-target cells.
pub fn vectors_equal(schema: &Schema, a: &Vector, b: &Vector) -> bool {
    a.target == b.target
        && a
            .premise_indices()
            .all(|i| cells_equal(schema.attr(i), &a.cells[i], &b.cells[i]))
}

/// The single attribute on which `a` and `b` may be generalized, if the
/// five generalization conditions hold.
pub fn can_generalize(schema: &Schema, a: &Vector, b: &Vector) -> Option<usize> {
    if a.target != b.target {
        return None;
    }
    let mut differing = a
        .premise_indices()
        .filter(|&i| !cells_equal(schema.attr(i), &a.cells[i], &b.cells[i]));
    let attr = differing.next()?;
    if differing.next().is_some() || !schema.attr(attr).is_nominal() {
        return None;
    }
    if !concordant(a, b).unwrap_or(false) {
        return None;
    }
    let (sa, sb) = (specificity(a), specificity(b));
    if sa.abs_diff(sb) > 1 || (sa <= 1 && sb <= 1) {
        return None;
    }
    Some(attr)
}

/// Sets `attr` to `*`.
pub fn drop_condition(v: &Vector, attr: usize) -> Result<Vector> {
    if specificity(v) <= 1 {
        return Err(Error::WouldCoverEverything { attr });
    }
    let mut out = v.clone();
    out.cells[attr] = CellValue::DontCare;
    Ok(out)
}

fn primed(label: &str) -> String {
    format!("{label}'")
}

fn store(
    kb: &mut KnowledgeBase,
    v_plus: Vector,
    label: Option<&str>,
    action: AdaptAction,
    report: &mut AdaptReport,
) -> Result<()> {
    let i = kb.insert_vector(v_plus, label)?;
    report.action = action;
    report.stored = Some(kb.rule(i).label.clone());
    Ok(())
}

/// Adapts the knowledge base to `v_plus`, whose target cell holds
/// `actual_target`. `label` names a rule stored by this step.
pub fn adapt(
    kb: &mut KnowledgeBase,
    v_plus: &Vector,
    actual_target: usize,
    label: Option<&str>,
) -> Result<AdaptReport> {
    let mut v_plus = v_plus.clone();
    v_plus.cells[v_plus.target] = CellValue::nominal(actual_target);
    validate_vector(kb.schema(), &v_plus).map_err(Error::SchemaMismatch)?;

    let mut report = AdaptReport {
        action: AdaptAction::StoredFirst,
        matched: None,
        stored: None,
        removed: None,
        predicted_target: CellValue::DontKnow,
        actual_target,
        deltas: Vec::new(),
    };
    let Some(m) = closest_match(kb, &v_plus) else {
        store(kb, v_plus, label, AdaptAction::StoredFirst, &mut report)?;
        return Ok(report);
    };
    let schema = kb.schema().clone();
    let mrule = kb.rule(m).clone();
    let mv = &mrule.vector;
    report.matched = Some(mrule.label.clone());
    let conc = concordant(mv, &v_plus)?;

    if vectors_equal(&schema, mv, &v_plus) {
        let r = kb.rule_mut(m);
        r.observe(actual_target);
        let name = schema.attr(v_plus.target).format_value(&crate::model::Value::Nominal(actual_target));
        report.action = AdaptAction::CounterUpdate;
        report.deltas.push(format!(
            "counters({})[{}]={}",
            r.label, name, r.counters[actual_target]
        ));
    } else if conc && covers(&schema, mv, &v_plus) {
        let r = kb.rule_mut(m);
        r.num_covers += 1;
        report.action = AdaptAction::CoveredByMatch;
        report.deltas.push(format!("c({})={}", r.label, r.num_covers));
    } else if conc && covers(&schema, &v_plus, mv) {
        let name = kb.fresh_label(label);
        let mut rule = StoredRule::from_vector(name, v_plus, &schema)?;
        rule.num_covers = mrule.num_covers + 1;
        report.deltas.push(format!("c({})={}", rule.label, rule.num_covers));
        report.stored = Some(rule.label.clone());
        report.removed = Some(mrule.label.clone());
        kb.replace(m, rule)?;
        report.action = AdaptAction::ReplacedMatch;
    } else if let Some(attr) = can_generalize(&schema, mv, &v_plus) {
        let (sv, sm) = (specificity(&v_plus), specificity(mv));
        let p = mv.static_priority.max(v_plus.static_priority);
        let both_def = mv.is_definition && v_plus.is_definition;
        if sv > sm && sm > 1 && mv.cells[attr] != CellValue::DontCare {
            let mut rule = mrule.clone();
            rule.vector = drop_condition(mv, attr)?;
            rule.vector.static_priority = p;
            rule.vector.is_definition = both_def;
            rule.label = kb.fresh_label(Some(&primed(&mrule.label)));
            report.stored = Some(rule.label.clone());
            report.deltas.push(format!("p({})={}", rule.label, p));
            kb.replace(m, rule)?;
            report.action = AdaptAction::GeneralizedMatch;
        } else if sv > 1 && v_plus.cells[attr] != CellValue::DontCare {
            let mut g = drop_condition(&v_plus, attr)?;
            g.static_priority = p;
            g.is_definition = both_def;
            let name = kb.fresh_label(Some(&primed(&mrule.label)));
            let mut rule = StoredRule::from_vector(name, g, &schema)?;
            rule.num_covers = mrule.num_covers;
            report.stored = Some(rule.label.clone());
            report.removed = Some(mrule.label.clone());
            report.deltas.push(format!("p({})={}", rule.label, p));
            report.deltas.push(format!("c({})={}", rule.label, rule.num_covers));
            kb.replace(m, rule)?;
            report.action = AdaptAction::GeneralizedInput;
        } else {
            store(kb, v_plus, label, AdaptAction::StoredDefault, &mut report)?;
        }
    } else {
        let action = if covers(&schema, mv, &v_plus) {
            AdaptAction::StoredException
        } else {
            AdaptAction::StoredDefault
        };
        store(kb, v_plus, label, action, &mut report)?;
    }
    Ok(report)
}

/// Learns one vector: reason with the actual target known, then adapt.
pub fn learn(
    kb: &mut KnowledgeBase,
    v: &Vector,
    actual_target: usize,
    cfg: &ReasonConfig,
) -> Result<(ReasonOutcome, AdaptReport)> {
    learn_as(kb, v, actual_target, cfg, None)
}

/// [`learn`] with a label for any rule the step stores. When reasoning
/// asserted premise cells, the stored rule is named `<label>'`.
pub fn learn_as(
    kb: &mut KnowledgeBase,
    v: &Vector,
    actual_target: usize,
    cfg: &ReasonConfig,
    label: Option<&str>,
) -> Result<(ReasonOutcome, AdaptReport)> {
    let mut probe = v.clone();
    probe.cells[probe.target] = CellValue::nominal(actual_target);
    validate_vector(kb.schema(), &probe).map_err(Error::SchemaMismatch)?;

    if kb.is_empty() {
        let mut query = v.clone();
        query.cells[query.target] = CellValue::DontKnow;
        let outcome = ReasonOutcome {
            completed: query,
            derived_target: CellValue::DontKnow,
            winner: None,
            winner_distance: 0.0,
            trace: Vec::new(),
            conflicts: Vec::new(),
            iterations: 0,
            dp_updates: Vec::new(),
        };
        let report = adapt(kb, &probe, actual_target, label)?;
        return Ok((outcome, report));
    }

    let outcome = reason(kb, v, cfg, Some(actual_target))?;
    let mut v_plus = outcome.completed.clone();
    v_plus.is_definition = v.is_definition;
    v_plus.static_priority = v.static_priority;
    let label = label.map(|l| {
        if outcome.asserted_premises() {
            primed(l)
        } else {
            l.to_string()
        }
    });
    let mut report = adapt(kb, &v_plus, actual_target, label.as_deref())?;
    report.predicted_target = outcome.derived_target;
    let mut deltas: Vec<String> = outcome
        .dp_updates
        .iter()
        .filter_map(|l| kb.find(l).map(|i| format!("dp({l})={}", kb.rule(i).dynamic_priority)))
        .collect();
    deltas.append(&mut report.deltas);
    report.deltas = deltas;
    Ok((outcome, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AttributeDef;

    fn schema() -> Schema {
        Schema::new(vec![
            AttributeDef::nominal("a", vec!["0", "1", "2"]).unwrap(),
            AttributeDef::nominal("b", vec!["0", "1", "2"]).unwrap(),
            AttributeDef::nominal("c", vec!["0", "1", "2"]).unwrap(),
            AttributeDef::nominal("t", vec!["0", "1"]).unwrap(),
        ])
        .unwrap()
    }

    fn v(cells: [i32; 4]) -> Vector {
        let cells = cells
            .iter()
            .map(|&c| match c {
                -1 => CellValue::DontCare,
                -2 => CellValue::DontKnow,
                x => CellValue::nominal(x as usize),
            })
            .collect();
        Vector::new(cells, 3)
    }

    #[test]
    fn duplicate_presentation_updates_counters() {
        let mut kb = KnowledgeBase::new(schema());
        let cfg = ReasonConfig::default();
        let x = v([0, 1, 2, 1]);
        let (_, r1) = learn(&mut kb, &x, 1, &cfg).unwrap();
        assert_eq!(r1.action, AdaptAction::StoredFirst);
        let (o, r2) = learn(&mut kb, &x, 1, &cfg).unwrap();
        assert_eq!(o.derived_target, CellValue::nominal(1));
        assert_eq!(r2.action, AdaptAction::CounterUpdate);
        assert_eq!(kb.len(), 1);
        assert_eq!(kb.rule(0).counters, vec![0, 2]);
    }

    #[test]
    fn generalization_conditions() {
        let s = schema();
        assert_eq!(can_generalize(&s, &v([0, 1, 2, 1]), &v([0, 2, 2, 1])), Some(1));
        // not concordant
        assert_eq!(can_generalize(&s, &v([0, 1, 2, 1]), &v([0, 2, 2, 0])), None);
        // two differences
        assert_eq!(can_generalize(&s, &v([0, 1, 2, 1]), &v([1, 2, 2, 1])), None);
        // both single-premise
        assert_eq!(can_generalize(&s, &v([0, -1, -1, 1]), &v([1, -1, -1, 1])), None);
        // a value against `*` counts as a difference
        assert_eq!(can_generalize(&s, &v([0, 1, 2, 1]), &v([0, 1, -1, 1])), Some(2));
    }

    #[test]
    fn drop_guard() {
        assert!(matches!(
            drop_condition(&v([0, -1, -1, 1]), 0),
            Err(Error::WouldCoverEverything { attr: 0 })
        ));
        assert_eq!(drop_condition(&v([0, 1, -1, 1]), 0).unwrap(), v([-1, 1, -1, 1]));
    }

    #[test]
    fn branch_actions() {
        let cfg = ReasonConfig::default();
        let mut kb = KnowledgeBase::new(schema());
        learn(&mut kb, &v([0, 1, -1, 1]), 1, &cfg).unwrap();
        // covered by match
        let (_, r) = learn(&mut kb, &v([0, 1, 2, 1]), 1, &cfg).unwrap();
        assert_eq!(r.action, AdaptAction::CoveredByMatch);
        assert_eq!(kb.rule(0).num_covers, 1);
        // exception
        let (_, r) = learn(&mut kb, &v([0, 1, 0, 0]), 0, &cfg).unwrap();
        assert_eq!(r.action, AdaptAction::StoredException);
        // replacement of a more specific match
        let mut kb = KnowledgeBase::new(schema());
        learn(&mut kb, &v([0, 1, 2, 1]), 1, &cfg).unwrap();
        let (_, r) = learn(&mut kb, &v([0, 1, -1, 1]), 1, &cfg).unwrap();
        assert_eq!(r.action, AdaptAction::ReplacedMatch);
        assert_eq!(kb.len(), 1);
        assert_eq!(kb.rule(0).num_covers, 1);
        // generalization of the input
        let (_, r) = learn(&mut kb, &v([0, 2, -1, 1]), 1, &cfg).unwrap();
        assert_eq!(r.action, AdaptAction::GeneralizedInput);
        assert_eq!(kb.rule(0).vector, v([0, -1, -1, 1]));
        assert!(kb.rule(0).label.ends_with('\''));
    }
}
