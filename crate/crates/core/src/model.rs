//! Attribute-value data model: schemas, cells, vectors, stored rules and the
//! knowledge base container.

use std::fmt;

use crate::error::{Error, Result};

/// Default fraction of a linear attribute's range used as its equality tolerance.
pub const DEFAULT_DELTA_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    Nominal(Vec<String>),
    Linear { min: f64, max: f64 },
}

/// One attribute of a schema.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeDef {
    pub name: String,
    pub kind: AttributeKind,
    /// Only meaningful for linear attributes.
    pub delta_fraction: f64,
}

impl AttributeDef {
    pub fn nominal<S: Into<String>>(name: impl Into<String>, values: Vec<S>) -> Result<Self> {
        let name = name.into();
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(Error::InvalidSchema(format!("attribute `{name}` has no values")));
        }
        for (i, v) in values.iter().enumerate() {
            if v.is_empty() {
                return Err(Error::InvalidSchema(format!("attribute `{name}` has an empty value name")));
            }
            if values[..i].contains(v) {
                return Err(Error::InvalidSchema(format!(
                    "attribute `{name}` lists value `{v}` twice"
                )));
            }
        }
        Ok(AttributeDef {
            name,
            kind: AttributeKind::Nominal(values),
            delta_fraction: DEFAULT_DELTA_FRACTION,
        })
    }

    pub fn linear(name: impl Into<String>, min: f64, max: f64, delta_fraction: f64) -> Result<Self> {
        let name = name.into();
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::InvalidSchema(format!(
                "attribute `{name}` needs min < max, got {min}..{max}"
            )));
        }
        if !(delta_fraction > 0.0 && delta_fraction <= 1.0) {
            return Err(Error::InvalidSchema(format!(
                "attribute `{name}` needs delta in (0,1], got {delta_fraction}"
            )));
        }
        Ok(AttributeDef {
            name,
            kind: AttributeKind::Linear { min, max },
            delta_fraction,
        })
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self.kind, AttributeKind::Nominal(_))
    }

    pub fn values(&self) -> &[String] {
        match &self.kind {
            AttributeKind::Nominal(v) => v,
            AttributeKind::Linear { .. } => &[],
        }
    }

    /// Width of a linear domain; 1 for nominal attributes.
    pub fn range(&self) -> f64 {
        match self.kind {
            AttributeKind::Linear { min, max } => max - min,
            AttributeKind::Nominal(_) => 1.0,
        }
    }

    /// Absolute equality tolerance for linear values.
    pub fn delta(&self) -> f64 {
        self.delta_fraction * self.range()
    }

    pub fn value_index(&self, name: &str) -> Option<usize> {
        self.values().iter().position(|v| v == name)
    }

    /// Parses a value token (not `*` or `?`).
    pub fn parse_value(&self, token: &str) -> std::result::Result<Value, String> {
        match &self.kind {
            AttributeKind::Nominal(vals) => vals
                .iter()
                .position(|v| v == token)
                .map(Value::Nominal)
                .ok_or_else(|| format!("`{token}` is not a value of `{}`", self.name)),
            AttributeKind::Linear { min, max } => {
                let x: f64 = token
                    .parse()
                    .map_err(|_| format!("`{token}` is not a number for `{}`", self.name))?;
                if x < *min || x > *max || !x.is_finite() {
                    return Err(format!(
                        "{x} is outside [{min}, {max}] for `{}`",
                        self.name
                    ));
                }
                Ok(Value::Real(x))
            }
        }
    }

    pub fn format_value(&self, value: &Value) -> String {
        match (value, &self.kind) {
            (Value::Nominal(i), AttributeKind::Nominal(vals)) => {
                vals.get(*i).cloned().unwrap_or_else(|| format!("#{i}"))
            }
            (Value::Real(x), _) => format!("{x}"),
            (Value::Nominal(i), _) => format!("#{i}"),
        }
    }

    pub fn format_cell(&self, cell: &CellValue) -> String {
        match cell {
            CellValue::Asserted(v) => self.format_value(v),
            CellValue::DontCare => "*".to_string(),
            CellValue::DontKnow => "?".to_string(),
        }
    }

    /// Value equality under this attribute's semantics (delta-equality for linear).
    pub fn values_equal(&self, a: &Value, b: &Value) -> bool {
        match (a, b) {
            (Value::Nominal(x), Value::Nominal(y)) => x == y,
            (Value::Real(x), Value::Real(y)) => (x - y).abs() <= self.delta() + 1e-12,
            _ => false,
        }
    }

    fn check_value(&self, v: &Value) -> bool {
        match (v, &self.kind) {
            (Value::Nominal(i), AttributeKind::Nominal(vals)) => *i < vals.len(),
            (Value::Real(x), AttributeKind::Linear { min, max }) => {
                x.is_finite() && *x >= *min && *x <= *max
            }
            _ => false,
        }
    }
}

/// Ordered attribute universe.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    attributes: Vec<AttributeDef>,
}

impl Schema {
    pub fn new(attributes: Vec<AttributeDef>) -> Result<Self> {
        if attributes.len() < 2 {
            return Err(Error::InvalidSchema("a schema needs at least two attributes".into()));
        }
        for (i, a) in attributes.iter().enumerate() {
            if a.name.is_empty() {
                return Err(Error::InvalidSchema("empty attribute name".into()));
            }
            if attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::InvalidSchema(format!("duplicate attribute `{}`", a.name)));
            }
        }
        Ok(Schema { attributes })
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn attr(&self, i: usize) -> &AttributeDef {
        &self.attributes[i]
    }

    pub fn attributes(&self) -> &[AttributeDef] {
        &self.attributes
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    /// Copy of the schema with every linear attribute's delta fraction replaced.
    pub fn with_delta_fraction(&self, fraction: f64) -> Result<Self> {
        let mut attributes = self.attributes.clone();
        for a in &mut attributes {
            if !a.is_nominal() {
                if !(fraction > 0.0 && fraction <= 1.0) {
                    return Err(Error::InvalidSchema(format!(
                        "delta fraction must be in (0,1], got {fraction}"
                    )));
                }
                a.delta_fraction = fraction;
            }
        }
        Ok(Schema { attributes })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Nominal(usize),
    Real(f64),
}

/// One attribute slot of a vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellValue {
    Asserted(Value),
    /// `*`
    DontCare,
    /// `?`
    DontKnow,
}

impl CellValue {
    pub fn nominal(i: usize) -> Self {
        CellValue::Asserted(Value::Nominal(i))
    }

    pub fn real(x: f64) -> Self {
        CellValue::Asserted(Value::Real(x))
    }

    pub fn is_asserted(&self) -> bool {
        matches!(self, CellValue::Asserted(_))
    }

    pub fn value(&self) -> Option<Value> {
        match self {
            CellValue::Asserted(v) => Some(*v),
            _ => None,
        }
    }

    pub fn nominal_index(&self) -> Option<usize> {
        match self {
            CellValue::Asserted(Value::Nominal(i)) => Some(*i),
            _ => None,
        }
    }
}

/// A fixed-arity row of cells with a designated target attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    pub cells: Vec<CellValue>,
    pub target: usize,
    pub is_definition: bool,
    pub static_priority: u32,
}

impl Vector {
    pub fn new(cells: Vec<CellValue>, target: usize) -> Self {
        Vector {
            cells,
            target,
            is_definition: false,
            static_priority: 0,
        }
    }

    pub fn with_priority(mut self, p: u32) -> Self {
        self.static_priority = p;
        self
    }

    pub fn as_definition(mut self) -> Self {
        self.is_definition = true;
        self
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn target_cell(&self) -> CellValue {
        self.cells[self.target]
    }

    /// Nominal index of the target cell, if asserted.
    pub fn target_value(&self) -> Option<usize> {
        self.cells[self.target].nominal_index()
    }

    /// Indices of non-target attributes.
    pub fn premise_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.cells.len()).filter(move |&i| i != self.target)
    }
}

/// Problems reported by [`validate_vector`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Arity { expected: usize, found: usize },
    TargetIndex(usize),
    NonNominalTarget(usize),
    OutOfDomain(usize),
    DontCareTarget,
    AllDontCarePremise,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Arity { expected, found } => {
                write!(f, "arity mismatch: expected {expected} cells, found {found}")
            }
            Violation::TargetIndex(i) => write!(f, "target index {i} out of range"),
            Violation::NonNominalTarget(i) => write!(f, "target attribute {i} is not nominal"),
            Violation::OutOfDomain(i) => write!(f, "attribute {i}: value out of domain"),
            Violation::DontCareTarget => write!(f, "target cell is don't-care"),
            Violation::AllDontCarePremise => {
                write!(f, "premise is all don't-care: it covers every vector")
            }
        }
    }
}

/// Reports every invariant violation of `v` against `schema`.
pub fn validate_vector(schema: &Schema, v: &Vector) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if v.cells.len() != schema.len() {
        out.push(Violation::Arity {
            expected: schema.len(),
            found: v.cells.len(),
        });
        return Err(out);
    }
    if v.target >= schema.len() {
        out.push(Violation::TargetIndex(v.target));
        return Err(out);
    }
    if !schema.attr(v.target).is_nominal() {
        out.push(Violation::NonNominalTarget(v.target));
    }
    for (i, c) in v.cells.iter().enumerate() {
        if let CellValue::Asserted(val) = c {
            if !schema.attr(i).check_value(val) {
                out.push(Violation::OutOfDomain(i));
            }
        }
    }
    if v.cells[v.target] == CellValue::DontCare {
        out.push(Violation::DontCareTarget);
    }
    if v.premise_indices().all(|i| v.cells[i] == CellValue::DontCare) {
        out.push(Violation::AllDontCarePremise);
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// A vector plus learning metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredRule {
    pub label: String,
    /// The target cell always holds the effective target value.
    pub vector: Vector,
    pub dynamic_priority: u32,
    pub num_covers: u32,
    /// One entry per value of the target attribute.
    pub counters: Vec<u32>,
}

impl StoredRule {
    /// Fresh rule from a vector with an asserted nominal target.
    pub fn from_vector(label: impl Into<String>, vector: Vector, schema: &Schema) -> Result<Self> {
        validate_vector(schema, &vector).map_err(Error::SchemaMismatch)?;
        let t = vector.target_value().ok_or(Error::TargetUnasserted)?;
        let mut counters = vec![0; schema.attr(vector.target).values().len()];
        counters[t] = 1;
        Ok(StoredRule {
            label: label.into(),
            vector,
            dynamic_priority: 0,
            num_covers: 0,
            counters,
        })
    }

    /// The target value the rule currently concludes.
    pub fn effective_target(&self) -> usize {
        self.vector
            .target_value()
            .expect("stored rule target is always asserted")
    }

    /// Records one observation of `value`; switches the effective value only
    /// when its count strictly exceeds the current one.
    pub fn observe(&mut self, value: usize) {
        self.counters[value] += 1;
        let cur = self.effective_target();
        if self.counters[value] > self.counters[cur] {
            self.vector.cells[self.vector.target] = CellValue::nominal(value);
        }
    }

    pub fn specificity(&self) -> usize {
        crate::metrics::specificity(&self.vector)
    }
}

/// Ordered collection of stored rules over one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    schema: Schema,
    rules: Vec<StoredRule>,
    next_label: usize,
}

impl KnowledgeBase {
    pub fn new(schema: Schema) -> Self {
        KnowledgeBase {
            schema,
            rules: Vec::new(),
            next_label: 1,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rules(&self) -> &[StoredRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, i: usize) -> &StoredRule {
        &self.rules[i]
    }

    pub fn rule_mut(&mut self, i: usize) -> &mut StoredRule {
        &mut self.rules[i]
    }

    pub fn find(&self, label: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.label == label)
    }

    /// Rule by label, or [`Error::UnknownRule`].
    pub fn get(&self, label: &str) -> Result<&StoredRule> {
        self.find(label)
            .map(|i| &self.rules[i])
            .ok_or_else(|| Error::UnknownRule(label.to_string()))
    }

    /// Indices of rules concluding about attribute `target`.
    pub fn rules_for_target(&self, target: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.rules.len()).filter(move |&i| self.rules[i].vector.target == target)
    }

    /// A label not used by any rule: `base` itself if free, else `base` with a
    /// numeric suffix. Without a base, labels are `r1`, `r2`, ...
    pub fn fresh_label(&mut self, base: Option<&str>) -> String {
        match base {
            Some(b) => {
                if self.find(b).is_none() {
                    return b.to_string();
                }
                (2..)
                    .map(|k| format!("{b}~{k}"))
                    .find(|l| self.find(l).is_none())
                    .unwrap()
            }
            None => loop {
                let l = format!("r{}", self.next_label);
                self.next_label += 1;
                if self.find(&l).is_none() {
                    return l;
                }
            },
        }
    }

    fn check(&self, rule: &StoredRule, skip: Option<usize>) -> Result<()> {
        validate_vector(&self.schema, &rule.vector).map_err(Error::SchemaMismatch)?;
        if rule.vector.target_value().is_none() {
            return Err(Error::TargetUnasserted);
        }
        let n = self.schema.attr(rule.vector.target).values().len();
        if rule.counters.len() != n || rule.counters.iter().sum::<u32>() == 0 {
            return Err(Error::InvalidSchema(format!(
                "rule `{}` needs {n} counters with a positive sum",
                rule.label
            )));
        }
        if self
            .rules
            .iter()
            .enumerate()
            .any(|(i, r)| Some(i) != skip && r.label == rule.label)
        {
            return Err(Error::InvalidSchema(format!("duplicate label `{}`", rule.label)));
        }
        Ok(())
    }

    /// Appends a rule; returns its index.
    pub fn insert(&mut self, rule: StoredRule) -> Result<usize> {
        self.check(&rule, None)?;
        self.rules.push(rule);
        Ok(self.rules.len() - 1)
    }

    /// Stores `vector` as a fresh rule under `label` (auto label when `None`).
    pub fn insert_vector(&mut self, vector: Vector, label: Option<&str>) -> Result<usize> {
        let label = self.fresh_label(label);
        let rule = StoredRule::from_vector(label, vector, &self.schema)?;
        self.insert(rule)
    }

    /// Replaces the rule at `i`, keeping its position.
    pub fn replace(&mut self, i: usize, rule: StoredRule) -> Result<()> {
        self.check(&rule, Some(i))?;
        self.rules[i] = rule;
        Ok(())
    }

    pub fn remove(&mut self, i: usize) -> StoredRule {
        self.rules.remove(i)
    }
}
