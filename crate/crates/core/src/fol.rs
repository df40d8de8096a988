//! Restricted clause language and its translation into attribute-value vectors.
//!
//! One clause per line: a ground fact `[~]p(C)` or `p(C, V)`, or an
//! implication `lit & lit => [~]lit` over a single variable, where a literal
//! is `p(x)`, `~p(x)` or `p(x, C)`. Variables are a lowercase letter
//! optionally followed by digits; any other identifier is a constant.
//! `#` starts a comment.

use crate::error::{Error, Result};
use crate::model::{AttributeDef, CellValue, Schema, Value, Vector};

/// Name of the attribute holding instance constants.
pub const LABEL: &str = "label";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseKind {
    GroundFact,
    Implication,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub negated: bool,
    pub predicate: String,
    /// Variable (implications) or constant (facts).
    pub subject: String,
    /// Second argument of a value-qualified predicate.
    pub value: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub kind: ClauseKind,
    pub premise: Vec<Literal>,
    pub conclusion: Literal,
    /// The instance constant of a ground fact.
    pub constant: Option<String>,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TranslateOptions {
    /// Facts about instances get static priority 1.
    pub instance_priority: bool,
    /// Merge all facts about an instance into one definition concluding its label.
    pub facts_as_definitions: bool,
}

/// A schema plus one vector per clause (per instance when facts are merged).
#[derive(Debug, Clone, PartialEq)]
pub struct Translation {
    pub schema: Schema,
    pub vectors: Vec<Vector>,
}

pub fn is_variable(s: &str) -> bool {
    let mut it = s.chars();
    matches!(it.next(), Some(c) if c.is_ascii_lowercase()) && it.all(|c| c.is_ascii_digit())
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Tilde,
    LParen,
    RParen,
    Comma,
    And,
    Implies,
    Or,
}

fn lex(line: &str, line_no: usize) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            '~' | '¬' => {
                out.push((col, Tok::Tilde));
                i += 1;
            }
            '(' => {
                out.push((col, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((col, Tok::RParen));
                i += 1;
            }
            ',' => {
                out.push((col, Tok::Comma));
                i += 1;
            }
            '&' | '∧' => {
                out.push((col, Tok::And));
                i += 1;
            }
            '|' | '∨' => {
                out.push((col, Tok::Or));
                i += 1;
            }
            '⇒' => {
                out.push((col, Tok::Implies));
                i += 1;
            }
            '=' if chars.get(i + 1) == Some(&'>') => {
                out.push((col, Tok::Implies));
                i += 2;
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
                    i += 1;
                }
                out.push((col, Tok::Ident(chars[start..i].iter().collect())));
            }
            other => {
                return Err(Error::Syntax {
                    line: line_no,
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct LineParser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl LineParser<'_> {
    fn err(&self, msg: &str) -> Error {
        let column = self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end_col);
        Error::Syntax {
            line: self.line,
            column,
            message: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(&format!("expected {what}"))),
        }
    }

    fn literal(&mut self) -> Result<Literal> {
        let negated = if self.peek() == Some(&Tok::Tilde) {
            self.pos += 1;
            true
        } else {
            false
        };
        let predicate = self.ident("a predicate name")?;
        self.expect(Tok::LParen, "`(`")?;
        let subject = self.ident("an argument")?;
        let value = if self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            Some(self.ident("a second argument")?)
        } else {
            None
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(Literal {
            negated,
            predicate,
            subject,
            value,
        })
    }
}

fn unsupported(line: usize, reason: impl Into<String>) -> Error {
    Error::UnsupportedClause {
        line,
        reason: reason.into(),
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<Option<Clause>> {
    let toks = lex(line, line_no)?;
    if toks.is_empty() {
        return Ok(None);
    }
    if toks.iter().any(|t| t.1 == Tok::Or) {
        return Err(unsupported(line_no, "disjunction"));
    }
    let mut p = LineParser {
        toks: &toks,
        pos: 0,
        line: line_no,
        end_col: line.chars().count() + 1,
    };
    let mut lits = vec![p.literal()?];
    while p.peek() == Some(&Tok::And) {
        p.pos += 1;
        lits.push(p.literal()?);
    }
    let clause = if p.peek() == Some(&Tok::Implies) {
        p.pos += 1;
        let conclusion = p.literal()?;
        if p.pos < toks.len() {
            return Err(p.err("unexpected text after conclusion"));
        }
        Clause {
            kind: ClauseKind::Implication,
            premise: lits,
            conclusion,
            constant: None,
            line: line_no,
        }
    } else {
        if p.pos < toks.len() {
            return Err(p.err("expected `&` or `=>`"));
        }
        if lits.len() > 1 {
            return Err(p.err("a conjunction of facts needs one clause per fact"));
        }
        let conclusion = lits.pop().unwrap();
        Clause {
            kind: ClauseKind::GroundFact,
            premise: Vec::new(),
            constant: Some(conclusion.subject.clone()),
            conclusion,
            line: line_no,
        }
    };
    check_clause(&clause)?;
    Ok(Some(clause))
}

fn check_clause(c: &Clause) -> Result<()> {
    let line = c.line;
    for l in c.premise.iter().chain(std::iter::once(&c.conclusion)) {
        if l.predicate == LABEL {
            return Err(unsupported(line, "`label` is reserved for instance constants"));
        }
        if l.negated && l.value.is_some() {
            return Err(unsupported(line, format!("negated value-qualified literal `{}`", l.predicate)));
        }
        if l.value.as_deref().is_some_and(is_variable) {
            return Err(unsupported(line, "more than one variable"));
        }
    }
    match c.kind {
        ClauseKind::GroundFact => {
            if is_variable(&c.conclusion.subject) {
                return Err(unsupported(line, "a fact must name a constant"));
            }
        }
        ClauseKind::Implication => {
            let var = &c.conclusion.subject;
            if !is_variable(var) {
                return Err(unsupported(line, "an implication must quantify a variable"));
            }
            if c.premise.iter().any(|l| &l.subject != var) {
                return Err(unsupported(line, "more than one variable"));
            }
            if c.premise.iter().any(|l| l.predicate == c.conclusion.predicate) {
                return Err(unsupported(line, "recursive clause"));
            }
        }
    }
    Ok(())
}

/// Parses clause text, one clause per line.
pub fn parse_clauses(text: &str) -> Result<Vec<Clause>> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        if let Some(c) = parse_line(l, i + 1)? {
            out.push(c);
        }
    }
    Ok(out)
}

/// Per-predicate attribute: `None` for Boolean, value list otherwise.
struct AttrPlan {
    name: String,
    values: Option<Vec<String>>,
}

fn cell_of(plan: &AttrPlan, l: &Literal) -> CellValue {
    match (&plan.values, &l.value) {
        (None, _) => CellValue::nominal(usize::from(!l.negated)),
        (Some(vals), Some(v)) => CellValue::nominal(vals.iter().position(|x| x == v).unwrap()),
        (Some(_), None) => unreachable!("arity checked"),
    }
}

fn set_cell(cells: &mut [CellValue], i: usize, c: CellValue, line: usize) -> Result<()> {
    if cells[i].is_asserted() && cells[i] != c {
        return Err(unsupported(line, "contradictory literals for one attribute"));
    }
    cells[i] = c;
    Ok(())
}

/// Builds the schema and vectors for parsed clauses.
pub fn translate(clauses: &[Clause], opts: &TranslateOptions) -> Result<Translation> {
    let mut plans: Vec<AttrPlan> = Vec::new();
    let mut constants: Vec<String> = Vec::new();
    for c in clauses {
        for l in c.premise.iter().chain(std::iter::once(&c.conclusion)) {
            let idx = match plans.iter().position(|p| p.name == l.predicate) {
                Some(i) => i,
                None => {
                    plans.push(AttrPlan {
                        name: l.predicate.clone(),
                        values: l.value.as_ref().map(|_| Vec::new()),
                    });
                    plans.len() - 1
                }
            };
            let plan = &mut plans[idx];
            match (&mut plan.values, &l.value) {
                (None, None) => {}
                (Some(vals), Some(v)) => {
                    if !vals.contains(v) {
                        vals.push(v.clone());
                    }
                }
                _ => return Err(Error::InconsistentArity(l.predicate.clone())),
            }
        }
        if let Some(k) = &c.constant {
            if !constants.contains(k) {
                constants.push(k.clone());
            }
        }
    }
    let mut attrs = Vec::new();
    for p in &plans {
        attrs.push(match &p.values {
            None => AttributeDef::nominal(&p.name, vec!["0", "1"])?,
            Some(v) => AttributeDef::nominal(&p.name, v.clone())?,
        });
    }
    let label_idx = if constants.is_empty() {
        None
    } else {
        attrs.push(AttributeDef::nominal(LABEL, constants.clone())?);
        Some(attrs.len() - 1)
    };
    let n = attrs.len();
    let schema = Schema::new(attrs)?;
    let pidx = |name: &str| plans.iter().position(|p| p.name == name).unwrap();

    let mut vectors = Vec::new();
    let mut merged: Vec<(String, usize)> = Vec::new();
    for c in clauses {
        match c.kind {
            ClauseKind::Implication => {
                let mut cells = vec![CellValue::DontCare; n];
                for l in &c.premise {
                    let i = pidx(&l.predicate);
                    set_cell(&mut cells, i, cell_of(&plans[i], l), c.line)?;
                }
                let t = pidx(&c.conclusion.predicate);
                cells[t] = cell_of(&plans[t], &c.conclusion);
                vectors.push(Vector::new(cells, t));
            }
            ClauseKind::GroundFact => {
                let k = c.constant.as_ref().unwrap();
                let lab = label_idx.unwrap();
                let kv = CellValue::nominal(constants.iter().position(|x| x == k).unwrap());
                let i = pidx(&c.conclusion.predicate);
                let cell = cell_of(&plans[i], &c.conclusion);
                let p = u32::from(opts.instance_priority);
                if opts.facts_as_definitions {
                    if let Some(&(_, vi)) = merged.iter().find(|(name, _)| name == k) {
                        set_cell(&mut vectors[vi].cells, i, cell, c.line)?;
                    } else {
                        let mut cells = vec![CellValue::DontCare; n];
                        cells[lab] = kv;
                        cells[i] = cell;
                        merged.push((k.clone(), vectors.len()));
                        vectors.push(Vector::new(cells, lab).as_definition().with_priority(p));
                    }
                } else {
                    let mut cells = vec![CellValue::DontCare; n];
                    cells[lab] = kv;
                    cells[i] = cell;
                    vectors.push(Vector::new(cells, i).with_priority(p));
                }
            }
        }
    }
    Ok(Translation { schema, vectors })
}

fn literal_for(schema: &Schema, i: usize, value: &Value, subject: &str) -> Option<Literal> {
    let a = schema.attr(i);
    let Value::Nominal(k) = value else { return None };
    let boolean = a.values() == ["0", "1"];
    Some(if boolean {
        Literal {
            negated: *k == 0,
            predicate: a.name.clone(),
            subject: subject.to_string(),
            value: None,
        }
    } else {
        Literal {
            negated: false,
            predicate: a.name.clone(),
            subject: subject.to_string(),
            value: Some(a.values()[*k].clone()),
        }
    })
}

/// Writes a literal in clause syntax.
pub fn format_literal(l: &Literal) -> String {
    let neg = if l.negated { "~" } else { "" };
    match &l.value {
        Some(v) => format!("{neg}{}({}, {v})", l.predicate, l.subject),
        None => format!("{neg}{}({})", l.predicate, l.subject),
    }
}

/// Translates a vector back into a clause. Returns `None` for vectors the
/// clause language cannot express (e.g. `?` cells or a label target).
pub fn to_clause(schema: &Schema, v: &Vector) -> Option<Clause> {
    let label = schema.index_of(LABEL);
    if Some(v.target) == label {
        return None;
    }
    let tval = v.cells[v.target].value()?;
    let mut premise = Vec::new();
    let mut constant = None;
    for i in v.premise_indices() {
        match v.cells[i] {
            CellValue::DontCare => {}
            CellValue::DontKnow => return None,
            CellValue::Asserted(x) => {
                if Some(i) == label {
                    let Value::Nominal(k) = x else { return None };
                    constant = Some(schema.attr(i).values()[k].clone());
                } else {
                    premise.push(literal_for(schema, i, &x, "x")?);
                }
            }
        }
    }
    match constant {
        Some(k) if premise.is_empty() => Some(Clause {
            kind: ClauseKind::GroundFact,
            premise,
            conclusion: literal_for(schema, v.target, &tval, &k)?,
            constant: Some(k),
            line: 0,
        }),
        Some(_) => None,
        None if premise.is_empty() => None,
        None => Some(Clause {
            kind: ClauseKind::Implication,
            premise,
            conclusion: literal_for(schema, v.target, &tval, "x")?,
            constant: None,
            line: 0,
        }),
    }
}

/// Clause text for a clause.
pub fn format_clause(c: &Clause) -> String {
    match c.kind {
        ClauseKind::GroundFact => format_literal(&c.conclusion),
        ClauseKind::Implication => format!(
            "{} => {}",
            c.premise.iter().map(format_literal).collect::<Vec<_>>().join(" & "),
            format_literal(&c.conclusion)
        ),
    }
}
