//! Knowledge-base text format.
//!
//! ```text
//! situation : nominal(0,1,2)
//! length : linear(0,10) delta=0.05
//!
//! v7 = * 1 * 0 0 * 2_T p=0 dp=2 c=0 counters=[2:1]
//! ```
//!
//! Rule lines hold one token per attribute (`*`, `?`, a value name or a real
//! literal; the target carries a `_T` suffix) followed by optional
//! annotations `p=`, `def`, `dp=`, `c=` and `counters=[value:count,...]`.
//! A cell written `{a,b}` expands the line into one vector per combination.
//! Text after `#` is a comment.

use crate::error::{Error, Result};
use crate::model::{
    AttributeDef, AttributeKind, CellValue, KnowledgeBase, Schema, StoredRule, Vector,
    DEFAULT_DELTA_FRACTION,
};

/// A parsed rule line, before insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleLine {
    pub label: Option<String>,
    /// More than one entry when the line used internal disjunction.
    pub vectors: Vec<Vector>,
    pub dynamic_priority: Option<u32>,
    pub num_covers: Option<u32>,
    pub counters: Option<Vec<(String, u32)>>,
}

/// Whether `line` looks like an attribute header.
pub fn is_header_line(line: &str) -> bool {
    let Some((name, rest)) = line.split_once(':') else {
        return false;
    };
    let rest = rest.trim_start();
    !name.trim().is_empty()
        && !name.trim().contains(char::is_whitespace)
        && (rest.starts_with("nominal(") || rest.starts_with("linear("))
}

/// Parses one header line into an attribute definition.
pub fn parse_header_line(line: &str, line_no: usize) -> Result<AttributeDef> {
    let err = |col: usize, msg: &str| Error::parse(line_no, col, msg);
    let (name, rest) = line.split_once(':').ok_or_else(|| err(1, "expected `name : kind(...)`"))?;
    let name = name.trim();
    let rest = rest.trim();
    let col = line.find(rest).unwrap_or(0) + 1;
    let open = rest.find('(').ok_or_else(|| err(col, "expected `(`"))?;
    let close = rest.rfind(')').ok_or_else(|| err(col, "expected `)`"))?;
    let kind = &rest[..open];
    let args: Vec<&str> = rest[open + 1..close].split(',').map(str::trim).collect();
    let tail = rest[close + 1..].trim();
    let attr = match kind {
        "nominal" => {
            if !tail.is_empty() {
                return Err(err(col + close + 1, "unexpected text after nominal domain"));
            }
            AttributeDef::nominal(name, args)
        }
        "linear" => {
            if args.len() != 2 {
                return Err(err(col + open, "linear domain needs `(min,max)`"));
            }
            let min: f64 = args[0].parse().map_err(|_| err(col + open, "bad linear minimum"))?;
            let max: f64 = args[1].parse().map_err(|_| err(col + open, "bad linear maximum"))?;
            let delta = if tail.is_empty() {
                DEFAULT_DELTA_FRACTION
            } else {
                let d = tail
                    .strip_prefix("delta=")
                    .ok_or_else(|| err(col + close + 1, "expected `delta=<fraction>`"))?;
                d.parse().map_err(|_| err(col + close + 1, "bad delta fraction"))?
            };
            AttributeDef::linear(name, min, max, delta)
        }
        _ => return Err(err(col, "expected `nominal(` or `linear(`")),
    };
    attr.map_err(|e| err(col, &e.to_string()))
}

/// Canonical header line for an attribute.
pub fn write_header_line(a: &AttributeDef) -> String {
    match &a.kind {
        AttributeKind::Nominal(vals) => format!("{} : nominal({})", a.name, vals.join(",")),
        AttributeKind::Linear { min, max } => {
            format!("{} : linear({min},{max}) delta={}", a.name, a.delta_fraction)
        }
    }
}

/// Splits on whitespace, keeping `{...}` groups whole; returns (column, token).
fn tokenize(line: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let mut depth = 0;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                out.push((start + 1, std::mem::take(&mut cur)));
            }
            continue;
        }
        if cur.is_empty() {
            start = i;
        }
        match ch {
            '{' => depth += 1,
            '}' => depth -= 1,
            _ => {}
        }
        if !(ch.is_whitespace() && depth > 0) {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push((start + 1, cur));
    }
    out
}

fn parse_cell(attr: &AttributeDef, tok: &str) -> std::result::Result<Vec<CellValue>, String> {
    match tok {
        "*" => Ok(vec![CellValue::DontCare]),
        "?" => Ok(vec![CellValue::DontKnow]),
        _ => {
            if let Some(inner) = tok.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
                let vals = inner
                    .split(',')
                    .map(|x| attr.parse_value(x.trim()).map(CellValue::Asserted))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                if vals.is_empty() {
                    return Err("empty disjunction".into());
                }
                Ok(vals)
            } else {
                attr.parse_value(tok).map(|v| vec![CellValue::Asserted(v)])
            }
        }
    }
}

/// Parses a rule line against `schema`.
pub fn parse_rule_line(schema: &Schema, line: &str, line_no: usize) -> Result<RuleLine> {
    let line = line.split('#').next().unwrap_or("");
    let toks = tokenize(line);
    let mut idx = 0;
    let mut label = None;
    if toks.len() >= 2 && toks[1].1 == "=" {
        label = Some(toks[0].1.clone());
        idx = 2;
    }
    let n = schema.len();
    if toks.len() < idx + n {
        let col = toks.last().map(|t| t.0).unwrap_or(1);
        return Err(Error::parse(
            line_no,
            col,
            format!("expected {n} cells, found {}", toks.len().saturating_sub(idx)),
        ));
    }
    let mut target = None;
    let mut choices: Vec<Vec<CellValue>> = Vec::with_capacity(n);
    for (a, (col, tok)) in toks[idx..idx + n].iter().enumerate() {
        let tok = match tok.strip_suffix("_T") {
            Some(t) => {
                if target.replace(a).is_some() {
                    return Err(Error::parse(line_no, *col, "more than one target cell"));
                }
                t
            }
            None => tok.as_str(),
        };
        let cell = parse_cell(schema.attr(a), tok).map_err(|m| Error::parse(line_no, *col, m))?;
        choices.push(cell);
    }
    let target = target.ok_or_else(|| Error::parse(line_no, 1, "no target cell (suffix `_T`)"))?;

    let mut out = RuleLine {
        label,
        vectors: Vec::new(),
        dynamic_priority: None,
        num_covers: None,
        counters: None,
    };
    let mut priority = 0;
    let mut definition = false;
    for (col, tok) in &toks[idx + n..] {
        let bad = |m: &str| Error::parse(line_no, *col, format!("{m}: `{tok}`"));
        let int = |s: &str| s.parse::<u32>().map_err(|_| bad("expected a non-negative integer"));
        if tok == "def" {
            definition = true;
        } else if let Some(x) = tok.strip_prefix("p=") {
            priority = int(x)?;
        } else if let Some(x) = tok.strip_prefix("dp=") {
            out.dynamic_priority = Some(int(x)?);
        } else if let Some(x) = tok.strip_prefix("c=") {
            out.num_covers = Some(int(x)?);
        } else if let Some(x) = tok.strip_prefix("counters=[") {
            let body = x.strip_suffix(']').ok_or_else(|| bad("unterminated counters"))?;
            let mut cs = Vec::new();
            for part in body.split(',').filter(|p| !p.is_empty()) {
                let (k, v) = part.rsplit_once(':').ok_or_else(|| bad("expected value:count"))?;
                cs.push((k.to_string(), int(v)?));
            }
            out.counters = Some(cs);
        } else {
            return Err(bad("unknown annotation"));
        }
    }

    // cross product, first attribute varying slowest
    let mut rows: Vec<Vec<CellValue>> = vec![Vec::with_capacity(n)];
    for options in &choices {
        let mut next = Vec::with_capacity(rows.len() * options.len());
        for r in &rows {
            for c in options {
                let mut r2 = r.clone();
                r2.push(*c);
                next.push(r2);
            }
        }
        rows = next;
    }
    out.vectors = rows
        .into_iter()
        .map(|cells| Vector {
            cells,
            target,
            is_definition: definition,
            static_priority: priority,
        })
        .collect();
    Ok(out)
}

/// Expands a rule line that may use `{a,b,...}` cells into plain vectors.
pub fn expand_internal_disjunction(schema: &Schema, rule_text: &str) -> Result<Vec<Vector>> {
    Ok(parse_rule_line(schema, rule_text, 1)?.vectors)
}

fn is_blank_or_comment(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Parses the header section of a text; returns the schema and the index of
/// the first line after it.
pub fn parse_schema(text: &str) -> Result<(Schema, usize)> {
    let lines: Vec<&str> = text.lines().collect();
    let mut attrs = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let l = lines[i];
        if is_blank_or_comment(l) {
            i += 1;
            continue;
        }
        if !is_header_line(l) {
            break;
        }
        attrs.push(parse_header_line(l, i + 1)?);
        i += 1;
    }
    let schema = Schema::new(attrs).map_err(|e| Error::parse(i.max(1), 1, e.to_string()))?;
    Ok((schema, i))
}

/// Applies stored metadata from a rule line to a fresh rule.
fn apply_metadata(schema: &Schema, rule: &mut StoredRule, line: &RuleLine, line_no: usize) -> Result<()> {
    if let Some(dp) = line.dynamic_priority {
        rule.dynamic_priority = dp;
    }
    if let Some(c) = line.num_covers {
        rule.num_covers = c;
    }
    if let Some(cs) = &line.counters {
        let attr = schema.attr(rule.vector.target);
        let mut counters = vec![0; attr.values().len()];
        for (k, v) in cs {
            let i = attr
                .value_index(k)
                .ok_or_else(|| Error::parse(line_no, 1, format!("unknown counter value `{k}`")))?;
            counters[i] = *v;
        }
        let eff = rule.effective_target();
        let max = counters.iter().copied().max().unwrap_or(0);
        if max == 0 || counters[eff] != max {
            return Err(Error::parse(
                line_no,
                1,
                "target value must hold the largest counter",
            ));
        }
        rule.counters = counters;
    }
    Ok(())
}

/// Parses rule lines of a text into vectors, ignoring metadata.
pub fn parse_vectors(schema: &Schema, text: &str, first_line: usize) -> Result<Vec<(Option<String>, Vector)>> {
    let mut out = Vec::new();
    for (k, l) in text.lines().enumerate().skip(first_line) {
        if is_blank_or_comment(l) {
            continue;
        }
        let r = parse_rule_line(schema, l, k + 1)?;
        let multi = r.vectors.len() > 1;
        for (j, v) in r.vectors.into_iter().enumerate() {
            let label = r.label.as_ref().map(|b| if multi { format!("{b}.{}", j + 1) } else { b.clone() });
            out.push((label, v));
        }
    }
    Ok(out)
}

/// Parses a knowledge-base file, metadata included.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase> {
    let (schema, start) = parse_schema(text)?;
    let mut kb = KnowledgeBase::new(schema.clone());
    for (k, l) in text.lines().enumerate().skip(start) {
        if is_blank_or_comment(l) {
            continue;
        }
        let line_no = k + 1;
        let r = parse_rule_line(&schema, l, line_no)?;
        let multi = r.vectors.len() > 1;
        for (j, v) in r.vectors.iter().enumerate() {
            let base = r.label.as_ref().map(|b| if multi { format!("{b}.{}", j + 1) } else { b.clone() });
            if let Some(b) = &base {
                if kb.find(b).is_some() {
                    return Err(Error::parse(line_no, 1, format!("duplicate label `{b}`")));
                }
            }
            let label = kb.fresh_label(base.as_deref());
            let mut rule = StoredRule::from_vector(label, v.clone(), &schema)
                .map_err(|e| Error::parse(line_no, 1, e.to_string()))?;
            apply_metadata(&schema, &mut rule, &r, line_no)?;
            kb.insert(rule).map_err(|e| Error::parse(line_no, 1, e.to_string()))?;
        }
    }
    Ok(kb)
}

/// Cells of a vector in rule-line syntax.
pub fn write_cells(schema: &Schema, v: &Vector) -> String {
    v.cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let s = schema.attr(i).format_cell(c);
            if i == v.target {
                format!("{s}_T")
            } else {
                s
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Canonical line for a stored rule.
pub fn write_rule(schema: &Schema, r: &StoredRule) -> String {
    let attr = schema.attr(r.vector.target);
    let counters = r
        .counters
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, c)| format!("{}:{c}", attr.values()[i]))
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "{} = {} p={}{} dp={} c={} counters=[{}]",
        r.label,
        write_cells(schema, &r.vector),
        r.vector.static_priority,
        if r.vector.is_definition { " def" } else { "" },
        r.dynamic_priority,
        r.num_covers,
        counters
    )
}

/// Line for a plain vector: cells plus `p=` and `def` when set.
pub fn write_vector(schema: &Schema, v: &Vector) -> String {
    let mut s = write_cells(schema, v);
    if v.static_priority > 0 {
        s.push_str(&format!(" p={}", v.static_priority));
    }
    if v.is_definition {
        s.push_str(" def");
    }
    s
}

/// Canonical text of a schema header.
pub fn write_schema(schema: &Schema) -> String {
    let mut s = String::new();
    for a in schema.attributes() {
        s.push_str(&write_header_line(a));
        s.push('\n');
    }
    s
}

/// Canonical text of a knowledge base.
pub fn write_kb(kb: &KnowledgeBase) -> String {
    let mut s = write_schema(kb.schema());
    if !kb.is_empty() {
        s.push('\n');
        for r in kb.rules() {
            s.push_str(&write_rule(kb.schema(), r));
            s.push('\n');
        }
    }
    s
}

pub fn load_kb(path: &std::path::Path) -> Result<KnowledgeBase> {
    parse_kb(&std::fs::read_to_string(path)?)
}

pub fn save_kb(kb: &KnowledgeBase, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, write_kb(kb))?;
    Ok(())
}
