//! Scenario files: a schema, training vectors and queries with expected
//! conclusions. Sections may alternate, so queries can observe the knowledge
//! base mid-way through training.
//!
//! ```text
//! [schema]
//! rep : nominal(0,1)
//! qua : nominal(0,1)
//! pac : nominal(0,1)
//!
//! [config]
//! td = 0.3
//!
//! [train]
//! 1 * 0_T
//! * 1 1_T p=1
//!
//! [query]
//! nixon = 1 1 ?_T
//! expect target=1
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::format::{parse_header_line, parse_rule_line};
use crate::learner::learn_as;
use crate::model::{CellValue, KnowledgeBase, Schema, Vector};
use crate::reasoner::{query, ReasonConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainItem {
    pub label: Option<String>,
    pub vector: Vector,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub label: Option<String>,
    pub vector: Vector,
    /// Expected target cell.
    pub expect_target: Option<CellValue>,
    /// Expected cells of the completed vector.
    pub expect_cells: Vec<(usize, CellValue)>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Train(TrainItem),
    Query(Query),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub schema: Schema,
    pub steps: Vec<Step>,
    pub td_threshold: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub label: Option<String>,
    pub line: usize,
    pub target: usize,
    pub derived: CellValue,
    pub passed: bool,
    pub failures: Vec<String>,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub name: String,
    pub queries: Vec<QueryResult>,
    /// One adapt line per training vector.
    pub adapt_log: Vec<String>,
    pub final_kb: KnowledgeBase,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.queries.iter().all(|q| q.passed)
    }

    /// Human-readable report with `key=value` records.
    pub fn render(&self, with_trace: bool) -> String {
        let schema = self.final_kb.schema();
        let mut s = format!("scenario={}\n", self.name);
        for q in &self.queries {
            let t = q.target;
            s.push_str(&format!(
                "query={} line={} {}={} status={}\n",
                q.label.as_deref().unwrap_or("-"),
                q.line,
                schema.attr(t).name,
                schema.attr(t).format_cell(&q.derived),
                if q.passed { "pass" } else { "fail" }
            ));
            for f in &q.failures {
                s.push_str(&format!("  mismatch {f}\n"));
            }
            if with_trace {
                for t in &q.trace {
                    s.push_str(&format!("  {t}\n"));
                }
            }
        }
        let failed = self.queries.iter().filter(|q| !q.passed).count();
        s.push_str(&format!(
            "summary queries={} passed={} failed={}\n",
            self.queries.len(),
            self.queries.len() - failed,
            failed
        ));
        s
    }
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    Schema,
    Config,
    Train,
    Query,
}

fn parse_expect_cell(schema: &Schema, attr: usize, tok: &str, line: usize) -> Result<CellValue> {
    match tok {
        "?" => Ok(CellValue::DontKnow),
        "*" => Ok(CellValue::DontCare),
        _ => schema
            .attr(attr)
            .parse_value(tok)
            .map(CellValue::Asserted)
            .map_err(|m| Error::parse(line, 1, m)),
    }
}

/// Parses scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut section = Section::None;
    let mut attrs = Vec::new();
    let mut schema: Option<Schema> = None;
    let mut steps = Vec::new();
    let mut td_threshold = None;
    let mut seed = None;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if l.starts_with('[') && l.ends_with(']') {
            section = match &l[1..l.len() - 1] {
                "schema" => Section::Schema,
                "config" => Section::Config,
                "train" => Section::Train,
                "query" => Section::Query,
                other => return Err(Error::parse(line_no, 2, format!("unknown section `{other}`"))),
            };
            if section != Section::Schema && schema.is_none() {
                if attrs.is_empty() {
                    return Err(Error::parse(line_no, 1, "[schema] must come first"));
                }
                schema = Some(
                    Schema::new(std::mem::take(&mut attrs))
                        .map_err(|e| Error::parse(line_no, 1, e.to_string()))?,
                );
            }
            continue;
        }
        match section {
            Section::None => return Err(Error::parse(line_no, 1, "expected a section header")),
            Section::Schema => {
                if schema.is_some() {
                    return Err(Error::parse(line_no, 1, "schema already closed"));
                }
                attrs.push(parse_header_line(l, line_no)?);
            }
            Section::Config => {
                let (key, val) = l
                    .split_once('=')
                    .ok_or_else(|| Error::parse(line_no, 1, "expected `key = value`"))?;
                let val = val.trim();
                match key.trim() {
                    "td" => {
                        td_threshold = Some(val.parse().map_err(|_| Error::parse(line_no, 1, "bad td"))?)
                    }
                    "seed" => seed = Some(val.parse().map_err(|_| Error::parse(line_no, 1, "bad seed"))?),
                    other => return Err(Error::parse(line_no, 1, format!("unknown setting `{other}`"))),
                }
            }
            Section::Train => {
                let s = schema.as_ref().unwrap();
                let r = parse_rule_line(s, raw, line_no)?;
                let multi = r.vectors.len() > 1;
                for (j, v) in r.vectors.into_iter().enumerate() {
                    if !v.cells[v.target].is_asserted() {
                        return Err(Error::parse(line_no, 1, "training vectors need an asserted target"));
                    }
                    let label = r.label.as_ref().map(|b| if multi { format!("{b}.{}", j + 1) } else { b.clone() });
                    steps.push(Step::Train(TrainItem {
                        label,
                        vector: v,
                        line: line_no,
                    }));
                }
            }
            Section::Query => {
                let s = schema.as_ref().unwrap();
                if let Some(rest) = l.strip_prefix("expect ") {
                    let Some(Step::Query(q)) = steps.last_mut() else {
                        return Err(Error::parse(line_no, 1, "`expect` without a query"));
                    };
                    for item in rest.split_whitespace() {
                        let (name, val) = item
                            .split_once('=')
                            .ok_or_else(|| Error::parse(line_no, 1, "expected `attr=value`"))?;
                        if name == "target" {
                            q.expect_target = Some(parse_expect_cell(s, q.vector.target, val, line_no)?);
                        } else {
                            let a = s
                                .index_of(name)
                                .ok_or_else(|| Error::parse(line_no, 1, format!("unknown attribute `{name}`")))?;
                            let c = parse_expect_cell(s, a, val, line_no)?;
                            if a == q.vector.target {
                                q.expect_target = Some(c);
                            } else {
                                q.expect_cells.push((a, c));
                            }
                        }
                    }
                } else {
                    let r = parse_rule_line(s, raw, line_no)?;
                    if r.vectors.len() != 1 {
                        return Err(Error::parse(line_no, 1, "queries cannot use disjunction"));
                    }
                    steps.push(Step::Query(Query {
                        label: r.label,
                        vector: r.vectors.into_iter().next().unwrap(),
                        expect_target: None,
                        expect_cells: Vec::new(),
                        line: line_no,
                    }));
                }
            }
        }
    }
    let schema = match schema {
        Some(s) => s,
        None => Schema::new(attrs)?,
    };
    Ok(Scenario {
        schema,
        steps,
        td_threshold,
        seed,
    })
}

/// Learns training vectors in order and checks each query's expectations.
/// Settings in the scenario's `[config]` section override `cfg`.
pub fn run_scenario(name: &str, scn: &Scenario, cfg: &ReasonConfig) -> Result<ScenarioReport> {
    let mut cfg = cfg.clone();
    if let Some(td) = scn.td_threshold {
        cfg.td_threshold = td;
    }
    if let Some(seed) = scn.seed {
        cfg.rng_seed = seed;
    }
    let schema = &scn.schema;
    let mut kb = KnowledgeBase::new(schema.clone());
    let mut queries = Vec::new();
    let mut adapt_log = Vec::new();
    for step in &scn.steps {
        match step {
            Step::Train(t) => {
                let actual = t.vector.target_value().expect("checked at parse time");
                let (_, report) = learn_as(&mut kb, &t.vector, actual, &cfg, t.label.as_deref())?;
                adapt_log.push(report.render());
            }
            Step::Query(q) => {
                let o = query(&kb, &q.vector, &cfg)?;
                let mut failures = Vec::new();
                let fmt = |a: usize, c: &CellValue| schema.attr(a).format_cell(c);
                if let Some(e) = &q.expect_target {
                    if *e != o.derived_target {
                        let t = q.vector.target;
                        failures.push(format!(
                            "{}: expected {} got {}",
                            schema.attr(t).name,
                            fmt(t, e),
                            fmt(t, &o.derived_target)
                        ));
                    }
                }
                for (a, e) in &q.expect_cells {
                    let got = o.completed.cells[*a];
                    let ok = match (e, &got) {
                        (CellValue::Asserted(x), CellValue::Asserted(y)) => schema.attr(*a).values_equal(x, y),
                        _ => *e == got,
                    };
                    if !ok {
                        failures.push(format!(
                            "{}: expected {} got {}",
                            schema.attr(*a).name,
                            fmt(*a, e),
                            fmt(*a, &got)
                        ));
                    }
                }
                queries.push(QueryResult {
                    label: q.label.clone(),
                    line: q.line,
                    target: q.vector.target,
                    derived: o.derived_target,
                    passed: failures.is_empty(),
                    failures,
                    trace: o.trace_lines(schema),
                });
            }
        }
    }
    Ok(ScenarioReport {
        name: name.to_string(),
        queries,
        adapt_log,
        final_kb: kb,
    })
}

/// Parses and runs a scenario file.
pub fn run_scenario_file(path: &Path, cfg: &ReasonConfig) -> Result<ScenarioReport> {
    let text = std::fs::read_to_string(path)?;
    let scn = parse_scenario(&text)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    run_scenario(&name, &scn, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NIXON: &str = "\
[schema]
rep : nominal(0,1)
qua : nominal(0,1)
pac : nominal(0,1)

[train]
1 * 0_T
* 1 1_T p=1

[query]
nixon = 1 1 ?_T
expect target=1
";

    #[test]
    fn runs_a_small_scenario() {
        let scn = parse_scenario(NIXON).unwrap();
        assert_eq!(scn.steps.len(), 3);
        let r = run_scenario("nixon", &scn, &ReasonConfig::default()).unwrap();
        assert!(r.passed(), "{}", r.render(true));
        assert_eq!(r.adapt_log.len(), 2);
    }

    #[test]
    fn failing_expectation_is_reported() {
        let text = NIXON.replace("expect target=1", "expect target=0");
        let r = run_scenario("x", &parse_scenario(&text).unwrap(), &ReasonConfig::default()).unwrap();
        assert!(!r.passed());
        assert!(r.render(false).contains("status=fail"));
    }

    #[test]
    fn rejects_unknown_sections() {
        assert!(parse_scenario("[bogus]\n").is_err());
        assert!(parse_scenario("[train]\n1 1_T\n").is_err());
    }
}
