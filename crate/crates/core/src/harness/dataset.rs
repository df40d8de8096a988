//! Dataset files: a schema file (KB header lines plus `target = <name>`) and
//! a comma-separated data file with an optional header row.

use std::path::Path;

use crate::error::{Error, Result};
use crate::format::parse_schema;
use crate::model::{CellValue, Schema, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Schema,
    pub target: usize,
    /// Examples with the target cell asserted.
    pub examples: Vec<Vector>,
}

/// Parses a schema file; returns the schema and the target index.
pub fn parse_schema_file(text: &str) -> Result<(Schema, usize)> {
    let (schema, start) = parse_schema(text)?;
    for (k, l) in text.lines().enumerate().skip(start) {
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let name = t
            .strip_prefix("target")
            .and_then(|r| r.trim_start().strip_prefix('='))
            .map(str::trim)
            .ok_or_else(|| Error::parse(k + 1, 1, "expected `target = <attribute>`"))?;
        let i = schema
            .index_of(name)
            .ok_or_else(|| Error::parse(k + 1, 1, format!("unknown attribute `{name}`")))?;
        if !schema.attr(i).is_nominal() {
            return Err(Error::parse(k + 1, 1, "target attribute must be nominal"));
        }
        return Ok((schema, i));
    }
    Err(Error::parse(text.lines().count().max(1), 1, "missing `target = <attribute>`"))
}

/// Parses schema text and CSV text into a dataset.
pub fn parse_dataset(schema_text: &str, csv_text: &str) -> Result<Dataset> {
    let (schema, target) = parse_schema_file(schema_text)?;
    let names: Vec<&str> = schema.attributes().iter().map(|a| a.name.as_str()).collect();
    let mut examples = Vec::new();
    for (k, line) in csv_text.lines().enumerate() {
        let row = k + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if k == 0 && fields == names {
            continue;
        }
        if fields.len() != schema.len() {
            return Err(Error::parse(
                row,
                fields.len().min(schema.len()) + 1,
                format!("expected {} fields, found {}", schema.len(), fields.len()),
            ));
        }
        let mut cells = Vec::with_capacity(fields.len());
        for (col, f) in fields.iter().enumerate() {
            if *f == "?" || f.is_empty() {
                if col == target {
                    return Err(Error::Domain {
                        row,
                        column: col + 1,
                        message: "target value is missing".into(),
                    });
                }
                cells.push(CellValue::DontKnow);
                continue;
            }
            let v = schema.attr(col).parse_value(f).map_err(|message| Error::Domain {
                row,
                column: col + 1,
                message,
            })?;
            cells.push(CellValue::Asserted(v));
        }
        examples.push(Vector::new(cells, target));
    }
    Ok(Dataset {
        schema,
        target,
        examples,
    })
}

/// Loads a dataset from a schema file and a data file.
pub fn load_dataset(schema_path: &Path, data_path: &Path) -> Result<Dataset> {
    parse_dataset(
        &std::fs::read_to_string(schema_path)?,
        &std::fs::read_to_string(data_path)?,
    )
}
