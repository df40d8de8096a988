//! Shared fixtures, oracles and checks for the integration suites.

#![allow(dead_code)]

pub mod props;

use std::path::PathBuf;

use flare_core::format::{parse_rule_line, parse_schema, parse_vectors};
use flare_core::{CellValue, Schema, Vector};
use num_rational::Rational64;

pub type Check = Result<(), String>;

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(data(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// The media-selection vectors with their labels.
pub fn media_example() -> (Schema, Vec<(String, Vector)>) {
    let text = read("kb/media.kb");
    let (schema, start) = parse_schema(&text).unwrap();
    let vs = parse_vectors(&schema, &text, start)
        .unwrap()
        .into_iter()
        .map(|(l, v)| (l.unwrap(), v))
        .collect();
    (schema, vs)
}

pub fn vector(schema: &Schema, text: &str) -> Vector {
    let mut r = parse_rule_line(schema, text, 1).unwrap();
    assert_eq!(r.vectors.len(), 1, "{text}");
    r.vectors.pop().unwrap()
}

/// Exact distance over nominal vectors, computed straight from the definition.
/// `None` when the targets differ or `x` has no non-`*` premise.
pub fn rational_distance(x: &Vector, y: &Vector) -> Option<Rational64> {
    if x.target != y.target {
        return None;
    }
    let half = Rational64::new(1, 2);
    let mut sum = Rational64::from_integer(0);
    let mut n = 0;
    for i in (0..x.cells.len()).filter(|&i| i != x.target) {
        let d = match (&x.cells[i], &y.cells[i]) {
            (CellValue::DontCare, _) => Rational64::from_integer(0),
            (CellValue::DontKnow, _) => half,
            (_, CellValue::DontKnow) | (_, CellValue::DontCare) => half,
            (a, b) => Rational64::from_integer(i64::from(a.nominal_index() != b.nominal_index())),
        };
        if x.cells[i] != CellValue::DontCare {
            n += 1;
        }
        sum += d;
    }
    (n > 0).then(|| sum / Rational64::from_integer(n))
}

pub fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Formats one cell as the tables do, with `_T` on the target.
pub fn token(schema: &Schema, v: &Vector, i: usize) -> String {
    let c = schema.attr(i).format_cell(&v.cells[i]);
    if i == v.target {
        format!("{c}_T")
    } else {
        c
    }
}
