//! Distance, cover, specificity, concordance and overlap.

use crate::error::{Error, Result};
use crate::model::{AttributeDef, CellValue, Schema, Vector};

/// Tolerance used when comparing distances for ties.
pub const TIE_EPSILON: f64 = 1e-9;

/// Per-attribute distance `d(x, y)`; not symmetric.
pub fn attr_distance(x: &CellValue, y: &CellValue, attr: &AttributeDef) -> f64 {
    match (x, y) {
        (CellValue::DontCare, _) => 0.0,
        (CellValue::DontKnow, _) => 0.5,
        (CellValue::Asserted(_), CellValue::DontKnow | CellValue::DontCare) => 0.5,
        (CellValue::Asserted(a), CellValue::Asserted(b)) => match (a, b) {
            (crate::model::Value::Real(p), crate::model::Value::Real(q)) => {
                ((p - q).abs() / attr.range()).min(1.0)
            }
            _ => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
        },
    }
}

/// Number of non-target cells of `x` that are not `*`. `?` counts.
pub fn num_asserted(x: &Vector) -> usize {
    x.premise_indices()
        .filter(|&i| x.cells[i] != CellValue::DontCare)
        .count()
}

/// Same count as [`num_asserted`], under its conflict-resolution name.
pub fn specificity(x: &Vector) -> usize {
    num_asserted(x)
}

/// Distance with `x`'s target attribute left out, whatever `y`'s target is.
pub(crate) fn premise_distance(schema: &Schema, x: &Vector, y: &Vector) -> Result<f64> {
    let n = num_asserted(x);
    if n == 0 {
        return Err(Error::UndefinedDistance);
    }
    let sum: f64 = x
        .premise_indices()
        .map(|i| attr_distance(&x.cells[i], &y.cells[i], schema.attr(i)))
        .sum();
    Ok(sum / n as f64)
}

/// `D(x, y)`: normalized sum of attribute distances over non-target attributes.
pub fn distance(schema: &Schema, x: &Vector, y: &Vector) -> Result<f64> {
    if x.target != y.target {
        return Err(Error::MismatchedTarget(x.target, y.target));
    }
    premise_distance(schema, x, y)
}

/// Cell equality used by cover and vector equality: `*`=`*`, `?`=`?`,
/// nominal exact, linear within delta.
pub(crate) fn cells_equal(attr: &AttributeDef, a: &CellValue, b: &CellValue) -> bool {
    match (a, b) {
        (CellValue::Asserted(x), CellValue::Asserted(y)) => attr.values_equal(x, y),
        (CellValue::DontCare, CellValue::DontCare) | (CellValue::DontKnow, CellValue::DontKnow) => true,
        _ => false,
    }
}

/// True when every non-`*` premise cell of `rule` matches `v`, skipping the
/// rule's own target attribute.
pub(crate) fn premise_matches(schema: &Schema, rule: &Vector, v: &Vector) -> bool {
    rule.premise_indices().all(|i| {
        let c = &rule.cells[i];
        *c == CellValue::DontCare || cells_equal(schema.attr(i), c, &v.cells[i])
    })
}

/// `x` covers `y`: same target attribute and `y` satisfies all of `x`'s premises.
pub fn covers(schema: &Schema, x: &Vector, y: &Vector) -> bool {
    x.target == y.target && premise_matches(schema, x, y)
}

/// Same target attribute and same target value.
pub fn concordant(x: &Vector, y: &Vector) -> Result<bool> {
    let (Some(a), Some(b)) = (x.target_value(), y.target_value()) else {
        return Err(Error::TargetUnasserted);
    };
    Ok(x.target == y.target && a == b)
}

/// Whether the sets of vectors covered by `r` and `s` intersect.
pub fn overlaps(schema: &Schema, r: &Vector, s: &Vector) -> bool {
    if r.target != s.target {
        return false;
    }
    r.premise_indices().all(|i| match (&r.cells[i], &s.cells[i]) {
        (CellValue::Asserted(a), CellValue::Asserted(b)) => schema.attr(i).values_equal(a, b),
        _ => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AttributeDef, Schema};

    fn lin_schema() -> Schema {
        Schema::new(vec![
            AttributeDef::nominal("a", vec!["0", "1", "2"]).unwrap(),
            AttributeDef::linear("b", 0.0, 10.0, 0.05).unwrap(),
            AttributeDef::linear("c", 0.0, 10.0, 0.05).unwrap(),
            AttributeDef::nominal("d", vec!["0", "1"]).unwrap(),
            AttributeDef::nominal("t", vec!["0", "1"]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn attr_distance_cases() {
        let a = AttributeDef::nominal("a", vec!["0", "1"]).unwrap();
        let one = CellValue::nominal(1);
        assert_eq!(attr_distance(&CellValue::DontCare, &one, &a), 0.0);
        assert_eq!(attr_distance(&CellValue::DontKnow, &one, &a), 0.5);
        assert_eq!(attr_distance(&one, &CellValue::DontKnow, &a), 0.5);
        assert_eq!(attr_distance(&one, &CellValue::DontCare, &a), 0.5);
        assert_eq!(attr_distance(&one, &CellValue::nominal(0), &a), 1.0);
        let l = AttributeDef::linear("x", 0.0, 10.0, 0.05).unwrap();
        let d = attr_distance(&CellValue::real(1.2), &CellValue::real(3.48), &l);
        assert!((d - 0.228).abs() < 1e-12);
    }

    #[test]
    fn linear_cover_with_delta() {
        // delta 0.5 on a range of 10
        let s = lin_schema().with_delta_fraction(0.05).unwrap();
        let x = Vector::new(
            vec![CellValue::DontCare, CellValue::real(1.2), CellValue::real(3.52), CellValue::DontCare, CellValue::nominal(0)],
            4,
        );
        let y = Vector::new(
            vec![CellValue::nominal(2), CellValue::real(1.3), CellValue::real(3.48), CellValue::DontCare, CellValue::nominal(0)],
            4,
        );
        assert!(covers(&s, &x, &y));
        assert!(covers(&s, &x, &x));
        // covers but D > 0 for delta-close reals
        assert!(distance(&s, &x, &y).unwrap() > 0.0);
    }

    #[test]
    fn distance_errors() {
        let s = lin_schema();
        let x = Vector::new(vec![CellValue::nominal(0), CellValue::DontCare, CellValue::DontCare, CellValue::nominal(1), CellValue::nominal(0)], 4);
        let y = Vector::new(vec![CellValue::nominal(0), CellValue::DontCare, CellValue::DontCare, CellValue::nominal(1), CellValue::nominal(0)], 3);
        assert!(matches!(distance(&s, &x, &y), Err(Error::MismatchedTarget(4, 3))));
        let mut z = x.clone();
        z.cells[0] = CellValue::DontCare;
        z.cells[3] = CellValue::DontCare;
        assert!(matches!(distance(&s, &z, &x), Err(Error::UndefinedDistance)));
    }

    #[test]
    fn concordance_needs_asserted_targets() {
        let x = Vector::new(vec![CellValue::nominal(0), CellValue::nominal(1)], 1);
        let mut y = x.clone();
        assert!(concordant(&x, &y).unwrap());
        y.cells[1] = CellValue::nominal(0);
        assert!(!concordant(&x, &y).unwrap());
        y.cells[1] = CellValue::DontKnow;
        assert!(matches!(concordant(&x, &y), Err(Error::TargetUnasserted)));
    }

    #[test]
    fn dont_know_counts_but_only_matches_dont_know() {
        let s = lin_schema();
        let x = Vector::new(vec![CellValue::DontKnow, CellValue::DontCare, CellValue::DontCare, CellValue::nominal(1), CellValue::nominal(0)], 4);
        let mut y = x.clone();
        assert_eq!(specificity(&x), 2);
        assert!(covers(&s, &x, &y));
        assert_eq!(distance(&s, &x, &y).unwrap(), 0.25);
        y.cells[0] = CellValue::nominal(0);
        assert!(!covers(&s, &x, &y));
    }
}
