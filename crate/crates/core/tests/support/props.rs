//! Invariant checks, written as plain functions returning a [`Check`] so the
//! property suite and the acceptance gate can share them.

use flare_core::format::write_kb;
use flare_core::learner::drop_condition;
use flare_core::metrics::{covers, distance, overlaps, specificity};
use flare_core::reasoner::fixed_point_guard;
use flare_core::{
    learn, query, AttributeDef, CellValue, Error, KnowledgeBase, ReasonConfig, Schema, Vector,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use super::{ensure, Check};

/// Three premise attributes over three values, then a Boolean target.
fn cube_schema() -> Schema {
    let mut attrs: Vec<AttributeDef> = ["a", "b", "c"]
        .iter()
        .map(|n| AttributeDef::nominal(*n, vec!["0", "1", "2"]).unwrap())
        .collect();
    attrs.push(AttributeDef::nominal("t", vec!["0", "1"]).unwrap());
    Schema::new(attrs).unwrap()
}

/// Every premise over `{*, 0, 1, 2}^3`, with the target cell given.
fn cube_vectors(target: CellValue) -> Vec<Vector> {
    let cell = |k: usize| if k == 3 { CellValue::DontCare } else { CellValue::nominal(k) };
    let mut out = Vec::with_capacity(64);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                out.push(Vector::new(vec![cell(a), cell(b), cell(c), target], 3));
            }
        }
    }
    out
}

/// Fully specified premises a vector covers, as a 27-bit set.
fn extension(v: &Vector) -> u32 {
    let mut set = 0;
    for e in 0..27usize {
        let vals = [e / 9, (e / 3) % 3, e % 3];
        let hit = (0..3).all(|i| match v.cells[i] {
            CellValue::DontCare => true,
            c => c.nominal_index() == Some(vals[i]),
        });
        if hit {
            set |= 1 << e;
        }
    }
    set
}

pub fn distance_zero_iff_covers() -> Check {
    let s = cube_schema();
    for x in cube_vectors(CellValue::nominal(0)) {
        if specificity(&x) == 0 {
            continue;
        }
        for y in cube_vectors(CellValue::DontKnow) {
            let d = distance(&s, &x, &y).map_err(|e| e.to_string())?;
            ensure((d == 0.0) == covers(&s, &x, &y), || format!("D={d} for {x:?} / {y:?}"))?;
        }
    }
    Ok(())
}

pub fn covers_matches_set_inclusion() -> Check {
    let s = cube_schema();
    let vs = cube_vectors(CellValue::nominal(1));
    let ext: Vec<u32> = vs.iter().map(extension).collect();
    let mut cov = vec![false; vs.len() * vs.len()];
    for (i, x) in vs.iter().enumerate() {
        for (j, y) in vs.iter().enumerate() {
            let c = covers(&s, x, y);
            ensure(c == (ext[j] & !ext[i] == 0), || format!("covers({x:?}, {y:?}) = {c}"))?;
            cov[i * vs.len() + j] = c;
        }
    }
    let n = vs.len();
    for i in 0..n {
        for j in 0..n {
            if !cov[i * n + j] {
                continue;
            }
            for k in 0..n {
                ensure(!cov[j * n + k] || cov[i * n + k], || format!("transitivity fails at {i},{j},{k}"))?;
            }
        }
    }
    Ok(())
}

pub fn overlaps_matches_brute_force() -> Check {
    let s = cube_schema();
    let rs = cube_vectors(CellValue::nominal(0));
    let ss = cube_vectors(CellValue::nominal(1));
    for r in &rs {
        for t in &ss {
            let brute = extension(r) & extension(t) != 0;
            ensure(overlaps(&s, r, t) == brute, || format!("overlaps({r:?}, {t:?})"))?;
        }
    }
    Ok(())
}

/// Attribute domain sizes with the target position and its domain size.
#[derive(Debug, Clone)]
pub struct Shape {
    pub sizes: Vec<usize>,
    pub target: usize,
}

impl Shape {
    pub fn schema(&self) -> Schema {
        let attrs = self
            .sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let vals: Vec<String> = (0..n).map(|k| k.to_string()).collect();
                AttributeDef::nominal(format!("x{i}"), vals).unwrap()
            })
            .collect();
        Schema::new(attrs).unwrap()
    }

    /// Cell codes: 0 is `*`, 1 is `?`, anything else a value. The target
    /// cell is always a value and the premise never entirely `*`.
    pub fn vector(&self, codes: &[u8], allow_unknown: bool) -> Vector {
        let mut cells: Vec<CellValue> = codes
            .iter()
            .zip(&self.sizes)
            .enumerate()
            .map(|(i, (&c, &n))| match c {
                _ if i == self.target => CellValue::nominal(c as usize % n),
                0 => CellValue::DontCare,
                1 if allow_unknown => CellValue::DontKnow,
                _ => CellValue::nominal(c as usize % n),
            })
            .collect();
        if (0..cells.len()).all(|i| i == self.target || cells[i] == CellValue::DontCare) {
            let first = usize::from(self.target == 0);
            cells[first] = CellValue::nominal(0);
        }
        Vector::new(cells, self.target)
    }
}

fn shape() -> impl Strategy<Value = Shape> {
    prop::collection::vec(2usize..=3, 3..=5)
        .prop_flat_map(|sizes| {
            let n = sizes.len();
            (Just(sizes), 0..n)
        })
        .prop_map(|(sizes, target)| Shape { sizes, target })
}

fn rows(width: usize, len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(0u8..8, width), len)
}

/// A shape with a training sequence and a few queries.
fn session() -> impl Strategy<Value = (Shape, Vec<Vec<u8>>, Vec<Vec<u8>>, u64)> {
    shape().prop_flat_map(|s| {
        let w = s.sizes.len();
        (Just(s), rows(w, 1..=30), rows(w, 1..=6), any::<u64>())
    })
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// Number of fully specified premises a `*`/value vector represents.
fn represented(shape: &Shape, v: &Vector) -> usize {
    let mut count = 0;
    let total: usize = shape.sizes.iter().enumerate().filter(|(i, _)| *i != shape.target).map(|(_, n)| n).product();
    for mut e in 0..total {
        let mut hit = true;
        for (i, &n) in shape.sizes.iter().enumerate() {
            if i == shape.target {
                continue;
            }
            let val = e % n;
            e /= n;
            if let Some(x) = v.cells[i].nominal_index() {
                hit &= x == val;
            }
        }
        count += usize::from(hit);
    }
    count
}

pub fn drop_condition_count(cases: u32) -> Check {
    let strategy = shape().prop_flat_map(|s| {
        let w = s.sizes.len();
        (Just(s), prop::collection::vec(0u8..8, w), 0..w)
    });
    run(cases, strategy, |(shape, codes, attr)| {
        let v = shape.vector(&codes, false);
        if attr == shape.target || v.cells[attr] == CellValue::DontCare {
            return Ok(());
        }
        match drop_condition(&v, attr) {
            Err(Error::WouldCoverEverything { .. }) => prop_assert!(specificity(&v) <= 1),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
            Ok(d) => {
                prop_assert!(specificity(&v) > 1);
                prop_assert_eq!(d.cells[attr], CellValue::DontCare);
                let pn = represented(&shape, &d);
                prop_assert_eq!(pn, represented(&shape, &v) * shape.sizes[attr]);
                let free: usize = (0..shape.sizes.len())
                    .filter(|&i| i != shape.target && d.cells[i] == CellValue::DontCare)
                    .map(|i| shape.sizes[i])
                    .product();
                prop_assert_eq!(pn, free);
            }
        }
        Ok(())
    })
}

fn premise_all_dont_care(v: &Vector) -> bool {
    v.premise_indices().all(|i| v.cells[i] == CellValue::DontCare)
}

/// Learning moves the size by at most one and never stores an all-`*` premise.
pub fn learning_invariants(cases: u32) -> Check {
    run(cases, session(), |(shape, train, _, seed)| {
        let cfg = ReasonConfig {
            rng_seed: seed,
            ..ReasonConfig::default()
        };
        let mut kb = KnowledgeBase::new(shape.schema());
        for codes in &train {
            let v = shape.vector(codes, true);
            let before = kb.len() as i64;
            learn(&mut kb, &v, v.target_value().unwrap(), &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let delta = kb.len() as i64 - before;
            prop_assert!((-1..=1).contains(&delta), "size moved by {}", delta);
            prop_assert!(kb.rules().iter().all(|r| !premise_all_dont_care(&r.vector)));
        }
        Ok(())
    })
}

pub fn all_dont_care_rule_rejected() -> Check {
    let s = cube_schema();
    let mut kb = KnowledgeBase::new(s);
    let v = Vector::new(vec![CellValue::DontCare; 3].into_iter().chain([CellValue::nominal(1)]).collect(), 3);
    ensure(kb.insert_vector(v.clone(), None).is_err(), || "all-* rule was stored".into())?;
    ensure(learn(&mut kb, &v, 1, &ReasonConfig::default()).is_err(), || "all-* input was learned".into())?;
    ensure(kb.is_empty(), || "knowledge base changed".into())
}

/// Asserted input cells survive reasoning and no cell is written twice.
pub fn write_once(cases: u32) -> Check {
    run(cases, session(), |(shape, train, queries, seed)| {
        let cfg = ReasonConfig {
            rng_seed: seed,
            td_threshold: (seed % 4) as f64 * 0.25,
            ..ReasonConfig::default()
        };
        let mut kb = KnowledgeBase::new(shape.schema());
        for codes in &train {
            let v = shape.vector(codes, true);
            learn(&mut kb, &v, v.target_value().unwrap(), &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
        }
        for codes in &queries {
            let mut q = shape.vector(codes, true);
            q.cells[q.target] = CellValue::DontKnow;
            let o = query(&kb, &q, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(fixed_point_guard(&q, &o).is_ok());
            for (i, c) in q.cells.iter().enumerate() {
                if c.is_asserted() {
                    prop_assert_eq!(o.completed.cells[i], *c);
                }
            }
            let mut seen = std::collections::HashSet::new();
            for t in &o.trace {
                prop_assert!(seen.insert(t.attribute), "attribute {} asserted twice", t.attribute);
            }
        }
        Ok(())
    })
}

/// Same inputs and seed give the same knowledge base and conclusions.
pub fn deterministic(cases: u32) -> Check {
    run(cases, session(), |(shape, train, queries, seed)| {
        let cfg = ReasonConfig {
            rng_seed: seed,
            ..ReasonConfig::default()
        };
        let once = || -> flare_core::Result<(String, Vec<CellValue>)> {
            let mut kb = KnowledgeBase::new(shape.schema());
            for codes in &train {
                let v = shape.vector(codes, true);
                learn(&mut kb, &v, v.target_value().unwrap(), &cfg)?;
            }
            let mut out = Vec::new();
            for codes in &queries {
                let mut q = shape.vector(codes, true);
                q.cells[q.target] = CellValue::DontKnow;
                out.push(query(&kb, &q, &cfg)?.derived_target);
            }
            Ok((write_kb(&kb), out))
        };
        let a = once().map_err(|e| TestCaseError::fail(e.to_string()))?;
        let b = once().map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(a, b);
        Ok(())
    })
}

/// Every property, with case counts sized for the gate.
pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        ("distance zero iff covers", distance_zero_iff_covers()),
        ("covers vs set inclusion", covers_matches_set_inclusion()),
        ("overlaps vs brute force", overlaps_matches_brute_force()),
        ("drop condition count", drop_condition_count(256)),
        ("write-once", write_once(128)),
        ("learning invariants", learning_invariants(256)),
        ("all-* rule rejected", all_dont_care_rule_rejected()),
        ("determinism", deterministic(64)),
    ]
}
