//! Cross-validation with predictive accuracy (PA) and inductive ratio (IR).

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::parse_vectors;
use crate::harness::dataset::Dataset;
use crate::learner::learn;
use crate::model::{CellValue, KnowledgeBase, Schema, Vector};
use crate::reasoner::{query, ReasonConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub folds: usize,
    pub orderings_per_fold: usize,
    pub rng_seed: u64,
    /// Rule lines (KB format without a header) learned before each turn.
    pub precepts_file: Option<PathBuf>,
    pub td_threshold: f64,
    pub delta_fraction: Option<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            folds: 10,
            orderings_per_fold: 10,
            rng_seed: 0,
            precepts_file: None,
            td_threshold: 0.0,
            delta_fraction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub test_size: usize,
    pub train_size: usize,
    /// Mean over orderings, in percent.
    pub accuracy: f64,
    /// Mean over orderings.
    pub inductive_ratio: f64,
    /// Final KB size per ordering.
    pub kb_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    /// Percent, averaged over folds.
    pub predictive_accuracy: f64,
    pub inductive_ratio: f64,
    pub folds: Vec<FoldResult>,
}

impl EvalResult {
    /// Line-oriented `key=value` records.
    pub fn render(&self) -> String {
        let mut s = format!(
            "pa={:.4} ir={:.4} folds={}\n",
            self.predictive_accuracy,
            self.inductive_ratio,
            self.folds.len()
        );
        for (i, f) in self.folds.iter().enumerate() {
            let sizes = f.kb_sizes.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
            s.push_str(&format!(
                "fold={} test={} train={} pa={:.4} ir={:.4} kb_sizes={}\n",
                i + 1,
                f.test_size,
                f.train_size,
                f.accuracy,
                f.inductive_ratio,
                sizes
            ));
        }
        s
    }
}

/// Reads precept vectors for `schema` from rule lines (a header, if present, is skipped).
pub fn parse_precepts(schema: &Schema, text: &str) -> Result<Vec<Vector>> {
    let start = text
        .lines()
        .take_while(|l| {
            let t = l.trim();
            t.is_empty() || t.starts_with('#') || crate::format::is_header_line(l)
        })
        .count();
    Ok(parse_vectors(schema, text, start)?.into_iter().map(|(_, v)| v).collect())
}

/// Splits `0..n` into `k` shuffled folds of near-equal size.
pub fn partition(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut out = Vec::with_capacity(k);
    let mut pos = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        out.push(idx[pos..pos + len].to_vec());
        pos += len;
    }
    out
}

fn trial_seed(seed: u64, fold: usize, ordering: usize) -> u64 {
    seed ^ (((fold as u64) << 32) | ordering as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Trial {
    correct: usize,
    kb_size: usize,
}

fn run_trial(
    schema: &Schema,
    precepts: &[Vector],
    train: &[&Vector],
    test: &[&Vector],
    cfg: &ReasonConfig,
    seed: u64,
) -> Result<Trial> {
    let mut kb = KnowledgeBase::new(schema.clone());
    for p in precepts {
        let t = p.target_value().ok_or(Error::TargetUnasserted)?;
        learn(&mut kb, p, t, cfg)?;
    }
    let mut order: Vec<&Vector> = train.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for v in order {
        let t = v.target_value().ok_or(Error::TargetUnasserted)?;
        learn(&mut kb, v, t, cfg)?;
    }
    let mut correct = 0;
    for v in test {
        let mut q = (*v).clone();
        let actual = q.target_value();
        q.cells[q.target] = CellValue::DontKnow;
        let o = query(&kb, &q, cfg)?;
        if o.derived_target.nominal_index().is_some() && o.derived_target.nominal_index() == actual {
            correct += 1;
        }
    }
    Ok(Trial {
        correct,
        kb_size: kb.len(),
    })
}

/// Runs k-fold cross-validation. Folds are fixed by the seed; each fold is
/// trained under `orderings_per_fold` shuffles of its training set.
pub fn cross_validate(data: &Dataset, cfg: &EvalConfig) -> Result<EvalResult> {
    if cfg.folds < 2 || cfg.orderings_per_fold < 1 || data.examples.len() < cfg.folds {
        return Err(Error::InvalidSchema(format!(
            "need folds >= 2, orderings >= 1 and at least as many examples as folds (got {} examples, {} folds)",
            data.examples.len(),
            cfg.folds
        )));
    }
    let schema = match cfg.delta_fraction {
        Some(f) => data.schema.with_delta_fraction(f)?,
        None => data.schema.clone(),
    };
    let precepts = match &cfg.precepts_file {
        Some(p) => parse_precepts(&schema, &std::fs::read_to_string(p)?)?,
        None => Vec::new(),
    };
    let rcfg = ReasonConfig {
        td_threshold: cfg.td_threshold,
        allow_dynamic_priority_update: true,
        rng_seed: cfg.rng_seed,
    };
    let folds = partition(data.examples.len(), cfg.folds, cfg.rng_seed);
    let jobs: Vec<(usize, usize)> = (0..cfg.folds)
        .flat_map(|f| (0..cfg.orderings_per_fold).map(move |o| (f, o)))
        .collect();
    let trials: Vec<Result<Trial>> = jobs
        .par_iter()
        .map(|&(f, o)| {
            let test: Vec<&Vector> = folds[f].iter().map(|&i| &data.examples[i]).collect();
            let train: Vec<&Vector> = folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, idx)| idx.iter().map(|&i| &data.examples[i]))
                .collect();
            run_trial(&schema, &precepts, &train, &test, &rcfg, trial_seed(cfg.rng_seed, f, o))
        })
        .collect();
    let trials = trials.into_iter().collect::<Result<Vec<_>>>()?;

    let mut out = Vec::with_capacity(cfg.folds);
    for (f, idx) in folds.iter().enumerate() {
        let ts = &trials[f * cfg.orderings_per_fold..(f + 1) * cfg.orderings_per_fold];
        let test_size = idx.len();
        let train_size = data.examples.len() - test_size;
        let m = ts.len() as f64;
        out.push(FoldResult {
            test_size,
            train_size,
            accuracy: ts.iter().map(|t| 100.0 * t.correct as f64 / test_size as f64).sum::<f64>() / m,
            inductive_ratio: ts.iter().map(|t| t.kb_size as f64 / train_size as f64).sum::<f64>() / m,
            kb_sizes: ts.iter().map(|t| t.kb_size).collect(),
        });
    }
    let k = out.len() as f64;
    Ok(EvalResult {
        predictive_accuracy: out.iter().map(|f| f.accuracy).sum::<f64>() / k,
        inductive_ratio: out.iter().map(|f| f.inductive_ratio).sum::<f64>() / k,
        folds: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::dataset::parse_dataset;

    #[test]
    fn partition_covers_each_index_once() {
        let p = partition(23, 10, 7);
        assert_eq!(p.len(), 10);
        let mut all: Vec<usize> = p.concat();
        all.sort();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(p.iter().all(|f| f.len() == 2 || f.len() == 3));
    }

    #[test]
    fn duplicated_example_run() {
        let schema = "a : nominal(x,y)\nb : nominal(x,y)\nt : nominal(p,q)\ntarget = t\n";
        let csv = "x,y,q\n".repeat(20);
        let d = parse_dataset(schema, &csv).unwrap();
        let r = cross_validate(
            &d,
            &EvalConfig {
                orderings_per_fold: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.predictive_accuracy, 100.0);
        assert!((r.inductive_ratio - 1.0 / 18.0).abs() < 1e-12);
    }
}
