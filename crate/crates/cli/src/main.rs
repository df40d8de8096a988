//! `flare` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use flare_core::fol::{format_clause, parse_clauses, to_clause, translate, TranslateOptions};
use flare_core::format::{
    load_kb, parse_kb, parse_rule_line, parse_schema, parse_vectors, write_kb, write_schema,
    write_vector,
};
use flare_core::harness::{cross_validate, load_dataset, run_scenario_file, EvalConfig};
use flare_core::precepts::{generate_precepts, PreceptOptions};
use flare_core::{learn_as, reason, KnowledgeBase, ReasonConfig};

#[derive(Parser)]
#[command(name = "flare", version, about = "Incremental rule learning and propositional reasoning")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct ReasonOpts {
    /// Seed for random choices.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Distance threshold for similarity-based subgoal assertion.
    #[arg(long, default_value_t = 0.0)]
    td: f64,
}

impl ReasonOpts {
    fn config(&self) -> Result<ReasonConfig> {
        if self.td.is_nan() || self.td < 0.0 {
            bail!("--td must be non-negative");
        }
        Ok(ReasonConfig {
            td_threshold: self.td,
            allow_dynamic_priority_update: true,
            rng_seed: self.seed,
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Learn vectors in file order and write the resulting knowledge base.
    Learn {
        /// Vector file: attribute header lines followed by one vector per line.
        input: PathBuf,
        /// Start from this knowledge base; the input header may then be omitted.
        #[arg(long)]
        kb: Option<PathBuf>,
        /// Write the knowledge base here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Print reasoning traces.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        opts: ReasonOpts,
    },
    /// Reason about a query vector, e.g. "1 ? 1 ? 0 0 ?_T".
    Reason {
        #[arg(long)]
        kb: PathBuf,
        query: String,
        /// Actual target value; enables dynamic priority updates.
        #[arg(long)]
        actual: Option<String>,
        /// Save the (possibly updated) knowledge base here.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        opts: ReasonOpts,
    },
    /// Cross-validate on a dataset (schema file plus CSV file).
    Eval {
        schema: PathBuf,
        data: PathBuf,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Training orderings per fold.
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Precept vectors learned before each fold's training set.
        #[arg(long)]
        precepts: Option<PathBuf>,
        #[arg(long)]
        delta_fraction: Option<f64>,
        #[command(flatten)]
        opts: ReasonOpts,
    },
    /// Run scenario files and check their expected conclusions.
    Scenario {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        trace: bool,
        /// Also print each training step's adapt line.
        #[arg(long)]
        log: bool,
        #[command(flatten)]
        opts: ReasonOpts,
    },
    /// Translate a clause file into a schema and vectors.
    Translate {
        input: PathBuf,
        #[arg(long)]
        instance_priority: bool,
        #[arg(long)]
        facts_as_definitions: bool,
        /// Print the vectors back as clauses.
        #[arg(long)]
        clauses: bool,
    },
    /// Derive precepts from general rules and a facts vector.
    Precepts {
        /// General rules (vector file with header).
        #[arg(long)]
        rules: PathBuf,
        /// Facts vector; its target cell is ignored.
        #[arg(long)]
        facts: String,
        /// Target attribute name.
        #[arg(long)]
        target: String,
        #[arg(long)]
        keep_intermediates: bool,
        #[command(flatten)]
        opts: ReasonOpts,
    },
    /// Load a knowledge base and print it in canonical form.
    Kb {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Learn {
            input,
            kb,
            out,
            trace,
            opts,
        } => {
            let cfg = opts.config()?;
            let text = read(&input)?;
            let (mut kb, start) = match kb {
                Some(p) => {
                    let kb = load_kb(&p)?;
                    let (_, start) = parse_schema(&text).unwrap_or((kb.schema().clone(), 0));
                    (kb, start)
                }
                None => {
                    let (schema, start) = parse_schema(&text)?;
                    (KnowledgeBase::new(schema), start)
                }
            };
            let schema = kb.schema().clone();
            for (label, v) in parse_vectors(&schema, &text, start)? {
                let actual = v
                    .target_value()
                    .ok_or_else(|| anyhow!("training vectors need an asserted target"))?;
                let (o, r) = learn_as(&mut kb, &v, actual, &cfg, label.as_deref())?;
                if trace {
                    for l in o.trace_lines(&schema) {
                        eprintln!("  {l}");
                    }
                }
                eprintln!("{}", r.render());
            }
            emit(&write_kb(&kb), out.as_deref())?;
            Ok(true)
        }
        Cmd::Reason {
            kb,
            query,
            actual,
            out,
            trace,
            opts,
        } => {
            let cfg = opts.config()?;
            let mut kb = load_kb(&kb)?;
            let schema = kb.schema().clone();
            let line = parse_rule_line(&schema, &query, 1)?;
            let [v] = line.vectors.as_slice() else {
                bail!("the query must be a single vector");
            };
            let actual = match actual {
                Some(a) => Some(
                    schema
                        .attr(v.target)
                        .value_index(&a)
                        .ok_or_else(|| anyhow!("`{a}` is not a target value"))?,
                ),
                None => None,
            };
            let o = reason(&mut kb, v, &cfg, actual)?;
            if trace {
                for l in o.trace_lines(&schema) {
                    println!("{l}");
                }
            }
            let t = schema.attr(v.target);
            println!(
                "target={} value={} via={} distance={} iterations={}",
                t.name,
                t.format_cell(&o.derived_target),
                o.winner.as_deref().unwrap_or("-"),
                o.winner_distance,
                o.iterations
            );
            println!("completed={}", flare_core::format::write_cells(&schema, &o.completed));
            for (a, b) in &o.conflicts {
                println!("conflict={a},{b}");
            }
            if let Some(p) = out {
                std::fs::write(&p, write_kb(&kb))?;
            }
            Ok(true)
        }
        Cmd::Eval {
            schema,
            data,
            folds,
            repeats,
            precepts,
            delta_fraction,
            opts,
        } => {
            let d = load_dataset(&schema, &data)?;
            let cfg = EvalConfig {
                folds,
                orderings_per_fold: repeats,
                rng_seed: opts.seed,
                precepts_file: precepts,
                td_threshold: opts.td,
                delta_fraction,
            };
            let r = cross_validate(&d, &cfg)?;
            print!("examples={} {}", d.examples.len(), r.render());
            Ok(true)
        }
        Cmd::Scenario {
            files,
            trace,
            log,
            opts,
        } => {
            let cfg = opts.config()?;
            let mut all = true;
            for f in files {
                let r = run_scenario_file(&f, &cfg).with_context(|| format!("scenario {}", f.display()))?;
                if log {
                    for l in &r.adapt_log {
                        println!("  {l}");
                    }
                }
                print!("{}", r.render(trace));
                all &= r.passed();
            }
            Ok(all)
        }
        Cmd::Translate {
            input,
            instance_priority,
            facts_as_definitions,
            clauses,
        } => {
            let cs = parse_clauses(&read(&input)?)?;
            let t = translate(
                &cs,
                &TranslateOptions {
                    instance_priority,
                    facts_as_definitions,
                },
            )?;
            let mut s = String::new();
            if clauses {
                for v in &t.vectors {
                    match to_clause(&t.schema, v) {
                        Some(c) => s.push_str(&format_clause(&c)),
                        None => s.push_str(&format!("# {}", write_vector(&t.schema, v))),
                    }
                    s.push('\n');
                }
            } else {
                s.push_str(&write_schema(&t.schema));
                s.push('\n');
                for v in &t.vectors {
                    s.push_str(&write_vector(&t.schema, v));
                    s.push('\n');
                }
            }
            print!("{s}");
            Ok(true)
        }
        Cmd::Precepts {
            rules,
            facts,
            target,
            keep_intermediates,
            opts,
        } => {
            let cfg = opts.config()?;
            let text = read(&rules)?;
            let (schema, start) = parse_schema(&text)?;
            let general: Vec<_> = parse_vectors(&schema, &text, start)?
                .into_iter()
                .map(|(_, v)| v)
                .collect();
            let t = schema
                .index_of(&target)
                .ok_or_else(|| anyhow!("unknown attribute `{target}`"))?;
            let mut f = parse_rule_line(&schema, &facts, 1)?;
            let facts = f.vectors.pop().ok_or_else(|| anyhow!("empty facts vector"))?;
            let ps = generate_precepts(
                &schema,
                &general,
                &facts,
                t,
                &cfg,
                &PreceptOptions {
                    keep_intermediates,
                    ..Default::default()
                },
            )?;
            for p in ps {
                let mut line = write_vector(&schema, &p.vector);
                if p.winner_distance > 0.0 {
                    line.push_str(&format!(" # similarity distance={}", p.winner_distance));
                }
                println!("{line}");
            }
            Ok(true)
        }
        Cmd::Kb { input, out } => {
            let kb = parse_kb(&read(&input)?)?;
            emit(&write_kb(&kb), out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
