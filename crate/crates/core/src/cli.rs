//! Command-line front end: `run`, `transform`, `stratify`, `bounds`, and
//! `bench` subcommands over `.dl` programs and `.facts` directories.
//!
//! Answers go to standard output one fact per line, sorted by predicate and
//! then argument tuple, so identical inputs give byte-identical output.
//! Diagnostics are semantic errors (exit code 2); argument errors are left
//! to the argument parser (exit code 1).

use crate::analysis::{build_dependency_graph, stratify};
use crate::ast::{Program, Query};
use crate::bench::{run_bench, BenchCase, GraphFamily};
use crate::complexity::check_bounds;
use crate::oracles::SubqueryLog;
use crate::parser::{load_facts_dir, parse_program, parse_query, FactFileError, ParseError};
use crate::pipeline::{
    run_ebu, run_naive, run_pretransformed, run_td, EvalRun, PipelineError,
};
use crate::transform::{
    extended_demand_transform, ExtendedTransform, SourceRule, TransformStep,
};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineChoice {
    #[default]
    Ebu,
    Naive,
    Td,
}

/// Inputs and flags for one `run` invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub program: PathBuf,
    pub facts: Option<PathBuf>,
    pub query: String,
    pub engine: EngineChoice,
    pub dedup: bool,
    pub stats: bool,
    pub bounds: bool,
    pub log_subqueries: bool,
    /// The program file is already transformed output; evaluate it as-is.
    pub pretransformed: bool,
}

#[derive(Debug)]
pub enum CliError {
    Io {
        path: PathBuf,
        error: std::io::Error,
    },
    Parse {
        path: Option<PathBuf>,
        error: ParseError,
    },
    FactFile(FactFileError),
    Pipeline(PipelineError),
    Invalid(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, error } => write!(f, "{}: {error}", path.display()),
            CliError::Parse {
                path: Some(path),
                error,
            } => write!(f, "{}:{error}", path.display()),
            CliError::Parse { path: None, error } => write!(f, "query: {error}"),
            CliError::FactFile(e) => write!(f, "{e}"),
            CliError::Pipeline(e) => write!(f, "{e}"),
            CliError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}

fn read_program(path: &Path) -> Result<Program, CliError> {
    let text = std::fs::read_to_string(path).map_err(|error| CliError::Io {
        path: path.to_owned(),
        error,
    })?;
    parse_program(&text).map_err(|error| CliError::Parse {
        path: Some(path.to_owned()),
        error,
    })
}

fn load_inputs(
    program_path: &Path,
    facts: Option<&Path>,
    query: &str,
) -> Result<(Program, Query), CliError> {
    let mut program = read_program(program_path)?;
    if let Some(dir) = facts {
        let loaded = load_facts_dir(dir).map_err(CliError::FactFile)?;
        let arities = program.arities();
        for fact in &loaded {
            if let Some(&arity) = arities.get(fact.predicate()) {
                if arity != fact.atom().arity() {
                    return Err(CliError::Invalid(format!(
                        "fact file tuple {fact} has {} columns but `{}` has arity {arity}",
                        fact.atom().arity(),
                        fact.predicate(),
                    )));
                }
            }
        }
        program.facts.extend(loaded);
    }
    let query = parse_query(query).map_err(|error| CliError::Parse { path: None, error })?;
    if let Some(&arity) = program.arities().get(&query.atom.predicate) {
        if arity != query.atom.arity() {
            return Err(CliError::Invalid(format!(
                "query arity {} does not match `{}` arity {arity}",
                query.atom.arity(),
                query.atom.predicate,
            )));
        }
    }
    Ok((program, query))
}

fn answer_lines(answers: &[crate::ast::Fact]) -> String {
    let mut out = String::new();
    for fact in answers {
        out.push_str(&fact.to_string());
        out.push('\n');
    }
    out
}

fn stats_lines(eval: &EvalRun) -> String {
    let mut out = String::new();
    for (i, rule) in eval.decomposed.rules().iter().enumerate() {
        out.push_str(&format!("% r{i}: {rule}\n"));
    }
    for (i, count) in eval.firings.iter() {
        out.push_str(&format!("firings.r{i}={count}\n"));
    }
    let mut sizes = eval.store.sizes();
    sizes.sort();
    for (pred, size) in sizes {
        out.push_str(&format!("size.{pred}={size}\n"));
    }
    out.push_str(&format!("total_firings={}\n", eval.firings.total()));
    out.push_str(&format!("given_facts={}\n", eval.given_facts));
    out.push_str(&format!(
        "time_witness={}\n",
        eval.firings.total() + eval.given_facts
    ));
    out
}

fn subquery_lines(log: &SubqueryLog) -> String {
    let mut out = String::new();
    for entry in &log.entries {
        out.push_str(&format!(
            "subquery\t{}\t{}\t{}\t{}\n",
            entry.predicate,
            entry.pattern,
            entry.bound.join(","),
            entry.answers.len()
        ));
    }
    out
}

fn bounds_lines(eval: &EvalRun) -> Result<String, CliError> {
    let report = check_bounds(
        &eval.decomposed,
        &eval.store,
        &eval.firings,
        eval.given_facts,
    )
    .map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut out = String::new();
    out.push_str("rule\tbound\tevaluated\tfirings\tstatus\n");
    for (i, row) in report.rows.iter().enumerate() {
        out.push_str(&format!(
            "r{i}\t{}\t{}\t{}\t{}{}\n",
            row.bound.expr,
            row.bound.value,
            row.firings,
            if row.ok { "ok" } else { "VIOLATION" },
            if row.bound.omittable { " (omittable)" } else { "" },
        ));
    }
    out.push_str(&format!(
        "total_firings={}\ngiven_facts={}\ntime_witness={}\n",
        report.total_firings,
        report.given_facts,
        report.time_witness()
    ));
    Ok(out)
}

/// Evaluate a query and print sorted answers, with optional statistics,
/// bound checks, or the subquery log depending on the engine.
pub fn cmd_run(config: &RunConfig) -> Result<String, CliError> {
    let (program, query) = load_inputs(&config.program, config.facts.as_deref(), &config.query)?;
    match config.engine {
        EngineChoice::Ebu => {
            let eval = if config.pretransformed {
                run_pretransformed(&program, &query)?
            } else {
                run_ebu(&program, &query)?.eval
            };
            let mut out = answer_lines(&eval.answers);
            if config.stats {
                out.push_str(&stats_lines(&eval));
            }
            if config.bounds {
                out.push_str(&bounds_lines(&eval)?);
            }
            Ok(out)
        }
        EngineChoice::Naive => {
            let answers = run_naive(&program, &query)?;
            Ok(answer_lines(&answers))
        }
        EngineChoice::Td => {
            let (answers, log) = run_td(&program, &query)?;
            let mut out = answer_lines(&answers);
            if config.log_subqueries {
                out.push_str(&subquery_lines(&log));
            }
            Ok(out)
        }
    }
}

fn source_label(transform: &ExtendedTransform, index: usize) -> String {
    let (step, source) = transform.origin(index);
    let source = match source {
        SourceRule::Given(i) => format!("rule {}", i + 1),
        SourceRule::Complement(p) => format!("complement of {p}"),
    };
    match step {
        TransformStep::Restrict { .. } => format!("step 1, {source}"),
        TransformStep::Propagate { hyp_index, .. } => {
            format!("step 3, {source}, hypothesis {}", hyp_index + 1)
        }
    }
}

/// Render a transformed program in listing order: restricted rules, the
/// seed fact, then demand rules, each annotated with its provenance.
pub fn render_transform(transform: &ExtendedTransform) -> String {
    let mut lines: Vec<(String, String)> = Vec::new();
    let restricted: Vec<usize> = (0..transform.output.rules.len())
        .filter(|&i| matches!(transform.output.provenance[i].step, TransformStep::Restrict { .. }))
        .collect();
    let propagated: Vec<usize> = (0..transform.output.rules.len())
        .filter(|&i| {
            matches!(
                transform.output.provenance[i].step,
                TransformStep::Propagate { .. }
            )
        })
        .collect();
    for &i in &restricted {
        lines.push((
            transform.output.rules[i].to_string(),
            source_label(transform, i),
        ));
    }
    for seed in &transform.output.seed_facts {
        lines.push((format!("{seed}."), "step 2, query seed".to_owned()));
    }
    for &i in &propagated {
        lines.push((
            transform.output.rules[i].to_string(),
            source_label(transform, i),
        ));
    }
    let width = lines.iter().map(|(text, _)| text.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (text, comment) in lines {
        out.push_str(&format!("{text:width$}  % {comment}\n"));
    }
    out
}

/// Transform the program for the query and print the listing.
pub fn cmd_transform(
    program_path: &Path,
    query: &str,
    dedup: bool,
) -> Result<String, CliError> {
    let (program, query) = load_inputs(program_path, None, query)?;
    let mut transform =
        extended_demand_transform(&program, &query).map_err(PipelineError::from)?;
    if dedup {
        transform.output.dedup_alpha_equivalent();
    }
    Ok(render_transform(&transform))
}

/// Print the strata table, or the negative cycle if there is none.
pub fn cmd_stratify(program_path: &Path) -> Result<String, CliError> {
    let program = read_program(program_path)?;
    let graph = build_dependency_graph(&program);
    match stratify(&graph) {
        Ok(strata) => {
            let mut rows: Vec<(u32, &str)> = strata.iter().map(|(p, s)| (s, p)).collect();
            rows.sort();
            let mut out = String::from("stratum\tpredicate\n");
            for (stratum, pred) in rows {
                out.push_str(&format!("{stratum}\t{pred}\n"));
            }
            Ok(out)
        }
        Err(cycle) => Ok(format!("not stratified: {cycle}\n")),
    }
}

/// Evaluate and print the firing-bound report.
pub fn cmd_bounds(
    program_path: &Path,
    facts: Option<&Path>,
    query: &str,
) -> Result<String, CliError> {
    let (program, query) = load_inputs(program_path, facts, query)?;
    let run = run_ebu(&program, &query)?;
    bounds_lines(&run.eval)
}

/// Generate inputs of increasing size and print one TSV row per size.
pub fn cmd_bench(
    program_path: &Path,
    query: &str,
    family: GraphFamily,
    cases: &[BenchCase],
    seed: u64,
    reps: u32,
) -> Result<String, CliError> {
    let (program, query) = load_inputs(program_path, None, query)?;
    let rows = run_bench(&program, &query, family, cases, seed, reps)?;
    let mut out = String::from("size\twall_s\tfirings\tanswers\tsizes\n");
    for row in rows {
        let sizes = row
            .sizes
            .iter()
            .map(|(p, n)| format!("{p}={n}"))
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!(
            "{}\t{:.6}\t{}\t{}\t{}\n",
            row.label,
            row.wall.as_secs_f64(),
            row.total_firings,
            row.answers,
            sizes
        ));
    }
    Ok(out)
}

/// Parse `--sizes` entries: `N` or `N/M` for node/edge pairs.
pub fn parse_cases(text: &str) -> Result<Vec<BenchCase>, CliError> {
    text.split(',')
        .map(|entry| {
            let entry = entry.trim();
            let (nodes, edges) = match entry.split_once('/') {
                Some((n, m)) => (n, Some(m)),
                None => (entry, None),
            };
            let nodes = nodes
                .parse()
                .map_err(|_| CliError::Invalid(format!("bad size `{entry}`")))?;
            let edges = edges
                .map(|m| {
                    m.parse()
                        .map_err(|_| CliError::Invalid(format!("bad size `{entry}`")))
                })
                .transpose()?;
            Ok(BenchCase { nodes, edges })
        })
        .collect()
}

/// Exit code for a CLI failure: semantic errors and bad inputs are 2.
pub fn exit_code(_error: &CliError) -> i32 {
    2
}
