use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use stratalog::bench::GraphFamily;
use stratalog::cli::{
    cmd_bench, cmd_bounds, cmd_run, cmd_stratify, cmd_transform, exit_code, parse_cases,
    EngineChoice, RunConfig,
};

/// Demand-driven Datalog engine with stratified negation.
#[derive(Parser)]
#[command(name = "stratalog", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum EngineArg {
    /// Demand transformation plus extended bottom-up evaluation.
    #[default]
    Ebu,
    /// Naive stratified full-model evaluation (reference oracle).
    Naive,
    /// Tabled top-down evaluation (reference oracle).
    Td,
}

impl From<EngineArg> for EngineChoice {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Ebu => EngineChoice::Ebu,
            EngineArg::Naive => EngineChoice::Naive,
            EngineArg::Td => EngineChoice::Td,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Chain,
    Random,
    Complete,
}

impl From<FamilyArg> for GraphFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Chain => GraphFamily::Chain,
            FamilyArg::Random => GraphFamily::Random,
            FamilyArg::Complete => GraphFamily::Complete,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Answer a query; prints sorted answer facts, one per line.
    Run {
        /// Program file (.dl).
        #[arg(short, long)]
        program: PathBuf,
        /// Directory of per-predicate .facts files (TSV).
        #[arg(short, long)]
        facts: Option<PathBuf>,
        /// Query, e.g. "p(1,X)?".
        #[arg(short, long)]
        query: String,
        #[arg(long, value_enum, default_value_t)]
        engine: EngineArg,
        /// Emit per-rule firing counts and per-predicate sizes (ebu only).
        #[arg(long)]
        stats: bool,
        /// Emit the firing-bound report after the answers (ebu only).
        #[arg(long)]
        bounds: bool,
        /// Dump the subquery log (td only).
        #[arg(long)]
        log_subqueries: bool,
        /// Collapse alpha-equivalent generated rules.
        #[arg(long)]
        dedup: bool,
        /// Treat the program as already-transformed output.
        #[arg(long)]
        transformed: bool,
    },
    /// Print the transformed program for a query, with provenance comments.
    Transform {
        #[arg(short, long)]
        program: PathBuf,
        #[arg(short, long)]
        query: String,
        #[arg(long)]
        dedup: bool,
    },
    /// Print the strata table, or the offending cycle through negation.
    Stratify {
        #[arg(short, long)]
        program: PathBuf,
    },
    /// Evaluate and print per-rule firing bounds versus measured firings.
    Bounds {
        #[arg(short, long)]
        program: PathBuf,
        #[arg(short, long)]
        facts: Option<PathBuf>,
        #[arg(short, long)]
        query: String,
    },
    /// Generate graph inputs of increasing size and report firings as TSV.
    Bench {
        #[arg(short, long)]
        program: PathBuf,
        #[arg(short, long)]
        query: String,
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Comma-separated sizes: node counts, or nodes/edges pairs for the
        /// random family (e.g. "1000/200000,1000/400000").
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Repetitions per size; the best wall time is reported.
        #[arg(long, default_value_t = 1)]
        reps: u32,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run {
            program,
            facts,
            query,
            engine,
            stats,
            bounds,
            log_subqueries,
            dedup,
            transformed,
        } => cmd_run(&RunConfig {
            program,
            facts,
            query,
            engine: engine.into(),
            dedup,
            stats,
            bounds,
            log_subqueries,
            pretransformed: transformed,
        }),
        Command::Transform {
            program,
            query,
            dedup,
        } => cmd_transform(&program, &query, dedup),
        Command::Stratify { program } => cmd_stratify(&program),
        Command::Bounds {
            program,
            facts,
            query,
        } => cmd_bounds(&program, facts.as_deref(), &query),
        Command::Bench {
            program,
            query,
            family,
            sizes,
            seed,
            reps,
        } => parse_cases(&sizes)
            .and_then(|cases| cmd_bench(&program, &query, family.into(), &cases, seed, reps)),
    };
    match result {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code(&error) as u8)
        }
    }
}
