use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use harmonia::trace::JsonlWriter;
use harmonia::{Overrides, ScenarioError, TRACE_DIR_ENV};
use harmonia_core::helix::{decode, encode, eval_and, eval_or, helix_add, helix_mul, helix_sub, PredicateScore};
use harmonia_core::sensory::{optimum_frequency, CycleConfig};

const VALIDATION_FAILED: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "harmonia", version, about = "Harmonic system scenarios and calculators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and print any problems with their paths.
    Validate { file: PathBuf },
    /// Run a scenario and write its JSONL trace.
    Run(RunArgs),
    /// Integer arithmetic on the helix.
    #[command(allow_negative_numbers = true)]
    Helix {
        op: HelixOp,
        x: i64,
        y: i64,
    },
    /// Boolean expansion over predicate scores in [-1, 1].
    #[command(allow_negative_numbers = true)]
    Eval {
        op: LogicOp,
        #[arg(long, required = true, num_args = 1.., value_parser = score)]
        scores: Vec<f64>,
        /// Activation injected into a conjunction.
        #[arg(long)]
        inject: Option<f64>,
    },
    /// Optimum priming-cycle frequency.
    Freq {
        /// Subject characteristics.
        #[arg(long)]
        sbj: u32,
        /// Sensory capability.
        #[arg(long = "s")]
        c_s: f64,
        /// Cognition capacity.
        #[arg(long = "c")]
        c_c: f64,
    },
    /// Harmonic value, significance and state of the initial holdings.
    Hv { file: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    /// Trace output path; defaults to `$HARMONIA_TRACE_DIR/<scenario>.jsonl`.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    ticks: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum HelixOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogicOp {
    And,
    Or,
}

fn score(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(-1.0..=1.0).contains(&v) {
        return Err(format!("score {v} outside [-1, 1]"));
    }
    Ok(v)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { file } => validate(&file),
        Command::Run(args) => run(args),
        Command::Helix { op, x, y } => helix(op, x, y),
        Command::Eval { op, scores, inject } => eval(op, &scores, inject),
        Command::Freq { sbj, c_s, c_c } => freq(sbj, c_s, c_c),
        Command::Hv { file } => hv(&file),
    }
}

fn report_load_error(e: &ScenarioError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(VALIDATION_FAILED)
}

fn validate(file: &Path) -> ExitCode {
    match harmonia::load(file) {
        Ok(loaded) => {
            let sc = &loaded.scenario;
            println!(
                "ok: {} ({} systems, {} contexts, {} ticks)",
                file.display(),
                sc.systems.len(),
                sc.contexts.len(),
                sc.ticks
            );
            ExitCode::SUCCESS
        }
        Err(e) => report_load_error(&e),
    }
}

fn trace_path(args: &RunArgs) -> Option<PathBuf> {
    if let Some(p) = &args.trace {
        return Some(p.clone());
    }
    let dir = std::env::var_os(TRACE_DIR_ENV)?;
    let stem = args.file.file_stem().unwrap_or_default();
    let mut name = stem.to_os_string();
    name.push(".jsonl");
    Some(PathBuf::from(dir).join(name))
}

fn run(args: RunArgs) -> ExitCode {
    let Some(out) = trace_path(&args) else {
        eprintln!("error: no trace location; pass --trace or set {TRACE_DIR_ENV}");
        return ExitCode::from(USAGE);
    };
    let loaded = match harmonia::load(&args.file) {
        Ok(l) => l,
        Err(e) => return report_load_error(&e),
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return ExitCode::FAILURE;
        }
    }
    let file = match File::create(&out) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", out.display());
            return ExitCode::FAILURE;
        }
    };
    let overrides = Overrides {
        ticks: args.ticks,
        seed: args.seed,
    };
    match harmonia::run(&loaded, overrides, JsonlWriter::new(BufWriter::new(file))) {
        Ok((summary, _, _)) => {
            println!(
                "ran {} ticks: {} records, {} transforms, {} exchange chains -> {}",
                summary.ticks,
                summary.records,
                summary.transforms,
                summary.chains,
                out.display()
            );
            for (id, state) in &summary.final_states {
                println!("  {id}: final state {state:.6}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: writing trace: {e}");
            ExitCode::FAILURE
        }
    }
}

fn helix(op: HelixOp, x: i64, y: i64) -> ExitCode {
    let point = match op {
        HelixOp::Add => helix_add(encode(x), y),
        HelixOp::Sub => helix_sub(encode(x), y),
        HelixOp::Mul => helix_mul(x, y),
    };
    match point.and_then(decode) {
        Ok(z) => {
            println!("{z}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(VALIDATION_FAILED)
        }
    }
}

fn eval(op: LogicOp, scores: &[f64], inject: Option<f64>) -> ExitCode {
    let operands: Vec<PredicateScore> = scores.iter().map(|s| PredicateScore::from_harmonic_value(*s)).collect();
    let result = match (op, inject) {
        (LogicOp::And, inject) => eval_and(&operands, inject.unwrap_or(0.0)),
        (LogicOp::Or, None) => eval_or(&operands),
        (LogicOp::Or, Some(_)) => {
            eprintln!("error: --inject only applies to `and`");
            return ExitCode::from(USAGE);
        }
    };
    match result {
        Ok(e) => {
            println!("outcome {} expanded {}", e.outcome, e.expanded);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(VALIDATION_FAILED)
        }
    }
}

fn freq(c_sbj: u32, c_s: f64, c_c: f64) -> ExitCode {
    match optimum_frequency(&CycleConfig { c_sbj, c_s, c_c }) {
        Ok(f) => {
            println!("{f}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(VALIDATION_FAILED)
        }
    }
}

fn hv(file: &Path) -> ExitCode {
    match harmonia::load(file) {
        Ok(loaded) => {
            print!("{}", harmonia::report::hv_report(&loaded.scenario));
            ExitCode::SUCCESS
        }
        Err(e) => report_load_error(&e),
    }
}
