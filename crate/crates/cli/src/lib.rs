//! The `diva` command: anonymize CSV files under diversity constraints,
//! reason about constraint sets, and run benchmark sweeps.
//!
//! Exit codes: 0 on success, 2 on a negative verdict (unsatisfiable input,
//! a constraint not implied, or a publication that could not be completed),
//! 1 on any other error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use diva_core::io::{
    read_constraint_list, read_constraints, read_json, read_relation_path, read_schema_spec, write_json,
    write_relation, SchemaSpec,
};
use diva_core::{
    diva, generate::generate_all, generate_constraints, implies, inferred_range, is_satisfiable, minimal_cover,
    synth_generate, AnonymizationOutcome, ConstraintClass, DivaConfig, Error, GeneratorSpec, Heuristic,
    LowerBoundPolicy, MetricsReport, Strategy, SynthSpec,
};

pub mod bench;

#[derive(Debug, Parser)]
#[command(name = "diva", version, about = "k-anonymization with diversity constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Publish a k-anonymous suppression that satisfies the constraints.
    Anonymize(AnonymizeArgs),
    /// Implication, satisfiability and minimal cover of a constraint set.
    Check(CheckArgs),
    /// Derive constraints from the value frequencies of a relation.
    GenConstraints(GenArgs),
    /// Sample a synthetic relation from a JSON spec.
    Synth(SynthArgs),
    /// Sweep k, constraint count and strategy over a set of instances.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct AnonymizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// JSON file `{"qi": [...], "sensitive": [...]}`.
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub constraints: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value = "min-choice")]
    pub strategy: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = diva_core::diverse::DEFAULT_CANDIDATE_CAP)]
    pub candidate_cap: usize,
    #[arg(long, default_value_t = 0)]
    pub kmember_seed: u64,
    /// Anonymized CSV; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Metrics report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Reject constraints whose lower bound is below k.
    #[arg(long)]
    pub strict_lower_bounds: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub constraints: PathBuf,
    /// Constraint (or array of constraints) to test for implication.
    #[arg(long, value_name = "FILE")]
    pub implies: Option<PathBuf>,
    #[arg(long)]
    pub satisfiable: bool,
    /// Print a minimal cover as JSON.
    #[arg(long)]
    pub min_cover: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// minimum, average or proportion.
    #[arg(long)]
    pub class: String,
    /// Comma-separated target attributes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub attrs: Vec<String>,
    /// Drop constraints with a lower bound below k.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the schema JSON implied by the attribute roles.
    #[arg(long)]
    pub schema_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Sweep configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Positive,
    Negative,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(Verdict::Positive) => EXIT_OK,
        Ok(Verdict::Negative) => EXIT_NEGATIVE,
        Err(e @ Error::Completion(_)) => {
            eprintln!("error: {e}");
            EXIT_NEGATIVE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn execute(command: &Command) -> diva_core::Result<Verdict> {
    match command {
        Command::Anonymize(a) => anonymize(a),
        Command::Check(a) => check(a),
        Command::GenConstraints(a) => gen_constraints(a),
        Command::Synth(a) => synth(a),
        Command::Bench(a) => bench::run(a),
    }
}

fn sink(path: Option<&Path>) -> diva_core::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn anonymize(a: &AnonymizeArgs) -> diva_core::Result<Verdict> {
    let spec = read_schema_spec(&a.schema)?;
    let r = read_relation_path(&a.input, &spec)?;
    let sigma = read_constraints(&a.constraints)?;
    let cfg = DivaConfig {
        strategy: Strategy::new(a.strategy.parse::<Heuristic>()?, a.seed),
        candidate_cap: a.candidate_cap,
        kmember_seed: a.kmember_seed,
        lower_bounds: if a.strict_lower_bounds { LowerBoundPolicy::Reject } else { LowerBoundPolicy::Admit },
        ..DivaConfig::new(a.k)
    };
    match diva(&r, &sigma, cfg)? {
        AnonymizationOutcome::Unsatisfiable => {
            println!("unsatisfiable");
            Ok(Verdict::Negative)
        }
        AnonymizationOutcome::Published(p) => {
            let mut out = sink(a.output.as_deref())?;
            write_relation(&mut out, &p.relation)?;
            out.flush()?;
            if let Some(path) = &a.report {
                write_json(BufWriter::new(File::create(path)?), &MetricsReport::new(&p.relation, &sigma)?)?;
            }
            Ok(Verdict::Positive)
        }
    }
}

fn check(a: &CheckArgs) -> diva_core::Result<Verdict> {
    let sigma = read_constraints(&a.constraints)?;
    if a.implies.is_none() && !a.satisfiable && !a.min_cover {
        return Err(Error::Config("check needs at least one of --implies, --satisfiable, --min-cover".into()));
    }
    let mut verdict = Verdict::Positive;
    let satisfiable = is_satisfiable(&sigma);
    if a.satisfiable {
        println!("{}", if satisfiable { "satisfiable" } else { "unsatisfiable" });
        if !satisfiable {
            verdict = Verdict::Negative;
        }
    }
    if let Some(path) = &a.implies {
        for c in read_constraint_list(path)? {
            let yes = implies(&sigma, &c);
            println!("{c}: {} (inferred {})", if yes { "implied" } else { "not implied" }, inferred_range(sigma.iter(), &c.target));
            if !yes {
                verdict = Verdict::Negative;
            }
        }
    }
    if a.min_cover {
        if satisfiable {
            write_json(io::stdout().lock(), &minimal_cover(&sigma)?)?;
        } else {
            println!("no minimal cover: constraint set is unsatisfiable");
            verdict = Verdict::Negative;
        }
    }
    Ok(verdict)
}

fn gen_constraints(a: &GenArgs) -> diva_core::Result<Verdict> {
    let spec = read_schema_spec(&a.schema)?;
    let r = read_relation_path(&a.input, &spec)?;
    let g = GeneratorSpec { class: a.class.parse::<ConstraintClass>()?, target_attrs: a.attrs.clone(), seed: a.seed };
    let sigma = match a.k {
        Some(k) => generate_constraints(&r, &g, k)?,
        None => generate_all(&r, &g)?,
    };
    write_json(sink(a.output.as_deref())?, &sigma)?;
    Ok(Verdict::Positive)
}

fn synth(a: &SynthArgs) -> diva_core::Result<Verdict> {
    let spec: SynthSpec = read_json(&a.spec)?;
    let r = synth_generate(&spec)?;
    let mut out = sink(a.output.as_deref())?;
    write_relation(&mut out, &r)?;
    out.flush()?;
    if let Some(path) = &a.schema_out {
        write_json(BufWriter::new(File::create(path)?), &SchemaSpec::for_relation(&r))?;
    }
    Ok(Verdict::Positive)
}
