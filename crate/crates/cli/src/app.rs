//! The `multirank` command.
//!
//! Exit codes: 0 success, 1 output failure, 2 bad input, 3 the fit did not
//! converge (results are still written), 64 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use multirank_core::{
    fit, fit_unimodal_baseline, generate_dataset, rng::seeded, run_benchmark_cell, standard_cells,
    FitConfig, Mode,
};

use crate::error::InputError;
use crate::interactions::{read_interactions, write_interactions};
use crate::report::{
    benchmark_csv, benchmark_table, write_comparison_csv, FitDocument, TruthDocument,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "multirank",
    version,
    about = "Rankings from multiple types of pairwise interactions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit strengths and valences to an interaction file.
    Fit(FitArgs),
    /// Generate a synthetic interaction file and its ground truth.
    Simulate(SimulateArgs),
    /// Compare the multimodal fit with the single-type baseline on synthetic data.
    Benchmark(BenchmarkArgs),
    /// Paired rankings from the multimodal fit and the single-type baseline.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Ml,
    Map,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Ml => Mode::Ml,
            ModeArg::Map => Mode::Map,
        }
    }
}

#[derive(Debug, Args)]
struct FitOptions {
    #[arg(long, value_enum, default_value = "map")]
    mode: ModeArg,
    /// Convergence tolerance on the change in scores and valences.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Maximum number of EM iterations.
    #[arg(long = "max-iter", default_value_t = 10_000)]
    max_iter: usize,
    /// Seed for the random starting point.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl FitOptions {
    fn config(&self) -> FitConfig {
        FitConfig {
            mode: self.mode.into(),
            outer_tol: self.tol,
            max_outer_iters: self.max_iter,
            seed: self.seed,
            ..FitConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    input: PathBuf,
    #[command(flatten)]
    options: FitOptions,
    /// Invert the orientation chosen automatically.
    #[arg(long)]
    flip: bool,
    /// Write the JSON here, with `.scores.csv` and `.valences.csv`
    /// companions. Without it the JSON goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    types: usize,
    #[arg(long, default_value_t = 0.0)]
    qmin: f64,
    #[arg(long, default_value_t = 1.0)]
    qmax: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes `<prefix>.csv` and `<prefix>.truth.json`.
    #[arg(long = "out-prefix")]
    out_prefix: PathBuf,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    /// Random instances per cell.
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Writes the CSV here and the text table next to it (`.txt`). Without
    /// it the text table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    input: PathBuf,
    #[command(flatten)]
    options: FitOptions,
    /// CSV destination; stdout by default.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Input(InputError),
    Output(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<multirank_core::Error> for Failure {
    fn from(e: multirank_core::Error) -> Self {
        Failure::Input(e.into())
    }
}

fn output_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Output(format!("cannot write {}: {e}", path.display()))
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Benchmark(a) => run_benchmark(a),
        Command::Compare(a) => run_compare(a),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
        Err(Failure::Output(msg)) => {
            eprintln!("error: {msg}");
            EXIT_OUTPUT
        }
    }
}

/// `results.json` becomes `results.scores.csv` and so on.
fn companion(path: &Path, suffix: &str) -> PathBuf {
    let stem = if path.extension().is_some_and(|e| e == "json" || e == "csv") {
        path.with_extension("")
    } else {
        path.to_path_buf()
    };
    let mut s = stem.into_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(output_err(path))
}

fn write_stdout(contents: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(contents.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Output(format!("cannot write to stdout: {e}")))
}

fn check_finite(name: &str, v: f64) -> Result<(), Failure> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(InputError::Invalid(format!("--{name} must be finite")).into())
    }
}

fn run_fit(args: FitArgs) -> Result<i32, Failure> {
    check_finite("tol", args.options.tol)?;
    let data = read_interactions(&args.input)?;
    let config = FitConfig {
        force_flip: args.flip,
        ..args.options.config()
    };
    let result = fit(&data, &config)?;
    let doc = FitDocument::new(&result, &data);
    match &args.out {
        Some(path) => {
            write_file(path, &doc.to_json())?;
            write_file(&companion(path, ".scores.csv"), &doc.scores_csv())?;
            write_file(&companion(path, ".valences.csv"), &doc.valences_csv())?;
        }
        None => write_stdout(&doc.to_json())?,
    }
    if result.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "warning: no convergence after {} iterations; results written anyway",
            result.outer_iterations
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn run_simulate(args: SimulateArgs) -> Result<i32, Failure> {
    check_finite("qmin", args.qmin)?;
    check_finite("qmax", args.qmax)?;
    let truth = generate_dataset(
        args.n,
        args.m,
        args.types,
        args.qmin,
        args.qmax,
        &mut seeded(args.seed),
    )?;
    let csv_path = companion(&args.out_prefix, ".csv");
    let mut csv = Vec::new();
    write_interactions(&truth.dataset, &mut csv)
        .map_err(|e| Failure::Output(format!("cannot serialize interactions: {e}")))?;
    fs::write(&csv_path, csv).map_err(output_err(&csv_path))?;
    write_file(
        &companion(&args.out_prefix, ".truth.json"),
        &TruthDocument::new(&truth).to_json(),
    )?;
    Ok(EXIT_OK)
}

fn run_benchmark(args: BenchmarkArgs) -> Result<i32, Failure> {
    if args.instances == 0 {
        return Err(InputError::Invalid("--instances must be at least 1".into()).into());
    }
    let config = FitConfig::default();
    let cells = standard_cells();
    let mut results = Vec::with_capacity(cells.len());
    for (k, cell) in cells.iter().enumerate() {
        let r = run_benchmark_cell(cell, k, args.instances, args.seed, &config)?;
        eprintln!(
            "[{}/{}] M={} T={} q in [{}, {}]: {:.3} / {:.3}",
            k + 1,
            cells.len(),
            r.m,
            r.t,
            r.q_min,
            r.q_max,
            r.mean_r2_multimodal,
            r.mean_r2_baseline
        );
        results.push(r);
    }
    let table = benchmark_table(&results);
    match &args.out {
        Some(path) => {
            write_file(path, &benchmark_csv(&results))?;
            write_file(&companion(path, ".txt"), &table)?;
        }
        None => write_stdout(&table)?,
    }
    Ok(EXIT_OK)
}

fn run_compare(args: CompareArgs) -> Result<i32, Failure> {
    check_finite("tol", args.options.tol)?;
    let data = read_interactions(&args.input)?;
    let config = args.options.config();
    let multi = fit(&data, &config)?;
    let base = fit_unimodal_baseline(&data, &config)?;
    let mut csv = Vec::new();
    write_comparison_csv(&data, &multi, &base, &mut csv)
        .map_err(|e| Failure::Output(format!("cannot serialize comparison: {e}")))?;
    let csv = String::from_utf8(csv).expect("csv output is UTF-8");
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => write_stdout(&csv)?,
    }
    if multi.converged && base.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("warning: a fit did not converge; results written anyway");
        Ok(EXIT_NOT_CONVERGED)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_names() {
        assert_eq!(
            companion(Path::new("r.json"), ".scores.csv"),
            Path::new("r.scores.csv")
        );
        assert_eq!(
            companion(Path::new("out/r"), ".csv"),
            Path::new("out/r.csv")
        );
        assert_eq!(companion(Path::new("b.csv"), ".txt"), Path::new("b.txt"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["multirank"]), EXIT_USAGE);
        assert_eq!(run(["multirank", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["multirank", "fit", "x.csv", "--bogus"]), EXIT_USAGE);
        assert_eq!(
            run(["multirank", "fit", "x.csv", "--mode", "mle"]),
            EXIT_USAGE
        );
        assert_eq!(run(["multirank", "--help"]), EXIT_OK);
    }
}
