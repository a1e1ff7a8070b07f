//! `pivot-median`: compute approximate median strings, run alpha sweeps and
//! generate synthetic datasets.
//!
//! Results go to stdout (or `--output`), diagnostics to stderr. Exit status is
//! 0 on success, 1 for usage or validation errors and 2 for I/O failures.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pivot_median::bench::{summary_table, write_csv};
use pivot_median::dataset::save_generated;
use pivot_median::distance::MAX_ALPHABET;
use pivot_median::{
    approximate_median, generate_clustered, load_dataset, run_sweep, CostModel, Dataset, Error,
    EvalCounter, GeneratorConfig, MedianOptions, Mode, Strategy, SweepConfig,
};

#[derive(Debug, Parser)]
#[command(name = "pivot-median", version, about = "Approximate median strings with sparse pivot selection")]
struct Cli {
    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one approximate median (full set, or pivots with --alpha).
    Compute(ComputeArgs),
    /// Run an alpha sweep and write a CSV report.
    Sweep(SweepArgs),
    /// Generate a clustered synthetic dataset.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Dataset file, one string per line.
    #[arg(long)]
    input: PathBuf,

    /// Cost model: "freeman", "unit", or a path to a JSON cost model.
    #[arg(long, default_value = "freeman")]
    cost: String,

    /// Alphabet size for the unit model (default: smallest covering the data).
    #[arg(long)]
    alphabet: Option<usize>,

    /// Accept blank lines as empty strings.
    #[arg(long)]
    allow_empty: bool,
}

#[derive(Debug, Args)]
struct AlgorithmArgs {
    /// Skip the set median's own entry during pivot selection.
    #[arg(long)]
    dedupe_median: bool,

    /// Give every pivot weight 1 in the refinement objective.
    #[arg(long)]
    unweighted_pivots: bool,

    /// Count the final MAD evaluation in distance_evals.
    #[arg(long)]
    count_mad: bool,

    /// Stop refinement after this many applied edits (0 = until no edit helps).
    #[arg(long, default_value_t = 0)]
    max_rounds: usize,

    /// Edit ranking used by the refinement.
    #[arg(long, default_value = "greedy-full-scan")]
    strategy: String,
}

impl AlgorithmArgs {
    fn options(&self) -> Result<MedianOptions, CliError> {
        Ok(MedianOptions {
            dedupe_median: self.dedupe_median,
            unweighted_pivots: self.unweighted_pivots,
            count_mad: self.count_mad,
            max_rounds: self.max_rounds,
            strategy: self.strategy.parse::<Strategy>()?,
        })
    }
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    algorithm: AlgorithmArgs,

    /// Pivot separation as a fraction of the estimated diameter; omit for the
    /// full set.
    #[arg(long)]
    alpha: Option<f64>,

    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    algorithm: AlgorithmArgs,

    #[arg(long, default_value_t = 0.30)]
    alpha_start: f64,

    #[arg(long, default_value_t = 0.02)]
    alpha_end: f64,

    #[arg(long, default_value_t = 0.005)]
    alpha_step: f64,

    /// Leave out the full-set reference row.
    #[arg(long)]
    no_reference: bool,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Do not print the summary table on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Number of clusters.
    #[arg(long, default_value_t = 3)]
    clusters: usize,

    /// Strings per cluster.
    #[arg(long, default_value_t = 120)]
    size: usize,

    /// Length of each cluster seed.
    #[arg(long, default_value_t = 50)]
    len: usize,

    #[arg(long, default_value_t = 8)]
    alphabet: usize,

    /// Per-position substitution probability; insertions and deletions each
    /// happen with half of it.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,

    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Dataset path; metadata goes to `<output>.meta.json`.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Loads the dataset and resolves the cost model against it.
fn load_inputs(args: &InputArgs) -> Result<(Dataset, CostModel), CliError> {
    let read = |alphabet| {
        load_dataset(&args.input, alphabet, args.allow_empty).map_err(|e| match e {
            Error::Io(io) => io_error(&args.input, io),
            other => other.into(),
        })
    };
    match args.cost.as_str() {
        "unit" => {
            let data = read(args.alphabet.unwrap_or(MAX_ALPHABET))?;
            let alphabet = args.alphabet.unwrap_or_else(|| data.used_alphabet_size());
            let model = CostModel::unit(alphabet)?;
            Ok((data.with_alphabet_size(alphabet)?, model))
        }
        "freeman" => {
            let model = CostModel::builtin("freeman", args.alphabet)?;
            Ok((read(model.alphabet_size())?, model))
        }
        path => {
            let path = Path::new(path);
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            let model = CostModel::from_json(&text)?;
            if let Some(a) = args.alphabet.filter(|&a| a != model.alphabet_size()) {
                return Err(CliError::Usage(format!(
                    "--alphabet {a} conflicts with the cost model's {} symbols",
                    model.alphabet_size()
                )));
            }
            Ok((read(model.alphabet_size())?, model))
        }
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| io_error(p, e)),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn cmd_compute(args: &ComputeArgs) -> Result<(), CliError> {
    let opts = args.algorithm.options()?;
    let (data, model) = load_inputs(&args.input)?;
    let mode = match args.alpha {
        Some(alpha) => Mode::Pivots { alpha },
        None => Mode::Full,
    };
    let result = approximate_median(&data, &model, mode, &EvalCounter::new(), &opts)?;

    let mut json = serde_json::to_value(&result).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(obj) = json.as_object_mut() {
        obj.insert("dataset".into(), data.name().into());
        obj.insert("cost_model".into(), model.name().into());
        obj.insert("strategy".into(), opts.strategy.to_string().into());
        obj.insert("pivot_pct".into(), result.pivot_pct().into());
    }
    let mut out = format!("{}\n", result.median);
    out.push_str(&serde_json::to_string_pretty(&json).expect("json value"));
    out.push('\n');
    write_output(args.output.as_deref(), out.as_bytes())?;

    eprintln!(
        "{}: median length {}, MAD {:.4}, {} distance evaluations",
        data.name(),
        result.median.len(),
        result.mad,
        result.distance_evals
    );
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let opts = args.algorithm.options()?;
    let cfg = SweepConfig {
        alpha_start: args.alpha_start,
        alpha_end: args.alpha_end,
        alpha_step: args.alpha_step,
        include_reference: !args.no_reference,
    };
    // validate the grid before touching the input
    pivot_median::alpha_grid(&cfg)?;
    let (data, model) = load_inputs(&args.input)?;
    let records = run_sweep(&data, &model, &cfg, &opts)?;

    let mut csv = Vec::new();
    write_csv(&records, &mut csv)?;
    write_output(args.output.as_deref(), &csv)?;
    if !args.quiet {
        eprint!("{}", summary_table(&records));
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let cfg = GeneratorConfig {
        cluster_count: args.clusters,
        per_cluster_size: args.size,
        seed_length: args.len,
        alphabet_size: args.alphabet,
        mutation_rate: args.noise,
        rng_seed: args.seed,
    };
    let data = generate_clustered(&cfg)?;
    save_generated(&args.output, &data, &cfg).map_err(|e| match e {
        Error::Io(io) => io_error(&args.output, io),
        other => other.into(),
    })?;
    eprintln!("wrote {} strings to {}", data.len(), args.output.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Compute(args) => cmd_compute(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Gen(args) => cmd_gen(args),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Io(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
