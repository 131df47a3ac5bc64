//! The `trsat` command line: generate instances, train, solve, evaluate,
//! benchmark against WalkSAT, and query the exhaustive oracle.

mod commands;
pub mod error;
pub mod manifest;
pub mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, ErrorKind};

#[derive(Debug, Parser)]
#[command(name = "trsat", version, about = "MaxSAT and SAT solving with a bipartite-graph transformer")]
pub struct Cli {
    /// Where to write the run manifest (defaults next to the main output).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Log progress at info level.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate DIMACS instances.
    Gen(GenArgs),
    /// Train a model on a directory of DIMACS files.
    Train(TrainArgs),
    /// Solve one formula with a trained model.
    Solve(SolveArgs),
    /// Mean completion rate of a model over datasets.
    Eval(EvalArgs),
    /// Time the model against WalkSAT and an optional external solver.
    Bench(BenchArgs),
    /// Exhaustive MaxSAT on a small formula.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub family: GenFamily,
    #[arg(long, default_value_t = 1, global = true)]
    pub count: usize,
    /// Instance `i` is generated from `seed + i`.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenFamily {
    /// Uniform random 3-SAT.
    Rand3 {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        clauses: usize,
    },
    /// k-coloring of a random graph.
    Color(GraphArgs),
    /// Vertex cover of size at most k.
    Cover(GraphArgs),
    /// k-clique.
    Clique(GraphArgs),
    /// Circuit satisfiability with output constraints.
    Circuit(CircuitArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub vertices: usize,
    #[arg(long, default_value_t = 0.5)]
    pub edge_prob: f64,
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct CircuitArgs {
    /// Encode this netlist instead of generating random ones.
    #[arg(long)]
    pub netlist: Option<PathBuf>,
    /// Output constraints for `--netlist`, e.g. `s0=1,s1=0`.
    #[arg(long, value_delimiter = ',')]
    pub constrain: Vec<String>,
    #[arg(long, default_value_t = 8)]
    pub inputs: usize,
    #[arg(long, default_value_t = 24)]
    pub gates: usize,
    #[arg(long, default_value_t = 2)]
    pub outputs: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Held-out set; without it a fraction of `--data` is split off.
    #[arg(long)]
    pub val_data: Option<PathBuf>,
    /// Final checkpoint.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV history (defaults to `<out>.history.csv`).
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// `key = value` file of model and training settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Extra `key=value` settings, applied after the named flags.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Sets init_seed, shuffle_seed and noise_seed together.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub warmup_steps: Option<u64>,
    #[arg(long)]
    pub lr_factor: Option<f64>,
    #[arg(long)]
    pub channels: Option<usize>,
    #[arg(long)]
    pub heads: Option<usize>,
    #[arg(long)]
    pub ffn_hidden: Option<usize>,
    #[arg(long)]
    pub encoder_layers: Option<usize>,
    #[arg(long)]
    pub decoder_layers: Option<usize>,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMode {
    Maxsat,
    Exact,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub cnf: PathBuf,
    #[arg(long, value_enum, default_value_t = SolveMode::Maxsat)]
    pub mode: SolveMode,
    #[arg(long, default_value_t = trsat_core::solver::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset directories; each prints one line.
    #[arg(long, required = true)]
    pub data: Vec<PathBuf>,
    /// Instance `i` of each dataset uses noise seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// `key = value` file with reps, max_flips, noise_p, restarts, seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub max_flips: Option<u64>,
    #[arg(long)]
    pub noise_p: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub cnf: PathBuf,
    #[arg(long, default_value_t = trsat_core::DEFAULT_VAR_CAP)]
    pub cap: usize,
}

/// Parses and runs, returning the text a caller would print to stdout.
pub fn run(argv: &[String]) -> Result<String, CliError> {
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::new(ErrorKind::Usage, e.to_string()))?;
    commands::dispatch(&cli, argv)
}

/// Entry point for the binary: prints output, or the error and a JSON error line.
pub fn main_with_args(argv: Vec<String>) -> ExitCode {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let err = CliError::new(ErrorKind::Usage, e.kind().to_string());
            eprintln!("{}", err.json_line());
            return ExitCode::from(err.kind.exit_code());
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match commands::dispatch(&cli, &argv) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("trsat: {err}");
            eprintln!("{}", err.json_line());
            ExitCode::from(err.kind.exit_code())
        }
    }
}
