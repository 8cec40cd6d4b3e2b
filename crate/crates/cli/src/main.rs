mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact h-transforms of polynomial diffusion models and Monte Carlo checks
/// of the conditioned processes.
#[derive(Parser, Debug)]
#[command(name = "doobkit", version)]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Catalogue of models.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
    /// Check the boundary equation, density, ground state, kappa and duality.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Print the h-transform of a model.
    Htransform {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Emit::Json)]
        emit: Emit,
    },
    /// Simulate a model (or its h-transform) or a matrix Brownian motion.
    Simulate(SimulateArgs),
    /// Run a named comparison experiment (`list` prints the names).
    Compare(CompareArgs),
    /// Finite Markov chain conditioning.
    Chain {
        #[command(subcommand)]
        action: ChainAction,
    },
    /// Print the default run configuration.
    Config,
}

#[derive(Subcommand, Debug)]
pub enum ModelsAction {
    List,
    Show {
        name: String,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum ChainAction {
    Condition {
        /// Transition matrix as JSON (`[[..],[..]]`) or a path to a JSON file.
        #[arg(long)]
        matrix: String,
        /// Comma-separated state indices.
        #[arg(long)]
        subset: String,
        #[arg(long)]
        x0: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "N")]
        big_n: usize,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Json,
    Text,
}

/// Model parameters, each an exact rational such as `3/2`.
#[derive(Args, Debug, Default, Clone)]
pub struct ParamArgs {
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub a: Option<String>,
}

impl ParamArgs {
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        [
            ("n", &self.n),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("lambda", &self.lambda),
            ("d", &self.d),
            ("m", &self.m),
            ("p", &self.p),
            ("q", &self.q),
            ("a", &self.a),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Catalogue name, or `all` for `verify`.
    #[arg(long)]
    pub model: Option<String>,
    /// Model document in JSON instead of a catalogue entry.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MatrixArg {
    Sod,
    Su3,
    Hermitian,
    Symmetric,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapArg {
    CharpolyCoeffs,
    TraceSu3,
    SpectrumSorted,
    FirstColumnBlock,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    RejectStep,
    HalveDt,
    Absorb,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Simulate the h-transform of the model.
    #[arg(long)]
    pub conditioned: bool,
    /// Comma-separated initial point in real coordinates; defaults to the
    /// model's interior point.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Simulate a matrix Brownian motion instead of a model.
    #[arg(long, value_enum)]
    pub matrix: Option<MatrixArg>,
    /// Matrix size for `--matrix`.
    #[arg(long = "size")]
    pub size: Option<usize>,
    /// Spectral map applied to each matrix; defaults to the natural map for
    /// the kind (block of the first column, SU(3) trace, sorted spectrum).
    #[arg(long, value_enum)]
    pub map: Option<MapArg>,
    /// Block shape `p,q` for `--map first-column-block`.
    #[arg(long, default_value = "1,1")]
    pub block: String,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub n_paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
    /// Run paths on one thread.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct CompareArgs {
    pub experiment: String,
    #[arg(long)]
    pub n_paths: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub sequential: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
