//! Command-line definitions and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::error::YbxError;
use crate::records::{write_report, Outcome};

#[derive(Debug, Parser)]
#[command(name = "ybx", version, about = "Numerical checks of Yang-Baxter and star-triangle relations")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for every random draw in the run.
    #[arg(long, global = true, env = "YBX_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance; each command has its own default.
    #[arg(long, global = true, value_parser = positive)]
    pub tol: Option<f64>,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

impl Global {
    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Builtin weight families.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Check the relation matching a weight file on random rapidities.
    Verify(VerifyArgs),
    /// Convert a weight file to another formulation and tabulate it.
    Convert(ConvertArgs),
    /// Matrix forms, transfer matrices, classical limit, boundaries, inversion.
    #[command(subcommand)]
    Operators(OperatorsCommand),
    /// Impedance networks.
    #[command(subcommand)]
    Net(NetCommand),
    /// Gaussian star-triangle identity.
    #[command(subcommand)]
    Gaussian(GaussianCommand),
    /// Potts star-triangle checks.
    #[command(subcommand)]
    Potts(PottsCommand),
    /// Non-strict demonstrations.
    #[command(subcommand)]
    Demo(DemoCommand),
}

#[derive(Debug, Subcommand)]
pub enum CatalogCommand {
    /// List builtin entries.
    List,
    /// Write the weight file of one entry.
    Emit(EmitArgs),
}

#[derive(Debug, Args)]
pub struct EmitArgs {
    pub name: String,
    /// Formulation for Potts entries (spin, vertex, checkerboard-irf, ...).
    #[arg(long)]
    pub kind: Option<String>,
    /// Destination file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long, default_value_t = 10, value_parser = at_least_one)]
    pub trials: usize,
    /// Enter spin weights with both arguments swapped.
    #[arg(long)]
    pub transposed: bool,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// Target kind.
    #[arg(long)]
    pub to: String,
    /// Rapidity to tabulate at: complex string or JSON.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Destination file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum OperatorsCommand {
    /// R-matrix and Ř-matrix forms on a chain.
    Ybe(OpYbeArgs),
    /// Transfer-matrix commutation and the log-derivative Hamiltonian.
    Transfer(TransferArgs),
    /// Classical Yang-Baxter equation of the builtin classical family.
    Cybe(CybeArgs),
    /// Diagonal boundary matrix and reflection relation residuals.
    Reflection(ReflectionArgs),
    /// Local inversion relation.
    Inversion(InversionArgs),
}

#[derive(Debug, Args)]
pub struct OpYbeArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub sites: usize,
    #[arg(long, default_value_t = 10, value_parser = at_least_one)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// Row lengths.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub lengths: Vec<usize>,
    /// Fixed horizontal rapidity.
    #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
    pub p: f64,
    /// Vertical rapidities.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-0.7,-0.25,0.15,0.6,1.1")]
    pub grid: Vec<f64>,
    /// Also build H = T(p)^-1 T'(p) and check it commutes with the grid.
    #[arg(long)]
    pub hamiltonian: bool,
    #[arg(long, default_value_t = 1e-5, value_parser = positive)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-7, value_parser = positive)]
    pub hamiltonian_tol: f64,
}

#[derive(Debug, Args)]
pub struct CybeArgs {
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4")]
    pub hbar: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ReflectionArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long, default_value_t = 0.35, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    /// Number of grid points when `--grid` is absent.
    #[arg(long, default_value_t = 10, value_parser = at_least_one)]
    pub points: usize,
    /// Value of k at the first grid point.
    #[arg(long, default_value_t = 1.7, allow_hyphen_values = true)]
    pub k_ref: f64,
}

#[derive(Debug, Args)]
pub struct InversionArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long, default_value_t = 20, value_parser = at_least_one)]
    pub pairs: usize,
}

#[derive(Debug, Subcommand)]
pub enum NetCommand {
    /// Node potentials and currents for the given boundary potentials.
    Solve(NetInput),
    /// Reduce to the terminals by prune, parallel, series and wye-delta steps.
    Reduce(NetReduceArgs),
    /// Equivalent impedance between two nodes.
    Equiv(NetEquivArgs),
}

#[derive(Debug, Args)]
pub struct NetInput {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct NetReduceArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Overrides the terminals listed in the file.
    #[arg(long, value_delimiter = ',')]
    pub terminals: Option<Vec<String>>,
    /// Also write the reduced netlist here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NetEquivArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub between: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum GaussianCommand {
    /// Star side against triangle side, closed form and quadrature.
    Check(GaussianArgs),
}

#[derive(Debug, Args)]
pub struct GaussianArgs {
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub beta: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub legs: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.5,-0.3,1.1")]
    pub phis: Vec<f64>,
    /// Additional random draws.
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub quad_tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum PottsCommand {
    /// Spin star-triangle relations and the rapidity relation, or the
    /// impedance form of the zero-state limit.
    Check(PottsArgs),
}

#[derive(Debug, Args)]
pub struct PottsArgs {
    #[arg(long, default_value_t = 2, conflicts_with = "zero_limit")]
    pub states: usize,
    #[arg(long)]
    pub zero_limit: bool,
    #[arg(long, default_value_t = 50, value_parser = at_least_one)]
    pub trials: usize,
    /// Impedance scale in the zero-state limit.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub c: f64,
}

#[derive(Debug, Subcommand)]
pub enum DemoCommand {
    /// Per-site inversion trend on small tori. Reports only.
    Inversion(DemoInversionArgs),
}

#[derive(Debug, Args)]
pub struct DemoInversionArgs {
    /// Defaults to the unit-normalised six-vertex family.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, default_value_t = 0.25, allow_hyphen_values = true)]
    pub q: f64,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Catalog(CatalogCommand::List) => "catalog list",
        Command::Catalog(CatalogCommand::Emit(_)) => "catalog emit",
        Command::Verify(_) => "verify",
        Command::Convert(_) => "convert",
        Command::Operators(OperatorsCommand::Ybe(_)) => "operators ybe",
        Command::Operators(OperatorsCommand::Transfer(_)) => "operators transfer",
        Command::Operators(OperatorsCommand::Cybe(_)) => "operators cybe",
        Command::Operators(OperatorsCommand::Reflection(_)) => "operators reflection",
        Command::Operators(OperatorsCommand::Inversion(_)) => "operators inversion",
        Command::Net(NetCommand::Solve(_)) => "net solve",
        Command::Net(NetCommand::Reduce(_)) => "net reduce",
        Command::Net(NetCommand::Equiv(_)) => "net equiv",
        Command::Gaussian(_) => "gaussian check",
        Command::Potts(_) => "potts check",
        Command::Demo(_) => "demo inversion",
    }
}

/// What a command produced: a report, or a raw file body for `emit`/`convert`.
pub enum Output {
    Report(Outcome),
    Raw(String),
}

pub fn execute(cli: &Cli) -> Result<Output, YbxError> {
    let g = &cli.global;
    let report = |o: Outcome| Ok(Output::Report(o));
    match &cli.command {
        Command::Catalog(CatalogCommand::List) => report(commands::catalog_list()),
        Command::Catalog(CatalogCommand::Emit(a)) => commands::catalog_emit(a),
        Command::Verify(a) => report(commands::verify(a, g)?),
        Command::Convert(a) => commands::convert(a),
        Command::Operators(OperatorsCommand::Ybe(a)) => report(commands::operators_ybe(a, g)?),
        Command::Operators(OperatorsCommand::Transfer(a)) => report(commands::operators_transfer(a, g)?),
        Command::Operators(OperatorsCommand::Cybe(a)) => report(commands::operators_cybe(a, g)?),
        Command::Operators(OperatorsCommand::Reflection(a)) => report(commands::operators_reflection(a, g)?),
        Command::Operators(OperatorsCommand::Inversion(a)) => report(commands::operators_inversion(a, g)?),
        Command::Net(NetCommand::Solve(a)) => report(commands::net_solve(a, g)?),
        Command::Net(NetCommand::Reduce(a)) => report(commands::net_reduce(a, g)?),
        Command::Net(NetCommand::Equiv(a)) => report(commands::net_equiv(a)?),
        Command::Gaussian(GaussianCommand::Check(a)) => report(commands::gaussian_check(a, g)?),
        Command::Potts(PottsCommand::Check(a)) => report(commands::potts_check(a, g)?),
        Command::Demo(DemoCommand::Inversion(a)) => report(commands::demo_inversion(a, g)?),
    }
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let result = execute(cli).and_then(|out| {
        let (text, pass) = match out {
            Output::Report(o) => (o.render(command_name(&cli.command), cli.global.seed), o.pass()),
            Output::Raw(s) => (s, true),
        };
        write_report(&text, cli.global.output.as_deref())?;
        Ok(pass)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("ybx: {e}");
            e.exit_code()
        }
    }
}
