//! `starmap` — command-line front end for the exact deformation-
//! quantization engine: star products, quantized momentum maps,
//! multiplication-system checks, and graph enumeration.
//!
//! Exit codes: 0 all checks pass, 1 a verification failed, 2 bad input.

mod bundle;
mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use render::Format;

#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    pub fn new(msg: impl Into<String>) -> Self {
        CliError(msg.into())
    }

    pub fn from_err<E: std::fmt::Display>(e: E) -> Self {
        CliError(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "starmap",
    version,
    about = "Exact star products, quantized momentum maps, and Feynman-graph expansions"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Star products of polynomial symbols.
    #[command(subcommand)]
    Star(StarCmd),
    /// Quantized momentum map of a model bundle.
    #[command(subcommand)]
    Qmm(QmmCmd),
    /// Multiplication-system (flatness) checks.
    #[command(subcommand)]
    Gsystem(GsystemCmd),
    /// Feynman-graph enumeration.
    #[command(subcommand)]
    Graphs(GraphsCmd),
    /// Poisson-center membership.
    #[command(subcommand)]
    Casimir(CasimirCmd),
    /// Full verification report for a model bundle.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum StarCmd {
    /// Star product on the dual of a Lie algebra (th variables).
    Gutt {
        /// Builtin name (so3, heisenberg, abelianN) or an algebra JSON
        /// file; defaults to the abelian algebra spanned by the th
        /// variables appearing in the inputs.
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Truncation order in hbar.
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Standard-ordered symbol product on T*R^d (x and xi variables).
    Standard {
        /// Base dimension d.
        #[arg(long, default_value_t = 1)]
        dim: u32,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Truncation order in hbar.
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
}

#[derive(Subcommand)]
enum QmmCmd {
    /// Apply the quantized momentum map to a dual polynomial.
    Apply {
        #[command(flatten)]
        model: ModelArgs,
        /// Polynomial in the th variables.
        #[arg(long)]
        u: String,
    },
    /// Run verification suites against a model bundle.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// Suites to run; defaults to all of them.
        #[arg(long, value_enum)]
        suite: Vec<Suite>,
        /// Degree bound for test-function matrices.
        #[arg(long, default_value_t = 2)]
        deg: u32,
    },
}

#[derive(Subcommand)]
enum GsystemCmd {
    /// Evaluate the flatness residual of the bundle's multiplication
    /// system at the requested truncations.
    Check {
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Subcommand)]
enum GraphsCmd {
    /// List pairing classes with their multiplicities.
    Enumerate {
        /// Number of external vertices.
        #[arg(long, default_value_t = 2)]
        ext: usize,
        /// The hbar power to enumerate (at most 6).
        #[arg(long)]
        max_power: usize,
        /// Include classes with edges between internal vertices; those
        /// contribute nothing for hyperbolic phases and are omitted by
        /// default.
        #[arg(long, default_value_t = false)]
        full: bool,
    },
}

#[derive(Subcommand)]
enum CasimirCmd {
    /// Test whether a dual polynomial lies in the Poisson center.
    Check {
        /// Builtin name (so3, heisenberg, abelianN) or an algebra JSON file.
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long)]
        f: String,
    },
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Degree bound for test-function matrices.
    #[arg(long, default_value_t = 2)]
    deg: u32,
}

#[derive(Args)]
struct ModelArgs {
    /// Model bundle JSON file.
    #[arg(long)]
    model: PathBuf,
    /// Truncation order in hbar; defaults to the bundle's setting.
    #[arg(long)]
    order: Option<usize>,
    /// Group-coordinate truncation degree; defaults to the bundle's setting.
    #[arg(long)]
    vdeg: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Flatness of the multiplication system.
    Mc,
    /// The unit maps to the unit.
    Unital,
    /// Closed linear formula against the full expansion.
    Linear,
    /// Star-product morphism identity on a monomial matrix.
    Morphism,
    /// Transport generators equal the quantized linear images.
    Second,
    /// Deformed generators are derivations of the symbol product.
    Equivariance,
    /// Quantized center elements commute with the generators.
    Casimir,
}

impl Suite {
    pub fn all() -> Vec<Suite> {
        vec![
            Suite::Mc,
            Suite::Unital,
            Suite::Linear,
            Suite::Morphism,
            Suite::Second,
            Suite::Equivariance,
            Suite::Casimir,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Mc => "mc",
            Suite::Unital => "unital",
            Suite::Linear => "linear",
            Suite::Morphism => "morphism",
            Suite::Second => "second",
            Suite::Equivariance => "equivariance",
            Suite::Casimir => "casimir",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    let out = cli.out.clone();
    match run(cli) {
        Ok((value, pass)) => match render::emit(&value, format, out.as_ref()) {
            Ok(()) => {
                if pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {}", e.0);
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("error: {}", e.0);
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(serde_json::Value, bool), CliError> {
    match cli.command {
        Command::Star(StarCmd::Gutt { algebra, f, g, order }) => {
            commands::star_gutt(algebra.as_deref(), &f, &g, order)
        }
        Command::Star(StarCmd::Standard { dim, f, g, order }) => {
            commands::star_standard(dim, &f, &g, order)
        }
        Command::Qmm(QmmCmd::Apply { model, u }) => {
            commands::qmm_apply(&model.model, model.order, model.vdeg, &u)
        }
        Command::Qmm(QmmCmd::Verify { model, suite, deg }) => {
            let suites = if suite.is_empty() { Suite::all() } else { suite };
            commands::qmm_verify(&model.model, model.order, model.vdeg, &suites, deg)
        }
        Command::Gsystem(GsystemCmd::Check { model }) => {
            commands::gsystem_check(&model.model, model.order, model.vdeg)
        }
        Command::Graphs(GraphsCmd::Enumerate { ext, max_power, full }) => {
            commands::graphs_enumerate(ext, max_power, full)
        }
        Command::Casimir(CasimirCmd::Check { algebra, f }) => {
            commands::casimir_check(algebra.as_deref(), &f)
        }
        Command::Report(args) => {
            commands::report(&args.model.model, args.model.order, args.model.vdeg, args.deg)
        }
    }
}
