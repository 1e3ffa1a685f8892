//! `susyqm` — construct solvable 1-D potentials, validate them, and compare
//! their closed-form spectra against a finite-difference oracle.

use clap::{Args, Parser, Subcommand};

use susyqm_cli::{run_job, BaseKind, CliError, CommandKind, ExportFormat, FamilyKind, JobConfig};

#[derive(Parser)]
#[command(
    name = "susyqm",
    version,
    about = "Quasi- and conditionally-exactly solvable 1-D potentials via SUSY factorization",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build superpotentials, partner potentials and the two closed-form
    /// eigenstates; optionally export the sampled grid
    Construct(ModelArgs),
    /// Run the validator battery (Riccati residual, sign condition, node
    /// counts, admissibility); exit 0 only if everything passes
    Validate(ModelArgs),
    /// Solve the potential with the finite-difference oracle and compare
    /// against the expected levels
    Spectrum(ModelArgs),
    /// Full conditionally-exactly-solvable workflow over a solvable base:
    /// route cross-checks, duality, shape invariance, oracle comparison
    Ces(ModelArgs),
    /// Write the sampled grid columns (x, V-, V+, W, W1, psi0, psi1)
    ExportGrid(ModelArgs),
}

impl Command {
    fn kind(&self) -> CommandKind {
        match self {
            Command::Construct(_) => CommandKind::Construct,
            Command::Validate(_) => CommandKind::Validate,
            Command::Spectrum(_) => CommandKind::Spectrum,
            Command::Ces(_) => CommandKind::Ces,
            Command::ExportGrid(_) => CommandKind::ExportGrid,
        }
    }

    fn args(&self) -> &ModelArgs {
        match self {
            Command::Construct(a)
            | Command::Validate(a)
            | Command::Spectrum(a)
            | Command::Ces(a)
            | Command::ExportGrid(a) => a,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Generator family
    #[arg(long, value_enum)]
    family: Option<FamilyKind>,
    /// Exactly solvable base (fixes the gap to its special value)
    #[arg(long, value_enum)]
    base: Option<BaseKind>,
    /// Family index: polynomial index for Hermite families, odd dual
    /// solution index (1, 3, 5) for sinh / Rosen-Morse models
    #[arg(long)]
    k: Option<usize>,
    /// Denominator index of the hermite-ratio family (k >= m >= 1)
    #[arg(long)]
    m: Option<usize>,
    /// Strength of the hyperbolic base
    #[arg(long)]
    alpha: Option<f64>,
    /// Gap between the two closed-form levels (defaults to the exactly
    /// solvable value where one exists)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Grid half-width
    #[arg(long = "L", default_value_t = 12.0)]
    half_width: f64,
    /// Grid point count (odd, >= 101)
    #[arg(long = "N", default_value_t = 4001)]
    points: usize,
    /// Number of oracle levels to resolve
    #[arg(long, default_value_t = 6)]
    levels: usize,
    /// Acceptance threshold for the Riccati residual
    #[arg(long = "tol-riccati", default_value_t = 1e-9)]
    tol_riccati: f64,
    /// Acceptance threshold for oracle-vs-expected energies
    #[arg(long = "tol-spectrum", default_value_t = 1e-3)]
    tol_spectrum: f64,
    /// Path for the grid export
    #[arg(long)]
    out: Option<String>,
    /// Grid export format
    #[arg(long, value_enum, default_value_t = ExportFormat::Csv)]
    format: ExportFormat,
    /// Self-test hook: add a constant offset to W1 before validation
    #[arg(long = "perturb-w1", default_value_t = 0.0, hide = true)]
    perturb_w1: f64,
}

fn to_config(command: CommandKind, args: &ModelArgs) -> JobConfig {
    let mut config = JobConfig::defaults(command);
    config.family = args.family;
    config.base = args.base;
    config.k = args.k;
    config.m = args.m;
    config.alpha = args.alpha;
    config.epsilon = args.epsilon;
    config.half_width = args.half_width;
    config.points = args.points;
    config.levels = args.levels;
    config.tol_riccati = args.tol_riccati;
    config.tol_spectrum = args.tol_spectrum;
    config.out = args.out.clone();
    config.format = args.format;
    config.perturb_w1 = args.perturb_w1;
    config
}

fn fail(err: CliError) -> ! {
    eprintln!("{}", err.to_json());
    std::process::exit(err.exit_code());
}

fn main() {
    let cli = Cli::parse();
    let config = to_config(cli.command.kind(), cli.command.args());
    match run_job(&config) {
        Ok(doc) => {
            // export-grid without --out already streamed the grid itself
            let quiet = matches!(config.command, CommandKind::ExportGrid) && config.out.is_none();
            if !quiet {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&doc).expect("document serialization")
                );
            }
            std::process::exit(if doc.all_passed { 0 } else { 1 });
        }
        Err(err) => fail(err),
    }
}
