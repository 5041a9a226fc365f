use clap::{Parser, Subcommand};
use primorbit_cli::{
    cmd_analyze, cmd_battery, cmd_classify, cmd_equiv, cmd_graph, cmd_validate, cmd_witness,
    CliError, RunOptions,
};
use std::path::PathBuf;

/// Primitive-ideal catalogues for Deaconu-Renault groupoid C*-algebras of
/// finite dynamical systems and finite graphs, with machine-checked
/// certificates for every asserted ideal equality or inequality.
#[derive(Parser)]
#[command(name = "primorbit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Certification tolerance for numerical identities.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,

    /// Trials for the identity battery.
    #[arg(long, global = true, default_value_t = 100)]
    trials: u32,

    /// Seed for the identity battery.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Enumerate closed invariant subsets only up to this many points.
    #[arg(long, global = true, default_value_t = 8)]
    max_invariant_subsets: usize,

    /// Doublings of the minimal-pair search bound before giving up.
    #[arg(long, global = true, default_value_t = 4)]
    sigma_bound_retries: u32,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a system or graph file.
    Validate { file: PathBuf },
    /// Full pipeline: quasi-orbits, profiles, catalogue, topology, battery.
    Analyze { file: PathBuf },
    /// Label the primitive ideal of a base point and angle.
    Classify {
        file: PathBuf,
        point: String,
        angle: String,
    },
    /// Decide whether two (point, angle) labels name the same ideal.
    Equiv {
        file: PathBuf,
        point1: String,
        angle1: String,
        point2: String,
        angle2: String,
    },
    /// Produce a verified separating witness for two inequivalent labels.
    Witness {
        file: PathBuf,
        point1: String,
        angle1: String,
        point2: String,
        angle2: String,
    },
    /// Run the seeded identity battery and print per-identity results.
    Battery { file: PathBuf },
    /// Quasi-orbit catalogue for a graph and representative paths.
    Graph {
        file: PathBuf,
        /// Paths written prefix|cycle with comma-separated edge names.
        #[arg(required = true)]
        representatives: Vec<String>,
    },
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let opts = RunOptions {
        tolerance: cli.tolerance,
        trials: cli.trials,
        seed: cli.seed,
        max_invariant_subsets: cli.max_invariant_subsets,
        sigma_bound_retries: cli.sigma_bound_retries,
    };
    match &cli.command {
        Command::Validate { file } => cmd_validate(file),
        Command::Analyze { file } => cmd_analyze(file, &opts),
        Command::Classify { file, point, angle } => cmd_classify(file, point, angle),
        Command::Equiv {
            file,
            point1,
            angle1,
            point2,
            angle2,
        } => cmd_equiv(file, point1, angle1, point2, angle2),
        Command::Witness {
            file,
            point1,
            angle1,
            point2,
            angle2,
        } => cmd_witness(file, point1, angle1, point2, angle2, &opts),
        Command::Battery { file } => cmd_battery(file, &opts),
        Command::Graph {
            file,
            representatives,
        } => cmd_graph(file, representatives),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => match &cli.output {
            Some(path) => {
                if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                    eprintln!("cannot write {}: {e}", path.display());
                    std::process::exit(2);
                }
            }
            None => {
                // A closed pipe on the way out is a consumer choice, not an
                // error worth a panic.
                use std::io::Write;
                let stdout = std::io::stdout();
                if let Err(e) = writeln!(stdout.lock(), "{text}") {
                    if e.kind() != std::io::ErrorKind::BrokenPipe {
                        eprintln!("cannot write report: {e}");
                        std::process::exit(2);
                    }
                }
            }
        },
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
