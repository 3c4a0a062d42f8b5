use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

#[derive(Parser, Debug)]
#[command(
    name = "mosaic-wiretap",
    version,
    about = "Mosaic-based wiretap codes: designs, leakage bounds and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalOpts,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub rng_seed: u64,

    /// Numerical tolerance for bound margins.
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tol: f64,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "MOSAIC_WIRETAP_JOBS", default_value_t = 0)]
    pub jobs: usize,

    /// Output file (written atomically); standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct FieldOpts {
    /// Prime field characteristic.
    #[arg(long)]
    pub q: Option<u32>,
    /// Extension degree.
    #[arg(long)]
    pub t: Option<u32>,
    /// Masking-subspace dimension (block size q^ell).
    #[arg(long)]
    pub ell: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct SourceOpts {
    #[command(flatten)]
    pub field: FieldOpts,
    /// Mosaic file to use instead of the finite-field construction.
    #[arg(long, conflicts_with_all = ["q", "t", "ell"])]
    pub mosaic: Option<PathBuf>,
    /// Point classes (one label per point) for GDD members.
    #[arg(long, requires = "mosaic")]
    pub classes: Option<PathBuf>,
    /// Eavesdropper channel file.
    #[arg(long)]
    pub channel: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build or verify mosaic files.
    #[command(subcommand)]
    Mosaic(MosaicCommand),
    /// Evaluate the leakage bound C for a channel.
    Bound(SourceOpts),
    /// Leakage reports for one or more message distributions.
    Leakage(LeakageArgs),
    /// Trace-distance bound on the joint message/seed/output state.
    Corollary3(SourceOpts),
    /// Error probabilities of modular and composite codes.
    Simulate(SimulateArgs),
    /// Rate accounting for seed reuse.
    Rates(RatesArgs),
    /// Run the full property suite.
    Check(CheckArgs),
}

#[derive(Subcommand, Debug)]
enum MosaicCommand {
    /// Write the finite-field mosaic of BIBDs.
    Build(FieldOpts),
    /// Classify a mosaic file.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        classes: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct LeakageArgs {
    #[command(flatten)]
    pub source: SourceOpts,
    /// uniform | point:<color> | file:<path> | random:<seed>:<count>
    #[arg(long, default_value = "uniform")]
    pub dist: String,
    /// Also run the maximizing search over distributions.
    #[arg(long)]
    pub search: bool,
    #[arg(long, default_value_t = 2000)]
    pub iterations: usize,
    /// Per-(distribution, seed, color) CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub field: FieldOpts,
    #[arg(long, conflicts_with_all = ["q", "t", "ell"])]
    pub mosaic: Option<PathBuf>,
    /// Legitimate channel file.
    #[arg(long)]
    pub channel: PathBuf,
    /// Modular codewords per seed codeword in the composite code.
    #[arg(long = "N", default_value_t = 1)]
    pub blocks: usize,
    /// Per-seed CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RatesArgs {
    #[command(flatten)]
    pub field: FieldOpts,
    /// Channel uses per modular codeword.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Modular codewords per seed; chosen from --pe and --eps-leak when absent.
    #[arg(long = "N")]
    pub blocks: Option<usize>,
    /// Public-code error probability.
    #[arg(long)]
    pub pe: Option<f64>,
    /// Per-message leakage target.
    #[arg(long)]
    pub eps_leak: Option<f64>,
    /// Channel uses of the seed codeword (default: ceil(log2 |S|)).
    #[arg(long)]
    pub mu: Option<usize>,
    /// Eavesdropper channel; adds the per-slot leakage bound and a block-size suggestion.
    #[arg(long)]
    pub channel: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Reduced counts (smoke run).
    #[arg(long)]
    pub quick: bool,
    /// Skip the repeated run behind the determinism criterion.
    #[arg(long)]
    pub single: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.global.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    if !(cli.global.tol > 0.0) {
        eprintln!("error: --tol must be positive");
        return ExitCode::from(1);
    }

    let start = Instant::now();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Mosaic(MosaicCommand::Build(f)) => commands::mosaic_build(g, f),
        Command::Mosaic(MosaicCommand::Verify { input, classes }) => {
            commands::mosaic_verify(g, input, classes.as_deref())
        }
        Command::Bound(s) => commands::bound(g, s),
        Command::Leakage(a) => commands::leakage(g, a),
        Command::Corollary3(s) => commands::corollary3(g, s),
        Command::Simulate(a) => commands::simulate(g, a),
        Command::Rates(a) => commands::rates(g, a),
        Command::Check(a) => commands::check(g, a),
    };
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::VerificationFailed(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
