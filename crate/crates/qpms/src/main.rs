use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qpms::commands::{self, Output};
use qpms::{io, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "qpms", version, about = "Detection-chain simulator for a mode-sorting photon-counting LIDAR")]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, written atomically; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Weight the GDD compensation term by the round-trip length.
    #[arg(long, global = true)]
    gdd_doubled: Option<Switch>,
    /// Scale the noise-state thermal occupation by (1 − η_c).
    #[arg(long, global = true)]
    thermal_eta_scaling: Option<Switch>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// |c_kj|² table, uncompensated and compensated.
    OverlapMatrix,
    /// Spatial mode-mismatch coefficient and link efficiencies.
    Smm,
    /// Solar background photon numbers.
    Background,
    /// Minimum signal strength for the target SSMD at one reflector radius.
    MinSignal,
    /// Strength ratio over the configured radius and δα_c grid.
    Sweep,
    /// Schmidt decomposition of a sampled conversion kernel.
    Decompose,
    /// Acceptance suite.
    Selfcheck,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.gdd_doubled {
        cfg.gdd_doubled = matches!(s, Switch::On);
    }
    if let Some(s) = cli.thermal_eta_scaling {
        cfg.thermal_eta_scaling = matches!(s, Switch::On);
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    let Output { bytes, failure } = match cli.command {
        Command::OverlapMatrix => commands::overlap_matrix(&cfg)?,
        Command::Smm => commands::smm(&cfg)?,
        Command::Background => commands::background(&cfg)?,
        Command::MinSignal => commands::min_signal(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::Decompose => commands::decompose(&cfg)?,
        Command::Selfcheck => commands::selfcheck(&cfg)?,
    };
    io::emit(cli.out.as_deref(), &bytes)?;
    failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qpms: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
