use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use qvdp_cli::presets::{self, check_ratios, HEADLINE_QUOTES, OTHER_QUOTES};
use qvdp_cli::{load_config, run, Engine};

const EXIT_CONFIG: u8 = 1;
const EXIT_ALL_FAILED: u8 = 2;

#[derive(Parser)]
#[command(name = "qvdp", version, about = "Quantum van der Pol experiments: presets, sweeps and tomography output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file and write CSV (plus Wigner files when enabled).
    Run {
        config: PathBuf,
        /// Concurrent sweep points (default: available cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (overrides [output] dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Engine (overrides the config).
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
    },
    /// Built-in presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List preset names.
    List,
    /// Print a preset as a config document, with its dimensionless ratios.
    Show { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Exact,
    TrotterRwa,
    TrotterFull,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Exact => Engine::Exact,
            EngineArg::TrotterRwa => Engine::TrotterRwa,
            EngineArg::TrotterFull => Engine::TrotterFull,
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, workers, out, engine } => run_command(config, workers, out, engine),
        Command::Preset { action: PresetAction::List } => {
            for p in presets::PRESETS {
                println!("{:<20} {}", p.name, p.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Preset { action: PresetAction::Show { name } } => show_preset(&name),
    }
}

fn run_command(path: PathBuf, workers: Option<usize>, out: Option<PathBuf>, engine: Option<EngineArg>) -> ExitCode {
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut config = match load_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(engine) = engine {
        config = match config.with_engine(engine.into()) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        };
    }
    for w in config.warnings() {
        eprintln!("warning: {w}");
    }
    let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let dir = out.unwrap_or_else(|| PathBuf::from(&config.output.dir));

    let start = Instant::now();
    let output = match run(&config, workers) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let csv = match output.write(&dir, &config.output.csv) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: writing {}: {e}", dir.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let table = &output.table;
    eprintln!(
        "{} rows ({} failed) in {:.1} s -> {}",
        table.rows.len(),
        table.failed_rows(),
        start.elapsed().as_secs_f64(),
        csv.display()
    );
    for row in table.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("  point {}: {}", row.point, row.error.as_deref().unwrap_or_default());
    }
    if table.all_failed() {
        return ExitCode::from(EXIT_ALL_FAILED);
    }
    ExitCode::SUCCESS
}

fn show_preset(name: &str) -> ExitCode {
    let Some(preset) = presets::find(name) else {
        let names: Vec<_> = presets::names().collect();
        eprintln!("error: unknown preset `{name}`; available: {}", names.join(", "));
        return ExitCode::from(EXIT_CONFIG);
    };
    println!("# {}: {}", preset.name, preset.summary);
    let quotes: Vec<_> = HEADLINE_QUOTES.iter().chain(&OTHER_QUOTES).filter(|q| q.preset == name).copied().collect();
    for check in check_ratios(&quotes) {
        let at = check.quote.at.map(|v| format!(" at sweep value {v}")).unwrap_or_default();
        println!("# {} = {:.4}{at} (quoted {})", check.quote.ratio.label(), check.derived, check.quote.quoted);
    }
    print!("{}", preset.document);
    ExitCode::SUCCESS
}
