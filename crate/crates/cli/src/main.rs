//! `starkcool` command-line runner.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 config error, 3 solver error,
//! 4 truncation-monitor trip.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use starkcool::experiment::{run_scenario, validate_config, ScenarioConfig, ScenarioKind};
use starkcool::Execution;

const OUTPUT_DIR_VAR: &str = "STARKCOOL_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "starkcool", version, about = "Stark-shift-gate cooling scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its result table as CSV.
    Run(RunArgs),
    /// Check a config file and print the resolved config.
    Validate {
        config: PathBuf,
    },
    /// List the named scenarios.
    ListScenarios,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["config", "scenario"]))]
struct RunArgs {
    /// Config file.
    config: Option<PathBuf>,
    /// Run a scenario with its default settings instead of a config file.
    #[arg(long)]
    scenario: Option<String>,
    /// Output CSV path (`-` for stdout). Relative paths are resolved
    /// against $STARKCOOL_OUTPUT_DIR when it is set.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (1 runs everything on the calling thread).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
}

enum Failure {
    Io(String),
    Config(Vec<String>),
    Solver(String),
    Truncation(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        let (code, lines) = match self {
            Failure::Io(m) => (1, vec![m]),
            Failure::Config(ms) => (2, ms),
            Failure::Solver(m) => (3, vec![m]),
            Failure::Truncation(m) => (4, vec![m]),
        };
        for l in lines {
            eprintln!("error: {l}");
        }
        ExitCode::from(code)
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    validate_config(&text).map_err(|errs| Failure::Config(errs.iter().map(|e| e.to_string()).collect()))
}

fn output_path(args: &RunArgs, cfg: &ScenarioConfig) -> PathBuf {
    let path = args
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.kind)));
    match std::env::var_os(OUTPUT_DIR_VAR) {
        Some(dir) if path.is_relative() && path != Path::new("-") => Path::new(&dir).join(path),
        _ => path,
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut cfg = match (&args.config, &args.scenario) {
        (Some(path), _) => load(path)?,
        (None, Some(name)) => {
            let kind: ScenarioKind = name.parse().map_err(|e: String| Failure::Config(vec![e]))?;
            if kind == ScenarioKind::Custom {
                return Err(Failure::Config(vec![
                    "the custom scenario needs a config file with its parameters".into(),
                ]));
            }
            ScenarioConfig::defaults(kind)
        }
        (None, None) => unreachable!("clap requires a config or a scenario"),
    };
    if let Some(seed) = args.seed {
        cfg.solver.master_seed = seed;
    }
    let exec = match args.threads {
        Some(1) => Execution::Sequential,
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n as usize)
                .build_global()
                .map_err(|e| Failure::Io(format!("thread pool: {e}")))?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let path = output_path(&args, &cfg);

    let table = run_scenario(&cfg, exec).map_err(|e| {
        if e.is_truncation() {
            Failure::Truncation(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    })?;

    let io_err = |e: io::Error| Failure::Io(format!("writing {}: {e}", path.display()));
    if path == Path::new("-") {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        table.write_csv(&mut lock).map_err(io_err)?;
        lock.flush().map_err(io_err)?;
    } else {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err)?;
        }
        let file = fs::File::create(&path).map_err(io_err)?;
        let mut w = io::BufWriter::new(file);
        table.write_csv(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
        eprintln!("{}: {} rows -> {}", cfg.kind, table.rows.len(), path.display());
    }
    Ok(())
}

fn validate(path: &Path) -> Result<(), Failure> {
    let cfg = load(path)?;
    println!("# {} is valid", path.display());
    print!("{}", cfg.to_ini());
    Ok(())
}

fn list_scenarios() {
    for kind in ScenarioKind::ALL {
        println!("{:<14} {}", kind.name(), kind.description());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Validate { config } => validate(&config),
        Command::ListScenarios => {
            list_scenarios();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
