use std::path::PathBuf;
use std::process::ExitCode;

use chiral_cli::config::{parse_config, Engine};
use chiral_cli::output::{error_json, OUT_DIR_ENV};
use chiral_cli::{preset, run, CliError, Command, PRESETS};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chiral", version, about = "Transient entanglement of driven emitters on a chiral channel")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Time evolution with the chosen engine.
    Simulate(RunArgs),
    /// Drive-amplitude (markov) or distance (TCL) surface.
    Sweep(RunArgs),
    /// Disorder ensembles and beta-factor scans.
    Disorder(RunArgs),
    /// Lattice-integral, kernel and generator-term tables.
    Kernels(RunArgs),
    /// Grid-refinement search for the first-peak optimum.
    Optimize(RunArgs),
    /// List the bundled presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Engine override: markov, tcl2, redfield, secular or mps.
    engine: Option<String>,
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps and ensembles.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (default: $CHIRAL_OUT_DIR or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// MPS bond dimension (replaces any d_max scan).
    #[arg(long)]
    dmax: Option<usize>,
}

fn execute(command: Command, args: RunArgs) -> Result<serde_json::Value, CliError> {
    let text = match (&args.config, &args.preset) {
        (Some(p), _) => std::fs::read_to_string(p)?,
        (None, Some(name)) => preset(name)
            .ok_or_else(|| CliError::Usage(format!("unknown preset `{name}` (see `chiral presets`)")))?
            .to_string(),
        (None, None) => return Err(CliError::Usage("one of --config or --preset is required".into())),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(e) = &args.engine {
        cfg.engine = Engine::parse(e).ok_or_else(|| CliError::Usage(format!("unknown engine `{e}`")))?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
        if let Some(d) = cfg.disorder.as_mut() {
            d.seed = s;
        }
    }
    if let Some(d) = args.dmax {
        let mut m = cfg.mps_section();
        m.d_max = d;
        m.d_max_scan.clear();
        cfg.mps = Some(m);
    }
    let v = cfg.violations();
    if !v.is_empty() {
        return Err(chiral_cli::ConfigError { violations: v }.into());
    }
    let out = args
        .out
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    match args.jobs {
        Some(n) => chiral_core::par::with_jobs(n, || run(command, &cfg, &out)),
        None => run(command, &cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Disorder(a) => (Command::Disorder, a),
        Cmd::Kernels(a) => (Command::Kernels, a),
        Cmd::Optimize(a) => (Command::Optimize, a),
        Cmd::Presets => {
            for (name, text) in PRESETS {
                let title = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
                println!("{name:16} {title}");
            }
            return ExitCode::SUCCESS;
        }
    };
    match execute(command, args) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let violations = match &e {
                CliError::Config(c) => c.violations.clone(),
                _ => Vec::new(),
            };
            eprintln!("{}", error_json(e.kind(), e.to_string(), &violations));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
