use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use indefinite::config::RunConfig;
use indefinite::report::{error_json, run, Command};
use indefinite::Result;

#[derive(Parser)]
#[command(name = "indefinite", version, about = "Positive solutions of indefinite second-order ODEs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset: fig1, fig2, cor53, cor51, annulus.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    /// JSON report path (standard output otherwise).
    #[arg(long)]
    json: Option<String>,
    /// Directory for CSV files.
    #[arg(long)]
    csv_dir: Option<String>,
    /// Supplied R* (skips the estimate in `bounds`).
    #[arg(long)]
    r_star: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Threshold constants as JSON.
    Bounds(#[command(flatten)] Common),
    /// Positive kT-periodic solutions.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Positive Neumann solutions.
    Neumann(#[command(flatten)] Common),
    /// A coded subharmonic, or one per class with --enumerate.
    Subharmonic {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, conflicts_with = "enumerate")]
        word: Option<String>,
        #[arg(long)]
        enumerate: bool,
    },
    /// Number of n-ary Lyndon words of length k.
    Lyndon {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        list: bool,
    },
    /// First Dirichlet eigenvalue of each positivity hump.
    Eigen(#[command(flatten)] Common),
    /// Radial Neumann profiles on an annulus.
    Radial(#[command(flatten)] Common),
    /// Bounds, eigenvalues and solutions together.
    Report(#[command(flatten)] Common),
}

fn load(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if c.preset.is_some() {
        cfg.preset = c.preset.clone();
    }
    cfg.problem.mu = c.mu.or(cfg.problem.mu);
    cfg.search.r_star = c.r_star.or(cfg.search.r_star);
    cfg.output.json = c.json.clone().or(cfg.output.json);
    cfg.output.csv_dir = c.csv_dir.clone().or(cfg.output.csv_dir);
    cfg.with_preset()
}

fn dispatch(cli: Cli) -> Result<serde_json::Value> {
    let (cmd, cfg) = match cli.cmd {
        Cmd::Lyndon { n, k, list } => (Command::Lyndon { n, k, list }, RunConfig::default()),
        Cmd::Bounds(c) => (Command::Bounds, load(&c)?),
        Cmd::Neumann(c) => (Command::Neumann, load(&c)?),
        Cmd::Eigen(c) => (Command::Eigen, load(&c)?),
        Cmd::Radial(c) => (Command::Radial, load(&c)?),
        Cmd::Report(c) => (Command::Report, load(&c)?),
        Cmd::Solve { common, k } => {
            let mut cfg = load(&common)?;
            cfg.problem.k = k.or(cfg.problem.k);
            (Command::Solve, cfg)
        }
        Cmd::Subharmonic { common, k, word, enumerate } => {
            let mut cfg = load(&common)?;
            cfg.problem.k = k.or(cfg.problem.k);
            if word.is_some() {
                cfg.subharmonic.word = word;
                cfg.subharmonic.enumerate = Some(false);
            }
            if enumerate {
                cfg.subharmonic.enumerate = Some(true);
            }
            (Command::Subharmonic, cfg)
        }
    };
    let to_stdout = cfg.output.json.is_none();
    let out = run(&cmd, &cfg)?;
    Ok(if to_stdout { out.json } else { serde_json::json!({ "written": out.files }) })
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
