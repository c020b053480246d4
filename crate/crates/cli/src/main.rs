//! `maxpsh`: run laboratory experiments from TOML configs.

mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maxpsh::catalog::list_catalog;
use maxpsh::CONVENTION_BANNER;

use config::ExperimentConfig;
use error::Failure;

#[derive(Parser)]
#[command(name = "maxpsh", about = "Monge-Ampere experiments on plurisubharmonic functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory for report.json and CSV files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List catalog functions, schemes and weight families.
    List,
    /// Print the version and the normalization banner.
    Version,
}

fn run(config_path: &PathBuf, out: &PathBuf, seed: Option<u64>, json: bool) -> Result<(), Failure> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", config_path.display())))?;
    let cfg = ExperimentConfig::parse(&text)?;
    let seed = seed.unwrap_or(cfg.seed);
    let (nodes, bytes) = cfg.footprint();
    let ceiling = cfg.memory_ceiling_gib * (1u64 << 30) as f64;
    if nodes > 0 {
        eprintln!("grid: {nodes} nodes, about {:.1} MiB", bytes as f64 / (1u64 << 20) as f64);
    }
    if bytes as f64 > ceiling {
        return Err(Failure::resource(format!(
            "{nodes} grid nodes need about {:.2} GiB, above the ceiling of {} GiB (set memory_ceiling_gib to override)",
            bytes as f64 / (1u64 << 30) as f64,
            cfg.memory_ceiling_gib
        )));
    }
    let artifacts = run::execute(&cfg.plan, seed)?;
    let hash = output::config_hash(text.as_bytes());
    let report = output::report(cfg.kind.name(), &hash, seed, &artifacts.result);
    output::write_all(out, &hash, &report, &artifacts)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("{}", output::table(cfg.kind.name(), &hash, &artifacts.summary));
    }
    Ok(())
}

fn list(json: bool) {
    let listing = list_catalog();
    if json {
        println!("{}", serde_json::to_string_pretty(&listing).expect("listing serializes"));
        return;
    }
    println!("specs:");
    for e in &listing.specs {
        println!("  {:<16} C^{}  {}\n  {:<16}      {}", e.name, e.n, e.expression, "", e.role);
    }
    println!("schemes:");
    for e in &listing.schemes {
        println!("  {:<16} {}\n  {:<16} {}", e.name, e.syntax, "", e.role);
    }
    println!("chi:");
    for e in &listing.chi {
        println!("  {:<16} {}\n  {:<16} {}", e.name, e.syntax, "", e.role);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(error::EXIT_CONFIG);
        }
    }
    match &cli.command {
        Command::Run { config, out, seed } => match run(config, out, *seed, cli.json) {
            Ok(()) => ExitCode::SUCCESS,
            Err(f) => {
                eprintln!("error: {f}");
                ExitCode::from(f.code)
            }
        },
        Command::List => {
            list(cli.json);
            ExitCode::SUCCESS
        }
        Command::Version => {
            let v = env!("CARGO_PKG_VERSION");
            if cli.json {
                println!("{}", serde_json::json!({ "version": v, "convention": CONVENTION_BANNER }));
            } else {
                println!("maxpsh {v}\n{CONVENTION_BANNER}");
            }
            ExitCode::SUCCESS
        }
    }
}
