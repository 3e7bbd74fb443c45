use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gogbench::config::ScenarioConfig;
use gogbench::harness::{self, Overrides, Report};
use gogbench::scenarios;

#[derive(Parser)]
#[command(name = "gogbench", version, about = "Graph-of-groups distortion and rapid-decay experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Run a bundled scenario (by id) or a scenario file.
    Run {
        scenario: String,
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget_elements: Option<usize>,
        #[arg(long, default_value = "reports")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
    /// List the bundled scenarios.
    ListScenarios,
    /// Check a scenario file (or bundled id) and print diagnostics.
    Validate { config: String },
    /// Print the TOML of a bundled scenario.
    ExportConfig { scenario: String },
}

fn load(spec: &str) -> Result<ScenarioConfig, String> {
    if scenarios::ids().any(|id| id == spec) {
        return scenarios::load(spec).map_err(|e| e.to_string());
    }
    let text = fs::read_to_string(spec).map_err(|e| format!("cannot read {spec}: {e}"))?;
    ScenarioConfig::from_toml(&text).map_err(|e| e.to_string())
}

fn write_report(report: &Report, dir: &Path, format: Format) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if format != Format::Csv {
        let p = dir.join(format!("{}.json", report.scenario));
        fs::write(&p, report.to_json())?;
        written.push(p);
    }
    if format != Format::Json {
        for (name, text) in report.csv_files() {
            let p = dir.join(name);
            fs::write(&p, text)?;
            written.push(p);
        }
    }
    Ok(written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListScenarios => {
            for id in scenarios::ids() {
                let cfg = scenarios::load(id).expect("bundled scenarios parse");
                println!("{id:<22} {:>2} experiments  {}", cfg.experiments.len(), cfg.description);
            }
            ExitCode::SUCCESS
        }
        Command::ExportConfig { scenario } => match scenarios::source(&scenario) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Validate { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let diags = cfg.validate();
            if diags.is_empty() {
                println!("{}: ok", cfg.id);
                return ExitCode::SUCCESS;
            }
            for d in &diags {
                println!("{}: {:?}: {d}", cfg.id, DiagKind(d));
            }
            ExitCode::from(1)
        }
        Command::Run { scenario, radius, samples, seed, budget_elements, out_dir, format } => {
            let cfg = match load(&scenario) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let overrides = Overrides { radius, samples, seed, budget_elements };
            let report = match harness::run(cfg, &overrides) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            match write_report(&report, &out_dir, format) {
                Ok(files) => {
                    for e in &report.experiments {
                        let note = e.error.as_deref().map(|m| format!(" ({m})")).unwrap_or_default();
                        println!("[{:02}] {:<16} {:?}{note}", e.index, e.kind, e.status);
                    }
                    println!("wrote {} file(s) to {}", files.len(), out_dir.display());
                }
                Err(e) => {
                    eprintln!("error: cannot write reports: {e}");
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(report.exit_code() as u8)
        }
    }
}

/// Short diagnostic tag: the error variant name.
struct DiagKind<'a>(&'a gogbench::Error);

impl std::fmt::Debug for DiagKind<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let dbg = format!("{:?}", self.0);
        let name = dbg.split(['(', ' ', '{']).next().unwrap_or("");
        f.write_str(name)
    }
}
