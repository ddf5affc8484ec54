use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pmcert::error::{Error, Result};
use pmcert::io::{self, RealizationFile, StatsFile};
use pmcert::noise::{perturb, NoiseKind, NoiseSpec};
use pmcert::report::{self, build_report};
use pmcert::scenario::{born_table, deviation_epsilon};

#[derive(Parser)]
#[command(name = "pmcert", version, about = "Certify prepare-and-measure statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a statistics table against a target scenario.
    Certify {
        /// Catalog name or scenario file.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        stats: PathBuf,
        /// Realization file; enables the alignment section.
        #[arg(long)]
        realization: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perturb a catalog scenario and emit its statistics.
    Simulate {
        #[arg(long)]
        scenario: String,
        #[arg(long, value_parser = parse_noise)]
        noise: NoiseKind,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the simulated realization.
        #[arg(long)]
        realization_out: Option<PathBuf>,
    },
    /// Fidelity bounds over an ε grid.
    Sweep {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        eps_max: f64,
        #[arg(long, default_value_t = 61)]
        steps: usize,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute thresholds and slopes for the reference configurations.
    Table1 {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_noise(s: &str) -> std::result::Result<NoiseKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Certify { scenario, stats, realization, alpha, out } => {
            let target = io::resolve_scenario(&scenario, alpha)?;
            let table = io::read_stats(&stats)?.to_table()?;
            let real = realization.as_deref().map(io::read_realization).transpose()?;
            let r = build_report(&scenario, &target, &table, real.as_ref(), None)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            emit(&io::to_json_pretty(&r)?, out.as_ref())?;
            Ok(r.status.exit_code() as u8)
        }
        Command::Simulate { scenario, noise, delta, seed, alpha, out, realization_out } => {
            let target = pmcert::catalog::by_name(&scenario, alpha)?;
            let real = perturb(&target, NoiseSpec::new(noise, delta)?, seed)?;
            let table = born_table(&real)?;
            let eps = deviation_epsilon(&table, &target)?.value();
            if let Some(p) = realization_out {
                fs::write(p, io::to_json_pretty(&RealizationFile::from_realization(&real))?)?;
            }
            emit(&io::to_json_pretty(&StatsFile::from_table(&table, Some(eps)))?, out.as_ref())?;
            Ok(0)
        }
        Command::Sweep { scenario, eps_max, steps, alpha, format, out } => {
            let target = io::resolve_scenario(&scenario, alpha)?;
            let (rows, warning) = report::sweep_scenario(&target, eps_max, steps)?;
            if let Some(w) = warning {
                eprintln!("warning: {w}");
            }
            let text = match format {
                Format::Json => io::to_json_pretty(&rows)?,
                _ => report::sweep_csv(&rows),
            };
            emit(&text, out.as_ref())?;
            Ok(0)
        }
        Command::Table1 { alpha, format, out } => {
            let rows = report::threshold_table(alpha)?;
            let text = match format {
                Format::Json => io::to_json_pretty(&rows)?,
                Format::Csv => {
                    let mut s = String::from("label,route,epsilon0,epsilon0_reference,constant,constant_reference\n");
                    for r in &rows {
                        s.push_str(&format!(
                            "{},{:?},{},{},{},{}\n",
                            r.label, r.route, r.epsilon0, r.epsilon0_reference, r.constant, r.constant_reference
                        ));
                    }
                    s
                }
                Format::Text => report::format_threshold_table(&rows),
            };
            emit(&text, out.as_ref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
