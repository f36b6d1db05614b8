use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::config::{load_config, ExperimentConfig};
use super::experiment::{run_experiment, ValidationReport};
use super::figures::FIGURES;
use super::output::{emit_csv, emit_plot_script};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "milburn", version, about = "Intrinsic decoherence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory.
    #[arg(long, global = true, default_value = "./out")]
    out: PathBuf,

    /// Max allowed deviation between methods.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tolerance: f64,

    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a config and write CSV, plot script and report.
    Run { config: PathBuf },
    /// Run a config and print the method comparison report.
    Validate { config: PathBuf },
    /// Regenerate the four figure datasets.
    Figures,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_outputs(
    dir: &Path,
    stem: &str,
    title: &str,
    config: &ExperimentConfig,
    tolerance: f64,
) -> Result<ValidationReport> {
    let (cases, report) = run_experiment(config, tolerance)?;
    let csv_name = format!("{stem}.csv");
    emit_csv(&cases, &dir.join(&csv_name))?;
    emit_plot_script(
        &cases,
        &report,
        &csv_name,
        title,
        &dir.join(format!("{stem}.gp")),
    )?;
    Ok(report)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn execute(cli: &Cli) -> Result<bool> {
    if !(cli.tolerance.is_finite() && cli.tolerance > 0.0) {
        return Err(Error::validation("--tolerance", "must be finite and > 0"));
    }
    let (text, passed) = match &cli.command {
        Command::Validate { config } => {
            let config = load_config(config)?;
            let report = run_experiment(&config, cli.tolerance)?.1;
            (report.render(), report.passed())
        }
        Command::Run { config: path } => {
            let config = load_config(path)?;
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .filter(|s| !s.is_empty())
                .unwrap_or("run");
            create_dir(&cli.out)?;
            let report = write_outputs(&cli.out, stem, stem, &config, cli.tolerance)?;
            let text = report.render();
            write_text(&cli.out.join(format!("{stem}_report.txt")), &text)?;
            (text, report.passed())
        }
        Command::Figures => {
            create_dir(&cli.out)?;
            let mut text = String::new();
            let mut passed = true;
            for fig in &FIGURES {
                let config = fig.load()?;
                let report = write_outputs(&cli.out, fig.name, fig.title, &config, cli.tolerance)
                    .map_err(|e| e.in_case(fig.name))?;
                passed &= report.passed();
                text += &format!("# {}: {}\n", fig.name, fig.title);
                text += &report.render();
            }
            text += &format!("FIGURES {}\n", if passed { "PASS" } else { "FAIL" });
            write_text(&cli.out.join("figures_report.txt"), &text)?;
            (text, passed)
        }
    };
    if !cli.quiet {
        print!("{text}");
    }
    Ok(passed)
}

/// Entry point; returns the process exit code.
///
/// 0 on success, 1 when a method comparison or truncation check fails, 2 on
/// usage, config or I/O errors.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VALIDATION,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
