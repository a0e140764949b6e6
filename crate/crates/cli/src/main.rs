use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use eitmem_cli::config::{Format, ScenarioConfig};
use eitmem_cli::error::HarnessError;
use eitmem_cli::report;
use eitmem_cli::reproduce::reproduce_paper;
use eitmem_cli::scenario::{self, OperatingPoint, Scenario};

/// Cavity-enhanced EIT quantum memory simulator.
///
/// Exit status: 0 success, 1 invalid input, 2 numerical failure,
/// 3 reproduction check failed.
#[derive(Debug, Parser)]
#[command(name = "eitmem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format. Defaults to `[output] format`, else csv (summary for
    /// reproduce-paper).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Worker threads for sweeps (default: one per core).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one write–hold–read cycle.
    Simulate {
        /// Also write the input and output fields on the time grid as CSV.
        #[arg(long, value_name = "PATH")]
        waveform: Option<PathBuf>,
    },
    /// Sweep the mean photon number of the coherent alphabet.
    SweepN,
    /// Sweep the storage time.
    SweepT0,
    /// Compare the best rising exponential with the time-reversal optimum.
    OptimizeMode {
        /// Also write the time-reversal iterations as CSV.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Fit the effective parameters to the measured observables.
    Calibrate,
    /// Calibrate and check the published headline values.
    ReproducePaper,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Summary,
}

/// What a command produced: the text to emit and whether every check passed.
struct Outcome {
    text: String,
    passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, passed: true }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, HarnessError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(HarnessError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| HarnessError::Config("--config <PATH> is required".into()))?;
    let config = ScenarioConfig::load(path)?;
    let default_format = match cli.command {
        Command::ReproducePaper => Format::Summary,
        _ => Format::Csv,
    };
    let format = match cli.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Summary) => Format::Summary,
        None => config.output.format.unwrap_or(default_format),
    };

    let outcome = execute(&cli.command, &config, format)?;
    match cli.out.as_ref().or(config.output.path.as_ref()) {
        Some(out) => std::fs::write(out, &outcome.text)?,
        None => print!("{}", outcome.text),
    }
    Ok(outcome.passed)
}

fn execute(command: &Command, config: &ScenarioConfig, format: Format) -> Result<Outcome, HarnessError> {
    match command {
        Command::Simulate { waveform } => {
            let scenario = Scenario::from_config(config)?;
            let report = scenario::run_scenario(&scenario)?;
            if let Some(path) = waveform {
                write_waveform(path, &report.point)?;
            }
            Ok(Outcome::ok(match format {
                Format::Csv => report::csv(&[report.row]),
                Format::Summary => report::scenario_summary(&report),
            }))
        }
        Command::SweepN => {
            let values = config
                .sweep
                .mean_photon
                .as_ref()
                .ok_or_else(|| HarnessError::Config("missing [sweep.mean_photon]".into()))?
                .resolve("mean_photon")?;
            let scenario = Scenario::from_config(config)?;
            let rows = scenario::sweep_mean_photon(&scenario, &values)?;
            Ok(Outcome::ok(match format {
                Format::Csv => report::csv(&rows),
                Format::Summary => report::table("mean photon sweep", "mean_photon", &rows),
            }))
        }
        Command::SweepT0 => {
            let values = config
                .sweep
                .storage_time
                .as_ref()
                .ok_or_else(|| HarnessError::Config("missing [sweep.storage_time]".into()))?
                .resolve("storage_time")?;
            let scenario = Scenario::from_config(config)?;
            let rows = scenario::sweep_storage_time(&scenario, &values)?;
            Ok(Outcome::ok(match format {
                Format::Csv => report::csv(&rows),
                Format::Summary => report::table("storage time sweep", "storage_time_s", &rows),
            }))
        }
        Command::OptimizeMode { trace } => {
            let scenario = Scenario::from_config(config)?;
            let report = scenario::optimize_mode(&scenario)?;
            if let Some(path) = trace {
                write_trace(path, &report.trace)?;
            }
            Ok(Outcome::ok(match format {
                Format::Csv => report::csv(&[report.row]),
                Format::Summary => report::optimize_summary(&report),
            }))
        }
        Command::Calibrate => {
            let cal = config.calibration()?;
            if config.params.is_some() || config.cavity.is_some() {
                return Err(HarnessError::Config(
                    "calibration fits its own parameters; remove [params] / [cavity]".into(),
                ));
            }
            let scenario = Scenario::from_config(config)?.with_storage_time(cal.reference_storage_time.0)?;
            let report = scenario::run_scenario(&scenario)?;
            let outcome = scenario.calibration.as_ref().expect("parameters come from calibration");
            Ok(Outcome::ok(match format {
                Format::Csv => report::csv(&[report.row]),
                Format::Summary => report::calibration_summary(outcome, &report.row),
            }))
        }
        Command::ReproducePaper => {
            let rep = reproduce_paper(config)?;
            let text = match format {
                Format::Csv => report::csv(&rep.exceedance_rows),
                Format::Summary => report::reproduction_summary(&rep),
            };
            if format == Format::Csv {
                for check in rep.checks.iter().filter(|c| !c.pass) {
                    eprintln!("FAIL {}", check.name);
                }
            }
            Ok(Outcome {
                text,
                passed: rep.all_pass(),
            })
        }
    }
}

fn write_waveform(path: &Path, point: &OperatingPoint) -> Result<(), HarnessError> {
    let grid = point.record.grid();
    let output = point.record.output();
    let mut text = String::from("time_s,input_re,input_im,output_re,output_im\n");
    for (i, out) in output.iter().enumerate() {
        let u = point.input.at(i);
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            report::num(grid.time(i)),
            report::num(u.re),
            report::num(u.im),
            report::num(out.re),
            report::num(out.im)
        );
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_trace(path: &Path, trace: &eitmem_core::OptimizationTrace) -> Result<(), HarnessError> {
    let mut text = String::from("iteration,input_norm,eta_sim,overlap_with_next\n");
    for (k, r) in trace.iterations.iter().enumerate() {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            k + 1,
            report::num(r.input_norm),
            report::num(r.efficiency),
            report::num(r.overlap_with_next)
        );
    }
    std::fs::write(path, text)?;
    Ok(())
}
