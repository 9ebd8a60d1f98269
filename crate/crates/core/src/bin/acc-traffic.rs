use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acc_traffic::cli::{self, load_scenario, ControlMode, Scenario};
use acc_traffic::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "acc-traffic",
    version,
    about = "Mixed ACC/manual freeway traffic with time-gap feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the scenario and export trajectories.
    Simulate(Common),
    /// Spectral, Lyapunov, envelope and convective certificates.
    Analyze(Common),
    /// Fuel, comfort and travel-time indices.
    Metrics(Common),
    /// Open vs closed loop with percentage improvements.
    Compare(Common),
    /// Full pipeline: both modes, all plot data, metrics and certificates.
    ReproducePaper(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file; the nominal scenario when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Keep every n-th time sample in exported CSVs.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Feedback gain k [1/s].
    #[arg(long)]
    gain: Option<f64>,
    /// Run the invariant suite before the command.
    #[arg(long)]
    seed_check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Open,
    Closed,
}

const EXIT_CERTIFICATE: u8 = 4;

fn scenario(c: &Common) -> Result<Scenario> {
    let base = match &c.scenario {
        Some(path) => load_scenario(path)?,
        None => Scenario::nominal(),
    };
    let mode = c.mode.map(|m| match m {
        ModeArg::Open => ControlMode::Open,
        ModeArg::Closed => ControlMode::Closed,
    });
    let mut s = base.with_overrides(mode, c.gain)?;
    if let Some(stride) = c.stride {
        s.output.stride = stride.max(1);
    }
    Ok(s)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn report_certificates(certs: &[cli::Certificate]) -> bool {
    for c in certs {
        eprintln!(
            "{:<30} {}  {}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    certs.iter().all(|c| c.passed)
}

fn execute(cmd: &Command) -> Result<bool> {
    let common = match cmd {
        Command::Simulate(c)
        | Command::Analyze(c)
        | Command::Metrics(c)
        | Command::Compare(c)
        | Command::ReproducePaper(c) => c,
    };
    let s = scenario(common)?;
    let out: &Path = &common.out;
    let mut ok = true;
    if common.seed_check {
        let inv = cli::seed_check(&s)?;
        ok &= report_certificates(&inv.checks);
    }
    match cmd {
        Command::Simulate(_) => print_json(&cli::run(&s, out)?)?,
        Command::Metrics(_) => print_json(&cli::metrics(&s, out)?.0)?,
        Command::Compare(_) => print_json(&cli::compare(&s, out)?.0)?,
        Command::Analyze(_) => {
            let (report, artifacts) = cli::analyze(&s, out)?;
            ok &= report_certificates(&report.certificates);
            print_json(&artifacts)?;
        }
        Command::ReproducePaper(_) => {
            let (summary, artifacts) = cli::reproduce(&s, out)?;
            ok &= report_certificates(&summary.certificates);
            print_json(&artifacts)?;
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CERTIFICATE),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
