mod artifact;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, ranges or config: exit code 2.
    Usage(String),
    /// A check ran and failed: exit code 1.
    Failed(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failed(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fedosov", version, about = "Fedosov star products in the time-of-arrival chart and Wigner functions of the free particle")]
struct Cli {
    /// Line-based `key = value` run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Chart integrity checks.
    Chart {
        #[command(subcommand)]
        action: ChartAction,
    },
    /// Print the connection coefficients of the time-of-arrival chart.
    Connection,
    /// Fedosov-derived star operators.
    Fedosov {
        #[command(subcommand)]
        action: FedosovAction,
    },
    /// Star product of two observables.
    Star(StarArgs),
    /// Wigner function grids.
    Wigner {
        #[command(subcommand)]
        action: WignerAction,
    },
    /// Position marginal of an energy and angular momentum eigenfunction.
    Marginal(MarginalArgs),
    /// Weak-form expansion of a momentum eigenstate over cross functions.
    Expand(ExpandArgs),
    /// Run verification checks and write a JSON report.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum ChartAction {
    Check {
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
}

#[derive(Subcommand, Debug)]
enum FedosovAction {
    /// Left (or right) star multiplication by an observable as a differential operator.
    Derive {
        #[arg(long)]
        obs: String,
        #[arg(long = "hbar-order", default_value_t = 2)]
        hbar_order: u32,
        #[arg(long, default_value = "left")]
        side: String,
        #[arg(long, default_value = "action-angle")]
        chart: String,
    },
}

#[derive(Args, Debug)]
struct StarArgs {
    #[arg(long)]
    f: String,
    #[arg(long)]
    g: String,
    #[arg(long, default_value = "cartesian")]
    chart: String,
    #[arg(long = "hbar-order", default_value_t = 4)]
    hbar_order: u32,
}

#[derive(Subcommand, Debug)]
enum WignerAction {
    /// Cross-Wigner values on an (H, L) grid at fixed T and chi.
    Grid(GridArgs),
    /// W_Em on an (r, p) grid in polar variables.
    Polar(PolarArgs),
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long = "E")]
    e: f64,
    #[arg(long, allow_hyphen_values = true)]
    m: f64,
    #[arg(long, allow_hyphen_values = true)]
    mprime: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    /// Phase offset D added inside the cosine.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    offset: f64,
    #[arg(long = "H-range", value_parser = parse_range, allow_hyphen_values = true)]
    h_range: (f64, f64),
    #[arg(long = "L-range", value_parser = parse_range, allow_hyphen_values = true)]
    l_range: (f64, f64),
    #[arg(long = "nH")]
    n_h: usize,
    #[arg(long = "nL")]
    n_l: usize,
    #[arg(long = "T", default_value_t = 0.0, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    chi: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PolarArgs {
    #[arg(long = "E")]
    e: f64,
    #[arg(long, allow_hyphen_values = true)]
    m: f64,
    #[arg(long = "r-range", value_parser = parse_range)]
    r_range: (f64, f64),
    #[arg(long = "p-range", value_parser = parse_range)]
    p_range: (f64, f64),
    #[arg(long = "nr")]
    n_r: usize,
    #[arg(long = "np")]
    n_p: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    chi: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MarginalArgs {
    #[arg(long = "E")]
    e: f64,
    #[arg(long, allow_hyphen_values = true)]
    m: f64,
    #[arg(long = "r-max")]
    r_max: f64,
    #[arg(long, default_value_t = 2000)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExpandArgs {
    #[arg(long = "E", default_value_t = 1.0)]
    e: f64,
    #[arg(long, default_value_t = 0.7, allow_hyphen_values = true)]
    chi0: f64,
    #[arg(long, default_value_t = -std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 40)]
    mmax: u32,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Checks to run; all of them when empty.
    suites: Vec<String>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Overrides the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Write zero for every runtime so reports compare byte for byte.
    #[arg(long = "omit-timing")]
    omit_timing: bool,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .or_else(|| s.split_once(','))
        .ok_or_else(|| format!("expected `lo:hi`, got `{s}`"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(format!("range `{s}` must be finite with lo <= hi"));
    }
    Ok((lo, hi))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let invocation = argv.join(" ");
    match cli.command {
        Command::Chart { action: ChartAction::Check { points } } => commands::chart_check(&cfg, points),
        Command::Connection => commands::connection(),
        Command::Fedosov { action: FedosovAction::Derive { obs, hbar_order, side, chart } } => {
            commands::fedosov_derive(&obs, hbar_order, &side, &chart)
        }
        Command::Star(a) => commands::star(&a.f, &a.g, &a.chart, a.hbar_order),
        Command::Wigner { action: WignerAction::Grid(a) } => commands::wigner_grid(&cfg, &invocation, &a),
        Command::Wigner { action: WignerAction::Polar(a) } => commands::wigner_polar(&cfg, &invocation, &a),
        Command::Marginal(a) => commands::marginal(&cfg, &invocation, &a),
        Command::Expand(a) => commands::expand(&cfg, &a),
        Command::Verify(a) => commands::verify(&cfg, &a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.05:0.95"), Ok((0.05, 0.95)));
        assert_eq!(parse_range("-10,10"), Ok((-10.0, 10.0)));
        assert!(parse_range("3:1").is_err());
        assert!(parse_range("1").is_err());
        assert!(parse_range("a:1").is_err());
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "fedosov", "wigner", "grid", "--E", "1", "--m", "-2", "--H-range", "0.05:0.95", "--L-range", "-10:10", "--nH", "3",
            "--nL", "4", "--out", "w.csv",
        ])
        .unwrap();
        let Command::Wigner { action: WignerAction::Grid(g) } = cli.command else { panic!("wrong subcommand") };
        assert_eq!((g.m, g.l_range, g.n_l), (-2.0, (-10.0, 10.0), 4));
        assert!(Cli::try_parse_from(["fedosov", "marginal", "--E", "1", "--bogus"]).is_err());
    }
}
