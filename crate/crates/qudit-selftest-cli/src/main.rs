//! Command-line front end: every verification as a subcommand with
//! machine-readable output.
//!
//! Exit codes are a stable contract: 0 all checks pass, 1 usage or
//! configuration error, 2 a mathematical check failed.

use clap::{Args, Parser, Subcommand};
use qudit_selftest::lhv::LhvMethod;
use qudit_selftest::nu::NuSpec;
use qudit_selftest::report::{fmt_f64, sweep_csv};
use qudit_selftest::runner;
use qudit_selftest::strategy::{NoiseKind, Strategy};
use qudit_selftest::zmod::{Poly, PrimeDim};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_MATH: u8 = 2;

#[derive(Parser)]
#[command(
    name = "qudit-selftest",
    about = "Verification toolkit for the d-input/d-outcome Heisenberg-Weyl Bell self-test",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Qudit dimension; must be an odd prime >= 3.
    #[arg(long)]
    d: u64,
    /// Phase data: "canonical" or a path to a JSON array of cubic
    /// coefficients over Z_d (low degree first), e.g. [0,1,22,4].
    #[arg(long, default_value = "canonical")]
    nu: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance for exact operator identities.
    #[arg(long, default_value_t = 1e-9)]
    tol_identity: f64,
    /// Tolerance for eigenvalue checks.
    #[arg(long, default_value_t = 1e-7)]
    tol_eig: f64,
}

#[derive(Subcommand)]
enum Command {
    /// SOPO residuals, coefficient-matrix unitarity, the folding identity,
    /// the diagonal-projection check and the B_full split cross-check.
    Identities {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classical (LHV) bound certificates plus the Tsirelson eigenvalue.
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
        /// exhaustive | best-response-exhaustive | sampled
        #[arg(long, default_value = "best-response-exhaustive")]
        method: String,
        /// Seeds (comma separated) for the sampled method.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Starts per seed for the sampled method.
        #[arg(long, default_value_t = 64)]
        starts: u64,
        /// json | csv
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Robustness rows: perturb, residuals, qutrit elements (d = 3),
    /// extraction, bound flags.
    Selftest {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seeds: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "0.001")]
        magnitudes: Vec<f64>,
        /// state | conjugation | both
        #[arg(long, default_value = "both")]
        noise: String,
        /// Start from this strategy JSON instead of the ideal one.
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
    /// CSV tabulation of delta(eps) against the empirical extraction
    /// distance across seeds and magnitudes.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "0.0001,0.001,0.01")]
        magnitudes: Vec<f64>,
        #[arg(long, default_value = "both")]
        noise: String,
    },
}

struct ConfigError(String);

fn parse_common(common: &CommonArgs) -> Result<(PrimeDim, NuSpec), ConfigError> {
    if common.tol_identity <= 0.0 || common.tol_eig <= 0.0 {
        return Err(ConfigError("tolerances must be positive".into()));
    }
    let d = PrimeDim::new(common.d).map_err(|e| ConfigError(e.to_string()))?;
    let nu = parse_nu(&common.nu, d)?;
    Ok((d, nu))
}

fn parse_nu(spec: &str, d: PrimeDim) -> Result<NuSpec, ConfigError> {
    if spec == "canonical" || (d.get() == 3 && spec == "qutrit-default") {
        return Ok(NuSpec::canonical(d));
    }
    let text = fs::read_to_string(spec)
        .map_err(|e| ConfigError(format!("cannot read nu file {spec}: {e}")))?;
    let coeffs: Vec<i64> = serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("nu file {spec} is not a JSON integer array: {e}")))?;
    NuSpec::cubic(Poly::new(d, &coeffs)).map_err(|e| ConfigError(e.to_string()))
}

fn parse_noise(s: &str) -> Result<NoiseKind, ConfigError> {
    match s {
        "state" | "state_perturbation" => Ok(NoiseKind::StatePerturbation),
        "conjugation" | "observable_conjugation" => Ok(NoiseKind::ObservableConjugation),
        "both" => Ok(NoiseKind::Both),
        other => Err(ConfigError(format!(
            "unknown noise kind '{other}' (expected state | conjugation | both)"
        ))),
    }
}

fn parse_method(s: &str, starts: u64) -> Result<LhvMethod, ConfigError> {
    match s {
        "exhaustive" => Ok(LhvMethod::Exhaustive),
        "best-response-exhaustive" | "best_response_exhaustive" => {
            Ok(LhvMethod::BestResponseExhaustive)
        }
        "sampled" => Ok(LhvMethod::Sampled { starts }),
        other => Err(ConfigError(format!(
            "unknown method '{other}' (expected exhaustive | best-response-exhaustive | sampled)"
        ))),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), ConfigError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display()))),
        None => {
            if content.ends_with('\n') {
                print!("{content}");
            } else {
                println!("{content}");
            }
            Ok(())
        }
    }
}

fn json_of<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn run(cli: Cli, threads: Option<usize>) -> Result<u8, ConfigError> {
    match cli.command {
        Command::Identities { common } => {
            let (d, nu) = parse_common(&common)?;
            let mut rep = runner::run_identities(d, &nu, common.tol_identity);
            rep.config.threads = threads;
            emit(&common.out, &json_of(&rep))?;
            Ok(if rep.pass { EXIT_OK } else { EXIT_MATH })
        }
        Command::Bounds { common, method, seeds, starts, format } => {
            let (d, nu) = parse_common(&common)?;
            let method = parse_method(&method, starts)?;
            let mut rep = runner::run_bounds(d, &nu, method, &seeds, common.tol_eig)
                .map_err(|e| ConfigError(e.to_string()))?;
            rep.config.threads = threads;
            let content = match format.as_str() {
                "json" => json_of(&rep),
                "csv" => {
                    let mut s = String::from(qudit_selftest::lhv::LhvCertificate::csv_header());
                    s.push('\n');
                    for c in &rep.certificates {
                        s.push_str(&c.csv_row());
                        s.push('\n');
                    }
                    s.push_str(&format!(
                        "# max_eigenvalue,{}\n",
                        fmt_f64(rep.max_eigenvalue)
                    ));
                    s
                }
                other => return Err(ConfigError(format!("unknown format '{other}'"))),
            };
            emit(&common.out, &content)?;
            Ok(if rep.pass { EXIT_OK } else { EXIT_MATH })
        }
        Command::Selftest { common, seeds, magnitudes, noise, strategy } => {
            let (d, nu) = parse_common(&common)?;
            let kind = parse_noise(&noise)?;
            let base = match strategy {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| {
                        ConfigError(format!("cannot read strategy {}: {e}", path.display()))
                    })?;
                    let s = Strategy::from_json(&text)
                        .map_err(|e| ConfigError(format!("invalid strategy file: {e}")))?;
                    if s.d != d {
                        return Err(ConfigError(format!(
                            "strategy dimension {} does not match --d {}",
                            s.d, d
                        )));
                    }
                    Some(s)
                }
                None => None,
            };
            let mut rep = runner::run_selftest(d, &nu, &seeds, &magnitudes, kind, base);
            rep.config.threads = threads;
            emit(&common.out, &json_of(&rep))?;
            Ok(if rep.pass { EXIT_OK } else { EXIT_MATH })
        }
        Command::Sweep { common, seeds, magnitudes, noise } => {
            let (d, nu) = parse_common(&common)?;
            let kind = parse_noise(&noise)?;
            let rows = runner::run_sweep(d, &nu, &seeds, &magnitudes, kind);
            emit(&common.out, &sweep_csv(&rows))?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    // SELFTEST_THREADS caps internal parallelism
    let mut threads = None;
    if let Ok(v) = std::env::var("SELFTEST_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            threads = Some(n);
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are not errors
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                print!("{e}");
                return ExitCode::from(EXIT_OK);
            }
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(cli, threads) {
        Ok(code) => ExitCode::from(code),
        Err(ConfigError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
