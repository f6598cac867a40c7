//! Batch front end: one job per process, configured by flags and an optional
//! TOML file whose keys match the long flag names. Flags override the file.
//!
//! Exit codes: 0 success, 1 parse or configuration error, 2 quadrature
//! failure, 3 failed assertion in an experiment.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    compare, limsup_proxy, log_grid, predicted_law, run_counterexample, run_periphery, LimsupReport,
};
use crate::error::{Error, Result};
use crate::ordering::CountingReport;
use crate::quadrature::{OscillatorySymbol, TOL_RANGE};
use crate::spectra::{spectrum, spectrum_until, SpaceKind, SpaceSpec};
use crate::symbolics::parse_symbol;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Table of Lambda_k, k = 0..=kmax.
    Spectrum,
    /// Counting function n(lambda) on the lambda grid.
    Counting,
    /// Counting function against the leading-order law.
    Compare,
    /// Cancellation experiment for exp(-r^(2p) + r^2) sin(r^(2q)).
    Counterexample,
    /// Negative eigenvalues and positive law for a symbol nonnegative at its edge.
    Periphery,
    /// Ratio n(lambda; V) / n(lambda; |V|) on the lambda grid.
    Limsup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Command-line flags; every field may also come from `--config`.
#[derive(Debug, Default, Parser)]
#[command(name = "radspec", version, about = "Spectra of Toeplitz operators with radial symbols")]
pub struct Args {
    /// Job to run (may be given in the config file instead).
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// TOML file with the same keys as the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Space kind, e.g. BergmanComplex or bergman-complex.
    #[arg(long)]
    pub space: Option<String>,
    /// Dimension.
    #[arg(long)]
    pub d: Option<u32>,
    /// Ball radius for Bergman spaces.
    #[arg(long = "R")]
    pub radius: Option<f64>,
    /// Radial symbol, e.g. "chi(0, 0.5) - exp(-r^2)".
    #[arg(long, allow_hyphen_values = true)]
    pub symbol: Option<String>,
    /// Largest k computed (an upper limit for jobs that choose k themselves).
    #[arg(long)]
    pub kmax: Option<u32>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_min_log10: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_max_log10: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Exponent p of the counterexample symbol.
    #[arg(long)]
    pub p: Option<f64>,
    /// Exponent q of the counterexample symbol.
    #[arg(long)]
    pub q: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Contents of a `--config` file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<Command>,
    pub space: Option<String>,
    pub d: Option<u32>,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub symbol: Option<String>,
    pub kmax: Option<u32>,
    pub tol: Option<f64>,
    pub lambda_min_log10: Option<f64>,
    pub lambda_max_log10: Option<f64>,
    pub grid_points: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LambdaGrid {
    pub min_log10: f64,
    pub max_log10: f64,
    pub points: usize,
}

impl LambdaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        log_grid(self.min_log10, self.max_log10, self.points)
    }
}

/// A validated job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct JobConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    pub kmax: u32,
    pub tol: f64,
    pub lambda_grid: LambdaGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_KMAX: u32 = 200;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_GRID: LambdaGrid = LambdaGrid {
    min_log10: -40.0,
    max_log10: -5.0,
    points: 15,
};

fn config_error(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

impl JobConfig {
    /// Merges flags over the config file and validates the result.
    pub fn resolve(args: Args) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str::<ConfigFile>(&text)
                    .map_err(|e| config_error(format!("bad config {}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };
        let command = args
            .command
            .or(file.command)
            .ok_or_else(|| config_error("no command given"))?;
        let kind = args.space.or(file.space);
        let d = args.d.or(file.d);
        let radius = args.radius.or(file.radius);
        let space = match (command, kind) {
            (Command::Counterexample, Some(_)) => {
                return Err(config_error(
                    "the counterexample runs in the one-dimensional BargmannComplex space; drop --space",
                ))
            }
            (Command::Counterexample, None) => None,
            (_, None) => return Err(config_error("missing --space")),
            (_, Some(k)) => {
                let kind: SpaceKind = k.parse()?;
                let d = d.ok_or_else(|| config_error("missing --d"))?;
                Some(SpaceSpec::new(kind, d, radius)?)
            }
        };
        let symbol = args.symbol.or(file.symbol);
        match (command, &symbol) {
            (Command::Counterexample, Some(_)) => {
                return Err(config_error("the counterexample fixes its symbol; use --p and --q"))
            }
            (Command::Counterexample, None) => {}
            (_, None) => return Err(config_error("missing --symbol")),
            (_, Some(s)) => {
                parse_symbol(s)?;
            }
        }
        let (p, q) = match command {
            Command::Counterexample => {
                let p = args.p.or(file.p).unwrap_or(2.0);
                let q = args.q.or(file.q).unwrap_or(4.0);
                OscillatorySymbol::new(p, q)?;
                (Some(p), Some(q))
            }
            _ => {
                if args.p.or(file.p).is_some() || args.q.or(file.q).is_some() {
                    return Err(config_error("--p and --q apply only to the counterexample"));
                }
                (None, None)
            }
        };
        let tol = args.tol.or(file.tol).unwrap_or(DEFAULT_TOL);
        if !(tol > TOL_RANGE.0 && tol < TOL_RANGE.1) {
            return Err(config_error(format!(
                "tol must lie in ({:e}, {:e}), got {tol:e}",
                TOL_RANGE.0, TOL_RANGE.1
            )));
        }
        let lambda_grid = LambdaGrid {
            min_log10: args
                .lambda_min_log10
                .or(file.lambda_min_log10)
                .unwrap_or(DEFAULT_GRID.min_log10),
            max_log10: args
                .lambda_max_log10
                .or(file.lambda_max_log10)
                .unwrap_or(DEFAULT_GRID.max_log10),
            points: args.grid_points.or(file.grid_points).unwrap_or(DEFAULT_GRID.points),
        };
        lambda_grid.values()?;
        let default_format = match command {
            Command::Spectrum | Command::Counting => Format::Csv,
            _ => Format::Json,
        };
        let format = args.format.or(file.format).unwrap_or(default_format);
        if format == Format::Csv
            && matches!(command, Command::Counterexample | Command::Periphery)
        {
            return Err(config_error(format!("{command:?} reports are JSON only")));
        }
        Ok(JobConfig {
            command,
            space,
            symbol,
            kmax: args.kmax.or(file.kmax).unwrap_or(DEFAULT_KMAX),
            tol,
            lambda_grid,
            p,
            q,
            out: args.out.or(file.out),
            format,
        })
    }

    fn space(&self) -> SpaceSpec {
        self.space.expect("validated")
    }

    fn symbol(&self) -> crate::symbolics::RadialSymbol {
        parse_symbol(self.symbol.as_deref().expect("validated")).expect("validated")
    }
}

/// Rendered output of a job.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub text: String,
    /// False when an experiment assertion failed.
    pub passed: bool,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    radspec_version: &'a str,
    config: &'a JobConfig,
    result: T,
}

fn json<T: Serialize>(cfg: &JobConfig, result: T) -> String {
    let env = Envelope {
        radspec_version: VERSION,
        config: cfg,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_header(cfg: &JobConfig) -> String {
    format!(
        "# radspec {VERSION}\n# config: {}\n",
        serde_json::to_string(cfg).expect("configs serialize")
    )
}

/// Reads the config echoed into an output produced by [`run`].
pub fn echoed_config(output: &str) -> Result<JobConfig> {
    let bad = |e: String| config_error(format!("no config echo found: {e}"));
    if let Some(line) = output.lines().find_map(|l| l.strip_prefix("# config: ")) {
        return serde_json::from_str(line).map_err(|e| bad(e.to_string()));
    }
    let v: serde_json::Value = serde_json::from_str(output).map_err(|e| bad(e.to_string()))?;
    serde_json::from_value(v["config"].clone()).map_err(|e| bad(e.to_string()))
}

#[derive(Serialize)]
struct CountingJson<'a> {
    table_k_max: u32,
    rows: Vec<CountingRow<'a>>,
}

#[derive(Serialize)]
struct CountingRow<'a> {
    lambda: f64,
    #[serde(flatten)]
    counts: &'a crate::ordering::Counts,
}

/// Runs a validated job and renders its output.
pub fn run(cfg: &JobConfig) -> Result<Outcome> {
    let grid = cfg.lambda_grid.values()?;
    let lambda_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let ok = |text| Outcome { text, passed: true };
    match cfg.command {
        Command::Spectrum => {
            let table = spectrum(&cfg.space(), &cfg.symbol(), cfg.kmax, cfg.tol)?;
            Ok(ok(match cfg.format {
                Format::Csv => {
                    let mut s = csv_header(cfg);
                    let _ = writeln!(
                        s,
                        "# k_max: {}, tol: {:e}, tail_bound: {}",
                        table.k_max,
                        table.tol,
                        table.tail_bound.map_or("none".into(), |t| t.to_string())
                    );
                    s + &table.to_csv()
                }
                Format::Json => json(cfg, &table),
            }))
        }
        Command::Counting => {
            let table = spectrum_until(&cfg.space(), &cfg.symbol(), lambda_min, cfg.tol, cfg.kmax)?;
            let report = CountingReport::compute(&table, &grid)?;
            Ok(ok(match cfg.format {
                Format::Csv => {
                    let mut s = csv_header(cfg);
                    let _ = writeln!(s, "# table k_max: {}, tol: {:e}", table.k_max, table.tol);
                    s + &report.to_csv()
                }
                Format::Json => json(
                    cfg,
                    CountingJson {
                        table_k_max: table.k_max,
                        rows: report
                            .lambdas
                            .iter()
                            .zip(&report.counts)
                            .map(|(&lambda, counts)| CountingRow { lambda, counts })
                            .collect(),
                    },
                ),
            }))
        }
        Command::Compare => {
            let v = cfg.symbol();
            let space = cfg.space();
            let law = predicted_law(&space, v.classify_decay())?;
            let table = spectrum_until(&space, &v, lambda_min, cfg.tol, cfg.kmax)?;
            let report = compare(&table, &law, &grid)?;
            Ok(ok(match cfg.format {
                Format::Csv => {
                    let mut s = csv_header(cfg);
                    let _ = writeln!(
                        s,
                        "# table k_max: {}, law: {:?}",
                        table.k_max, report.law
                    );
                    s.push_str("lambda,computed,predicted,ratio\n");
                    for i in 0..report.lambdas.len() {
                        let opt = |x: Option<f64>| x.map_or(String::new(), |x| format!("{x:?}"));
                        let _ = writeln!(
                            s,
                            "{:e},{},{},{}",
                            report.lambdas[i],
                            report.computed[i],
                            opt(report.predicted[i]),
                            opt(report.ratios[i])
                        );
                    }
                    s
                }
                Format::Json => json(cfg, &report),
            }))
        }
        Command::Counterexample => {
            let sym = OscillatorySymbol::new(cfg.p.expect("validated"), cfg.q.expect("validated"))?;
            let report = run_counterexample(&sym, cfg.kmax, cfg.tol)?;
            Ok(Outcome {
                passed: report.passed(),
                text: json(cfg, &report),
            })
        }
        Command::Periphery => {
            let report = run_periphery(&cfg.symbol(), &cfg.space(), cfg.kmax, cfg.tol, &grid)?;
            Ok(Outcome {
                passed: report.passed(),
                text: json(cfg, &report),
            })
        }
        Command::Limsup => {
            let report: LimsupReport = limsup_proxy(&cfg.symbol(), &cfg.space(), &grid, cfg.tol, cfg.kmax)?;
            Ok(ok(match cfg.format {
                Format::Csv => {
                    let mut s = csv_header(cfg);
                    s.push_str("lambda,n_v,n_abs,ratio\n");
                    for i in 0..report.lambdas.len() {
                        let _ = writeln!(
                            s,
                            "{:e},{},{},{}",
                            report.lambdas[i],
                            report.n_v[i],
                            report.n_abs[i],
                            report.ratios[i].map_or(String::new(), |x| format!("{x:?}"))
                        );
                    }
                    s
                }
                Format::Json => json(cfg, &report),
            }))
        }
    }
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_quadrature_failure() {
        2
    } else {
        1
    }
}

/// Parses arguments, runs the job and writes its output; returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match JobConfig::resolve(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("radspec: configuration error: {e}");
            return 1;
        }
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("radspec: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(outcome.text.as_bytes())
                .map_err(|e| format!("cannot write output: {e}"))
        }
    };
    if let Err(msg) = written {
        eprintln!("radspec: {msg}");
        return 1;
    }
    if outcome.passed {
        0
    } else {
        eprintln!("radspec: experiment assertions failed; see the checks in the report");
        3
    }
}
