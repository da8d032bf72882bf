use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use depscale::ace::{ace_pair, ace_subspace, AceResult, AceStatus};
use depscale::estimate::{estimate_profile_with_tol, BinningSpec, Strategy};
use depscale::gaussian::{self, GaussianJoint};
use depscale::io;
use depscale::spectral::{gram_det_oracle_with, OracleConfig};
use depscale::structure::check_completeness;
use depscale::{DependenceProfile, Error, SingularSpectrum};
use serde_json::{json, Value};

const SCHEMA: &str = "v1";

#[derive(Parser)]
#[command(name = "depscale", version, about = "Maximal correlation and m-dependence scale")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Threshold below which a singular value counts as zero
    #[arg(long, default_value_t = depscale::spectral::DEFAULT_TOL, global = true)]
    tol: f64,

    /// Seed for randomized solvers
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    /// Largest m for which D_m is reported
    #[arg(long, default_value_t = 3, global = true)]
    max_order: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Dependence profile of a joint pmf table
    Compute {
        /// CSV with rows = X atoms and columns = Y atoms
        joint: PathBuf,
    },

    /// Plug-in dependence profile from paired samples
    Estimate {
        samples: PathBuf,

        /// X column, by header name or 0-based index
        #[arg(long, default_value = "0")]
        x_col: String,

        /// Y column(s); several are binned jointly
        #[arg(long, num_args = 1.., default_values_t = vec!["1".to_string()])]
        y_cols: Vec<String>,

        /// Bins per axis
        #[arg(long, default_value_t = 8)]
        bins: usize,

        /// Bins for Y when it differs from X
        #[arg(long)]
        bins_y: Option<usize>,

        /// quantile, uniform or categorical
        #[arg(long, default_value = "quantile")]
        strategy: String,

        /// The first row is data, not column names
        #[arg(long)]
        no_header: bool,
    },

    /// Maximal correlation of a Gaussian vector from its covariance
    Gaussian {
        /// Square CSV covariance of (X, Y)
        cov: PathBuf,

        /// Number of leading coordinates that belong to X
        #[arg(long)]
        dim_x: usize,

        /// Noise scales for the injection curve (scalar blocks only)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambdas: Vec<f64>,

        /// Variance of the injected noise
        #[arg(long, default_value_t = 1.0)]
        var_z: f64,
    },

    /// Maximizing transform pairs by alternating conditional expectations
    Transforms {
        joint: PathBuf,

        /// Number of pairs
        #[arg(short, long, default_value_t = 1)]
        k: usize,

        /// Sweep budget
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },

    /// Generalized-variance search for D_m, independent of the SVD route
    Oracle {
        joint: PathBuf,

        #[arg(short, long, default_value_t = 0)]
        m: usize,

        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
}

/// A report as ordered (quantity, index, value) rows plus its JSON form.
struct Report {
    json: Value,
    rows: Vec<(String, Option<usize>, String)>,
}

impl Report {
    fn new() -> Self {
        Report {
            json: json!({ "v": SCHEMA }),
            rows: Vec::new(),
        }
    }

    fn put(&mut self, key: &str, value: Value) {
        match &value {
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    self.rows.push((key.to_string(), Some(i), flat(item)));
                }
            }
            Value::Object(map) => {
                for (sub, v) in map {
                    let name = format!("{key}.{sub}");
                    match v {
                        Value::Array(items) => {
                            for (i, item) in items.iter().enumerate() {
                                self.rows.push((name.clone(), Some(i), flat(item)));
                            }
                        }
                        other => self.rows.push((name, None, flat(other))),
                    }
                }
            }
            other => self.rows.push((key.to_string(), None, flat(other))),
        }
        self.json[key] = value;
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("report serializes"),
            Format::Csv => {
                let mut out = String::from("quantity,index,value\n");
                for (q, i, v) in &self.rows {
                    let i = i.map(|i| i.to_string()).unwrap_or_default();
                    out.push_str(&format!("{q},{i},{v}\n"));
                }
                out
            }
        }
    }
}

fn flat(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn put_profile(r: &mut Report, spectrum: &SingularSpectrum, profile: &DependenceProfile) {
    r.put("sigma0", json!(spectrum.sigma0));
    r.put("sigma", json!(spectrum.sigma));
    r.put("R", json!(profile.r));
    r.put("D", json!(profile.d));
    r.put("order", json!(profile.order));
}

fn compute(c: &Common, path: &PathBuf) -> depscale::Result<Report> {
    let j = io::read_joint_path(path)?;
    log::debug!("joint {}×{}", j.nx(), j.ny());
    let spectrum = depscale::singular_spectrum(&j)?;
    let profile = DependenceProfile::from_spectrum(&spectrum, c.max_order, c.tol);
    let mut r = Report::new();
    put_profile(&mut r, &spectrum, &profile);
    r.put("complete", json!(check_completeness(&j, c.tol)?.complete));
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn estimate(
    c: &Common,
    path: &PathBuf,
    x_col: &str,
    y_cols: &[String],
    bins: usize,
    bins_y: Option<usize>,
    strategy: &str,
    no_header: bool,
) -> depscale::Result<Report> {
    let frame = io::read_samples_path(path, !no_header)?;
    let ys: Vec<&str> = y_cols.iter().map(String::as_str).collect();
    let samples = frame.select(x_col, &ys)?;
    let spec = BinningSpec {
        strategy: strategy.parse::<Strategy>()?,
        bins_x: bins,
        bins_y: bins_y.unwrap_or(bins),
    };
    let e = estimate_profile_with_tol(&samples, &spec, c.max_order, c.tol)?;
    if e.bias_warning {
        log::warn!("n = {} is small for {}×{} bins; expect upward bias", e.n, e.bins.0, e.bins.1);
    }
    let mut r = Report::new();
    put_profile(&mut r, &e.spectrum, &e.profile);
    r.put("n", json!(e.n));
    r.put("bins", json!([e.bins.0, e.bins.1]));
    r.put("bias_warning", json!(e.bias_warning));
    Ok(r)
}

fn gaussian_report(path: &PathBuf, dim_x: usize, lambdas: &[f64], var_z: f64) -> depscale::Result<Report> {
    let cov = io::read_matrix_path(path)?;
    let g = GaussianJoint::from_covariance(&cov, dim_x)?;
    let mut r = Report::new();
    r.put("R", json!(gaussian::gaussian_r(&g)));
    r.put("D", json!(gaussian::gaussian_d(&g)));
    r.put("lambda_max", json!(gaussian::lambda_max(&g)));
    if !lambdas.is_empty() {
        let curve = gaussian::noise_curve(&g, var_z, lambdas)?;
        r.put("noise_curve", json!({ "lambda": curve.lambdas, "R": curve.r_values }));
    }
    Ok(r)
}

fn transforms(c: &Common, path: &PathBuf, k: usize, max_iter: usize) -> depscale::Result<Report> {
    let j = io::read_joint_path(path)?;
    let results: Vec<AceResult> = if k == 1 {
        vec![ace_pair(&j, c.tol, max_iter, c.seed)?]
    } else {
        ace_subspace(&j, k, c.tol, max_iter, c.seed)?
    };
    if let Some(bad) = results.iter().find(|a| a.status == AceStatus::NonConvergence) {
        return Err(Error::NonConvergence {
            iterations: bad.iterations,
        });
    }
    let pairs: Vec<Value> = results
        .iter()
        .map(|a| {
            json!({
                "phi": a.pair.phi.values,
                "psi": a.pair.psi.values,
                "rho": a.pair.rho,
                "degenerate": a.is_degenerate(),
                "converged": a.status == AceStatus::Converged,
                "iterations": a.iterations,
            })
        })
        .collect();
    let mut r = Report::new();
    r.put("rho", json!(results.iter().map(|a| a.pair.rho).collect::<Vec<_>>()));
    if matches!(c.format, Format::Csv) {
        for (i, a) in results.iter().enumerate() {
            r.put(&format!("phi{i}"), json!(a.pair.phi.values));
            r.put(&format!("psi{i}"), json!(a.pair.psi.values));
            r.put(&format!("degenerate{i}"), json!(a.is_degenerate()));
        }
    }
    r.json["pairs"] = Value::Array(pairs);
    Ok(r)
}

fn oracle(c: &Common, path: &PathBuf, m: usize, restarts: usize) -> depscale::Result<Report> {
    let j = io::read_joint_path(path)?;
    let config = OracleConfig {
        restarts,
        ..OracleConfig::default()
    };
    let value = gram_det_oracle_with(&j, m, &config, c.seed)?;
    let spectral = depscale::spectral::dependence_scale_with_tol(&j, m, c.tol)?.d[m];
    let mut r = Report::new();
    r.put("m", json!(m));
    r.put("oracle", json!(value));
    r.put("spectral", json!(spectral));
    Ok(r)
}

fn run(cli: &Cli) -> depscale::Result<Report> {
    let c = &cli.common;
    if !(c.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("--tol must be > 0, got {}", c.tol)));
    }
    match &cli.command {
        Command::Compute { joint } => compute(c, joint),
        Command::Estimate {
            samples,
            x_col,
            y_cols,
            bins,
            bins_y,
            strategy,
            no_header,
        } => estimate(c, samples, x_col, y_cols, *bins, *bins_y, strategy, *no_header),
        Command::Gaussian {
            cov,
            dim_x,
            lambdas,
            var_z,
        } => gaussian_report(cov, *dim_x, lambdas, *var_z),
        Command::Transforms { joint, k, max_iter } => transforms(c, joint, *k, *max_iter),
        Command::Oracle { joint, m, restarts } => oracle(c, joint, *m, *restarts),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            println!("{}", report.render(cli.common.format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.code(), "message": e.to_string() }));
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
