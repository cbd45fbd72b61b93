//! Command-line front end.
//!
//! One subcommand per module: `bounds`, `verify-tgi`, `mayer`, `stability`,
//! `decompose`, `integrals`. Potentials come from JSON documents, outputs go
//! to stdout or `--out` as JSON or CSV, and every output embeds the fully
//! resolved run configuration as an audit header. With a fixed seed the
//! output bytes are identical at any `--workers` count.
//!
//! Exit codes: 0 success, 1 domain error (machine-readable JSON on stderr),
//! 2 usage error.

use crate::bounds::{self, StabilityInputs};
use crate::decompose::{DecomposeOptions, DecompositionResult};
use crate::mayer::{CubicBox, MayerEstimate, MayerMethod};
use crate::potential::RadialPotential;
use crate::quad::{IntegralConstants, QuadratureSpec};
use crate::stability;
use crate::tgi;
use clap::{Args, Parser, Subcommand, error::ErrorKind};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "cluster-radius", version, about = "Mayer-series convergence bounds for classical gases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Radius and coefficient bounds with comparison ratios
    Bounds(CommonArgs),
    /// Check the tree-graph identity on seeded random matrices
    VerifyTgi(CommonArgs),
    /// Mayer coefficients by exact 1-D quadrature or Monte Carlo
    Mayer(CommonArgs),
    /// Stability-constant search (configuration lower bound)
    Stability(CommonArgs),
    /// Constructive decomposition of a Lennard-Jones type potential
    Decompose(CommonArgs),
    /// The integral constants C, C*, C~, ||V||_1
    Integrals(CommonArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Potential JSON document
    #[arg(long)]
    potential: Option<PathBuf>,
    /// Inverse temperature
    #[arg(long)]
    beta: Option<f64>,
    /// Sweep A:B:N[:log] over inverse temperatures (emits CSV)
    #[arg(long, value_name = "A:B:N[:log]", conflicts_with = "beta")]
    beta_sweep: Option<String>,
    /// Order / particle-count parameter (subcommand-specific)
    #[arg(long)]
    n: Option<usize>,
    /// Seed for every stochastic operation
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials, samples or restarts (subcommand-specific)
    #[arg(long)]
    trials: Option<u64>,
    /// Method selector (mayer: exact1d | monte-carlo)
    #[arg(long)]
    method: Option<String>,
    /// Output format: json | csv
    #[arg(long, default_value = "json")]
    format: String,
    /// Output path (decompose treats it as a base name)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (CLUSTER_RADIUS_WORKERS overrides)
    #[arg(long)]
    workers: Option<usize>,
    /// Tolerance override (quadrature relative tolerance)
    #[arg(long)]
    tol: Option<f64>,
    /// Box side length for Mayer estimates
    #[arg(long, default_value_t = 64.0)]
    box_side: f64,
    /// Asserted stability constant B; a seeded search runs when absent
    #[arg(long)]
    stability_b: Option<f64>,
}

/// Fully resolved configuration, embedded into every output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_sweep: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    pub format: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub workers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub box_side: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_b: Option<f64>,
}

#[derive(Debug)]
struct DomainError(String);

impl<E: std::error::Error> From<E> for DomainError {
    fn from(e: E) -> Self {
        DomainError(e.to_string())
    }
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let (name, args) = match &cli.command {
        Command::Bounds(a) => ("bounds", a),
        Command::VerifyTgi(a) => ("verify-tgi", a),
        Command::Mayer(a) => ("mayer", a),
        Command::Stability(a) => ("stability", a),
        Command::Decompose(a) => ("decompose", a),
        Command::Integrals(a) => ("integrals", a),
    };
    let workers = std::env::var("CLUSTER_RADIUS_WORKERS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .or(args.workers)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        });
    let config = RunConfig {
        subcommand: name.to_string(),
        potential: args.potential.as_ref().map(|p| p.display().to_string()),
        beta: args.beta,
        beta_sweep: args.beta_sweep.clone(),
        n: args.n,
        seed: args.seed,
        trials: args.trials,
        method: args.method.clone(),
        format: args.format.clone(),
        out: args.out.as_ref().map(|p| p.display().to_string()),
        workers,
        tol: args.tol,
        box_side: args.box_side,
        stability_b: args.stability_b,
    };

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => return fail(&DomainError(e.to_string())),
    };
    let outcome = pool.install(|| execute(name, args, &config));
    match outcome {
        Ok(()) => 0,
        Err(e) => fail(&e),
    }
}

fn fail(e: &DomainError) -> i32 {
    eprintln!("{}", json!({ "error": e.0 }));
    1
}

fn execute(name: &str, args: &CommonArgs, config: &RunConfig) -> Result<(), DomainError> {
    match name {
        "bounds" => cmd_bounds(args, config),
        "verify-tgi" => cmd_verify_tgi(args, config),
        "mayer" => cmd_mayer(args, config),
        "stability" => cmd_stability(args, config),
        "decompose" => cmd_decompose(args, config),
        "integrals" => cmd_integrals(args, config),
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

fn load_potential(args: &CommonArgs) -> Result<RadialPotential, DomainError> {
    let path = args
        .potential
        .as_ref()
        .ok_or_else(|| DomainError("--potential is required for this subcommand".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| DomainError(format!("cannot read {}: {e}", path.display())))?;
    let p: RadialPotential = serde_json::from_str(&text)
        .map_err(|e| DomainError(format!("invalid potential JSON: {e}")))?;
    p.validate()?;
    Ok(p)
}

fn quad_spec(args: &CommonArgs) -> QuadratureSpec {
    match args.tol {
        Some(t) => QuadratureSpec::with_tols(t, (t * 1e-4).max(1e-15)),
        None => QuadratureSpec::default(),
    }
}

fn parse_sweep(s: &str) -> Result<Vec<f64>, DomainError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(DomainError(format!("bad sweep '{s}', expected A:B:N[:log]")));
    }
    let a: f64 = parts[0].parse().map_err(|_| DomainError(format!("bad sweep start in '{s}'")))?;
    let b: f64 = parts[1].parse().map_err(|_| DomainError(format!("bad sweep stop in '{s}'")))?;
    let n: usize = parts[2].parse().map_err(|_| DomainError(format!("bad sweep count in '{s}'")))?;
    let log = parts.len() == 4 && parts[3] == "log";
    if n < 1 || a <= 0.0 || b < a {
        return Err(DomainError(format!("sweep '{s}' needs 0 < A <= B and N >= 1")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            if log { a * (b / a).powf(t) } else { a + (b - a) * t }
        })
        .collect())
}

fn betas(args: &CommonArgs) -> Result<Vec<f64>, DomainError> {
    match (&args.beta, &args.beta_sweep) {
        (Some(b), None) => {
            if *b <= 0.0 {
                return Err(DomainError(format!("beta must be positive, got {b}")));
            }
            Ok(vec![*b])
        }
        (None, Some(s)) => parse_sweep(s),
        (None, None) => Ok(vec![1.0]),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }
}

/// 17 significant digits, '.' decimal separator.
fn fmt_float(x: f64) -> String {
    if x == 0.0 { "0".into() } else { format!("{x:.16e}") }
}

fn emit(args: &CommonArgs, text: String) -> Result<(), DomainError> {
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| DomainError(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_output<T: Serialize>(config: &RunConfig, result: &T) -> String {
    let doc = json!({ "config": config, "result": result });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

fn csv_header(config: &RunConfig, columns: &[&str]) -> String {
    let mut s = format!("# config: {}\n", serde_json::to_string(config).expect("serializable"));
    s.push_str(&columns.join(","));
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

fn cmd_integrals(args: &CommonArgs, config: &RunConfig) -> Result<(), DomainError> {
    let p = load_potential(args)?;
    let spec = quad_spec(args);
    let betas = betas(args)?;
    let mut rows: Vec<(f64, IntegralConstants)> = Vec::new();
    for &beta in &betas {
        rows.push((beta, IntegralConstants::compute(&p, beta, &spec)?));
    }
    if args.format == "csv" || betas.len() > 1 {
        let mut out = csv_header(
            config,
            &["beta", "c_beta", "c_star_beta", "c_tilde_beta", "v_l1", "sphere_volume", "tail"],
        );
        for (beta, c) in &rows {
            let opt = |v: &Option<f64>| v.map(fmt_float).unwrap_or_default();
            let tail = match c.tail {
                crate::quad::TailStatus::AnalyticZero => "analytic_zero",
                crate::quad::TailStatus::EnvelopeBounded => "envelope_bounded",
                crate::quad::TailStatus::Unverified => "unverified",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{tail}",
                fmt_float(*beta),
                fmt_float(c.c_beta),
                opt(&c.c_star_beta),
                opt(&c.c_tilde_beta),
                opt(&c.v_l1),
                fmt_float(c.sphere_volume),
            );
        }
        emit(args, out)
    } else {
        emit(args, json_output(config, &rows[0].1))
    }
}

fn resolve_stability_b(
    args: &CommonArgs,
    p: &RadialPotential,
) -> Result<(f64, Option<f64>), DomainError> {
    if let Some(b) = args.stability_b {
        if b < 0.0 {
            return Err(DomainError(format!("stability constant must be >= 0, got {b}")));
        }
        return Ok((b, Some(b)));
    }
    // seeded search: a credible lower bound, labeled as such by its absence
    // from the config's stability_b field
    let est = stability::configuration_lower_bound(p, args.n.unwrap_or(6).max(2), 3, args.seed);
    Ok((est.lower_bound, None))
}

fn cmd_bounds(args: &CommonArgs, config: &RunConfig) -> Result<(), DomainError> {
    let p = load_potential(args)?;
    let spec = quad_spec(args);
    let (b, _) = resolve_stability_b(args, &p)?;
    let stability_inputs = StabilityInputs { b, b_tilde: None };
    let betas = betas(args)?;
    if betas.len() == 1 && args.format != "csv" {
        let report = bounds::compare_report(&p, betas[0], stability_inputs, &spec)?;
        return emit(args, json_output(config, &report));
    }
    let names = ["penrose_ruelle", "brydges_federbush", "penrose", "ruelle"];
    let mut columns = vec!["beta".to_string()];
    columns.extend(names.iter().map(|n| n.to_string()));
    columns.extend(names.iter().map(|n| format!("log_{n}")));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut out = csv_header(config, &cols);
    for &beta in &betas {
        let report = bounds::compare_report(&p, beta, stability_inputs, &spec)?;
        let mut row = vec![fmt_float(beta)];
        for name in &names {
            row.push(report.radii.get(*name).map(|r| fmt_float(r.value)).unwrap_or_default());
        }
        for name in &names {
            row.push(report.radii.get(*name).map(|r| fmt_float(r.log)).unwrap_or_default());
        }
        let _ = writeln!(out, "{}", row.join(","));
    }
    emit(args, out)
}

#[derive(Serialize)]
struct VerifyTgiReport {
    n: usize,
    trials: u64,
    passes: u64,
    failures: Vec<u64>,
    max_abs_error: f64,
    tolerance: f64,
    quadrature_order: usize,
}

fn cmd_verify_tgi(args: &CommonArgs, config: &RunConfig) -> Result<(), DomainError> {
    let n = args.n.unwrap_or(3);
    if !(2..=tgi::MAX_TREE_SUM_N).contains(&n) {
        return Err(DomainError(format!(
            "verify-tgi supports 2 <= n <= {}, got {n}",
            tgi::MAX_TREE_SUM_N
        )));
    }
    let trials = args.trials.unwrap_or(100);
    let tol = args.tol.unwrap_or(1e-6);
    let order = if n <= 4 { 24 } else { 12 };
    let mut max_err = 0.0f64;
    let mut failures = Vec::new();
    for trial in 0..trials {
        let v = tgi::random_bounded_matrix(n, -1.0, 2.0, args.seed, trial);
        let lhs = tgi::lhs_connected_graph_sum(&v)?;
        let rhs = tgi::rhs_tree_sum(&v, order)?;
        let err = (lhs - rhs.value).abs();
        max_err = max_err.max(err);
        if err > tol.max(1e-6 * lhs.abs()) {
            failures.push(trial);
        }
    }
    let report = VerifyTgiReport {
        n,
        trials,
        passes: trials - failures.len() as u64,
        failures,
        max_abs_error: max_err,
        tolerance: tol,
        quadrature_order: order,
    };
    emit(args, json_output(config, &report))
}

fn cmd_mayer(args: &CommonArgs, config: &RunConfig) -> Result<(), DomainError> {
    let p = load_potential(args)?;
    let beta = betas(args)?[0];
    let n_top = args.n.unwrap_or(4);
    let method = match args.method.as_deref() {
        None | Some("exact1d") => MayerMethod::Exact1D,
        Some("monte-carlo") => MayerMethod::MonteCarlo,
        Some(other) => return Err(DomainError(format!("unknown method '{other}'"))),
    };
    let samples = args.trials.unwrap_or(1_000_000);
    let bx = CubicBox::new(p.dimension, args.box_side);
    let mut rows: Vec<MayerEstimate> = Vec::new();
    for n in 2..=n_top {
        rows.push(crate::mayer::mayer_coefficient(
            &p, beta, bx, n, method, samples, args.seed,
        )?);
    }
    let mut out = csv_header(
        config,
        &["n", "value", "std_error", "method", "box_side", "samples"],
    );
    for e in &rows {
        let method = match e.method {
            MayerMethod::Exact1D => "exact1d",
            MayerMethod::MonteCarlo => "monte-carlo",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            e.n,
            fmt_float(e.value),
            fmt_float(e.std_error),
            method,
            fmt_float(e.box_side),
            e.samples
        );
    }
    emit(args, out)
}

fn cmd_stability(args: &CommonArgs, config: &RunConfig) -> Result<(), DomainError> {
    let p = load_potential(args)?;
    let n_max = args.n.unwrap_or(8).max(2);
    let restarts = args.trials.unwrap_or(4).max(1) as usize;
    let est = stability::configuration_lower_bound(&p, n_max, restarts, args.seed);
    emit(args, json_output(config, &est))
}

fn cmd_decompose(args: &CommonArgs, config: &RunConfig) -> Result<(), DomainError> {
    let p = load_potential(args)?;
    let mut opts = DecomposeOptions::default();
    if let Some(t) = args.tol {
        opts.transform_rel_tol = t;
    }
    let res = crate::decompose::decompose(&p, &opts)?;
    match &args.out {
        None => {
            print!("{}", json_output(config, &res));
            Ok(())
        }
        Some(base) => {
            let base = base.display().to_string();
            std::fs::write(format!("{base}.json"), json_output(config, &res))
                .map_err(|e| DomainError(format!("cannot write {base}.json: {e}")))?;
            std::fs::write(format!("{base}_rgrid.csv"), rgrid_csv(config, &res))
                .map_err(|e| DomainError(format!("cannot write {base}_rgrid.csv: {e}")))?;
            std::fs::write(format!("{base}_pgrid.csv"), pgrid_csv(config, &res))
                .map_err(|e| DomainError(format!("cannot write {base}_pgrid.csv: {e}")))?;
            Ok(())
        }
    }
}

fn rgrid_csv(config: &RunConfig, res: &DecompositionResult) -> String {
    let mut out = csv_header(config, &["r", "v_a", "phi1", "phi2", "eta3", "xi1", "psi1"]);
    for (i, &r) in res.v_a.radii.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_float(r),
            fmt_float(res.v_a.values[i]),
            fmt_float(res.phi1.values.get(i).copied().unwrap_or(0.0)),
            fmt_float(res.phi2.values.get(i).copied().unwrap_or(0.0)),
            fmt_float(res.eta3.values.get(i).copied().unwrap_or(0.0)),
            fmt_float(res.xi1.values.get(i).copied().unwrap_or(0.0)),
            fmt_float(res.psi1.values.get(i).copied().unwrap_or(0.0)),
        );
    }
    out
}

fn pgrid_csv(config: &RunConfig, res: &DecompositionResult) -> String {
    let mut out = csv_header(config, &["p", "phi2_inner_hat"]);
    for (p, v) in res.fourier_report.p_grid.iter().zip(&res.fourier_report.phi2_inner_hat) {
        let _ = writeln!(out, "{},{}", fmt_float(*p), fmt_float(*v));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        assert_eq!(parse_sweep("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        let logs = parse_sweep("1:4:3:log").unwrap();
        assert!((logs[1] - 2.0).abs() < 1e-12);
        assert!(parse_sweep("0:1:2").is_err());
        assert!(parse_sweep("nope").is_err());
    }

    #[test]
    fn float_format_has_17_significant_digits() {
        let s = fmt_float(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        assert_eq!(fmt_float(0.0), "0");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["cluster-radius", "no-such-subcommand"]), 2);
        assert_eq!(run(["cluster-radius", "bounds", "--no-such-flag"]), 2);
    }

    #[test]
    fn domain_errors_exit_1() {
        assert_eq!(
            run(["cluster-radius", "bounds", "--potential", "/no/such/file.json"]),
            1
        );
    }
}
