//! `ndspec`: factor, verify, and analyze matrix spectral densities.
//!
//! Exit codes: 0 success, 2 bad input or usage, 3 numerical failure,
//! 4 tolerance not met.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ndspec::driver::{default_grid, default_orders, full_factor, verify, FactorOptions, FactorizationReport};
use ndspec::granger::{granger_1d, granger_2d, CausalityResult};
use ndspec::harmonic::{LaurentMatrix, LaurentTable, MatrixFunction};
use ndspec::io::{
    load_factor, load_spectrum, minimal_grid, save_result, spectrum_from_document, Provenance, ResultDocument,
    Spectrum, SpectrumDocument,
};
use ndspec::Error;
use sha2::{Digest, Sha256};

const BENCHMARK: &str = include_str!("../../core/fixtures/s8.json");

#[derive(Parser)]
#[command(name = "ndspec", version, about = "Matrix spectral factorization on the N-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor a spectrum S = S₊S₊* and write a result document.
    Factor(FactorArgs),
    /// Check a candidate factor against a spectrum.
    Verify(VerifyArgs),
    /// Granger causality Y → X of a 2×2 spectrum.
    Granger(GrangerArgs),
    /// Run the built-in two-variable 2×2 benchmark.
    BenchPaper(BenchArgs),
}

#[derive(Args)]
struct Common {
    /// Grid sizes G1,…,GN (powers of two).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Worker threads (default: NDSPEC_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct FactorArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Truncation orders n1,…,nN.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Variable order as a permutation of 0..N.
    #[arg(long, value_delimiter = ',')]
    axis_order: Option<Vec<usize>>,
    /// Omit factor coefficients below this fraction of the largest.
    #[arg(long, default_value_t = 0.0)]
    drop: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    spectrum: PathBuf,
    #[arg(long)]
    factor: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GrangerArgs {
    #[arg(long)]
    spectrum: PathBuf,
    /// L for spectra on T, L,M on T².
    #[arg(long, value_delimiter = ',')]
    horizon: Vec<i64>,
    /// Truncation box K1,K2 for two-variable sums.
    #[arg(long = "box", value_delimiter = ',')]
    bx: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,50")]
    orders: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "512,128")]
    grid: Vec<usize>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the result document here.
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Numeric(String),
    Tolerance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn threads(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    match flag {
        Some(t) => Ok(Some(t)),
        None => match std::env::var("NDSPEC_THREADS") {
            Ok(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Failure::Input(format!("NDSPEC_THREADS must be a positive integer, got {v:?}"))),
            Err(_) => Ok(None),
        },
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Orders given on the command line, or degree + 2 for coefficient input.
fn resolve_orders(given: Option<Vec<usize>>, laurent: Option<&LaurentMatrix>, n_vars: usize) -> Result<Vec<usize>, Failure> {
    let orders = match (given, laurent) {
        (Some(o), _) => o,
        (None, Some(c)) => default_orders(c),
        (None, None) => return Err(Failure::Input("grid-sampled input needs explicit --orders".into())),
    };
    if orders.len() != n_vars {
        return Err(Failure::Input(format!("{} orders for {n_vars} variables", orders.len())));
    }
    Ok(orders)
}

/// Loads a spectrum whose grid depends on the orders (coefficient input) or
/// is fixed by the file (grid input).
fn load_for_factoring(
    path: &Path,
    grid: Option<Vec<usize>>,
    orders: Option<Vec<usize>>,
) -> Result<(Spectrum, Vec<usize>), Failure> {
    if let Some(g) = grid {
        let spec = load_spectrum(path, Some(&g))?;
        let orders = resolve_orders(orders, spec.laurent.as_ref(), spec.grid.dim())?;
        return Ok((spec, orders));
    }
    let probe = load_spectrum(path, None)?;
    let orders = resolve_orders(orders, probe.laurent.as_ref(), probe.grid.dim())?;
    match &probe.laurent {
        Some(c) => {
            let sizes = default_grid(&c.degrees(), &orders, c.d());
            Ok((load_spectrum(path, Some(&sizes))?, orders))
        }
        None => Ok((probe, orders)),
    }
}

fn result_document(
    splus: Option<&MatrixFunction>,
    drop: f64,
    d: usize,
    n_vars: usize,
    report: FactorizationReport,
    input_sha256: String,
    orders: &[usize],
) -> ResultDocument {
    let factor = match splus {
        Some(f) => SpectrumDocument::from_laurent(&f.coefficients().cleaned(drop)),
        // Aborted runs carry an all-zero factor next to the partial report.
        None => SpectrumDocument::from_laurent(&LaurentMatrix::new(d, vec![LaurentTable::new(n_vars); d * d]).unwrap()),
    };
    ResultDocument {
        provenance: Provenance {
            input_sha256,
            orders: orders.to_vec(),
            grid: report.grid.clone(),
            axis_order: report.axis_order.clone(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
        },
        factor,
        report,
    }
}

fn run_factor(args: FactorArgs) -> Outcome {
    let bytes = std::fs::read(&args.input).map_err(|e| Failure::Input(format!("{}: {e}", args.input.display())))?;
    let (spec, orders) = load_for_factoring(&args.input, args.common.grid, args.orders)?;
    let opts = FactorOptions { orders: orders.clone(), axis_order: args.axis_order, threads: threads(args.common.threads)? };
    let (d, n_vars) = (spec.grid.d(), spec.grid.dim());
    let digest = sha256_hex(&bytes);
    match full_factor(&spec.grid, &opts) {
        Ok((splus, report)) => {
            let pass = report.passes(args.tol);
            let (residual, energy) = (report.residual_rel, report.analytic_energy);
            save_result(&args.output, &result_document(Some(&splus), args.drop, d, n_vars, report, digest, &orders))?;
            eprintln!("residual/‖S‖ {residual:.3e}, analytic-type mask energy {energy:.3e}");
            if pass {
                Ok(())
            } else {
                Err(Failure::Tolerance(format!("diagnostics exceed --tol {:e}", args.tol)))
            }
        }
        Err(failure) => {
            let mut report = *failure.report;
            if report.grid.is_empty() {
                report.grid = spec.grid.sizes().to_vec();
            }
            save_result(&args.output, &result_document(None, 0.0, d, n_vars, report, digest, &orders))?;
            Err(failure.error.into())
        }
    }
}

/// A grid that resolves log-determinant quadratures for coefficient input.
fn verification_grid(spec: &Spectrum) -> Vec<usize> {
    let c = spec.laurent.as_ref().expect("coefficient input");
    let n = c.dim() as u32;
    let target = 1usize << (16 / n.max(1)).min(16);
    minimal_grid(&c.degrees()).into_iter().map(|g| g.max(target)).collect()
}

fn run_verify(args: VerifyArgs) -> Outcome {
    let (spec, factor) = match args.common.grid {
        Some(g) => (load_spectrum(&args.spectrum, Some(&g))?, load_factor(&args.factor, Some(&g))?),
        None => {
            let probe = load_spectrum(&args.spectrum, None)?;
            // The factor's own grid covers its support; widen to resolve the
            // log-determinant quadratures too.
            let native = load_factor(&args.factor, None)?;
            let sizes: Vec<usize> = match probe.laurent {
                Some(_) => verification_grid(&probe).iter().zip(native.sizes()).map(|(&a, &b)| a.max(b)).collect(),
                None => probe.grid.sizes().to_vec(),
            };
            (load_spectrum(&args.spectrum, Some(&sizes))?, load_factor(&args.factor, Some(&sizes))?)
        }
    };
    let report = verify(&spec.grid, &factor)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if report.passes_verification(args.tol) {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!(
            "residual/‖S‖ {:.3e}, mask energy {:.3e}, outer gap {:.3e} against --tol {:e}",
            report.residual_rel, report.analytic_energy, report.outer_gap, args.tol
        )))
    }
}

fn print_causality(r: &CausalityResult) {
    println!("{}", serde_json::to_string_pretty(r).expect("result serializes"));
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
}

fn run_granger(args: GrangerArgs) -> Outcome {
    let (spec, orders) = load_for_factoring(&args.spectrum, args.common.grid, args.orders)?;
    let opts = FactorOptions { orders, axis_order: None, threads: threads(args.common.threads)? };
    let result = match (spec.grid.dim(), args.horizon.as_slice()) {
        (1, &[l]) if l > 0 => granger_1d(&spec.grid, l as usize, &opts)?,
        (2, &[l, m]) => {
            let bx = match args.bx.as_deref() {
                None => None,
                Some(&[k1, k2]) if k1 >= 0 && k2 >= 0 => Some((k1, k2)),
                Some(other) => return Err(Failure::Input(format!("--box needs two nonnegative bounds, got {other:?}"))),
            };
            granger_2d(&spec.grid, (l, m), bx, &opts)?
        }
        (n, h) => return Err(Failure::Input(format!("horizon {h:?} does not fit a spectrum on T^{n}"))),
    };
    print_causality(&result);
    Ok(())
}

fn run_bench(args: BenchArgs) -> Outcome {
    let doc: SpectrumDocument = serde_json::from_str(BENCHMARK).expect("built-in fixture parses");
    let spec = spectrum_from_document(&doc, Some(&args.grid))?;
    let exact = spec.factor.clone().expect("fixture stores the factor");
    let opts = FactorOptions { orders: args.orders.clone(), axis_order: None, threads: threads(args.threads)? };
    let start = Instant::now();
    let (splus, report) = full_factor(&spec.grid, &opts).map_err(|f| Failure::from(f.error))?;
    let secs = start.elapsed().as_secs_f64();
    let exact_grid = MatrixFunction::evaluate(&exact, &args.grid)?;
    let error = splus.coefficients().max_diff(&exact_grid.coefficients());
    println!("orders {:?}, grid {:?}", args.orders, args.grid);
    println!("max coefficient error {error:.3e}");
    println!("residual/‖S‖ {:.3e}, outer gap {:.3e}", report.residual_rel, report.outer_gap);
    println!("wall time {secs:.3} s");
    if let Some(path) = &args.output {
        let digest = sha256_hex(BENCHMARK.as_bytes());
        save_result(path, &result_document(Some(&splus), 0.0, 2, 2, report, digest, &args.orders))?;
    }
    if error <= args.tol {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!("max coefficient error {error:.3e} exceeds {:e}", args.tol)))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Factor(a) => run_factor(a),
        Command::Verify(a) => run_verify(a),
        Command::Granger(a) => run_granger(a),
        Command::BenchPaper(a) => run_bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Tolerance(msg)) => {
            eprintln!("tolerance failure: {msg}");
            ExitCode::from(4)
        }
    }
}
