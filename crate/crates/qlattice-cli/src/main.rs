//! qlattice: evaluate q-classical orthogonal polynomials, extract their
//! recurrence and structure coefficients, and run verification suites.
//!
//! Exit codes: 0 success (all checks passed for `verify`), 1 computational
//! failure or failing checks, 2 usage or configuration errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use qlattice::families::{FamilyName, FamilySpec};
use qlattice::verify::suite::{self, SuiteConfig};
use qlattice::verify::{self, tol};
use qlattice::GridWindow;

mod table;

use table::{Cell, Table};

#[derive(Parser)]
#[command(name = "qlattice", version, about = "q-classical orthogonal polynomials on q-quadratic lattices")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate p_n(x(s)) over a grid of s values (or given x values).
    Eval(EvalArgs),
    /// Extract three-term recurrence or structure-relation coefficients.
    Coeffs(CoeffsArgs),
    /// Run a verification suite described by a TOML config file.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct FamilyArgs {
    /// Family name: askey-wilson | q-racah | q-meixner | al-salam-carlitz-1 | al-salam-carlitz-2
    #[arg(long)]
    family: String,
    /// Family parameters as comma-separated key=value pairs, e.g. a=0.2,b=0.3
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    params: String,
    /// The deformation parameter, 0 < q < 1
    #[arg(long)]
    q: f64,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Polynomial degree
    #[arg(long)]
    n: usize,
    /// Grid of s values as start:count (unit steps)
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Explicit comma-separated list of s values
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Explicit comma-separated list of x values (inverted through the lattice)
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output path; stdout when absent
    #[arg(long)]
    out: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoeffKind {
    Ttrr,
    Structure,
}

#[derive(Args)]
struct CoeffsArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Largest degree to extract (rows run n = 0..=n-max)
    #[arg(long = "n-max", default_value_t = 6)]
    n_max: usize,
    /// Coefficient family: ttrr (x p_n recurrence) or structure (mean relation)
    #[arg(long, value_enum)]
    kind: CoeffKind,
    /// Extraction grid as start:count
    #[arg(long, default_value = "0.3:20", allow_hyphen_values = true)]
    grid: String,
    /// Held-out validation tolerance (falls back to QLATTICE_TOL, then the default)
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite configuration file (TOML)
    #[arg(long)]
    config: String,
    /// Report path; overrides the config's output section
    #[arg(long)]
    out: Option<String>,
    /// Seed override for the configured suite
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Coeffs(args) => cmd_coeffs(args),
        Cmd::Verify(args) => cmd_verify(args),
    };
    match code {
        Ok(c) => c,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum CliError {
    /// Bad invocation or configuration: exit 2.
    Usage(String),
    /// Runtime/computational failure: exit 1.
    Run(String),
}

fn parse_params(text: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut map = BTreeMap::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("bad parameter '{part}', expected key=value")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("parameter '{k}' has non-numeric value '{v}'")))?;
        map.insert(k.trim().to_string(), value);
    }
    Ok(map)
}

fn build_family(args: &FamilyArgs) -> Result<FamilySpec, CliError> {
    FamilyName::parse(&args.family).map_err(|e| CliError::Usage(e.to_string()))?;
    let fc = suite::FamilyConfig {
        name: args.family.clone(),
        q: args.q,
        params: parse_params(&args.params)?,
        perturb: None,
    };
    suite::build_family(&fc).map_err(|e| CliError::Run(e.to_string()))
}

fn parse_grid(text: &str) -> Result<GridWindow, CliError> {
    let (s0, count) = text
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("bad grid '{text}', expected start:count")))?;
    let s0: f64 = s0
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid start '{s0}'")))?;
    let count: usize = count
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid count '{count}'")))?;
    GridWindow::new(Complex64::new(s0, 0.0), count).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad list entry '{p}'")))
        })
        .collect()
}

/// Invert x = c1 t + c2/t + c3 (t = q^s) on the principal branch.
fn s_of_x(spec: &FamilySpec, x: f64) -> Result<Complex64, CliError> {
    let lat = spec.lattice();
    let q = spec.q().value();
    let xc = Complex64::new(x, 0.0) - lat.c3;
    let t = if lat.c1.norm() == 0.0 {
        lat.c2 / xc
    } else {
        let disc = (xc * xc - 4.0 * lat.c1 * lat.c2).sqrt();
        (xc + disc) / (2.0 * lat.c1)
    };
    if t.norm() == 0.0 {
        return Err(CliError::Run(format!("x = {x} does not lie on the lattice")));
    }
    Ok(t.ln() / q.ln())
}

fn write_output(text: &str, out: Option<&str>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Run(format!("cannot write {path}: {e}"))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Run(e.to_string()))
        }
    }
}

fn cmd_eval(args: EvalArgs) -> Result<ExitCode, CliError> {
    let spec = build_family(&args.family)?;
    let points: Vec<Complex64> = if let Some(list) = &args.s {
        parse_list(list)?.into_iter().map(|v| Complex64::new(v, 0.0)).collect()
    } else if let Some(list) = &args.x {
        parse_list(list)?
            .into_iter()
            .map(|v| s_of_x(&spec, v))
            .collect::<Result<_, _>>()?
    } else {
        let grid = parse_grid(args.grid.as_deref().unwrap_or("0.3:10"))?;
        grid.points().collect()
    };
    let mut table = Table::new(vec!["s", "x", "p_re", "p_im"]);
    for s in points {
        let x = spec.lattice().x(s);
        let p = spec
            .eval(args.n, s)
            .map_err(|e| CliError::Run(format!("evaluation failed at s = {s}: {e}")))?;
        if !p.re.is_finite() || !p.im.is_finite() {
            return Err(CliError::Run(format!("non-finite value at s = {s}")));
        }
        table.push(vec![
            Cell::Complex(s),
            Cell::Complex(x),
            Cell::Real(p.re),
            Cell::Real(p.im),
        ]);
    }
    let text = match args.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    write_output(&text, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn default_tol(cli: Option<f64>, fallback: f64) -> f64 {
    cli.or_else(|| {
        std::env::var("QLATTICE_TOL").ok().and_then(|v| v.parse().ok())
    })
    .unwrap_or(fallback)
}

fn cmd_coeffs(args: CoeffsArgs) -> Result<ExitCode, CliError> {
    let spec = build_family(&args.family)?;
    let grid = parse_grid(&args.grid)?;
    let tolerance = default_tol(args.tol, tol::TTRR);
    let mut table = match args.kind {
        CoeffKind::Ttrr => {
            let mut t = Table::new(vec!["n", "alpha", "beta", "gamma", "holdout_residual", "note"]);
            for n in 0..=args.n_max {
                match verify::extract_ttrr(&spec, n, &grid, tolerance) {
                    Ok((triple, solved)) => t.push(vec![
                        Cell::Int(n as i64),
                        Cell::Complex(triple.first),
                        Cell::Complex(triple.middle),
                        Cell::Complex(triple.last),
                        Cell::Real(solved.holdout_residual),
                        Cell::Text(if n == 0 { "gamma slot absent".into() } else { String::new() }),
                    ]),
                    Err(e) => t.push(vec![
                        Cell::Int(n as i64),
                        Cell::Text(String::new()),
                        Cell::Text(String::new()),
                        Cell::Text(String::new()),
                        Cell::Text(String::new()),
                        Cell::Text(format!("error: {e}")),
                    ]),
                }
            }
            t
        }
        CoeffKind::Structure => {
            let mut t = Table::new(vec![
                "n",
                "e",
                "f",
                "g",
                "holdout_residual",
                "display_e",
                "display_f",
                "display_g",
                "display_matches",
                "note",
            ]);
            for n in 0..=args.n_max {
                match verify::solve_structure_relation(&spec, n, &grid, tolerance.max(tol::STRUCTURE)) {
                    Ok((triple, solved)) => {
                        let mut row = vec![
                            Cell::Int(n as i64),
                            Cell::Complex(triple.first),
                            Cell::Complex(triple.middle),
                            Cell::Complex(triple.last),
                            Cell::Real(solved.holdout_residual),
                        ];
                        match verify::closed_coeffs(&spec, n, &grid) {
                            Some(Ok(display)) => {
                                let matches = [
                                    (triple.first, display.first),
                                    (triple.middle, display.middle),
                                    (triple.last, display.last),
                                ]
                                .iter()
                                .all(|(got, disp)| {
                                    (got - disp).norm()
                                        / 1.0f64.max(got.norm()).max(disp.norm())
                                        < tol::DISPLAY_MATCH
                                });
                                row.push(Cell::Complex(display.first));
                                row.push(Cell::Complex(display.middle));
                                row.push(Cell::Complex(display.last));
                                row.push(Cell::Bool(matches));
                                row.push(Cell::Text(String::new()));
                            }
                            Some(Err(e)) => {
                                for _ in 0..3 {
                                    row.push(Cell::Text(String::new()));
                                }
                                row.push(Cell::Text(String::new()));
                                row.push(Cell::Text(format!("display unavailable: {e}")));
                            }
                            None => {
                                for _ in 0..3 {
                                    row.push(Cell::Text(String::new()));
                                }
                                row.push(Cell::Text(String::new()));
                                row.push(Cell::Text("no display for this degree".into()));
                            }
                        }
                        t.push(row);
                    }
                    Err(e) => {
                        let mut row = vec![Cell::Int(n as i64)];
                        for _ in 0..8 {
                            row.push(Cell::Text(String::new()));
                        }
                        row.push(Cell::Text(format!("error: {e}")));
                        t.push(row);
                    }
                }
            }
            t
        }
    };
    table.finish();
    let text = match args.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    write_output(&text, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", args.config)))?;
    let mut cfg: SuiteConfig =
        suite::parse_config(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let reports = suite::run_suite(&cfg);
    let json = suite::reports_to_json(&reports);
    let out_path = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| o.path.clone()));
    write_output(&json, out_path.as_deref())?;
    let failed: Vec<&qlattice::CheckReport> = reports.iter().filter(|r| !r.passed).collect();
    if failed.is_empty() {
        eprintln!("verify: {} checks passed", reports.len());
        Ok(ExitCode::SUCCESS)
    } else {
        for r in &failed {
            eprintln!(
                "verify: FAILED {} [{}{}] residual {:.3e} (tolerance {:.1e})",
                r.check_id,
                r.family,
                r.n.map(|n| format!(", n = {n}")).unwrap_or_default(),
                r.max_residual,
                r.tolerance
            );
        }
        eprintln!("verify: {} of {} checks failed", failed.len(), reports.len());
        Ok(ExitCode::from(1))
    }
}
