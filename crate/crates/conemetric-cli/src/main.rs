//! Command-line front door: validate space files against the cone-metric
//! axioms, scalarize vectors, reduce vector tables to scalar ones, and run
//! certified fixed-point solves.
//!
//! Machine-readable output is JSON on stdout; human diagnostics go to
//! stderr. Exit codes: 0 success, 1 axiom/validation failure, 2 input
//! error, 3 solver error (not Kannan, not contractive, divergence).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use conemetric::solver::resolve_targets;
use conemetric::{
    AxiomReport, Cone, Error as LibError, FiniteConeSpace, MapSpec, Outcome, Point, Problem,
    ReducedTable, ScalarizationContext, SolveConfig, SolveReport,
};

const EXIT_AXIOM_FAILURE: u8 = 1;
const EXIT_INPUT_ERROR: u8 = 2;
const EXIT_SOLVER_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "conemetric",
    version,
    about = "Cone-metric validation, scalarization and certified fixed-point solving"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a space file against the cone-metric and/or rectangular axioms.
    Validate {
        /// Space JSON file.
        #[arg(long)]
        space: PathBuf,
        /// Which axiom family to check.
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
    },
    /// Evaluate the nonlinear scalarization of a vector.
    Scalarize {
        /// Cone as inline JSON or a path to a JSON file.
        #[arg(long)]
        cone: String,
        /// Scalarization direction, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        e: String,
        /// Vector to scalarize, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Reduce a vector-valued distance table to a scalar one.
    Reduce {
        #[arg(long)]
        space: PathBuf,
        /// Scalarization direction, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        e: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a certified Picard solve and print the report as JSON.
    Solve {
        /// Space JSON file; required for finite-table maps.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Map JSON file.
        #[arg(long)]
        map: PathBuf,
        /// Start point: a label for finite spaces, comma-separated
        /// coordinates for affine maps.
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        /// Write the orbit trace as CSV to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SolveKind::Kannan)]
        mode: SolveKind,
        /// Scalarization direction override, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        e: Option<String>,
        /// Contraction constant for banach mode; estimated when omitted.
        #[arg(long)]
        k: Option<f64>,
        /// Sampling box lower corner for affine maps, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        box_lo: Option<String>,
        /// Sampling box upper corner for affine maps, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        box_hi: Option<String>,
        /// Run the orbit even when the Kannan precondition fails.
        #[arg(long, default_value_t = false)]
        unsound: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Cms,
    Rcms,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveKind {
    Kannan,
    Banach,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT_ERROR,
            message: message.into(),
        }
    }

    fn solver(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_SOLVER_ERROR,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Validate { space, mode } => validate(&space, mode),
        Command::Scalarize { cone, e, y } => scalarize(&cone, &e, &y),
        Command::Reduce { space, e, out } => reduce(&space, &e, out.as_deref()),
        Command::Solve {
            space,
            map,
            x0,
            tol,
            max_iter,
            trace,
            seed,
            mode,
            e,
            k,
            box_lo,
            box_hi,
            unsound,
        } => solve(SolveArgs {
            space,
            map,
            x0,
            tol,
            max_iter,
            trace,
            seed,
            mode,
            e,
            k,
            box_lo,
            box_hi,
            unsound,
        }),
    }
}

fn load_space(path: &Path) -> Result<FiniteConeSpace, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("cannot parse {}: {e}", path.display())))
}

fn load_map(path: &Path) -> Result<MapSpec, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("cannot parse {}: {e}", path.display())))
}

fn parse_csv(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Failure::input(format!("bad {what} component {t:?}: {e}")))
        })
        .collect()
}

fn validate(path: &Path, mode: Mode) -> Result<u8, Failure> {
    let space = load_space(path)?;
    let mut reports: Vec<AxiomReport> = Vec::new();
    if mode != Mode::Rcms {
        reports.extend(space.validate_cms());
    }
    if mode != Mode::Cms {
        reports.extend(space.validate_rcms());
    }
    for report in &reports {
        if report.passed() {
            eprintln!("{} PASS", report.axiom);
        } else {
            eprintln!(
                "{} FAIL ({} witnesses)",
                report.axiom,
                report.witnesses.len()
            );
            for w in &report.witnesses {
                let mut line = format!("  ({})", w.points.join(","));
                let _ = write!(line, ": {:?}", w.lhs);
                if !w.rhs.is_empty() {
                    let _ = write!(line, " vs {:?}", w.rhs);
                }
                eprintln!("{line}");
            }
        }
    }
    let passed = reports.iter().all(AxiomReport::passed);
    let payload = serde_json::json!({
        "space": path.display().to_string(),
        "mode": match mode { Mode::Cms => "cms", Mode::Rcms => "rcms", Mode::Both => "both" },
        "passed": passed,
        "axioms": reports,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&payload).expect("report serializes")
    );
    Ok(if passed { 0 } else { EXIT_AXIOM_FAILURE })
}

fn parse_cone(arg: &str) -> Result<Cone, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Failure::input(format!("cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("cannot parse cone: {e}")))
}

/// Round to 12 significant digits and print the shortest representation of
/// the rounded value.
fn format_sig12(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn scalarize(cone_arg: &str, e_arg: &str, y_arg: &str) -> Result<u8, Failure> {
    let cone = parse_cone(cone_arg)?;
    let e = parse_csv(e_arg, "direction")?;
    let y = parse_csv(y_arg, "vector")?;
    let ctx = ScalarizationContext::new(cone, e).map_err(|err| Failure::input(err.to_string()))?;
    let value = ctx.xi(&y).map_err(|err| Failure::input(err.to_string()))?;
    println!("{}", format_sig12(value));
    Ok(0)
}

fn reduce(path: &Path, e_arg: &str, out: Option<&Path>) -> Result<u8, Failure> {
    let space = load_space(path)?;
    let e = parse_csv(e_arg, "direction")?;
    let ctx = ScalarizationContext::new(space.cone().clone(), e)
        .map_err(|err| Failure::input(err.to_string()))?;
    let table = space
        .reduce(&ctx)
        .map_err(|err| Failure::input(err.to_string()))?;
    let reduced = ReducedTable {
        labels: space.labels().to_vec(),
        table,
    };
    let json = serde_json::to_string_pretty(&reduced).expect("table serializes");
    match out {
        Some(path) => fs::write(path, json.as_bytes())
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    Ok(0)
}

struct SolveArgs {
    space: Option<PathBuf>,
    map: PathBuf,
    x0: String,
    tol: f64,
    max_iter: usize,
    trace: Option<PathBuf>,
    seed: u64,
    mode: SolveKind,
    e: Option<String>,
    k: Option<f64>,
    box_lo: Option<String>,
    box_hi: Option<String>,
    unsound: bool,
}

fn solve(args: SolveArgs) -> Result<u8, Failure> {
    let map = load_map(&args.map)?;
    let sample_box = match (&args.box_lo, &args.box_hi) {
        (Some(lo), Some(hi)) => Some((parse_csv(lo, "box-lo")?, parse_csv(hi, "box-hi")?)),
        (None, None) => None,
        _ => {
            return Err(Failure::input(
                "--box-lo and --box-hi must be given together",
            ))
        }
    };
    let cfg = SolveConfig {
        max_iter: args.max_iter,
        tol: args.tol,
        seed: args.seed,
        allow_unsound: args.unsound,
        sample_box,
        ..SolveConfig::default()
    };

    // Assemble the problem; the space file is only meaningful for
    // finite-table maps.
    let space_data = match &map {
        MapSpec::FiniteTable { .. } => {
            let path = args
                .space
                .as_ref()
                .ok_or_else(|| Failure::input("finite-table maps need --space"))?;
            Some(load_space(path)?)
        }
        MapSpec::Affine { .. } => None,
    };

    let report = match &map {
        MapSpec::FiniteTable { targets } => {
            let space = space_data.as_ref().expect("loaded above");
            let e = match &args.e {
                Some(text) => parse_csv(text, "direction")?,
                None => space.cone().interior_direction(),
            };
            let ctx = ScalarizationContext::new(space.cone().clone(), e)
                .map_err(|err| Failure::input(err.to_string()))?;
            let targets =
                resolve_targets(targets, space).map_err(|err| Failure::input(err.to_string()))?;
            let problem = Problem::finite_with_targets(space, &ctx, targets)
                .map_err(|err| Failure::input(err.to_string()))?;
            let x0 = Point::Label(args.x0.clone());
            run_solve(&problem, &x0, &cfg, args.mode, args.k)?
        }
        MapSpec::Affine { matrix, offset } => {
            let dim = matrix.len();
            let problem = match &args.e {
                Some(text) => {
                    let e = parse_csv(text, "direction")?;
                    let cone = Cone::orthant(dim).map_err(|err| Failure::input(err.to_string()))?;
                    let ctx = ScalarizationContext::new(cone, e)
                        .map_err(|err| Failure::input(err.to_string()))?;
                    Problem::affine(matrix.clone(), offset.clone(), ctx)
                }
                None => Problem::affine_default(matrix.clone(), offset.clone()),
            }
            .map_err(|err| Failure::input(err.to_string()))?;
            let x0 = Point::Coords(parse_csv(&args.x0, "x0")?);
            run_solve(&problem, &x0, &cfg, args.mode, args.k)?
        }
    };

    if let Some(path) = &args.trace {
        write_trace(path, &report)?;
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(match report.outcome {
        Outcome::NotKannan => EXIT_SOLVER_ERROR,
        _ => 0,
    })
}

fn run_solve(
    problem: &Problem,
    x0: &Point,
    cfg: &SolveConfig,
    mode: SolveKind,
    k: Option<f64>,
) -> Result<SolveReport, Failure> {
    let result = match mode {
        SolveKind::Kannan => problem.kannan_solve(x0, cfg),
        SolveKind::Banach => problem.banach_solve(x0, cfg, k),
    };
    result.map_err(|err| match err {
        LibError::NotContractive { .. }
        | LibError::Divergence { .. }
        | LibError::EstimationFailed(_) => Failure::solver(err.to_string()),
        other => Failure::input(other.to_string()),
    })
}

/// Orbit trace CSV: one row per iteration, floats at 17 significant digits.
/// `bound` is the certified tail bound at that step and
/// `cumulative_iterates` the running sum of step distances (orbit path
/// length so far).
fn write_trace(path: &Path, report: &SolveReport) -> Result<(), Failure> {
    let mut out = String::from("n,d_step,bound,cumulative_iterates\n");
    let d0 = report.orbit_trace.first().map_or(0.0, |t| t.d_step);
    let mut cumulative = 0.0;
    for entry in &report.orbit_trace {
        let bound = if report.r.is_finite() && report.r < 1.0 {
            report.r.powi(entry.n as i32) / (1.0 - report.r) * d0
        } else {
            f64::INFINITY
        };
        cumulative += entry.d_step;
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e}",
            entry.n, entry.d_step, bound, cumulative
        );
    }
    fs::write(path, out.as_bytes())
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}
