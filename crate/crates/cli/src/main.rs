//! `higgs`: tables, interbasis matrices, wavefunction values and self-checks
//! for the Higgs oscillator on the upper hemisphere.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use higgs_core::basis::{enumerate_level, BasisState, BasisTag, ModelParams, Wavefunction};
use higgs_core::geometry::{AnglePair, SphereSystem};
use higgs_core::interbasis::{
    coefficient_matrix_with, overlap_numeric, CoefficientMatrix, CoefficientOptions, PhaseBranch, Route,
    MAX_LEVEL_CLOSED, PHASE_BRANCH,
};
use higgs_core::verify::{run_verification, VerifyConfig};
use higgs_core::Error;
use serde::Serialize;

use output::{float, Cplx};

const MEASURE: &str = "sin(theta) dtheta dphi on upper hemisphere";
const ORDERING: &str = "entry[i][j] = <to_j | from_i>; rows are from-basis states, columns to-basis states, \
                        each in canonical level order (b1 by ascending m, b2 by ascending n1, b3 by ascending l1)";

const EXIT_NUMERIC: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "higgs", version, about = "Higgs oscillator on the two-sphere", allow_negative_numbers = true)]
struct Cli {
    /// Oscillator strength.
    #[arg(long, global = true, default_value_t = 1.0)]
    alpha: f64,

    /// Sphere radius.
    #[arg(long, global = true, default_value_t = 1.0)]
    radius: f64,

    /// Highest level included in tables and checks.
    #[arg(long, global = true, default_value_t = 4, value_parser = clap::value_parser!(u32).range(0..=12))]
    nmax: u32,

    /// Gauss-Legendre order per axis; quadrature also runs at twice this.
    #[arg(long, global = true, default_value_t = 128, value_parser = clap::value_parser!(u64).range(32..=1024))]
    quad_order: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Use the opposite phase branch (diagnostics only).
    #[arg(long, global = true, hide = true)]
    flip_phase_branch: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RouteArg {
    Closed,
    Cg,
    Numeric,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Energy levels with their degeneracy in every basis.
    Energies,
    /// Interbasis expansion matrix of one level.
    Coeffs {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = parse_tag)]
        from: BasisTag,
        #[arg(long, value_parser = parse_tag)]
        to: BasisTag,
        #[arg(long, value_enum, default_value_t = RouteArg::Closed)]
        route: RouteArg,
    },
    /// Wavefunction values at the points of a CSV file with header `system,angle1,angle2`.
    Eval {
        /// State such as `b1:0,2` (n_r, m), `b2:1,0` (n1, n2) or `b3:0,1` (l1, l2).
        #[arg(long, value_parser = parse_state)]
        state: BasisState,
        #[arg(long)]
        points: PathBuf,
    },
    /// Overlap of two states by hemisphere quadrature.
    Overlap {
        #[arg(long, value_parser = parse_state)]
        bra: BasisState,
        #[arg(long, value_parser = parse_state)]
        ket: BasisState,
    },
    /// Run the self-check battery; exits 2 if any check fails.
    Verify,
}

fn parse_tag(s: &str) -> Result<BasisTag, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_state(s: &str) -> Result<BasisState, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::InvalidCoupling(_) | Error::OutOfDomain(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

/// A rendered report plus whether its numbers passed.
struct Report {
    bytes: Vec<u8>,
    numeric_failure: Option<String>,
}

impl Report {
    fn ok(bytes: Vec<u8>) -> Self {
        Report { bytes, numeric_failure: None }
    }
}

#[derive(Serialize)]
struct ConfigEcho {
    alpha: f64,
    radius: f64,
    nu: f64,
    nmax: u32,
    quad_order: u64,
    phase_branch: String,
}

struct Run {
    params: ModelParams,
    nmax: u32,
    quad_order: usize,
    format: Format,
    branch: PhaseBranch,
}

impl Run {
    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            alpha: self.params.alpha(),
            radius: self.params.radius(),
            nu: self.params.nu(),
            nmax: self.nmax,
            quad_order: self.quad_order as u64,
            phase_branch: self.branch.to_string(),
        }
    }

    fn options(&self) -> CoefficientOptions {
        CoefficientOptions { branch: self.branch, quad_order: self.quad_order }
    }
}

#[derive(Serialize)]
struct LevelSizes {
    b1: usize,
    b2: usize,
    b3: usize,
}

#[derive(Serialize)]
struct EnergyRow {
    n: u32,
    energy: f64,
    epsilon: f64,
    level_size: LevelSizes,
}

#[derive(Serialize)]
struct EnergiesReport {
    command: &'static str,
    config: ConfigEcho,
    rows: Vec<EnergyRow>,
}

fn cmd_energies(run: &Run) -> Report {
    let rows: Vec<EnergyRow> = (0..=run.nmax)
        .map(|n| {
            let size = |t| enumerate_level(n, t).len();
            EnergyRow {
                n,
                energy: run.params.energy(n),
                epsilon: run.params.epsilon(n),
                level_size: LevelSizes { b1: size(BasisTag::B1), b2: size(BasisTag::B2), b3: size(BasisTag::B3) },
            }
        })
        .collect();
    let bytes = match run.format {
        Format::Json => output::json(&EnergiesReport { command: "energies", config: run.echo(), rows }),
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        float(r.energy),
                        float(r.epsilon),
                        r.level_size.b1.to_string(),
                        r.level_size.b2.to_string(),
                        r.level_size.b3.to_string(),
                    ]
                })
                .collect();
            output::csv(&["n", "energy", "epsilon", "size_b1", "size_b2", "size_b3"], &body)
        }
    };
    Report::ok(bytes)
}

#[derive(Serialize)]
struct Conventions {
    ordering: &'static str,
    phase_branch: String,
    measure: &'static str,
}

#[derive(Serialize)]
struct MatrixDump {
    route: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    unitarity_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadrature_error_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cols: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<Vec<Cplx>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl MatrixDump {
    fn from_matrix(m: &CoefficientMatrix) -> Self {
        MatrixDump {
            route: m.route.to_string(),
            unitarity_defect: Some(m.unitarity_defect()),
            quadrature_error_estimate: m.error_estimate,
            rows: Some(m.rows.iter().map(|s| s.to_string()).collect()),
            cols: Some(m.cols.iter().map(|s| s.to_string()).collect()),
            entries: Some((0..m.dim()).map(|i| m.row(i).iter().map(|&z| z.into()).collect()).collect()),
            error: None,
        }
    }

    fn failed(route: Route, e: &Error) -> Self {
        MatrixDump {
            route: route.to_string(),
            unitarity_defect: None,
            quadrature_error_estimate: None,
            rows: None,
            cols: None,
            entries: None,
            error: Some(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct RouteComparison {
    reference: String,
    other: String,
    max_abs_diff: f64,
}

#[derive(Serialize)]
struct CoeffsReport {
    command: &'static str,
    config: ConfigEcho,
    n: u32,
    from: String,
    to: String,
    conventions: Conventions,
    matrices: Vec<MatrixDump>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    route_comparison: Vec<RouteComparison>,
}

fn cmd_coeffs(run: &Run, n: u32, from: BasisTag, to: BasisTag, route: RouteArg) -> Result<Report, Failure> {
    if n > MAX_LEVEL_CLOSED {
        return Err(Failure::Config(format!("level {n} exceeds the supported maximum {MAX_LEVEL_CLOSED}")));
    }
    let routes: Vec<Route> = match route {
        RouteArg::Closed => vec![Route::ClosedForm],
        RouteArg::Cg => vec![Route::Cg],
        RouteArg::Numeric => vec![Route::Numeric],
        RouteArg::All => Route::ALL.to_vec(),
    };
    let opts = run.options();
    let mut computed = Vec::new();
    let mut dumps = Vec::new();
    let mut numeric_failure = None;
    for r in routes {
        match coefficient_matrix_with(n, from, to, run.params.nu(), r, &opts) {
            Ok(m) => {
                dumps.push(MatrixDump::from_matrix(&m));
                computed.push(m);
            }
            Err(e) => match Failure::from(e.clone()) {
                Failure::Config(msg) => return Err(Failure::Config(msg)),
                Failure::Numeric(msg) => {
                    dumps.push(MatrixDump::failed(r, &e));
                    numeric_failure.get_or_insert(format!("route {r}: {msg}"));
                }
            },
        }
    }
    let mut comparison = Vec::new();
    if let Some((reference, others)) = computed.split_first() {
        for other in others {
            comparison.push(RouteComparison {
                reference: reference.route.to_string(),
                other: other.route.to_string(),
                max_abs_diff: reference.max_abs_diff(other)?,
            });
        }
    }

    let bytes = match run.format {
        Format::Json => output::json(&CoeffsReport {
            command: "coeffs",
            config: run.echo(),
            n,
            from: from.to_string(),
            to: to.to_string(),
            conventions: Conventions { ordering: ORDERING, phase_branch: run.branch.to_string(), measure: MEASURE },
            matrices: dumps,
            route_comparison: comparison,
        }),
        Format::Csv => {
            let mut body = Vec::new();
            for m in &computed {
                for (i, row) in m.rows.iter().enumerate() {
                    for (j, col) in m.cols.iter().enumerate() {
                        let z = m.get(i, j);
                        body.push(vec![
                            m.route.to_string(),
                            i.to_string(),
                            j.to_string(),
                            row.to_string(),
                            col.to_string(),
                            float(z.re),
                            float(z.im),
                        ]);
                    }
                }
            }
            output::csv(&["route", "row", "col", "from_state", "to_state", "re", "im"], &body)
        }
    };
    Ok(Report { bytes, numeric_failure })
}

#[derive(Serialize)]
struct EvalRow {
    line: u64,
    system: String,
    angle1: String,
    angle2: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<Cplx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct EvalReport {
    command: &'static str,
    config: ConfigEcho,
    state: String,
    rows: Vec<EvalRow>,
}

fn eval_point(w: &Wavefunction, system: &str, a1: &str, a2: &str) -> Result<Cplx, String> {
    let system: SphereSystem = system.parse().map_err(|e: Error| e.to_string())?;
    let angle = |s: &str| s.parse::<f64>().map_err(|_| format!("not a number: {s:?}"));
    let (a1, a2) = (angle(a1)?, angle(a2)?);
    let p = match system {
        SphereSystem::S1 => AnglePair::s1_wrapped(a1, a2),
        other => AnglePair::new(other, a1, a2),
    }
    .map_err(|e| e.to_string())?;
    w.eval(&p).map(Cplx::from).map_err(|e| e.to_string())
}

fn read_points(path: &Path) -> Result<Vec<(u64, [String; 3])>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let header = reader.headers().map_err(|e| Failure::Config(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["system", "angle1", "angle2"] {
        return Err(Failure::Config(format!("points header must be system,angle1,angle2, found {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Failure::Config(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |k: usize| rec.get(k).unwrap_or("").to_string();
        rows.push((line, [field(0), field(1), field(2)]));
    }
    Ok(rows)
}

fn cmd_eval(run: &Run, state: BasisState, points: &Path) -> Result<Report, Failure> {
    let w = Wavefunction::new(state, run.params.nu())?;
    let rows: Vec<EvalRow> = read_points(points)?
        .into_iter()
        .map(|(line, [system, angle1, angle2])| {
            let (value, error) = match eval_point(&w, &system, &angle1, &angle2) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e)),
            };
            EvalRow { line, system, angle1, angle2, value, error }
        })
        .collect();
    let bytes = match run.format {
        Format::Json => {
            output::json(&EvalReport { command: "eval", config: run.echo(), state: state.to_string(), rows })
        }
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let (re, im) = r.value.map_or((String::new(), String::new()), |v| (float(v.re), float(v.im)));
                    vec![
                        r.system.clone(),
                        r.angle1.clone(),
                        r.angle2.clone(),
                        re,
                        im,
                        r.error.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            output::csv(&["system", "angle1", "angle2", "re", "im", "error"], &body)
        }
    };
    Ok(Report::ok(bytes))
}

#[derive(Serialize)]
struct OverlapReport {
    command: &'static str,
    config: ConfigEcho,
    bra: String,
    ket: String,
    measure: &'static str,
    value: Cplx,
    error_estimate: f64,
    orders: [u64; 2],
}

fn cmd_overlap(run: &Run, bra: BasisState, ket: BasisState) -> Result<Report, Failure> {
    let r = overlap_numeric(bra, ket, &run.params, run.quad_order)?;
    let orders = [r.coarse_order as u64, 2 * r.coarse_order as u64];
    let bytes = match run.format {
        Format::Json => output::json(&OverlapReport {
            command: "overlap",
            config: run.echo(),
            bra: bra.to_string(),
            ket: ket.to_string(),
            measure: MEASURE,
            value: r.value.into(),
            error_estimate: r.error_estimate,
            orders,
        }),
        Format::Csv => output::csv(
            &["bra", "ket", "re", "im", "error_estimate"],
            &[vec![bra.to_string(), ket.to_string(), float(r.value.re), float(r.value.im), float(r.error_estimate)]],
        ),
    };
    Ok(Report::ok(bytes))
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    config: ConfigEcho,
    passed: bool,
    checks: Vec<higgs_core::verify::CheckOutcome>,
}

fn cmd_verify(run: &Run) -> Report {
    let report = run_verification(&VerifyConfig {
        params: run.params,
        nmax: run.nmax,
        quad_order: run.quad_order,
        branch: run.branch,
    });
    let passed = report.all_passed();
    let failed: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: observed {} vs threshold {}", c.name, float(c.observed), float(c.threshold)))
        .collect();
    let bytes = match run.format {
        Format::Json => {
            output::json(&VerifyReport { command: "verify", config: run.echo(), passed, checks: report.checks })
        }
        Format::Csv => {
            let body: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        float(c.observed),
                        float(c.threshold),
                        c.passed.to_string(),
                        c.detail.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            output::csv(&["check", "observed", "threshold", "passed", "detail"], &body)
        }
    };
    Report { bytes, numeric_failure: (!passed).then(|| failed.join("; ")) }
}

fn execute(cli: &Cli) -> Result<Report, Failure> {
    let params = ModelParams::new(cli.alpha, cli.radius)?;
    let run = Run {
        params,
        nmax: cli.nmax,
        quad_order: cli.quad_order as usize,
        format: cli.format,
        branch: if cli.flip_phase_branch { PHASE_BRANCH.flipped() } else { PHASE_BRANCH },
    };
    match &cli.command {
        Command::Energies => Ok(cmd_energies(&run)),
        Command::Coeffs { n, from, to, route } => cmd_coeffs(&run, *n, *from, *to, *route),
        Command::Eval { state, points } => cmd_eval(&run, *state, points),
        Command::Overlap { bra, ket } => cmd_overlap(&run, *bra, *ket),
        Command::Verify => Ok(cmd_verify(&run)),
    }
}

fn emit(bytes: &[u8], out: Option<&Path>) -> std::io::Result<()> {
    use std::io::Write;
    match out {
        Some(path) => fs::write(path, bytes),
        None => std::io::stdout().lock().write_all(bytes),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            if let Err(e) = emit(&report.bytes, cli.out.as_deref()) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
            match report.numeric_failure {
                Some(msg) => {
                    eprintln!("numerical check failed: {msg}");
                    ExitCode::from(EXIT_NUMERIC)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
