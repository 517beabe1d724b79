use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use polycone::analytic::{variant_value, Step1DSolution};
use polycone::cone::{certify, ConeKind, DEFAULT_TOLERANCE};
use polycone::grid::{sample, Grid, GridFunction};
use polycone::output::{contour_levels, contour_lines, gradient_histogram, gradient_samples};
use polycone::problems::{build, grid_part, Norm, ProblemKind, ProblemSpec, QuadratureRule};
use polycone::solver::{solve, Solution, SolverSettings, Status};
use polycone::stencil::StencilSet;
use polycone::targets::{self, TargetParams};
use polycone::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_CERTIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "polycone", version, about = "Convexity-constrained variational problems on grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project a target onto the convex cone in a chosen norm.
    Project(ProblemArgs),
    /// Solve a screening problem, the 1D source problem, or any spec file.
    Solve(ProblemArgs),
    /// Check a grid function against the polyhedral cone.
    Certify(CertifyArgs),
    /// Error and timing table for the linear monopolist variant.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
enum NormArg {
    L1,
    L2,
    Linf,
    H1,
    #[value(name = "h1_0")]
    H1Zero,
    #[value(name = "h1_gradbox")]
    H1Gradbox,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L1 => Norm::L1,
            NormArg::L2 => Norm::L2,
            NormArg::Linf => Norm::Linf,
            NormArg::H1 => Norm::H1,
            NormArg::H1Zero => Norm::H1Zero,
            NormArg::H1Gradbox => Norm::H1Gradbox,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
enum ConeArg {
    Outer,
    Inner,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
enum QuadArg {
    Zeroth,
    Trapezoidal,
}

impl From<QuadArg> for QuadratureRule {
    fn from(q: QuadArg) -> Self {
        match q {
            QuadArg::Zeroth => QuadratureRule::Zeroth,
            QuadArg::Trapezoidal => QuadratureRule::Trapezoidal,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
struct GridArgs {
    /// Nodes per axis.
    #[arg(long, default_value_t = 21)]
    n: usize,
    /// Interval `a,b` used for every axis.
    #[arg(long, allow_hyphen_values = true)]
    bounds: Option<String>,
    /// Grid dimension (1 or 2); inferred from the problem when omitted.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args, Clone, Debug, Serialize)]
struct TargetArgs {
    /// Builtin target or source function.
    #[arg(long)]
    target: Option<String>,
    /// Target values as CSV (`value` header, one value per node).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta: f64,
}

#[derive(Args, Clone, Debug, Serialize)]
struct ProblemArgs {
    /// Problem spec JSON; overrides the problem flags below.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// monopolist, monopolist_variant, rochet_chone, step1d, convex_envelope, projection, custom_1d_source
    #[arg(long)]
    kind: Option<String>,
    #[arg(long, value_enum)]
    norm: Option<NormArg>,
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 1)]
    width: usize,
    #[arg(long, value_enum, default_value = "outer")]
    cone: ConeArg,
    #[arg(long, default_value_t = 0.0)]
    strictness_weight: f64,
    #[arg(long, value_enum, default_value = "trapezoidal")]
    quadrature: QuadArg,
    /// Monopolist coefficient, or the step height for step1d.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[arg(long)]
    no_polish: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Histogram bins per axis.
    #[arg(long, default_value_t = 32)]
    bins: usize,
    /// Number of contour levels.
    #[arg(long, default_value_t = 10)]
    levels: usize,
}

#[derive(Args, Clone, Debug, Serialize)]
struct CertifyArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 1)]
    width: usize,
    /// Only the two coordinate directions.
    #[arg(long)]
    axes: bool,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize)]
struct BenchArgs {
    /// Comma-separated grid sizes.
    #[arg(long, default_value = "8,16,32,64")]
    ns: String,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Leave wall times out of the tables so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// A failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(EXIT_USAGE, e.to_string())
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail(EXIT_USAGE, e.to_string())
    }
}

#[derive(Serialize)]
struct SolutionSummary {
    status: Status,
    objective: f64,
    /// Objective including constants dropped during assembly.
    functional: f64,
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
    polished: bool,
}

#[derive(Serialize)]
struct RunRecord<'a, A: Serialize> {
    command: &'a str,
    args: &'a A,
    #[serde(skip_serializing_if = "Option::is_none")]
    settings: Option<&'a SolverSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solution: Option<SolutionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic_linf_error: Option<f64>,
    wall_time_s: f64,
    timestamp_unix_s: u64,
    outputs: Vec<String>,
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, Fail> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), Fail> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.written.push(path.display().to_string());
        Ok(())
    }

    fn finish<A: Serialize>(mut self, mut record: RunRecord<'_, A>, started: Instant) -> Result<(), Fail> {
        let path = self.dir.join("run.json");
        self.written.push(path.display().to_string());
        record.outputs = self.written;
        record.wall_time_s = started.elapsed().as_secs_f64();
        record.timestamp_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        fs::write(path, serde_json::to_string_pretty(&record).expect("records serialize") + "\n")?;
        Ok(())
    }
}

fn record<'a, A: Serialize>(command: &'a str, args: &'a A) -> RunRecord<'a, A> {
    RunRecord {
        command,
        args,
        settings: None,
        solution: None,
        analytic_linf_error: None,
        wall_time_s: 0.0,
        timestamp_unix_s: 0,
        outputs: vec![],
    }
}

fn usage(msg: impl Into<String>) -> Fail {
    Fail(EXIT_USAGE, msg.into())
}

fn make_grid(args: &GridArgs, default_dim: usize) -> Result<Grid, Fail> {
    let dim = args.dim.unwrap_or(default_dim);
    let (a, b) = match &args.bounds {
        Some(s) => {
            let parts: Vec<&str> = s.split(',').map(str::trim).collect();
            let parse = |t: &str| t.parse::<f64>().map_err(|_| usage(format!("bad bound '{t}'")));
            match parts.as_slice() {
                [a, b] => (parse(a)?, parse(b)?),
                _ => return Err(usage(format!("--bounds expects 'a,b', got '{s}'"))),
            }
        }
        None if dim == 1 => (-1.0, 1.0),
        None => (0.0, 1.0),
    };
    Ok(Grid::new(&vec![(a, b); dim], args.n)?)
}

fn target_function(args: &TargetArgs, grid: &Grid, c: f64) -> Result<Option<GridFunction>, Fail> {
    match (&args.target, &args.input) {
        (Some(_), Some(_)) => Err(usage("give either --target or --input, not both")),
        (Some(name), None) => {
            let params = TargetParams { alpha: args.alpha, theta: args.theta, c };
            Ok(Some(sample(grid, targets::builtin(name, params)?)?))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            Ok(Some(GridFunction::from_csv(grid.clone(), &text)?))
        }
        (None, None) => Ok(None),
    }
}

fn default_dim(target: Option<&str>) -> usize {
    match target {
        Some("sin_pi" | "step") => 1,
        _ => 2,
    }
}

fn problem_spec(args: &ProblemArgs, command: &str) -> Result<ProblemSpec, Fail> {
    if let Some(path) = &args.spec {
        return Ok(ProblemSpec::from_json_file(path)?);
    }
    let kind_name = match (command, args.kind.as_deref()) {
        ("project", None | Some("projection")) => "projection",
        ("project", Some(k)) => return Err(usage(format!("project does not take --kind {k}"))),
        (_, Some(k)) => k,
        (_, None) => return Err(usage("solve needs --kind or --spec")),
    };
    let (kind, dim) = match kind_name {
        "step1d" => (ProblemKind::Custom1dSource, 1),
        other => {
            let kind: ProblemKind = other.parse()?;
            let dim = match kind {
                ProblemKind::Custom1dSource => 1,
                ProblemKind::Projection | ProblemKind::ConvexEnvelope => default_dim(args.target.target.as_deref()),
                _ => 2,
            };
            (kind, dim)
        }
    };
    let grid = make_grid(&args.grid, dim)?;
    let mut target = target_function(&args.target, &grid, args.c)?;
    if kind_name == "step1d" && target.is_none() {
        target = Some(sample(&grid, targets::step(args.c))?);
    }
    let spec = ProblemSpec {
        kind,
        norm: args.norm.map(Norm::from),
        target,
        grid,
        width: args.width,
        cone: match args.cone {
            ConeArg::Outer => ConeKind::Outer,
            ConeArg::Inner => ConeKind::Inner,
        },
        quadrature: args.quadrature.into(),
        c: args.c,
        strictness_weight: args.strictness_weight,
    };
    if kind == ProblemKind::Projection && spec.norm.is_none() {
        return Err(usage("projection needs --norm"));
    }
    spec.validate()?;
    Ok(spec)
}

fn settings(eps: f64, max_iter: usize, polish: bool) -> SolverSettings {
    SolverSettings { max_iter, polish, ..SolverSettings::with_eps(eps) }
}

fn summary(sol: &Solution, constant: f64) -> SolutionSummary {
    SolutionSummary {
        status: sol.status,
        objective: sol.objective,
        functional: sol.objective + constant,
        iterations: sol.iterations,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        polished: sol.polished,
    }
}

/// L∞ distance to the closed-form solution, when one is known for this spec.
fn analytic_error(spec: &ProblemSpec, u: &GridFunction, kind_name: Option<&str>) -> Option<f64> {
    let g = &spec.grid;
    let exact: Vec<f64> = match spec.kind {
        ProblemKind::MonopolistVariant if g.bounds() == [(0.0, 1.0), (0.0, 1.0)] => {
            (0..g.node_count()).map(|k| {
                let p = g.point(k);
                variant_value(p[0], p[1])
            })
            .collect()
        }
        ProblemKind::Custom1dSource if kind_name == Some("step1d") && g.bounds() == [(-1.0, 1.0)] => {
            let s = Step1DSolution::optimal(spec.c).ok()?;
            (0..g.node_count()).map(|k| s.value(g.point(k)[0])).collect::<Result<_, _>>().ok()?
        }
        _ => return None,
    };
    Some(exact.iter().zip(&u.values).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs())))
}

fn run_problem(command: &str, args: &ProblemArgs) -> Result<(), Fail> {
    let started = Instant::now();
    let spec = problem_spec(args, command)?;
    let qp = build(&spec)?;
    let set = settings(args.eps, args.max_iter, !args.no_polish);
    let sol = solve(&qp, &set).map_err(|e| Fail(EXIT_SOLVER, e.to_string()))?;
    let u = grid_part(&spec, &sol.x)?;

    let mut out = Outputs::new(&args.out)?;
    out.write("solution.csv", &u.to_csv())?;
    out.write("solution.json", &(sol.to_json() + "\n"))?;
    if command == "solve" {
        let grads = gradient_samples(&u)?;
        out.write("gradient.csv", &grads.to_csv())?;
        if spec.grid.dim() == 2 {
            let hist = gradient_histogram(&grads, args.bins)?;
            out.write("histogram.json", &(serde_json::to_string(&hist).expect("serializes") + "\n"))?;
            let lines = contour_lines(&u, &contour_levels(&u, args.levels))?;
            out.write("contours.json", &(serde_json::to_string(&lines).expect("serializes") + "\n"))?;
        }
    }
    let err = analytic_error(&spec, &u, args.kind.as_deref());
    let mut rec = record(command, args);
    rec.settings = Some(&set);
    rec.solution = Some(summary(&sol, qp.objective_constant));
    rec.analytic_linf_error = err;
    out.finish(rec, started)?;

    print!(
        "status={} objective={:.9e} iterations={}",
        serde_json::to_value(sol.status).expect("serializes").as_str().unwrap_or("?"),
        sol.objective + qp.objective_constant,
        sol.iterations
    );
    if let Some(e) = err {
        print!(" analytic_linf_error={e:.4e}");
    }
    println!();
    if sol.status != Status::Optimal {
        return Err(Fail(EXIT_SOLVER, format!("solver finished with status {:?}", sol.status)));
    }
    Ok(())
}

#[derive(Serialize)]
struct CertificateFile {
    width: usize,
    axes_only: bool,
    dtheta: f64,
    tan2_dtheta: f64,
    #[serde(flatten)]
    report: polycone::cone::CertificateReport,
}

fn run_certify(args: &CertifyArgs) -> Result<bool, Fail> {
    let started = Instant::now();
    let grid = make_grid(&args.grid, default_dim(args.target.target.as_deref()))?;
    let u = target_function(&args.target, &grid, 1.0)?.ok_or_else(|| usage("certify needs --input or --target"))?;
    let stencil = if args.axes {
        if grid.dim() != 2 {
            return Err(usage("--axes needs a 2D grid"));
        }
        StencilSet::axes()
    } else {
        StencilSet::new(args.width, grid.dim())?
    };
    let report = certify(&u, &stencil, args.tolerance)?;
    let feasible = report.feasible;
    let file = CertificateFile {
        width: stencil.width,
        axes_only: args.axes,
        dtheta: stencil.dtheta,
        tan2_dtheta: stencil.tan2_dtheta,
        report,
    };
    let json = serde_json::to_string_pretty(&file).expect("serializes") + "\n";
    let mut out = Outputs::new(&args.out)?;
    out.write("certificate.json", &json)?;
    out.finish(record("certify", args), started)?;
    print!("{json}");
    Ok(feasible)
}

struct BenchCell {
    error: Option<f64>,
    seconds: f64,
}

fn bench_cell(n: usize, rule: QuadratureRule, set: &SolverSettings) -> BenchCell {
    let started = Instant::now();
    let error = (|| {
        let spec = ProblemSpec::new(ProblemKind::MonopolistVariant, Grid::unit_square(n).ok()?).with_quadrature(rule);
        let sol = solve(&build(&spec).ok()?, set).ok()?;
        if !sol.is_optimal() {
            return None;
        }
        analytic_error(&spec, &grid_part(&spec, &sol.x).ok()?, None)
    })();
    BenchCell { error, seconds: started.elapsed().as_secs_f64() }
}

fn run_bench(args: &BenchArgs) -> Result<(), Fail> {
    let started = Instant::now();
    let ns: Vec<usize> = args
        .ns
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| usage(format!("bad grid size '{t}'"))))
        .collect::<Result<_, _>>()?;
    let set = SolverSettings::with_eps(args.eps);
    let methods = [("Zeroth Order Quadrature", QuadratureRule::Zeroth), ("Trapezoidal Rule Quadrature", QuadratureRule::Trapezoidal)];
    let cells: Vec<Vec<BenchCell>> =
        methods.iter().map(|&(_, rule)| ns.iter().map(|&n| bench_cell(n, rule, &set)).collect()).collect();

    let header = format!(
        "| Method \\ n | {} |\n|---|{}\n",
        ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" | "),
        "---|".repeat(ns.len())
    );
    let table = |title: &str, cell: &dyn Fn(&BenchCell) -> String| {
        let mut s = format!("{title}\n\n{header}");
        for ((name, _), row) in methods.iter().zip(&cells) {
            s += &format!("| {name} | {} |\n", row.iter().map(cell).collect::<Vec<_>>().join(" | "));
        }
        s
    };
    let mut md = table("Monopolist variant: error (L∞)", &|c| c.error.map_or("x".into(), |e| format!("{e:.4}")));
    if !args.no_timing {
        md += "\n";
        md += &table("Monopolist variant: run time (s)", &|c| format!("{:.2}", c.seconds));
    }
    let mut csv = String::from(if args.no_timing { "method,n,linf_error\n" } else { "method,n,linf_error,time_s\n" });
    for ((name, _), row) in methods.iter().zip(&cells) {
        for (n, c) in ns.iter().zip(row) {
            let e = c.error.map_or("x".into(), |e| format!("{e:?}"));
            if args.no_timing {
                csv += &format!("{name},{n},{e}\n");
            } else {
                csv += &format!("{name},{n},{e},{:?}\n", c.seconds);
            }
        }
    }
    let mut out = Outputs::new(&args.out)?;
    out.write("bench.md", &md)?;
    out.write("bench.csv", &csv)?;
    let mut rec = record("bench", args);
    rec.settings = Some(&set);
    out.finish(rec, started)?;
    print!("{md}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Project(a) => run_problem("project", a),
        Command::Solve(a) => run_problem("solve", a),
        Command::Bench(a) => run_bench(a),
        Command::Certify(a) => match run_certify(a) {
            Ok(true) => Ok(()),
            Ok(false) => Err(Fail(EXIT_CERTIFY, "not in the cone".into())),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
