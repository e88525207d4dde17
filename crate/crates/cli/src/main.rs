mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use polydg::basis::BasisKind;
use polydg::discretization::EulerParams;
use polydg::experiments::{self, Conventions, ReportRow, SizeConvention, SolveCase};
use polydg::geometry::Rect;
use polydg::linalg::{PreconditionerKind, SolverKind, StopRule};
use polydg::mesh::{build_random_mesh_pair, build_regular_mesh, read_mesh, write_mesh, PatternKind};
use polydg::timestepping::{JacobianUpdate, KLabel};
use polydg::vonneumann::{ratio_table, Sampling, ThetaRange};

use report::Report;

/// Element-shape experiments for discontinuous Galerkin block solvers.
#[derive(Parser, Debug)]
#[command(name = "polydg", version)]
struct Cli {
    /// Write the CSV report here (stdout when absent); the configuration goes to FILE.config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomly perturbed meshes.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (all cores when absent).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Linear solver tolerance.
    #[arg(long, global = true, default_value_t = 1e-14)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fourier analysis of block Jacobi on the four generating patterns.
    Analyze(AnalyzeArgs),
    /// One implicit step of rotating-field advection on regular meshes or a mesh file.
    Advect(AdvectArgs),
    /// The advection step on a perturbed Voronoi mesh and its dual Delaunay mesh.
    RandomAdvect(RandomArgs),
    /// One implicit Newton step of the isentropic vortex.
    EulerVortex(VortexArgs),
    /// Mesh tools.
    #[command(subcommand)]
    Mesh(MeshCommand),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [PatternKind::Hexagon, PatternKind::Square, PatternKind::RightTriangle, PatternKind::EquilateralTriangle].map(PatternArg))]
    pattern: Vec<PatternArg>,
    #[arg(long, value_delimiter = ',', default_values_t = [0, 1, 2, 3])]
    p: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = KLabel::ALL.map(KArg))]
    k: Vec<KArg>,
    #[arg(long, default_value_t = Sampling::default().theta_samples)]
    theta_samples: usize,
    #[arg(long, default_value_t = Sampling::default().wave_samples)]
    wave_samples: usize,
    #[arg(long, value_enum, default_value_t = ThetaRangeArg::PerPattern)]
    theta_range: ThetaRangeArg,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0, 1, 2, 3])]
    p: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = KLabel::ALL.map(KArg))]
    k: Vec<KArg>,
    /// jacobi or gmres.
    #[arg(long, default_value = "jacobi")]
    solver: SolverKind,
    /// GMRES preconditioner: none, jacobi or ilu0.
    #[arg(long, default_value = "jacobi")]
    preconditioner: PreconditionerKind,
    #[command(flatten)]
    conv: ConventionArgs,
}

#[derive(Args, Debug)]
struct ConventionArgs {
    /// Modal basis: legendre, orthonormal or monomial.
    #[arg(long, default_value = "legendre")]
    basis: BasisKind,
    /// What --h measures: reference (equilateral side) or square-side.
    #[arg(long, default_value = "reference")]
    size: SizeConvention,
    /// Block Jacobi stopping test: absolute, relative or preconditioned.
    #[arg(long, default_value = "absolute")]
    jacobi_stop: StopRule,
    /// GMRES stopping test; preconditioned means left preconditioning.
    #[arg(long, default_value = "preconditioned")]
    gmres_stop: StopRule,
    #[arg(long, default_value_t = 20)]
    restart: usize,
}

#[derive(Args, Debug)]
struct AdvectArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [PatternKind::Hexagon, PatternKind::Square, PatternKind::RightTriangle, PatternKind::EquilateralTriangle].map(PatternArg))]
    pattern: Vec<PatternArg>,
    /// Use this mesh instead of the regular patterns.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    #[arg(long, value_enum, default_value_t = Bc::ZeroInflow)]
    bc: Bc,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args, Debug)]
struct RandomArgs {
    /// Generating-point grid spacing.
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    /// Perturbation bound (default h/4).
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args, Debug)]
struct VortexArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [PatternKind::Hexagon, PatternKind::Square, PatternKind::RightTriangle, PatternKind::EquilateralTriangle].map(PatternArg))]
    pattern: Vec<PatternArg>,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    /// Newton tolerance on ||G||_2.
    #[arg(long, default_value_t = 5e-13)]
    newton_tol: f64,
    /// Jacobian reuse inside Newton: frozen (chord) or every.
    #[arg(long, default_value = "frozen")]
    jacobian: JacobianUpdate,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Subcommand, Debug)]
enum MeshCommand {
    /// Generate a mesh file (written to --out).
    Gen(MeshGenArgs),
}

#[derive(Args, Debug)]
struct MeshGenArgs {
    /// hex, square, rtri, etri, voronoi or delaunay.
    #[arg(long)]
    pattern: String,
    /// Element area for the regular patterns.
    #[arg(long)]
    area: Option<f64>,
    #[arg(long, num_args = 4, value_names = ["X0", "Y0", "X1", "Y1"], default_values_t = [0.0, 0.0, 1.0, 1.0], allow_negative_numbers = true)]
    domain: Vec<f64>,
    #[arg(long)]
    periodic: bool,
    /// Grid spacing for the random meshes.
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    /// Perturbation bound for the random meshes (default h/4).
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
struct PatternArg(PatternKind);

impl std::str::FromStr for PatternArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(PatternArg)
    }
}

impl std::fmt::Display for PatternArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.0.name())
    }
}

#[derive(Clone, Copy, Debug)]
struct KArg(KLabel);

impl std::str::FromStr for KArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(KArg)
    }
}

impl std::fmt::Display for KArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ThetaRangeArg {
    PerPattern,
    QuarterPi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Bc {
    ZeroInflow,
    Periodic,
}

impl ConventionArgs {
    fn conventions(&self, tol: f64) -> Conventions {
        Conventions {
            basis: self.basis,
            size: self.size,
            tol,
            jacobi_rule: self.jacobi_stop,
            gmres_rule: self.gmres_stop,
            restart: self.restart,
            ..Conventions::default()
        }
    }
}

impl SolveArgs {
    fn cases(&self) -> Vec<SolveCase> {
        let mut out = Vec::new();
        for &p in &self.p {
            for k in &self.k {
                out.push(match self.solver {
                    SolverKind::BlockJacobi => SolveCase::jacobi(p, k.0),
                    SolverKind::Gmres => SolveCase::gmres(p, k.0, self.preconditioner),
                });
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if let Some(&p) = self.p.iter().find(|&&p| p > 3) {
            bail!("degree {p} not supported (0..=3)");
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some solves did not converge");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every solve converged.
fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    if !(cli.tol > 0.0) {
        bail!("--tol must be positive");
    }
    let mut report = Report::new(cli.out.clone());
    report.echo(format!("seed={}", cli.seed));
    report.echo(format!("tol={:e}", cli.tol));
    report.echo(format!("command={:?}", cli.command));
    match &cli.command {
        Command::Analyze(a) => analyze(a, &mut report),
        Command::Advect(a) => advect(a, cli.tol, &mut report),
        Command::RandomAdvect(a) => random_advect(a, cli.tol, cli.seed, &mut report),
        Command::EulerVortex(a) => euler_vortex(a, cli.tol, &mut report),
        Command::Mesh(MeshCommand::Gen(a)) => mesh_gen(a, cli.seed, cli.out.as_ref()),
    }
}

fn analyze(a: &AnalyzeArgs, report: &mut Report) -> Result<bool> {
    let sampling = Sampling {
        theta_samples: a.theta_samples,
        wave_samples: a.wave_samples,
        theta_range: match a.theta_range {
            ThetaRangeArg::PerPattern => ThetaRange::PerPattern,
            ThetaRangeArg::QuarterPi => ThetaRange::QuarterPi,
        },
    };
    let kinds: Vec<PatternKind> = a.pattern.iter().map(|p| p.0).collect();
    let labels: Vec<KLabel> = a.k.iter().map(|k| k.0).collect();
    let rows = ratio_table(&kinds, &a.p, &labels, &sampling)?;
    let lines: Vec<String> = rows.iter().map(|r| r.csv_row()).collect();
    report.write_csv(polydg::vonneumann::RatioRow::CSV_HEADER, &lines)?;
    let cells: Vec<(String, String, String)> =
        rows.iter().map(|r| (r.kind.name().to_string(), format!("p{} {}", r.p, r.k_label), format!("{:.6}", r.log_ratio))).collect();
    report.table(&cells);
    Ok(true)
}

fn solve_rows(report: &mut Report, rows: Vec<ReportRow>) -> Result<bool> {
    let ok = rows.iter().all(|r| r.converged);
    let lines: Vec<String> = rows.iter().map(|r| r.csv_row()).collect();
    report.write_csv(ReportRow::CSV_HEADER, &lines)?;
    let cells: Vec<(String, String, String)> = rows
        .iter()
        .map(|r| {
            let name = if r.mesh == "regular" { r.pattern.clone() } else { format!("{} ({} cells)", r.mesh, r.n_cells) };
            let mut v = r.iterations.to_string();
            if let Some(n) = r.newton_iters {
                v += &format!("/{n}");
            }
            if !r.converged {
                v += "!";
            }
            (name, format!("p{} {}", r.p, r.label), v)
        })
        .collect();
    report.table(&cells);
    Ok(ok)
}

fn advect(a: &AdvectArgs, tol: f64, report: &mut Report) -> Result<bool> {
    a.solve.validate()?;
    let conv = a.solve.conv.conventions(tol);
    for line in conv.echo() {
        report.echo(line);
    }
    let mut rows = Vec::new();
    if let Some(path) = &a.mesh {
        let mesh = read_mesh(path).with_context(|| format!("reading {}", path.display()))?;
        for case in a.solve.cases() {
            rows.push(experiments::run_advect("advect", &mesh, "file", "file", a.h, &case, &conv)?);
        }
    } else {
        for pat in &a.pattern {
            let mesh = experiments::advection_mesh(pat.0, a.h, conv.size, a.bc == Bc::Periodic)?;
            for case in a.solve.cases() {
                rows.push(experiments::run_advect("advect", &mesh, "regular", pat.0.name(), a.h, &case, &conv)?);
            }
        }
    }
    solve_rows(report, rows)
}

fn random_advect(a: &RandomArgs, tol: f64, seed: u64, report: &mut Report) -> Result<bool> {
    a.solve.validate()?;
    let conv = a.solve.conv.conventions(tol);
    let delta = a.delta.unwrap_or(0.25 * a.h);
    report.echo(format!("delta={delta:e}"));
    for line in conv.echo() {
        report.echo(line);
    }
    let pair = build_random_mesh_pair(a.h, delta, Rect::unit(), seed)?;
    let mut rows = Vec::new();
    for (name, mesh) in [("voronoi", &pair.voronoi), ("delaunay", &pair.delaunay)] {
        for case in a.solve.cases() {
            rows.push(experiments::run_advect("random-advect", mesh, name, "random", a.h, &case, &conv)?);
        }
    }
    solve_rows(report, rows)
}

fn euler_vortex(a: &VortexArgs, tol: f64, report: &mut Report) -> Result<bool> {
    a.solve.validate()?;
    let conv = Conventions { newton_tol: a.newton_tol, jacobian_update: a.jacobian, ..a.solve.conv.conventions(tol) };
    for line in conv.echo() {
        report.echo(line);
    }
    let prm = EulerParams::default();
    report.echo(format!("euler={prm:?}"));
    let mut rows = Vec::new();
    for pat in &a.pattern {
        let mesh = experiments::vortex_mesh(pat.0, a.h, conv.size)?;
        for case in a.solve.cases() {
            rows.push(experiments::run_euler_vortex(&mesh, pat.0.name(), a.h, &case, &conv, &prm)?);
        }
    }
    solve_rows(report, rows)
}

fn mesh_gen(a: &MeshGenArgs, seed: u64, out: Option<&PathBuf>) -> Result<bool> {
    let out = out.context("mesh gen needs --out FILE")?;
    let d = &a.domain;
    let domain = Rect::new(d[0], d[1], d[2], d[3]);
    let mesh = match a.pattern.as_str() {
        "voronoi" | "delaunay" => {
            let pair = build_random_mesh_pair(a.h, a.delta.unwrap_or(0.25 * a.h), domain, seed)?;
            if a.pattern == "voronoi" {
                pair.voronoi
            } else {
                pair.delaunay
            }
        }
        other => {
            let kind: PatternKind = other.parse().map_err(anyhow::Error::msg)?;
            let area = a.area.context("regular patterns need --area")?;
            let rm = build_regular_mesh(kind, area, domain, a.periodic)?;
            if (rm.achieved_area - area).abs() > 1e-12 * area {
                eprintln!("element area adjusted to {:e} to fit the periodic domain", rm.achieved_area);
            }
            rm.mesh
        }
    };
    write_mesh(&mesh, out).with_context(|| format!("writing {}", out.display()))?;
    eprintln!("{} cells written to {}", mesh.n_cells(), out.display());
    Ok(true)
}
