//! Experiment drivers: one backward Euler solve per configuration, reported as CSV rows.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::basis::{BasisError, BasisKind, DgSpace};
use crate::discretization::{
    assemble_advection, euler_jacobian, euler_residual, gaussian_initial_condition, project, project_scalar, system_mass_matrix,
    vortex_exact, DiscretizationError, EulerParams, Velocity,
};
use crate::geometry::Rect;
use crate::linalg::{self, LinalgError, LinearSolverConfig, PreconditionerKind, SolverKind, StopRule};
use crate::mesh::{build_regular_mesh, natural_ordering, BoundaryTag, MeshError, PatternKind, PolyMesh};
use crate::timestepping::{backward_euler_nonlinear_step, JacobianUpdate, KLabel, Scheme, TimeStepConfig, TimeSteppingError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    TimeStepping(#[from] TimeSteppingError),
}

/// What the mesh size `h` refers to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SizeConvention {
    /// `h` is the equilateral reference length `h_E`: element area `(sqrt 3 / 4) h^2`.
    #[default]
    Reference,
    /// `h` is the square side: element area `h^2`.
    SquareSide,
}

impl SizeConvention {
    pub fn element_area(self, h: f64) -> f64 {
        match self {
            SizeConvention::Reference => 3f64.sqrt() / 4.0 * h * h,
            SizeConvention::SquareSide => h * h,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SizeConvention::Reference => "reference",
            SizeConvention::SquareSide => "square-side",
        }
    }
}

impl FromStr for SizeConvention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reference" | "h_e" => Ok(SizeConvention::Reference),
            "square-side" | "square" | "h_s" => Ok(SizeConvention::SquareSide),
            _ => Err(format!("unknown size convention '{s}' (reference, square-side)")),
        }
    }
}

impl fmt::Display for SizeConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Choices that change iteration counts without changing the discrete problem's solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Conventions {
    pub basis: BasisKind,
    pub size: SizeConvention,
    pub tol: f64,
    pub jacobi_rule: StopRule,
    pub gmres_rule: StopRule,
    pub restart: usize,
    pub jacobian_update: JacobianUpdate,
    pub newton_tol: f64,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            basis: BasisKind::Legendre,
            size: SizeConvention::Reference,
            tol: 1e-14,
            jacobi_rule: StopRule::Absolute,
            gmres_rule: StopRule::Preconditioned,
            restart: 20,
            jacobian_update: JacobianUpdate::Frozen,
            newton_tol: 5e-13,
        }
    }
}

impl Conventions {
    /// Orthonormal basis, square-side sizing, relative true residuals, full Newton.
    pub fn plain() -> Self {
        Conventions {
            basis: BasisKind::Orthonormal,
            size: SizeConvention::SquareSide,
            jacobi_rule: StopRule::Relative,
            gmres_rule: StopRule::Relative,
            jacobian_update: JacobianUpdate::Every,
            ..Conventions::default()
        }
    }

    pub fn linear(&self, case: &SolveCase, mesh: &PolyMesh) -> LinearSolverConfig {
        let mut cfg = match case.solver {
            SolverKind::BlockJacobi => LinearSolverConfig::jacobi(self.tol).with_rule(self.jacobi_rule),
            SolverKind::Gmres => LinearSolverConfig::gmres(case.preconditioner, self.tol).with_rule(self.gmres_rule),
        };
        cfg.restart = self.restart;
        if case.preconditioner == PreconditionerKind::Ilu0 {
            cfg.ordering = Some(natural_ordering(mesh));
        }
        cfg
    }

    /// `key=value` lines describing these conventions.
    pub fn echo(&self) -> Vec<String> {
        vec![
            format!("basis={}", self.basis.name()),
            format!("size={}", self.size),
            format!("tol={:e}", self.tol),
            format!("jacobi_stop={}", self.jacobi_rule),
            format!("gmres_stop={}", self.gmres_rule),
            format!("restart={}", self.restart),
            format!("jacobian={}", self.jacobian_update),
            format!("newton_tol={:e}", self.newton_tol),
        ]
    }
}

/// One solve: degree, timestep multiple and linear solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveCase {
    pub p: usize,
    pub label: KLabel,
    pub solver: SolverKind,
    pub preconditioner: PreconditionerKind,
}

impl SolveCase {
    pub fn jacobi(p: usize, label: KLabel) -> Self {
        SolveCase { p, label, solver: SolverKind::BlockJacobi, preconditioner: PreconditionerKind::None }
    }

    pub fn gmres(p: usize, label: KLabel, preconditioner: PreconditionerKind) -> Self {
        SolveCase { p, label, solver: SolverKind::Gmres, preconditioner }
    }
}

/// One line of an experiment report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub mesh: String,
    pub pattern: String,
    pub n_cells: usize,
    pub p: usize,
    pub label: KLabel,
    pub solver: SolverKind,
    pub preconditioner: PreconditionerKind,
    /// Linear iterations, summed over Newton iterations for nonlinear problems.
    pub iterations: usize,
    pub newton_iters: Option<usize>,
    pub final_residual: f64,
    pub wall_ms: f64,
    pub converged: bool,
}

impl ReportRow {
    pub const CSV_HEADER: &'static str =
        "experiment,mesh,pattern,p,k_label,solver,preconditioner,iterations,newton_iters,final_residual,wall_ms";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:e},{:.3}",
            self.experiment,
            self.mesh,
            self.pattern,
            self.p,
            self.label,
            self.solver,
            if self.solver == SolverKind::BlockJacobi { PreconditionerKind::None } else { self.preconditioner },
            self.iterations,
            self.newton_iters.map(|n| n.to_string()).unwrap_or_default(),
            self.final_residual,
            self.wall_ms
        )
    }
}

/// Unit-square tessellation for the advection problems: clipped at the walls (zero inflow) or
/// fitted to the periodic square.
pub fn advection_mesh(kind: PatternKind, h: f64, size: SizeConvention, periodic: bool) -> Result<PolyMesh, ExperimentError> {
    Ok(build_regular_mesh(kind, size.element_area(h), Rect::unit(), periodic)?.mesh)
}

/// The `20 x 15` vortex channel, every wall taking the exact state.
pub fn vortex_mesh(kind: PatternKind, h: f64, size: SizeConvention) -> Result<PolyMesh, ExperimentError> {
    let mut mesh = build_regular_mesh(kind, size.element_area(h), Rect::new(0.0, 0.0, 20.0, 15.0), false)?.mesh;
    mesh.set_boundary_tag(BoundaryTag::ExactState);
    Ok(mesh)
}

/// One backward Euler step of the rotating-field advection problem from the Gaussian, with
/// `k = label * h / sqrt 2` and a zero initial guess.
pub fn run_advect(
    experiment: &str,
    mesh: &PolyMesh,
    mesh_name: &str,
    pattern: &str,
    h: f64,
    case: &SolveCase,
    conv: &Conventions,
) -> Result<ReportRow, ExperimentError> {
    let t0 = Instant::now();
    let space = DgSpace::with_kind(mesh, case.p, conv.basis)?;
    let op = assemble_advection(mesh, &space, Velocity::rotating())?;
    let u0 = project_scalar(&space, gaussian_initial_condition);
    let mut b = vec![0.0; u0.len()];
    op.mass.matvec(&u0, &mut b);
    let a = op.implicit_matrix(case.label.multiple() * h / SQRT_2);
    let mut x = vec![0.0; b.len()];
    let stats = linalg::solve(&a, &b, &mut x, &conv.linear(case, mesh))?;
    Ok(ReportRow {
        experiment: experiment.to_string(),
        mesh: mesh_name.to_string(),
        pattern: pattern.to_string(),
        n_cells: mesh.n_cells(),
        p: case.p,
        label: case.label,
        solver: case.solver,
        preconditioner: case.preconditioner,
        iterations: stats.iterations,
        newton_iters: None,
        final_residual: stats.final_residual,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        converged: stats.converged,
    })
}

/// One backward Euler step of the vortex from its exact state at `t = 0`, `k = 0.03 h label`.
pub fn run_euler_vortex(
    mesh: &PolyMesh,
    pattern: &str,
    h: f64,
    case: &SolveCase,
    conv: &Conventions,
    prm: &EulerParams,
) -> Result<ReportRow, ExperimentError> {
    let t0 = Instant::now();
    let space = DgSpace::with_kind(mesh, case.p, conv.basis)?;
    let mass = system_mass_matrix(&space, 4);
    let u0 = project::<4>(&space, |x| vortex_exact(x, 0.0, prm).1);
    let mut cfg = TimeStepConfig::new(case.label.vortex(h), Scheme::BackwardEuler, conv.linear(case, mesh));
    cfg.newton_tol = conv.newton_tol;
    cfg.jacobian_update = conv.jacobian_update;
    let rep = backward_euler_nonlinear_step(
        &mass,
        |u, t| Ok(euler_residual(mesh, &space, u, prm, t)?),
        |u, t| Ok(euler_jacobian(mesh, &space, u, prm, t)?),
        &u0,
        0.0,
        &cfg,
    )?;
    Ok(ReportRow {
        experiment: "euler-vortex".to_string(),
        mesh: "regular".to_string(),
        pattern: pattern.to_string(),
        n_cells: mesh.n_cells(),
        p: case.p,
        label: case.label,
        solver: case.solver,
        preconditioner: case.preconditioner,
        iterations: rep.linear_iterations(),
        newton_iters: Some(rep.iterations),
        final_residual: *rep.residual_history.last().unwrap_or(&0.0),
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        converged: rep.linear_converged(),
    })
}
