//! Block-sparse matrices, block iterative solvers and a small dense eigensolver.

mod bsr;
pub mod dense;
mod eigen;
mod precond;
mod solvers;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

pub use bsr::BlockSparseMatrix;
pub use eigen::{dense_complex_eigenvalues, dense_real_eigenvalues, spectral_radius};
pub use precond::{factor_bilu0, factor_block_jacobi, Bilu0Factors, BlockJacobiFactors, IdentityPreconditioner, Preconditioner};
pub use solvers::{block_jacobi_solve, gmres, jacobi_iteration_matrix, norm2, DenseLuPreconditioner, SolveReport, StopRule, DENSE_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular diagonal block in block row {row} (elimination step {step})")]
    SingularBlock { row: usize, step: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("block ({row}, {col}) is not in the sparsity pattern")]
    PatternMismatch { row: usize, col: usize },
    #[error("dense matrix of dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("GMRES least-squares breakdown")]
    Breakdown,
    #[error("QR iteration did not converge")]
    EigenNoConvergence,
    #[error("non-finite matrix entry")]
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    BlockJacobi,
    Gmres,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreconditionerKind {
    None,
    BlockJacobi,
    Ilu0,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::BlockJacobi => "jacobi",
            SolverKind::Gmres => "gmres",
        }
    }
}

impl PreconditionerKind {
    pub fn name(self) -> &'static str {
        match self {
            PreconditionerKind::None => "none",
            PreconditionerKind::BlockJacobi => "block_jacobi",
            PreconditionerKind::Ilu0 => "ilu0",
        }
    }
}

impl FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jacobi" | "block-jacobi" | "block_jacobi" => Ok(SolverKind::BlockJacobi),
            "gmres" => Ok(SolverKind::Gmres),
            _ => Err(format!("unknown solver '{s}'")),
        }
    }
}

impl FromStr for PreconditionerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(PreconditionerKind::None),
            "jacobi" | "block-jacobi" | "block_jacobi" => Ok(PreconditionerKind::BlockJacobi),
            "ilu0" | "ilu" | "bilu0" => Ok(PreconditionerKind::Ilu0),
            _ => Err(format!("unknown preconditioner '{s}'")),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Linear solver selection with its stopping rule.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolverConfig {
    pub solver: SolverKind,
    pub preconditioner: PreconditionerKind,
    pub tol: f64,
    pub rule: StopRule,
    pub max_iters: usize,
    pub restart: usize,
    /// Elimination order for ILU(0); natural index order when `None`.
    pub ordering: Option<Vec<usize>>,
}

impl LinearSolverConfig {
    pub fn jacobi(tol: f64) -> Self {
        LinearSolverConfig {
            solver: SolverKind::BlockJacobi,
            preconditioner: PreconditionerKind::None,
            tol,
            rule: StopRule::Relative,
            max_iters: 100_000,
            restart: 20,
            ordering: None,
        }
    }

    pub fn gmres(preconditioner: PreconditionerKind, tol: f64) -> Self {
        LinearSolverConfig {
            solver: SolverKind::Gmres,
            preconditioner,
            tol,
            rule: StopRule::Relative,
            max_iters: 10_000,
            restart: 20,
            ordering: None,
        }
    }

    pub fn with_rule(mut self, rule: StopRule) -> Self {
        self.rule = rule;
        self
    }
}

/// One solver-statistics record.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverStats {
    pub solver: SolverKind,
    pub preconditioner: PreconditionerKind,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub wall_ms: f64,
}

impl SolverStats {
    pub const CSV_HEADER: &'static str = "solver,preconditioner,iterations,final_residual,wall_ms";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{:e},{:.3}", self.solver, self.preconditioner, self.iterations, self.final_residual, self.wall_ms)
    }
}

/// Solve `A x = b` from the initial guess in `x` with the configured solver.
pub fn solve(a: &BlockSparseMatrix, rhs: &[f64], x: &mut [f64], cfg: &LinearSolverConfig) -> Result<SolverStats, LinalgError> {
    let t0 = Instant::now();
    let rep = match cfg.solver {
        SolverKind::BlockJacobi => block_jacobi_solve(a, rhs, x, cfg.tol, cfg.rule, cfg.max_iters)?,
        SolverKind::Gmres => match cfg.preconditioner {
            PreconditionerKind::None => gmres(a, rhs, x, &IdentityPreconditioner, cfg.restart, cfg.tol, cfg.rule, cfg.max_iters)?,
            PreconditionerKind::BlockJacobi => {
                let p = factor_block_jacobi(a)?;
                gmres(a, rhs, x, &p, cfg.restart, cfg.tol, cfg.rule, cfg.max_iters)?
            }
            PreconditionerKind::Ilu0 => {
                let natural: Vec<usize>;
                let order = match &cfg.ordering {
                    Some(o) => o.as_slice(),
                    None => {
                        natural = (0..a.n_block_rows()).collect();
                        &natural
                    }
                };
                let p = factor_bilu0(a, order)?;
                gmres(a, rhs, x, &p, cfg.restart, cfg.tol, cfg.rule, cfg.max_iters)?
            }
        },
    };
    Ok(SolverStats {
        solver: cfg.solver,
        preconditioner: if cfg.solver == SolverKind::BlockJacobi { PreconditionerKind::None } else { cfg.preconditioner },
        iterations: rep.iterations,
        converged: rep.converged,
        final_residual: rep.final_residual,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
    })
}
