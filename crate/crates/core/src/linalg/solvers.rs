//! Block Jacobi iteration and restarted GMRES.

use super::dense::DenseLu;
use super::precond::{factor_block_jacobi, Preconditioner};
use super::{BlockSparseMatrix, LinalgError};

/// What the stopping test measures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StopRule {
    /// `||b - A x|| <= tol ||b||`.
    #[default]
    Relative,
    /// `||b - A x|| <= tol`.
    Absolute,
    /// `||P^{-1}(b - A x)|| <= tol ||P^{-1} b||`. GMRES is then left-preconditioned.
    Preconditioned,
}

impl StopRule {
    pub fn name(self) -> &'static str {
        match self {
            StopRule::Relative => "relative",
            StopRule::Absolute => "absolute",
            StopRule::Preconditioned => "preconditioned",
        }
    }
}

impl std::str::FromStr for StopRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "relative" | "rel" => Ok(StopRule::Relative),
            "absolute" | "abs" => Ok(StopRule::Absolute),
            "preconditioned" | "prec" | "left" => Ok(StopRule::Preconditioned),
            _ => Err(format!("unknown stopping rule '{s}' (relative, absolute, preconditioned)")),
        }
    }
}

impl std::fmt::Display for StopRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Stopping quantity at exit, on the scale of `tol` (see [`StopRule`]).
    pub final_residual: f64,
    /// Stopping quantity after each iteration (GMRES: least-squares estimates).
    pub history: Vec<f64>,
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Block Jacobi: `x <- x + D^{-1}(b - A x)`, one matrix-vector product per iteration, until the
/// stopping test holds or `max_iters` iterations.
///
/// `x` holds the last iterate even without convergence.
pub fn block_jacobi_solve(
    a: &BlockSparseMatrix,
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    rule: StopRule,
    max_iters: usize,
) -> Result<SolveReport, LinalgError> {
    check_dims(a, rhs, x)?;
    let d = factor_block_jacobi(a)?;
    if norm2(rhs) == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveReport { iterations: 0, converged: true, final_residual: 0.0, history: vec![] });
    }
    let mut r = vec![0.0; rhs.len()];
    let mut z = vec![0.0; rhs.len()];
    let scale = match rule {
        StopRule::Relative => norm2(rhs),
        StopRule::Absolute => 1.0,
        StopRule::Preconditioned => {
            d.apply(rhs, &mut z);
            norm2(&z)
        }
    };
    let measure = |r: &[f64], z: &[f64]| match rule {
        StopRule::Preconditioned => norm2(z) / scale,
        _ => norm2(r) / scale,
    };
    a.residual(rhs, x, &mut r);
    d.apply(&r, &mut z);
    let mut rel = measure(&r, &z);
    let mut history = Vec::new();
    let mut it = 0;
    while rel > tol && it < max_iters {
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
        it += 1;
        a.residual(rhs, x, &mut r);
        d.apply(&r, &mut z);
        rel = measure(&r, &z);
        history.push(rel);
        if !rel.is_finite() {
            break;
        }
    }
    Ok(SolveReport { iterations: it, converged: rel <= tol, final_residual: rel, history })
}

/// Dense Jacobi iteration matrix `R_J = I - D^{-1} A` (row-major), refused above `cap` rows.
pub fn jacobi_iteration_matrix(a: &BlockSparseMatrix, cap: usize) -> Result<Vec<f64>, LinalgError> {
    let nd = a.dim();
    if nd > cap {
        return Err(LinalgError::TooLarge { dim: nd, cap });
    }
    let b = a.block_size();
    let d = factor_block_jacobi(a)?;
    let dense = a.to_dense();
    let mut r = vec![0.0; nd * nd];
    let mut col = vec![0.0; b];
    for i in 0..a.n_block_rows() {
        for j in 0..nd {
            for t in 0..b {
                col[t] = dense[(i * b + t) * nd + j];
            }
            d.block(i).solve_in_place(&mut col);
            for t in 0..b {
                r[(i * b + t) * nd + j] = -col[t];
            }
        }
    }
    for k in 0..nd {
        r[k * nd + k] += 1.0;
    }
    Ok(r)
}

/// Default cap on the dimension of dense iteration matrices.
pub const DENSE_CAP: usize = 2000;

/// Restarted GMRES with Givens rotations.
///
/// Right-preconditioned for the true-residual rules, left-preconditioned for
/// [`StopRule::Preconditioned`]. One iteration is one Arnoldi step (a preconditioner
/// application and a matrix-vector product); the count is summed over restarts. The solve
/// stops when the least-squares residual estimate passes the test; `final_residual` is
/// recomputed from the iterate and can sit slightly above `tol` at round-off level.
pub fn gmres(
    a: &BlockSparseMatrix,
    rhs: &[f64],
    x: &mut [f64],
    precond: &dyn Preconditioner,
    restart: usize,
    tol: f64,
    rule: StopRule,
    max_iters: usize,
) -> Result<SolveReport, LinalgError> {
    check_dims(a, rhs, x)?;
    let restart = restart.max(1);
    let n = rhs.len();
    if norm2(rhs) == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveReport { iterations: 0, converged: true, final_residual: 0.0, history: vec![] });
    }
    let left = rule == StopRule::Preconditioned;
    let mut r = vec![0.0; n];
    let mut t = vec![0.0; n];
    let scale = match rule {
        StopRule::Relative => norm2(rhs),
        StopRule::Absolute => 1.0,
        StopRule::Preconditioned => {
            precond.apply(rhs, &mut t);
            norm2(&t)
        }
    };
    // residual in the space the Krylov basis lives in
    let residual = |x: &[f64], r: &mut [f64], t: &mut [f64]| {
        if left {
            a.residual(rhs, x, t);
            precond.apply(t, r);
        } else {
            a.residual(rhs, x, r);
        }
    };
    residual(x, &mut r, &mut t);
    let mut beta = norm2(&r);
    let mut history = Vec::new();
    let mut total = 0;
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
    let mut z: Vec<Vec<f64>> = Vec::with_capacity(restart);
    let mut h = vec![vec![0.0; restart]; restart + 1];
    let mut cs = vec![0.0; restart];
    let mut sn = vec![0.0; restart];
    let mut g = vec![0.0; restart + 1];
    let mut w = vec![0.0; n];
    let mut converged = beta / scale <= tol;

    while !converged && total < max_iters {
        v.clear();
        z.clear();
        v.push(r.iter().map(|ri| ri / beta).collect());
        g.iter_mut().for_each(|gi| *gi = 0.0);
        g[0] = beta;
        let mut cols = 0;
        for j in 0..restart {
            if left {
                a.matvec(&v[j], &mut t);
                precond.apply(&t, &mut w);
            } else {
                let mut zj = vec![0.0; n];
                precond.apply(&v[j], &mut zj);
                a.matvec(&zj, &mut w);
                z.push(zj);
            }
            total += 1;
            // modified Gram-Schmidt, twice for stability near machine precision
            for hc in h.iter_mut() {
                hc[j] = 0.0;
            }
            for _ in 0..2 {
                for i in 0..=j {
                    let hij = dot(&w, &v[i]);
                    h[i][j] += hij;
                    for (wk, vk) in w.iter_mut().zip(&v[i]) {
                        *wk -= hij * vk;
                    }
                }
            }
            let hn = norm2(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let (c, s) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = c * h[j][j] + s * h[j + 1][j];
            h[j + 1][j] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            cols = j + 1;
            let est = g[j + 1].abs() / scale;
            history.push(est);
            converged = est <= tol;
            let breakdown = hn <= 1e-14 * beta;
            if converged || breakdown || total >= max_iters {
                break;
            }
            v.push(w.iter().map(|wk| wk / hn).collect());
        }
        // back substitution for the cycle's correction
        let mut y = vec![0.0; cols];
        for i in (0..cols).rev() {
            let mut s = g[i];
            for k in i + 1..cols {
                s -= h[i][k] * y[k];
            }
            if h[i][i] == 0.0 {
                return Err(LinalgError::Breakdown);
            }
            y[i] = s / h[i][i];
        }
        let dirs = if left { &v } else { &z };
        for (i, yi) in y.iter().enumerate() {
            for (xk, dk) in x.iter_mut().zip(&dirs[i]) {
                *xk += yi * dk;
            }
        }
        residual(x, &mut r, &mut t);
        let new_beta = norm2(&r);
        if !new_beta.is_finite() {
            return Err(LinalgError::Breakdown);
        }
        // a cycle without any progress means stagnation at round-off level
        let stalled = new_beta >= beta;
        beta = new_beta;
        converged = converged || beta / scale <= tol;
        if stalled {
            break;
        }
    }
    Ok(SolveReport { iterations: total, converged, final_residual: beta / scale, history })
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

fn check_dims(a: &BlockSparseMatrix, rhs: &[f64], x: &[f64]) -> Result<(), LinalgError> {
    if rhs.len() != a.dim() {
        return Err(LinalgError::DimensionMismatch { expected: a.dim(), found: rhs.len() });
    }
    if x.len() != a.dim() {
        return Err(LinalgError::DimensionMismatch { expected: a.dim(), found: x.len() });
    }
    Ok(())
}

/// Exact preconditioner from a dense LU of the whole matrix (small systems).
pub struct DenseLuPreconditioner(DenseLu);

impl DenseLuPreconditioner {
    pub fn new(a: &BlockSparseMatrix) -> Result<Self, LinalgError> {
        Ok(DenseLuPreconditioner(DenseLu::new(&a.to_dense(), a.dim())?))
    }
}

impl Preconditioner for DenseLuPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.0.solve_in_place(z);
    }
}
