//! Backward Euler, Newton's method and Alexander's three-stage DIRK scheme for
//! `M dU/dt + R(U, t) = 0`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::discretization::DiscretizationError;
use crate::linalg::{self, norm2, BlockSparseMatrix, LinalgError, LinearSolverConfig, SolverStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeSteppingError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NewtonNoConvergence { iterations: usize, residual: f64 },
    #[error("invalid time step configuration: {0}")]
    BadConfig(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    BackwardEuler,
    Dirk3,
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "backward-euler" | "be" => Ok(Scheme::BackwardEuler),
            "dirk3" => Ok(Scheme::Dirk3),
            _ => Err(format!("unknown scheme '{s}'")),
        }
    }
}

/// Timestep multiples `k1`, `k2 = 2 k1`, `k3 = 4 k1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KLabel {
    K1,
    K2,
    K3,
}

impl KLabel {
    pub const ALL: [KLabel; 3] = [KLabel::K1, KLabel::K2, KLabel::K3];

    pub fn multiple(self) -> f64 {
        match self {
            KLabel::K1 => 1.0,
            KLabel::K2 => 2.0,
            KLabel::K3 => 4.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KLabel::K1 => "k1",
            KLabel::K2 => "k2",
            KLabel::K3 => "k3",
        }
    }

    /// Fourier analysis: `k1 = 3 h / |beta|`.
    pub fn analysis(self, h: f64, speed: f64) -> f64 {
        3.0 * h / speed * self.multiple()
    }

    /// Rotating-field advection, where `max |beta| = sqrt 2`: `k1 = h / sqrt 2`.
    pub fn advection(self, h: f64) -> f64 {
        h / std::f64::consts::SQRT_2 * self.multiple()
    }

    /// Vortex problem: `k1 = 0.03 h`.
    pub fn vortex(self, h: f64) -> f64 {
        0.03 * h * self.multiple()
    }
}

impl fmt::Display for KLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "k1" => Ok(KLabel::K1),
            "k2" => Ok(KLabel::K2),
            "k3" => Ok(KLabel::K3),
            _ => Err(format!("unknown timestep label '{s}'")),
        }
    }
}

/// When Newton re-evaluates its Jacobian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum JacobianUpdate {
    /// Full Newton: a fresh Jacobian at every iterate.
    #[default]
    Every,
    /// Chord iteration: the Jacobian at the initial guess is kept for the whole solve.
    Frozen,
}

impl FromStr for JacobianUpdate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "every" | "newton" => Ok(JacobianUpdate::Every),
            "frozen" | "chord" => Ok(JacobianUpdate::Frozen),
            _ => Err(format!("unknown Jacobian update '{s}' (every, frozen)")),
        }
    }
}

impl fmt::Display for JacobianUpdate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JacobianUpdate::Every => "every",
            JacobianUpdate::Frozen => "frozen",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeStepConfig {
    pub k: f64,
    pub scheme: Scheme,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub jacobian_update: JacobianUpdate,
    pub linear: LinearSolverConfig,
}

impl TimeStepConfig {
    pub fn new(k: f64, scheme: Scheme, linear: LinearSolverConfig) -> Self {
        TimeStepConfig { k, scheme, newton_tol: 5e-13, newton_max_iters: 20, jacobian_update: JacobianUpdate::Every, linear }
    }

    pub fn validate(&self) -> Result<(), TimeSteppingError> {
        if !(self.k > 0.0) || !(self.newton_tol > 0.0) || !(self.linear.tol > 0.0) {
            return Err(TimeSteppingError::BadConfig(format!("k = {}, newton_tol = {}, linear tol = {}", self.k, self.newton_tol, self.linear.tol)));
        }
        Ok(())
    }
}

/// Solve `(M + k L) U^{n+1} = M U^n` from a zero initial guess.
pub fn backward_euler_linear_step(
    mass: &BlockSparseMatrix,
    l: &BlockSparseMatrix,
    k: f64,
    un: &[f64],
    linear: &LinearSolverConfig,
) -> Result<(Vec<f64>, SolverStats), TimeSteppingError> {
    let mut a = l.clone();
    a.scale(k);
    a.add_scaled(1.0, mass)?;
    let mut rhs = vec![0.0; un.len()];
    mass.matvec(un, &mut rhs);
    let mut x = vec![0.0; un.len()];
    let stats = linalg::solve(&a, &rhs, &mut x, linear)?;
    Ok((x, stats))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonReport {
    pub u: Vec<f64>,
    pub iterations: usize,
    /// Linear solver statistics for every Newton iteration.
    pub linear: Vec<SolverStats>,
    /// `||G||_2` before each iteration and at the end.
    pub residual_history: Vec<f64>,
}

impl NewtonReport {
    pub fn linear_iterations(&self) -> usize {
        self.linear.iter().map(|s| s.iterations).sum()
    }

    pub fn linear_converged(&self) -> bool {
        self.linear.iter().all(|s| s.converged)
    }
}

/// Full-step Newton for `G(U) = 0` until `||G||_2 <= tol`; each update solves `J dU = -G` from zero.
#[allow(clippy::too_many_arguments)]
pub fn newton_solve(
    mut residual: impl FnMut(&[f64]) -> Result<Vec<f64>, TimeSteppingError>,
    mut jacobian: impl FnMut(&[f64]) -> Result<BlockSparseMatrix, TimeSteppingError>,
    guess: Vec<f64>,
    tol: f64,
    max_iters: usize,
    update: JacobianUpdate,
    linear: &LinearSolverConfig,
) -> Result<NewtonReport, TimeSteppingError> {
    let mut u = guess;
    let mut g = residual(&u)?;
    let mut rep = NewtonReport { u: Vec::new(), iterations: 0, linear: Vec::new(), residual_history: vec![norm2(&g)] };
    let mut frozen: Option<BlockSparseMatrix> = None;
    while *rep.residual_history.last().unwrap() > tol {
        if rep.iterations == max_iters {
            return Err(TimeSteppingError::NewtonNoConvergence { iterations: max_iters, residual: *rep.residual_history.last().unwrap() });
        }
        let j = match (update, frozen.take()) {
            (JacobianUpdate::Frozen, Some(j)) => j,
            _ => jacobian(&u)?,
        };
        g.iter_mut().for_each(|v| *v = -*v);
        let mut du = vec![0.0; u.len()];
        rep.linear.push(linalg::solve(&j, &g, &mut du, linear)?);
        if update == JacobianUpdate::Frozen {
            frozen = Some(j);
        }
        u.iter_mut().zip(&du).for_each(|(a, d)| *a += d);
        g = residual(&u)?;
        rep.iterations += 1;
        let r = norm2(&g);
        if !r.is_finite() {
            return Err(TimeSteppingError::NewtonNoConvergence { iterations: rep.iterations, residual: r });
        }
        rep.residual_history.push(r);
    }
    rep.u = u;
    Ok(rep)
}

/// Alexander's L-stable three-stage DIRK tableau.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dirk3Tableau {
    pub a: [[f64; 3]; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
}

impl Dirk3Tableau {
    pub fn alexander() -> Self {
        let g = dirk3_gamma();
        let b1 = -(6.0 * g * g - 16.0 * g + 1.0) / 4.0;
        let b2 = (6.0 * g * g - 20.0 * g + 5.0) / 4.0;
        let c2 = (1.0 + g) / 2.0;
        Dirk3Tableau {
            a: [[g, 0.0, 0.0], [c2 - g, g, 0.0], [b1, b2, g]],
            b: [b1, b2, g],
            c: [g, c2, 1.0],
        }
    }
}

/// Root of `6 g^3 - 18 g^2 + 9 g - 1` in `(1/3, 1/2)`, the one giving A-stability.
pub fn dirk3_gamma() -> f64 {
    let f = |g: f64| ((6.0 * g - 18.0) * g + 9.0) * g - 1.0;
    let (mut lo, mut hi) = (1.0 / 3.0, 0.5);
    // f(1/3) > 0 > f(1/2)
    while hi - lo > 1e-17 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dirk3Report {
    pub u: Vec<f64>,
    pub stages: Vec<NewtonReport>,
}

/// One DIRK3 step from `(t, U^n)`. Stage `i` solves
/// `M (U_i - U^n) + k sum_j a_ij R(U_j, t + c_j k) = 0` by Newton, starting from the previous stage.
/// The scheme is stiffly accurate, so `U^{n+1}` is the last stage.
#[allow(clippy::too_many_arguments)]
pub fn dirk3_step(
    mass: &BlockSparseMatrix,
    mut residual: impl FnMut(&[f64], f64) -> Result<Vec<f64>, TimeSteppingError>,
    mut jacobian: impl FnMut(&[f64], f64) -> Result<BlockSparseMatrix, TimeSteppingError>,
    un: &[f64],
    t: f64,
    cfg: &TimeStepConfig,
) -> Result<Dirk3Report, TimeSteppingError> {
    cfg.validate()?;
    let tab = Dirk3Tableau::alexander();
    let k = cfg.k;
    let mut stage_r: Vec<Vec<f64>> = Vec::new();
    let mut stages = Vec::new();
    let mut guess = un.to_vec();
    for i in 0..3 {
        let ti = t + tab.c[i] * k;
        let aii = tab.a[i][i];
        // explicit part: -M U^n + k sum_{j<i} a_ij R_j
        let mut base = vec![0.0; un.len()];
        mass.matvec(un, &mut base);
        base.iter_mut().for_each(|v| *v = -*v);
        for (j, rj) in stage_r.iter().enumerate() {
            let s = k * tab.a[i][j];
            base.iter_mut().zip(rj).for_each(|(b, r)| *b += s * r);
        }
        let rep = newton_solve(
            |u| {
                let r = residual(u, ti)?;
                let mut g = vec![0.0; u.len()];
                mass.matvec(u, &mut g);
                for ((gv, bv), rv) in g.iter_mut().zip(&base).zip(&r) {
                    *gv += bv + k * aii * rv;
                }
                Ok(g)
            },
            |u| {
                let mut j = jacobian(u, ti)?;
                j.scale(k * aii);
                j.add_scaled(1.0, mass)?;
                Ok(j)
            },
            guess,
            cfg.newton_tol,
            cfg.newton_max_iters,
            cfg.jacobian_update,
            &cfg.linear,
        )?;
        guess = rep.u.clone();
        stage_r.push(residual(&rep.u, ti)?);
        stages.push(rep);
    }
    Ok(Dirk3Report { u: guess, stages })
}

/// One backward Euler step `M (U - U^n) + k R(U, t + k) = 0` solved by Newton from `U^n`.
pub fn backward_euler_nonlinear_step(
    mass: &BlockSparseMatrix,
    mut residual: impl FnMut(&[f64], f64) -> Result<Vec<f64>, TimeSteppingError>,
    mut jacobian: impl FnMut(&[f64], f64) -> Result<BlockSparseMatrix, TimeSteppingError>,
    un: &[f64],
    t: f64,
    cfg: &TimeStepConfig,
) -> Result<NewtonReport, TimeSteppingError> {
    cfg.validate()?;
    let (k, t1) = (cfg.k, t + cfg.k);
    let mut mun = vec![0.0; un.len()];
    mass.matvec(un, &mut mun);
    newton_solve(
        |u| {
            let r = residual(u, t1)?;
            let mut g = vec![0.0; u.len()];
            mass.matvec(u, &mut g);
            for ((gv, m), rv) in g.iter_mut().zip(&mun).zip(&r) {
                *gv += k * rv - m;
            }
            Ok(g)
        },
        |u| {
            let mut j = jacobian(u, t1)?;
            j.scale(k);
            j.add_scaled(1.0, mass)?;
            Ok(j)
        },
        un.to_vec(),
        cfg.newton_tol,
        cfg.newton_max_iters,
        cfg.jacobian_update,
        &cfg.linear,
    )
}
