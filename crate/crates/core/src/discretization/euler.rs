//! Compressible Euler equations in conservative variables `(rho, rho u, rho v, rho E)` and the
//! isentropic vortex.

use std::f64::consts::PI;

use super::conservation::{conservation_jacobian, conservation_residual, conservation_residual_frozen, lax_friedrichs_flux, ConservationLaw};
use super::advection::Velocity;
use super::DiscretizationError;
use crate::basis::DgSpace;
use crate::geometry::{self, Point};
use crate::linalg::BlockSparseMatrix;
use crate::mesh::{BoundaryTag, PolyMesh};

/// Gas and vortex parameters. `p_inf` is derived from the others.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerParams {
    pub gamma: f64,
    pub mach: f64,
    pub u_inf: f64,
    pub rho_inf: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub r_c: f64,
    pub x0: f64,
    pub y0: f64,
}

impl Default for EulerParams {
    fn default() -> Self {
        EulerParams {
            gamma: 1.4,
            mach: 0.5,
            u_inf: 1.0,
            rho_inf: 1.0,
            theta: 0.5f64.atan(),
            epsilon: 0.3,
            r_c: 1.5,
            x0: 5.0,
            y0: 5.0,
        }
    }
}

impl EulerParams {
    pub fn p_inf(&self) -> f64 {
        self.rho_inf * self.u_inf * self.u_inf / (self.gamma * self.mach * self.mach)
    }

    pub fn freestream_velocity(&self) -> Point {
        [self.u_inf * self.theta.cos(), self.u_inf * self.theta.sin()]
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma > 1.0) || !(self.r_c > 0.0) || !(self.mach > 0.0) || !(self.rho_inf > 0.0) {
            return Err(format!("invalid Euler parameters {self:?}"));
        }
        Ok(())
    }

    pub fn pressure(&self, u: &[f64; 4]) -> f64 {
        (self.gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0])
    }

    pub fn to_conservative(&self, w: &Primitive) -> [f64; 4] {
        let e = w.p / (self.gamma - 1.0) + 0.5 * w.rho * (w.u * w.u + w.v * w.v);
        [w.rho, w.rho * w.u, w.rho * w.v, e]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
}

/// Exact vortex solution at `(x, t)`: primitive and conservative variables.
pub fn vortex_exact(x: Point, t: f64, prm: &EulerParams) -> (Primitive, [f64; 4]) {
    let [ub, vb] = prm.freestream_velocity();
    let dx = x[0] - prm.x0 - ub * t;
    let dy = x[1] - prm.y0 - vb * t;
    let f = (1.0 - dx * dx - dy * dy) / (prm.r_c * prm.r_c);
    let g = prm.epsilon / (2.0 * PI * prm.r_c) * (0.5 * f).exp();
    let u = prm.u_inf * (prm.theta.cos() - g * dy);
    let v = prm.u_inf * (prm.theta.sin() + g * dx);
    let base = 1.0 - prm.epsilon * prm.epsilon * (prm.gamma - 1.0) * prm.mach * prm.mach / (8.0 * PI * PI) * f.exp();
    let rho = prm.rho_inf * base.powf(1.0 / (prm.gamma - 1.0));
    let p = prm.p_inf() * base.powf(prm.gamma / (prm.gamma - 1.0));
    let w = Primitive { rho, u, v, p };
    (w, prm.to_conservative(&w))
}

fn physical(prm: &EulerParams, u: &[f64; 4]) -> Result<(), String> {
    if !u.iter().all(|v| v.is_finite()) {
        return Err(format!("non-finite state {u:?}"));
    }
    if u[0] <= 0.0 {
        return Err(format!("density {} <= 0", u[0]));
    }
    let p = prm.pressure(u);
    if p <= 0.0 {
        return Err(format!("pressure {p} <= 0"));
    }
    Ok(())
}

/// Physical flux `(F_x, F_y)`.
pub fn euler_flux(prm: &EulerParams, u: &[f64; 4]) -> [[f64; 4]; 2] {
    let (vx, vy) = (u[1] / u[0], u[2] / u[0]);
    let p = prm.pressure(u);
    [
        [u[1], u[1] * vx + p, u[2] * vx, vx * (u[3] + p)],
        [u[2], u[1] * vy, u[2] * vy + p, vy * (u[3] + p)],
    ]
}

/// Lax–Friedrichs flux between two physical states.
pub fn lax_friedrichs(um: &[f64; 4], up: &[f64; 4], n: Point, prm: &EulerParams) -> Result<[f64; 4], DiscretizationError> {
    for s in [um, up] {
        physical(prm, s).map_err(|_| DiscretizationError::NonPhysicalState { state: *s })?;
    }
    let law = EulerLaw::new(*prm);
    Ok(lax_friedrichs_flux(&law, um, up, n, [0.0, 0.0], None))
}

/// The Euler system. Every non-periodic boundary takes the exact vortex state as exterior trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerLaw {
    pub params: EulerParams,
}

impl EulerLaw {
    pub fn new(params: EulerParams) -> Self {
        EulerLaw { params }
    }
}

impl ConservationLaw<4> for EulerLaw {
    fn flux(&self, u: &[f64; 4], _x: Point) -> [[f64; 4]; 2] {
        euler_flux(&self.params, u)
    }

    fn normal_jacobian(&self, u: &[f64; 4], n: Point, _x: Point) -> [[f64; 4]; 4] {
        let g = self.params.gamma;
        let g1 = g - 1.0;
        let (v1, v2) = (u[1] / u[0], u[2] / u[0]);
        let q2 = v1 * v1 + v2 * v2;
        let h = (u[3] + self.params.pressure(u)) / u[0];
        let vn = v1 * n[0] + v2 * n[1];
        [
            [0.0, n[0], n[1], 0.0],
            [-v1 * vn + n[0] * g1 * q2 / 2.0, v1 * n[0] + vn - g1 * v1 * n[0], v1 * n[1] - g1 * v2 * n[0], g1 * n[0]],
            [-v2 * vn + n[1] * g1 * q2 / 2.0, v2 * n[0] - g1 * v1 * n[1], v2 * n[1] + vn - g1 * v2 * n[1], g1 * n[1]],
            [vn * (g1 * q2 / 2.0 - h), h * n[0] - g1 * v1 * vn, h * n[1] - g1 * v2 * vn, g * vn],
        ]
    }

    fn max_speed(&self, u: &[f64; 4], n: Point, _x: Point) -> f64 {
        let vn = (u[1] * n[0] + u[2] * n[1]) / u[0];
        let c = (self.params.gamma * self.params.pressure(u) / u[0]).sqrt();
        vn.abs() + c
    }

    fn check(&self, u: &[f64; 4]) -> Result<(), String> {
        physical(&self.params, u)
    }

    fn boundary_state(&self, _tag: BoundaryTag, x: Point, t: f64, _interior: &[f64; 4]) -> [f64; 4] {
        vortex_exact(x, t, &self.params).1
    }
}

/// Euler residual `R(U)` at time `t` (the time of the exterior exact states).
pub fn euler_residual(mesh: &PolyMesh, space: &DgSpace, u: &[f64], prm: &EulerParams, t: f64) -> Result<Vec<f64>, DiscretizationError> {
    conservation_residual(mesh, space, &EulerLaw::new(*prm), u, t)
}

/// Euler residual with the Lax–Friedrichs coefficient taken from `alpha_state`.
pub fn euler_residual_frozen(
    mesh: &PolyMesh,
    space: &DgSpace,
    u: &[f64],
    prm: &EulerParams,
    t: f64,
    alpha_state: &[f64],
) -> Result<Vec<f64>, DiscretizationError> {
    conservation_residual_frozen(mesh, space, &EulerLaw::new(*prm), u, t, alpha_state)
}

pub fn euler_jacobian(mesh: &PolyMesh, space: &DgSpace, u: &[f64], prm: &EulerParams, t: f64) -> Result<BlockSparseMatrix, DiscretizationError> {
    conservation_jacobian(mesh, space, &EulerLaw::new(*prm), u, t)
}

/// `M` independent copies of linear advection. With the Lax–Friedrichs coefficient `|beta . n|`
/// the numerical flux is the upwind flux, so this reproduces the linear advection operator.
#[derive(Clone, Debug)]
pub struct ScalarAdvectionLaw {
    pub velocity: Velocity,
}

impl<const M: usize> ConservationLaw<M> for ScalarAdvectionLaw {
    fn flux(&self, u: &[f64; M], x: Point) -> [[f64; M]; 2] {
        let b = self.velocity.at(x);
        [u.map(|v| b[0] * v), u.map(|v| b[1] * v)]
    }

    fn normal_jacobian(&self, _u: &[f64; M], n: Point, x: Point) -> [[f64; M]; M] {
        let bn = geometry::dot(self.velocity.at(x), n);
        let mut a = [[0.0; M]; M];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = bn;
        }
        a
    }

    fn max_speed(&self, _u: &[f64; M], n: Point, x: Point) -> f64 {
        geometry::dot(self.velocity.at(x), n).abs()
    }

    fn check(&self, u: &[f64; M]) -> Result<(), String> {
        if u.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err("non-finite state".into())
        }
    }

    fn boundary_state(&self, _tag: BoundaryTag, _x: Point, _t: f64, _interior: &[f64; M]) -> [f64; M] {
        [0.0; M]
    }
}
