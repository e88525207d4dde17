//! DG operators: linear upwind advection, the compressible Euler residual and Jacobian, and a
//! 1D reference discretization.

mod advection;
mod conservation;
mod euler;
mod oned;

use thiserror::Error;

use crate::basis::DgSpace;
use crate::geometry::Point;
use crate::linalg::dense::DenseLu;

pub use advection::{assemble_advection, gaussian_initial_condition, mass_matrix, AdvectionOperator, Velocity};
pub use conservation::{
    conservation_jacobian, conservation_residual, conservation_residual_frozen, lax_friedrichs_flux, state_index, system_mass_matrix, ConservationLaw,
};
pub use euler::{
    euler_flux, euler_jacobian, euler_residual, euler_residual_frozen, lax_friedrichs, vortex_exact, EulerLaw, EulerParams, Primitive,
    ScalarAdvectionLaw,
};
pub use oned::{oned_advection, OneDOperator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizationError {
    #[error("mesh has {mesh} cells but the space has {space}")]
    SpaceMismatch { mesh: usize, space: usize },
    #[error("velocity is not finite in cell {cell}")]
    VelocityNotFinite { cell: usize },
    #[error("state vector has length {found}, expected {expected}")]
    StateLength { expected: usize, found: usize },
    #[error("non-physical state in cell {cell}: {reason}")]
    NonPhysical { cell: usize, reason: String },
    #[error("non-physical state {state:?}")]
    NonPhysicalState { state: [f64; 4] },
}

/// L2 projection of a scalar function; see [`project`].
pub fn project_scalar(space: &DgSpace, f: impl Fn(Point) -> f64) -> Vec<f64> {
    project::<1>(space, |x| [f(x)])
}

/// Element-wise L2 projection of an `M`-component function onto the DG space, in the
/// component-major state layout of [`state_index`].
pub fn project<const M: usize>(space: &DgSpace, f: impl Fn(Point) -> [f64; M]) -> Vec<f64> {
    let n = space.n_loc();
    let mut u = vec![0.0; space.n_cells() * M * n];
    let mut rhs = vec![0.0; n];
    for c in 0..space.n_cells() {
        let lu = DenseLu::new(&space.mass_block(c), n).expect("mass block is positive definite");
        let q = space.volume_quadrature(c);
        for comp in 0..M {
            rhs.iter_mut().for_each(|v| *v = 0.0);
            for (k, (&x, &w)) in q.nodes.iter().zip(&q.weights).enumerate() {
                let fx = f(x)[comp];
                for (r, &phi) in rhs.iter_mut().zip(space.values_at(c, k)) {
                    *r += w * fx * phi;
                }
            }
            lu.solve_in_place(&mut rhs);
            u[(c * M + comp) * n..(c * M + comp + 1) * n].copy_from_slice(&rhs);
        }
    }
    u
}

/// Element-wise integral of each component of a state vector.
pub fn integrate<const M: usize>(space: &DgSpace, u: &[f64]) -> [f64; M] {
    let n = space.n_loc();
    let mut out = [0.0; M];
    for c in 0..space.n_cells() {
        let q = space.volume_quadrature(c);
        for (k, &w) in q.weights.iter().enumerate() {
            let phi = space.values_at(c, k);
            for (comp, o) in out.iter_mut().enumerate() {
                let base = (c * M + comp) * n;
                *o += w * (0..n).map(|i| u[base + i] * phi[i]).sum::<f64>();
            }
        }
    }
    out
}
