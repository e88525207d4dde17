//! Linear advection `u_t + div(beta u) = 0` with the upwind flux.

use std::fmt;
use std::sync::Arc;

use super::DiscretizationError;
use crate::basis::DgSpace;
use crate::geometry::{self, Point};
use crate::linalg::BlockSparseMatrix;
use crate::mesh::{FaceNeighbor, PolyMesh};

/// Advection velocity: constant, or evaluated pointwise at every quadrature node.
#[derive(Clone)]
pub enum Velocity {
    Constant(Point),
    Field(Arc<dyn Fn(Point) -> Point + Send + Sync>),
}

impl Velocity {
    /// The rotating field `(2y - 1, -2x + 1)` about `(1/2, 1/2)`.
    pub fn rotating() -> Self {
        Velocity::Field(Arc::new(|p: Point| [2.0 * p[1] - 1.0, -2.0 * p[0] + 1.0]))
    }

    #[inline]
    pub fn at(&self, x: Point) -> Point {
        match self {
            Velocity::Constant(b) => *b,
            Velocity::Field(f) => f(x),
        }
    }
}

impl fmt::Debug for Velocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Velocity::Constant(b) => write!(f, "Constant({b:?})"),
            Velocity::Field(_) => f.write_str("Field(..)"),
        }
    }
}

/// Semi-discrete operator `M dU/dt + L U = 0`.
#[derive(Clone, Debug)]
pub struct AdvectionOperator {
    pub mass: BlockSparseMatrix,
    pub l: BlockSparseMatrix,
    pub velocity: Velocity,
}

impl AdvectionOperator {
    /// `M + k L` on the pattern of `L`.
    pub fn implicit_matrix(&self, k: f64) -> BlockSparseMatrix {
        let mut a = self.l.clone();
        a.scale(k);
        a.add_scaled(1.0, &self.mass).expect("mass pattern is the diagonal");
        a
    }
}

/// Sparsity of a face-coupled operator: the diagonal plus both neighbours of every face.
pub(crate) fn face_pattern(mesh: &PolyMesh) -> Vec<Vec<usize>> {
    let mut rows: Vec<Vec<usize>> = (0..mesh.n_cells()).map(|c| vec![c]).collect();
    for f in mesh.faces() {
        if let FaceNeighbor::Cell { cell, .. } = f.neighbor {
            rows[f.left].push(cell);
            rows[cell].push(f.left);
        }
    }
    rows
}

pub fn mass_matrix(space: &DgSpace) -> BlockSparseMatrix {
    let blocks: Vec<Vec<f64>> = (0..space.n_cells()).map(|c| space.mass_block(c)).collect();
    BlockSparseMatrix::block_diagonal(space.n_loc(), &blocks)
}

/// Assemble `M` and `L`. Non-periodic boundaries take exterior state zero (only outflow
/// contributes). Both off-diagonal blocks of every face are stored even where the upwind
/// direction makes one of them vanish.
pub fn assemble_advection(mesh: &PolyMesh, space: &DgSpace, velocity: Velocity) -> Result<AdvectionOperator, DiscretizationError> {
    if mesh.n_cells() != space.n_cells() {
        return Err(DiscretizationError::SpaceMismatch { mesh: mesh.n_cells(), space: space.n_cells() });
    }
    let n = space.n_loc();
    let mut l = BlockSparseMatrix::from_pattern(n, &face_pattern(mesh));

    let mut blk = vec![0.0; n * n];
    for c in 0..mesh.n_cells() {
        blk.iter_mut().for_each(|v| *v = 0.0);
        let q = space.volume_quadrature(c);
        for (k, (&x, &w)) in q.nodes.iter().zip(&q.weights).enumerate() {
            let b = velocity.at(x);
            if !b[0].is_finite() || !b[1].is_finite() {
                return Err(DiscretizationError::VelocityNotFinite { cell: c });
            }
            let phi = space.values_at(c, k);
            let grad = space.gradients_at(c, k);
            for i in 0..n {
                let bg = w * geometry::dot(b, grad[i]);
                for j in 0..n {
                    blk[i * n + j] -= bg * phi[j];
                }
            }
        }
        add_to(&mut l, c, c, &blk);
    }

    let (t_nodes, t_weights) = space.edge_rule();
    let mut pl = vec![0.0; n];
    let mut pr = vec![0.0; n];
    let mut ll = vec![0.0; n * n];
    let mut lr = vec![0.0; n * n];
    let mut rl = vec![0.0; n * n];
    let mut rr = vec![0.0; n * n];
    for f in mesh.faces() {
        for m in [&mut ll, &mut lr, &mut rl, &mut rr] {
            m.iter_mut().for_each(|v| *v = 0.0);
        }
        let [a, b] = f.points;
        for (&t, &tw) in t_nodes.iter().zip(t_weights) {
            let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let w = tw * f.length;
            let beta = velocity.at(x);
            if !beta[0].is_finite() || !beta[1].is_finite() {
                return Err(DiscretizationError::VelocityNotFinite { cell: f.left });
            }
            let bn = geometry::dot(beta, f.normal);
            space.eval(f.left, x, &mut pl);
            match f.neighbor {
                FaceNeighbor::Cell { cell, shift } => {
                    space.eval(cell, geometry::add(x, shift), &mut pr);
                    if bn >= 0.0 {
                        outer_add(&mut ll, w * bn, &pl, &pl);
                        outer_add(&mut rl, -w * bn, &pr, &pl);
                    } else {
                        outer_add(&mut lr, w * bn, &pl, &pr);
                        outer_add(&mut rr, -w * bn, &pr, &pr);
                    }
                }
                FaceNeighbor::Boundary(_) => {
                    if bn >= 0.0 {
                        outer_add(&mut ll, w * bn, &pl, &pl);
                    }
                }
            }
        }
        add_to(&mut l, f.left, f.left, &ll);
        if let FaceNeighbor::Cell { cell, .. } = f.neighbor {
            add_to(&mut l, f.left, cell, &lr);
            add_to(&mut l, cell, f.left, &rl);
            add_to(&mut l, cell, cell, &rr);
        }
    }
    Ok(AdvectionOperator { mass: mass_matrix(space), l, velocity })
}

fn outer_add(m: &mut [f64], s: f64, u: &[f64], v: &[f64]) {
    let n = v.len();
    for i in 0..u.len() {
        for j in 0..n {
            m[i * n + j] += s * u[i] * v[j];
        }
    }
}

pub(crate) fn add_to(a: &mut BlockSparseMatrix, i: usize, j: usize, blk: &[f64]) {
    let dst = a.block_mut(i, j).expect("block in face pattern");
    for (d, s) in dst.iter_mut().zip(blk) {
        *d += s;
    }
}

/// Gaussian bump `exp(-150 |x - (0.35, 0.5)|^2)`.
pub fn gaussian_initial_condition(x: Point) -> f64 {
    let dx = x[0] - 0.35;
    let dy = x[1] - 0.5;
    (-150.0 * (dx * dx + dy * dy)).exp()
}
