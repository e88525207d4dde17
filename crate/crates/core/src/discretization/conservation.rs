//! DG residual and Jacobian for systems `u_t + div F(u) = 0` with the Lax–Friedrichs flux.

use super::advection::{add_to, face_pattern};
use super::DiscretizationError;
use crate::basis::DgSpace;
use crate::geometry::{self, Point};
use crate::linalg::BlockSparseMatrix;
use crate::mesh::{BoundaryTag, FaceNeighbor, PolyMesh};

/// A system of `M` conservation laws.
pub trait ConservationLaw<const M: usize> {
    /// Physical flux `(F_x, F_y)` at `x`.
    fn flux(&self, u: &[f64; M], x: Point) -> [[f64; M]; 2];
    /// `d(F(u) . n)/du`, row-major.
    fn normal_jacobian(&self, u: &[f64; M], n: Point, x: Point) -> [[f64; M]; M];
    /// Largest characteristic speed `|lambda(d(F . n)/du)|`.
    fn max_speed(&self, u: &[f64; M], n: Point, x: Point) -> f64;
    /// `Err(reason)` when `u` is outside the admissible set.
    fn check(&self, u: &[f64; M]) -> Result<(), String>;
    /// Exterior state on a non-periodic boundary.
    fn boundary_state(&self, tag: BoundaryTag, x: Point, t: f64, interior: &[f64; M]) -> [f64; M];
}

/// Lax–Friedrichs flux `(F(u-).n + F(u+).n + a (u- - u+)) / 2`, with `a` the larger of the two
/// states' maximal speeds unless supplied.
pub fn lax_friedrichs_flux<L: ConservationLaw<M>, const M: usize>(
    law: &L,
    um: &[f64; M],
    up: &[f64; M],
    n: Point,
    x: Point,
    lf_alpha: Option<f64>,
) -> [f64; M] {
    let a = lf_alpha.unwrap_or_else(|| law.max_speed(um, n, x).max(law.max_speed(up, n, x)));
    let fm = law.flux(um, x);
    let fp = law.flux(up, x);
    let mut out = [0.0; M];
    for c in 0..M {
        out[c] = 0.5 * (fm[0][c] * n[0] + fm[1][c] * n[1] + fp[0][c] * n[0] + fp[1][c] * n[1] + a * (um[c] - up[c]));
    }
    out
}

/// Layout of a state vector: cell blocks of `M` components times `n_loc` modes.
#[inline]
pub fn state_index(n_loc: usize, m: usize, cell: usize, comp: usize, mode: usize) -> usize {
    (cell * m + comp) * n_loc + mode
}

/// Block-diagonal mass matrix for `m` components, each block `m n_loc` square.
pub fn system_mass_matrix(space: &DgSpace, m: usize) -> BlockSparseMatrix {
    let n = space.n_loc();
    let blocks: Vec<Vec<f64>> = (0..space.n_cells())
        .map(|c| {
            let mb = space.mass_block(c);
            let mut b = vec![0.0; m * n * m * n];
            for comp in 0..m {
                for i in 0..n {
                    for j in 0..n {
                        b[(comp * n + i) * m * n + comp * n + j] = mb[i * n + j];
                    }
                }
            }
            b
        })
        .collect();
    BlockSparseMatrix::block_diagonal(m * n, &blocks)
}

fn trace<const M: usize>(u: &[f64], cell: usize, phi: &[f64]) -> [f64; M] {
    let n = phi.len();
    let mut out = [0.0; M];
    for (c, o) in out.iter_mut().enumerate() {
        let base = (cell * M + c) * n;
        *o = (0..n).map(|i| u[base + i] * phi[i]).sum();
    }
    out
}

struct FaceNode<const M: usize> {
    x: Point,
    w: f64,
    um: [f64; M],
    up: [f64; M],
    alpha: f64,
}

/// Visit every face quadrature node with both traces and the frozen dissipation coefficient.
#[allow(clippy::too_many_arguments)]
fn for_each_face_node<L: ConservationLaw<M>, const M: usize>(
    mesh: &PolyMesh,
    space: &DgSpace,
    law: &L,
    u: &[f64],
    t: f64,
    alpha_state: &[f64],
    mut visit: impl FnMut(usize, &crate::mesh::Face, &FaceNode<M>, &[f64], &[f64]) -> Result<(), DiscretizationError>,
) -> Result<(), DiscretizationError> {
    let n = space.n_loc();
    let (tn, tw) = space.edge_rule();
    let mut pl = vec![0.0; n];
    let mut pr = vec![0.0; n];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let [a, b] = f.points;
        for (&s, &sw) in tn.iter().zip(tw) {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let w = sw * f.length;
            space.eval(f.left, x, &mut pl);
            let um = trace::<M>(u, f.left, &pl);
            law.check(&um).map_err(|reason| DiscretizationError::NonPhysical { cell: f.left, reason })?;
            let am = trace::<M>(alpha_state, f.left, &pl);
            let (up, ap) = match f.neighbor {
                FaceNeighbor::Cell { cell, shift } => {
                    space.eval(cell, geometry::add(x, shift), &mut pr);
                    let up = trace::<M>(u, cell, &pr);
                    law.check(&up).map_err(|reason| DiscretizationError::NonPhysical { cell, reason })?;
                    (up, trace::<M>(alpha_state, cell, &pr))
                }
                FaceNeighbor::Boundary(tag) => {
                    pr.iter_mut().for_each(|v| *v = 0.0);
                    let up = law.boundary_state(tag, x, t, &um);
                    let ap = law.boundary_state(tag, x, t, &am);
                    (up, ap)
                }
            };
            let alpha = law.max_speed(&am, f.normal, x).max(law.max_speed(&ap, f.normal, x));
            visit(fi, f, &FaceNode { x, w, um, up, alpha }, &pl, &pr)?;
        }
    }
    Ok(())
}

/// Residual `R(U)` with `M dU/dt + R(U) = 0` at time `t` (which sets exterior boundary states).
pub fn conservation_residual<L: ConservationLaw<M>, const M: usize>(
    mesh: &PolyMesh,
    space: &DgSpace,
    law: &L,
    u: &[f64],
    t: f64,
) -> Result<Vec<f64>, DiscretizationError> {
    conservation_residual_frozen(mesh, space, law, u, t, u)
}

/// Residual with the Lax–Friedrichs coefficient evaluated from `alpha_state` instead of `u`.
/// Its derivative at `u = alpha_state` is exactly [`conservation_jacobian`].
pub fn conservation_residual_frozen<L: ConservationLaw<M>, const M: usize>(
    mesh: &PolyMesh,
    space: &DgSpace,
    law: &L,
    u: &[f64],
    t: f64,
    alpha_state: &[f64],
) -> Result<Vec<f64>, DiscretizationError> {
    let n = space.n_loc();
    check_len(mesh, space, M, u)?;
    let mut r = vec![0.0; u.len()];
    for c in 0..mesh.n_cells() {
        let q = space.volume_quadrature(c);
        for (k, (&x, &w)) in q.nodes.iter().zip(&q.weights).enumerate() {
            let uq = trace::<M>(u, c, space.values_at(c, k));
            law.check(&uq).map_err(|reason| DiscretizationError::NonPhysical { cell: c, reason })?;
            let f = law.flux(&uq, x);
            let grad = space.gradients_at(c, k);
            for comp in 0..M {
                let base = (c * M + comp) * n;
                for i in 0..n {
                    r[base + i] -= w * (f[0][comp] * grad[i][0] + f[1][comp] * grad[i][1]);
                }
            }
        }
    }
    for_each_face_node::<L, M>(mesh, space, law, u, t, alpha_state, |_, f, node, pl, pr| {
        let fh = lax_friedrichs_flux(law, &node.um, &node.up, f.normal, node.x, Some(node.alpha));
        for comp in 0..M {
            let bl = (f.left * M + comp) * n;
            for i in 0..n {
                r[bl + i] += node.w * fh[comp] * pl[i];
            }
            if let FaceNeighbor::Cell { cell, .. } = f.neighbor {
                let br = (cell * M + comp) * n;
                for i in 0..n {
                    r[br + i] -= node.w * fh[comp] * pr[i];
                }
            }
        }
        Ok(())
    })?;
    Ok(r)
}

/// Analytic Jacobian `dR/dU` with the Lax–Friedrichs coefficient held fixed.
pub fn conservation_jacobian<L: ConservationLaw<M>, const M: usize>(
    mesh: &PolyMesh,
    space: &DgSpace,
    law: &L,
    u: &[f64],
    t: f64,
) -> Result<BlockSparseMatrix, DiscretizationError> {
    let n = space.n_loc();
    check_len(mesh, space, M, u)?;
    let b = M * n;
    let mut jac = BlockSparseMatrix::from_pattern(b, &face_pattern(mesh));
    let mut blk = vec![0.0; b * b];
    for c in 0..mesh.n_cells() {
        blk.iter_mut().for_each(|v| *v = 0.0);
        let q = space.volume_quadrature(c);
        for (k, (&x, &w)) in q.nodes.iter().zip(&q.weights).enumerate() {
            let phi = space.values_at(c, k);
            let uq = trace::<M>(u, c, phi);
            law.check(&uq).map_err(|reason| DiscretizationError::NonPhysical { cell: c, reason })?;
            let ax = law.normal_jacobian(&uq, [1.0, 0.0], x);
            let ay = law.normal_jacobian(&uq, [0.0, 1.0], x);
            let grad = space.gradients_at(c, k);
            for ci in 0..M {
                for i in 0..n {
                    let row = ci * n + i;
                    for cj in 0..M {
                        let g = w * (ax[ci][cj] * grad[i][0] + ay[ci][cj] * grad[i][1]);
                        if g == 0.0 {
                            continue;
                        }
                        for j in 0..n {
                            blk[row * b + cj * n + j] -= g * phi[j];
                        }
                    }
                }
            }
        }
        add_to(&mut jac, c, c, &blk);
    }

    let mut cur_face = usize::MAX;
    let mut ll = vec![0.0; b * b];
    let mut lr = vec![0.0; b * b];
    let mut rl = vec![0.0; b * b];
    let mut rr = vec![0.0; b * b];
    let faces = mesh.faces();
    let flush = |jac: &mut BlockSparseMatrix, fi: usize, ll: &[f64], lr: &[f64], rl: &[f64], rr: &[f64]| {
        let f = &faces[fi];
        add_to(jac, f.left, f.left, ll);
        if let FaceNeighbor::Cell { cell, .. } = f.neighbor {
            add_to(jac, f.left, cell, lr);
            add_to(jac, cell, f.left, rl);
            add_to(jac, cell, cell, rr);
        }
    };
    for_each_face_node::<L, M>(mesh, space, law, u, t, u, |fi, f, node, pl, pr| {
        if fi != cur_face {
            if cur_face != usize::MAX {
                flush(&mut jac, cur_face, &ll, &lr, &rl, &rr);
            }
            for m in [&mut ll, &mut lr, &mut rl, &mut rr] {
                m.iter_mut().for_each(|v| *v = 0.0);
            }
            cur_face = fi;
        }
        // dF/du- = (A(u-) + a I)/2, dF/du+ = (A(u+) - a I)/2
        let mut dm = law.normal_jacobian(&node.um, f.normal, node.x);
        let interior = matches!(f.neighbor, FaceNeighbor::Cell { .. });
        let mut dp = if interior { law.normal_jacobian(&node.up, f.normal, node.x) } else { [[0.0; M]; M] };
        for ci in 0..M {
            for cj in 0..M {
                dm[ci][cj] *= 0.5;
                dp[ci][cj] *= 0.5;
            }
            dm[ci][ci] += 0.5 * node.alpha;
            dp[ci][ci] -= 0.5 * node.alpha;
        }
        for ci in 0..M {
            for cj in 0..M {
                let (gm, gp) = (node.w * dm[ci][cj], node.w * dp[ci][cj]);
                for i in 0..n {
                    let row = (ci * n + i) * b + cj * n;
                    for j in 0..n {
                        ll[row + j] += gm * pl[i] * pl[j];
                        if interior {
                            lr[row + j] += gp * pl[i] * pr[j];
                            rl[row + j] -= gm * pr[i] * pl[j];
                            rr[row + j] -= gp * pr[i] * pr[j];
                        }
                    }
                }
            }
        }
        Ok(())
    })?;
    if cur_face != usize::MAX {
        flush(&mut jac, cur_face, &ll, &lr, &rl, &rr);
    }
    Ok(jac)
}

fn check_len(mesh: &PolyMesh, space: &DgSpace, m: usize, u: &[f64]) -> Result<(), DiscretizationError> {
    if mesh.n_cells() != space.n_cells() {
        return Err(DiscretizationError::SpaceMismatch { mesh: mesh.n_cells(), space: space.n_cells() });
    }
    let expected = mesh.n_cells() * m * space.n_loc();
    if u.len() != expected {
        return Err(DiscretizationError::StateLength { expected, found: u.len() });
    }
    Ok(())
}
