//! Modal polynomial spaces on polygonal cells.

mod quadrature;

pub use quadrature::{
    edge_quadrature, gauss_legendre, polygon_quadrature, triangle_quadrature, unit_interval_rule, Quadrature,
    QuadratureError,
};

use thiserror::Error;

use crate::geometry::{self, Point};
use crate::mesh::PolyMesh;

pub const MAX_DEGREE: usize = 3;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("polynomial degree {0} not supported (0..=3)")]
    UnsupportedDegree(usize),
    #[error("cell {cell}: {source}")]
    Quadrature { cell: usize, source: QuadratureError },
    #[error("cell {cell}: monomial {index} is numerically dependent on the previous ones")]
    Dependent { cell: usize, index: usize },
}

/// `(p+1)(p+2)/2`.
pub fn n_loc(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Exponents `(i, j)` of the monomials `x^i y^j`, `i + j <= p`, in graded lexicographic order.
pub fn monomial_exponents(p: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(n_loc(p));
    for d in 0..=p {
        for j in 0..=d {
            e.push((d - j, j));
        }
    }
    e
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// Gram–Schmidt orthonormalized; the mass matrix is the identity.
    Orthonormal,
    /// Raw centered–scaled monomials.
    Monomial,
    /// Tensor Legendre polynomials `P_a(u) P_b(v)` on the cell's bounding box mapped to
    /// `[-1, 1]^2`. Orthogonal on rectangles only; `phi_0 = 1`.
    Legendre,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Orthonormal => "orthonormal",
            BasisKind::Monomial => "monomial",
            BasisKind::Legendre => "legendre",
        }
    }
}

impl std::str::FromStr for BasisKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "orthonormal" => Ok(BasisKind::Orthonormal),
            "monomial" => Ok(BasisKind::Monomial),
            "legendre" => Ok(BasisKind::Legendre),
            _ => Err(format!("unknown basis '{s}' (orthonormal, monomial, legendre)")),
        }
    }
}

/// Basis of one cell: `phi_i = sum_j coeffs[i][j] m_j` with
/// `m_j = ((x - c_x)/s_x)^a ((y - c_y)/s_y)^b`.
#[derive(Clone, Debug)]
pub struct CellBasis {
    pub center: Point,
    pub scale: [f64; 2],
    /// Row-major `n_loc x n_loc`, lower triangular.
    pub coeffs: Vec<f64>,
}

impl CellBasis {
    fn monomials(&self, exps: &[(usize, usize)], x: Point, out: &mut [f64]) {
        let u = (x[0] - self.center[0]) / self.scale[0];
        let v = (x[1] - self.center[1]) / self.scale[1];
        for (k, &(a, b)) in exps.iter().enumerate() {
            out[k] = u.powi(a as i32) * v.powi(b as i32);
        }
    }

    fn monomial_gradients(&self, exps: &[(usize, usize)], x: Point, out: &mut [[f64; 2]]) {
        let u = (x[0] - self.center[0]) / self.scale[0];
        let v = (x[1] - self.center[1]) / self.scale[1];
        let [sx, sy] = [1.0 / self.scale[0], 1.0 / self.scale[1]];
        for (k, &(a, b)) in exps.iter().enumerate() {
            let dx = if a == 0 { 0.0 } else { a as f64 * u.powi(a as i32 - 1) * v.powi(b as i32) * sx };
            let dy = if b == 0 { 0.0 } else { b as f64 * u.powi(a as i32) * v.powi(b as i32 - 1) * sy };
            out[k] = [dx, dy];
        }
    }
}

/// Discontinuous piecewise-polynomial space of degree `p` on a mesh, with the volume
/// quadrature of every cell and the basis tabulated at its nodes.
#[derive(Clone, Debug)]
pub struct DgSpace {
    p: usize,
    n_loc: usize,
    kind: BasisKind,
    exps: Vec<(usize, usize)>,
    cells: Vec<CellBasis>,
    quad: Vec<Quadrature>,
    /// Per cell, `nq x n_loc` basis values at the quadrature nodes.
    values: Vec<Vec<f64>>,
    /// Per cell, `nq x n_loc` basis gradients.
    grads: Vec<Vec<[f64; 2]>>,
    edge_rule: (Vec<f64>, Vec<f64>),
}

impl DgSpace {
    /// Orthonormal space. Volume rules are exact to degree `2p + 1`, edge rules likewise.
    pub fn new(mesh: &PolyMesh, p: usize) -> Result<Self, BasisError> {
        Self::with_kind(mesh, p, BasisKind::Orthonormal)
    }

    pub fn with_kind(mesh: &PolyMesh, p: usize, kind: BasisKind) -> Result<Self, BasisError> {
        if p > MAX_DEGREE {
            return Err(BasisError::UnsupportedDegree(p));
        }
        let q = 2 * p + 1;
        let exps = monomial_exponents(p);
        let n = exps.len();
        let mut cells = Vec::with_capacity(mesh.n_cells());
        let mut quads = Vec::with_capacity(mesh.n_cells());
        let mut values = Vec::with_capacity(mesh.n_cells());
        let mut grads = Vec::with_capacity(mesh.n_cells());
        for c in 0..mesh.n_cells() {
            let poly = mesh.cell_polygon(c);
            let quad = polygon_quadrature(&poly, q).map_err(|source| BasisError::Quadrature { cell: c, source })?;
            let cb = match kind {
                BasisKind::Orthonormal => orthonormal_basis(&poly, &quad, p).map_err(|e| match e {
                    BasisError::Dependent { index, .. } => BasisError::Dependent { cell: c, index },
                    other => other,
                })?,
                BasisKind::Monomial => {
                    let mut coeffs = vec![0.0; n * n];
                    for i in 0..n {
                        coeffs[i * n + i] = 1.0;
                    }
                    let d = geometry::diameter(&poly);
                    CellBasis { center: mesh.cell_centroids()[c], scale: [d, d], coeffs }
                }
                BasisKind::Legendre => legendre_basis(&poly, p),
            };
            let mut v = vec![0.0; quad.len() * n];
            let mut g = vec![[0.0; 2]; quad.len() * n];
            let mut m = vec![0.0; n];
            let mut dm = vec![[0.0; 2]; n];
            for (k, &x) in quad.nodes.iter().enumerate() {
                cb.monomials(&exps, x, &mut m);
                cb.monomial_gradients(&exps, x, &mut dm);
                for i in 0..n {
                    let (mut s, mut sx, mut sy) = (0.0, 0.0, 0.0);
                    for j in 0..=i {
                        let a = cb.coeffs[i * n + j];
                        s += a * m[j];
                        sx += a * dm[j][0];
                        sy += a * dm[j][1];
                    }
                    v[k * n + i] = s;
                    g[k * n + i] = [sx, sy];
                }
            }
            cells.push(cb);
            quads.push(quad);
            values.push(v);
            grads.push(g);
        }
        Ok(DgSpace { p, n_loc: n, kind, exps, cells, quad: quads, values, grads, edge_rule: unit_interval_rule(q) })
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn n_loc(&self) -> usize {
        self.n_loc
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_basis(&self, c: usize) -> &CellBasis {
        &self.cells[c]
    }

    pub fn volume_quadrature(&self, c: usize) -> &Quadrature {
        &self.quad[c]
    }

    /// Basis value `i` at volume node `k` of cell `c`.
    #[inline]
    pub fn value(&self, c: usize, k: usize, i: usize) -> f64 {
        self.values[c][k * self.n_loc + i]
    }

    /// All basis values at volume node `k` of cell `c`.
    #[inline]
    pub fn values_at(&self, c: usize, k: usize) -> &[f64] {
        &self.values[c][k * self.n_loc..(k + 1) * self.n_loc]
    }

    #[inline]
    pub fn gradients_at(&self, c: usize, k: usize) -> &[[f64; 2]] {
        &self.grads[c][k * self.n_loc..(k + 1) * self.n_loc]
    }

    /// Gauss–Legendre nodes and weights on `[0, 1]` used for faces.
    pub fn edge_rule(&self) -> (&[f64], &[f64]) {
        (&self.edge_rule.0, &self.edge_rule.1)
    }

    /// Evaluate every basis function of cell `c` at an arbitrary point.
    pub fn eval(&self, c: usize, x: Point, out: &mut [f64]) {
        let cb = &self.cells[c];
        let n = self.n_loc;
        let mut m = [0.0; 10];
        cb.monomials(&self.exps, x, &mut m[..n]);
        for i in 0..n {
            out[i] = (0..=i).map(|j| cb.coeffs[i * n + j] * m[j]).sum();
        }
    }

    /// Local mass matrix of cell `c` (row-major), the identity for orthonormal spaces.
    pub fn mass_block(&self, c: usize) -> Vec<f64> {
        let n = self.n_loc;
        let mut out = vec![0.0; n * n];
        for (k, &w) in self.quad[c].weights.iter().enumerate() {
            let v = self.values_at(c, k);
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += w * v[i] * v[j];
                }
            }
        }
        out
    }

    /// Value of the expansion `coeffs` (length `n_loc`) at `x` in cell `c`.
    pub fn evaluate_expansion(&self, c: usize, coeffs: &[f64], x: Point) -> f64 {
        let mut v = [0.0; 10];
        self.eval(c, x, &mut v[..self.n_loc]);
        coeffs.iter().zip(&v).map(|(a, b)| a * b).sum()
    }
}

/// Power-basis coefficients of the Legendre polynomials `P_0..P_3`.
const LEGENDRE: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [-0.5, 0.0, 1.5, 0.0], [0.0, -1.5, 0.0, 2.5]];

/// Tensor Legendre basis on the bounding box of `poly`, in the graded order of
/// [`monomial_exponents`].
pub fn legendre_basis(poly: &[Point], p: usize) -> CellBasis {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for q in poly {
        for d in 0..2 {
            lo[d] = lo[d].min(q[d]);
            hi[d] = hi[d].max(q[d]);
        }
    }
    let exps = monomial_exponents(p);
    let n = exps.len();
    let mut coeffs = vec![0.0; n * n];
    for (i, &(a, b)) in exps.iter().enumerate() {
        for (j, &(e, f)) in exps.iter().enumerate() {
            coeffs[i * n + j] = LEGENDRE[a][e] * LEGENDRE[b][f];
        }
    }
    CellBasis {
        center: [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])],
        scale: [0.5 * (hi[0] - lo[0]), 0.5 * (hi[1] - lo[1])],
        coeffs,
    }
}

/// Modified Gram–Schmidt on centered–scaled monomials under the discrete inner product of
/// `quad` (exact for the degree-`2p` products involved). Each vector is orthogonalized twice.
pub fn orthonormal_basis(poly: &[Point], quad: &Quadrature, p: usize) -> Result<CellBasis, BasisError> {
    if p > MAX_DEGREE {
        return Err(BasisError::UnsupportedDegree(p));
    }
    let exps = monomial_exponents(p);
    let n = exps.len();
    let nq = quad.len();
    let cb0 = CellBasis {
        center: geometry::centroid(poly),
        scale: [geometry::diameter(poly); 2],
        coeffs: Vec::new(),
    };
    // sqrt(w)-weighted samples, so inner products are plain dot products
    let sw: Vec<f64> = quad.weights.iter().map(|w| w.sqrt()).collect();
    let mut mono = vec![0.0; nq * n];
    let mut m = vec![0.0; n];
    for (k, &x) in quad.nodes.iter().enumerate() {
        cb0.monomials(&exps, x, &mut m);
        for i in 0..n {
            mono[i * nq + k] = m[i] * sw[k];
        }
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut coeffs = vec![0.0; n * n];
    for i in 0..n {
        let mut v = mono[i * nq..(i + 1) * nq].to_vec();
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        let norm0 = dot(&v, &v).sqrt();
        for _pass in 0..2 {
            for j in 0..i {
                let r = dot(&v, &q[j]);
                for (vk, qk) in v.iter_mut().zip(&q[j]) {
                    *vk -= r * qk;
                }
                for t in 0..=j {
                    c[t] -= r * coeffs[j * n + t];
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if !(norm > 1e-10 * norm0) {
            return Err(BasisError::Dependent { cell: 0, index: i });
        }
        for vk in v.iter_mut() {
            *vk /= norm;
        }
        for t in 0..=i {
            coeffs[i * n + t] = c[t] / norm;
        }
        q.push(v);
    }
    Ok(CellBasis { coeffs, ..cb0 })
}
