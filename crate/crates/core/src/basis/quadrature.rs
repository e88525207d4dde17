//! Quadrature on segments, triangles and star-shaped polygons.

use thiserror::Error;

use crate::geometry::{self, Point};

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("degenerate polygon with area {0}")]
    DegeneratePolygon(f64),
    #[error("polygon is not star-shaped with respect to its centroid")]
    NotStarShaped,
    #[error("zero-length edge")]
    ZeroLengthEdge,
}

/// Nodes and positive weights. Weights sum to the area (2D) or the length (edges).
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss–Legendre rule with `n` nodes on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (z * p1 - p0) / (z * z - 1.0))
}

/// Gauss–Legendre on `[0, 1]` with `ceil((q+1)/2)` nodes, exact for degree `q`.
pub fn unit_interval_rule(q: usize) -> (Vec<f64>, Vec<f64>) {
    let n = q / 2 + 1;
    let (x, w) = gauss_legendre(n);
    (x.iter().map(|t| 0.5 * (t + 1.0)).collect(), w.iter().map(|w| 0.5 * w).collect())
}

/// Gauss–Legendre rule on the segment `a`–`b`, exact for polynomials of degree `q` along it.
pub fn edge_quadrature(a: Point, b: Point, q: usize) -> Result<Quadrature, QuadratureError> {
    let len = geometry::norm(geometry::sub(b, a));
    if !(len > 0.0) {
        return Err(QuadratureError::ZeroLengthEdge);
    }
    let (t, w) = unit_interval_rule(q);
    Ok(Quadrature {
        nodes: t.iter().map(|&t| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]).collect(),
        weights: w.iter().map(|w| w * len).collect(),
    })
}

/// Collapsed (Duffy) Gauss product rule on the triangle `a, b, c`, exact for degree `q`.
///
/// The collapsed direction carries the extra linear Jacobian factor, so it gets one more node
/// when `q` is even.
pub fn triangle_quadrature(a: Point, b: Point, c: Point, q: usize) -> Quadrature {
    let (s, ws) = unit_interval_rule(q + 1);
    let (t, wt) = unit_interval_rule(q);
    let e1 = geometry::sub(b, a);
    let e2 = geometry::sub(c, a);
    let jac = geometry::cross(e1, e2).abs();
    let mut nodes = Vec::with_capacity(s.len() * t.len());
    let mut weights = Vec::with_capacity(s.len() * t.len());
    for (&si, &wi) in s.iter().zip(&ws) {
        for (&tj, &wj) in t.iter().zip(&wt) {
            // reference point (si, tj (1 - si)) in the unit triangle
            let u = si;
            let v = tj * (1.0 - si);
            nodes.push([a[0] + u * e1[0] + v * e2[0], a[1] + u * e1[1] + v * e2[1]]);
            weights.push(wi * wj * (1.0 - si) * jac);
        }
    }
    Quadrature { nodes, weights }
}

/// Rule exact for degree `q` on a polygon star-shaped from its centroid: fan of triangles
/// from the centroid, one triangle rule each.
pub fn polygon_quadrature(poly: &[Point], q: usize) -> Result<Quadrature, QuadratureError> {
    let area = geometry::signed_area(poly);
    if poly.len() < 3 || !(area >= 1e-14) {
        return Err(QuadratureError::DegeneratePolygon(area));
    }
    let g = geometry::centroid(poly);
    let mut out = Quadrature { nodes: Vec::new(), weights: Vec::new() };
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        if geometry::cross(geometry::sub(a, g), geometry::sub(b, g)) <= 0.0 {
            return Err(QuadratureError::NotStarShaped);
        }
        let t = triangle_quadrature(g, a, b, q);
        out.nodes.extend(t.nodes);
        out.weights.extend(t.weights);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_matches_known_nodes() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3);
        assert!((x[2] - 0.6f64.sqrt()).abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
        for n in 1..12 {
            let (_, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn edge_rules() {
        let q = edge_quadrature([0.0, 0.0], [3.0, 4.0], 0).unwrap();
        assert!((q.integrate(|_| 1.0) - 5.0).abs() < 1e-15);
        let q = edge_quadrature([0.0, 0.0], [1.0, 0.0], 1).unwrap();
        assert!((q.integrate(|p| p[0]) - 0.5).abs() < 1e-15);
        // 4 nodes integrate t^7 on [0, 1] exactly
        let q = edge_quadrature([0.0, 0.0], [1.0, 0.0], 7).unwrap();
        assert_eq!(q.len(), 4);
        assert!((q.integrate(|p| p[0].powi(7)) - 0.125).abs() < 1e-13);
        assert_eq!(edge_quadrature([1.0, 1.0], [1.0, 1.0], 2), Err(QuadratureError::ZeroLengthEdge));
    }

    #[test]
    fn polygon_examples() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let q = polygon_quadrature(&sq, 4).unwrap();
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!((q.integrate(|p| p[0] * p[0] * p[1] * p[1]) - 1.0 / 9.0).abs() < 1e-14);
        let hex: Vec<Point> = (0..6)
            .map(|i| {
                let t = i as f64 * std::f64::consts::PI / 3.0;
                [t.cos(), t.sin()]
            })
            .collect();
        let q = polygon_quadrature(&hex, 1).unwrap();
        assert!(q.integrate(|p| p[0]).abs() < 1e-15);
        assert!(q.weights.iter().all(|&w| w > 0.0));
        assert!(matches!(
            polygon_quadrature(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], 2),
            Err(QuadratureError::DegeneratePolygon(_))
        ));
    }
}
