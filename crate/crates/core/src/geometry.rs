//! Planar polygon helpers shared by the mesh builders and quadrature.

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Signed area (positive for counter-clockwise loops).
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * s
}

/// Area centroid of a simple polygon.
pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    // Shift to the first vertex to limit cancellation for small cells far from the origin.
    let o = poly[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = sub(poly[i], o);
        let q = sub(poly[(i + 1) % n], o);
        let c = cross(p, q);
        a += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    if a == 0.0 {
        let mut m = [0.0, 0.0];
        for p in poly {
            m = add(m, *p);
        }
        return scale(m, 1.0 / n as f64);
    }
    [o[0] + cx / (3.0 * a), o[1] + cy / (3.0 * a)]
}

/// Largest vertex-to-vertex distance.
pub fn diameter(poly: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..poly.len() {
        for j in i + 1..poly.len() {
            d = d.max(norm(sub(poly[i], poly[j])));
        }
    }
    d
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn unit() -> Self {
        Rect::new(0.0, 0.0, 1.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > 0.0 && self.height() > 0.0) || !self.area().is_finite()
    }
}

/// Clip `poly` to the half-plane `{ x : dot(x, n) <= c }` (Sutherland–Hodgman step).
///
/// Intersection points are computed from the lexicographically ordered segment so that two
/// cells sharing an edge produce bit-identical vertices.
pub fn clip_half_plane(poly: &[Point], n: Point, c: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let len = poly.len();
    for i in 0..len {
        let p = poly[i];
        let q = poly[(i + 1) % len];
        let p_in = dot(p, n) <= c;
        let q_in = dot(q, n) <= c;
        if p_in {
            out.push(p);
        }
        if p_in != q_in {
            let (a, b) = if (p[0], p[1]) < (q[0], q[1]) { (p, q) } else { (q, p) };
            let da = dot(a, n) - c;
            let db = dot(b, n) - c;
            let t = da / (da - db);
            let mut x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            // Snap exactly onto axis-aligned clip lines.
            if n[1] == 0.0 && n[0] != 0.0 {
                x[0] = c / n[0];
            } else if n[0] == 0.0 && n[1] != 0.0 {
                x[1] = c / n[1];
            }
            out.push(x);
        }
    }
    out
}

/// Clip a convex polygon to a rectangle.
pub fn clip_to_rect(poly: &[Point], r: &Rect) -> Vec<Point> {
    let mut p = clip_half_plane(poly, [-1.0, 0.0], -r.x0);
    p = clip_half_plane(&p, [1.0, 0.0], r.x1);
    p = clip_half_plane(&p, [0.0, -1.0], -r.y0);
    p = clip_half_plane(&p, [0.0, 1.0], r.y1);
    p
}

/// Remove consecutive duplicates (including wrap-around) within `tol`.
pub fn dedup_loop(poly: &mut Vec<Point>, tol: f64) {
    poly.dedup_by(|a, b| norm(sub(*a, *b)) <= tol);
    while poly.len() > 1 && norm(sub(poly[0], *poly.last().unwrap())) <= tol {
        poly.pop();
    }
}
