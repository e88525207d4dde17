//! Randomly perturbed Delaunay/Voronoi mesh pairs.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg32;
use spade::{DelaunayTriangulation, Point2, Triangulation};

use super::{BoundaryTag, MeshError, PolyMesh, RowBands};
use crate::geometry::{self, Point, Rect};

/// Dual meshes sharing one set of generating points.
#[derive(Clone, Debug)]
pub struct RandomMeshPair {
    /// Perturbed generating points kept inside the domain; Voronoi cell `i` belongs to point `i`.
    pub points: Vec<Point>,
    /// Triangulation of the convex hull of `points`.
    pub delaunay: PolyMesh,
    /// Voronoi diagram of `points` clipped to the domain.
    pub voronoi: PolyMesh,
}

/// Build a Delaunay/Voronoi pair from the `h`-grid of `domain`, each coordinate perturbed by
/// `Uniform[-delta, delta]`.
///
/// Draws come from a PCG32 generator (64-bit state) seeded with `seed`, row by row, `x` before
/// `y`, so a given seed gives the same meshes on every platform. Perturbed points that leave the
/// domain are dropped. Cells of both meshes are numbered in natural (row-major) order.
pub fn build_random_mesh_pair(h: f64, delta: f64, domain: Rect, seed: u64) -> Result<RandomMeshPair, MeshError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(MeshError::BadSpacing(h));
    }
    if !(delta >= 0.0 && delta < 0.5 * h) {
        return Err(MeshError::PerturbationTooLarge { delta, h });
    }
    if domain.is_degenerate() {
        return Err(MeshError::DegenerateDomain(domain));
    }

    let nx = (domain.width() / h + 1e-9).floor() as usize;
    let ny = (domain.height() / h + 1e-9).floor() as usize;
    let mut rng = Pcg32::seed_from_u64(seed);
    let mut points = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let mut p = [domain.x0 + i as f64 * h, domain.y0 + j as f64 * h];
            if delta > 0.0 {
                p[0] += rng.random_range(-delta..=delta);
                p[1] += rng.random_range(-delta..=delta);
            }
            if domain.contains(p) {
                points.push(p);
            }
        }
    }
    if points.len() < 3 {
        return Err(MeshError::TooFewPoints(points.len()));
    }

    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    let mut handle_of = Vec::with_capacity(points.len());
    for p in &points {
        let v = tri.insert(Point2::new(p[0], p[1])).map_err(|_| MeshError::TooFewPoints(points.len()))?;
        handle_of.push(v.index());
    }
    // spade numbers vertices in insertion order unless two points coincide
    let mut point_of = vec![usize::MAX; tri.num_vertices()];
    for (i, &v) in handle_of.iter().enumerate() {
        point_of[v] = i;
    }
    if tri.num_vertices() != points.len() || tri.num_inner_faces() == 0 {
        return Err(MeshError::TooFewPoints(tri.num_vertices()));
    }

    let rows = RowBands { origin: domain.y0 - 0.5 * h, height: h };

    let mut triangles: Vec<Vec<Point>> = Vec::with_capacity(tri.num_inner_faces());
    for f in tri.inner_faces() {
        let mut t: Vec<Point> = f.vertices().iter().map(|v| points[point_of[v.fix().index()]]).collect();
        if geometry::signed_area(&t) < 0.0 {
            t.reverse();
        }
        triangles.push(t);
    }

    let mut neighbours = vec![Vec::new(); points.len()];
    for v in tri.vertices() {
        let i = point_of[v.fix().index()];
        for e in v.out_edges() {
            neighbours[i].push(point_of[e.to().fix().index()]);
        }
    }
    let mut cells: Vec<Vec<Point>> = Vec::with_capacity(points.len());
    let dom = vec![
        [domain.x0, domain.y0],
        [domain.x1, domain.y0],
        [domain.x1, domain.y1],
        [domain.x0, domain.y1],
    ];
    for (i, &p) in points.iter().enumerate() {
        let mut cell = dom.clone();
        for &j in &neighbours[i] {
            // bisector half-plane closer to p than to q
            let q = points[j];
            let n = geometry::sub(q, p);
            let c = 0.5 * (geometry::dot(q, q) - geometry::dot(p, p));
            cell = geometry::clip_half_plane(&cell, n, c);
        }
        geometry::dedup_loop(&mut cell, 1e-12 * h);
        cells.push(cell);
    }

    let delaunay = ordered(&triangles, rows)?;
    // keep point i with Voronoi cell i after reordering
    let provisional = PolyMesh::from_polygons(&cells, &[], BoundaryTag::InflowOutflow)?.with_row_bands(rows);
    let perm = super::natural_ordering(&provisional);
    let voronoi = provisional.permuted(&perm)?;
    let points = perm.iter().map(|&i| points[i]).collect();
    Ok(RandomMeshPair { points, delaunay, voronoi })
}

fn ordered(polys: &[Vec<Point>], rows: RowBands) -> Result<PolyMesh, MeshError> {
    let provisional = PolyMesh::from_polygons(polys, &[], BoundaryTag::InflowOutflow)?.with_row_bands(rows);
    let perm = super::natural_ordering(&provisional);
    provisional.permuted(&perm)
}
