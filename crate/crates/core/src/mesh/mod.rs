//! Polygonal meshes: topology, geometry, builders and text I/O.
//!
//! A [`PolyMesh`] is built from vertex loops. Edges are enumerated deterministically (cells in
//! order, each cell's edges in loop order), so edge indices are stable across a write/read
//! round trip and can be referenced by the periodic pairing section of the file format.

mod io;
mod ordering;
mod random;
mod regular;

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{self, Point, Rect};

pub use io::{mesh_to_string, parse_mesh, read_mesh, write_mesh, MeshParseError};
pub use ordering::natural_ordering;
pub use random::{build_random_mesh_pair, RandomMeshPair};
pub use regular::{
    build_pattern_torus, build_regular_mesh, GeneratingPattern, HexOrientation, PatternKind,
    RegularMesh,
};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("element area must be positive, got {0}")]
    NonPositiveArea(f64),
    #[error("degenerate domain {0:?}")]
    DegenerateDomain(Rect),
    #[error("no periodic lattice within 5% area adjustment for {kind:?} on a {width}x{height} domain")]
    NoCommensurableLattice { kind: PatternKind, width: f64, height: f64 },
    #[error("perturbation {delta} must satisfy 0 <= delta < h/2 (h = {h})")]
    PerturbationTooLarge { delta: f64, h: f64 },
    #[error("grid spacing must be positive, got {0}")]
    BadSpacing(f64),
    #[error("need at least 3 generating points, got {0}")]
    TooFewPoints(usize),
    #[error("mesh has no cells")]
    Empty,
    #[error("cell {cell} references missing vertex {vertex}")]
    MissingVertex { cell: usize, vertex: usize },
    #[error("cell {cell} has fewer than 3 vertices")]
    TooFewVertices { cell: usize },
    #[error("cell {cell} has non-positive or negligible area {area}")]
    DegenerateCell { cell: usize, area: f64 },
    #[error("cell {cell} is not star-shaped with respect to its centroid")]
    NotStarShaped { cell: usize },
    #[error("edge {a}-{b} is shared by more than two cells or has inconsistent orientation")]
    BadEdge { a: usize, b: usize },
    #[error("invalid periodic pair ({0}, {1})")]
    BadPeriodicPair(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Periodic,
    InflowOutflow,
    ExactState,
}

/// A mesh edge. `vertices` follow the counter-clockwise order of `left`, so `normal` points
/// out of `left`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub left: usize,
    pub right: Option<usize>,
    pub vertices: [usize; 2],
    pub normal: Point,
    pub length: f64,
    /// `None` for interior edges.
    pub tag: Option<BoundaryTag>,
}

/// What lies across a [`Face`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaceNeighbor {
    /// Neighbouring cell; `shift` maps face points from the left cell's frame into the
    /// neighbour's frame (non-zero only across periodic boundaries).
    Cell { cell: usize, shift: Point },
    Boundary(BoundaryTag),
}

/// Assembly view of an edge: interior edges and periodic pairs appear exactly once.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub left: usize,
    pub neighbor: FaceNeighbor,
    pub points: [Point; 2],
    pub normal: Point,
    pub length: f64,
    /// Index into [`PolyMesh::edges`] of the left-side edge.
    pub edge: usize,
}

/// Horizontal bands used to define the natural (row-major) element ordering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowBands {
    pub origin: f64,
    pub height: f64,
}

#[derive(Clone, Debug)]
pub struct PolyMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    cell_edges: Vec<Vec<usize>>,
    cell_areas: Vec<f64>,
    cell_centroids: Vec<Point>,
    periodic_map: Vec<(usize, usize)>,
    faces: Vec<Face>,
    rows: Option<RowBands>,
}

impl PolyMesh {
    /// Build and validate a mesh from counter-clockwise vertex loops.
    ///
    /// Unpaired boundary edges receive `boundary_tag`; edges listed in `periodic` get
    /// [`BoundaryTag::Periodic`].
    pub fn new(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        periodic: &[(usize, usize)],
        boundary_tag: BoundaryTag,
    ) -> Result<Self, MeshError> {
        if cells.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut areas = Vec::with_capacity(cells.len());
        let mut centroids = Vec::with_capacity(cells.len());
        let mut total_area = 0.0;
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(MeshError::TooFewVertices { cell: c });
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::MissingVertex { cell: c, vertex: v });
            }
            let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let a = geometry::signed_area(&poly);
            if !(a > 0.0) {
                return Err(MeshError::DegenerateCell { cell: c, area: a });
            }
            total_area += a;
            areas.push(a);
            centroids.push(geometry::centroid(&poly));
        }
        let mean_area = total_area / cells.len() as f64;
        for (c, cell) in cells.iter().enumerate() {
            if areas[c] < 1e-10 * mean_area {
                return Err(MeshError::DegenerateCell { cell: c, area: areas[c] });
            }
            let g = centroids[c];
            let n = cell.len();
            for i in 0..n {
                let p = geometry::sub(vertices[cell[i]], g);
                let q = geometry::sub(vertices[cell[(i + 1) % n]], g);
                if geometry::cross(p, q) <= 0.0 {
                    return Err(MeshError::NotStarShaped { cell: c });
                }
            }
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = vec![Vec::new(); cells.len()];
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        for (c, cell) in cells.iter().enumerate() {
            let n = cell.len();
            for i in 0..n {
                let (a, b) = (cell[i], cell[(i + 1) % n]);
                if a == b {
                    return Err(MeshError::BadEdge { a, b });
                }
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        // The second cell must traverse the edge in the opposite direction.
                        if edge.right.is_some() || edge.vertices != [b, a] {
                            return Err(MeshError::BadEdge { a, b });
                        }
                        edge.right = Some(c);
                        edge.tag = None;
                        cell_edges[c].push(e);
                    }
                    None => {
                        let d = geometry::sub(vertices[b], vertices[a]);
                        let length = geometry::norm(d);
                        edges.push(Edge {
                            left: c,
                            right: None,
                            vertices: [a, b],
                            normal: [d[1] / length, -d[0] / length],
                            length,
                            tag: Some(boundary_tag),
                        });
                        lookup.insert(key, edges.len() - 1);
                        cell_edges[c].push(edges.len() - 1);
                    }
                }
            }
        }

        let scale = mean_area.sqrt();
        let mut paired = vec![false; edges.len()];
        for &(a, b) in periodic {
            if a >= edges.len() || b >= edges.len() || a == b || paired[a] || paired[b] {
                return Err(MeshError::BadPeriodicPair(a, b));
            }
            let (ea, eb) = (&edges[a], &edges[b]);
            if ea.right.is_some()
                || eb.right.is_some()
                || (ea.length - eb.length).abs() > 1e-9 * scale
                || geometry::norm(geometry::add(ea.normal, eb.normal)) > 1e-9
            {
                return Err(MeshError::BadPeriodicPair(a, b));
            }
            paired[a] = true;
            paired[b] = true;
        }
        for &(a, b) in periodic {
            edges[a].tag = Some(BoundaryTag::Periodic);
            edges[b].tag = Some(BoundaryTag::Periodic);
        }

        let mut mesh = PolyMesh {
            vertices,
            cells,
            edges,
            cell_edges,
            cell_areas: areas,
            cell_centroids: centroids,
            periodic_map: periodic.to_vec(),
            faces: Vec::new(),
            rows: None,
        };
        mesh.faces = mesh.build_faces();
        Ok(mesh)
    }

    /// Build a mesh from independent polygons, merging coincident vertices and pairing
    /// boundary edges that coincide under one of `periodic_shifts`.
    pub fn from_polygons(
        polygons: &[Vec<Point>],
        periodic_shifts: &[Point],
        boundary_tag: BoundaryTag,
    ) -> Result<Self, MeshError> {
        if polygons.is_empty() {
            return Err(MeshError::Empty);
        }
        let total: f64 = polygons.iter().map(|p| geometry::signed_area(p).abs()).sum();
        let h = (total / polygons.len() as f64).sqrt();
        let tol = 1e-9 * h;
        let mut pool = VertexPool::new(tol);
        let mut cells = Vec::with_capacity(polygons.len());
        for poly in polygons {
            let mut ids: Vec<usize> = poly.iter().map(|&p| pool.insert(p)).collect();
            ids.dedup();
            while ids.len() > 1 && ids[0] == *ids.last().unwrap() {
                ids.pop();
            }
            cells.push(ids);
        }
        let vertices = pool.points;
        let periodic = if periodic_shifts.is_empty() {
            Vec::new()
        } else {
            let provisional = PolyMesh::new(vertices.clone(), cells.clone(), &[], boundary_tag)?;
            provisional.match_periodic_edges(periodic_shifts, tol)
        };
        PolyMesh::new(vertices, cells, &periodic, boundary_tag)
    }

    fn match_periodic_edges(&self, shifts: &[Point], tol: f64) -> Vec<(usize, usize)> {
        let key = |p: Point| ((p[0] / tol).round() as i64, (p[1] / tol).round() as i64);
        let mut by_mid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let boundary: Vec<usize> =
            (0..self.edges.len()).filter(|&e| self.edges[e].right.is_none()).collect();
        for &e in &boundary {
            by_mid.entry(key(self.edge_midpoint(e))).or_default().push(e);
        }
        let mut taken = vec![false; self.edges.len()];
        let mut pairs = Vec::new();
        for &e in &boundary {
            if taken[e] {
                continue;
            }
            let m = self.edge_midpoint(e);
            'shifts: for s in shifts {
                let target = geometry::add(m, *s);
                let (kx, ky) = key(target);
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        if let Some(cands) = by_mid.get(&(kx + dx, ky + dy)) {
                            for &f in cands {
                                if f == e || taken[f] {
                                    continue;
                                }
                                let close = geometry::norm(geometry::sub(self.edge_midpoint(f), target)) <= 2.0 * tol;
                                let opposite = geometry::norm(geometry::add(self.edges[e].normal, self.edges[f].normal)) < 1e-8;
                                if close && opposite {
                                    taken[e] = true;
                                    taken[f] = true;
                                    pairs.push((e, f));
                                    break 'shifts;
                                }
                            }
                        }
                    }
                }
            }
        }
        pairs
    }

    fn build_faces(&self) -> Vec<Face> {
        let mut partner: HashMap<usize, usize> = HashMap::new();
        for &(a, b) in &self.periodic_map {
            partner.insert(a, b);
            partner.insert(b, a);
        }
        let mut faces = Vec::with_capacity(self.edges.len());
        for (e, edge) in self.edges.iter().enumerate() {
            let points = [self.vertices[edge.vertices[0]], self.vertices[edge.vertices[1]]];
            let neighbor = match (edge.right, partner.get(&e)) {
                (Some(r), _) => FaceNeighbor::Cell { cell: r, shift: [0.0, 0.0] },
                (None, Some(&f)) => {
                    if f < e {
                        continue;
                    }
                    let shift = geometry::sub(self.edge_midpoint(f), self.edge_midpoint(e));
                    FaceNeighbor::Cell { cell: self.edges[f].left, shift }
                }
                (None, None) => FaceNeighbor::Boundary(edge.tag.unwrap_or(BoundaryTag::InflowOutflow)),
            };
            faces.push(Face {
                left: edge.left,
                neighbor,
                points,
                normal: edge.normal,
                length: edge.length,
                edge: e,
            });
        }
        faces
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e].vertices;
        geometry::midpoint(self.vertices[a], self.vertices[b])
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge indices of each cell, in loop order.
    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn cell_areas(&self) -> &[f64] {
        &self.cell_areas
    }

    pub fn cell_centroids(&self) -> &[Point] {
        &self.cell_centroids
    }

    pub fn periodic_map(&self) -> &[(usize, usize)] {
        &self.periodic_map
    }

    pub fn is_periodic(&self) -> bool {
        !self.periodic_map.is_empty()
    }

    pub fn cell_polygon(&self, c: usize) -> Vec<Point> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.cell_areas.iter().sum()
    }

    pub fn bounding_box(&self) -> Rect {
        let mut r = Rect::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            r.x0 = r.x0.min(p[0]);
            r.y0 = r.y0.min(p[1]);
            r.x1 = r.x1.max(p[0]);
            r.y1 = r.y1.max(p[1]);
        }
        r
    }

    /// Cells sharing a face with `c` (periodic neighbours included).
    pub fn neighbors(&self, c: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for f in &self.faces {
            if let FaceNeighbor::Cell { cell, .. } = f.neighbor {
                if f.left == c {
                    out.push(cell);
                } else if cell == c {
                    out.push(f.left);
                }
            }
        }
        out
    }

    pub fn row_bands(&self) -> Option<RowBands> {
        self.rows
    }

    pub fn with_row_bands(mut self, rows: RowBands) -> Self {
        self.rows = Some(rows);
        self
    }

    /// Retag every non-periodic boundary edge.
    pub fn set_boundary_tag(&mut self, tag: BoundaryTag) {
        for e in &mut self.edges {
            if e.right.is_none() && e.tag != Some(BoundaryTag::Periodic) {
                e.tag = Some(tag);
            }
        }
        self.faces = self.build_faces();
    }

    /// Renumber cells so that new cell `i` is old cell `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<PolyMesh, MeshError> {
        let cells: Vec<Vec<usize>> = perm.iter().map(|&c| self.cells[c].clone()).collect();
        // Edge numbering changes with the cell order; re-match periodic pairs by geometry.
        let tag = self
            .edges
            .iter()
            .find(|e| e.right.is_none() && e.tag != Some(BoundaryTag::Periodic))
            .and_then(|e| e.tag)
            .unwrap_or(BoundaryTag::InflowOutflow);
        let mut shifts: Vec<Point> = Vec::new();
        let tol = 1e-9 * (self.total_area() / self.n_cells() as f64).sqrt();
        for &(a, b) in &self.periodic_map {
            let s = geometry::sub(self.edge_midpoint(b), self.edge_midpoint(a));
            for cand in [s, geometry::scale(s, -1.0)] {
                if !shifts.iter().any(|u| geometry::norm(geometry::sub(*u, cand)) <= 10.0 * tol) {
                    shifts.push(cand);
                }
            }
        }
        let mut m = PolyMesh::new(self.vertices.clone(), cells, &[], tag)?;
        if !shifts.is_empty() {
            let pairs = m.match_periodic_edges(&shifts, tol);
            m = PolyMesh::new(self.vertices.clone(), m.cells, &pairs, tag)?;
        }
        m.rows = self.rows;
        Ok(m)
    }
}

/// Vertex de-duplication on a quantized grid.
struct VertexPool {
    tol: f64,
    points: Vec<Point>,
    grid: HashMap<(i64, i64), Vec<usize>>,
}

impl VertexPool {
    fn new(tol: f64) -> Self {
        VertexPool { tol, points: Vec::new(), grid: HashMap::new() }
    }

    fn insert(&mut self, p: Point) -> usize {
        let kx = (p[0] / self.tol).floor() as i64;
        let ky = (p[1] / self.tol).floor() as i64;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &i in ids {
                        if geometry::norm(geometry::sub(self.points[i], p)) <= self.tol {
                            return i;
                        }
                    }
                }
            }
        }
        self.points.push(p);
        let id = self.points.len() - 1;
        self.grid.entry((kx, ky)).or_default().push(id);
        id
    }
}
