//! Generating patterns and the regular tessellations built from them.

use std::f64::consts::PI;

use super::{natural_ordering, BoundaryTag, MeshError, PolyMesh, RowBands};
use crate::geometry::{self, Point, Rect};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PatternKind {
    Hexagon,
    Square,
    RightTriangle,
    EquilateralTriangle,
}

impl PatternKind {
    pub const ALL: [PatternKind; 4] = [
        PatternKind::Hexagon,
        PatternKind::Square,
        PatternKind::RightTriangle,
        PatternKind::EquilateralTriangle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternKind::Hexagon => "hexagon",
            PatternKind::Square => "square",
            PatternKind::RightTriangle => "right_triangle",
            PatternKind::EquilateralTriangle => "equilateral_triangle",
        }
    }

    /// Side length giving elements of the given area (hexagon side, square side,
    /// right-triangle leg, equilateral side).
    pub fn side_for_area(self, area: f64) -> f64 {
        match self {
            PatternKind::Hexagon => (2.0 * area / (3.0 * 3f64.sqrt())).sqrt(),
            PatternKind::Square => area.sqrt(),
            PatternKind::RightTriangle => (2.0 * area).sqrt(),
            PatternKind::EquilateralTriangle => (4.0 * area / 3f64.sqrt()).sqrt(),
        }
    }

    /// Side length for the equal-area family anchored at the equilateral side `h_e`.
    pub fn side_for_reference(self, h_e: f64) -> f64 {
        match self {
            PatternKind::Hexagon => h_e / 6f64.sqrt(),
            PatternKind::Square => 3f64.powf(0.25) / 2.0 * h_e,
            PatternKind::RightTriangle => 3f64.powf(0.25) / 2f64.sqrt() * h_e,
            PatternKind::EquilateralTriangle => h_e,
        }
    }

    pub fn elements_per_pattern(self) -> usize {
        match self {
            PatternKind::Hexagon | PatternKind::Square => 1,
            PatternKind::RightTriangle | PatternKind::EquilateralTriangle => 2,
        }
    }
}

impl std::str::FromStr for PatternKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hex" | "hexagon" | "hexagons" => Ok(PatternKind::Hexagon),
            "square" | "squares" => Ok(PatternKind::Square),
            "rtri" | "right_triangle" | "right" => Ok(PatternKind::RightTriangle),
            "etri" | "equilateral_triangle" | "equilateral" => Ok(PatternKind::EquilateralTriangle),
            other => Err(format!("unknown pattern '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HexOrientation {
    /// Horizontal top edge; lattice columns are staggered vertically.
    FlatTop,
    /// Vertex on top; rows are staggered horizontally.
    PointyTop,
}

/// One- or two-element motif whose lattice translates tile the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingPattern {
    pub kind: PatternKind,
    pub side: f64,
    /// Counter-clockwise element polygons in the pattern frame.
    pub elements: Vec<Vec<Point>>,
    pub lattice: [Point; 2],
    /// Offsets, in lattice coordinates, of the patterns adjacent to this one.
    pub neighbor_offsets: Vec<[i32; 2]>,
}

impl GeneratingPattern {
    /// Pattern in the orientation used by the symbol analysis (flat-top hexagons; the right
    /// triangle pair splits the square along the rising diagonal; the equilateral pair is an
    /// upward triangle followed by the downward triangle on its upper-right side).
    pub fn for_analysis(kind: PatternKind, h_e: f64) -> Self {
        Self::build(kind, kind.side_for_reference(h_e), HexOrientation::FlatTop)
    }

    /// Pattern in the orientation used for meshing rectangles (pointy-top hexagons, so that
    /// hexagon rows run horizontally).
    pub fn for_tessellation(kind: PatternKind, element_area: f64) -> Self {
        Self::build(kind, kind.side_for_area(element_area), HexOrientation::PointyTop)
    }

    pub fn build(kind: PatternKind, s: f64, orientation: HexOrientation) -> Self {
        let r3 = 3f64.sqrt();
        let axis4 = vec![[1, 0], [-1, 0], [0, 1], [0, -1]];
        match kind {
            PatternKind::Square => GeneratingPattern {
                kind,
                side: s,
                elements: vec![vec![[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]]],
                lattice: [[s, 0.0], [0.0, s]],
                neighbor_offsets: axis4,
            },
            PatternKind::RightTriangle => GeneratingPattern {
                kind,
                side: s,
                elements: vec![
                    vec![[0.0, 0.0], [s, s], [0.0, s]],
                    vec![[0.0, 0.0], [s, 0.0], [s, s]],
                ],
                lattice: [[s, 0.0], [0.0, s]],
                neighbor_offsets: axis4,
            },
            PatternKind::EquilateralTriangle => {
                let h = 0.5 * r3 * s;
                GeneratingPattern {
                    kind,
                    side: s,
                    elements: vec![
                        vec![[0.0, 0.0], [s, 0.0], [0.5 * s, h]],
                        vec![[0.5 * s, h], [s, 0.0], [1.5 * s, h]],
                    ],
                    lattice: [[s, 0.0], [0.5 * s, h]],
                    neighbor_offsets: axis4,
                }
            }
            PatternKind::Hexagon => {
                let (start, lattice, center) = match orientation {
                    HexOrientation::FlatTop => (0.0, [[1.5 * s, 0.5 * r3 * s], [0.0, r3 * s]], [0.0, 0.0]),
                    // bottom vertex at the origin
                    HexOrientation::PointyTop => (PI / 6.0, [[r3 * s, 0.0], [0.5 * r3 * s, 1.5 * s]], [0.0, s]),
                };
                let hex = (0..6)
                    .map(|i| {
                        let t = start + i as f64 * PI / 3.0;
                        [center[0] + s * t.cos(), center[1] + s * t.sin()]
                    })
                    .collect();
                GeneratingPattern {
                    kind,
                    side: s,
                    elements: vec![hex],
                    lattice,
                    neighbor_offsets: vec![[1, 0], [-1, 0], [0, 1], [0, -1], [1, -1], [-1, 1]],
                }
            }
        }
    }

    pub fn element_area(&self) -> f64 {
        geometry::signed_area(&self.elements[0])
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Cartesian translation for a lattice offset.
    pub fn offset_vector(&self, off: [i32; 2]) -> Point {
        let [a1, a2] = self.lattice;
        [
            off[0] as f64 * a1[0] + off[1] as f64 * a2[0],
            off[0] as f64 * a1[1] + off[1] as f64 * a2[1],
        ]
    }

    /// Area centroid of the whole pattern.
    pub fn anchor(&self) -> Point {
        let mut c = [0.0, 0.0];
        let mut a = 0.0;
        for e in &self.elements {
            let ea = geometry::signed_area(e);
            c = geometry::add(c, geometry::scale(geometry::centroid(e), ea));
            a += ea;
        }
        geometry::scale(c, 1.0 / a)
    }

    /// Elements of the pattern translated by a lattice offset.
    pub fn translated(&self, off: [i32; 2]) -> Vec<Vec<Point>> {
        let t = self.offset_vector(off);
        self.elements
            .iter()
            .map(|e| e.iter().map(|&p| geometry::add(p, t)).collect())
            .collect()
    }

    /// Rectangular super-cell `(width, height)` together with the lattice offsets of the
    /// patterns it contains.
    fn rectangular_supercell(&self) -> ([f64; 2], Vec<[i32; 2]>) {
        let [a1, a2] = self.lattice;
        if a1[1] == 0.0 && a2[0] == 0.0 {
            ([a1[0], a2[1]], vec![[0, 0]])
        } else if a1[1] == 0.0 {
            // 2 a2 - a1 is vertical for the staggered lattices.
            ([a1[0], 2.0 * a2[1]], vec![[0, 0], [0, 1]])
        } else {
            // flat-top hexagons: 2 a1 - a2 is horizontal
            ([2.0 * a1[0], a2[1]], vec![[0, 0], [1, 0]])
        }
    }

    /// Row height of the natural ordering bands.
    fn row_height(&self) -> f64 {
        match self.kind {
            PatternKind::Square | PatternKind::RightTriangle => self.side,
            PatternKind::EquilateralTriangle => 0.5 * 3f64.sqrt() * self.side,
            PatternKind::Hexagon => 1.5 * self.side,
        }
    }

    fn stretched(&self, sx: f64, sy: f64) -> Self {
        let st = |p: &Point| [p[0] * sx, p[1] * sy];
        GeneratingPattern {
            kind: self.kind,
            side: self.side,
            elements: self.elements.iter().map(|e| e.iter().map(st).collect()).collect(),
            lattice: [st(&self.lattice[0]), st(&self.lattice[1])],
            neighbor_offsets: self.neighbor_offsets.clone(),
        }
    }
}

/// A regular tessellation of a rectangle together with what was actually built.
#[derive(Clone, Debug)]
pub struct RegularMesh {
    pub mesh: PolyMesh,
    pub pattern: GeneratingPattern,
    /// Element area after the periodic fit (equals the request for clipped meshes).
    pub achieved_area: f64,
    /// Horizontal/vertical stretch applied to fit a periodic rectangle.
    pub stretch: [f64; 2],
}

const MAX_AREA_ADJUST: f64 = 0.05;
const MAX_ANISOTROPY: f64 = 0.2;

/// Tessellate `domain` with the given pattern kind.
///
/// Non-periodic meshes anchor the lattice at the lower-left corner and clip cells to the
/// rectangle. Periodic meshes pick integer super-cell counts and stretch the lattice so the
/// rectangle is tiled exactly; the area change is capped at 5%.
pub fn build_regular_mesh(
    kind: PatternKind,
    element_area: f64,
    domain: Rect,
    periodic: bool,
) -> Result<RegularMesh, MeshError> {
    if !(element_area > 0.0) || !element_area.is_finite() {
        return Err(MeshError::NonPositiveArea(element_area));
    }
    if domain.is_degenerate() {
        return Err(MeshError::DegenerateDomain(domain));
    }
    let base = GeneratingPattern::for_tessellation(kind, element_area);
    let ([cw, ch], members) = base.rectangular_supercell();

    let (pattern, nx, ny, stretch) = if periodic {
        let (nx, ny, sx, sy) = fit_supercells(kind, cw, ch, &domain)?;
        (base.stretched(sx, sy), nx, ny, [sx, sy])
    } else {
        let nx = (domain.width() / cw).ceil() as i64 + 1;
        let ny = (domain.height() / ch).ceil() as i64 + 1;
        (base.clone(), nx as usize, ny as usize, [1.0, 1.0])
    };
    let (cw, ch) = (cw * stretch[0], ch * stretch[1]);
    let [a1, a2] = pattern.lattice;

    let mut polys: Vec<Vec<Point>> = Vec::new();
    let range = |n: usize| if periodic { 0..n as i64 } else { -1..n as i64 };
    for j in range(ny) {
        for i in range(nx) {
            let origin = [domain.x0 + i as f64 * cw, domain.y0 + j as f64 * ch];
            for m in &members {
                let t = [
                    m[0] as f64 * a1[0] + m[1] as f64 * a2[0],
                    m[0] as f64 * a1[1] + m[1] as f64 * a2[1],
                ];
                for e in &pattern.elements {
                    let poly: Vec<Point> = e
                        .iter()
                        .map(|&p| [p[0] + t[0] + origin[0], p[1] + t[1] + origin[1]])
                        .collect();
                    if periodic {
                        polys.push(poly);
                    } else {
                        let mut clipped = geometry::clip_to_rect(&poly, &domain);
                        geometry::dedup_loop(&mut clipped, 1e-12 * pattern.side);
                        if clipped.len() >= 3
                            && geometry::signed_area(&clipped) > 1e-9 * element_area
                        {
                            polys.push(clipped);
                        }
                    }
                }
            }
        }
    }

    let shifts = if periodic {
        let (w, h) = (domain.width(), domain.height());
        vec![[w, 0.0], [-w, 0.0], [0.0, h], [0.0, -h], [w, h], [-w, -h], [w, -h], [-w, h]]
    } else {
        Vec::new()
    };
    let rows = RowBands {
        origin: domain.y0,
        height: pattern.row_height() * stretch[1],
    };
    // Order the cells row-major before building the topology.
    let provisional = PolyMesh::from_polygons(&polys, &[], BoundaryTag::InflowOutflow)?.with_row_bands(rows);
    let order = natural_ordering(&provisional);
    let ordered: Vec<Vec<Point>> = order.iter().map(|&c| polys[c].clone()).collect();
    let mesh = PolyMesh::from_polygons(&ordered, &shifts, BoundaryTag::InflowOutflow)?.with_row_bands(rows);
    let achieved_area = element_area * stretch[0] * stretch[1];
    Ok(RegularMesh { mesh, pattern, achieved_area, stretch })
}

fn fit_supercells(kind: PatternKind, cw: f64, ch: f64, domain: &Rect) -> Result<(usize, usize, f64, f64), MeshError> {
    let (w, h) = (domain.width(), domain.height());
    let nx0 = (w / cw).round().max(1.0) as i64;
    let ny0 = (h / ch).round().max(1.0) as i64;
    let mut best: Option<(f64, usize, usize, f64, f64)> = None;
    for nx in (nx0 - 3).max(1)..=nx0 + 3 {
        for ny in (ny0 - 3).max(1)..=ny0 + 3 {
            let sx = w / (nx as f64 * cw);
            let sy = h / (ny as f64 * ch);
            let area_change = (sx * sy - 1.0).abs();
            let aniso = (sx / sy).ln().abs();
            if area_change <= MAX_AREA_ADJUST + 1e-12 && aniso <= MAX_ANISOTROPY {
                let score = aniso + area_change;
                if best.map_or(true, |b| score < b.0 - 1e-12) {
                    best = Some((score, nx as usize, ny as usize, sx, sy));
                }
            }
        }
    }
    best.map(|(_, nx, ny, sx, sy)| (nx, ny, sx, sy))
        .ok_or(MeshError::NoCommensurableLattice { kind, width: w, height: h })
}

/// Periodic `n1 × n2` tiling of a pattern along its own lattice vectors (a torus). Cell
/// `(i + n1 j) * n_elements + e` is element `e` of the pattern at lattice offset `(i, j)`.
pub fn build_pattern_torus(pattern: &GeneratingPattern, n1: usize, n2: usize) -> Result<PolyMesh, MeshError> {
    let mut polys = Vec::with_capacity(n1 * n2 * pattern.n_elements());
    for j in 0..n2 {
        for i in 0..n1 {
            polys.extend(pattern.translated([i as i32, j as i32]));
        }
    }
    let big1 = pattern.offset_vector([n1 as i32, 0]);
    let big2 = pattern.offset_vector([0, n2 as i32]);
    let mut shifts = Vec::new();
    for (s1, s2) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)] {
        let v = [s1 * big1[0] + s2 * big2[0], s1 * big1[1] + s2 * big2[1]];
        shifts.push(v);
        shifts.push([-v[0], -v[1]]);
    }
    PolyMesh::from_polygons(&polys, &shifts, BoundaryTag::Periodic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn equal_area_family() {
        let areas: Vec<f64> = PatternKind::ALL
            .iter()
            .map(|&k| GeneratingPattern::for_analysis(k, 0.7).element_area())
            .collect();
        for a in &areas {
            assert!((a - areas[0]).abs() <= 1e-12 * areas[0], "{areas:?}");
        }
        assert!((areas[0] - 3f64.sqrt() / 4.0 * 0.49).abs() < 1e-14);
    }

    #[test]
    fn hexagon_side_from_area() {
        let h_e: f64 = 1.3;
        let area = 3f64.sqrt() / 4.0 * h_e * h_e;
        let s = PatternKind::Hexagon.side_for_area(area);
        assert!((s - (2.0 * area / (3.0 * 3f64.sqrt())).sqrt()).abs() < 1e-15);
        assert!((s - h_e / 6f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn patterns_tile_a_three_by_three_patch() {
        // area accounting: the 3x3 patch must cover exactly 9 lattice cells
        for kind in PatternKind::ALL {
            let p = GeneratingPattern::for_analysis(kind, 1.0);
            let [a1, a2] = p.lattice;
            let cell = geometry::cross(a1, a2).abs();
            let patch: f64 = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .flat_map(|(i, j)| p.translated([i, j]))
                .map(|e| geometry::signed_area(&e))
                .sum();
            assert!((patch - 9.0 * cell).abs() < 1e-12, "{kind:?}");
            let torus = build_pattern_torus(&p, 3, 3).unwrap();
            assert_eq!(torus.n_cells(), 9 * p.n_elements());
            assert!(torus.edges().iter().all(|e| e.right.is_some() || e.tag == Some(BoundaryTag::Periodic)));
        }
    }

    #[test]
    fn periodic_square_grid() {
        let h = 2.0 * PI / 10.0;
        let rm = build_regular_mesh(PatternKind::Square, h * h, Rect::new(0.0, 0.0, 2.0 * PI, 2.0 * PI), true).unwrap();
        assert_eq!(rm.mesh.n_cells(), 100);
        for &a in rm.mesh.cell_areas() {
            assert!((a - h * h).abs() < 1e-12 * h * h);
        }
        assert_eq!(rm.mesh.periodic_map().len(), 20);
    }

    #[test]
    fn periodic_right_triangles_double_the_squares() {
        let d = Rect::new(0.0, 0.0, 1.0, 1.0);
        let rm = build_regular_mesh(PatternKind::RightTriangle, 0.5 * 0.1 * 0.1, d, true).unwrap();
        assert_eq!(rm.mesh.n_cells(), 2 * 100);
    }

    #[test]
    fn periodic_hexagons_and_triangles_fit_two_pi() {
        let d = Rect::new(0.0, 0.0, 2.0 * PI, 2.0 * PI);
        let a = (2.0 * PI / 10.0).powi(2);
        for kind in [PatternKind::Hexagon, PatternKind::EquilateralTriangle] {
            let rm = build_regular_mesh(kind, a, d, true).unwrap();
            assert!((rm.achieved_area / a - 1.0).abs() <= 0.05);
            assert!((rm.mesh.total_area() - d.area()).abs() < 1e-12 * d.area());
            for e in rm.mesh.edges() {
                assert!(e.right.is_some() || e.tag == Some(BoundaryTag::Periodic));
            }
        }
    }

    #[test]
    fn clipped_meshes_cover_the_unit_square() {
        for kind in PatternKind::ALL {
            let rm = build_regular_mesh(kind, 0.05 * 0.05, Rect::unit(), false).unwrap();
            let area = rm.mesh.total_area();
            assert!((area - 1.0).abs() < 1e-12, "{kind:?}: {area}");
            let n = rm.mesh.n_cells() as f64;
            assert!(n > 0.9 * 400.0 && n < 1.25 * 400.0, "{kind:?}: {n}");
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(
            build_regular_mesh(PatternKind::Square, 0.0, Rect::unit(), false),
            Err(MeshError::NonPositiveArea(_))
        ));
        assert!(matches!(
            build_regular_mesh(PatternKind::Square, 0.1, Rect::new(0.0, 0.0, 0.0, 1.0), false),
            Err(MeshError::DegenerateDomain(_))
        ));
        // one huge hexagon cannot be fitted to a thin strip
        assert!(matches!(
            build_regular_mesh(PatternKind::Hexagon, 1.0, Rect::new(0.0, 0.0, 10.0, 0.37), true),
            Err(MeshError::NoCommensurableLattice { .. })
        ));
    }
}
