//! Natural (row-major) element ordering.

use super::PolyMesh;

/// Cells sorted by `(row band of the centroid, centroid x)`, ties broken by index.
///
/// Bands come from the mesh's [`RowBands`](super::RowBands) hint when the builder set one;
/// otherwise they are `sqrt(mean cell area)` high, starting at the bottom of the bounding box.
pub fn natural_ordering(mesh: &PolyMesh) -> Vec<usize> {
    let (origin, height) = match mesh.row_bands() {
        Some(rb) => (rb.origin, rb.height),
        None => (
            mesh.bounding_box().y0,
            (mesh.total_area() / mesh.n_cells() as f64).sqrt(),
        ),
    };
    let c = mesh.cell_centroids();
    let band = |i: usize| {
        // Nudge so that centroids sitting exactly on a band line land in the upper band.
        ((c[i][1] - origin) / height + 1e-9).floor() as i64
    };
    let mut perm: Vec<usize> = (0..mesh.n_cells()).collect();
    perm.sort_by(|&a, &b| {
        band(a)
            .cmp(&band(b))
            .then(c[a][0].total_cmp(&c[b][0]))
            .then(a.cmp(&b))
    });
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::mesh::{build_regular_mesh, BoundaryTag, PatternKind, RowBands};

    #[test]
    fn square_grid_is_already_natural() {
        let rm = build_regular_mesh(PatternKind::Square, 1.0, Rect::new(0.0, 0.0, 3.0, 3.0), false).unwrap();
        assert_eq!(natural_ordering(&rm.mesh), (0..9).collect::<Vec<_>>());
        // cell 1 of the figure sits at the lower left, cell 9 at the upper right
        let c = rm.mesh.cell_centroids();
        assert!(c[0][0] < c[1][0] && c[2][1] < c[3][1]);
    }

    #[test]
    fn hexagon_rows_are_staggered() {
        let area = 1.0;
        let rm = build_regular_mesh(PatternKind::Hexagon, area, Rect::new(0.0, 0.0, 3.5, 3.5), false).unwrap();
        let perm = natural_ordering(&rm.mesh);
        assert_eq!(perm, (0..rm.mesh.n_cells()).collect::<Vec<_>>());
        // row-major: centroid y is non-decreasing band by band
        let rb = rm.mesh.row_bands().unwrap();
        let c = rm.mesh.cell_centroids();
        for w in perm.windows(2) {
            let b0 = ((c[w[0]][1] - rb.origin) / rb.height).floor();
            let b1 = ((c[w[1]][1] - rb.origin) / rb.height).floor();
            assert!(b0 < b1 || (b0 == b1 && c[w[0]][0] <= c[w[1]][0]));
        }
    }

    #[test]
    fn right_triangles_pair_within_a_row() {
        let rm = build_regular_mesh(PatternKind::RightTriangle, 0.5, Rect::new(0.0, 0.0, 2.0, 2.0), false).unwrap();
        let c = rm.mesh.cell_centroids();
        // upper-left triangle of the first square comes first, then its lower-right partner
        assert!(c[0][1] > c[1][1] && c[0][0] < c[1][0]);
        assert!(c[1][0] < c[2][0]);
    }

    #[test]
    fn single_cell() {
        let m = crate::mesh::PolyMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![vec![0, 1, 2]],
            &[],
            BoundaryTag::InflowOutflow,
        )
        .unwrap()
        .with_row_bands(RowBands { origin: 0.0, height: 1.0 });
        assert_eq!(natural_ordering(&m), vec![0]);
    }
}
