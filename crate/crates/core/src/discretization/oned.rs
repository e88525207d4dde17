//! Linear advection `u_t + u_x = 0` on a uniform 1D mesh with linear nodal elements
//! `phi_1 = 1 - s`, `phi_2 = s` on each interval.

use crate::linalg::BlockSparseMatrix;

#[derive(Clone, Debug)]
pub struct OneDOperator {
    pub mass: BlockSparseMatrix,
    pub l: BlockSparseMatrix,
    pub h: f64,
}

impl OneDOperator {
    pub fn implicit_matrix(&self, k: f64) -> BlockSparseMatrix {
        let mut a = self.l.clone();
        a.scale(k);
        a.add_scaled(1.0, &self.mass).expect("mass pattern is the diagonal");
        a
    }

    pub fn mass_block(h: f64) -> [f64; 4] {
        [h / 3.0, h / 6.0, h / 6.0, h / 3.0]
    }

    pub fn diagonal_block() -> [f64; 4] {
        [0.5, 0.5, -0.5, 0.5]
    }

    /// Coupling of interval `j` to its upwind neighbour `j - 1`.
    pub fn upwind_block() -> [f64; 4] {
        [0.0, -1.0, 0.0, 0.0]
    }
}

/// `n` intervals of width `h`. Without periodicity the first interval has zero inflow and the
/// operator is block lower bidiagonal.
pub fn oned_advection(n: usize, h: f64, periodic: bool) -> OneDOperator {
    assert!(n >= 1 && h > 0.0);
    let rows: Vec<Vec<usize>> = (0..n)
        .map(|j| match (j, periodic) {
            (0, false) => vec![],
            (0, true) => vec![n - 1],
            _ => vec![j - 1],
        })
        .collect();
    let mut l = BlockSparseMatrix::from_pattern(2, &rows);
    for j in 0..n {
        let d = l.block_mut(j, j).unwrap();
        d.copy_from_slice(&OneDOperator::diagonal_block());
        if let Some(&up) = rows[j].first() {
            let b = l.block_mut(j, up).unwrap();
            for (x, y) in b.iter_mut().zip(OneDOperator::upwind_block()) {
                *x += y;
            }
        }
    }
    let blocks = vec![OneDOperator::mass_block(h).to_vec(); n];
    OneDOperator { mass: BlockSparseMatrix::block_diagonal(2, &blocks), l, h }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_in_the_kernel() {
        let op = oned_advection(8, 0.25, true);
        let u = vec![1.0; 16];
        let mut lu = vec![0.0; 16];
        op.l.matvec(&u, &mut lu);
        assert!(lu.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn single_periodic_interval_sums_blocks() {
        let op = oned_advection(1, 1.0, true);
        assert_eq!(op.l.block(0, 0).unwrap(), &[0.5, -0.5, -0.5, 0.5]);
    }

    #[test]
    fn inflow_mesh_is_lower_bidiagonal() {
        let op = oned_advection(5, 0.2, false);
        for j in 0..5 {
            assert!(op.l.row_cols(j).iter().all(|&c| c == j || c + 1 == j));
        }
    }
}
