//! Block Jacobi and block ILU(0) preconditioners.

use super::dense::{gemm_sub, gemv_sub, DenseLu};
use super::{BlockSparseMatrix, LinalgError};

/// `z = M^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// LU factors of the diagonal blocks.
#[derive(Clone, Debug)]
pub struct BlockJacobiFactors {
    b: usize,
    lus: Vec<DenseLu>,
}

pub fn factor_block_jacobi(a: &BlockSparseMatrix) -> Result<BlockJacobiFactors, LinalgError> {
    let b = a.block_size();
    let lus = (0..a.n_block_rows())
        .map(|i| {
            DenseLu::new(a.diag_block(i), b).map_err(|e| match e {
                LinalgError::SingularBlock { step, .. } => LinalgError::SingularBlock { row: i, step },
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BlockJacobiFactors { b, lus })
}

impl BlockJacobiFactors {
    pub fn block(&self, i: usize) -> &DenseLu {
        &self.lus[i]
    }
}

impl Preconditioner for BlockJacobiFactors {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        for (i, lu) in self.lus.iter().enumerate() {
            lu.solve_in_place(&mut z[i * self.b..(i + 1) * self.b]);
        }
    }
}

/// Incomplete block LU on the pattern of `P A P^T`.
///
/// Strictly lower blocks hold `L` (unit block diagonal implied), the rest hold `U`; the
/// inverse of every pivot block is kept explicitly.
#[derive(Clone, Debug)]
pub struct Bilu0Factors {
    perm: Vec<usize>,
    lu: BlockSparseMatrix,
    pivot_inv: Vec<Vec<f64>>,
}

/// Block ILU(0) in the given element ordering (`perm[i]` is the original index of the `i`-th
/// eliminated block row). Block IKJ elimination touching only stored blocks.
pub fn factor_bilu0(a: &BlockSparseMatrix, perm: &[usize]) -> Result<Bilu0Factors, LinalgError> {
    let mut lu = a.permuted(perm);
    let n = lu.n_block_rows();
    let b = lu.block_size();
    let mut pivot_inv: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut tmp = vec![0.0; b * b];
    for i in 0..n {
        let (start, end) = (lu.row_ptr()[i], lu.row_ptr()[i + 1]);
        for s in start..end {
            let k = lu.col_idx()[s];
            if k >= i {
                break;
            }
            // L_ik = A_ik U_kk^{-1}
            tmp.iter_mut().for_each(|v| *v = 0.0);
            gemm_sub(lu.slot_values(s), &pivot_inv[k], &mut tmp, b);
            let lik: Vec<f64> = tmp.iter().map(|v| -v).collect();
            lu.slot_values_mut(s).copy_from_slice(&lik);
            // A_ij -= L_ik U_kj for j > k present in both rows
            let (ks, ke) = (lu.row_ptr()[k], lu.row_ptr()[k + 1]);
            let mut t = s + 1;
            for u in ks..ke {
                let j = lu.col_idx()[u];
                if j <= k {
                    continue;
                }
                while t < end && lu.col_idx()[t] < j {
                    t += 1;
                }
                if t == end {
                    break;
                }
                if lu.col_idx()[t] == j {
                    let ukj = lu.slot_values(u).to_vec();
                    gemm_sub(&lik, &ukj, lu.slot_values_mut(t), b);
                }
            }
        }
        let d = DenseLu::new(lu.diag_block(i), b).map_err(|e| match e {
            LinalgError::SingularBlock { step, .. } => LinalgError::SingularBlock { row: i, step },
            other => other,
        })?;
        pivot_inv.push(d.inverse());
    }
    Ok(Bilu0Factors { perm: perm.to_vec(), lu, pivot_inv })
}

impl Bilu0Factors {
    pub fn ordering(&self) -> &[usize] {
        &self.perm
    }

    /// Number of stored blocks (equal to that of the factored matrix).
    pub fn n_blocks(&self) -> usize {
        self.lu.n_blocks()
    }

    /// Dense `L U` in the permuted ordering, for checking exactness.
    pub fn product_dense(&self) -> Vec<f64> {
        let n = self.lu.n_block_rows();
        let b = self.lu.block_size();
        let nd = n * b;
        let mut l = vec![0.0; nd * nd];
        let mut u = vec![0.0; nd * nd];
        for i in 0..n {
            for s in self.lu.row_ptr()[i]..self.lu.row_ptr()[i + 1] {
                let j = self.lu.col_idx()[s];
                let v = self.lu.slot_values(s);
                let target = if j < i { &mut l } else { &mut u };
                for r in 0..b {
                    for c in 0..b {
                        target[(i * b + r) * nd + j * b + c] = v[r * b + c];
                    }
                }
            }
            for r in 0..b {
                l[(i * b + r) * nd + i * b + r] = 1.0;
            }
        }
        let mut out = vec![0.0; nd * nd];
        for i in 0..nd {
            for k in 0..nd {
                let a = l[i * nd + k];
                if a != 0.0 {
                    for j in 0..nd {
                        out[i * nd + j] += a * u[k * nd + j];
                    }
                }
            }
        }
        out
    }
}

impl Preconditioner for Bilu0Factors {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.lu.n_block_rows();
        let b = self.lu.block_size();
        let mut y = vec![0.0; n * b];
        for (i, &old) in self.perm.iter().enumerate() {
            y[i * b..(i + 1) * b].copy_from_slice(&r[old * b..(old + 1) * b]);
        }
        for i in 0..n {
            let (lo, hi) = y.split_at_mut(i * b);
            let yi = &mut hi[..b];
            for s in self.lu.row_ptr()[i]..self.lu.diag_slot(i) {
                let k = self.lu.col_idx()[s];
                gemv_sub(self.lu.slot_values(s), &lo[k * b..(k + 1) * b], yi);
            }
        }
        let mut acc = vec![0.0; b];
        for i in (0..n).rev() {
            let (lo, hi) = y.split_at_mut((i + 1) * b);
            let yi = &mut lo[i * b..];
            for s in self.lu.diag_slot(i) + 1..self.lu.row_ptr()[i + 1] {
                let j = self.lu.col_idx()[s] - i - 1;
                gemv_sub(self.lu.slot_values(s), &hi[j * b..(j + 1) * b], yi);
            }
            acc.iter_mut().for_each(|v| *v = 0.0);
            super::dense::gemv_add(&self.pivot_inv[i], yi, &mut acc);
            yi.copy_from_slice(&acc);
        }
        for (i, &old) in self.perm.iter().enumerate() {
            z[old * b..(old + 1) * b].copy_from_slice(&y[i * b..(i + 1) * b]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Block lower-bidiagonal matrix: 1D upwind advection without periodicity.
    fn lower_bidiagonal(n: usize) -> BlockSparseMatrix {
        let rows: Vec<Vec<usize>> = (0..n).map(|i| if i > 0 { vec![i - 1, i] } else { vec![i] }).collect();
        let mut a = BlockSparseMatrix::from_pattern(2, &rows);
        for i in 0..n {
            a.block_mut(i, i).unwrap().copy_from_slice(&[1.5, 0.5, -0.5, 1.5]);
            if i > 0 {
                a.block_mut(i, i - 1).unwrap().copy_from_slice(&[0.0, -1.0, 0.0, 0.0]);
            }
        }
        a
    }

    #[test]
    fn block_jacobi_inverts_the_diagonal() {
        let a = lower_bidiagonal(3);
        let f = factor_block_jacobi(&a).unwrap();
        let r = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut z = [0.0; 6];
        f.apply(&r, &mut z);
        for i in 0..3 {
            let mut back = vec![0.0; 2];
            super::super::dense::gemv_add(a.diag_block(i), &z[2 * i..2 * i + 2], &mut back);
            assert!((back[0] - r[2 * i]).abs() < 1e-13 && (back[1] - r[2 * i + 1]).abs() < 1e-13);
        }
    }

    #[test]
    fn ilu0_is_exact_on_block_triangular_matrices() {
        let a = lower_bidiagonal(5);
        let natural: Vec<usize> = (0..5).collect();
        let f = factor_bilu0(&a, &natural).unwrap();
        assert_eq!(f.n_blocks(), a.n_blocks());
        let d = a.to_dense();
        let lu = f.product_dense();
        assert!(d.iter().zip(&lu).all(|(x, y)| (x - y).abs() < 1e-14));
    }

    #[test]
    fn red_black_ordering_creates_dropped_fill() {
        // reversing a triangular matrix keeps it triangular; interleaving does not
        let a = lower_bidiagonal(6);
        let rb = vec![0, 2, 4, 1, 3, 5];
        let f = factor_bilu0(&a, &rb).unwrap();
        let pa = a.permuted(&rb);
        let d = pa.to_dense();
        let lu = f.product_dense();
        let nd = 12;
        let mut off_pattern: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                for r in 0..2 {
                    for c in 0..2 {
                        let k = (i * 2 + r) * nd + j * 2 + c;
                        if pa.block(i, j).is_some() {
                            assert!((d[k] - lu[k]).abs() < 1e-14);
                        } else {
                            off_pattern = off_pattern.max(lu[k].abs());
                        }
                    }
                }
            }
        }
        assert!(off_pattern > 1e-3);
    }
}
