//! Square block-CSR matrices with uniform dense blocks.

use std::io::{self, Write};

use super::LinalgError;

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSparseMatrix {
    n: usize,
    b: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    /// Slot of the diagonal block of each row.
    diag: Vec<usize>,
    values: Vec<f64>,
}

impl BlockSparseMatrix {
    /// Zero matrix on the given sparsity pattern. `rows[i]` lists the block columns of row `i`;
    /// duplicates are merged and the diagonal is always added.
    pub fn from_pattern(b: usize, rows: &[Vec<usize>]) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut diag = Vec::with_capacity(n);
        row_ptr.push(0);
        for (i, r) in rows.iter().enumerate() {
            let mut cols = r.clone();
            cols.push(i);
            cols.sort_unstable();
            cols.dedup();
            assert!(cols.last().map_or(true, |&c| c < n), "column out of range");
            let start = col_idx.len();
            diag.push(start + cols.binary_search(&i).unwrap());
            col_idx.extend(cols);
            row_ptr.push(col_idx.len());
        }
        let nnzb = col_idx.len();
        BlockSparseMatrix { n, b, row_ptr, col_idx, diag, values: vec![0.0; nnzb * b * b] }
    }

    /// Block-diagonal matrix from `n` dense blocks.
    pub fn block_diagonal(b: usize, blocks: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<usize>> = (0..blocks.len()).map(|i| vec![i]).collect();
        let mut m = Self::from_pattern(b, &rows);
        for (i, blk) in blocks.iter().enumerate() {
            m.block_mut(i, i).unwrap().copy_from_slice(blk);
        }
        m
    }

    pub fn identity(n: usize, b: usize) -> Self {
        let mut id = vec![0.0; b * b];
        for i in 0..b {
            id[i * b + i] = 1.0;
        }
        Self::block_diagonal(b, &vec![id; n])
    }

    pub fn n_block_rows(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.b
    }

    /// Scalar dimension.
    pub fn dim(&self) -> usize {
        self.n * self.b
    }

    pub fn n_blocks(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn diag_slot(&self, i: usize) -> usize {
        self.diag[i]
    }

    /// Block columns of row `i`.
    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let cols = self.row_cols(i);
        cols.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn slot_values(&self, s: usize) -> &[f64] {
        let bb = self.b * self.b;
        &self.values[s * bb..(s + 1) * bb]
    }

    pub fn slot_values_mut(&mut self, s: usize) -> &mut [f64] {
        let bb = self.b * self.b;
        &mut self.values[s * bb..(s + 1) * bb]
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.slot(i, j).map(|s| self.slot_values(s))
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> Option<&mut [f64]> {
        self.slot(i, j).map(move |s| self.slot_values_mut(s))
    }

    pub fn diag_block(&self, i: usize) -> &[f64] {
        self.slot_values(self.diag[i])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.b == other.b && self.row_ptr == other.row_ptr && self.col_idx == other.col_idx
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let b = self.b;
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let yi = &mut y[i * b..(i + 1) * b];
            for s in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[s];
                super::dense::gemv_add(self.slot_values(s), &x[j * b..(j + 1) * b], yi);
            }
        }
    }

    /// `r = rhs - A x`.
    pub fn residual(&self, rhs: &[f64], x: &[f64], r: &mut [f64]) {
        let b = self.b;
        r.copy_from_slice(rhs);
        for i in 0..self.n {
            let ri = &mut r[i * b..(i + 1) * b];
            for s in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[s];
                super::dense::gemv_sub(self.slot_values(s), &x[j * b..(j + 1) * b], ri);
            }
        }
    }

    /// `self += alpha * other`; the pattern of `other` must be contained in that of `self`.
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) -> Result<(), LinalgError> {
        if other.b != self.b || other.n != self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        for i in 0..other.n {
            for s in other.row_ptr[i]..other.row_ptr[i + 1] {
                let j = other.col_idx[s];
                let t = self.slot(i, j).ok_or(LinalgError::PatternMismatch { row: i, col: j })?;
                let src = other.slot_values(s).to_vec();
                for (d, v) in self.slot_values_mut(t).iter_mut().zip(src) {
                    *d += alpha * v;
                }
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    /// Zero every off-diagonal block (keeping the pattern).
    pub fn zero_off_diagonal(&mut self) {
        for i in 0..self.n {
            for s in self.row_ptr[i]..self.row_ptr[i + 1] {
                if s != self.diag[i] {
                    self.slot_values_mut(s).iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
    }

    /// Symmetric block permutation: new block row `i` is old block row `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let rows: Vec<Vec<usize>> = perm.iter().map(|&old| self.row_cols(old).iter().map(|&j| inv[j]).collect()).collect();
        let mut out = Self::from_pattern(self.b, &rows);
        for (new_i, &old_i) in perm.iter().enumerate() {
            for s in self.row_ptr[old_i]..self.row_ptr[old_i + 1] {
                let new_j = inv[self.col_idx[s]];
                out.block_mut(new_i, new_j).unwrap().copy_from_slice(self.slot_values(s));
            }
        }
        out
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let (b, nd) = (self.b, self.dim());
        let mut d = vec![0.0; nd * nd];
        for i in 0..self.n {
            for s in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[s];
                let v = self.slot_values(s);
                for r in 0..b {
                    for c in 0..b {
                        d[(i * b + r) * nd + j * b + c] = v[r * b + c];
                    }
                }
            }
        }
        d
    }

    /// Block-coordinate text dump: one `row col b values...` line per stored block.
    pub fn dump(&self, mut w: impl Write) -> io::Result<()> {
        for i in 0..self.n {
            for s in self.row_ptr[i]..self.row_ptr[i + 1] {
                write!(w, "{} {} {}", i, self.col_idx[s], self.b)?;
                for v in self.slot_values(s) {
                    write!(w, " {v:?}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}
