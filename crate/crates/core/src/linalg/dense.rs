//! Small dense kernels on row-major slices.

use super::LinalgError;

/// `y += A x` for an `n x n` row-major block.
#[inline]
pub fn gemv_add(a: &[f64], x: &[f64], y: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        let mut s = 0.0;
        for j in 0..n {
            s += row[j] * x[j];
        }
        y[i] += s;
    }
}

/// `y -= A x`.
#[inline]
pub fn gemv_sub(a: &[f64], x: &[f64], y: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        let mut s = 0.0;
        for j in 0..n {
            s += row[j] * x[j];
        }
        y[i] -= s;
    }
}

/// `C -= A B`, all `n x n`.
pub fn gemm_sub(a: &[f64], b: &[f64], c: &mut [f64], n: usize) {
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] -= aik * b[k * n + j];
            }
        }
    }
}

/// LU factors with partial pivoting, `P A = L U`, stored in place.
#[derive(Clone, Debug)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn new(a: &[f64], n: usize) -> Result<Self, LinalgError> {
        let mut lu = a.to_vec();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut big = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > big {
                    big = v;
                    p = i;
                }
            }
            if !(big >= 1e-300) {
                return Err(LinalgError::SingularBlock { row: 0, step: k });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let l = lu[i * n + k] / d;
                lu[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= l * lu[k * n + j];
                    }
                }
            }
        }
        Ok(DenseLu { n, lu, piv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Overwrite `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let mut y = [0.0f64; 64];
        let y = if n <= 64 { &mut y[..n] } else { return self.solve_in_place_heap(b) };
        for i in 0..n {
            y[i] = b[self.piv[i]];
        }
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s / self.lu[i * n + i];
        }
        b.copy_from_slice(y);
    }

    fn solve_in_place_heap(&self, b: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = (0..n).map(|i| b[self.piv[i]]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[i * n + j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[i * n + j] * y[j];
            }
            y[i] /= self.lu[i * n + i];
        }
        b.copy_from_slice(&y);
    }

    /// Explicit inverse (row-major).
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let mut inv = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.solve_in_place(&mut e);
            for i in 0..n {
                inv[i * n + j] = e[i];
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_with_pivoting() {
        // zero leading pivot forces a row swap
        let a = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let lu = DenseLu::new(&a, 3).unwrap();
        let x = [1.0, -2.0, 0.5];
        let mut b = vec![0.0; 3];
        gemv_add(&a, &x, &mut b);
        lu.solve_in_place(&mut b);
        for i in 0..3 {
            assert!((b[i] - x[i]).abs() < 1e-14);
        }
        let inv = lu.inverse();
        let mut id = vec![0.0; 9];
        id.iter_mut().step_by(4).for_each(|v| *v = 1.0);
        gemm_sub(&a, &inv, &mut id, 3);
        assert!(id.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn singular_is_reported() {
        assert!(DenseLu::new(&[1.0, 2.0, 2.0, 4.0], 2).is_err());
    }
}
