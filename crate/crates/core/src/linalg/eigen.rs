//! Eigenvalues of small dense complex matrices: Householder reduction to Hessenberg form,
//! then single-shift QR with Wilkinson shifts and deflation.

use num_complex::Complex64;

use super::LinalgError;

/// Eigenvalues of the `n x n` row-major complex matrix `a`.
pub fn dense_complex_eigenvalues(a: &[Complex64], n: usize) -> Result<Vec<Complex64>, LinalgError> {
    assert_eq!(a.len(), n * n);
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let mut h = a.to_vec();
    balance(&mut h, n);
    hessenberg(&mut h, n);
    hessenberg_qr(&mut h, n)
}

/// Eigenvalues of a real row-major matrix.
pub fn dense_real_eigenvalues(a: &[f64], n: usize) -> Result<Vec<Complex64>, LinalgError> {
    let c: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dense_complex_eigenvalues(&c, n)
}

pub fn spectral_radius(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Diagonal similarity scaling by powers of two so that row and column norms are comparable.
fn balance(h: &mut [Complex64], n: usize) {
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += h[j * n + i].norm();
                    r += h[i * n + j].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / radix {
                f *= radix;
                cc *= radix;
                rr /= radix;
            }
            while cc >= rr * radix {
                f /= radix;
                cc /= radix;
                rr *= radix;
            }
            if cc + rr < 0.95 * s {
                done = false;
                for j in 0..n {
                    h[i * n + j] /= f;
                    h[j * n + i] *= f;
                }
            }
        }
    }
}

fn hessenberg(h: &mut [Complex64], n: usize) {
    for k in 0..n.saturating_sub(2) {
        let alpha: f64 = (k + 1..n).map(|i| h[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = h[(k + 1) * n + k];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[i * n + k]).collect();
        v[0] += phase * alpha;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vn == 0.0 {
            continue;
        }
        // H <- (I - 2 v v^H / |v|^2) H (I - 2 v v^H / |v|^2)
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (t, i) in (k + 1..n).enumerate() {
                s += v[t].conj() * h[i * n + j];
            }
            s *= 2.0 / vn;
            for (t, i) in (k + 1..n).enumerate() {
                h[i * n + j] -= v[t] * s;
            }
        }
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (t, j) in (k + 1..n).enumerate() {
                s += h[i * n + j] * v[t];
            }
            s *= 2.0 / vn;
            for (t, j) in (k + 1..n).enumerate() {
                h[i * n + j] -= s * v[t].conj();
            }
        }
        for i in k + 2..n {
            h[i * n + k] = Complex64::new(0.0, 0.0);
        }
    }
}

fn hessenberg_qr(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>, LinalgError> {
    let zero = Complex64::new(0.0, 0.0);
    let mut eigs = Vec::with_capacity(n);
    if n == 0 {
        return Ok(eigs);
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    // per eigenvalue
    let cap = 30 * n.max(10);
    loop {
        if hi == 0 {
            eigs.push(h[0]);
            break;
        }
        // locate the active unreduced block lo..=hi
        let mut lo = hi;
        while lo > 0 {
            let sub = h[lo * n + lo - 1].norm();
            // Normwise test: local tests stall on clusters of roundoff-sized eigenvalues.
            if sub <= f64::EPSILON * scale {
                h[lo * n + lo - 1] = zero;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eigs.push(h[hi * n + hi]);
            hi -= 1;
            iter = 0;
            continue;
        }
        if lo + 1 == hi {
            let (l1, l2) = eig2(h[lo * n + lo], h[lo * n + hi], h[hi * n + lo], h[hi * n + hi]);
            eigs.push(l2);
            eigs.push(l1);
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > cap {
            return Err(LinalgError::EigenNoConvergence);
        }
        let mu = if iter % 20 == 10 {
            // exceptional shifts break cycles between symmetric shift candidates
            h[lo * n + lo] + Complex64::new(0.75 * h[(lo + 1) * n + lo].re.abs(), 0.0)
        } else if iter % 20 == 0 {
            h[hi * n + hi] + Complex64::new(0.75 * h[hi * n + hi - 1].re.abs(), 0.0)
        } else {
            wilkinson(h[(hi - 1) * n + hi - 1], h[(hi - 1) * n + hi], h[hi * n + hi - 1], h[hi * n + hi])
        };
        for i in lo..=hi {
            h[i * n + i] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = complex_givens(h[k * n + k], h[(k + 1) * n + k]);
            for j in k..=hi {
                let a = h[k * n + j];
                let b = h[(k + 1) * n + j];
                h[k * n + j] = c * a + s * b;
                h[(k + 1) * n + j] = -s.conj() * a + c * b;
            }
            rots.push((c, s));
        }
        for (t, k) in (lo..hi).enumerate() {
            let (c, s) = rots[t];
            for i in lo..=(k + 2).min(hi) {
                let a = h[i * n + k];
                let b = h[i * n + k + 1];
                h[i * n + k] = a * c + b * s.conj();
                h[i * n + k + 1] = -a * s + b * c;
            }
        }
        for i in lo..=hi {
            h[i * n + i] += mu;
        }
    }
    Ok(eigs)
}

/// Both eigenvalues of `[[a, b], [c, d]]`, written around the half difference to avoid
/// cancellation in `tr^2 / 4 - det`.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let m = (a + d) * 0.5;
    let e = (a - d) * 0.5;
    let disc = (e * e + b * c).sqrt();
    (m + disc, m - disc)
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let (l1, l2) = eig2(a, b, c, d);
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Unitary rotation `[[c, s], [-conj(s), c]]` (real `c`) with `[[c, s], [-s*, c]] [a; b] = [r; 0]`.
fn complex_givens(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0) * (b.conj() / nb));
    }
    let r = na.hypot(nb);
    let c = na / r;
    let s = (a / na) * b.conj() / r;
    (Complex64::new(c, 0.0), s)
}
