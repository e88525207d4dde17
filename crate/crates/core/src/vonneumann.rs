//! Fourier (von Neumann) analysis of block Jacobi for backward Euler upwind advection on the
//! four generating patterns.
//!
//! For a lattice-periodic operator, a plane wave with lattice phases `phi = (n . a1, n . a2)`
//! reduces `L` to `L_hat(phi) = sum_delta exp(i delta . phi) L_delta`, where `L_delta` couples the
//! elements of one pattern to those of the pattern at lattice offset `delta`. The Jacobi
//! symbol is then `R_hat = I - D^{-1} (M + k L_hat)` with `D` the element-diagonal blocks of
//! `M + k L_0`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::basis::{BasisError, DgSpace};
use crate::discretization::{assemble_advection, DiscretizationError, Velocity};
use crate::linalg::dense::DenseLu;
use crate::linalg::{dense_complex_eigenvalues, spectral_radius, LinalgError};
use crate::mesh::{build_pattern_torus, GeneratingPattern, MeshError, PatternKind};
use crate::timestepping::KLabel;

#[derive(Debug, Error)]
pub enum VonNeumannError {
    #[error("flow angle {theta} outside [0, {max}] for {kind:?}")]
    BadAngle { kind: PatternKind, theta: f64, max: f64 },
    #[error("pattern neighbour at lattice offset {0:?} is not adjacent")]
    BadOffset([i32; 2]),
    #[error("sample counts must be at least 1")]
    BadSampling,
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Largest admissible flow angle for each pattern.
pub fn max_angle(kind: PatternKind) -> f64 {
    match kind {
        PatternKind::Square => PI / 2.0,
        PatternKind::Hexagon | PatternKind::EquilateralTriangle => PI / 3.0,
        PatternKind::RightTriangle => PI / 4.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ThetaRange {
    /// `[0, max_angle(kind)]`.
    #[default]
    PerPattern,
    /// `[0, pi/4]` for every pattern.
    QuarterPi,
}

impl ThetaRange {
    pub fn upper(self, kind: PatternKind) -> f64 {
        match self {
            ThetaRange::PerPattern => max_angle(kind),
            ThetaRange::QuarterPi => PI / 4.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ThetaRange::PerPattern => "per-pattern",
            ThetaRange::QuarterPi => "quarter-pi",
        }
    }
}

impl FromStr for ThetaRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "per-pattern" => Ok(ThetaRange::PerPattern),
            "quarter-pi" => Ok(ThetaRange::QuarterPi),
            _ => Err(format!("unknown theta range '{s}'")),
        }
    }
}

impl fmt::Display for ThetaRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One point of the analysis: pattern, degree, flow angle, timestep and lattice phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolProblem {
    pub kind: PatternKind,
    pub p: usize,
    /// Equilateral reference side; the other patterns are sized for equal element area.
    pub h_e: f64,
    pub theta: f64,
    pub k: f64,
    pub phase: [f64; 2],
}

/// Dense complex matrices of dimension `n_elements * n_loc`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolMatrices {
    pub dim: usize,
    pub m: Vec<Complex64>,
    pub l_hat: Vec<Complex64>,
    pub d: Vec<Complex64>,
    pub r_j: Vec<Complex64>,
}

impl SymbolMatrices {
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>, VonNeumannError> {
        Ok(dense_complex_eigenvalues(&self.r_j, self.dim)?)
    }
}

/// Physical-space blocks of one generating pattern for a fixed flow direction.
#[derive(Clone, Debug)]
pub struct PatternSymbol {
    pub pattern: GeneratingPattern,
    pub p: usize,
    pub dim: usize,
    pub mass: Vec<f64>,
    /// `L_delta` for every lattice offset with a non-zero coupling, including `[0, 0]`.
    pub blocks: BTreeMap<[i32; 2], Vec<f64>>,
}

impl PatternSymbol {
    /// Assembles the advection operator on a 3 x 3 periodic patch and reads off the couplings
    /// of the centre pattern.
    pub fn new(kind: PatternKind, p: usize, h_e: f64, theta: f64) -> Result<Self, VonNeumannError> {
        let max = max_angle(kind);
        if !(-1e-14..=max + 1e-14).contains(&theta) {
            return Err(VonNeumannError::BadAngle { kind, theta, max });
        }
        let pattern = GeneratingPattern::for_analysis(kind, h_e);
        let ne = pattern.n_elements();
        let mesh = build_pattern_torus(&pattern, 3, 3)?;
        let space = DgSpace::new(&mesh, p)?;
        let op = assemble_advection(&mesh, &space, Velocity::Constant([theta.cos(), theta.sin()]))?;
        let n = space.n_loc();
        let dim = ne * n;
        let centre = 4;
        let mut blocks: BTreeMap<[i32; 2], Vec<f64>> = BTreeMap::new();
        let mut mass = vec![0.0; dim * dim];
        for e in 0..ne {
            let row = centre * ne + e;
            let mb = op.mass.diag_block(row);
            for i in 0..n {
                for j in 0..n {
                    mass[(e * n + i) * dim + e * n + j] = mb[i * n + j];
                }
            }
            for &col in op.l.row_cols(row) {
                let q = col / ne;
                let off = [(q % 3) as i32 - 1, (q / 3) as i32 - 1];
                if off != [0, 0] && !pattern.neighbor_offsets.contains(&off) {
                    return Err(VonNeumannError::BadOffset(off));
                }
                let f = col % ne;
                let blk = op.l.block(row, col).unwrap();
                let dst = blocks.entry(off).or_insert_with(|| vec![0.0; dim * dim]);
                for i in 0..n {
                    for j in 0..n {
                        dst[(e * n + i) * dim + f * n + j] += blk[i * n + j];
                    }
                }
            }
        }
        blocks.retain(|_, b| b.iter().any(|&v| v != 0.0));
        Ok(PatternSymbol { pattern, p, dim, mass, blocks })
    }

    fn n_loc(&self) -> usize {
        self.dim / self.pattern.n_elements()
    }

    /// Element-diagonal part of `M + k L_0`.
    fn jacobi_diagonal(&self, k: f64) -> Vec<f64> {
        let n = self.n_loc();
        let dim = self.dim;
        let l0 = self.blocks.get(&[0, 0]);
        let mut d = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                if i / n == j / n {
                    d[i * dim + j] = self.mass[i * dim + j] + k * l0.map_or(0.0, |b| b[i * dim + j]);
                }
            }
        }
        d
    }

    pub fn matrices(&self, k: f64, phase: [f64; 2]) -> Result<SymbolMatrices, VonNeumannError> {
        let dim = self.dim;
        let zero = Complex64::new(0.0, 0.0);
        let mut l_hat = vec![zero; dim * dim];
        for (off, b) in &self.blocks {
            let w = Complex64::from_polar(1.0, off[0] as f64 * phase[0] + off[1] as f64 * phase[1]);
            for (z, &v) in l_hat.iter_mut().zip(b) {
                *z += w * v;
            }
        }
        let d = self.jacobi_diagonal(k);
        let lu = DenseLu::new(&d, dim)?;
        let dinv = lu.inverse();
        let a: Vec<Complex64> = l_hat.iter().zip(&self.mass).map(|(l, &m)| m + k * l).collect();
        let mut r_j = vec![zero; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let s: Complex64 = (0..dim).map(|t| dinv[i * dim + t] * a[t * dim + j]).sum();
                r_j[i * dim + j] = if i == j { 1.0 - s } else { -s };
            }
        }
        Ok(SymbolMatrices {
            dim,
            m: self.mass.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            l_hat,
            d: d.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            r_j,
        })
    }

    /// Precomputes `R_hat(phi) = G_0 + sum_delta exp(i delta . phi) G_delta` for one timestep.
    pub fn jacobi_symbol(&self, k: f64) -> Result<JacobiSymbol, VonNeumannError> {
        let dim = self.dim;
        let lu = DenseLu::new(&self.jacobi_diagonal(k), dim)?;
        let dinv = lu.inverse();
        let mul = |b: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; dim * dim];
            for i in 0..dim {
                for t in 0..dim {
                    let v = dinv[i * dim + t];
                    if v != 0.0 {
                        for j in 0..dim {
                            out[i * dim + j] += v * b[t * dim + j];
                        }
                    }
                }
            }
            out
        };
        // R = -D^{-1} (A - D): the element-diagonal blocks vanish identically
        let n = self.n_loc();
        let mut g0 = vec![0.0; dim * dim];
        let mut terms = Vec::new();
        for (off, b) in &self.blocks {
            if *off == [0, 0] {
                let coupled: Vec<f64> = (0..dim * dim).map(|t| if (t / dim) / n == (t % dim) / n { 0.0 } else { b[t] }).collect();
                g0 = mul(&coupled).iter().map(|v| -k * v).collect();
            } else {
                terms.push((*off, mul(b).iter().map(|v| -k * v).collect()));
            }
        }
        Ok(JacobiSymbol { dim, g0, terms })
    }
}

/// `R_hat(phi)` in factored form for fast sweeps over lattice phases.
#[derive(Clone, Debug)]
pub struct JacobiSymbol {
    pub dim: usize,
    g0: Vec<f64>,
    terms: Vec<([i32; 2], Vec<f64>)>,
}

impl JacobiSymbol {
    pub fn at(&self, phase: [f64; 2]) -> Vec<Complex64> {
        let mut r: Vec<Complex64> = self.g0.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for (off, g) in &self.terms {
            let w = Complex64::from_polar(1.0, off[0] as f64 * phase[0] + off[1] as f64 * phase[1]);
            for (z, &v) in r.iter_mut().zip(g) {
                *z += w * v;
            }
        }
        r
    }

    pub fn eigenvalues(&self, phase: [f64; 2]) -> Result<Vec<Complex64>, VonNeumannError> {
        Ok(dense_complex_eigenvalues(&self.at(phase), self.dim)?)
    }

    pub fn spectral_radius(&self, phase: [f64; 2]) -> Result<f64, VonNeumannError> {
        Ok(spectral_radius(&self.eigenvalues(phase)?))
    }
}

pub fn assemble_symbol(problem: &SymbolProblem) -> Result<SymbolMatrices, VonNeumannError> {
    PatternSymbol::new(problem.kind, problem.p, problem.h_e, problem.theta)?.matrices(problem.k, problem.phase)
}

/// Displayed p = 0 eigenvalues of the Jacobi symbol. `(nx, ny)` is the wavenumber; for the
/// equilateral pair, `(h nx, h ny)` are read as the phases along the two lattice vectors.
pub fn closed_form_p0_eigs(kind: PatternKind, h: f64, alpha: f64, beta: f64, k: f64, nx: f64, ny: f64) -> Vec<Complex64> {
    let i = Complex64::i();
    let e = |x: f64| (i * x).exp();
    let r3 = 3f64.sqrt();
    match kind {
        PatternKind::Square => vec![k * (alpha * e(-nx * h) + beta * e(-ny * h)) / (h + k * (alpha + beta))],
        PatternKind::Hexagon => {
            let num = k
                * e(-0.5 * h * (3.0 * nx + r3 * ny))
                * (r3 * beta * (2.0 * e(0.5 * h * (3.0 * nx - r3 * ny)) - e(r3 * h * ny) + 1.0) + 3.0 * alpha * (1.0 + e(r3 * h * ny)));
            vec![num / (9.0 * h + 6.0 * alpha * k + 2.0 * r3 * beta * k)]
        }
        PatternKind::RightTriangle => {
            let v = 2.0 * k * e(-0.5 * h * (nx + ny)) * Complex64::new(alpha, 0.0).sqrt() * (beta + (alpha - beta) * e(h * ny)).sqrt()
                / (h + 2.0 * alpha * k);
            vec![v, -v]
        }
        PatternKind::EquilateralTriangle => {
            let num = 2.0 * k * (3.0 * alpha + r3 * beta) * (2.0 * beta * e(h * nx) + (r3 * alpha - beta) * e(h * ny)).sqrt();
            let den = (3.0 * h + 6.0 * alpha * k + 2.0 * r3 * beta * k) * ((r3 * alpha + beta) * e(h * (nx + ny))).sqrt();
            let v = num / den;
            vec![v, -v]
        }
    }
}

/// The non-trivial eigenvalue of the 1D p = 1 symbol.
pub fn closed_form_1d_eig(h: f64, k: f64, n: f64) -> Complex64 {
    2.0 * k * (3.0 * k - h) * Complex64::from_polar(1.0, -h * n) / (h * h + 4.0 * h * k + 6.0 * k * k)
}

/// `2k |h - 3k| / (h^2 + 4hk + 6k^2)`.
pub fn lambda_max_1d(h: f64, k: f64) -> f64 {
    2.0 * k * (h - 3.0 * k).abs() / (h * h + 4.0 * h * k + 6.0 * k * k)
}

/// 1D p = 1 symbol `R_hat = I - D^{-1}(M + k L_hat)` with `L_hat = L_jj + exp(-i h n) L_{j,j-1}`.
pub fn oned_symbol(h: f64, k: f64, n: f64) -> [Complex64; 4] {
    use crate::discretization::OneDOperator;
    let m = OneDOperator::mass_block(h);
    let ljj = OneDOperator::diagonal_block();
    let lup = OneDOperator::upwind_block();
    let d: Vec<f64> = m.iter().zip(&ljj).map(|(a, b)| a + k * b).collect();
    let dinv = DenseLu::new(&d, 2).expect("D is invertible for k >= 0").inverse();
    let w = Complex64::from_polar(1.0, -h * n);
    let a: Vec<Complex64> = (0..4).map(|t| m[t] + k * (ljj[t] + w * lup[t])).collect();
    let mut r = [Complex64::new(0.0, 0.0); 4];
    for i in 0..2 {
        for j in 0..2 {
            let s = dinv[i * 2] * a[j] + dinv[i * 2 + 1] * a[2 + j];
            r[i * 2 + j] = if i == j { 1.0 - s } else { -s };
        }
    }
    r
}

/// Sample counts for the maximisation over angles and lattice phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    /// Angles, evenly spaced over the admissible range including both ends.
    pub theta_samples: usize,
    /// Phases per lattice direction, `2 pi j / wave_samples`.
    pub wave_samples: usize,
    pub theta_range: ThetaRange,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { theta_samples: 33, wave_samples: 48, theta_range: ThetaRange::PerPattern }
    }
}

impl Sampling {
    pub fn thetas(&self, kind: PatternKind) -> Vec<f64> {
        let top = self.theta_range.upper(kind);
        let n = self.theta_samples;
        if n == 1 {
            return vec![0.0];
        }
        (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect()
    }

    pub fn phases(&self) -> Vec<[f64; 2]> {
        let m = self.wave_samples;
        let t = |j: usize| 2.0 * PI * j as f64 / m as f64;
        (0..m).flat_map(|a| (0..m).map(move |b| [t(a), t(b)])).collect()
    }
}

/// Timestep for a label in the analysis: `k1 = 3 h_E / |beta|` with `|beta| = 1`.
pub fn analysis_timestep(label: KLabel, h_e: f64) -> f64 {
    label.analysis(h_e, 1.0)
}

/// Maximum spectral radius of `R_hat` over the sampled angles and phases, for each timestep.
pub fn max_spectral_radius(kind: PatternKind, p: usize, ks: &[f64], h_e: f64, sampling: &Sampling) -> Result<Vec<f64>, VonNeumannError> {
    if sampling.theta_samples == 0 || sampling.wave_samples == 0 {
        return Err(VonNeumannError::BadSampling);
    }
    let phases = sampling.phases();
    let per_theta: Vec<Vec<f64>> = sampling
        .thetas(kind)
        .into_par_iter()
        .map(|theta| -> Result<Vec<f64>, VonNeumannError> {
            let sym = PatternSymbol::new(kind, p, h_e, theta)?;
            ks.iter()
                .map(|&k| {
                    let js = sym.jacobi_symbol(k)?;
                    phases
                        .par_iter()
                        .map(|&ph| js.spectral_radius(ph))
                        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok((0..ks.len()).map(|i| per_theta.iter().map(|v| v[i]).fold(0.0, f64::max)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub kind: PatternKind,
    pub p: usize,
    pub k_label: KLabel,
    pub lambda_max: f64,
    pub log_ratio: f64,
}

impl RatioRow {
    pub const CSV_HEADER: &'static str = "pattern,p,k_label,lambda_max,log_ratio";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{:.12},{:.6}", self.kind.name(), self.p, self.k_label, self.lambda_max, self.log_ratio)
    }
}

/// `log(lambda_min) / log(lambda_max(pattern))` for every pattern, degree and timestep, where
/// `lambda_min` is the smallest maximal spectral radius among the patterns in that column.
pub fn ratio_table(kinds: &[PatternKind], ps: &[usize], labels: &[KLabel], sampling: &Sampling) -> Result<Vec<RatioRow>, VonNeumannError> {
    let h_e = 1.0;
    let ks: Vec<f64> = labels.iter().map(|&l| analysis_timestep(l, h_e)).collect();
    let mut rows = Vec::new();
    for &p in ps {
        let lam: Vec<Vec<f64>> = kinds.iter().map(|&kind| max_spectral_radius(kind, p, &ks, h_e, sampling)).collect::<Result<_, _>>()?;
        for (li, &label) in labels.iter().enumerate() {
            let best = lam.iter().map(|v| v[li]).fold(f64::INFINITY, f64::min);
            for (ki, &kind) in kinds.iter().enumerate() {
                let l = lam[ki][li];
                rows.push(RatioRow { kind, p, k_label: label, lambda_max: l, log_ratio: best.ln() / l.ln() });
            }
        }
    }
    Ok(rows)
}

/// Bottleneck distance between two multisets of eigenvalues of equal size: the smallest `t`
/// such that the sets can be paired one-to-one with every pair closer than `t`.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra of different sizes");
    if a.is_empty() {
        return 0.0;
    }
    let mut ds: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| (x - y).norm())).collect();
    ds.sort_by(|x, y| x.total_cmp(y));
    ds.dedup();
    let (mut lo, mut hi) = (0, ds.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(a, b, ds[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    ds[lo]
}

fn perfect_matching(a: &[Complex64], b: &[Complex64], t: f64) -> bool {
    fn augment(i: usize, a: &[Complex64], b: &[Complex64], t: f64, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for j in 0..b.len() {
            if !seen[j] && (a[i] - b[j]).norm() <= t {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, a, b, t, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; b.len()];
    (0..a.len()).all(|i| augment(i, a, b, t, &mut vec![false; b.len()], &mut owner))
}
