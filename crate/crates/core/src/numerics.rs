//! Dense complex linear algebra used by every bound computation.
//!
//! Eigendecompositions and SVDs are delegated to `nalgebra`; everything built
//! on top of them (pseudo-inverse, PSD verdicts, restricted Rayleigh
//! extremes) lives here.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Relative cutoff below which singular values / eigenvalues count as zero.
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-10;

/// Entrywise asymmetry tolerated by [`hermitian_eig`], relative to the largest entry.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |M - M*| entry = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("denominator is numerically zero")]
    ZeroDenominator,
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("entry buffer has length {len}, expected {expected}")]
    BadLength { len: usize, expected: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("rank threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("singular value decomposition failed to reach accuracy {residual:e}")]
    SvdInaccurate { residual: f64 },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Dense complex matrix. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(NumericsError::BadLength {
                len: entries.len(),
                expected: rows * cols,
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let z = m[(r, c)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(NumericsError::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(Self(m))
    }

    /// Wraps a matrix produced by arithmetic on finite matrices.
    pub(crate) fn wrap(m: DMatrix<Complex64>) -> Self {
        debug_assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self(m)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self::wrap(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |r, c| if r == c { diag[r] } else { Complex64::new(0.0, 0.0) })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Builds a matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Result<Self> {
        for col in columns {
            if col.len() != rows {
                return Err(NumericsError::BadLength {
                    len: col.len(),
                    expected: rows,
                });
            }
        }
        let mut m = DMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        Self::from_dmatrix(m)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0 || self.cols() == 0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                out.push(self.0[(r, c)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::wrap(self.0.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self::wrap(self.0.map(|z| z * s))
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols(), "vector length must match column count");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows()];
        for c in 0..self.cols() {
            let x = v[c];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += self.0[(r, c)] * x;
            }
        }
        out
    }

    /// `M* v` without forming the adjoint.
    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.rows(), "vector length must match row count");
        (0..self.cols())
            .map(|c| {
                self.0
                    .column(c)
                    .iter()
                    .zip(v)
                    .map(|(m, x)| m.conj() * x)
                    .sum()
            })
            .collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Largest entry of `|M - M*|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.rows().min(self.cols());
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.0[(r, c)] - self.0[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::wrap((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// Keeps the columns with the given indices, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows(), idx.len(), |r, c| self.0[(r, idx[c])])
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.0.clone().singular_values().max()
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(NumericsError::ShapeMismatch {
                expected: (self.cols(), rhs.cols()),
                got: rhs.shape(),
            });
        }
        Ok(self * rhs)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix::wrap(-&self.0)
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenResult {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue modulus, i.e. the spectral norm of a Hermitian matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    pub fn eigenvector(&self, i: usize) -> Vec<Complex64> {
        self.eigenvectors.column(i)
    }
}

/// Hermitian eigendecomposition.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenResult> {
    if !m.is_square() {
        return Err(NumericsError::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let asym = m.max_asymmetry();
    if asym > HERMITIAN_TOLERANCE * m.max_abs() {
        return Err(NumericsError::NotHermitian {
            max_asymmetry: asym,
        });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(EigenResult {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = m.hermitian_part().0.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Thin singular value decomposition `M = U diag(σ) W*`, σ descending.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub singular_values: Vec<f64>,
    /// `rows × k` left singular vectors, `k = min(rows, cols)`.
    pub left: ComplexMatrix,
    /// `cols × k` right singular vectors.
    pub right: ComplexMatrix,
    pub rank: usize,
    pub rank_threshold: f64,
}

impl SvdResult {
    pub fn max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Smallest singular value above the rank cutoff, if any.
    pub fn min_nonzero(&self) -> Option<f64> {
        self.rank.checked_sub(1).map(|i| self.singular_values[i])
    }

    /// Orthonormal basis of the numerical range (first `rank` left vectors).
    pub fn range_basis(&self) -> ComplexMatrix {
        let idx: Vec<usize> = (0..self.rank).collect();
        self.left.select_columns(&idx)
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(NumericsError::InvalidThreshold(t))
    }
}

type Factors = (DMatrix<Complex64>, Vec<f64>, DMatrix<Complex64>);

/// Worst of the reconstruction error (relative to `σ_max`) and the loss of
/// orthonormality of either factor.
fn factor_residual(m: &DMatrix<Complex64>, (u, s, v): &Factors) -> f64 {
    let k = s.len();
    let sigma = DMatrix::from_fn(k, k, |i, j| if i == j { Complex64::new(s[i], 0.0) } else { Complex64::ZERO });
    let scale = s.iter().copied().fold(0.0, f64::max);
    let rec = (u * sigma * v.adjoint() - m).camax();
    let rec = if scale > 0.0 { rec / scale } else { rec };
    let eye = DMatrix::<Complex64>::identity(k, k);
    let ou = (u.adjoint() * u - &eye).camax();
    let ov = (v.adjoint() * v - &eye).camax();
    rec.max(ou).max(ov)
}

fn raw_svd(m: &DMatrix<Complex64>) -> Factors {
    let dec = m.clone().svd(true, true);
    let u = dec.u.expect("left vectors requested");
    let v = dec.v_t.expect("right vectors requested").adjoint();
    (u, dec.singular_values.as_slice().to_vec(), v)
}

const SVD_ACCURACY: f64 = 1e-11;
const JACOBI_SWEEPS: usize = 80;

/// Orthonormal columns extending `basis` (orthonormal, `n × p`) to `n × want`,
/// by Gram–Schmidt over the standard basis.
fn complete_basis(basis: &[DVector<Complex64>], n: usize, want: usize) -> Vec<DVector<Complex64>> {
    let mut out = basis.to_vec();
    let mut candidate = 0;
    while out.len() < want && candidate < n {
        let mut e = DVector::<Complex64>::zeros(n);
        e[candidate] = Complex64::ONE;
        candidate += 1;
        for _ in 0..2 {
            for b in &out {
                let proj = b.dotc(&e);
                e -= b * proj;
            }
        }
        let norm = e.norm();
        if norm > 0.5 {
            out.push(e / Complex64::new(norm, 0.0));
        }
    }
    out
}

/// One-sided Jacobi SVD of a tall (`rows ≥ cols`) matrix.
fn jacobi_svd_tall(m: &DMatrix<Complex64>) -> Factors {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<Complex64>::identity(cols, cols);
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for target in [&mut a, &mut v] {
                    for r in 0..target.nrows() {
                        let (xp, xq) = (target[(r, p)], target[(r, q)]);
                        target[(r, p)] = xp * c - xq * phase.conj() * s;
                        target[(r, q)] = xp * phase * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let mut left: Vec<DVector<Complex64>> = Vec::with_capacity(cols);
    let mut nonzero = Vec::new();
    for (j, &sj) in sigma.iter().enumerate() {
        if sj > 0.0 {
            left.push(a.column(j) / Complex64::new(sj, 0.0));
            nonzero.push(j);
        }
    }
    let filled = complete_basis(&left, rows, cols);
    let mut extra = filled[left.len()..].iter();
    let mut u = DMatrix::<Complex64>::zeros(rows, cols);
    let mut next = left.iter();
    for j in 0..cols {
        let col = if nonzero.contains(&j) { next.next() } else { extra.next() };
        u.set_column(j, col.expect("basis completed to cols vectors"));
    }
    (u, sigma, v)
}

fn jacobi_svd(m: &DMatrix<Complex64>) -> Factors {
    if m.nrows() >= m.ncols() {
        jacobi_svd_tall(m)
    } else {
        let (u, s, v) = jacobi_svd_tall(&m.adjoint());
        (v, s, u)
    }
}

/// nalgebra's complex SVD occasionally returns singular vectors of the null
/// space that leak into the range of rank-deficient input. Its result is
/// verified, and a one-sided Jacobi factorization replaces it when needed.
fn verified_svd(m: &DMatrix<Complex64>) -> Result<Factors> {
    let fast = raw_svd(m);
    let first = factor_residual(m, &fast);
    if first <= SVD_ACCURACY {
        return Ok(fast);
    }
    let slow = jacobi_svd(m);
    let second = factor_residual(m, &slow);
    if second <= SVD_ACCURACY {
        Ok(slow)
    } else {
        Err(NumericsError::SvdInaccurate {
            residual: first.min(second),
        })
    }
}

pub fn svd(m: &ComplexMatrix, rank_threshold: f64) -> Result<SvdResult> {
    check_threshold(rank_threshold)?;
    if m.is_empty() {
        return Err(NumericsError::EmptyMatrix);
    }
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let (u, sv, v) = verified_svd(&m.0)?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    let left = ComplexMatrix::from_fn(rows, k, |r, c| u[(r, order[c])]);
    let right = ComplexMatrix::from_fn(cols, k, |r, c| v[(r, order[c])]);
    let cutoff = rank_threshold * singular_values[0];
    let rank = if singular_values[0] > 0.0 {
        singular_values.iter().filter(|&&s| s > cutoff).count()
    } else {
        0
    };
    Ok(SvdResult {
        singular_values,
        left,
        right,
        rank,
        rank_threshold,
    })
}

/// Moore–Penrose pseudo-inverse, discarding singular values at or below
/// `rank_threshold · σ_max`.
pub fn pseudo_inverse(m: &ComplexMatrix, rank_threshold: f64) -> Result<ComplexMatrix> {
    let dec = svd(m, rank_threshold)?;
    let (rows, cols) = m.shape();
    let mut out = DMatrix::<Complex64>::zeros(cols, rows);
    for i in 0..dec.rank {
        let inv = 1.0 / dec.singular_values[i];
        let w = dec.right.0.column(i);
        let u = dec.left.0.column(i);
        for c in 0..rows {
            let uc = u[c].conj() * inv;
            for r in 0..cols {
                out[(r, c)] += w[r] * uc;
            }
        }
    }
    Ok(ComplexMatrix::wrap(out))
}

/// Outcome of [`psd_test`].
#[derive(Debug, Clone)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    /// `max(1, spectral radius)`; the tolerance is `tol · scale`.
    pub scale: f64,
    /// `min_eigenvalue + tol · scale`; negative iff the test fails.
    pub margin: f64,
    /// Violating eigenpair when the test fails.
    pub witness: Option<(f64, Vec<Complex64>)>,
}

/// Positive semidefiniteness relative to the spectral scale of `m`.
pub fn psd_test(m: &ComplexMatrix, tol: f64) -> Result<PsdVerdict> {
    let eig = hermitian_eig(m)?;
    let scale = eig.spectral_radius().max(1.0);
    let lo = eig.min();
    let margin = lo + tol * scale;
    let is_psd = margin >= 0.0;
    let witness = (!is_psd).then(|| (lo, eig.eigenvector(0)));
    Ok(PsdVerdict {
        is_psd,
        min_eigenvalue: lo,
        scale,
        margin,
        witness,
    })
}

/// Extremes of `⟨Num f, f⟩ / ⟨Den f, f⟩` over `f ∈ range(Den)`.
///
/// The range of `Den` is taken from its eigendecomposition with eigenvalues
/// above `rank_threshold · λ_max(Den)`; on that subspace `Den` is the diagonal
/// `Λ`, so the extremes are those of `Λ^{-1/2} Q* Num Q Λ^{-1/2}`.
pub fn subspace_rayleigh_extremes(
    num: &ComplexMatrix,
    den: &ComplexMatrix,
    rank_threshold: f64,
) -> Result<(f64, f64)> {
    check_threshold(rank_threshold)?;
    if num.shape() != den.shape() {
        return Err(NumericsError::ShapeMismatch {
            expected: den.shape(),
            got: num.shape(),
        });
    }
    if den.is_square() && *den == ComplexMatrix::identity(den.rows()) {
        let eig = hermitian_eig(num)?;
        if eig.eigenvalues.is_empty() {
            return Err(NumericsError::ZeroDenominator);
        }
        return Ok((eig.min(), eig.max()));
    }
    hermitian_eig(num)?;
    let den_eig = hermitian_eig(den)?;
    let top = den_eig.max();
    if top <= 0.0 {
        return Err(NumericsError::ZeroDenominator);
    }
    let keep: Vec<usize> = (0..den_eig.eigenvalues.len())
        .filter(|&i| den_eig.eigenvalues[i] > rank_threshold * top)
        .collect();
    let q = den_eig.eigenvectors.select_columns(&keep);
    let inv_sqrt: Vec<f64> = keep
        .iter()
        .map(|&i| 1.0 / den_eig.eigenvalues[i].sqrt())
        .collect();
    let reduced = &(&q.adjoint() * num) * &q;
    let k = keep.len();
    let whitened = ComplexMatrix::from_fn(k, k, |r, c| {
        reduced.get(r, c) * (inv_sqrt[r] * inv_sqrt[c])
    })
    .hermitian_part();
    let eig = hermitian_eig(&whitened)?;
    Ok((eig.min(), eig.max()))
}

/// `⟨u, v⟩ = Σ u_i conj(v_i)`.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    norm_sqr(v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, random_rank_matrix, stream};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let a = random_matrix(&mut stream(seed, 0), n, n);
        (&a + &a.adjoint()).scale(0.5)
    }

    #[test]
    fn eig_identity() {
        let e = hermitian_eig(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues.len(), 3);
        for l in &e.eigenvalues {
            assert!(close(*l, 1.0, 1e-14));
        }
    }

    #[test]
    fn eig_diagonal_sorted_ascending() {
        let e = hermitian_eig(&ComplexMatrix::from_real_diagonal(&[2.0, -1.0])).unwrap();
        assert!(close(e.eigenvalues[0], -1.0, 1e-14));
        assert!(close(e.eigenvalues[1], 2.0, 1e-14));
    }

    #[test]
    fn eig_trace_and_residuals() {
        let m = random_hermitian(8, 11);
        let e = hermitian_eig(&m).unwrap();
        let sum: f64 = e.eigenvalues.iter().sum();
        assert!(close(sum, m.trace().re, 1e-10));
        let scale = m.spectral_norm();
        for i in 0..8 {
            let v = e.eigenvector(i);
            let mv = m.apply(&v);
            let r: Vec<Complex64> = mv.iter().zip(&v).map(|(a, b)| a - b * e.eigenvalues[i]).collect();
            assert!(norm(&r) <= 1e-12 * scale);
        }
        let g = &e.eigenvectors.adjoint() * &e.eigenvectors;
        assert!((&g - &ComplexMatrix::identity(8)).max_abs() < 1e-12);
    }

    #[test]
    fn eig_errors() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect), Err(NumericsError::NonSquare { .. })));
        let m = ComplexMatrix::from_row_major(2, 2, vec![c(1.0), c(2.0), c(0.0), c(1.0)]).unwrap();
        match hermitian_eig(&m) {
            Err(NumericsError::NotHermitian { max_asymmetry }) => assert!(close(max_asymmetry, 2.0, 0.0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_finite_entries() {
        let r = ComplexMatrix::from_row_major(1, 2, vec![c(1.0), c(f64::NAN)]);
        assert_eq!(r, Err(NumericsError::NonFinite { row: 0, col: 1 }));
    }

    #[test]
    fn svd_diagonal_and_zero() {
        let s = svd(&ComplexMatrix::from_real_diagonal(&[3.0, 0.0]), 1e-12).unwrap();
        assert_eq!(s.rank, 1);
        assert!(close(s.singular_values[0], 3.0, 1e-14));
        assert!(close(s.singular_values[1], 0.0, 1e-14));
        let z = svd(&ComplexMatrix::zeros(3, 2), 1e-12).unwrap();
        assert_eq!(z.rank, 0);
    }

    #[test]
    fn svd_errors() {
        assert_eq!(
            svd(&ComplexMatrix::zeros(0, 0), 1e-10).unwrap_err(),
            NumericsError::EmptyMatrix
        );
        assert!(matches!(
            svd(&ComplexMatrix::identity(2), 1.5),
            Err(NumericsError::InvalidThreshold(_))
        ));
    }

    #[test]
    fn svd_reconstructs_wide_and_tall() {
        for (r, cdim) in [(5, 3), (3, 5), (4, 4)] {
            let m = random_matrix(&mut stream(3, r as u64), r, cdim);
            let s = svd(&m, DEFAULT_RANK_THRESHOLD).unwrap();
            let sig: Vec<Complex64> = s.singular_values.iter().map(|&x| c(x)).collect();
            let rec = &(&s.left * &ComplexMatrix::from_diagonal(&sig)) * &s.right.adjoint();
            assert!((&rec - &m).max_abs() <= 1e-12 * s.max());
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn jacobi_factors_every_shape_and_rank() {
        for (i, (r, cdim)) in [(6, 4), (4, 6), (5, 5), (7, 1), (1, 3)].into_iter().enumerate() {
            for rank in 0..=r.min(cdim) {
                let m = random_rank_matrix(&mut stream(40 + i as u64, rank as u64), r, cdim, rank);
                let f = jacobi_svd(m.as_dmatrix());
                assert!(factor_residual(m.as_dmatrix(), &f) <= 1e-12, "{r}x{cdim} rank {rank}");
                let big = f.1.iter().filter(|&&x| x > 1e-10 * f.1.iter().copied().fold(0.0, f64::max)).count();
                assert_eq!(big, rank);
            }
        }
    }

    #[test]
    fn svd_survives_rank_deficient_pseudo_inverse() {
        let m = random_rank_matrix(&mut stream(16036500733053169497, 2), 5, 6, 2);
        let p = pseudo_inverse(&m, DEFAULT_RANK_THRESHOLD).unwrap();
        let s = svd(&p, DEFAULT_RANK_THRESHOLD).unwrap();
        let sig: Vec<Complex64> = s.singular_values.iter().map(|&x| c(x)).collect();
        let rec = &(&s.left * &ComplexMatrix::from_diagonal(&sig)) * &s.right.adjoint();
        assert!((&rec - &p).max_abs() <= 1e-11 * s.max());
        assert_eq!(s.rank, 2);
        let back = pseudo_inverse(&p, DEFAULT_RANK_THRESHOLD).unwrap();
        assert!((&back - &m).max_abs() <= 1e-9 * m.max_abs());
    }

    #[test]
    fn pinv_examples() {
        let p = pseudo_inverse(&ComplexMatrix::from_real_diagonal(&[2.0, 0.0]), 1e-10).unwrap();
        assert!((&p - &ComplexMatrix::from_real_diagonal(&[0.5, 0.0])).max_abs() < 1e-15);

        // Unitary: pinv equals adjoint.
        let q = crate::random::random_unitary(&mut stream(5, 0), 4);
        let p = pseudo_inverse(&q, 1e-10).unwrap();
        assert!((&p - &q.adjoint()).max_abs() < 1e-12);
    }

    #[test]
    fn pinv_penrose_rank_two() {
        let m = random_rank_matrix(&mut stream(7, 1), 4, 4, 2);
        let p = pseudo_inverse(&m, DEFAULT_RANK_THRESHOLD).unwrap();
        let scale = m.spectral_norm().max(p.spectral_norm()).max(1.0);
        assert!((&(&(&m * &p) * &m) - &m).max_abs() <= 1e-10 * scale);
        assert!((&(&(&p * &m) * &p) - &p).max_abs() <= 1e-10 * scale);
        let mp = &m * &p;
        assert!((&mp - &mp.adjoint()).max_abs() <= 1e-10 * scale);
        let pm = &p * &m;
        assert!((&pm - &pm.adjoint()).max_abs() <= 1e-10 * scale);
    }

    #[test]
    fn psd_examples() {
        assert!(psd_test(&ComplexMatrix::identity(3), 1e-8).unwrap().is_psd);
        let v = psd_test(&ComplexMatrix::from_real_diagonal(&[1.0, -1.0]), 1e-8).unwrap();
        assert!(!v.is_psd);
        let (lam, w) = v.witness.unwrap();
        assert!(close(lam, -1.0, 1e-14));
        assert!(close(w[1].norm(), 1.0, 1e-14));
        assert!(psd_test(&ComplexMatrix::zeros(3, 3), 1e-8).unwrap().is_psd);
        let nh = ComplexMatrix::from_row_major(2, 2, vec![c(1.0), c(1.0), c(0.0), c(1.0)]).unwrap();
        assert!(matches!(psd_test(&nh, 1e-8), Err(NumericsError::NotHermitian { .. })));
    }

    #[test]
    fn rayleigh_trivial_cases() {
        let num = random_hermitian(5, 2);
        let (lo, hi) = subspace_rayleigh_extremes(&num, &ComplexMatrix::identity(5), 1e-10).unwrap();
        let e = hermitian_eig(&num).unwrap();
        assert_eq!((lo, hi), (e.min(), e.max()));

        let a = random_matrix(&mut stream(9, 0), 5, 3);
        let den = &a * &a.adjoint();
        let (lo, hi) = subspace_rayleigh_extremes(&den, &den, 1e-10).unwrap();
        assert!(close(lo, 1.0, 1e-10) && close(hi, 1.0, 1e-10));
    }

    #[test]
    fn rayleigh_zero_denominator() {
        let r = subspace_rayleigh_extremes(&ComplexMatrix::identity(2), &ComplexMatrix::zeros(2, 2), 1e-10);
        assert_eq!(r, Err(NumericsError::ZeroDenominator));
    }
}
