//! Finite cyclic grids, signals on them, and the structured operators acting
//! on those signals (translations, modulations, Fourier-diagonal families).

use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::numerics::{self, ComplexMatrix, NumericsError, DEFAULT_RANK_THRESHOLD};
use crate::random::stream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("vector has length {got}, grid dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("grids differ: {left:?} vs {right:?}")]
    GridMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, OperatorError>;

/// The cyclic grid `Z_{N_1} × … × Z_{N_d}` with row-major flattening.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridSpec {
    sizes: Vec<usize>,
}

impl GridSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(OperatorError::InvalidGrid("dimension must be at least 1".into()));
        }
        if let Some(j) = sizes.iter().position(|&n| n == 0) {
            return Err(OperatorError::InvalidGrid(format!("axis {j} has size 0")));
        }
        Ok(Self { sizes })
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn flatten(&self, point: &[usize]) -> usize {
        debug_assert_eq!(point.len(), self.dim());
        point
            .iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&t, &n)| acc * n + t)
    }

    pub fn unflatten(&self, mut index: usize) -> Vec<usize> {
        let mut point = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            point[j] = index % self.sizes[j];
            index /= self.sizes[j];
        }
        point
    }

    /// Reduces an integer vector into the fundamental domain.
    pub fn wrap(&self, v: &[i64]) -> Vec<usize> {
        v.iter()
            .zip(&self.sizes)
            .map(|(&x, &n)| x.rem_euclid(n as i64) as usize)
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.total()).map(|i| self.unflatten(i))
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(OperatorError::DimensionMismatch {
                expected: self.dim(),
                got: len,
            })
        }
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(OperatorError::GridMismatch {
                left: self.sizes.clone(),
                right: other.sizes.clone(),
            })
        }
    }
}

/// Complex-valued function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.total() {
            return Err(OperatorError::SizeMismatch {
                expected: grid.total(),
                got: values.len(),
            });
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(OperatorError::Numerics(NumericsError::NonFinite { row: 0, col: 0 }));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.total()],
            grid: grid.clone(),
        }
    }

    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(&[usize]) -> Complex64) -> Self {
        let values = grid.points().map(|p| f(&p)).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Unit impulse at `point`.
    pub fn delta(grid: &GridSpec, point: &[usize]) -> Result<Self> {
        grid.check_dim(point.len())?;
        let mut s = Self::zeros(grid);
        s.values[grid.flatten(&grid.wrap(&point.iter().map(|&x| x as i64).collect::<Vec<_>>()))] =
            Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// `height` on the block `[0, lengths_1) × … × [0, lengths_d)`, zero elsewhere.
    pub fn indicator_block(grid: &GridSpec, lengths: &[usize], height: f64) -> Result<Self> {
        grid.check_dim(lengths.len())?;
        Ok(Self::from_fn(grid, |t| {
            if t.iter().zip(lengths).all(|(&x, &l)| x < l) {
                Complex64::new(height, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Sampled periodized-distance Gaussian `exp(-π Σ (dist_j / width_j)²)`.
    pub fn gaussian(grid: &GridSpec, center: &[f64], width: &[f64]) -> Result<Self> {
        grid.check_dim(center.len())?;
        grid.check_dim(width.len())?;
        let sizes = grid.sizes().to_vec();
        Ok(Self::from_fn(grid, |t| {
            let e: f64 = (0..t.len())
                .map(|j| {
                    let n = sizes[j] as f64;
                    let raw = (t[j] as f64 - center[j]).rem_euclid(n);
                    let d = raw.min(n - raw);
                    (d / width[j]).powi(2)
                })
                .sum();
            Complex64::new((-std::f64::consts::PI * e).exp(), 0.0)
        }))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, point: &[usize]) -> Complex64 {
        self.values[self.grid.flatten(point)]
    }

    pub fn norm_sqr(&self) -> f64 {
        numerics::norm_sqr(&self.values)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩ = Σ self(t) conj(other(t))`.
    pub fn inner(&self, other: &Signal) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        Ok(numerics::inner(&self.values, &other.values))
    }

    pub fn scale(&self, c: Complex64) -> Signal {
        Signal {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

#[derive(Debug, Clone, Copy)]
struct SpectrumSummary {
    sigma_max: f64,
    sigma_min: f64,
    rank: usize,
}

/// A linear operator on the signals of one grid, stored as a dense `N × N` matrix.
///
/// Norm, adjoint and singular-value data are computed on first use and cached.
#[derive(Debug, Clone)]
pub struct BoundedOperator {
    grid: GridSpec,
    matrix: ComplexMatrix,
    adjoint: OnceLock<ComplexMatrix>,
    spectrum: OnceLock<SpectrumSummary>,
    unitary: OnceLock<bool>,
}

impl PartialEq for BoundedOperator {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.matrix == other.matrix
    }
}

impl BoundedOperator {
    pub fn from_matrix(grid: &GridSpec, matrix: ComplexMatrix) -> Result<Self> {
        let n = grid.total();
        if matrix.shape() != (n, n) {
            return Err(OperatorError::SizeMismatch {
                expected: n,
                got: if matrix.rows() != n { matrix.rows() } else { matrix.cols() },
            });
        }
        Ok(Self {
            grid: grid.clone(),
            matrix,
            adjoint: OnceLock::new(),
            spectrum: OnceLock::new(),
            unitary: OnceLock::new(),
        })
    }

    pub fn identity(grid: &GridSpec) -> Self {
        Self::from_matrix(grid, ComplexMatrix::identity(grid.total())).expect("square")
    }

    pub fn zero(grid: &GridSpec) -> Self {
        let n = grid.total();
        Self::from_matrix(grid, ComplexMatrix::zeros(n, n)).expect("square")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint_matrix(&self) -> &ComplexMatrix {
        self.adjoint.get_or_init(|| self.matrix.adjoint())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> BoundedOperator {
        let out = Self::from_matrix(&self.grid, self.adjoint_matrix().clone()).expect("square");
        let _ = out.adjoint.set(self.matrix.clone());
        out
    }

    fn spectrum(&self) -> SpectrumSummary {
        *self.spectrum.get_or_init(|| {
            if self.matrix.is_empty() {
                return SpectrumSummary {
                    sigma_max: 0.0,
                    sigma_min: 0.0,
                    rank: 0,
                };
            }
            let s = numerics::svd(&self.matrix, DEFAULT_RANK_THRESHOLD).expect("non-empty matrix");
            SpectrumSummary {
                sigma_max: s.max(),
                sigma_min: *s.singular_values.last().expect("non-empty"),
                rank: s.rank,
            }
        })
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.spectrum().sigma_max
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.spectrum().sigma_min
    }

    pub fn rank(&self) -> usize {
        self.spectrum().rank
    }

    /// `σ_min > rank_threshold · σ_max` with the default threshold.
    pub fn is_invertible(&self) -> bool {
        let s = self.spectrum();
        s.sigma_max > 0.0 && s.sigma_min > DEFAULT_RANK_THRESHOLD * s.sigma_max
    }

    /// `‖T*T − I‖ ≤ 1e-10`.
    pub fn is_unitary(&self) -> bool {
        *self.unitary.get_or_init(|| {
            let gram = self.adjoint_matrix() * &self.matrix;
            let diff = &gram - &ComplexMatrix::identity(self.grid.total());
            diff.spectral_norm() <= 1e-10
        })
    }

    pub fn is_numerically_zero(&self) -> bool {
        self.matrix.max_abs() == 0.0 || self.rank() == 0
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        self.grid.check_same(f.grid())?;
        Ok(Signal {
            grid: self.grid.clone(),
            values: self.matrix.apply(f.values()),
        })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &BoundedOperator) -> Result<BoundedOperator> {
        self.grid.check_same(&other.grid)?;
        Self::from_matrix(&self.grid, &self.matrix * &other.matrix)
    }

    pub fn scaled(&self, c: Complex64) -> BoundedOperator {
        Self::from_matrix(&self.grid, self.matrix.scale_complex(c)).expect("square")
    }

    /// `T T*`, exactly Hermitian.
    pub fn gram_outer(&self) -> ComplexMatrix {
        (&self.matrix * self.adjoint_matrix()).hermitian_part()
    }

    /// `T* T`, exactly Hermitian.
    pub fn gram_inner(&self) -> ComplexMatrix {
        (self.adjoint_matrix() * &self.matrix).hermitian_part()
    }
}

/// Spectral norm of `AB − BA`.
pub fn commutator_norm(a: &BoundedOperator, b: &BoundedOperator) -> f64 {
    (&(a.matrix() * b.matrix()) - &(b.matrix() * a.matrix())).spectral_norm()
}

/// Cyclic translation `(T_a f)(t) = f(t − a)`.
pub fn translation_op(grid: &GridSpec, a: &[i64]) -> Result<BoundedOperator> {
    grid.check_dim(a.len())?;
    let n = grid.total();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for (row, t) in grid.points().enumerate() {
        let src: Vec<i64> = t.iter().zip(a).map(|(&x, &s)| x as i64 - s).collect();
        let col = grid.flatten(&grid.wrap(&src));
        entries[row * n + col] = Complex64::new(1.0, 0.0);
    }
    BoundedOperator::from_matrix(grid, ComplexMatrix::from_row_major(n, n, entries)?)
}

/// Phase `exp(2πi Σ_j b_j t_j / N_j)` at grid point `t`.
pub fn character(grid: &GridSpec, b: &[f64], t: &[usize]) -> Complex64 {
    let turns: f64 = b
        .iter()
        .zip(t)
        .zip(grid.sizes())
        .map(|((&bj, &tj), &nj)| bj * tj as f64 / nj as f64)
        .sum();
    Complex64::from_polar(1.0, TAU * turns.rem_euclid(1.0))
}

/// Modulation `(E_b f)(t) = exp(2πi Σ_j b_j t_j / N_j) f(t)`.
pub fn modulation_op(grid: &GridSpec, b: &[f64]) -> Result<BoundedOperator> {
    grid.check_dim(b.len())?;
    let diag: Vec<Complex64> = grid.points().map(|t| character(grid, b, &t)).collect();
    BoundedOperator::from_matrix(grid, ComplexMatrix::from_diagonal(&diag))
}

/// Unitary DFT matrix, `F[t, k] = exp(2πi Σ k_j t_j / N_j) / √N`.
pub fn fourier_matrix(grid: &GridSpec) -> ComplexMatrix {
    let n = grid.total();
    let norm = 1.0 / (n as f64).sqrt();
    let pts: Vec<Vec<usize>> = grid.points().collect();
    ComplexMatrix::from_fn(n, n, |r, c| {
        let k: Vec<f64> = pts[c].iter().map(|&x| x as f64).collect();
        character(grid, &k, &pts[r]) * norm
    })
}

const FOURIER_K_STREAM: u64 = 0x4b;
const FOURIER_U_STREAM: u64 = 0x55;

/// Two operators diagonal in the discrete Fourier basis, so that `U` commutes
/// with both `K` and `K*`.
///
/// `K`'s spectrum has real and imaginary parts uniform in [-1, 1); `U`'s has
/// modulus uniform in [0.5, 2] (or exactly 1 when `unitary_u`) and uniform phase.
/// The two spectra come from separate streams, so `K` does not depend on `unitary_u`.
pub fn fourier_diagonal_pair(
    grid: &GridSpec,
    seed: u64,
    unitary_u: bool,
) -> (BoundedOperator, BoundedOperator) {
    let n = grid.total();
    let f = fourier_matrix(grid);
    let fa = f.adjoint();

    let mut rk = stream(seed, FOURIER_K_STREAM);
    let dk: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rk.random_range(-1.0..1.0), rk.random_range(-1.0..1.0)))
        .collect();
    let mut ru = stream(seed, FOURIER_U_STREAM);
    let du: Vec<Complex64> = (0..n)
        .map(|_| {
            let modulus: f64 = ru.random_range(0.5..=2.0);
            let phase: f64 = ru.random_range(0.0..TAU);
            Complex64::from_polar(if unitary_u { 1.0 } else { modulus }, phase)
        })
        .collect();

    let k = &(&f * &ComplexMatrix::from_diagonal(&dk)) * &fa;
    let u = &(&f * &ComplexMatrix::from_diagonal(&du)) * &fa;
    (
        BoundedOperator::from_matrix(grid, k).expect("square"),
        BoundedOperator::from_matrix(grid, u).expect("square"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, random_vector};

    fn cvec(xs: &[f64]) -> Vec<Complex64> {
        xs.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn line(n: usize) -> GridSpec {
        GridSpec::line(n).unwrap()
    }

    #[test]
    fn grid_flattening_is_row_major_and_bijective() {
        let g = GridSpec::new(vec![2, 3, 4]).unwrap();
        assert_eq!(g.flatten(&[1, 2, 3]), 23);
        for i in 0..g.total() {
            assert_eq!(g.flatten(&g.unflatten(i)), i);
        }
        assert!(GridSpec::new(vec![]).is_err());
        assert!(GridSpec::new(vec![3, 0]).is_err());
    }

    #[test]
    fn translation_shifts_cyclically() {
        let g = line(4);
        let f = Signal::new(g.clone(), cvec(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        let out = translation_op(&g, &[1]).unwrap().apply(&f).unwrap();
        assert_eq!(out.values(), cvec(&[4.0, 1.0, 2.0, 3.0]).as_slice());
        assert_eq!(translation_op(&g, &[0]).unwrap(), BoundedOperator::identity(&g));
        let g2 = GridSpec::new(vec![3, 5]).unwrap();
        assert_eq!(translation_op(&g2, &[3, 5]).unwrap(), BoundedOperator::identity(&g2));
        assert!(matches!(
            translation_op(&g, &[1, 2]),
            Err(OperatorError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn translation_group_law() {
        let g = GridSpec::new(vec![4, 3]).unwrap();
        let a = translation_op(&g, &[1, 2]).unwrap();
        let b = translation_op(&g, &[-3, 5]).unwrap();
        let ab = translation_op(&g, &[-2, 7]).unwrap();
        assert_eq!(a.compose(&b).unwrap(), ab);
    }

    #[test]
    fn modulation_gives_roots_of_unity() {
        let g = line(4);
        let ones = Signal::new(g.clone(), cvec(&[1.0; 4])).unwrap();
        let out = modulation_op(&g, &[1.0]).unwrap().apply(&ones).unwrap();
        let want = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for (a, b) in out.values().iter().zip(&want) {
            assert!((a - b).norm() < 1e-15);
        }
        let id = BoundedOperator::identity(&g);
        assert_eq!(modulation_op(&g, &[0.0]).unwrap(), id);
        let full = modulation_op(&g, &[4.0]).unwrap();
        assert!((full.matrix() - id.matrix()).max_abs() <= 1e-12);
    }

    #[test]
    fn modulation_group_law_and_adjoint() {
        let g = GridSpec::new(vec![5, 4]).unwrap();
        let e1 = modulation_op(&g, &[0.3, 1.7]).unwrap();
        let e2 = modulation_op(&g, &[2.2, -0.4]).unwrap();
        let e12 = modulation_op(&g, &[2.5, 1.3]).unwrap();
        assert!((e1.compose(&e2).unwrap().matrix() - e12.matrix()).max_abs() < 1e-13);
        let em = modulation_op(&g, &[-0.3, -1.7]).unwrap();
        assert!((e1.adjoint().matrix() - em.matrix()).max_abs() < 1e-13);
    }

    #[test]
    fn translation_adjoint_is_inverse_shift() {
        let g = GridSpec::new(vec![6, 2]).unwrap();
        let t = translation_op(&g, &[2, 1]).unwrap();
        assert_eq!(t.adjoint(), translation_op(&g, &[-2, -1]).unwrap());
    }

    #[test]
    fn adjoint_is_an_involution() {
        let g = line(5);
        let t = BoundedOperator::from_matrix(&g, random_matrix(&mut stream(1, 0), 5, 5)).unwrap();
        assert_eq!(t.adjoint().adjoint(), t);
    }

    #[test]
    fn adjoint_inner_product_identity() {
        let g = line(6);
        let mut rng = stream(2, 0);
        let t = BoundedOperator::from_matrix(&g, random_matrix(&mut rng, 6, 6)).unwrap();
        let ta = t.adjoint();
        for _ in 0..10 {
            let f = Signal::new(g.clone(), random_vector(&mut rng, 6)).unwrap();
            let h = Signal::new(g.clone(), random_vector(&mut rng, 6)).unwrap();
            let lhs = t.apply(&f).unwrap().inner(&h).unwrap();
            let rhs = f.inner(&ta.apply(&h).unwrap()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12 * t.operator_norm() * f.norm() * h.norm());
        }
    }

    #[test]
    fn norms_of_simple_operators() {
        let g = line(2);
        let d = BoundedOperator::from_matrix(&g, ComplexMatrix::from_real_diagonal(&[3.0, 1.0])).unwrap();
        assert!((d.operator_norm() - 3.0).abs() < 1e-14);
        let g4 = GridSpec::new(vec![4, 2]).unwrap();
        for op in [
            translation_op(&g4, &[1, 1]).unwrap(),
            modulation_op(&g4, &[0.25, 1.5]).unwrap(),
        ] {
            assert!((op.operator_norm() - 1.0).abs() <= 1e-12);
            assert!(op.is_unitary());
            assert!(op.is_invertible());
        }
    }

    #[test]
    fn modulation_translation_commutation_phase() {
        let g = GridSpec::new(vec![6, 4]).unwrap();
        let mut rng = stream(3, 0);
        for _ in 0..10 {
            let a = [rng.random_range(-6..6), rng.random_range(-4..4)];
            let b = [rng.random_range(-3..3) as f64, rng.random_range(-3..3) as f64];
            let t = translation_op(&g, &a).unwrap();
            let e = modulation_op(&g, &b).unwrap();
            let et = e.compose(&t).unwrap();
            let te = t.compose(&e).unwrap();
            // E_b T_a = phase · T_a E_b; find the phase from a nonzero entry.
            let (r, c) = (0..g.total())
                .flat_map(|r| (0..g.total()).map(move |c| (r, c)))
                .find(|&(r, c)| te.matrix().get(r, c).norm() > 0.5)
                .unwrap();
            let phase = et.matrix().get(r, c) / te.matrix().get(r, c);
            assert!((phase.norm() - 1.0).abs() < 1e-12);
            assert!((et.matrix() - &te.matrix().scale_complex(phase)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_pair_commutes() {
        let g = GridSpec::new(vec![4, 3]).unwrap();
        for seed in 0..4 {
            for unitary in [false, true] {
                let (k, u) = fourier_diagonal_pair(&g, seed, unitary);
                assert!(commutator_norm(&u, &k) <= 1e-10);
                assert!(commutator_norm(&u, &k.adjoint()) <= 1e-10);
                assert!(u.is_invertible());
                assert_eq!(u.is_unitary(), unitary);
            }
        }
    }

    #[test]
    fn fourier_pair_is_reproducible() {
        let g = line(8);
        let (k1, u1) = fourier_diagonal_pair(&g, 42, false);
        let (k2, u2) = fourier_diagonal_pair(&g, 42, false);
        assert_eq!(k1.matrix().to_row_major(), k2.matrix().to_row_major());
        assert_eq!(u1.matrix().to_row_major(), u2.matrix().to_row_major());
        let (k3, _) = fourier_diagonal_pair(&g, 42, true);
        assert_eq!(k1, k3);
    }

    #[test]
    fn signal_constructors() {
        let g = GridSpec::new(vec![4, 4]).unwrap();
        let ind = Signal::indicator_block(&g, &[2, 3], 1.0).unwrap();
        assert!((ind.norm_sqr() - 6.0).abs() < 1e-15);
        let d = Signal::delta(&g, &[1, 2]).unwrap();
        assert_eq!(d.at(&[1, 2]), Complex64::new(1.0, 0.0));
        assert!((d.norm_sqr() - 1.0).abs() < 1e-15);
        let gs = Signal::gaussian(&g, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(gs.at(&[0, 0]), Complex64::new(1.0, 0.0));
        assert!((gs.at(&[0, 1]).re - gs.at(&[0, 3]).re).abs() < 1e-15);
        assert!(Signal::new(g.clone(), vec![]).is_err());
    }
}
