//! Weyl-Heisenberg systems `{E_{c_m} T_{b_n} g}` on a cyclic grid and their
//! synthesis, analysis and frame operators.

use std::collections::BTreeSet;

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{self, ComplexMatrix, NumericsError};
use crate::operators::{character, GridSpec, OperatorError, Signal};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaborError {
    #[error("frequency list is empty")]
    EmptyFrequencies,
    #[error("shift list is empty")]
    EmptyShifts,
    #[error("shift {index} repeats an earlier shift modulo the grid")]
    DuplicateShift { index: usize },
    #[error("non-finite frequency at index {0}")]
    NonFiniteFrequency(usize),
    #[error("lattice generator is singular")]
    SingularGenerator,
    #[error("lattice generator must be {dim}x{dim}")]
    GeneratorShape { dim: usize },
    #[error("lattice does not close on the grid along axis {axis}")]
    NonClosingLattice { axis: usize },
    #[error("coefficient vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("density sequence is empty")]
    EmptySequence,
    #[error("density parameters must be positive (D = {density}, L = {spread})")]
    InvalidDensityParameters { density: f64, spread: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, GaborError>;

/// Window, frequency list `{c_m}` and shift list `{b_n}` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborSystem {
    grid: GridSpec,
    window: Signal,
    frequencies: Vec<Vec<f64>>,
    shifts: Vec<Vec<i64>>,
}

impl GaborSystem {
    pub fn new(
        window: Signal,
        frequencies: Vec<Vec<f64>>,
        shifts: Vec<Vec<i64>>,
    ) -> Result<Self> {
        let grid = window.grid().clone();
        if frequencies.is_empty() {
            return Err(GaborError::EmptyFrequencies);
        }
        if shifts.is_empty() {
            return Err(GaborError::EmptyShifts);
        }
        for (i, c) in frequencies.iter().enumerate() {
            grid.check_dim(c.len())?;
            if c.iter().any(|x| !x.is_finite()) {
                return Err(GaborError::NonFiniteFrequency(i));
            }
        }
        let mut seen = BTreeSet::new();
        for (i, b) in shifts.iter().enumerate() {
            grid.check_dim(b.len())?;
            if !seen.insert(grid.wrap(b)) {
                return Err(GaborError::DuplicateShift { index: i });
            }
        }
        Ok(Self {
            grid,
            window,
            frequencies,
            shifts,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn window(&self) -> &Signal {
        &self.window
    }

    pub fn frequencies(&self) -> &[Vec<f64>] {
        &self.frequencies
    }

    pub fn shifts(&self) -> &[Vec<i64>] {
        &self.shifts
    }

    /// Same frequencies and shifts with a different window.
    pub fn with_window(&self, window: Signal) -> Result<Self> {
        self.grid.check_same(window.grid())?;
        Self::new(window, self.frequencies.clone(), self.shifts.clone())
    }

    /// `(E_{c_m} T_{b_n} g)(t) = e^{2πi c_m·t/N} g(t − b_n)`.
    pub fn atom(&self, m: usize, n: usize) -> Vec<Complex64> {
        let c = &self.frequencies[m];
        let b = &self.shifts[n];
        self.grid
            .points()
            .map(|t| {
                let src: Vec<i64> = t.iter().zip(b).map(|(&x, &s)| x as i64 - s).collect();
                let g = self.window.values()[self.grid.flatten(&self.grid.wrap(&src))];
                character(&self.grid, c, &t) * g
            })
            .collect()
    }
}

/// Synthesis matrix: `N × (M·P)`, one column per atom.
///
/// Column `m·P + n` holds the atom for frequency `m` and shift `n` (shift
/// index fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct AtomMatrix {
    grid: GridSpec,
    matrix: ComplexMatrix,
    num_frequencies: usize,
    num_shifts: usize,
    system: Option<GaborSystem>,
}

impl AtomMatrix {
    /// Wraps an arbitrary `N × k` matrix as an atom family (one frequency, `k` shifts).
    pub fn from_matrix(grid: &GridSpec, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != grid.total() {
            return Err(OperatorError::SizeMismatch {
                expected: grid.total(),
                got: matrix.rows(),
            }
            .into());
        }
        Ok(Self {
            grid: grid.clone(),
            num_frequencies: 1,
            num_shifts: matrix.cols(),
            matrix,
            system: None,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_frequencies(&self) -> usize {
        self.num_frequencies
    }

    pub fn num_shifts(&self) -> usize {
        self.num_shifts
    }

    /// The generating system, when built by [`atoms`].
    pub fn system(&self) -> Option<&GaborSystem> {
        self.system.as_ref()
    }

    pub fn column_index(&self, m: usize, n: usize) -> usize {
        m * self.num_shifts + n
    }

    pub fn index_pair(&self, column: usize) -> (usize, usize) {
        (column / self.num_shifts, column % self.num_shifts)
    }

    pub fn column(&self, m: usize, n: usize) -> Vec<Complex64> {
        self.matrix.column(self.column_index(m, n))
    }

    /// Applies `op` to every atom; the result keeps the index layout but no
    /// longer carries a generating system.
    pub fn map_atoms(&self, op: &ComplexMatrix) -> Result<Self> {
        let n = self.grid.total();
        if op.shape() != (n, n) {
            return Err(OperatorError::SizeMismatch {
                expected: n,
                got: op.rows(),
            }
            .into());
        }
        Ok(Self {
            grid: self.grid.clone(),
            matrix: op * &self.matrix,
            num_frequencies: self.num_frequencies,
            num_shifts: self.num_shifts,
            system: None,
        })
    }

    /// Column order used when accumulating `V V*`: sorted by atom label when
    /// the labels are known, natural order otherwise.
    fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        if let Some(sys) = &self.system {
            let key = |col: usize| {
                let (m, n) = self.index_pair(col);
                let freq: Vec<u64> = sys.frequencies[m].iter().map(|x| canonical_bits(*x)).collect();
                (freq, self.grid.wrap(&sys.shifts[n]))
            };
            order.sort_by_cached_key(|&c| key(c));
        }
        order
    }
}

/// Order-preserving integer key for an `f64` (treats −0 as +0).
fn canonical_bits(x: f64) -> u64 {
    let x = if x == 0.0 { 0.0 } else { x };
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Synthesis matrix of a Gabor system.
pub fn atoms(system: &GaborSystem) -> AtomMatrix {
    let m_count = system.frequencies.len();
    let p_count = system.shifts.len();
    let n = system.grid.total();
    let mut cols = Vec::with_capacity(m_count * p_count);
    for m in 0..m_count {
        for p in 0..p_count {
            cols.push(system.atom(m, p));
        }
    }
    let matrix = ComplexMatrix::from_columns(n, &cols).expect("columns have grid length");
    AtomMatrix {
        grid: system.grid.clone(),
        matrix,
        num_frequencies: m_count,
        num_shifts: p_count,
        system: Some(system.clone()),
    }
}

/// Analysis operator: `(V* f)_{mn} = ⟨f, φ_mn⟩`.
pub fn analysis(v: &AtomMatrix, f: &Signal) -> Result<Vec<Complex64>> {
    v.grid.check_same(f.grid())?;
    Ok(v.matrix.apply_adjoint(f.values()))
}

/// Synthesis operator: `V c = Σ c_mn φ_mn`.
pub fn synthesis(v: &AtomMatrix, coefficients: &[Complex64]) -> Result<Signal> {
    if coefficients.len() != v.len() {
        return Err(GaborError::LengthMismatch {
            expected: v.len(),
            got: coefficients.len(),
        });
    }
    Ok(Signal::new(v.grid.clone(), v.matrix.apply(coefficients))?)
}

/// The frame operator `S = V V*`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOperatorMatrix {
    grid: GridSpec,
    s: ComplexMatrix,
}

impl FrameOperatorMatrix {
    /// Wraps a Hermitian matrix as a frame operator (symmetrized on entry).
    pub fn from_matrix(grid: &GridSpec, s: ComplexMatrix) -> Result<Self> {
        let n = grid.total();
        if s.shape() != (n, n) {
            return Err(OperatorError::SizeMismatch {
                expected: n,
                got: s.rows(),
            }
            .into());
        }
        numerics::hermitian_eig(&s)?;
        Ok(Self {
            grid: grid.clone(),
            s: s.hermitian_part(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        self.grid.check_same(f.grid())?;
        Ok(Signal::new(self.grid.clone(), self.s.apply(f.values()))?)
    }

    /// `⟨S f, f⟩`.
    pub fn quadratic_form(&self, f: &[Complex64]) -> f64 {
        numerics::inner(&self.s.apply(f), f).re
    }
}

pub fn frame_operator(v: &AtomMatrix) -> FrameOperatorMatrix {
    let ordered = v.matrix.select_columns(&v.canonical_order());
    let s = (&ordered * &ordered.adjoint()).hermitian_part();
    FrameOperatorMatrix {
        grid: v.grid.clone(),
        s,
    }
}

/// Optimal ordinary frame bounds `(λ_min(S), λ_max(S))`.
pub fn ordinary_frame_bounds(s: &FrameOperatorMatrix) -> Result<(f64, f64)> {
    let e = numerics::hermitian_eig(&s.s)?;
    Ok((e.min(), e.max()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselReport {
    /// Optimal Bessel bound `‖V‖²`.
    pub bound: f64,
    /// `λ_max(V V*)`, the same constant computed from the frame operator.
    pub frame_operator_max: f64,
    pub discrepancy: f64,
    /// `discrepancy ≤ 1e-9 · max(1, bound)`.
    pub consistent: bool,
}

/// Optimal Bessel bound of an atom family, cross-checked against `λ_max(S)`.
pub fn bessel_check(v: &AtomMatrix) -> Result<BesselReport> {
    let bound = v.matrix.spectral_norm().powi(2);
    let (_, top) = ordinary_frame_bounds(&frame_operator(v))?;
    let discrepancy = (bound - top).abs();
    Ok(BesselReport {
        bound,
        frame_operator_max: top,
        discrepancy,
        consistent: discrepancy <= 1e-9 * bound.max(1.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCheck {
    pub density: f64,
    pub spread: f64,
    pub sequence: Vec<(i64, f64)>,
    pub result: bool,
    pub worst_deviation: f64,
    /// Index attaining the worst deviation.
    pub worst_index: i64,
}

/// Checks `|λ_n − n/D| ≤ L` for every `(n, λ_n)` in the sequence.
pub fn uniform_density_check(sequence: &[(i64, f64)], density: f64, spread: f64) -> Result<DensityCheck> {
    if !(density > 0.0 && spread > 0.0) {
        return Err(GaborError::InvalidDensityParameters { density, spread });
    }
    let (worst_index, worst_deviation) = sequence
        .iter()
        .map(|&(n, l)| (n, (l - n as f64 / density).abs()))
        .fold(None, |acc: Option<(i64, f64)>, (n, d)| match acc {
            Some((_, best)) if best >= d => acc,
            _ => Some((n, d)),
        })
        .ok_or(GaborError::EmptySequence)?;
    Ok(DensityCheck {
        density,
        spread,
        sequence: sequence.to_vec(),
        result: worst_deviation <= spread,
        worst_deviation,
        worst_index,
    })
}

/// `p(t) = Σ_n |g(t − b_n)|²`, returned as a real-valued signal.
pub fn periodization(g: &Signal, shifts: &[Vec<i64>]) -> Result<Signal> {
    let grid = g.grid();
    for b in shifts {
        grid.check_dim(b.len())?;
    }
    let power: Vec<f64> = g.values().iter().map(|z| z.norm_sqr()).collect();
    Ok(Signal::from_fn(grid, |t| {
        let total: f64 = shifts
            .iter()
            .map(|b| {
                let src: Vec<i64> = t.iter().zip(b).map(|(&x, &s)| x as i64 - s).collect();
                power[grid.flatten(&grid.wrap(&src))]
            })
            .sum();
        Complex64::new(total, 0.0)
    }))
}

fn determinant(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .map(|c| {
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * m[0][c] * determinant(&minor(m, 0, c))
            })
            .sum(),
    }
}

fn minor(m: &[Vec<i128>], row: usize, col: usize) -> Vec<Vec<i128>> {
    m.iter()
        .enumerate()
        .filter(|&(r, _)| r != row)
        .map(|(_, line)| {
            line.iter()
                .enumerate()
                .filter(|&(c, _)| c != col)
                .map(|(_, &x)| x)
                .collect()
        })
        .collect()
}

/// Distinct lattice points `B n mod (N_1, …, N_d)`, sorted lexicographically.
///
/// The lattice must contain every period vector `N_j e_j`; otherwise its image
/// on the torus is not a faithful copy of the lattice and the offending axis
/// is reported.
pub fn lattice_shifts(generator: &[Vec<i64>], grid: &GridSpec) -> Result<Vec<Vec<i64>>> {
    let d = grid.dim();
    if generator.len() != d || generator.iter().any(|row| row.len() != d) {
        return Err(GaborError::GeneratorShape { dim: d });
    }
    let b: Vec<Vec<i128>> = generator
        .iter()
        .map(|row| row.iter().map(|&x| i128::from(x)).collect())
        .collect();
    let det = determinant(&b);
    if det == 0 {
        return Err(GaborError::SingularGenerator);
    }
    // B x = N_j e_j has the integer solution x = adj(B) N_j e_j / det.
    for (j, &nj) in grid.sizes().iter().enumerate() {
        for i in 0..d {
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            let adj_ij = sign * determinant(&minor(&b, j, i));
            if (adj_ij * nj as i128) % det != 0 {
                return Err(GaborError::NonClosingLattice { axis: j });
            }
        }
    }
    let columns: Vec<Vec<i64>> = (0..d)
        .map(|c| (0..d).map(|r| generator[r][c]).collect())
        .collect();
    let origin = vec![0usize; d];
    let mut seen = BTreeSet::from([origin.clone()]);
    let mut frontier = vec![origin];
    while let Some(p) = frontier.pop() {
        for col in &columns {
            let next: Vec<i64> = p.iter().zip(col).map(|(&x, &c)| x as i64 + c).collect();
            let next = grid.wrap(&next);
            if seen.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    Ok(seen
        .into_iter()
        .map(|p| p.into_iter().map(|x| x as i64).collect())
        .collect())
}

/// Optimal frame bounds of the exponentials `{E_{c_m}}` restricted to the
/// block `[0, block_1) × … × [0, block_d)`.
///
/// Modulations commute with translations up to a phase, so the bounds are
/// the same on every translate of the block.
pub fn exponential_bounds(grid: &GridSpec, frequencies: &[Vec<f64>], block: &[usize]) -> Result<(f64, f64)> {
    grid.check_dim(block.len())?;
    if frequencies.is_empty() {
        return Err(GaborError::EmptyFrequencies);
    }
    let pts: Vec<Vec<usize>> = grid
        .points()
        .filter(|t| t.iter().zip(block).all(|(&x, &l)| x < l))
        .collect();
    let cols: Vec<Vec<Complex64>> = frequencies
        .iter()
        .map(|c| pts.iter().map(|t| character(grid, c, t)).collect())
        .collect();
    let e = ComplexMatrix::from_columns(pts.len(), &cols)?;
    let gram = (&e * &e.adjoint()).hermitian_part();
    let eig = numerics::hermitian_eig(&gram)?;
    Ok((eig.min(), eig.max()))
}

/// Bounding block `[0, ext_j)` of the support of `g` (ext_j = last nonzero index + 1).
pub fn support_extent(g: &Signal) -> Vec<usize> {
    let grid = g.grid();
    let mut ext = vec![0; grid.dim()];
    for (i, z) in g.values().iter().enumerate() {
        if z.norm_sqr() > 0.0 {
            for (e, &t) in ext.iter_mut().zip(&grid.unflatten(i)) {
                *e = (*e).max(t + 1);
            }
        }
    }
    ext
}
