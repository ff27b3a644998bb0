//! K-frame bounds of Weyl-Heisenberg systems and numerical checks of the
//! inequalities relating them to ranges, periodizations and transformed
//! systems.
//!
//! Three optimal constants are tracked for a system with frame operator `S`:
//!
//! * `A_opt`, the largest `A` with `A‖K*f‖² ≤ ⟨Sf, f⟩`,
//! * `B_std = λ_max(S)`, the smallest `B` with `⟨Sf, f⟩ ≤ B‖f‖²`,
//! * `B_K`, the smallest `B` with `⟨Sf, f⟩ ≤ B‖Kf‖²` (infeasible unless
//!   `ker K ⊆ ker S`).
//!
//! All verdicts carry the margin they were decided by.

use num_complex::Complex64;
use thiserror::Error;

use crate::gabor::{
    self, exponential_bounds, frame_operator, periodization, support_extent, AtomMatrix,
    FrameOperatorMatrix, GaborError, GaborSystem,
};
use crate::numerics::{
    self, hermitian_eig, psd_test, pseudo_inverse, subspace_rayleigh_extremes, svd, ComplexMatrix,
    NumericsError, PsdVerdict,
};
use crate::operators::{
    commutator_norm, translation_op, BoundedOperator, GridSpec, OperatorError, Signal,
};
use crate::random::{random_vector, stream};

/// Relative tolerance for every pass/fail comparison.
pub const VERDICT_TOLERANCE: f64 = 1e-8;

/// Default tolerance for PSD tests.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Relative slack allowed in sampled inequalities.
pub const SAMPLE_TOLERANCE: f64 = 1e-9;

/// Number of random signals drawn by the sampled checks.
pub const SAMPLE_COUNT: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KFrameError {
    #[error("not a K-frame: {0}")]
    NotAKFrame(String),
    #[error("not a frame: lower bound {lower:e} vs upper {upper:e}")]
    NotAFrame { lower: f64, upper: f64 },
    #[error("U does not commute with K and K*: ‖UK−KU‖ = {with_k:e}, ‖UK*−K*U‖ = {with_adjoint:e}")]
    NonCommuting { with_k: f64, with_adjoint: f64 },
    #[error("U is not invertible: σ_min = {sigma_min:e}, σ_max = {sigma_max:e}")]
    NotInvertible { sigma_min: f64, sigma_max: f64 },
    #[error(
        "range inclusion tests disagree: range {range}, majorization {majorization}, factor {factor} \
         (residuals {range_residual:e}, {factor_residual:e}, margin {majorization_margin:e})"
    )]
    InconsistentVerdicts {
        range: bool,
        majorization: bool,
        factor: bool,
        range_residual: f64,
        factor_residual: f64,
        majorization_margin: f64,
    },
    #[error("shift list is empty")]
    EmptyShifts,
    #[error("block length {block} does not divide grid size {size}")]
    NonDividing { size: usize, block: usize },
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
    #[error("atom family carries no generating window and shifts")]
    MissingSystem,
    #[error("output dimensions differ: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },
    #[error(transparent)]
    Gabor(#[from] GaborError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, KFrameError>;

/// Optimal lower constant against `‖K*f‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerConstant {
    Finite(f64),
    /// `K = 0`: the lower inequality holds for every `A`.
    Vacuous,
}

impl LowerConstant {
    pub fn value(self) -> Option<f64> {
        match self {
            LowerConstant::Finite(a) => Some(a),
            LowerConstant::Vacuous => None,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, LowerConstant::Finite(a) if a > 0.0)
    }
}

/// Optimal upper constant against `‖Kf‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperConstant {
    Finite(f64),
    /// Some `f` has `Kf = 0` but `⟨Sf, f⟩ > 0`.
    Infeasible,
}

impl UpperConstant {
    pub fn value(self) -> Option<f64> {
        match self {
            UpperConstant::Finite(b) => Some(b),
            UpperConstant::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KFrameStatus {
    KFrame,
    /// Only the upper bound against `‖f‖²` is available.
    BesselOnlyStd,
    Degenerate(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KFrameReport {
    pub a_opt: LowerConstant,
    pub b_std: f64,
    pub b_k: UpperConstant,
    pub status: KFrameStatus,
    pub k_rank: usize,
    pub s_min: f64,
    pub s_max: f64,
    /// `‖(I − P_S) K‖ / ‖K‖`, zero iff `range(K) ⊆ range(S)`.
    pub range_residual: f64,
    /// `‖S Z‖ / ‖S‖` for an orthonormal basis `Z` of `ker K`.
    pub kernel_residual: f64,
}

impl KFrameReport {
    pub fn is_kframe(&self) -> bool {
        self.status == KFrameStatus::KFrame
    }

    /// `A_opt` as a number; `Vacuous` maps to `+∞`.
    pub fn a_opt_value(&self) -> f64 {
        self.a_opt.value().unwrap_or(f64::INFINITY)
    }
}

fn spectral_norm_or_zero(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.spectral_norm()
    }
}

/// Optimal K-frame constants of the system with frame operator `s`.
///
/// `A_opt` is `0` unless `range(K) ⊆ range(S)`; when the inclusion holds it is
/// `1 / λ_max` of the pencil `(KK*, S)` on `range(S)`, which accounts for the
/// components of `f` in `ker K*`. `B_K` is the largest value of
/// `⟨Sf,f⟩ / ‖Kf‖²` on `range(K*)`, finite iff `ker K ⊆ ker S`.
pub fn kframe_bounds(
    s: &FrameOperatorMatrix,
    k: &BoundedOperator,
    rank_threshold: f64,
) -> Result<KFrameReport> {
    s.grid().check_same(k.grid())?;
    let n = s.grid().total();
    let s_eig = hermitian_eig(s.matrix())?;
    let (s_min, s_max) = (s_eig.min(), s_eig.max());
    let k_svd = svd(k.matrix(), rank_threshold)?;
    let k_rank = k_svd.rank;

    // ker K from the right singular vectors below the cutoff.
    let kernel: Vec<usize> = (k_rank..n).collect();
    let z = k_svd.right.select_columns(&kernel);
    let kernel_residual = if kernel.is_empty() || s_max <= 0.0 {
        0.0
    } else {
        spectral_norm_or_zero(&(s.matrix() * &z)) / s_max
    };
    let b_k_feasible = kernel_residual <= VERDICT_TOLERANCE;

    if k_rank == 0 {
        let b_k = if s_max <= 0.0 {
            UpperConstant::Finite(0.0)
        } else {
            UpperConstant::Infeasible
        };
        return Ok(KFrameReport {
            a_opt: LowerConstant::Vacuous,
            b_std: s_max,
            b_k,
            status: KFrameStatus::Degenerate("K=0: lower inequality vacuous".into()),
            k_rank,
            s_min,
            s_max,
            range_residual: 0.0,
            kernel_residual,
        });
    }

    let s_range: Vec<usize> = (0..n)
        .filter(|&i| s_max > 0.0 && s_eig.eigenvalues[i] > rank_threshold * s_max)
        .collect();
    let q = s_eig.eigenvectors.select_columns(&s_range);
    let k_norm = k_svd.max();
    let projected = &q * &(&q.adjoint() * k.matrix());
    let range_residual = spectral_norm_or_zero(&(k.matrix() - &projected)) / k_norm;
    let included = !s_range.is_empty() && range_residual <= VERDICT_TOLERANCE;

    let kk = k.gram_outer();
    let a_opt = if included {
        let (_, worst) = subspace_rayleigh_extremes(&kk, s.matrix(), rank_threshold)?;
        LowerConstant::Finite(1.0 / worst)
    } else {
        LowerConstant::Finite(0.0)
    };

    let b_k = if b_k_feasible {
        let (_, top) = subspace_rayleigh_extremes(s.matrix(), &k.gram_inner(), rank_threshold)?;
        UpperConstant::Finite(top.max(0.0))
    } else {
        UpperConstant::Infeasible
    };

    let status = if s_max <= 0.0 {
        KFrameStatus::Degenerate("S=0: the system has no nonzero atoms".into())
    } else if a_opt.is_positive() && b_k.value().is_some() {
        KFrameStatus::KFrame
    } else {
        KFrameStatus::BesselOnlyStd
    };

    Ok(KFrameReport {
        a_opt,
        b_std: s_max,
        b_k,
        status,
        k_rank,
        s_min,
        s_max,
        range_residual,
        kernel_residual,
    })
}

/// PSD tests of `S − A·KK*` and `B·K*K − S`.
pub fn psd_bound_check(
    a: f64,
    b: f64,
    s: &FrameOperatorMatrix,
    k: &BoundedOperator,
    tol: f64,
) -> Result<(PsdVerdict, PsdVerdict)> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(KFrameError::InvalidConstants(format!("A = {a}, B = {b} must be positive")));
    }
    s.grid().check_same(k.grid())?;
    let lower = s.matrix() - &k.gram_outer().scale(a);
    let upper = &k.gram_inner().scale(b) - s.matrix();
    Ok((psd_test(&lower, tol)?, psd_test(&upper, tol)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DouglasReport {
    pub range_included: bool,
    pub majorized: bool,
    pub factor_exists: bool,
    /// `T₂† T₁` when it reproduces `T₁`.
    pub factor: Option<ComplexMatrix>,
    /// Least `λ ≥ 0` with `T₁T₁* ⪯ λ² T₂T₂*`, when one exists.
    pub lambda_min_majorization: Option<f64>,
    /// `‖(I − T₂T₂†) T₁‖ / ‖T₁‖`.
    pub range_residual: f64,
    /// `‖T₁ − T₂ (T₂† T₁)‖ / ‖T₁‖`.
    pub factor_residual: f64,
    /// PSD margin of `λ² T₂T₂* − T₁T₁*`.
    pub majorization_margin: f64,
}

/// Range inclusion `R(T₁) ⊆ R(T₂)`, majorization `T₁T₁* ⪯ λ²T₂T₂*` and
/// factorization `T₁ = T₂ X`, decided independently and required to agree.
pub fn douglas_check(
    t1: &ComplexMatrix,
    t2: &ComplexMatrix,
    tol: f64,
    rank_threshold: f64,
) -> Result<DouglasReport> {
    if t1.rows() != t2.rows() {
        return Err(KFrameError::ShapeMismatch {
            left: t1.rows(),
            right: t2.rows(),
        });
    }
    let t1_norm = spectral_norm_or_zero(t1);
    let t2_pinv = pseudo_inverse(t2, rank_threshold)?;
    if t1_norm == 0.0 {
        return Ok(DouglasReport {
            range_included: true,
            majorized: true,
            factor_exists: true,
            factor: Some(ComplexMatrix::zeros(t2.cols(), t1.cols())),
            lambda_min_majorization: Some(0.0),
            range_residual: 0.0,
            factor_residual: 0.0,
            majorization_margin: 0.0,
        });
    }

    let projector = t2 * &t2_pinv;
    let range_residual = spectral_norm_or_zero(&(t1 - &(&projector * t1))) / t1_norm;
    let range = range_residual <= tol;

    let factor = &t2_pinv * t1;
    let factor_residual = spectral_norm_or_zero(&(t1 - &(t2 * &factor))) / t1_norm;
    let factor_ok = factor_residual <= tol;

    let outer1 = (t1 * &t1.adjoint()).hermitian_part();
    let outer2 = (t2 * &t2.adjoint()).hermitian_part();
    let (majorized, lambda_sq, majorization_margin) = match subspace_rayleigh_extremes(&outer1, &outer2, rank_threshold) {
        Ok((_, top)) => {
            let lambda_sq = top.max(0.0);
            let v = psd_test(&(&outer2.scale(lambda_sq) - &outer1), tol)?;
            (v.is_psd, lambda_sq, v.margin)
        }
        // T₂ = 0 while T₁ ≠ 0: no λ works.
        Err(NumericsError::ZeroDenominator) => {
            let v = psd_test(&(-&outer1), tol)?;
            (false, f64::INFINITY, v.margin)
        }
        Err(e) => return Err(e.into()),
    };

    if !(range == majorized && range == factor_ok) {
        return Err(KFrameError::InconsistentVerdicts {
            range,
            majorization: majorized,
            factor: factor_ok,
            range_residual,
            factor_residual,
            majorization_margin,
        });
    }
    Ok(DouglasReport {
        range_included: range,
        majorized,
        factor_exists: factor_ok,
        factor: factor_ok.then_some(factor),
        lambda_min_majorization: majorized.then(|| lambda_sq.sqrt()),
        range_residual,
        factor_residual,
        majorization_margin,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeCharacterization {
    /// `range(K) ⊆ range(L)` with `L e_mn = φ_mn`.
    pub range_included: bool,
    /// `A_opt > 0`.
    pub kframe_lower: bool,
    pub douglas: DouglasReport,
    pub kframe: KFrameReport,
}

impl RangeCharacterization {
    pub fn agree(&self) -> bool {
        self.range_included == self.kframe_lower
    }
}

/// Range inclusion of `K` in the synthesis range versus positivity of `A_opt`.
pub fn range_characterization(
    v: &AtomMatrix,
    k: &BoundedOperator,
    tol: f64,
    rank_threshold: f64,
) -> Result<RangeCharacterization> {
    v.grid().check_same(k.grid())?;
    let douglas = douglas_check(k.matrix(), v.matrix(), tol, rank_threshold)?;
    let kframe = kframe_bounds(&frame_operator(v), k, rank_threshold)?;
    Ok(RangeCharacterization {
        range_included: douglas.range_included,
        kframe_lower: kframe.a_opt.is_positive(),
        douglas,
        kframe,
    })
}

/// All integer frequency vectors `{0..N_1−1} × … × {0..N_d−1}`.
pub fn full_frequency_set(grid: &GridSpec) -> Vec<Vec<f64>> {
    grid.points()
        .map(|p| p.into_iter().map(|x| x as f64).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SufficiencyReport {
    pub p_min: f64,
    pub p_max: f64,
    pub norm_k: f64,
    pub admissible: bool,
    /// `A = p_min ‖K‖⁻²`, `B = p_max ‖K‖²` when admissible.
    pub constants: Option<(f64, f64)>,
    /// Bounds `(A₁, B₁)` of the full exponential system on the window support.
    pub exp_bounds: (f64, f64),
    /// `(A₁·A, B₁·B·‖K‖⁻²)` when admissible.
    pub implied_bounds: Option<(f64, f64)>,
    pub kframe: Option<KFrameReport>,
    /// `A_opt − A₁A` and `B₁B‖K‖⁻² − B_std`, relative to the implied bound.
    pub margins: Option<(f64, f64)>,
    /// Computed bounds respect the implied ones (within `VERDICT_TOLERANCE`).
    pub confirmed: Option<bool>,
}

/// Periodization sufficient condition with the full integer frequency set.
pub fn periodization_sufficiency(
    g: &Signal,
    shifts: &[Vec<i64>],
    k: &BoundedOperator,
    rank_threshold: f64,
) -> Result<SufficiencyReport> {
    if shifts.is_empty() {
        return Err(KFrameError::EmptyShifts);
    }
    g.grid().check_same(k.grid())?;
    let grid = g.grid();
    let p = periodization(g, shifts)?.real_parts();
    let p_min = p.iter().copied().fold(f64::INFINITY, f64::min);
    let p_max = p.iter().copied().fold(0.0, f64::max);
    let norm_k = k.operator_norm();
    let admissible = p_min > 0.0 && norm_k > 0.0;

    let freqs = full_frequency_set(grid);
    let extent = support_extent(g);
    let exp_bounds = if extent.iter().all(|&e| e > 0) {
        exponential_bounds(grid, &freqs, &extent)?
    } else {
        (0.0, 0.0)
    };

    let mut report = SufficiencyReport {
        p_min,
        p_max,
        norm_k,
        admissible,
        constants: None,
        exp_bounds,
        implied_bounds: None,
        kframe: None,
        margins: None,
        confirmed: None,
    };
    if !admissible {
        return Ok(report);
    }
    let a = p_min / (norm_k * norm_k);
    let b = p_max * norm_k * norm_k;
    let (a1, b1) = exp_bounds;
    let lower = a1 * a;
    let upper = b1 * b / (norm_k * norm_k);

    let system = GaborSystem::new(g.clone(), freqs, shifts.to_vec())?;
    let kr = kframe_bounds(&frame_operator(&gabor::atoms(&system)), k, rank_threshold)?;
    let a_opt = kr.a_opt_value();
    let lower_margin = (a_opt - lower) / lower;
    let upper_margin = (upper - kr.b_std) / upper;
    report.constants = Some((a, b));
    report.implied_bounds = Some((lower, upper));
    report.margins = Some((lower_margin, upper_margin));
    report.confirmed = Some(
        kr.a_opt.is_positive() && lower_margin >= -VERDICT_TOLERANCE && upper_margin >= -VERDICT_TOLERANCE,
    );
    report.kframe = Some(kr);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NecessityReport {
    pub b_k: f64,
    pub a0: f64,
    pub norm_k: f64,
    /// `(B / A₀) ‖K‖²`.
    pub bound: f64,
    pub p_max: f64,
    /// `bound − max_t p(t)`.
    pub margin: f64,
    pub holds: bool,
}

/// `max_t p(t) ≤ (B_K / A₀) ‖K‖²` for a K-frame generated by a Gabor system.
pub fn periodization_necessity(
    v: &AtomMatrix,
    k: &BoundedOperator,
    exp_bounds: (f64, f64),
    rank_threshold: f64,
) -> Result<NecessityReport> {
    let kr = kframe_bounds(&frame_operator(v), k, rank_threshold)?;
    if !kr.is_kframe() {
        return Err(KFrameError::NotAKFrame(format!("status {:?}", kr.status)));
    }
    let (a0, _) = exp_bounds;
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(KFrameError::InvalidConstants(format!(
            "exponential lower bound A0 = {a0} must be positive"
        )));
    }
    let system = v.system().ok_or(KFrameError::MissingSystem)?;
    let p = periodization(system.window(), system.shifts())?.real_parts();
    let p_max = p.iter().copied().fold(0.0, f64::max);
    let b_k = kr.b_k.value().expect("K-frame has finite B_K");
    let norm_k = k.operator_norm();
    let bound = b_k / a0 * norm_k * norm_k;
    let margin = bound - p_max;
    Ok(NecessityReport {
        b_k,
        a0,
        norm_k,
        bound,
        p_max,
        margin,
        holds: margin >= -SAMPLE_TOLERANCE * bound.max(1.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageFrameReport {
    /// Atoms `K φ_mn`.
    pub atoms: AtomMatrix,
    pub a: f64,
    pub b: f64,
    pub norm_k: f64,
    /// Smallest `(Σ|⟨f,Kφ⟩|² − A‖K*f‖²) / scale` over the samples.
    pub worst_lower_margin: f64,
    /// Smallest `(B‖K‖²‖f‖² − Σ|⟨f,Kφ⟩|²) / scale` over the samples.
    pub worst_upper_margin: f64,
    /// Optimal lower K-frame constant of the image system.
    pub optimal_lower: LowerConstant,
    pub verified: bool,
}

/// Image `{K φ_mn}` of an ordinary frame, checked against
/// `A‖K*f‖² ≤ Σ|⟨f, Kφ_mn⟩|² ≤ B‖K‖²‖f‖²` on random signals.
pub fn image_frame_check(
    v: &AtomMatrix,
    k: &BoundedOperator,
    seed: u64,
    rank_threshold: f64,
) -> Result<ImageFrameReport> {
    v.grid().check_same(k.grid())?;
    let s = frame_operator(v);
    let (a, b) = gabor::ordinary_frame_bounds(&s)?;
    if !(b > 0.0 && a > rank_threshold * b) {
        return Err(KFrameError::NotAFrame { lower: a, upper: b });
    }
    let image = v.map_atoms(k.matrix())?;
    let norm_k = k.operator_norm();
    let n = v.grid().total();
    let mut rng = stream(seed, 0x37);
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::INFINITY;
    for _ in 0..SAMPLE_COUNT {
        let f = random_vector(&mut rng, n);
        let kf = k.matrix().apply_adjoint(&f);
        let lhs = a * numerics::norm_sqr(&kf);
        let mid = numerics::norm_sqr(&image.matrix().apply_adjoint(&f));
        let rhs = b * norm_k * norm_k * numerics::norm_sqr(&f);
        let scale = if rhs > 0.0 { rhs } else { 1.0 };
        worst_lower = worst_lower.min((mid - lhs) / scale);
        worst_upper = worst_upper.min((rhs - mid) / scale);
    }
    let image_s = frame_operator(&image);
    let optimal_lower = kframe_bounds(&image_s, k, rank_threshold)?.a_opt;
    Ok(ImageFrameReport {
        atoms: image,
        a,
        b,
        norm_k,
        worst_lower_margin: worst_lower,
        worst_upper_margin: worst_upper,
        optimal_lower,
        verified: worst_lower >= -SAMPLE_TOLERANCE && worst_upper >= -SAMPLE_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSandwich {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub norm_u: f64,
    pub norm_u_inv: f64,
    pub u_unitary: bool,
    /// `A₂ ≥ A₁‖U‖⁻²`.
    pub general_lower_a: bool,
    /// `B₂ ≤ B₁‖U‖²`.
    pub general_upper_b: bool,
    /// `A₂ ≤ A₁‖U⁻¹‖²`.
    pub upper_a_inverse_norm: bool,
    /// `B₂ ≥ B₁‖U‖⁻²`.
    pub lower_b_norm: bool,
    /// `A₂ = A₁` and `B₂ = B₁`.
    pub unitary_equality: bool,
    /// `A₂ ≥ A₁‖U⁻¹‖⁻²`, the lower estimate that holds for every invertible `U`
    /// commuting with `K`.
    pub lower_a_inverse_norm: bool,
}

impl BoundSandwich {
    /// `general_lower_a`, `general_upper_b`, and `unitary_equality` when `U` is unitary.
    pub fn required_pass(&self) -> bool {
        self.general_lower_a && self.general_upper_b && (!self.u_unitary || self.unitary_equality)
    }
}

fn at_least(x: f64, bound: f64) -> bool {
    x >= bound - VERDICT_TOLERANCE * bound.abs().max(x.abs())
}

fn at_most(x: f64, bound: f64) -> bool {
    x <= bound + VERDICT_TOLERANCE * bound.abs().max(x.abs())
}

/// Best bounds of `{U φ_mn}` against those of `{φ_mn}`, with `A` taken against
/// `‖K*f‖²` and `B` against `‖f‖²`.
pub fn transformed_bounds(
    v: &AtomMatrix,
    k: &BoundedOperator,
    u: &BoundedOperator,
    tol: f64,
    rank_threshold: f64,
) -> Result<BoundSandwich> {
    v.grid().check_same(k.grid())?;
    v.grid().check_same(u.grid())?;
    let norm_u = u.operator_norm();
    let sigma_min = u.smallest_singular_value();
    if !(norm_u > 0.0 && sigma_min > rank_threshold * norm_u) {
        return Err(KFrameError::NotInvertible {
            sigma_min,
            sigma_max: norm_u,
        });
    }
    let scale = (norm_u * k.operator_norm()).max(f64::MIN_POSITIVE);
    let with_k = commutator_norm(u, k);
    let with_adjoint = commutator_norm(u, &k.adjoint());
    if with_k > tol * scale || with_adjoint > tol * scale {
        return Err(KFrameError::NonCommuting { with_k, with_adjoint });
    }

    let original = kframe_bounds(&frame_operator(v), k, rank_threshold)?;
    let a1 = match original.a_opt {
        LowerConstant::Finite(a) if a > 0.0 => a,
        _ => return Err(KFrameError::NotAKFrame(format!("A_opt = {:?}", original.a_opt))),
    };
    let b1 = original.b_std;
    let transformed = kframe_bounds(&frame_operator(&v.map_atoms(u.matrix())?), k, rank_threshold)?;
    let a2 = transformed.a_opt_value();
    let b2 = transformed.b_std;
    let norm_u_inv = 1.0 / sigma_min;
    let u2 = norm_u * norm_u;
    let ui2 = norm_u_inv * norm_u_inv;
    let same = |x: f64, y: f64| (x - y).abs() <= VERDICT_TOLERANCE * x.abs().max(y.abs());
    Ok(BoundSandwich {
        a1,
        b1,
        a2,
        b2,
        norm_u,
        norm_u_inv,
        u_unitary: u.is_unitary(),
        general_lower_a: at_least(a2, a1 / u2),
        general_upper_b: at_most(b2, b1 * u2),
        upper_a_inverse_norm: at_most(a2, a1 * ui2),
        lower_b_norm: at_least(b2, b1 / u2),
        unitary_equality: same(a1, a2) && same(b1, b2),
        lower_a_inverse_norm: at_least(a2, a1 / ui2),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedReport {
    pub a: f64,
    pub b: f64,
    /// `‖K†‖`.
    pub pinv_norm: f64,
    /// Smallest relative margin of `B⁻¹‖f‖ ≤ ‖S⁻¹f‖` over samples.
    pub inverse_lower_margin: f64,
    /// Smallest relative margin of `‖S⁻¹f‖ ≤ A⁻¹‖K†‖²‖f‖`.
    pub inverse_upper_margin: f64,
    /// Smallest relative margin of `A‖K†‖⁻²‖f‖² ≤ ⟨Sf,f⟩`.
    pub form_lower_margin: f64,
    /// Smallest relative margin of `⟨Sf,f⟩ ≤ B‖f‖²`.
    pub form_upper_margin: f64,
    pub verified: bool,
}

/// Bounds of `S` restricted to `range(K)` and of its inverse on `S(range(K))`.
pub fn restricted_homeomorphism_check(
    s: &FrameOperatorMatrix,
    k: &BoundedOperator,
    a: f64,
    b: f64,
    seed: u64,
    rank_threshold: f64,
) -> Result<RestrictedReport> {
    let kr = kframe_bounds(s, k, rank_threshold)?;
    if !kr.is_kframe() {
        return Err(KFrameError::NotAKFrame(format!("status {:?}", kr.status)));
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(KFrameError::InvalidConstants(format!("A = {a}, B = {b}")));
    }
    let k_svd = svd(k.matrix(), rank_threshold)?;
    let pinv_norm = 1.0 / k_svd.min_nonzero().expect("K-frame has K ≠ 0");
    let n = s.grid().total();
    let mut rng = stream(seed, 0x52);
    let mut margins = [f64::INFINITY; 4];
    for _ in 0..SAMPLE_COUNT {
        let h = k.matrix().apply(&random_vector(&mut rng, n));
        let f = s.matrix().apply(&h);
        let (hn, fnorm) = (numerics::norm(&h), numerics::norm(&f));
        let lo = fnorm / b;
        let hi = pinv_norm * pinv_norm * fnorm / a;
        margins[0] = margins[0].min((hn - lo) / hn);
        margins[1] = margins[1].min((hi - hn) / hn);

        let g = k.matrix().apply(&random_vector(&mut rng, n));
        let gn2 = numerics::norm_sqr(&g);
        let q = s.quadratic_form(&g);
        margins[2] = margins[2].min((q - a * gn2 / (pinv_norm * pinv_norm)) / (b * gn2));
        margins[3] = margins[3].min((b * gn2 - q) / (b * gn2));
    }
    Ok(RestrictedReport {
        a,
        b,
        pinv_norm,
        inverse_lower_margin: margins[0],
        inverse_upper_margin: margins[1],
        form_lower_margin: margins[2],
        form_upper_margin: margins[3],
        verified: margins.iter().all(|&m| m >= -SAMPLE_TOLERANCE),
    })
}

/// The discrete block-indicator Gabor basis with a translation as `K`.
#[derive(Debug, Clone)]
pub struct BlockBasisExample {
    pub system: GaborSystem,
    pub atoms: AtomMatrix,
    pub frame_operator: FrameOperatorMatrix,
    pub k: BoundedOperator,
    pub report: KFrameReport,
}

/// Window `L^{-1/2}·1_{[0,L)}` on `Z_N`, shifts `{0, L, …, N−L}`, frequencies
/// `{0, N/L, …, (L−1)N/L}` (the `L` characters of a length-`L` block), and
/// `K = T_ξ`. The atoms are an orthonormal basis, so `A_opt = B_K = 1`.
pub fn block_basis_example(n: usize, l: usize, xi: i64) -> Result<BlockBasisExample> {
    if l == 0 || n % l != 0 {
        return Err(KFrameError::NonDividing { size: n, block: l });
    }
    let grid = GridSpec::line(n)?;
    let window = Signal::indicator_block(&grid, &[l], 1.0 / (l as f64).sqrt())?;
    let shifts = gabor::lattice_shifts(&[vec![l as i64]], &grid)?;
    let step = (n / l) as f64;
    let frequencies = (0..l).map(|k| vec![k as f64 * step]).collect();
    let system = GaborSystem::new(window, frequencies, shifts)?;
    let atoms = gabor::atoms(&system);
    let frame_operator = frame_operator(&atoms);
    let k = translation_op(&grid, &[xi])?;
    let report = kframe_bounds(&frame_operator, &k, numerics::DEFAULT_RANK_THRESHOLD)?;
    Ok(BlockBasisExample {
        system,
        atoms,
        frame_operator,
        k,
        report,
    })
}

/// `|⟨u, v⟩|²` summed over the columns of `m`, i.e. `‖m* f‖²`.
pub fn coefficient_energy(m: &ComplexMatrix, f: &[Complex64]) -> f64 {
    numerics::norm_sqr(&m.apply_adjoint(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DEFAULT_RANK_THRESHOLD as RT;
    use crate::operators::modulation_op;
    use crate::random::{random_matrix, random_rank_matrix};

    fn line(n: usize) -> GridSpec {
        GridSpec::line(n).unwrap()
    }

    fn frame_op(grid: &GridSpec, m: ComplexMatrix) -> FrameOperatorMatrix {
        FrameOperatorMatrix::from_matrix(grid, m).unwrap()
    }

    fn random_frame(n: usize, atoms: usize, seed: u64) -> AtomMatrix {
        AtomMatrix::from_matrix(&line(n), random_matrix(&mut stream(seed, 1), n, atoms)).unwrap()
    }

    #[test]
    fn identity_k_reduces_to_ordinary_bounds() {
        let v = random_frame(6, 12, 1);
        let s = frame_operator(&v);
        let r = kframe_bounds(&s, &BoundedOperator::identity(&line(6)), RT).unwrap();
        let (a, b) = gabor::ordinary_frame_bounds(&s).unwrap();
        assert!((r.a_opt_value() - a).abs() <= 1e-10 * b);
        assert!((r.b_k.value().unwrap() - b).abs() <= 1e-10 * b);
        assert!((r.b_std - b).abs() <= 1e-12 * b);
        assert!(r.is_kframe());
    }

    #[test]
    fn lower_constant_accounts_for_cross_terms() {
        // range(K) = span(e₀) is not inside range(S) = span(e₀ + e₁).
        let g = line(2);
        let one = Complex64::new(1.0, 0.0);
        let s = frame_op(&g, ComplexMatrix::from_row_major(2, 2, vec![one; 4]).unwrap());
        let k = BoundedOperator::from_matrix(&g, ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let r = kframe_bounds(&s, &k, RT).unwrap();
        assert_eq!(r.a_opt, LowerConstant::Finite(0.0));
        assert!(!r.is_kframe());
        // Restricting the quotient to range(KK*) alone would report 1.
        let (lo, _) = subspace_rayleigh_extremes(s.matrix(), &k.gram_outer(), RT).unwrap();
        assert!((lo - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lower_constant_uses_schur_complement() {
        // S = [[2,1],[1,1]], K = diag(1,0): A_opt = 2 − 1·1/1 = 1, not S₀₀ = 2.
        let g = line(2);
        let c = |x: f64| Complex64::new(x, 0.0);
        let s = frame_op(&g, ComplexMatrix::from_row_major(2, 2, vec![c(2.0), c(1.0), c(1.0), c(1.0)]).unwrap());
        let k = BoundedOperator::from_matrix(&g, ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let r = kframe_bounds(&s, &k, RT).unwrap();
        assert!((r.a_opt_value() - 1.0).abs() < 1e-12);
        assert_eq!(r.b_k, UpperConstant::Infeasible);
        assert_eq!(r.status, KFrameStatus::BesselOnlyStd);
    }

    #[test]
    fn zero_k_is_degenerate() {
        let v = random_frame(4, 8, 2);
        let r = kframe_bounds(&frame_operator(&v), &BoundedOperator::zero(&line(4)), RT).unwrap();
        assert_eq!(r.a_opt, LowerConstant::Vacuous);
        assert!(matches!(r.status, KFrameStatus::Degenerate(_)));
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let v = random_frame(4, 8, 2);
        let err = kframe_bounds(&frame_operator(&v), &BoundedOperator::identity(&line(5)), RT).unwrap_err();
        assert!(matches!(err, KFrameError::Operator(OperatorError::GridMismatch { .. })));
    }

    #[test]
    fn psd_bounds_at_and_beyond_optimum() {
        let g = line(6);
        let v = random_frame(6, 14, 3);
        let s = frame_operator(&v);
        let k = BoundedOperator::from_matrix(&g, random_matrix(&mut stream(3, 2), 6, 6)).unwrap();
        let r = kframe_bounds(&s, &k, RT).unwrap();
        assert!(r.is_kframe());
        let (a, b) = (r.a_opt_value(), r.b_k.value().unwrap());
        let (lo, hi) = psd_bound_check(a, b, &s, &k, 1e-8).unwrap();
        assert!(lo.is_psd && hi.is_psd);
        let (lo, _) = psd_bound_check(a * (1.0 + 1e-3), b, &s, &k, 1e-8).unwrap();
        assert!(!lo.is_psd);
        assert!(lo.witness.is_some());
        let (_, hi) = psd_bound_check(a, b * (1.0 - 1e-3), &s, &k, 1e-8).unwrap();
        assert!(!hi.is_psd);

        let id = BoundedOperator::identity(&g);
        let s_id = frame_op(&g, ComplexMatrix::identity(6));
        let (lo, hi) = psd_bound_check(1.0, 1.0, &s_id, &id, 1e-8).unwrap();
        assert!(lo.is_psd && hi.is_psd);
        assert!(psd_bound_check(0.0, 1.0, &s_id, &id, 1e-8).is_err());
    }

    #[test]
    fn douglas_examples() {
        let id = ComplexMatrix::identity(3);
        let r = douglas_check(&id, &id, 1e-8, RT).unwrap();
        assert!(r.range_included);
        assert!((&r.factor.unwrap() - &id).max_abs() < 1e-14);
        assert!((r.lambda_min_majorization.unwrap() - 1.0).abs() < 1e-12);

        let a = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let b = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        let r = douglas_check(&a, &b, 1e-8, RT).unwrap();
        assert!(!r.range_included && r.factor.is_none() && r.lambda_min_majorization.is_none());

        let mut rng = stream(4, 0);
        let t2 = random_matrix(&mut rng, 6, 4);
        let gm = random_matrix(&mut rng, 4, 4);
        let t1 = &t2 * &gm;
        let r = douglas_check(&t1, &t2, 1e-8, RT).unwrap();
        assert!(r.range_included);
        let f = r.factor.unwrap();
        assert!((&t1 - &(&t2 * &f)).max_abs() <= 1e-10 * t1.spectral_norm());

        assert!(matches!(
            douglas_check(&ComplexMatrix::zeros(3, 2), &ComplexMatrix::zeros(4, 2), 1e-8, RT),
            Err(KFrameError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn douglas_with_zero_operands() {
        let z = ComplexMatrix::zeros(3, 3);
        let r = douglas_check(&z, &ComplexMatrix::identity(3), 1e-8, RT).unwrap();
        assert!(r.range_included);
        let r = douglas_check(&ComplexMatrix::identity(3), &z, 1e-8, RT).unwrap();
        assert!(!r.range_included && !r.majorized);
    }

    #[test]
    fn range_characterization_trivial_cases() {
        let g = line(4);
        let v = random_frame(4, 8, 5);
        let k = BoundedOperator::from_matrix(&g, random_matrix(&mut stream(5, 3), 4, 4)).unwrap();
        let r = range_characterization(&v, &k, 1e-8, RT).unwrap();
        assert!(r.range_included && r.kframe_lower && r.agree());

        let e0 = Signal::delta(&g, &[0]).unwrap();
        let v = AtomMatrix::from_matrix(&g, ComplexMatrix::from_columns(4, &[e0.values().to_vec()]).unwrap()).unwrap();
        let mut proj = vec![0.0; 4];
        proj[1] = 1.0;
        let k = BoundedOperator::from_matrix(&g, ComplexMatrix::from_real_diagonal(&proj)).unwrap();
        let r = range_characterization(&v, &k, 1e-8, RT).unwrap();
        assert!(!r.range_included && !r.kframe_lower && r.agree());
    }

    #[test]
    fn range_characterization_constructed_inclusion() {
        let g = line(6);
        let mut rng = stream(6, 0);
        let v = AtomMatrix::from_matrix(&g, random_rank_matrix(&mut rng, 6, 5, 3)).unwrap();
        let k = BoundedOperator::from_matrix(&g, v.matrix() * &random_matrix(&mut rng, 5, 6)).unwrap();
        let r = range_characterization(&v, &k, 1e-8, RT).unwrap();
        assert!(r.range_included && r.kframe_lower);
        let k = BoundedOperator::from_matrix(&g, random_matrix(&mut rng, 6, 6)).unwrap();
        let r = range_characterization(&v, &k, 1e-8, RT).unwrap();
        assert!(!r.range_included && !r.kframe_lower);
    }

    fn block_shifts(n: usize, step: usize) -> Vec<Vec<i64>> {
        (0..n).step_by(step).map(|x| vec![x as i64]).collect()
    }

    #[test]
    fn sufficient_condition_disjoint_cover() {
        let g = line(64);
        let w = Signal::indicator_block(&g, &[8], 1.0).unwrap();
        let k = translation_op(&g, &[5]).unwrap();
        let r = periodization_sufficiency(&w, &block_shifts(64, 8), &k, RT).unwrap();
        assert_eq!((r.p_min, r.p_max), (1.0, 1.0));
        assert!(r.admissible);
        assert!(r.kframe.as_ref().unwrap().is_kframe());
        assert_eq!(r.confirmed, Some(true));
        let (a1, b1) = r.exp_bounds;
        assert!((a1 - 64.0).abs() < 1e-9 && (b1 - 64.0).abs() < 1e-9);
    }

    #[test]
    fn sufficient_condition_rejections() {
        let g = line(64);
        let k = BoundedOperator::identity(&g);
        let r = periodization_sufficiency(&Signal::zeros(&g), &block_shifts(64, 8), &k, RT).unwrap();
        assert!(!r.admissible && r.p_max == 0.0);
        let gap = Signal::indicator_block(&g, &[4], 1.0).unwrap();
        let r = periodization_sufficiency(&gap, &block_shifts(64, 8), &k, RT).unwrap();
        assert!(!r.admissible && r.p_min == 0.0);
        assert_eq!(
            periodization_sufficiency(&gap, &[], &k, RT).unwrap_err(),
            KFrameError::EmptyShifts
        );
    }

    #[test]
    fn necessary_condition_on_example() {
        let ex = block_basis_example(64, 8, 3).unwrap();
        let a0 = exponential_bounds(ex.system.grid(), ex.system.frequencies(), &[8]).unwrap();
        let r = periodization_necessity(&ex.atoms, &ex.k, a0, RT).unwrap();
        assert!((r.a0 - 8.0).abs() < 1e-10);
        assert!((r.p_max - 1.0 / 8.0).abs() < 1e-15);
        assert!(r.holds);
        let zero = GaborSystem::new(Signal::zeros(&line(4)), vec![vec![0.0]], vec![vec![0]]).unwrap();
        assert!(matches!(
            periodization_necessity(&gabor::atoms(&zero), &BoundedOperator::identity(&line(4)), (1.0, 1.0), RT),
            Err(KFrameError::NotAKFrame(_))
        ));
        let r = kframe_bounds(&frame_operator(&gabor::atoms(&zero)), &BoundedOperator::identity(&line(4)), RT).unwrap();
        assert!(matches!(r.status, KFrameStatus::Degenerate(_)));
    }

    #[test]
    fn image_frame_examples() {
        let g = line(5);
        let v = random_frame(5, 10, 7);
        let r = image_frame_check(&v, &BoundedOperator::identity(&g), 1, RT).unwrap();
        assert_eq!(r.atoms.matrix(), v.matrix());
        assert!(r.verified);
        assert!((r.optimal_lower.value().unwrap() - r.a).abs() <= 1e-10 * r.b);

        let r = image_frame_check(&v, &BoundedOperator::zero(&g), 1, RT).unwrap();
        assert!(r.verified);
        assert_eq!(r.optimal_lower, LowerConstant::Vacuous);

        let q = crate::random::random_unitary(&mut stream(7, 9), 5);
        let r = image_frame_check(&v, &BoundedOperator::from_matrix(&g, q).unwrap(), 2, RT).unwrap();
        assert!(r.verified);
        assert!((r.optimal_lower.value().unwrap() - r.a).abs() <= 1e-8 * r.a);

        let thin = random_frame(5, 3, 8);
        assert!(matches!(
            image_frame_check(&thin, &BoundedOperator::identity(&g), 1, RT),
            Err(KFrameError::NotAFrame { .. })
        ));
    }

    #[test]
    fn sandwich_identity_and_scaling() {
        let g = line(6);
        let v = random_frame(6, 12, 9);
        let k = BoundedOperator::identity(&g);
        let r = transformed_bounds(&v, &k, &BoundedOperator::identity(&g), 1e-8, RT).unwrap();
        assert!(r.general_lower_a && r.general_upper_b && r.upper_a_inverse_norm && r.lower_b_norm);
        assert!(r.unitary_equality && r.required_pass());

        let two = BoundedOperator::identity(&g).scaled(Complex64::new(2.0, 0.0));
        let r = transformed_bounds(&v, &k, &two, 1e-8, RT).unwrap();
        assert!((r.a2 - 4.0 * r.a1).abs() <= 1e-10 * r.a2);
        assert!((r.b2 - 4.0 * r.b1).abs() <= 1e-10 * r.b2);
        assert!(r.general_lower_a && r.general_upper_b);
        assert!(!r.upper_a_inverse_norm);
        assert!(r.lower_b_norm);
        assert!(r.required_pass());
    }

    #[test]
    fn sandwich_contraction_breaks_general_lower_estimate() {
        // U = I/2: A₂ = A₁/4 while A₁‖U‖⁻² = 4A₁.
        let g = line(6);
        let v = random_frame(6, 12, 9);
        let k = BoundedOperator::identity(&g);
        let half = BoundedOperator::identity(&g).scaled(Complex64::new(0.5, 0.0));
        let r = transformed_bounds(&v, &k, &half, 1e-8, RT).unwrap();
        assert!((r.a2 - r.a1 / 4.0).abs() <= 1e-10 * r.a1);
        assert!(!r.general_lower_a);
        assert!(r.lower_a_inverse_norm);
        assert!(!r.required_pass());
    }

    #[test]
    fn sandwich_errors() {
        let g = line(4);
        let v = random_frame(4, 8, 10);
        let k = modulation_op(&g, &[1.0]).unwrap();
        let t = translation_op(&g, &[1]).unwrap();
        assert!(matches!(
            transformed_bounds(&v, &k, &t, 1e-8, RT),
            Err(KFrameError::NonCommuting { .. })
        ));
        let singular = BoundedOperator::from_matrix(&g, ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 0.0, 1.0])).unwrap();
        assert!(matches!(
            transformed_bounds(&v, &BoundedOperator::identity(&g), &singular, 1e-8, RT),
            Err(KFrameError::NotInvertible { .. })
        ));
    }

    #[test]
    fn sandwich_unitary_fourier_pair() {
        let g = line(8);
        let v = random_frame(8, 16, 11);
        let (k, u) = crate::operators::fourier_diagonal_pair(&g, 4, true);
        let r = transformed_bounds(&v, &k, &u, 1e-8, RT).unwrap();
        assert!(r.u_unitary && r.unitary_equality && r.required_pass());
    }

    #[test]
    fn restricted_homeomorphism_identity() {
        let g = line(4);
        let s = frame_op(&g, ComplexMatrix::identity(4));
        let r = restricted_homeomorphism_check(&s, &BoundedOperator::identity(&g), 1.0, 1.0, 0, RT).unwrap();
        assert!(r.verified);
        for m in [r.inverse_lower_margin, r.inverse_upper_margin, r.form_lower_margin, r.form_upper_margin] {
            assert!(m.abs() < 1e-12);
        }
        assert!(matches!(
            restricted_homeomorphism_check(&s, &BoundedOperator::zero(&g), 1.0, 1.0, 0, RT),
            Err(KFrameError::NotAKFrame(_))
        ));
    }

    #[test]
    fn block_basis_example_values() {
        for xi in [0, 3, 17] {
            let ex = block_basis_example(64, 8, xi).unwrap();
            assert!((ex.report.a_opt_value() - 1.0).abs() <= 1e-9);
            assert!((ex.report.b_k.value().unwrap() - 1.0).abs() <= 1e-9);
        }
        let small = block_basis_example(4, 1, 0).unwrap();
        assert!((small.report.a_opt_value() - 1.0).abs() <= 1e-9);
        let wrap = block_basis_example(64, 8, 64).unwrap();
        assert_eq!(wrap.k, block_basis_example(64, 8, 0).unwrap().k);
        assert_eq!(
            block_basis_example(64, 7, 0).unwrap_err(),
            KFrameError::NonDividing { size: 64, block: 7 }
        );
    }
}
