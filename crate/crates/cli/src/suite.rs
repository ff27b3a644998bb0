//! Seeded property suite over every module.
//!
//! Each property draws its trials from independent streams
//! `stream(seed, trial_stream_id(family, index))` and reports the number of
//! trials, the number of failures and the worst normalized margin (negative
//! means a violation).

use std::time::Instant;

use kwh_core::gabor::{self, bessel_check, frame_operator, periodization, uniform_density_check, GaborSystem};
use kwh_core::kframe::{
    block_basis_example, douglas_check, image_frame_check, kframe_bounds, periodization_necessity,
    periodization_sufficiency, psd_bound_check, range_characterization, restricted_homeomorphism_check,
    transformed_bounds, KFrameError, PSD_TOLERANCE, VERDICT_TOLERANCE,
};
use kwh_core::numerics::{
    self, hermitian_eig, psd_test, pseudo_inverse, subspace_rayleigh_extremes, svd, ComplexMatrix,
    DEFAULT_RANK_THRESHOLD as RT,
};
use kwh_core::operators::{
    character, commutator_norm, fourier_diagonal_pair, modulation_op, translation_op, BoundedOperator, GridSpec,
    Signal,
};
use kwh_core::random::{random_matrix, random_rank_matrix, random_vector, stream, trial_stream_id, SeededRng};
use kwh_core::testbeds::{
    compact_support_kframe, douglas_pair, random_frame, random_grid, random_operator, random_rank_operator,
    random_scalar, random_sparse_system, random_unitary_operator, DouglasFamily, SampledSystem,
};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::checks::OPTIMALITY_STEP;
use crate::config::Tolerances;
use crate::report::{Environment, Record, VerificationReport};

pub const DEFAULT_SIZE_CAP: usize = 64;

/// Pass/fail tally of one property.
#[derive(Debug, Clone)]
pub struct Tally {
    pub trials: usize,
    pub failures: usize,
    pub worst_margin: f64,
    pub first_failure: Option<String>,
}

impl Default for Tally {
    fn default() -> Self {
        Self {
            trials: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
            first_failure: None,
        }
    }
}

impl Tally {
    /// Records one trial; `margin < 0` marks a failure.
    pub fn observe(&mut self, margin: f64, label: impl FnOnce() -> String) {
        self.trials += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if margin.is_nan() || margin < 0.0 {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(label());
            }
        }
    }

    pub fn check(&mut self, ok: bool, label: impl FnOnce() -> String) {
        self.observe(if ok { 0.0 } else { -1.0 }, label);
    }

    pub fn record(self, check: &str, anchor: &str) -> Record {
        let mut r = Record::required(check, anchor, self.failures == 0)
            .margin(self.worst_margin)
            .detail("trials", self.trials)
            .detail("failures", self.failures);
        if let Some(f) = self.first_failure {
            r = r.detail("first_failure", f);
        }
        r
    }
}

fn rng(seed: u64, family: u32, index: usize) -> SeededRng {
    stream(seed, trial_stream_id(family, index as u32))
}

/// `(bound − err) / bound`.
fn rel(err: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        (bound - err) / bound
    } else if err == 0.0 {
        0.0
    } else {
        -1.0
    }
}

fn diff_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a - b;
    if d.is_empty() {
        0.0
    } else {
        d.spectral_norm()
    }
}

fn norm_or_zero(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.spectral_norm()
    }
}

pub fn eig_trace(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..50 {
        let mut r = rng(seed, 1, i);
        let n = r.random_range(1..=cap.clamp(1, 32));
        let m = random_matrix(&mut r, n, n).hermitian_part();
        let eig = hermitian_eig(&m).expect("hermitian");
        let err = (eig.eigenvalues.iter().sum::<f64>() - m.trace().re).abs();
        t.observe(rel(err, 1e-10 * m.spectral_norm() * n as f64), || format!("trial {i}, n = {n}"));
    }
    t.record("eig_trace", "hermitian-eigendecomposition")
}

pub fn svd_matches_eig(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..50 {
        let mut r = rng(seed, 2, i);
        let rows = r.random_range(1..=cap.clamp(1, 16));
        let cols = r.random_range(1..=cap.clamp(1, 16));
        let m = random_matrix(&mut r, rows, cols);
        let s = svd(&m, RT).expect("nonempty");
        let gram = if cols <= rows {
            (&m.adjoint() * &m).hermitian_part()
        } else {
            (&m * &m.adjoint()).hermitian_part()
        };
        let mut eig = hermitian_eig(&gram).expect("hermitian").eigenvalues;
        eig.reverse();
        let err = s
            .singular_values
            .iter()
            .zip(&eig)
            .map(|(sv, l)| (sv - l.max(0.0).sqrt()).abs())
            .fold(0.0, f64::max);
        t.observe(rel(err, 1e-9 * s.max().max(1.0)), || format!("trial {i}, {rows}x{cols}"));
    }
    t.record("svd_matches_eig", "singular-value-decomposition")
}

/// Penrose identities and `MM†` acting as the identity on `range(M)`.
pub fn penrose_identities(seed: u64) -> Record {
    let mut t = Tally::default();
    for i in 0..100 {
        let mut r = rng(seed, 3, i);
        let rows = r.random_range(1..=8);
        let cols = r.random_range(1..=8);
        let rank = r.random_range(0..=rows.min(cols));
        let m = random_rank_matrix(&mut r, rows, cols, rank);
        let p = pseudo_inverse(&m, RT).expect("valid threshold");
        let mp = &m * &p;
        let pm = &p * &m;
        let basis = svd(&m, RT).expect("nonempty").range_basis();
        let checks = [
            rel(diff_norm(&(&mp * &m), &m), 1e-10 * norm_or_zero(&m)),
            rel(diff_norm(&(&pm * &p), &p), 1e-10 * norm_or_zero(&p)),
            rel(diff_norm(&mp.adjoint(), &mp), 1e-10),
            rel(diff_norm(&pm.adjoint(), &pm), 1e-10),
            rel(diff_norm(&(&mp * &basis), &basis), 1e-10),
        ];
        let worst = checks.iter().copied().fold(f64::INFINITY, f64::min);
        t.observe(worst, || format!("trial {i}, {rows}x{cols} rank {rank}"));
    }
    t.record("penrose_identities", "moore-penrose-pseudoinverse")
}

pub fn psd_two_sided(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    let mut both = 0usize;
    for i in 0..50 {
        let mut r = rng(seed, 4, i);
        let n = r.random_range(1..=cap.clamp(1, 16));
        let exponent = [0, 4, 8, 9, 10, 12][i % 6];
        let m = random_matrix(&mut r, n, n).hermitian_part().scale(10f64.powi(-exponent));
        let plus = psd_test(&m, PSD_TOLERANCE).expect("hermitian");
        let minus = psd_test(&(-&m), PSD_TOLERANCE).expect("hermitian");
        if plus.is_psd && minus.is_psd {
            both += 1;
            t.observe(rel(m.spectral_norm(), 2.0 * PSD_TOLERANCE * plus.scale), || format!("trial {i}"));
        } else {
            t.observe(0.0, String::new);
        }
    }
    t.record("psd_two_sided", "psd-test").detail("both_psd", both)
}

pub fn rayleigh_identity_denominator(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..50 {
        let mut r = rng(seed, 5, i);
        let n = r.random_range(1..=cap.clamp(1, 16));
        let m = random_matrix(&mut r, n, n).hermitian_part();
        let eig = hermitian_eig(&m).expect("hermitian");
        let (lo, hi) = subspace_rayleigh_extremes(&m, &ComplexMatrix::identity(n), RT).expect("shapes");
        t.check(lo == eig.min() && hi == eig.max(), || format!("trial {i}"));
    }
    t.record("rayleigh_identity_denominator", "generalized-rayleigh-quotient")
}

fn random_int_vector(r: &mut SeededRng, grid: &GridSpec, spread: i64) -> Vec<i64> {
    grid.sizes().iter().map(|_| r.random_range(-spread..=spread)).collect()
}

pub fn commutation_phase(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..50 {
        let mut r = rng(seed, 6, i);
        let g = random_grid(&mut r, cap.min(32));
        let a = random_int_vector(&mut r, &g, 40);
        let b: Vec<f64> = random_int_vector(&mut r, &g, 40).into_iter().map(|x| x as f64).collect();
        let ta = translation_op(&g, &a).expect("dims");
        let eb = modulation_op(&g, &b).expect("dims");
        let phase = character(&g, &b, &g.wrap(&a));
        let lhs = eb.compose(&ta).expect("grid");
        let rhs = ta.compose(&eb).expect("grid").scaled(phase);
        let err = (lhs.matrix() - rhs.matrix()).max_abs();
        t.observe(rel(err, 1e-12).min(rel((phase.norm() - 1.0).abs(), 1e-12)), || {
            format!("trial {i}, a = {a:?}, b = {b:?}")
        });
    }
    t.record("commutation_phase", "translation-modulation-commutation")
}

pub fn unitary_shifts(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..50 {
        let mut r = rng(seed, 7, i);
        let g = random_grid(&mut r, cap.min(32));
        let a = random_int_vector(&mut r, &g, 100);
        let b: Vec<f64> = g.sizes().iter().map(|&n| r.random_range(-(n as f64)..n as f64)).collect();
        let nt = translation_op(&g, &a).expect("dims").operator_norm();
        let nm = modulation_op(&g, &b).expect("dims").operator_norm();
        t.observe(rel((nt - 1.0).abs().max((nm - 1.0).abs()), 1e-12), || format!("trial {i}"));
    }
    t.record("unitary_shifts", "translation-modulation-unitarity")
}

pub fn adjoint_involution(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..30 {
        let mut r = rng(seed, 8, i);
        let g = random_grid(&mut r, cap.min(32));
        let k = random_operator(&mut r, &g);
        let a = random_int_vector(&mut r, &g, 10);
        let ta = translation_op(&g, &a).expect("dims");
        t.check(k.adjoint().adjoint() == k && ta.adjoint().adjoint() == ta, || format!("trial {i}"));
    }
    t.record("adjoint_involution", "operator-adjoint")
}

pub fn fourier_pair_commutes(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..20 {
        let mut r = rng(seed, 9, i);
        let g = random_grid(&mut r, cap.min(32));
        let (k, u) = fourier_diagonal_pair(&g, seed.wrapping_add(i as u64), i % 2 == 0);
        let worst = [
            commutator_norm(&k, &u),
            commutator_norm(&k.adjoint(), &u),
            commutator_norm(&k, &u.adjoint()),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        t.observe(rel(worst, 1e-10), || format!("trial {i}"));
    }
    t.record("fourier_pair_commutes", "commuting-operator-pairs")
}

/// `(N, L)` block-basis sizes available under the cap.
fn block_sizes(cap: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in [4usize, 6, 8, 12, 16, 24, 32, 64] {
        if n <= cap.max(4) {
            for l in (1..=n).filter(|l| n % l == 0) {
                out.push((n, l));
            }
        }
    }
    out
}

pub fn parseval_orthonormal(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    let sizes = block_sizes(cap);
    for i in 0..10 {
        let mut r = rng(seed, 10, i);
        let (n, l) = sizes[r.random_range(0..sizes.len())];
        let xi = r.random_range(0..n as i64);
        let ex = block_basis_example(n, l, xi).expect("L divides N");
        for _ in 0..100 {
            let f = random_vector(&mut r, n);
            let energy = numerics::norm_sqr(&ex.atoms.matrix().apply_adjoint(&f));
            let norm = numerics::norm_sqr(&f);
            t.observe(rel((energy - norm).abs(), 1e-10 * norm), || format!("N = {n}, L = {l}"));
        }
    }
    t.record("parseval_orthonormal", "orthonormal-gabor-basis")
}

fn mixed_system(r: &mut SeededRng, cap: usize, i: usize) -> SampledSystem {
    let g = random_grid(r, cap);
    if i % 2 == 0 {
        random_frame(r, &g)
    } else {
        random_sparse_system(r, &g)
    }
}

pub fn frame_operator_product(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..30 {
        let mut r = rng(seed, 11, i);
        let s = mixed_system(&mut r, cap.min(32), i);
        let n = s.grid().total();
        let mut naive = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..s.atoms.len() {
            let phi = s.atoms.matrix().column(j);
            for a in 0..n {
                for b in 0..n {
                    naive[a * n + b] += phi[a] * phi[b].conj();
                }
            }
        }
        let naive = ComplexMatrix::from_row_major(n, n, naive).expect("finite");
        let err = (s.frame_operator.matrix() - &naive).max_abs();
        t.observe(rel(err, 1e-10 * naive.max_abs().max(1.0)), || format!("trial {i}"));
    }
    t.record("frame_operator_product", "frame-operator")
}

pub fn bessel_bound(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..50 {
        let mut r = rng(seed, 12, i);
        let s = mixed_system(&mut r, cap.min(32), i);
        let b = bessel_check(&s.atoms).expect("nonempty");
        let (_, hi) = gabor::ordinary_frame_bounds(&s.frame_operator).expect("square");
        let err = (b.bound - hi).abs().max(b.discrepancy);
        t.observe(rel(err, 1e-9 * hi.max(1.0)), || format!("trial {i}"));
    }
    t.record("bessel_bound", "optimal-bessel-bound")
}

pub fn relabeling_invariance(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..20 {
        let mut r = rng(seed, 13, i);
        let s = mixed_system(&mut r, cap.min(32), i);
        let mut freqs = s.system.frequencies().to_vec();
        let mut shifts = s.system.shifts().to_vec();
        freqs.shuffle(&mut r);
        shifts.shuffle(&mut r);
        let permuted = GaborSystem::new(s.system.window().clone(), freqs, shifts).expect("same data");
        let sp = frame_operator(&gabor::atoms(&permuted));
        t.check(sp.matrix() == s.frame_operator.matrix(), || format!("trial {i}"));
    }
    t.record("relabeling_invariance", "frame-operator")
}

pub fn periodization_mass(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..30 {
        let mut r = rng(seed, 14, i);
        let s = mixed_system(&mut r, cap.min(64), i);
        let p = periodization(s.system.window(), s.system.shifts()).expect("dims");
        let total: f64 = p.real_parts().iter().sum();
        let expect = s.system.shifts().len() as f64 * s.system.window().norm_sqr();
        t.observe(rel((total - expect).abs(), 1e-10 * expect), || format!("trial {i}"));
    }
    t.record("periodization_mass", "periodization")
}

pub fn psd_optimality(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..50 {
        let mut r = rng(seed, 20, i);
        let g = random_grid(&mut r, cap.min(32));
        let s = random_frame(&mut r, &g);
        let k = random_operator(&mut r, &g);
        let rep = kframe_bounds(&s.frame_operator, &k, RT).expect("grids agree");
        let (Some(a), Some(b)) = (rep.a_opt.value(), rep.b_k.value()) else {
            t.check(false, || format!("trial {i}: status {:?}", rep.status));
            continue;
        };
        if !rep.is_kframe() {
            t.check(false, || format!("trial {i}: status {:?}", rep.status));
            continue;
        }
        let (lo, hi) = psd_bound_check(a, b, &s.frame_operator, &k, PSD_TOLERANCE).expect("positive constants");
        let (pushed, _) =
            psd_bound_check(a * (1.0 + OPTIMALITY_STEP), b, &s.frame_operator, &k, PSD_TOLERANCE).expect("positive");
        let margin = lo.margin.min(hi.margin).min(-pushed.margin) / lo.scale;
        t.observe(
            if lo.is_psd && hi.is_psd && !pushed.is_psd { margin.max(0.0) } else { margin.min(-f64::MIN_POSITIVE) },
            || format!("trial {i}: grid {:?}", g.sizes()),
        );
    }
    t.record("psd_optimality", "operator-inequality-characterization")
}

pub fn douglas_agreement(seed: u64) -> Record {
    let mut t = Tally::default();
    let mut disagreements = 0usize;
    for i in 0..200 {
        let mut r = rng(seed, 21, i);
        let family = if i % 2 == 0 { DouglasFamily::Included } else { DouglasFamily::Obstructed };
        let (t1, t2) = douglas_pair(&mut r, family, 8);
        match douglas_check(&t1, &t2, VERDICT_TOLERANCE, RT) {
            Ok(d) => {
                let expected = family == DouglasFamily::Included;
                let mut margin = if d.range_included == expected { 0.0 } else { -1.0 };
                if let Some(f) = &d.factor {
                    let err = diff_norm(&(&t2 * f), &t1);
                    margin = f64::min(margin, rel(err, 1e-10 * norm_or_zero(&t1)));
                }
                t.observe(margin, || format!("pair {i} ({family:?})"));
            }
            Err(KFrameError::InconsistentVerdicts { .. }) => {
                disagreements += 1;
                t.check(false, || format!("pair {i} ({family:?}): verdicts disagree"));
            }
            Err(e) => t.check(false, || format!("pair {i}: {e}")),
        }
    }
    t.record("douglas_agreement", "range-inclusion-majorization-factorization")
        .detail("disagreements", disagreements)
}

pub fn range_biconditional(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    let mut included = 0usize;
    for i in 0..50 {
        let mut r = rng(seed, 22, i);
        let g = random_grid(&mut r, cap.min(16));
        let s = random_sparse_system(&mut r, &g);
        let n = g.total();
        let k = if i % 2 == 0 {
            let gm = random_matrix(&mut r, s.atoms.len(), n);
            BoundedOperator::from_matrix(&g, s.atoms.matrix() * &gm).expect("square")
        } else {
            random_operator(&mut r, &g)
        };
        match range_characterization(&s.atoms, &k, VERDICT_TOLERANCE, RT) {
            Ok(c) => {
                included += usize::from(c.range_included);
                t.check(c.agree() && (i % 2 == 1 || c.range_included), || format!("pair {i}"));
            }
            Err(e) => t.check(false, || format!("pair {i}: {e}")),
        }
    }
    t.record("range_biconditional", "kframe-iff-range-inclusion").detail("included", included)
}

/// Unitary operators used with the disjoint-cover windows.
fn unitary_family(r: &mut SeededRng, g: &GridSpec, which: usize) -> BoundedOperator {
    let n = g.total() as i64;
    match which % 4 {
        0 => translation_op(g, &[r.random_range(0..n)]).expect("1-d"),
        1 => modulation_op(g, &[r.random_range(0..n) as f64]).expect("1-d"),
        2 => random_unitary_operator(r, g),
        _ => fourier_diagonal_pair(g, r.random(), true).1,
    }
}

pub fn periodization_sufficient(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    let mut rejected = 0usize;
    let sizes = block_sizes(cap);
    for i in 0..20 {
        let mut r = rng(seed, 23, i);
        let (n, l) = sizes[r.random_range(0..sizes.len())];
        let g = GridSpec::line(n).expect("positive");
        let k = unitary_family(&mut r, &g, i);
        let shifts: Vec<Vec<i64>> = (0..n).step_by(l).map(|x| vec![x as i64]).collect();
        let cover = Signal::indicator_block(&g, &[l], 1.0).expect("fits");
        let rep = periodization_sufficiency(&cover, &shifts, &k, RT).expect("valid");
        let classified = rep.kframe.as_ref().is_some_and(|kr| kr.is_kframe());
        let margin = rep.margins.map_or(-1.0, |(lo, hi)| lo.min(hi) + VERDICT_TOLERANCE);
        t.observe(if classified && rep.confirmed == Some(true) { margin } else { margin.min(-1.0) }, || {
            format!("cover N = {n}, L = {l}")
        });
        if l >= 2 {
            let gap = Signal::indicator_block(&g, &[l - 1], 1.0).expect("fits");
            let rep = periodization_sufficiency(&gap, &shifts, &k, RT).expect("valid");
            rejected += usize::from(!rep.admissible);
            t.check(!rep.admissible && rep.confirmed.is_none(), || format!("gap N = {n}, L = {l}"));
        }
    }
    t.record("periodization_sufficient", "periodization-sufficient-condition")
        .detail("gaps_rejected", rejected)
}

pub fn periodization_necessary(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..20 {
        let mut r = rng(seed, 24, i);
        let c = compact_support_kframe(&mut r, cap.min(64));
        let sys = &c.sampled.system;
        let exp = gabor::exponential_bounds(sys.grid(), sys.frequencies(), &[c.support]).expect("dims");
        match periodization_necessity(&c.sampled.atoms, &c.k, exp, RT) {
            Ok(rep) => t.observe(if rep.holds { rep.margin / rep.bound } else { -1.0 }, || {
                format!("trial {i}: N = {}, s = {}, q = {}", sys.grid().total(), c.support, c.shift_step)
            }),
            Err(e) => t.check(false, || format!("trial {i}: {e}")),
        }
    }
    t.record("periodization_necessary", "periodization-necessary-condition")
}

pub fn image_frames(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..100 {
        let mut r = rng(seed, 25, i);
        let g = random_grid(&mut r, cap.min(32));
        let s = random_frame(&mut r, &g);
        let n = g.total();
        let k = match i % 4 {
            0 => random_operator(&mut r, &g),
            1 => {
                let rank = r.random_range(0..n.max(1));
                random_rank_operator(&mut r, &g, rank)
            }
            _ => random_unitary_operator(&mut r, &g),
        };
        match image_frame_check(&s.atoms, &k, r.random(), RT) {
            Ok(rep) => {
                let mut margin = rep.worst_lower_margin.min(rep.worst_upper_margin) + 1e-9;
                if i % 4 >= 2 {
                    let a = rep.optimal_lower.value().unwrap_or(f64::NAN);
                    margin = margin.min(rel((a - rep.a).abs(), 1e-8 * rep.a));
                }
                t.observe(margin, || format!("pair {i}"));
            }
            Err(e) => t.check(false, || format!("pair {i}: {e}")),
        }
    }
    t.record("image_frames", "image-of-frame-under-k")
}

/// Required estimates on random commuting pairs; the remaining estimates are
/// returned as a separate informational record.
pub fn commuting_bounds(seed: u64, cap: usize) -> (Record, Record) {
    let mut t = Tally::default();
    let mut unitary = 0usize;
    let mut counts = [0usize; 3];
    for i in 0..100 {
        let mut r = rng(seed, 26, i);
        let g = random_grid(&mut r, cap.min(32));
        let s = random_frame(&mut r, &g);
        let is_unitary = i % 2 == 0;
        let (k, u) = fourier_diagonal_pair(&g, r.random(), is_unitary);
        match transformed_bounds(&s.atoms, &k, &u, VERDICT_TOLERANCE, RT) {
            Ok(b) => {
                unitary += usize::from(b.u_unitary);
                counts[0] += usize::from(b.upper_a_inverse_norm);
                counts[1] += usize::from(b.lower_b_norm);
                counts[2] += usize::from(b.lower_a_inverse_norm);
                let u2 = b.norm_u * b.norm_u;
                let mut margin = ((b.a2 - b.a1 / u2) / b.a2.max(b.a1 / u2))
                    .min((b.b1 * u2 - b.b2) / b.b2.max(b.b1 * u2))
                    + VERDICT_TOLERANCE;
                if b.u_unitary && !b.unitary_equality {
                    margin = margin.min(-1.0);
                }
                t.observe(margin, || {
                    format!(
                        "pair {i}: A1 = {:.6e}, A2 = {:.6e}, |U|^2 = {u2:.4}, |U^-1|^2 = {:.4}",
                        b.a1,
                        b.a2,
                        b.norm_u_inv * b.norm_u_inv
                    )
                });
            }
            Err(e) => t.check(false, || format!("pair {i}: {e}")),
        }
    }
    let trials = t.trials;
    let required = t.record("commuting_bounds", "commuting-homeomorphism-bounds").detail("unitary_pairs", unitary);
    let info = Record::info("commuting_bounds_estimates", "commuting-homeomorphism-bounds")
        .detail("trials", trials)
        .detail("upper_a_inverse_norm_holds", counts[0])
        .detail("lower_b_norm_holds", counts[1])
        .detail("lower_a_inverse_norm_holds", counts[2]);
    (required, info)
}

pub fn scaling_transform(seed: u64, cap: usize) -> Record {
    let mut r = rng(seed, 27, 0);
    let g = random_grid(&mut r, cap.min(32));
    let s = random_frame(&mut r, &g);
    let k = random_operator(&mut r, &g);
    let two = BoundedOperator::identity(&g).scaled(Complex64::new(2.0, 0.0));
    let b = transformed_bounds(&s.atoms, &k, &two, VERDICT_TOLERANCE, RT).expect("valid pair");
    let err = (b.a2 - 4.0 * b.a1).abs().max((b.b2 - 4.0 * b.b1).abs() * b.a1 / b.b1);
    let margin = rel(err, 1e-8 * 4.0 * b.a1);
    Record::required(
        "scaling_transform",
        "commuting-homeomorphism-bounds",
        b.general_lower_a && b.general_upper_b && margin >= 0.0,
    )
    .margin(margin)
    .detail("upper_a_inverse_norm", b.upper_a_inverse_norm)
    .number("a1", b.a1)
    .number("a2", b.a2)
    .number("b1", b.b1)
    .number("b2", b.b2)
}

pub fn restricted_bounds(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..20 {
        let mut r = rng(seed, 28, i);
        let g = random_grid(&mut r, cap.min(32));
        let s = random_frame(&mut r, &g);
        let k = random_operator(&mut r, &g);
        let rep = kframe_bounds(&s.frame_operator, &k, RT).expect("grids");
        match restricted_homeomorphism_check(&s.frame_operator, &k, rep.a_opt_value(), rep.b_std, r.random(), RT) {
            Ok(c) => t.observe(
                c.inverse_lower_margin
                    .min(c.inverse_upper_margin)
                    .min(c.form_lower_margin)
                    .min(c.form_upper_margin)
                    + 1e-9,
                || format!("system {i}"),
            ),
            Err(e) => t.check(false, || format!("system {i}: {e}")),
        }
    }
    t.record("restricted_bounds", "restricted-frame-operator-bounds")
}

pub fn block_basis(seed: u64) -> Record {
    let mut t = Tally::default();
    for (i, xi) in [0i64, 3, 17].into_iter().enumerate() {
        let ex = block_basis_example(64, 8, xi).expect("8 divides 64");
        let a = ex.report.a_opt_value();
        let b = ex.report.b_k.value().unwrap_or(f64::INFINITY);
        t.observe(rel((a - 1.0).abs().max((b - 1.0).abs()), 1e-9), || format!("xi = {xi}"));
        let mut r = rng(seed, 29, i);
        for _ in 0..100 {
            let f = random_vector(&mut r, 64);
            let coeffs = numerics::norm_sqr(&ex.atoms.matrix().apply_adjoint(&f));
            let shifted = numerics::norm_sqr(&ex.k.matrix().apply(&f));
            let norm = numerics::norm_sqr(&f);
            let err = (coeffs - norm).abs().max((shifted - norm).abs());
            t.observe(rel(err, 1e-10 * norm), || format!("xi = {xi}: coefficient energy"));
        }
    }
    t.record("block_basis", "block-indicator-basis")
}

pub fn scale_covariance(seed: u64, cap: usize) -> Record {
    let mut t = Tally::default();
    for i in 0..20 {
        let mut r = rng(seed, 30, i);
        let g = random_grid(&mut r, cap.min(32));
        let s = random_frame(&mut r, &g);
        let k = random_operator(&mut r, &g);
        let c = random_scalar(&mut r);
        let scaled = s.system.with_window(s.system.window().scale(c)).expect("same grid");
        let base = kframe_bounds(&s.frame_operator, &k, RT).expect("grids");
        let other = kframe_bounds(&frame_operator(&gabor::atoms(&scaled)), &k, RT).expect("grids");
        let c2 = c.norm_sqr();
        let pairs = [
            (base.a_opt_value(), other.a_opt_value()),
            (base.b_std, other.b_std),
            (
                base.b_k.value().unwrap_or(f64::NAN),
                other.b_k.value().unwrap_or(f64::NAN),
            ),
        ];
        let worst = pairs
            .iter()
            .map(|&(x, y)| rel((y - c2 * x).abs(), 1e-9 * (c2 * x).abs()))
            .fold(f64::INFINITY, f64::min);
        t.observe(worst, || format!("trial {i}, |c|^2 = {c2}"));
    }
    t.record("scale_covariance", "optimal-kframe-bounds")
}

pub fn density_info() -> Record {
    let seq: Vec<(i64, f64)> = (0..8).map(|n| (n, 8.0 * n as f64)).collect();
    let r = uniform_density_check(&seq, 1.0 / 8.0, 8.0).expect("valid");
    Record::info("uniform_density", "uniform-density")
        .detail("uniform", r.result)
        .number("worst_deviation", r.worst_deviation)
}

/// Every property, in a fixed order.
pub fn run_suite(seed: u64, size_cap: usize) -> VerificationReport {
    let cap = size_cap.max(1);
    let start = Instant::now();
    let mut records = Vec::new();
    let mut timed = |f: &mut dyn FnMut() -> Vec<Record>| {
        let s = Instant::now();
        records.extend(f().into_iter().map(|r| r.timed(s)));
    };
    timed(&mut || vec![eig_trace(seed, cap)]);
    timed(&mut || vec![svd_matches_eig(seed, cap)]);
    timed(&mut || vec![penrose_identities(seed)]);
    timed(&mut || vec![psd_two_sided(seed, cap)]);
    timed(&mut || vec![rayleigh_identity_denominator(seed, cap)]);
    timed(&mut || vec![commutation_phase(seed, cap)]);
    timed(&mut || vec![unitary_shifts(seed, cap)]);
    timed(&mut || vec![adjoint_involution(seed, cap)]);
    timed(&mut || vec![fourier_pair_commutes(seed, cap)]);
    timed(&mut || vec![parseval_orthonormal(seed, cap)]);
    timed(&mut || vec![frame_operator_product(seed, cap)]);
    timed(&mut || vec![bessel_bound(seed, cap)]);
    timed(&mut || vec![relabeling_invariance(seed, cap)]);
    timed(&mut || vec![periodization_mass(seed, cap)]);
    timed(&mut || vec![block_basis(seed)]);
    timed(&mut || vec![psd_optimality(seed, cap)]);
    timed(&mut || vec![douglas_agreement(seed)]);
    timed(&mut || vec![range_biconditional(seed, cap)]);
    timed(&mut || vec![periodization_sufficient(seed, cap)]);
    timed(&mut || vec![periodization_necessary(seed, cap)]);
    timed(&mut || vec![image_frames(seed, cap)]);
    timed(&mut || {
        let (a, b) = commuting_bounds(seed, cap);
        vec![a, b]
    });
    timed(&mut || vec![scaling_transform(seed, cap)]);
    timed(&mut || vec![restricted_bounds(seed, cap)]);
    timed(&mut || vec![scale_covariance(seed, cap)]);
    timed(&mut || vec![density_info()]);
    let mut env = Environment::new("suite", seed, Tolerances::default());
    env.size_cap = Some(size_cap);
    VerificationReport::new(env, records, start.elapsed().as_secs_f64() * 1e3)
}
