//! Seeded generators of random grids, Gabor systems, operators and operator
//! pairs, shared by the property suite and the integration tests.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use crate::gabor::{self, frame_operator, lattice_shifts, AtomMatrix, FrameOperatorMatrix, GaborSystem};
use crate::numerics::ComplexMatrix;
use crate::operators::{BoundedOperator, GridSpec, Signal};
use crate::random::{complex_uniform, random_matrix, random_rank_matrix, random_unitary};

/// Smallest accepted ratio `λ_min(S) / λ_max(S)` for generated frames.
pub const MIN_FRAME_CONDITION: f64 = 1e-4;

const MAX_RESAMPLES: usize = 50;

/// A Gabor system together with its synthesis matrix and frame operator.
#[derive(Debug, Clone)]
pub struct SampledSystem {
    pub system: GaborSystem,
    pub atoms: AtomMatrix,
    pub frame_operator: FrameOperatorMatrix,
}

impl SampledSystem {
    pub fn new(system: GaborSystem) -> Self {
        let atoms = gabor::atoms(&system);
        let frame_operator = frame_operator(&atoms);
        Self {
            system,
            atoms,
            frame_operator,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.system.grid()
    }
}

/// Grid with at most `cap` points; one- or two-dimensional.
pub fn random_grid(rng: &mut impl Rng, cap: usize) -> GridSpec {
    let cap = cap.max(1);
    if cap >= 4 && rng.random_bool(0.25) {
        let n1 = rng.random_range(2..=cap.isqrt().max(2));
        let n2 = rng.random_range(2..=(cap / n1).max(2));
        return GridSpec::new(vec![n1, n2]).expect("positive sizes");
    }
    GridSpec::line(rng.random_range(cap.min(2)..=cap)).expect("positive size")
}

/// Window with every entry of modulus in `[0.5, 1.5]`.
pub fn random_window(rng: &mut impl Rng, grid: &GridSpec) -> Signal {
    Signal::from_fn(grid, |_| {
        let r: f64 = rng.random_range(0.5..=1.5);
        Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
    })
}

/// `m` real frequency vectors, axis `j` uniform in `[0, N_j)`.
pub fn random_frequencies(rng: &mut impl Rng, grid: &GridSpec, m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| grid.sizes().iter().map(|&n| rng.random_range(0.0..n as f64)).collect())
        .collect()
}

/// `p` distinct grid points as shift vectors.
pub fn random_shifts(rng: &mut impl Rng, grid: &GridSpec, p: usize) -> Vec<Vec<i64>> {
    let p = p.clamp(1, grid.total());
    let mut picked = sample(rng, grid.total(), p).into_vec();
    picked.sort_unstable();
    picked
        .into_iter()
        .map(|i| grid.unflatten(i).into_iter().map(|x| x as i64).collect())
        .collect()
}

pub fn random_system(rng: &mut impl Rng, grid: &GridSpec, m: usize, p: usize) -> GaborSystem {
    let window = random_window(rng, grid);
    let frequencies = random_frequencies(rng, grid, m.max(1));
    let shifts = random_shifts(rng, grid, p);
    GaborSystem::new(window, frequencies, shifts).expect("valid random system")
}

/// Random system with at least `2N` atoms whose frame operator has condition
/// number at most `1 / MIN_FRAME_CONDITION`.
pub fn random_frame(rng: &mut impl Rng, grid: &GridSpec) -> SampledSystem {
    let n = grid.total();
    let mut last = None;
    for _ in 0..MAX_RESAMPLES {
        let p = rng.random_range(1..=n);
        let m = (2 * n).div_ceil(p) + rng.random_range(0..=1);
        let sampled = SampledSystem::new(random_system(rng, grid, m, p));
        let (lo, hi) = gabor::ordinary_frame_bounds(&sampled.frame_operator).expect("square");
        if lo > MIN_FRAME_CONDITION * hi {
            return sampled;
        }
        last = Some(sampled);
    }
    last.expect("at least one sample")
}

/// Random system with between 1 and `2N` atoms, often too few to span.
pub fn random_sparse_system(rng: &mut impl Rng, grid: &GridSpec) -> SampledSystem {
    let n = grid.total();
    let p = rng.random_range(1..=n);
    let m = rng.random_range(1..=(2 * n).div_ceil(p));
    SampledSystem::new(random_system(rng, grid, m, p))
}

pub fn random_operator(rng: &mut impl Rng, grid: &GridSpec) -> BoundedOperator {
    let n = grid.total();
    BoundedOperator::from_matrix(grid, random_matrix(rng, n, n)).expect("square")
}

pub fn random_rank_operator(rng: &mut impl Rng, grid: &GridSpec, rank: usize) -> BoundedOperator {
    let n = grid.total();
    BoundedOperator::from_matrix(grid, random_rank_matrix(rng, n, n, rank.min(n))).expect("square")
}

pub fn random_unitary_operator(rng: &mut impl Rng, grid: &GridSpec) -> BoundedOperator {
    BoundedOperator::from_matrix(grid, random_unitary(rng, grid.total())).expect("square")
}

/// A K-frame built from a window supported on the block `[0, support)`.
#[derive(Debug, Clone)]
pub struct CompactKFrame {
    pub sampled: SampledSystem,
    pub k: BoundedOperator,
    pub support: usize,
    pub shift_step: usize,
}

/// One-dimensional system with a window supported on `[0, s)`, lattice shifts
/// of step `q ≤ s` dividing `N`, at least `s` distinct integer frequencies,
/// and a random full-rank `K`. Every point is covered by a shifted support and
/// the exponentials span each length-`s` block, so the system is a K-frame.
pub fn compact_support_kframe(rng: &mut impl Rng, cap: usize) -> CompactKFrame {
    let n = rng.random_range(cap.clamp(2, 4)..=cap.max(2));
    let grid = GridSpec::line(n).expect("positive size");
    let half = (n / 2).max(1);
    let divisors: Vec<usize> = (1..=half).filter(|q| n % q == 0).collect();
    let q = divisors[rng.random_range(0..divisors.len())];
    let s = rng.random_range(q..=half.max(q));
    let window = Signal::from_fn(&grid, |t| {
        if t[0] < s {
            let r: f64 = rng.random_range(0.5..=1.5);
            Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let m = rng.random_range(s..=n);
    let mut freqs = sample(rng, n, m).into_vec();
    freqs.sort_unstable();
    let frequencies = freqs.into_iter().map(|f| vec![f as f64]).collect();
    let shifts = lattice_shifts(&[vec![q as i64]], &grid).expect("step divides N");
    let system = GaborSystem::new(window, frequencies, shifts).expect("valid system");
    CompactKFrame {
        sampled: SampledSystem::new(system),
        k: random_operator(rng, &grid),
        support: s,
        shift_step: q,
    }
}

/// Families of operator pairs `(T₁, T₂)` with a common row count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DouglasFamily {
    /// `T₁ = T₂ G` for a random `G`.
    Included,
    /// `T₂` has rank below the row count and `T₁` is generic.
    Obstructed,
}

/// Random pair with every dimension in `1..=max_size`.
pub fn douglas_pair(rng: &mut impl Rng, family: DouglasFamily, max_size: usize) -> (ComplexMatrix, ComplexMatrix) {
    let max_size = max_size.max(1);
    let rows = rng.random_range(1..=max_size);
    let c1 = rng.random_range(1..=max_size);
    let c2 = rng.random_range(1..=max_size);
    match family {
        DouglasFamily::Included => {
            let rank = rng.random_range(0..=rows.min(c2));
            let t2 = random_rank_matrix(rng, rows, c2, rank);
            let g = random_matrix(rng, c2, c1);
            (&t2 * &g, t2)
        }
        DouglasFamily::Obstructed => {
            let rank = rng.random_range(0..rows.min(c2 + 1));
            let t2 = random_rank_matrix(rng, rows, c2, rank);
            (random_matrix(rng, rows, c1), t2)
        }
    }
}

/// Random nonzero complex scalar with modulus in `[0.25, 4]`.
pub fn random_scalar(rng: &mut impl Rng) -> Complex64 {
    loop {
        let c = complex_uniform(rng) * 4.0;
        if (0.25..=4.0).contains(&c.norm()) {
            return c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::stream;

    #[test]
    fn grids_respect_cap() {
        let mut rng = stream(0, 0);
        for cap in [1, 2, 4, 9, 32] {
            for _ in 0..50 {
                let g = random_grid(&mut rng, cap);
                assert!(g.total() <= cap.max(2) && g.total() >= 1);
            }
        }
    }

    #[test]
    fn frames_are_well_conditioned() {
        let mut rng = stream(1, 0);
        for _ in 0..20 {
            let g = random_grid(&mut rng, 16);
            let s = random_frame(&mut rng, &g);
            let (lo, hi) = gabor::ordinary_frame_bounds(&s.frame_operator).unwrap();
            assert!(lo > MIN_FRAME_CONDITION * hi);
        }
    }

    #[test]
    fn compact_frames_have_compact_windows() {
        let mut rng = stream(2, 0);
        for cap in [4, 16, 32] {
            for _ in 0..10 {
                let c = compact_support_kframe(&mut rng, cap);
                assert!(c.shift_step <= c.support);
                assert_eq!(gabor::support_extent(c.sampled.system.window()), vec![c.support]);
                assert!(c.sampled.system.frequencies().len() >= c.support);
            }
        }
    }

    #[test]
    fn douglas_pairs_have_matching_rows() {
        let mut rng = stream(3, 0);
        for family in [DouglasFamily::Included, DouglasFamily::Obstructed] {
            for _ in 0..30 {
                let (t1, t2) = douglas_pair(&mut rng, family, 8);
                assert_eq!(t1.rows(), t2.rows());
                assert!(t1.rows() <= 8 && t1.cols() <= 8 && t2.cols() <= 8);
            }
        }
    }
}
