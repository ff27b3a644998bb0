//! Seeded random generators for matrices, signals and test systems.
//!
//! Every object draws from its own ChaCha stream derived from `(seed, stream id)`,
//! so a result never depends on the order in which other objects were drawn.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::ComplexMatrix;

pub type SeededRng = ChaCha8Rng;

/// Independent generator for stream `id` under `seed`.
pub fn stream(seed: u64, id: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Stream id for trial `index` of the family tagged `family`.
pub fn trial_stream_id(family: u32, index: u32) -> u64 {
    (u64::from(family) << 32) | u64::from(index)
}

/// Complex number with real and imaginary parts uniform in [-1, 1).
pub fn complex_uniform(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_uniform(rng)).collect()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let entries = (0..rows * cols).map(|_| complex_uniform(rng)).collect();
    ComplexMatrix::from_row_major(rows, cols, entries).expect("finite by construction")
}

/// Product of random `rows × rank` and `rank × cols` factors; rank exactly
/// `rank` with probability one.
pub fn random_rank_matrix(rng: &mut impl Rng, rows: usize, cols: usize, rank: usize) -> ComplexMatrix {
    if rank == 0 {
        return ComplexMatrix::zeros(rows, cols);
    }
    let a = random_matrix(rng, rows, rank);
    let b = random_matrix(rng, rank, cols);
    &a * &b
}

/// Unitary matrix from the QR factorization of a random square matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let m = random_matrix(rng, n, n);
    let q = m.into_dmatrix().qr().q();
    ComplexMatrix::from_dmatrix(q).expect("finite by construction")
}
