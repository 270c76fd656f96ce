//! Seeded generators for test matrices (the `gen` subcommand and the
//! property suites).

use alloc::vec::Vec;

use num_bigint::BigInt;
use rand::Rng;

use crate::matrices::{ComplexMatrix, ComplexVector, ExactMatrix, GaussianInt};
use crate::Complex64;

/// Entries with real and imaginary parts uniform in `[-1, 1)`.
pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let entries = (0..rows * cols)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::new(rows, cols, entries).expect("finite entries")
}

/// Entries uniform in `[0, 1)`, real.
pub fn nonnegative_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let entries = (0..rows * cols)
        .map(|_| Complex64::new(rng.random_range(0.0..1.0), 0.0))
        .collect();
    ComplexMatrix::new(rows, cols, entries).expect("finite entries")
}

/// `X* X` for an n x n random complex `X` (full rank almost surely).
pub fn psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    complex_matrix(rng, n, n).gram()
}

/// `x* x` for a random complex row `x`.
pub fn rank_one<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    complex_matrix(rng, 1, n).gram()
}

/// Gram matrix of a nonnegative real matrix: PSD with nonnegative entries.
pub fn nonnegative_psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    nonnegative_matrix(rng, n, n).gram()
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexVector {
    loop {
        let entries: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if let Ok(v) = ComplexVector::normalized(entries) {
            return v;
        }
    }
}

pub fn real_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexVector {
    loop {
        let entries: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        if let Ok(v) = ComplexVector::normalized(entries) {
            return v;
        }
    }
}

/// Independent uniform integer components in `[-bound, bound]`.
pub fn gaussian_int_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    bound: i64,
) -> ExactMatrix {
    let entries = (0..rows * cols)
        .map(|_| {
            GaussianInt::new(
                BigInt::from(rng.random_range(-bound..=bound)),
                BigInt::from(rng.random_range(-bound..=bound)),
            )
        })
        .collect();
    ExactMatrix::new(rows, cols, entries).expect("consistent dimensions")
}
