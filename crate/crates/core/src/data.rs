//! The 16x16 rank-2 counterexample `A = X* X`, `X = X_R + i X_I`.
//!
//! `λ_max(Re F_A) / per(A) ≈ 1.0298`, so `A` violates the real-spectral
//! inequality and lifts to a nonnegative `B` violating the Hadamard one.

use crate::matrices::ExactMatrix;

pub const EQ17_N: usize = 16;

#[rustfmt::skip]
pub const EQ17_X_REAL: [[i64; EQ17_N]; 2] = [
    [25, -23, 29, 11, -20, 47, 18, 29, 35, -25, -32, -28, -18, 25, 12, -36],
    [8, 38, -11, 34, 61, 42, -23, 10, 35, 24, 11, 9, 13, -9, 34, 22],
];

#[rustfmt::skip]
pub const EQ17_X_IMAG: [[i64; EQ17_N]; 2] = [
    [30, 20, 51, -43, -11, 47, 4, 27, -26, -2, 11, 37, 64, 26, -28, 23],
    [0, 20, 10, 4, 28, 12, -46, 24, -43, 10, -17, -63, -23, 50, -40, 15],
];

/// Reported figures, to four significant digits.
pub const EQ17_PER_A: f64 = 2.1978e64;
pub const EQ17_LAMBDA_MAX_REAL: f64 = 2.2632e64;
pub const EQ17_RATIO: f64 = 1.0298;

/// The 2x16 Gaussian-integer factor `X`.
pub fn eq17_x() -> ExactMatrix {
    let re: alloc::vec::Vec<i64> = EQ17_X_REAL.iter().flatten().copied().collect();
    let im: alloc::vec::Vec<i64> = EQ17_X_IMAG.iter().flatten().copied().collect();
    ExactMatrix::from_parts_i64(2, EQ17_N, &re, &im).expect("2x16 data")
}

/// `A = X* X`, exact.
pub fn eq17_a() -> ExactMatrix {
    eq17_x().gram()
}
