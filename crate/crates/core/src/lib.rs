//! Matrix permanents and the Bapat–Sunder family of permanent inequalities.
//!
//! The crate is `no_std` (with `alloc`). It covers:
//!
//! * dense complex and Gaussian-integer matrices ([`matrices`]);
//! * permanents by Ryser's formula in floating point and exactly, the
//!   permanental minor matrix `F_A` and the first-order perturbation of the
//!   permanent ([`permanent`]);
//! * dominant eigenpairs of Hermitian PSD matrices and of their real
//!   symmetric part ([`spectra`]);
//! * executable checks of the four inequalities and the constructive lift of
//!   a spectral violation into a Hadamard-product violation ([`conjectures`]);
//! * a seeded hill-climb over rank-2 Gaussian-integer Gram matrices with
//!   re-verifiable certificates ([`search`]).
//!
//! Enable the `parallel` feature to evaluate `F_A` minors, lift scans and
//! search restarts on a rayon pool. Results are identical either way.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod conjectures;
pub mod data;
mod digest;
pub mod eigen;
mod error;
pub mod matrices;
mod modular;
pub mod permanent;
pub mod random;
pub mod search;
pub mod spectra;

pub use error::{Error, Result};
pub use matrices::{ComplexMatrix, ComplexVector, ExactMatrix, GaussianInt, Matrix};

/// Double-precision complex scalar.
pub type Complex64 = num_complex::Complex<f64>;

/// Which permanent engine produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    FloatRyser,
    FloatNaive,
    ExactRyser,
    ExactNaive,
}

impl Backend {
    pub fn is_exact(self) -> bool {
        matches!(self, Backend::ExactRyser | Backend::ExactNaive)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Backend::FloatRyser => "float-ryser",
            Backend::FloatNaive => "float-naive",
            Backend::ExactRyser => "exact-ryser",
            Backend::ExactNaive => "exact-naive",
        }
    }
}

impl core::fmt::Display for Backend {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(0..len).map(f)`, evaluated on the rayon pool when the `parallel`
/// feature is on. Output order is index order either way.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send>(
    len: usize,
    f: impl Fn(usize) -> T + Sync + Send,
) -> alloc::vec::Vec<T> {
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T>(len: usize, f: impl Fn(usize) -> T) -> alloc::vec::Vec<T> {
    (0..len).map(f).collect()
}
