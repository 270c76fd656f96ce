//! Largest eigenpairs of Hermitian PSD matrices and of their real part.
//!
//! Plain power iteration: on a PSD matrix the dominant eigenvalue is the
//! largest one, and the iterate is renormalized every step so entries of
//! order 1e64 never overflow.

use alloc::vec::Vec;

use num_traits::{Float, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrices::{ComplexMatrix, ComplexVector, DEFAULT_TOL};
use crate::{Complex64, Error, Result};

/// Seed of the deterministic start vector.
pub const DEFAULT_SEED: u64 = 0xB4A7;
pub const MAX_ITERATIONS: usize = 100_000;
/// Residual `‖Fv - λv‖₂ / ‖F‖₂` that stops the iteration outright.
pub const RESIDUAL_STOP: f64 = 1e-12;
/// Residual required for a result to count as converged.
pub const RESIDUAL_SUCCESS: f64 = 1e-10;
/// Relative eigenvalue change regarded as stagnation.
pub const STAGNATION_TOL: f64 = 1e-13;
const STAGNATION_STREAK: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub eigenvalue: f64,
    pub eigenvector: ComplexVector,
    pub iterations: usize,
    /// `‖Fv - λv‖₂ / ‖F‖₂`, with `‖Fv‖₂` standing in for `‖F‖₂`.
    pub residual: f64,
}

/// Dominant eigenpair of a Hermitian PSD matrix.
pub fn lambda_max_hermitian(f: &ComplexMatrix) -> Result<SpectralResult> {
    let n = f.require_hermitian(DEFAULT_TOL)?;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let start: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    power_iteration(f, start)
}

/// Entry-wise real part of a Hermitian matrix; the result is real symmetric.
pub fn real_symmetric_part(f: &ComplexMatrix) -> Result<ComplexMatrix> {
    f.require_hermitian(DEFAULT_TOL)?;
    Ok(f.real_part())
}

/// Dominant eigenpair of `Re(F)` with a real eigenvector, i.e. the maximum of
/// `vᵀ F v` over real unit vectors `v`.
pub fn lambda_max_real_sym(f: &ComplexMatrix) -> Result<SpectralResult> {
    let re = real_symmetric_part(f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let start: Vec<Complex64> = (0..re.rows())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
        .collect();
    let mut result = power_iteration(&re, start)?;
    let real: Vec<Complex64> = result
        .eigenvector
        .entries()
        .iter()
        .map(|z| Complex64::new(z.re, 0.0))
        .collect();
    result.eigenvector = ComplexVector::new(real)?;
    Ok(result)
}

/// `Re(v* F v)` for a unit vector `v` and Hermitian `F`.
pub fn rayleigh_quotient(f: &ComplexMatrix, v: &ComplexVector) -> Result<f64> {
    let n = f.require_hermitian(DEFAULT_TOL)?;
    if v.dim() != n {
        return Err(Error::DimensionMismatch {
            left: f.dims(),
            right: (v.dim(), 1),
        });
    }
    v.require_unit()?;
    Ok(quadratic_form(f, v.entries()).re)
}

fn quadratic_form(f: &ComplexMatrix, v: &[Complex64]) -> Complex64 {
    let fv = f.mat_vec(v);
    v.iter().zip(&fv).map(|(a, b)| a.conj() * b).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let s = norm(v);
    if s > 0.0 {
        v.iter_mut().for_each(|z| *z /= s);
    }
    s
}

/// One Rayleigh step: returns `(Fx, λ, residual)` for unit `x`.
fn step(f: &ComplexMatrix, x: &[Complex64]) -> (Vec<Complex64>, f64, f64) {
    let y = f.mat_vec(x);
    let lambda: f64 = x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum();
    let scale = norm(&y);
    let residual = if scale == 0.0 {
        0.0
    } else {
        let r: Vec<Complex64> = y.iter().zip(x).map(|(a, b)| a - b * lambda).collect();
        norm(&r) / scale
    };
    (y, lambda, residual)
}

fn power_iteration(f: &ComplexMatrix, start: Vec<Complex64>) -> Result<SpectralResult> {
    let n = f.rows();
    let mut x = start;
    if normalize(&mut x) == 0.0 {
        x = ComplexVector::all_equal(n).entries().to_vec();
    }
    let mut restarted = false;
    let mut previous = f64::NAN;
    let mut streak = 0;
    let mut best = (f64::NAN, f64::INFINITY);

    for iteration in 1..=MAX_ITERATIONS {
        let (mut y, lambda, residual) = step(f, &x);
        if residual < best.1 {
            best = (lambda, residual);
        }
        let finish = |x: Vec<Complex64>| -> Result<SpectralResult> {
            Ok(SpectralResult {
                eigenvalue: lambda,
                eigenvector: ComplexVector::new(x)?,
                iterations: iteration,
                residual,
            })
        };

        if y.iter().all(|z| z.is_zero()) {
            // x lies in the null space: either F = 0 or the start was unlucky.
            if restarted || f.max_abs() == 0.0 {
                return finish(x);
            }
            restarted = true;
            x = ComplexVector::all_equal(n).entries().to_vec();
            continue;
        }

        if (lambda - previous).abs() <= STAGNATION_TOL * lambda.abs() {
            streak += 1;
        } else {
            streak = 0;
        }
        previous = lambda;
        if residual <= RESIDUAL_STOP
            || (streak >= STAGNATION_STREAK && residual <= RESIDUAL_SUCCESS)
        {
            return finish(x);
        }
        normalize(&mut y);
        x = y;
    }
    Err(Error::NonConvergence {
        estimate: best.0,
        residual: best.1,
        iterations: MAX_ITERATIONS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_and_ones() {
        let r = lambda_max_hermitian(&ComplexMatrix::identity(5)).unwrap();
        assert!((r.eigenvalue - 1.0).abs() < 1e-15);
        assert!(r.residual <= RESIDUAL_SUCCESS);

        let r = lambda_max_hermitian(&ComplexMatrix::ones(6)).unwrap();
        assert!((r.eigenvalue - 6.0).abs() < 1e-12);
        let first = r.eigenvector.entries()[0];
        for z in r.eigenvector.entries() {
            assert!((z - first).norm() < 1e-8);
        }
    }

    #[test]
    fn zero_matrix() {
        let r = lambda_max_hermitian(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(r.eigenvalue, 0.0);
    }

    #[test]
    fn real_part_examples() {
        let h = ComplexMatrix::new(
            2,
            2,
            alloc::vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert_eq!(real_symmetric_part(&h).unwrap(), ComplexMatrix::identity(2));
        let real = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(real_symmetric_part(&real).unwrap(), real);
        let not_h = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            real_symmetric_part(&not_h),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn real_diagonal() {
        let d =
            ComplexMatrix::from_real(3, 3, &[2.0, 0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let r = lambda_max_real_sym(&d).unwrap();
        assert!((r.eigenvalue - 5.0).abs() < 1e-12);
        assert!(r.eigenvector.is_real());
        assert!((r.eigenvector.entries()[1].re.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rayleigh_examples() {
        let v =
            ComplexVector::normalized(alloc::vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 1.0)]).unwrap();
        let q = rayleigh_quotient(&ComplexMatrix::identity(3), &v).unwrap();
        assert!((q - 1.0).abs() < 1e-15);
        let q = rayleigh_quotient(&ComplexMatrix::ones(4), &ComplexVector::all_equal(4)).unwrap();
        assert!((q - 4.0).abs() < 1e-14);
        assert!(rayleigh_quotient(&ComplexMatrix::ones(3), &ComplexVector::all_equal(4)).is_err());
        let unnormalized = ComplexVector::from_real(&[1.0, 1.0, 1.0]).unwrap();
        assert!(rayleigh_quotient(&ComplexMatrix::ones(3), &unnormalized).is_err());
    }
}
