//! Permanent engines, permanental minors and the minor matrix `F_A`.
//!
//! Two engines per backend: Ryser's inclusion–exclusion with Gray-code
//! column updates (O(2^n·n)) and a direct sum over all n! permutations that
//! serves as its oracle. Exact inputs ([`ExactMatrix`]) are handled over the
//! Gaussian integers; floating inputs in double precision. Mixing backends is
//! an error.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::matrices::{gaussian_to_complex, ComplexMatrix, ExactMatrix, GaussianInt, Matrix};
use crate::modular::ResidueMatrix;
use crate::{par_map, Backend, Complex64, Error, Result};

/// Largest order accepted by the Ryser engines.
pub const RYSER_MAX_N: usize = 32;
/// Largest order accepted by [`build_fa`] (n² permanents of order n-1).
pub const FA_MAX_N: usize = 20;
/// Largest order accepted by the n! oracle.
pub const NAIVE_MAX_N: usize = 9;

/// A permanent on one of the two arithmetic backends.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(Complex64),
    Exact(GaussianInt),
}

impl Value {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            Value::Float(z) => *z,
            Value::Exact(z) => gaussian_to_complex(z),
        }
    }

    pub fn as_exact(&self) -> Option<&GaussianInt> {
        match self {
            Value::Exact(z) => Some(z),
            Value::Float(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PermanentValue {
    pub value: Value,
    pub backend: Backend,
}

impl PermanentValue {
    pub fn to_complex(&self) -> Complex64 {
        self.value.to_complex()
    }

    /// Real part in double precision.
    pub fn re(&self) -> f64 {
        self.to_complex().re
    }
}

fn guard(op: &'static str, n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::CostGuard { op, n, limit })
    } else {
        Ok(())
    }
}

/// `per(A)` by Ryser's formula; exact for [`Matrix::Exact`].
pub fn permanent_ryser(a: &Matrix) -> Result<PermanentValue> {
    Ok(match a {
        Matrix::Float(m) => PermanentValue {
            value: Value::Float(ryser_float(m)?),
            backend: Backend::FloatRyser,
        },
        Matrix::Exact(m) => PermanentValue {
            value: Value::Exact(ryser_exact(m)?),
            backend: Backend::ExactRyser,
        },
    })
}

/// `per(A)` as a direct sum over permutations. Limited to n <= 9.
pub fn permanent_naive(a: &Matrix) -> Result<PermanentValue> {
    Ok(match a {
        Matrix::Float(m) => PermanentValue {
            value: Value::Float(naive_float(m)?),
            backend: Backend::FloatNaive,
        },
        Matrix::Exact(m) => PermanentValue {
            value: Value::Exact(naive_exact(m)?),
            backend: Backend::ExactNaive,
        },
    })
}

/// Double-precision Ryser. Each subset's contribution is added with
/// Neumaier compensation in a fixed order, so the result is reproducible.
pub fn ryser_float(a: &ComplexMatrix) -> Result<Complex64> {
    let n = a.require_square()?;
    guard("permanent", n, RYSER_MAX_N)?;
    Ok(ryser_float_slice(n, a.entries()))
}

fn ryser_float_slice(n: usize, a: &[Complex64]) -> Complex64 {
    let mut row_sums = alloc::vec![Complex64::zero(); n];
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        if gray & (1 << j) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[i * n + j];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[i * n + j];
            }
        }
        let prod = row_sums
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &s| acc * s);
        // (-1)^(n - |S|)
        if (n as u32 - gray.count_ones()) % 2 == 0 {
            re.add(prod.re);
            im.add(prod.im);
        } else {
            re.add(-prod.re);
            im.add(-prod.im);
        }
    }
    Complex64::new(re.value(), im.value())
}

#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Exact Ryser over the Gaussian integers.
pub fn ryser_exact(a: &ExactMatrix) -> Result<GaussianInt> {
    let n = a.require_square()?;
    guard("permanent", n, RYSER_MAX_N)?;
    Ok(ResidueMatrix::new(a)?.permanent(None))
}

pub fn naive_float(a: &ComplexMatrix) -> Result<Complex64> {
    let n = a.require_square()?;
    guard("naive permanent", n, NAIVE_MAX_N)?;
    let mut used = alloc::vec![false; n];
    let mut total = Complex64::zero();
    naive_rec(
        n,
        0,
        Complex64::new(1.0, 0.0),
        &mut used,
        &mut total,
        &|i, j| a.get(i, j),
        &|acc, x| acc * x,
    );
    Ok(total)
}

pub fn naive_exact(a: &ExactMatrix) -> Result<GaussianInt> {
    let n = a.require_square()?;
    guard("naive permanent", n, NAIVE_MAX_N)?;
    let mut used = alloc::vec![false; n];
    let mut total = GaussianInt::zero();
    naive_rec(
        n,
        0,
        GaussianInt::new(1.into(), 0.into()),
        &mut used,
        &mut total,
        &|i, j| a.get(i, j).clone(),
        &|acc, x| acc * x,
    );
    Ok(total)
}

// Depth-first walk over permutations sigma, accumulating prod_i a_{i, sigma(i)}.
fn naive_rec<T: Clone + core::ops::AddAssign>(
    n: usize,
    row: usize,
    partial: T,
    used: &mut [bool],
    total: &mut T,
    entry: &dyn Fn(usize, usize) -> T,
    mul: &dyn Fn(T, T) -> T,
) {
    if row == n {
        *total += partial;
        return;
    }
    for col in 0..n {
        if used[col] {
            continue;
        }
        used[col] = true;
        naive_rec(
            n,
            row + 1,
            mul(partial.clone(), entry(row, col)),
            used,
            total,
            entry,
            mul,
        );
        used[col] = false;
    }
}

fn check_minor_indices(n: usize, i: usize, j: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooSmall {
            op: "minor",
            n,
            min: 2,
        });
    }
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange { row: i, col: j, n });
    }
    Ok(())
}

fn minor_entries<T: Clone>(n: usize, entries: &[T], i: usize, j: usize) -> Vec<T> {
    (0..n)
        .filter(|&r| r != i)
        .flat_map(|r| {
            (0..n)
                .filter(move |&c| c != j)
                .map(move |c| entries[r * n + c].clone())
        })
        .collect()
}

impl ComplexMatrix {
    /// The submatrix `A(i, j)` with row `i` and column `j` removed (0-based).
    pub fn minor(&self, i: usize, j: usize) -> Result<ComplexMatrix> {
        let n = self.require_square()?;
        check_minor_indices(n, i, j)?;
        Ok(ComplexMatrix::from_parts(
            n - 1,
            n - 1,
            minor_entries(n, self.entries(), i, j),
        ))
    }
}

impl ExactMatrix {
    /// The submatrix `A(i, j)` with row `i` and column `j` removed (0-based).
    pub fn minor(&self, i: usize, j: usize) -> Result<ExactMatrix> {
        let n = self.require_square()?;
        check_minor_indices(n, i, j)?;
        Ok(ExactMatrix::from_vec(
            n - 1,
            n - 1,
            minor_entries(n, self.entries(), i, j),
        ))
    }
}

impl Matrix {
    pub fn minor(&self, i: usize, j: usize) -> Result<Matrix> {
        Ok(match self {
            Matrix::Float(m) => Matrix::Float(m.minor(i, j)?),
            Matrix::Exact(m) => Matrix::Exact(m.minor(i, j)?),
        })
    }
}

/// `F_A = [a_ij · per(A(i, j))]` together with an independently computed `per(A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FaMatrix {
    pub entries: Matrix,
    pub source_permanent: PermanentValue,
}

impl FaMatrix {
    pub fn dim(&self) -> usize {
        self.entries.dims().0
    }

    /// Largest relative deviation of any row or column sum from `per(A)`.
    /// Zero on the exact backend whenever the Laplace identity holds.
    pub fn laplace_defect(&self) -> f64 {
        match &self.entries {
            Matrix::Exact(f) => {
                let per = match &self.source_permanent.value {
                    Value::Exact(p) => p.clone(),
                    Value::Float(_) => unreachable!("exact F_A carries an exact permanent"),
                };
                let n = f.rows();
                let exact_ok = (0..n).all(|i| {
                    let row: GaussianInt = (0..n).map(|j| f.get(i, j).clone()).sum();
                    let col: GaussianInt = (0..n).map(|j| f.get(j, i).clone()).sum();
                    row == per && col == per
                });
                if exact_ok {
                    0.0
                } else {
                    laplace_defect_float(&f.to_complex(), gaussian_to_complex(&per))
                }
            }
            Matrix::Float(f) => laplace_defect_float(f, self.source_permanent.to_complex()),
        }
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        self.entries.to_complex()
    }
}

fn laplace_defect_float(f: &ComplexMatrix, per: Complex64) -> f64 {
    let n = f.rows();
    let scale = per.norm().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let row: Complex64 = (0..n).map(|j| f.get(i, j)).sum();
        let col: Complex64 = (0..n).map(|j| f.get(j, i)).sum();
        worst = worst
            .max((row - per).norm() / scale)
            .max((col - per).norm() / scale);
    }
    worst
}

/// Builds `F_A`. All n² minor permanents are computed independently
/// (concurrently with the `parallel` feature); `per(A)` is a separate call.
pub fn build_fa(a: &Matrix) -> Result<FaMatrix> {
    let n = a.require_square()?;
    if n < 2 {
        return Err(Error::TooSmall {
            op: "F_A",
            n,
            min: 2,
        });
    }
    guard("F_A", n, FA_MAX_N)?;
    match a {
        Matrix::Float(m) => {
            let entries = par_map(n * n, |k| {
                let (i, j) = (k / n, k % n);
                let aij = m.get(i, j);
                if aij.is_zero() {
                    return Complex64::zero();
                }
                let minor = minor_entries(n, m.entries(), i, j);
                aij * ryser_float_slice(n - 1, &minor)
            });
            Ok(FaMatrix {
                entries: Matrix::Float(ComplexMatrix::new(n, n, entries)?),
                source_permanent: PermanentValue {
                    value: Value::Float(ryser_float(m)?),
                    backend: Backend::FloatRyser,
                },
            })
        }
        Matrix::Exact(m) => {
            let residues = ResidueMatrix::new(m)?;
            let entries = par_map(n * n, |k| {
                let (i, j) = (k / n, k % n);
                let aij = m.get(i, j);
                if aij.is_zero() {
                    return GaussianInt::zero();
                }
                aij * residues.permanent(Some((i, j)))
            });
            Ok(FaMatrix {
                entries: Matrix::Exact(ExactMatrix::from_vec(n, n, entries)),
                source_permanent: PermanentValue {
                    value: Value::Exact(ryser_exact(m)?),
                    backend: Backend::ExactRyser,
                },
            })
        }
    }
}

/// Builds `F_A` column by column: one Ryser pass over the other n-1 columns
/// yields `per(A(i, j))` for every row `i` via prefix/suffix products of the
/// row sums. About n/3 times cheaper than [`build_fa`]; exact results are
/// identical, float results agree to rounding.
pub fn build_fa_by_columns(a: &Matrix) -> Result<FaMatrix> {
    let n = a.require_square()?;
    if n < 2 {
        return Err(Error::TooSmall {
            op: "F_A",
            n,
            min: 2,
        });
    }
    guard("F_A", n, FA_MAX_N)?;
    match a {
        Matrix::Float(m) => {
            let columns = par_map(n, |j| column_minors_float(n, m.entries(), j));
            let entries = (0..n * n)
                .map(|k| {
                    let (i, j) = (k / n, k % n);
                    m.get(i, j) * columns[j][i]
                })
                .collect();
            Ok(FaMatrix {
                entries: Matrix::Float(ComplexMatrix::new(n, n, entries)?),
                source_permanent: PermanentValue {
                    value: Value::Float(ryser_float(m)?),
                    backend: Backend::FloatRyser,
                },
            })
        }
        Matrix::Exact(m) => {
            let residues = ResidueMatrix::new(m)?;
            let columns = par_map(n, |j| residues.column_minor_permanents(j));
            let entries = (0..n * n)
                .map(|k| {
                    let (i, j) = (k / n, k % n);
                    m.get(i, j) * &columns[j][i]
                })
                .collect();
            Ok(FaMatrix {
                entries: Matrix::Exact(ExactMatrix::from_vec(n, n, entries)),
                source_permanent: PermanentValue {
                    value: Value::Exact(ResidueMatrix::new(m)?.permanent(None)),
                    backend: Backend::ExactRyser,
                },
            })
        }
    }
}

fn column_minors_float(n: usize, a: &[Complex64], col: usize) -> Vec<Complex64> {
    let others: Vec<usize> = (0..n).filter(|&j| j != col).collect();
    let m = others.len();
    let one = Complex64::new(1.0, 0.0);
    let mut row_sums = alloc::vec![Complex64::zero(); n];
    let mut prefix = alloc::vec![one; n + 1];
    let mut suffix = alloc::vec![one; n + 1];
    let mut re: Vec<NeumaierSum> = (0..n).map(|_| NeumaierSum::default()).collect();
    let mut im: Vec<NeumaierSum> = (0..n).map(|_| NeumaierSum::default()).collect();
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << m) {
        let bit = k.trailing_zeros() as usize;
        let j = others[bit];
        gray ^= 1 << bit;
        if gray & (1 << bit) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[i * n + j];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[i * n + j];
            }
        }
        for i in 0..n {
            prefix[i + 1] = prefix[i] * row_sums[i];
        }
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] * row_sums[i];
        }
        let sign = if (m as u32 - gray.count_ones()) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        for i in 0..n {
            let term = prefix[i] * suffix[i + 1];
            re[i].add(sign * term.re);
            im[i].add(sign * term.im);
        }
    }
    (0..n)
        .map(|i| Complex64::new(re[i].value(), im[i].value()))
        .collect()
}

/// `sum_ij c_ij · per(A(i, j))`, the derivative of `per(A + tC)` at `t = 0`.
pub fn permanent_directional_derivative(a: &ComplexMatrix, c: &ComplexMatrix) -> Result<Complex64> {
    let n = a.require_square()?;
    if a.dims() != c.dims() {
        return Err(Error::DimensionMismatch {
            left: a.dims(),
            right: c.dims(),
        });
    }
    if n < 2 {
        return Err(Error::TooSmall {
            op: "directional derivative",
            n,
            min: 2,
        });
    }
    guard("directional derivative", n, FA_MAX_N)?;
    let terms = par_map(n * n, |k| {
        let (i, j) = (k / n, k % n);
        let cij = c.get(i, j);
        if cij.is_zero() {
            return Complex64::zero();
        }
        cij * ryser_float_slice(n - 1, &minor_entries(n, a.entries(), i, j))
    });
    Ok(terms.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn float(m: ComplexMatrix) -> Matrix {
        Matrix::Float(m)
    }

    #[test]
    fn small_known_values() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(naive_float(&m).unwrap(), c(10.0, 0.0));
        assert_eq!(ryser_float(&m).unwrap(), c(10.0, 0.0));

        let one = ComplexMatrix::new(1, 1, alloc::vec![c(2.5, -1.0)]).unwrap();
        assert_eq!(naive_float(&one).unwrap(), c(2.5, -1.0));
        assert_eq!(ryser_float(&one).unwrap(), c(2.5, -1.0));

        assert_eq!(naive_float(&ComplexMatrix::ones(4)).unwrap(), c(24.0, 0.0));
        assert_eq!(ryser_float(&ComplexMatrix::ones(5)).unwrap(), c(120.0, 0.0));
        assert_eq!(
            ryser_float(&ComplexMatrix::identity(7)).unwrap(),
            c(1.0, 0.0)
        );

        let h = ComplexMatrix::new(
            2,
            2,
            alloc::vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert_eq!(ryser_float(&h).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn exact_known_values() {
        let h = ExactMatrix::from_parts_i64(2, 2, &[1, 0, 0, 1], &[0, 1, -1, 0]).unwrap();
        assert_eq!(
            ryser_exact(&h).unwrap(),
            GaussianInt::new(2.into(), 0.into())
        );
        assert_eq!(
            naive_exact(&h).unwrap(),
            GaussianInt::new(2.into(), 0.into())
        );
        let e5 = ExactMatrix::from_real_i64(5, 5, &[1; 25]).unwrap();
        assert_eq!(
            ryser_exact(&e5).unwrap(),
            GaussianInt::new(120.into(), 0.into())
        );
        assert_eq!(
            ryser_exact(&ExactMatrix::identity(9)).unwrap(),
            GaussianInt::new(1.into(), 0.into())
        );
    }

    #[test]
    fn cost_guards() {
        let big = ComplexMatrix::ones(10);
        assert!(matches!(
            naive_float(&big),
            Err(Error::CostGuard { limit: 9, .. })
        ));
        assert!(matches!(
            ryser_float(&ComplexMatrix::ones(33)),
            Err(Error::CostGuard { limit: 32, .. })
        ));
        assert!(matches!(
            build_fa(&float(ComplexMatrix::identity(21))),
            Err(Error::CostGuard { limit: 20, .. })
        ));
        assert!(matches!(
            ryser_float(&ComplexMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn minors() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(
            m.minor(0, 0).unwrap(),
            ComplexMatrix::from_real(1, 1, &[4.0]).unwrap()
        );
        assert_eq!(
            ComplexMatrix::ones(3).minor(1, 2).unwrap(),
            ComplexMatrix::ones(2)
        );
        assert!(matches!(m.minor(2, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(
            ComplexMatrix::ones(1).minor(0, 0),
            Err(Error::TooSmall { .. })
        ));
        let e = ExactMatrix::from_parts_i64(
            3,
            3,
            &[1, 2, 3, 4, 5, 6, 7, 8, 9],
            &[0, 0, 0, 0, 1, 0, 0, 0, 0],
        )
        .unwrap();
        let sub = e.minor(0, 1).unwrap();
        assert_eq!(
            sub,
            ExactMatrix::from_parts_i64(2, 2, &[4, 6, 7, 9], &[0, 0, 0, 0]).unwrap()
        );
    }

    #[test]
    fn fa_rank_one_and_identity() {
        let h = ComplexMatrix::new(
            2,
            2,
            alloc::vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)],
        )
        .unwrap();
        let fa = build_fa(&float(h)).unwrap();
        assert_eq!(fa.to_complex(), ComplexMatrix::ones(2));
        assert_eq!(fa.source_permanent.to_complex(), c(2.0, 0.0));

        let fa = build_fa(&Matrix::Exact(ExactMatrix::identity(4))).unwrap();
        assert_eq!(fa.entries, Matrix::Exact(ExactMatrix::identity(4)));
        assert_eq!(fa.laplace_defect(), 0.0);
    }

    #[test]
    fn directional_derivative_trivial_cases() {
        let a = ComplexMatrix::from_real(3, 3, &[1.0, 2.0, 0.5, -1.0, 3.0, 2.0, 0.0, 1.0, 1.0])
            .unwrap();
        let per = ryser_float(&a).unwrap();
        let d = permanent_directional_derivative(&a, &a).unwrap();
        assert!((d - per * 3.0).norm() < 1e-12 * per.norm());
        let z = permanent_directional_derivative(&a, &ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(z, Complex64::zero());
        assert!(permanent_directional_derivative(&a, &ComplexMatrix::zeros(2, 2)).is_err());
    }
}
