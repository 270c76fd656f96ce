//! Dense complex and Gaussian-integer matrices.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{Float, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::eigen;
use crate::{Complex64, Error, Result};

/// Default relative tolerance for [`ComplexMatrix::is_psd`] and
/// [`ComplexMatrix::has_nonnegative_entries`].
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance on `|‖v‖₂ - 1|` accepted by constructors that require a unit vector.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Gaussian integer with arbitrary-precision parts.
pub type GaussianInt = Complex<BigInt>;

/// Largest magnitude below which every integer is exactly representable in an `f64`.
const F64_EXACT_LIMIT: u64 = 1 << 53;

/// Dense row-major complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if entries.len() != rows * cols {
            return Err(Error::EntryCount {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        if let Some(k) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Real-valued matrix from row-major data.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    // Infallible constructor for internal callers that already hold valid data.
    pub(crate) fn from_parts(rows: usize, cols: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = alloc::vec![Complex64::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self::from_parts(n, n, entries)
    }

    /// The all-ones matrix `E`.
    pub fn ones(n: usize) -> Self {
        Self::from_parts(n, n, alloc::vec![Complex64::new(1.0, 0.0); n * n])
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(rows, cols, alloc::vec![Complex64::zero(); rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.rows.min(self.cols)).map(move |i| self.get(i, i))
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn conj_transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).conj());
            }
        }
        Self::from_parts(self.cols, self.rows, entries)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_parts(
            self.rows,
            self.cols,
            self.entries.iter().map(|z| z * c).collect(),
        )
    }

    /// `self + t * other`, entry-wise.
    pub fn add_scaled(&self, t: f64, other: &Self) -> Result<Self> {
        self.require_same_dims(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b * t)
            .collect();
        Self::new(self.rows, self.cols, entries)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        Float::sqrt(self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    pub fn mat_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    fn require_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() == other.dims() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            })
        }
    }

    /// `X* X`. The lower triangle is the conjugate mirror of the upper one and
    /// the diagonal is real, so the result is exactly Hermitian.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut out = alloc::vec![Complex64::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::zero();
                for k in 0..self.rows {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                if i == j {
                    acc.im = 0.0;
                }
                out[i * n + j] = acc;
                out[j * n + i] = acc.conj();
            }
        }
        Self::from_parts(n, n, out)
    }

    /// Entry-wise (Schur) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.require_same_dims(other)?;
        Ok(Self::from_parts(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a * b)
                .collect(),
        ))
    }

    /// Largest entry-wise deviation `|a_ij - conj(a_ji)|` and where it occurs.
    pub fn hermitian_defect(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_defect().0 <= tol * self.max_abs()
    }

    pub(crate) fn require_hermitian(&self, tol: f64) -> Result<usize> {
        let n = self.require_square()?;
        let (dev, row, col) = self.hermitian_defect();
        if dev > tol * self.max_abs() {
            return Err(Error::NotHermitian {
                row,
                col,
                deviation: dev,
            });
        }
        Ok(n)
    }

    /// Membership test for the Hermitian PSD cone, with a witness on failure.
    ///
    /// Hermiticity is checked entry-wise against `tol * max|a_ij|`; the
    /// smallest eigenvalue (full Jacobi decomposition) must be at least
    /// `-tol * ‖A‖₂`.
    pub fn is_psd(&self, tol: f64) -> PsdReport {
        if !self.is_square() {
            return PsdReport::fail(
                f64::NAN,
                PsdWitness::NotSquare {
                    rows: self.rows,
                    cols: self.cols,
                },
            );
        }
        let (dev, row, col) = self.hermitian_defect();
        if dev > tol * self.max_abs() {
            return PsdReport::fail(
                f64::NAN,
                PsdWitness::NotHermitian {
                    row,
                    col,
                    deviation: dev,
                },
            );
        }
        let eigenvalues = eigen::hermitian_eigenvalues(&self.hermitian_part());
        let min = eigenvalues.first().copied().unwrap_or(0.0);
        let spectral_norm = eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let bound = -tol * spectral_norm;
        if min < bound {
            PsdReport::fail(
                min,
                PsdWitness::NegativeEigenvalue {
                    eigenvalue: min,
                    bound,
                },
            )
        } else {
            PsdReport {
                psd: true,
                min_eigenvalue: min,
                witness: None,
            }
        }
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        Self::from_parts(
            n,
            n,
            (0..n * n)
                .map(|k| {
                    let (i, j) = (k / n, k % n);
                    (self.get(i, j) + self.get(j, i).conj()) * 0.5
                })
                .collect(),
        )
    }

    /// Every entry has `|imag| <= tol·m` and `real >= -tol·m`, with `m = max|a_ij|`.
    pub fn has_nonnegative_entries(&self, tol: f64) -> bool {
        self.first_negative_entry(tol).is_none()
    }

    pub(crate) fn first_negative_entry(&self, tol: f64) -> Option<(usize, usize)> {
        let slack = tol * self.max_abs();
        self.entries
            .iter()
            .position(|z| z.im.abs() > slack || z.re < -slack)
            .map(|k| (k / self.cols, k % self.cols))
    }

    /// Entry-wise real part.
    pub fn real_part(&self) -> Self {
        Self::from_parts(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .map(|z| Complex64::new(z.re, 0.0))
                .collect(),
        )
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|z| format!("{z:.6}")).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Outcome of [`ComplexMatrix::is_psd`].
#[derive(Clone, Debug, PartialEq)]
pub struct PsdReport {
    pub psd: bool,
    /// `NaN` when the test stopped before the eigendecomposition.
    pub min_eigenvalue: f64,
    pub witness: Option<PsdWitness>,
}

impl PsdReport {
    fn fail(min_eigenvalue: f64, witness: PsdWitness) -> Self {
        Self {
            psd: false,
            min_eigenvalue,
            witness: Some(witness),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PsdWitness {
    NotSquare {
        rows: usize,
        cols: usize,
    },
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },
    NegativeEigenvalue {
        eigenvalue: f64,
        bound: f64,
    },
}

impl fmt::Display for PsdWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsdWitness::NotSquare { rows, cols } => write!(f, "{rows}x{cols} is not square"),
            PsdWitness::NotHermitian {
                row,
                col,
                deviation,
            } => write!(
                f,
                "entry ({row}, {col}) breaks Hermitian symmetry by {deviation:e}"
            ),
            PsdWitness::NegativeEigenvalue { eigenvalue, bound } => {
                write!(f, "eigenvalue {eigenvalue:e} below {bound:e}")
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        RawMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let raw = RawMatrix::deserialize(deserializer)?;
        let entries = raw
            .entries
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(raw.rows, raw.cols, entries).map_err(serde::de::Error::custom)
    }
}

/// Dense row-major matrix over the Gaussian integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<GaussianInt>,
}

impl ExactMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<GaussianInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if entries.len() != rows * cols {
            return Err(Error::EntryCount {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Builds `re + i·im` from separate row-major integer parts.
    pub fn from_parts_i64(rows: usize, cols: usize, re: &[i64], im: &[i64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::EntryCount {
                expected: re.len(),
                actual: im.len(),
            });
        }
        let entries = re
            .iter()
            .zip(im)
            .map(|(&a, &b)| GaussianInt::new(BigInt::from(a), BigInt::from(b)))
            .collect();
        Self::new(rows, cols, entries)
    }

    pub fn from_real_i64(rows: usize, cols: usize, re: &[i64]) -> Result<Self> {
        Self::from_parts_i64(rows, cols, re, &alloc::vec![0; re.len()])
    }

    pub(crate) fn from_vec(rows: usize, cols: usize, entries: Vec<GaussianInt>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_vec(
            n,
            n,
            (0..n * n)
                .map(|k| {
                    if k / n == k % n {
                        GaussianInt::new(1.into(), 0.into())
                    } else {
                        GaussianInt::zero()
                    }
                })
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[GaussianInt] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &GaussianInt {
        &self.entries[i * self.cols + j]
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn conj_transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).conj());
            }
        }
        Self::from_vec(self.cols, self.rows, entries)
    }

    /// Exact `X* X`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut out = alloc::vec![GaussianInt::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = GaussianInt::zero();
                for k in 0..self.rows {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                out[j * n + i] = acc.conj();
                out[i * n + j] = acc;
            }
        }
        Self::from_vec(n, n, out)
    }

    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(Self::from_vec(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a * b)
                .collect(),
        ))
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (i..self.cols).all(|j| *self.get(i, j) == self.get(j, i).conj()))
    }

    /// Every entry is a nonnegative rational integer.
    pub fn has_nonnegative_entries(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.im.is_zero() && z.re.sign() != num_bigint::Sign::Minus)
    }

    /// True when every component has magnitude below 2^53, so that
    /// [`to_complex`](Self::to_complex) is lossless.
    pub fn fits_f64_exactly(&self) -> bool {
        let lim = BigInt::from(F64_EXACT_LIMIT);
        self.entries
            .iter()
            .all(|z| z.re.magnitude() < lim.magnitude() && z.im.magnitude() < lim.magnitude())
    }

    /// Nearest-double conversion; exact when [`fits_f64_exactly`](Self::fits_f64_exactly).
    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_parts(
            self.rows,
            self.cols,
            self.entries.iter().map(gaussian_to_complex).collect(),
        )
    }
}

pub(crate) fn bigint_to_f64(x: &BigInt) -> f64 {
    x.to_f64()
        .unwrap_or(if x.sign() == num_bigint::Sign::Minus {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        })
}

pub fn gaussian_to_complex(z: &GaussianInt) -> Complex64 {
    Complex64::new(bigint_to_f64(&z.re), bigint_to_f64(&z.im))
}

/// A matrix on either arithmetic backend. Operations that combine two
/// operands refuse to mix backends.
#[derive(Clone, Debug, PartialEq)]
pub enum Matrix {
    Float(ComplexMatrix),
    Exact(ExactMatrix),
}

impl Matrix {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Matrix::Float(m) => m.dims(),
            Matrix::Exact(m) => m.dims(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Matrix::Exact(_))
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        match self {
            Matrix::Float(m) => m.clone(),
            Matrix::Exact(m) => m.to_complex(),
        }
    }

    /// Converts an exact matrix to floating point; floating input is unchanged.
    pub fn into_float(self) -> Self {
        match self {
            Matrix::Exact(m) => Matrix::Float(m.to_complex()),
            f => f,
        }
    }

    pub fn gram(&self) -> Self {
        match self {
            Matrix::Float(m) => Matrix::Float(m.gram()),
            Matrix::Exact(m) => Matrix::Exact(m.gram()),
        }
    }

    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Matrix::Float(a), Matrix::Float(b)) => a.hadamard(b).map(Matrix::Float),
            (Matrix::Exact(a), Matrix::Exact(b)) => a.hadamard(b).map(Matrix::Exact),
            _ => Err(Error::BackendMismatch),
        }
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        match self {
            Matrix::Float(m) => m.require_square(),
            Matrix::Exact(m) => m.require_square(),
        }
    }

    /// PSD membership. Exact matrices must be exactly Hermitian; the
    /// eigenvalue test runs on the double-precision image.
    pub fn is_psd(&self, tol: f64) -> PsdReport {
        if let Matrix::Exact(m) = self {
            if m.is_square() && !m.is_hermitian() {
                let f = m.to_complex();
                let (deviation, row, col) = f.hermitian_defect();
                return PsdReport::fail(
                    f64::NAN,
                    PsdWitness::NotHermitian {
                        row,
                        col,
                        deviation,
                    },
                );
            }
        }
        self.to_complex().is_psd(tol)
    }

    /// Order of the matrix if it is PSD at the default tolerance.
    pub fn require_psd(&self) -> Result<usize> {
        let n = self.require_square()?;
        match self.is_psd(DEFAULT_TOL).witness {
            None => Ok(n),
            Some(w) => Err(Error::NotPsd(w)),
        }
    }

    pub fn has_nonnegative_entries(&self, tol: f64) -> bool {
        match self {
            Matrix::Float(m) => m.has_nonnegative_entries(tol),
            Matrix::Exact(m) => m.has_nonnegative_entries(),
        }
    }
}

impl From<ComplexMatrix> for Matrix {
    fn from(m: ComplexMatrix) -> Self {
        Matrix::Float(m)
    }
}

impl From<ExactMatrix> for Matrix {
    fn from(m: ExactMatrix) -> Self {
        Matrix::Exact(m)
    }
}

/// Dense complex vector with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if let Some(k) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { row: k, col: 0 });
        }
        Ok(Self { entries })
    }

    /// Scales to unit 2-norm; the zero vector is rejected.
    pub fn normalized(entries: Vec<Complex64>) -> Result<Self> {
        let v = Self::new(entries)?;
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            entries: v.entries.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `(1, ..., 1) / sqrt(n)`.
    pub fn all_equal(n: usize) -> Self {
        let c = 1.0 / Float::sqrt(n as f64);
        Self {
            entries: alloc::vec![Complex64::new(c, 0.0); n],
        }
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut entries = alloc::vec![Complex64::zero(); n];
        entries[k] = Complex64::new(1.0, 0.0);
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        Float::sqrt(self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    pub(crate) fn require_unit(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            Err(Error::NotNormalized { norm })
        } else {
            Ok(())
        }
    }
}

impl Serialize for ComplexVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        let raw: Vec<[f64; 2]> = self.entries.iter().map(|z| [z.re, z.im]).collect();
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(deserializer)?;
        ComplexVector::new(
            raw.into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// The rank-≤2 correlation matrix `B(ε) = M*(ε) M(ε)` built from a unit vector `v`:
///
/// ```text
/// b_ij = (1 + ε² conj(v_i) v_j) / (α_i α_j),   α_i = sqrt(1 + ε² |v_i|²)
/// ```
///
/// The diagonal is set to exactly 1 and the lower triangle mirrors the upper,
/// so `B(0) = E` bit-for-bit.
pub fn build_correlation_b(v: &ComplexVector, eps: f64) -> Result<ComplexMatrix> {
    v.require_unit()?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::EpsilonOutOfRange {
            eps,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let n = v.dim();
    let e2 = eps * eps;
    let alpha: Vec<f64> = v
        .entries()
        .iter()
        .map(|z| Float::sqrt(1.0 + e2 * z.norm_sqr()))
        .collect();
    let mut out = alloc::vec![Complex64::zero(); n * n];
    for i in 0..n {
        out[i * n + i] = Complex64::new(1.0, 0.0);
        for j in i + 1..n {
            let vi = v.entries()[i];
            let vj = v.entries()[j];
            let b = (Complex64::new(1.0, 0.0) + vi.conj() * vj * e2) / (alpha[i] * alpha[j]);
            out[i * n + j] = b;
            out[j * n + i] = b.conj();
        }
    }
    Ok(ComplexMatrix::from_parts(n, n, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert_eq!(
            ComplexMatrix::new(2, 2, alloc::vec![c(0.0, 0.0); 3]),
            Err(Error::EntryCount {
                expected: 4,
                actual: 3
            })
        );
        assert_eq!(
            ComplexMatrix::new(1, 2, alloc::vec![c(0.0, 0.0), c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { row: 0, col: 1 })
        );
        assert_eq!(
            ComplexMatrix::new(0, 2, alloc::vec![]),
            Err(Error::EmptyMatrix)
        );
    }

    #[test]
    fn gram_of_projector_row() {
        let x = ComplexMatrix::from_real(1, 2, &[1.0, 0.0]).unwrap();
        assert_eq!(
            x.gram(),
            ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap()
        );
    }

    #[test]
    fn gram_of_complex_row() {
        let x = ComplexMatrix::new(1, 2, alloc::vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let expected = ComplexMatrix::new(
            2,
            2,
            alloc::vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert_eq!(x.gram(), expected);

        let xe = ExactMatrix::from_parts_i64(1, 2, &[1, 0], &[0, 1]).unwrap();
        assert_eq!(xe.gram().to_complex(), expected);
        assert!(xe.gram().is_hermitian());
    }

    #[test]
    fn hadamard_masks_and_checks_dims() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let i = ComplexMatrix::identity(2);
        assert_eq!(
            a.hadamard(&i).unwrap(),
            ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 4.0]).unwrap()
        );
        assert_eq!(a.hadamard(&ComplexMatrix::ones(2)).unwrap(), a);
        assert!(matches!(
            a.hadamard(&ComplexMatrix::ones(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            Matrix::Float(a).hadamard(&Matrix::Exact(ExactMatrix::identity(2))),
            Err(Error::BackendMismatch)
        );
    }

    #[test]
    fn correlation_b_at_zero_is_all_ones() {
        let v = ComplexVector::normalized(alloc::vec![c(0.3, -0.2), c(1.0, 0.5), c(-0.7, 0.0)])
            .unwrap();
        assert_eq!(
            build_correlation_b(&v, 0.0).unwrap(),
            ComplexMatrix::ones(3)
        );
    }

    #[test]
    fn correlation_b_closed_form() {
        let v = ComplexVector::from_real(&[1.0, 0.0]).unwrap();
        let b = build_correlation_b(&v, 1.0).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(b.get(0, 0), c(1.0, 0.0));
        assert_eq!(b.get(1, 1), c(1.0, 0.0));
        assert!((b.get(0, 1) - c(s, 0.0)).norm() < 1e-15);
        assert!((b.get(1, 0) - c(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn correlation_b_rejects_unnormalized_and_zero() {
        let v = ComplexVector::from_real(&[1.0, 1.0]).unwrap();
        assert!(matches!(
            build_correlation_b(&v, 0.1),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            ComplexVector::normalized(alloc::vec![c(0.0, 0.0); 3]),
            Err(Error::NotNormalized { .. })
        ));
        let u = ComplexVector::basis(2, 0);
        assert!(build_correlation_b(&u, -0.1).is_err());
    }

    #[test]
    fn psd_examples() {
        assert!(ComplexMatrix::identity(4).is_psd(DEFAULT_TOL).psd);
        let r = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0])
            .unwrap()
            .is_psd(DEFAULT_TOL);
        assert!(!r.psd);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-12);
        assert!(matches!(
            r.witness,
            Some(PsdWitness::NegativeEigenvalue { .. })
        ));

        let skew = ComplexMatrix::new(
            2,
            2,
            alloc::vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            skew.is_psd(DEFAULT_TOL).witness,
            Some(PsdWitness::NotHermitian { .. })
        ));
        assert!(matches!(
            ComplexMatrix::zeros(2, 3).is_psd(DEFAULT_TOL).witness,
            Some(PsdWitness::NotSquare { .. })
        ));
    }

    #[test]
    fn nonnegative_entries() {
        assert!(ComplexMatrix::ones(3).has_nonnegative_entries(DEFAULT_TOL));
        let m = ComplexMatrix::from_real(2, 2, &[1.0, -0.5, -0.5, 1.0]).unwrap();
        assert!(!m.has_nonnegative_entries(DEFAULT_TOL));
        let v =
            ComplexVector::normalized(alloc::vec![c(0.6, 0.0), c(-0.8, 0.0), c(0.1, 0.0)]).unwrap();
        assert!(build_correlation_b(&v, 0.1)
            .unwrap()
            .has_nonnegative_entries(DEFAULT_TOL));
        let z = ComplexMatrix::new(1, 1, alloc::vec![c(1.0, 0.1)]).unwrap();
        assert!(!z.has_nonnegative_entries(DEFAULT_TOL));
    }

    #[test]
    fn exact_round_trip_below_2_53() {
        let big = (1i64 << 53) - 1;
        let m = ExactMatrix::from_parts_i64(1, 3, &[big, -big, 7], &[0, 3, -big]).unwrap();
        assert!(m.fits_f64_exactly());
        let f = m.to_complex();
        assert_eq!(f.get(0, 0).re, big as f64);
        assert_eq!(f.get(0, 2).im, -big as f64);
        let over = ExactMatrix::from_real_i64(1, 1, &[1i64 << 53]).unwrap();
        assert!(!over.fits_f64_exactly());
    }

    #[test]
    fn matrix_serde_shape() {
        let m = ComplexMatrix::new(1, 2, alloc::vec![c(1.0, 0.0), c(0.5, -2.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"entries":[[1.0,0.0],[0.5,-2.0]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(
            serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"entries":[[1,0]]}"#)
                .is_err()
        );
    }
}
