//! Checkers for the four permanent inequalities and the lift from a
//! spectral violation to a Hadamard-product violation.
//!
//! | id | inequality                                   | hypothesis            |
//! |----|----------------------------------------------|-----------------------|
//! | C1 | `per(A∘B) <= per(A) · prod_i b_ii`           | `A, B` Hermitian PSD  |
//! | C2 | `λ_max(F_A) <= per(A)`                       | `A` Hermitian PSD     |
//! | C3 | same as C1                                   | additionally `B >= 0` |
//! | C4 | `λ_max(Re F_A) <= per(A)`                    | `A` Hermitian PSD     |
//!
//! The lift uses the second-order expansion
//! `per(A∘B(ε)) = per(A) + ε² (v* F_A v - per(A)) + O(ε⁴)`: if `v* F_A v`
//! exceeds `per(A)`, some small `ε` makes `B(ε)` a C1 (or, with real `v`,
//! a C3) counterexample.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::digest::inputs_digest;
use crate::matrices::{
    bigint_to_f64, build_correlation_b, ComplexMatrix, ComplexVector, GaussianInt, Matrix,
    DEFAULT_TOL,
};
use crate::permanent::{build_fa_by_columns, ryser_float, FaMatrix, Value};
use crate::spectra::{lambda_max_hermitian, lambda_max_real_sym, rayleigh_quotient};
use crate::{par_map, Backend, Error, Result};

pub const REPORT_FORMAT: &str = "permlab-report-1";
pub const LIFT_FORMAT: &str = "permlab-lift-1";

/// Relative slack separating a violation from rounding noise.
pub const REPORT_TOL: f64 = 1e-9;

/// Exponents of the lift grid `ε = 2^-k`.
pub const LIFT_GRID_MAX_EXPONENT: i32 = 20;

/// Largest `ε` accepted by [`taylor_residual`].
pub const TAYLOR_MAX_EPS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConjectureId {
    C1,
    C2,
    C3,
    C4,
}

impl ConjectureId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConjectureId::C1 => "c1",
            ConjectureId::C2 => "c2",
            ConjectureId::C3 => "c3",
            ConjectureId::C4 => "c4",
        }
    }
}

impl fmt::Display for ConjectureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for ConjectureId {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "c1" => Ok(ConjectureId::C1),
            "c2" => Ok(ConjectureId::C2),
            "c3" => Ok(ConjectureId::C3),
            "c4" => Ok(ConjectureId::C4),
            other => Err(alloc::format!("unknown conjecture id {other:?}")),
        }
    }
}

/// Outcome of one inequality check, `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub format_version: String,
    pub conjecture: ConjectureId,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; computed exactly before rounding on the exact backend.
    pub margin: f64,
    pub holds: bool,
    /// `|margin|` is within the report tolerance.
    pub near_zero: bool,
    pub backend: Backend,
    pub inputs_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs_exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs_exact: Option<String>,
}

impl CheckReport {
    fn new(
        conjecture: ConjectureId,
        lhs: f64,
        rhs: f64,
        margin: f64,
        backend: Backend,
        inputs: &[&Matrix],
    ) -> Self {
        let tol = REPORT_TOL * lhs.abs().max(rhs.abs());
        Self {
            format_version: REPORT_FORMAT.to_string(),
            conjecture,
            lhs,
            rhs,
            margin,
            holds: margin >= -tol,
            near_zero: margin.abs() <= tol,
            backend,
            inputs_digest: inputs_digest(inputs),
            lhs_exact: None,
            rhs_exact: None,
        }
    }

    /// `lhs / rhs`.
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

fn check_same_order(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    Ok(())
}

fn hadamard_check(id: ConjectureId, a: &Matrix, b: &Matrix) -> Result<CheckReport> {
    let ab = a.hadamard(b)?;
    match (a, b, &ab) {
        (Matrix::Exact(ea), Matrix::Exact(eb), Matrix::Exact(eab)) => {
            let lhs = crate::permanent::ryser_exact(eab)?;
            let per_a = crate::permanent::ryser_exact(ea)?;
            let diag: GaussianInt = eb.diagonal_product();
            let rhs = per_a * diag;
            let margin = &rhs.re - &lhs.re;
            let mut report = CheckReport::new(
                id,
                bigint_to_f64(&lhs.re),
                bigint_to_f64(&rhs.re),
                bigint_to_f64(&margin),
                Backend::ExactRyser,
                &[a, b],
            );
            report.lhs_exact = Some(lhs.re.to_string());
            report.rhs_exact = Some(rhs.re.to_string());
            Ok(report)
        }
        (Matrix::Float(fa), Matrix::Float(fb), Matrix::Float(fab)) => {
            let lhs = ryser_float(fab)?.re;
            let diag: f64 = fb.diagonal().map(|z| z.re).product();
            let rhs = ryser_float(fa)?.re * diag;
            Ok(CheckReport::new(
                id,
                lhs,
                rhs,
                rhs - lhs,
                Backend::FloatRyser,
                &[a, b],
            ))
        }
        _ => Err(Error::BackendMismatch),
    }
}

/// `per(A∘B) <= per(A) · prod_i b_ii` for Hermitian PSD `A`, `B`.
pub fn check_conjecture1(a: &Matrix, b: &Matrix) -> Result<CheckReport> {
    check_same_order(a, b)?;
    a.require_psd()?;
    b.require_psd()?;
    hadamard_check(ConjectureId::C1, a, b)
}

/// The C1 inequality restricted to `B` with nonnegative entries. A `B`
/// outside that class is a precondition error, not a violation.
pub fn check_conjecture3(a: &Matrix, b: &Matrix) -> Result<CheckReport> {
    check_same_order(a, b)?;
    a.require_psd()?;
    b.require_psd()?;
    require_nonnegative(b)?;
    hadamard_check(ConjectureId::C3, a, b)
}

fn require_nonnegative(b: &Matrix) -> Result<()> {
    let first_bad = match b {
        Matrix::Float(m) => m.first_negative_entry(DEFAULT_TOL),
        Matrix::Exact(m) => {
            if m.has_nonnegative_entries() {
                None
            } else {
                let n = m.cols();
                m.entries()
                    .iter()
                    .position(|z| !z.im.is_zero() || z.re < BigInt::zero())
                    .map(|k| (k / n, k % n))
            }
        }
    };
    match first_bad {
        None => Ok(()),
        Some((row, col)) => Err(Error::NegativeEntries { row, col }),
    }
}

fn spectral_setup(a: &Matrix) -> Result<FaMatrix> {
    let n = a.require_psd()?;
    if n < 2 {
        return Err(Error::TooSmall {
            op: "spectral check",
            n,
            min: 2,
        });
    }
    build_fa_by_columns(a)
}

fn spectral_report(id: ConjectureId, a: &Matrix, fa: &FaMatrix, lambda: f64) -> CheckReport {
    let rhs = fa.source_permanent.re();
    let mut report = CheckReport::new(
        id,
        lambda,
        rhs,
        rhs - lambda,
        fa.source_permanent.backend,
        &[a],
    );
    if let Value::Exact(p) = &fa.source_permanent.value {
        report.rhs_exact = Some(p.re.to_string());
    }
    report
}

/// `λ_max(F_A) <= per(A)`.
pub fn check_conjecture2(a: &Matrix) -> Result<CheckReport> {
    let fa = spectral_setup(a)?;
    let spectrum = lambda_max_hermitian(&fa.to_complex())?;
    Ok(spectral_report(
        ConjectureId::C2,
        a,
        &fa,
        spectrum.eigenvalue,
    ))
}

/// `λ_max(Re F_A) <= per(A)`.
pub fn check_conjecture4(a: &Matrix) -> Result<CheckReport> {
    let fa = spectral_setup(a)?;
    let spectrum = lambda_max_real_sym(&fa.to_complex())?;
    Ok(spectral_report(
        ConjectureId::C4,
        a,
        &fa,
        spectrum.eigenvalue,
    ))
}

/// Second-order expansion of `per(A∘B(ε))` around `ε = 0` for a fixed `(A, v)`.
/// Holds `F_A` so that several `ε` can be probed cheaply.
#[derive(Clone, Debug)]
pub struct TaylorProbe {
    a: ComplexMatrix,
    v: ComplexVector,
    per_a: f64,
    slope_term: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaylorResidual {
    /// `|per(A∘B(ε)) - per(A) - ε² (v* F_A v - per(A))|`
    pub residual: f64,
    /// `v* F_A v - per(A)`
    pub slope_term: f64,
}

impl TaylorProbe {
    pub fn new(a: &ComplexMatrix, v: &ComplexVector) -> Result<Self> {
        let m = Matrix::Float(a.clone());
        let n = m.require_psd()?;
        if v.dim() != n {
            return Err(Error::DimensionMismatch {
                left: a.dims(),
                right: (v.dim(), 1),
            });
        }
        v.require_unit()?;
        let fa = spectral_setup(&m)?;
        let per_a = fa.source_permanent.re();
        let slope_term = rayleigh_quotient(&fa.to_complex(), v)? - per_a;
        Ok(Self {
            a: a.clone(),
            v: v.clone(),
            per_a,
            slope_term,
        })
    }

    pub fn slope_term(&self) -> f64 {
        self.slope_term
    }

    pub fn per_a(&self) -> f64 {
        self.per_a
    }

    pub fn residual(&self, eps: f64) -> Result<TaylorResidual> {
        if !(0.0..=TAYLOR_MAX_EPS).contains(&eps) {
            return Err(Error::EpsilonOutOfRange {
                eps,
                lo: 0.0,
                hi: TAYLOR_MAX_EPS,
            });
        }
        let b = build_correlation_b(&self.v, eps)?;
        let per_ab = ryser_float(&self.a.hadamard(&b)?)?.re;
        Ok(TaylorResidual {
            residual: (per_ab - self.per_a - eps * eps * self.slope_term).abs(),
            slope_term: self.slope_term,
        })
    }
}

/// Remainder of the second-order expansion of `per(A∘B(ε))` at `ε`.
pub fn taylor_residual(a: &ComplexMatrix, v: &ComplexVector, eps: f64) -> Result<TaylorResidual> {
    TaylorProbe::new(a, v)?.residual(eps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftMode {
    /// `v` is the dominant eigenvector of `F_A`; targets C1.
    Complex,
    /// `v` is the real dominant eigenvector of `Re F_A`; targets C3.
    Real,
}

impl core::str::FromStr for LiftMode {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "complex" => Ok(LiftMode::Complex),
            "real" => Ok(LiftMode::Real),
            other => Err(alloc::format!("unknown lift mode {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub eps: f64,
    pub per_ab: f64,
}

/// A Hadamard-product counterexample `(A, B(ε*))` derived from a spectral one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftResult {
    pub format_version: String,
    pub mode: LiftMode,
    pub epsilon_star: f64,
    /// Spectral left-hand side that triggered the lift.
    pub lambda: f64,
    pub v: ComplexVector,
    pub b: ComplexMatrix,
    pub per_ab: f64,
    pub per_a: f64,
    /// `per_ab - per_a`
    pub violation: f64,
    pub scan_trace: Vec<ScanPoint>,
}

/// Turns a C2 (complex mode) or C4 (real mode) violation of `A` into a C1 or
/// C3 violation `(A, B(ε*))`.
///
/// Scans `ε = 2^-k, k = 0..=20` and keeps the grid point with the largest
/// violation beyond [`REPORT_TOL`]; ties go to the larger `ε`. In real mode
/// grid points whose `B(ε)` has a negative entry are skipped.
pub fn lift_counterexample(a: &Matrix, mode: LiftMode) -> Result<LiftResult> {
    let fa = spectral_setup(a)?;
    let f = fa.to_complex();
    let per_a = fa.source_permanent.re();
    let (spectrum, name) = match mode {
        LiftMode::Complex => (lambda_max_hermitian(&f)?, "c2"),
        LiftMode::Real => (lambda_max_real_sym(&f)?, "c4"),
    };
    let tol = REPORT_TOL * per_a.abs().max(spectrum.eigenvalue.abs());
    if per_a - spectrum.eigenvalue >= -tol {
        return Err(Error::NoSpectralViolation {
            conjecture: name,
            lhs: spectrum.eigenvalue,
            rhs: per_a,
        });
    }
    let v = spectrum.eigenvector;

    // B(ε) is inherently floating point, so A is taken to double precision here.
    let a_float = a.to_complex();
    let grid: Vec<f64> = (0..=LIFT_GRID_MAX_EXPONENT)
        .map(|k| 1.0 / (1u64 << k) as f64)
        .collect();
    let scanned = par_map(grid.len(), |k| -> Result<(ComplexMatrix, f64)> {
        let b = build_correlation_b(&v, grid[k])?;
        let per_ab = ryser_float(&a_float.hadamard(&b)?)?.re;
        Ok((b, per_ab))
    });

    let mut scan_trace = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64)> = None;
    for (k, item) in scanned.iter().enumerate() {
        let (b, per_ab) = item.as_ref().map_err(Clone::clone)?;
        scan_trace.push(ScanPoint {
            eps: grid[k],
            per_ab: *per_ab,
        });
        let violation = per_ab - per_a;
        if violation <= REPORT_TOL * per_a.abs().max(per_ab.abs()) {
            continue;
        }
        if mode == LiftMode::Real && !b.has_nonnegative_entries(DEFAULT_TOL) {
            continue;
        }
        if best.map_or(true, |(_, v)| violation > v) {
            best = Some((k, violation));
        }
    }

    let Some((k, violation)) = best else {
        return Err(Error::NoViolatingEpsilon {
            trace: scan_trace.iter().map(|p| (p.eps, p.per_ab)).collect(),
        });
    };
    let (b, per_ab) = scanned.into_iter().nth(k).expect("grid index")?;
    Ok(LiftResult {
        format_version: LIFT_FORMAT.to_string(),
        mode,
        epsilon_star: grid[k],
        lambda: spectrum.eigenvalue,
        v,
        b,
        per_ab,
        per_a,
        violation,
        scan_trace,
    })
}

impl crate::ExactMatrix {
    /// `prod_i a_ii`.
    pub fn diagonal_product(&self) -> GaussianInt {
        (0..self.rows().min(self.cols()))
            .fold(GaussianInt::new(BigInt::one(), BigInt::zero()), |acc, i| {
                acc * self.get(i, i)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ExactMatrix;
    use crate::{Complex64, ComplexMatrix};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_spectral_checks_are_tight() {
        let id = Matrix::Float(ComplexMatrix::identity(4));
        for report in [
            check_conjecture2(&id).unwrap(),
            check_conjecture4(&id).unwrap(),
        ] {
            assert!((report.lhs - 1.0).abs() < 1e-12);
            assert_eq!(report.rhs, 1.0);
            assert!(report.holds);
            assert!(report.near_zero);
        }
    }

    #[test]
    fn ones_b_saturates_c3() {
        let a = Matrix::Float(
            ComplexMatrix::new(
                2,
                2,
                alloc::vec![c(2.0, 0.0), c(0.5, 1.0), c(0.5, -1.0), c(3.0, 0.0)],
            )
            .unwrap(),
        );
        let r = check_conjecture3(&a, &Matrix::Float(ComplexMatrix::ones(2))).unwrap();
        assert!(r.margin.abs() <= 1e-12 * r.rhs);
        assert!(r.holds);
        assert_eq!(r.conjecture, ConjectureId::C3);
    }

    #[test]
    fn preconditions() {
        let not_psd = Matrix::Float(ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap());
        let id = Matrix::Float(ComplexMatrix::identity(2));
        assert!(matches!(
            check_conjecture1(&not_psd, &id),
            Err(Error::NotPsd(_))
        ));
        assert!(matches!(check_conjecture2(&not_psd), Err(Error::NotPsd(_))));
        assert!(matches!(
            check_conjecture1(&id, &Matrix::Float(ComplexMatrix::identity(3))),
            Err(Error::DimensionMismatch { .. })
        ));
        let negative_b =
            Matrix::Float(ComplexMatrix::from_real(2, 2, &[1.0, -0.5, -0.5, 1.0]).unwrap());
        assert!(matches!(
            check_conjecture3(&id, &negative_b),
            Err(Error::NegativeEntries { row: 0, col: 1 })
        ));
        assert!(check_conjecture1(&id, &negative_b).is_ok());
        assert_eq!(
            check_conjecture1(&Matrix::Exact(ExactMatrix::identity(2)), &id),
            Err(Error::BackendMismatch)
        );
    }

    #[test]
    fn exact_c1_matches_float() {
        let a = ExactMatrix::from_parts_i64(2, 2, &[2, 1, 1, 3], &[0, 1, -1, 0]).unwrap();
        let b = ExactMatrix::from_parts_i64(2, 2, &[1, 1, 1, 2], &[0, 0, 0, 0]).unwrap();
        let exact =
            check_conjecture1(&Matrix::Exact(a.clone()), &Matrix::Exact(b.clone())).unwrap();
        let float = check_conjecture1(
            &Matrix::Float(a.to_complex()),
            &Matrix::Float(b.to_complex()),
        )
        .unwrap();
        // per(A∘B) = 2·6 + |1+i|² = 14, per(A)·2 = (6 + 2)·2 = 16
        assert_eq!(exact.lhs_exact.as_deref(), Some("14"));
        assert_eq!(exact.rhs_exact.as_deref(), Some("16"));
        assert_eq!(exact.margin, 2.0);
        assert_eq!(float.margin, 2.0);
        assert_eq!(exact.backend, Backend::ExactRyser);
        assert_ne!(exact.inputs_digest, float.inputs_digest);
    }

    #[test]
    fn taylor_at_zero_is_exact() {
        let a = ComplexMatrix::new(
            2,
            2,
            alloc::vec![c(2.0, 0.0), c(0.5, 1.0), c(0.5, -1.0), c(3.0, 0.0)],
        )
        .unwrap();
        let v = ComplexVector::normalized(alloc::vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let r = taylor_residual(&a, &v, 0.0).unwrap();
        assert!(r.residual <= 1e-14);
        assert!(taylor_residual(&a, &v, 0.6).is_err());
    }

    #[test]
    fn lift_rejects_non_violators() {
        let id = Matrix::Float(ComplexMatrix::identity(3));
        assert!(matches!(
            lift_counterexample(&id, LiftMode::Real),
            Err(Error::NoSpectralViolation { .. })
        ));
        assert!(matches!(
            lift_counterexample(&Matrix::Float(ComplexMatrix::ones(3)), LiftMode::Complex),
            Err(Error::NoSpectralViolation { .. })
        ));
    }

    #[test]
    fn report_serde_round_trip() {
        let id = Matrix::Float(ComplexMatrix::identity(2));
        let r = check_conjecture1(&id, &id).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"format_version\":\"permlab-report-1\""));
        assert!(s.contains("\"conjecture\":\"c1\""));
        assert!(s.contains("\"backend\":\"float-ryser\""));
        let back: CheckReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
