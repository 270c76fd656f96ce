//! Seeded hill-climb for rank-2 Gram matrices `A = X* X` whose real-part
//! spectral ratio `λ_max(Re F_A) / per(A)` exceeds one.
//!
//! `X` is a `2 × n` Gaussian-integer matrix. Each restart draws its own
//! ChaCha8 stream from `seed ^ restart`, so restarts can run in any order
//! (or in parallel) and still produce the same certificates.
//!
//! Moves are screened with a double-precision objective. Whenever a move
//! would produce a new record above the threshold it is re-evaluated with the
//! exact backend, and only the exact value goes into the certificate.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conjectures::{
    check_conjecture3, check_conjecture4, lift_counterexample, CheckReport, LiftMode, LiftResult,
    REPORT_TOL,
};
use crate::matrices::{bigint_to_f64, ExactMatrix, Matrix};
use crate::permanent::{build_fa_by_columns, Value};
use crate::random::gaussian_int_matrix;
use crate::spectra::lambda_max_real_sym;
use crate::{par_map, Error, Result};

pub const CERTIFICATE_FORMAT: &str = "permlab-cert-1";
pub const MIN_N: usize = 2;
pub const MAX_N: usize = 20;
pub const DEFAULT_ENTRY_BOUND: i64 = 64;
pub const DEFAULT_MAX_STEP: i64 = 8;

/// Redraws allowed when a random start has `per(A) = 0`.
const MAX_REDRAWS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub n: usize,
    /// Bound on `|Re x|` and `|Im x|` for every entry of `X`.
    pub entry_bound: i64,
    pub seed: u64,
    pub max_iters: usize,
    pub restarts: usize,
    /// Certificates are emitted only for ratios strictly above this value
    /// (and in any case only for ratios above `1 + REPORT_TOL`).
    pub objective_threshold: f64,
    /// Largest change of a single component per move.
    pub max_step: i64,
    /// Start every restart from this `2 × n` matrix instead of a random one.
    pub warm_start: Option<ExactMatrix>,
    /// Attach a real-mode lift to each certificate.
    pub lift: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n: 16,
            entry_bound: DEFAULT_ENTRY_BOUND,
            seed: 0,
            max_iters: 1000,
            restarts: 1,
            objective_threshold: 1.0,
            max_step: DEFAULT_MAX_STEP,
            warm_start: None,
            lift: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(MIN_N..=MAX_N).contains(&self.n) {
            return bad(alloc::format!(
                "n = {} is outside {MIN_N}..={MAX_N}",
                self.n
            ));
        }
        if self.entry_bound < 1 {
            return bad(alloc::format!(
                "entry_bound = {} must be positive",
                self.entry_bound
            ));
        }
        if self.max_step < 1 {
            return bad(alloc::format!(
                "max_step = {} must be positive",
                self.max_step
            ));
        }
        if !self.objective_threshold.is_finite() {
            return bad("objective_threshold must be finite".to_string());
        }
        if let Some(x) = &self.warm_start {
            if x.dims() != (2, self.n) {
                return bad(alloc::format!(
                    "warm start is {}x{}, expected 2x{}",
                    x.rows(),
                    x.cols(),
                    self.n
                ));
            }
            let fits = x.entries().iter().all(|z| {
                [&z.re, &z.im]
                    .iter()
                    .all(|c| c.to_i64().is_some_and(|v| v.abs() <= self.entry_bound))
            });
            if !fits {
                return bad(alloc::format!(
                    "warm start has an entry outside the bound {}",
                    self.entry_bound
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedProvenance {
    pub seed: u64,
    pub restart: usize,
    pub iteration: usize,
}

/// A rank-2 instance with `λ_max(Re F_A) > per(A)`, self-contained enough to
/// be re-verified from its serialized form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub format_version: String,
    pub n: usize,
    pub x_real: Vec<Vec<i64>>,
    pub x_imag: Vec<Vec<i64>>,
    /// Exact `per(A)` in decimal.
    pub per_a: String,
    pub per_a_f64: f64,
    pub lambda_max_real: f64,
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<LiftResult>,
    pub seed_provenance: SeedProvenance,
}

impl Certificate {
    pub fn x(&self) -> Result<ExactMatrix> {
        if self.x_real.len() != 2 || self.x_imag.len() != 2 {
            return Err(Error::InvalidConfig(
                "certificate X must have two rows".to_string(),
            ));
        }
        let re: Vec<i64> = self.x_real.concat();
        let im: Vec<i64> = self.x_imag.concat();
        if re.len() != 2 * self.n || im.len() != 2 * self.n {
            return Err(Error::EntryCount {
                expected: 2 * self.n,
                actual: re.len().min(im.len()),
            });
        }
        ExactMatrix::from_parts_i64(2, self.n, &re, &im)
    }

    /// `A = X* X`.
    pub fn a(&self) -> Result<ExactMatrix> {
        Ok(self.x()?.gram())
    }
}

/// Exact evaluation of the search objective.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub per_a: BigInt,
    pub lambda_max_real: f64,
    pub ratio: f64,
}

/// A random `2 × n` Gaussian-integer matrix with components in `[-bound, bound]`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, bound: i64) -> ExactMatrix {
    gaussian_int_matrix(rng, 2, n, bound)
}

/// `λ_max(Re F_A) / per(A)` for `A = X* X`, with `per(A)` and `F_A` exact.
pub fn objective(x: &ExactMatrix) -> Result<f64> {
    Ok(evaluate(x)?.ratio)
}

/// Exact objective together with its two ingredients.
pub fn evaluate(x: &ExactMatrix) -> Result<Evaluation> {
    let fa = build_fa_by_columns(&Matrix::Exact(x.gram()))?;
    let per_a = match &fa.source_permanent.value {
        Value::Exact(p) => p.re.clone(),
        Value::Float(_) => unreachable!("exact input yields an exact permanent"),
    };
    if per_a.is_zero() {
        return Err(Error::DegenerateInstance);
    }
    let lambda = lambda_max_real_sym(&fa.to_complex())?.eigenvalue;
    Ok(Evaluation {
        ratio: lambda / bigint_to_f64(&per_a),
        per_a,
        lambda_max_real: lambda,
    })
}

/// Double-precision objective used to screen moves.
fn screen(x: &Components) -> Result<f64> {
    let a = Matrix::Float(x.to_exact().to_complex().gram());
    let fa = build_fa_by_columns(&a)?;
    let per_a = fa.source_permanent.re();
    if per_a <= 0.0 {
        return Err(Error::DegenerateInstance);
    }
    Ok(lambda_max_real_sym(&fa.to_complex())?.eigenvalue / per_a)
}

/// `X` as flat `i64` components, row-major.
#[derive(Clone, Debug, PartialEq)]
struct Components {
    n: usize,
    re: Vec<i64>,
    im: Vec<i64>,
}

impl Components {
    fn from_exact(x: &ExactMatrix) -> Self {
        let to_i64 = |c: &BigInt| c.to_i64().expect("validated entry bound");
        Self {
            n: x.cols(),
            re: x.entries().iter().map(|z| to_i64(&z.re)).collect(),
            im: x.entries().iter().map(|z| to_i64(&z.im)).collect(),
        }
    }

    fn to_exact(&self) -> ExactMatrix {
        ExactMatrix::from_parts_i64(2, self.n, &self.re, &self.im).expect("2 x n components")
    }

    fn rows(v: &[i64], n: usize) -> Vec<Vec<i64>> {
        v.chunks(n).map(<[i64]>::to_vec).collect()
    }
}

/// Result of one restart.
#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub restart: usize,
    pub certificates: Vec<Certificate>,
    /// Best screened ratio seen during the restart.
    pub best_ratio: f64,
    pub accepted_moves: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    /// Certificates in canonical order: by restart, then by iteration.
    pub certificates: Vec<Certificate>,
    pub restarts: Vec<RestartOutcome>,
}

impl SearchOutcome {
    pub fn best_ratio(&self) -> f64 {
        self.restarts
            .iter()
            .map(|r| r.best_ratio)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs every restart of `config` and collects the certificates in
/// canonical order.
pub fn hill_climb(config: &SearchConfig) -> Result<SearchOutcome> {
    config.validate()?;
    let restarts: Vec<RestartOutcome> = par_map(config.restarts, |r| run_restart(config, r))
        .into_iter()
        .collect::<Result<_>>()?;
    let certificates = restarts
        .iter()
        .flat_map(|r| r.certificates.iter().cloned())
        .collect();
    Ok(SearchOutcome {
        certificates,
        restarts,
    })
}

/// Runs a single restart. `hill_climb` is the union of these over
/// `0..config.restarts`.
pub fn run_restart(config: &SearchConfig, restart: usize) -> Result<RestartOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ restart as u64);

    let (mut x, mut current) = match &config.warm_start {
        Some(w) => {
            let x = Components::from_exact(w);
            let value = screen(&x)?;
            (x, value)
        }
        None => {
            let mut attempt = 0;
            loop {
                let x = Components::from_exact(&random_instance(
                    &mut rng,
                    config.n,
                    config.entry_bound,
                ));
                match screen(&x) {
                    Ok(value) => break (x, value),
                    Err(Error::DegenerateInstance) if attempt < MAX_REDRAWS => attempt += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    };

    let mut outcome = RestartOutcome {
        restart,
        certificates: Vec::new(),
        best_ratio: current,
        accepted_moves: 0,
    };
    let mut record = config.objective_threshold;
    let try_emit = |x: &Components,
                    screened: f64,
                    iteration: usize,
                    record: &mut f64|
     -> Result<Option<Certificate>> {
        if screened <= *record {
            return Ok(None);
        }
        let cert = certify(config, x, restart, iteration)?;
        // Ratios within rounding of 1 are not violations whatever the threshold.
        if cert.ratio > *record && cert.ratio > 1.0 + REPORT_TOL {
            *record = cert.ratio;
            Ok(Some(cert))
        } else {
            Ok(None)
        }
    };

    if let Some(cert) = try_emit(&x, current, 0, &mut record)? {
        outcome.certificates.push(cert);
    }

    let slots = 2 * config.n;
    for iteration in 1..=config.max_iters {
        let slot = rng.random_range(0..slots);
        let imaginary = rng.random_bool(0.5);
        let step = rng.random_range(1..=config.max_step);
        let delta = if rng.random_bool(0.5) { step } else { -step };

        let mut candidate = x.clone();
        let component = if imaginary {
            &mut candidate.im[slot]
        } else {
            &mut candidate.re[slot]
        };
        let moved = *component + delta;
        if moved.abs() > config.entry_bound {
            continue;
        }
        *component = moved;

        let value = match screen(&candidate) {
            Ok(v) => v,
            Err(Error::DegenerateInstance) => continue,
            Err(e) => return Err(e),
        };
        if value < current {
            continue;
        }
        x = candidate;
        current = value;
        outcome.accepted_moves += 1;
        outcome.best_ratio = outcome.best_ratio.max(value);
        if let Some(cert) = try_emit(&x, current, iteration, &mut record)? {
            outcome.certificates.push(cert);
        }
    }
    Ok(outcome)
}

fn certify(
    config: &SearchConfig,
    x: &Components,
    restart: usize,
    iteration: usize,
) -> Result<Certificate> {
    let exact = x.to_exact();
    let eval = evaluate(&exact)?;
    let lift = if config.lift {
        match lift_counterexample(&Matrix::Exact(exact.gram()), LiftMode::Real) {
            Ok(l) => Some(l),
            Err(Error::NoSpectralViolation { .. } | Error::NoViolatingEpsilon { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(Certificate {
        format_version: CERTIFICATE_FORMAT.to_string(),
        n: x.n,
        x_real: Components::rows(&x.re, x.n),
        x_imag: Components::rows(&x.im, x.n),
        per_a: eval.per_a.to_string(),
        per_a_f64: bigint_to_f64(&eval.per_a),
        lambda_max_real: eval.lambda_max_real,
        ratio: eval.ratio,
        lift,
        seed_provenance: SeedProvenance {
            seed: config.seed,
            restart,
            iteration,
        },
    })
}

/// Outcome of re-verifying a certificate from its serialized fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub c4: CheckReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3: Option<CheckReport>,
}

fn close(stored: f64, recomputed: f64) -> bool {
    (stored - recomputed).abs() <= REPORT_TOL * stored.abs().max(recomputed.abs())
}

fn mismatch(field: &'static str, stored: impl ToString, recomputed: impl ToString) -> Error {
    Error::CertificateMismatch {
        field,
        stored: stored.to_string(),
        recomputed: recomputed.to_string(),
    }
}

/// Recomputes `per(A)`, `λ_max(Re F_A)` and the ratio from `X`, compares them
/// with the stored values and re-runs the C3 check on an attached lift.
pub fn verify_certificate(cert: &Certificate) -> Result<Verification> {
    if cert.format_version != CERTIFICATE_FORMAT {
        return Err(mismatch(
            "format_version",
            &cert.format_version,
            CERTIFICATE_FORMAT,
        ));
    }
    let a = cert.a()?;
    let c4 = check_conjecture4(&Matrix::Exact(a.clone()))?;
    let per_a = c4.rhs_exact.clone().unwrap_or_default();
    if per_a != cert.per_a {
        return Err(mismatch("per_a", &cert.per_a, per_a));
    }
    if !close(cert.per_a_f64, c4.rhs) {
        return Err(mismatch("per_a_f64", cert.per_a_f64, c4.rhs));
    }
    if !close(cert.lambda_max_real, c4.lhs) {
        return Err(mismatch("lambda_max_real", cert.lambda_max_real, c4.lhs));
    }
    if !close(cert.ratio, c4.ratio()) {
        return Err(mismatch("ratio", cert.ratio, c4.ratio()));
    }

    let c3 = match &cert.lift {
        None => None,
        Some(lift) => {
            if lift.b.dims() != a.dims() {
                return Err(mismatch(
                    "lift.b",
                    alloc::format!("{:?}", lift.b.dims()),
                    alloc::format!("{:?}", a.dims()),
                ));
            }
            let report = check_conjecture3(
                &Matrix::Float(a.to_complex()),
                &Matrix::Float(lift.b.clone()),
            )?;
            if !close(lift.per_ab, report.lhs) {
                return Err(mismatch("lift.per_ab", lift.per_ab, report.lhs));
            }
            Some(report)
        }
    };
    Ok(Verification { c4, c3 })
}
