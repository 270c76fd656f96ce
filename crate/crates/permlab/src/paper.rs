//! End-to-end reproduction of the 16x16 rank-2 counterexample.

use std::time::Instant;

use permlab_core::conjectures::{
    check_conjecture1, check_conjecture4, lift_counterexample, LiftMode,
};
use permlab_core::data::{EQ17_LAMBDA_MAX_REAL, EQ17_PER_A};
use permlab_core::matrices::DEFAULT_TOL;
use permlab_core::{ExactMatrix, Matrix};
use serde::Serialize;

/// Accepted band for the spectral ratio.
pub const RATIO_RANGE: (f64, f64) = (1.0288, 1.0308);

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub label: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PaperRun {
    pub backend: &'static str,
    pub per_a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_a_exact: Option<String>,
    pub lambda_max_real: f64,
    pub ratio: f64,
    pub epsilon_star: Option<f64>,
    pub lift_violation: Option<f64>,
    pub c1_margin: Option<f64>,
    pub assertions: Vec<Assertion>,
    pub seconds: f64,
}

impl PaperRun {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

/// Mantissa-and-exponent rendering with four digits after the point, the
/// precision at which the reference figures are quoted.
pub fn render4(x: f64) -> String {
    format!("{x:.4e}")
}

/// Runs the six assertions on `X`. With `exact` set, `per(A)` and `F_A` are
/// computed over the Gaussian integers; otherwise in double precision.
pub fn verify_paper(x: &ExactMatrix, exact: bool) -> permlab_core::Result<PaperRun> {
    let start = Instant::now();
    let a_exact = x.gram();
    let a = if exact {
        Matrix::Exact(a_exact.clone())
    } else {
        Matrix::Float(a_exact.to_complex())
    };
    let mut assertions = Vec::new();

    let psd = a.is_psd(DEFAULT_TOL);
    assertions.push(Assertion {
        label: "A is Hermitian PSD",
        passed: psd.psd,
        detail: format!("min eigenvalue {:.6e}", psd.min_eigenvalue),
    });
    a.require_psd()?;

    let c4 = check_conjecture4(&a)?;
    let per = render4(c4.rhs);
    assertions.push(Assertion {
        label: "per(A) matches reference",
        passed: per == render4(EQ17_PER_A),
        detail: format!("per(A) = {per}, reference {}", render4(EQ17_PER_A)),
    });
    let lambda = render4(c4.lhs);
    assertions.push(Assertion {
        label: "lambda_max(Re F_A) matches reference",
        passed: lambda == render4(EQ17_LAMBDA_MAX_REAL),
        detail: format!(
            "lambda = {lambda}, reference {}",
            render4(EQ17_LAMBDA_MAX_REAL)
        ),
    });
    let ratio = c4.ratio();
    assertions.push(Assertion {
        label: "ratio in reference band",
        passed: (RATIO_RANGE.0..=RATIO_RANGE.1).contains(&ratio),
        detail: format!(
            "ratio = {ratio:.6}, band [{}, {}]",
            RATIO_RANGE.0, RATIO_RANGE.1
        ),
    });

    let (mut epsilon_star, mut lift_violation, mut c1_margin) = (None, None, None);
    match lift_counterexample(&a, LiftMode::Real) {
        Ok(lift) => {
            let nonneg = lift.b.has_nonnegative_entries(DEFAULT_TOL);
            assertions.push(Assertion {
                label: "real lift gives nonnegative B",
                passed: nonneg && lift.violation > 0.0,
                detail: format!(
                    "eps* = {}, per(A∘B) - per(A) = {:.6e} ({:.3e} relative)",
                    lift.epsilon_star,
                    lift.violation,
                    lift.violation / lift.per_a
                ),
            });
            epsilon_star = Some(lift.epsilon_star);
            lift_violation = Some(lift.violation);
            let c1 =
                check_conjecture1(&Matrix::Float(a_exact.to_complex()), &Matrix::Float(lift.b))?;
            c1_margin = Some(c1.margin);
            assertions.push(Assertion {
                label: "same pair violates the Hadamard inequality",
                passed: !c1.holds,
                detail: format!("margin {:.6e}", c1.margin),
            });
        }
        Err(e) => {
            for label in [
                "real lift gives nonnegative B",
                "same pair violates the Hadamard inequality",
            ] {
                assertions.push(Assertion {
                    label,
                    passed: false,
                    detail: e.to_string(),
                });
            }
        }
    }

    Ok(PaperRun {
        backend: if exact { "exact" } else { "float" },
        per_a: c4.rhs,
        per_a_exact: c4.rhs_exact,
        lambda_max_real: c4.lhs,
        ratio,
        epsilon_star,
        lift_violation,
        c1_margin,
        assertions,
        seconds: start.elapsed().as_secs_f64(),
    })
}
