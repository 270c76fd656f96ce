use permlab_core::conjectures::*;
use permlab_core::permanent::ryser_float;
use permlab_core::{data, random, Complex64, ComplexMatrix, Error, ExactMatrix, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn float(m: ComplexMatrix) -> Matrix {
    Matrix::Float(m)
}

#[test]
fn rank_one_a_satisfies_hadamard_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..1000 {
        let n = 2 + k % 5;
        let a = float(random::rank_one(&mut rng, n));
        let b = float(random::psd(&mut rng, n));
        let r = check_conjecture1(&a, &b).unwrap();
        assert!(r.holds, "instance {k}: margin {:e}", r.margin);
    }
}

#[test]
fn nonnegative_a_satisfies_hadamard_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for k in 0..1000 {
        let n = 2 + k % 5;
        let a = float(random::nonnegative_psd(&mut rng, n));
        let b = float(random::psd(&mut rng, n));
        let r = check_conjecture1(&a, &b).unwrap();
        assert!(r.holds, "instance {k}: margin {:e}", r.margin);
    }
}

#[test]
fn rank_one_b_saturates() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for k in 0..1000 {
        let n = 2 + k % 5;
        let a = float(random::psd(&mut rng, n));
        let b = float(random::rank_one(&mut rng, n));
        let r = check_conjecture1(&a, &b).unwrap();
        assert!(
            r.margin.abs() <= 1e-9 * r.rhs,
            "instance {k}: margin {:e}",
            r.margin
        );
        assert!(r.holds && r.near_zero);
    }
}

#[test]
fn rank_one_nonnegative_b_saturates_c3() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..200 {
        let a = float(random::psd(&mut rng, 5));
        let b = float(random::nonnegative_matrix(&mut rng, 1, 5).gram());
        let r = check_conjecture3(&a, &b).unwrap();
        assert!(r.margin.abs() <= 1e-9 * r.rhs);
    }
}

#[test]
fn all_ones_b_gives_zero_margin() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for n in 2..=6 {
        let a = float(random::psd(&mut rng, n));
        let r = check_conjecture3(&a, &float(ComplexMatrix::ones(n))).unwrap();
        assert!(r.margin.abs() <= 1e-12 * r.rhs);
    }
}

#[test]
fn rank_one_a_saturates_spectral_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for k in 0..200 {
        let n = 2 + k % 5;
        let r = check_conjecture2(&float(random::rank_one(&mut rng, n))).unwrap();
        assert!(
            r.margin.abs() <= 1e-10 * r.rhs,
            "instance {k}: margin {:e}",
            r.margin
        );
        assert!(r.holds && r.near_zero);
    }
}

#[test]
fn nonnegative_a_satisfies_spectral_inequalities() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for k in 0..1000 {
        let n = 2 + k % 5;
        let a = float(random::nonnegative_psd(&mut rng, n));
        assert!(check_conjecture2(&a).unwrap().holds, "instance {k}");
        assert!(check_conjecture4(&a).unwrap().holds, "instance {k}");
    }
}

#[test]
fn identity_spectral_margins_vanish() {
    for n in 2..=6 {
        let id = Matrix::Exact(ExactMatrix::identity(n));
        for r in [
            check_conjecture2(&id).unwrap(),
            check_conjecture4(&id).unwrap(),
        ] {
            assert_eq!(r.rhs, 1.0);
            assert!((r.lhs - 1.0).abs() <= 1e-12);
            assert!(r.near_zero);
        }
    }
}

#[test]
fn normalized_correlation_permanent_is_at_most_factorial() {
    let mut rng = ChaCha8Rng::seed_from_u64(38);
    for k in 0..500 {
        let n = 2 + k % 5;
        let b = random::psd(&mut rng, n);
        let d: Vec<f64> = b.diagonal().map(|z| 1.0 / z.re.sqrt()).collect();
        let corr = ComplexMatrix::from_fn(n, n, |i, j| b.get(i, j) * d[i] * d[j]).unwrap();
        let per = ryser_float(&corr).unwrap().re;
        let factorial: f64 = (1..=n).map(|i| i as f64).product();
        assert!(
            per <= factorial * (1.0 + 1e-12),
            "instance {k}: {per} > {factorial}"
        );
    }
}

fn slope(eps: &[f64], res: &[f64]) -> f64 {
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = res.iter().map(|r| r.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn taylor_remainder_is_fourth_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(39);
    let eps = [1e-1, 5e-2, 2.5e-2, 1.25e-2];
    for k in 0..100 {
        let n = 2 + k % 5;
        let a = random::psd(&mut rng, n);
        let v = random::unit_vector(&mut rng, n);
        let probe = TaylorProbe::new(&a, &v).unwrap();
        let res: Vec<f64> = eps
            .iter()
            .map(|&e| probe.residual(e).unwrap().residual)
            .collect();
        let s = slope(&eps, &res);
        assert!(s >= 3.5, "instance {k}: slope {s}, residuals {res:?}");
    }
}

#[test]
fn rank_one_slope_term_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..100 {
        let n = 2 + rng.random_range(0..5);
        let a = random::rank_one(&mut rng, n);
        let v = random::unit_vector(&mut rng, n);
        let r = taylor_residual(&a, &v, 0.1).unwrap();
        let per = ryser_float(&a).unwrap().re;
        let sum: Complex64 = v.entries().iter().sum();
        let expected = per * (sum.norm_sqr() / n as f64 - 1.0);
        assert!((r.slope_term - expected).abs() <= 1e-10 * per);
        assert!(r.slope_term <= 1e-12 * per);
    }
}

#[test]
fn taylor_preconditions() {
    let a = ComplexMatrix::identity(3);
    let v = random::unit_vector(&mut ChaCha8Rng::seed_from_u64(0), 3);
    assert!(matches!(
        taylor_residual(&a, &v, 0.75),
        Err(Error::EpsilonOutOfRange { .. })
    ));
    assert!(matches!(
        taylor_residual(&a, &v, -0.1),
        Err(Error::EpsilonOutOfRange { .. })
    ));
    let unnormalized = permlab_core::ComplexVector::from_real(&[1.0, 1.0, 1.0]).unwrap();
    assert!(taylor_residual(&a, &unnormalized, 0.1).is_err());
}

fn recheck(lift: &LiftResult) -> CheckReport {
    let text = serde_json::to_string(lift).unwrap();
    let back: LiftResult = serde_json::from_str(&text).unwrap();
    assert!(&back == lift, "lift did not survive a JSON round trip");
    let a = Matrix::Float(data::eq17_a().to_complex());
    let b = Matrix::Float(back.b);
    match back.mode {
        LiftMode::Real => check_conjecture3(&a, &b).unwrap(),
        LiftMode::Complex => check_conjecture1(&a, &b).unwrap(),
    }
}

#[test]
fn lifts_of_the_16x16_instance_are_sound() {
    let a = Matrix::Exact(data::eq17_a());
    for mode in [LiftMode::Real, LiftMode::Complex] {
        let lift = lift_counterexample(&a, mode).unwrap();
        assert!(lift.b.diagonal().all(|z| z == Complex64::new(1.0, 0.0)));
        assert!(lift.b.is_psd(permlab_core::matrices::DEFAULT_TOL).psd);
        assert!(lift.violation > 1e-6 * lift.per_a);
        assert_eq!(lift.scan_trace.len(), 21);
        if mode == LiftMode::Real {
            assert!(lift.v.is_real());
            assert!(lift
                .b
                .has_nonnegative_entries(permlab_core::matrices::DEFAULT_TOL));
        }
        let best = lift
            .scan_trace
            .iter()
            .map(|p| p.per_ab - lift.per_a)
            .fold(f64::MIN, f64::max);
        assert_eq!(best, lift.violation);
        let report = recheck(&lift);
        assert!(!report.holds, "{mode:?}: {report:?}");
    }
}

#[test]
fn lift_needs_a_spectral_violation() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let a = float(random::nonnegative_psd(&mut rng, 5));
    for mode in [LiftMode::Real, LiftMode::Complex] {
        assert!(matches!(
            lift_counterexample(&a, mode),
            Err(Error::NoSpectralViolation { .. })
        ));
    }
}

#[test]
fn exact_and_float_checks_agree_on_the_16x16_instance() {
    let exact = check_conjecture4(&Matrix::Exact(data::eq17_a())).unwrap();
    let float = check_conjecture4(&Matrix::Float(data::eq17_a().to_complex())).unwrap();
    assert!(!exact.holds && !float.holds);
    assert!((exact.ratio() - float.ratio()).abs() <= 1e-9 * exact.ratio());
    assert!((exact.ratio() - 1.0298).abs() <= 1e-3);
    let c2 = check_conjecture2(&Matrix::Exact(data::eq17_a())).unwrap();
    assert!(c2.lhs >= exact.lhs);
}
