use num_traits::Zero;
use permlab_core::permanent::*;
use permlab_core::{data, random, Complex64, ComplexMatrix, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

#[test]
fn ryser_matches_naive_on_random_complex() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let n = 2 + k % 6;
        let a = random::complex_matrix(&mut rng, n, n);
        let r = ryser_float(&a).unwrap();
        let s = naive_float(&a).unwrap();
        worst = worst.max(rel(r, s));
    }
    assert!(worst <= 1e-11, "worst relative difference {worst:e}");
}

#[test]
fn exact_engines_agree_bit_for_bit() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..300 {
        let n = 1 + k % 7;
        let bound = [1, 5, 1000, 1 << 20][k % 4];
        let a = random::gaussian_int_matrix(&mut rng, n, n, bound);
        assert_eq!(
            ryser_exact(&a).unwrap(),
            naive_exact(&a).unwrap(),
            "instance {k}"
        );
    }
}

#[test]
fn float_and_exact_agree_on_integer_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let a = random::gaussian_int_matrix(&mut rng, 6, 6, 9);
        let exact = permanent_ryser(&Matrix::Exact(a.clone()))
            .unwrap()
            .to_complex();
        let float = ryser_float(&a.to_complex()).unwrap();
        assert!(rel(exact, float) <= 1e-11);
    }
}

#[test]
fn laplace_identity_float_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..200 {
        let n = 2 + k % 7;
        let a = Matrix::Float(random::psd(&mut rng, n));
        let fa = build_fa(&a).unwrap();
        let d = fa.laplace_defect();
        assert!(d <= 1e-10, "instance {k}: defect {d:e}");
    }
}

#[test]
fn laplace_identity_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..100 {
        let n = 2 + k % 6;
        let a = Matrix::Exact(random::gaussian_int_matrix(&mut rng, n, n, 6).gram());
        let fa = build_fa(&a).unwrap();
        assert_eq!(fa.laplace_defect(), 0.0, "instance {k}");
    }
}

#[test]
fn laplace_identity_on_the_16x16_instance() {
    let fa = build_fa(&Matrix::Exact(data::eq17_a())).unwrap();
    assert_eq!(fa.laplace_defect(), 0.0);
    let float = build_fa(&Matrix::Float(data::eq17_a().to_complex())).unwrap();
    assert!(float.laplace_defect() <= 1e-10);
}

#[test]
fn column_engine_matches_independent_minors() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..60 {
        let n = 2 + k % 8;
        let x = random::gaussian_int_matrix(&mut rng, n, n, 7);
        let exact = Matrix::Exact(x.clone());
        assert_eq!(
            build_fa(&exact).unwrap().entries,
            build_fa_by_columns(&exact).unwrap().entries,
            "instance {k}"
        );
        let float = Matrix::Float(random::complex_matrix(&mut rng, n, n));
        let a = build_fa(&float).unwrap().to_complex();
        let b = build_fa_by_columns(&float).unwrap().to_complex();
        let scale = a.max_abs();
        assert!(a.add_scaled(-1.0, &b).unwrap().max_abs() <= 1e-12 * scale);
    }
}

#[test]
fn permanent_of_psd_is_real_and_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..200 {
        let n = 1 + k % 8;
        let a = random::psd(&mut rng, n);
        let p = ryser_float(&a).unwrap();
        assert!(p.re >= 0.0);
        assert!(p.im.abs() <= 1e-12 * p.re.max(1e-300));

        let x = random::gaussian_int_matrix(&mut rng, n, n, 5).gram();
        let e = ryser_exact(&x).unwrap();
        assert!(e.im.is_zero());
        assert!(e.re >= Zero::zero());
    }
}

#[test]
fn rank_one_fa_is_scaled_all_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..100 {
        let n = 2 + k % 7;
        let a = random::rank_one(&mut rng, n);
        let fa = build_fa(&Matrix::Float(a)).unwrap();
        let per = fa.source_permanent.re();
        let expected = ComplexMatrix::ones(n).scale(per / n as f64);
        let f = fa.to_complex();
        assert!(f.add_scaled(-1.0, &expected).unwrap().max_abs() <= 1e-10 * expected.max_abs());
    }
}

#[test]
fn first_row_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..200 {
        let n = 2 + k % 7;
        let a = random::complex_matrix(&mut rng, n, n);
        let expansion: Complex64 = (0..n)
            .map(|j| a.get(0, j) * ryser_float(&a.minor(0, j).unwrap()).unwrap())
            .sum();
        assert!(rel(expansion, ryser_float(&a).unwrap()) <= 1e-11);
    }
}

#[test]
fn directional_derivative_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let h = 1e-5;
    for k in 0..100 {
        let a = random::complex_matrix(&mut rng, 5, 5);
        let c = random::complex_matrix(&mut rng, 5, 5);
        let d = permanent_directional_derivative(&a, &c).unwrap();
        let plus = ryser_float(&a.add_scaled(h, &c).unwrap()).unwrap();
        let minus = ryser_float(&a.add_scaled(-h, &c).unwrap()).unwrap();
        let fd = (plus - minus) / (2.0 * h);
        assert!(rel(d, fd) <= 1e-6, "instance {k}: {d} vs {fd}");
    }
}

#[test]
fn sixteen_by_sixteen_permanent() {
    let exact = ryser_exact(&data::eq17_a()).unwrap();
    assert_eq!(
        exact.re.to_string(),
        "21977764516064691160745573157573670105803016188680992874122444800"
    );
    assert!(exact.im.is_zero());
    let float = ryser_float(&data::eq17_a().to_complex()).unwrap();
    let exact_f = Complex64::new(exact.re.to_string().parse().unwrap(), 0.0);
    assert!(rel(float, exact_f) <= 1e-11);
}
