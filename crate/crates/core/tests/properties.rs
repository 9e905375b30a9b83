use nalgebra::DMatrix;
use proptest::prelude::*;

use qjf_core::linalg::{eig_full, expm, kron, sqrtm_psd, unvec, vec, CMat, SuperOp, C64, DEFAULT_EIG_DIM_CAP};
use qjf_core::lindblad::{apply_generator, tilted_generator, CountingObservable, LindbladModel};

fn cmat(n: usize, m: usize, scale: f64) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * m).prop_map(move |v| {
        let values: Vec<C64> = v.into_iter().map(|(a, b)| C64::new(a * scale, b * scale)).collect();
        CMat::from_row_major(n, m, &values).unwrap()
    })
}

fn square(max: usize, scale: f64) -> impl Strategy<Value = CMat> {
    (1..=max).prop_flat_map(move |n| cmat(n, n, scale))
}

fn hermitian(n: usize) -> impl Strategy<Value = CMat> {
    cmat(n, n, 1.0).prop_map(|m| m.hermitian_part())
}

/// Random two-level or three-level model with two channels.
fn small_model() -> impl Strategy<Value = (LindbladModel, CountingObservable)> {
    (2..=3usize)
        .prop_flat_map(|d| {
            (
                hermitian(d),
                cmat(d, d, 1.0),
                cmat(d, d, 1.0),
                -2.0..2.0f64,
                -2.0..2.0f64,
            )
        })
        .prop_map(|(h, l1, l2, a1, a2)| {
            let model = LindbladModel::from_pairs(h, [("a", l1), ("b", l2)]).unwrap();
            (model, CountingObservable::scalar([a1, a2]))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vec_unvec_round_trip(m in square(8, 3.0)) {
        let v = vec(&m).unwrap();
        prop_assert_eq!(v.len(), m.nrows() * m.nrows());
        prop_assert_eq!(unvec(&v, m.nrows()).unwrap(), m);
    }

    #[test]
    fn kron_vectorization_identity(
        (a, x, b) in (1..=6usize).prop_flat_map(|d| (cmat(d, d, 1.0), cmat(d, d, 1.0), cmat(d, d, 1.0)))
    ) {
        let lhs = kron(&b.transpose(), &a).mul_vec(&vec(&x).unwrap());
        let rhs = vec(&(&(&a * &x) * &b)).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
        let sandwich = SuperOp::sandwich(&a, &b).apply(&x).unwrap();
        prop_assert!(sandwich.distance(&(&(&a * &x) * &b)) <= 1e-12);
    }

    #[test]
    fn expm_inverse(m in square(6, 1.0)) {
        let norm = m.norm();
        let m = if norm > 5.0 { m.scale_real(5.0 / norm) } else { m };
        let prod = &expm(&m).unwrap() * &expm(&m.scale_real(-1.0)).unwrap();
        prop_assert!(prod.distance(&CMat::identity(m.nrows())) <= 1e-10);
    }

    #[test]
    fn sqrt_of_positive_definite(b in square(6, 1.0)) {
        let n = b.nrows();
        let m = &(&b * &b.adjoint()) + &CMat::identity(n).scale_real(0.1);
        let root = sqrtm_psd(&m, 1e-10).unwrap().root;
        prop_assert!((&root * &root).distance(&m) <= 1e-10);
        prop_assert!(root.distance(&root.adjoint()) <= 1e-12);
    }

    #[test]
    fn tilted_generator_preserves_hermiticity(
        ((model, obs), rho, lambda) in small_model().prop_flat_map(|mo| {
            let d = mo.0.dim();
            (Just(mo), hermitian(d), -2.0..2.0f64)
        })
    ) {
        let gen = tilted_generator(&model, &obs, &[lambda]).unwrap();
        let out = apply_generator(&gen, &rho).unwrap();
        prop_assert!(out.distance(&out.adjoint()) <= 1e-10);
    }

    #[test]
    fn untilted_dual_annihilates_identity((model, obs) in small_model()) {
        let gen = tilted_generator(&model, &obs, &[0.0]).unwrap();
        prop_assert!(gen.trace_defect() <= 1e-10);
    }

    #[test]
    fn channel_additivity(
        ((model, _), rho, lambda, alpha) in small_model().prop_flat_map(|mo| {
            let d = mo.0.dim();
            (Just(mo), cmat(d, d, 1.0), -2.0..2.0f64, -2.0..2.0f64)
        })
    ) {
        // Tilt only the first channel.
        let obs = CountingObservable::scalar([alpha, 0.0]);
        let tilted = apply_generator(&tilted_generator(&model, &obs, &[lambda]).unwrap(), &rho).unwrap();
        let plain = apply_generator(&tilted_generator(&model, &obs, &[0.0]).unwrap(), &rho).unwrap();
        let l = &model.jumps()[0].op;
        let jump = &(l * &rho) * &l.adjoint();
        let expected = &plain + &jump.scale_real((-lambda * alpha).exp() - 1.0);
        prop_assert!(tilted.distance(&expected) <= 1e-10 * (1.0 + expected.norm()));
    }

    #[test]
    fn antisymmetric_plus_negative_diagonal_is_stable(
        (n, entries, diag) in (2..=16usize).prop_flat_map(|n| (
            Just(n),
            prop::collection::vec(-5.0..5.0f64, n * n),
            prop::collection::vec(0.01..5.0f64, n),
        ))
    ) {
        let a = DMatrix::from_fn(n, n, |i, j| entries[i * n + j] - entries[j * n + i]);
        let m = CMat::from_fn(n, n, |i, j| {
            C64::new(a[(i, j)] - if i == j { diag[i] } else { 0.0 }, 0.0)
        });
        let max_re = eig_full(&m, DEFAULT_EIG_DIM_CAP)
            .unwrap()
            .iter()
            .map(|p| p.value.re)
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(max_re < 0.0, "max real part {max_re}");
    }
}

#[test]
fn sigma_plus_vectorizes_column_major() {
    let v = vec(&qjf_core::linalg::pauli::sigma_plus()).unwrap();
    let expected = [0.0, 1.0, 0.0, 0.0];
    for (got, want) in v.iter().zip(expected) {
        assert_eq!(got, &C64::new(want, 0.0));
    }
}
