use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qjf_core::doob::{doob_transform, verify_fluctuation_relation_grid, verify_similarity, DoobConfig, DoobError};
use qjf_core::grid::GridSpec;
use qjf_core::linalg::{CVec, C64};
use qjf_core::models::*;
use qjf_core::spectral::{scgf_at, SpectralConfig};
use qjf_core::symmetry::{check_dynamics_symmetry, check_tilted_symmetry, transform_trajectory};
use qjf_core::trajectories::{trajectory_probability_density, JumpEvent, Trajectory};

fn examples() -> Vec<(&'static str, Example)> {
    ["single-qubit", "two-qubit", "spin-chain"]
        .into_iter()
        .map(|name| (name, ExampleParams::from_name(name).unwrap().build().unwrap()))
        .collect()
}

#[test]
fn generator_symmetry_holds_on_examples() {
    for (name, ex) in examples() {
        let report = check_dynamics_symmetry(&ex.model, &ex.symmetry).unwrap();
        assert!(report.pass, "{name}: {report:?}");
        assert!(report.rate_mismatch < 1e-12, "{name}");
        for lambda in [-1.3, -0.2, 0.0, 0.7, 1.9] {
            let r = check_tilted_symmetry(&ex.model, &ex.observable, &ex.symmetry, &[lambda]).unwrap();
            assert!(r <= 1e-8, "{name} λ={lambda}: {r}");
            let cfg = SpectralConfig::default();
            let a = scgf_at(&ex.model, &ex.observable, &[lambda], &cfg).unwrap().theta;
            let b = scgf_at(&ex.model, &ex.observable, &ex.symmetry.map_tilt(&[lambda]), &cfg)
                .unwrap()
                .theta;
            assert!((a - b).abs() <= 1e-8, "{name} λ={lambda}");
        }
    }
}

#[test]
fn fluctuation_relation_on_paired_grids() {
    let grid = GridSpec::parse("-2:1/20:81").unwrap();
    for (name, ex) in examples() {
        for s in [Ratio::new(1, 4), Ratio::new(1, 2), Ratio::from_integer(1)] {
            let report = verify_fluctuation_relation_grid(
                &ex.model,
                &ex.observable,
                ex.symmetry.u(),
                &[s],
                std::slice::from_ref(&grid),
                &DoobConfig::default(),
            )
            .unwrap();
            assert!(report.pass, "{name} s={s}: {}", report.max_residual);
            assert!(report.max_residual <= 1e-8);
            assert!(
                report.max_shift_residual <= 1e-8,
                "{name} s={s}: {}",
                report.max_shift_residual
            );
            for pair in &report.pairs {
                let sf = *report.s.first().unwrap();
                assert!((pair.lambda_mapped[0] + pair.lambda[0] + 2.0 * sf).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn doob_similarity_on_examples() {
    for (name, ex) in examples() {
        for s in [0.25, 0.5, 1.0] {
            for lambda in [-0.9, 0.0, 0.4] {
                let r = verify_similarity(
                    &ex.model,
                    &ex.observable,
                    &ex.symmetry,
                    &[s],
                    &[lambda],
                    &DoobConfig::default(),
                )
                .unwrap();
                assert!(r.residual <= 1e-8, "{name} s={s} λ={lambda}: {}", r.residual);
            }
        }
    }
}

#[test]
fn broken_symmetry_is_rejected() {
    let p = SingleQubitParams {
        gamma_plus: 2.0,
        gamma_minus: 1.0,
        omega: 0.5,
    };
    let ex = build_single_qubit(&p).unwrap();
    let report = check_dynamics_symmetry(&ex.model, &ex.symmetry).unwrap();
    assert!(!report.pass);
    assert!(report.jump_residual > 1e-3);
    assert!(report.rate_mismatch > 1e-3);
    let err = verify_similarity(
        &ex.model,
        &ex.observable,
        &ex.symmetry,
        &[0.5],
        &[0.1],
        &DoobConfig::default(),
    );
    assert!(matches!(err, Err(DoobError::SymmetryPrecondition(_))));
}

/// All channel sequences of up to four jumps at fixed, irregular times.
fn enumerated_trajectories(n_channels: usize, horizon: f64) -> Vec<Trajectory> {
    let times = [0.31, 0.77, 1.42, 2.05];
    let mut out = Vec::new();
    for k in 0..=4usize {
        for code in 0..n_channels.pow(k as u32) {
            let mut c = code;
            let events = (0..k)
                .map(|i| {
                    let channel = c % n_channels;
                    c /= n_channels;
                    JumpEvent {
                        channel,
                        time: times[i],
                    }
                })
                .collect();
            out.push(Trajectory::new(n_channels, horizon, events).unwrap());
        }
    }
    out
}

#[test]
fn trajectory_probabilities_are_symmetric() {
    let p = SingleQubitParams::closed_form(1.0);
    let ex = build_single_qubit(&p).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi0 = CVec::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)]);
    assert!((ex.symmetry.v().mul_vec(&psi0) - &psi0).norm() < 1e-15);
    let trajectories = enumerated_trajectories(2, 2.5);
    assert_eq!(trajectories.len(), 31);
    for traj in &trajectories {
        let a = trajectory_probability_density(&ex.model, &psi0, traj).unwrap();
        let b = trajectory_probability_density(&ex.model, &psi0, &transform_trajectory(traj, &ex.symmetry)).unwrap();
        assert!(a > 0.0);
        assert!((a - b).abs() <= 1e-10, "{traj:?}: {a} vs {b}");
    }
}

#[test]
fn trajectory_probabilities_are_symmetric_on_spin_chain() {
    let ex = build_spin_chain(&SpinChainParams {
        n_sites: 2,
        j: 1.0,
        gamma: 1.0,
    })
    .unwrap();
    let psi0 = uniform_state(4);
    for traj in enumerated_trajectories(4, 2.5).iter().filter(|t| t.n_jumps() <= 3) {
        let a = trajectory_probability_density(&ex.model, &psi0, traj).unwrap();
        let b = trajectory_probability_density(&ex.model, &psi0, &transform_trajectory(traj, &ex.symmetry)).unwrap();
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn relabelled_trajectories_transform_the_observable() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, ex) in examples() {
        let n = ex.model.n_channels();
        let mut times: Vec<f64> = (0..50).map(|_| rng.random::<f64>() * 10.0).collect();
        times.sort_by(f64::total_cmp);
        let events = times
            .into_iter()
            .map(|time| JumpEvent {
                channel: rng.random_range(0..n),
                time,
            })
            .collect();
        let traj = Trajectory::new(n, 10.0, events).unwrap();
        let k = ex.observable.observe(traj.counts());
        let k_mapped = ex
            .observable
            .observe(transform_trajectory(&traj, &ex.symmetry).counts());
        let u = ex.symmetry.u();
        for i in 0..k.len() {
            let expected: f64 = (0..k.len()).map(|j| u[(i, j)] * k[j]).sum();
            assert!((k_mapped[i] - expected).abs() < 1e-12, "{name}");
        }
    }
}

#[test]
fn doob_models_conserve_probability() {
    for (name, ex) in examples() {
        for s in [-0.6, 0.25, 0.5, 1.0] {
            let doob = doob_transform(&ex.model, &ex.observable, &[s], &DoobConfig::default()).unwrap();
            assert!(doob.trace_defect() <= 1e-10, "{name} s={s}: {}", doob.trace_defect());
            assert!(doob.consistency_residual() <= 1e-8);
        }
    }
}
