use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qjf_core::linalg::{pauli, CMat};
use qjf_core::lindblad::LindbladModel;
use qjf_core::models::*;
use qjf_core::spectral::{cumulants, scgf_at, SpectralConfig};
use qjf_core::trajectories::*;

fn stationary(ex: &Example) -> InitialState {
    let data = scgf_at(
        &ex.model,
        &ex.observable,
        &vec![0.0; ex.observable.m()],
        &SpectralConfig::default(),
    )
    .unwrap();
    InitialState::from_density(&data.r).unwrap()
}

#[test]
fn decay_waiting_times_are_exponential() {
    let gamma: f64 = 1.7;
    let model = LindbladModel::from_pairs(
        CMat::zeros(2, 2),
        [("minus", pauli::sigma_minus().scale_real(gamma.sqrt()))],
    )
    .unwrap();
    let excited = basis_state(2, 1);
    let sampler = Sampler::new(&model, 40.0, &SamplerConfig::default()).unwrap();
    let n = 10_000;
    let waits: Vec<f64> = (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trajectory_seed(11, i));
            let traj = sampler.sample(&excited, &mut rng).unwrap();
            assert_eq!(traj.n_jumps(), 1);
            traj.events()[0].time
        })
        .collect();
    let mean = waits.iter().sum::<f64>() / n as f64;
    let stderr = (1.0 / gamma) / (n as f64).sqrt();
    let z = (mean - 1.0 / gamma).abs() / stderr;
    println!("decay: mean {mean}, z = {z:.2}");
    assert!(z <= 3.0);
}

#[test]
fn sampling_is_reproducible() {
    let ex = ExampleParams::from_name("two-qubit").unwrap().build().unwrap();
    let init = stationary(&ex);
    let a = sample_many(&ex.model, &init, 5.0, 64, 99, &SamplerConfig::default()).unwrap();
    let b = sample_many(&ex.model, &init, 5.0, 64, 99, &SamplerConfig::default()).unwrap();
    assert_eq!(a, b);
    let c = sample_many(&ex.model, &init, 5.0, 64, 100, &SamplerConfig::default()).unwrap();
    assert_ne!(a.records, c.records);
}

/// Mean and variance rates of `K` against the spectral cumulants, from the
/// stationary ensemble so only the `O(1/T)` correlation correction remains.
fn check_consistency(name: &str, ex: &Example, horizon: f64, seed: u64) {
    let init = stationary(ex);
    let n = 10_000;
    let start = std::time::Instant::now();
    let stats = sample_many(&ex.model, &init, horizon, n, seed, &SamplerConfig::default()).unwrap();
    let jumps = stats.records.iter().map(|r| r.n_jumps()).sum::<u64>() as f64 / n as f64;
    assert!(jumps >= 100.0, "{name}: {jumps} jumps per trajectory");
    let c = cumulants(&ex.model, &ex.observable, 1e-3, &SpectralConfig::default()).unwrap();
    let m = moment_rates(&stats, &ex.observable, 0).unwrap();
    let z_mean = (m.mean_rate - c.mean_rate[0]).abs() / m.mean_stderr;
    let z_var = (m.var_rate - c.covariance_rate[(0, 0)]).abs() / m.var_stderr;
    println!(
        "{name}: {jumps:.1} jumps, mean {:.5} vs {:.5} (z {z_mean:.2}), var {:.5} vs {:.5} (z {z_var:.2}), {:?}",
        m.mean_rate,
        c.mean_rate[0],
        m.var_rate,
        c.covariance_rate[(0, 0)],
        start.elapsed()
    );
    assert!(z_mean <= 3.0 && z_var <= 3.0, "{name}");
}

#[test]
fn single_qubit_moments_match_spectral() {
    let ex = ExampleParams::from_name("single-qubit").unwrap().build().unwrap();
    check_consistency("single-qubit", &ex, 120.0, 1);
}

#[test]
fn two_qubit_moments_match_spectral() {
    let ex = ExampleParams::from_name("two-qubit").unwrap().build().unwrap();
    check_consistency("two-qubit", &ex, 60.0, 2);
}

#[test]
fn spin_chain_moments_match_spectral() {
    let ex = ExampleParams::from_name("spin-chain").unwrap().build().unwrap();
    check_consistency("spin-chain", &ex, 30.0, 3);
}

#[test]
fn scgf_estimator_tracks_spectral_value() {
    let ex = ExampleParams::from_name("spin-chain").unwrap().build().unwrap();
    let stats = sample_many(&ex.model, &stationary(&ex), 20.0, 2000, 5, &SamplerConfig::default()).unwrap();
    let est = estimate_scgf(&stats, &ex.observable, &[0.2]).unwrap();
    let exact = 4.0 * (0.2f64.cosh() - 1.0);
    assert!(!est.degenerate);
    assert!((est.theta_hat - exact).abs() <= 5.0 * est.stderr + 0.05);
}
