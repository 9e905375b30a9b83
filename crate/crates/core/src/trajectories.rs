//! Quantum-jump unraveling: waiting-time sampling by exact norm crossing,
//! trajectory probabilities and Monte Carlo estimators of counting statistics.

use nalgebra::{DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::doob::{doob_transform, DoobConfig, DoobError};
use crate::linalg::{expm, CMat, CVec, LinalgError, C64, I, ONE, ZERO};
use crate::lindblad::{CountingObservable, LindbladModel, ModelError};
use crate::spectral::{cumulants_at, SpectralConfig, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("jump channel {channel} out of range (model has {n} channels)")]
    BadChannel { channel: usize, n: usize },
    #[error("jump times must satisfy 0 < t_1 < ... < t_n <= horizon (event {index} at t = {time})")]
    BadTime { index: usize, time: f64 },
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("initial state has dimension {found}, model dimension is {dim}")]
    StateDimension { found: usize, dim: usize },
    #[error("initial state has squared norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("state norm underflowed ({norm:e}) at t = {time} without a resolvable jump")]
    NormUnderflow { norm: f64, time: f64 },
    #[error("state norm increased from {before:e} to {after:e} at t = {time}")]
    NormIncrease { before: f64, after: f64, time: f64 },
    #[error("need at least {need} trajectories, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("empty stationary ensemble")]
    EmptyEnsemble,
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Doob(#[from] DoobError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpEvent {
    pub channel: usize,
    pub time: f64,
}

/// `ω_t = (μ_1, t_1, ..., μ_n, t_n; t)` with accumulated per-channel counts.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    horizon: f64,
    events: Vec<JumpEvent>,
    counts: Vec<u64>,
}

impl Trajectory {
    pub fn new(n_channels: usize, horizon: f64, events: Vec<JumpEvent>) -> Result<Self, TrajectoryError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(TrajectoryError::BadHorizon(horizon));
        }
        let mut counts = vec![0u64; n_channels];
        let mut last = 0.0;
        for (index, ev) in events.iter().enumerate() {
            if ev.channel >= n_channels {
                return Err(TrajectoryError::BadChannel {
                    channel: ev.channel,
                    n: n_channels,
                });
            }
            if !(ev.time > last && ev.time <= horizon) {
                return Err(TrajectoryError::BadTime { index, time: ev.time });
            }
            last = ev.time;
            counts[ev.channel] += 1;
        }
        Ok(Self {
            horizon,
            events,
            counts,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn events(&self) -> &[JumpEvent] {
        &self.events
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_jumps(&self) -> usize {
        self.events.len()
    }

    /// Same times, channel `mu` replaced by `perm[mu]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let events = self
            .events
            .iter()
            .map(|e| JumpEvent {
                channel: perm[e.channel],
                time: e.time,
            })
            .collect();
        let mut counts = vec![0; self.counts.len()];
        for (mu, &q) in self.counts.iter().enumerate() {
            counts[perm[mu]] = q;
        }
        Self {
            horizon: self.horizon,
            events,
            counts,
        }
    }
}

/// Knobs of the waiting-time solver.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    /// Upper bound on the coarse propagation step; the step actually used is
    /// `min(max_step, step_scale / ||H_eff||)`.
    pub max_step: f64,
    pub step_scale: f64,
    /// Jump-time resolution relative to the horizon.
    pub time_tol_rel: f64,
    pub underflow: f64,
    pub norm_slack: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            max_step: 0.01,
            step_scale: 0.1,
            time_tol_rel: 1e-10,
            underflow: 1e-14,
            norm_slack: 1e-12,
        }
    }
}

/// Cached no-jump propagators for one model and horizon.
#[derive(Clone, Debug)]
pub struct Sampler {
    dim: usize,
    jumps: Vec<CMat>,
    h_eff: CMat,
    horizon: f64,
    step: f64,
    /// `ladder[j] = exp(-i H_eff step / 2^j)`.
    ladder: Vec<CMat>,
    cfg: SamplerConfig,
}

impl Sampler {
    pub fn new(model: &LindbladModel, horizon: f64, cfg: &SamplerConfig) -> Result<Self, SamplerError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(TrajectoryError::BadHorizon(horizon).into());
        }
        let h_eff = model.effective_hamiltonian();
        let norm = h_eff.norm();
        let step = if norm > 0.0 {
            cfg.max_step.min(cfg.step_scale / norm)
        } else {
            cfg.max_step
        }
        .min(horizon);
        let tol = cfg.time_tol_rel * horizon;
        let levels = ((step / tol).log2().ceil().max(0.0) as usize) + 1;
        let mut ladder = Vec::with_capacity(levels);
        let mut h = step;
        for _ in 0..levels {
            ladder.push(expm(&h_eff.scale(-I * h))?);
            h *= 0.5;
        }
        Ok(Self {
            dim: model.dim(),
            jumps: model.jump_ops().cloned().collect(),
            h_eff,
            horizon,
            step,
            ladder,
            cfg: cfg.clone(),
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    fn propagate(&self, p: &CMat, psi: &CVec, out: &mut CVec) {
        out.gemv(ONE, p.as_matrix(), psi, ZERO);
    }

    fn check_monotone(&self, before: f64, after: f64, time: f64) -> Result<(), SamplerError> {
        if after > before + self.cfg.norm_slack {
            return Err(SamplerError::NormIncrease { before, after, time });
        }
        Ok(())
    }

    /// Samples one trajectory from a normalized initial state.
    pub fn sample<R: Rng>(&self, psi0: &CVec, rng: &mut R) -> Result<Trajectory, SamplerError> {
        check_state(psi0, self.dim)?;
        let n_channels = self.jumps.len();
        if n_channels == 0 {
            return Ok(Trajectory::new(0, self.horizon, vec![])?);
        }
        let mut events = Vec::new();
        let mut psi = psi0.clone();
        let mut next = CVec::zeros(self.dim);
        let mut t = 0.0;
        let mut u = 1.0 - rng.random::<f64>();
        let mut norm = psi.norm_squared();
        let coarse = &self.ladder[0];
        let tol = self.cfg.time_tol_rel * self.horizon;

        loop {
            let remaining = self.horizon - t;
            let (candidate_norm, h) = if remaining > self.step {
                self.propagate(coarse, &psi, &mut next);
                (next.norm_squared(), self.step)
            } else {
                let p = expm(&self.h_eff.scale(-I * remaining))?;
                self.propagate(&p, &psi, &mut next);
                (next.norm_squared(), remaining)
            };
            self.check_monotone(norm, candidate_norm, t + h)?;

            if candidate_norm >= u {
                t += h;
                std::mem::swap(&mut psi, &mut next);
                norm = candidate_norm;
                if h == remaining || t >= self.horizon {
                    break;
                }
                if norm < self.cfg.underflow {
                    return Err(SamplerError::NormUnderflow { norm, time: t });
                }
                continue;
            }

            // Crossing inside (t, t + h]: halve until the bracket is below tol.
            let mut width = h;
            let mut level = 0usize;
            let mut upper = next.clone();
            while width > tol {
                width *= 0.5;
                level += 1;
                let owned;
                let p = if h == self.step && level < self.ladder.len() {
                    &self.ladder[level]
                } else {
                    owned = expm(&self.h_eff.scale(-I * width))?;
                    &owned
                };
                self.propagate(p, &psi, &mut next);
                let mid_norm = next.norm_squared();
                self.check_monotone(norm, mid_norm, t + width)?;
                if mid_norm >= u {
                    t += width;
                    std::mem::swap(&mut psi, &mut next);
                    norm = mid_norm;
                } else {
                    upper.copy_from(&next);
                }
            }
            t += width;
            if t > self.horizon {
                t = self.horizon;
            }

            let weights: Vec<f64> = self
                .jumps
                .iter()
                .map(|l| (l.as_matrix() * &upper).norm_squared())
                .collect();
            let total: f64 = weights.iter().sum();
            if total.is_nan() || total <= 0.0 || upper.norm_squared() < self.cfg.underflow {
                return Err(SamplerError::NormUnderflow {
                    norm: upper.norm_squared(),
                    time: t,
                });
            }
            let channel = pick(&weights, total, rng.random::<f64>());
            let jumped = self.jumps[channel].as_matrix() * &upper;
            let n = jumped.norm();
            psi = jumped / C64::new(n, 0.0);
            norm = 1.0;
            events.push(JumpEvent { channel, time: t });
            u = 1.0 - rng.random::<f64>();
            if t >= self.horizon {
                break;
            }
        }
        Ok(Trajectory::new(n_channels, self.horizon, events)?)
    }
}

fn pick(weights: &[f64], total: f64, x: f64) -> usize {
    let target = x * total;
    let mut acc = 0.0;
    for (mu, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return mu;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

fn check_state(psi: &CVec, dim: usize) -> Result<(), SamplerError> {
    if psi.len() != dim {
        return Err(SamplerError::StateDimension { found: psi.len(), dim });
    }
    let n = psi.norm_squared();
    if (n - 1.0).abs() > 1e-10 {
        return Err(SamplerError::NotNormalized(n));
    }
    Ok(())
}

/// Single trajectory with a `ChaCha8` stream seeded from `seed`.
pub fn sample_trajectory(
    model: &LindbladModel,
    psi0: &CVec,
    horizon: f64,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<Trajectory, SamplerError> {
    let sampler = Sampler::new(model, horizon, cfg)?;
    sampler.sample(psi0, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Squared norm of the unnormalized conditional state along `traj`.
pub fn trajectory_probability_density(
    model: &LindbladModel,
    psi0: &CVec,
    traj: &Trajectory,
) -> Result<f64, SamplerError> {
    if psi0.len() != model.dim() {
        return Err(SamplerError::StateDimension {
            found: psi0.len(),
            dim: model.dim(),
        });
    }
    let n = model.n_channels();
    if let Some(e) = traj.events().iter().find(|e| e.channel >= n) {
        return Err(TrajectoryError::BadChannel { channel: e.channel, n }.into());
    }
    let h_eff = model.effective_hamiltonian();
    let jumps = model.jumps();
    let mut psi = psi0.clone();
    let mut t = 0.0;
    for e in traj.events() {
        psi = expm(&h_eff.scale(-I * (e.time - t)))?.mul_vec(&psi);
        psi = jumps[e.channel].op.mul_vec(&psi);
        t = e.time;
    }
    psi = expm(&h_eff.scale(-I * (traj.horizon() - t)))?.mul_vec(&psi);
    Ok(psi.norm_squared())
}

/// Initial condition of each sampled trajectory.
#[derive(Clone, Debug)]
pub enum InitialState {
    Pure(CVec),
    /// Pure states drawn with the given probabilities, e.g. the eigen-ensemble
    /// of a stationary density matrix.
    Ensemble {
        states: Vec<CVec>,
        cumulative: Vec<f64>,
    },
}

impl InitialState {
    /// First computational basis vector.
    pub fn basis(dim: usize) -> Self {
        let mut v = CVec::zeros(dim);
        v[0] = ONE;
        Self::Pure(v)
    }

    /// Eigen-decomposition of a density matrix; weights below `1e-14` are dropped.
    pub fn from_density(rho: &CMat) -> Result<Self, SamplerError> {
        let h = rho.hermitian_part();
        let eig = SymmetricEigen::new(h.into_matrix());
        let mut states = Vec::new();
        let mut weights = Vec::new();
        for (k, &p) in eig.eigenvalues.iter().enumerate() {
            if p > 1e-14 {
                let v: CVec = eig.eigenvectors.column(k).into_owned();
                let n = v.norm();
                states.push(v / C64::new(n, 0.0));
                weights.push(p);
            }
        }
        if states.is_empty() {
            return Err(SamplerError::EmptyEnsemble);
        }
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Ok(Self::Ensemble { states, cumulative })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> &CVec {
        match self {
            Self::Pure(v) => v,
            Self::Ensemble { states, cumulative } => {
                let x = rng.random::<f64>();
                let k = cumulative.iter().position(|&c| x < c).unwrap_or(states.len() - 1);
                &states[k]
            }
        }
    }
}

/// SplitMix64 finalizer applied to `master + index * golden`.
pub fn trajectory_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trajectory record kept by [`sample_many`].
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub counts: Vec<u64>,
}

impl TrajectoryRecord {
    pub fn n_jumps(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleStats {
    pub n_traj: usize,
    pub horizon: f64,
    pub master_seed: u64,
    pub records: Vec<TrajectoryRecord>,
    pub count_mean: Vec<f64>,
    pub count_var: Vec<f64>,
}

impl SampleStats {
    pub fn k_samples(&self, observable: &CountingObservable) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| observable.observe(&r.counts)).collect()
    }
}

/// Samples `n` independent trajectories. Trajectory `i` uses the stream
/// seeded by `trajectory_seed(master_seed, i)`, so results do not depend on
/// the thread schedule.
pub fn sample_many(
    model: &LindbladModel,
    init: &InitialState,
    horizon: f64,
    n: usize,
    master_seed: u64,
    cfg: &SamplerConfig,
) -> Result<SampleStats, SamplerError> {
    if n == 0 {
        return Err(SamplerError::TooFewSamples { need: 1, got: 0 });
    }
    let sampler = Sampler::new(model, horizon, cfg)?;
    let records = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let seed = trajectory_seed(master_seed, i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi0 = init.draw(&mut rng).clone();
            let traj = sampler.sample(&psi0, &mut rng)?;
            Ok(TrajectoryRecord {
                seed,
                counts: traj.counts().to_vec(),
            })
        })
        .collect::<Result<Vec<_>, SamplerError>>()?;

    let channels = model.n_channels();
    let nf = n as f64;
    let mut count_mean = vec![0.0; channels];
    for r in &records {
        for (m, &q) in count_mean.iter_mut().zip(&r.counts) {
            *m += q as f64;
        }
    }
    count_mean.iter_mut().for_each(|m| *m /= nf);
    let mut count_var = vec![0.0; channels];
    if n > 1 {
        for r in &records {
            for ((v, &q), m) in count_var.iter_mut().zip(&r.counts).zip(&count_mean) {
                *v += (q as f64 - m).powi(2);
            }
        }
        count_var.iter_mut().for_each(|v| *v /= nf - 1.0);
    }
    Ok(SampleStats {
        n_traj: n,
        horizon,
        master_seed,
        records,
        count_mean,
        count_var,
    })
}

/// `θ̂ = (1/T) log mean_i exp(-λ·K_i)` with a delta-method standard error.
/// Biased at finite `T` and `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScgfEstimate {
    pub theta_hat: f64,
    pub stderr: f64,
    /// All weights identical, so the standard error is zero by construction.
    pub degenerate: bool,
}

pub fn estimate_scgf(
    samples: &SampleStats,
    observable: &CountingObservable,
    lambda: &[f64],
) -> Result<ScgfEstimate, SamplerError> {
    observable.check_lambda(lambda)?;
    let n = samples.records.len();
    if n < 2 {
        return Err(SamplerError::TooFewSamples { need: 2, got: n });
    }
    let exponents: Vec<f64> = samples
        .records
        .iter()
        .map(|r| {
            let k = observable.observe(&r.counts);
            -k.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect();
    let shift = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = exponents.iter().map(|e| (e - shift).exp()).collect();
    let nf = n as f64;
    let mean = w.iter().sum::<f64>() / nf;
    let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let t = samples.horizon;
    let theta_hat = (shift + mean.ln()) / t;
    let sd = var.sqrt();
    Ok(ScgfEstimate {
        theta_hat,
        stderr: sd / (nf.sqrt() * mean * t),
        degenerate: sd == 0.0,
    })
}

/// Empirical rates of one component of `K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentRates {
    pub mean_rate: f64,
    pub mean_stderr: f64,
    pub var_rate: f64,
    pub var_stderr: f64,
}

pub fn moment_rates(
    samples: &SampleStats,
    observable: &CountingObservable,
    component: usize,
) -> Result<MomentRates, SamplerError> {
    let n = samples.records.len();
    if n < 2 {
        return Err(SamplerError::TooFewSamples { need: 2, got: n });
    }
    let k: Vec<f64> = samples
        .records
        .iter()
        .map(|r| observable.observe(&r.counts)[component])
        .collect();
    let nf = n as f64;
    let t = samples.horizon;
    let mean = k.iter().sum::<f64>() / nf;
    let dev2: Vec<f64> = k.iter().map(|x| (x - mean).powi(2)).collect();
    let var = dev2.iter().sum::<f64>() / (nf - 1.0);
    let m4 = dev2.iter().map(|d| d * d).sum::<f64>() / nf;
    Ok(MomentRates {
        mean_rate: mean / t,
        mean_stderr: (var / nf).sqrt() / t,
        var_rate: var / t,
        var_stderr: ((m4 - var * var).max(0.0) / nf).sqrt() / t,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypicalityReport {
    pub s: Vec<f64>,
    /// `-grad θ(s)`.
    pub predicted: Vec<f64>,
    pub empirical: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Largest `|empirical - predicted| / stderr` over components.
    pub max_z: f64,
    pub pass: bool,
}

/// Samples the Doob dynamics at `s` from its stationary ensemble and compares
/// the mean rate of `K` to `-grad θ(s)`; passes within 3 standard errors.
#[allow(clippy::too_many_arguments)]
pub fn compare_doob_typicality(
    model: &LindbladModel,
    observable: &CountingObservable,
    s: &[f64],
    horizon: f64,
    n_traj: usize,
    seed: u64,
    sampler_cfg: &SamplerConfig,
    doob_cfg: &DoobConfig,
) -> Result<TypicalityReport, SamplerError> {
    let doob = doob_transform(model, observable, s, doob_cfg)?;
    let init = InitialState::from_density(&doob.stationary_state(&doob_cfg.spectral)?)?;
    let stats = sample_many(doob.model(), &init, horizon, n_traj, seed, sampler_cfg)?;
    let predicted = cumulants_at(model, observable, s, 1e-4, &doob_cfg.spectral)?.mean_rate;
    let mut empirical = Vec::new();
    let mut stderr = Vec::new();
    let mut max_z: f64 = 0.0;
    for (c, p) in predicted.iter().enumerate() {
        let m = moment_rates(&stats, observable, c)?;
        let z = if m.mean_stderr > 0.0 {
            (m.mean_rate - p).abs() / m.mean_stderr
        } else if (m.mean_rate - p).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        max_z = max_z.max(z);
        empirical.push(m.mean_rate);
        stderr.push(m.mean_stderr);
    }
    Ok(TypicalityReport {
        s: s.to_vec(),
        predicted,
        empirical,
        stderr,
        max_z,
        pass: max_z <= 3.0,
    })
}

/// Spectral prediction used alongside sampling summaries.
pub fn spectral_mean_rate(
    model: &LindbladModel,
    observable: &CountingObservable,
    cfg: &SpectralConfig,
) -> Result<Vec<f64>, SamplerError> {
    Ok(cumulants_at(model, observable, &vec![0.0; observable.m()], 1e-4, cfg)?.mean_rate)
}

/// `(1, 0, ..., 0)` as a column.
pub fn basis_state(dim: usize, k: usize) -> CVec {
    let mut v = DVector::zeros(dim);
    v[k] = ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::*;

    fn decay(gamma: f64) -> LindbladModel {
        LindbladModel::from_pairs(CMat::zeros(2, 2), [("minus", sigma_minus().scale_real(gamma.sqrt()))]).unwrap()
    }

    #[test]
    fn trajectory_validation() {
        let ev = |channel, time| JumpEvent { channel, time };
        assert!(Trajectory::new(2, 1.0, vec![ev(0, 0.5), ev(1, 0.5)]).is_err());
        assert!(Trajectory::new(2, 1.0, vec![ev(0, 0.0)]).is_err());
        assert!(Trajectory::new(2, 1.0, vec![ev(2, 0.5)]).is_err());
        assert!(Trajectory::new(2, 1.0, vec![ev(0, 1.5)]).is_err());
        let t = Trajectory::new(2, 1.0, vec![ev(1, 0.2), ev(1, 0.3), ev(0, 1.0)]).unwrap();
        assert_eq!(t.counts(), &[1, 2]);
    }

    #[test]
    fn no_jump_model_never_jumps() {
        let model = LindbladModel::from_pairs(sigma_x(), Vec::<(String, CMat)>::new()).unwrap();
        let t = sample_trajectory(&model, &basis_state(2, 0), 10.0, 3, &SamplerConfig::default()).unwrap();
        assert_eq!(t.n_jumps(), 0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = decay(1.3);
        let init = InitialState::Pure(basis_state(2, 1));
        let cfg = SamplerConfig::default();
        let a = sample_many(&model, &init, 2.0, 64, 99, &cfg).unwrap();
        let b = sample_many(&model, &init, 2.0, 64, 99, &cfg).unwrap();
        assert_eq!(a, b);
        let c = sample_many(&model, &init, 2.0, 64, 100, &cfg).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn decay_probability_closed_form() {
        let gamma = 0.7;
        let model = decay(gamma);
        let psi = basis_state(2, 1);
        let empty = Trajectory::new(1, 3.0, vec![]).unwrap();
        let p = trajectory_probability_density(&model, &psi, &empty).unwrap();
        assert!((p - (-gamma * 3.0f64).exp()).abs() < 1e-14);
        let one = Trajectory::new(1, 3.0, vec![JumpEvent { channel: 0, time: 1.0 }]).unwrap();
        let p = trajectory_probability_density(&model, &psi, &one).unwrap();
        assert!((p - gamma * (-gamma * 1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn scgf_estimate_at_zero_is_zero() {
        let model = decay(1.0);
        let stats = sample_many(
            &model,
            &InitialState::Pure(basis_state(2, 1)),
            1.0,
            10,
            1,
            &SamplerConfig::default(),
        )
        .unwrap();
        let obs = CountingObservable::scalar([1.0]);
        let e = estimate_scgf(&stats, &obs, &[0.0]).unwrap();
        assert_eq!(e.theta_hat, 0.0);
        assert!(e.degenerate);
        assert!(estimate_scgf(
            &SampleStats {
                records: stats.records[..1].to_vec(),
                ..stats.clone()
            },
            &obs,
            &[0.0]
        )
        .is_err());
    }

    #[test]
    fn ensemble_from_density() {
        let rho = CMat::diag(&[C64::new(0.25, 0.0), C64::new(0.75, 0.0)]);
        let init = InitialState::from_density(&rho).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hits = (0..4000).filter(|_| init.draw(&mut rng)[1].norm() > 0.5).count();
        assert!((hits as f64 / 4000.0 - 0.75).abs() < 0.03);
    }

    #[test]
    fn seeds_differ_per_index() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| trajectory_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
