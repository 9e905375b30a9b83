//! Open-system models in diagonal Lindblad form, counting observables and the
//! tilted generators that produce their moment generating functions.

use thiserror::Error;

use crate::linalg::{CMat, LinalgError, SuperOp, C64, I};

/// Hermiticity tolerance for Hamiltonians, relative to `max(1, ||H||)`.
pub const HAMILTONIAN_HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("Hamiltonian must be square, got {rows}x{cols}")]
    HamiltonianNotSquare { rows: usize, cols: usize },
    #[error("Hamiltonian is not Hermitian (anti-Hermitian part has norm {residual:e})")]
    NonHermitianHamiltonian { residual: f64 },
    #[error("jump operator '{label}' is {rows}x{cols}, expected {dim}x{dim}")]
    JumpShape {
        label: String,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("duplicate jump label '{0}'")]
    DuplicateLabel(String),
    #[error("observable has {weights} weight vectors but the model has {channels} jump channels")]
    ChannelCount { weights: usize, channels: usize },
    #[error("weight vector {channel} has length {len}, expected {m}")]
    WeightLength { channel: usize, len: usize, m: usize },
    #[error("observable dimension must be positive")]
    EmptyObservable,
    #[error("non-finite weight in channel {0}")]
    NonFiniteWeight(usize),
    #[error("tilt vector has length {len}, observable dimension is {m}")]
    LambdaLength { len: usize, m: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A labeled jump operator `L_mu` with its rate folded in.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpOperator {
    pub label: String,
    pub op: CMat,
}

/// Hamiltonian plus jump operators of a Markovian master equation.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladModel {
    dim: usize,
    hamiltonian: CMat,
    jumps: Vec<JumpOperator>,
}

impl LindbladModel {
    pub fn new(hamiltonian: CMat, jumps: Vec<JumpOperator>) -> Result<Self, ModelError> {
        if !hamiltonian.is_square() {
            return Err(ModelError::HamiltonianNotSquare {
                rows: hamiltonian.nrows(),
                cols: hamiltonian.ncols(),
            });
        }
        let residual = hamiltonian.hermiticity_residual();
        if residual > HAMILTONIAN_HERMITICITY_TOL * hamiltonian.norm().max(1.0) {
            return Err(ModelError::NonHermitianHamiltonian { residual });
        }
        let dim = hamiltonian.nrows();
        for (k, jump) in jumps.iter().enumerate() {
            if jump.op.nrows() != dim || jump.op.ncols() != dim {
                return Err(ModelError::JumpShape {
                    label: jump.label.clone(),
                    rows: jump.op.nrows(),
                    cols: jump.op.ncols(),
                    dim,
                });
            }
            if jumps[..k].iter().any(|j| j.label == jump.label) {
                return Err(ModelError::DuplicateLabel(jump.label.clone()));
            }
        }
        Ok(Self {
            dim,
            hamiltonian,
            jumps,
        })
    }

    /// Convenience constructor from `(label, operator)` pairs.
    pub fn from_pairs<S: Into<String>>(
        hamiltonian: CMat,
        jumps: impl IntoIterator<Item = (S, CMat)>,
    ) -> Result<Self, ModelError> {
        let jumps = jumps
            .into_iter()
            .map(|(label, op)| JumpOperator {
                label: label.into(),
                op,
            })
            .collect();
        Self::new(hamiltonian, jumps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    pub fn n_channels(&self) -> usize {
        self.jumps.len()
    }

    pub fn jump_ops(&self) -> impl Iterator<Item = &CMat> {
        self.jumps.iter().map(|j| &j.op)
    }

    /// `H - (i/2) sum_mu L_mu^dagger L_mu`.
    pub fn effective_hamiltonian(&self) -> CMat {
        effective_hamiltonian(self)
    }

    /// The untilted Lindblad generator.
    pub fn generator(&self) -> SuperOp {
        assemble_generator(&self.hamiltonian, self.jumps.iter().map(|j| (&j.op, 1.0)))
    }
}

/// Per-channel weight vectors defining `K = sum_mu Q_mu alpha_mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountingObservable {
    m: usize,
    weights: Vec<Vec<f64>>,
}

impl CountingObservable {
    pub fn new(m: usize, weights: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if m == 0 {
            return Err(ModelError::EmptyObservable);
        }
        for (channel, w) in weights.iter().enumerate() {
            if w.len() != m {
                return Err(ModelError::WeightLength {
                    channel,
                    len: w.len(),
                    m,
                });
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(ModelError::NonFiniteWeight(channel));
            }
        }
        Ok(Self { m, weights })
    }

    /// Scalar observable with one weight per channel.
    pub fn scalar(weights: impl IntoIterator<Item = f64>) -> Self {
        Self {
            m: 1,
            weights: weights.into_iter().map(|w| vec![w]).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn n_channels(&self) -> usize {
        self.weights.len()
    }

    pub fn check_model(&self, model: &LindbladModel) -> Result<(), ModelError> {
        if self.weights.len() != model.n_channels() {
            return Err(ModelError::ChannelCount {
                weights: self.weights.len(),
                channels: model.n_channels(),
            });
        }
        Ok(())
    }

    pub fn check_lambda(&self, lambda: &[f64]) -> Result<(), ModelError> {
        if lambda.len() != self.m {
            return Err(ModelError::LambdaLength {
                len: lambda.len(),
                m: self.m,
            });
        }
        Ok(())
    }

    /// `lambda^T alpha_mu`.
    pub fn projection(&self, channel: usize, lambda: &[f64]) -> f64 {
        self.weights[channel].iter().zip(lambda).map(|(a, l)| a * l).sum()
    }

    /// `exp(-lambda^T alpha_mu)`, the weight of channel `mu` in the tilted generator.
    pub fn tilt_factor(&self, channel: usize, lambda: &[f64]) -> f64 {
        (-self.projection(channel, lambda)).exp()
    }

    /// `K = sum_mu Q_mu alpha_mu` from per-channel counts.
    pub fn observe(&self, counts: &[u64]) -> Vec<f64> {
        let mut k = vec![0.0; self.m];
        for (q, w) in counts.iter().zip(&self.weights) {
            for (ki, wi) in k.iter_mut().zip(w) {
                *ki += *q as f64 * wi;
            }
        }
        k
    }
}

/// Superoperator of a tilted (or untilted) Lindblad generator at a fixed tilt.
#[derive(Clone, Debug, PartialEq)]
pub struct TiltedGenerator {
    pub superop: SuperOp,
    pub lambda: Vec<f64>,
}

impl TiltedGenerator {
    pub fn dim(&self) -> usize {
        self.superop.dim()
    }

    /// Norm of the dual applied to the identity; zero for trace-preserving maps.
    pub fn trace_defect(&self) -> f64 {
        let id = CMat::identity(self.dim());
        self.superop
            .dual()
            .apply(&id)
            .map(|m| m.norm())
            .unwrap_or(f64::INFINITY)
    }
}

/// `H - (i/2) sum_mu L_mu^dagger L_mu`.
pub fn effective_hamiltonian(model: &LindbladModel) -> CMat {
    let mut h = model.hamiltonian.clone();
    for jump in &model.jumps {
        let ldl = &jump.op.adjoint() * &jump.op;
        h = &h - &ldl.scale(I * 0.5);
    }
    h
}

/// Generator `-i[H, .] + sum_mu (w_mu L ρ L^dagger - 1/2 {L^dagger L, ρ})` with
/// per-channel weights `w_mu` on the jump term only.
pub fn assemble_generator<'a>(hamiltonian: &CMat, jumps: impl IntoIterator<Item = (&'a CMat, f64)>) -> SuperOp {
    let mut s = SuperOp::commutator(hamiltonian);
    for (op, weight) in jumps {
        let jump = SuperOp::sandwich(op, &op.adjoint()).scale(C64::new(weight, 0.0));
        let ldl = &op.adjoint() * op;
        s = s.add(&jump).add(&SuperOp::anticommutator_half(&ldl));
    }
    s
}

/// Tilted generator with channel `mu` reweighted by `exp(-lambda^T alpha_mu)`.
pub fn tilted_generator(
    model: &LindbladModel,
    observable: &CountingObservable,
    lambda: &[f64],
) -> Result<TiltedGenerator, ModelError> {
    observable.check_model(model)?;
    observable.check_lambda(lambda)?;
    let superop = assemble_generator(
        &model.hamiltonian,
        model
            .jumps
            .iter()
            .enumerate()
            .map(|(mu, j)| (&j.op, observable.tilt_factor(mu, lambda))),
    );
    Ok(TiltedGenerator {
        superop,
        lambda: lambda.to_vec(),
    })
}

/// Applies the generator to a density matrix.
pub fn apply_generator(gen: &TiltedGenerator, rho: &CMat) -> Result<CMat, ModelError> {
    Ok(gen.superop.apply(rho)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::*;
    use crate::linalg::ONE;

    fn qubit(omega: f64, gamma_minus: f64, gamma_plus: f64) -> (LindbladModel, CountingObservable) {
        let model = LindbladModel::from_pairs(
            sigma_x().scale_real(omega),
            [
                ("minus", sigma_minus().scale_real(gamma_minus.sqrt())),
                ("plus", sigma_plus().scale_real(gamma_plus.sqrt())),
            ],
        )
        .unwrap();
        (model, CountingObservable::scalar([-1.0, 1.0]))
    }

    #[test]
    fn effective_hamiltonian_of_symmetric_qubit() {
        let (model, _) = qubit(0.7, 1.3, 1.3);
        let expected = &sigma_x().scale_real(0.7) - &CMat::identity(2).scale(I * 0.65);
        assert!(model.effective_hamiltonian().distance(&expected) < 1e-15);

        let bare = LindbladModel::from_pairs(sigma_z(), Vec::<(String, CMat)>::new()).unwrap();
        assert_eq!(bare.effective_hamiltonian(), sigma_z());
    }

    #[test]
    fn effective_hamiltonian_is_dissipative() {
        let (model, _) = qubit(0.4, 0.3, 2.0);
        let heff = model.effective_hamiltonian();
        let gamma = (&heff - &heff.adjoint()).scale(-I * 0.5);
        let eig = nalgebra::SymmetricEigen::new(gamma.hermitian_part().into_matrix());
        assert!(eig.eigenvalues.iter().all(|&e| e <= 1e-14));
    }

    #[test]
    fn untilted_generator_preserves_trace() {
        let (model, obs) = qubit(0.5, 1.0, 2.0);
        let gen = tilted_generator(&model, &obs, &[0.0]).unwrap();
        assert!(gen.trace_defect() < 1e-12);
        let tilted = tilted_generator(&model, &obs, &[0.4]).unwrap();
        assert!(tilted.trace_defect() > 1e-2);
    }

    #[test]
    fn tilted_qubit_matches_hand_assembly() {
        let (omega, gamma, lambda) = (0.5, 1.0, 0.3);
        let (model, obs) = qubit(omega, gamma, gamma);
        let gen = tilted_generator(&model, &obs, &[lambda]).unwrap();
        // Hand assembly from vec(AXB) = (B^T ⊗ A) vec(X).
        let id = CMat::identity(2);
        let h = sigma_x().scale_real(omega);
        let (sp, sm) = (sigma_plus(), sigma_minus());
        let lr = |a: &CMat, b: &CMat| crate::linalg::kron(&b.transpose(), a);
        let pm = &sp * &sm;
        let mp = &sm * &sp;
        let mut expected = (&lr(&h, &id) - &lr(&id, &h)).scale(-I);
        expected = &expected + &lr(&sm, &sp).scale_real(gamma * lambda.exp());
        expected = &expected - &(&lr(&pm, &id) + &lr(&id, &pm)).scale_real(0.5 * gamma);
        expected = &expected + &lr(&sp, &sm).scale_real(gamma * (-lambda).exp());
        expected = &expected - &(&lr(&mp, &id) + &lr(&id, &mp)).scale_real(0.5 * gamma);
        assert!(gen.superop.matrix().distance(&expected) < 1e-14);
    }

    #[test]
    fn rescaling_weights_and_tilt_is_invariant() {
        let (model, _) = qubit(0.5, 1.0, 2.0);
        let a = CountingObservable::scalar([-1.0, 1.0]);
        let b = CountingObservable::scalar([-4.0, 4.0]);
        let ga = tilted_generator(&model, &a, &[0.8]).unwrap();
        let gb = tilted_generator(&model, &b, &[0.2]).unwrap();
        assert!(ga.superop.distance(&gb.superop) < 1e-14);
    }

    #[test]
    fn channel_additivity() {
        let (model, _) = qubit(0.5, 1.0, 2.0);
        let only_plus = CountingObservable::scalar([0.0, 1.0]);
        let gen = tilted_generator(&model, &only_plus, &[0.6]).unwrap();
        let base = model.generator();
        let lp = &model.jumps()[1].op;
        let extra = SuperOp::sandwich(lp, &lp.adjoint()).scale(C64::new((-0.6f64).exp() - 1.0, 0.0));
        assert!(gen.superop.distance(&base.add(&extra)) < 1e-14);
    }

    #[test]
    fn validation_errors() {
        let bad_h = CMat::from_rows(&[vec![ONE, I], vec![I, ONE]]);
        assert!(matches!(
            LindbladModel::from_pairs(bad_h, Vec::<(String, CMat)>::new()),
            Err(ModelError::NonHermitianHamiltonian { .. })
        ));
        assert!(matches!(
            LindbladModel::from_pairs(sigma_x(), [("a", CMat::identity(3))]),
            Err(ModelError::JumpShape { .. })
        ));
        assert!(matches!(
            LindbladModel::from_pairs(sigma_x(), [("a", sigma_plus()), ("a", sigma_minus())]),
            Err(ModelError::DuplicateLabel(_))
        ));
        let (model, _) = qubit(1.0, 1.0, 1.0);
        let obs = CountingObservable::scalar([1.0]);
        assert!(matches!(
            tilted_generator(&model, &obs, &[0.0]),
            Err(ModelError::ChannelCount { .. })
        ));
        let obs = CountingObservable::scalar([1.0, -1.0]);
        assert!(matches!(
            tilted_generator(&model, &obs, &[0.0, 1.0]),
            Err(ModelError::LambdaLength { .. })
        ));
        assert!(CountingObservable::new(2, vec![vec![1.0]]).is_err());
    }
}
