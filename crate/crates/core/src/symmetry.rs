//! Jump-channel permutations, their unitary representation on the Hilbert
//! space and the induced linear action on counting observables.
//!
//! A symmetry is the triple `(R, V, U)`: `R` permutes channels, `V` is a unitary
//! with `V^dagger H V = H` and `V^dagger L_mu V = L_{R mu}`, and `U` is the
//! matrix with `alpha_{R mu} = U alpha_mu`, so that `K(R ω) = U K(ω)`.
//!
//! At the generator level this gives
//! `L_λ = C ∘ L_{(U^-1)^T λ} ∘ C^-1` with `C(X) = V X V^dagger`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg::{CMat, SuperOp};
use crate::lindblad::{tilted_generator, CountingObservable, LindbladModel, ModelError};
use crate::trajectories::Trajectory;

pub const UNITARITY_TOL: f64 = 1e-10;
pub const WEIGHT_TOL: f64 = 1e-12;
pub const DYNAMICS_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("channel map is not a permutation of 0..{n}")]
    NotAPermutation { n: usize },
    #[error("V is not unitary: ||V^dagger V - I|| = {residual:e}")]
    NotUnitary { residual: f64 },
    #[error("U must be square and invertible")]
    SingularU,
    #[error("symmetry acts on {sym} channels, model has {model}")]
    ChannelCount { sym: usize, model: usize },
    #[error("V is {v}x{v}, model dimension is {dim}")]
    Dimension { v: usize, dim: usize },
    #[error("U is {u}x{u}, observable dimension is {m}")]
    ObservableDimension { u: usize, m: usize },
    #[error("weights incompatible with U: alpha_(R mu) - U alpha_mu has norm {residual:e} at channel {channel}")]
    WeightMismatch { channel: usize, residual: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Channel permutation `R` (as `perm[mu] = R mu`), unitary `V` and observable map `U`.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutationSymmetry {
    perm: Vec<usize>,
    v: CMat,
    u: DMatrix<f64>,
    u_inv: DMatrix<f64>,
}

impl PermutationSymmetry {
    pub fn new(perm: Vec<usize>, v: CMat, u: DMatrix<f64>) -> Result<Self, SymmetryError> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(SymmetryError::NotAPermutation { n });
            }
            seen[p] = true;
        }
        if !v.is_square() {
            return Err(SymmetryError::NotUnitary {
                residual: f64::INFINITY,
            });
        }
        let residual = (&v.adjoint() * &v).distance(&CMat::identity(v.nrows()));
        if residual > UNITARITY_TOL {
            return Err(SymmetryError::NotUnitary { residual });
        }
        if !u.is_square() {
            return Err(SymmetryError::SingularU);
        }
        let u_inv = u.clone().try_inverse().ok_or(SymmetryError::SingularU)?;
        Ok(Self { perm, v, u, u_inv })
    }

    /// `U = -1` on a scalar observable.
    pub fn with_sign_flip(perm: Vec<usize>, v: CMat) -> Result<Self, SymmetryError> {
        Self::new(perm, v, DMatrix::from_element(1, 1, -1.0))
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn v(&self) -> &CMat {
        &self.v
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn inverse_perm(&self) -> Vec<usize> {
        let mut inv = vec![0; self.perm.len()];
        for (mu, &r) in self.perm.iter().enumerate() {
            inv[r] = mu;
        }
        inv
    }

    /// `(U^-1)^T λ`.
    pub fn map_tilt(&self, lambda: &[f64]) -> Vec<f64> {
        let l = nalgebra::DVector::from_column_slice(lambda);
        (self.u_inv.transpose() * l).iter().copied().collect()
    }

    /// `C(X) = V X V^dagger`.
    pub fn conjugation(&self) -> SuperOp {
        SuperOp::sandwich(&self.v, &self.v.adjoint())
    }

    /// `C^-1(X) = V^dagger X V`.
    pub fn conjugation_inverse(&self) -> SuperOp {
        SuperOp::sandwich(&self.v.adjoint(), &self.v)
    }

    pub fn check_model(&self, model: &LindbladModel) -> Result<(), SymmetryError> {
        if self.perm.len() != model.n_channels() {
            return Err(SymmetryError::ChannelCount {
                sym: self.perm.len(),
                model: model.n_channels(),
            });
        }
        if self.v.nrows() != model.dim() {
            return Err(SymmetryError::Dimension {
                v: self.v.nrows(),
                dim: model.dim(),
            });
        }
        Ok(())
    }

    /// Checks `alpha_{R mu} == U alpha_mu` for every channel.
    pub fn check_weights(&self, observable: &CountingObservable) -> Result<(), SymmetryError> {
        if self.u.nrows() != observable.m() {
            return Err(SymmetryError::ObservableDimension {
                u: self.u.nrows(),
                m: observable.m(),
            });
        }
        if self.perm.len() != observable.n_channels() {
            return Err(SymmetryError::ChannelCount {
                sym: self.perm.len(),
                model: observable.n_channels(),
            });
        }
        let w = observable.weights();
        for (mu, &r) in self.perm.iter().enumerate() {
            let alpha = nalgebra::DVector::from_column_slice(&w[mu]);
            let mapped = &self.u * alpha;
            let target = nalgebra::DVector::from_column_slice(&w[r]);
            let residual = (target - mapped).norm();
            if residual > WEIGHT_TOL {
                return Err(SymmetryError::WeightMismatch { channel: mu, residual });
            }
        }
        Ok(())
    }
}

/// Residuals of the Hilbert-space symmetry conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsSymmetryReport {
    /// `||V^dagger H V - H||`.
    pub hamiltonian_residual: f64,
    /// `max_mu ||V^dagger L_mu V - L_{R mu}||`.
    pub jump_residual: f64,
    /// `max_mu |Tr[L_mu^dagger L_mu] - Tr[L_{R mu}^dagger L_{R mu}]|`.
    pub rate_mismatch: f64,
    pub pass: bool,
}

pub fn check_dynamics_symmetry(
    model: &LindbladModel,
    sym: &PermutationSymmetry,
) -> Result<DynamicsSymmetryReport, SymmetryError> {
    sym.check_model(model)?;
    let v = sym.v();
    let vd = v.adjoint();
    let conj = |x: &CMat| &(&vd * x) * v;
    let hamiltonian_residual = conj(model.hamiltonian()).distance(model.hamiltonian());
    let jumps = model.jumps();
    let hs_norm = |x: &CMat| (&x.adjoint() * x).trace().re;
    let mut jump_residual: f64 = 0.0;
    let mut rate_mismatch: f64 = 0.0;
    for (mu, &r) in sym.perm().iter().enumerate() {
        jump_residual = jump_residual.max(conj(&jumps[mu].op).distance(&jumps[r].op));
        rate_mismatch = rate_mismatch.max((hs_norm(&jumps[mu].op) - hs_norm(&jumps[r].op)).abs());
    }
    Ok(DynamicsSymmetryReport {
        hamiltonian_residual,
        jump_residual,
        rate_mismatch,
        pass: hamiltonian_residual <= DYNAMICS_TOL && jump_residual <= DYNAMICS_TOL,
    })
}

/// Frobenius residual of `L_λ - C ∘ L_{(U^-1)^T λ} ∘ C^-1`.
pub fn check_tilted_symmetry(
    model: &LindbladModel,
    observable: &CountingObservable,
    sym: &PermutationSymmetry,
    lambda: &[f64],
) -> Result<f64, SymmetryError> {
    sym.check_model(model)?;
    sym.check_weights(observable)?;
    let lhs = tilted_generator(model, observable, lambda)?;
    let mapped = tilted_generator(model, observable, &sym.map_tilt(lambda))?;
    let rhs = sym
        .conjugation()
        .compose(&mapped.superop)
        .compose(&sym.conjugation_inverse());
    Ok(lhs.superop.distance(&rhs))
}

/// Norm of the commutator between the Hamiltonian part and the tilted
/// dissipator. Zero means the two can be diagonalized separately and the
/// dynamics reduces to classical hopping between Hamiltonian eigenstates.
pub fn hamiltonian_dissipator_commutator(
    model: &LindbladModel,
    observable: &CountingObservable,
    lambda: &[f64],
) -> Result<f64, SymmetryError> {
    let full = tilted_generator(model, observable, lambda)?;
    let ham = SuperOp::commutator(model.hamiltonian());
    let diss = full.superop.sub(&ham);
    Ok(ham.compose(&diss).distance(&diss.compose(&ham)))
}

/// Relabels every jump of a trajectory with `R`; times are unchanged.
pub fn transform_trajectory(traj: &Trajectory, sym: &PermutationSymmetry) -> Trajectory {
    traj.relabel(sym.perm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::*;
    use crate::trajectories::JumpEvent;

    fn qubit(gm: f64, gp: f64) -> (LindbladModel, CountingObservable, PermutationSymmetry) {
        let model = LindbladModel::from_pairs(
            sigma_x().scale_real(0.5),
            [
                ("minus", sigma_minus().scale_real(gm.sqrt())),
                ("plus", sigma_plus().scale_real(gp.sqrt())),
            ],
        )
        .unwrap();
        let sym = PermutationSymmetry::with_sign_flip(vec![1, 0], sigma_x()).unwrap();
        (model, CountingObservable::scalar([-1.0, 1.0]), sym)
    }

    #[test]
    fn symmetric_qubit_passes() {
        let (model, obs, sym) = qubit(1.0, 1.0);
        let report = check_dynamics_symmetry(&model, &sym).unwrap();
        assert!(report.pass);
        assert!(report.rate_mismatch < 1e-14);
        for lambda in [0.0, 0.7, -1.3] {
            assert!(check_tilted_symmetry(&model, &obs, &sym, &[lambda]).unwrap() < 1e-12);
        }
    }

    #[test]
    fn identity_symmetry_passes_any_model() {
        let (model, obs, _) = qubit(0.3, 2.0);
        let id = PermutationSymmetry::new(vec![0, 1], CMat::identity(2), DMatrix::identity(1, 1)).unwrap();
        assert!(check_dynamics_symmetry(&model, &id).unwrap().pass);
        assert!(check_tilted_symmetry(&model, &obs, &id, &[0.4]).unwrap() < 1e-14);
    }

    #[test]
    fn unequal_rates_break_the_symmetry() {
        let (gm, gp) = (1.0, 2.0);
        let (model, obs, sym) = qubit(gm, gp);
        let report = check_dynamics_symmetry(&model, &sym).unwrap();
        assert!(!report.pass);
        assert!((report.jump_residual - (gp.sqrt() - gm.sqrt()).abs()).abs() < 1e-14);
        assert!(check_tilted_symmetry(&model, &obs, &sym, &[0.5]).unwrap() > 1e-3);
    }

    #[test]
    fn invalid_symmetries_are_rejected() {
        assert!(matches!(
            PermutationSymmetry::with_sign_flip(vec![0, 0], sigma_x()),
            Err(SymmetryError::NotAPermutation { .. })
        ));
        assert!(matches!(
            PermutationSymmetry::with_sign_flip(vec![1, 0], sigma_x().scale_real(2.0)),
            Err(SymmetryError::NotUnitary { .. })
        ));
        assert!(matches!(
            PermutationSymmetry::new(vec![1, 0], sigma_x(), DMatrix::zeros(1, 1)),
            Err(SymmetryError::SingularU)
        ));
        let (_, _, sym) = qubit(1.0, 1.0);
        let wrong = CountingObservable::scalar([1.0, 1.0]);
        assert!(matches!(
            sym.check_weights(&wrong),
            Err(SymmetryError::WeightMismatch { .. })
        ));
    }

    #[test]
    fn commuting_hamiltonian_diagnostic() {
        let sz = LindbladModel::from_pairs(sigma_z(), [("minus", sigma_minus()), ("plus", sigma_plus())]).unwrap();
        let obs = CountingObservable::scalar([-1.0, 1.0]);
        assert!(hamiltonian_dissipator_commutator(&sz, &obs, &[0.6]).unwrap() < 1e-12);
        let (sx, obs, _) = qubit(1.0, 1.0);
        assert!(hamiltonian_dissipator_commutator(&sx, &obs, &[0.6]).unwrap() > 1e-2);
    }

    #[test]
    fn trajectory_relabeling() {
        let (_, obs, sym) = qubit(1.0, 1.0);
        let empty = Trajectory::new(2, 1.0, vec![]).unwrap();
        assert_eq!(transform_trajectory(&empty, &sym), empty);

        let ev = |channel, time| JumpEvent { channel, time };
        let traj = Trajectory::new(2, 1.0, vec![ev(1, 0.2), ev(0, 0.9)]).unwrap();
        let mapped = transform_trajectory(&traj, &sym);
        assert_eq!(mapped.events(), &[ev(0, 0.2), ev(1, 0.9)]);
        let k = obs.observe(traj.counts());
        let km = obs.observe(mapped.counts());
        assert_eq!(km[0], -k[0]);
    }
}
