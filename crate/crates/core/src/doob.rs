//! Generalized Doob transform of a tilted generator, its Lindblad form, the
//! tilted Doob generator, and the symmetry-induced similarity and fluctuation
//! relations of the Doob dynamics.
//!
//! With `W_s(X) = ℓ_s^{1/2} X ℓ_s^{1/2}` the Doob generator is
//! `W_s ∘ L_s ∘ W_s^-1 - θ(s)`; it is again of Lindblad form with
//! `H_s = (ℓ^{1/2} H_eff ℓ^{-1/2} + h.c.) / 2` and
//! `L_mu^s = exp(-s·α_mu / 2) ℓ^{1/2} L_mu ℓ^{-1/2}`.

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::grid::GridSpec;
use crate::linalg::{sqrtm_psd, CMat, LinalgError, SuperOp, C64};
use crate::lindblad::{
    effective_hamiltonian, tilted_generator, CountingObservable, JumpOperator, LindbladModel, ModelError,
    TiltedGenerator,
};
use crate::spectral::{scgf_at, scgf_with, SpectralConfig, SpectralError};
use crate::symmetry::{check_dynamics_symmetry, DynamicsSymmetryReport, PermutationSymmetry, SymmetryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DoobError {
    #[error("Lindblad form of the Doob generator deviates from the conjugated generator by {residual:e}")]
    Inconsistent { residual: f64 },
    #[error("conjugation and re-tilt constructions of the tilted Doob generator differ by {residual:e}")]
    RouteMismatch { residual: f64 },
    #[error("bias has length {len}, observable dimension is {m}")]
    BiasLength { len: usize, m: usize },
    #[error("symmetry precondition failed: H residual {h:e}, jump residual {jumps:e}", h = .0.hamiltonian_residual, jumps = .0.jump_residual)]
    SymmetryPrecondition(DynamicsSymmetryReport),
    #[error("symmetry precondition failed: {0}")]
    SymmetryInvalid(SymmetryError),
    #[error("U must be square and invertible with side {m}")]
    BadU { m: usize },
    #[error("grid pairing failed: {0}")]
    GridPairing(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoobConfig {
    pub spectral: SpectralConfig,
    /// Smallest admissible eigenvalue of `ℓ_s`.
    pub psd_tol: f64,
    /// Agreement required between independent constructions, relative to
    /// `max(1, ||generator||)`.
    pub consistency_tol: f64,
}

impl Default for DoobConfig {
    fn default() -> Self {
        Self {
            spectral: SpectralConfig::default(),
            psd_tol: 1e-10,
            consistency_tol: 1e-8,
        }
    }
}

/// Doob dynamics at bias `s`, stored in Lindblad form.
#[derive(Clone, Debug)]
pub struct DoobModel {
    s: Vec<f64>,
    theta_s: f64,
    l_half: CMat,
    l_half_inv: CMat,
    r_s: Option<CMat>,
    base: LindbladModel,
    observable: CountingObservable,
    model: LindbladModel,
    consistency_residual: f64,
}

impl DoobModel {
    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn theta_s(&self) -> f64 {
        self.theta_s
    }

    /// `ℓ_s^{1/2}`.
    pub fn l_half(&self) -> &CMat {
        &self.l_half
    }

    pub fn l_half_inv(&self) -> &CMat {
        &self.l_half_inv
    }

    pub fn hamiltonian_s(&self) -> &CMat {
        self.model.hamiltonian()
    }

    pub fn jumps_s(&self) -> impl Iterator<Item = &CMat> {
        self.model.jump_ops()
    }

    pub fn base(&self) -> &LindbladModel {
        &self.base
    }

    pub fn observable(&self) -> &CountingObservable {
        &self.observable
    }

    /// The Doob dynamics as an ordinary Lindblad model.
    pub fn model(&self) -> &LindbladModel {
        &self.model
    }

    /// Distance between the assembled Lindblad form and `W S_s W^-1 - θ(s)`.
    pub fn consistency_residual(&self) -> f64 {
        self.consistency_residual
    }

    /// Superoperator of `W_s`.
    pub fn w(&self) -> SuperOp {
        SuperOp::sandwich(&self.l_half, &self.l_half)
    }

    pub fn w_inv(&self) -> SuperOp {
        SuperOp::sandwich(&self.l_half_inv, &self.l_half_inv)
    }

    /// `‖(L^Doob)^*(1)‖`; zero for a probability-preserving dynamics.
    pub fn trace_defect(&self) -> f64 {
        TiltedGenerator {
            superop: self.model.generator(),
            lambda: vec![0.0; self.observable.m()],
        }
        .trace_defect()
    }

    /// Stationary state `ℓ^{1/2} r ℓ^{1/2} / Tr[...]` of the Doob dynamics.
    pub fn stationary_state(&self, cfg: &SpectralConfig) -> Result<CMat, DoobError> {
        let rho = match &self.r_s {
            Some(r) => &(&self.l_half * r) * &self.l_half,
            None => {
                let gen = TiltedGenerator {
                    superop: self.model.generator(),
                    lambda: vec![0.0; self.observable.m()],
                };
                scgf_with(&gen, cfg)?.r
            }
        };
        let tr = rho.trace();
        Ok(rho.scale(C64::new(1.0, 0.0) / tr).hermitian_part())
    }
}

fn check_bias(observable: &CountingObservable, s: &[f64]) -> Result<(), DoobError> {
    if s.len() != observable.m() {
        return Err(DoobError::BiasLength {
            len: s.len(),
            m: observable.m(),
        });
    }
    Ok(())
}

/// Builds the Doob dynamics at bias `s`. At `s = 0` the base model is returned
/// unchanged.
pub fn doob_transform(
    model: &LindbladModel,
    observable: &CountingObservable,
    s: &[f64],
    cfg: &DoobConfig,
) -> Result<DoobModel, DoobError> {
    observable.check_model(model)?;
    check_bias(observable, s)?;
    let d = model.dim();
    if s.iter().all(|x| *x == 0.0) {
        return Ok(DoobModel {
            s: s.to_vec(),
            theta_s: 0.0,
            l_half: CMat::identity(d),
            l_half_inv: CMat::identity(d),
            r_s: None,
            base: model.clone(),
            observable: observable.clone(),
            model: model.clone(),
            consistency_residual: 0.0,
        });
    }

    let data = scgf_at(model, observable, s, &cfg.spectral)?;
    let root = sqrtm_psd(&data.l, cfg.psd_tol)?;
    let (lh, lhi) = (root.root, root.inv_root);

    let h_eff = effective_hamiltonian(model);
    let hamiltonian_s = (&(&lh * &h_eff) * &lhi).hermitian_part();
    let jumps_s = model
        .jumps()
        .iter()
        .enumerate()
        .map(|(mu, j)| JumpOperator {
            label: j.label.clone(),
            op: (&(&lh * &j.op) * &lhi).scale_real((-0.5 * observable.projection(mu, s)).exp()),
        })
        .collect();
    let doob_model = LindbladModel::new(hamiltonian_s, jumps_s)?;

    let w = SuperOp::sandwich(&lh, &lh);
    let w_inv = SuperOp::sandwich(&lhi, &lhi);
    let tilted = tilted_generator(model, observable, s)?;
    let conjugated = w
        .compose(&tilted.superop)
        .compose(&w_inv)
        .sub(&SuperOp::identity(d).scale(C64::new(data.theta, 0.0)));
    let residual = doob_model.generator().distance(&conjugated);
    if residual > cfg.consistency_tol * conjugated.matrix().norm().max(1.0) {
        return Err(DoobError::Inconsistent { residual });
    }

    Ok(DoobModel {
        s: s.to_vec(),
        theta_s: data.theta,
        l_half: lh,
        l_half_inv: lhi,
        r_s: Some(data.r),
        base: model.clone(),
        observable: observable.clone(),
        model: doob_model,
        consistency_residual: residual,
    })
}

/// `W_s ∘ L_{λ+s} ∘ W_s^-1 - θ(s)`, cross-checked against tilting the Doob
/// Lindblad form directly.
pub fn tilted_doob(doob: &DoobModel, lambda: &[f64], cfg: &DoobConfig) -> Result<TiltedGenerator, DoobError> {
    let obs = &doob.observable;
    obs.check_lambda(lambda)?;
    let shifted: Vec<f64> = lambda.iter().zip(&doob.s).map(|(l, s)| l + s).collect();
    let base = tilted_generator(&doob.base, obs, &shifted)?;
    let d = doob.base.dim();
    let conjugated = doob
        .w()
        .compose(&base.superop)
        .compose(&doob.w_inv())
        .sub(&SuperOp::identity(d).scale(C64::new(doob.theta_s, 0.0)));
    let retilted = tilted_generator(&doob.model, obs, lambda)?;
    let residual = conjugated.distance(&retilted.superop);
    if residual > cfg.consistency_tol * conjugated.matrix().norm().max(1.0) {
        return Err(DoobError::RouteMismatch { residual });
    }
    Ok(TiltedGenerator {
        superop: conjugated,
        lambda: lambda.to_vec(),
    })
}

/// `θ_s(λ)`: dominant eigenvalue of the tilted Doob generator.
pub fn doob_scgf(doob: &DoobModel, lambda: &[f64], cfg: &DoobConfig) -> Result<f64, DoobError> {
    Ok(scgf_with(&tilted_doob(doob, lambda, cfg)?, &cfg.spectral)?.theta)
}

fn invert_u(u: &DMatrix<f64>, m: usize) -> Result<DMatrix<f64>, DoobError> {
    if u.nrows() != m || u.ncols() != m {
        return Err(DoobError::BadU { m });
    }
    u.clone().try_inverse().ok_or(DoobError::BadU { m })
}

/// `(U^-1)^T (λ + s) - s`.
pub fn fr_map(u_inv: &DMatrix<f64>, s: &[f64], lambda: &[f64]) -> Vec<f64> {
    let shifted = DVector::from_iterator(s.len(), lambda.iter().zip(s).map(|(l, s)| l + s));
    let mapped = u_inv.transpose() * shifted;
    mapped.iter().zip(s).map(|(x, s)| x - s).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityReport {
    pub lambda: Vec<f64>,
    pub lambda_mapped: Vec<f64>,
    pub residual: f64,
    pub pass: bool,
}

/// Checks `L^Doob_{λ,s} = A_s ∘ L^Doob_{λ',s} ∘ A_s^-1` with
/// `A_s = W_s ∘ C ∘ W_s^-1`, `C(X) = V X V^dagger` and `λ' = (U^-1)^T (λ+s) - s`.
pub fn verify_similarity(
    model: &LindbladModel,
    observable: &CountingObservable,
    sym: &PermutationSymmetry,
    s: &[f64],
    lambda: &[f64],
    cfg: &DoobConfig,
) -> Result<SimilarityReport, DoobError> {
    let report = check_dynamics_symmetry(model, sym).map_err(DoobError::SymmetryInvalid)?;
    if !report.pass {
        return Err(DoobError::SymmetryPrecondition(report));
    }
    sym.check_weights(observable).map_err(DoobError::SymmetryInvalid)?;
    check_bias(observable, s)?;
    observable.check_lambda(lambda)?;

    let doob = doob_transform(model, observable, s, cfg)?;
    let u_inv = invert_u(sym.u(), observable.m())?;
    let lambda_mapped = fr_map(&u_inv, s, lambda);
    let lhs = tilted_doob(&doob, lambda, cfg)?;
    let inner = tilted_doob(&doob, &lambda_mapped, cfg)?;
    let (w, w_inv) = (doob.w(), doob.w_inv());
    let a = w.compose(&sym.conjugation()).compose(&w_inv);
    let a_inv = w.compose(&sym.conjugation_inverse()).compose(&w_inv);
    let rhs = a.compose(&inner.superop).compose(&a_inv);
    let residual = lhs.superop.distance(&rhs);
    Ok(SimilarityReport {
        lambda: lambda.to_vec(),
        lambda_mapped,
        residual,
        pass: residual <= cfg.consistency_tol,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrPair {
    pub lambda: Vec<f64>,
    pub lambda_mapped: Vec<f64>,
    pub theta: f64,
    pub theta_mapped: f64,
    /// `θ(λ+s) - θ(s)` evaluated on the base model.
    pub theta_shift: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrReport {
    pub s: Vec<f64>,
    pub u: DMatrix<f64>,
    pub pairs: Vec<FrPair>,
    /// Largest `|θ_s(λ) - θ_s(λ')|`.
    pub max_residual: f64,
    /// Largest `|θ_s(λ) - (θ(λ+s) - θ(s))|` over both members of every pair.
    pub max_shift_residual: f64,
    pub pass: bool,
}

/// Fluctuation relation at explicitly supplied tilts: each `λ` is paired with
/// its image `(U^-1)^T (λ+s) - s`, which is evaluated directly.
pub fn verify_fluctuation_relation(
    model: &LindbladModel,
    observable: &CountingObservable,
    u: &DMatrix<f64>,
    s: &[f64],
    lambdas: &[Vec<f64>],
    cfg: &DoobConfig,
) -> Result<FrReport, DoobError> {
    check_bias(observable, s)?;
    let u_inv = invert_u(u, observable.m())?;
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = lambdas
        .iter()
        .map(|l| {
            observable.check_lambda(l)?;
            Ok((l.clone(), fr_map(&u_inv, s, l)))
        })
        .collect::<Result<_, DoobError>>()?;
    evaluate_pairs(model, observable, u, s, pairs, cfg)
}

fn evaluate_pairs(
    model: &LindbladModel,
    observable: &CountingObservable,
    u: &DMatrix<f64>,
    s: &[f64],
    pairs: Vec<(Vec<f64>, Vec<f64>)>,
    cfg: &DoobConfig,
) -> Result<FrReport, DoobError> {
    if pairs.is_empty() {
        return Err(DoobError::GridPairing("no tilt points to pair".into()));
    }
    let doob = doob_transform(model, observable, s, cfg)?;
    let theta_base_s = doob.theta_s();
    let shift_theta = |l: &[f64]| -> Result<f64, DoobError> {
        let shifted: Vec<f64> = l.iter().zip(s).map(|(a, b)| a + b).collect();
        Ok(scgf_at(model, observable, &shifted, &cfg.spectral)?.theta - theta_base_s)
    };
    let evaluated = pairs
        .into_par_iter()
        .map(|(lambda, lambda_mapped)| {
            let theta = doob_scgf(&doob, &lambda, cfg)?;
            let theta_mapped = doob_scgf(&doob, &lambda_mapped, cfg)?;
            let theta_shift = shift_theta(&lambda)?;
            let shift_mapped = shift_theta(&lambda_mapped)?;
            let shift_residual = (theta - theta_shift).abs().max((theta_mapped - shift_mapped).abs());
            Ok((
                FrPair {
                    lambda,
                    lambda_mapped,
                    theta,
                    theta_mapped,
                    theta_shift,
                },
                shift_residual,
            ))
        })
        .collect::<Result<Vec<_>, DoobError>>()?;
    let max_residual = evaluated
        .iter()
        .map(|(p, _)| (p.theta - p.theta_mapped).abs())
        .fold(0.0, f64::max);
    let max_shift_residual = evaluated.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    Ok(FrReport {
        s: s.to_vec(),
        u: u.clone(),
        pairs: evaluated.into_iter().map(|(p, _)| p).collect(),
        max_residual,
        max_shift_residual,
        pass: max_residual <= cfg.consistency_tol,
    })
}

pub type RationalPair = (Vec<Ratio<i64>>, Vec<Ratio<i64>>);

/// Pairing of a product grid with itself under `λ ↦ (U^-1)^T (λ+s) - s`,
/// computed in exact rational arithmetic. `U^-1` must have integer entries.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPairing {
    /// `(λ, image)` pairs.
    pub pairs: Vec<RationalPair>,
    /// Grid points whose image falls outside the grid's range.
    pub unpaired: usize,
}

pub fn pair_grid(u: &DMatrix<f64>, s: &[Ratio<i64>], grids: &[GridSpec]) -> Result<GridPairing, DoobError> {
    let m = grids.len();
    if s.len() != m {
        return Err(DoobError::BiasLength { len: s.len(), m });
    }
    let u_inv = invert_u(u, m)?;
    let mut u_inv_t = vec![vec![Ratio::zero(); m]; m];
    for i in 0..m {
        for j in 0..m {
            let x = u_inv[(j, i)];
            let r = x.round();
            if (x - r).abs() > 1e-12 || r.abs() > i64::MAX as f64 / 4.0 {
                return Err(DoobError::GridPairing(format!(
                    "(U^-1) entry {x} is not an integer; exact pairing is unavailable"
                )));
            }
            u_inv_t[i][j] = Ratio::from_integer(r as i64);
        }
    }
    let axes: Vec<Vec<Ratio<i64>>> = grids.iter().map(|g| g.points()).collect();
    let mut pairs = Vec::new();
    let mut unpaired = 0;
    for point in cartesian(&axes) {
        let shifted: Vec<Ratio<i64>> = point.iter().zip(s).map(|(a, b)| a + b).collect();
        let image: Vec<Ratio<i64>> = (0..m)
            .map(|i| {
                let mut acc = Ratio::zero();
                for j in 0..m {
                    acc += u_inv_t[i][j] * shifted[j];
                }
                acc - s[i]
            })
            .collect();
        let mut inside = true;
        for (k, g) in grids.iter().enumerate() {
            if !g.contains_range(&image[k]) {
                inside = false;
                break;
            }
            if g.index_of(&image[k]).is_none() {
                return Err(DoobError::GridPairing(format!(
                    "image {} of grid point {} along axis {k} falls between grid nodes",
                    image[k], point[k]
                )));
            }
        }
        if inside {
            pairs.push((point, image));
        } else {
            unpaired += 1;
        }
    }
    if pairs.is_empty() {
        return Err(DoobError::GridPairing("no grid point maps back onto the grid".into()));
    }
    Ok(GridPairing { pairs, unpaired })
}

fn cartesian(axes: &[Vec<Ratio<i64>>]) -> Vec<Vec<Ratio<i64>>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(*x);
                    p
                })
            })
            .collect();
    }
    out
}

fn to_f64(v: &[Ratio<i64>]) -> Vec<f64> {
    v.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect()
}

/// Fluctuation relation on a rational grid: only pairs whose image is itself
/// a grid node are evaluated.
pub fn verify_fluctuation_relation_grid(
    model: &LindbladModel,
    observable: &CountingObservable,
    u: &DMatrix<f64>,
    s: &[Ratio<i64>],
    grids: &[GridSpec],
    cfg: &DoobConfig,
) -> Result<FrReport, DoobError> {
    let pairing = pair_grid(u, s, grids)?;
    let pairs = pairing.pairs.iter().map(|(a, b)| (to_f64(a), to_f64(b))).collect();
    evaluate_pairs(model, observable, u, &to_f64(s), pairs, cfg)
}
