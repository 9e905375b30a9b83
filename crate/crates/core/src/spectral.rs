//! Scaled cumulant generating functions from the dominant eigenpair of a
//! tilted generator.

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{unvec, CMat, LinalgError, SchurForm, C64, DEFAULT_EIG_DIM_CAP};
use crate::lindblad::{tilted_generator, CountingObservable, LindbladModel, ModelError, TiltedGenerator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("dominant eigenvalue is degenerate: spectral gap {gap:e} below threshold {threshold:e}")]
    DegenerateDominantEigenvalue { gap: f64, threshold: f64 },
    #[error("right eigenmatrix has trace {trace:e}; cannot normalize")]
    ZeroTraceRight { trace: f64 },
    #[error("left and right eigenmatrices are orthogonal (Tr[l r] = {overlap:e})")]
    ZeroOverlap { overlap: f64 },
    #[error("dominant eigenvalue {re} + {im}i is not real")]
    ComplexDominantEigenvalue { re: f64, im: f64 },
    #[error("eigen-residual {residual:e} exceeds {tol:e} ({side} eigenmatrix)")]
    Residual {
        side: &'static str,
        residual: f64,
        tol: f64,
    },
    #[error("empty tilt grid")]
    EmptyGrid,
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Tolerances and limits of the spectral solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralConfig {
    pub dim_cap: usize,
    /// Minimum separation in real part between dominant and subdominant eigenvalues.
    pub degeneracy_gap: f64,
    pub imag_tol: f64,
    pub zero_trace_tol: f64,
    /// Residual bound, relative to `max(1, ||superop||) * max(1, ||x||)`.
    pub residual_tol: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            dim_cap: DEFAULT_EIG_DIM_CAP,
            degeneracy_gap: 1e-8,
            imag_tol: 1e-9,
            zero_trace_tol: 1e-12,
            residual_tol: 1e-8,
        }
    }
}

/// Dominant eigenvalue with eigenmatrices normalized to `Tr[r] = Tr[l r] = 1`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub theta: f64,
    pub r: CMat,
    pub l: CMat,
    pub gap: f64,
    pub lambda: Vec<f64>,
    pub right_residual: f64,
    pub left_residual: f64,
}

/// SCGF with the default configuration.
pub fn scgf(gen: &TiltedGenerator) -> Result<SpectralData, SpectralError> {
    scgf_with(gen, &SpectralConfig::default())
}

pub fn scgf_with(gen: &TiltedGenerator, cfg: &SpectralConfig) -> Result<SpectralData, SpectralError> {
    let d = gen.dim();
    let s = gen.superop.matrix();
    let schur = SchurForm::new(s, cfg.dim_cap.max(1))?;
    let values = schur.eigenvalues();

    let dominant = (0..values.len())
        .max_by(|&a, &b| values[a].re.total_cmp(&values[b].re))
        .expect("superoperator has at least one eigenvalue");
    let top = values[dominant];
    let gap = values
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != dominant)
        .map(|(_, v)| top.re - v.re)
        .fold(f64::INFINITY, f64::min);
    if gap < cfg.degeneracy_gap {
        return Err(SpectralError::DegenerateDominantEigenvalue {
            gap,
            threshold: cfg.degeneracy_gap,
        });
    }
    if top.im.abs() > cfg.imag_tol {
        return Err(SpectralError::ComplexDominantEigenvalue { re: top.re, im: top.im });
    }
    let theta = top.re;

    let r_raw = unvec(&schur.right_vector(dominant), d)?;
    let trace = r_raw.trace();
    if trace.norm() < cfg.zero_trace_tol {
        return Err(SpectralError::ZeroTraceRight { trace: trace.norm() });
    }
    let r = r_raw.scale(C64::new(1.0, 0.0) / trace).hermitian_part();

    // A left eigenvector u of S (u^dagger S = θ u^dagger) is the matrix l with
    // S*(l) = θ l under the Hilbert-Schmidt dual.
    let l_raw = unvec(&schur.left_vector(dominant), d)?;
    let overlap = (&l_raw * &r).trace();
    if overlap.norm() < cfg.zero_trace_tol {
        return Err(SpectralError::ZeroOverlap {
            overlap: overlap.norm(),
        });
    }
    let l = l_raw.scale(C64::new(1.0, 0.0) / overlap).hermitian_part();

    let theta_c = C64::new(theta, 0.0);
    let right_residual = gen.superop.apply(&r)?.distance(&r.scale(theta_c));
    let left_residual = gen.superop.dual().apply(&l)?.distance(&l.scale(theta_c));
    let tol = cfg.residual_tol * s.norm().max(1.0);
    if right_residual > tol * r.norm().max(1.0) {
        return Err(SpectralError::Residual {
            side: "right",
            residual: right_residual,
            tol,
        });
    }
    if left_residual > tol * l.norm().max(1.0) {
        return Err(SpectralError::Residual {
            side: "left",
            residual: left_residual,
            tol,
        });
    }

    Ok(SpectralData {
        theta,
        r,
        l,
        gap,
        lambda: gen.lambda.clone(),
        right_residual,
        left_residual,
    })
}

/// Builds the tilted generator at `lambda` and solves it.
pub fn scgf_at(
    model: &LindbladModel,
    observable: &CountingObservable,
    lambda: &[f64],
    cfg: &SpectralConfig,
) -> Result<SpectralData, SpectralError> {
    let gen = tilted_generator(model, observable, lambda)?;
    scgf_with(&gen, cfg)
}

/// One grid point of a scan; failures are kept in place so the scan continues.
#[derive(Clone, Debug)]
pub struct ScanPoint {
    pub lambda: Vec<f64>,
    pub outcome: Result<ScanValue, SpectralError>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanValue {
    pub theta: f64,
    pub gap: f64,
}

/// Evaluates the SCGF over a list of tilts, in parallel, preserving order.
pub fn scgf_scan(
    model: &LindbladModel,
    observable: &CountingObservable,
    lambdas: &[Vec<f64>],
    cfg: &SpectralConfig,
) -> Result<Vec<ScanPoint>, SpectralError> {
    if lambdas.is_empty() {
        return Err(SpectralError::EmptyGrid);
    }
    Ok(lambdas
        .par_iter()
        .map(|lambda| ScanPoint {
            lambda: lambda.clone(),
            outcome: scgf_at(model, observable, lambda, cfg).map(|d| ScanValue {
                theta: d.theta,
                gap: d.gap,
            }),
        })
        .collect())
}

/// Smallest discrete second difference of `theta` on a uniform 1-D grid;
/// non-negative up to rounding for a convex SCGF.
pub fn min_second_difference(thetas: &[f64]) -> f64 {
    thetas
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(f64::INFINITY, f64::min)
}

/// First and second cumulant rates of the counting observable.
#[derive(Clone, Debug)]
pub struct Cumulants {
    /// Long-time rate of `E[K]`, equal to `-grad theta(0)`.
    pub mean_rate: Vec<f64>,
    /// Long-time rate of `Cov[K]`, equal to the Hessian of `theta` at 0.
    pub covariance_rate: DMatrix<f64>,
}

/// Central finite differences of the SCGF at the origin with step `h`.
pub fn cumulants(
    model: &LindbladModel,
    observable: &CountingObservable,
    h: f64,
    cfg: &SpectralConfig,
) -> Result<Cumulants, SpectralError> {
    cumulants_at(model, observable, &vec![0.0; observable.m()], h, cfg)
}

/// Central finite differences of the SCGF around `center`.
pub fn cumulants_at(
    model: &LindbladModel,
    observable: &CountingObservable,
    center: &[f64],
    h: f64,
    cfg: &SpectralConfig,
) -> Result<Cumulants, SpectralError> {
    if h.is_nan() || h <= 0.0 {
        return Err(SpectralError::BadStep(h));
    }
    observable.check_lambda(center)?;
    let m = observable.m();
    let theta = |offsets: &[(usize, f64)]| -> Result<f64, SpectralError> {
        let mut lambda = center.to_vec();
        for &(i, d) in offsets {
            lambda[i] += d;
        }
        Ok(scgf_at(model, observable, &lambda, cfg)?.theta)
    };
    let t0 = theta(&[])?;
    let mut mean_rate = vec![0.0; m];
    let mut cov = DMatrix::zeros(m, m);
    for i in 0..m {
        let plus = theta(&[(i, h)])?;
        let minus = theta(&[(i, -h)])?;
        mean_rate[i] = -(plus - minus) / (2.0 * h);
        cov[(i, i)] = (plus - 2.0 * t0 + minus) / (h * h);
        for j in 0..i {
            let pp = theta(&[(i, h), (j, h)])?;
            let pm = theta(&[(i, h), (j, -h)])?;
            let mp = theta(&[(i, -h), (j, h)])?;
            let mm = theta(&[(i, -h), (j, -h)])?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(Cumulants {
        mean_rate,
        covariance_rate: cov,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::*;
    use crate::lindblad::JumpOperator;

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
    fn theta_vanishes_at_zero_tilt() {
        let (model, obs) = qubit(0.3, 0.7, 1.9);
        let d = scgf_at(&model, &obs, &[0.0], &SpectralConfig::default()).unwrap();
        assert!(d.theta.abs() < 1e-12);
        assert!(d.gap > 0.0);
        assert!((d.r.trace().re - 1.0).abs() < 1e-12);
        // Untilted left eigenmatrix is the identity.
        assert!(d.l.distance(&CMat::identity(2)) < 1e-10);
    }

    #[test]
    fn eigenmatrix_normalization_and_residuals() {
        let (model, obs) = qubit(0.8, 1.0, 0.4);
        let d = scgf_at(&model, &obs, &[0.7], &SpectralConfig::default()).unwrap();
        assert!((d.r.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(((&d.l * &d.r).trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(d.r.hermiticity_residual() < 1e-12 && d.l.hermiticity_residual() < 1e-12);
        assert!(d.right_residual < 1e-10 && d.left_residual < 1e-10);
    }

    #[test]
    fn closed_form_qubit_value() {
        let (model, obs) = qubit(0.5, 1.0, 1.0);
        let d = scgf_at(&model, &obs, &[1.0], &SpectralConfig::default()).unwrap();
        let expected = 1f64.cosh().cbrt() - 1.0;
        assert!((d.theta - expected).abs() < 1e-12);
        assert!((d.theta - 0.15557).abs() < 1e-5);
    }

    #[test]
    fn scan_is_symmetric_and_convex() {
        let (model, obs) = qubit(0.5, 1.0, 1.0);
        let grid: Vec<Vec<f64>> = (-10..=10).map(|k| vec![k as f64 * 0.2]).collect();
        let scan = scgf_scan(&model, &obs, &grid, &SpectralConfig::default()).unwrap();
        let thetas: Vec<f64> = scan.iter().map(|p| p.outcome.as_ref().unwrap().theta).collect();
        for k in 0..thetas.len() {
            assert!((thetas[k] - thetas[thetas.len() - 1 - k]).abs() < 1e-10);
        }
        assert!(min_second_difference(&thetas) >= -1e-8);

        let one = scgf_scan(&model, &obs, &[vec![0.0]], &SpectralConfig::default()).unwrap();
        let v = one[0].outcome.as_ref().unwrap();
        assert!(v.theta.abs() < 1e-12 && v.gap > 0.0);
        assert!(matches!(
            scgf_scan(&model, &obs, &[], &SpectralConfig::default()),
            Err(SpectralError::EmptyGrid)
        ));
    }

    #[test]
    fn qubit_cumulants() {
        let (model, obs) = qubit(0.5, 1.0, 1.0);
        let c = cumulants(&model, &obs, 1e-4, &SpectralConfig::default()).unwrap();
        assert!(c.mean_rate[0].abs() < 1e-8);
        // d²/dλ² of cosh(λ)^{1/3} at 0 is 1/3.
        assert!((c.covariance_rate[(0, 0)] - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_spectrum_is_refused() {
        // Two decoupled, jump-free levels: every eigenvalue is zero.
        let model = LindbladModel::new(
            CMat::zeros(2, 2),
            vec![JumpOperator {
                label: "none".into(),
                op: CMat::zeros(2, 2),
            }],
        )
        .unwrap();
        let obs = CountingObservable::scalar([1.0]);
        assert!(matches!(
            scgf_at(&model, &obs, &[0.5], &SpectralConfig::default()),
            Err(SpectralError::DegenerateDominantEigenvalue { .. })
        ));
    }

    #[test]
    fn dimension_cap_propagates() {
        let (model, obs) = qubit(0.5, 1.0, 1.0);
        let cfg = SpectralConfig {
            dim_cap: 3,
            ..SpectralConfig::default()
        };
        assert!(matches!(
            scgf_at(&model, &obs, &[0.5], &cfg),
            Err(SpectralError::Linalg(LinalgError::DimensionCap { .. }))
        ));
    }
}
