//! Dense non-Hermitian eigendecomposition and Hermitian square roots.
//!
//! Eigenvalues come from a complex Schur form `M = Q T Q^dagger`. Right and
//! left eigenvectors of the triangular factor are obtained by back- and
//! forward-substitution and rotated back with `Q`, so a single eigenpair costs
//! `O(n^2)` once the Schur form exists.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use super::{CMat, CVec, LinalgError, C64};

/// Largest matrix side accepted by [`eig_full`] and [`SchurForm::new`] by default.
pub const DEFAULT_EIG_DIM_CAP: usize = 4096;

const MAX_SWEEPS_PER_DIM: usize = 100;
const RESCALE_THRESHOLD: f64 = 1e150;
// Subdiagonal deflation threshold, relative to the neighbouring diagonal.
// Exactly one ulp stalls the QR sweeps on highly structured generators.
const DEFLATION_TOL: f64 = 4.0 * f64::EPSILON;

/// Complex Schur form of a square matrix.
#[derive(Clone, Debug)]
pub struct SchurForm {
    q: DMatrix<C64>,
    t: DMatrix<C64>,
    norm: f64,
}

/// One eigenvalue with unit-norm right and left eigenvectors:
/// `M v = λ v` and `u^dagger M = λ u^dagger`.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: C64,
    pub right: CVec,
    pub left: CVec,
}

impl SchurForm {
    pub fn new(m: &CMat, dim_cap: usize) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::DimensionMismatch {
                context: "eigendecomposition",
                expected: "square matrix".into(),
                found: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        let n = m.nrows();
        if n > dim_cap {
            return Err(LinalgError::DimensionCap { dim: n, cap: dim_cap });
        }
        let max_iter = MAX_SWEEPS_PER_DIM * n.max(1);
        let schur = Schur::try_new(m.as_matrix().clone(), DEFLATION_TOL, max_iter)
            .ok_or(LinalgError::NoConvergence { dim: n, max_iter })?;
        let (q, mut t) = schur.unpack();
        // The complex Schur form is upper triangular; clear the rounding residue
        // below the diagonal so the substitutions see an exact triangle.
        for j in 0..n {
            for i in (j + 1)..n {
                t[(i, j)] = C64::new(0.0, 0.0);
            }
        }
        Ok(Self { q, t, norm: m.norm() })
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    /// Eigenvalues in Schur order.
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.dim()).map(|k| self.t[(k, k)]).collect()
    }

    fn small_pivot(&self) -> f64 {
        (f64::EPSILON * self.norm).max(f64::MIN_POSITIVE)
    }

    /// Unit right eigenvector for the `k`-th eigenvalue in Schur order.
    pub fn right_vector(&self, k: usize) -> CVec {
        let n = self.dim();
        let lambda = self.t[(k, k)];
        let small = self.small_pivot();
        let mut y = DVector::<C64>::zeros(n);
        y[k] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for i in (j + 1)..=k {
                acc += self.t[(j, i)] * y[i];
            }
            y[j] = -acc / guarded(self.t[(j, j)] - lambda, small);
            let mag = y[j].norm();
            if mag > RESCALE_THRESHOLD {
                y /= C64::new(mag, 0.0);
            }
        }
        let v = &self.q * y;
        let norm = v.norm();
        v / C64::new(norm, 0.0)
    }

    /// Unit left eigenvector (`u^dagger M = λ u^dagger`) for the `k`-th eigenvalue.
    pub fn left_vector(&self, k: usize) -> CVec {
        let n = self.dim();
        let lambda = self.t[(k, k)];
        let small = self.small_pivot();
        // z = conj(x) where x^dagger T = λ x^dagger.
        let mut z = DVector::<C64>::zeros(n);
        z[k] = C64::new(1.0, 0.0);
        for j in (k + 1)..n {
            let mut acc = C64::new(0.0, 0.0);
            for i in k..j {
                acc += z[i] * self.t[(i, j)];
            }
            z[j] = acc / guarded(lambda - self.t[(j, j)], small);
            let mag = z[j].norm();
            if mag > RESCALE_THRESHOLD {
                z /= C64::new(mag, 0.0);
            }
        }
        let x = z.map(|c| c.conj());
        let u = &self.q * x;
        let norm = u.norm();
        u / C64::new(norm, 0.0)
    }

    pub fn pair(&self, k: usize) -> EigenPair {
        EigenPair {
            value: self.t[(k, k)],
            right: self.right_vector(k),
            left: self.left_vector(k),
        }
    }
}

fn guarded(d: C64, small: f64) -> C64 {
    if d.norm() < small {
        C64::new(small, 0.0)
    } else {
        d
    }
}

/// All eigenvalues with right and left eigenvectors.
pub fn eig_full(m: &CMat, dim_cap: usize) -> Result<Vec<EigenPair>, LinalgError> {
    let schur = SchurForm::new(m, dim_cap)?;
    Ok((0..schur.dim()).map(|k| schur.pair(k)).collect())
}

/// Hermitian square root of a positive definite matrix and its inverse.
#[derive(Clone, Debug)]
pub struct PsdRoot {
    pub root: CMat,
    pub inv_root: CMat,
    pub min_eigenvalue: f64,
}

/// Square root of a Hermitian positive definite matrix.
///
/// The input is Hermitized as `(m + m^dagger) / 2` first. Any eigenvalue at or
/// below `tol` is rejected.
pub fn sqrtm_psd(m: &CMat, tol: f64) -> Result<PsdRoot, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            context: "sqrtm_psd",
            expected: "square matrix".into(),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    let h = m.hermitian_part();
    let eig = SymmetricEigen::new(h.into_matrix());
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue.is_nan() || min_eigenvalue <= tol {
        return Err(LinalgError::NotPositiveDefinite { min_eigenvalue, tol });
    }
    let u = &eig.eigenvectors;
    let with = |f: fn(f64) -> f64| {
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::new(f(e), 0.0)));
        CMat::from_matrix_unchecked(u * d * u.adjoint()).hermitian_part()
    };
    Ok(PsdRoot {
        root: with(f64::sqrt),
        inv_root: with(|e| 1.0 / e.sqrt()),
        min_eigenvalue,
    })
}
