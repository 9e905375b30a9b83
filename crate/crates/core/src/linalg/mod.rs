//! Dense complex matrix kernel.
//!
//! Everything downstream (Hamiltonians, jump operators, eigenmatrices and the
//! superoperators acting on density matrices) is a [`CMat`]. Superoperators act
//! on column-stacked density matrices, so the map `X -> A X B` is represented by
//! `kron(B^T, A)`.

mod eigen;
mod expm;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub use eigen::{eig_full, sqrtm_psd, EigenPair, PsdRoot, SchurForm, DEFAULT_EIG_DIM_CAP};
pub use expm::expm;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Column vector of complex amplitudes.
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("matrix exponential overflow (1-norm {norm:e})")]
    Overflow { norm: f64 },
    #[error("Schur iteration did not converge for a {dim}x{dim} matrix within {max_iter} sweeps")]
    NoConvergence { dim: usize, max_iter: usize },
    #[error("dimension {dim} exceeds the dense eigensolver cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:e} <= tolerance {tol:e}")]
    NotPositiveDefinite { min_eigenvalue: f64, tol: f64 },
}

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct CMat(DMatrix<C64>);

impl CMat {
    /// Wraps a nalgebra matrix, rejecting NaN or infinite entries.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self, LinalgError> {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                context: "from_row_major",
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", entries.len()),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Real matrix from nested rows; panics on ragged input. Intended for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self(DMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0)))
    }

    /// Complex matrix from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn diag(entries: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    /// `|i><j|` in an `n`-dimensional space (zero-based indices).
    pub fn ket_bra(n: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = ONE;
        Self(m)
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &CVec, b: &CVec) -> Self {
        Self(a * b.adjoint())
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.0.nrows() == self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.nrows() * self.ncols());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.ncols())
            .map(|j| self.0.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance `||self - other||`.
    pub fn distance(&self, other: &CMat) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// `(m + m^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Frobenius norm of the anti-Hermitian part.
    pub fn hermiticity_residual(&self) -> f64 {
        ((&self.0 - self.0.adjoint()) * C64::new(0.5, 0.0)).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_residual() <= tol
    }

    pub fn try_inverse(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::DimensionMismatch {
                context: "inverse",
                expected: "square matrix".into(),
                found: format!("{}x{}", self.nrows(), self.ncols()),
            });
        }
        self.0.clone().lu().try_inverse().map(Self).ok_or(LinalgError::Singular)
    }

    pub fn mul_vec(&self, v: &CVec) -> CVec {
        &self.0 * v
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &CMat) -> CMat {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.nrows(), self.ncols())?;
        for i in 0..self.nrows() {
            write!(f, "  ")?;
            for j in 0..self.ncols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        CMat(&self.0 + &rhs.0)
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        CMat(&self.0 - &rhs.0)
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        CMat(&self.0 * &rhs.0)
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        CMat(-&self.0)
    }
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    CMat(a.0.kronecker(&b.0))
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMat>) -> CMat {
    factors.into_iter().fold(CMat::identity(1), |acc, f| kron(&acc, f))
}

/// Column-stacking vectorization of a square matrix.
pub fn vec(m: &CMat) -> Result<CVec, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            context: "vec",
            expected: "square matrix".into(),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(DVector::from_column_slice(m.0.as_slice()))
}

/// Inverse of [`vec`]: reshapes a length-`d^2` vector into a `d x d` matrix.
pub fn unvec(v: &CVec, d: usize) -> Result<CMat, LinalgError> {
    if v.len() != d * d {
        return Err(LinalgError::DimensionMismatch {
            context: "unvec",
            expected: format!("length {}", d * d),
            found: format!("length {}", v.len()),
        });
    }
    Ok(CMat(DMatrix::from_column_slice(d, d, v.as_slice())))
}

/// Linear map on `d x d` matrices, stored as a `d^2 x d^2` matrix acting on
/// column-stacked operands.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOp {
    dim: usize,
    matrix: CMat,
}

impl SuperOp {
    pub fn new(dim: usize, matrix: CMat) -> Result<Self, LinalgError> {
        let side = dim * dim;
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(LinalgError::DimensionMismatch {
                context: "SuperOp::new",
                expected: format!("{side}x{side}"),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMat::zeros(dim * dim, dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMat::identity(dim * dim),
        }
    }

    /// The map `X -> a X b`.
    pub fn sandwich(a: &CMat, b: &CMat) -> Self {
        assert!(a.is_square() && b.is_square() && a.nrows() == b.nrows());
        Self {
            dim: a.nrows(),
            matrix: kron(&b.transpose(), a),
        }
    }

    /// The map `X -> -i [h, X]`.
    pub fn commutator(h: &CMat) -> Self {
        let id = CMat::identity(h.nrows());
        let left = Self::sandwich(h, &id);
        let right = Self::sandwich(&id, h);
        Self {
            dim: h.nrows(),
            matrix: (&left.matrix - &right.matrix).scale(-I),
        }
    }

    /// The map `X -> -1/2 {a, X}`.
    pub fn anticommutator_half(a: &CMat) -> Self {
        let id = CMat::identity(a.nrows());
        let m = &Self::sandwich(a, &id).matrix + &Self::sandwich(&id, a).matrix;
        Self {
            dim: a.nrows(),
            matrix: m.scale_real(-0.5),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat, LinalgError> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                context: "SuperOp::apply",
                expected: format!("{0}x{0}", self.dim),
                found: format!("{}x{}", x.nrows(), x.ncols()),
            });
        }
        let v = self.matrix.mul_vec(&vec(x)?);
        unvec(&v, self.dim)
    }

    /// Hilbert-Schmidt dual: `Tr[A^dagger S(X)] = Tr[S*(A)^dagger X]`.
    pub fn dual(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SuperOp) -> Self {
        assert_eq!(self.dim, other.dim, "composing superoperators of different dimension");
        Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.scale(c),
        }
    }

    pub fn add(&self, other: &SuperOp) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &SuperOp) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            matrix: &self.matrix - &other.matrix,
        }
    }

    /// Frobenius distance between the matrix representations.
    pub fn distance(&self, other: &SuperOp) -> f64 {
        self.matrix.distance(&other.matrix)
    }
}

/// Pauli matrices and qubit ladder operators in the basis `|1>, |2>` where
/// `|1>` is the `sigma_z = -1` state.
pub mod pauli {
    use super::{CMat, C64};

    pub fn sigma_x() -> CMat {
        CMat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn sigma_y() -> CMat {
        let z = C64::new(0.0, 0.0);
        CMat::from_rows(&[vec![z, C64::new(0.0, -1.0)], vec![C64::new(0.0, 1.0), z]])
    }

    /// `diag(-1, 1)`: `|1>` has eigenvalue -1.
    pub fn sigma_z() -> CMat {
        CMat::from_real_rows(&[&[-1.0, 0.0], &[0.0, 1.0]])
    }

    /// `|2><1|`.
    pub fn sigma_plus() -> CMat {
        CMat::ket_bra(2, 1, 0)
    }

    /// `|1><2|`.
    pub fn sigma_minus() -> CMat {
        CMat::ket_bra(2, 0, 1)
    }
}
