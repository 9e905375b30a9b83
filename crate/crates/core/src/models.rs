//! Builders and closed-form results for three reference systems: a driven
//! qubit with balanced gain and loss, two qubits with symmetric hopping, and a
//! dissipative Ising ring.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg::{kron_all, pauli, CMat, CVec, SuperOp, C64, I, ZERO};
use crate::lindblad::{CountingObservable, LindbladModel, ModelError};
use crate::symmetry::{PermutationSymmetry, SymmetryError};

/// Largest spin-chain length for which dense spectral work is attempted.
pub const SPIN_CHAIN_SPECTRAL_CAP: usize = 4;

/// Closed forms with a removable singularity at zero are not evaluated for
/// `|λ|` below this.
pub const SINGULAR_EXCLUSION: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelsError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("closed form not valid here: {0}")]
    OutOfValidityDomain(String),
    #[error("unknown example '{0}' (expected single-qubit, two-qubit or spin-chain)")]
    UnknownExample(String),
    #[error("unknown parameter '{key}' for {example}")]
    UnknownParameter { example: &'static str, key: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

fn positive(name: &'static str, value: f64) -> Result<(), ModelsError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelsError::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A built example: model, observable and its jump-permutation symmetry.
#[derive(Clone, Debug)]
pub struct Example {
    pub model: LindbladModel,
    pub observable: CountingObservable,
    pub symmetry: PermutationSymmetry,
    /// Whether the dense superoperator is small enough for spectral work.
    pub spectral_feasible: bool,
}

// ---------------------------------------------------------------------------
// Driven qubit.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleQubitParams {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub omega: f64,
}

impl SingleQubitParams {
    /// `γ_+ = γ_- = γ`, `Ω = γ / 2`: the case with closed-form eigenmatrices.
    pub fn closed_form(gamma: f64) -> Self {
        Self {
            gamma_plus: gamma,
            gamma_minus: gamma,
            omega: 0.5 * gamma,
        }
    }

    /// Rate `γ` if `γ_+ = γ_-` and `4Ω² = γ²`.
    pub fn closed_form_gamma(&self) -> Option<f64> {
        let g = self.gamma_plus;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        (close(g, self.gamma_minus) && close(4.0 * self.omega * self.omega, g * g)).then_some(g)
    }

    pub fn validate(&self) -> Result<(), ModelsError> {
        positive("gamma_plus", self.gamma_plus)?;
        positive("gamma_minus", self.gamma_minus)?;
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(ModelsError::InvalidParameter {
                name: "omega",
                value: self.omega,
                reason: "must be non-negative and finite",
            });
        }
        Ok(())
    }
}

/// `H = Ωσx`, jumps `√γ_- σ_-` (weight -1) and `√γ_+ σ_+` (weight +1), so
/// `K = K_+ - K_-`; symmetry `V = σx` exchanging the two channels, `U = -1`.
pub fn build_single_qubit(p: &SingleQubitParams) -> Result<Example, ModelsError> {
    p.validate()?;
    let model = LindbladModel::from_pairs(
        pauli::sigma_x().scale_real(p.omega),
        [
            ("minus", pauli::sigma_minus().scale_real(p.gamma_minus.sqrt())),
            ("plus", pauli::sigma_plus().scale_real(p.gamma_plus.sqrt())),
        ],
    )?;
    Ok(Example {
        model,
        observable: CountingObservable::scalar([-1.0, 1.0]),
        symmetry: PermutationSymmetry::with_sign_flip(vec![1, 0], pauli::sigma_x())?,
        spectral_feasible: true,
    })
}

/// The closed forms for the qubit are written in the ordered basis
/// `(|2⟩, |1⟩)`; conjugating by `σx` brings them to `(|1⟩, |2⟩)`.
fn reorder(m: CMat) -> CMat {
    let sx = pauli::sigma_x();
    &(&sx * &m) * &sx
}

fn single_qubit_gamma(p: &SingleQubitParams) -> Result<f64, ModelsError> {
    p.validate()?;
    p.closed_form_gamma().ok_or_else(|| {
        ModelsError::OutOfValidityDomain("qubit closed form needs gamma_plus = gamma_minus = 2 omega".into())
    })
}

fn away_from_zero(lambda: f64) -> Result<(), ModelsError> {
    if lambda.abs() < SINGULAR_EXCLUSION || !lambda.is_finite() {
        return Err(ModelsError::OutOfValidityDomain(format!(
            "closed form is singular near 0 (|λ| = {:e})",
            lambda.abs()
        )));
    }
    Ok(())
}

/// `θ(λ) = γ (cosh^{1/3} λ - 1)`.
pub fn single_qubit_theta(p: &SingleQubitParams, lambda: f64) -> Result<f64, ModelsError> {
    let gamma = single_qubit_gamma(p)?;
    Ok(gamma * (lambda.cosh().cbrt() - 1.0))
}

/// Left eigenmatrix `ℓ_λ` in the closed-form case.
pub fn single_qubit_l(p: &SingleQubitParams, lambda: f64) -> Result<CMat, ModelsError> {
    single_qubit_gamma(p)?;
    away_from_zero(lambda)?;
    let c = lambda.cosh();
    let (c13, c23) = (c.cbrt(), c.cbrt().powi(2));
    let pref = lambda.sinh() / (3.0 * c23 * (c23 - 1.0));
    let off = I * (1.0 - c23);
    let m = CMat::from_rows(&[vec![re(lambda.exp() - c13), off], vec![-off, re(c13 - (-lambda).exp())]]);
    Ok(reorder(m.scale_real(pref)))
}

/// Right eigenmatrix `r_λ` in the closed-form case.
pub fn single_qubit_r(p: &SingleQubitParams, lambda: f64) -> Result<CMat, ModelsError> {
    single_qubit_gamma(p)?;
    away_from_zero(lambda)?;
    let c = lambda.cosh();
    let (c13, c23) = (c.cbrt(), c.cbrt().powi(2));
    let off = I * (1.0 - c23);
    let m = CMat::from_rows(&[vec![re(c13 - (-lambda).exp()), off], vec![-off, re(lambda.exp() - c13)]]);
    Ok(reorder(m.scale_real(1.0 / (2.0 * lambda.sinh()))))
}

/// Entries of `ℓ_λ^{1/2} = [[α, -iδ], [iδ, β]]` (in the `(|2⟩, |1⟩)` order).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitRootParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl QubitRootParams {
    pub fn at(lambda: f64) -> Result<Self, ModelsError> {
        away_from_zero(lambda)?;
        let c = lambda.cosh();
        let (c13, c23, c43) = (c.cbrt(), c.cbrt().powi(2), c.cbrt().powi(4));
        let sh = lambda.sinh().abs();
        let sg = lambda.signum();
        let pre2 = sh / (6.0 * c23 * (c43 - 1.0));
        let rad = ((c23 - 1.0) * (c23 + 2.0)).sqrt();
        let common = sh * (2.0 * c23 + 1.0) + rad;
        let skew = 2.0 * sg * c13 * (c43 - 1.0);
        Ok(Self {
            alpha: pre2.sqrt() * (common + skew).sqrt(),
            beta: pre2.sqrt() * (common - skew).sqrt(),
            delta: sg * (pre2 * (sh - rad)).sqrt(),
        })
    }

    fn det(&self) -> f64 {
        self.alpha * self.beta - self.delta * self.delta
    }

    /// `ℓ_λ^{1/2}` in the `(|1⟩, |2⟩)` basis.
    pub fn l_half(&self) -> CMat {
        reorder(CMat::from_rows(&[
            vec![re(self.alpha), -I * self.delta],
            vec![I * self.delta, re(self.beta)],
        ]))
    }
}

/// Doob jump operators `[L_-^s, L_+^s]` of the closed-form qubit.
pub fn single_qubit_doob_jumps(p: &SingleQubitParams, s: f64) -> Result<[CMat; 2], ModelsError> {
    let gamma = single_qubit_gamma(p)?;
    let q = QubitRootParams::at(s)?;
    let (a, b, d) = (q.alpha, q.beta, q.delta);
    let k1 = gamma.sqrt() * (0.5 * s).exp() / q.det();
    let k2 = gamma.sqrt() * (-0.5 * s).exp() / q.det();
    let l1 = CMat::from_rows(&[vec![-I * (b * d), re(d * d)], vec![re(b * b), I * (b * d)]]);
    let l2 = CMat::from_rows(&[vec![-I * (a * d), re(a * a)], vec![re(d * d), I * (a * d)]]);
    Ok([reorder(l1.scale_real(k1)), reorder(l2.scale_real(k2))])
}

/// `H_s = (γ/2) |sinh s| / √((cosh^{2/3}s - 1)(cosh^{2/3}s + 2)) σx`.
pub fn single_qubit_doob_hamiltonian(p: &SingleQubitParams, s: f64) -> Result<CMat, ModelsError> {
    let gamma = single_qubit_gamma(p)?;
    away_from_zero(s)?;
    let c23 = s.cosh().cbrt().powi(2);
    let k = 0.5 * gamma * s.sinh().abs() / ((c23 - 1.0) * (c23 + 2.0)).sqrt();
    Ok(pauli::sigma_x().scale_real(k))
}

// ---------------------------------------------------------------------------
// Two qubits with symmetric hopping.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitParams {
    /// Common jump rate α.
    pub alpha: f64,
    pub g: f64,
}

impl TwoQubitParams {
    pub fn validate(&self) -> Result<(), ModelsError> {
        positive("alpha", self.alpha)?;
        if !self.g.is_finite() {
            return Err(ModelsError::InvalidParameter {
                name: "g",
                value: self.g,
                reason: "must be finite",
            });
        }
        Ok(())
    }
}

/// `|i⟩⟨j|` on the two-qubit space with 1-based labels
/// `|1⟩..|4⟩ = ↓↓, ↓↑, ↑↓, ↑↑`.
pub fn two_qubit_ket_bra(i: usize, j: usize) -> CMat {
    CMat::ket_bra(4, i - 1, j - 1)
}

const TWO_QUBIT_TRANSITIONS: [(usize, usize); 8] = [(2, 1), (1, 2), (2, 4), (4, 2), (3, 1), (1, 3), (3, 4), (4, 3)];

/// `H = g(|3⟩⟨2| + |2⟩⟨3|)`, eight jumps `√α |i⟩⟨j|`; channels 1-4 (into or
/// out of `|2⟩`) weigh +1 and channels 5-8 (via `|3⟩`) weigh -1. The symmetry
/// swaps `|2⟩ ↔ |3⟩` and channels `n ↔ n + 4`.
pub fn build_two_qubit(p: &TwoQubitParams) -> Result<Example, ModelsError> {
    p.validate()?;
    let h = (&two_qubit_ket_bra(3, 2) + &two_qubit_ket_bra(2, 3)).scale_real(p.g);
    let jumps = TWO_QUBIT_TRANSITIONS.iter().enumerate().map(|(k, &(i, j))| {
        (
            format!("L{}", k + 1),
            two_qubit_ket_bra(i, j).scale_real(p.alpha.sqrt()),
        )
    });
    let model = LindbladModel::from_pairs(h, jumps)?;
    let observable = CountingObservable::scalar((0..8).map(|k| if k < 4 { 1.0 } else { -1.0 }));
    let mut v = CMat::zeros(4, 4);
    for (a, b) in [(1, 1), (2, 3), (3, 2), (4, 4)] {
        v = &v + &two_qubit_ket_bra(a, b);
    }
    let perm = (0..8).map(|k| (k + 4) % 8).collect();
    Ok(Example {
        model,
        observable,
        symmetry: PermutationSymmetry::with_sign_flip(perm, v)?,
        spectral_feasible: true,
    })
}

/// `θ(λ) = -2α + √(2α² cosh 2λ - 2g² + 2√(α⁴ cosh² 2λ + g⁴ + 2α²g²))`.
pub fn two_qubit_theta(p: &TwoQubitParams, lambda: f64) -> Result<f64, ModelsError> {
    p.validate()?;
    let (a, g) = (p.alpha, p.g);
    let c2 = (2.0 * lambda).cosh();
    let inner = (a.powi(4) * c2 * c2 + g.powi(4) + 2.0 * a * a * g * g).sqrt();
    Ok(-2.0 * a + (2.0 * a * a * c2 - 2.0 * g * g + 2.0 * inner).sqrt())
}

/// Entries of the two-qubit eigenmatrices:
/// `r = [[a,0,0,0],[0,c,im,0],[0,-im,d,0],[0,0,0,a]]`,
/// `ℓ = η [[a,0,0,0],[0,c,-im,0],[0,im,d,0],[0,0,0,a]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitEigen {
    /// `γ_λ = θ(λ) + 2α`.
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub m: f64,
    pub eta: f64,
}

impl TwoQubitEigen {
    pub fn at(p: &TwoQubitParams, lambda: f64) -> Result<Self, ModelsError> {
        away_from_zero(lambda)?;
        let al = p.alpha;
        let gamma = two_qubit_theta(p, lambda)? + 2.0 * al;
        let (ch, sh) = (lambda.cosh(), lambda.sinh());
        let den = 4.0 * al * sh * (gamma + 2.0 * al * ch);
        let a = gamma / (2.0 * (gamma + 2.0 * al * ch));
        let c = (2.0 * al * al * ((2.0 * lambda).exp() + 1.0) - gamma * gamma) / den;
        let d = (-2.0 * al * al * ((-2.0 * lambda).exp() + 1.0) + gamma * gamma) / den;
        let m = (2.0 * al * p.g * ch - p.g * gamma) / (2.0 * al * gamma * sh);
        let eta = 1.0 / (2.0 * a * a + c * c + d * d - 2.0 * m * m);
        Ok(Self {
            gamma,
            a,
            b: a,
            c,
            d,
            m,
            eta,
        })
    }

    fn matrix(&self, sign: f64) -> CMat {
        let m = I * (sign * self.m);
        CMat::from_rows(&[
            vec![re(self.a), ZERO, ZERO, ZERO],
            vec![ZERO, re(self.c), m, ZERO],
            vec![ZERO, -m, re(self.d), ZERO],
            vec![ZERO, ZERO, ZERO, re(self.b)],
        ])
    }

    pub fn r(&self) -> CMat {
        self.matrix(1.0)
    }

    pub fn l(&self) -> CMat {
        self.matrix(-1.0).scale_real(self.eta)
    }
}

/// Square-root parameters of the two-qubit `ℓ_s`:
/// `ℓ_s^{1/2} = √η [[√a,0,0,0],[0,A,iC,0],[0,-iC,B,0],[0,0,0,√a]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitRoot {
    pub eigen: TwoQubitEigen,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub big_a: f64,
    pub big_b: f64,
    pub big_c: f64,
}

impl TwoQubitRoot {
    pub fn at(p: &TwoQubitParams, s: f64) -> Result<Self, ModelsError> {
        let e = TwoQubitEigen::at(p, s)?;
        let ratio = p.g / e.gamma;
        let u = 0.5 * (e.c + e.d);
        let v = 0.5 * (e.c - e.d);
        let w = 0.5 * (e.c - e.d).abs() * (1.0 + 4.0 * ratio * ratio).sqrt();
        if u < w.abs() {
            return Err(ModelsError::OutOfValidityDomain(format!(
                "u = {u} < |w| = {w}: square roots are not real"
            )));
        }
        let t = 4.0 * ratio * ratio * v * v;
        let q = (w - v).powi(2);
        let den = t + q;
        let (rp, rm) = ((u + w).sqrt(), (u - w).sqrt());
        let big_a = (t * rp + q * rm) / den;
        let big_b = (q * rp + t * rm) / den;
        let big_c = -2.0 * ratio * v * (w - v) / den * (rp - rm);
        if ![big_a, big_b, big_c].iter().all(|x| x.is_finite()) {
            return Err(ModelsError::OutOfValidityDomain(
                "degenerate square-root parameters".into(),
            ));
        }
        Ok(Self {
            eigen: e,
            u,
            v,
            w,
            big_a,
            big_b,
            big_c,
        })
    }

    pub fn l_half(&self) -> CMat {
        let sa = re(self.eigen.a.sqrt());
        let c = I * self.big_c;
        CMat::from_rows(&[
            vec![sa, ZERO, ZERO, ZERO],
            vec![ZERO, re(self.big_a), c, ZERO],
            vec![ZERO, -c, re(self.big_b), ZERO],
            vec![ZERO, ZERO, ZERO, sa],
        ])
        .scale_real(self.eigen.eta.sqrt())
    }

    fn det(&self) -> f64 {
        self.big_a * self.big_b - self.big_c * self.big_c
    }

    /// `L_1^s .. L_8^s` at bias `s`.
    pub fn doob_jumps(&self, p: &TwoQubitParams, s: f64) -> Vec<CMat> {
        let (a, b, c) = (self.big_a, self.big_b, self.big_c);
        let sa = self.eigen.a.sqrt();
        let kb = two_qubit_ket_bra;
        let lower = p.alpha.sqrt() / sa;
        let upper = p.alpha.sqrt() * sa / self.det();
        let (dn, up) = ((-0.5 * s).exp(), (0.5 * s).exp());
        let comb = |x: f64, m1: CMat, y: C64, m2: CMat, k: f64| (&m1.scale_real(x) + &m2.scale(y)).scale_real(k);
        vec![
            comb(a, kb(2, 1), -I * c, kb(3, 1), dn * lower),
            comb(b, kb(1, 2), -I * c, kb(1, 3), dn * upper),
            comb(a, kb(2, 4), -I * c, kb(3, 4), dn * lower),
            comb(b, kb(4, 2), -I * c, kb(4, 3), dn * upper),
            comb(b, kb(3, 1), I * c, kb(2, 1), up * lower),
            comb(a, kb(1, 3), I * c, kb(1, 2), up * upper),
            comb(b, kb(3, 4), I * c, kb(2, 4), up * lower),
            comb(a, kb(4, 3), I * c, kb(4, 2), up * upper),
        ]
    }

    /// `H_s = (g/2) (A² + B² + 2C²) / (AB - C²) (|2⟩⟨3| + |3⟩⟨2|)`.
    pub fn doob_hamiltonian(&self, p: &TwoQubitParams) -> CMat {
        let (a, b, c) = (self.big_a, self.big_b, self.big_c);
        let k = 0.5 * p.g * (a * a + b * b + 2.0 * c * c) / self.det();
        (&two_qubit_ket_bra(2, 3) + &two_qubit_ket_bra(3, 2)).scale_real(k)
    }
}

// ---------------------------------------------------------------------------
// Dissipative Ising ring.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinChainParams {
    pub n_sites: usize,
    pub j: f64,
    pub gamma: f64,
}

impl SpinChainParams {
    pub fn validate(&self) -> Result<(), ModelsError> {
        if self.n_sites < 2 || !self.n_sites.is_multiple_of(2) {
            return Err(ModelsError::InvalidParameter {
                name: "n_sites",
                value: self.n_sites as f64,
                reason: "must be even and at least 2",
            });
        }
        if self.n_sites > 12 {
            return Err(ModelsError::InvalidParameter {
                name: "n_sites",
                value: self.n_sites as f64,
                reason: "dense operators limited to 12 sites",
            });
        }
        positive("gamma", self.gamma)?;
        if !self.j.is_finite() {
            return Err(ModelsError::InvalidParameter {
                name: "j",
                value: self.j,
                reason: "must be finite",
            });
        }
        Ok(())
    }
}

/// `op` acting on `site` (0-based, site 0 is the most significant factor).
pub fn site_operator(n: usize, site: usize, op: &CMat) -> CMat {
    let id = CMat::identity(2);
    let factors: Vec<&CMat> = (0..n).map(|k| if k == site { op } else { &id }).collect();
    kron_all(factors)
}

/// Permutation matrix `V` with `V^dagger σ_k V = σ_{k+1}` (sites mod `n`).
pub fn translation_operator(n: usize) -> CMat {
    let dim = 1usize << n;
    let bit = |state: usize, site: usize| (state >> (n - 1 - site)) & 1;
    // shift(x) moves the value at site k to site k+1; V maps |shift(x)> to |x>.
    let shift = |state: usize| {
        (0..n).fold(0usize, |acc, site| {
            let from = (site + n - 1) % n;
            acc | (bit(state, from) << (n - 1 - site))
        })
    };
    let mut v = CMat::zeros(dim, dim);
    for x in 0..dim {
        v = &v + &CMat::ket_bra(dim, x, shift(x));
    }
    v
}

/// `H = -J Σ_k σz_k σz_{k+1}` on a ring, jumps `√γ σx_k`, `√γ σy_k` in the
/// order (site 1 x, site 1 y, site 2 x, ...). Even sites (1-based) weigh +1,
/// odd sites -1, so `K = K_even - K_odd`. The symmetry shifts every site by one.
pub fn build_spin_chain(p: &SpinChainParams) -> Result<Example, ModelsError> {
    p.validate()?;
    let n = p.n_sites;
    let dim = 1usize << n;
    let sz: Vec<CMat> = (0..n).map(|k| site_operator(n, k, &pauli::sigma_z())).collect();
    let mut h = CMat::zeros(dim, dim);
    for k in 0..n {
        h = &h + &(&sz[k] * &sz[(k + 1) % n]);
    }
    let h = h.scale_real(-p.j);
    let sg = p.gamma.sqrt();
    let mut jumps = Vec::with_capacity(2 * n);
    let mut weights = Vec::with_capacity(2 * n);
    for k in 0..n {
        let w = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
        jumps.push((
            format!("x{}", k + 1),
            site_operator(n, k, &pauli::sigma_x()).scale_real(sg),
        ));
        jumps.push((
            format!("y{}", k + 1),
            site_operator(n, k, &pauli::sigma_y()).scale_real(sg),
        ));
        weights.extend([w, w]);
    }
    let model = LindbladModel::from_pairs(h, jumps)?;
    let perm = (0..2 * n).map(|mu| (mu + 2) % (2 * n)).collect();
    Ok(Example {
        model,
        observable: CountingObservable::scalar(weights),
        symmetry: PermutationSymmetry::with_sign_flip(perm, translation_operator(n))?,
        spectral_feasible: n <= SPIN_CHAIN_SPECTRAL_CAP,
    })
}

/// `θ(λ) = 2γN (cosh λ - 1)`.
pub fn spin_chain_theta(p: &SpinChainParams, lambda: f64) -> Result<f64, ModelsError> {
    p.validate()?;
    Ok(2.0 * p.gamma * p.n_sites as f64 * (lambda.cosh() - 1.0))
}

/// Uniform superposition of all computational basis states.
pub fn uniform_state(dim: usize) -> CVec {
    CVec::from_element(dim, re(1.0 / (dim as f64).sqrt()))
}

/// Orthonormal Pauli-string basis `σ^{m_1} ⊗ ... ⊗ σ^{m_n} / 2^{n/2}` as
/// vectorized columns, with the number of x/y factors of each string.
pub fn pauli_string_basis(n: usize) -> (CMat, Vec<usize>) {
    let singles = [CMat::identity(2), pauli::sigma_x(), pauli::sigma_y(), pauli::sigma_z()];
    let dim = 1usize << n;
    let count = 1usize << (2 * n);
    let scale = 1.0 / (dim as f64).sqrt();
    let mut cols = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for idx in 0..count {
        let digits: Vec<usize> = (0..n).map(|k| (idx >> (2 * (n - 1 - k))) & 3).collect();
        let m = kron_all(digits.iter().map(|&d| &singles[d])).scale_real(scale);
        cols.push(crate::linalg::vec(&m).expect("square"));
        labels.push(digits.iter().filter(|&&d| d == 1 || d == 2).count());
    }
    let t = CMat::from_fn(count, count, |i, j| cols[j][i]);
    (t, labels)
}

/// Structure of a superoperator in the Pauli-string basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliBlockReport {
    /// Largest entry coupling strings with different numbers of x/y factors.
    pub max_off_block: f64,
    /// Largest imaginary part of any entry.
    pub max_imag: f64,
}

pub fn pauli_block_structure(superop: &SuperOp, n: usize) -> PauliBlockReport {
    let (t, labels) = pauli_string_basis(n);
    let m = &(&t.adjoint() * superop.matrix()) * &t;
    let mut max_off_block: f64 = 0.0;
    let mut max_imag: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let x = m.get(i, j);
            max_imag = max_imag.max(x.im.abs());
            if labels[i] != labels[j] {
                max_off_block = max_off_block.max(x.norm());
            }
        }
    }
    PauliBlockReport {
        max_off_block,
        max_imag,
    }
}

/// Antisymmetric 8×8 block of the ring's Hamiltonian part on the strings
/// `zxz, 1xz, zx1, 1x1, zyz, 1yz, zy1, 1y1` around one site.
pub fn ring_antisymmetric_block(j: f64) -> DMatrix<f64> {
    let t = 2.0 * j;
    let upper = [[0.0, t, t, 0.0], [t, 0.0, 0.0, t], [t, 0.0, 0.0, t], [0.0, t, t, 0.0]];
    DMatrix::from_fn(8, 8, |r, c| match (r < 4, c < 4) {
        (true, false) => upper[r][c - 4],
        (false, true) => -upper[c][r - 4],
        _ => 0.0,
    })
}

// ---------------------------------------------------------------------------
// Dispatch by name.

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExampleParams {
    SingleQubit(SingleQubitParams),
    TwoQubit(TwoQubitParams),
    SpinChain(SpinChainParams),
}

impl ExampleParams {
    /// Defaults: the closed-form qubit with `γ = 1`; `α = g = 1`; `N = 2`,
    /// `J = γ = 1`.
    pub fn from_name(name: &str) -> Result<Self, ModelsError> {
        match name {
            "single-qubit" => Ok(Self::SingleQubit(SingleQubitParams::closed_form(1.0))),
            "two-qubit" => Ok(Self::TwoQubit(TwoQubitParams { alpha: 1.0, g: 1.0 })),
            "spin-chain" => Ok(Self::SpinChain(SpinChainParams {
                n_sites: 2,
                j: 1.0,
                gamma: 1.0,
            })),
            other => Err(ModelsError::UnknownExample(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SingleQubit(_) => "single-qubit",
            Self::TwoQubit(_) => "two-qubit",
            Self::SpinChain(_) => "spin-chain",
        }
    }

    /// Sets one parameter. The qubit accepts `gamma` (both rates),
    /// `gamma_plus`, `gamma_minus` and `omega`; the pair accepts `alpha` and
    /// `g`; the ring accepts `n`, `j` and `gamma`.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), ModelsError> {
        let example = self.name();
        let unknown = || ModelsError::UnknownParameter {
            example,
            key: key.to_string(),
        };
        match self {
            Self::SingleQubit(p) => match key {
                "gamma" => {
                    p.gamma_plus = value;
                    p.gamma_minus = value;
                }
                "gamma_plus" => p.gamma_plus = value,
                "gamma_minus" => p.gamma_minus = value,
                "omega" => p.omega = value,
                _ => return Err(unknown()),
            },
            Self::TwoQubit(p) => match key {
                "alpha" => p.alpha = value,
                "g" => p.g = value,
                _ => return Err(unknown()),
            },
            Self::SpinChain(p) => match key {
                "n" | "N" => {
                    if value.fract() != 0.0 || value < 0.0 {
                        return Err(ModelsError::InvalidParameter {
                            name: "n_sites",
                            value,
                            reason: "must be a non-negative integer",
                        });
                    }
                    p.n_sites = value as usize;
                }
                "j" | "J" => p.j = value,
                "gamma" => p.gamma = value,
                _ => return Err(unknown()),
            },
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Example, ModelsError> {
        match self {
            Self::SingleQubit(p) => build_single_qubit(p),
            Self::TwoQubit(p) => build_two_qubit(p),
            Self::SpinChain(p) => build_spin_chain(p),
        }
    }

    /// Closed-form SCGF of the example.
    pub fn theta(&self, lambda: f64) -> Result<f64, ModelsError> {
        match self {
            Self::SingleQubit(p) => single_qubit_theta(p, lambda),
            Self::TwoQubit(p) => two_qubit_theta(p, lambda),
            Self::SpinChain(p) => spin_chain_theta(p, lambda),
        }
    }

    /// `θ_s(λ) = θ(λ + s) - θ(s)`.
    pub fn theta_s(&self, lambda: f64, s: f64) -> Result<f64, ModelsError> {
        Ok(self.theta(lambda + s)? - self.theta(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::sigma_z;

    #[test]
    fn oracle_values() {
        let q = ExampleParams::from_name("single-qubit").unwrap();
        assert!((q.theta(1.0).unwrap() - 0.155_57).abs() < 1e-5);
        let c = ExampleParams::from_name("spin-chain").unwrap();
        assert!((c.theta(1.0).unwrap() - 2.172_32).abs() < 1e-5);
        for name in ["single-qubit", "two-qubit", "spin-chain"] {
            assert_eq!(ExampleParams::from_name(name).unwrap().theta(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn qubit_closed_form_domain() {
        let p = SingleQubitParams {
            gamma_plus: 2.0,
            gamma_minus: 1.0,
            omega: 0.5,
        };
        assert!(matches!(
            single_qubit_theta(&p, 0.5),
            Err(ModelsError::OutOfValidityDomain(_))
        ));
        let p = SingleQubitParams::closed_form(1.0);
        assert!(matches!(
            single_qubit_l(&p, 0.0),
            Err(ModelsError::OutOfValidityDomain(_))
        ));
        assert!(matches!(
            QubitRootParams::at(1e-8),
            Err(ModelsError::OutOfValidityDomain(_))
        ));
    }

    #[test]
    fn qubit_root_squares_to_l() {
        let p = SingleQubitParams::closed_form(1.0);
        for lambda in [0.8, -0.5, 1.7] {
            let h = QubitRootParams::at(lambda).unwrap().l_half();
            let l = single_qubit_l(&p, lambda).unwrap();
            assert!((&h * &h).distance(&l) < 1e-12);
        }
    }

    #[test]
    fn two_qubit_trace_normalization() {
        let p = TwoQubitParams { alpha: 0.5, g: 2.0 };
        for lambda in [-1.2, 0.3, 1.5] {
            let e = TwoQubitEigen::at(&p, lambda).unwrap();
            assert!((e.a + e.b + e.c + e.d - 1.0).abs() < 1e-10);
            assert!(((&e.l() * &e.r()).trace().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn translation_moves_sites_forward() {
        for n in [2, 4] {
            let v = translation_operator(n);
            assert!((&v.adjoint() * &v).distance(&CMat::identity(1 << n)) < 1e-15);
            for k in 0..n {
                let moved = &(&v.adjoint() * &site_operator(n, k, &sigma_z())) * &v;
                assert!(moved.distance(&site_operator(n, (k + 1) % n, &sigma_z())) < 1e-15);
            }
        }
    }

    #[test]
    fn ring_block_is_antisymmetric() {
        let b = ring_antisymmetric_block(1.0);
        assert_eq!(&b + b.transpose(), DMatrix::zeros(8, 8));
        assert_eq!(b[(0, 5)], 2.0);
        assert_eq!(b[(5, 0)], -2.0);
    }

    #[test]
    fn invalid_parameters() {
        let bad = SpinChainParams {
            n_sites: 3,
            j: 1.0,
            gamma: 1.0,
        };
        assert!(build_spin_chain(&bad).is_err());
        assert!(build_two_qubit(&TwoQubitParams { alpha: -1.0, g: 1.0 }).is_err());
        let mut p = ExampleParams::from_name("two-qubit").unwrap();
        assert!(p.set("omega", 1.0).is_err());
        assert!(ExampleParams::from_name("three-qubit").is_err());
    }

    #[test]
    fn example_symmetries_hold() {
        for name in ["single-qubit", "two-qubit", "spin-chain"] {
            let ex = ExampleParams::from_name(name).unwrap().build().unwrap();
            let report = crate::symmetry::check_dynamics_symmetry(&ex.model, &ex.symmetry).unwrap();
            assert!(report.pass, "{name}: {report:?}");
            ex.symmetry.check_weights(&ex.observable).unwrap();
        }
    }
}
