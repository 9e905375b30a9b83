//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (the degree-selection scheme of Higham, SIAM J. Matrix Anal. Appl. 26, 2005).

use nalgebra::DMatrix;

use super::{CMat, LinalgError, C64};

const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
    (13, 5.371_920_351_148_152e0),
];

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        13 => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
        _ => unreachable!("no Padé table for degree {m}"),
    }
}

type M = DMatrix<C64>;

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Returns `(U, V)` with `r_m(A) = (V - U)^{-1} (V + U)`.
fn pade_parts(a: &M, m: usize) -> (M, M) {
    let n = a.nrows();
    let id = M::identity(n, n);
    let b = pade_coefficients(m);
    let a2 = a * a;
    if m == 13 {
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let inner_u = &a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]);
        let u_poly = &a6 * inner_u + &a6 * real(b[7]) + &a4 * real(b[5]) + &a2 * real(b[3]) + &id * real(b[1]);
        let u = a * u_poly;
        let inner_v = &a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]);
        let v = &a6 * inner_v + &a6 * real(b[6]) + &a4 * real(b[4]) + &a2 * real(b[2]) + &id * real(b[0]);
        return (u, v);
    }
    // Low degrees: accumulate even powers of A directly.
    let mut u_poly = M::zeros(n, n);
    let mut v = M::zeros(n, n);
    let mut power = id;
    for k in 0..=m / 2 {
        v += &power * real(b[2 * k]);
        u_poly += &power * real(b[2 * k + 1]);
        power = &power * &a2;
    }
    (a * u_poly, v)
}

/// Matrix exponential `e^m`.
pub fn expm(m: &CMat) -> Result<CMat, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            context: "expm",
            expected: "square matrix".into(),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    let a = m.as_matrix();
    let norm = m.norm_1();
    if !norm.is_finite() {
        return Err(LinalgError::Overflow { norm });
    }

    let (degree, squarings) = match THETA.iter().find(|(_, theta)| norm <= *theta) {
        Some(&(deg, _)) => (deg, 0),
        None => {
            let theta13 = THETA[4].1;
            let s = (norm / theta13).log2().ceil().max(0.0);
            if s > 1000.0 {
                return Err(LinalgError::Overflow { norm });
            }
            (13, s as u32)
        }
    };

    let scaled = if squarings > 0 {
        a * real(0.5f64.powi(squarings as i32))
    } else {
        a.clone()
    };
    let (u, v) = pade_parts(&scaled, degree);
    let numer = &v + &u;
    let denom = &v - &u;
    let mut r = denom.lu().solve(&numer).ok_or(LinalgError::Singular)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    CMat::from_matrix(r).map_err(|_| LinalgError::Overflow { norm })
}

#[cfg(test)]
mod tests {
    use super::super::pauli::sigma_x;
    use super::super::I;
    use super::*;

    fn taylor(m: &CMat, terms: usize) -> CMat {
        let n = m.nrows();
        let mut sum = CMat::identity(n);
        let mut term = CMat::identity(n);
        for k in 1..terms {
            term = (&term * m).scale_real(1.0 / k as f64);
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn zero_and_diagonal() {
        assert!(expm(&CMat::zeros(3, 3)).unwrap().distance(&CMat::identity(3)) < 1e-15);
        let d = CMat::diag(&[real(0.7), C64::new(-2.0, 1.0)]);
        let e = expm(&d).unwrap();
        assert!((e.get(0, 0) - real(0.7f64.exp())).norm() < 1e-14);
        assert!((e.get(1, 1) - C64::new(-2.0, 1.0).exp()).norm() < 1e-14);
        assert!(e.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn pauli_rotation() {
        let arg = sigma_x().scale(-I * std::f64::consts::FRAC_PI_2);
        let e = expm(&arg).unwrap();
        let expected = sigma_x().scale(-I);
        assert!(e.distance(&expected) < 1e-14);
        // Independent route: a long Taylor series converges for this small norm.
        assert!(taylor(&arg, 20).distance(&expected) < 1e-12);
    }

    #[test]
    fn every_degree_agrees_with_taylor() {
        let base = CMat::from_rows(&[
            vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.0), C64::new(0.0, 0.4)],
            vec![C64::new(0.1, -0.3), C64::new(-0.5, 0.2), C64::new(0.2, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(0.4, 0.1), C64::new(0.1, -0.1)],
        ]);
        for scale in [0.01, 0.2, 1.0, 2.5, 6.0, 20.0] {
            let m = base.scale_real(scale);
            let e = expm(&m).unwrap();
            let reference = if scale < 3.0 {
                taylor(&m, 60)
            } else {
                // Square a well-converged Taylor series of a scaled copy.
                let mut r = taylor(&m.scale_real(1.0 / 64.0), 30);
                for _ in 0..6 {
                    r = &r * &r;
                }
                r
            };
            let rel = e.distance(&reference) / reference.norm();
            assert!(rel < 1e-12, "scale {scale}: relative error {rel:e}");
        }
    }

    #[test]
    fn overflow_is_reported() {
        let m = CMat::diag(&[real(f64::MAX), real(1.0)]);
        assert!(matches!(expm(&m), Err(LinalgError::Overflow { .. })));
    }
}
