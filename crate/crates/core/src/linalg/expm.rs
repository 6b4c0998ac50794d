use super::{Complex64, ComplexMatrix};
use crate::error::{Error, Result};

const MAX_ORDER: usize = 18;
/// Scaled norm target; keeps the truncated Taylor remainder below 1e-16.
const SCALED_NORM: f64 = 0.5;

/// `exp(a)` by scaling and squaring around a Taylor polynomial of order ≤ 18.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "matrix exponential of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(squarings));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=MAX_ORDER {
        term = term.matmul_unchecked(&scaled).scale_real(1.0 / k as f64);
        sum += &term;
        if term.norm_one() <= f64::EPSILON * 1e-2 * sum.norm_one() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul_unchecked(&sum);
    }
    Ok(sum)
}

/// `exp(scale · a)`.
pub fn expm_action(a: &ComplexMatrix, scale: Complex64) -> Result<ComplexMatrix> {
    expm(&a.scale(scale))
}

#[cfg(test)]
mod tests {
    use super::super::{pauli, I, ZERO};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    /// Plain Taylor series, summed until a term drops below 1e-14 in Frobenius norm.
    fn taylor_oracle(a: &ComplexMatrix) -> ComplexMatrix {
        let n = a.rows();
        let mut sum = ComplexMatrix::identity(n);
        let mut term = ComplexMatrix::identity(n);
        let mut k = 1.0;
        loop {
            term = (&term * a).scale_real(1.0 / k);
            sum += &term;
            if term.frobenius_norm() < 1e-14 {
                return sum;
            }
            k += 1.0;
        }
    }

    fn random_anti_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ComplexMatrix {
        let m = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let h = m.hermitian_part();
        let h = h.scale_real(scale / h.frobenius_norm());
        h.scale(-I)
    }

    #[test]
    fn pauli_x_quarter_turn() {
        let u = expm_action(&pauli::x(), Complex64::new(0.0, -FRAC_PI_2)).unwrap();
        let expected = pauli::x().scale(-I);
        assert!((&u - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let z = ComplexMatrix::zeros(5, 5);
        let u = expm_action(&z, Complex64::new(3.0, -2.0)).unwrap();
        assert_eq!(u, ComplexMatrix::identity(5));
    }

    #[test]
    fn rejects_non_square() {
        assert!(expm(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn anti_hermitian_exponential_is_unitary_and_matches_taylor() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &scale in &[0.01, 0.7, 3.0, 10.0] {
            let a = random_anti_hermitian(&mut rng, 6, scale);
            let u = expm(&a).unwrap();
            let unitarity = &(&u.adjoint() * &u) - &ComplexMatrix::identity(6);
            assert!(unitarity.frobenius_norm() <= 1e-11, "scale {scale}");
            let oracle = taylor_oracle(&a);
            let rel = (&u - &oracle).frobenius_norm() / oracle.frobenius_norm();
            assert!(rel <= 1e-12, "scale {scale}: relative error {rel:e}");
        }
    }

    #[test]
    fn general_complex_matrix_matches_taylor() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = ComplexMatrix::from_fn(4, 4, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let u = expm(&a).unwrap();
        let oracle = taylor_oracle(&a);
        assert!((&u - &oracle).frobenius_norm() / oracle.frobenius_norm() <= 1e-12);
        assert_ne!(u[(0, 1)], ZERO);
    }
}
