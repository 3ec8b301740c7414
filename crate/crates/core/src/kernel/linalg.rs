//! Spectral routines on [`ComplexMatrix`]: Hermitian eigendecomposition,
//! matrix exponential, PSD square roots and sign operators.

use std::cmp::Ordering;

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64 as C64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let d = self.values.len();
        let mut out = ComplexMatrix::zeros(d);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == ZERO {
                continue;
            }
            for i in 0..d {
                let vi = self.vectors.get(i, k) * w;
                for j in 0..d {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + vi * self.vectors.get(j, k).conj());
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Ties in the eigenvalues (within `tol`) are ordered by the real parts of
/// the eigenvector entries, lexicographically descending. Each eigenvector is
/// phase-fixed so its first non-negligible component is real and positive.
pub fn hermitian_eig(a: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let defect = a.hermiticity_defect();
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    let d = a.dim();
    let eig = SymmetricEigen::new(a.hermitian_part().to_nalgebra());

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..d)
        .map(|k| {
            let mut v: Vec<C64> = (0..d).map(|i| eig.eigenvectors[(i, k)]).collect();
            fix_phase(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();

    pairs.sort_by(|(la, va), (lb, vb)| {
        if (la - lb).abs() > tol {
            return lb.partial_cmp(la).unwrap_or(Ordering::Equal);
        }
        for (x, y) in va.iter().zip(vb) {
            if (x.re - y.re).abs() > 1e-12 {
                return y.re.partial_cmp(&x.re).unwrap_or(Ordering::Equal);
            }
        }
        Ordering::Equal
    });

    let mut vectors = ComplexMatrix::zeros(d);
    let mut values = Vec::with_capacity(d);
    for (k, (lambda, v)) in pairs.into_iter().enumerate() {
        values.push(lambda);
        for (i, z) in v.into_iter().enumerate() {
            vectors.set(i, k, z);
        }
    }
    Ok(HermitianEigen { values, vectors })
}

fn fix_phase(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-8 * norm).copied() {
        let phase = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Matrix exponential.
///
/// Skew-Hermitian and Hermitian inputs go through the eigendecomposition, so
/// `exp(−iHt)` is unitary to machine precision. Everything else uses
/// scaling and squaring of the Taylor series, truncated once the remaining
/// terms fall below `tol`.
pub fn mat_exp(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::OutOfRange(format!("tolerance {tol} must be positive")));
    }
    let scale = a.frobenius_norm().max(1.0);
    let skew_defect = (a + &a.adjoint()).frobenius_norm();
    if skew_defect <= 1e-14 * scale {
        // a = −iH with H = i·a Hermitian.
        let h = a.scale(C64::new(0.0, 1.0)).hermitian_part();
        let eig = hermitian_eig(&h, f64::INFINITY)?;
        return Ok(eig.map(|lambda| C64::new(0.0, -lambda).exp()));
    }
    if a.hermiticity_defect() <= 1e-14 * scale {
        let eig = hermitian_eig(&a.hermitian_part(), f64::INFINITY)?;
        return Ok(eig.map(|lambda| C64::new(lambda.exp(), 0.0)));
    }
    Ok(taylor_exp(a, tol))
}

fn taylor_exp(a: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let norm = a.frobenius_norm();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = a.scale_real(0.5f64.powi(squarings as i32));
    let d = a.dim();
    let mut sum = ComplexMatrix::identity(d);
    let mut term = ComplexMatrix::identity(d);
    // Squaring amplifies the truncation error by roughly 2^s.
    let target = tol * 1e-3 / 2f64.powi(squarings as i32).max(1.0);
    for k in 1..200 {
        term = (&term * &scaled).scale_real(1.0 / k as f64);
        sum = &sum + &term;
        if term.frobenius_norm() < target {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Square root of a positive semi-definite matrix; negative eigenvalues
/// within `tol` are clipped to zero.
pub fn sqrt_psd(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a, tol)?;
    if let Some(&min) = eig.values.last() {
        if min < -tol {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
    }
    Ok(eig.map(|lambda| C64::new(lambda.max(0.0).sqrt(), 0.0)))
}

/// Sign operator of a Hermitian matrix: eigenvalues mapped to ±1, with zero
/// eigenvalues sent to +1. The result squares to the identity.
pub fn sign_operator(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a, tol)?;
    Ok(eig.map(|lambda| if lambda >= 0.0 { C64::new(1.0, 0.0) } else { C64::new(-1.0, 0.0) }))
}

#[cfg(test)]
mod tests {
    use super::super::matrix::gates::*;
    use super::*;

    #[test]
    fn eig_of_diagonal_and_pauli() {
        let e = hermitian_eig(&ComplexMatrix::diag_real(&[1.0, 3.0]), 1e-10).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert!(e.vectors.distance(&pauli_x()).unwrap() < 1e-14);

        let e = hermitian_eig(&pauli_x(), 1e-10).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vector(0);
        let v1 = e.vector(1);
        assert!((v0[0].re - s).abs() < 1e-14 && (v0[1].re - s).abs() < 1e-14);
        assert!((v1[0].re - s).abs() < 1e-14 && (v1[1].re + s).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eig(&m, 1e-10), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eig_tie_break_is_deterministic() {
        let e = hermitian_eig(&ComplexMatrix::identity(3), 1e-10).unwrap();
        assert_eq!(e.vectors, ComplexMatrix::identity(3));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&ComplexMatrix::zeros(3), 1e-12).unwrap();
        assert_eq!(e, ComplexMatrix::identity(3));
    }

    #[test]
    fn exp_of_rotation_generator() {
        // exp(−iθX) = cos θ I − i sin θ X, evaluated at θ = π/2.
        let theta = std::f64::consts::FRAC_PI_2;
        let a = pauli_x().scale(C64::new(0.0, -theta));
        let e = mat_exp(&a, 1e-12).unwrap();
        let oracle =
            &ComplexMatrix::identity(2).scale_real(theta.cos()) + &pauli_x().scale(C64::new(0.0, -theta.sin()));
        assert!(e.distance(&oracle).unwrap() < 1e-13);
        let minus_i_x = pauli_x().scale(C64::new(0.0, -1.0));
        assert!(e.distance(&minus_i_x).unwrap() < 1e-13);
    }

    #[test]
    fn taylor_branch_matches_closed_form() {
        // Nilpotent: exp(N) = I + N.
        let n = ComplexMatrix::from_real_rows(&[&[0.0, 2.5], &[0.0, 0.0]]).unwrap();
        let e = mat_exp(&n, 1e-12).unwrap();
        let want = &ComplexMatrix::identity(2) + &n;
        assert!(e.distance(&want).unwrap() < 1e-12);
        // Large non-normal input exercises squaring.
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 4.0], &[-2.0, 0.5]]).unwrap();
        let back = &mat_exp(&m, 1e-12).unwrap() * &mat_exp(&-&m, 1e-12).unwrap();
        assert!(back.distance(&ComplexMatrix::identity(2)).unwrap() < 1e-10);
    }

    #[test]
    fn exp_rejects_non_finite() {
        let m = ComplexMatrix::diag_real(&[f64::NAN, 0.0]);
        assert_eq!(mat_exp(&m, 1e-10), Err(Error::NonFinite));
    }

    #[test]
    fn sign_operator_squares_to_identity() {
        let m = ComplexMatrix::from_real_rows(&[&[0.3, 1.0], &[1.0, -0.2]]).unwrap();
        let s = sign_operator(&m, 1e-10).unwrap();
        assert!((&s * &s).distance(&ComplexMatrix::identity(2)).unwrap() < 1e-12);
    }
}
