//! Seeded random matrices and states.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector of length `len`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..len).map(|_| gaussian_complex(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Hermitian matrix with independent Gaussian entries (GUE up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m.set(i, j, gaussian_complex(rng));
        }
    }
    m.hermitian_part()
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal divided out.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(&q).expect("square by construction")
}

/// Random density matrix `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            g.set(i, j, gaussian_complex(rng));
        }
    }
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr).hermitian_part()
}

/// Random dichotomic observable `U diag(±1) U†` with at least one eigenvalue
/// of each sign when `dim ≥ 2`.
pub fn random_dichotomic<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let u = random_unitary(rng, dim);
    let plus = if dim >= 2 { rng.random_range(1..dim) } else { 1 };
    let signs: Vec<f64> = (0..dim).map(|k| if k < plus { 1.0 } else { -1.0 }).collect();
    &(&u * &ComplexMatrix::diag_real(&signs)) * &u.adjoint()
}
