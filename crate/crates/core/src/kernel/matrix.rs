//! Dense square complex matrices.
//!
//! Entries are stored row-major. Every structural predicate takes an explicit
//! tolerance measured in the Frobenius norm.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default absolute tolerance used by predicates when callers have no better
/// number.
pub const DEFAULT_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I_UNIT: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadDimension("matrix dimension must be at least 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::BadDimension(format!("{} entries cannot form a {dim}x{dim} matrix", entries.len())));
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self { dim, entries: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        m
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.entries[i * values.len() + i] = *v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|x| C64::new(*x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Builds a matrix from rows; every row must have as many entries as
    /// there are rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::BadDimension("no rows given".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::BadDimension(format!("row {i} has {} entries, expected {dim}", row.len())));
            }
            entries.extend_from_slice(row);
        }
        Ok(Self { dim, entries })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|x| C64::new(*x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Result<Self> {
        if ket.len() != bra.len() || ket.is_empty() {
            return Err(Error::DimensionMismatch(format!("outer product of lengths {} and {}", ket.len(), bra.len())));
        }
        let dim = ket.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for k in ket {
            for b in bra {
                entries.push(k * b.conj());
            }
        }
        Ok(Self { dim, entries })
    }

    /// Rank-one projector onto `psi` (normalized internally).
    pub fn projector_onto(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::OutOfRange("cannot project onto a zero vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::outer(&v, &v)
    }

    /// Computational-basis projector `|k⟩⟨k|`.
    pub fn basis_projector(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::OutOfRange(format!("basis index {k} outside dimension {dim}")));
        }
        let mut m = Self::zeros(dim);
        m.entries[k * dim + k] = ONE;
        Ok(m)
    }

    /// Matrix unit `|i⟩⟨j|`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Result<Self> {
        if i >= dim || j >= dim {
            return Err(Error::OutOfRange(format!("matrix unit ({i},{j}) outside dimension {dim}")));
        }
        let mut m = Self::zeros(dim);
        m.entries[i * dim + j] = ONE;
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.entries[i * d + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.entries[i * d + j];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z.conj()).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }

    /// `Tr(self† other)`.
    pub fn frobenius_inner(&self, other: &Self) -> Result<C64> {
        self.check_same_dim(other)?;
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.entries[k * d..(k + 1) * d];
                let dst = &mut out[i * d..(i + 1) * d];
                for (o, b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Self { dim: d, entries: out }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { dim: self.dim, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect() })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { dim: self.dim, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect() })
    }

    /// `self · v`.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {}x{} matrix",
                v.len(),
                self.dim,
                self.dim
            )));
        }
        Ok(self.entries.chunks(self.dim).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }

    /// Kronecker product; entry `((i,j),(k,l))` is `a[i,k]·b[j,l]`.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut out = vec![ZERO; d * d];
        for i in 0..da {
            for k in 0..da {
                let a = self.entries[i * da + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..db {
                    for l in 0..db {
                        out[(i * db + j) * d + (k * db + l)] = a * other.entries[j * db + l];
                    }
                }
            }
        }
        Self { dim: d, entries: out }
    }

    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        (self + &adj).scale_real(0.5)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.distance(&self.adjoint()).unwrap_or(f64::INFINITY)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn unitarity_defect(&self) -> f64 {
        let prod = &self.adjoint() * self;
        prod.distance(&Self::identity(self.dim)).unwrap_or(f64::INFINITY)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Largest of the Hermiticity and idempotence defects.
    pub fn projector_defect(&self) -> f64 {
        let sq = self * self;
        self.hermiticity_defect().max(sq.distance(self).unwrap_or(f64::INFINITY))
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.projector_defect() <= tol
    }

    /// Hermitian, unit trace and positive semi-definite, all within `tol`.
    pub fn check_density(&self, tol: f64) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        let herm = self.hermiticity_defect();
        if herm > tol {
            return Err(Error::NotDensity(format!("asymmetry {herm:.3e}")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::NotDensity(format!("trace {tr}")));
        }
        let eig = crate::kernel::hermitian_eig(&self.hermitian_part(), tol)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn is_density(&self, tol: f64) -> bool {
        self.check_density(tol).is_ok()
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    /// Converts a square nalgebra matrix.
    pub fn from_nalgebra(m: &DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::BadDimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        let d = m.nrows();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(m[(i, j)]);
            }
        }
        Self::new(d, entries)
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for row in self.entries.chunks(self.dim) {
            let cells: Vec<String> = row.iter().map(|z| format!("{:+.4}{:+.4}i", z.re, z.im)).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

// Operator impls panic on dimension mismatch; the `try_*` methods are the
// fallible equivalents.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix sum dimension mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix difference dimension mismatch")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

/// Pauli and Hadamard matrices used throughout the tests and scenarios.
pub mod gates {
    use super::*;

    pub fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::new(2, vec![ZERO, -I_UNIT, I_UNIT, ZERO]).unwrap()
    }

    pub fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
    }

    pub fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2), ComplexMatrix::identity(4));

        let p0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let p1 = ComplexMatrix::diag_real(&[0.0, 1.0]);
        assert_eq!(p0.kron(&p1), ComplexMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_of_pauli_x_is_antidiagonal() {
        // Hand oracle: (X⊗X)[(i,j),(k,l)] = X[i,k]X[j,l] = 1 iff k=1-i and l=1-j,
        // i.e. column index 3 - row index.
        let xx = pauli_x().kron(&pauli_x());
        for r in 0..4 {
            for c in 0..4 {
                let want = if r + c == 3 { ONE } else { ZERO };
                assert_eq!(xx.get(r, c), want, "entry ({r},{c})");
            }
        }
    }

    #[test]
    fn frobenius_inner_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.frobenius_inner(&i2).unwrap(), C64::new(2.0, 0.0));
        assert_eq!(pauli_x().frobenius_inner(&pauli_z()).unwrap(), ZERO);
        let p = ComplexMatrix::projector_onto(&[ONE, I_UNIT]).unwrap();
        assert!((p.frobenius_inner(&p).unwrap() - ONE).norm() < 1e-15);
        assert!(matches!(i2.frobenius_inner(&ComplexMatrix::identity(3)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn predicates() {
        assert!(hadamard().is_unitary(1e-12));
        assert!(pauli_y().is_hermitian(0.0));
        assert!(!pauli_x().is_projector(1e-10));
        assert!(ComplexMatrix::basis_projector(3, 2).unwrap().is_projector(0.0));
        assert!(ComplexMatrix::identity(2).scale_real(0.5).is_density(1e-12));
        assert!(!pauli_z().is_density(1e-12));
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        assert!(ComplexMatrix::new(0, vec![]).is_err());
        assert!(ComplexMatrix::new(2, vec![ONE; 3]).is_err());
        assert!(ComplexMatrix::from_rows(&[vec![ONE, ZERO]]).is_err());
    }
}
