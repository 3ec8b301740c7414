use super::grid::{TimeGrid, TimeLabel};
use crate::error::{Error, Result};
use crate::kernel::{mat_exp, ComplexMatrix, I_UNIT};

/// Unitary bridges `B(t_{k+1}, t_k)` between adjacent grid labels.
///
/// Bridges over longer spans are products of adjacent ones; the reverse
/// direction is the adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgingSchedule {
    grid: TimeGrid,
    bridges: Vec<ComplexMatrix>,
}

impl BridgingSchedule {
    /// `bridges[k]` maps `t_k` to `t_{k+1}`; each must be unitary within `tol`.
    pub fn new(grid: TimeGrid, bridges: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        if bridges.len() + 1 != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} bridges for grid {grid} with {} labels",
                bridges.len(),
                grid.len()
            )));
        }
        for b in &bridges {
            if b.dim() != grid.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "bridge is {}x{}, slot dimension {}",
                    b.dim(),
                    b.dim(),
                    grid.dim()
                )));
            }
            let defect = b.unitarity_defect();
            if defect > tol {
                return Err(Error::NotUnitary(defect));
            }
        }
        Ok(Self { grid, bridges })
    }

    pub fn identity(grid: TimeGrid) -> Self {
        let bridges = vec![ComplexMatrix::identity(grid.dim()); grid.len().saturating_sub(1)];
        Self { grid, bridges }
    }

    /// Same unitary between every adjacent pair.
    pub fn uniform(grid: TimeGrid, bridge: ComplexMatrix, tol: f64) -> Result<Self> {
        let bridges = vec![bridge; grid.len().saturating_sub(1)];
        Self::new(grid, bridges, tol)
    }

    /// `B(t_{k+1}, t_k) = exp(−i H_k (t_{k+1} − t_k))` from `(H_k, Δt_k)`.
    pub fn from_hamiltonians(grid: TimeGrid, steps: &[(ComplexMatrix, f64)], tol: f64) -> Result<Self> {
        let bridges = steps
            .iter()
            .map(|(h, dt)| {
                let defect = h.hermiticity_defect();
                if defect > tol {
                    return Err(Error::NotHermitian(defect));
                }
                mat_exp(&h.scale(-I_UNIT * *dt), tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, bridges, tol.max(1e-10))
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn adjacent(&self) -> &[ComplexMatrix] {
        &self.bridges
    }

    /// `B(to, from)`.
    pub fn bridge(&self, to: TimeLabel, from: TimeLabel) -> Result<ComplexMatrix> {
        let (i, j) = (self.grid.require(from)?, self.grid.require(to)?);
        if i <= j {
            Ok(self.bridges[i..j].iter().fold(ComplexMatrix::identity(self.grid.dim()), |acc, b| b * &acc))
        } else {
            Ok(self.bridge(from, to)?.adjoint())
        }
    }

    /// Schedule on a sub-grid; each new adjacent bridge is the composition
    /// across the removed labels.
    pub fn restrict(&self, sub: &TimeGrid) -> Result<Self> {
        if sub.dim() != self.grid.dim() {
            return Err(Error::DimensionMismatch(format!("{} vs {}", sub.dim(), self.grid.dim())));
        }
        let bridges = sub.labels().windows(2).map(|w| self.bridge(w[1], w[0])).collect::<Result<Vec<_>>>()?;
        for l in sub.labels() {
            self.grid.require(*l)?;
        }
        Ok(Self { grid: sub.clone(), bridges })
    }

    /// True when every adjacent bridge is the identity within `tol`.
    pub fn is_identity(&self, tol: f64) -> bool {
        let id = ComplexMatrix::identity(self.grid.dim());
        self.bridges.iter().all(|b| b.distance(&id).map(|d| d <= tol).unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::gates::*;

    #[test]
    fn composition_and_adjoint() {
        let grid = TimeGrid::sequential(0, 4, 2).unwrap();
        let s = BridgingSchedule::new(grid, vec![hadamard(), pauli_x(), pauli_z()], 1e-12).unwrap();
        let (t0, t1, t2, t3) = (TimeLabel(0), TimeLabel(1), TimeLabel(2), TimeLabel(3));
        let composed = s.bridge(t3, t0).unwrap();
        let manual = &(&pauli_z() * &pauli_x()) * &hadamard();
        assert!(composed.distance(&manual).unwrap() < 1e-15);
        let split = &s.bridge(t3, t1).unwrap() * &s.bridge(t1, t0).unwrap();
        assert!(composed.distance(&split).unwrap() < 1e-15);
        assert!(s.bridge(t0, t2).unwrap().distance(&s.bridge(t2, t0).unwrap().adjoint()).unwrap() < 1e-15);
        assert_eq!(s.bridge(t2, t2).unwrap(), ComplexMatrix::identity(2));
    }

    #[test]
    fn restriction_composes_across_gaps() {
        let grid = TimeGrid::sequential(0, 3, 2).unwrap();
        let s = BridgingSchedule::new(grid, vec![hadamard(), pauli_x()], 1e-12).unwrap();
        let sub = TimeGrid::new(vec![TimeLabel(0), TimeLabel(2)], 2).unwrap();
        let r = s.restrict(&sub).unwrap();
        assert!(r.adjacent()[0].distance(&(&pauli_x() * &hadamard())).unwrap() < 1e-15);
    }

    #[test]
    fn rejects_non_unitary_and_bad_counts() {
        let grid = TimeGrid::sequential(0, 2, 2).unwrap();
        let bad = ComplexMatrix::diag_real(&[1.0, 2.0]);
        assert!(matches!(BridgingSchedule::new(grid.clone(), vec![bad], 1e-10), Err(Error::NotUnitary(_))));
        assert!(BridgingSchedule::new(grid, vec![], 1e-10).is_err());
    }

    #[test]
    fn hamiltonian_bridge_is_unitary() {
        let grid = TimeGrid::sequential(0, 2, 2).unwrap();
        let s = BridgingSchedule::from_hamiltonians(grid, &[(pauli_x(), std::f64::consts::FRAC_PI_2)], 1e-12).unwrap();
        let want = pauli_x().scale(-I_UNIT);
        assert!(s.adjacent()[0].distance(&want).unwrap() < 1e-13);
    }
}
