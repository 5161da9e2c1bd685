use std::fmt;

use super::eigen::eigvalsh;
use super::matrix::{CMatrix, C64, ONE, ZERO};
use super::STRUCTURAL_TOL;
use crate::error::{QrpsError, Result};

/// Normalized pure state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amps: Vec<C64>,
}

impl Ket {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(QrpsError::dimension("empty state vector"));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > STRUCTURAL_TOL {
            return Err(QrpsError::validation(format!(
                "state vector not normalized (squared norm {norm_sq})"
            )));
        }
        Ok(Self { amps })
    }

    /// Rescales any non-zero vector to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(QrpsError::validation("cannot normalize a zero vector"));
        }
        Ok(Self {
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dim {dim}");
        let mut amps = vec![ZERO; dim];
        amps[k] = ONE;
        Self { amps }
    }

    /// (|0⟩ + |1⟩)/√2
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amps: vec![C64::new(h, 0.0), C64::new(h, 0.0)],
        }
    }

    /// (|0⟩ − |1⟩)/√2
    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amps: vec![C64::new(h, 0.0), C64::new(-h, 0.0)],
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> CMatrix {
        CMatrix::outer(&self.amps, &self.amps)
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ket { amps }
    }

    /// Orthogonal complement of a qubit state, |ψ⊥⟩ = (−b*, a*).
    pub fn qubit_orthogonal(&self) -> Result<Ket> {
        if self.dim() != 2 {
            return Err(QrpsError::dimension("orthogonal complement needs a qubit"));
        }
        Ok(Ket {
            amps: vec![-self.amps[1].conj(), self.amps[0].conj()],
        })
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, PartialEq)]
pub struct DensityOperator {
    m: CMatrix,
}

impl fmt::Debug for DensityOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DensityOperator(dim={}, {:?})",
            self.dim(),
            self.m.as_slice()
        )
    }
}

impl DensityOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_density(&m)?;
        Ok(Self {
            m: m.hermitian_part(),
        })
    }

    /// Skips validation. Only for matrices that are density operators by construction.
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        debug_assert!(m.is_square());
        Self { m }
    }

    pub fn from_ket(k: &Ket) -> Self {
        Self { m: k.projector() }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// diag(p); the entries must form a pmf.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        Self::new(CMatrix::diag_real(p))
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        // a valid density operator always decomposes
        eigvalsh(&self.m).expect("square by construction")
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self {
            m: self.m.kron(&other.m),
        }
    }

    pub fn purity(&self) -> f64 {
        self.m.trace_product(&self.m).re
    }

    /// Tr(Aρ)
    pub fn expectation(&self, a: &CMatrix) -> f64 {
        a.trace_product(&self.m).re
    }

    /// U ρ U†
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        Self {
            m: u.sandwich(&self.m).hermitian_part(),
        }
    }
}

pub(crate) fn check_density(m: &CMatrix) -> Result<()> {
    if !m.is_square() || m.rows() == 0 {
        return Err(QrpsError::dimension(format!(
            "density operator must be square and non-empty, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.as_slice()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(QrpsError::validation(
            "density operator has non-finite entries",
        ));
    }
    let defect = m.hermiticity_defect();
    if defect > STRUCTURAL_TOL {
        return Err(QrpsError::validation(format!(
            "density operator not Hermitian (defect {defect:e})"
        )));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > STRUCTURAL_TOL || tr.im.abs() > STRUCTURAL_TOL {
        return Err(QrpsError::validation(format!(
            "density operator trace {} is not 1",
            tr.re
        )));
    }
    let min = eigvalsh(m)?.first().copied().unwrap_or(0.0);
    if min < -STRUCTURAL_TOL {
        return Err(QrpsError::validation(format!(
            "density operator not PSD (smallest eigenvalue {min:e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_trace_and_non_hermitian() {
        assert!(DensityOperator::new(CMatrix::diag_real(&[0.5, 0.6])).is_err());
        let mut m = CMatrix::diag_real(&[0.5, 0.5]);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityOperator::new(m).is_err());
    }

    #[test]
    fn rejects_negative_spectrum() {
        assert!(DensityOperator::new(CMatrix::diag_real(&[1.5, -0.5])).is_err());
    }

    #[test]
    fn ket_validation() {
        assert!(Ket::new(vec![ONE, ONE]).is_err());
        let k = Ket::normalized(vec![ONE, ONE]).unwrap();
        assert!((k.inner(&Ket::plus()).norm() - 1.0).abs() < 1e-15);
        assert!(Ket::plus().inner(&Ket::minus()).norm() < 1e-15);
    }

    #[test]
    fn orthogonal_complement() {
        let psi = Ket::normalized(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.7)]).unwrap();
        let perp = psi.qubit_orthogonal().unwrap();
        assert!(psi.inner(&perp).norm() < 1e-15);
    }
}
