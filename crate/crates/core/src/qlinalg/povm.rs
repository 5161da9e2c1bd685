use super::eigen::eigvalsh;
use super::matrix::CMatrix;
use super::state::{DensityOperator, Ket};
use super::{POVM_TOL, STRUCTURAL_TOL};
use crate::error::{QrpsError, Result};

/// Labeled positive operator-valued measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    labels: Vec<String>,
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(outcomes: Vec<(String, CMatrix)>) -> Result<Self> {
        let (labels, elements): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
        let p = Self { labels, elements };
        p.validate()?;
        Ok(p)
    }

    /// Outcomes labeled "0", "1", ...
    pub fn from_elements(elements: Vec<CMatrix>) -> Result<Self> {
        let labels = (0..elements.len()).map(|i| i.to_string()).collect();
        let p = Self { labels, elements };
        p.validate()?;
        Ok(p)
    }

    /// Rank-one projective measurement onto an orthonormal basis.
    pub fn projective(basis: &[Ket]) -> Result<Self> {
        Self::from_elements(basis.iter().map(Ket::projector).collect())
    }

    pub fn computational(dim: usize) -> Self {
        let elements = (0..dim).map(|k| Ket::basis(dim, k).projector()).collect();
        Self::from_trusted(elements)
    }

    pub(crate) fn from_trusted(elements: Vec<CMatrix>) -> Self {
        let labels = (0..elements.len()).map(|i| i.to_string()).collect();
        Self { labels, elements }
    }

    fn validate(&self) -> Result<()> {
        let first = self
            .elements
            .first()
            .ok_or_else(|| QrpsError::validation("POVM has no outcomes"))?;
        let d = first.rows();
        let mut sum = CMatrix::zeros(d, d);
        for (label, e) in self.labels.iter().zip(&self.elements) {
            if !e.is_square() || e.rows() != d {
                return Err(QrpsError::dimension(format!(
                    "POVM element {label} is {}x{}, expected {d}x{d}",
                    e.rows(),
                    e.cols()
                )));
            }
            if !e.is_hermitian(STRUCTURAL_TOL) {
                return Err(QrpsError::validation(format!(
                    "POVM element {label} not Hermitian"
                )));
            }
            let min = eigvalsh(e)?.first().copied().unwrap_or(0.0);
            if min < -STRUCTURAL_TOL {
                return Err(QrpsError::validation(format!(
                    "POVM element {label} not PSD (eigenvalue {min:e})"
                )));
            }
            sum = &sum + e;
        }
        let defect = sum.max_abs_diff(&CMatrix::identity(d));
        if defect > POVM_TOL {
            return Err(QrpsError::validation(format!(
                "POVM elements do not sum to identity (defect {defect:e})"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Born-rule outcome distribution.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(QrpsError::dimension(format!(
                "POVM acts on dim {}, state has dim {}",
                self.dim(),
                rho.dim()
            )));
        }
        Ok(self
            .elements
            .iter()
            .map(|e| rho.expectation(e).max(0.0))
            .collect())
    }

    pub fn tensor(&self, other: &Povm) -> Povm {
        let mut labels = Vec::new();
        let mut elements = Vec::new();
        for (la, a) in self.labels.iter().zip(&self.elements) {
            for (lb, b) in other.labels.iter().zip(&other.elements) {
                labels.push(format!("{la},{lb}"));
                elements.push(a.kron(b));
            }
        }
        Povm { labels, elements }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plus_minus_on_zero_is_unbiased() {
        let pm = Povm::projective(&[Ket::plus(), Ket::minus()]).unwrap();
        let p = pm
            .probabilities(&DensityOperator::from_ket(&Ket::basis(2, 0)))
            .unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn incomplete_povm_rejected() {
        let only_zero = Ket::basis(2, 0).projector();
        assert!(Povm::from_elements(vec![only_zero]).is_err());
    }

    #[test]
    fn negative_element_rejected() {
        let a = CMatrix::diag_real(&[1.5, 1.0]);
        let b = CMatrix::diag_real(&[-0.5, 0.0]);
        assert!(Povm::from_elements(vec![a, b]).is_err());
    }
}
