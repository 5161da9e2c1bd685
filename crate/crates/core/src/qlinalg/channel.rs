use super::matrix::CMatrix;
use super::state::DensityOperator;
use super::STRUCTURAL_TOL;
use crate::error::{QrpsError, Result};

/// CPTP map in Kraus form, ρ ↦ Σ_k K_k ρ K_k†.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| QrpsError::validation("channel needs at least one Kraus operator"))?;
        let (out_dim, in_dim) = (first.rows(), first.cols());
        if in_dim == 0 || out_dim == 0 {
            return Err(QrpsError::dimension("Kraus operators must be non-empty"));
        }
        if let Some(bad) = ops
            .iter()
            .find(|k| k.rows() != out_dim || k.cols() != in_dim)
        {
            return Err(QrpsError::dimension(format!(
                "Kraus operator is {}x{}, expected {out_dim}x{in_dim}",
                bad.rows(),
                bad.cols()
            )));
        }
        let ch = Self {
            in_dim,
            out_dim,
            ops,
        };
        let defect = ch.completeness_defect();
        if defect > STRUCTURAL_TOL {
            return Err(QrpsError::validation(format!(
                "Kraus operators not trace preserving (|Σ K†K − I| = {defect:e})"
            )));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            in_dim: dim,
            out_dim: dim,
            ops: vec![CMatrix::identity(dim)],
        }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn completeness_defect(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.ops {
            sum = &sum + &k.adjoint().matmul(k);
        }
        sum.max_abs_diff(&CMatrix::identity(self.in_dim))
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.in_dim {
            return Err(QrpsError::dimension(format!(
                "channel expects input dim {}, state has dim {}",
                self.in_dim,
                rho.dim()
            )));
        }
        Ok(DensityOperator::from_trusted(
            self.apply_matrix(rho.matrix()).hermitian_part(),
        ))
    }

    /// Kraus action on an arbitrary (e.g. unnormalized) operator.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.ops {
            out = &out + &k.sandwich(m);
        }
        out
    }

    /// Heisenberg picture: A ↦ Σ_k K_k† A K_k.
    pub fn apply_adjoint(&self, a: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.ops {
            out = &out + &k.adjoint().sandwich(a);
        }
        out
    }

    /// `after ∘ self`
    pub fn then(&self, after: &KrausChannel) -> Result<KrausChannel> {
        if after.in_dim != self.out_dim {
            return Err(QrpsError::dimension(format!(
                "cannot compose: output dim {} feeds input dim {}",
                self.out_dim, after.in_dim
            )));
        }
        let mut ops = Vec::with_capacity(self.ops.len() * after.ops.len());
        for b in &after.ops {
            for a in &self.ops {
                ops.push(b.matmul(a));
            }
        }
        Ok(KrausChannel {
            in_dim: self.in_dim,
            out_dim: after.out_dim,
            ops,
        })
    }

    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for a in &self.ops {
            for b in &other.ops {
                ops.push(a.kron(b));
            }
        }
        KrausChannel {
            in_dim: self.in_dim * other.in_dim,
            out_dim: self.out_dim * other.out_dim,
            ops,
        }
    }

    /// Builds a channel from trusted operators (weights already folded in).
    pub(crate) fn from_trusted(in_dim: usize, out_dim: usize, ops: Vec<CMatrix>) -> Self {
        Self {
            in_dim,
            out_dim,
            ops,
        }
    }
}

/// Shorthand for `ch.apply(rho)`.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    ch.apply(rho)
}
