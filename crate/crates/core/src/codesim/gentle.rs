use serde::Serialize;

use crate::error::{QrpsError, Result};
use crate::qlinalg::{eigvalsh, psd_sqrt, CMatrix, DensityOperator, STRUCTURAL_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GentleOutcome {
    /// Tr(Λρ)
    pub success_prob: f64,
    /// ‖ρ − ρ′‖₁ with ρ′ = √Λ ρ √Λ / Tr(Λρ)
    pub trace_distance: f64,
}

/// Success probability of Λ on ρ and the disturbance of the post-measurement
/// state. Requires 0 ⪯ Λ ⪯ I.
pub fn gentle_measurement_check(rho: &DensityOperator, lambda: &CMatrix) -> Result<GentleOutcome> {
    if !lambda.is_square() || lambda.rows() != rho.dim() {
        return Err(QrpsError::dimension("operator and state dimensions differ"));
    }
    if !lambda.is_hermitian(STRUCTURAL_TOL) {
        return Err(QrpsError::validation(
            "measurement operator is not Hermitian",
        ));
    }
    let eig = eigvalsh(lambda)?;
    if eig
        .iter()
        .any(|&l| !(-STRUCTURAL_TOL..=1.0 + STRUCTURAL_TOL).contains(&l))
    {
        return Err(QrpsError::validation(
            "measurement operator must satisfy 0 <= Lambda <= I",
        ));
    }
    let p = rho.expectation(lambda);
    if p <= 0.0 {
        return Err(QrpsError::validation(
            "measurement never succeeds on this state",
        ));
    }
    let root = psd_sqrt(&lambda.hermitian_part())?;
    let mut diff = root.matmul(rho.matrix()).matmul(&root).scale(-1.0 / p);
    diff.add_scaled(1.0, rho.matrix());
    let td = eigvalsh(&diff.hermitian_part())?
        .iter()
        .map(|l| l.abs())
        .sum();
    Ok(GentleOutcome {
        success_prob: p.min(1.0),
        trace_distance: td,
    })
}
