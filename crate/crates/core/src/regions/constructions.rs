//! Hand-built strategies with closed-form (R, D), used as fixed points for
//! the evaluators and as seeds for CLI strategy files.

use super::estimation::EstimationPovm;
use super::strategy::{trivial_z, InputStates, Strategy};
use crate::channels::{
    make_dephasing_rpc, make_depolarizing_rpc, make_projection_rpc, DistortionFunction,
    RandomParameterChannel,
};
use crate::error::{QrpsError, Result};
use crate::qlinalg::{pauli, Ket, KrausChannel, Povm};

/// A channel, a strategy for it and an explicit estimator.
#[derive(Clone, Debug)]
pub struct Construction {
    pub rpc: RandomParameterChannel,
    pub distortion: DistortionFunction,
    pub strategy: Strategy,
    pub estimator: EstimationPovm,
}

fn check_unit(v: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(QrpsError::validation(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}

fn pm_measurement() -> Result<Povm> {
    Povm::projective(&[Ket::plus(), Ket::minus()])
}

fn xor_pz(alpha: f64) -> Vec<Vec<Vec<f64>>> {
    // Z = X ⊕ S ⊕ V, V ~ Bern(α)
    (0..2)
        .map(|x| {
            (0..2)
                .map(|s| {
                    let mut p = vec![0.0; 2];
                    p[x ^ s] += 1.0 - alpha;
                    p[x ^ s ^ 1] += alpha;
                    p
                })
                .collect()
        })
        .collect()
}

/// Dephasing with strictly-causal CSI: computational inputs, Z = X⊕S⊕V and
/// the estimate ŝ = x⊕z. R = 1 − [h(α∗ε) − h(α)], D = α.
pub fn dephasing_sc_compression(epsilon: f64, alpha: f64) -> Result<Construction> {
    check_unit(alpha, "alpha")?;
    let rpc = make_dephasing_rpc(epsilon)?;
    let distortion = DistortionFunction::hamming(2);
    let strategy = Strategy::strictly_causal(
        vec![0.5, 0.5],
        xor_pz(alpha),
        vec![Ket::basis(2, 0), Ket::basis(2, 1)],
    )?;
    let estimator = EstimationPovm::deterministic(2, 2, 2, distortion.clone(), |x, z| x ^ z)?;
    Ok(Construction {
        rpc,
        distortion,
        strategy,
        estimator,
    })
}

/// Dephasing with causal CSI where the encoder applies F^(s) = N^(s) before
/// the channel; ± inputs, trivial Z, ± measurement and ŝ = y⊕x.
pub fn dephasing_causal_reversion(epsilon: f64) -> Result<Construction> {
    dephasing_causal(epsilon, true)
}

/// As [`dephasing_causal_reversion`] but with F^(s) = id for every s.
pub fn dephasing_causal_identity(epsilon: f64) -> Result<Construction> {
    dephasing_causal(epsilon, false)
}

fn dephasing_causal(epsilon: f64, revert: bool) -> Result<Construction> {
    let rpc = make_dephasing_rpc(epsilon)?;
    let distortion = DistortionFunction::hamming(2);
    let f1 = if revert {
        KrausChannel::unitary(pauli::z())?
    } else {
        KrausChannel::identity(2)
    };
    let strategy = Strategy::causal(
        vec![0.5, 0.5],
        trivial_z(2, 2),
        vec![Ket::plus(), Ket::minus()],
        vec![KrausChannel::identity(2), f1],
    )?;
    let estimator =
        EstimationPovm::relabeled(2, 1, &pm_measurement()?, distortion.clone(), |x, _, y| {
            let mut w = vec![0.0; 2];
            w[x ^ y] = 1.0;
            w
        })?;
    Ok(Construction {
        rpc,
        distortion,
        strategy,
        estimator,
    })
}

fn pauli_pmf(e: f64) -> [f64; 4] {
    [1.0 - e, e / 3.0, e / 3.0, e / 3.0]
}

/// Depolarizing with causal CSI: the encoder undoes the Pauli (F^(s) = N^(s)),
/// sends computational states and describes S lossily through Z = X + Ŝ mod 4,
/// where S = Ŝ + W mod 4 with W ~ (1−α, α/3, α/3, α/3). Needs 0 ≤ α ≤ ε.
/// R = 1 − [H(1−ε, ε/3, ε/3, ε/3) − H(1−α, α/3, α/3, α/3)], D = α.
pub fn depolarizing_causal_compression(epsilon: f64, alpha: f64) -> Result<Construction> {
    let rpc = make_depolarizing_rpc(epsilon)?;
    if !(0.0..=epsilon).contains(&alpha) {
        return Err(QrpsError::validation(format!(
            "alpha must lie in [0, {epsilon}], got {alpha}"
        )));
    }
    let beta = (epsilon - alpha) / (1.0 - 4.0 * alpha / 3.0);
    let (p_w, p_hat) = (pauli_pmf(alpha), pauli_pmf(beta));
    let q = pauli_pmf(epsilon);
    // p(ŝ|s) = p_Ŝ(ŝ) p_W(s − ŝ) / q(s)
    let cond = |s: usize, h: usize| {
        if q[s] == 0.0 {
            if h == s {
                1.0
            } else {
                0.0
            }
        } else {
            p_hat[h] * p_w[(s + 4 - h) % 4] / q[s]
        }
    };
    let pz: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|x| {
            (0..4)
                .map(|s| (0..4).map(|z| cond(s, (z + 4 - x) % 4)).collect())
                .collect()
        })
        .collect();
    let distortion = DistortionFunction::hamming(4);
    let strategy = Strategy::causal(
        vec![0.5, 0.5],
        pz,
        vec![Ket::basis(2, 0), Ket::basis(2, 1)],
        rpc.maps().to_vec(),
    )?;
    let estimator =
        EstimationPovm::deterministic(2, 4, 2, distortion.clone(), |x, z| (z + 4 - x) % 4)?;
    Ok(Construction {
        rpc,
        distortion,
        strategy,
        estimator,
    })
}

/// Dephasing without CSI: ± inputs, ± measurement, ŝ = y⊕x.
/// R = 1 − h(ε), D = 0.
pub fn dephasing_no_csi(epsilon: f64) -> Result<Construction> {
    let rpc = make_dephasing_rpc(epsilon)?;
    let distortion = DistortionFunction::hamming(2);
    let strategy = Strategy::no_csi(vec![0.5, 0.5], vec![Ket::plus(), Ket::minus()])?;
    let estimator =
        EstimationPovm::relabeled(2, 1, &pm_measurement()?, distortion.clone(), |x, _, y| {
            let mut w = vec![0.0; 2];
            w[x ^ y] = 1.0;
            w
        })?;
    Ok(Construction {
        rpc,
        distortion,
        strategy,
        estimator,
    })
}

/// Projection channel (s=1 replaces the input by |ψ⟩) with non-causal CSI.
/// Inputs |ψ⟩, |ψ⊥⟩; X = 0 when s = 1, otherwise X = 0 w.p. α. The
/// estimate is ŝ = x⊕1. R = (1−ε)h(α), D = (1−ε)α.
pub fn projection_nc(epsilon: f64, alpha: f64, psi: &Ket) -> Result<Construction> {
    check_unit(alpha, "alpha")?;
    let rpc = make_projection_rpc(epsilon, psi)?;
    let psi = Ket::new(psi.amplitudes().to_vec())?;
    let perp = psi.qubit_orthogonal()?;
    let distortion = DistortionFunction::hamming(2);
    let strategy = Strategy::non_causal(
        vec![vec![alpha, 1.0 - alpha], vec![1.0, 0.0]],
        InputStates::PerSymbol(vec![psi, perp]),
    )?;
    let estimator = EstimationPovm::deterministic(2, 1, 2, distortion.clone(), |x, _| x ^ 1)?;
    Ok(Construction {
        rpc,
        distortion,
        strategy,
        estimator,
    })
}

/// Depolarizing without CSI: ± inputs and ± measurement; ŝ = 0 when y = x,
/// otherwise ŝ ∈ {2, 3} uniformly. R = 1 − h(2ε/3), D = 2ε/3.
pub fn depolarizing_no_csi(epsilon: f64) -> Result<Construction> {
    let rpc = make_depolarizing_rpc(epsilon)?;
    let distortion = DistortionFunction::hamming(4);
    let strategy = Strategy::no_csi(vec![0.5, 0.5], vec![Ket::plus(), Ket::minus()])?;
    let estimator =
        EstimationPovm::relabeled(2, 1, &pm_measurement()?, distortion.clone(), |x, _, y| {
            if x == y {
                vec![1.0, 0.0, 0.0, 0.0]
            } else {
                vec![0.0, 0.0, 0.5, 0.5]
            }
        })?;
    Ok(Construction {
        rpc,
        distortion,
        strategy,
        estimator,
    })
}
