use serde::Serialize;

use super::estimation::{optimal_estimation_povm, solve_group, ConditionalFamily, EstimationPovm};
use super::strategy::{CsiMode, Strategy};
use crate::channels::{DistortionFunction, RandomParameterChannel};
use crate::error::{QrpsError, Result};
use crate::qlinalg::{Axis, ClassicalQuantumState, DensityOperator, Part};

/// Rate split into its information term and the side-information penalty:
/// `raw rate = information − penalty`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateTerms {
    /// I(Z,X;B) for sc/causal, I(X;B) otherwise.
    pub information: f64,
    /// I(Z;S|X) for sc/causal, I(X;S) for nc, 0 without CSI.
    pub penalty: f64,
}

/// One achievable (R, D) pair together with the strategy that attains it.
#[derive(Clone, Debug)]
pub struct RatePoint {
    pub mode: CsiMode,
    /// Number of channel uses the strategy spans; `rate` is per use.
    pub k: usize,
    pub rate: f64,
    pub raw_rate: f64,
    pub distortion: f64,
    /// The computed rate was negative and has been replaced by 0.
    pub clamped: bool,
    /// The estimation POVM came from a restricted search (D is an upper bound).
    pub povm_restricted: bool,
    pub terms: RateTerms,
    pub strategy: Strategy,
}

/// Classical weights w(s,z,x) and channel outputs ρ^{s,x}_B of a strategy.
pub(crate) struct Ensemble {
    pub ns: usize,
    pub nz: usize,
    pub nx: usize,
    /// flat (s, z, x), x fastest
    pub weights: Vec<f64>,
    /// flat (s, x)
    pub outputs: Vec<DensityOperator>,
}

const S_AXIS: usize = 0;
const Z_AXIS: usize = 1;
const X_AXIS: usize = 2;

impl Ensemble {
    pub fn from_strategy(rpc: &RandomParameterChannel, strategy: &Strategy) -> Result<Self> {
        let (ns, nz, nx) = (rpc.num_params(), strategy.nz(), strategy.nx());
        let q = rpc.q();
        let mut weights = Vec::with_capacity(ns * nz * nx);
        for s in 0..ns {
            for z in 0..nz {
                for x in 0..nx {
                    weights.push(strategy.weight(q, s, z, x));
                }
            }
        }
        let mut outputs = Vec::with_capacity(ns * nx);
        for s in 0..ns {
            for x in 0..nx {
                outputs.push(rpc.map(s).apply(&strategy.channel_input(x, s))?);
            }
        }
        Ok(Self {
            ns,
            nz,
            nx,
            weights,
            outputs,
        })
    }

    fn cq_state(&self) -> Result<ClassicalQuantumState> {
        let mut block_of = Vec::with_capacity(self.weights.len());
        for s in 0..self.ns {
            for _z in 0..self.nz {
                for x in 0..self.nx {
                    block_of.push(s * self.nx + x);
                }
            }
        }
        ClassicalQuantumState::with_shared_blocks(
            vec![
                Axis::new("S", self.ns),
                Axis::new("Z", self.nz),
                Axis::new("X", self.nx),
            ],
            self.weights.clone(),
            self.outputs.clone(),
            block_of,
        )
    }

    pub fn rate_terms(&self, mode: CsiMode) -> Result<RateTerms> {
        let cq = self.cq_state()?;
        let (s, z, x, b) = (
            Part::Classical(S_AXIS),
            Part::Classical(Z_AXIS),
            Part::Classical(X_AXIS),
            Part::Quantum,
        );
        Ok(match mode {
            CsiMode::StrictlyCausal | CsiMode::Causal => RateTerms {
                information: cq.mutual_information(&[z, x], &[b])?,
                penalty: cq.conditional_mutual_information(&[z], &[s], &[x])?,
            },
            CsiMode::NonCausal => RateTerms {
                information: cq.mutual_information(&[x], &[b])?,
                penalty: cq.mutual_information(&[x], &[s])?,
            },
            CsiMode::NoCsi => RateTerms {
                information: cq.mutual_information(&[x], &[b])?,
                penalty: 0.0,
            },
        })
    }

    /// I(X;B) and I(Z;B|X), for the chain-rule decomposition of sc rates.
    pub fn chain_terms(&self) -> Result<(f64, f64)> {
        let cq = self.cq_state()?;
        let (z, x, b) = (
            Part::Classical(Z_AXIS),
            Part::Classical(X_AXIS),
            Part::Quantum,
        );
        Ok((
            cq.mutual_information(&[x], &[b])?,
            cq.conditional_mutual_information(&[z], &[b], &[x])?,
        ))
    }

    fn w(&self, s: usize, z: usize, x: usize) -> f64 {
        self.weights[(s * self.nz + z) * self.nx + x]
    }

    fn out(&self, s: usize, x: usize) -> &DensityOperator {
        &self.outputs[s * self.nx + x]
    }

    pub fn family(&self) -> ConditionalFamily {
        let mut groups = Vec::with_capacity(self.nx * self.nz);
        for x in 0..self.nx {
            for z in 0..self.nz {
                groups.push(
                    (0..self.ns)
                        .map(|s| (s, self.w(s, z, x), self.out(s, x).clone()))
                        .filter(|(_, w, _)| *w > 0.0)
                        .collect(),
                );
            }
        }
        ConditionalFamily {
            nx: self.nx,
            nz: self.nz,
            groups,
        }
    }

    /// Σ w(s,z,x) Tr(Γ^ŝ_{x,z} ρ^{s,x}) d(s,ŝ) for a given estimator.
    pub fn distortion_with(&self, est: &EstimationPovm) -> Result<f64> {
        if est.nx() != self.nx || est.nz() != self.nz {
            return Err(QrpsError::dimension(format!(
                "estimator covers {}x{} contexts, strategy has {}x{}",
                est.nx(),
                est.nz(),
                self.nx,
                self.nz
            )));
        }
        let d = est.distortion();
        if d.num_s() != self.ns {
            return Err(QrpsError::dimension(
                "distortion table does not match the parameter alphabet",
            ));
        }
        let mut total = 0.0;
        for s in 0..self.ns {
            for z in 0..self.nz {
                for x in 0..self.nx {
                    let w = self.w(s, z, x);
                    if w == 0.0 {
                        continue;
                    }
                    let p = est.povm(x, z).probabilities(self.out(s, x))?;
                    total += w * p
                        .iter()
                        .enumerate()
                        .map(|(h, ph)| ph * d.d(s, h))
                        .sum::<f64>();
                }
            }
        }
        Ok(total.clamp(0.0, d.d_max()))
    }

    /// Distortion of the optimized estimator without materializing POVMs.
    pub fn optimal_distortion(&self, distortion: &DistortionFunction) -> Result<(f64, bool)> {
        let dim = self.outputs[0].dim();
        let mut total = 0.0;
        let mut restricted = false;
        for x in 0..self.nx {
            for z in 0..self.nz {
                let members: Vec<_> = (0..self.ns)
                    .map(|s| (s, self.w(s, z, x), self.out(s, x).matrix()))
                    .filter(|m| m.1 > 0.0)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let sol = solve_group(&members, distortion, dim)?;
                total += sol.cost;
                restricted |= sol.restricted;
            }
        }
        Ok((total.clamp(0.0, distortion.d_max()), restricted))
    }
}

fn check_mode(strategy: &Strategy, expected: CsiMode) -> Result<()> {
    if strategy.mode != expected {
        return Err(QrpsError::validation(format!(
            "strategy is for mode {}, evaluator expects {expected}",
            strategy.mode
        )));
    }
    Ok(())
}

fn evaluate(
    rpc: &RandomParameterChannel,
    strategy: &Strategy,
    est: &EstimationPovm,
) -> Result<RatePoint> {
    strategy.check_channel(rpc)?;
    let ens = Ensemble::from_strategy(rpc, strategy)?;
    let terms = ens.rate_terms(strategy.mode)?;
    let distortion = ens.distortion_with(est)?;
    let raw = terms.information - terms.penalty;
    Ok(RatePoint {
        mode: strategy.mode,
        k: 1,
        rate: raw.max(0.0),
        raw_rate: raw,
        distortion,
        clamped: raw < 0.0,
        povm_restricted: est.restricted(),
        terms,
        strategy: strategy.clone(),
    })
}

/// R = I(Z,X;B) − I(Z;S|X) with ρ^{s,x} = N^(s)(φ^x).
pub fn evaluate_strategy_sc(
    rpc: &RandomParameterChannel,
    strategy: &Strategy,
    est: &EstimationPovm,
) -> Result<RatePoint> {
    check_mode(strategy, CsiMode::StrictlyCausal)?;
    evaluate(rpc, strategy, est)
}

/// The sc functionals on the virtual channel N^(s) ∘ F^(s).
pub fn evaluate_strategy_causal(
    rpc: &RandomParameterChannel,
    strategy: &Strategy,
    est: &EstimationPovm,
) -> Result<RatePoint> {
    check_mode(strategy, CsiMode::Causal)?;
    evaluate(rpc, strategy, est)
}

/// R = I(X;B) − I(X;S) with X drawn from p(x|s).
pub fn evaluate_strategy_nc(
    rpc: &RandomParameterChannel,
    strategy: &Strategy,
    est: &EstimationPovm,
) -> Result<RatePoint> {
    check_mode(strategy, CsiMode::NonCausal)?;
    evaluate(rpc, strategy, est)
}

/// R = I(X;B).
pub fn evaluate_strategy_none(
    rpc: &RandomParameterChannel,
    strategy: &Strategy,
    est: &EstimationPovm,
) -> Result<RatePoint> {
    check_mode(strategy, CsiMode::NoCsi)?;
    evaluate(rpc, strategy, est)
}

/// Dispatches on the strategy's mode.
pub fn evaluate_strategy(
    rpc: &RandomParameterChannel,
    strategy: &Strategy,
    est: &EstimationPovm,
) -> Result<RatePoint> {
    evaluate(rpc, strategy, est)
}

/// Evaluates with the estimator from [`optimal_estimation_povm`].
pub fn evaluate_with_optimal_estimator(
    rpc: &RandomParameterChannel,
    strategy: &Strategy,
    distortion: &DistortionFunction,
) -> Result<(RatePoint, EstimationPovm)> {
    strategy.check_channel(rpc)?;
    let est = conditional_estimator(rpc, strategy, distortion)?;
    Ok((evaluate(rpc, strategy, &est)?, est))
}

/// The optimized estimation POVM for a strategy's conditional output states.
pub fn conditional_estimator(
    rpc: &RandomParameterChannel,
    strategy: &Strategy,
    distortion: &DistortionFunction,
) -> Result<EstimationPovm> {
    strategy.check_channel(rpc)?;
    let ens = Ensemble::from_strategy(rpc, strategy)?;
    optimal_estimation_povm(&ens.family(), distortion)
}

/// Information quantities of an sc-type strategy used by the chain-rule
/// identity I(Z,X;B) − I(Z;S|X) = I(X;B) − [I(Z;S|X) − I(Z;B|X)].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScInformation {
    pub i_zx_b: f64,
    pub i_z_s_given_x: f64,
    pub i_x_b: f64,
    pub i_z_b_given_x: f64,
}

pub fn sc_information(rpc: &RandomParameterChannel, strategy: &Strategy) -> Result<ScInformation> {
    if !strategy.mode.has_z() {
        return Err(QrpsError::validation(
            "chain-rule terms need an sc or causal strategy",
        ));
    }
    strategy.check_channel(rpc)?;
    let ens = Ensemble::from_strategy(rpc, strategy)?;
    let terms = ens.rate_terms(strategy.mode)?;
    let (i_x_b, i_z_b_given_x) = ens.chain_terms()?;
    Ok(ScInformation {
        i_zx_b: terms.information,
        i_z_s_given_x: terms.penalty,
        i_x_b,
        i_z_b_given_x,
    })
}
