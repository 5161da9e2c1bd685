//! Strategy JSON files: the fields of [`Strategy`] with complex amplitudes as
//! `[re, im]` pairs. Omitted fields get defaults, and the filled-in file is
//! what the simulate report echoes.

use std::path::Path;

use qrps_core::channels::{DistortionFunction, RandomParameterChannel};
use qrps_core::qlinalg::{Ket, KrausChannel};
use qrps_core::regions::{
    conditional_estimator, trivial_z, CsiMode, EstimationPovm, InputStates, Strategy,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::spec::{complex, complex_spec, parse_json, read_json, Complex, MapSpec};

pub type KetSpec = Vec<Complex>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StatesSpec {
    /// One state per x.
    PerSymbol(Vec<KetSpec>),
    /// `[x][s]`, non-causal mode only.
    PerSymbolAndParameter(Vec<Vec<KetSpec>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedEstimator {
    /// The optimized estimation POVM for the strategy's output states.
    Optimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EstimatorSpec {
    Named(NamedEstimator),
    /// Deterministic estimate index `table[x][z]`, no measurement.
    Table(Vec<Vec<usize>>),
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        EstimatorSpec::Named(NamedEstimator::Optimal)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub mode: CsiMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_x: Option<Vec<f64>>,
    /// `[x][s][z]`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_z_given_xs: Option<Vec<Vec<Vec<f64>>>>,
    /// `[s][x]`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_x_given_s: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_states: Option<StatesSpec>,
    /// One map per parameter value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shannon_strategies: Option<Vec<MapSpec>>,
    #[serde(default)]
    pub estimator: EstimatorSpec,
}

/// A strategy file after defaults, with the core objects it describes.
#[derive(Clone, Debug)]
pub struct ResolvedStrategy {
    pub file: StrategyFile,
    pub strategy: Strategy,
    pub estimator: EstimationPovm,
}

fn ket(spec: &KetSpec) -> Result<Ket> {
    Ok(Ket::new(spec.iter().map(complex).collect())?)
}

fn ket_spec(k: &Ket) -> KetSpec {
    k.amplitudes().iter().map(complex_spec).collect()
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

impl StrategyFile {
    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        parse_json(text, origin)
    }

    fn symbol_count(&self) -> Option<usize> {
        if let Some(p) = &self.p_x {
            return Some(p.len());
        }
        if let Some(p) = self.p_x_given_s.as_ref().and_then(|p| p.first()) {
            return Some(p.len());
        }
        if let Some(s) = &self.input_states {
            return Some(match s {
                StatesSpec::PerSymbol(v) => v.len(),
                StatesSpec::PerSymbolAndParameter(v) => v.len(),
            });
        }
        self.p_z_given_xs.as_ref().map(Vec::len)
    }

    /// Fills omitted fields for `rpc` and builds the strategy and estimator.
    pub fn resolve(
        &self,
        rpc: &RandomParameterChannel,
        distortion: &DistortionFunction,
        origin: &Path,
    ) -> Result<ResolvedStrategy> {
        let mode = self.mode;
        let bad = |msg: String| CliError::invalid(origin, msg);
        let unused = |present: bool, field: &str| {
            if present {
                Err(bad(format!("{field} is not used in mode {mode}")))
            } else {
                Ok(())
            }
        };
        unused(self.p_x.is_some() && mode == CsiMode::NonCausal, "p_x")?;
        unused(self.p_z_given_xs.is_some() && !mode.has_z(), "p_z_given_xs")?;
        unused(
            self.p_x_given_s.is_some() && mode != CsiMode::NonCausal,
            "p_x_given_s",
        )?;
        unused(
            self.shannon_strategies.is_some() && mode != CsiMode::Causal,
            "shannon_strategies",
        )?;

        let d = rpc.in_dim();
        let ns = rpc.num_params();
        let nx = self.symbol_count().unwrap_or(d);
        let mut file = self.clone();

        let states = match &self.input_states {
            Some(StatesSpec::PerSymbol(v)) => {
                InputStates::PerSymbol(v.iter().map(ket).collect::<Result<_>>()?)
            }
            Some(StatesSpec::PerSymbolAndParameter(v)) => InputStates::PerSymbolAndParameter(
                v.iter()
                    .map(|row| row.iter().map(ket).collect::<Result<Vec<_>>>())
                    .collect::<Result<_>>()?,
            ),
            None => {
                if nx > d {
                    return Err(bad(format!(
                        "input_states must be given when |X| = {nx} exceeds the input dimension {d}"
                    )));
                }
                let kets: Vec<Ket> = (0..nx).map(|x| Ket::basis(d, x)).collect();
                file.input_states =
                    Some(StatesSpec::PerSymbol(kets.iter().map(ket_spec).collect()));
                InputStates::PerSymbol(kets)
            }
        };
        let per_symbol = |states: InputStates| match states {
            InputStates::PerSymbol(v) => Ok(v),
            InputStates::PerSymbolAndParameter(_) => Err(bad(format!(
                "per-(x, s) input states are only allowed in mode nc, not {mode}"
            ))),
        };

        let strategy = match mode {
            CsiMode::NonCausal => {
                let p = self
                    .p_x_given_s
                    .clone()
                    .unwrap_or_else(|| vec![uniform(nx); ns]);
                file.p_x_given_s = Some(p.clone());
                Strategy::non_causal(p, states)?
            }
            _ => {
                let p_x = self.p_x.clone().unwrap_or_else(|| uniform(nx));
                file.p_x = Some(p_x.clone());
                let states = per_symbol(states)?;
                match mode {
                    CsiMode::NoCsi => Strategy::no_csi(p_x, states)?,
                    _ => {
                        let pz = self
                            .p_z_given_xs
                            .clone()
                            .unwrap_or_else(|| trivial_z(nx, ns));
                        file.p_z_given_xs = Some(pz.clone());
                        if mode == CsiMode::StrictlyCausal {
                            Strategy::strictly_causal(p_x, pz, states)?
                        } else {
                            let maps = match &self.shannon_strategies {
                                Some(m) => {
                                    m.iter().map(MapSpec::to_channel).collect::<Result<_>>()?
                                }
                                None => vec![KrausChannel::identity(d); ns],
                            };
                            file.shannon_strategies =
                                Some(maps.iter().map(MapSpec::from_channel).collect());
                            Strategy::causal(p_x, pz, states, maps)?
                        }
                    }
                }
            }
        };
        strategy.check_channel(rpc)?;

        let estimator = match &self.estimator {
            EstimatorSpec::Named(NamedEstimator::Optimal) => {
                conditional_estimator(rpc, &strategy, distortion)?
            }
            EstimatorSpec::Table(table) => {
                let (nx, nz) = (strategy.nx(), strategy.nz());
                let nh = distortion.num_s_hat();
                let shape_ok = table.len() == nx && table.iter().all(|r| r.len() == nz);
                if !shape_ok {
                    return Err(bad(format!("estimator table must be {nx}x{nz} (x by z)")));
                }
                if table.iter().flatten().any(|&h| h >= nh) {
                    return Err(bad(format!("estimator table entries must be below {nh}")));
                }
                EstimationPovm::deterministic(nx, nz, rpc.out_dim(), distortion.clone(), |x, z| {
                    table[x][z]
                })?
            }
        };
        Ok(ResolvedStrategy {
            file,
            strategy,
            estimator,
        })
    }
}
