use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::{check_pmf, RandomParameterChannel};
use crate::error::{QrpsError, Result};
use crate::qlinalg::{CMatrix, DensityOperator, Ket, KrausChannel};

/// Which parameter values the encoder sees before sending symbol i.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CsiMode {
    /// S^{i-1}
    #[serde(rename = "sc")]
    StrictlyCausal,
    /// S^{i}
    #[serde(rename = "causal")]
    Causal,
    /// S^{n}
    #[serde(rename = "nc")]
    NonCausal,
    #[serde(rename = "none")]
    NoCsi,
}

impl CsiMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CsiMode::StrictlyCausal => "sc",
            CsiMode::Causal => "causal",
            CsiMode::NonCausal => "nc",
            CsiMode::NoCsi => "none",
        }
    }

    /// Modes whose strategy carries the compression auxiliary Z.
    pub fn has_z(self) -> bool {
        matches!(self, CsiMode::StrictlyCausal | CsiMode::Causal)
    }
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CsiMode {
    type Err = QrpsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sc" => Ok(CsiMode::StrictlyCausal),
            "causal" => Ok(CsiMode::Causal),
            "nc" => Ok(CsiMode::NonCausal),
            "none" => Ok(CsiMode::NoCsi),
            other => Err(QrpsError::Config(format!(
                "unknown CSI mode '{other}' (expected sc, causal, nc or none)"
            ))),
        }
    }
}

/// Pure input states, either one per symbol x or (non-causal mode only)
/// one per pair (x, s), indexed `[x][s]`.
#[derive(Clone, Debug, PartialEq)]
pub enum InputStates {
    PerSymbol(Vec<Ket>),
    PerSymbolAndParameter(Vec<Vec<Ket>>),
}

impl InputStates {
    pub fn get(&self, x: usize, s: usize) -> &Ket {
        match self {
            InputStates::PerSymbol(v) => &v[x],
            InputStates::PerSymbolAndParameter(v) => &v[x][s],
        }
    }

    fn num_symbols(&self) -> usize {
        match self {
            InputStates::PerSymbol(v) => v.len(),
            InputStates::PerSymbolAndParameter(v) => v.len(),
        }
    }

    fn all(&self) -> Box<dyn Iterator<Item = &Ket> + '_> {
        match self {
            InputStates::PerSymbol(v) => Box::new(v.iter()),
            InputStates::PerSymbolAndParameter(v) => Box::new(v.iter().flatten()),
        }
    }
}

/// Classical distributions, input states and (causal mode) parameter-indexed
/// pre-processing channels defining one point of a region.
///
/// Unused fields for a mode are left empty: `p_x` is unused in mode nc,
/// `p_z_given_xs` (indexed `[x][s][z]`) only exists for sc and causal,
/// `p_x_given_s` (indexed `[s][x]`) only for nc, and `shannon_strategies`
/// only for causal.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    pub mode: CsiMode,
    pub p_x: Vec<f64>,
    pub p_z_given_xs: Vec<Vec<Vec<f64>>>,
    pub p_x_given_s: Vec<Vec<f64>>,
    pub input_states: InputStates,
    pub shannon_strategies: Vec<KrausChannel>,
}

impl Strategy {
    pub fn strictly_causal(
        p_x: Vec<f64>,
        p_z_given_xs: Vec<Vec<Vec<f64>>>,
        states: Vec<Ket>,
    ) -> Result<Self> {
        let s = Self {
            mode: CsiMode::StrictlyCausal,
            p_x,
            p_z_given_xs,
            p_x_given_s: Vec::new(),
            input_states: InputStates::PerSymbol(states),
            shannon_strategies: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn causal(
        p_x: Vec<f64>,
        p_z_given_xs: Vec<Vec<Vec<f64>>>,
        states: Vec<Ket>,
        shannon_strategies: Vec<KrausChannel>,
    ) -> Result<Self> {
        let s = Self {
            mode: CsiMode::Causal,
            p_x,
            p_z_given_xs,
            p_x_given_s: Vec::new(),
            input_states: InputStates::PerSymbol(states),
            shannon_strategies,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn non_causal(p_x_given_s: Vec<Vec<f64>>, states: InputStates) -> Result<Self> {
        let s = Self {
            mode: CsiMode::NonCausal,
            p_x: Vec::new(),
            p_z_given_xs: Vec::new(),
            p_x_given_s,
            input_states: states,
            shannon_strategies: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn no_csi(p_x: Vec<f64>, states: Vec<Ket>) -> Result<Self> {
        let s = Self {
            mode: CsiMode::NoCsi,
            p_x,
            p_z_given_xs: Vec::new(),
            p_x_given_s: Vec::new(),
            input_states: InputStates::PerSymbol(states),
            shannon_strategies: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn nx(&self) -> usize {
        match self.mode {
            CsiMode::NonCausal => self.p_x_given_s.first().map_or(0, Vec::len),
            _ => self.p_x.len(),
        }
    }

    /// |Z|, or 1 when the mode has no Z.
    pub fn nz(&self) -> usize {
        if self.mode.has_z() {
            self.p_z_given_xs
                .first()
                .and_then(|v| v.first())
                .map_or(0, Vec::len)
        } else {
            1
        }
    }

    /// Number of parameter values the strategy was written for, if it says.
    fn declared_ns(&self) -> Option<usize> {
        match self.mode {
            CsiMode::StrictlyCausal | CsiMode::Causal => self.p_z_given_xs.first().map(Vec::len),
            CsiMode::NonCausal => Some(self.p_x_given_s.len()),
            CsiMode::NoCsi => None,
        }
    }

    /// Internal consistency, independent of any channel.
    pub fn validate(&self) -> Result<()> {
        let nx = self.nx();
        if nx == 0 {
            return Err(QrpsError::validation("strategy has an empty X alphabet"));
        }
        match self.mode {
            CsiMode::NonCausal => {
                if self.p_x_given_s.is_empty() {
                    return Err(QrpsError::validation("nc strategy needs p(x|s)"));
                }
                for (s, row) in self.p_x_given_s.iter().enumerate() {
                    if row.len() != nx {
                        return Err(QrpsError::dimension("p(x|s) rows differ in length"));
                    }
                    check_pmf(row, &format!("p(x|s={s})"))?;
                }
            }
            _ => check_pmf(&self.p_x, "p_X")?,
        }
        if self.mode.has_z() {
            if self.p_z_given_xs.len() != nx {
                return Err(QrpsError::dimension(format!(
                    "p(z|x,s) has {} x-rows, expected {nx}",
                    self.p_z_given_xs.len()
                )));
            }
            let ns = self.p_z_given_xs[0].len();
            let nz = self.nz();
            if ns == 0 || nz == 0 {
                return Err(QrpsError::validation("p(z|x,s) is empty"));
            }
            for (x, by_s) in self.p_z_given_xs.iter().enumerate() {
                if by_s.len() != ns {
                    return Err(QrpsError::dimension("p(z|x,s) is ragged in s"));
                }
                for (s, row) in by_s.iter().enumerate() {
                    if row.len() != nz {
                        return Err(QrpsError::dimension("p(z|x,s) is ragged in z"));
                    }
                    check_pmf(row, &format!("p(z|x={x},s={s})"))?;
                }
            }
        }
        if self.input_states.num_symbols() != nx {
            return Err(QrpsError::dimension(format!(
                "{} input states for {nx} symbols",
                self.input_states.num_symbols()
            )));
        }
        if let InputStates::PerSymbolAndParameter(v) = &self.input_states {
            if self.mode != CsiMode::NonCausal {
                return Err(QrpsError::validation(
                    "parameter-dependent input states are only allowed with non-causal CSI",
                ));
            }
            let ns = v[0].len();
            if v.iter().any(|r| r.len() != ns) {
                return Err(QrpsError::dimension("per-(x,s) input states are ragged"));
            }
        }
        let d = self.input_states.get(0, 0).dim();
        if self.input_states.all().any(|k| k.dim() != d) {
            return Err(QrpsError::dimension("input states differ in dimension"));
        }
        match self.mode {
            CsiMode::Causal => {
                if self.shannon_strategies.is_empty() {
                    return Err(QrpsError::validation(
                        "causal strategy needs F^(s) per parameter",
                    ));
                }
                if self.shannon_strategies.iter().any(|f| f.in_dim() != d) {
                    return Err(QrpsError::dimension(
                        "F^(s) input dimension differs from the auxiliary state dimension",
                    ));
                }
            }
            _ => {
                if !self.shannon_strategies.is_empty() {
                    return Err(QrpsError::validation(
                        "pre-processing channels are only meaningful with causal CSI",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Consistency with a particular channel.
    pub fn check_channel(&self, rpc: &RandomParameterChannel) -> Result<()> {
        self.validate()?;
        let ns = rpc.num_params();
        if let Some(declared) = self.declared_ns() {
            if declared != ns {
                return Err(QrpsError::dimension(format!(
                    "strategy written for {declared} parameter values, channel has {ns}"
                )));
            }
        }
        if let InputStates::PerSymbolAndParameter(v) = &self.input_states {
            if v[0].len() != ns {
                return Err(QrpsError::dimension(
                    "per-(x,s) states do not cover every parameter",
                ));
            }
        }
        let d = self.input_states.get(0, 0).dim();
        match self.mode {
            CsiMode::Causal => {
                if self.shannon_strategies.len() != ns {
                    return Err(QrpsError::dimension(format!(
                        "{} pre-processing channels for {ns} parameters",
                        self.shannon_strategies.len()
                    )));
                }
                if self
                    .shannon_strategies
                    .iter()
                    .any(|f| f.out_dim() != rpc.in_dim())
                {
                    return Err(QrpsError::dimension(
                        "F^(s) output dimension differs from the channel input",
                    ));
                }
            }
            _ => {
                if d != rpc.in_dim() {
                    return Err(QrpsError::dimension(format!(
                        "input states have dim {d}, channel expects {}",
                        rpc.in_dim()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Joint weight q(s)·p(x)·p(z|x,s) (or q(s)·p(x|s) in mode nc).
    pub(crate) fn weight(&self, q: &[f64], s: usize, z: usize, x: usize) -> f64 {
        match self.mode {
            CsiMode::StrictlyCausal | CsiMode::Causal => {
                q[s] * self.p_x[x] * self.p_z_given_xs[x][s][z]
            }
            CsiMode::NonCausal => q[s] * self.p_x_given_s[s][x],
            CsiMode::NoCsi => q[s] * self.p_x[x],
        }
    }

    /// Channel input for (x, s): φ^x, φ^{x,s}, or F^(s)(θ^x).
    pub(crate) fn channel_input(&self, x: usize, s: usize) -> DensityOperator {
        let theta = DensityOperator::from_ket(self.input_states.get(x, s));
        match self.mode {
            CsiMode::Causal => self.shannon_strategies[s]
                .apply(&theta)
                .expect("dimensions checked against the channel"),
            _ => theta,
        }
    }

    /// The same strategy with every F^(s) dropped, for comparison against
    /// strictly-causal evaluation on the virtual channel.
    pub fn without_shannon_strategies(&self) -> Result<Strategy> {
        let states = match &self.input_states {
            InputStates::PerSymbol(v) => v.clone(),
            InputStates::PerSymbolAndParameter(_) => {
                return Err(QrpsError::validation(
                    "per-(x,s) states have no sc counterpart",
                ))
            }
        };
        Strategy::strictly_causal(self.p_x.clone(), self.p_z_given_xs.clone(), states)
    }
}

/// Constant-z conditional pmf `[x][s][z]` with a single z value.
pub fn trivial_z(nx: usize, ns: usize) -> Vec<Vec<Vec<f64>>> {
    vec![vec![vec![1.0]; ns]; nx]
}

/// V = M (M†M)^{-1/2}: the isometry closest to M.
pub(crate) fn polar_isometry(m: &CMatrix) -> Result<CMatrix> {
    let gram = m.adjoint().matmul(m);
    Ok(m.matmul(&crate::qlinalg::pinv_sqrt(&gram, 1e-12)?))
}
