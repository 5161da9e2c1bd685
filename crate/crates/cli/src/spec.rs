//! Channel-spec JSON files.
//!
//! ```json
//! {"kind": "shorthand", "shorthand": {"name": "dephasing", "epsilon": 0.2}}
//! {"kind": "general", "dims": {"in": 2, "out": 2}, "q": [1.0],
//!  "maps": [{"kraus": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}],
//!  "distortion": {"s_hat": ["0"], "table": [[0.0]]}}
//! ```
//!
//! `kraus` is either one matrix (rows of `[re, im]` entries) or a list of
//! such matrices.

use std::fs;
use std::path::Path;

use qrps_core::channels::{
    make_dephasing_rpc, make_depolarizing_rpc, make_projection_rpc, measurement_from_maps,
    DistortionFunction, RandomParameterChannel,
};
use qrps_core::qlinalg::{CMatrix, Ket, KrausChannel, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub type Complex = [f64; 2];
pub type MatrixSpec = Vec<Vec<Complex>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    #[serde(rename = "in")]
    pub input: usize,
    pub out: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KrausSpec {
    Many(Vec<MatrixSpec>),
    Single(MatrixSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub kraus: KrausSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecKind {
    General,
    Measurement,
    Shorthand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShorthandName {
    Dephasing,
    Depolarizing,
    Projection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shorthand {
    pub name: ShorthandName,
    pub epsilon: f64,
    #[serde(default)]
    pub psi: Option<[Complex; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionSpec {
    pub s_hat: Vec<String>,
    pub table: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Dims>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<MapSpec>>,
    /// Defaults to shorthand when a shorthand block is present, else general.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SpecKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shorthand: Option<Shorthand>,
    /// Hamming distortion over the parameter labels when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<DistortionSpec>,
}

#[derive(Clone, Debug)]
pub struct ChannelSpec {
    pub rpc: RandomParameterChannel,
    pub distortion: DistortionFunction,
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_json(&text, path)
}

pub(crate) fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

pub fn complex(c: &Complex) -> C64 {
    C64::new(c[0], c[1])
}

pub fn complex_spec(c: &C64) -> Complex {
    [c.re, c.im]
}

pub fn matrix_from_spec(m: &MatrixSpec) -> Result<CMatrix> {
    let rows = m.iter().map(|r| r.iter().map(complex).collect()).collect();
    Ok(CMatrix::from_rows(rows)?)
}

pub fn matrix_spec(m: &CMatrix) -> MatrixSpec {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| complex_spec(&m[(r, c)])).collect())
        .collect()
}

impl MapSpec {
    pub fn to_channel(&self) -> Result<KrausChannel> {
        let ops = match &self.kraus {
            KrausSpec::Many(v) => v.iter().map(matrix_from_spec).collect::<Result<Vec<_>>>()?,
            KrausSpec::Single(m) => vec![matrix_from_spec(m)?],
        };
        Ok(KrausChannel::new(ops)?)
    }

    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            kraus: KrausSpec::Many(ch.kraus_ops().iter().map(matrix_spec).collect()),
        }
    }
}

impl ChannelSpecFile {
    pub fn parse(text: &str, origin: &Path) -> Result<ChannelSpec> {
        parse_json::<ChannelSpecFile>(text, origin)?.build(origin)
    }

    pub fn build(&self, origin: &Path) -> Result<ChannelSpec> {
        let kind = self.kind.unwrap_or(if self.shorthand.is_some() {
            SpecKind::Shorthand
        } else {
            SpecKind::General
        });
        let exclusive =
            || CliError::invalid(origin, "shorthand and explicit maps are mutually exclusive");
        let rpc = match kind {
            SpecKind::Shorthand => {
                if self.maps.is_some() || self.q.is_some() {
                    return Err(exclusive());
                }
                let sh = self.shorthand.as_ref().ok_or_else(|| {
                    CliError::invalid(origin, "kind \"shorthand\" needs a shorthand block")
                })?;
                expand_shorthand(sh, origin)?
            }
            SpecKind::General | SpecKind::Measurement => {
                if self.shorthand.is_some() {
                    return Err(exclusive());
                }
                let q = self
                    .q
                    .clone()
                    .ok_or_else(|| CliError::invalid(origin, "explicit channel needs \"q\""))?;
                let maps = self
                    .maps
                    .as_ref()
                    .ok_or_else(|| CliError::invalid(origin, "explicit channel needs \"maps\""))?
                    .iter()
                    .map(MapSpec::to_channel)
                    .collect::<Result<Vec<_>>>()?;
                if kind == SpecKind::General {
                    RandomParameterChannel::new(q, maps)?
                } else {
                    measurement_from_maps(q, maps)?
                }
            }
        };
        if let Some(d) = self.dims {
            if d.input != rpc.in_dim() || d.out != rpc.out_dim() {
                return Err(CliError::invalid(
                    origin,
                    format!(
                        "dims {{in: {}, out: {}}} disagree with the maps ({} -> {})",
                        d.input,
                        d.out,
                        rpc.in_dim(),
                        rpc.out_dim()
                    ),
                ));
            }
        }
        let distortion = match &self.distortion {
            Some(d) => {
                DistortionFunction::new(rpc.labels().to_vec(), d.s_hat.clone(), d.table.clone())?
            }
            None => DistortionFunction::hamming(rpc.num_params()),
        };
        Ok(ChannelSpec { rpc, distortion })
    }
}

fn expand_shorthand(sh: &Shorthand, origin: &Path) -> Result<RandomParameterChannel> {
    if sh.psi.is_some() && sh.name != ShorthandName::Projection {
        return Err(CliError::invalid(
            origin,
            "psi only applies to the projection shorthand",
        ));
    }
    Ok(match sh.name {
        ShorthandName::Dephasing => make_dephasing_rpc(sh.epsilon)?,
        ShorthandName::Depolarizing => make_depolarizing_rpc(sh.epsilon)?,
        ShorthandName::Projection => {
            let psi = match &sh.psi {
                Some(p) => Ket::new(p.iter().map(complex).collect())?,
                None => Ket::basis(2, 0),
            };
            make_projection_rpc(sh.epsilon, &psi)?
        }
    })
}

/// Reads and validates a channel-spec file.
pub fn parse_channel_spec(path: &Path) -> Result<ChannelSpec> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ChannelSpecFile::parse(&text, path)
}
