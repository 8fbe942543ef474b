//! One JSON config shared by every command, with per-command sections.
//! Flags override the file; the effective values are echoed into the run
//! manifest so a run can be reproduced from it alone.

use crate::Failure;
use serde::{Deserialize, Serialize};
use std::path::Path;
use stegcap_core::channels::{CondPmf, DistortionMatrix, Pmf};
use stegcap_core::codec::CodecParams;
use stegcap_core::wardensim::AttackSpec;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<Pmf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distortion: Option<DistortionMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<GameSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<ExponentSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codec: Option<CodecSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warden: Option<WardenSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multistarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

/// A linear grid over one budget, the other held fixed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub over: SweepVar,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    D1,
    D2,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExponentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multistarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<RateGrid>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateGrid {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl RateGrid {
    pub fn points(&self) -> Result<Vec<f64>, Failure> {
        if self.steps == 0 || self.to < self.from {
            return Err(Failure::config("rate grid needs steps >= 1 and to >= from"));
        }
        if self.steps == 1 {
            return Ok(vec![self.from]);
        }
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        Ok((0..self.steps).map(|i| self.from + h * i as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodecFamily {
    Stacked,
    Rm,
    Nested,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecSection {
    pub family: CodecFamily,
    pub n: usize,
    #[serde(default)]
    pub rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    /// Channel-code generators for the nested family, as bit strings.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gen2: Vec<String>,
    /// Source-code generators nested inside gen2.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gen1: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WardenSection {
    #[serde(default = "default_attack")]
    pub attack: AttackConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
}

fn default_attack() -> AttackConfig {
    AttackConfig::Named("passive".to_string())
}

/// "passive", {"bsc": p}, or a full channel {"rows": [[...]]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttackConfig {
    Named(String),
    Bsc { bsc: f64 },
    Channel(CondPmf),
}

impl AttackConfig {
    pub fn to_spec(&self, d2: Option<f64>) -> Result<AttackSpec, Failure> {
        match self {
            AttackConfig::Named(name) if name == "passive" => Ok(AttackSpec::passive()),
            AttackConfig::Named(name) => Err(Failure::config(format!(
                "unknown attack {name:?}; use \"passive\", {{\"bsc\": p}}, or {{\"rows\": ...}}"
            ))),
            AttackConfig::Bsc { bsc } => {
                Ok(AttackSpec::memoryless(CondPmf::bsc(*bsc), d2.unwrap_or(*bsc)))
            }
            AttackConfig::Channel(rows) => {
                Ok(AttackSpec::memoryless(rows.clone(), d2.unwrap_or(0.0)))
            }
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("bad config {}: {e}", path.display())))
    }

    pub fn source(&self) -> Result<Pmf, Failure> {
        self.source
            .clone()
            .ok_or_else(|| Failure::config("config needs a \"source\" section"))
    }

    pub fn distortion(&self) -> Result<DistortionMatrix, Failure> {
        self.distortion
            .clone()
            .ok_or_else(|| Failure::config("config needs a \"distortion\" section"))
    }

    /// Stacked-codebook parameters assembled from the shared sections.
    pub fn codec_params(&self, seed: u64) -> Result<CodecParams, Failure> {
        let codec = self
            .codec
            .as_ref()
            .ok_or_else(|| Failure::config("config needs a \"codec\" section"))?;
        Ok(CodecParams {
            n: codec.n,
            r: codec.rate,
            l: codec.l.unwrap_or(2),
            epsilon: codec.epsilon.unwrap_or(0.05),
            d1: codec
                .d1
                .ok_or_else(|| Failure::config("codec section needs \"d1\""))?,
            d: self.distortion()?,
            p_s: self.source()?,
            seed,
        })
    }
}

/// Parses a generator written as a bit string ("1101") into a mask.
pub fn parse_generator(s: &str, n: usize) -> Result<u64, Failure> {
    if s.len() != n {
        return Err(Failure::config(format!(
            "generator {s:?} does not have block length {n}"
        )));
    }
    let mut mask = 0u64;
    for (i, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => mask |= 1 << (n - 1 - i),
            _ => {
                return Err(Failure::config(format!(
                    "generator {s:?} has a non-binary digit"
                )))
            }
        }
    }
    Ok(mask)
}
