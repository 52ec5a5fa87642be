//! JSON configuration. Every object rejects unknown keys; numbers may be
//! JSON numbers (read through their shortest decimal form) or `"a/b"`
//! strings, and are held as exact rationals.

use bsregen::gf::{Field, FieldSpec};
use bsregen::numeric::{from_f64_decimal, int, parse_rational, ratio, Rational};
use bsregen::SystemParams;
use serde::{Deserialize, Deserializer};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Num(pub Rational);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let value = match Raw::deserialize(d)? {
            Raw::Int(i) => int(i),
            Raw::Float(f) => from_f64_decimal(f)
                .ok_or_else(|| serde::de::Error::custom(format!("{f} is not a finite number")))?,
            Raw::Text(s) => parse_rational(&s).map_err(serde::de::Error::custom)?,
        };
        Ok(Num(value))
    }
}

fn nums(v: &[Num]) -> Vec<Rational> {
    v.iter().map(|x| x.0.clone()).collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub t: usize,
    #[serde(default)]
    pub weights: Vec<Num>,
    #[serde(default)]
    pub capacities: Vec<Num>,
    pub file_size: Num,
}

impl ParamsConfig {
    pub fn to_params(&self) -> SystemParams {
        SystemParams {
            n: self.n,
            k: self.k,
            d: self.d,
            t: self.t,
            weights: nums(&self.weights),
            capacities: nums(&self.capacities),
            file_size: self.file_size.0.clone(),
        }
    }
}

/// The storage-versus-cost example: `k=6, d=9, t=3`, four layers.
pub fn default_params() -> SystemParams {
    SystemParams {
        n: 12,
        k: 6,
        d: 9,
        t: 3,
        weights: vec![ratio(6, 5), ratio(7, 5), ratio(9, 5), ratio(46, 25)],
        capacities: vec![int(1), ratio(3, 4), ratio(1, 2), ratio(1, 4)],
        file_size: int(1),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradeoffConfig {
    pub grid: Option<usize>,
    #[serde(default)]
    pub baseline: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSweepConfig {
    pub max_k: Option<usize>,
    pub max_t: Option<usize>,
    pub max_layers: Option<usize>,
    pub extra_d: Option<usize>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSweepConfig {
    pub max_n: Option<usize>,
    pub max_k: Option<usize>,
    pub max_t: Option<usize>,
    pub max_layers: Option<usize>,
    pub samples: Option<usize>,
    pub histories: Option<usize>,
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub bounds: BoundSweepConfig,
    #[serde(default)]
    pub flow: FlowSweepConfig,
    #[serde(default)]
    pub exhaustive: bool,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub p: u32,
    pub q: u32,
    /// Coefficients from `x^0` to `x^q`; a default is chosen when absent.
    pub poly: Option<Vec<u32>>,
}

impl FieldConfig {
    pub fn to_spec(&self) -> Result<FieldSpec, bsregen::gf::GfError> {
        Ok(Field::new(self.p, self.q, self.poly.clone())?
            .spec()
            .clone())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecConfig {
    #[serde(default = "d4")]
    pub n: usize,
    #[serde(default = "d2")]
    pub k: usize,
    #[serde(default = "d2")]
    pub t: usize,
    #[serde(default = "d2")]
    pub rho: usize,
    pub field: Option<FieldConfig>,
    /// Per-layer costs used by the repair ledger.
    pub weights: Option<Vec<Num>>,
    /// File size in cost units; defaults to the encoded length in MB.
    pub file_size: Option<Num>,
}

fn d2() -> usize {
    2
}

fn d4() -> usize {
    4
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            n: 4,
            k: 2,
            t: 2,
            rho: 2,
            field: None,
            weights: None,
            file_size: None,
        }
    }
}

impl CodecConfig {
    pub fn weights(&self) -> Vec<Rational> {
        self.weights
            .as_deref()
            .map(nums)
            .unwrap_or_else(|| vec![ratio(11, 10), ratio(17, 10)])
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Scenario {
    pub name: String,
    pub weights: Vec<Num>,
    pub beta: Num,
    pub r: Vec<Num>,
    pub capacities: Option<Vec<Num>>,
    pub file_size: Option<Num>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Config {
    pub scenarios: Option<Vec<Table1Scenario>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "d6")]
    pub n: usize,
    #[serde(default = "d2")]
    pub k: usize,
    #[serde(default = "d2")]
    pub t: usize,
    #[serde(default = "d1")]
    pub rho: usize,
    pub field: Option<FieldConfig>,
    pub weights: Option<Vec<Num>>,
    pub file_size: Option<Num>,
    #[serde(default = "d256")]
    pub file_len: usize,
    #[serde(default = "d20")]
    pub rounds: usize,
    pub departure_rate: Option<f64>,
    /// Explicit departures per round; overrides `rounds` and the rate.
    pub script: Option<Vec<Vec<usize>>>,
    #[serde(default = "d1")]
    pub verify_every: usize,
}

fn d1() -> usize {
    1
}

fn d6() -> usize {
    6
}

fn d20() -> usize {
    20
}

fn d256() -> usize {
    256
}

impl Default for SimulateConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub params: Option<ParamsConfig>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tradeoff: TradeoffConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub codec: CodecConfig,
    #[serde(default)]
    pub table1: Table1Config,
    #[serde(default)]
    pub simulate: SimulateConfig,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Config, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Config::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn params(&self) -> SystemParams {
        self.params
            .as_ref()
            .map_or_else(default_params, ParamsConfig::to_params)
    }
}
