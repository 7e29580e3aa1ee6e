//! Sweep configuration in TOML.
//!
//! ```toml
//! family = "cv"            # or "dv"; the only required key
//!
//! [protocol]               # keys of CvParams / DvParams, defaults fill the rest
//! length_km = 4.0
//!
//! [budget]                 # single-point commands (`rate`, `optimize`)
//! eps = 5e-13
//! eps_pe = 1e-13           # `rate` only; eps_cor must come with it
//! eps_cor = 4e-16
//!
//! [cga]
//! population = 200
//! iterations = 300
//! mutation_rate = 0.5
//! parent_rate = 0.5
//! survival_rate = 1.0
//! mutation_sigma = 0.2
//! seed = 1
//!
//! [sweep]
//! eps_levels = [1e-12, 1e-11]
//! include_baselines = true
//! include_oracle = false
//! oracle_points = 200
//! restarts = 1
//! output = "sweep.csv"
//! format = "csv"
//! ```
//!
//! Unknown keys are rejected with their location.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::ProtocolParams;
use crate::budget::Family;
use crate::cga::CgaConfig;
use crate::cv::CvParams;
use crate::dv::DvParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!(
                "unknown output format '{other}' (expected csv or json)"
            )),
        }
    }
}

/// Single-point budget inputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_pe: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_cor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_levels: Option<Vec<f64>>,
    include_baselines: bool,
    include_oracle: bool,
    oracle_points: usize,
    restarts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    format: OutputFormat,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            eps_levels: None,
            include_baselines: true,
            include_oracle: false,
            oracle_points: crate::oracle::DEFAULT_POINTS,
            restarts: 1,
            output: None,
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile<P> {
    family: Family,
    #[serde(default)]
    protocol: P,
    #[serde(default)]
    budget: BudgetSpec,
    #[serde(default)]
    cga: CgaConfig,
    #[serde(default)]
    sweep: SweepSection,
}

#[derive(Deserialize)]
struct FamilyProbe {
    family: Family,
}

/// Everything needed to run a sweep or a single-point command.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub family: Family,
    pub eps_levels: Vec<f64>,
    pub protocol: ProtocolParams,
    pub cga_config: CgaConfig,
    /// Independent optimizer runs per level (seeds `seed`, `seed + 1`, …);
    /// the best is kept.
    pub restarts: usize,
    pub include_baselines: bool,
    pub include_oracle: bool,
    pub oracle_points: usize,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub budget: BudgetSpec,
}

/// Decade steps `10^lo ..= 10^hi`.
fn decades(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 10f64.powi(k)).collect()
}

impl SweepSpec {
    /// Reference parameters and the standard ε range for each family:
    /// `1e-12 … 1e-5` for CV and `1e-17 … 1e-5` for DV.
    pub fn defaults(family: Family) -> Self {
        let eps_levels = match family {
            Family::Cv => decades(-12, -5),
            Family::Dv => decades(-17, -5),
        };
        SweepSpec {
            family,
            eps_levels,
            protocol: ProtocolParams::defaults(family),
            cga_config: CgaConfig::default(),
            restarts: 1,
            include_baselines: true,
            include_oracle: false,
            oracle_points: crate::oracle::DEFAULT_POINTS,
            output_path: None,
            format: OutputFormat::Csv,
            budget: BudgetSpec::default(),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.protocol.family() != self.family {
            v.push(format!(
                "family: {} does not match the protocol parameters ({})",
                self.family,
                self.protocol.family()
            ));
        }
        v.extend(self.protocol.violations());
        v.extend(self.cga_config.violations());
        if self.eps_levels.is_empty() {
            v.push("sweep.eps_levels: must not be empty".to_owned());
        }
        for (i, &e) in self.eps_levels.iter().enumerate() {
            if !(e > 0.0 && e < 1.0) {
                v.push(format!("sweep.eps_levels[{i}] = {e:e}: must lie in (0, 1)"));
            }
        }
        if self.eps_levels.windows(2).any(|w| !(w[1] > w[0])) {
            v.push("sweep.eps_levels: must be strictly increasing".to_owned());
        }
        if self.restarts < 1 {
            v.push("sweep.restarts: must be >= 1".to_owned());
        }
        if self.oracle_points < 2 {
            v.push("sweep.oracle_points: must be >= 2".to_owned());
        }
        if let Some(e) = self.budget.eps {
            if !(e > 0.0 && e < 1.0) {
                v.push(format!("budget.eps = {e:e}: must lie in (0, 1)"));
            }
        }
        match (self.budget.eps_pe, self.budget.eps_cor) {
            (Some(_), None) | (None, Some(_)) => {
                v.push("budget: eps_pe and eps_cor must be given together".to_owned());
            }
            (Some(_), Some(_)) if self.budget.eps.is_none() => {
                v.push("budget: eps_pe and eps_cor need budget.eps".to_owned());
            }
            _ => {}
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Serializes the spec back into the configuration format.
    pub fn to_toml(&self) -> Result<String> {
        fn emit<P: Serialize>(spec: &SweepSpec, protocol: &P) -> Result<String> {
            let file = ConfigFile {
                family: spec.family,
                protocol,
                budget: spec.budget.clone(),
                cga: spec.cga_config.clone(),
                sweep: SweepSection {
                    eps_levels: Some(spec.eps_levels.clone()),
                    include_baselines: spec.include_baselines,
                    include_oracle: spec.include_oracle,
                    oracle_points: spec.oracle_points,
                    restarts: spec.restarts,
                    output: spec.output_path.clone(),
                    format: spec.format,
                },
            };
            toml::to_string(&file).map_err(|e| Error::Parse {
                path: "<spec>".into(),
                message: e.to_string(),
            })
        }
        match &self.protocol {
            ProtocolParams::Cv(p) => emit(self, p),
            ProtocolParams::Dv(p) => emit(self, p),
        }
    }
}

fn parse_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    }
}

fn from_file<P>(text: &str, path: &Path, wrap: fn(P) -> ProtocolParams) -> Result<SweepSpec>
where
    P: DeserializeOwned + Default,
{
    let file: ConfigFile<P> = toml::from_str(text).map_err(|e| parse_error(path, e))?;
    let mut spec = SweepSpec::defaults(file.family);
    spec.protocol = wrap(file.protocol);
    spec.cga_config = file.cga;
    spec.budget = file.budget;
    if let Some(levels) = file.sweep.eps_levels {
        spec.eps_levels = levels;
    }
    spec.include_baselines = file.sweep.include_baselines;
    spec.include_oracle = file.sweep.include_oracle;
    spec.oracle_points = file.sweep.oracle_points;
    spec.restarts = file.sweep.restarts;
    spec.output_path = file.sweep.output;
    spec.format = file.sweep.format;
    Ok(spec)
}

/// Parses configuration text; `path` is only used in diagnostics.
pub fn parse_config(text: &str, path: &Path) -> Result<SweepSpec> {
    let probe: FamilyProbe = toml::from_str(text).map_err(|e| parse_error(path, e))?;
    let spec = match probe.family {
        Family::Cv => from_file::<CvParams>(text, path, ProtocolParams::Cv)?,
        Family::Dv => from_file::<DvParams>(text, path, ProtocolParams::Dv)?,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn load_config(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text, path)
}
