//! Experiment driver: configuration files, single-ε optimization, ε-sweeps
//! with baseline and grid comparisons, and result files.

mod config;
mod report;
mod sweep;

pub use config::{load_config, parse_config, BudgetSpec, OutputFormat, SweepSpec};
pub use report::{emit_results, write_csv, write_json};
pub use sweep::{
    optimize, run_sweep, BaselinePoint, LevelRecord, OptimizedPoint, OraclePoint, SweepResult,
};

use serde::Serialize;

use crate::budget::{EpsilonBudget, Family};
use crate::cv::{cv_key_rate, CvParams};
use crate::dv::{dv_key_rate, DvParams};
use crate::Result;

/// Protocol inputs for either family.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProtocolParams {
    Cv(CvParams),
    Dv(DvParams),
}

/// Key rate of one budget in both units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub rate_per_use: f64,
    pub rate_bits_per_sec: f64,
}

impl ProtocolParams {
    pub fn defaults(family: Family) -> Self {
        match family {
            Family::Cv => ProtocolParams::Cv(CvParams::default()),
            Family::Dv => ProtocolParams::Dv(DvParams::default()),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            ProtocolParams::Cv(_) => Family::Cv,
            ProtocolParams::Dv(_) => Family::Dv,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        match self {
            ProtocolParams::Cv(p) => p.violations(),
            ProtocolParams::Dv(p) => p.violations(),
        }
    }

    pub fn rate(&self, budget: &EpsilonBudget) -> Result<RatePoint> {
        Ok(match self {
            ProtocolParams::Cv(p) => {
                let r = cv_key_rate(p, budget)?;
                RatePoint {
                    rate_per_use: r.rate_per_use,
                    rate_bits_per_sec: r.rate_bits_per_sec,
                }
            }
            ProtocolParams::Dv(p) => {
                let r = dv_key_rate(p, budget)?;
                RatePoint {
                    rate_per_use: r.rate_per_use,
                    rate_bits_per_sec: r.rate_bits_per_sec,
                }
            }
        })
    }

    /// Fitness used by the optimizer and the grid oracle.
    pub fn rate_bits_per_sec(&self, budget: &EpsilonBudget) -> Result<f64> {
        self.rate(budget).map(|r| r.rate_bits_per_sec)
    }
}
