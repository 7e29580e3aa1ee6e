//! Exhaustive grid search over `(ε_PE, ε_cor)`.
//!
//! This is the reference the genetic optimizer is checked against. The grid
//! is logarithmic by default since the components span many decades.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::{reconstruct_sec, EpsilonBudget, Family, GeneBounds, Reconstruction};
use crate::{Error, Result};

pub const DEFAULT_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points_per_axis: usize,
    pub scale: GridScale,
    pub pe_bounds: GeneBounds,
    pub cor_bounds: GeneBounds,
}

impl GridSpec {
    /// `points` log-spaced values per axis on `[1e-21, total)`.
    pub fn log(total: f64, points: usize) -> Result<Self> {
        let bounds = GeneBounds::for_total(total)?;
        Ok(GridSpec {
            points_per_axis: points,
            scale: GridScale::Log,
            pe_bounds: bounds,
            cor_bounds: bounds,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if self.points_per_axis < 2 {
            v.push("oracle.points_per_axis: must be >= 2".to_owned());
        }
        for b in [self.pe_bounds, self.cor_bounds] {
            if !(b.lower < b.upper) {
                v.push(format!(
                    "oracle bounds [{:e}, {:e}): lower must be below upper",
                    b.lower, b.upper
                ));
            }
            if self.scale == GridScale::Log && !(b.lower > 0.0) {
                v.push(format!(
                    "oracle bounds [{:e}, {:e}): log scale needs positive bounds",
                    b.lower, b.upper
                ));
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Axis values from `lower` towards (excluding) `upper`. Doubling the
    /// point count reproduces every old point exactly at the even indices.
    pub fn axis(&self, bounds: GeneBounds) -> Vec<f64> {
        let k = self.points_per_axis as f64;
        (0..self.points_per_axis)
            .map(|i| {
                let frac = i as f64 / k;
                match self.scale {
                    GridScale::Log => bounds.lower * (bounds.upper / bounds.lower).powf(frac),
                    GridScale::Linear => bounds.lower + (bounds.upper - bounds.lower) * frac,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub eps_pe: f64,
    pub eps_cor: f64,
    /// Reconstructed secrecy component; negative or sub-floor when infeasible.
    pub eps_sec: f64,
    pub feasible: bool,
    /// `None` for infeasible cells and failed rate evaluations.
    pub rate_bits_per_sec: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best_budget: Option<EpsilonBudget>,
    pub best_fitness: Option<f64>,
    /// Row-major over `ε_PE`, then `ε_cor`.
    pub cells: Vec<GridCell>,
}

impl GridResult {
    pub fn has_feasible(&self) -> bool {
        self.best_fitness.is_some()
    }

    /// Writes the grid as CSV with columns
    /// `eps_pe,eps_cor,eps_sec,feasible,rate_bits_per_sec`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "eps_pe",
            "eps_cor",
            "eps_sec",
            "feasible",
            "rate_bits_per_sec",
        ])?;
        for c in &self.cells {
            w.write_record([
                format!("{:e}", c.eps_pe),
                format!("{:e}", c.eps_cor),
                format!("{:e}", c.eps_sec),
                c.feasible.to_string(),
                c.rate_bits_per_sec
                    .map(|r| format!("{r:e}"))
                    .unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<grid csv>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// `a` beats `b`: higher rate, then smaller `ε_PE`, then smaller `ε_cor`.
fn better(a: &GridCell, b: &GridCell) -> bool {
    let (ra, rb) = (a.rate_bits_per_sec.unwrap(), b.rate_bits_per_sec.unwrap());
    ra > rb || (ra == rb && (a.eps_pe, a.eps_cor) < (b.eps_pe, b.eps_cor))
}

/// Evaluates `rate_fn` on every feasible cell of the grid.
pub fn grid_search<F>(spec: &GridSpec, total: f64, family: Family, rate_fn: F) -> Result<GridResult>
where
    F: Fn(&EpsilonBudget) -> Result<f64> + Sync,
{
    spec.validate()?;
    let pe_axis = spec.axis(spec.pe_bounds);
    let cor_axis = spec.axis(spec.cor_bounds);
    let cells: Vec<(GridCell, Option<EpsilonBudget>)> = pe_axis
        .par_iter()
        .flat_map_iter(|&pe| cor_axis.iter().map(move |&cor| (pe, cor)))
        .map(|(pe, cor)| -> Result<_> {
            Ok(match reconstruct_sec(total, pe, cor, family)? {
                Reconstruction::Feasible(b) => {
                    let rate = rate_fn(&b).ok().filter(|r| !r.is_nan());
                    let cell = GridCell {
                        eps_pe: pe,
                        eps_cor: cor,
                        eps_sec: b.eps_sec(),
                        feasible: true,
                        rate_bits_per_sec: rate,
                    };
                    (cell, Some(b))
                }
                Reconstruction::Infeasible { eps_sec } => (
                    GridCell {
                        eps_pe: pe,
                        eps_cor: cor,
                        eps_sec,
                        feasible: false,
                        rate_bits_per_sec: None,
                    },
                    None,
                ),
            })
        })
        .collect::<Result<_>>()?;

    let best = cells
        .iter()
        .filter(|(c, _)| c.rate_bits_per_sec.is_some())
        .fold(
            None::<&(GridCell, Option<EpsilonBudget>)>,
            |acc, cand| match acc {
                Some(cur) if !better(&cand.0, &cur.0) => Some(cur),
                _ => Some(cand),
            },
        );

    Ok(GridResult {
        best_budget: best.and_then(|(_, b)| *b),
        best_fitness: best.and_then(|(c, _)| c.rate_bits_per_sec),
        cells: cells.into_iter().map(|(c, _)| c).collect(),
    })
}

/// Slack the optimizer is allowed below the grid optimum:
/// `max(1e-9, 1% of |grid best|)`.
pub fn oracle_slack(grid_best: f64) -> f64 {
    (0.01 * grid_best.abs()).max(1e-9)
}
