use rayon::prelude::*;
use serde::Serialize;

use super::{emit_results, ProtocolParams, SweepSpec};
use crate::budget::{baseline_budgets, Baseline, EpsilonBudget, Family};
use crate::cga::{self, CgaConfig, OptimizationResult};
use crate::oracle::{grid_search, GridSpec};
use crate::Result;

/// Best of `restarts` optimizer runs at total budget `eps`, seeded
/// `cga.seed`, `cga.seed + 1`, …. Ties keep the earlier seed.
pub fn optimize(
    protocol: &ProtocolParams,
    cga: &CgaConfig,
    restarts: usize,
    eps: f64,
) -> Result<OptimizedPoint> {
    let family = protocol.family();
    let mut best: Option<(u64, OptimizationResult)> = None;
    for k in 0..restarts.max(1) as u64 {
        let config = CgaConfig {
            seed: cga.seed.wrapping_add(k),
            ..cga.clone()
        };
        let run = cga::run(&config, eps, family, |b| protocol.rate_bits_per_sec(b))?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| run.best_fitness > b.best_fitness)
        {
            best = Some((config.seed, run));
        }
    }
    let (seed, run) = best.expect("at least one restart");
    let rate = run
        .best_budget
        .and(Some(run.best_fitness))
        .filter(|r| r.is_finite());
    let rate_per_use = match (&run.best_budget, rate) {
        (Some(b), Some(_)) => protocol.rate(b).ok().map(|r| r.rate_per_use),
        _ => None,
    };
    Ok(OptimizedPoint {
        budget: run.best_budget,
        rate_bits_per_sec: rate,
        rate_per_use,
        seed,
        evaluations: run.evaluations,
        reseeds: run.reseeds,
        fitness_history: run.fitness_history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizedPoint {
    /// `None` when no feasible chromosome was found.
    pub budget: Option<EpsilonBudget>,
    /// Raw rate; may be negative. `None` if no candidate could be evaluated.
    pub rate_bits_per_sec: Option<f64>,
    pub rate_per_use: Option<f64>,
    /// Seed of the winning restart.
    pub seed: u64,
    pub evaluations: usize,
    pub reseeds: usize,
    pub fitness_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselinePoint {
    pub kind: Baseline,
    pub budget: EpsilonBudget,
    /// Raw rate; `None` if evaluation failed (see the record's errors).
    pub rate_bits_per_sec: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OraclePoint {
    pub points_per_axis: usize,
    pub budget: Option<EpsilonBudget>,
    pub rate_bits_per_sec: Option<f64>,
}

/// Everything computed at one ε level. Failures land in `errors` and leave
/// the affected field empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRecord {
    pub eps_total: f64,
    pub optimized: Option<OptimizedPoint>,
    pub symmetric: Option<BaselinePoint>,
    pub asymmetric: Option<BaselinePoint>,
    pub oracle: Option<OraclePoint>,
    pub errors: Vec<String>,
}

impl LevelRecord {
    pub fn rate_opt(&self) -> Option<f64> {
        self.optimized.as_ref().and_then(|p| p.rate_bits_per_sec)
    }

    pub fn rate_sym(&self) -> Option<f64> {
        self.symmetric.as_ref().and_then(|p| p.rate_bits_per_sec)
    }

    pub fn rate_asym(&self) -> Option<f64> {
        self.asymmetric.as_ref().and_then(|p| p.rate_bits_per_sec)
    }

    pub fn rate_oracle(&self) -> Option<f64> {
        self.oracle.as_ref().and_then(|p| p.rate_bits_per_sec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub family: Family,
    pub seed: u64,
    pub include_baselines: bool,
    pub include_oracle: bool,
    pub records: Vec<LevelRecord>,
}

fn run_level(spec: &SweepSpec, eps: f64) -> LevelRecord {
    let mut record = LevelRecord {
        eps_total: eps,
        optimized: None,
        symmetric: None,
        asymmetric: None,
        oracle: None,
        errors: Vec::new(),
    };

    match optimize(&spec.protocol, &spec.cga_config, spec.restarts, eps) {
        Ok(p) => record.optimized = Some(p),
        Err(e) => record.errors.push(format!("optimize: {e}")),
    }

    if spec.include_baselines {
        match baseline_budgets(eps, spec.family) {
            Ok(list) => {
                for (kind, budget) in list {
                    let rate = match spec.protocol.rate_bits_per_sec(&budget) {
                        Ok(r) => Some(r),
                        Err(e) => {
                            record
                                .errors
                                .push(format!("{kind:?} baseline: {e}").to_lowercase());
                            None
                        }
                    };
                    let point = Some(BaselinePoint {
                        kind,
                        budget,
                        rate_bits_per_sec: rate,
                    });
                    match kind {
                        Baseline::Symmetric => record.symmetric = point,
                        Baseline::Asymmetric => record.asymmetric = point,
                    }
                }
            }
            Err(e) => record.errors.push(format!("baselines: {e}")),
        }
    }

    if spec.include_oracle {
        let grid = GridSpec::log(eps, spec.oracle_points).and_then(|g| {
            grid_search(&g, eps, spec.family, |b| spec.protocol.rate_bits_per_sec(b))
        });
        match grid {
            Ok(g) => {
                record.oracle = Some(OraclePoint {
                    points_per_axis: spec.oracle_points,
                    budget: g.best_budget,
                    rate_bits_per_sec: g.best_fitness,
                })
            }
            Err(e) => record.errors.push(format!("oracle: {e}")),
        }
    }

    for e in &record.errors {
        log::warn!("eps = {eps:e}: {e}");
    }
    record
}

/// Runs every ε level (in parallel) and, if the spec names an output path,
/// writes the result there. Records come back in `eps_levels` order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let records: Vec<LevelRecord> = spec
        .eps_levels
        .par_iter()
        .map(|&eps| run_level(spec, eps))
        .collect();
    let result = SweepResult {
        family: spec.family,
        seed: spec.cga_config.seed,
        include_baselines: spec.include_baselines,
        include_oracle: spec.include_oracle,
        records,
    };
    if let Some(path) = &spec.output_path {
        emit_results(&result, spec.format, path)?;
    }
    Ok(result)
}
