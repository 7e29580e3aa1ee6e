//! Result files. CSV carries rates clamped at zero; JSON carries the same
//! columns plus the raw rates, budgets, errors and fitness history.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{LevelRecord, OutputFormat, SweepResult};
use crate::budget::Family;
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "eps_total",
    "eps_pe_opt",
    "eps_cor_opt",
    "eps_sec_opt",
    "rate_opt_bps",
    "rate_sym_bps",
    "rate_asym_bps",
    "rate_oracle_bps",
];

fn clamp(rate: Option<f64>) -> Option<f64> {
    rate.map(|r| r.max(0.0))
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &result.records {
        let budget = r.optimized.as_ref().and_then(|p| p.budget);
        w.write_record([
            format!("{:e}", r.eps_total),
            cell(budget.map(|b| b.eps_pe())),
            cell(budget.map(|b| b.eps_cor())),
            cell(budget.map(|b| b.eps_sec())),
            cell(clamp(r.rate_opt())),
            cell(clamp(r.rate_sym())),
            cell(clamp(r.rate_asym())),
            cell(clamp(r.rate_oracle())),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<csv>".into(),
        source,
    })?;
    Ok(())
}

#[derive(Serialize)]
struct JsonRow<'a> {
    eps_total: f64,
    eps_pe_opt: Option<f64>,
    eps_cor_opt: Option<f64>,
    eps_sec_opt: Option<f64>,
    rate_opt_bps: Option<f64>,
    rate_sym_bps: Option<f64>,
    rate_asym_bps: Option<f64>,
    rate_oracle_bps: Option<f64>,
    raw: RawRates,
    record: &'a LevelRecord,
}

#[derive(Serialize)]
struct RawRates {
    rate_opt_bps: Option<f64>,
    rate_sym_bps: Option<f64>,
    rate_asym_bps: Option<f64>,
    rate_oracle_bps: Option<f64>,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    family: Family,
    seed: u64,
    include_baselines: bool,
    include_oracle: bool,
    levels: Vec<JsonRow<'a>>,
}

pub fn write_json<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let levels = result
        .records
        .iter()
        .map(|r| {
            let budget = r.optimized.as_ref().and_then(|p| p.budget);
            JsonRow {
                eps_total: r.eps_total,
                eps_pe_opt: budget.map(|b| b.eps_pe()),
                eps_cor_opt: budget.map(|b| b.eps_cor()),
                eps_sec_opt: budget.map(|b| b.eps_sec()),
                rate_opt_bps: clamp(r.rate_opt()),
                rate_sym_bps: clamp(r.rate_sym()),
                rate_asym_bps: clamp(r.rate_asym()),
                rate_oracle_bps: clamp(r.rate_oracle()),
                raw: RawRates {
                    rate_opt_bps: r.rate_opt(),
                    rate_sym_bps: r.rate_sym(),
                    rate_asym_bps: r.rate_asym(),
                    rate_oracle_bps: r.rate_oracle(),
                },
                record: r,
            }
        })
        .collect();
    let doc = JsonDoc {
        family: result.family,
        seed: result.seed,
        include_baselines: result.include_baselines,
        include_oracle: result.include_oracle,
        levels,
    };
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out).map_err(|source| Error::Io {
        path: "<json>".into(),
        source,
    })?;
    Ok(())
}

/// Writes `result` to `path`, creating parent directories as needed.
pub fn emit_results(result: &SweepResult, format: OutputFormat, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let file = std::fs::File::create(path).map_err(io)?;
    let mut buf = std::io::BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(result, &mut buf)?,
        OutputFormat::Json => write_json(result, &mut buf)?,
    }
    buf.flush().map_err(io)
}
