//! Decade sweep with baselines, written as CSV to stdout.
//!
//! ```text
//! cargo run --release --example sweep -- cv
//! cargo run --release --example sweep -- dv --oracle
//! ```

use qkd_epsilon::budget::Family;
use qkd_epsilon::harness::{run_sweep, write_csv, SweepSpec};

fn main() -> qkd_epsilon::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family: Family = args
        .first()
        .map(|s| s.parse().expect("family must be cv or dv"))
        .unwrap_or(Family::Cv);
    let mut spec = SweepSpec::defaults(family);
    spec.include_oracle = args.iter().any(|a| a == "--oracle");

    let result = run_sweep(&spec)?;
    write_csv(&result, std::io::stdout().lock())?;

    for r in &result.records {
        if let Some(b) = r.optimized.as_ref().and_then(|p| p.budget) {
            eprintln!(
                "{:e}: eps_cor/eps_pe = {:.2e}, eps_pe/eps_sec = {:.2}",
                r.eps_total,
                b.eps_cor() / b.eps_pe(),
                b.eps_pe() / b.eps_sec()
            );
        }
        for e in &r.errors {
            eprintln!("{:e}: {e}", r.eps_total);
        }
    }
    Ok(())
}
