//! Gaussian-modulated CV budget optimization on the fine grid
//! `1e-13 … 1e-12`, where only the optimized split has a positive rate.
//!
//! ```text
//! cargo run --release --example optimize_cv
//! ```

use qkd_epsilon::budget::{baseline_budgets, Family};
use qkd_epsilon::cga::CgaConfig;
use qkd_epsilon::harness::{optimize, ProtocolParams};

fn main() -> qkd_epsilon::Result<()> {
    let protocol = ProtocolParams::defaults(Family::Cv);
    let cga = CgaConfig::default();

    println!(
        "{:>8} {:>14} {:>14} {:>14}   eps_pe / eps_cor / eps_sec",
        "eps", "opt b/s", "sym b/s", "asym b/s"
    );
    for k in 1..=10 {
        let eps = k as f64 * 1e-13;
        let opt = optimize(&protocol, &cga, 1, eps)?;
        let base = baseline_budgets(eps, Family::Cv)?;
        let rates: Vec<String> = base
            .iter()
            .map(|(_, b)| match protocol.rate_bits_per_sec(b) {
                Ok(r) => format!("{r:>14.4e}"),
                Err(_) => format!("{:>14}", "degenerate"),
            })
            .collect();
        let opt_rate = opt
            .rate_bits_per_sec
            .map_or("none".into(), |r| format!("{r:.4e}"));
        let split = opt.budget.map_or(String::new(), |b| {
            format!(
                "{:.2e} / {:.2e} / {:.2e}",
                b.eps_pe(),
                b.eps_cor(),
                b.eps_sec()
            )
        });
        println!(
            "{eps:>8.0e} {opt_rate:>14} {} {}   {split}",
            rates[0], rates[1]
        );
    }
    Ok(())
}
