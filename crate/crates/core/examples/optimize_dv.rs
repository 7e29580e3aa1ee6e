//! BB84 budget optimization across a fine ε grid near the positivity edge.
//!
//! The QBER is pinned at 0.0499, the rounded value of the reference
//! parameter set, instead of the value computed from the dark-count model.
//!
//! ```text
//! cargo run --release --example optimize_dv
//! ```

use qkd_epsilon::budget::{baseline_budgets, Family};
use qkd_epsilon::cga::CgaConfig;
use qkd_epsilon::dv::DvParams;
use qkd_epsilon::harness::{optimize, ProtocolParams};

fn main() -> qkd_epsilon::Result<()> {
    let protocol = ProtocolParams::Dv(DvParams {
        qber_override: Some(0.0499),
        ..DvParams::default()
    });
    let cga = CgaConfig::default();

    println!(
        "{:>8} {:>12} {:>12} {:>12}   eps_pe / eps_cor / eps_sec",
        "eps", "opt b/s", "sym b/s", "asym b/s"
    );
    for k in 1..=10 {
        let eps = k as f64 * 1e-18;
        let opt = optimize(&protocol, &cga, 1, eps)?;
        let base: Vec<f64> = baseline_budgets(eps, Family::Dv)?
            .iter()
            .map(|(_, b)| protocol.rate_bits_per_sec(b))
            .collect::<Result<_, _>>()?;
        let b = opt.budget.expect("feasible optimum");
        println!(
            "{eps:>8.0e} {:>12.1} {:>12.1} {:>12.1}   {:.2e} / {:.2e} / {:.2e}",
            opt.rate_bits_per_sec.unwrap_or(f64::NAN),
            base[0],
            base[1],
            b.eps_pe(),
            b.eps_cor(),
            b.eps_sec()
        );
    }
    Ok(())
}
