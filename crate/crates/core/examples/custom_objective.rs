//! The genetic optimizer on a plain function of the two genes, and on a
//! budget objective with a hand-written rate model.
//!
//! ```text
//! cargo run --example custom_objective
//! ```

use qkd_epsilon::budget::{EpsilonBudget, Family};
use qkd_epsilon::cga::{run, run_with, CgaConfig, GeneFn};

fn main() -> qkd_epsilon::Result<()> {
    let config = CgaConfig {
        population: 60,
        iterations: 80,
        seed: 7,
        ..CgaConfig::default()
    };

    // concave bowl with its top at (0.3, -0.4)
    let bowl = GeneFn(|p: [f64; 2]| -((p[0] - 0.3).powi(2) + (p[1] + 0.4).powi(2)));
    let res = run_with(&config, &bowl)?;
    println!(
        "bowl: best genes ({:.4}, {:.4}), fitness {:.2e}, {} evaluations",
        res.best_genes[0], res.best_genes[1], res.best_fitness, res.evaluations
    );

    // toy rate: pays log-cost for every small component
    let toy =
        |b: &EpsilonBudget| -> qkd_epsilon::Result<f64> {
            Ok(1000.0
                + 10.0 * b.eps_pe().log2()
                + 2.0 * b.eps_cor().log2()
                + 20.0 * b.eps_sec().log2())
        };
    let res = run(&config, 1e-9, Family::Dv, toy)?;
    let b = res.best_budget.expect("feasible");
    println!(
        "toy rate: eps_pe = {:.3e}, eps_cor = {:.3e}, eps_sec = {:.3e}, rate {:.3}",
        b.eps_pe(),
        b.eps_cor(),
        b.eps_sec(),
        res.best_fitness
    );
    let first = res.fitness_history[0];
    let last = *res.fitness_history.last().unwrap();
    println!(
        "history: {first:.3} -> {last:.3} over {} generations",
        res.fitness_history.len() - 1
    );
    Ok(())
}
