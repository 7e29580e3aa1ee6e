//! Exhaustive 200x200 log grid against the genetic optimizer at one ε,
//! with the full grid saved for heat-map plotting.
//!
//! ```text
//! cargo run --release --example grid_oracle -- dv 1e-17 grid.csv
//! ```

use qkd_epsilon::budget::Family;
use qkd_epsilon::cga::CgaConfig;
use qkd_epsilon::harness::{optimize, ProtocolParams};
use qkd_epsilon::oracle::{grid_search, oracle_slack, GridSpec, DEFAULT_POINTS};

fn main() -> qkd_epsilon::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family: Family = args
        .first()
        .map_or(Family::Dv, |s| s.parse().expect("cv or dv"));
    let eps: f64 = args.get(1).map_or(1e-17, |s| s.parse().expect("eps"));

    let protocol = ProtocolParams::defaults(family);
    let grid = grid_search(&GridSpec::log(eps, DEFAULT_POINTS)?, eps, family, |b| {
        protocol.rate_bits_per_sec(b)
    })?;
    let opt = optimize(&protocol, &CgaConfig::default(), 1, eps)?;

    let (Some(gb), Some(gr)) = (grid.best_budget, grid.best_fitness) else {
        println!("no feasible grid cell");
        return Ok(());
    };
    let feasible = grid.cells.iter().filter(|c| c.feasible).count();
    println!(
        "{family} at eps = {eps:e}: {feasible} of {} cells feasible",
        grid.cells.len()
    );
    println!(
        "grid: {gr:.6e} b/s at eps_pe = {:.3e}, eps_cor = {:.3e}",
        gb.eps_pe(),
        gb.eps_cor()
    );
    if let (Some(ob), Some(or)) = (opt.budget, opt.rate_bits_per_sec) {
        println!(
            "cga:  {or:.6e} b/s at eps_pe = {:.3e}, eps_cor = {:.3e}",
            ob.eps_pe(),
            ob.eps_cor()
        );
        println!(
            "cga - grid = {:.3e} (allowed shortfall {:.3e})",
            or - gr,
            oracle_slack(gr)
        );
    }

    if let Some(path) = args.get(2) {
        grid.save_csv(path.as_ref())?;
        println!("grid written to {path}");
    }
    Ok(())
}
