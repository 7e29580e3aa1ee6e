//! Worst-case channel estimates and the two Holevo bounds as the fiber
//! gets longer.
//!
//! ```text
//! cargo run --example channel_bounds
//! ```

use qkd_epsilon::cv::{
    holevo_bound, holevo_bound_trusted, mutual_information, worst_case_estimators, ChannelBound,
    CvParams, EstimatorVariance, GaussianMle,
};

fn main() -> qkd_epsilon::Result<()> {
    let eps_pe = 1e-10;
    println!(
        "{:>6} {:>9} {:>9} {:>9} {:>9} {:>11} {:>11}",
        "km", "T", "t_wc", "xi_wc", "I_AB", "chi ideal", "chi trusted"
    );
    for km in [0.0, 2.0, 4.0, 10.0, 20.0, 40.0, 80.0] {
        let p = CvParams {
            length_km: km,
            ..CvParams::default()
        };
        let (m, _) = p.split_block();
        let est = GaussianMle.estimate(&p, p.transmissivity(), p.excess_noise, m);
        match worst_case_estimators(&est, eps_pe, p.xi_bound)? {
            ChannelBound::Bounded { t_wc, xi_wc } => println!(
                "{km:>6} {:>9.5} {t_wc:>9.5} {xi_wc:>9.5} {:>9.5} {:>11.5} {:>11.5}",
                p.transmissivity(),
                mutual_information(&p, est.t_hat, est.xi_hat),
                holevo_bound(&p, t_wc, xi_wc)?,
                holevo_bound_trusted(&p, t_wc, xi_wc)?
            ),
            ChannelBound::Degenerate { t_wc } => println!(
                "{km:>6} {:>9.5} {t_wc:>9.2e} degenerate",
                p.transmissivity()
            ),
        }
    }
    Ok(())
}
