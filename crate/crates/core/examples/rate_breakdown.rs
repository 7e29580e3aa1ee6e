//! Step-by-step rate evaluation for both protocol families at the
//! symmetric split.
//!
//! ```text
//! cargo run --example rate_breakdown -- 1e-10
//! ```

use qkd_epsilon::budget::{baseline_budgets, Baseline, Family};
use qkd_epsilon::cv::{cv_key_rate, CvParams};
use qkd_epsilon::dv::{dv_key_rate, DvParams};

fn main() -> qkd_epsilon::Result<()> {
    let eps: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("eps must be a number"))
        .unwrap_or(1e-10);

    let symmetric = |family| -> qkd_epsilon::Result<_> {
        Ok(baseline_budgets(eps, family)?
            .into_iter()
            .find(|(k, _)| *k == Baseline::Symmetric)
            .unwrap()
            .1)
    };

    let cv = cv_key_rate(&CvParams::default(), &symmetric(Family::Cv)?)?;
    println!("CV, eps = {eps:e}, eps_PE = eps_cor = eps_sec = eps/5");
    println!(
        "  T = {:.6}   t_wc = {:.6}   xi_wc = {:.6}",
        cv.transmissivity, cv.t_wc, cv.xi_wc
    );
    println!(
        "  sigma_T = {:.3e}   sigma_xi = {:.3e}",
        cv.estimators.sigma_t, cv.estimators.sigma_xi
    );
    println!("  n = {}   m = {}", cv.n, cv.m);
    println!(
        "  I_AB = {:.6}   chi_BE = {:.6}   R_PE = {:.6} bits",
        cv.mutual_info_bits, cv.holevo_bits, cv.r_pe_bits
    );
    println!("  finite-size term = {:.1} bits", cv.finite_term_bits);
    println!(
        "  rate = {:.4e} bits/use = {:.4e} bits/s",
        cv.rate_per_use, cv.rate_bits_per_sec
    );

    let dv = dv_key_rate(&DvParams::default(), &symmetric(Family::Dv)?)?;
    println!("DV, eps = {eps:e}, eps_PE = eps_cor = eps_sec = eps/3");
    println!(
        "  eta = {:.4e}   p_sift = {}   Q1 = {:.6}",
        dv.eta_tot, dv.p_sift, dv.q1
    );
    println!("  n = {}   m = {}", dv.n, dv.m);
    println!(
        "  QBER = {:.6}   worst case = {:.6}",
        dv.qber_est, dv.qber_wc
    );
    println!(
        "  secret fraction = {:.6}   c_dt = {:.6}",
        dv.secret_fraction, dv.c_dt
    );
    println!(
        "  rate = {:.4e} bits/use = {:.4e} bits/s",
        dv.rate_per_use, dv.rate_bits_per_sec
    );
    Ok(())
}
