//! Composable key rate of single-photon BB84.
//!
//! ```text
//! η_tot = η T,   p_sift = p_X² + (1 − p_X)²,   Q₁ = η_tot + (1 − η_tot) p_dc
//! κ     = (1 − r_PE) p_sift Q₁
//! r     = 1 − h(Ẽ) − f_EC h(Ê) + (1 + log2(ε_cor ε_h²))/n − Δ_AEP(ε_s)/sqrt(n)
//! R     = κ r                                bits per use
//! R_sec = c_dt clk R,   c_dt = 1/(1 + Q₁ t_dt clk)
//! ```
//!
//! The block counts `n` and `m` are sifted, detected events: of the
//! `N p_sift Q₁` bits the parties actually hold, a fraction `r_PE` goes to
//! parameter estimation.

use serde::{Deserialize, Serialize};

use crate::budget::{EpsilonBudget, Family};
use crate::cv::transmissivity;
use crate::{Error, Result};

/// Physical and protocol inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DvParams {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    pub det_efficiency: f64,
    pub x_basis_prob: f64,
    pub block_size: u64,
    /// Dark-count probability per detection gate.
    pub dark_count_prob: f64,
    /// EC leakage multiplier `f_EC ≥ 1`.
    pub recon_efficiency: f64,
    pub pe_ratio: f64,
    pub clock_hz: f64,
    pub dead_time_s: f64,
    /// Misalignment error on genuine detections.
    pub intrinsic_error: f64,
    /// Bypasses the dark-count QBER model when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qber_override: Option<f64>,
}

impl Default for DvParams {
    /// The 100 km fiber link used as the reference DV scenario.
    fn default() -> Self {
        DvParams {
            length_km: 100.0,
            attenuation_db_per_km: 0.2,
            det_efficiency: 0.92,
            x_basis_prob: 0.5,
            block_size: 30_000_000,
            dark_count_prob: 1e-3,
            recon_efficiency: 1.25,
            pe_ratio: 0.25,
            clock_hz: 2e9,
            dead_time_s: 2e-6,
            intrinsic_error: 0.0,
            qber_override: None,
        }
    }
}

fn unit_open(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

impl DvParams {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |ok: bool, key: &str, why: &str| {
            if !ok {
                v.push(format!("protocol.{key}: {why}"));
            }
        };
        check(
            self.length_km >= 0.0 && self.length_km.is_finite(),
            "length_km",
            "must be >= 0",
        );
        check(
            self.attenuation_db_per_km >= 0.0 && self.attenuation_db_per_km.is_finite(),
            "attenuation_db_per_km",
            "must be >= 0",
        );
        check(
            self.det_efficiency > 0.0 && self.det_efficiency <= 1.0,
            "det_efficiency",
            "must lie in (0, 1]",
        );
        check(
            unit_open(self.x_basis_prob),
            "x_basis_prob",
            "must lie in (0, 1)",
        );
        check(self.block_size >= 1, "block_size", "must be >= 1");
        check(
            (0.0..1.0).contains(&self.dark_count_prob),
            "dark_count_prob",
            "must lie in [0, 1)",
        );
        check(
            self.recon_efficiency >= 1.0 && self.recon_efficiency.is_finite(),
            "recon_efficiency",
            "must be >= 1",
        );
        check(unit_open(self.pe_ratio), "pe_ratio", "must lie in (0, 1)");
        check(
            self.clock_hz > 0.0 && self.clock_hz.is_finite(),
            "clock_hz",
            "must be > 0",
        );
        check(
            self.dead_time_s >= 0.0 && self.dead_time_s.is_finite(),
            "dead_time_s",
            "must be >= 0",
        );
        check(
            (0.0..=0.5).contains(&self.intrinsic_error),
            "intrinsic_error",
            "must lie in [0, 0.5]",
        );
        if let Some(q) = self.qber_override {
            check(
                (0.0..=0.5).contains(&q),
                "qber_override",
                "must lie in [0, 0.5]",
            );
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

/// Probability that both parties pick the same basis.
pub fn sifting_probability(x_basis_prob: f64) -> f64 {
    x_basis_prob * x_basis_prob + (1.0 - x_basis_prob) * (1.0 - x_basis_prob)
}

/// `(η_tot, p_sift, Q₁)`.
pub fn detection_stats(params: &DvParams) -> (f64, f64, f64) {
    let eta_tot =
        params.det_efficiency * transmissivity(params.length_km, params.attenuation_db_per_km);
    let p_sift = sifting_probability(params.x_basis_prob);
    let q1 = eta_tot + (1.0 - eta_tot) * params.dark_count_prob;
    (eta_tot, p_sift, q1)
}

/// Estimated QBER. Dark counts land on the wrong bit half the time; genuine
/// detections carry the intrinsic error. Capped at 1/2.
pub fn estimated_qber(params: &DvParams, q1: f64, eta_tot: f64) -> Result<f64> {
    if let Some(q) = params.qber_override {
        return Ok(q);
    }
    if !(q1 > 0.0) {
        return Err(Error::domain("q1", q1, "> 0"));
    }
    let errors = params.intrinsic_error * eta_tot + 0.5 * (1.0 - eta_tot) * params.dark_count_prob;
    Ok((errors / q1).min(0.5))
}

/// Worst-case QBER `Ẽ = Ê + sqrt((2/m) ln((m+1)/ε_PE))`, capped at 1/2.
pub fn worst_case_qber(qber_est: f64, m: u64, eps_pe: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::DegenerateBlock { n: 0, m });
    }
    if !(eps_pe > 0.0 && eps_pe < 1.0) {
        return Err(Error::domain("eps_pe", eps_pe, "(0, 1)"));
    }
    let mf = m as f64;
    let log_arg = (mf + 1.0) / eps_pe;
    let deviation = (2.0 / mf * log_arg.ln()).sqrt();
    Ok((qber_est + deviation).min(0.5))
}

/// `Δ_AEP(ε_s) = 7 sqrt(log2(2/ε_s))`.
pub fn aep_term(eps_s: f64) -> Result<f64> {
    if !(eps_s > 0.0 && eps_s <= 2.0) {
        return Err(Error::domain("eps_s", eps_s, "(0, 2]"));
    }
    Ok(7.0 * (2.0 / eps_s).log2().sqrt())
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", p, "[0, 1]"));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Dead-time throughput factor `1/(1 + Q₁ t_dt clk)`.
pub fn dead_time_factor(q1: f64, dead_time_s: f64, clock_hz: f64) -> f64 {
    1.0 / (1.0 + q1 * dead_time_s * clock_hz)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DvRateBreakdown {
    pub eta_tot: f64,
    pub p_sift: f64,
    pub q1: f64,
    pub n: u64,
    pub m: u64,
    pub qber_est: f64,
    pub qber_wc: f64,
    pub kappa: f64,
    pub secret_fraction: f64,
    pub c_dt: f64,
    pub rate_per_use: f64,
    pub rate_bits_per_sec: f64,
}

/// Sifted, detected key and estimation counts `(n, m)`.
pub fn block_counts(params: &DvParams, p_sift: f64, q1: f64) -> (u64, u64) {
    let held = params.block_size as f64 * p_sift * q1;
    let n = ((1.0 - params.pe_ratio) * held).floor() as u64;
    let m = (params.pe_ratio * held).floor() as u64;
    (n, m)
}

/// Composable key rate. Negative secret fractions are returned as is.
pub fn dv_key_rate(params: &DvParams, budget: &EpsilonBudget) -> Result<DvRateBreakdown> {
    if budget.family() != Family::Dv {
        return Err(Error::FamilyMismatch {
            expected: Family::Dv,
            found: budget.family(),
        });
    }
    params.validate()?;
    let (eta_tot, p_sift, q1) = detection_stats(params);
    let (n, m) = block_counts(params, p_sift, q1);
    if n < 2 || m < 1 {
        return Err(Error::DegenerateBlock { n, m });
    }
    let qber_est = estimated_qber(params, q1, eta_tot)?;
    let qber_wc = worst_case_qber(qber_est, m, budget.eps_pe())?;
    let nf = n as f64;
    let secret_fraction =
        1.0 - binary_entropy(qber_wc)? - params.recon_efficiency * binary_entropy(qber_est)?
            + (1.0 + (budget.eps_cor() * budget.eps_h() * budget.eps_h()).log2()) / nf
            - aep_term(budget.eps_s())? / nf.sqrt();
    let kappa = (1.0 - params.pe_ratio) * p_sift * q1;
    let c_dt = dead_time_factor(q1, params.dead_time_s, params.clock_hz);
    let rate_per_use = kappa * secret_fraction;
    Ok(DvRateBreakdown {
        eta_tot,
        p_sift,
        q1,
        n,
        m,
        qber_est,
        qber_wc,
        kappa,
        secret_fraction,
        c_dt,
        rate_per_use,
        rate_bits_per_sec: c_dt * params.clock_hz * rate_per_use,
    })
}
