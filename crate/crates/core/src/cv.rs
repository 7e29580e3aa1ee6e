//! Composable key rate of the Gaussian-modulated coherent-state protocol
//! with homodyne detection.
//!
//! The rate pipeline is
//!
//! ```text
//! T      = 10^(-A L / 10)
//! R_PE   = β I(T̂, ξ̂) − χ(T_wc, ξ_wc)
//! R      = (n R_PE − F) / N          bits per channel use
//! R_sec  = clk · R                    bits per second
//! ```
//!
//! with `m = ⌊r_PE N⌋` signals sacrificed for parameter estimation and
//! `n = N − m` used for the key. The channel estimators are taken at their
//! true values (a forecast, not a post-processing of measured data); only
//! their standard deviations depend on `m`.
//!
//! Eve's Holevo information in the rate is computed with the detector
//! inefficiency and electronic noise treated as trusted
//! ([`holevo_bound_trusted`]). The ideal-homodyne bound [`holevo_bound`] is
//! kept as a standalone function; it upper-bounds the trusted one.

use serde::{Deserialize, Serialize};

use crate::budget::{EpsilonBudget, Family};
use crate::{Error, Result};

/// Symplectic eigenvalues below `1 - EIGEN_SLACK` are reported as unphysical;
/// those in `[1 - EIGEN_SLACK, 1]` are clamped to 1.
pub const EIGEN_SLACK: f64 = 1e-9;

/// Worst-case transmissivities below this are treated as a lost channel.
pub const MIN_TRANSMISSIVITY: f64 = 1e-12;

/// Which way the excess-noise estimator is shifted to build its worst case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XiBound {
    /// `ξ_wc = ξ̂ + w σ_ξ`: more noise is worse for secrecy.
    #[default]
    Upper,
    /// `ξ_wc = ξ̂ − w σ_ξ`, the sign as it is usually printed next to
    /// `T_wc = T̂ − w σ_T`. Only useful for comparison runs.
    Lower,
}

/// Physical and protocol inputs. Variances are in shot-noise units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvParams {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    pub det_efficiency: f64,
    pub excess_noise: f64,
    pub electronic_noise: f64,
    /// Variance of the two-mode squeezed vacuum, `μ > 1`.
    pub signal_variance: f64,
    pub block_size: u64,
    /// `β ≤ 1`.
    pub recon_efficiency: f64,
    /// Bits per symbol after discretization.
    pub discretization: u32,
    pub pe_ratio: f64,
    pub clock_hz: f64,
    pub xi_bound: XiBound,
}

impl Default for CvParams {
    /// The 4 km fiber link used as the reference CV scenario.
    fn default() -> Self {
        CvParams {
            length_km: 4.0,
            attenuation_db_per_km: 0.2,
            det_efficiency: 0.85,
            excess_noise: 0.01,
            electronic_noise: 0.1,
            signal_variance: 25.0,
            block_size: 400_000,
            recon_efficiency: 0.95,
            discretization: 7,
            pe_ratio: 0.3,
            clock_hz: 1e9,
            xi_bound: XiBound::Upper,
        }
    }
}

impl CvParams {
    /// Every violated invariant, as `"key: reason"` strings.
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
            self.excess_noise >= 0.0 && self.excess_noise.is_finite(),
            "excess_noise",
            "must be >= 0",
        );
        check(
            self.electronic_noise >= 0.0 && self.electronic_noise.is_finite(),
            "electronic_noise",
            "must be >= 0",
        );
        check(
            self.signal_variance > 1.0 && self.signal_variance.is_finite(),
            "signal_variance",
            "must be > 1",
        );
        check(
            self.recon_efficiency > 0.0 && self.recon_efficiency <= 1.0,
            "recon_efficiency",
            "must lie in (0, 1]",
        );
        check(self.discretization >= 1, "discretization", "must be >= 1");
        check(
            self.pe_ratio > 0.0 && self.pe_ratio < 1.0,
            "pe_ratio",
            "must lie in (0, 1)",
        );
        check(
            self.clock_hz > 0.0 && self.clock_hz.is_finite(),
            "clock_hz",
            "must be > 0",
        );
        let m = (self.pe_ratio * self.block_size as f64).floor();
        check(
            m >= 1.0 && self.block_size as f64 - m >= 2.0,
            "block_size",
            "must leave at least 1 estimation and 2 key signals",
        );
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

    pub fn transmissivity(&self) -> f64 {
        transmissivity(self.length_km, self.attenuation_db_per_km)
    }

    /// `(m, n)`: estimation and key-generation signal counts.
    pub fn split_block(&self) -> (u64, u64) {
        let m = (self.pe_ratio * self.block_size as f64).floor() as u64;
        (m, self.block_size - m)
    }
}

/// Fiber transmissivity `10^(−A·L/10)`.
pub fn transmissivity(length_km: f64, attenuation_db_per_km: f64) -> f64 {
    10f64.powf(-attenuation_db_per_km * length_km / 10.0)
}

/// Confidence width `w = sqrt(2 ln(1/ε_PE))`.
pub fn pe_confidence_width(eps_pe: f64) -> Result<f64> {
    if !(eps_pe > 0.0 && eps_pe <= 1.0) {
        return Err(Error::domain("eps_pe", eps_pe, "(0, 1]"));
    }
    Ok((2.0 * (1.0 / eps_pe).ln()).sqrt())
}

/// Channel estimators and their standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorModel {
    pub t_hat: f64,
    pub xi_hat: f64,
    pub sigma_t: f64,
    pub sigma_xi: f64,
    /// Number of parameter-estimation samples.
    pub m: u64,
}

/// Produces the estimator model for a channel from `m` estimation samples.
pub trait EstimatorVariance {
    fn estimate(&self, params: &CvParams, t: f64, xi: f64, m: u64) -> EstimatorModel;
}

/// Maximum-likelihood estimator variances for the Gaussian channel
/// `y = sqrt(ηT) x + z`, with `σ_x² = μ − 1` and `σ_z² = 1 + v_el + ηTξ`:
///
/// ```text
/// σ_T² = 4 ηT σ_z² / (η² m σ_x²)
/// σ_ξ  = σ_z² sqrt(2/m) / (ηT)
/// ```
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianMle;

impl EstimatorVariance for GaussianMle {
    fn estimate(&self, params: &CvParams, t: f64, xi: f64, m: u64) -> EstimatorModel {
        let eta = params.det_efficiency;
        let tau = eta * t;
        let var_x = params.signal_variance - 1.0;
        let var_z = 1.0 + params.electronic_noise + tau * xi;
        let mf = m as f64;
        EstimatorModel {
            t_hat: t,
            xi_hat: xi,
            sigma_t: (4.0 * tau * var_z / (eta * eta * mf * var_x)).sqrt(),
            sigma_xi: var_z * (2.0 / mf).sqrt() / tau,
            m,
        }
    }
}

/// Worst-case channel parameters, or a marker that the transmissivity bound
/// collapsed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelBound {
    Bounded { t_wc: f64, xi_wc: f64 },
    Degenerate { t_wc: f64 },
}

pub fn worst_case_estimators(
    est: &EstimatorModel,
    eps_pe: f64,
    xi_bound: XiBound,
) -> Result<ChannelBound> {
    let w = pe_confidence_width(eps_pe)?;
    let t_wc = est.t_hat - w * est.sigma_t;
    if t_wc < MIN_TRANSMISSIVITY {
        return Ok(ChannelBound::Degenerate { t_wc });
    }
    let shift = w * est.sigma_xi;
    let xi_wc = match xi_bound {
        XiBound::Upper => est.xi_hat + shift,
        XiBound::Lower => est.xi_hat - shift,
    };
    Ok(ChannelBound::Bounded {
        t_wc: t_wc.min(1.0),
        xi_wc: xi_wc.max(0.0),
    })
}

fn check_channel(t: f64, xi: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain("t", t, "(0, 1]"));
    }
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::domain("xi", xi, ">= 0"));
    }
    Ok(())
}

/// Bob's output variance `b = Tμ + 1 − T + Tξ` before the detector.
fn channel_output_variance(mu: f64, t: f64, xi: f64) -> f64 {
    t * mu + 1.0 - t + t * xi
}

/// Alice–Bob mutual information in bits per use, including the detector's
/// efficiency and electronic noise.
pub fn mutual_information(params: &CvParams, t: f64, xi: f64) -> f64 {
    let mu = params.signal_variance;
    let eta = params.det_efficiency;
    let b = channel_output_variance(mu, t, xi);
    let b_meas = eta * b + 1.0 - eta + params.electronic_noise;
    0.5 * (b_meas / (b_meas - eta * t * (mu - 1.0))).log2()
}

/// Entropy of a thermal mode with symplectic eigenvalue `ν`, in bits.
pub fn bosonic_entropy(nu: f64) -> f64 {
    if nu <= 1.0 {
        return 0.0;
    }
    let plus = (nu + 1.0) / 2.0;
    let minus = (nu - 1.0) / 2.0;
    plus * plus.log2() - minus * minus.log2()
}

fn physical_eigenvalue(nu: f64) -> Result<f64> {
    if nu.is_nan() || nu < 1.0 - EIGEN_SLACK {
        return Err(Error::Unphysical { value: nu });
    }
    Ok(nu.max(1.0))
}

/// Symplectic eigenvalues of a two-mode matrix from its invariants
/// `Δ` and `det`.
fn two_mode_eigenvalues(delta: f64, det: f64) -> (f64, f64) {
    // a discriminant within rounding of zero is a degenerate pair
    let d2 = delta * delta - 4.0 * det;
    let disc = if d2 <= 16.0 * f64::EPSILON * delta * delta {
        0.0
    } else {
        d2.sqrt()
    };
    (
        ((delta + disc) / 2.0).max(0.0).sqrt(),
        ((delta - disc) / 2.0).max(0.0).sqrt(),
    )
}

/// Holevo bound on Eve's information about Bob's variable for an ideal
/// homodyne detector at the channel output.
///
/// `χ = h(ν₊) + h(ν₋) − h(ν_c)` where `ν±` come from the Alice–Bob
/// covariance matrix and `ν_c = sqrt(μ(μ − c²/b))` is Alice's conditional
/// eigenvalue after Bob's homodyne.
pub fn holevo_bound(params: &CvParams, t: f64, xi: f64) -> Result<f64> {
    check_channel(t, xi)?;
    let mu = params.signal_variance;
    let b = channel_output_variance(mu, t, xi);
    let c2 = t * (mu * mu - 1.0);
    let delta = mu * mu + b * b - 2.0 * c2;
    let det = (mu * b - c2).powi(2);
    let (nu_p, nu_m) = two_mode_eigenvalues(delta, det);
    let nu_c = (mu * (mu - c2 / b)).max(0.0).sqrt();
    let chi = bosonic_entropy(physical_eigenvalue(nu_p)?)
        + bosonic_entropy(physical_eigenvalue(nu_m)?)
        - bosonic_entropy(physical_eigenvalue(nu_c)?);
    Ok(chi.max(0.0))
}

/// Holevo bound with the detector's inefficiency `η` and electronic noise
/// `v_el` treated as trusted.
///
/// The detector is modelled as a beam splitter of transmissivity `η` mixing
/// Bob's mode with one arm of an EPR source whose variance reproduces `v_el`.
/// Eve's entropy is that of Alice–Bob at the channel output; the conditional
/// entropy after homodyne has three eigenvalues `ν₃, ν₄, 1`:
///
/// ```text
/// χ_line = 1/T − 1 + ξ,   χ_hom = (1 − η + v_el)/η,   χ_tot = χ_line + χ_hom/T
/// A = μ²(1 − 2T) + 2T + T²(μ + χ_line)²,   B = T²(μ χ_line + 1)²
/// C = (A χ_hom + μ sqrt(B) + T(μ + χ_line)) / (T(μ + χ_tot))
/// D = sqrt(B) (μ + sqrt(B) χ_hom) / (T(μ + χ_tot))
/// ν₁,₂² = (A ± sqrt(A² − 4B))/2,   ν₃,₄² = (C ± sqrt(C² − 4D))/2
/// χ = h(ν₁) + h(ν₂) − h(ν₃) − h(ν₄)
/// ```
pub fn holevo_bound_trusted(params: &CvParams, t: f64, xi: f64) -> Result<f64> {
    check_channel(t, xi)?;
    let mu = params.signal_variance;
    let eta = params.det_efficiency;
    let chi_line = 1.0 / t - 1.0 + xi;
    let chi_hom = (1.0 - eta + params.electronic_noise) / eta;
    let chi_tot = chi_line + chi_hom / t;

    let a = mu * mu * (1.0 - 2.0 * t) + 2.0 * t + t * t * (mu + chi_line).powi(2);
    let b = (t * (mu * chi_line + 1.0)).powi(2);
    let (nu1, nu2) = two_mode_eigenvalues(a, b);

    let sqrt_b = b.sqrt();
    let denom = t * (mu + chi_tot);
    let c = (a * chi_hom + mu * sqrt_b + t * (mu + chi_line)) / denom;
    let d = sqrt_b * (mu + sqrt_b * chi_hom) / denom;
    let (nu3, nu4) = two_mode_eigenvalues(c, d);

    let mut chi = 0.0;
    for nu in [nu1, nu2] {
        chi += bosonic_entropy(physical_eigenvalue(nu)?);
    }
    for nu in [nu3, nu4] {
        chi -= bosonic_entropy(physical_eigenvalue(nu)?);
    }
    Ok(chi.max(0.0))
}

/// Finite-size penalty `F` in bits for `n` key-generation signals.
pub fn finite_size_term(n: u64, budget: &EpsilonBudget, discretization: u32) -> Result<f64> {
    finite_size_penalty(
        n,
        budget.eps_pe(),
        budget.eps_cor(),
        budget.eps_sec(),
        discretization,
    )
}

/// [`finite_size_term`] on raw components.
///
/// ```text
/// F = sqrt(n) log2(n) sqrt(2 ln(2/ε_PE))
///   + 4 sqrt(n) log2(sqrt(2^D) + 2) sqrt(log2(8/ε_sec²))
///   − log2(ε_sec² ε_cor / 2)
/// ```
pub fn finite_size_penalty(
    n: u64,
    eps_pe: f64,
    eps_cor: f64,
    eps_sec: f64,
    discretization: u32,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::DegenerateBlock { n, m: 0 });
    }
    for (name, v) in [
        ("eps_pe", eps_pe),
        ("eps_cor", eps_cor),
        ("eps_sec", eps_sec),
    ] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::domain(name, v, "(0, 1]"));
        }
    }
    let nf = n as f64;
    let root_n = nf.sqrt();
    let estimation = root_n * nf.log2() * (2.0 * (2.0 / eps_pe).ln()).sqrt();
    let bins = (2f64.powf(discretization as f64).sqrt() + 2.0).log2();
    let smoothing = 4.0 * root_n * bins * (8.0 / (eps_sec * eps_sec)).log2().sqrt();
    let hashing = -(eps_sec * eps_sec * eps_cor / 2.0).log2();
    Ok(estimation + smoothing + hashing)
}

/// Intermediate quantities of one CV rate evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvRateBreakdown {
    pub transmissivity: f64,
    pub estimators: EstimatorModel,
    pub t_wc: f64,
    pub xi_wc: f64,
    pub n: u64,
    pub m: u64,
    pub mutual_info_bits: f64,
    pub holevo_bits: f64,
    pub r_pe_bits: f64,
    pub finite_term_bits: f64,
    pub rate_per_use: f64,
    pub rate_bits_per_sec: f64,
}

/// Composable key rate with the default estimator model. Negative rates are
/// returned as is.
pub fn cv_key_rate(params: &CvParams, budget: &EpsilonBudget) -> Result<CvRateBreakdown> {
    cv_key_rate_with(params, budget, &GaussianMle)
}

pub fn cv_key_rate_with(
    params: &CvParams,
    budget: &EpsilonBudget,
    model: &dyn EstimatorVariance,
) -> Result<CvRateBreakdown> {
    if budget.family() != Family::Cv {
        return Err(Error::FamilyMismatch {
            expected: Family::Cv,
            found: budget.family(),
        });
    }
    params.validate()?;
    let t = params.transmissivity();
    let (m, n) = params.split_block();
    let est = model.estimate(params, t, params.excess_noise, m);
    let (t_wc, xi_wc) = match worst_case_estimators(&est, budget.eps_pe(), params.xi_bound)? {
        ChannelBound::Bounded { t_wc, xi_wc } => (t_wc, xi_wc),
        ChannelBound::Degenerate { t_wc } => return Err(Error::DegenerateChannel { t_wc }),
    };
    let mutual = mutual_information(params, est.t_hat, est.xi_hat);
    let holevo = holevo_bound_trusted(params, t_wc, xi_wc)?;
    let r_pe = params.recon_efficiency * mutual - holevo;
    let finite = finite_size_term(n, budget, params.discretization)?;
    let rate_per_use = (n as f64 * r_pe - finite) / params.block_size as f64;
    Ok(CvRateBreakdown {
        transmissivity: t,
        estimators: est,
        t_wc,
        xi_wc,
        n,
        m,
        mutual_info_bits: mutual,
        holevo_bits: holevo,
        r_pe_bits: r_pe,
        finite_term_bits: finite,
        rate_per_use,
        rate_bits_per_sec: params.clock_hz * rate_per_use,
    })
}
