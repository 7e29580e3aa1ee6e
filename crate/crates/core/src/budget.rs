//! The total ε-security constraint and its decomposition.
//!
//! For the CV homodyne protocol the components satisfy
//! `ε = 3·ε_PE + ε_cor + ε_sec` (the entropy-estimation penalty is tied to
//! `ε_PE`, hence the factor 3); for single-photon BB84 they satisfy
//! `ε = ε_PE + ε_cor + ε_sec`. In both cases `ε_sec = ε_s + ε_h` with the
//! smoothing and hashing parts split evenly.
//!
//! Infeasible splits are values, not errors: the optimizer has to score them.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smallest admissible value for any ε component.
pub const EPS_FLOOR: f64 = 1e-21;

/// Relative tolerance on re-summing the components to the total.
pub const CONSTRAINT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Gaussian-modulated coherent states with homodyne detection.
    #[serde(alias = "CV")]
    Cv,
    /// Single-photon BB84.
    #[serde(alias = "DV")]
    Dv,
}

impl Family {
    /// Multiplicity of `ε_PE` in the total constraint.
    pub fn pe_weight(self) -> f64 {
        match self {
            Family::Cv => 3.0,
            Family::Dv => 1.0,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Cv => "cv",
            Family::Dv => "dv",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cv" => Ok(Family::Cv),
            "dv" => Ok(Family::Dv),
            other => Err(format!(
                "unknown protocol family '{other}' (expected cv or dv)"
            )),
        }
    }
}

/// A fully populated, constraint-satisfying split of the total ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonBudget {
    total: f64,
    eps_pe: f64,
    eps_cor: f64,
    eps_sec: f64,
    family: Family,
}

impl EpsilonBudget {
    /// Builds a budget from explicit components; the total is whatever the
    /// family constraint makes of them. Each component must be at least
    /// [`EPS_FLOOR`] and the resulting total must stay below 1.
    pub fn from_components(
        family: Family,
        eps_pe: f64,
        eps_cor: f64,
        eps_sec: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("eps_pe", eps_pe),
            ("eps_cor", eps_cor),
            ("eps_sec", eps_sec),
        ] {
            if !(EPS_FLOOR..1.0).contains(&v) {
                return Err(Error::domain(name, v, "[1e-21, 1)"));
            }
        }
        let total = family.pe_weight() * eps_pe + eps_cor + eps_sec;
        if total >= 1.0 {
            return Err(Error::domain("total", total, "(0, 1)"));
        }
        Ok(EpsilonBudget {
            total,
            eps_pe,
            eps_cor,
            eps_sec,
            family,
        })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn eps_pe(&self) -> f64 {
        self.eps_pe
    }

    pub fn eps_cor(&self) -> f64 {
        self.eps_cor
    }

    pub fn eps_sec(&self) -> f64 {
        self.eps_sec
    }

    /// Smoothing part of `ε_sec`.
    pub fn eps_s(&self) -> f64 {
        self.eps_sec / 2.0
    }

    /// Hashing part of `ε_sec`.
    pub fn eps_h(&self) -> f64 {
        self.eps_sec / 2.0
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// `|weighted sum − total| / total`.
    pub fn constraint_residual(&self) -> f64 {
        let sum = self.family.pe_weight() * self.eps_pe + self.eps_cor + self.eps_sec;
        (sum - self.total).abs() / self.total
    }
}

/// Outcome of solving the total constraint for `ε_sec`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reconstruction {
    Feasible(EpsilonBudget),
    /// The remaining secrecy budget fell below the floor.
    Infeasible {
        eps_sec: f64,
    },
}

impl Reconstruction {
    pub fn feasible(self) -> Option<EpsilonBudget> {
        match self {
            Reconstruction::Feasible(b) => Some(b),
            Reconstruction::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Reconstruction::Feasible(_))
    }
}

fn check_total(total: f64) -> Result<()> {
    if total > 0.0 && total < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("total", total, "(0, 1)"))
    }
}

/// Solves the family constraint for `ε_sec` given `ε_PE` and `ε_cor`.
pub fn reconstruct_sec(
    total: f64,
    eps_pe: f64,
    eps_cor: f64,
    family: Family,
) -> Result<Reconstruction> {
    check_total(total)?;
    for (name, v) in [("eps_pe", eps_pe), ("eps_cor", eps_cor)] {
        if !(v >= EPS_FLOOR) {
            return Err(Error::domain(name, v, ">= 1e-21"));
        }
    }
    let eps_sec = total - family.pe_weight() * eps_pe - eps_cor;
    if eps_sec < EPS_FLOOR {
        return Ok(Reconstruction::Infeasible { eps_sec });
    }
    Ok(Reconstruction::Feasible(EpsilonBudget {
        total,
        eps_pe,
        eps_cor,
        eps_sec,
        family,
    }))
}

/// Physical range `[lower, upper)` that a normalized gene maps onto.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneBounds {
    pub lower: f64,
    pub upper: f64,
}

impl GeneBounds {
    /// `[1e-21, total)`.
    pub fn for_total(total: f64) -> Result<Self> {
        check_total(total)?;
        if total <= EPS_FLOOR {
            return Err(Error::domain("total", total, "> 1e-21"));
        }
        Ok(GeneBounds {
            lower: EPS_FLOOR,
            upper: total,
        })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Linear map from a normalized gene in `[-1, 1]` to `[lower, upper]`.
pub fn map_gene(p: f64, bounds: GeneBounds) -> Result<f64> {
    if !(-1.0..=1.0).contains(&p) {
        return Err(Error::domain("gene", p, "[-1, 1]"));
    }
    Ok((p + 1.0) / 2.0 * bounds.width() + bounds.lower)
}

/// Inverse of [`map_gene`].
pub fn unmap_gene(x: f64, bounds: GeneBounds) -> Result<f64> {
    if !(x >= bounds.lower && x <= bounds.upper) {
        return Err(Error::domain("x", x, "[lower, upper]"));
    }
    Ok(2.0 * (x - bounds.lower) / bounds.width() - 1.0)
}

/// Label attached to each standard comparison split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Symmetric,
    Asymmetric,
}

impl std::fmt::Display for Baseline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Baseline::Symmetric => "symmetric",
            Baseline::Asymmetric => "asymmetric",
        })
    }
}

/// The two fixed splits every optimized budget is compared against.
///
/// CV: `ε/5` for all three, and `(ε/10, 2ε/5, 3ε/10)`.
/// DV: `ε/3` for all three, and `(5ε, 90ε, 4.5ε)/99.5`.
pub fn baseline_budgets(total: f64, family: Family) -> Result<Vec<(Baseline, EpsilonBudget)>> {
    check_total(total)?;
    let (sym, asym) = match family {
        Family::Cv => (
            (total / 5.0, total / 5.0),
            (total / 10.0, 2.0 * total / 5.0),
        ),
        Family::Dv => (
            (total / 3.0, total / 3.0),
            (5.0 * total / 99.5, 90.0 * total / 99.5),
        ),
    };
    let build = |(pe, cor): (f64, f64)| -> Result<EpsilonBudget> {
        reconstruct_sec(total, pe, cor, family)?
            .feasible()
            .ok_or_else(|| Error::domain("total", total, "large enough for the baseline split"))
    };
    Ok(vec![
        (Baseline::Symmetric, build(sym)?),
        (Baseline::Asymmetric, build(asym)?),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn reconstruct_cv_linear() {
        let b = reconstruct_sec(1e-5, 1e-6, 1e-6, Family::Cv)
            .unwrap()
            .feasible()
            .unwrap();
        assert_relative_eq!(b.eps_sec(), 6e-6, max_relative = 1e-12);
        assert_relative_eq!(b.eps_s(), 3e-6, max_relative = 1e-12);
        assert_eq!(b.eps_s(), b.eps_h());
        assert_eq!(b.eps_s() + b.eps_h(), b.eps_sec());
    }

    #[test]
    fn reconstruct_infeasible_when_overspent() {
        let e = 1e-10;
        match reconstruct_sec(e, e / 2.0, e / 2.0, Family::Cv).unwrap() {
            Reconstruction::Infeasible { eps_sec } => {
                assert_relative_eq!(eps_sec, -e, max_relative = 1e-12)
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn reconstruct_dv_asymmetric() {
        let e = 1e-17;
        let b = reconstruct_sec(e, 5.0 * e / 99.5, 90.0 * e / 99.5, Family::Dv)
            .unwrap()
            .feasible()
            .unwrap();
        assert_relative_eq!(b.eps_sec(), 4.5 * e / 99.5, max_relative = 1e-9);
    }

    #[test]
    fn reconstruct_rejects_bad_inputs() {
        assert!(reconstruct_sec(0.0, 1e-20, 1e-20, Family::Cv).is_err());
        assert!(reconstruct_sec(1.0, 1e-20, 1e-20, Family::Cv).is_err());
        assert!(reconstruct_sec(1e-5, 1e-22, 1e-20, Family::Cv).is_err());
        assert!(reconstruct_sec(1e-5, 1e-20, f64::NAN, Family::Dv).is_err());
    }

    #[test]
    fn floor_is_closed() {
        // ε_sec landing exactly on the floor is still feasible
        let total = 5e-21;
        let r = reconstruct_sec(total, 1e-21, 1e-21, Family::Cv).unwrap();
        assert!(r.is_feasible());
    }

    #[test]
    fn map_gene_endpoints() {
        let b = GeneBounds::for_total(1e-5).unwrap();
        assert_eq!(map_gene(-1.0, b).unwrap(), 1e-21);
        assert_relative_eq!(map_gene(1.0, b).unwrap(), 1e-5, max_relative = 1e-15);
        assert_relative_eq!(
            map_gene(0.0, b).unwrap(),
            (1e-21 + 1e-5) / 2.0,
            max_relative = 1e-15
        );
        assert!(map_gene(1.0000001, b).is_err());
        assert!(map_gene(-1.5, b).is_err());
    }

    #[test]
    fn baselines_match_published_splits() {
        let cv = baseline_budgets(1e-10, Family::Cv).unwrap();
        let (label, sym) = cv[0];
        assert_eq!(label, Baseline::Symmetric);
        for v in [sym.eps_pe(), sym.eps_cor(), sym.eps_sec()] {
            assert_relative_eq!(v, 2e-11, max_relative = 1e-12);
        }
        let (label, asym) = cv[1];
        assert_eq!(label, Baseline::Asymmetric);
        assert_relative_eq!(asym.eps_pe(), 1e-11, max_relative = 1e-12);
        assert_relative_eq!(asym.eps_cor(), 4e-11, max_relative = 1e-12);
        assert_relative_eq!(asym.eps_sec(), 3e-11, max_relative = 1e-12);

        let dv = baseline_budgets(3e-18, Family::Dv).unwrap();
        for v in [dv[0].1.eps_pe(), dv[0].1.eps_cor(), dv[0].1.eps_sec()] {
            assert_relative_eq!(v, 1e-18, max_relative = 1e-12);
        }
        assert_relative_eq!(dv[1].1.eps_sec(), 4.5 * 3e-18 / 99.5, max_relative = 1e-12);
    }

    #[test]
    fn baseline_below_floor_is_error() {
        assert!(baseline_budgets(1e-20, Family::Dv).is_err());
        assert!(baseline_budgets(4e-21, Family::Cv).is_err());
    }

    proptest! {
        #[test]
        fn constraint_closure(log_total in -20.0f64..-1.0, a in 0.0f64..1.0, b in 0.0f64..1.0, cv in any::<bool>()) {
            let total = 10f64.powf(log_total);
            let family = if cv { Family::Cv } else { Family::Dv };
            let pe = (EPS_FLOOR).max(a * total / family.pe_weight());
            let cor = (EPS_FLOOR).max(b * total);
            if let Reconstruction::Feasible(budget) = reconstruct_sec(total, pe, cor, family).unwrap() {
                prop_assert!(budget.constraint_residual() <= CONSTRAINT_RTOL);
                prop_assert!(budget.eps_sec() >= EPS_FLOOR);
            }
        }

        #[test]
        fn gene_map_round_trip(log_total in -20.0f64..-1.0, p in -1.0f64..=1.0) {
            let bounds = GeneBounds::for_total(10f64.powf(log_total)).unwrap();
            let x = map_gene(p, bounds).unwrap();
            prop_assert!(x >= bounds.lower && x <= bounds.upper);
            let back = unmap_gene(x, bounds).unwrap();
            prop_assert!((back - p).abs() <= 1e-12 * p.abs().max(1.0));
        }

        #[test]
        fn gene_map_monotone(p in -1.0f64..1.0, dp in 1e-6f64..1e-2) {
            let bounds = GeneBounds::for_total(1e-8).unwrap();
            let q = (p + dp).min(1.0);
            prop_assert!(map_gene(q, bounds).unwrap() >= map_gene(p, bounds).unwrap());
        }

        #[test]
        // the smallest baseline share is 4.5/99.5, so below ~2.2e-20 a split hits the floor
        fn baselines_always_feasible(log_total in -19.6f64..-0.1, cv in any::<bool>()) {
            let total = 10f64.powf(log_total);
            let family = if cv { Family::Cv } else { Family::Dv };
            for (_, b) in baseline_budgets(total, family).unwrap() {
                prop_assert!(reconstruct_sec(total, b.eps_pe(), b.eps_cor(), family).unwrap().is_feasible());
                prop_assert!(b.constraint_residual() <= CONSTRAINT_RTOL);
            }
        }
    }
}
