//! The compound free Poisson law that the spectrum of `R/n` converges to in
//! the second unbalanced regime.
//!
//! The law `mu_{k,c}` is the compound free Poisson distribution with base
//! measure `c delta_{1-k} + c(k^2-1) delta_1`; its free cumulants are
//! `kappa_p = c[(1-k)^p + k^2 - 1]`. This module evaluates its Cauchy
//! transform, density (Stieltjes inversion), atom, support endpoints (roots of
//! a quartic discriminant), the six-region phase classification, and the
//! threshold curves compared against the PPT criterion.
//!
//! `k` is treated as a real parameter `>= 2` throughout; restricting to
//! integers is the caller's business.

mod cauchy;
mod support;

pub use cauchy::CdfTable;
pub use support::{
    curve_c0, curve_c1, curve_c2, curve_intersection_k0, descartes_all_positive, threshold_ppt,
    threshold_red, threshold_simultaneous, QuarticDiscriminant, Region, SupportReport,
};

use crate::error::{Error, Result};
use crate::moments;

/// The limiting law `mu_{k,c}` with real `k >= 2` and `c > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompoundFreePoissonLaw {
    k: f64,
    c: f64,
}

impl CompoundFreePoissonLaw {
    pub fn new(k: f64, c: f64) -> Result<Self> {
        if !k.is_finite() || k < 2.0 {
            return Err(Error::InvalidParameter(format!(
                "law requires real k >= 2, got {k}"
            )));
        }
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "law requires c > 0, got {c}"
            )));
        }
        Ok(Self { k, c })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Mass of the only possible atom, at 0: `max(0, 1 - c k^2)`.
    pub fn atom_mass(&self) -> f64 {
        (1.0 - self.c * self.k * self.k).max(0.0)
    }

    /// First moment `c k (k-1)`; always positive, which is why the support
    /// can never sit entirely on the negative half-line.
    pub fn mean(&self) -> f64 {
        self.c * self.k * (self.k - 1.0)
    }

    /// Free cumulant `kappa_p`.
    pub fn free_cumulant(&self, p: usize) -> f64 {
        moments::free_cumulant(self.k, self.c, p)
    }

    /// Moment `m_p` via the non-crossing moment-cumulant sum.
    pub fn moment(&self, p: usize) -> Result<f64> {
        moments::limit_moment(moments::Regime::UnbalancedSecond, self.k, self.c, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_validates_parameters() {
        assert!(CompoundFreePoissonLaw::new(2.0, 0.1).is_ok());
        assert!(CompoundFreePoissonLaw::new(1.9, 0.1).is_err());
        assert!(CompoundFreePoissonLaw::new(3.0, 0.0).is_err());
        assert!(CompoundFreePoissonLaw::new(3.0, -1.0).is_err());
        assert!(CompoundFreePoissonLaw::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn atom_mass_examples() {
        let law = CompoundFreePoissonLaw::new(3.0, 1.0 / 18.0).unwrap();
        assert!((law.atom_mass() - 0.5).abs() < 1e-15);
        assert_eq!(CompoundFreePoissonLaw::new(3.0, 2.0).unwrap().atom_mass(), 0.0);
        // boundary c = 1/k^2 exactly
        assert_eq!(CompoundFreePoissonLaw::new(2.0, 0.25).unwrap().atom_mass(), 0.0);
    }
}
