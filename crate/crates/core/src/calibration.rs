//! Calibrated constants and their admissible candidates.
//!
//! Two printed prefactors are ambiguous: the energy prefactor (ħ/4 vs ħ/2)
//! and the cross term of the action (2c₁ vs 4c₁). Both are settled by
//! independent numerical arbitration ([`crate::oracle::calibrate_spectrum`]
//! and [`crate::action::arbitrate_cross_factor`]) and frozen here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kappa {
    /// ħ/4, the prefactor as printed.
    Quarter,
    /// ħ/2, equal to ħΩ₁(n₁+½) + ħΩ₂(n₂+½).
    Half,
}

impl Kappa {
    pub const CANDIDATES: [Kappa; 2] = [Kappa::Quarter, Kappa::Half];

    pub fn value(self) -> f64 {
        match self {
            Kappa::Quarter => 0.25,
            Kappa::Half => 0.5,
        }
    }

    pub fn from_value(value: f64) -> Result<Self> {
        Self::CANDIDATES
            .into_iter()
            .find(|k| k.value() == value)
            .ok_or_else(|| Error::Uncalibrated(format!("kappa = {value}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossFactor {
    Two,
    Four,
}

impl CrossFactor {
    pub const CANDIDATES: [CrossFactor; 2] = [CrossFactor::Two, CrossFactor::Four];

    pub fn value(self) -> f64 {
        match self {
            CrossFactor::Two => 2.0,
            CrossFactor::Four => 4.0,
        }
    }

    pub fn from_value(value: f64) -> Result<Self> {
        Self::CANDIDATES
            .into_iter()
            .find(|k| k.value() == value)
            .ok_or_else(|| Error::Uncalibrated(format!("cross factor = {value}")))
    }
}

/// Selected by `calibrate_spectrum`; re-derived by the acceptance suite.
pub const SHIPPED_KAPPA: Kappa = Kappa::Half;

/// Selected by `arbitrate_cross_factor`; re-derived by the acceptance suite.
pub const SHIPPED_CROSS_FACTOR: CrossFactor = CrossFactor::Four;

pub(crate) fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_candidates_are_accepted() {
        assert_eq!(Kappa::from_value(0.5).unwrap(), Kappa::Half);
        assert_eq!(Kappa::from_value(0.25).unwrap(), Kappa::Quarter);
        assert!(matches!(Kappa::from_value(0.3), Err(Error::Uncalibrated(_))));
        assert_eq!(CrossFactor::from_value(4.0).unwrap(), CrossFactor::Four);
        assert!(CrossFactor::from_value(3.0).is_err());
    }
}
