//! Energy levels and the Cartesian ↔ Landau quantum-number map.

use serde::{Deserialize, Serialize};

use crate::calibration::Kappa;
use crate::error::{Error, Result};
use crate::model::{derive, DerivedFrequencies, OscillatorConfig};

/// Occupation numbers of the fast (Ω₁) and slow (Ω₂) normal modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LevelIndex {
    pub n1: u32,
    pub n2: u32,
}

impl LevelIndex {
    pub fn new(n1: u32, n2: u32) -> Self {
        Self { n1, n2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LandauLabel {
    pub n_r: u32,
    pub m: i64,
}

fn bracket(idx: LevelIndex, df: &DerivedFrequencies) -> f64 {
    let (n1, n2) = (f64::from(idx.n1), f64::from(idx.n2));
    df.omega_plus * (n1 + n2 + 1.0) + df.omega_minus * (n1 - n2)
}

/// (ħ/4){Ω₊(n₁+n₂+1) + Ω₋(n₁−n₂)}, reproduced verbatim.
pub fn energy_as_printed(idx: LevelIndex, df: &DerivedFrequencies, config: &OscillatorConfig) -> f64 {
    0.25 * config.hbar * bracket(idx, df)
}

/// ħκ{Ω₊(n₁+n₂+1) + Ω₋(n₁−n₂)} with a calibrated κ.
pub fn energy_canonical(
    idx: LevelIndex,
    df: &DerivedFrequencies,
    config: &OscillatorConfig,
    kappa: Kappa,
) -> f64 {
    kappa.value() * config.hbar * bracket(idx, df)
}

/// Same as [`energy_canonical`] but takes κ as a raw number, rejecting
/// anything that is not an admissible candidate.
pub fn energy_canonical_raw(
    idx: LevelIndex,
    df: &DerivedFrequencies,
    config: &OscillatorConfig,
    kappa: f64,
) -> Result<f64> {
    Ok(energy_canonical(idx, df, config, Kappa::from_value(kappa)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub index: LevelIndex,
    pub landau: LandauLabel,
    pub energy_printed: f64,
    pub energy_canonical: f64,
}

/// Relative width below which two energies count as degenerate when sorting.
const TIE_TOLERANCE: f64 = 1e-12;

/// The `count` lowest levels, ascending; degenerate levels are ordered by
/// (n₁, n₂).
pub fn levels_sorted(config: &OscillatorConfig, count: usize, kappa: Kappa) -> Result<Vec<Level>> {
    if count == 0 {
        return Err(Error::InvalidArgument("level count must be at least 1".into()));
    }
    let df = derive(config)?;
    // Energies grow in each quantum number, so the lowest `count` levels
    // have n1, n2 < count.
    let n_max = u32::try_from(count).map_err(|_| Error::InvalidArgument("level count too large".into()))?;
    let mut all: Vec<Level> = (0..n_max)
        .flat_map(|n1| (0..n_max).map(move |n2| LevelIndex::new(n1, n2)))
        .map(|index| Level {
            index,
            landau: landau_map(index),
            energy_printed: energy_as_printed(index, &df, config),
            energy_canonical: energy_canonical(index, &df, config, kappa),
        })
        .collect();
    all.sort_by(|a, b| a.energy_canonical.total_cmp(&b.energy_canonical));

    // Regroup near-equal energies and order each cluster lexicographically.
    let mut start = 0;
    while start < all.len() {
        let mut end = start + 1;
        while end < all.len() {
            let (e0, e1) = (all[end - 1].energy_canonical, all[end].energy_canonical);
            if (e1 - e0).abs() > TIE_TOLERANCE * e1.abs().max(e0.abs()) {
                break;
            }
            end += 1;
        }
        all[start..end].sort_by_key(|l| l.index);
        start = end;
    }
    all.truncate(count);
    Ok(all)
}

pub fn landau_map(idx: LevelIndex) -> LandauLabel {
    LandauLabel {
        n_r: idx.n1.min(idx.n2),
        m: i64::from(idx.n1) - i64::from(idx.n2),
    }
}

pub fn landau_inverse(label: LandauLabel) -> Result<LevelIndex> {
    let shift = u32::try_from(label.m.unsigned_abs())
        .map_err(|_| Error::InvalidArgument(format!("magnetic quantum number {} out of range", label.m)))?;
    let (n1, n2) = if label.m >= 0 {
        (label.n_r + shift, label.n_r)
    } else {
        (label.n_r, label.n_r + shift)
    };
    Ok(LevelIndex::new(n1, n2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive;

    fn flagship() -> OscillatorConfig {
        OscillatorConfig::new(2.0, 2.0, 3.0)
    }

    #[test]
    fn printed_energies() {
        let cfg = flagship();
        let df = derive(&cfg).unwrap();
        assert_eq!(energy_as_printed(LevelIndex::new(0, 0), &df, &cfg), 1.25);
        assert_eq!(energy_as_printed(LevelIndex::new(1, 0), &df, &cfg), 3.25);

        let free = OscillatorConfig::new(1.0, 1.0, 0.0);
        let df = derive(&free).unwrap();
        assert_eq!(energy_as_printed(LevelIndex::new(0, 0), &df, &free), 0.5);
    }

    #[test]
    fn canonical_energies() {
        let free = OscillatorConfig::new(1.0, 1.0, 0.0);
        let df = derive(&free).unwrap();
        assert_eq!(energy_canonical(LevelIndex::new(0, 0), &df, &free, Kappa::Half), 1.0);

        let cfg = flagship();
        let df = derive(&cfg).unwrap();
        assert_eq!(energy_canonical(LevelIndex::new(0, 0), &df, &cfg, Kappa::Half), 2.5);
        assert!(matches!(
            energy_canonical_raw(LevelIndex::new(0, 0), &df, &cfg, 0.4),
            Err(Error::Uncalibrated(_))
        ));
        assert_eq!(energy_canonical_raw(LevelIndex::new(0, 0), &df, &cfg, 0.25).unwrap(), 1.25);
    }

    #[test]
    fn half_kappa_is_sum_of_mode_energies() {
        let cfg = OscillatorConfig::new(1.3, 0.4, 2.2).with_hbar(0.7);
        let df = derive(&cfg).unwrap();
        for n1 in 0..5 {
            for n2 in 0..5 {
                let e = energy_canonical(LevelIndex::new(n1, n2), &df, &cfg, Kappa::Half);
                let modes = cfg.hbar
                    * (df.big_omega1 * (f64::from(n1) + 0.5) + df.big_omega2 * (f64::from(n2) + 0.5));
                assert!((e - modes).abs() < 1e-12 * modes);
            }
        }
    }

    #[test]
    fn decoupled_limit_is_exact() {
        // Mode 1 is the faster axis; with ω₁ ≥ ω₂ that is x.
        for (w1, w2) in [(1.0, 1.0), (2.0, 0.5), (3.0, 1.0)] {
            let cfg = OscillatorConfig::new(w1, w2, 0.0);
            let df = derive(&cfg).unwrap();
            for n1 in 0..6u32 {
                for n2 in 0..6u32 {
                    let e = energy_canonical(LevelIndex::new(n1, n2), &df, &cfg, Kappa::Half);
                    let exact = w1 * (f64::from(n1) + 0.5) + w2 * (f64::from(n2) + 0.5);
                    assert!((e - exact).abs() <= 4.0 * f64::EPSILON * exact);
                }
            }
        }
        // With ω₁ < ω₂ the fast mode is the y axis.
        let cfg = OscillatorConfig::new(0.5, 2.0, 0.0);
        let df = derive(&cfg).unwrap();
        let e = energy_canonical(LevelIndex::new(1, 0), &df, &cfg, Kappa::Half);
        assert!((e - (2.0 * 1.5 + 0.5 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn isotropic_free_degeneracy() {
        let levels = levels_sorted(&OscillatorConfig::new(1.0, 1.0, 0.0), 3, Kappa::Half).unwrap();
        let energies: Vec<f64> = levels.iter().map(|l| l.energy_canonical).collect();
        assert_eq!(energies, vec![1.0, 2.0, 2.0]);
        assert_eq!(levels[1].index, LevelIndex::new(0, 1));
        assert_eq!(levels[2].index, LevelIndex::new(1, 0));
    }

    #[test]
    fn field_splits_degeneracy() {
        let cfg = flagship();
        let df = derive(&cfg).unwrap();
        for kappa in Kappa::CANDIDATES {
            for (n1, n2) in [(1u32, 0u32), (3, 1), (0, 4)] {
                let a = energy_canonical(LevelIndex::new(n1, n2), &df, &cfg, kappa);
                let b = energy_canonical(LevelIndex::new(n2, n1), &df, &cfg, kappa);
                let expected = 2.0 * kappa.value() * df.omega_minus * f64::from(n1.abs_diff(n2));
                assert!(((a - b).abs() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flagship_ladder() {
        let levels = levels_sorted(&flagship(), 6, Kappa::Half).unwrap();
        let energies: Vec<f64> = levels.iter().map(|l| l.energy_canonical).collect();
        assert_eq!(energies, vec![2.5, 3.5, 4.5, 5.5, 6.5, 6.5]);
        assert_eq!(levels[4].index, LevelIndex::new(0, 4));
        assert_eq!(levels[5].index, LevelIndex::new(1, 0));
        assert!(levels_sorted(&flagship(), 0, Kappa::Half).is_err());
    }

    #[test]
    fn landau_labels() {
        assert_eq!(landau_map(LevelIndex::new(3, 1)), LandauLabel { n_r: 1, m: 2 });
        assert_eq!(landau_map(LevelIndex::new(0, 0)), LandauLabel { n_r: 0, m: 0 });
        let l = landau_map(LevelIndex::new(0, 2));
        assert_eq!(l, LandauLabel { n_r: 0, m: -2 });
        assert_eq!(2 * l.n_r + l.m.unsigned_abs() as u32, 2);
    }

    #[test]
    fn landau_round_trip() {
        for n1 in 0..=50 {
            for n2 in 0..=50 {
                let idx = LevelIndex::new(n1, n2);
                let label = landau_map(idx);
                assert_eq!(i64::from(n1 + n2), 2 * i64::from(label.n_r) + label.m.abs());
                assert_eq!(landau_inverse(label).unwrap(), idx);
            }
        }
    }
}
