//! Physical configuration and the derived frequency constants.
//!
//! Every other module reads its symbols from [`DerivedFrequencies`]; nothing
//! downstream recomputes Ω±, the normal-mode frequencies or the mode mixing
//! factors on its own.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below `DECOUPLED_THRESHOLD * max(ω₁, ω₂)` the cyclotron frequency is
/// treated as zero. The mixing factors scale like 1/ω₀ and lose all
/// significant digits under this bound.
pub const DECOUPLED_THRESHOLD: f64 = 1e-8;

fn one() -> f64 {
    1.0
}

/// Inputs of the model: a particle of mass `m` in the potential
/// ½m(ω₁²x² + ω₂²y²) and a perpendicular field of cyclotron frequency ω₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorConfig {
    #[serde(default = "one")]
    pub m: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub omega0: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

impl OscillatorConfig {
    /// Natural units (m = ħ = 1).
    pub fn new(omega1: f64, omega2: f64, omega0: f64) -> Self {
        Self {
            m: 1.0,
            omega1,
            omega2,
            omega0,
            hbar: 1.0,
        }
    }

    pub fn with_mass(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.m, "m"),
            (self.hbar, "hbar"),
            (self.omega1, "omega1"),
            (self.omega2, "omega2"),
        ];
        for (value, name) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and strictly positive, got {value}"
                )));
            }
        }
        if !(self.omega0.is_finite() && self.omega0 >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "omega0 must be finite and non-negative, got {}",
                self.omega0
            )));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = Self::from_json_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    /// The magnetic length-independent combination m/ħ.
    pub fn m_over_hbar(&self) -> f64 {
        self.m / self.hbar
    }
}

/// ω₀ = qB/(mc) in Gaussian units. Pass `light_speed = 1` for SI-style
/// inputs where the field already carries the factor.
pub fn cyclotron_frequency(charge: f64, field: f64, mass: f64, light_speed: f64) -> f64 {
    (charge * field / (mass * light_speed)).abs()
}

/// Whether the magnetic coupling is strong enough to mix the two axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Coupled,
    Decoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedFrequencies {
    /// √(ω₀² + (ω₁+ω₂)²)
    pub omega_plus: f64,
    /// √(ω₀² + (ω₁−ω₂)²)
    pub omega_minus: f64,
    /// Fast normal mode, (Ω₊+Ω₋)/2.
    pub big_omega1: f64,
    /// Slow normal mode, (Ω₊−Ω₋)/2.
    pub big_omega2: f64,
    pub gamma: f64,
    pub b: f64,
    pub c: f64,
    /// `None` in the decoupled regime.
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub regime: Regime,
}

impl DerivedFrequencies {
    pub fn lambdas(&self) -> Result<(f64, f64)> {
        match (self.lambda1, self.lambda2) {
            (Some(l1), Some(l2)) => Ok((l1, l2)),
            _ => Err(Error::DecoupledRegime("mode mixing factors Λ₁, Λ₂")),
        }
    }

    pub fn is_coupled(&self) -> bool {
        self.regime == Regime::Coupled
    }
}

pub fn derive(config: &OscillatorConfig) -> Result<DerivedFrequencies> {
    config.validate()?;
    let OscillatorConfig {
        omega1: w1,
        omega2: w2,
        omega0: w0,
        ..
    } = *config;

    let omega_plus = w0.hypot(w1 + w2);
    let omega_minus = w0.hypot(w1 - w2);
    let big_omega1 = 0.5 * (omega_plus + omega_minus);
    let big_omega2 = 0.5 * (omega_plus - omega_minus);
    let gamma = omega_plus / (w1 + w2);
    let b = w2 / w1;
    let c = 2.0 * w0 * b.sqrt() / omega_plus;

    let regime = if w0 < DECOUPLED_THRESHOLD * w1.max(w2) {
        Regime::Decoupled
    } else {
        Regime::Coupled
    };

    let (lambda1, lambda2) = match regime {
        Regime::Decoupled => (None, None),
        Regime::Coupled => {
            let sum = omega_plus + omega_minus;
            let diff = omega_plus - omega_minus;
            let l1 = (sum * sum - 4.0 * w1 * w1) / (2.0 * w0 * sum);
            let l2 = (diff * diff - 4.0 * w1 * w1) / (2.0 * w0 * diff);
            (Some(l1), Some(l2))
        }
    };

    Ok(DerivedFrequencies {
        omega_plus,
        omega_minus,
        big_omega1,
        big_omega2,
        gamma,
        b,
        c,
        lambda1,
        lambda2,
        regime,
    })
}

/// Roots ε± of the scaled quadratic form, ((1+b) ± √((1−b)² + c²))/2.
/// Multiplied by ħω₁γ/2 they give (ħ/4)(Ω₊ ± Ω₋).
pub fn quadratic_form_roots(df: &DerivedFrequencies) -> (f64, f64) {
    let disc = ((1.0 - df.b).powi(2) + df.c * df.c).sqrt();
    (0.5 * (1.0 + df.b + disc), 0.5 * (1.0 + df.b - disc))
}

fn relative(lhs: f64, rhs: f64, scale: f64) -> f64 {
    let denom = scale.max(lhs.abs()).max(rhs.abs());
    if denom == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / denom
    }
}

/// Relative residuals of the six sum/difference identities satisfied by
/// Λ₁, Λ₂ and the normal-mode frequencies, in the order
/// Λ₁+Λ₂, Λ₁−Λ₂, Λ₁Ω₁+Λ₂Ω₂, Λ₁Ω₁−Λ₂Ω₂, Λ₁Ω₂+Λ₂Ω₁, Λ₁Ω₂−Λ₂Ω₁.
///
/// Each residual is normalised by the magnitude of the individual terms, so
/// cancellation on the left-hand side does not inflate it.
///
/// The fifth identity carries a factor ω₁/ω₂ on its right-hand side; without
/// it the relation holds only for ω₁ = ω₂.
pub fn lambda_identities(df: &DerivedFrequencies, config: &OscillatorConfig) -> Result<[f64; 6]> {
    let (l1, l2) = df.lambdas()?;
    let (w1, w2, w0) = (config.omega1, config.omega2, config.omega0);
    let (op, om) = (df.omega_plus, df.omega_minus);
    let (o1, o2) = (df.big_omega1, df.big_omega2);
    let diff_sq = (w1 + w2) * (w1 - w2);

    let s = l1.abs() + l2.abs();
    let s11 = (l1 * o1).abs() + (l2 * o2).abs();
    let s12 = (l1 * o2).abs() + (l2 * o1).abs();
    Ok([
        relative(l1 + l2, -op * (w1 - w2) / (w0 * w2), s),
        relative(l1 - l2, om * (w1 + w2) / (w0 * w2), s),
        relative(l1 * o1 + l2 * o2, (w0 * w0 - diff_sq) / w0, s11),
        relative(l1 * o1 - l2 * o2, op * om / w0, s11),
        relative(l1 * o2 + l2 * o1, -(w1 / w2) * (w0 * w0 + diff_sq) / w0, s12),
        relative(l1 * o2 - l2 * o1, (w1 / w2) * op * om / w0, s12),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flagship() -> OscillatorConfig {
        OscillatorConfig::new(2.0, 2.0, 3.0)
    }

    #[test]
    fn flagship_constants_are_exact() {
        let df = derive(&flagship()).unwrap();
        assert_eq!(df.omega_plus, 5.0);
        assert_eq!(df.omega_minus, 3.0);
        assert_eq!(df.big_omega1, 4.0);
        assert_eq!(df.big_omega2, 1.0);
        assert_eq!(df.gamma, 1.25);
        assert_eq!(df.b, 1.0);
        assert!((df.c - 1.2).abs() < 1e-15);
        assert_eq!(df.lambda1, Some(1.0));
        assert_eq!(df.lambda2, Some(-1.0));
        assert!(df.is_coupled());
    }

    #[test]
    fn zero_field_is_decoupled() {
        let df = derive(&OscillatorConfig::new(3.0, 1.0, 0.0)).unwrap();
        assert_eq!(df.omega_plus, 4.0);
        assert_eq!(df.omega_minus, 2.0);
        assert_eq!(df.gamma, 1.0);
        assert_eq!(df.c, 0.0);
        assert_eq!(df.regime, Regime::Decoupled);
        assert!(df.lambda1.is_none() && df.lambda2.is_none());
        assert!(matches!(df.lambdas(), Err(Error::DecoupledRegime(_))));

        let iso = derive(&OscillatorConfig::new(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(iso.omega_plus, 2.0);
        assert_eq!(iso.omega_minus, 0.0);
        assert_eq!(iso.gamma, 1.0);
    }

    #[test]
    fn tiny_field_routes_to_decoupled_path() {
        let df = derive(&OscillatorConfig::new(2.0, 1.0, 1e-9)).unwrap();
        assert_eq!(df.regime, Regime::Decoupled);
        let df = derive(&OscillatorConfig::new(2.0, 1.0, 1e-7)).unwrap();
        assert_eq!(df.regime, Regime::Coupled);
    }

    #[test]
    fn rejects_invalid_inputs() {
        for cfg in [
            OscillatorConfig::new(0.0, 1.0, 1.0),
            OscillatorConfig::new(1.0, -1.0, 1.0),
            OscillatorConfig::new(1.0, 1.0, -0.5),
            OscillatorConfig::new(1.0, 1.0, f64::NAN),
            OscillatorConfig::new(1.0, 1.0, 1.0).with_mass(0.0),
            OscillatorConfig::new(1.0, 1.0, 1.0).with_hbar(-1.0),
        ] {
            assert!(matches!(derive(&cfg), Err(Error::InvalidConfig(_))), "{cfg:?}");
        }
    }

    #[test]
    fn flagship_identities() {
        let cfg = flagship();
        let df = derive(&cfg).unwrap();
        let (l1, l2) = df.lambdas().unwrap();
        assert_eq!(l1 * df.big_omega1 - l2 * df.big_omega2, 5.0);
        assert_eq!(l1 + l2, 0.0);
        let res = lambda_identities(&df, &cfg).unwrap();
        assert!(res.iter().all(|r| *r == 0.0), "{res:?}");
    }

    #[test]
    fn identities_fail_cleanly_without_field() {
        let cfg = OscillatorConfig::new(1.0, 2.0, 0.0);
        let df = derive(&cfg).unwrap();
        assert!(lambda_identities(&df, &cfg).is_err());
    }

    #[test]
    fn quadratic_form_roots_reproduce_half_mode_energies() {
        let cfg = OscillatorConfig::new(1.7, 0.6, 2.3);
        let df = derive(&cfg).unwrap();
        let (ep, em) = quadratic_form_roots(&df);
        let scale = 0.5 * cfg.hbar * cfg.omega1 * df.gamma;
        assert!((scale * ep - 0.25 * (df.omega_plus + df.omega_minus)).abs() < 1e-13);
        assert!((scale * em - 0.25 * (df.omega_plus - df.omega_minus)).abs() < 1e-13);
    }

    #[test]
    fn json_defaults() {
        let cfg = OscillatorConfig::from_json_str(r#"{"omega1": 2, "omega2": 2, "omega0": 3}"#).unwrap();
        assert_eq!(cfg, flagship());
        let cfg =
            OscillatorConfig::from_json_str(r#"{"m": 2.5, "omega1": 1, "omega2": 3, "omega0": 0, "hbar": 0.5}"#)
                .unwrap();
        assert_eq!(cfg.m, 2.5);
        assert_eq!(cfg.hbar, 0.5);
    }

    #[test]
    fn cyclotron_helper() {
        assert_eq!(cyclotron_frequency(2.0, 3.0, 1.5, 1.0), 4.0);
        assert_eq!(cyclotron_frequency(-2.0, 3.0, 1.5, 2.0), 2.0);
    }

    #[test]
    fn fifth_identity_needs_frequency_ratio() {
        // Without the ω₁/ω₂ factor the relation survives only when ω₁ = ω₂.
        let without_ratio = |cfg: &OscillatorConfig| {
            let df = derive(cfg).unwrap();
            let (l1, l2) = df.lambdas().unwrap();
            let (w1, w2, w0) = (cfg.omega1, cfg.omega2, cfg.omega0);
            let lhs = l1 * df.big_omega2 + l2 * df.big_omega1;
            (lhs + (w0 * w0 + (w1 + w2) * (w1 - w2)) / w0).abs() / lhs.abs()
        };
        assert!(without_ratio(&flagship()) < 1e-14);
        assert!(without_ratio(&OscillatorConfig::new(3.0, 1.0, 2.0)) > 0.1);
    }

    proptest! {
        #[test]
        fn gamma_times_sum_is_omega_plus(w1 in 0.1f64..10.0, w2 in 0.1f64..10.0, w0 in 0.0f64..10.0) {
            let df = derive(&OscillatorConfig::new(w1, w2, w0)).unwrap();
            prop_assert!((df.gamma * (w1 + w2) - df.omega_plus).abs() <= 4.0 * f64::EPSILON * df.omega_plus);
            prop_assert!(df.gamma >= 1.0);
            prop_assert!(df.omega_plus >= df.omega_minus);
        }

        #[test]
        fn identities_hold(w1 in 0.1f64..10.0, w2 in 0.1f64..10.0, w0 in 0.1f64..10.0) {
            let cfg = OscillatorConfig::new(w1, w2, w0);
            let df = derive(&cfg).unwrap();
            let res = lambda_identities(&df, &cfg).unwrap();
            for r in res {
                prop_assert!(r < 1e-12, "{res:?}");
            }
        }

        #[test]
        fn omegas_increase_with_field(w1 in 0.1f64..10.0, w2 in 0.1f64..10.0, w0 in 0.0f64..10.0, dw in 1e-3f64..1.0) {
            let lo = derive(&OscillatorConfig::new(w1, w2, w0)).unwrap();
            let hi = derive(&OscillatorConfig::new(w1, w2, w0 + dw)).unwrap();
            prop_assert!(hi.omega_plus > lo.omega_plus);
            prop_assert!(hi.omega_minus > lo.omega_minus);
        }
    }
}
