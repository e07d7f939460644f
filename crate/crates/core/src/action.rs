//! Classical action: the nine coefficient functions, the boundary-term and
//! closed-form routes, caustic detection and the cross-term arbitration.

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calibration::{unix_timestamp, CrossFactor};
use crate::classical::{endpoint_velocities, Endpoints};
use crate::error::{Error, Result};
use crate::model::{derive, DerivedFrequencies, OscillatorConfig, Regime};

/// Coefficient functions of the closed-form action at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
    pub f1: f64,
    pub f2: f64,
    pub big_d: f64,
}

/// Below this value of Ω₋T the ratio (Ω₊/Ω₋)sin²(Ω₋T/2) is evaluated as
/// Ω₊Ω₋T²/4 · sinc²(Ω₋T/2).
pub const SMALL_OMEGA_MINUS: f64 = 1e-4;

/// |D(T)| below `CAUSTIC_THRESHOLD·(ω₁+ω₂)²·max(1, Ω₋/Ω₊)` is a caustic.
pub const CAUSTIC_THRESHOLD: f64 = 1e-9;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// (num/den)·sin²(den·t/2), finite as den → 0.
fn ratio_sin_sq(num: f64, den: f64, t: f64) -> f64 {
    let x = den * t;
    if x.abs() < SMALL_OMEGA_MINUS {
        let s = sinc(0.5 * x);
        0.25 * num * den * t * t * s * s
    } else {
        let s = (0.5 * x).sin();
        num / den * s * s
    }
}

pub fn coefficients(df: &DerivedFrequencies, config: &OscillatorConfig, t: f64) -> ActionCoefficients {
    let (w1, w2, w0) = (config.omega1, config.omega2, config.omega0);
    let (op, om) = (df.omega_plus, df.omega_minus);
    let (sum, diff) = (w1 + w2, w1 - w2);
    let (sp, cp) = (0.5 * op * t).sin_cos();
    let (sm, cm) = (0.5 * om * t).sin_cos();
    let (s_full_p, s_full_m) = ((op * t).sin(), (om * t).sin());

    // (Ω₊/Ω₋)sin²(Ω₋T/2) and (Ω₋/Ω₊)sin²(Ω₊T/2)
    let r_minus = ratio_sin_sq(op, om, t);
    let r_plus = om / op * sp * sp;

    ActionCoefficients {
        a1: 0.5 * w1 * (om * sum * s_full_p - op * diff * s_full_m),
        a2: 0.5 * w2 * (om * sum * s_full_p + op * diff * s_full_m),
        b1: w1 * (om * sum * sp * cm - op * diff * cp * sm),
        b2: w2 * (om * sum * sp * cm + op * diff * cp * sm),
        c1: w0 * w1 * w2 * sp * sm,
        c2: w0 * sum * diff * (r_minus - r_plus),
        f1: w0 * w2 * (diff * r_minus + sum * r_plus),
        f2: w0 * w1 * (diff * r_minus - sum * r_plus),
        big_d: sum * sum * r_plus - diff * diff * r_minus,
    }
}

/// Coefficient traces over a time grid (data-parallel).
pub fn coefficient_trace(
    df: &DerivedFrequencies,
    config: &OscillatorConfig,
    times: &[f64],
) -> Vec<ActionCoefficients> {
    times.par_iter().map(|&t| coefficients(df, config, t)).collect()
}

/// Factors whose zeros are the caustic times. In the coupled regime
/// D = f₊f₋/(Ω₊Ω₋) with f± = (ω₁+ω₂)Ω₋ sin(Ω₊t/2) ± (ω₁−ω₂)Ω₊ sin(Ω₋t/2),
/// which turns the double roots of D (isotropic case) into simple ones.
fn caustic_factors(df: &DerivedFrequencies, config: &OscillatorConfig) -> Vec<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    let (w1, w2) = (config.omega1, config.omega2);
    match df.regime {
        Regime::Coupled => {
            let (op, om) = (df.omega_plus, df.omega_minus);
            let u = (w1 + w2) * om;
            let v = (w1 - w2) * op;
            vec![
                Box::new(move |t: f64| u * (0.5 * op * t).sin() + v * (0.5 * om * t).sin()),
                Box::new(move |t: f64| u * (0.5 * op * t).sin() - v * (0.5 * om * t).sin()),
            ]
        }
        Regime::Decoupled => vec![
            Box::new(move |t: f64| (w1 * t).sin()),
            Box::new(move |t: f64| (w2 * t).sin()),
        ],
    }
}

fn scan_step(df: &DerivedFrequencies, config: &OscillatorConfig) -> f64 {
    let fastest = match df.regime {
        Regime::Coupled => df.omega_plus.max(df.omega_minus),
        Regime::Decoupled => config.omega1.max(config.omega2),
    };
    std::f64::consts::PI / fastest / 20.0
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimum of |f| on [lo, hi].
fn touch_point(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    while hi - lo > 1e-12 {
        if f(a).abs() < f(b).abs() {
            hi = b;
            b = a;
            a = hi - g * (hi - lo);
        } else {
            lo = a;
            a = b;
            b = lo + g * (hi - lo);
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f(t).abs())
}

/// All caustic times in `[t_lo, t_hi]`, ascending; t = 0 is excluded.
pub fn caustics(df: &DerivedFrequencies, config: &OscillatorConfig, window: (f64, f64)) -> Vec<f64> {
    let (t_lo, t_hi) = (window.0.max(0.0), window.1);
    if !(t_hi > t_lo) {
        return Vec::new();
    }
    let step = scan_step(df, config);
    let n = ((t_hi - t_lo) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| (t_lo + step * i as f64).min(t_hi)).collect();

    let mut roots = Vec::new();
    for f in caustic_factors(df, config) {
        let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for i in 0..grid.len() {
            if values[i] == 0.0 {
                roots.push(grid[i]);
                continue;
            }
            if i + 1 < grid.len() && values[i + 1] != 0.0 && (values[i] > 0.0) != (values[i + 1] > 0.0) {
                roots.push(bisect(f.as_ref(), grid[i], grid[i + 1]));
            }
            // Tangential zero without a sign change.
            if i >= 1 && i + 1 < grid.len() {
                let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
                let same_sign = (l > 0.0) == (c > 0.0) && (c > 0.0) == (r > 0.0);
                if same_sign && c.abs() <= l.abs() && c.abs() <= r.abs() {
                    let (t, fmin) = touch_point(f.as_ref(), grid[i - 1], grid[i + 1]);
                    if fmin < 1e-10 * scale {
                        roots.push(t);
                    }
                }
            }
        }
    }
    roots.retain(|&t| t > 1e-9 && t >= t_lo - 1e-12 && t <= t_hi + 1e-12);
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    roots
}

/// Earliest positive caustic time; the kernel is valid on (0, first).
pub fn first_caustic(df: &DerivedFrequencies, config: &OscillatorConfig) -> f64 {
    let bound = match df.regime {
        // f₋ changes sign (or touches zero) no later than 2π/Ω₊.
        Regime::Coupled => 2.0 * std::f64::consts::PI / df.omega_plus,
        Regime::Decoupled => std::f64::consts::PI / config.omega1.max(config.omega2),
    };
    caustics(df, config, (0.0, 1.01 * bound))
        .first()
        .copied()
        .unwrap_or(bound)
}

/// Up to four caustic times closest to `t`, ascending.
pub fn nearest_caustics(df: &DerivedFrequencies, config: &OscillatorConfig, t: f64) -> Vec<f64> {
    let first = first_caustic(df, config);
    let mut all = caustics(df, config, (0.0, t.max(0.0) + 2.0 * first));
    all.sort_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()));
    all.truncate(4);
    all.sort_by(f64::total_cmp);
    all
}

/// The function whose zeros are caustics, with its caustic threshold:
/// D(T) in the coupled regime, sin ω₁T · sin ω₂T in the decoupled one.
pub fn caustic_measure(df: &DerivedFrequencies, config: &OscillatorConfig, t: f64) -> (f64, f64) {
    match df.regime {
        Regime::Coupled => {
            let sum = config.omega1 + config.omega2;
            let threshold = CAUSTIC_THRESHOLD * sum * sum * f64::max(1.0, df.omega_minus / df.omega_plus);
            (coefficients(df, config, t).big_d, threshold)
        }
        Regime::Decoupled => ((config.omega1 * t).sin() * (config.omega2 * t).sin(), CAUSTIC_THRESHOLD),
    }
}

pub fn check_caustic(df: &DerivedFrequencies, config: &OscillatorConfig, t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("elapsed time must be positive, got {t}")));
    }
    // D vanishes like t² at t = 0, which is the identity limit rather than a
    // conjugate point; no caustic can lie below half the first one.
    if t < 0.5 * first_caustic(df, config) {
        return Ok(());
    }
    let (value, threshold) = caustic_measure(df, config, t);
    if value.abs() < threshold {
        return Err(Error::Caustic {
            time: t,
            nearby: nearest_caustics(df, config, t),
        });
    }
    Ok(())
}

/// The action divided by m/2, as a quadratic form in the endpoints:
/// axx(x₁²+x₂²) + ayy(y₁²+y₂²) − 2bx·x₁x₂ − 2by·y₁y₂ + cross(x₁y₂−x₂y₁) + mixed(x₂y₂−x₁y₁).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionForm {
    pub axx: f64,
    pub ayy: f64,
    pub bx: f64,
    pub by: f64,
    pub cross: f64,
    pub mixed: f64,
}

impl ActionForm {
    pub fn evaluate(&self, ep: &Endpoints, m: f64) -> f64 {
        let Endpoints { x1, y1, x2, y2, .. } = *ep;
        0.5 * m
            * (self.axx * (x1 * x1 + x2 * x2) + self.ayy * (y1 * y1 + y2 * y2)
                - 2.0 * self.bx * x1 * x2
                - 2.0 * self.by * y1 * y2
                + self.cross * (x1 * y2 - x2 * y1)
                + self.mixed * (x2 * y2 - x1 * y1))
    }

    /// Sum of the magnitudes of the individual terms; the natural scale for
    /// relative comparisons of action values.
    pub fn magnitude(&self, ep: &Endpoints, m: f64) -> f64 {
        let Endpoints { x1, y1, x2, y2, .. } = *ep;
        0.5 * m
            * (self.axx.abs() * (x1 * x1 + x2 * x2)
                + self.ayy.abs() * (y1 * y1 + y2 * y2)
                + 2.0 * (self.bx * x1 * x2).abs()
                + 2.0 * (self.by * y1 * y2).abs()
                + (self.cross * (x1 * y2 - x2 * y1)).abs()
                + (self.mixed * (x2 * y2 - x1 * y1)).abs())
    }

    /// Mixed second derivatives laid out as
    /// [[∂²S/∂x₁∂x₂, ∂²S/∂y₁∂x₂], [∂²S/∂x₁∂y₂, ∂²S/∂y₁∂y₂]].
    pub fn mixed_hessian(&self, m: f64) -> Matrix2<f64> {
        Matrix2::new(-m * self.bx, -0.5 * m * self.cross, 0.5 * m * self.cross, -m * self.by)
    }
}

pub fn action_form(
    df: &DerivedFrequencies,
    config: &OscillatorConfig,
    t: f64,
    cross_factor: CrossFactor,
) -> Result<ActionForm> {
    check_caustic(df, config, t)?;
    Ok(match df.regime {
        Regime::Coupled => {
            let k = coefficients(df, config, t);
            let inv = 1.0 / k.big_d;
            ActionForm {
                axx: k.a1 * inv,
                ayy: k.a2 * inv,
                bx: k.b1 * inv,
                by: k.b2 * inv,
                cross: cross_factor.value() * k.c1 * inv,
                mixed: k.c2 * inv,
            }
        }
        Regime::Decoupled => {
            let axis = |w: f64| {
                let (s, c) = (w * t).sin_cos();
                (w * c / s, w / s)
            };
            let (axx, bx) = axis(config.omega1);
            let (ayy, by) = axis(config.omega2);
            ActionForm {
                axx,
                ayy,
                bx,
                by,
                cross: 0.0,
                mixed: 0.0,
            }
        }
    })
}

/// S = (m/2){x₂ẋ₂ − x₁ẋ₁ + y₂ẏ₂ − y₁ẏ₁}: the Lagrangian integrated by parts
/// along the classical path.
pub fn action_boundary(ep: &Endpoints, df: &DerivedFrequencies, config: &OscillatorConfig) -> Result<f64> {
    let v = endpoint_velocities(ep, df, config)?;
    Ok(0.5 * config.m * (ep.x2 * v.vx2 - ep.x1 * v.vx1 + ep.y2 * v.vy2 - ep.y1 * v.vy1))
}

/// Closed-form action with the given weight on the c₁(x₁y₂ − x₂y₁) term.
pub fn action_closed(
    ep: &Endpoints,
    df: &DerivedFrequencies,
    config: &OscillatorConfig,
    cross_factor: CrossFactor,
) -> Result<f64> {
    Ok(action_form(df, config, ep.t, cross_factor)?.evaluate(ep, config.m))
}

#[derive(Debug, Clone, Serialize)]
pub struct ArbitrationReport {
    pub selected: CrossFactor,
    /// Unconstrained least-squares estimate of the factor.
    pub fitted: f64,
    /// Max relative misfit |S_boundary − S_closed(k)| / scale per candidate.
    pub residual_two: f64,
    pub residual_four: f64,
    pub samples_used: usize,
    /// Draws with a negligible cross term (e.g. collinear endpoints).
    pub samples_excluded: usize,
    pub configs: Vec<OscillatorConfig>,
    pub seed: u64,
    pub timestamp: u64,
}

/// Tolerance for the fit residual and for the distance of the fitted factor
/// from the winning candidate.
pub const ARBITRATION_TOLERANCE: f64 = 1e-8;

/// Fits the cross-term weight k by least squares against the boundary-term
/// action over random endpoint batches, and accepts it only if it lands on
/// exactly one of {2, 4}.
pub fn arbitrate_cross_factor(configs: &[OscillatorConfig], draws_per_config: usize, seed: u64) -> Result<ArbitrationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (signal g, target r, scale s) with S_boundary − S_base = k·g.
    let mut rows = Vec::new();
    let mut excluded = 0;
    for config in configs {
        let df = derive(config)?;
        if !df.is_coupled() {
            // No cross term without a field.
            excluded += draws_per_config;
            continue;
        }
        let t_c = first_caustic(&df, config);
        for _ in 0..draws_per_config {
            let ep = Endpoints::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.05..0.9) * t_c,
            );
            let form = action_form(&df, config, ep.t, CrossFactor::Four)?;
            let scale = form.magnitude(&ep, config.m);
            let unit = ActionForm { cross: form.cross / 4.0, ..form };
            let base = ActionForm { cross: 0.0, ..form };
            let g = unit.evaluate(&ep, config.m) - base.evaluate(&ep, config.m);
            if g.abs() < 1e-6 * scale {
                excluded += 1;
                continue;
            }
            let r = action_boundary(&ep, &df, config)? - base.evaluate(&ep, config.m);
            rows.push((g / scale, r / scale));
        }
    }
    if rows.is_empty() {
        return Err(Error::Ambiguous("no draws carry a cross-term signal".into()));
    }
    let fitted = rows.iter().map(|(g, r)| g * r).sum::<f64>() / rows.iter().map(|(g, _)| g * g).sum::<f64>();
    let misfit = |k: f64| rows.iter().map(|(g, r)| (r - k * g).abs()).fold(0.0, f64::max);
    let (residual_two, residual_four) = (misfit(2.0), misfit(4.0));

    let winners: Vec<CrossFactor> = CrossFactor::CANDIDATES
        .into_iter()
        .filter(|k| misfit(k.value()) < ARBITRATION_TOLERANCE && (fitted - k.value()).abs() < ARBITRATION_TOLERANCE)
        .collect();
    let selected = match winners.as_slice() {
        [one] => *one,
        _ => {
            return Err(Error::Ambiguous(format!(
                "cross factor fit {fitted} (residuals: k=2 {residual_two:e}, k=4 {residual_four:e})"
            )))
        }
    };
    Ok(ArbitrationReport {
        selected,
        fitted,
        residual_two,
        residual_four,
        samples_used: rows.len(),
        samples_excluded: excluded,
        configs: configs.to_vec(),
        seed,
        timestamp: unix_timestamp(),
    })
}
