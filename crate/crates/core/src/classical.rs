//! Classical trajectories of ẍ + ω₁²x = ω₀ẏ, ÿ + ω₂²y = −ω₀ẋ.
//!
//! In the coupled regime the motion is a superposition of two rotating
//! normal modes at Ω₁ (amplitudes A, B) and Ω₂ (amplitudes C, D), with the
//! y components weighted by the mixing factors Λ₁, Λ₂. In the decoupled
//! regime (A, B) are the x amplitudes at ω₁ and (C, D) the y amplitudes
//! at ω₂.

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{self, coefficients};
use crate::error::{Error, Result};
use crate::model::{DerivedFrequencies, OscillatorConfig, Regime};

/// Boundary data of a classical path: (x1, y1) at t = 0 and (x2, y2) at t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Endpoints {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub t: f64,
}

impl Endpoints {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64, t: f64) -> Self {
        Self { x1, y1, x2, y2, t }
    }

    pub fn is_zero(&self) -> bool {
        self.x1 == 0.0 && self.y1 == 0.0 && self.x2 == 0.0 && self.y2 == 0.0
    }

    /// Same time, source and field point exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.x2, self.y2, self.x1, self.y1, self.t)
    }

    fn positions(&self) -> Vector4<f64> {
        Vector4::new(self.x1, self.y1, self.x2, self.y2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl ModeCoefficients {
    fn from_vector(v: Vector4<f64>) -> Self {
        Self {
            a: v[0],
            b: v[1],
            c: v[2],
            d: v[3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointVelocities {
    pub vx1: f64,
    pub vy1: f64,
    pub vx2: f64,
    pub vy2: f64,
}

/// Frequencies and y-weights of the two modes in either regime.
#[derive(Debug, Clone, Copy)]
struct Modes {
    fast: f64,
    slow: f64,
    /// Coupled: y = −Λ₁(A sin − B cos) − Λ₂(C sin − D cos).
    lambdas: Option<(f64, f64)>,
}

fn modes(df: &DerivedFrequencies, config: &OscillatorConfig) -> Modes {
    match df.regime {
        Regime::Coupled => Modes {
            fast: df.big_omega1,
            slow: df.big_omega2,
            lambdas: df.lambda1.zip(df.lambda2),
        },
        Regime::Decoupled => Modes {
            fast: config.omega1,
            slow: config.omega2,
            lambdas: None,
        },
    }
}

/// Rows express (x, y, ẋ, ẏ) at time t as linear maps of (A, B, C, D).
#[rustfmt::skip]
fn state_rows(m: Modes, t: f64) -> Matrix4<f64> {
    let (s1, c1) = (m.fast * t).sin_cos();
    let (s2, c2) = (m.slow * t).sin_cos();
    let (w1, w2) = (m.fast, m.slow);
    match m.lambdas {
        Some((l1, l2)) => Matrix4::new(
            c1, s1, c2, s2,
            -l1 * s1, l1 * c1, -l2 * s2, l2 * c2,
            -w1 * s1, w1 * c1, -w2 * s2, w2 * c2,
            -l1 * w1 * c1, -l1 * w1 * s1, -l2 * w2 * c2, -l2 * w2 * s2,
        ),
        None => Matrix4::new(
            c1, s1, 0.0, 0.0,
            0.0, 0.0, c2, s2,
            -w1 * s1, w1 * c1, 0.0, 0.0,
            0.0, 0.0, -w2 * s2, w2 * c2,
        ),
    }
}

/// Maps (A, B, C, D) to (x1, y1, x2, y2) for elapsed time `t`.
pub fn boundary_matrix(df: &DerivedFrequencies, config: &OscillatorConfig, t: f64) -> Matrix4<f64> {
    let m = modes(df, config);
    let start = state_rows(m, 0.0);
    let end = state_rows(m, t);
    let mut out = Matrix4::zeros();
    out.row_mut(0).copy_from(&start.row(0));
    out.row_mut(1).copy_from(&start.row(1));
    out.row_mut(2).copy_from(&end.row(0));
    out.row_mut(3).copy_from(&end.row(1));
    out
}

/// Relative determinant bound below which the boundary problem is a caustic.
pub const MODE_CAUSTIC_THRESHOLD: f64 = 1e-9;

fn caustic_error(df: &DerivedFrequencies, config: &OscillatorConfig, t: f64) -> Error {
    Error::Caustic {
        time: t,
        nearby: action::nearest_caustics(df, config, t),
    }
}

/// Solves the two-point boundary problem with a pivoted LU factorisation.
pub fn solve_modes(ep: &Endpoints, df: &DerivedFrequencies, config: &OscillatorConfig) -> Result<ModeCoefficients> {
    if !(ep.t > 0.0) {
        return Err(Error::InvalidArgument(format!("elapsed time must be positive, got {}", ep.t)));
    }
    let mat = boundary_matrix(df, config, ep.t);
    let norm = mat.row_iter().map(|r| r.abs().sum()).fold(0.0, f64::max);
    let lu = mat.lu();
    if lu.determinant().abs() < MODE_CAUSTIC_THRESHOLD * norm.powi(4) {
        return Err(caustic_error(df, config, ep.t));
    }
    let sol = lu
        .solve(&ep.positions())
        .ok_or_else(|| caustic_error(df, config, ep.t))?;
    Ok(ModeCoefficients::from_vector(sol))
}

/// Mode amplitudes of the path through a given phase point at t = 0.
pub fn modes_from_initial(
    start: &PhasePoint,
    df: &DerivedFrequencies,
    config: &OscillatorConfig,
) -> Result<ModeCoefficients> {
    let rows = state_rows(modes(df, config), 0.0);
    let rhs = Vector4::new(start.x, start.y, start.vx, start.vy);
    rows.lu()
        .solve(&rhs)
        .map(ModeCoefficients::from_vector)
        .ok_or(Error::InvalidArgument("singular initial-value map".into()))
}

/// Position and velocity at time `t`; velocities by exact differentiation.
pub fn trajectory(mc: &ModeCoefficients, df: &DerivedFrequencies, config: &OscillatorConfig, t: f64) -> PhasePoint {
    let v = state_rows(modes(df, config), t) * Vector4::new(mc.a, mc.b, mc.c, mc.d);
    PhasePoint {
        x: v[0],
        y: v[1],
        vx: v[2],
        vy: v[3],
    }
}

/// Samples a trajectory at every time in `times` (data-parallel).
pub fn sample_trajectory(
    mc: &ModeCoefficients,
    df: &DerivedFrequencies,
    config: &OscillatorConfig,
    times: &[f64],
) -> Vec<PhasePoint> {
    times.par_iter().map(|&t| trajectory(mc, df, config, t)).collect()
}

/// E = ½m|v|² + ½m(ω₁²x² + ω₂²y²); the magnetic force does no work.
pub fn energy(p: &PhasePoint, config: &OscillatorConfig) -> f64 {
    0.5 * config.m
        * (p.vx * p.vx + p.vy * p.vy + config.omega1.powi(2) * p.x * p.x + config.omega2.powi(2) * p.y * p.y)
}

/// Velocities at both ends of the classical path, from the closed-form
/// action coefficients (coupled) or the 1D oscillator formulas (decoupled).
pub fn endpoint_velocities(
    ep: &Endpoints,
    df: &DerivedFrequencies,
    config: &OscillatorConfig,
) -> Result<EndpointVelocities> {
    action::check_caustic(df, config, ep.t)?;
    let Endpoints { x1, y1, x2, y2, t } = *ep;
    match df.regime {
        Regime::Coupled => {
            let k = coefficients(df, config, t);
            let inv = 1.0 / k.big_d;
            Ok(EndpointVelocities {
                vx1: inv * (-k.a1 * x1 + k.b1 * x2 - 2.0 * k.c1 * y2 + k.f1 * y1),
                vx2: inv * (-k.b1 * x1 + k.a1 * x2 - 2.0 * k.c1 * y1 + k.f1 * y2),
                vy1: inv * (-k.a2 * y1 + k.b2 * y2 + 2.0 * k.c1 * x2 + k.f2 * x1),
                vy2: inv * (-k.b2 * y1 + k.a2 * y2 + 2.0 * k.c1 * x1 + k.f2 * x2),
            })
        }
        Regime::Decoupled => {
            let axis = |w: f64, q1: f64, q2: f64| {
                let (s, c) = (w * t).sin_cos();
                (w * (q2 - q1 * c) / s, w * (q2 * c - q1) / s)
            };
            let (vx1, vx2) = axis(config.omega1, x1, x2);
            let (vy1, vy2) = axis(config.omega2, y1, y2);
            Ok(EndpointVelocities { vx1, vy1, vx2, vy2 })
        }
    }
}

/// The determinant Δ as it appears in the appendix listing, read as
/// (Λ₁−Λ₂)² sin Ω₁T sin Ω₂T − 2Λ₁Λ₂(1 − cos Ω₋T). Equals −det of
/// [`boundary_matrix`]; kept only for comparison.
pub fn printed_determinant(df: &DerivedFrequencies, t: f64) -> Result<f64> {
    let (l1, l2) = df.lambdas()?;
    Ok((l1 - l2).powi(2) * (df.big_omega1 * t).sin() * (df.big_omega2 * t).sin()
        - 2.0 * l1 * l2 * (1.0 - (df.omega_minus * t).cos()))
}

/// The appendix cofactor listing a_ij, transcribed verbatim. Dividing by
/// [`printed_determinant`] should give the inverse boundary matrix.
#[rustfmt::skip]
pub fn printed_cofactors(df: &DerivedFrequencies, t: f64) -> Result<Matrix4<f64>> {
    let (l1, l2) = df.lambdas()?;
    let (s1, c1) = (df.big_omega1 * t).sin_cos();
    let (s2, c2) = (df.big_omega2 * t).sin_cos();
    Ok(Matrix4::new(
        l2 * (l1 * c1 * c2 + l2 * s1 * s2 - l1),
        l1 * c1 * s2 - l2 * s1 * c2,
        0.5 * l1 * l2 * s1 * s2,
        l2 * s1 - l1 * s2,
        l2 * (l1 * s1 * c2 - l2 * c1 * s2),
        l1 * s1 * s2 + l2 * c1 * c2 - l2,
        l2 * (-l1 * s1 + l2 * s2),
        0.5 * l2 * s1 * s2,
        l1 * (l2 * c1 * c2 + l1 * s1 * s2 - l2),
        -l1 * c1 * s2 + l2 * s1 * c2,
        -0.5 * l1 * l2 * s1 * s2,
        -l2 * s1 + l1 * s2,
        l1 * (-l1 * s1 * c2 + l2 * c1 * s2),
        l2 * s1 * s2 + l1 * c1 * c2 - l1,
        l1 * (l1 * s1 - l2 * s2),
        -0.5 * l1 * s1 * s2,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn flagship() -> OscillatorConfig {
        OscillatorConfig::new(2.0, 2.0, 3.0)
    }

    fn random_coupled(rng: &mut ChaCha8Rng) -> OscillatorConfig {
        OscillatorConfig::new(rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0), rng.gen_range(0.2..3.0))
    }

    /// |ẍ + ω₁²x − ω₀ẏ| + |ÿ + ω₂²y + ω₀ẋ| from centred differences of the
    /// positions alone.
    fn eom_residual(mc: &ModeCoefficients, df: &DerivedFrequencies, cfg: &OscillatorConfig, t: f64) -> f64 {
        let h = 1e-5 * f64::max(1.0, 1.0 / df.big_omega1);
        let p = |s: f64| trajectory(mc, df, cfg, s);
        let (m, c, pl) = (p(t - h), p(t), p(t + h));
        let xdd = (pl.x - 2.0 * c.x + m.x) / (h * h);
        let ydd = (pl.y - 2.0 * c.y + m.y) / (h * h);
        let xd = (pl.x - m.x) / (2.0 * h);
        let yd = (pl.y - m.y) / (2.0 * h);
        (xdd + cfg.omega1.powi(2) * c.x - cfg.omega0 * yd).abs()
            + (ydd + cfg.omega2.powi(2) * c.y + cfg.omega0 * xd).abs()
    }

    #[test]
    fn boundary_rows_at_start() {
        let cfg = flagship();
        let df = derive(&cfg).unwrap();
        let m = boundary_matrix(&df, &cfg, 0.7);
        assert_eq!(m.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(m.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 0.0, -1.0]);
    }

    #[test]
    fn full_period_repeats_start_rows() {
        let cfg = flagship();
        let df = derive(&cfg).unwrap();
        let m = boundary_matrix(&df, &cfg, 2.0 * PI);
        for j in 0..4 {
            assert!((m[(2, j)] - m[(0, j)]).abs() < 1e-12);
            assert!((m[(3, j)] - m[(1, j)]).abs() < 1e-12);
        }
        assert!(matches!(
            solve_modes(&Endpoints::new(1.0, 0.0, 1.0, 0.0, 2.0 * PI), &df, &cfg),
            Err(Error::Caustic { .. })
        ));
    }

    #[test]
    fn zero_data_gives_zero_modes() {
        let cfg = flagship();
        let df = derive(&cfg).unwrap();
        let mc = solve_modes(&Endpoints::new(0.0, 0.0, 0.0, 0.0, 0.4), &df, &cfg).unwrap();
        assert_eq!(mc, ModeCoefficients { a: 0.0, b: 0.0, c: 0.0, d: 0.0 });
        let v = endpoint_velocities(&Endpoints::new(0.0, 0.0, 0.0, 0.0, 0.4), &df, &cfg).unwrap();
        assert_eq!((v.vx1, v.vy1, v.vx2, v.vy2), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn solved_modes_reproduce_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let flag = flagship();
        let df = derive(&flag).unwrap();
        let ep = Endpoints::new(1.0, 0.0, -0.4, 0.8, PI / 5.0);
        let mc = solve_modes(&ep, &df, &flag).unwrap();
        let (p0, p1) = (trajectory(&mc, &df, &flag, 0.0), trajectory(&mc, &df, &flag, ep.t));
        for (got, want) in [(p0.x, ep.x1), (p0.y, ep.y1), (p1.x, ep.x2), (p1.y, ep.y2)] {
            assert!((got - want).abs() < 1e-10);
        }

        for _ in 0..200 {
            let cfg = random_coupled(&mut rng);
            let df = derive(&cfg).unwrap();
            let t_c = action::first_caustic(&df, &cfg);
            let ep = Endpoints::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.05..0.9) * t_c,
            );
            let mc = solve_modes(&ep, &df, &cfg).unwrap();
            let (p0, p1) = (trajectory(&mc, &df, &cfg, 0.0), trajectory(&mc, &df, &cfg, ep.t));
            let scale = 1.0 + ep.x1.abs() + ep.y1.abs() + ep.x2.abs() + ep.y2.abs();
            for (got, want) in [(p0.x, ep.x1), (p0.y, ep.y1), (p1.x, ep.x2), (p1.y, ep.y2)] {
                assert!((got - want).abs() < 1e-10 * scale, "{cfg:?} {ep:?}");
            }
        }
    }

    #[test]
    fn initial_velocity_at_mode_one() {
        let cfg = flagship();
        let df = derive(&cfg).unwrap();
        let mc = ModeCoefficients { a: 1.0, b: 0.0, c: 0.0, d: 0.0 };
        let p = trajectory(&mc, &df, &cfg, 0.0);
        assert_eq!((p.x, p.y, p.vx), (1.0, 0.0, 0.0));
        assert_eq!(p.vy, -df.lambda1.unwrap() * df.big_omega1);
    }

    #[test]
    fn equations_of_motion_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for cfg in [flagship(), random_coupled(&mut rng), OscillatorConfig::new(1.5, 0.5, 0.0)] {
            let df = derive(&cfg).unwrap();
            let mc = ModeCoefficients {
                a: rng.gen_range(-1.0..1.0),
                b: rng.gen_range(-1.0..1.0),
                c: rng.gen_range(-1.0..1.0),
                d: rng.gen_range(-1.0..1.0),
            };
            for _ in 0..100 {
                let t = rng.gen_range(0.0..10.0);
                let r = eom_residual(&mc, &df, &cfg, t);
                assert!(r < 1e-4, "{r}");
            }
        }
    }

    #[test]
    fn analytic_velocities_match_differences() {
        let cfg = OscillatorConfig::new(1.3, 0.8, 1.7);
        let df = derive(&cfg).unwrap();
        let mc = ModeCoefficients { a: 0.3, b: -0.7, c: 1.1, d: 0.2 };
        let h = 1e-5;
        for t in [0.0, 0.4, 2.9] {
            let p = trajectory(&mc, &df, &cfg, t);
            let (a, b) = (trajectory(&mc, &df, &cfg, t + h), trajectory(&mc, &df, &cfg, t - h));
            assert!((p.vx - (a.x - b.x) / (2.0 * h)).abs() < 1e-8);
            assert!((p.vy - (a.y - b.y) / (2.0 * h)).abs() < 1e-8);
        }
    }

    #[test]
    fn decoupled_motion_separates() {
        let cfg = OscillatorConfig::new(1.5, 0.5, 0.0);
        let df = derive(&cfg).unwrap();
        let mc = ModeCoefficients { a: 1.0, b: 0.5, c: 0.0, d: 0.0 };
        for t in [0.3, 1.0, 4.0] {
            let p = trajectory(&mc, &df, &cfg, t);
            assert_eq!(p.y, 0.0);
            assert!((p.x - ((1.5 * t).cos() + 0.5 * (1.5 * t).sin())).abs() < 1e-14);
        }
    }

    #[test]
    fn energy_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let cfg = random_coupled(&mut rng);
            let df = derive(&cfg).unwrap();
            let ep = Endpoints::new(0.5, -0.3, 0.2, 0.9, 0.5 * action::first_caustic(&df, &cfg));
            let mc = solve_modes(&ep, &df, &cfg).unwrap();
            let e0 = energy(&trajectory(&mc, &df, &cfg, 0.0), &cfg);
            for i in 1..=50 {
                let t = ep.t * f64::from(i) / 50.0;
                let e = energy(&trajectory(&mc, &df, &cfg, t), &cfg);
                assert!(((e - e0) / e0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rational_ratio_is_periodic() {
        // Ω₁/Ω₂ = 4 for the flagship configuration, so the period is 2π/Ω₂.
        let cfg = flagship();
        let df = derive(&cfg).unwrap();
        let period = 2.0 * PI / df.big_omega2;
        let mc = ModeCoefficients { a: 0.4, b: -1.0, c: 0.8, d: 0.1 };
        for t in [0.0, 0.37, 1.9] {
            let (p, q) = (trajectory(&mc, &df, &cfg, t), trajectory(&mc, &df, &cfg, t + period));
            for (a, b) in [(p.x, q.x), (p.y, q.y), (p.vx, q.vx), (p.vy, q.vy)] {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn closed_form_velocities_match_mode_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let cfg = random_coupled(&mut rng);
            let df = derive(&cfg).unwrap();
            let ep = Endpoints::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.05..0.9) * action::first_caustic(&df, &cfg),
            );
            let v = endpoint_velocities(&ep, &df, &cfg).unwrap();
            let mc = solve_modes(&ep, &df, &cfg).unwrap();
            let (p0, p1) = (trajectory(&mc, &df, &cfg, 0.0), trajectory(&mc, &df, &cfg, ep.t));
            let scale = p0.vx.abs() + p0.vy.abs() + p1.vx.abs() + p1.vy.abs();
            for (a, b) in [(v.vx1, p0.vx), (v.vy1, p0.vy), (v.vx2, p1.vx), (v.vy2, p1.vy)] {
                assert!((a - b).abs() < 1e-8 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn symmetric_data_gives_antisymmetric_x_velocities() {
        // Isotropic, y1 = y2 = 0, x1 = x2: the velocity formulas swap a1 and b1.
        let cfg = flagship();
        let df = derive(&cfg).unwrap();
        let v = endpoint_velocities(&Endpoints::new(0.7, 0.0, 0.7, 0.0, 0.3), &df, &cfg).unwrap();
        assert!((v.vx1 + v.vx2).abs() < 1e-12);
    }

    #[test]
    fn decoupled_velocities_match_one_dimensional_paths() {
        let cfg = OscillatorConfig::new(1.2, 0.7, 0.0);
        let df = derive(&cfg).unwrap();
        let ep = Endpoints::new(0.3, -0.5, 0.8, 0.1, 0.9);
        let v = endpoint_velocities(&ep, &df, &cfg).unwrap();
        let mc = solve_modes(&ep, &df, &cfg).unwrap();
        let (p0, p1) = (trajectory(&mc, &df, &cfg, 0.0), trajectory(&mc, &df, &cfg, ep.t));
        for (a, b) in [(v.vx1, p0.vx), (v.vy1, p0.vy), (v.vx2, p1.vx), (v.vy2, p1.vy)] {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_value_round_trip() {
        let cfg = OscillatorConfig::new(1.1, 2.3, 0.6);
        let df = derive(&cfg).unwrap();
        let start = PhasePoint { x: 0.2, y: -0.4, vx: 1.5, vy: 0.3 };
        let mc = modes_from_initial(&start, &df, &cfg).unwrap();
        let p = trajectory(&mc, &df, &cfg, 0.0);
        for (a, b) in [(p.x, start.x), (p.y, start.y), (p.vx, start.vx), (p.vy, start.vy)] {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn printed_determinant_is_negated_numeric_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let cfg = random_coupled(&mut rng);
            let df = derive(&cfg).unwrap();
            let t = rng.gen_range(0.01..5.0);
            let numeric = boundary_matrix(&df, &cfg, t).determinant();
            let printed = printed_determinant(&df, t).unwrap();
            let scale = (df.lambda1.unwrap().abs() + df.lambda2.unwrap().abs()).powi(2);
            assert!((numeric + printed).abs() < 1e-11 * scale);
        }
    }

    #[test]
    fn printed_cofactors_agree_except_four_entries() {
        // Twelve entries of the listing equal Δ·M⁻¹; the four entries written
        // as ½Λ sin·sin are transcription errors (the true ones are
        // ∓Λ(cos Ω₁T − cos Ω₂T) with Λ₁Λ₂, Λ₂, Λ₁ weights).
        let cfg = OscillatorConfig::new(1.3, 0.7, 0.9);
        let df = derive(&cfg).unwrap();
        let t = 0.8;
        let m = boundary_matrix(&df, &cfg, t);
        let scaled_inverse = m.try_inverse().unwrap() * printed_determinant(&df, t).unwrap();
        let printed = printed_cofactors(&df, t).unwrap();
        let broken = [(0, 2), (1, 3), (2, 2), (3, 3)];
        for i in 0..4 {
            for j in 0..4 {
                let agree = (printed[(i, j)] - scaled_inverse[(i, j)]).abs() < 1e-12;
                assert_eq!(agree, !broken.contains(&(i, j)), "entry ({i},{j})");
            }
        }
    }

    mod invariants {
        use super::*;
        use crate::action::first_caustic;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn solved_path_meets_both_endpoints(
                w1 in 0.3f64..3.0, w2 in 0.3f64..3.0, w0 in 0.0f64..3.0,
                frac in 0.05f64..0.95,
                x1 in -1.5f64..1.5, y1 in -1.5f64..1.5, x2 in -1.5f64..1.5, y2 in -1.5f64..1.5,
            ) {
                let cfg = OscillatorConfig::new(w1, w2, w0);
                let df = derive(&cfg).unwrap();
                let t = frac * first_caustic(&df, &cfg);
                let mc = solve_modes(&Endpoints::new(x1, y1, x2, y2, t), &df, &cfg).unwrap();
                let (a, b) = (trajectory(&mc, &df, &cfg, 0.0), trajectory(&mc, &df, &cfg, t));
                let tol = 1e-8 * (1.0 + x1.abs().max(y1.abs()).max(x2.abs()).max(y2.abs()));
                prop_assert!((a.x - x1).abs() < tol && (a.y - y1).abs() < tol);
                prop_assert!((b.x - x2).abs() < tol && (b.y - y2).abs() < tol);
            }

            #[test]
            fn energy_is_conserved_along_path(
                w1 in 0.3f64..3.0, w2 in 0.3f64..3.0, w0 in 0.0f64..3.0,
                frac in 0.05f64..0.95, s in 0.0f64..1.0,
                x1 in -1.5f64..1.5, y1 in -1.5f64..1.5, x2 in -1.5f64..1.5, y2 in -1.5f64..1.5,
            ) {
                let cfg = OscillatorConfig::new(w1, w2, w0);
                let df = derive(&cfg).unwrap();
                let t = frac * first_caustic(&df, &cfg);
                let mc = solve_modes(&Endpoints::new(x1, y1, x2, y2, t), &df, &cfg).unwrap();
                let e0 = energy(&trajectory(&mc, &df, &cfg, 0.0), &cfg);
                let e1 = energy(&trajectory(&mc, &df, &cfg, s * t), &cfg);
                prop_assert!((e1 - e0).abs() <= 1e-8 * e0.abs().max(1.0), "{e0} vs {e1}");
            }
        }
    }
}
