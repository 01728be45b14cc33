//! Physical parameters, feedback transforms, thermal occupations, drive
//! amplitudes and the nonlinear steady-state solver.
//!
//! Every frequency and rate in this module is an angular frequency in rad/s.

use std::f64::consts::{PI, SQRT_2, TAU};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{mean_field_rhs, MeanField};
use crate::error::{Error, Result};

/// Converts a value quoted as `frequency / 2π` in MHz into rad/s.
pub fn mhz_to_rad(mhz: f64) -> f64 {
    mhz * 1e6 * TAU
}

/// Converts rad/s into `frequency / 2π` in MHz.
pub fn rad_to_mhz(rad: f64) -> f64 {
    rad / TAU / 1e6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Gyromagnetic ratio, rad/s per tesla.
    pub gamma_gyro: f64,
    /// Spin density of YIG, 1/m³.
    pub spin_density: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants { hbar: 1.054_571_817e-34, k_b: 1.380_649e-23, gamma_gyro: TAU * 28e9, spin_density: 4.22e27 }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("k_b", self.k_b),
            ("gamma_gyro", self.gamma_gyro),
            ("spin_density", self.spin_density),
        ] {
            positive(name, v)?;
        }
        Ok(())
    }
}

/// Beam-splitter settings of the coherent feedback loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeedbackSpec {
    r_b: f64,
    phi: f64,
    t_b: f64,
}

impl FeedbackSpec {
    /// `r_b` must lie in `[0, 1]`; `phi` is wrapped into `[0, 2π)`.
    pub fn new(r_b: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r_b) {
            return Err(Error::InvalidParameter { name: "r_b", reason: format!("reflectivity {r_b} outside [0, 1]") });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter { name: "phi", reason: "phase must be finite".into() });
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(FeedbackSpec { r_b, phi, t_b: (1.0 - r_b * r_b).sqrt() })
    }

    /// Feedback loop switched off (`r_b = 0`, `t_b = 1`).
    pub fn off() -> Self {
        FeedbackSpec { r_b: 0.0, phi: 0.0, t_b: 1.0 }
    }

    pub fn r_b(&self) -> f64 {
        self.r_b
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn t_b(&self) -> f64 {
        self.t_b
    }

    /// `t_B² |1 − r_B e^{iφ}|²`, the scale factor of the cavity-1 input noise.
    pub fn noise_factor(&self) -> f64 {
        let r = self.r_b;
        let modulus_sq = 1.0 - 2.0 * r * self.phi.cos() + r * r;
        self.t_b * self.t_b * modulus_sq
    }
}

impl<'de> Deserialize<'de> for FeedbackSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            r_b: f64,
            phi: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        FeedbackSpec::new(raw.r_b, raw.phi).map_err(serde::de::Error::custom)
    }
}

/// One operating point of the five-mode system, in rad/s (temperature in kelvin).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Decay rate shared by both cavities.
    pub kappa_c: f64,
    pub kappa_m: f64,
    pub gamma_e: f64,
    pub gamma_b: f64,
    pub omega_b: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_e: f64,
    /// Effective magnon detuning, including the magnetostrictive shift.
    pub delta_m_eff: f64,
    pub g_mc: f64,
    /// Effective magnomechanical coupling (real, non-negative).
    pub g_mb: f64,
    pub g_ce: f64,
    pub j: f64,
    pub temperature: f64,
    pub omega_c1: f64,
    pub omega_c2: f64,
    pub omega_m: f64,
    pub feedback: FeedbackSpec,
}

impl SystemParams {
    /// Experimental parameter set used throughout the figures, at the
    /// `E_N^{be}` optimum (Δ₁ = −0.88 ω_b, Δ₂ = 4 ω_b, Δ_e = −ω_b) with
    /// feedback `r_B = 0.75`, `φ = π`.
    pub fn baseline() -> Self {
        let omega_b = mhz_to_rad(10.0);
        SystemParams {
            kappa_c: mhz_to_rad(1.0),
            kappa_m: mhz_to_rad(1.0),
            gamma_e: mhz_to_rad(1.0),
            gamma_b: mhz_to_rad(100e-6),
            omega_b,
            delta_1: -0.88 * omega_b,
            delta_2: 4.0 * omega_b,
            delta_e: -omega_b,
            delta_m_eff: 0.9 * omega_b,
            g_mc: mhz_to_rad(3.2),
            g_mb: mhz_to_rad(4.8),
            g_ce: mhz_to_rad(6.0),
            j: 0.8 * omega_b,
            temperature: 0.01,
            omega_c1: mhz_to_rad(10e3),
            omega_c2: mhz_to_rad(10e3),
            omega_m: mhz_to_rad(10e3),
            feedback: FeedbackSpec::new(0.75, PI).expect("valid feedback"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("kappa_c", self.kappa_c)?;
        positive("kappa_m", self.kappa_m)?;
        positive("gamma_e", self.gamma_e)?;
        positive("gamma_b", self.gamma_b)?;
        positive("omega_b", self.omega_b)?;
        positive("omega_c1", self.omega_c1)?;
        positive("omega_c2", self.omega_c2)?;
        positive("omega_m", self.omega_m)?;
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidParameter {
                name: "temperature",
                reason: format!("temperature {} must be finite and >= 0", self.temperature),
            });
        }
        if !(self.g_mb >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "g_mb",
                reason: "effective coupling must be real and non-negative".into(),
            });
        }
        for (name, v) in [
            ("delta_1", self.delta_1),
            ("delta_2", self.delta_2),
            ("delta_e", self.delta_e),
            ("delta_m_eff", self.delta_m_eff),
            ("g_mc", self.g_mc),
            ("g_ce", self.g_ce),
            ("j", self.j),
        ] {
            finite(name, v)?;
        }
        Ok(())
    }

    /// Replaces the effective magnon detuning and coupling with the values
    /// derived from a microscopic steady state.
    pub fn with_steady_state(&self, ss: &SteadyState) -> SystemParams {
        SystemParams { delta_m_eff: ss.delta_m_eff_out, g_mb: ss.g_mb_out, ..*self }
    }

    pub fn kappa_fb(&self) -> f64 {
        feedback_decay(self.kappa_c, &self.feedback)
    }

    pub fn delta_fb(&self) -> f64 {
        feedback_detuning(self.delta_1, self.kappa_c, &self.feedback)
    }
}

/// Microscopic drive description used to derive the effective magnon detuning and coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Cavity drive power, W.
    pub power: f64,
    /// Drive frequency, rad/s.
    pub omega_l: f64,
    /// Magnon drive amplitude, T.
    pub b0: f64,
    /// YIG sphere diameter, m.
    pub sphere_diameter: f64,
    /// Bare single-magnon magnomechanical coupling, rad/s.
    pub g_mb_bare: f64,
    /// Bare magnon detuning Δ_m, rad/s.
    pub delta_m_bare: f64,
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        nonnegative("power", self.power)?;
        nonnegative("b0", self.b0)?;
        positive("sphere_diameter", self.sphere_diameter)?;
        positive("omega_l", self.omega_l)?;
        nonnegative("g_mb_bare", self.g_mb_bare)?;
        finite("delta_m_bare", self.delta_m_bare)
    }

    /// Sphere volume `(π/6) d³`.
    pub fn sphere_volume(&self) -> f64 {
        PI / 6.0 * self.sphere_diameter.powi(3)
    }

    /// Total spin number `N_s = ρ V`.
    pub fn spin_count(&self, consts: &PhysicalConstants) -> f64 {
        consts.spin_density * self.sphere_volume()
    }
}

/// Mean-field fixed point of the nonlinear equations of motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub c1s: Complex64,
    pub c2s: Complex64,
    pub es: Complex64,
    pub ms: Complex64,
    /// Dimensionless mechanical displacement.
    pub qs: f64,
    /// `Δ_m + g_mb qs`, rad/s.
    pub delta_m_eff_out: f64,
    /// `√2 g_mb |ms|`, rad/s.
    pub g_mb_out: f64,
    pub converged: bool,
    /// Mean-field residual relative to `max(|ε_l|, |ε_m|, 1)`.
    pub residual: f64,
}

impl SteadyState {
    /// The two ratios in the low-excitation validity condition
    /// `G_ce²/(Δ_e² + γ_e²) ≪ |c1s|⁻² ≪ 1`, reported but never enforced.
    pub fn excitation_ratios(&self, p: &SystemParams) -> (f64, f64) {
        let coupling = p.g_ce * p.g_ce / (p.delta_e * p.delta_e + p.gamma_e * p.gamma_e);
        (coupling, self.c1s.norm_sqr().recip())
    }

    pub fn mean_field(&self) -> MeanField {
        MeanField { c1: self.c1s, c2: self.c2s, m: self.ms, e: self.es, q: self.qs, p: 0.0 }
    }
}

/// Effective cavity-1 decay with feedback, `κ_c (1 − 2 r_B cos φ)`.
///
/// Can be zero or negative; stability is then decided by the drift spectrum.
pub fn feedback_decay(kappa_c: f64, fb: &FeedbackSpec) -> f64 {
    kappa_c * (1.0 - 2.0 * fb.r_b * fb.phi.cos())
}

/// Effective cavity-1 detuning with feedback, `Δ₁ − 2 κ_c r_B sin φ`.
pub fn feedback_detuning(delta_1: f64, kappa_c: f64, fb: &FeedbackSpec) -> f64 {
    delta_1 - 2.0 * kappa_c * fb.r_b * fb.phi.sin()
}

/// Bose–Einstein occupation `1 / (exp(ħω / k_B T) − 1)`, exactly zero at `T = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64, consts: &PhysicalConstants) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = consts.hbar * omega / (consts.k_b * temperature);
    x.exp_m1().recip()
}

/// Drive amplitudes `(ε_l, ε_m)` in rad/s.
///
/// `ε_l = sqrt(2 P κ_c / ħ ω_l)` and `ε_m = (5/4) γ sqrt(N_s) B₀`.
pub fn drive_amplitudes(d: &DriveSpec, kappa_c: f64, consts: &PhysicalConstants) -> (f64, f64) {
    let eps_l = (2.0 * d.power * kappa_c / (consts.hbar * d.omega_l)).sqrt();
    let eps_m = 1.25 * consts.gamma_gyro * d.spin_count(consts).sqrt() * d.b0;
    (eps_l, eps_m)
}

const RELAXATION: f64 = 0.5;
const FIXED_POINT_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 10_000;

/// Self-consistent steady state in the microscopic entry path.
///
/// For a fixed displacement `qs` the four complex amplitude equations are
/// linear and solved directly; `qs = −(g_mb/ω_b)|ms|²` is then closed by a
/// damped scalar fixed-point iteration.
pub fn solve_steady_state(p: &SystemParams, d: &DriveSpec, eps_l: f64, eps_m: f64) -> Result<SteadyState> {
    p.validate()?;
    d.validate()?;

    let g = d.g_mb_bare;
    let mut qs = 0.0;
    let mut amps = linear_amplitudes(p, d.delta_m_bare, eps_l, eps_m)?;
    let mut iterations = 0;
    let mut last_step = 0.0;

    if g > 0.0 {
        let mut converged = false;
        while iterations < MAX_ITERATIONS {
            iterations += 1;
            let target = -(g / p.omega_b) * amps.m.norm_sqr();
            let next = (1.0 - RELAXATION) * qs + RELAXATION * target;
            last_step = (next - qs).abs();
            qs = next;
            amps = linear_amplitudes(p, d.delta_m_bare + g * qs, eps_l, eps_m)?;
            if last_step <= FIXED_POINT_TOL * qs.abs().max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { iterations, last_step });
        }
        // Final consistency pass so qs matches the returned |ms|.
        qs = -(g / p.omega_b) * amps.m.norm_sqr();
        amps = linear_amplitudes(p, d.delta_m_bare + g * qs, eps_l, eps_m)?;
    }

    let state = MeanField { q: qs, p: 0.0, ..amps };
    let rhs = mean_field_rhs(p, d, eps_l, eps_m, &state);
    let scale = eps_l.abs().max(eps_m.abs()).max(1.0);
    let residual = rhs.norm() / scale;

    Ok(SteadyState {
        c1s: amps.c1,
        c2s: amps.c2,
        es: amps.e,
        ms: amps.m,
        qs,
        delta_m_eff_out: d.delta_m_bare + g * qs,
        g_mb_out: SQRT_2 * g * amps.m.norm(),
        converged: true,
        residual,
    })
}

/// Solves the four linear amplitude equations for a given magnon detuning.
fn linear_amplitudes(p: &SystemParams, delta_m: f64, eps_l: f64, eps_m: f64) -> Result<MeanField> {
    let i = Complex64::i();
    let z = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    let kfb = p.kappa_fb();
    let dfb = p.delta_fb();
    // Unknowns ordered (c1, c2, m, e).
    #[rustfmt::skip]
    let lhs = Matrix4::new(
        re(kfb) + i * dfb,  i * p.j,                      z,                            i * p.g_ce,
        i * p.j,            re(p.kappa_c) + i * p.delta_2, i * p.g_mc,                  z,
        z,                  i * p.g_mc,                   re(p.kappa_m) + i * delta_m,  z,
        i * p.g_ce,         z,                            z,                            re(p.gamma_e) + i * p.delta_e,
    );
    let rhs = Vector4::new(re(p.feedback.t_b() * eps_l), z, re(eps_m), z);
    let sol = lhs.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    Ok(MeanField { c1: sol[0], c2: sol[1], m: sol[2], e: sol[3], q: 0.0, p: 0.0 })
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("{v} must be finite and > 0") })
    }
}

fn nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("{v} must be finite and >= 0") })
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: "must be finite".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kappa() -> f64 {
        mhz_to_rad(1.0)
    }

    #[test]
    fn feedback_decay_examples() {
        let k = kappa();
        for phi in [0.0, 0.7, PI, 5.0] {
            let fb = FeedbackSpec::new(0.0, phi).unwrap();
            assert_eq!(feedback_decay(k, &fb), k);
        }
        let fb = FeedbackSpec::new(0.75, PI).unwrap();
        assert!((feedback_decay(k, &fb) - 2.5 * k).abs() < 1e-9 * k);
        let fb = FeedbackSpec::new(0.5, 0.0).unwrap();
        assert_eq!(feedback_decay(k, &fb), 0.0);
    }

    #[test]
    fn feedback_detuning_examples() {
        let k = kappa();
        let d1 = -1.3 * mhz_to_rad(10.0);
        let fb = FeedbackSpec::new(0.75, PI).unwrap();
        assert!((feedback_detuning(d1, k, &fb) - d1).abs() < 1e-9 * k);
        let fb = FeedbackSpec::new(1.0, PI / 2.0).unwrap();
        assert!((feedback_detuning(0.0, k, &fb) + 2.0 * k).abs() < 1e-9 * k);
        let fb = FeedbackSpec::new(0.0, 0.3).unwrap();
        assert_eq!(feedback_detuning(d1, k, &fb), d1);
    }

    #[test]
    fn feedback_spec_validation() {
        assert!(FeedbackSpec::new(1.5, 0.0).is_err());
        assert!(FeedbackSpec::new(-0.1, 0.0).is_err());
        assert!(FeedbackSpec::new(0.3, f64::NAN).is_err());
        let fb = FeedbackSpec::new(0.3, 3.0 * PI).unwrap();
        assert!((fb.phi() - PI).abs() < 1e-12);
        let fb = FeedbackSpec::new(0.3, -PI / 2.0).unwrap();
        assert!((fb.phi() - 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn cfl_noise_factor() {
        let fb = FeedbackSpec::new(0.75, PI).unwrap();
        assert!((fb.noise_factor() - 0.4375 * 3.0625).abs() < 1e-12);
        assert_eq!(FeedbackSpec::off().noise_factor(), 1.0);
    }

    /// Independent oracle: high-temperature expansion k_B T/ħω − 1/2 + ħω/(12 k_B T).
    #[test]
    fn thermal_occupation_mechanical() {
        let c = PhysicalConstants::default();
        let omega = mhz_to_rad(10.0);
        let t = 0.01;
        let x = c.hbar * omega / (c.k_b * t);
        assert!((x - 0.048).abs() < 1e-3);
        let expansion = 1.0 / x - 0.5 + x / 12.0;
        let n = thermal_occupation(omega, t, &c);
        assert!((n - expansion).abs() < 1e-6, "{n} vs {expansion}");
        assert!((n - 20.35).abs() < 0.01);
    }

    #[test]
    fn thermal_occupation_microwave_is_negligible() {
        let c = PhysicalConstants::default();
        let omega = mhz_to_rad(10e3);
        let x = c.hbar * omega / (c.k_b * 0.01);
        assert!((x - 48.0).abs() < 0.1);
        let n = thermal_occupation(omega, 0.01, &c);
        assert!((n / (-x).exp() - 1.0).abs() < 1e-12);
        assert!(n > 1e-21 && n < 2e-21);
    }

    #[test]
    fn thermal_occupation_zero_temperature() {
        let c = PhysicalConstants::default();
        assert_eq!(thermal_occupation(mhz_to_rad(10.0), 0.0, &c), 0.0);
    }

    #[test]
    fn drive_amplitude_examples() {
        let c = PhysicalConstants::default();
        let mut d = DriveSpec {
            power: 0.0,
            omega_l: mhz_to_rad(10e3),
            b0: 0.0,
            sphere_diameter: 250e-6,
            g_mb_bare: mhz_to_rad(0.2e-6),
            delta_m_bare: 0.0,
        };
        let (el, em) = drive_amplitudes(&d, kappa(), &c);
        assert_eq!((el, em), (0.0, 0.0));

        // Volume oracle: sphere of radius r is (4/3)π r³.
        let r: f64 = 125e-6;
        let volume = 4.0 / 3.0 * PI * r.powi(3);
        assert!((d.sphere_volume() - volume).abs() < 1e-12 * volume);
        let ns = d.spin_count(&c);
        assert!((ns / 3.45e16 - 1.0).abs() < 5e-3, "{ns}");

        d.power = 8.9e-3;
        d.b0 = 1e-5;
        let (el, em) = drive_amplitudes(&d, kappa(), &c);
        let expected_l = (2.0 * d.power * kappa() / (c.hbar * d.omega_l)).sqrt();
        assert!((el - expected_l).abs() < 1e-12 * expected_l);
        assert!((em - 1.25 * c.gamma_gyro * ns.sqrt() * 1e-5).abs() < 1e-12 * em);
    }

    fn drive(g: f64, delta_m: f64) -> DriveSpec {
        DriveSpec {
            power: 0.0,
            omega_l: mhz_to_rad(10e3),
            b0: 0.0,
            sphere_diameter: 250e-6,
            g_mb_bare: g,
            delta_m_bare: delta_m,
        }
    }

    #[test]
    fn steady_state_decoupled_magnon() {
        let mut p = SystemParams::baseline();
        p.j = 0.0;
        p.g_ce = 0.0;
        p.g_mc = 0.0;
        let dm = 0.9 * p.omega_b;
        let eps_m = 1e12;
        let ss = solve_steady_state(&p, &drive(0.0, dm), 0.0, eps_m).unwrap();
        let expected = Complex64::new(eps_m, 0.0) / Complex64::new(p.kappa_m, dm);
        assert!((ss.ms - expected).norm() < 1e-12 * expected.norm());
        assert_eq!(ss.qs, 0.0);
        assert!(ss.residual < 1e-9);
    }

    #[test]
    fn steady_state_undriven() {
        let p = SystemParams::baseline();
        let ss = solve_steady_state(&p, &drive(mhz_to_rad(0.2e-6), 0.9 * p.omega_b), 0.0, 0.0).unwrap();
        for a in [ss.c1s, ss.c2s, ss.es, ss.ms] {
            assert_eq!(a.norm(), 0.0);
        }
        assert_eq!(ss.qs, 0.0);
    }

    #[test]
    fn steady_state_self_consistency() {
        let p = SystemParams::baseline();
        let g = mhz_to_rad(0.2e-6);
        let d = drive(g, 0.5 * p.omega_b);
        let ss = solve_steady_state(&p, &d, 5e13, 1e14).unwrap();
        assert!(ss.converged);
        let q_expected = -(g / p.omega_b) * ss.ms.norm_sqr();
        assert!((ss.qs - q_expected).abs() <= 1e-10 * q_expected.abs());
        assert!((ss.g_mb_out - SQRT_2 * g * ss.ms.norm()).abs() <= 1e-12 * ss.g_mb_out);
        assert!((ss.ms.norm() - ss.g_mb_out / (SQRT_2 * g)).abs() <= 1e-9 * ss.ms.norm());
        assert!(ss.residual < 1e-9, "residual {}", ss.residual);
        assert!(ss.g_mb_out > 0.0);
    }

    #[test]
    fn strong_magnon_drive_does_not_converge() {
        let p = SystemParams::baseline();
        let d = drive(mhz_to_rad(0.2e-6), 0.5 * p.omega_b);
        assert!(matches!(solve_steady_state(&p, &d, 5e13, 6e14), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn excitation_ratios_reported() {
        let p = SystemParams::baseline();
        let ss = solve_steady_state(&p, &drive(0.0, 0.9 * p.omega_b), 1e13, 0.0).unwrap();
        let (coupling, inv_amp) = ss.excitation_ratios(&p);
        assert!(coupling > 0.0 && inv_amp > 0.0 && inv_amp < 1.0);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = SystemParams::baseline();
        p.kappa_c = 0.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "kappa_c", .. })));
        let mut p = SystemParams::baseline();
        p.temperature = -1.0;
        assert!(p.validate().is_err());
        let mut d = drive(0.0, 0.0);
        d.sphere_diameter = 0.0;
        assert!(d.validate().is_err());
    }

    proptest! {
        #[test]
        fn no_feedback_is_identity(kappa in 1e3f64..1e9, delta in -1e9f64..1e9, phi in 0.0f64..TAU) {
            let fb = FeedbackSpec::new(0.0, phi).unwrap();
            prop_assert_eq!(feedback_decay(kappa, &fb), kappa);
            prop_assert_eq!(feedback_detuning(delta, kappa, &fb), delta);
        }

        #[test]
        fn transmissivity_complements_reflectivity(r in 0.0f64..=1.0, phi in -10.0f64..10.0) {
            let fb = FeedbackSpec::new(r, phi).unwrap();
            prop_assert!((fb.t_b() * fb.t_b() + fb.r_b() * fb.r_b() - 1.0).abs() <= 4.0 * f64::EPSILON);
            prop_assert!(fb.phi() >= 0.0 && fb.phi() < TAU);
        }

        #[test]
        fn occupation_monotone(f_mhz in 0.1f64..2e4, t1 in 1e-3f64..2.0, dt in 1e-4f64..1.0) {
            let c = PhysicalConstants::default();
            let w = mhz_to_rad(f_mhz);
            let (lo, hi) = (thermal_occupation(w, t1, &c), thermal_occupation(w, t1 + dt, &c));
            // Deep in the quantum regime both values underflow to zero.
            prop_assert!(hi > lo || hi == 0.0);
            let n2 = thermal_occupation(w * (1.0 + dt), t1, &c);
            prop_assert!(n2 < lo || lo == 0.0);
        }
    }
}
