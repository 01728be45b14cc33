//! TOML run configuration.
//!
//! Frequencies, rates and couplings are written in MHz as `X/2π`, temperature
//! in kelvin, the feedback phase as a multiple of π. Conversion to rad/s happens
//! in [`SystemSection::to_params`]; the structs themselves keep file units so
//! that emitting and re-loading a config is exact.
//!
//! Documented defaults: bath frequencies `omega_c1`, `omega_c2`, `omega_m`
//! (10 GHz), `mode = "independent"`, `pairs` = all ten bipartitions.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    drive_amplitudes, mhz_to_rad, rad_to_mhz, solve_steady_state, DriveSpec, FeedbackSpec, PhysicalConstants,
    SteadyState, SystemParams,
};
use crate::modes::ModePair;
use crate::sweep::{AxisParam, DetuningMode, FreeParam, SweepAxis};

fn default_bath() -> f64 {
    1.0e4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub kappa_c: f64,
    pub kappa_m: f64,
    pub gamma_e: f64,
    pub gamma_b: f64,
    pub omega_b: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_e: f64,
    pub delta_m_eff: f64,
    pub g_mc: f64,
    pub g_mb: f64,
    pub g_ce: f64,
    pub j: f64,
    /// Kelvin.
    pub temperature: f64,
    pub r_b: f64,
    pub phi_over_pi: f64,
    #[serde(default = "default_bath")]
    pub omega_c1: f64,
    #[serde(default = "default_bath")]
    pub omega_c2: f64,
    #[serde(default = "default_bath")]
    pub omega_m: f64,
}

fn keyed(section: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::InvalidParameter { name, reason } => Error::Validation { key: format!("{section}.{name}"), reason },
        other => other,
    }
}

impl SystemSection {
    /// The shipped baseline in file units.
    pub fn baseline() -> Self {
        SystemSection {
            kappa_c: 1.0,
            kappa_m: 1.0,
            gamma_e: 1.0,
            gamma_b: 1e-4,
            omega_b: 10.0,
            delta_1: -8.8,
            delta_2: 40.0,
            delta_e: -10.0,
            delta_m_eff: 9.0,
            g_mc: 3.2,
            g_mb: 4.8,
            g_ce: 6.0,
            j: 8.0,
            temperature: 0.01,
            r_b: 0.75,
            phi_over_pi: 1.0,
            omega_c1: default_bath(),
            omega_c2: default_bath(),
            omega_m: default_bath(),
        }
    }

    pub fn from_params(p: &SystemParams) -> Self {
        SystemSection {
            kappa_c: rad_to_mhz(p.kappa_c),
            kappa_m: rad_to_mhz(p.kappa_m),
            gamma_e: rad_to_mhz(p.gamma_e),
            gamma_b: rad_to_mhz(p.gamma_b),
            omega_b: rad_to_mhz(p.omega_b),
            delta_1: rad_to_mhz(p.delta_1),
            delta_2: rad_to_mhz(p.delta_2),
            delta_e: rad_to_mhz(p.delta_e),
            delta_m_eff: rad_to_mhz(p.delta_m_eff),
            g_mc: rad_to_mhz(p.g_mc),
            g_mb: rad_to_mhz(p.g_mb),
            g_ce: rad_to_mhz(p.g_ce),
            j: rad_to_mhz(p.j),
            temperature: p.temperature,
            r_b: p.feedback.r_b(),
            phi_over_pi: p.feedback.phi() / PI,
            omega_c1: rad_to_mhz(p.omega_c1),
            omega_c2: rad_to_mhz(p.omega_c2),
            omega_m: rad_to_mhz(p.omega_m),
        }
    }

    /// Converts to rad/s and validates; errors name the offending key.
    pub fn to_params(&self) -> Result<SystemParams> {
        let feedback = FeedbackSpec::new(self.r_b, self.phi_over_pi * PI).map_err(|e| match e {
            Error::InvalidParameter { name: "phi", reason } => {
                Error::Validation { key: "system.phi_over_pi".into(), reason }
            }
            other => keyed("system")(other),
        })?;
        let p = SystemParams {
            kappa_c: mhz_to_rad(self.kappa_c),
            kappa_m: mhz_to_rad(self.kappa_m),
            gamma_e: mhz_to_rad(self.gamma_e),
            gamma_b: mhz_to_rad(self.gamma_b),
            omega_b: mhz_to_rad(self.omega_b),
            delta_1: mhz_to_rad(self.delta_1),
            delta_2: mhz_to_rad(self.delta_2),
            delta_e: mhz_to_rad(self.delta_e),
            delta_m_eff: mhz_to_rad(self.delta_m_eff),
            g_mc: mhz_to_rad(self.g_mc),
            g_mb: mhz_to_rad(self.g_mb),
            g_ce: mhz_to_rad(self.g_ce),
            j: mhz_to_rad(self.j),
            temperature: self.temperature,
            omega_c1: mhz_to_rad(self.omega_c1),
            omega_c2: mhz_to_rad(self.omega_c2),
            omega_m: mhz_to_rad(self.omega_m),
            feedback,
        };
        p.validate().map_err(keyed("system"))?;
        Ok(p)
    }
}

/// Microscopic drive; when present, `delta_m_eff` and `g_mb` are derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Watts.
    pub power: f64,
    pub omega_l: f64,
    /// Tesla.
    pub b0: f64,
    /// Metres.
    pub sphere_diameter: f64,
    pub g_mb_bare: f64,
    pub delta_m_bare: f64,
}

impl DriveSection {
    pub fn to_spec(&self) -> Result<DriveSpec> {
        let d = DriveSpec {
            power: self.power,
            omega_l: mhz_to_rad(self.omega_l),
            b0: self.b0,
            sphere_diameter: self.sphere_diameter,
            g_mb_bare: mhz_to_rad(self.g_mb_bare),
            delta_m_bare: mhz_to_rad(self.delta_m_bare),
        };
        d.validate().map_err(keyed("drive"))?;
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AxisSection {
    fn to_axis(&self, key: &str) -> Result<SweepAxis> {
        let param: AxisParam =
            self.param.parse().map_err(|reason| Error::Validation { key: format!("{key}.param"), reason })?;
        SweepAxis::new(param, self.start, self.stop, self.count)
            .map_err(|e| Error::Validation { key: key.to_string(), reason: e.to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep1dSection {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep2dSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<String>>,
    pub x: AxisSection,
    pub y: AxisSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TempscanSection {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<String>>,
}

/// Reflectivity and phase (units of π) ranges of a feedback map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbscanSection {
    pub r_start: f64,
    pub r_stop: f64,
    pub r_count: usize,
    pub phi_start: f64,
    pub phi_stop: f64,
    pub phi_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeSection {
    pub param: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub pair: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    pub free: Vec<FreeSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep1d: Option<Sweep1dSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep2d: Option<Sweep2dSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tempscan: Option<TempscanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fbscan: Option<FbscanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

impl Default for RunConfig {
    /// Baseline system with no command sections.
    fn default() -> Self {
        RunConfig {
            system: SystemSection::baseline(),
            drive: None,
            sweep1d: None,
            sweep2d: None,
            tempscan: None,
            fbscan: None,
            optimize: None,
            output: None,
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Parses and validates a config held in memory.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    if text.trim().is_empty() {
        return Err(Error::Parse("config file is empty".into()));
    }
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        match msg.strip_prefix("unknown field `") {
            Some(rest) => Error::UnknownKey(rest.split('`').next().unwrap_or(rest).to_string()),
            None => Error::Parse(e.to_string()),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn emit_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}

fn parse_mode(mode: &Option<String>, key: &str) -> Result<DetuningMode> {
    match mode {
        None => Ok(DetuningMode::Independent),
        Some(s) => s.parse().map_err(|reason| Error::Validation { key: format!("{key}.mode"), reason }),
    }
}

fn parse_pairs(pairs: &Option<Vec<String>>, key: &str) -> Result<Vec<ModePair>> {
    match pairs {
        None => Ok(ModePair::all()),
        Some(list) if list.is_empty() => {
            Err(Error::Validation { key: format!("{key}.pairs"), reason: "at least one pair is required".into() })
        }
        Some(list) => list
            .iter()
            .map(|s| s.parse().map_err(|reason| Error::Validation { key: format!("{key}.pairs"), reason }))
            .collect(),
    }
}

fn check_modes(axes: &[&SweepAxis], mode: DetuningMode, key: &str) -> Result<()> {
    if mode == DetuningMode::Independent && axes.iter().any(|a| a.param == AxisParam::DeltaC) {
        return Err(Error::Validation {
            key: format!("{key}.mode"),
            reason: "delta_c axes need mode = \"symmetric\" or \"antisymmetric\"".into(),
        });
    }
    Ok(())
}

/// Validated one-dimensional sweep request.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRequest {
    pub axis: SweepAxis,
    pub mode: DetuningMode,
    pub pairs: Vec<ModePair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRequest {
    pub x: SweepAxis,
    pub y: SweepAxis,
    pub mode: DetuningMode,
    pub pairs: Vec<ModePair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeRequest {
    pub pair: ModePair,
    pub mode: DetuningMode,
    pub free: Vec<FreeParam>,
    pub coarse_points: Option<usize>,
    pub seeds: Option<usize>,
}

fn missing(section: &str) -> Error {
    Error::Validation { key: section.to_string(), reason: "section is required by this command".into() }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.to_params()?;
        if let Some(d) = &self.drive {
            d.to_spec()?;
        }
        if self.sweep1d.is_some() {
            self.sweep1d_request()?;
        }
        if self.sweep2d.is_some() {
            self.sweep2d_request()?;
        }
        if self.tempscan.is_some() {
            self.tempscan_request()?;
        }
        if self.fbscan.is_some() {
            self.fbscan_request()?;
        }
        if self.optimize.is_some() {
            self.optimize_request()?;
        }
        if let Some(out) = &self.output {
            if let Some(f) = &out.format {
                if f != "csv" && f != "json" {
                    return Err(Error::Validation {
                        key: "output.format".into(),
                        reason: format!("expected \"csv\" or \"json\", got \"{f}\""),
                    });
                }
            }
        }
        Ok(())
    }

    /// Effective-mode parameters exactly as written in `[system]`.
    pub fn params(&self) -> Result<SystemParams> {
        self.system.to_params()
    }

    /// Parameters with `delta_m_eff` and `g_mb` replaced by the drive-derived
    /// steady state, if a `[drive]` section is present.
    pub fn microscopic(&self) -> Result<Option<(SystemParams, SteadyState)>> {
        let Some(section) = &self.drive else {
            return Ok(None);
        };
        let p = self.params()?;
        let d = section.to_spec()?;
        let (eps_l, eps_m) = drive_amplitudes(&d, p.kappa_c, &PhysicalConstants::default());
        let ss = solve_steady_state(&p, &d, eps_l, eps_m)?;
        Ok(Some((p.with_steady_state(&ss), ss)))
    }

    pub fn sweep1d_request(&self) -> Result<LineRequest> {
        let s = self.sweep1d.as_ref().ok_or_else(|| missing("sweep1d"))?;
        let axis =
            AxisSection { param: s.param.clone(), start: s.start, stop: s.stop, count: s.count }.to_axis("sweep1d")?;
        let mode = parse_mode(&s.mode, "sweep1d")?;
        check_modes(&[&axis], mode, "sweep1d")?;
        Ok(LineRequest { axis, mode, pairs: parse_pairs(&s.pairs, "sweep1d")? })
    }

    pub fn sweep2d_request(&self) -> Result<GridRequest> {
        let s = self.sweep2d.as_ref().ok_or_else(|| missing("sweep2d"))?;
        let x = s.x.to_axis("sweep2d.x")?;
        let y = s.y.to_axis("sweep2d.y")?;
        let mode = parse_mode(&s.mode, "sweep2d")?;
        check_modes(&[&x, &y], mode, "sweep2d")?;
        Ok(GridRequest { x, y, mode, pairs: parse_pairs(&s.pairs, "sweep2d")? })
    }

    pub fn tempscan_request(&self) -> Result<LineRequest> {
        let s = self.tempscan.as_ref().ok_or_else(|| missing("tempscan"))?;
        if s.start < 0.0 || s.stop < 0.0 {
            return Err(Error::Validation { key: "tempscan.start".into(), reason: "temperatures must be >= 0".into() });
        }
        let axis = SweepAxis::new(AxisParam::Temperature, s.start, s.stop, s.count)
            .map_err(|e| Error::Validation { key: "tempscan".into(), reason: e.to_string() })?;
        Ok(LineRequest { axis, mode: DetuningMode::Independent, pairs: parse_pairs(&s.pairs, "tempscan")? })
    }

    pub fn fbscan_request(&self) -> Result<GridRequest> {
        let s = self.fbscan.as_ref().ok_or_else(|| missing("fbscan"))?;
        for (key, v) in [("fbscan.r_start", s.r_start), ("fbscan.r_stop", s.r_stop)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Validation { key: key.into(), reason: format!("reflectivity {v} outside [0, 1)") });
            }
        }
        let wrap = |key: &str, e: Error| Error::Validation { key: key.into(), reason: e.to_string() };
        let x = SweepAxis::new(AxisParam::Reflectivity, s.r_start, s.r_stop, s.r_count)
            .map_err(|e| wrap("fbscan.r_count", e))?;
        let y = SweepAxis::new(AxisParam::Phase, s.phi_start, s.phi_stop, s.phi_count)
            .map_err(|e| wrap("fbscan.phi_count", e))?;
        Ok(GridRequest { x, y, mode: DetuningMode::Independent, pairs: parse_pairs(&s.pairs, "fbscan")? })
    }

    pub fn optimize_request(&self) -> Result<OptimizeRequest> {
        let s = self.optimize.as_ref().ok_or_else(|| missing("optimize"))?;
        let pair = s.pair.parse().map_err(|reason| Error::Validation { key: "optimize.pair".into(), reason })?;
        let mode = parse_mode(&s.mode, "optimize")?;
        if s.free.is_empty() || s.free.len() > 5 {
            return Err(Error::Validation {
                key: "optimize.free".into(),
                reason: format!("expected 1 to 5 free parameters, got {}", s.free.len()),
            });
        }
        let free = s
            .free
            .iter()
            .map(|f| {
                let param: AxisParam = f
                    .param
                    .parse()
                    .map_err(|reason| Error::Validation { key: "optimize.free.param".into(), reason })?;
                if !(f.lower < f.upper) {
                    return Err(Error::Validation {
                        key: "optimize.free.lower".into(),
                        reason: format!("lower bound {} must be below upper bound {}", f.lower, f.upper),
                    });
                }
                if param == AxisParam::DeltaC && mode == DetuningMode::Independent {
                    return Err(Error::Validation {
                        key: "optimize.mode".into(),
                        reason: "delta_c needs mode = \"symmetric\" or \"antisymmetric\"".into(),
                    });
                }
                Ok(FreeParam { param, lower: f.lower, upper: f.upper })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OptimizeRequest { pair, mode, free, coarse_points: s.coarse_points, seeds: s.seeds })
    }
}
