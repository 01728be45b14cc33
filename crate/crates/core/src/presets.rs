//! Named figure presets.
//!
//! Each preset fixes the caption parameters on top of [`SystemParams::baseline`]
//! and describes one or more sweeps. Axis ranges follow the figure axes where they
//! are readable; grid resolution defaults to 101×101 for maps and 401 for lines.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::modes::{Mode, ModePair};
use crate::sweep::{
    scan_temperature, sweep_1d, sweep_2d, AxisParam, DetuningMode, SweepAxis, SweepOptions, SweepResult,
};

pub const PRESET_NAMES: [&str; 19] = [
    "f1a", "f1b", "f1c", "f1d", "f2a", "f2b", "f5a", "f5b", "f5c", "f5d", "f6a", "f6b", "f6c", "f6d", "f7a", "f7b",
    "f8", "f9a", "f9b",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    /// Points per axis of a 2D map.
    pub grid: usize,
    /// Points of a line scan.
    pub line: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { grid: 101, line: 401 }
    }
}

/// One sweep belonging to a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetRun {
    /// Suffix used in output file names; empty for single-run presets.
    pub label: String,
    pub base: SystemParams,
    pub axes: Vec<SweepAxis>,
    pub mode: DetuningMode,
    pub pairs: Vec<ModePair>,
}

impl PresetRun {
    pub fn run(&self, opts: SweepOptions) -> Result<SweepResult> {
        match self.axes.as_slice() {
            [t] if t.param == AxisParam::Temperature => {
                scan_temperature(&self.base, t.start, t.stop, t.count, &self.pairs, opts)
            }
            [a] => sweep_1d(&self.base, *a, self.mode, &self.pairs, opts),
            [a, b] => sweep_2d(&self.base, *a, *b, self.mode, &self.pairs, opts),
            _ => Err(Error::InvalidParameter { name: "axes", reason: "preset runs take one or two axes".into() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub runs: Vec<PresetRun>,
}

impl Preset {
    /// Runs every sweep, tagging each result with the preset name.
    pub fn execute(&self, opts: SweepOptions) -> Result<Vec<(String, SweepResult)>> {
        self.runs
            .iter()
            .map(|run| {
                let mut result = run.run(opts)?;
                result.provenance.preset = Some(self.name.to_string());
                let stem =
                    if run.label.is_empty() { self.name.to_string() } else { format!("{}_{}", self.name, run.label) };
                Ok((stem, result))
            })
            .collect()
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.description)
    }
}

fn pair(a: Mode, b: Mode) -> ModePair {
    ModePair::new(a, b).expect("distinct modes")
}

/// `base` with detunings and J overridden, in units of ω_b.
fn caption(base: &SystemParams, delta_1: f64, delta_2: f64, delta_e: f64, delta_m: f64, j: f64) -> SystemParams {
    let mut p = *base;
    let wb = p.omega_b;
    p.delta_1 = delta_1 * wb;
    p.delta_2 = delta_2 * wb;
    p.delta_e = delta_e * wb;
    p.delta_m_eff = delta_m * wb;
    p.j = j * wb;
    p
}

fn axis(param: AxisParam, start: f64, stop: f64, count: usize) -> SweepAxis {
    SweepAxis { param, start, stop, count }
}

/// Optimized parameter set used for the temperature scans of `pair` (be, me, c1b or c1m).
pub fn optimized_params(pair: ModePair) -> Option<SystemParams> {
    optimized_params_from(&SystemParams::baseline(), pair)
}

pub fn optimized_params_from(base: &SystemParams, pair: ModePair) -> Option<SystemParams> {
    match pair.label().as_str() {
        "be" | "me" => Some(caption(base, -0.88, 4.0, -1.0, 0.9, 0.8)),
        "c1b" | "c1m" => Some(caption(base, -4.0, 4.0, 1.0, 0.9, 0.8)),
        _ => None,
    }
}

/// Feedback-map detunings: panel `a` is Δ₁ = Δ₂ = −1.75 ω_b, panel `b` is Δ₁ = −2, Δ₂ = −1.4.
pub fn feedback_panel_params(panel: char) -> Option<SystemParams> {
    feedback_panel_params_from(&SystemParams::baseline(), panel)
}

pub fn feedback_panel_params_from(base: &SystemParams, panel: char) -> Option<SystemParams> {
    match panel {
        'a' => Some(caption(base, -1.75, -1.75, -1.0, 0.9, 0.8)),
        'b' => Some(caption(base, -2.0, -1.4, -1.0, 0.9, 0.8)),
        _ => None,
    }
}

pub fn preset(name: &str, res: Resolution) -> Result<Preset> {
    preset_from(name, res, &SystemParams::baseline())
}

/// Like [`preset`], but caption values are applied on top of `base`.
pub fn preset_from(name: &str, res: Resolution, base: &SystemParams) -> Result<Preset> {
    use Mode::*;
    let g = res.grid;
    let n = res.line;
    let single = |base: SystemParams, axes: Vec<SweepAxis>, mode: DetuningMode, pairs: Vec<ModePair>| {
        vec![PresetRun { label: String::new(), base, axes, mode, pairs }]
    };
    let detuning_map = || vec![axis(AxisParam::Delta1, -5.0, 5.0, g), axis(AxisParam::Delta2, -5.0, 5.0, g)];
    let fig1 = caption(base, 0.0, 0.0, 1.0, 0.9, 0.8);
    let fig2 = caption(base, 0.0, 0.0, -1.0, 0.9, 0.8);
    let fig5 = caption(base, 0.0, 0.0, -1.0, 0.9, 1.0);
    let fig6 = caption(base, 0.0, 0.0, -1.0, 0.9, 0.8);
    let fig7 = caption(base, 0.0, 0.0, -1.0, 0.9, 0.4);
    let fig5_axes = || vec![axis(AxisParam::DeltaC, -2.0, 2.0, g), axis(AxisParam::DeltaMEff, 0.0, 2.0, g)];
    let fig6_axes = || vec![axis(AxisParam::DeltaC, -5.0, 5.0, g), axis(AxisParam::DeltaE, -5.0, 5.0, g)];
    let fig9_axes = || vec![axis(AxisParam::Reflectivity, 0.0, 0.99, g), axis(AxisParam::Phase, 0.0, 2.0, g)];
    let fig7_pairs = vec![pair(B, E), pair(M, E), pair(C1, B), pair(C1, M), pair(M, B), pair(C2, B), pair(C2, M)];
    let sym = DetuningMode::Symmetric;
    let anti = DetuningMode::Antisymmetric;
    let ind = DetuningMode::Independent;

    let (name, description, runs) = match name {
        "f1a" => ("f1a", "E_N^{c1b} over (Δ1, Δ2), Δe = +ωb", single(fig1, detuning_map(), ind, vec![pair(C1, B)])),
        "f1b" => ("f1b", "E_N^{c2b} over (Δ1, Δ2), Δe = +ωb", single(fig1, detuning_map(), ind, vec![pair(C2, B)])),
        "f1c" => ("f1c", "E_N^{c1m} over (Δ1, Δ2), Δe = +ωb", single(fig1, detuning_map(), ind, vec![pair(C1, M)])),
        "f1d" => ("f1d", "E_N^{c2m} over (Δ1, Δ2), Δe = +ωb", single(fig1, detuning_map(), ind, vec![pair(C2, M)])),
        "f2a" => ("f2a", "E_N^{be} over (Δ1, Δ2), Δe = −ωb", single(fig2, detuning_map(), ind, vec![pair(B, E)])),
        "f2b" => ("f2b", "E_N^{me} over (Δ1, Δ2), Δe = −ωb", single(fig2, detuning_map(), ind, vec![pair(M, E)])),
        "f5a" => ("f5a", "E_N^{be} over (Δc, Δ̃m), symmetric", single(fig5, fig5_axes(), sym, vec![pair(B, E)])),
        "f5b" => ("f5b", "E_N^{be} over (Δc, Δ̃m), antisymmetric", single(fig5, fig5_axes(), anti, vec![pair(B, E)])),
        "f5c" => ("f5c", "E_N^{me} over (Δc, Δ̃m), symmetric", single(fig5, fig5_axes(), sym, vec![pair(M, E)])),
        "f5d" => ("f5d", "E_N^{me} over (Δc, Δ̃m), antisymmetric", single(fig5, fig5_axes(), anti, vec![pair(M, E)])),
        "f6a" => ("f6a", "E_N^{be} over (Δc, Δe), symmetric", single(fig6, fig6_axes(), sym, vec![pair(B, E)])),
        "f6b" => ("f6b", "E_N^{be} over (Δc, Δe), antisymmetric", single(fig6, fig6_axes(), anti, vec![pair(B, E)])),
        "f6c" => ("f6c", "E_N^{me} over (Δc, Δe), symmetric", single(fig6, fig6_axes(), sym, vec![pair(M, E)])),
        "f6d" => ("f6d", "E_N^{me} over (Δc, Δe), antisymmetric", single(fig6, fig6_axes(), anti, vec![pair(M, E)])),
        "f7a" => (
            "f7a",
            "seven pairs along Δc, symmetric, J = 0.4ωb",
            single(fig7, vec![axis(AxisParam::DeltaC, -5.0, 5.0, n)], sym, fig7_pairs),
        ),
        "f7b" => (
            "f7b",
            "seven pairs along Δc, antisymmetric, J = 0.4ωb",
            single(fig7, vec![axis(AxisParam::DeltaC, -5.0, 5.0, n)], anti, fig7_pairs),
        ),
        "f8" => {
            let runs = [pair(B, E), pair(M, E), pair(C1, B), pair(C1, M)]
                .into_iter()
                .map(|p| PresetRun {
                    label: p.label(),
                    base: optimized_params_from(base, p).expect("table row"),
                    axes: vec![axis(AxisParam::Temperature, 0.0, 0.8, n)],
                    mode: ind,
                    pairs: vec![p],
                })
                .collect();
            ("f8", "four temperature scans at the optimized detunings", runs)
        }
        "f9a" => (
            "f9a",
            "E_N^{be} and E_N^{me} over (r_B, φ/π), Δ1 = Δ2 = −1.75ωb",
            single(feedback_panel_params_from(base, 'a').unwrap(), fig9_axes(), ind, vec![pair(B, E), pair(M, E)]),
        ),
        "f9b" => (
            "f9b",
            "E_N^{be} and E_N^{me} over (r_B, φ/π), Δ1 = −2ωb, Δ2 = −1.4ωb",
            single(feedback_panel_params_from(base, 'b').unwrap(), fig9_axes(), ind, vec![pair(B, E), pair(M, E)]),
        ),
        other => return Err(Error::InvalidParameter { name: "preset", reason: format!("unknown preset `{other}`") }),
    };
    Ok(Preset { name, description, runs })
}

/// Every preset at the given resolution, in listing order.
pub fn all_presets(res: Resolution) -> Vec<Preset> {
    PRESET_NAMES.iter().filter_map(|n| preset(n, res).ok()).collect()
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        preset(s, Resolution::default())
    }
}
