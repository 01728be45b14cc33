//! Parameter grids, line scans and the bounded pattern-search optimizer.
//!
//! Axis values are expressed in *display units*: frequencies and rates as
//! multiples of `ω_b`, the feedback phase as a multiple of `π`, temperature in
//! kelvin and the reflectivity as a plain number. This is the convention of the
//! figure axes (`Δ₁/ω_b`, `φ/π`, `T[K]`).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_diffusion, build_drift, stability_and_covariance, MARGINAL_BAND};
use crate::entanglement::{pairs_entanglement, EntanglementResult};
use crate::error::{Error, Result};
use crate::model::{FeedbackSpec, SystemParams};
use crate::modes::ModePair;

/// Parameter a sweep axis (or optimizer coordinate) drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisParam {
    Delta1,
    Delta2,
    /// Aggregate cavity detuning Δ_c, interpreted through the [`DetuningMode`].
    DeltaC,
    DeltaE,
    DeltaMEff,
    J,
    GCe,
    GMc,
    GMb,
    KappaC,
    KappaM,
    GammaE,
    GammaB,
    Temperature,
    Reflectivity,
    Phase,
}

impl AxisParam {
    pub const ALL: [AxisParam; 16] = [
        AxisParam::Delta1,
        AxisParam::Delta2,
        AxisParam::DeltaC,
        AxisParam::DeltaE,
        AxisParam::DeltaMEff,
        AxisParam::J,
        AxisParam::GCe,
        AxisParam::GMc,
        AxisParam::GMb,
        AxisParam::KappaC,
        AxisParam::KappaM,
        AxisParam::GammaE,
        AxisParam::GammaB,
        AxisParam::Temperature,
        AxisParam::Reflectivity,
        AxisParam::Phase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxisParam::Delta1 => "delta_1",
            AxisParam::Delta2 => "delta_2",
            AxisParam::DeltaC => "delta_c",
            AxisParam::DeltaE => "delta_e",
            AxisParam::DeltaMEff => "delta_m_eff",
            AxisParam::J => "j",
            AxisParam::GCe => "g_ce",
            AxisParam::GMc => "g_mc",
            AxisParam::GMb => "g_mb",
            AxisParam::KappaC => "kappa_c",
            AxisParam::KappaM => "kappa_m",
            AxisParam::GammaE => "gamma_e",
            AxisParam::GammaB => "gamma_b",
            AxisParam::Temperature => "temperature",
            AxisParam::Reflectivity => "r_b",
            AxisParam::Phase => "phi",
        }
    }

    /// Unit of the display value.
    pub fn unit(self) -> &'static str {
        match self {
            AxisParam::Temperature => "K",
            AxisParam::Reflectivity => "1",
            AxisParam::Phase => "pi",
            _ => "omega_b",
        }
    }

    /// Writes `value` (display units) into `p`.
    pub fn apply(self, p: &mut SystemParams, value: f64, mode: DetuningMode) -> Result<()> {
        let wb = p.omega_b;
        match self {
            AxisParam::Delta1 => p.delta_1 = value * wb,
            AxisParam::Delta2 => p.delta_2 = value * wb,
            AxisParam::DeltaC => match mode {
                DetuningMode::Symmetric => {
                    p.delta_1 = value * wb;
                    p.delta_2 = value * wb;
                }
                DetuningMode::Antisymmetric => {
                    p.delta_1 = -value * wb;
                    p.delta_2 = value * wb;
                }
                DetuningMode::Independent => {
                    return Err(Error::InvalidParameter {
                        name: "delta_c",
                        reason: "aggregate detuning needs a symmetric or antisymmetric mode".into(),
                    })
                }
            },
            AxisParam::DeltaE => p.delta_e = value * wb,
            AxisParam::DeltaMEff => p.delta_m_eff = value * wb,
            AxisParam::J => p.j = value * wb,
            AxisParam::GCe => p.g_ce = value * wb,
            AxisParam::GMc => p.g_mc = value * wb,
            AxisParam::GMb => p.g_mb = value * wb,
            AxisParam::KappaC => p.kappa_c = value * wb,
            AxisParam::KappaM => p.kappa_m = value * wb,
            AxisParam::GammaE => p.gamma_e = value * wb,
            AxisParam::GammaB => p.gamma_b = value * wb,
            AxisParam::Temperature => p.temperature = value,
            AxisParam::Reflectivity => p.feedback = FeedbackSpec::new(value, p.feedback.phi())?,
            AxisParam::Phase => p.feedback = FeedbackSpec::new(p.feedback.r_b(), value * PI)?,
        }
        Ok(())
    }

    /// Reads the display value of this parameter from `p`.
    pub fn read(self, p: &SystemParams, mode: DetuningMode) -> f64 {
        let wb = p.omega_b;
        match self {
            AxisParam::Delta1 => p.delta_1 / wb,
            AxisParam::Delta2 => p.delta_2 / wb,
            AxisParam::DeltaC => match mode {
                DetuningMode::Antisymmetric => p.delta_2 / wb,
                _ => p.delta_1 / wb,
            },
            AxisParam::DeltaE => p.delta_e / wb,
            AxisParam::DeltaMEff => p.delta_m_eff / wb,
            AxisParam::J => p.j / wb,
            AxisParam::GCe => p.g_ce / wb,
            AxisParam::GMc => p.g_mc / wb,
            AxisParam::GMb => p.g_mb / wb,
            AxisParam::KappaC => p.kappa_c / wb,
            AxisParam::KappaM => p.kappa_m / wb,
            AxisParam::GammaE => p.gamma_e / wb,
            AxisParam::GammaB => p.gamma_b / wb,
            AxisParam::Temperature => p.temperature,
            AxisParam::Reflectivity => p.feedback.r_b(),
            AxisParam::Phase => p.feedback.phi() / PI,
        }
    }

    fn touches_detuning_pair(self) -> bool {
        matches!(self, AxisParam::Delta1 | AxisParam::Delta2 | AxisParam::DeltaC)
    }
}

impl fmt::Display for AxisParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxisParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        AxisParam::ALL.iter().copied().find(|p| p.name() == s).ok_or_else(|| format!("unknown sweep parameter `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetuningMode {
    #[default]
    Independent,
    /// Δ₁ = Δ₂ = Δ_c.
    Symmetric,
    /// Δ₁ = −Δ_c, Δ₂ = Δ_c.
    Antisymmetric,
}

impl FromStr for DetuningMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "independent" => Ok(DetuningMode::Independent),
            "symmetric" => Ok(DetuningMode::Symmetric),
            "antisymmetric" => Ok(DetuningMode::Antisymmetric),
            other => Err(format!("unknown detuning mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: AxisParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn new(param: AxisParam, start: f64, stop: f64, count: usize) -> Result<Self> {
        let axis = SweepAxis { param, start, stop, count };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidParameter {
                name: "count",
                reason: format!("axis `{}` needs at least 2 points", self.param),
            });
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.start == self.stop {
            return Err(Error::InvalidParameter {
                name: "start",
                reason: format!("axis `{}` needs distinct finite endpoints", self.param),
            });
        }
        Ok(())
    }

    /// Evenly spaced values; the last one is exactly `stop`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.count - 1;
        (0..=n)
            .map(|i| if i == n { self.stop } else { self.start + (self.stop - self.start) * (i as f64 / n as f64) })
            .collect()
    }

    pub fn spacing(&self) -> f64 {
        (self.stop - self.start).abs() / (self.count - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    Stable,
    /// Stable, but within the marginal band; excluded from maxima.
    Marginal,
    Unstable,
    /// Parameters invalid or a numerical stage failed.
    Failed,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Stable => "stable",
            PointStatus::Marginal => "marginal",
            PointStatus::Unstable => "unstable",
            PointStatus::Failed => "failed",
        }
    }

    /// Classifies a spectral abscissa relative to the mechanical frequency.
    pub fn classify(max_real_eig: f64, omega_b: f64) -> PointStatus {
        if max_real_eig >= 0.0 {
            PointStatus::Unstable
        } else if max_real_eig > -MARGINAL_BAND * omega_b {
            PointStatus::Marginal
        } else {
            PointStatus::Stable
        }
    }
}

impl fmt::Display for PointStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of the full pipeline at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    /// Axis coordinates in display units.
    pub coords: Vec<f64>,
    pub status: PointStatus,
    pub max_real_eig: Option<f64>,
    /// Smallest eigenvalue of `C + (i/2)Ω`; present whenever a covariance was computed.
    pub physicality_margin: Option<f64>,
    /// Maximum Lyapunov residual relative to `‖D‖_max`.
    pub lyapunov_residual: Option<f64>,
    /// One entry per requested pair; `None` unless the point is stable.
    pub values: Vec<Option<f64>>,
}

/// Runs feedback transforms, drift/diffusion, stability, Lyapunov and `E_N` at one point.
pub fn evaluate_point(p: &SystemParams, pairs: &[ModePair]) -> PointRecord {
    let failed = |max_real_eig| PointRecord {
        coords: Vec::new(),
        status: PointStatus::Failed,
        max_real_eig,
        physicality_margin: None,
        lyapunov_residual: None,
        values: vec![None; pairs.len()],
    };
    if p.validate().is_err() {
        return failed(None);
    }
    let a = build_drift(p);
    let d = build_diffusion(p);
    let (report, covariance) = match stability_and_covariance(&a, &d) {
        Ok(x) => x,
        Err(_) => return failed(None),
    };
    let status = PointStatus::classify(report.max_real_eig, p.omega_b);
    let mut record = PointRecord {
        coords: Vec::new(),
        status,
        max_real_eig: Some(report.max_real_eig),
        physicality_margin: None,
        lyapunov_residual: None,
        values: vec![None; pairs.len()],
    };
    let c = match covariance {
        None => return record,
        Some(Ok(c)) => c,
        Some(Err(_)) => return failed(Some(report.max_real_eig)),
    };
    record.physicality_margin = Some(c.physicality_margin());
    let dnorm = d.amax();
    if dnorm > 0.0 {
        record.lyapunov_residual = Some(crate::dynamics::lyapunov_residual(&a, c.matrix(), &d) / dnorm);
    }
    if status != PointStatus::Stable {
        return record;
    }
    match pairs_entanglement(&c, pairs) {
        Ok(results) => {
            record.values = results.iter().map(|r| Some(r.log_negativity)).collect();
            record
        }
        Err(_) => PointRecord { status: PointStatus::Failed, values: vec![None; pairs.len()], ..record },
    }
}

/// Full diagnostics at one point: stability, physicality and all ten bipartitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointAnalysis {
    pub status: PointStatus,
    pub max_real_eig: f64,
    /// `−max Re λ / ω_b`; positive when stable.
    pub stability_margin: f64,
    pub physicality_margin: Option<f64>,
    pub lyapunov_residual: Option<f64>,
    /// Empty unless the point is stable.
    pub entanglement: Vec<EntanglementResult>,
}

/// Like [`evaluate_point`], but numerical failures are returned as errors.
pub fn analyze_point(p: &SystemParams) -> Result<PointAnalysis> {
    p.validate()?;
    let a = build_drift(p);
    let d = build_diffusion(p);
    let (report, covariance) = stability_and_covariance(&a, &d)?;
    let status = PointStatus::classify(report.max_real_eig, p.omega_b);
    let mut out = PointAnalysis {
        status,
        max_real_eig: report.max_real_eig,
        stability_margin: -report.max_real_eig / p.omega_b,
        physicality_margin: None,
        lyapunov_residual: None,
        entanglement: Vec::new(),
    };
    if let Some(c) = covariance {
        let c = c?;
        out.physicality_margin = Some(c.physicality_margin());
        let dnorm = d.amax();
        if dnorm > 0.0 {
            out.lyapunov_residual = Some(crate::dynamics::lyapunov_residual(&a, c.matrix(), &d) / dnorm);
        }
        if status == PointStatus::Stable {
            out.entanglement = crate::entanglement::all_pairs_entanglement(&c)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub tool_version: String,
    /// Creation timestamp; left empty by the library so results stay reproducible.
    pub created: Option<String>,
    pub preset: Option<String>,
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created: None,
            preset: None,
        }
    }
}

/// Grid of per-point entanglement values with stability flags and metadata.
///
/// Points are stored row-major: the first axis is the outer loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<SweepAxis>,
    pub mode: DetuningMode,
    pub pairs: Vec<ModePair>,
    pub points: Vec<PointRecord>,
    pub baseline: SystemParams,
    pub provenance: Provenance,
}

impl SweepResult {
    /// Values of one pair across the grid, `None` where no value was emitted.
    pub fn series(&self, pair: ModePair) -> Option<Vec<Option<f64>>> {
        let k = self.pairs.iter().position(|&p| p == pair)?;
        Some(self.points.iter().map(|pt| pt.values[k]).collect())
    }

    /// Coordinates and value of the largest stable entry for `pair`.
    pub fn argmax(&self, pair: ModePair) -> Option<(Vec<f64>, f64)> {
        let k = self.pairs.iter().position(|&p| p == pair)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, pt) in self.points.iter().enumerate() {
            if let Some(v) = pt.values[k] {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
        }
        best.map(|(i, v)| (self.points[i].coords.clone(), v))
    }

    pub fn count_status(&self, status: PointStatus) -> usize {
        self.points.iter().filter(|p| p.status == status).count()
    }
}

/// Execution options shared by sweeps and the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl SweepOptions {
    pub fn with_workers(workers: usize) -> Self {
        SweepOptions { workers }
    }

    fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidParameter { name: "workers", reason: e.to_string() })?;
        Ok(pool.install(job))
    }
}

fn check_axes(axes: &[SweepAxis], mode: DetuningMode) -> Result<()> {
    for (i, ax) in axes.iter().enumerate() {
        ax.validate()?;
        if ax.param == AxisParam::DeltaC && mode == DetuningMode::Independent {
            return Err(Error::InvalidParameter {
                name: "delta_c",
                reason: "aggregate detuning needs a symmetric or antisymmetric mode".into(),
            });
        }
        for other in &axes[..i] {
            let clash = other.param == ax.param
                || (other.param == AxisParam::DeltaC && ax.param.touches_detuning_pair())
                || (ax.param == AxisParam::DeltaC && other.param.touches_detuning_pair());
            if clash {
                return Err(Error::InvalidParameter {
                    name: "axes",
                    reason: format!("axes `{}` and `{}` drive the same parameter", other.param, ax.param),
                });
            }
        }
    }
    Ok(())
}

/// Builds the parameter set at `coords`, starting from `base`.
///
/// In a symmetric/antisymmetric mode the base detunings are first tied
/// together, so Δ₂ stays the reference even when only other axes move.
pub fn params_at(base: &SystemParams, axes: &[AxisParam], coords: &[f64], mode: DetuningMode) -> Result<SystemParams> {
    let mut p = *base;
    if mode != DetuningMode::Independent && !axes.contains(&AxisParam::DeltaC) {
        AxisParam::DeltaC.apply(&mut p, AxisParam::DeltaC.read(base, mode), mode)?;
    }
    for (param, &v) in axes.iter().zip(coords) {
        param.apply(&mut p, v, mode)?;
    }
    Ok(p)
}

fn run_grid(
    base: &SystemParams,
    axes: Vec<SweepAxis>,
    mode: DetuningMode,
    pairs: &[ModePair],
    opts: SweepOptions,
) -> Result<SweepResult> {
    check_axes(&axes, mode)?;
    if pairs.is_empty() {
        return Err(Error::InvalidParameter { name: "pairs", reason: "at least one mode pair is required".into() });
    }
    let params: Vec<AxisParam> = axes.iter().map(|a| a.param).collect();
    let grid: Vec<Vec<f64>> = match axes.as_slice() {
        [a] => a.values().into_iter().map(|x| vec![x]).collect(),
        [a, b] => {
            let bv = b.values();
            a.values().into_iter().flat_map(|x| bv.iter().map(move |&y| vec![x, y])).collect()
        }
        _ => return Err(Error::InvalidParameter { name: "axes", reason: "sweeps take one or two axes".into() }),
    };
    let points = opts.run(|| {
        grid.into_par_iter()
            .map(|coords| {
                let mut record = match params_at(base, &params, &coords, mode) {
                    Ok(p) => evaluate_point(&p, pairs),
                    Err(_) => PointRecord {
                        coords: Vec::new(),
                        status: PointStatus::Failed,
                        max_real_eig: None,
                        physicality_margin: None,
                        lyapunov_residual: None,
                        values: vec![None; pairs.len()],
                    },
                };
                record.coords = coords;
                record
            })
            .collect::<Vec<_>>()
    })?;
    Ok(SweepResult { axes, mode, pairs: pairs.to_vec(), points, baseline: *base, provenance: Provenance::default() })
}

/// Evaluates the full pipeline over a 2D grid; per-point failures are recorded, not raised.
pub fn sweep_2d(
    base: &SystemParams,
    ax1: SweepAxis,
    ax2: SweepAxis,
    mode: DetuningMode,
    pairs: &[ModePair],
    opts: SweepOptions,
) -> Result<SweepResult> {
    run_grid(base, vec![ax1, ax2], mode, pairs, opts)
}

pub fn sweep_1d(
    base: &SystemParams,
    ax: SweepAxis,
    mode: DetuningMode,
    pairs: &[ModePair],
    opts: SweepOptions,
) -> Result<SweepResult> {
    run_grid(base, vec![ax], mode, pairs, opts)
}

/// Temperature line scan at fixed detunings.
pub fn scan_temperature(
    base: &SystemParams,
    start: f64,
    stop: f64,
    count: usize,
    pairs: &[ModePair],
    opts: SweepOptions,
) -> Result<SweepResult> {
    if start < 0.0 || stop < 0.0 {
        return Err(Error::InvalidParameter { name: "temperature", reason: "temperatures must be >= 0".into() });
    }
    let ax = SweepAxis::new(AxisParam::Temperature, start, stop, count)?;
    sweep_1d(base, ax, DetuningMode::Independent, pairs, opts)
}

/// Map over beam-splitter reflectivity and phase (in units of π).
pub fn scan_feedback(
    base: &SystemParams,
    r_axis: SweepAxis,
    phi_axis: SweepAxis,
    pairs: &[ModePair],
    opts: SweepOptions,
) -> Result<SweepResult> {
    if r_axis.param != AxisParam::Reflectivity || phi_axis.param != AxisParam::Phase {
        return Err(Error::InvalidParameter {
            name: "axes",
            reason: "feedback scan takes an r_b axis and a phi axis".into(),
        });
    }
    let (lo, hi) = (r_axis.start.min(r_axis.stop), r_axis.start.max(r_axis.stop));
    if lo < 0.0 || hi >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "r_b",
            reason: format!("reflectivity axis [{lo}, {hi}] must lie within [0, 1)"),
        });
    }
    sweep_2d(base, r_axis, phi_axis, DetuningMode::Independent, pairs, opts)
}

/// One free coordinate of the optimizer with its box bounds (display units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParam {
    pub param: AxisParam,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    /// Coarse grid points per dimension; `None` picks a default from the dimension.
    pub coarse_points: Option<usize>,
    /// Number of best coarse points refined by pattern search.
    pub seeds: usize,
    /// Stop once every step is below this fraction of its range.
    pub step_tolerance: f64,
    pub max_evaluations: usize,
    pub sweep: SweepOptions,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            coarse_points: None,
            seeds: 3,
            step_tolerance: 1e-5,
            max_evaluations: 20_000,
            sweep: SweepOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    /// Best coordinates in display units, in the order of the free parameters.
    pub coords: Vec<f64>,
    pub params: SystemParams,
    pub value: f64,
    /// All ten bipartitions at the optimum.
    pub all_pairs: Vec<EntanglementResult>,
    pub evaluations: usize,
}

fn default_coarse_points(dim: usize) -> usize {
    match dim {
        1 => 101,
        2 => 41,
        3 => 13,
        4 => 7,
        _ => 5,
    }
}

/// Maximizes `E_N` of `pair` over a box: coarse grid scan, then compass
/// pattern search from the best few grid points. Deterministic.
pub fn optimize_entanglement(
    base: &SystemParams,
    free: &[FreeParam],
    mode: DetuningMode,
    pair: ModePair,
    opts: OptimizeOptions,
) -> Result<Optimum> {
    if free.is_empty() || free.len() > 5 {
        return Err(Error::InvalidParameter {
            name: "free",
            reason: format!("expected 1 to 5 free parameters, got {}", free.len()),
        });
    }
    let axes: Vec<SweepAxis> =
        free.iter().map(|f| SweepAxis::new(f.param, f.lower, f.upper, 2)).collect::<Result<_>>()?;
    check_axes(&axes, mode)?;
    for f in free {
        if f.lower > f.upper {
            return Err(Error::InvalidParameter {
                name: "bounds",
                reason: format!("lower bound above upper bound for `{}`", f.param),
            });
        }
    }
    let params: Vec<AxisParam> = free.iter().map(|f| f.param).collect();
    let objective = |x: &[f64]| -> Option<f64> {
        let p = params_at(base, &params, x, mode).ok()?;
        evaluate_point(&p, &[pair]).values[0]
    };

    let n = opts.coarse_points.unwrap_or_else(|| default_coarse_points(free.len())).max(2);
    let ticks: Vec<Vec<f64>> =
        free.iter().map(|f| SweepAxis { param: f.param, start: f.lower, stop: f.upper, count: n }.values()).collect();
    let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
    for t in &ticks {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                t.iter().map(move |&x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    let mut evaluations = grid.len();
    let coarse: Vec<(Vec<f64>, Option<f64>)> = opts.sweep.run(|| {
        grid.into_par_iter()
            .map(|x| {
                let v = objective(&x);
                (x, v)
            })
            .collect()
    })?;

    let mut ranked: Vec<(Vec<f64>, f64)> = coarse.into_iter().filter_map(|(x, v)| v.map(|v| (x, v))).collect();
    if ranked.is_empty() {
        return Err(Error::NoStablePoint);
    }
    // Stable sort keeps grid order among ties.
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked.truncate(opts.seeds.max(1));

    let ranges: Vec<f64> = free.iter().map(|f| f.upper - f.lower).collect();
    let spacing: Vec<f64> = ranges.iter().map(|r| r / (n - 1) as f64).collect();
    let budget = opts.max_evaluations;
    let refined: Vec<(Vec<f64>, f64, usize)> = opts.sweep.run(|| {
        ranked
            .into_par_iter()
            .map(|(x0, v0)| pattern_search(&objective, free, x0, v0, &spacing, &ranges, opts.step_tolerance, budget))
            .collect()
    })?;

    let mut best: Option<(Vec<f64>, f64)> = None;
    for (x, v, evals) in refined {
        evaluations += evals;
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((x, v));
        }
    }
    let (coords, value) = best.ok_or(Error::NoStablePoint)?;
    let params_best = params_at(base, &params, &coords, mode)?;
    let all_pairs = {
        let a = build_drift(&params_best);
        let d = build_diffusion(&params_best);
        let c = crate::dynamics::solve_lyapunov(&a, &d)?;
        crate::entanglement::all_pairs_entanglement(&c)?
    };
    Ok(Optimum { coords, params: params_best, value, all_pairs, evaluations })
}

#[allow(clippy::too_many_arguments)]
fn pattern_search(
    objective: &(impl Fn(&[f64]) -> Option<f64> + Sync),
    free: &[FreeParam],
    mut x: Vec<f64>,
    mut fx: f64,
    spacing: &[f64],
    ranges: &[f64],
    tolerance: f64,
    budget: usize,
) -> (Vec<f64>, f64, usize) {
    let mut step: Vec<f64> = spacing.iter().map(|s| 0.5 * s).collect();
    let mut evals = 0;
    while evals < budget {
        let mut improved = false;
        for k in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[k] = (x[k] + dir * step[k]).clamp(free[k].lower, free[k].upper);
                if trial[k] == x[k] {
                    continue;
                }
                evals += 1;
                if let Some(v) = objective(&trial) {
                    if v > fx {
                        x = trial;
                        fx = v;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            let mut done = true;
            for (s, r) in step.iter_mut().zip(ranges) {
                *s *= 0.5;
                if *s > tolerance * r.abs() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
    }
    (x, fx, evals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::Mode;

    fn pair(a: Mode, b: Mode) -> ModePair {
        ModePair::new(a, b).unwrap()
    }

    #[test]
    fn axis_values_and_validation() {
        let ax = SweepAxis::new(AxisParam::Delta1, -1.0, 1.0, 5).unwrap();
        assert_eq!(ax.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(SweepAxis::new(AxisParam::Delta1, 0.0, 1.0, 1).is_err());
        assert!(SweepAxis::new(AxisParam::Delta1, 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn detuning_modes() {
        let base = SystemParams::baseline();
        let wb = base.omega_b;
        let p = params_at(&base, &[AxisParam::DeltaC], &[1.5], DetuningMode::Symmetric).unwrap();
        assert_eq!((p.delta_1, p.delta_2), (1.5 * wb, 1.5 * wb));
        let p = params_at(&base, &[AxisParam::DeltaC], &[1.5], DetuningMode::Antisymmetric).unwrap();
        assert_eq!((p.delta_1, p.delta_2), (-1.5 * wb, 1.5 * wb));
        assert!(params_at(&base, &[AxisParam::DeltaC], &[1.5], DetuningMode::Independent).is_err());
        let p = params_at(&base, &[AxisParam::Phase, AxisParam::Reflectivity], &[0.5, 0.2], DetuningMode::Independent)
            .unwrap();
        assert!((p.feedback.phi() - 0.5 * PI).abs() < 1e-15);
        assert_eq!(p.feedback.r_b(), 0.2);
    }

    #[test]
    fn clashing_axes_rejected() {
        let base = SystemParams::baseline();
        let a = SweepAxis::new(AxisParam::DeltaC, -1.0, 1.0, 3).unwrap();
        let b = SweepAxis::new(AxisParam::Delta1, -1.0, 1.0, 3).unwrap();
        let pairs = [pair(Mode::B, Mode::E)];
        assert!(sweep_2d(&base, a, b, DetuningMode::Symmetric, &pairs, SweepOptions::default()).is_err());
        assert!(sweep_2d(&base, b, b, DetuningMode::Independent, &pairs, SweepOptions::default()).is_err());
    }

    #[test]
    fn grid_is_row_major() {
        let base = SystemParams::baseline();
        let a = SweepAxis::new(AxisParam::Delta1, -1.0, 1.0, 2).unwrap();
        let b = SweepAxis::new(AxisParam::Delta2, 2.0, 3.0, 3).unwrap();
        let r = sweep_2d(&base, a, b, DetuningMode::Independent, &[pair(Mode::B, Mode::E)], SweepOptions::default())
            .unwrap();
        let coords: Vec<Vec<f64>> = r.points.iter().map(|p| p.coords.clone()).collect();
        assert_eq!(
            coords,
            vec![vec![-1.0, 2.0], vec![-1.0, 2.5], vec![-1.0, 3.0], vec![1.0, 2.0], vec![1.0, 2.5], vec![1.0, 3.0]]
        );
    }

    #[test]
    fn constant_axis_gives_equal_values() {
        let base = SystemParams::baseline();
        let ax = SweepAxis::new(AxisParam::DeltaE, -1.0, -1.0 + 1e-15, 2).unwrap();
        let r =
            sweep_1d(&base, ax, DetuningMode::Independent, &[pair(Mode::B, Mode::E)], SweepOptions::default()).unwrap();
        let v: Vec<f64> = r.points.iter().map(|p| p.values[0].unwrap()).collect();
        assert!((v[0] - v[1]).abs() < 1e-12);
    }

    #[test]
    fn unstable_points_carry_no_value() {
        let base = SystemParams::baseline();
        let r_ax = SweepAxis::new(AxisParam::Reflectivity, 0.0, 0.99, 12).unwrap();
        let phi_ax = SweepAxis::new(AxisParam::Phase, 0.0, 2.0, 9).unwrap();
        let mut detuned = base;
        detuned.delta_1 = -1.75 * base.omega_b;
        detuned.delta_2 = -1.75 * base.omega_b;
        let r = scan_feedback(&detuned, r_ax, phi_ax, &[pair(Mode::B, Mode::E)], SweepOptions::default()).unwrap();
        for pt in &r.points {
            assert_eq!(pt.values[0].is_some(), pt.status == PointStatus::Stable);
        }
    }

    #[test]
    fn feedback_scan_rejects_full_reflectivity() {
        let base = SystemParams::baseline();
        let r_ax = SweepAxis::new(AxisParam::Reflectivity, 0.0, 1.0, 3).unwrap();
        let phi_ax = SweepAxis::new(AxisParam::Phase, 0.0, 2.0, 3).unwrap();
        assert!(scan_feedback(&base, r_ax, phi_ax, &[pair(Mode::B, Mode::E)], SweepOptions::default()).is_err());
    }

    #[test]
    fn classification_band() {
        let wb = 1e7;
        assert_eq!(PointStatus::classify(-1.0, wb), PointStatus::Marginal);
        assert_eq!(PointStatus::classify(-11.0, wb), PointStatus::Stable);
        assert_eq!(PointStatus::classify(0.0, wb), PointStatus::Unstable);
    }

    #[test]
    fn optimizer_rejects_bad_input() {
        let base = SystemParams::baseline();
        let be = pair(Mode::B, Mode::E);
        assert!(optimize_entanglement(&base, &[], DetuningMode::Independent, be, OptimizeOptions::default()).is_err());
        let free = [FreeParam { param: AxisParam::Delta1, lower: 1.0, upper: -1.0 }];
        assert!(optimize_entanglement(&base, &free, DetuningMode::Independent, be, OptimizeOptions::default()).is_err());
    }

    #[test]
    fn optimizer_reports_no_stable_point() {
        // An isolated cavity 1 with κ_fb < 0 is unstable for every Δ₁.
        let mut base = SystemParams::baseline();
        base.j = 0.0;
        base.g_ce = 0.0;
        base.feedback = FeedbackSpec::new(0.9, 0.0).unwrap();
        let free = [FreeParam { param: AxisParam::Delta1, lower: -1.0, upper: 1.0 }];
        let opts = OptimizeOptions { coarse_points: Some(5), ..Default::default() };
        let err = optimize_entanglement(&base, &free, DetuningMode::Independent, pair(Mode::C1, Mode::E), opts);
        assert!(matches!(err, Err(Error::NoStablePoint)));
    }
}
