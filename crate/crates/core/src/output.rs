//! CSV and JSON emission of sweep results.
//!
//! Both formats are long tables with one row per (grid point, pair). Floats are
//! written with 12 significant digits; points without a stable steady state
//! carry `NA` (CSV) or `null` (JSON) instead of a value.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::SystemSection;
use crate::error::{Error, Result};
use crate::model::{SteadyState, SystemParams};
use crate::modes::ModePair;
use crate::sweep::{AxisParam, DetuningMode, Optimum, PointAnalysis, PointStatus, Provenance, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// 12 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

/// Rounds to 12 significant digits, as written to disk.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        format_float(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

pub const CSV_HEADER: &str = "axis1,axis2,pair,E_N,stability";

pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::with_capacity(64 * result.points.len() * result.pairs.len() + 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for pt in &result.points {
        let a1 = pt.coords.first().map(|&x| format_float(x)).unwrap_or_default();
        let a2 = pt.coords.get(1).map(|&x| format_float(x)).unwrap_or_default();
        for (pair, value) in result.pairs.iter().zip(&pt.values) {
            let v = match value {
                Some(v) if pt.status == PointStatus::Stable => format_float(*v),
                _ => "NA".to_string(),
            };
            let _ = writeln!(out, "{a1},{a2},{pair},{v},{}", pt.status);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisMeta {
    pub param: String,
    pub unit: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub tool_version: String,
    pub created: Option<String>,
    pub preset: Option<String>,
    pub mode: DetuningMode,
    pub axes: Vec<AxisMeta>,
    pub pairs: Vec<ModePair>,
    /// Baseline parameters in MHz (value/2π), kelvin and units of π.
    pub baseline: SystemSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Columns {
    pub axis1: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Vec<f64>>,
    pub pair: Vec<ModePair>,
    #[serde(rename = "E_N")]
    pub e_n: Vec<Option<f64>>,
    pub stability: Vec<PointStatus>,
    pub max_real_eig: Vec<Option<f64>>,
    pub physicality_margin: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonTable {
    pub metadata: Metadata,
    pub columns: Columns,
}

pub fn to_table(result: &SweepResult) -> JsonTable {
    let two_d = result.axes.len() == 2;
    let rows = result.points.len() * result.pairs.len();
    let mut cols = Columns {
        axis1: Vec::with_capacity(rows),
        axis2: two_d.then(|| Vec::with_capacity(rows)),
        pair: Vec::with_capacity(rows),
        e_n: Vec::with_capacity(rows),
        stability: Vec::with_capacity(rows),
        max_real_eig: Vec::with_capacity(rows),
        physicality_margin: Vec::with_capacity(rows),
    };
    for pt in &result.points {
        for (pair, value) in result.pairs.iter().zip(&pt.values) {
            cols.axis1.push(round12(pt.coords[0]));
            if let Some(a2) = cols.axis2.as_mut() {
                a2.push(round12(pt.coords[1]));
            }
            cols.pair.push(*pair);
            cols.e_n.push(value.filter(|_| pt.status == PointStatus::Stable).map(round12));
            cols.stability.push(pt.status);
            cols.max_real_eig.push(pt.max_real_eig.map(round12));
            cols.physicality_margin.push(pt.physicality_margin.map(round12));
        }
    }
    let metadata = Metadata {
        tool: result.provenance.tool.clone(),
        tool_version: result.provenance.tool_version.clone(),
        created: result.provenance.created.clone(),
        preset: result.provenance.preset.clone(),
        mode: result.mode,
        axes: result
            .axes
            .iter()
            .map(|a| AxisMeta {
                param: a.param.name().to_string(),
                unit: a.param.unit().to_string(),
                start: a.start,
                stop: a.stop,
                count: a.count,
            })
            .collect(),
        pairs: result.pairs.clone(),
        baseline: rounded_section(SystemSection::from_params(&result.baseline)),
    };
    JsonTable { metadata, columns: cols }
}

fn rounded_section(s: SystemSection) -> SystemSection {
    SystemSection {
        kappa_c: round12(s.kappa_c),
        kappa_m: round12(s.kappa_m),
        gamma_e: round12(s.gamma_e),
        gamma_b: round12(s.gamma_b),
        omega_b: round12(s.omega_b),
        delta_1: round12(s.delta_1),
        delta_2: round12(s.delta_2),
        delta_e: round12(s.delta_e),
        delta_m_eff: round12(s.delta_m_eff),
        g_mc: round12(s.g_mc),
        g_mb: round12(s.g_mb),
        g_ce: round12(s.g_ce),
        j: round12(s.j),
        temperature: round12(s.temperature),
        r_b: round12(s.r_b),
        phi_over_pi: round12(s.phi_over_pi),
        omega_c1: round12(s.omega_c1),
        omega_c2: round12(s.omega_c2),
        omega_m: round12(s.omega_m),
    }
}

pub fn to_json(result: &SweepResult) -> String {
    serde_json::to_string_pretty(&to_table(result)).expect("table serializes")
}

pub fn render(result: &SweepResult, format: Format) -> String {
    match format {
        Format::Csv => to_csv(result),
        Format::Json => to_json(result),
    }
}

/// Writes `result` to `path`, creating parent directories.
pub fn emit_results(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, render(result, format))?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<JsonTable> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Steady state of the microscopic entry path with its validity ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateReport {
    pub state: SteadyState,
    /// `G_ce²/(Δ_e² + γ_e²)`; should be much smaller than `|c1s|⁻²`.
    pub coupling_ratio: f64,
    /// `|c1s|⁻²`; should be much smaller than 1.
    pub inverse_photon_number: f64,
}

impl SteadyStateReport {
    pub fn new(state: SteadyState, p: &SystemParams) -> Self {
        let (coupling_ratio, inverse_photon_number) = state.excitation_ratios(p);
        SteadyStateReport { state, coupling_ratio, inverse_photon_number }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub tool: String,
    pub tool_version: String,
    pub created: Option<String>,
    /// Parameters actually evaluated, in file units.
    pub params: SystemSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady_state: Option<SteadyStateReport>,
    pub analysis: PointAnalysis,
}

impl PointReport {
    pub fn new(
        p: &SystemParams,
        analysis: PointAnalysis,
        steady_state: Option<SteadyStateReport>,
        created: Option<String>,
    ) -> Self {
        let prov = Provenance::default();
        PointReport {
            tool: prov.tool,
            tool_version: prov.tool_version,
            created,
            params: rounded_section(SystemSection::from_params(p)),
            steady_state,
            analysis,
        }
    }

    /// `pair,E_N,nu_minus,stability`, one row per bipartition.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pair,E_N,nu_minus,stability\n");
        let status = self.analysis.status;
        for pair in ModePair::all() {
            match self.analysis.entanglement.iter().find(|r| r.pair == Some(pair)) {
                Some(r) => {
                    let _ = writeln!(
                        out,
                        "{pair},{},{},{status}",
                        format_float(r.log_negativity),
                        format_float(r.nu_minus)
                    );
                }
                None => {
                    let _ = writeln!(out, "{pair},NA,NA,{status}");
                }
            }
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeValue {
    pub param: AxisParam,
    pub unit: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub tool: String,
    pub tool_version: String,
    pub created: Option<String>,
    pub pair: ModePair,
    pub mode: DetuningMode,
    pub coords: Vec<FreeValue>,
    #[serde(rename = "E_N")]
    pub value: f64,
    pub evaluations: usize,
    pub params: SystemSection,
    pub all_pairs: Vec<crate::entanglement::EntanglementResult>,
}

impl OptimumReport {
    pub fn new(opt: &Optimum, free: &[AxisParam], pair: ModePair, mode: DetuningMode, created: Option<String>) -> Self {
        let prov = Provenance::default();
        OptimumReport {
            tool: prov.tool,
            tool_version: prov.tool_version,
            created,
            pair,
            mode,
            coords: free
                .iter()
                .zip(&opt.coords)
                .map(|(&param, &value)| FreeValue { param, unit: param.unit().to_string(), value: round12(value) })
                .collect(),
            value: round12(opt.value),
            evaluations: opt.evaluations,
            params: rounded_section(SystemSection::from_params(&opt.params)),
            all_pairs: opt.all_pairs.clone(),
        }
    }

    /// `param,value` rows for the coordinates, then `E_N` rows for every pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for c in &self.coords {
            let _ = writeln!(out, "{},{}", c.param, format_float(c.value));
        }
        let _ = writeln!(out, "objective_{},{}", self.pair, format_float(self.value));
        for r in &self.all_pairs {
            if let Some(p) = r.pair {
                let _ = writeln!(out, "E_N_{p},{}", format_float(r.log_negativity));
            }
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes"),
        }
    }
}

/// One parsed CSV data row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub pair: ModePair,
    pub e_n: Option<f64>,
    pub stability: String,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse("missing CSV header".into()));
    }
    let bad = |line: &str| Error::Parse(format!("malformed CSV row `{line}`"));
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            Ok(CsvRow {
                axis1: num(f[0])?,
                axis2: if f[1].is_empty() { None } else { Some(num(f[1])?) },
                pair: f[2].parse().map_err(|_| bad(line))?,
                e_n: if f[3] == "NA" { None } else { Some(num(f[3])?) },
                stability: f[4].to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use crate::modes::Mode;
    use crate::sweep::{sweep_2d, AxisParam, PointRecord, Provenance, SweepAxis, SweepOptions};

    fn toy(values: &[(PointStatus, Option<f64>)]) -> SweepResult {
        let points = values
            .iter()
            .enumerate()
            .map(|(i, &(status, v))| PointRecord {
                coords: vec![(i / 2) as f64, (i % 2) as f64],
                status,
                max_real_eig: Some(-1.0),
                physicality_margin: None,
                lyapunov_residual: None,
                values: vec![v],
            })
            .collect();
        SweepResult {
            axes: vec![
                SweepAxis::new(AxisParam::Delta1, 0.0, 1.0, 2).unwrap(),
                SweepAxis::new(AxisParam::Delta2, 0.0, 1.0, 2).unwrap(),
            ],
            mode: DetuningMode::Independent,
            pairs: vec![ModePair::new(Mode::B, Mode::E).unwrap()],
            points,
            baseline: SystemParams::baseline(),
            provenance: Provenance::default(),
        }
    }

    #[test]
    fn csv_row_count_and_na() {
        let r = toy(&[
            (PointStatus::Stable, Some(0.1)),
            (PointStatus::Stable, Some(0.2)),
            (PointStatus::Unstable, None),
            (PointStatus::Stable, Some(0.0)),
        ]);
        let csv = to_csv(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert_eq!(csv.matches(",NA,").count(), 1);
        assert!(lines[3].ends_with(",be,NA,unstable"));
        let rows = parse_csv(&csv).unwrap();
        assert_eq!(rows[1].e_n, Some(0.2));
        assert_eq!(rows[1].axis2, Some(1.0));
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(round12(0.123456789012345), 0.123456789012);
    }

    #[test]
    fn json_round_trip() {
        let base = SystemParams::baseline();
        let r = sweep_2d(
            &base,
            SweepAxis::new(AxisParam::Delta1, -2.0, 2.0, 3).unwrap(),
            SweepAxis::new(AxisParam::Delta2, -2.0, 4.0, 3).unwrap(),
            DetuningMode::Independent,
            &ModePair::all(),
            SweepOptions::default(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out/r.json");
        emit_results(&r, Format::Json, &path).unwrap();
        let table = read_json(&path).unwrap();
        assert_eq!(table, to_table(&r));
        assert_eq!(table.columns.e_n.len(), 9 * 10);
        for (k, pt) in r.points.iter().enumerate() {
            for (j, v) in pt.values.iter().enumerate() {
                let back = table.columns.e_n[k * 10 + j];
                match (v, back) {
                    (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-11 * a.abs().max(1e-300)),
                    (None, None) => {}
                    other => panic!("mismatch {other:?}"),
                }
            }
        }
        assert_eq!(table.metadata.baseline.kappa_c, 1.0);
        assert_eq!(table.metadata.baseline.g_ce, 6.0);
    }
}
