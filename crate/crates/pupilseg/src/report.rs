//! Report schema shared by the CLI commands: JSON for machines, CSV for
//! humans. Every report carries `schema_version`; durations are in
//! microseconds; infinite PSNR is rendered as the token `inf`, never a
//! sentinel number.

use serde::{Serialize, Serializer};

use crate::characterization::CostReport;
use crate::metrics::StageTiming;
use crate::pipeline::{PipelineConfig, PupilResult, Variant};

pub const SCHEMA_VERSION: u32 = 1;

/// Published means for the original CASIA-database evaluation of this
/// architecture, echoed into comparison reports as context for the
/// synthetic-corpus aggregates.
pub const REFERENCE_MEAN_PSNR_DB: f64 = 26.90125;
pub const REFERENCE_MEAN_SSIM: f64 = 0.989025;

/// Decibel value that may be +infinity (identical images).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Db(pub f64);

impl Db {
    pub fn csv(&self) -> String {
        if self.0.is_infinite() {
            "inf".into()
        } else {
            format!("{:.4}", self.0)
        }
    }
}

impl Serialize for Db {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageMetrics {
    pub stage: String,
    pub psnr_db: Db,
    pub ssim: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageMicros {
    pub stage: String,
    pub micros: u128,
}

pub fn timings_micros(timings: &[StageTiming]) -> Vec<StageMicros> {
    timings
        .iter()
        .map(|t| StageMicros {
            stage: t.stage.clone(),
            micros: t.duration.as_micros(),
        })
        .collect()
}

/// Flat echo of a pipeline configuration.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub variant: String,
    pub gaussian_width: usize,
    pub gaussian_prefix_kind: Option<String>,
    pub gaussian_prefix_len: usize,
    pub prewitt_width: usize,
    pub prewitt_prefix_kind: Option<String>,
    pub prewitt_prefix_len: usize,
    pub intensity_threshold: u32,
    pub intensity_ignored_lsbs: usize,
    pub gradient_threshold: u32,
    pub gradient_ignored_lsbs: usize,
    pub fingerprint: String,
}

impl From<&PipelineConfig> for ConfigEcho {
    fn from(cfg: &PipelineConfig) -> Self {
        let kind = |c: &crate::bitlevel::AdderConfig| c.prefix_kind().map(|k| format!("{k:?}"));
        Self {
            variant: match cfg.variant {
                Variant::Exact => "exact".into(),
                Variant::Approximate => "approx".into(),
            },
            gaussian_width: cfg.gaussian_cfg.width(),
            gaussian_prefix_kind: kind(&cfg.gaussian_cfg),
            gaussian_prefix_len: cfg.gaussian_cfg.prefix_len(),
            prewitt_width: cfg.prewitt_cfg.width(),
            prewitt_prefix_kind: kind(&cfg.prewitt_cfg),
            prewitt_prefix_len: cfg.prewitt_cfg.prefix_len(),
            intensity_threshold: cfg.intensity_threshold.value,
            intensity_ignored_lsbs: cfg.intensity_threshold.ignored_lsbs,
            gradient_threshold: cfg.gradient_threshold.value,
            gradient_ignored_lsbs: cfg.gradient_threshold.ignored_lsbs,
            fingerprint: cfg.fingerprint(),
        }
    }
}

/// Comparator and cell cost proxies for the two filter adders.
#[derive(Clone, Debug, Serialize)]
pub struct CostSummary {
    pub gaussian: CostReport,
    pub prewitt: CostReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRow {
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub timings: Vec<StageMicros>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Exact-vs-approximate metrics at each stage boundary.
    pub stages: Vec<StageMetrics>,
    pub exact_center_x: f64,
    pub exact_center_y: f64,
    pub exact_radius: f64,
    pub approx_center_x: f64,
    pub approx_center_y: f64,
    pub approx_radius: f64,
    pub center_delta_px: f64,
    pub exact_timings: Vec<StageMicros>,
    pub approx_timings: Vec<StageMicros>,
}

/// Stage boundaries at which `CompareRow.stages` reports metrics, in order.
pub const COMPARE_STAGES: [&str; 5] = [
    "smoothed",
    "edge_branch",
    "boundary_branch",
    "pupil_mask",
    "edge_map",
];

#[derive(Clone, Debug, Serialize)]
pub struct Aggregates {
    pub count: usize,
    pub mean_psnr_smoothed_db: Db,
    pub min_psnr_smoothed_db: Db,
    pub max_psnr_smoothed_db: Db,
    pub mean_ssim_smoothed: f64,
    pub min_ssim_smoothed: f64,
    pub max_ssim_smoothed: f64,
    pub mean_psnr_edge_map_db: Db,
    pub mean_center_delta_px: f64,
    pub max_center_delta_px: f64,
    /// Context figures; see `REFERENCE_MEAN_PSNR_DB` / `REFERENCE_MEAN_SSIM`.
    pub reference_mean_psnr_db: f64,
    pub reference_mean_ssim: f64,
}

impl Aggregates {
    pub fn from_rows(rows: &[CompareRow]) -> Option<Self> {
        if rows.is_empty() {
            return None;
        }
        let stage = |row: &CompareRow, name: &str| -> (f64, f64) {
            let s = row
                .stages
                .iter()
                .find(|s| s.stage == name)
                .expect("stage present in every row");
            (s.psnr_db.0, s.ssim)
        };
        let n = rows.len() as f64;
        let psnr: Vec<f64> = rows.iter().map(|r| stage(r, "smoothed").0).collect();
        let ssim: Vec<f64> = rows.iter().map(|r| stage(r, "smoothed").1).collect();
        let edge_psnr: Vec<f64> = rows.iter().map(|r| stage(r, "edge_map").0).collect();
        let deltas: Vec<f64> = rows.iter().map(|r| r.center_delta_px).collect();
        Some(Self {
            count: rows.len(),
            mean_psnr_smoothed_db: Db(psnr.iter().sum::<f64>() / n),
            min_psnr_smoothed_db: Db(psnr.iter().copied().fold(f64::INFINITY, f64::min)),
            max_psnr_smoothed_db: Db(psnr.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            mean_ssim_smoothed: ssim.iter().sum::<f64>() / n,
            min_ssim_smoothed: ssim.iter().copied().fold(f64::INFINITY, f64::min),
            max_ssim_smoothed: ssim.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_psnr_edge_map_db: Db(edge_psnr.iter().sum::<f64>() / n),
            mean_center_delta_px: deltas.iter().sum::<f64>() / n,
            max_center_delta_px: deltas.iter().copied().fold(0.0, f64::max),
            reference_mean_psnr_db: REFERENCE_MEAN_PSNR_DB,
            reference_mean_ssim: REFERENCE_MEAN_SSIM,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport<Row: Serialize> {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: ConfigEcho,
    pub cost: CostSummary,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregates: Option<Aggregates>,
}

impl<Row: Serialize> RunReport<Row> {
    pub fn new(config: ConfigEcho, cost: CostSummary, rows: Vec<Row>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            cost,
            rows,
            aggregates: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn extract_stage_metrics(
    exact: &PupilResult,
    approx: &PupilResult,
) -> crate::Result<Vec<StageMetrics>> {
    use crate::metrics::{psnr, ssim};
    let pairs = [
        ("smoothed", exact.smoothed.clone(), approx.smoothed.clone()),
        (
            "edge_branch",
            exact.edge_branch.to_gray(),
            approx.edge_branch.to_gray(),
        ),
        (
            "boundary_branch",
            exact.boundary_branch.to_gray(),
            approx.boundary_branch.to_gray(),
        ),
        (
            "pupil_mask",
            exact.pupil_mask.to_gray(),
            approx.pupil_mask.to_gray(),
        ),
        ("edge_map", exact.edge_map.to_gray(), approx.edge_map.to_gray()),
    ];
    pairs
        .into_iter()
        .map(|(name, a, b)| {
            Ok(StageMetrics {
                stage: name.to_string(),
                psnr_db: Db(psnr(&a, &b)?),
                ssim: ssim(&a, &b)?,
            })
        })
        .collect()
}

fn timing_cols(prefix: &str) -> Vec<String> {
    crate::pipeline::STAGES
        .iter()
        .map(|s| format!("{prefix}{s}_us"))
        .collect()
}

pub fn run_rows_csv(rows: &[RunRow]) -> String {
    let mut header = vec![
        "schema_version".to_string(),
        "input".into(),
        "seed".into(),
        "center_x".into(),
        "center_y".into(),
        "radius".into(),
    ];
    header.extend(timing_cols(""));
    let mut out = header.join(",") + "\n";
    for r in rows {
        let mut cols = vec![
            SCHEMA_VERSION.to_string(),
            r.input.clone(),
            r.seed.map_or_else(String::new, |s| s.to_string()),
            format!("{:.3}", r.center_x),
            format!("{:.3}", r.center_y),
            format!("{:.3}", r.radius),
        ];
        cols.extend(r.timings.iter().map(|t| t.micros.to_string()));
        out += &(cols.join(",") + "\n");
    }
    out
}

pub fn compare_rows_csv(rows: &[CompareRow]) -> String {
    let mut header = vec!["schema_version".to_string(), "input".into(), "seed".into()];
    for s in COMPARE_STAGES {
        header.push(format!("psnr_{s}_db"));
        header.push(format!("ssim_{s}"));
    }
    header.extend(
        [
            "exact_center_x",
            "exact_center_y",
            "exact_radius",
            "approx_center_x",
            "approx_center_y",
            "approx_radius",
            "center_delta_px",
        ]
        .map(String::from),
    );
    header.extend(timing_cols("exact_"));
    header.extend(timing_cols("approx_"));
    let mut out = header.join(",") + "\n";
    for r in rows {
        let mut cols = vec![
            SCHEMA_VERSION.to_string(),
            r.input.clone(),
            r.seed.map_or_else(String::new, |s| s.to_string()),
        ];
        for s in COMPARE_STAGES {
            let m = r.stages.iter().find(|m| m.stage == s).expect("stage");
            cols.push(m.psnr_db.csv());
            cols.push(format!("{:.6}", m.ssim));
        }
        for v in [
            r.exact_center_x,
            r.exact_center_y,
            r.exact_radius,
            r.approx_center_x,
            r.approx_center_y,
            r.approx_radius,
            r.center_delta_px,
        ] {
            cols.push(format!("{v:.3}"));
        }
        cols.extend(r.exact_timings.iter().map(|t| t.micros.to_string()));
        cols.extend(r.approx_timings.iter().map(|t| t.micros.to_string()));
        out += &(cols.join(",") + "\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_psnr_serializes_as_token() {
        assert_eq!(serde_json::to_string(&Db(f64::INFINITY)).unwrap(), "\"inf\"");
        assert_eq!(Db(f64::INFINITY).csv(), "inf");
        assert_eq!(serde_json::to_string(&Db(48.5)).unwrap(), "48.5");
    }

    #[test]
    fn csv_has_schema_version_column() {
        let csv = run_rows_csv(&[]);
        assert!(csv.starts_with("schema_version,input,"));
    }
}
