//! Command-line interface: pipeline runs, exact-vs-approximate comparison,
//! adder characterization, and synthetic-corpus generation.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::binarization::ThresholdParams;
use crate::bitlevel::{AdderConfig, CellKind};
use crate::characterization::{characterize_adder, cost_model};
use crate::filters::{GrayImage, DATAPATH_WIDTH};
use crate::pgm::{read_pgm, write_pgm};
use crate::pipeline::{run_pipeline, PipelineConfig, PupilResult, Variant};
use crate::report::{
    compare_rows_csv, extract_stage_metrics, run_rows_csv, timings_micros, Aggregates, CompareRow,
    CostSummary, RunReport, RunRow, SCHEMA_VERSION,
};
use crate::synth::{generate_eye, EyeSpec};
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Parser, Debug)]
#[command(
    name = "pupilseg",
    version,
    about = "Approximate-computing pupil segmentation: bit-accurate datapath model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Segment the pupil in one or more PGM images.
    Run(RunArgs),
    /// Run both variants on each image and report PSNR/SSIM per stage.
    Compare(CompareArgs),
    /// Exhaustively characterize an adder configuration.
    Characterize(CharacterizeArgs),
    /// Generate a synthetic eye-image corpus with ground truth.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Exact,
    Approx,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CellArg {
    Exact,
    Carryonly,
    Loa,
}

impl From<CellArg> for CellKind {
    fn from(c: CellArg) -> Self {
        match c {
            CellArg::Exact => CellKind::Exact,
            CellArg::Carryonly => CellKind::CarryOnly,
            CellArg::Loa => CellKind::ApproxLOA,
        }
    }
}

/// Pipeline flags shared by `run` and `compare`. Defaults are the hardware
/// operating point: 5 LOA LSBs in both filter adders, thresholds 96 and 128
/// with 5 and 7 ignored comparator LSBs.
#[derive(Args, Clone, Debug)]
pub struct PipelineFlags {
    #[arg(long, value_enum, default_value_t = VariantArg::Approx)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = crate::pipeline::DEFAULT_APPROX_PREFIX)]
    pub gauss_approx_bits: usize,
    #[arg(long, value_enum, default_value_t = CellArg::Loa)]
    pub gauss_cell: CellArg,
    #[arg(long, default_value_t = crate::pipeline::DEFAULT_APPROX_PREFIX)]
    pub prewitt_approx_bits: usize,
    #[arg(long, default_value_t = crate::pipeline::DEFAULT_INTENSITY_THRESHOLD)]
    pub threshold_intensity: u32,
    #[arg(long, default_value_t = crate::pipeline::DEFAULT_GRADIENT_THRESHOLD)]
    pub threshold_gradient: u32,
    #[arg(long, default_value_t = crate::pipeline::DEFAULT_INTENSITY_IGNORED_LSBS)]
    pub ignore_lsbs_intensity: usize,
    #[arg(long, default_value_t = crate::pipeline::DEFAULT_GRADIENT_IGNORED_LSBS)]
    pub ignore_lsbs_gradient: usize,
}

impl PipelineFlags {
    /// The exact variant pins all-exact adders, strict comparators, and the
    /// Euclidean magnitude; approximate flags only apply to `approx`.
    pub fn to_config(&self) -> Result<PipelineConfig> {
        match self.variant {
            VariantArg::Exact => {
                let mut cfg = PipelineConfig::exact();
                cfg.intensity_threshold = ThresholdParams::new(self.threshold_intensity, 0, 8)?;
                cfg.gradient_threshold =
                    ThresholdParams::new(self.threshold_gradient, 0, DATAPATH_WIDTH)?;
                Ok(cfg)
            }
            VariantArg::Approx => Ok(PipelineConfig {
                variant: Variant::Approximate,
                gaussian_cfg: AdderConfig::with_prefix(
                    DATAPATH_WIDTH,
                    self.gauss_cell.into(),
                    self.gauss_approx_bits,
                )?,
                prewitt_cfg: AdderConfig::with_prefix(
                    DATAPATH_WIDTH,
                    CellKind::ApproxLOA,
                    self.prewitt_approx_bits,
                )?,
                intensity_threshold: ThresholdParams::new(
                    self.threshold_intensity,
                    self.ignore_lsbs_intensity,
                    8,
                )?,
                gradient_threshold: ThresholdParams::new(
                    self.threshold_gradient,
                    self.ignore_lsbs_gradient,
                    DATAPATH_WIDTH,
                )?,
            }),
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Input images (binary PGM, maxval 255).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    /// Directory for the output images.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write a CSV report.
    #[arg(long)]
    pub report_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub report_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CharacterizeArgs {
    /// Adder width in bits (exhaustive enumeration, max 12).
    #[arg(long, default_value_t = 8)]
    pub width: usize,
    /// Cell kind of the approximate prefix.
    #[arg(long, value_enum, default_value_t = CellArg::Loa)]
    pub cell: CellArg,
    /// Length of the approximate prefix.
    #[arg(long, default_value_t = 5)]
    pub approx_bits: usize,
    /// Comparator width for the cost model (defaults to the adder width).
    #[arg(long)]
    pub comparator_width: Option<usize>,
    /// Comparator LSBs dropped in the cost model (defaults to approx-bits).
    #[arg(long)]
    pub comparator_ignore_lsbs: Option<usize>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Number of images to generate.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Master seed; the corpus is fully determined by it.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Square image size in pixels.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 5.0)]
    pub noise_sigma: f64,
    /// Eyelid occlusion fraction of the pupil disk, 0..1.
    #[arg(long, default_value_t = 0.0)]
    pub occlusion: f64,
    /// Specular highlight dots per image.
    #[arg(long, default_value_t = 0)]
    pub highlights: usize,
    /// Fixed pupil radius; random per image when omitted.
    #[arg(long)]
    pub pupil_radius: Option<f64>,
    /// Fixed iris radius; derived from the pupil radius when omitted.
    #[arg(long)]
    pub iris_radius: Option<f64>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

fn read_inputs(paths: &[PathBuf]) -> Result<Vec<(String, GrayImage)>> {
    paths
        .iter()
        .map(|p| Ok((stem(p), read_pgm(p)?)))
        .collect()
}

fn cost_summary(cfg: &PipelineConfig) -> Result<CostSummary> {
    Ok(CostSummary {
        gaussian: cost_model(
            &cfg.gaussian_cfg,
            cfg.intensity_threshold.word_width,
            cfg.intensity_threshold.ignored_lsbs,
        )?,
        prewitt: cost_model(
            &cfg.prewitt_cfg,
            cfg.gradient_threshold.word_width,
            cfg.gradient_threshold.ignored_lsbs,
        )?,
    })
}

fn map_inputs<T: Send, F>(inputs: &[(String, GrayImage)], f: F) -> Result<Vec<T>>
where
    F: Fn(&(String, GrayImage)) -> Result<T> + Sync + Send,
{
    // Rows come back in input order regardless of completion order.
    #[cfg(feature = "parallel")]
    {
        inputs.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        inputs.iter().map(f).collect()
    }
}

/// Input image with a circle of the localized radius burned in at 255.
fn overlay(img: &GrayImage, center: (f64, f64), radius: f64) -> GrayImage {
    let pixels = (0..img.width() * img.height())
        .map(|i| {
            let (x, y) = (i % img.width(), i / img.width());
            let d = ((x as f64 - center.0).powi(2) + (y as f64 - center.1).powi(2)).sqrt();
            if (d - radius).abs() < 0.75 {
                255
            } else {
                img.pixels()[i]
            }
        })
        .collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("same dimensions")
}

fn emit_report<Row: serde::Serialize>(
    report: &RunReport<Row>,
    json_path: &Option<PathBuf>,
    csv: Option<(String, &Option<PathBuf>)>,
) -> Result<()> {
    match json_path {
        Some(p) => std::fs::write(p, report.to_json())?,
        None => println!("{}", report.to_json()),
    }
    if let Some((content, Some(path))) = csv {
        std::fs::write(path, content)?;
    }
    Ok(())
}

/// Segments each input and writes edge map, pupil mask, and overlay PGMs.
pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = args.pipeline.to_config()?;
    let inputs = read_inputs(&args.inputs)?;
    std::fs::create_dir_all(&args.out)?;
    let rows = map_inputs(&inputs, |(name, img)| {
        let res = run_pipeline(img, &cfg)?;
        write_pgm(&res.edge_map.to_gray(), args.out.join(format!("{name}_edges.pgm")))?;
        write_pgm(&res.pupil_mask.to_gray(), args.out.join(format!("{name}_mask.pgm")))?;
        write_pgm(
            &overlay(img, res.center, res.radius),
            args.out.join(format!("{name}_overlay.pgm")),
        )?;
        Ok(RunRow {
            input: name.clone(),
            seed: None,
            center_x: res.center.0,
            center_y: res.center.1,
            radius: res.radius,
            timings: timings_micros(&res.stage_timings),
        })
    })?;
    let csv = run_rows_csv(&rows);
    let report = RunReport::new((&cfg).into(), cost_summary(&cfg)?, rows);
    emit_report(&report, &args.report, Some((csv, &args.report_csv)))
}

/// Runs the exact and the configured approximate variant on one image and
/// builds the per-stage comparison row.
pub fn compare_one(
    name: &str,
    seed: Option<u64>,
    img: &GrayImage,
    approx_cfg: &PipelineConfig,
) -> Result<CompareRow> {
    let exact = run_pipeline(img, &PipelineConfig::exact())?;
    let approx = run_pipeline(img, approx_cfg)?;
    compare_row(name, seed, &exact, &approx)
}

fn compare_row(
    name: &str,
    seed: Option<u64>,
    exact: &PupilResult,
    approx: &PupilResult,
) -> Result<CompareRow> {
    let stages = extract_stage_metrics(exact, approx)?;
    let dx = exact.center.0 - approx.center.0;
    let dy = exact.center.1 - approx.center.1;
    Ok(CompareRow {
        input: name.to_string(),
        seed,
        stages,
        exact_center_x: exact.center.0,
        exact_center_y: exact.center.1,
        exact_radius: exact.radius,
        approx_center_x: approx.center.0,
        approx_center_y: approx.center.1,
        approx_radius: approx.radius,
        center_delta_px: (dx * dx + dy * dy).sqrt(),
        exact_timings: timings_micros(&exact.stage_timings),
        approx_timings: timings_micros(&approx.stage_timings),
    })
}

/// Compare logic shared by the CLI and in-process callers.
pub fn compare_batch(
    inputs: &[(String, GrayImage)],
    approx_cfg: &PipelineConfig,
) -> Result<RunReport<CompareRow>> {
    let rows = map_inputs(inputs, |(name, img)| {
        compare_one(name, None, img, approx_cfg)
    })?;
    let mut report = RunReport::new(approx_cfg.into(), cost_summary(approx_cfg)?, rows);
    report.aggregates = Aggregates::from_rows(&report.rows);
    Ok(report)
}

pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let cfg = args.pipeline.to_config()?;
    let inputs = read_inputs(&args.inputs)?;
    let report = compare_batch(&inputs, &cfg)?;
    let csv = compare_rows_csv(&report.rows);
    emit_report(&report, &args.report, Some((csv, &args.report_csv)))
}

#[derive(serde::Serialize)]
struct CharacterizeReport {
    schema_version: u32,
    stats: crate::characterization::ErrorStats,
    cost: crate::characterization::CostReport,
}

pub fn cmd_characterize(args: &CharacterizeArgs) -> Result<()> {
    let cfg = AdderConfig::with_prefix(args.width, args.cell.into(), args.approx_bits)?;
    let stats = characterize_adder(&cfg)?;
    let comparator_width = args.comparator_width.unwrap_or(args.width);
    let k = args.comparator_ignore_lsbs.unwrap_or(args.approx_bits);
    let cost = cost_model(&cfg, comparator_width, k)?;
    match args.format {
        FormatArg::Json => {
            let report = CharacterizeReport {
                schema_version: SCHEMA_VERSION,
                stats,
                cost,
            };
            println!("{}", serde_json::to_string_pretty(&report).expect("serializes"));
        }
        FormatArg::Csv => {
            println!(
                "schema_version,width,approx_prefix,cell,error_rate,mean_error_distance,\
                 max_error_distance,total_cases,exact_cells,carry_only_cells,approx_cells,\
                 comparator_bits_exact,comparator_bits_truncated,comparator_reduction"
            );
            println!(
                "{},{},{},{:?},{},{},{},{},{},{},{},{},{},{:.6}",
                SCHEMA_VERSION,
                stats.width,
                stats.approx_prefix,
                CellKind::from(args.cell),
                stats.error_rate,
                stats.mean_error_distance,
                stats.max_error_distance,
                stats.total_cases,
                cost.exact_cells,
                cost.carry_only_cells,
                cost.approx_cells,
                cost.comparator_bits_exact,
                cost.comparator_bits_truncated,
                cost.comparator_reduction,
            );
        }
    }
    Ok(())
}

/// Builds the deterministic synthetic corpus used by `synth` and by the
/// verification suite: per-image geometry and seeds all derive from the
/// master seed.
pub fn build_corpus(args: &SynthArgs) -> Result<Vec<(EyeSpec, GrayImage, crate::synth::GroundTruth)>> {
    let mut master = ChaCha8Rng::seed_from_u64(args.seed);
    let size = args.size as f64;
    let mut corpus = Vec::with_capacity(args.count);
    for _ in 0..args.count {
        // Radius floor keeps the relative error of area-based radius
        // estimation small: smoothing pulls a ~1.3 px halo of iris pixels
        // under the intensity threshold, a constant absolute bias.
        let pupil_radius = args
            .pupil_radius
            .unwrap_or_else(|| master.gen_range(size / 4.0..size / 3.2));
        let iris_radius = args
            .iris_radius
            .unwrap_or_else(|| (pupil_radius * 1.4).min(size / 2.2));
        let wobble = size / 12.0;
        let c = (size - 1.0) / 2.0;
        let center = (
            c + master.gen_range(-wobble..wobble),
            c + master.gen_range(-wobble..wobble),
        );
        let mut spec = EyeSpec::centered(args.size, pupil_radius, iris_radius, master.gen());
        spec.pupil_center = center;
        spec.noise_sigma = args.noise_sigma;
        spec.eyelid_fraction = args.occlusion;
        spec.highlight_count = args.highlights;
        let (img, truth) = generate_eye(&spec)?;
        corpus.push((spec, img, truth));
    }
    Ok(corpus)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let corpus = build_corpus(args)?;
    std::fs::create_dir_all(&args.out)?;
    let mut csv = String::from("file,seed,cx,cy,radius\n");
    for (i, (spec, img, truth)) in corpus.iter().enumerate() {
        let file = format!("eye_{i:04}.pgm");
        write_pgm(img, args.out.join(&file))?;
        csv += &format!(
            "{file},{},{:.3},{:.3},{:.3}\n",
            spec.seed, truth.center.0, truth.center.1, truth.radius
        );
    }
    std::fs::write(args.out.join("ground_truth.csv"), csv)?;
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Characterize(args) => cmd_characterize(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

/// Exit codes: 0 success, 1 I/O, 2 usage (from clap), 3 parse, 4
/// configuration, 5 no pupil found.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Format(_) => 3,
        Error::Config(_)
        | Error::Range { .. }
        | Error::DimensionMismatch(_)
        | Error::ImageTooSmall { .. }
        | Error::EyeSpec(_) => 4,
        Error::NoPupil(_) => 5,
        Error::Io(_) => 1,
    }
}
