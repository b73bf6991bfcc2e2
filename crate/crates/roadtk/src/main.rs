//! Command-line front end: thin wrappers over the library modules with a
//! stable exit-code contract — 0 success, 1 validation failure in the input
//! data, 2 usage error. Diagnostics go to stderr, machine-readable output to
//! stdout or the requested files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use roadtk::anchors::{kmeans_ratios, ratio_features};
use roadtk::augment::{apply_policy, strip_rotation, AugPolicy, ImageBuffer};
use roadtk::dataset::{
    dataset_stats, load_split, parse_predictions, write_submission, DetectionMap, LoadReport,
    ParseMode,
};
use roadtk::metrics::{evaluate_with, EvalConfig};
use roadtk::postprocess::{apply_thresholds, nms_map, sweep_thresholds, ThresholdTable};
use roadtk::scaling::compound_config;
use roadtk::DatasetSplit;

/// Env var consulted when `--annotations` is omitted.
const DATA_ROOT_ENV: &str = "ROADTK_DATA_ROOT";

#[derive(Parser)]
#[command(
    name = "roadtk",
    version,
    about = "Road-damage detection pipeline toolkit"
)]
struct Cli {
    /// Tolerate bad annotations: clip, skip, and tally instead of aborting.
    #[arg(long, global = true)]
    lenient: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    #[default]
    Table,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Image and box counts for an annotation directory
    Stats {
        /// Directory of PASCAL-VOC XML files (default: $ROADTK_DATA_ROOT)
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Score predictions against ground-truth annotations
    Evaluate {
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Predictions in the submission text format
        #[arg(long)]
        predictions: PathBuf,
        /// IoU threshold for the pooled F1
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        /// Apply a per-class threshold table before scoring
        #[arg(long)]
        thresholds: Option<PathBuf>,
        /// Write precision-recall curves as CSV to this path
        #[arg(long)]
        pr_curves: Option<PathBuf>,
        /// Area cutoff for the tiny-FN error category
        #[arg(long, default_value_t = 600.0)]
        fn_area: f64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Search per-class confidence thresholds on validation data
    Sweep {
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        grid_start: f64,
        #[arg(long, default_value_t = 0.95)]
        grid_end: f64,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        /// Write the table here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filter predictions through a per-class threshold table
    Apply {
        #[arg(long)]
        predictions: PathBuf,
        /// Threshold table in CLASS=VALUE form (from `sweep`)
        #[arg(long)]
        thresholds: PathBuf,
        /// Write surviving detections here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit quintuples without confidence values
        #[arg(long)]
        no_confidence: bool,
    },
    /// Prune overlapping detections with per-class NMS
    Nms {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        /// Write surviving detections here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit quintuples without confidence values
        #[arg(long)]
        no_confidence: bool,
    },
    /// K-means anchor aspect ratios from ground-truth boxes
    Anchors {
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        k: usize,
        /// Network input resolution the boxes are rescaled to
        #[arg(long, default_value_t = 512)]
        resolution: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compound-scaling configuration for one coefficient
    Scale {
        #[arg(long)]
        phi: u8,
    },
    /// Apply an augmentation policy to one image and its annotation
    Augment {
        /// Input image (PNG)
        #[arg(long)]
        image: PathBuf,
        /// PASCAL-VOC annotation for the image
        #[arg(long)]
        annotation: PathBuf,
        /// Bundled policy name (v0..v3) or a policy file path
        #[arg(long)]
        policy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output image path (required unless --dry-run)
        #[arg(long)]
        out_image: Option<PathBuf>,
        /// Write transformed boxes as CSV here instead of stdout
        #[arg(long)]
        out_boxes: Option<PathBuf>,
        /// Emit only the transformed boxes as CSV; write no image
        #[arg(long)]
        dry_run: bool,
    },
}

enum Failure {
    /// Exit 2: the invocation itself is wrong (missing paths, bad flags).
    Usage(String),
    /// Exit 1: the input data failed validation.
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) => m,
        }
    }
}

fn data_err(err: roadtk::Error) -> Failure {
    Failure::Data(err.to_string())
}

fn resolve_annotations(flag: Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = flag
        .or_else(|| std::env::var_os(DATA_ROOT_ENV).map(PathBuf::from))
        .ok_or_else(|| {
            Failure::Usage(format!(
                "no annotation directory given and {DATA_ROOT_ENV} is unset"
            ))
        })?;
    if !dir.is_dir() {
        return Err(Failure::Usage(format!(
            "annotation directory {} does not exist",
            dir.display()
        )));
    }
    Ok(dir)
}

fn read_file(path: &Path, what: &str) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {what} {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

fn report_load(report: &LoadReport, lenient: bool) {
    if report.files_scanned == 0 {
        eprintln!("warning: no annotation files found");
    }
    if !lenient {
        return;
    }
    for failure in &report.failures {
        eprintln!("warning: {}: {}", failure.file, failure.message);
    }
    let w = &report.warnings;
    if !w.is_empty() {
        let unknown: usize = w.unknown_classes.values().sum();
        eprintln!(
            "warning: lenient repairs: {} unknown-class boxes skipped, {} clipped, {} dropped",
            unknown, w.clipped, w.dropped
        );
    }
}

fn load_annotations(dir: Option<PathBuf>, lenient: bool) -> Result<DatasetSplit, Failure> {
    let dir = resolve_annotations(dir)?;
    let mode = if lenient {
        ParseMode::Lenient
    } else {
        ParseMode::Strict
    };
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "split".to_string());
    let loaded = load_split(&dir, &name, mode).map_err(data_err)?;
    report_load(&loaded.report, lenient);
    Ok(loaded.split)
}

fn load_predictions(path: &Path) -> Result<DetectionMap, Failure> {
    let text = read_file(path, "predictions file")?;
    parse_predictions(&text).map_err(data_err)
}

/// Print to stdout, treating a closed pipe (e.g. `roadtk ... | head`) as a
/// clean early exit rather than a panic.
fn write_stdout(contents: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout
        .write_all(contents.as_bytes())
        .and_then(|_| stdout.flush())
    {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
    }
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, contents),
        None => {
            write_stdout(contents);
            Ok(())
        }
    }
}

fn boxes_csv(boxes: &[roadtk::GroundTruthBox]) -> String {
    let mut out = String::from("label,xmin,ymin,xmax,ymax\n");
    for gt in boxes {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            gt.label,
            gt.bbox.xmin(),
            gt.bbox.ymin(),
            gt.bbox.xmax(),
            gt.bbox.ymax()
        ));
    }
    out
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Stats {
            annotations,
            format,
        } => {
            let split = load_annotations(annotations, cli.lenient)?;
            let stats = dataset_stats(&split);
            match format {
                Format::Table => write_stdout(&format!("{stats}")),
                Format::Csv => write_stdout(&stats.to_csv()),
            }
            Ok(())
        }
        Command::Evaluate {
            annotations,
            predictions,
            iou,
            thresholds,
            pr_curves,
            fn_area,
            format,
        } => {
            if !(iou > 0.0 && iou <= 1.0) {
                return Err(Failure::Usage(format!("--iou {iou} outside (0, 1]")));
            }
            let split = load_annotations(annotations, cli.lenient)?;
            let mut dets = load_predictions(&predictions)?;
            if let Some(table_path) = thresholds {
                let table = ThresholdTable::parse(&read_file(&table_path, "threshold table")?)
                    .map_err(data_err)?;
                dets = apply_thresholds(&dets, &table).map_err(data_err)?;
            }
            let config = EvalConfig {
                f1_iou: iou,
                fn_area_threshold: fn_area,
            };
            let report = evaluate_with(&split, &dets, &config).map_err(data_err)?;
            if let Some(path) = pr_curves {
                write_file(&path, &report.pr_curves_csv())?;
            }
            match format {
                Format::Table => write_stdout(&format!("{report}")),
                Format::Csv => write_stdout(&report.to_csv()),
            }
            Ok(())
        }
        Command::Sweep {
            annotations,
            predictions,
            grid_start,
            grid_end,
            grid_step,
            out,
        } => {
            if !grid_step.is_finite() || grid_step <= 0.0 || grid_start > grid_end {
                return Err(Failure::Usage(
                    "grid requires start <= end and a positive step".to_string(),
                ));
            }
            let mut grid = Vec::new();
            let mut i = 0u32;
            loop {
                // snap accumulated values so thresholds come out clean
                // (0.15, not 0.15000000000000002)
                let value = ((grid_start + grid_step * i as f64) * 1e9).round() / 1e9;
                if value > grid_end + 1e-12 {
                    break;
                }
                grid.push(value.min(1.0));
                i += 1;
            }
            let split = load_annotations(annotations, cli.lenient)?;
            let dets = load_predictions(&predictions)?;
            let table = sweep_thresholds(&split, &dets, &grid).map_err(data_err)?;
            emit(out.as_deref(), &table.to_text())
        }
        Command::Apply {
            predictions,
            thresholds,
            out,
            no_confidence,
        } => {
            let dets = load_predictions(&predictions)?;
            let table = ThresholdTable::parse(&read_file(&thresholds, "threshold table")?)
                .map_err(data_err)?;
            let kept = apply_thresholds(&dets, &table).map_err(data_err)?;
            emit(out.as_deref(), &write_submission(&kept, !no_confidence))
        }
        Command::Nms {
            predictions,
            iou,
            out,
            no_confidence,
        } => {
            let dets = load_predictions(&predictions)?;
            let kept = nms_map(&dets, iou).map_err(data_err)?;
            emit(out.as_deref(), &write_submission(&kept, !no_confidence))
        }
        Command::Anchors {
            annotations,
            k,
            resolution,
            seed,
        } => {
            if resolution == 0 {
                return Err(Failure::Usage("--resolution must be positive".to_string()));
            }
            let split = load_annotations(annotations, cli.lenient)?;
            let boxes = ratio_features(&split, resolution);
            let result = kmeans_ratios(&boxes, k, seed).map_err(data_err)?;
            let ratios: Vec<String> = result.ratios.iter().map(|r| format!("{r:.4}")).collect();
            write_stdout(&format!("{}\n", ratios.join(",")));
            eprintln!(
                "k {}  boxes {}  mean ratio-iou {:.4}  iterations {}",
                result.k,
                boxes.len(),
                result.mean_ratio_iou,
                result.iterations
            );
            Ok(())
        }
        Command::Scale { phi } => {
            let config = compound_config(phi).map_err(data_err)?;
            write_stdout(&config.to_key_values());
            Ok(())
        }
        Command::Augment {
            image,
            annotation,
            policy,
            seed,
            out_image,
            out_boxes,
            dry_run,
        } => {
            let img = ImageBuffer::read_png(&image)
                .map_err(|e| Failure::Usage(format!("cannot read image: {e}")))?;
            let xml = read_file(&annotation, "annotation")?;
            let mode = if cli.lenient {
                ParseMode::Lenient
            } else {
                ParseMode::Strict
            };
            let parsed = roadtk::dataset::parse_voc_annotation(&xml, mode).map_err(data_err)?;
            let loaded = match AugPolicy::builtin(&policy) {
                Some(builtin) => builtin,
                None => {
                    let text = read_file(Path::new(&policy), "policy file")?;
                    AugPolicy::parse(&text, policy.as_str()).map_err(data_err)?
                }
            };
            let stripped = strip_rotation(&loaded);
            if loaded.contains_rotation() {
                eprintln!(
                    "note: rotation specs removed from policy {:?} (orientation classes)",
                    stripped.name
                );
            }
            let applied =
                apply_policy(&img, &parsed.record.boxes, &stripped, seed).map_err(data_err)?;
            if applied.dropped_boxes > 0 {
                eprintln!(
                    "note: {} box(es) dropped by clipping",
                    applied.dropped_boxes
                );
            }
            let csv = boxes_csv(&applied.boxes);
            if dry_run {
                write_stdout(&csv);
                return Ok(());
            }
            let out_image = out_image.ok_or_else(|| {
                Failure::Usage("--out-image is required unless --dry-run".to_string())
            })?;
            applied
                .image
                .write_png(&out_image)
                .map_err(|e| Failure::Data(format!("cannot write image: {e}")))?;
            emit(out_boxes.as_deref(), &csv)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
