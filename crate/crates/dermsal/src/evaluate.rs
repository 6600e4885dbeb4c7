//! Corpus evaluation and the CSV report.

use std::io::Write;
use std::path::Path;

use dermsal_core::metrics::{confusion, macro_average, metrics};
use dermsal_core::{pipeline, MetricsRecord, PipelineConfig};
use rayon::prelude::*;

use crate::dataset::DatasetPair;
use crate::error::{AppError, Result};
use crate::io::{load_image, load_mask};

pub const CSV_HEADER: [&str; 5] = ["image_id", "sensitivity", "specificity", "accuracy", "dsc"];
pub const AVERAGE_ID: &str = "average";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub image_id: String,
    /// The per-image scores, or the reason the image could not be scored.
    pub outcome: Result<MetricsRecord, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusReport {
    /// Sorted by image id.
    pub rows: Vec<ReportRow>,
    /// Macro average over the rows that were scored.
    pub average: MetricsRecord,
}

impl CorpusReport {
    pub fn evaluated(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_ok()).count()
    }
}

/// Segments one image and scores it against its mask.
pub fn evaluate_pair(pair: &DatasetPair, config: &PipelineConfig) -> Result<MetricsRecord> {
    let img = load_image(&pair.image_path)?;
    let gt = load_mask(&pair.ground_truth_path)?;
    if img.dims() != gt.dims() {
        return Err(AppError::Dataset(format!(
            "{}: image is {:?} but ground truth is {:?}",
            pair.image_id,
            img.dims(),
            gt.dims()
        )));
    }
    let seg = pipeline::segment(&img, config)?;
    Ok(metrics(&confusion(&seg.mask, &gt)?, pair.image_id.clone())?)
}

/// Rows come back in id order whatever the completion order. `jobs == 0`
/// uses one worker per core.
pub fn evaluate_corpus(pairs: &[DatasetPair], config: &PipelineConfig, jobs: usize) -> Result<CorpusReport> {
    if pairs.is_empty() {
        return Err(AppError::Dataset("nothing to evaluate".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| AppError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let mut rows: Vec<ReportRow> = pool.install(|| {
        pairs
            .par_iter()
            .map(|p| ReportRow {
                image_id: p.image_id.clone(),
                outcome: evaluate_pair(p, config).map_err(|e| e.to_string()),
            })
            .collect()
    });
    rows.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    let ok: Vec<&MetricsRecord> = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let average = macro_average(ok.iter().copied(), AVERAGE_ID);
    Ok(CorpusReport { rows, average })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn record_cells(r: &MetricsRecord) -> [String; 5] {
    [
        r.image_id.clone(),
        cell(r.sensitivity),
        cell(r.specificity),
        cell(r.accuracy),
        cell(r.dsc),
    ]
}

/// Header, one row per image (`error` in every metric cell for failed
/// images, empty cells for undefined metrics) and the average row.
pub fn write_csv<W: Write>(report: &CorpusReport, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &report.rows {
        match &row.outcome {
            Ok(r) => w.write_record(record_cells(r))?,
            Err(_) => w.write_record([row.image_id.as_str(), "error", "error", "error", "error"])?,
        }
    }
    w.write_record(record_cells(&report.average))?;
    w.flush()?;
    Ok(())
}

pub fn save_csv(report: &CorpusReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| AppError::io(path, e))?;
    write_csv(report, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::io(path, io),
        other => AppError::Usage(format!("{}: {other:?}", path.display())),
    })
}

/// The average row as CSV text with its header, for terminal output.
pub fn average_line(report: &CorpusReport) -> String {
    format!("{}\n{}", CSV_HEADER.join(","), record_cells(&report.average).join(","))
}
