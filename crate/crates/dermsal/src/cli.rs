//! The `dermsal` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use dermsal_core::{pipeline, PipelineConfig};

use crate::config::{load_config, render_config};
use crate::dataset::{ingest_dataset, Layout};
use crate::error::{AppError, Result};
use crate::evaluate::{average_line, evaluate_corpus, save_csv};
use crate::io::{load_image, load_mask, save_gray, save_mask, save_rgb};
use crate::overlay::overlay;

#[derive(Debug, Parser)]
#[command(name = "dermsal", version, about = "Saliency-based skin lesion segmentation")]
pub struct Cli {
    /// Configuration file with flat `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Fuse the spatial and frequency maps by multiplication (for images
    /// with color calibration charts).
    #[arg(long, global = true)]
    pub chart_mode: bool,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    Ph2,
    Isic2016,
    Generic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment one image and write the lesion mask as PNG.
    Segment {
        /// Dermoscopy image (PNG, JPEG or BMP).
        image: PathBuf,
        /// Where to write the binary mask.
        #[arg(short, long, value_name = "MASK")]
        output: PathBuf,
        /// Write every intermediate map as a grayscale PNG into DIR.
        #[arg(long, value_name = "DIR")]
        dump_intermediate: Option<PathBuf>,
    },
    /// Segment a dataset and write per-image scores plus their average as CSV.
    Evaluate {
        /// How images and masks are arranged on disk.
        #[arg(long, value_enum)]
        layout: LayoutArg,
        /// Image directory.
        #[arg(long, value_name = "DIR")]
        images: PathBuf,
        /// Ground-truth directory; defaults to the image directory.
        #[arg(long, value_name = "DIR")]
        gt: Option<PathBuf>,
        /// Image file template for the generic layout.
        #[arg(long, default_value = "{id}.png")]
        image_pattern: String,
        /// Mask file template for the generic layout.
        #[arg(long, default_value = "{id}_mask.png")]
        mask_pattern: String,
        /// Where to write the per-image CSV report.
        #[arg(long, value_name = "CSV")]
        report: PathBuf,
        /// Parallel workers; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Draw the mask contour over the image.
    Overlay {
        /// Color image.
        image: PathBuf,
        /// Binary mask of the same size.
        mask: PathBuf,
        /// Where to write the overlay PNG.
        #[arg(short, long, value_name = "PNG")]
        output: PathBuf,
    },
}

fn effective_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => PipelineConfig::default(),
    };
    if cli.chart_mode {
        cfg.fusion.chart_mode = true;
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

pub fn cmd_segment(image: &Path, output: &Path, dump: Option<&Path>, cfg: &PipelineConfig) -> Result<()> {
    let img = load_image(image)?;
    let seg = pipeline::segment(&img, cfg)?;
    save_mask(&seg.mask, output)?;
    if let Some(dir) = dump {
        create_dir(dir)?;
        for (name, map) in seg.intermediates() {
            save_gray(map.values(), dir.join(format!("{name}.png")))?;
        }
    }
    Ok(())
}

pub fn cmd_evaluate(layout: &Layout, images: &Path, gt: &Path, report: &Path, jobs: usize, cfg: &PipelineConfig) -> Result<String> {
    let ingested = ingest_dataset(layout, images, gt)?;
    for w in &ingested.warnings {
        log::warn!("{w}");
    }
    let rep = evaluate_corpus(&ingested.pairs, cfg, jobs)?;
    for row in &rep.rows {
        if let Err(e) = &row.outcome {
            log::warn!("{}: {e}", row.image_id);
        }
    }
    save_csv(&rep, report)?;
    if rep.evaluated() == 0 {
        return Err(AppError::Dataset("every image failed to evaluate".into()));
    }
    Ok(average_line(&rep))
}

pub fn cmd_overlay(image: &Path, mask: &Path, output: &Path) -> Result<()> {
    let img = load_image(image)?;
    let m = load_mask(mask)?;
    let out = overlay(&img, &m).map_err(|e| AppError::Usage(e.to_string()))?;
    save_rgb(&out, output)
}

fn dispatch(cli: Cli) -> Result<()> {
    let cfg = effective_config(&cli)?;
    if cli.print_config {
        print!("{}", render_config(&cfg));
        return Ok(());
    }
    match cli.command {
        None => Err(AppError::Usage("no command given; see --help".into())),
        Some(Command::Segment {
            image,
            output,
            dump_intermediate,
        }) => cmd_segment(&image, &output, dump_intermediate.as_deref(), &cfg),
        Some(Command::Evaluate {
            layout,
            images,
            gt,
            image_pattern,
            mask_pattern,
            report,
            jobs,
        }) => {
            let layout = match layout {
                LayoutArg::Ph2 => Layout::Ph2,
                LayoutArg::Isic2016 => Layout::Isic2016,
                LayoutArg::Generic => Layout::generic(image_pattern, mask_pattern)?,
            };
            let gt = gt.unwrap_or_else(|| images.clone());
            let avg = cmd_evaluate(&layout, &images, &gt, &report, jobs, &cfg)?;
            println!("{avg}");
            Ok(())
        }
        Some(Command::Overlay { image, mask, output }) => cmd_overlay(&image, &mask, &output),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
