//! Saliency-based segmentation of pigmented skin lesions in dermoscopy images.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numeric
//! pipeline: color feature planes, hair removal and guided smoothing, the
//! spatial color-contrast map, the background-prior coarse map, the
//! frequency-domain map, two-phase fusion, Otsu binarization, mask cleanup and
//! the pixelwise evaluation metrics. Decoding, encoding and the command line
//! live in the `dermsal` crate.
//!
//! ```
//! use dermsal_core::{pipeline, PipelineConfig, Plane, Raster};
//!
//! let (w, h) = (64, 64);
//! let mut r = Plane::filled(w, h, 0.8);
//! let mut g = Plane::filled(w, h, 0.7);
//! let mut b = Plane::filled(w, h, 0.6);
//! for y in 20..44 {
//!     for x in 20..44 {
//!         r.set(x, y, 0.3);
//!         g.set(x, y, 0.2);
//!         b.set(x, y, 0.15);
//!     }
//! }
//! let img = Raster::rgb(r, g, b).unwrap();
//! let out = pipeline::segment(&img, &PipelineConfig::default()).unwrap();
//! assert!(out.mask.get(32, 32));
//! assert!(!out.mask.get(2, 2));
//! ```

#![no_std]

extern crate alloc;

pub mod coarse;
pub mod color;
mod eigen;
mod error;
pub mod fft;
pub mod filter;
pub mod frequency;
pub mod fusion;
pub mod metrics;
pub mod morphology;
pub mod pipeline;
pub mod preprocess;
mod raster;
pub mod resize;
pub mod spatial;

pub use color::{IntensityMode, LabPlanes, OpponentPlanes};
pub use error::{Error, Result};
pub use metrics::{ConfusionCounts, MetricsRecord};
pub use pipeline::{PipelineConfig, Segmentation};
pub use raster::{minmax_normalize, BinaryMask, Plane, Raster, SaliencyMap, Semantics};
