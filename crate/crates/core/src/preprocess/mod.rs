//! Hair removal and edge-preserving smoothing.

mod guided;
mod hair;

pub use guided::{default_radius, fast_guided_filter, guided_filter, GuidedFilterParams};
pub use hair::{
    default_se_length, detect_hair_mask, gray_closing, inpaint_hair, line_offsets, HairMask,
    DEFAULT_THRESHOLD, ORIENTATIONS_DEG,
};

use crate::error::Result;
use crate::raster::Raster;

/// Guided smoothing of an rgb image using itself as the guide. The output
/// stays in `[0,1]`.
pub fn smooth(img: &Raster, params: &GuidedFilterParams) -> Result<Raster> {
    fast_guided_filter(img, img, params)
}
