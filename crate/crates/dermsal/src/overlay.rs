//! Mask contours drawn over the source image.

use dermsal_core::{BinaryMask, Plane, Raster, Result};

/// Contour color, chosen to stand out against skin tones.
pub const CONTOUR_RGB: [f64; 3] = [0.0, 1.0, 0.0];

/// Pixels just outside the mask (4-adjacent to it) plus mask pixels on the
/// image frame, where there is no outside to draw on.
pub fn contour(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w, h, |x, y| {
        if mask.get(x, y) {
            return x == 0 || y == 0 || x + 1 == w || y + 1 == h;
        }
        (x > 0 && mask.get(x - 1, y))
            || (x + 1 < w && mask.get(x + 1, y))
            || (y > 0 && mask.get(x, y - 1))
            || (y + 1 < h && mask.get(x, y + 1))
    })
}

pub fn overlay(img: &Raster, mask: &BinaryMask) -> Result<Raster> {
    if img.dims() != mask.dims() {
        return Err(dermsal_core::Error::Parameter(format!(
            "image is {:?} but mask is {:?}",
            img.dims(),
            mask.dims()
        )));
    }
    let edge = contour(mask);
    let planes: Vec<Plane> = img
        .planes()
        .iter()
        .zip(CONTOUR_RGB)
        .map(|(p, c)| Plane::from_fn(p.width(), p.height(), |x, y| if edge.get(x, y) { c } else { p.get(x, y) }))
        .collect();
    Raster::rgb(planes[0].clone(), planes[1].clone(), planes[2].clone())
}
