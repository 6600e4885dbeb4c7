//! Dark hair detection by oriented grayscale closing, and inpainting of the
//! detected pixels from their non-hair neighbourhood.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{param, Error, Result};
use crate::raster::{ensure_same_dims, BinaryMask, Plane, Raster, Semantics};

/// Structuring element orientations in degrees.
pub const ORIENTATIONS_DEG: [f64; 3] = [0.0, 60.0, 120.0];

/// Default detection threshold in intensity units.
pub const DEFAULT_THRESHOLD: f64 = 0.08;

#[derive(Debug, Clone, PartialEq)]
pub struct HairMask {
    mask: BinaryMask,
    coverage: f64,
}

impl HairMask {
    pub fn new(mask: BinaryMask) -> Self {
        let coverage = mask.coverage();
        Self { mask, coverage }
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }
}

/// 15 px at a 512 px longest side, scaled with the image and kept odd.
pub fn default_se_length(width: usize, height: usize) -> usize {
    let scaled = (15.0 * width.max(height) as f64 / 512.0).round() as usize;
    let odd = if scaled.is_multiple_of(2) { scaled + 1 } else { scaled };
    odd.max(3).min(odd_floor(width.min(height)).max(3))
}

fn odd_floor(n: usize) -> usize {
    if n.is_multiple_of(2) {
        n.saturating_sub(1)
    } else {
        n
    }
}

/// Pixel offsets of a centred line of `length` samples at `angle_deg`.
pub fn line_offsets(length: usize, angle_deg: f64) -> Vec<(isize, isize)> {
    let half = (length / 2) as isize;
    let (s, c) = angle_deg.to_radians().sin_cos();
    let mut out: Vec<(isize, isize)> = Vec::with_capacity(length);
    for t in -half..=half {
        let t = t as f64;
        let o = ((t * c).round() as isize, (t * s).round() as isize);
        if !out.contains(&o) {
            out.push(o);
        }
    }
    out
}

// Out-of-image offsets are skipped, which keeps closing extensive.
fn rank_filter(p: &Plane, se: &[(isize, isize)], take_max: bool) -> Plane {
    let (w, h) = p.dims();
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = if take_max {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
            for &(dx, dy) in se {
                let xi = x as isize + dx;
                let yi = y as isize + dy;
                if xi < 0 || yi < 0 || xi >= w as isize || yi >= h as isize {
                    continue;
                }
                let v = p.get(xi as usize, yi as usize);
                acc = if take_max { acc.max(v) } else { acc.min(v) };
            }
            out.set(x, y, acc);
        }
    }
    out
}

/// Grayscale closing (dilation then erosion) with a flat structuring element.
pub fn gray_closing(p: &Plane, se: &[(isize, isize)]) -> Plane {
    rank_filter(&rank_filter(p, se, true), se, false)
}

/// Flags pixels where closing with any oriented line, in any color channel,
/// raises the value by more than `threshold`.
pub fn detect_hair_mask(img: &Raster, se_length: usize, threshold: f64) -> Result<HairMask> {
    img.expect(Semantics::Rgb)?;
    let (w, h) = img.dims();
    if se_length < 3 || se_length.is_multiple_of(2) {
        return Err(param(format!(
            "structuring element length must be odd and >= 3, got {se_length}"
        )));
    }
    if se_length > w.min(h) {
        return Err(param(format!(
            "structuring element length {se_length} exceeds image size {w}x{h}"
        )));
    }
    let mut response = Plane::zeros(w, h);
    for angle in ORIENTATIONS_DEG {
        let se = line_offsets(se_length, angle);
        for plane in img.planes() {
            let closed = gray_closing(plane, &se);
            for ((r, c), o) in response
                .data_mut()
                .iter_mut()
                .zip(closed.data())
                .zip(plane.data())
            {
                *r = r.max(c - o);
            }
        }
    }
    let flags = response.data().iter().map(|&d| d > threshold).collect();
    Ok(HairMask::new(BinaryMask::from_vec(w, h, flags)?))
}

/// Replaces each flagged pixel with the mean of the non-flagged pixels in
/// the smallest square window (from 5×5 upward) holding at least four of them.
pub fn inpaint_hair(img: &Raster, mask: &HairMask) -> Result<Raster> {
    let (w, h) = img.dims();
    let m = mask.mask();
    ensure_same_dims((w, h), m.dims())?;
    if img.planes().len() > 4 {
        return Err(param("inpainting supports at most 4 planes"));
    }
    let total = w * h;
    let flagged = m.count();
    if flagged == 0 {
        return Ok(img.clone());
    }
    if flagged == total {
        return Err(Error::Inpaint("hair mask covers the whole image".into()));
    }
    let mut planes: Vec<Plane> = img.planes().to_vec();
    let max_half = w.max(h);
    for y in 0..h {
        for x in 0..w {
            if !m.get(x, y) {
                continue;
            }
            let mut half = 2usize;
            let (sums, count) = loop {
                let mut sums = [0.0f64; 4];
                let mut count = 0usize;
                let y0 = y.saturating_sub(half);
                let y1 = (y + half + 1).min(h);
                let x0 = x.saturating_sub(half);
                let x1 = (x + half + 1).min(w);
                for yy in y0..y1 {
                    for xx in x0..x1 {
                        if m.get(xx, yy) {
                            continue;
                        }
                        count += 1;
                        for (s, p) in sums.iter_mut().zip(img.planes()) {
                            *s += p.get(xx, yy);
                        }
                    }
                }
                if count >= 4 || half >= max_half {
                    break (sums, count);
                }
                half += 1;
            };
            for (s, p) in sums.iter().zip(planes.iter_mut()) {
                p.set(x, y, s / count as f64);
            }
        }
    }
    Raster::new(planes, img.semantics())
}
