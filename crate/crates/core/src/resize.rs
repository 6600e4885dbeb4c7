//! Resampling used by the fast guided filter and the working-resolution step.

#[allow(unused_imports)]
use num_traits::Float;

use crate::raster::{BinaryMask, Plane};

/// Bilinear resampling with pixel-centre alignment and edge clamping.
pub fn resize_bilinear(p: &Plane, new_w: usize, new_h: usize) -> Plane {
    let (w, h) = p.dims();
    if (w, h) == (new_w, new_h) {
        return p.clone();
    }
    let sx = w as f64 / new_w as f64;
    let sy = h as f64 / new_h as f64;
    let coord = |o: usize, scale: f64, n: usize| {
        let c = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (n - 1) as f64);
        let i0 = c.floor() as usize;
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, c - i0 as f64)
    };
    Plane::from_fn(new_w, new_h, |x, y| {
        let (x0, x1, fx) = coord(x, sx, w);
        let (y0, y1, fy) = coord(y, sy, h);
        let top = p.get(x0, y0) * (1.0 - fx) + p.get(x1, y0) * fx;
        let bottom = p.get(x0, y1) * (1.0 - fx) + p.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

/// Nearest-neighbour resampling of a mask.
pub fn resize_nearest(m: &BinaryMask, new_w: usize, new_h: usize) -> BinaryMask {
    let (w, h) = m.dims();
    if (w, h) == (new_w, new_h) {
        return m.clone();
    }
    BinaryMask::from_fn(new_w, new_h, |x, y| {
        let sx = (((x as f64 + 0.5) * w as f64 / new_w as f64) as usize).min(w - 1);
        let sy = (((y as f64 + 0.5) * h as f64 / new_h as f64) as usize).min(h - 1);
        m.get(sx, sy)
    })
}

/// Size whose longest side is at most `max_side`, keeping the aspect ratio.
/// `max_side == 0` keeps the native size.
pub fn fit_within(width: usize, height: usize, max_side: usize) -> (usize, usize) {
    let longest = width.max(height);
    if max_side == 0 || longest <= max_side {
        return (width, height);
    }
    let scale = max_side as f64 / longest as f64;
    (
        ((width as f64 * scale).round() as usize).max(1),
        ((height as f64 * scale).round() as usize).max(1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_preserves_constant_and_linear_ramp() {
        let c = Plane::filled(10, 7, 0.25);
        assert!(resize_bilinear(&c, 4, 3).data().iter().all(|v| (v - 0.25).abs() < 1e-12));
        let ramp = Plane::from_fn(8, 4, |x, _| x as f64);
        let up = resize_bilinear(&ramp, 16, 4);
        // Interior samples of a linear ramp stay linear.
        for x in 2..14 {
            assert!((up.get(x, 1) - ((x as f64 + 0.5) / 2.0 - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_roundtrip_on_integer_factor() {
        let m = BinaryMask::from_fn(6, 4, |x, y| (x + y) % 3 == 0);
        let up = resize_nearest(&m, 12, 8);
        assert_eq!(resize_nearest(&up, 6, 4), m);
    }

    #[test]
    fn fit_sizes() {
        assert_eq!(fit_within(1024, 768, 512), (512, 384));
        assert_eq!(fit_within(300, 200, 512), (300, 200));
        assert_eq!(fit_within(1024, 768, 0), (1024, 768));
    }
}
