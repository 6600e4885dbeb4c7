//! Opponent-color (COC) and CIE Lab feature planes.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;
use crate::raster::{Plane, Raster, Semantics};

/// How the intensity channel of the opponent space is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntensityMode {
    /// `I = (R + G + B) / 3` over the broadly-tuned channels. Note that
    /// `R + G + B` sums to zero for every input, so this channel is flat.
    #[default]
    BroadlyTuned,
    /// `I = (r + g + b) / 3` over the raw channels.
    RawRgb,
}

impl IntensityMode {
    pub fn name(self) -> &'static str {
        match self {
            IntensityMode::BroadlyTuned => "broadly_tuned",
            IntensityMode::RawRgb => "raw_rgb",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "broadly_tuned" => Some(IntensityMode::BroadlyTuned),
            "raw_rgb" => Some(IntensityMode::RawRgb),
            _ => None,
        }
    }
}

/// Red-green, blue-yellow and intensity planes.
#[derive(Debug, Clone, PartialEq)]
pub struct OpponentPlanes {
    pub rg: Plane,
    pub by: Plane,
    pub i: Plane,
}

/// CIE L\*a\*b\* planes (`l` nominally in `[0, 100]`).
#[derive(Debug, Clone, PartialEq)]
pub struct LabPlanes {
    pub l: Plane,
    pub a: Plane,
    pub b: Plane,
}

impl OpponentPlanes {
    pub fn dims(&self) -> (usize, usize) {
        self.rg.dims()
    }
}

impl LabPlanes {
    pub fn dims(&self) -> (usize, usize) {
        self.l.dims()
    }
}

/// Opponent triple `(RG, BY, I)` for one pixel.
pub fn opponent_pixel(r: f64, g: f64, b: f64, mode: IntensityMode) -> (f64, f64, f64) {
    let big_r = r - (g + b) / 2.0;
    let big_g = g - (r + b) / 2.0;
    let big_b = b - (r + g) / 2.0;
    let big_y = r + g - 2.0 * (r - g).abs() + b;
    let i = match mode {
        IntensityMode::BroadlyTuned => (big_r + big_g + big_b) / 3.0,
        IntensityMode::RawRgb => (r + g + b) / 3.0,
    };
    (big_r - big_g, big_b - big_y, i)
}

pub fn to_opponent_planes(img: &Raster, mode: IntensityMode) -> Result<OpponentPlanes> {
    img.expect(Semantics::Rgb)?;
    let (w, h) = img.dims();
    let (r, g, b) = (img.plane(0).data(), img.plane(1).data(), img.plane(2).data());
    let mut rg = Plane::zeros(w, h);
    let mut by = Plane::zeros(w, h);
    let mut it = Plane::zeros(w, h);
    for k in 0..w * h {
        let (a, bb, c) = opponent_pixel(r[k], g[k], b[k], mode);
        rg.data_mut()[k] = a;
        by.data_mut()[k] = bb;
        it.data_mut()[k] = c;
    }
    Ok(OpponentPlanes { rg, by, i: it })
}

// D65 reference white.
const WHITE_X: f64 = 0.950_47;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.088_83;

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// sRGB (D65) to CIE Lab for one pixel with components in `[0,1]`.
pub fn lab_pixel(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let (r, g, b) = (srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b));
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
    let fx = lab_f(x / WHITE_X);
    let fy = lab_f(y / WHITE_Y);
    let fz = lab_f(z / WHITE_Z);
    (116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))
}

pub fn to_lab_planes(img: &Raster) -> Result<LabPlanes> {
    img.expect(Semantics::Rgb)?;
    let (w, h) = img.dims();
    let (r, g, b) = (img.plane(0).data(), img.plane(1).data(), img.plane(2).data());
    let mut l = Plane::zeros(w, h);
    let mut a = Plane::zeros(w, h);
    let mut bb = Plane::zeros(w, h);
    for k in 0..w * h {
        let (ll, aa, bv) = lab_pixel(r[k], g[k], b[k]);
        l.data_mut()[k] = ll;
        a.data_mut()[k] = aa;
        bb.data_mut()[k] = bv;
    }
    Ok(LabPlanes { l, a, b: bb })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;
    use alloc::vec;

    fn px(r: f64, g: f64, b: f64) -> Raster {
        Raster::rgb(
            Plane::filled(1, 1, r),
            Plane::filled(1, 1, g),
            Plane::filled(1, 1, b),
        )
        .unwrap()
    }

    #[test]
    fn opponent_pure_red() {
        let o = to_opponent_planes(&px(1.0, 0.0, 0.0), IntensityMode::BroadlyTuned).unwrap();
        assert_eq!(o.rg.get(0, 0), 1.5);
        assert_eq!(o.by.get(0, 0), 0.5);
        assert_eq!(o.i.get(0, 0), 0.0);
    }

    #[test]
    fn opponent_gray_and_black() {
        for c in [0.0, 0.3, 0.5, 1.0] {
            let (rg, by, i) = opponent_pixel(c, c, c, IntensityMode::BroadlyTuned);
            assert_eq!(rg, 0.0);
            assert_eq!(i, 0.0);
            assert!((by + 3.0 * c).abs() < 1e-12);
        }
    }

    #[test]
    fn opponent_raw_intensity() {
        let (_, _, i) = opponent_pixel(0.3, 0.6, 0.9, IntensityMode::RawRgb);
        assert!((i - 0.6).abs() < 1e-12);
    }

    #[test]
    fn lab_reference_points() {
        let (l, a, b) = lab_pixel(1.0, 1.0, 1.0);
        assert!((l - 100.0).abs() < 1e-3);
        assert!(a.abs() < 0.01 && b.abs() < 0.01);
        assert_eq!(lab_pixel(0.0, 0.0, 0.0), (0.0, 0.0, 0.0));
        let (l, a, b) = lab_pixel(1.0, 0.0, 0.0);
        assert!((l - 53.24).abs() < 0.1, "{l}");
        assert!((a - 80.09).abs() < 0.1, "{a}");
        assert!((b - 67.20).abs() < 0.1, "{b}");
    }

    #[test]
    fn non_rgb_is_semantic_error() {
        let g = Raster::gray(Plane::zeros(2, 2)).unwrap();
        assert!(matches!(
            to_opponent_planes(&g, IntensityMode::BroadlyTuned),
            Err(Error::Semantic { .. })
        ));
        assert!(matches!(to_lab_planes(&g), Err(Error::Semantic { .. })));
    }

    #[test]
    fn opponent_is_pointwise() {
        let vals = vec![0.1, 0.9, 0.4, 0.7];
        let rev: alloc::vec::Vec<f64> = vals.iter().rev().copied().collect();
        let mk = |v: &[f64]| {
            let p = Plane::from_vec(2, 2, v.to_vec()).unwrap();
            Raster::rgb(p.clone(), p.map(|x| 1.0 - x), p.map(|x| x * 0.5)).unwrap()
        };
        let a = to_opponent_planes(&mk(&vals), IntensityMode::BroadlyTuned).unwrap();
        let b = to_opponent_planes(&mk(&rev), IntensityMode::BroadlyTuned).unwrap();
        let n = a.rg.len();
        for k in 0..n {
            assert_eq!(a.rg.data()[k], b.rg.data()[n - 1 - k]);
            assert_eq!(a.by.data()[k], b.by.data()[n - 1 - k]);
        }
    }
}
