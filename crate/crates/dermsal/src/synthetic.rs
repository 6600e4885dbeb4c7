//! Seeded synthetic dermoscopy-like images with exact ground truth: a dark
//! elliptical lesion on noisy skin, sometimes crossed by dark hair strokes.

use dermsal_core::{BinaryMask, Plane, Raster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticParams {
    pub width: usize,
    pub height: usize,
    /// Range of the semi-major axis in pixels.
    pub radius: (f64, f64),
    /// Range of minor / major axis ratio.
    pub axis_ratio: (f64, f64),
    /// Mean skin color; its channel mean is 0.7.
    pub skin: [f64; 3],
    pub lesion: [f64; 3],
    /// Standard deviation of the per-pixel Gaussian noise.
    pub noise: f64,
    pub hair_probability: f64,
    /// Inclusive range of the stroke count on hairy images.
    pub hair_strokes: (usize, usize),
    pub hair: [f64; 3],
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            radius: (30.0, 80.0),
            axis_ratio: (0.4, 1.0),
            skin: [0.78, 0.68, 0.64],
            lesion: [0.35, 0.22, 0.16],
            noise: 0.05,
            hair_probability: 0.3,
            hair_strokes: (2, 5),
            hair: [0.12, 0.09, 0.08],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCase {
    pub image: Raster,
    pub truth: BinaryMask,
    pub hair_strokes: usize,
}

fn segment_distance(px: f64, py: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (px - a.0 - t * dx).hypot(py - a.1 - t * dy)
}

/// Case `index` of the corpus identified by `seed`.
pub fn generate(params: &SyntheticParams, seed: u64, index: u64) -> SyntheticCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let (w, h) = (params.width, params.height);
    let a = rng.random_range(params.radius.0..=params.radius.1);
    let b = a * rng.random_range(params.axis_ratio.0..=params.axis_ratio.1);
    let angle = rng.random_range(0.0..std::f64::consts::PI);
    let margin = a + 8.0;
    let cx = if w as f64 > 2.0 * margin { rng.random_range(margin..w as f64 - margin) } else { w as f64 / 2.0 };
    let cy = if h as f64 > 2.0 * margin { rng.random_range(margin..h as f64 - margin) } else { h as f64 / 2.0 };
    let (sin, cos) = angle.sin_cos();
    let truth = BinaryMask::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
        let u = (dx * cos + dy * sin) / a;
        let v = (-dx * sin + dy * cos) / b;
        u * u + v * v <= 1.0
    });

    let strokes = if rng.random_bool(params.hair_probability) {
        rng.random_range(params.hair_strokes.0..=params.hair_strokes.1)
    } else {
        0
    };
    let hairs: Vec<_> = (0..strokes)
        .map(|_| {
            let p0 = (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64));
            let dir = rng.random_range(0.0..std::f64::consts::TAU);
            let len = rng.random_range(0.4..0.9) * w.max(h) as f64;
            let p1 = (p0.0 + len * dir.cos(), p0.1 + len * dir.sin());
            let half_width: f64 = rng.random_range(0.7..1.5);
            (p0, p1, half_width)
        })
        .collect();

    let noise = Normal::new(0.0, params.noise).expect("noise sigma is finite");
    let planes: Vec<Plane> = (0..3)
        .map(|c| {
            Plane::from_fn(w, h, |x, y| {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                let base = if hairs.iter().any(|&(p0, p1, hw)| segment_distance(px, py, p0, p1) <= hw) {
                    params.hair[c]
                } else if truth.get(x, y) {
                    params.lesion[c]
                } else {
                    params.skin[c]
                };
                (base + noise.sample(&mut rng)).clamp(0.0, 1.0)
            })
        })
        .collect();
    let image = Raster::rgb(planes[0].clone(), planes[1].clone(), planes[2].clone()).expect("values lie in [0, 1]");
    SyntheticCase {
        image,
        truth,
        hair_strokes: strokes,
    }
}

pub fn corpus(params: &SyntheticParams, seed: u64, count: usize) -> Vec<SyntheticCase> {
    (0..count as u64).map(|i| generate(params, seed, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_distinct() {
        let p = SyntheticParams::default();
        let a = generate(&p, 3, 0);
        let b = generate(&p, 3, 0);
        let c = generate(&p, 3, 1);
        assert_eq!(a.image, b.image);
        assert_eq!(a.truth, b.truth);
        assert_ne!(a.truth, c.truth);
    }

    #[test]
    fn lesion_within_frame_and_sized() {
        let p = SyntheticParams::default();
        for case in corpus(&p, 9, 20) {
            let area = case.truth.count() as f64;
            let pi = std::f64::consts::PI;
            assert!(area >= pi * 30.0 * 12.0 * 0.9 && area <= pi * 80.0 * 80.0 * 1.05, "area {area}");
            for x in 0..p.width {
                assert!(!case.truth.get(x, 0) && !case.truth.get(x, p.height - 1));
            }
        }
    }

    #[test]
    fn background_intensity() {
        let p = SyntheticParams {
            hair_probability: 0.0,
            ..Default::default()
        };
        let case = generate(&p, 1, 0);
        let luma = case.image.luma();
        let bg: Vec<f64> = luma
            .data()
            .iter()
            .zip(case.truth.data())
            .filter(|(_, &t)| !t)
            .map(|(&v, _)| v)
            .collect();
        let mean = bg.iter().sum::<f64>() / bg.len() as f64;
        assert!((mean - 0.7).abs() < 0.005, "{mean}");
    }

    #[test]
    fn hair_fraction_near_target() {
        let p = SyntheticParams::default();
        let hairy = (0..200).filter(|&i| generate(&p, 5, i).hair_strokes > 0).count();
        assert!((40..=80).contains(&hairy), "{hairy}");
    }
}
