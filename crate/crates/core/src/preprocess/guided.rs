//! Guided image filter and its subsampled fast variant.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{param, Result};
use crate::filter::box_mean;
use crate::raster::{Plane, Raster, Semantics};
use crate::resize::resize_bilinear;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidedFilterParams {
    /// Window half-size in pixels.
    pub radius: usize,
    /// Regularization in squared intensity units.
    pub epsilon: f64,
    /// Downscale factor of the fast filter; 1 is the exact filter.
    pub subsample: usize,
}

impl GuidedFilterParams {
    pub fn new(radius: usize, epsilon: f64, subsample: usize) -> Result<Self> {
        let p = Self {
            radius,
            epsilon,
            subsample,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius < 1 {
            return Err(param("guided filter radius must be >= 1"));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(param(format!(
                "guided filter epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.subsample < 1 {
            return Err(param("guided filter subsample must be >= 1"));
        }
        Ok(())
    }

    /// `radius = max(4, round(0.02 * longest side))`, `epsilon = 1e-3`, `subsample = 4`.
    pub fn for_image(width: usize, height: usize) -> Self {
        Self {
            radius: default_radius(width, height),
            epsilon: 1e-3,
            subsample: 4,
        }
    }
}

pub fn default_radius(width: usize, height: usize) -> usize {
    ((0.02 * width.max(height) as f64).round() as usize).max(4)
}

/// Per-pixel linear model `q = Σ a_c·I_c + b`, already window-averaged.
struct Coefficients {
    a: Vec<Plane>,
    b: Plane,
}

fn coefficients(guide: &[Plane], input: &Plane, radius: usize, eps: f64) -> Coefficients {
    let (w, h) = input.dims();
    let mean_p = box_mean(input, radius);
    match guide {
        [g] => {
            let mean_i = box_mean(g, radius);
            let mean_ip = box_mean(&g.zip_map(input, |a, b| a * b).unwrap(), radius);
            let mean_ii = box_mean(&g.map(|a| a * a), radius);
            let mut a = Plane::zeros(w, h);
            let mut b = Plane::zeros(w, h);
            for k in 0..w * h {
                let mi = mean_i.data()[k];
                let mp = mean_p.data()[k];
                let cov = mean_ip.data()[k] - mi * mp;
                let var = mean_ii.data()[k] - mi * mi;
                let ak = cov / (var + eps);
                a.data_mut()[k] = ak;
                b.data_mut()[k] = mp - ak * mi;
            }
            Coefficients {
                a: alloc::vec![box_mean(&a, radius)],
                b: box_mean(&b, radius),
            }
        }
        [g0, g1, g2] => {
            let g = [g0, g1, g2];
            let mean_i: Vec<Plane> = g.iter().map(|c| box_mean(c, radius)).collect();
            let mean_ip: Vec<Plane> = g
                .iter()
                .map(|c| box_mean(&c.zip_map(input, |a, b| a * b).unwrap(), radius))
                .collect();
            // Upper triangle of the guide covariance: rr, rg, rb, gg, gb, bb.
            let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
            let mean_ii: Vec<Plane> = pairs
                .iter()
                .map(|&(i, j)| box_mean(&g[i].zip_map(g[j], |a, b| a * b).unwrap(), radius))
                .collect();
            let mut a: Vec<Plane> = (0..3).map(|_| Plane::zeros(w, h)).collect();
            let mut b = Plane::zeros(w, h);
            for k in 0..w * h {
                let mu = [
                    mean_i[0].data()[k],
                    mean_i[1].data()[k],
                    mean_i[2].data()[k],
                ];
                let mp = mean_p.data()[k];
                let cov_ip = [
                    mean_ip[0].data()[k] - mu[0] * mp,
                    mean_ip[1].data()[k] - mu[1] * mp,
                    mean_ip[2].data()[k] - mu[2] * mp,
                ];
                let s = |n: usize, i: usize, j: usize| mean_ii[n].data()[k] - mu[i] * mu[j];
                let sigma = [
                    [s(0, 0, 0) + eps, s(1, 0, 1), s(2, 0, 2)],
                    [s(1, 0, 1), s(3, 1, 1) + eps, s(4, 1, 2)],
                    [s(2, 0, 2), s(4, 1, 2), s(5, 2, 2) + eps],
                ];
                let ak = solve3(&sigma, &cov_ip);
                for c in 0..3 {
                    a[c].data_mut()[k] = ak[c];
                }
                b.data_mut()[k] = mp - ak[0] * mu[0] - ak[1] * mu[1] - ak[2] * mu[2];
            }
            Coefficients {
                a: a.iter().map(|p| box_mean(p, radius)).collect(),
                b: box_mean(&b, radius),
            }
        }
        _ => unreachable!("guide plane count checked by caller"),
    }
}

// Symmetric positive definite 3×3 solve by cofactor inverse.
fn solve3(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    let c10 = m[0][2] * m[2][1] - m[0][1] * m[2][2];
    let c11 = m[0][0] * m[2][2] - m[0][2] * m[2][0];
    let c12 = m[0][1] * m[2][0] - m[0][0] * m[2][1];
    let c20 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
    let c21 = m[0][2] * m[1][0] - m[0][0] * m[1][2];
    let c22 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        (c00 * v[0] + c10 * v[1] + c20 * v[2]) / det,
        (c01 * v[0] + c11 * v[1] + c21 * v[2]) / det,
        (c02 * v[0] + c12 * v[1] + c22 * v[2]) / det,
    ]
}

fn check_inputs(guide: &Raster, input: &Raster, params: &GuidedFilterParams) -> Result<()> {
    params.validate()?;
    if guide.dims() != input.dims() {
        return Err(param(format!(
            "guide is {}x{} but input is {}x{}",
            guide.width(),
            guide.height(),
            input.width(),
            input.height()
        )));
    }
    if !matches!(guide.planes().len(), 1 | 3) {
        return Err(param("guide must have 1 or 3 planes"));
    }
    Ok(())
}

fn finish(planes: Vec<Plane>, semantics: Semantics) -> Result<Raster> {
    let planes = if semantics == Semantics::Rgb {
        planes
            .into_iter()
            .map(|p| p.map(|v| v.clamp(0.0, 1.0)))
            .collect()
    } else {
        planes
    };
    Raster::new(planes, semantics)
}

/// Fast guided filter. Coefficients are estimated on a copy downscaled by
/// `params.subsample` and upsampled bilinearly before being applied to the
/// full-resolution guide; `subsample == 1` gives the exact filter.
///
/// The result keeps the input's semantics. Rgb outputs are clamped to
/// `[0,1]` since the linear model can overshoot slightly.
pub fn fast_guided_filter(
    guide: &Raster,
    input: &Raster,
    params: &GuidedFilterParams,
) -> Result<Raster> {
    check_inputs(guide, input, params)?;
    let (w, h) = guide.dims();
    let s = params.subsample;
    if s == 1 {
        return guided_filter(guide, input, params.radius, params.epsilon);
    }
    let lw = (w / s).max(1);
    let lh = (h / s).max(1);
    let radius = ((params.radius as f64 / s as f64).round() as usize).max(1);
    let small_guide: Vec<Plane> = guide
        .planes()
        .iter()
        .map(|p| resize_bilinear(p, lw, lh))
        .collect();
    let mut out = Vec::with_capacity(input.planes().len());
    for p in input.planes() {
        let small = resize_bilinear(p, lw, lh);
        let coef = coefficients(&small_guide, &small, radius, params.epsilon);
        let mut q = resize_bilinear(&coef.b, w, h);
        for (a, g) in coef.a.iter().zip(guide.planes()) {
            let a_full = resize_bilinear(a, w, h);
            for ((qv, av), gv) in q.data_mut().iter_mut().zip(a_full.data()).zip(g.data()) {
                *qv += av * gv;
            }
        }
        out.push(q);
    }
    finish(out, input.semantics())
}

/// Exact guided filter at full resolution.
pub fn guided_filter(guide: &Raster, input: &Raster, radius: usize, epsilon: f64) -> Result<Raster> {
    check_inputs(guide, input, &GuidedFilterParams::new(radius, epsilon, 1)?)?;
    let mut out = Vec::with_capacity(input.planes().len());
    for p in input.planes() {
        let coef = coefficients(guide.planes(), p, radius, epsilon);
        let mut q = coef.b.clone();
        for (a, g) in coef.a.iter().zip(guide.planes()) {
            for ((qv, av), gv) in q.data_mut().iter_mut().zip(a.data()).zip(g.data()) {
                *qv += av * gv;
            }
        }
        out.push(q);
    }
    finish(out, input.semantics())
}
