//! Linear filtering primitives shared by the saliency stages.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{param, Result};
use crate::raster::Plane;

/// Mirrors an out-of-range index back into `0..n`, repeating the edge
/// sample (`c b a | a b c | c b a`).
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Mean over the `(2r+1)²` window centred on each pixel, clipped to the
/// image. Uses a summed-area table so the cost is independent of `r`.
pub fn box_mean(p: &Plane, radius: usize) -> Plane {
    let (w, h) = p.dims();
    let stride = w + 1;
    let mut sat = vec![0.0f64; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += p.get(x, y);
            sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
        }
    }
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        let y0 = y.saturating_sub(radius);
        let y1 = (y + radius + 1).min(h);
        for x in 0..w {
            let x0 = x.saturating_sub(radius);
            let x1 = (x + radius + 1).min(w);
            let s = sat[y1 * stride + x1] - sat[y0 * stride + x1] - sat[y1 * stride + x0]
                + sat[y0 * stride + x0];
            out.set(x, y, s / ((y1 - y0) * (x1 - x0)) as f64);
        }
    }
    out
}

/// Normalized 1-D Gaussian taps truncated at `3σ`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| {
            let x = i as f64;
            (-(x * x) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Separable Gaussian blur with reflective borders.
pub fn gaussian_blur(p: &Plane, sigma: f64) -> Result<Plane> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(param(format!("gaussian sigma must be positive, got {sigma}")));
    }
    let taps = gaussian_kernel(sigma);
    let r = (taps.len() / 2) as isize;
    let (w, h) = p.dims();
    let mut tmp = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                let xi = reflect_index(x as isize + k as isize - r, w);
                acc += t * p.get(xi, y);
            }
            tmp.set(x, y, acc);
        }
    }
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                let yi = reflect_index(y as isize + k as isize - r, h);
                acc += t * tmp.get(x, yi);
            }
            out.set(x, y, acc);
        }
    }
    Ok(out)
}

/// Square, odd-sized 2-D convolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2d {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel2d {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) || weights.len() != size * size {
            return Err(param("kernel must be odd-sized and square"));
        }
        Ok(Self { size, weights })
    }

    /// Discrete delta: convolution with it is the identity.
    pub fn delta(size: usize) -> Result<Self> {
        let mut w = vec![0.0; size * size];
        if let Some(c) = w.get_mut(size * size / 2) {
            *c = 1.0;
        }
        Self::new(size, w)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weight(&self, kx: usize, ky: usize) -> f64 {
        self.weights[ky * self.size + kx]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Correlates `p` with `k` using reflective padding. The kernels used here
/// are symmetric, so this equals convolution.
pub fn convolve(p: &Plane, k: &Kernel2d) -> Plane {
    let (w, h) = p.dims();
    let r = (k.size() / 2) as isize;
    let taps: Vec<(isize, isize, f64)> = (0..k.size())
        .flat_map(|ky| (0..k.size()).map(move |kx| (kx, ky)))
        .filter_map(|(kx, ky)| {
            let wt = k.weight(kx, ky);
            (wt != 0.0).then_some((kx as isize - r, ky as isize - r, wt))
        })
        .collect();
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for &(dx, dy, wt) in &taps {
                let xi = reflect_index(x as isize + dx, w);
                let yi = reflect_index(y as isize + dy, h);
                acc += wt * p.get(xi, yi);
            }
            out.set(x, y, acc);
        }
    }
    out
}
