//! Two-phase map fusion and Otsu binarization.
//!
//! Phase one mixes the spatial and frequency maps with reciprocal-entropy
//! weights; phase two multiplies the result with the coarse map using the
//! entropies themselves as weights.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{param, Error, Result};
use crate::raster::{ensure_same_dims, normalize_plane, BinaryMask, SaliencyMap};

/// Lower bound on entropies used as weights or weight denominators.
pub const ENTROPY_FLOOR: f64 = 1e-6;

pub const DEFAULT_BINS: usize = 256;

#[inline]
fn bin_of(v: f64, bins: usize) -> usize {
    let b = (v.clamp(0.0, 1.0) * bins as f64).floor();
    (b as usize).min(bins - 1)
}

/// Histogram of `[0,1]` values; bin `i` covers `[i/bins, (i+1)/bins)` and the
/// last bin also holds 1.0.
pub fn histogram(map: &SaliencyMap, bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; bins];
    for &v in map.values().data() {
        h[bin_of(v, bins)] += 1;
    }
    h
}

fn check_bins(bins: usize) -> Result<()> {
    if bins < 2 {
        return Err(param(format!("histogram needs at least 2 bins, got {bins}")));
    }
    Ok(())
}

/// Shannon entropy in bits of the map's `bins`-bin histogram.
pub fn entropy(map: &SaliencyMap, bins: usize) -> Result<f64> {
    check_bins(bins)?;
    let h = histogram(map, bins);
    let total: u64 = h.iter().sum();
    if total == 0 {
        return Ok(0.0);
    }
    let n = total as f64;
    let e = h
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(e.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionWeights {
    /// Reciprocal entropy of the spatial map.
    pub w_c: f64,
    /// Reciprocal entropy of the frequency map.
    pub w_q: f64,
    /// Entropy of the initial map.
    pub w_m: f64,
    /// Entropy of the coarse map.
    pub w_n: f64,
}

/// `(1/E(col), 1/E(feq))` with entropies floored at [`ENTROPY_FLOOR`].
pub fn reciprocal_entropy_weights(col: &SaliencyMap, feq: &SaliencyMap, bins: usize) -> Result<(f64, f64)> {
    Ok((
        1.0 / entropy(col, bins)?.max(ENTROPY_FLOOR),
        1.0 / entropy(feq, bins)?.max(ENTROPY_FLOOR),
    ))
}

/// Entropies of the initial and coarse maps, floored at [`ENTROPY_FLOOR`].
pub fn entropy_weights(initial: &SaliencyMap, coarse: &SaliencyMap, bins: usize) -> Result<(f64, f64)> {
    Ok((
        entropy(initial, bins)?.max(ENTROPY_FLOOR),
        entropy(coarse, bins)?.max(ENTROPY_FLOOR),
    ))
}

/// How the spatial and frequency maps are combined in the first phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combine {
    #[default]
    Sum,
    /// Pixelwise product, for images containing color calibration charts.
    Product,
}

/// Phase one: `w_c·col + w_q·feq` (or their product), min-max normalized.
pub fn initial_map(
    col: &SaliencyMap,
    feq: &SaliencyMap,
    combine: Combine,
    bins: usize,
) -> Result<SaliencyMap> {
    ensure_same_dims(col.dims(), feq.dims())?;
    let (wc, wq) = reciprocal_entropy_weights(col, feq, bins)?;
    let mixed = match combine {
        Combine::Sum => col.values().zip_map(feq.values(), |c, q| wc * c + wq * q)?,
        Combine::Product => col
            .values()
            .zip_map(feq.values(), |c, q| (wc * c) * (wq * q))?,
    };
    Ok(normalize_plane(&mixed))
}

/// Phase two: `(w_m·initial) ⊗ (w_n·coarse)`, min-max normalized.
pub fn final_map(initial: &SaliencyMap, coarse: &SaliencyMap, bins: usize) -> Result<SaliencyMap> {
    ensure_same_dims(initial.dims(), coarse.dims())?;
    let (wm, wn) = entropy_weights(initial, coarse, bins)?;
    let prod = initial
        .values()
        .zip_map(coarse.values(), |i, c| (wm * i) * (wn * c))?;
    Ok(normalize_plane(&prod))
}

/// Otsu cut on a `bins`-bin histogram. Pixels in bins above `cut_bin` are
/// foreground; `level` is the bin boundary `(cut_bin + 1) / bins`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub cut_bin: usize,
    pub bins: usize,
    pub level: f64,
}

impl Threshold {
    pub fn binarize(&self, map: &SaliencyMap) -> BinaryMask {
        let (w, h) = map.dims();
        let data = map
            .values()
            .data()
            .iter()
            .map(|&v| bin_of(v, self.bins) > self.cut_bin)
            .collect();
        BinaryMask::from_vec(w, h, data).unwrap()
    }
}

/// Cut index maximizing the between-class variance `ω0·ω1·(μ0 - μ1)²` of a
/// histogram; class 0 holds bins `0..=t`. Ties keep the lowest cut. `None`
/// when fewer than two bins are occupied.
pub fn otsu_cut(hist: &[u64]) -> Option<usize> {
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let total: f64 = hist.iter().map(|&c| c as f64).sum();
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    let mut best: Option<(usize, f64)> = None;
    for (t, &c) in hist.iter().enumerate().take(hist.len() - 1) {
        w0 += c as f64;
        sum0 += t as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let var = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
        if best.is_none_or(|(_, b)| var > b) {
            best = Some((t, var));
        }
    }
    best.map(|(t, _)| t)
}

/// Otsu threshold of a normalized map.
pub fn otsu_threshold(map: &SaliencyMap, bins: usize) -> Result<Threshold> {
    check_bins(bins)?;
    let hist = histogram(map, bins);
    let cut = otsu_cut(&hist)
        .ok_or_else(|| Error::Degenerate("map occupies a single histogram bin".into()))?;
    Ok(Threshold {
        cut_bin: cut,
        bins,
        level: (cut + 1) as f64 / bins as f64,
    })
}
