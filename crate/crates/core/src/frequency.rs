//! Frequency-domain saliency from aggregated color channels.
//!
//! Each aggregate is transformed, its log-amplitude spectrum is smoothed with
//! a radial log-Gabor kernel, and the image is rebuilt from the smoothed
//! amplitude and the untouched phase. The square-rooted magnitude of the
//! reconstruction is the per-space frequency map.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::color::{LabPlanes, OpponentPlanes};
use crate::error::{param, Result};
use crate::fft::{fft2d, forward_real};
use crate::filter::{convolve, gaussian_blur, Kernel2d};
use crate::raster::{ensure_same_dims, normalize_plane, Plane, Raster, SaliencyMap, Semantics};

/// Floor applied to spectral magnitudes before taking the logarithm.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    pub loggabor_kernel_size: usize,
    pub loggabor_f0: f64,
    pub loggabor_sigma_ratio: f64,
    pub gaussian_sigma: f64,
    pub agg_weights_opp: [f64; 3],
    pub agg_weights_lab: [f64; 2],
}

impl SpectralParams {
    pub fn for_image(width: usize, height: usize) -> Self {
        Self {
            loggabor_kernel_size: 9,
            loggabor_f0: 2.0,
            loggabor_sigma_ratio: 0.55,
            gaussian_sigma: default_gaussian_sigma(width, height),
            agg_weights_opp: [1.0 / 3.0; 3],
            agg_weights_lab: [0.5, 0.5],
        }
    }

    pub fn validate(&self) -> Result<()> {
        log_gabor_kernel(
            self.loggabor_kernel_size,
            self.loggabor_f0,
            self.loggabor_sigma_ratio,
        )?;
        if !self.gaussian_sigma.is_finite() || self.gaussian_sigma <= 0.0 {
            return Err(param("gaussian sigma must be positive"));
        }
        check_weights(&self.agg_weights_opp)?;
        check_weights(&self.agg_weights_lab)
    }
}

/// `0.025 * longest side`.
pub fn default_gaussian_sigma(width: usize, height: usize) -> f64 {
    0.025 * width.max(height) as f64
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(param(format!("aggregation weights must lie in [0,1], got {w:?}")));
    }
    Ok(())
}

/// Natural-log amplitude and phase of a 2-D spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub amplitude_log: Plane,
    pub phase: Plane,
}

impl Spectrum {
    pub fn of(p: &Plane) -> Self {
        let (w, h) = p.dims();
        let f = forward_real(p);
        let amplitude_log =
            Plane::from_vec(w, h, f.iter().map(|c| c.norm().max(AMPLITUDE_FLOOR).ln()).collect())
                .unwrap();
        let phase = Plane::from_vec(w, h, f.iter().map(|c| c.arg()).collect()).unwrap();
        Self {
            amplitude_log,
            phase,
        }
    }
}

/// Isotropic kernel sampled from `exp(-(ln(r/f0))² / (2 ln²σ_ratio))` at the
/// pixel distance `r` from the kernel centre, normalized to unit sum. The
/// centre sample (`r = 0`) is zero.
pub fn log_gabor_kernel(size: usize, f0: f64, sigma_ratio: f64) -> Result<Kernel2d> {
    if size < 3 || size.is_multiple_of(2) {
        return Err(param(format!("log-Gabor kernel size must be odd and >= 3, got {size}")));
    }
    if !f0.is_finite() || f0 <= 0.0 {
        return Err(param("log-Gabor f0 must be positive"));
    }
    if !(sigma_ratio > 0.0 && sigma_ratio < 1.0) {
        return Err(param("log-Gabor sigma ratio must lie in (0,1)"));
    }
    let c = (size / 2) as f64;
    let denom = 2.0 * sigma_ratio.ln() * sigma_ratio.ln();
    let mut weights = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let r = ((x as f64 - c).powi(2) + (y as f64 - c).powi(2)).sqrt();
            let v = if r == 0.0 {
                0.0
            } else {
                let l = (r / f0).ln();
                (-(l * l) / denom).exp()
            };
            weights.push(v);
        }
    }
    let sum: f64 = weights.iter().sum();
    for v in &mut weights {
        *v /= sum;
    }
    Kernel2d::new(size, weights)
}

fn gray(p: Plane) -> Result<Raster> {
    Raster::new(vec![p], Semantics::Gray)
}

/// `w1·RG + w2·BY + w3·I`.
pub fn aggregate_opp(planes: &OpponentPlanes, weights: [f64; 3]) -> Result<Raster> {
    check_weights(&weights)?;
    let [w1, w2, w3] = weights;
    let (w, h) = planes.dims();
    let p = Plane::from_fn(w, h, |x, y| {
        w1 * planes.rg.get(x, y) + w2 * planes.by.get(x, y) + w3 * planes.i.get(x, y)
    });
    gray(p)
}

/// `w1·a + w2·b`; lightness is not used.
pub fn aggregate_lab(planes: &LabPlanes, weights: [f64; 2]) -> Result<Raster> {
    check_weights(&weights)?;
    let [w1, w2] = weights;
    gray(planes.a.zip_map(&planes.b, |a, b| w1 * a + w2 * b)?)
}

fn single_plane(agg: &Raster) -> Result<&Plane> {
    if agg.planes().len() != 1 {
        return Err(param("aggregate must be a single-plane raster"));
    }
    let (w, h) = agg.dims();
    if w < 8 || h < 8 {
        return Err(param(format!("spectral map needs at least 8x8, got {w}x{h}")));
    }
    Ok(agg.plane(0))
}

fn is_flat(p: &Plane) -> bool {
    let (lo, hi) = p.min_max();
    hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1.0)
}

/// Complex spectrum rebuilt from the kernel-filtered log amplitude and the
/// original phase.
pub fn filtered_spectrum(p: &Plane, kernel: &Kernel2d) -> Vec<Complex64> {
    let s = Spectrum::of(p);
    let smoothed = convolve(&s.amplitude_log, kernel);
    smoothed
        .data()
        .iter()
        .zip(s.phase.data())
        .map(|(&a, &ph)| Complex64::from_polar(a.exp(), ph))
        .collect()
}

/// Frequency map of one aggregate with an explicit amplitude kernel.
pub fn spectral_map_with_kernel(agg: &Raster, kernel: &Kernel2d) -> Result<SaliencyMap> {
    let p = single_plane(agg)?;
    let (w, h) = p.dims();
    if is_flat(p) {
        return Ok(normalize_plane(&Plane::zeros(w, h)));
    }
    let mut spectrum = filtered_spectrum(p, kernel);
    fft2d(&mut spectrum, w, h, true);
    let mag = Plane::from_vec(w, h, spectrum.iter().map(|c| c.norm().sqrt()).collect())?;
    Ok(normalize_plane(&mag))
}

/// Frequency map of one aggregate with the log-Gabor kernel from `params`.
pub fn spectral_map(agg: &Raster, params: &SpectralParams) -> Result<SaliencyMap> {
    let k = log_gabor_kernel(
        params.loggabor_kernel_size,
        params.loggabor_f0,
        params.loggabor_sigma_ratio,
    )?;
    spectral_map_with_kernel(agg, &k)
}

/// Average of the two frequency maps, Gaussian-blurred and normalized.
pub fn frequency_map(
    map_coc: &SaliencyMap,
    map_lab: &SaliencyMap,
    gaussian_sigma: f64,
) -> Result<SaliencyMap> {
    ensure_same_dims(map_coc.dims(), map_lab.dims())?;
    let avg = map_coc
        .values()
        .zip_map(map_lab.values(), |a, b| (a + b) / 2.0)?;
    let blurred = gaussian_blur(&avg, gaussian_sigma)?;
    Ok(normalize_plane(&blurred))
}
