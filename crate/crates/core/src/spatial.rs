//! Spatial-domain color contrast: an L1 distance in the opponent space, a
//! normalized Euclidean distance in Lab, and their guided-filtered fusion.

use alloc::format;
use alloc::vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::color::{LabPlanes, OpponentPlanes};
use crate::error::{param, Result};
use crate::preprocess::{fast_guided_filter, GuidedFilterParams};
use crate::raster::{ensure_same_dims, minmax_normalize, Plane, Raster, SaliencyMap, Semantics};

/// Denominator of the per-channel Lab distance term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabDenominator {
    /// `(v - μ)² / σ`
    #[default]
    StdDev,
    /// `(v - μ)² / σ²`, the standardized Euclidean distance.
    Variance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialParams {
    pub theta_degrees: f64,
    pub smoothing: GuidedFilterParams,
}

impl SpatialParams {
    pub fn validate(&self) -> Result<()> {
        exponent(self.theta_degrees)?;
        self.smoothing.validate()
    }
}

/// `tan θ` for θ in `[0°, 120°]`, rejecting 90°.
pub fn exponent(theta_degrees: f64) -> Result<f64> {
    if !(0.0..=120.0).contains(&theta_degrees) {
        return Err(param(format!(
            "theta must lie in [0, 120] degrees, got {theta_degrees}"
        )));
    }
    if (theta_degrees - 90.0).abs() < 1e-9 {
        return Err(param("theta = 90 degrees makes tan(theta) undefined"));
    }
    Ok(theta_degrees.to_radians().tan())
}

/// `sqrt(|RG - RGμ| + |BY - BYμ| + |I - Iμ|)` with image-wide means.
pub fn coc_contrast_map(planes: &OpponentPlanes) -> Result<SaliencyMap> {
    ensure_same_dims(planes.rg.dims(), planes.by.dims())?;
    ensure_same_dims(planes.rg.dims(), planes.i.dims())?;
    let (mr, mb, mi) = (planes.rg.mean(), planes.by.mean(), planes.i.mean());
    let (w, h) = planes.dims();
    let mut out = Plane::zeros(w, h);
    for (k, o) in out.data_mut().iter_mut().enumerate() {
        let d = (planes.rg.data()[k] - mr).abs()
            + (planes.by.data()[k] - mb).abs()
            + (planes.i.data()[k] - mi).abs();
        *o = d.sqrt();
    }
    SaliencyMap::new(out)
}

/// `sqrt(Σ_c (v_c - μ_c)² / σ_c)` over L, a, b. A channel with zero spread
/// contributes nothing.
pub fn lab_contrast_map(planes: &LabPlanes, denominator: LabDenominator) -> Result<SaliencyMap> {
    ensure_same_dims(planes.l.dims(), planes.a.dims())?;
    ensure_same_dims(planes.l.dims(), planes.b.dims())?;
    let (w, h) = planes.dims();
    let mut acc = Plane::zeros(w, h);
    for ch in [&planes.l, &planes.a, &planes.b] {
        let mu = ch.mean();
        let sigma = ch.std_dev();
        if sigma.is_nan() || sigma <= 0.0 {
            continue;
        }
        let denom = match denominator {
            LabDenominator::StdDev => sigma,
            LabDenominator::Variance => sigma * sigma,
        };
        for (a, v) in acc.data_mut().iter_mut().zip(ch.data()) {
            *a += (v - mu) * (v - mu) / denom;
        }
    }
    SaliencyMap::new(acc.map(|v| v.sqrt()))
}

// Base floor for negative exponents, where 0^e would be infinite.
const NEGATIVE_EXPONENT_FLOOR: f64 = 1e-6;

/// Pointwise `coc · lab^e` without normalization. `0^0` is taken as 1 and
/// bases are floored at a small positive value when `e < 0`.
pub fn power_product(coc: &Plane, lab: &Plane, e: f64) -> Result<Plane> {
    coc.zip_map(lab, |cv, lv| {
        let lv = if e < 0.0 {
            lv.max(NEGATIVE_EXPONENT_FLOOR)
        } else {
            lv
        };
        let pw = if e == 0.0 { 1.0 } else { lv.powf(e) };
        cv * pw
    })
}

/// `coc · lab^{tan θ}` on min-max normalized inputs, before smoothing.
pub fn contrast_product(coc: &SaliencyMap, lab: &SaliencyMap, theta_degrees: f64) -> Result<Plane> {
    ensure_same_dims(coc.dims(), lab.dims())?;
    let e = exponent(theta_degrees)?;
    power_product(
        minmax_normalize(coc).values(),
        minmax_normalize(lab).values(),
        e,
    )
}

/// The spatial map: contrast product, guided filtering with `guide`, then
/// min-max normalization.
pub fn spatial_map(
    coc: &SaliencyMap,
    lab: &SaliencyMap,
    params: &SpatialParams,
    guide: &Raster,
) -> Result<SaliencyMap> {
    params.validate()?;
    let product = contrast_product(coc, lab, params.theta_degrees)?;
    ensure_same_dims(product.dims(), guide.dims())?;
    let input = Raster::new(vec![product], Semantics::Map)?;
    let filtered = fast_guided_filter(guide, &input, &params.smoothing)?;
    let plane = filtered.into_planes().swap_remove(0);
    Ok(minmax_normalize(&SaliencyMap::new(plane)?))
}
