//! End-to-end segmentation with every tunable gathered in one config.
//!
//! Values written as `Option` are resolved from the processing resolution
//! when `None`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::coarse::{
    self, cluster_background, default_patch_size, distance_maps, extract_border_patches,
    DistanceMetric, WeightMode,
};
use crate::color::{to_lab_planes, to_opponent_planes, IntensityMode};
use crate::error::{param, Error, Result};
use crate::frequency::{self, aggregate_lab, aggregate_opp, frequency_map, spectral_map, SpectralParams};
use crate::fusion::{final_map, initial_map, otsu_threshold, Combine, Threshold};
use crate::morphology::{default_se_radius, postprocess_mask};
use crate::preprocess::{self, default_se_length, detect_hair_mask, inpaint_hair, GuidedFilterParams, HairMask};
use crate::raster::{minmax_normalize, BinaryMask, Raster, SaliencyMap, Semantics};
use crate::resize::{fit_within, resize_bilinear, resize_nearest};
use crate::spatial::{coc_contrast_map, lab_contrast_map, spatial_map, LabDenominator, SpatialParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IoConfig {
    /// Longest processing side; 0 keeps the native size.
    pub resize_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ColorConfig {
    pub intensity_mode: IntensityMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HairConfig {
    pub enabled: bool,
    pub se_length: Option<usize>,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidedConfig {
    pub radius: Option<usize>,
    pub epsilon: f64,
    pub subsample: usize,
}

impl GuidedConfig {
    pub fn resolve(&self, width: usize, height: usize) -> GuidedFilterParams {
        GuidedFilterParams {
            radius: self
                .radius
                .unwrap_or_else(|| preprocess::default_radius(width, height)),
            epsilon: self.epsilon,
            subsample: self.subsample,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialConfig {
    pub theta_degrees: f64,
    pub guided: GuidedConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LabConfig {
    /// Divide by σ² instead of σ in the Lab contrast term.
    pub variance_denominator: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoarseConfig {
    pub patch_size: Option<usize>,
    pub seed: u64,
    pub whitened: bool,
    pub weight_mode: WeightMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqConfig {
    pub kernel_size: usize,
    pub f0: f64,
    pub sigma_ratio: f64,
    pub gaussian_sigma: Option<f64>,
    pub w_opp: [f64; 3],
    pub w_lab: [f64; 2],
}

impl FreqConfig {
    pub fn resolve(&self, width: usize, height: usize) -> SpectralParams {
        SpectralParams {
            loggabor_kernel_size: self.kernel_size,
            loggabor_f0: self.f0,
            loggabor_sigma_ratio: self.sigma_ratio,
            gaussian_sigma: self
                .gaussian_sigma
                .unwrap_or_else(|| frequency::default_gaussian_sigma(width, height)),
            agg_weights_opp: self.w_opp,
            agg_weights_lab: self.w_lab,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    /// Multiply instead of add in the first fusion phase.
    pub chart_mode: bool,
    pub entropy_bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostConfig {
    pub se_radius: Option<usize>,
    pub keep_largest: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub io: IoConfig,
    pub color: ColorConfig,
    pub hair: HairConfig,
    pub guided: GuidedConfig,
    pub spatial: SpatialConfig,
    pub lab: LabConfig,
    pub coarse: CoarseConfig,
    pub freq: FreqConfig,
    pub fusion: FusionConfig,
    pub post: PostConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let guided = GuidedConfig {
            radius: None,
            epsilon: 1e-3,
            subsample: 4,
        };
        let spectral = SpectralParams::for_image(512, 512);
        Self {
            io: IoConfig { resize_max: 512 },
            color: ColorConfig::default(),
            hair: HairConfig {
                enabled: true,
                se_length: None,
                threshold: preprocess::DEFAULT_THRESHOLD,
            },
            guided,
            spatial: SpatialConfig {
                theta_degrees: 45.0,
                guided,
            },
            lab: LabConfig::default(),
            coarse: CoarseConfig::default(),
            freq: FreqConfig {
                kernel_size: spectral.loggabor_kernel_size,
                f0: spectral.loggabor_f0,
                sigma_ratio: spectral.loggabor_sigma_ratio,
                gaussian_sigma: None,
                w_opp: spectral.agg_weights_opp,
                w_lab: spectral.agg_weights_lab,
            },
            fusion: FusionConfig {
                chart_mode: false,
                entropy_bins: crate::fusion::DEFAULT_BINS,
            },
            post: PostConfig {
                se_radius: None,
                keep_largest: true,
            },
        }
    }
}

impl PipelineConfig {
    /// Checks every value that does not depend on the image size.
    pub fn validate(&self) -> Result<()> {
        if !(self.hair.threshold.is_finite() && self.hair.threshold >= 0.0) {
            return Err(param("hair.threshold must be finite and non-negative"));
        }
        if let Some(l) = self.hair.se_length {
            if l < 3 || l % 2 == 0 {
                return Err(param("hair.se_length must be odd and >= 3"));
            }
        }
        for (name, g) in [("guided", &self.guided), ("spatial.guided", &self.spatial.guided)] {
            g.resolve(512, 512)
                .validate()
                .map_err(|e| param(alloc::format!("{name}: {e}")))?;
        }
        SpatialParams {
            theta_degrees: self.spatial.theta_degrees,
            smoothing: self.spatial.guided.resolve(512, 512),
        }
        .validate()?;
        if let Some(p) = self.coarse.patch_size {
            if p < 4 {
                return Err(param("coarse.patch_size must be >= 4"));
            }
        }
        self.freq.resolve(512, 512).validate()?;
        if self.fusion.entropy_bins < 2 {
            return Err(param("fusion.entropy_bins must be >= 2"));
        }
        if self.post.se_radius == Some(0) {
            return Err(param("post.se_radius must be >= 1"));
        }
        Ok(())
    }

    pub fn combine(&self) -> Combine {
        if self.fusion.chart_mode {
            Combine::Product
        } else {
            Combine::Sum
        }
    }
}

/// Pipeline output. The mask has the input dimensions; the intermediate maps
/// are at the processing resolution.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub mask: BinaryMask,
    pub hair: HairMask,
    pub smoothed: Raster,
    pub col_coc: SaliencyMap,
    pub col_lab: SaliencyMap,
    pub col_map: SaliencyMap,
    pub coarse_map: SaliencyMap,
    pub fmap_coc: SaliencyMap,
    pub fmap_lab: SaliencyMap,
    pub feq_map: SaliencyMap,
    pub initial_map: SaliencyMap,
    pub final_map: SaliencyMap,
    /// `None` when the final map was degenerate and the mask is empty.
    pub threshold: Option<Threshold>,
}

impl Segmentation {
    /// The intermediate maps with their conventional file stems, in pipeline
    /// order, all scaled to `[0, 1]`. The smoothed image is reduced to luma and
    /// the raw contrast maps are min-max normalized.
    pub fn intermediates(&self) -> Vec<(&'static str, SaliencyMap)> {
        let luma = SaliencyMap::from_parts(self.smoothed.luma().map(|v| v.clamp(0.0, 1.0)), true);
        let m = |s: &SaliencyMap| {
            if s.is_normalized() {
                s.clone()
            } else {
                minmax_normalize(s)
            }
        };
        alloc::vec![
            ("hair_mask", SaliencyMap::from_parts(self.hair.mask().to_plane(), true)),
            ("smoothed", luma),
            ("Col_coc", m(&self.col_coc)),
            ("Col_lab", m(&self.col_lab)),
            ("Col_map", m(&self.col_map)),
            ("C_map", m(&self.coarse_map)),
            ("Fmap_coc", m(&self.fmap_coc)),
            ("Fmap_lab", m(&self.fmap_lab)),
            ("Feq_map", m(&self.feq_map)),
            ("I_map", m(&self.initial_map)),
            ("S_Fmap", m(&self.final_map)),
        ]
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

fn resize_raster(img: &Raster, w: usize, h: usize) -> Result<Raster> {
    if img.dims() == (w, h) {
        return Ok(img.clone());
    }
    let planes = img
        .planes()
        .iter()
        .map(|p| resize_bilinear(p, w, h).map(|v| v.clamp(0.0, 1.0)))
        .collect();
    Raster::new(planes, img.semantics())
}

/// Runs the full segmentation on an rgb image.
pub fn segment(img: &Raster, config: &PipelineConfig) -> Result<Segmentation> {
    stage("config", config.validate())?;
    stage("input", img.expect(Semantics::Rgb))?;
    let (in_w, in_h) = img.dims();
    let (w, h) = fit_within(in_w, in_h, config.io.resize_max);
    let work = stage("resize", resize_raster(img, w, h))?;

    let (hair, clean) = if config.hair.enabled {
        let len = config.hair.se_length.unwrap_or_else(|| default_se_length(w, h));
        let mask = stage("hair", detect_hair_mask(&work, len, config.hair.threshold))?;
        let clean = if mask.mask().count() == 0 {
            work
        } else {
            stage("hair", inpaint_hair(&work, &mask))?
        };
        (mask, clean)
    } else {
        (HairMask::new(BinaryMask::new(w, h)), work)
    };

    let smoothed = stage("smooth", preprocess::smooth(&clean, &config.guided.resolve(w, h)))?;

    let opp = stage("color", to_opponent_planes(&smoothed, config.color.intensity_mode))?;
    let lab = stage("color", to_lab_planes(&smoothed))?;

    let denominator = if config.lab.variance_denominator {
        LabDenominator::Variance
    } else {
        LabDenominator::StdDev
    };
    let col_coc = stage("spatial", coc_contrast_map(&opp))?;
    let col_lab = stage("spatial", lab_contrast_map(&lab, denominator))?;
    let spatial_params = SpatialParams {
        theta_degrees: config.spatial.theta_degrees,
        smoothing: config.spatial.guided.resolve(w, h),
    };
    let col_map = stage("spatial", spatial_map(&col_coc, &col_lab, &spatial_params, &smoothed))?;

    let patch = config.coarse.patch_size.unwrap_or_else(|| default_patch_size(w, h));
    let metric = if config.coarse.whitened {
        DistanceMetric::Whitened
    } else {
        DistanceMetric::Euclidean
    };
    let coarse_map = stage("coarse", (|| {
        let patches = extract_border_patches(&opp, &lab, patch)?;
        let model = cluster_background(&patches, config.coarse.seed)?;
        let maps = distance_maps(&model, &opp, &lab, patch, metric)?;
        coarse::coarse_map(&maps, model.weights(config.coarse.weight_mode))
    })())?;

    let spectral = config.freq.resolve(w, h);
    let (fmap_coc, fmap_lab, feq_map) = stage("frequency", (|| {
        spectral.validate()?;
        let fc = spectral_map(&aggregate_opp(&opp, spectral.agg_weights_opp)?, &spectral)?;
        let fl = spectral_map(&aggregate_lab(&lab, spectral.agg_weights_lab)?, &spectral)?;
        let feq = frequency_map(&fc, &fl, spectral.gaussian_sigma)?;
        Ok((fc, fl, feq))
    })())?;

    let bins = config.fusion.entropy_bins;
    let initial = stage("fusion", initial_map(&col_map, &feq_map, config.combine(), bins))?;
    let fused = stage("fusion", final_map(&initial, &coarse_map, bins))?;

    let (raw, threshold) = match otsu_threshold(&fused, bins) {
        Ok(t) => (t.binarize(&fused), Some(t)),
        Err(Error::Degenerate(msg)) => {
            log::warn!("final saliency map is degenerate ({msg}); emitting an empty mask");
            (BinaryMask::new(w, h), None)
        }
        Err(e) => return stage("threshold", Err(e)),
    };

    let se_radius = config.post.se_radius.unwrap_or_else(|| default_se_radius(w, h));
    let cleaned = stage("post", postprocess_mask(&raw, se_radius, config.post.keep_largest))?;
    let mask = if (w, h) == (in_w, in_h) {
        cleaned
    } else {
        resize_nearest(&cleaned, in_w, in_h)
    };

    Ok(Segmentation {
        mask,
        hair,
        smoothed,
        col_coc,
        col_lab,
        col_map,
        coarse_map,
        fmap_coc,
        fmap_lab,
        feq_map,
        initial_map: initial,
        final_map: fused,
        threshold,
    })
}
