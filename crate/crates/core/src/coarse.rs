//! Background-prior coarse saliency.
//!
//! Patches along the image border are taken as background samples. Their
//! six-dimensional color features `[RG, BY, I, L, a, b]` are grouped into four
//! clusters, each summarized by its centroid and covariance eigenbasis. Every
//! pixel is then scored by its distance to each group centroid and the four
//! distance maps are averaged with per-group weights.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::color::{LabPlanes, OpponentPlanes};
use crate::eigen::symmetric_eigen;
use crate::error::{param, Error, Result};
use crate::raster::{ensure_same_dims, minmax_normalize, normalize_plane, Plane, SaliencyMap};

pub const FEATURE_DIM: usize = 6;
pub const GROUPS: usize = 4;

pub type Feature = [f64; FEATURE_DIM];

const MAX_ITERATIONS: usize = 100;
const SHIFT_TOLERANCE: f64 = 1e-8;
const WHITENING_FLOOR: f64 = 1e-6;

/// 8 px at a 512 px longest side, proportional otherwise, at least 4.
pub fn default_patch_size(width: usize, height: usize) -> usize {
    ((8.0 * width.max(height) as f64 / 512.0).round() as usize).max(4)
}

/// Non-overlapping grid of square cells. The last row and column absorb any
/// remainder so every pixel belongs to exactly one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchGrid {
    pub width: usize,
    pub height: usize,
    pub patch_size: usize,
    pub cols: usize,
    pub rows: usize,
}

impl PatchGrid {
    pub fn new(width: usize, height: usize, patch_size: usize) -> Self {
        Self {
            width,
            height,
            patch_size,
            cols: (width / patch_size).max(1),
            rows: (height / patch_size).max(1),
        }
    }

    #[inline]
    pub fn cell_of(&self, x: usize, y: usize) -> (usize, usize) {
        (
            (x / self.patch_size).min(self.cols - 1),
            (y / self.patch_size).min(self.rows - 1),
        )
    }

    pub fn is_border(&self, col: usize, row: usize) -> bool {
        col == 0 || row == 0 || col + 1 == self.cols || row + 1 == self.rows
    }
}

fn check_planes(opp: &OpponentPlanes, lab: &LabPlanes) -> Result<(usize, usize)> {
    let dims = opp.rg.dims();
    for p in [&opp.by, &opp.i, &lab.l, &lab.a, &lab.b] {
        ensure_same_dims(dims, p.dims())?;
    }
    Ok(dims)
}

/// Mean feature of every grid cell, row-major.
fn cell_features(grid: &PatchGrid, opp: &OpponentPlanes, lab: &LabPlanes) -> Vec<Feature> {
    let planes = [&opp.rg, &opp.by, &opp.i, &lab.l, &lab.a, &lab.b];
    let mut sums = vec![[0.0; FEATURE_DIM]; grid.cols * grid.rows];
    let mut counts = vec![0usize; grid.cols * grid.rows];
    for y in 0..grid.height {
        for x in 0..grid.width {
            let (c, r) = grid.cell_of(x, y);
            let k = r * grid.cols + c;
            counts[k] += 1;
            for (s, p) in sums[k].iter_mut().zip(planes) {
                *s += p.get(x, y);
            }
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        for v in s.iter_mut() {
            *v /= n.max(1) as f64;
        }
    }
    sums
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub col: usize,
    pub row: usize,
    pub feature: Feature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchSet {
    pub patches: Vec<Patch>,
    pub patch_size: usize,
}

impl PatchSet {
    /// Wraps features that did not come from an image, e.g. in tests of the
    /// clustering step.
    pub fn from_features(features: &[Feature], patch_size: usize) -> Self {
        Self {
            patches: features
                .iter()
                .enumerate()
                .map(|(i, f)| Patch {
                    col: i,
                    row: 0,
                    feature: *f,
                })
                .collect(),
            patch_size,
        }
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }
}

/// Cells of the one-patch-wide band along all four image borders.
pub fn extract_border_patches(
    opp: &OpponentPlanes,
    lab: &LabPlanes,
    patch_size: usize,
) -> Result<PatchSet> {
    let (w, h) = check_planes(opp, lab)?;
    if patch_size < 4 {
        return Err(param(format!("patch size must be >= 4, got {patch_size}")));
    }
    if w < 2 * patch_size || h < 2 * patch_size {
        return Err(param(format!(
            "image {w}x{h} too small for patch size {patch_size}"
        )));
    }
    let grid = PatchGrid::new(w, h, patch_size);
    let features = cell_features(&grid, opp, lab);
    let mut patches = Vec::new();
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            if grid.is_border(col, row) {
                patches.push(Patch {
                    col,
                    row,
                    feature: features[row * grid.cols + col],
                });
            }
        }
    }
    Ok(PatchSet {
        patches,
        patch_size,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundGroup {
    pub centroid: Feature,
    /// Eigenvectors as columns, matching `eigenvalues` order.
    pub eigenvectors: [[f64; FEATURE_DIM]; FEATURE_DIM],
    /// Covariance eigenvalues, descending and non-negative.
    pub eigenvalues: [f64; FEATURE_DIM],
    pub member_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    pub groups: [BackgroundGroup; GROUPS],
}

/// How the four distance maps are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// Proportional to group membership.
    #[default]
    Membership,
    Uniform,
}

impl WeightMode {
    pub fn name(self) -> &'static str {
        match self {
            WeightMode::Membership => "membership",
            WeightMode::Uniform => "uniform",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "membership" => Some(WeightMode::Membership),
            "uniform" => Some(WeightMode::Uniform),
            _ => None,
        }
    }
}

impl BackgroundModel {
    pub fn weights(&self, mode: WeightMode) -> [f64; GROUPS] {
        match mode {
            WeightMode::Uniform => [1.0; GROUPS],
            WeightMode::Membership => {
                let total: usize = self.groups.iter().map(|g| g.member_count).sum();
                let mut w = [0.0; GROUPS];
                for (wi, g) in w.iter_mut().zip(&self.groups) {
                    *wi = g.member_count as f64 / total.max(1) as f64;
                }
                w
            }
        }
    }
}

fn dist2(a: &Feature, b: &Feature) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(f: &Feature, centroids: &[Feature; GROUPS]) -> usize {
    let mut best = 0;
    let mut best_d = dist2(f, &centroids[0]);
    for (k, c) in centroids.iter().enumerate().skip(1) {
        let d = dist2(f, c);
        if d < best_d {
            best = k;
            best_d = d;
        }
    }
    best
}

#[allow(clippy::needless_range_loop)]
fn kmeans_plus_plus(features: &[Feature], rng: &mut ChaCha8Rng) -> [Feature; GROUPS] {
    let n = features.len();
    let mut centroids = [[0.0; FEATURE_DIM]; GROUPS];
    centroids[0] = features[rng.random_range(0..n)];
    let mut d2: Vec<f64> = features.iter().map(|f| dist2(f, &centroids[0])).collect();
    for k in 1..GROUPS {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut idx = n - 1;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if acc > target {
                    idx = i;
                    break;
                }
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centroids[k] = features[pick];
        for (d, f) in d2.iter_mut().zip(features) {
            *d = d.min(dist2(f, &centroids[k]));
        }
    }
    centroids
}

/// Four-way k-means (k-means++ seeding) of the patch features followed by a
/// covariance eigendecomposition per group. Deterministic for a given seed.
pub fn cluster_background(patches: &PatchSet, seed: u64) -> Result<BackgroundModel> {
    let features: Vec<Feature> = patches.patches.iter().map(|p| p.feature).collect();
    if features.len() < GROUPS {
        return Err(Error::Model(format!(
            "need at least {GROUPS} patches, got {}",
            features.len()
        )));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Model("non-finite patch feature".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(&features, &mut rng);
    let mut labels = vec![0usize; features.len()];
    for _ in 0..MAX_ITERATIONS {
        for (l, f) in labels.iter_mut().zip(&features) {
            *l = nearest(f, &centroids);
        }
        let mut sums = [[0.0; FEATURE_DIM]; GROUPS];
        let mut counts = [0usize; GROUPS];
        for (&l, f) in labels.iter().zip(&features) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(f) {
                *s += v;
            }
        }
        let mut shift = 0.0f64;
        for k in 0..GROUPS {
            if counts[k] == 0 {
                continue;
            }
            let mut c = sums[k];
            for v in c.iter_mut() {
                *v /= counts[k] as f64;
            }
            shift = shift.max(dist2(&c, &centroids[k]).sqrt());
            centroids[k] = c;
        }
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }

    let groups = core::array::from_fn(|k| {
        let members: Vec<&Feature> = labels
            .iter()
            .zip(&features)
            .filter(|(&l, _)| l == k)
            .map(|(_, f)| f)
            .collect();
        let mut eigenvectors = [[0.0; FEATURE_DIM]; FEATURE_DIM];
        for (i, row) in eigenvectors.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let mut eigenvalues = [0.0; FEATURE_DIM];
        if members.len() > 1 {
            let mu = centroids[k];
            let mut cov = [[0.0; FEATURE_DIM]; FEATURE_DIM];
            for f in &members {
                for i in 0..FEATURE_DIM {
                    for j in 0..FEATURE_DIM {
                        cov[i][j] += (f[i] - mu[i]) * (f[j] - mu[j]);
                    }
                }
            }
            for row in cov.iter_mut() {
                for v in row.iter_mut() {
                    *v /= members.len() as f64;
                }
            }
            let (vals, vecs) = symmetric_eigen(cov);
            eigenvalues = vals.map(|v| v.max(0.0));
            eigenvectors = vecs;
        }
        BackgroundGroup {
            centroid: centroids[k],
            eigenvectors,
            eigenvalues,
            member_count: members.len(),
        }
    });
    Ok(BackgroundModel { groups })
}

/// Distance used to score pixel features against a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMetric {
    /// Plain Euclidean distance to the centroid.
    #[default]
    Euclidean,
    /// Euclidean distance in the group's eigenbasis scaled by `1/sqrt(λ)`.
    Whitened,
}

fn group_distance(f: &Feature, g: &BackgroundGroup, metric: DistanceMetric) -> f64 {
    match metric {
        DistanceMetric::Euclidean => dist2(f, &g.centroid).sqrt(),
        DistanceMetric::Whitened => {
            let mut acc = 0.0;
            for i in 0..FEATURE_DIM {
                let proj: f64 = (0..FEATURE_DIM)
                    .map(|k| (f[k] - g.centroid[k]) * g.eigenvectors[k][i])
                    .sum();
                acc += proj * proj / (g.eigenvalues[i] + WHITENING_FLOOR);
            }
            acc.sqrt()
        }
    }
}

/// Unnormalized per-group distance planes. Each pixel takes the feature of
/// its grid cell.
pub fn raw_distance_maps(
    model: &BackgroundModel,
    opp: &OpponentPlanes,
    lab: &LabPlanes,
    patch_size: usize,
    metric: DistanceMetric,
) -> Result<[Plane; GROUPS]> {
    let (w, h) = check_planes(opp, lab)?;
    if patch_size == 0 {
        return Err(param("patch size must be positive"));
    }
    let grid = PatchGrid::new(w, h, patch_size);
    let features = cell_features(&grid, opp, lab);
    Ok(core::array::from_fn(|p| {
        let cell_dist: Vec<f64> = features
            .iter()
            .map(|f| group_distance(f, &model.groups[p], metric))
            .collect();
        Plane::from_fn(w, h, |x, y| {
            let (c, r) = grid.cell_of(x, y);
            cell_dist[r * grid.cols + c]
        })
    }))
}

/// The four min-max normalized distance maps.
pub fn distance_maps(
    model: &BackgroundModel,
    opp: &OpponentPlanes,
    lab: &LabPlanes,
    patch_size: usize,
    metric: DistanceMetric,
) -> Result<[SaliencyMap; GROUPS]> {
    let raw = raw_distance_maps(model, opp, lab, patch_size, metric)?;
    Ok(raw.map(|p| normalize_plane(&p)))
}

/// `Σ w_p S_p / Σ w_p`, min-max normalized.
pub fn coarse_map(maps: &[SaliencyMap; GROUPS], weights: [f64; GROUPS]) -> Result<SaliencyMap> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(param("coarse map weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(param("coarse map weights sum to zero"));
    }
    let dims = maps[0].dims();
    for m in maps.iter().skip(1) {
        ensure_same_dims(dims, m.dims())?;
    }
    let mut acc = Plane::zeros(dims.0, dims.1);
    for (m, w) in maps.iter().zip(weights) {
        let w = w / total;
        if w == 0.0 {
            continue;
        }
        for (a, v) in acc.data_mut().iter_mut().zip(m.values().data()) {
            *a += w * v;
        }
    }
    Ok(minmax_normalize(&SaliencyMap::new(acc)?))
}
