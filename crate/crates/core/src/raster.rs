use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};

/// A single H×W plane of `f64` samples in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(param(format!(
                "plane data has {} samples, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Applies `f` to every sample.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Combines two planes of equal size sample by sample.
    pub fn zip_map(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        // Shadowed by inherent methods when std is linked.
        #[allow(unused_imports)]
        use num_traits::Float;
        if self.data.is_empty() {
            return 0.0;
        }
        let mu = self.mean();
        let var = self.data.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / self.data.len() as f64;
        var.sqrt()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Index of the first maximal sample as `(x, y)`.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        (best % self.width.max(1), best / self.width.max(1))
    }
}

pub(crate) fn ensure_same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(param(format!(
            "dimension mismatch: {}x{} vs {}x{}",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

/// What the planes of a [`Raster`] hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Rgb,
    Gray,
    Opponent,
    Lab,
    Map,
}

impl Semantics {
    pub fn name(self) -> &'static str {
        match self {
            Semantics::Rgb => "rgb",
            Semantics::Gray => "gray",
            Semantics::Opponent => "opponent",
            Semantics::Lab => "lab",
            Semantics::Map => "map",
        }
    }
}

/// Multi-plane floating point image. All planes share one size and every
/// sample is finite; rgb rasters are further restricted to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    planes: Vec<Plane>,
    semantics: Semantics,
}

impl Raster {
    pub fn new(planes: Vec<Plane>, semantics: Semantics) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::Raster("raster needs at least one plane".into()))?;
        let (width, height) = first.dims();
        if width == 0 || height == 0 {
            return Err(Error::Raster("raster has zero size".into()));
        }
        for p in &planes {
            if p.dims() != (width, height) {
                return Err(Error::Raster("planes differ in size".into()));
            }
            if !p.is_finite() {
                return Err(Error::Raster("non-finite sample".into()));
            }
        }
        if semantics == Semantics::Rgb {
            if planes.len() != 3 {
                return Err(Error::Raster(format!(
                    "rgb raster needs 3 planes, got {}",
                    planes.len()
                )));
            }
            if planes
                .iter()
                .any(|p| p.data().iter().any(|&v| !(0.0..=1.0).contains(&v)))
            {
                return Err(Error::Raster("rgb sample outside [0,1]".into()));
            }
        }
        Ok(Self {
            width,
            height,
            planes,
            semantics,
        })
    }

    pub fn rgb(r: Plane, g: Plane, b: Plane) -> Result<Self> {
        Self::new(vec![r, g, b], Semantics::Rgb)
    }

    pub fn gray(p: Plane) -> Result<Self> {
        Self::new(vec![p], Semantics::Gray)
    }

    /// Builds an rgb raster from interleaved 8-bit samples.
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(param("rgb8 buffer length does not match dimensions"));
        }
        let mut planes = [
            Vec::with_capacity(width * height),
            Vec::with_capacity(width * height),
            Vec::with_capacity(width * height),
        ];
        for px in bytes.chunks_exact(3) {
            for c in 0..3 {
                planes[c].push(f64::from(px[c]) / 255.0);
            }
        }
        let [r, g, b] = planes;
        Self::rgb(
            Plane::from_vec(width, height, r)?,
            Plane::from_vec(width, height, g)?,
            Plane::from_vec(width, height, b)?,
        )
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn plane(&self, i: usize) -> &Plane {
        &self.planes[i]
    }

    pub fn into_planes(self) -> Vec<Plane> {
        self.planes
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub(crate) fn expect(&self, wanted: Semantics) -> Result<()> {
        if self.semantics != wanted {
            return Err(Error::Semantic {
                expected: wanted.name(),
                actual: self.semantics.name(),
            });
        }
        Ok(())
    }

    /// Mean over planes, used for single-channel previews.
    pub fn luma(&self) -> Plane {
        let n = self.planes.len() as f64;
        let mut out = Plane::zeros(self.width, self.height);
        for p in &self.planes {
            for (o, v) in out.data_mut().iter_mut().zip(p.data()) {
                *o += v / n;
            }
        }
        out
    }
}

/// Single-plane saliency map. When `normalized` is set the values lie in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    values: Plane,
    normalized: bool,
}

impl SaliencyMap {
    /// Wraps raw values. Fails on non-finite samples.
    pub fn new(values: Plane) -> Result<Self> {
        if !values.is_finite() {
            return Err(Error::Raster("saliency map has non-finite values".into()));
        }
        Ok(Self {
            values,
            normalized: false,
        })
    }

    /// Wraps values already known to lie in `[0,1]`.
    pub fn normalized(values: Plane) -> Result<Self> {
        if values.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Raster("normalized map outside [0,1]".into()));
        }
        Ok(Self {
            values,
            normalized: true,
        })
    }

    pub(crate) fn from_parts(values: Plane, normalized: bool) -> Self {
        Self { values, normalized }
    }

    pub fn values(&self) -> &Plane {
        &self.values
    }

    pub fn into_plane(self) -> Plane {
        self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.dims()
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values.get(x, y)
    }
}

/// Rescales a map to `[0,1]` by `(v - min) / (max - min)`. A constant map
/// becomes all zeros.
pub fn minmax_normalize(map: &SaliencyMap) -> SaliencyMap {
    normalize_plane(map.values())
}

pub(crate) fn normalize_plane(p: &Plane) -> SaliencyMap {
    let (lo, hi) = p.min_max();
    let range = hi - lo;
    let values = if range > 0.0 && range.is_finite() {
        p.map(|v| ((v - lo) / range).clamp(0.0, 1.0))
    } else {
        Plane::zeros(p.width(), p.height())
    };
    SaliencyMap::from_parts(values, true)
}

/// Boolean H×W lesion mask (`true` = lesion).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, false)
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(param("mask data length does not match dimensions"));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Fraction of pixels set.
    pub fn coverage(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.data.len() as f64
        }
    }

    /// 1.0 for set pixels, 0.0 elsewhere.
    pub fn to_plane(&self) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }
}
