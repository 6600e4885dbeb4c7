//! Binary mask cleanup: disk opening and closing, hole filling and
//! largest-component selection.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;



#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{param, Result};
use crate::raster::BinaryMask;

/// `max(3, round(0.01 * longest side))`.
pub fn default_se_radius(width: usize, height: usize) -> usize {
    ((0.01 * width.max(height) as f64).round() as usize).max(3)
}

/// Offsets of a digital disk `dx² + dy² <= r²`.
pub fn disk(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

// Offsets that leave the image are ignored. With a symmetric element this
// keeps erosion and dilation adjoint on the image domain, so opening and
// closing stay idempotent.
fn rank(mask: &BinaryMask, se: &[(isize, isize)], dilate: bool) -> BinaryMask {
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w, h, |x, y| {
        let mut hit = !dilate;
        for &(dx, dy) in se {
            let xi = x as isize + dx;
            let yi = y as isize + dy;
            if xi < 0 || yi < 0 || xi >= w as isize || yi >= h as isize {
                continue;
            }
            let v = mask.get(xi as usize, yi as usize);
            if dilate && v {
                hit = true;
                break;
            }
            if !dilate && !v {
                hit = false;
                break;
            }
        }
        hit
    })
}

pub fn erode(mask: &BinaryMask, se: &[(isize, isize)]) -> BinaryMask {
    rank(mask, se, false)
}

pub fn dilate(mask: &BinaryMask, se: &[(isize, isize)]) -> BinaryMask {
    rank(mask, se, true)
}

pub fn open(mask: &BinaryMask, se: &[(isize, isize)]) -> BinaryMask {
    dilate(&erode(mask, se), se)
}

pub fn close(mask: &BinaryMask, se: &[(isize, isize)]) -> BinaryMask {
    erode(&dilate(mask, se), se)
}

const N4: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const N8: [(isize, isize); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

fn flood(
    mask: &BinaryMask,
    seeds: impl IntoIterator<Item = (usize, usize)>,
    value: bool,
    nbhd: &[(isize, isize)],
    visited: &mut [bool],
) -> usize {
    let (w, h) = mask.dims();
    let mut queue = VecDeque::new();
    for (x, y) in seeds {
        let k = y * w + x;
        if !visited[k] && mask.get(x, y) == value {
            visited[k] = true;
            queue.push_back((x, y));
        }
    }
    let mut n = 0;
    while let Some((x, y)) = queue.pop_front() {
        n += 1;
        for &(dx, dy) in nbhd {
            let xi = x as isize + dx;
            let yi = y as isize + dy;
            if xi < 0 || yi < 0 || xi >= w as isize || yi >= h as isize {
                continue;
            }
            let (xi, yi) = (xi as usize, yi as usize);
            let k = yi * w + xi;
            if !visited[k] && mask.get(xi, yi) == value {
                visited[k] = true;
                queue.push_back((xi, yi));
            }
        }
    }
    n
}

/// Sets every background pixel not 4-connected to the image border.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut outside = vec![false; w * h];
    let border = (0..w)
        .flat_map(|x| [(x, 0), (x, h - 1)])
        .chain((0..h).flat_map(|y| [(0, y), (w - 1, y)]));
    flood(mask, border, false, &N4, &mut outside);
    BinaryMask::from_fn(w, h, |x, y| mask.get(x, y) || !outside[y * w + x])
}

/// Keeps the largest 8-connected foreground component (first in raster
/// order on ties).
pub fn keep_largest_component(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut visited = vec![false; w * h];
    let mut best: Option<(usize, usize, usize)> = None;
    for y in 0..h {
        for x in 0..w {
            if visited[y * w + x] || !mask.get(x, y) {
                continue;
            }
            let n = flood(mask, [(x, y)], true, &N8, &mut visited);
            if best.is_none_or(|(_, _, b)| n > b) {
                best = Some((x, y, n));
            }
        }
    }
    let Some((sx, sy, _)) = best else {
        return mask.clone();
    };
    let mut keep = vec![false; w * h];
    flood(mask, [(sx, sy)], true, &N8, &mut keep);
    BinaryMask::from_vec(w, h, keep).unwrap()
}

fn postprocess_once(mask: &BinaryMask, se: &[(isize, isize)], keep_largest: bool) -> BinaryMask {
    let cleaned = fill_holes(&close(&open(mask, se), se));
    if keep_largest {
        keep_largest_component(&cleaned)
    } else {
        cleaned
    }
}

/// Opening then closing with a disk of `se_radius`, hole filling and,
/// optionally, largest-component selection. The chain is repeated until it
/// reaches a fixed point so that the result is idempotent.
pub fn postprocess_mask(mask: &BinaryMask, se_radius: usize, keep_largest: bool) -> Result<BinaryMask> {
    if se_radius < 1 {
        return Err(param("structuring element radius must be >= 1"));
    }
    if mask.width() == 0 || mask.height() == 0 {
        return Ok(mask.clone());
    }
    let se = disk(se_radius);
    let mut current = postprocess_once(mask, &se, keep_largest);
    for _ in 0..8 {
        let next = postprocess_once(&current, &se, keep_largest);
        if next == current {
            break;
        }
        current = next;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn disk_mask(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            dx * dx + dy * dy <= r * r
        })
    }

    #[test]
    fn solid_disk_unchanged() {
        let m = disk_mask(100, 100, 50.0, 50.0, 30.0);
        assert_eq!(postprocess_mask(&m, 5, true).unwrap(), m);
    }

    #[test]
    fn interior_hole_filled() {
        let full = disk_mask(80, 80, 40.0, 40.0, 25.0);
        let mut holed = full.clone();
        for y in 39..42 {
            for x in 39..42 {
                holed.set(x, y, false);
            }
        }
        assert_eq!(fill_holes(&holed), full);
        assert_eq!(postprocess_mask(&holed, 1, false).unwrap(), full);
    }

    #[test]
    fn isolated_pixel_removed() {
        let mut m = disk_mask(80, 80, 40.0, 40.0, 20.0);
        m.set(5, 5, true);
        let out = keep_largest_component(&m);
        assert!(!out.get(5, 5));
        assert_eq!(out.count(), m.count() - 1);
    }

    #[test]
    fn full_frame_survives() {
        let m = BinaryMask::filled(30, 20, true);
        assert_eq!(postprocess_mask(&m, 3, true).unwrap(), m);
        let e = BinaryMask::new(30, 20);
        assert_eq!(postprocess_mask(&e, 3, true).unwrap(), e);
    }

    #[test]
    fn radius_zero_rejected() {
        assert!(postprocess_mask(&BinaryMask::new(4, 4), 0, true).is_err());
    }

    #[test]
    fn opening_and_closing_idempotent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let m = BinaryMask::from_fn(40, 30, |_, _| rng.random::<f64>() < 0.55);
        let se = disk(2);
        let o = open(&m, &se);
        assert_eq!(open(&o, &se), o);
        let c = close(&m, &se);
        assert_eq!(close(&c, &se), c);
    }

    #[test]
    fn default_radius() {
        assert_eq!(default_se_radius(256, 256), 3);
        assert_eq!(default_se_radius(512, 384), 5);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn postprocess_idempotent(seed in 0u64..10_000, density in 0.2f64..0.8, keep in proptest::bool::ANY) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            // Blobs plus salt noise.
            let blobs: Vec<(f64, f64, f64)> = (0..4)
                .map(|_| (rng.random::<f64>() * 48.0, rng.random::<f64>() * 40.0, 3.0 + rng.random::<f64>() * 10.0))
                .collect();
            let m = BinaryMask::from_fn(48, 40, |x, y| {
                let inside = blobs.iter().any(|&(cx, cy, r)| {
                    let dx = x as f64 - cx;
                    let dy = y as f64 - cy;
                    dx * dx + dy * dy <= r * r
                });
                inside ^ (rng.random::<f64>() < density * 0.1)
            });
            let once = postprocess_mask(&m, 2, keep).unwrap();
            let twice = postprocess_mask(&once, 2, keep).unwrap();
            proptest::prop_assert_eq!(once, twice);
        }
    }
}
