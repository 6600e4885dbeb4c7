//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! fails if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use dermsal::dataset::Layout;
use dermsal::synthetic::{corpus, generate, SyntheticParams};
use dermsal_core::coarse::{coarse_map, GROUPS};
use dermsal_core::filter::{reflect_index, Kernel2d};
use dermsal_core::frequency::{log_gabor_kernel, spectral_map, spectral_map_with_kernel, SpectralParams};
use dermsal_core::fusion::{entropy, final_map, otsu_cut, otsu_threshold};
use dermsal_core::metrics::{confusion, metrics, ConfusionCounts};
use dermsal_core::morphology::postprocess_mask;
use dermsal_core::preprocess::{fast_guided_filter, GuidedFilterParams};
use dermsal_core::{minmax_normalize, pipeline, BinaryMask, PipelineConfig, Plane, Raster, SaliencyMap, Semantics};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_plane(w: usize, h: usize, r: &mut ChaCha8Rng) -> Plane {
    Plane::from_fn(w, h, |_, _| r.random::<f64>())
}

fn gray(p: Plane) -> Raster {
    Raster::new(vec![p], Semantics::Gray).unwrap()
}

fn map(p: Plane) -> Raster {
    Raster::new(vec![p], Semantics::Map).unwrap()
}

fn max_abs_diff(a: &Plane, b: &Plane) -> f64 {
    assert_eq!(a.dims(), b.dims());
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------- 1. Otsu

/// Exhaustive search with exact integer arithmetic. The between-class
/// variance at cut t is (n1·S0 − n0·S1)² / (n0·n1·N²); candidates are
/// compared by cross-multiplication, so ties resolve exactly to the lowest t.
fn otsu_oracle(hist: &[u64]) -> Option<usize> {
    let total: u128 = hist.iter().map(|&c| c as u128).sum();
    let weighted: u128 = hist.iter().enumerate().map(|(i, &c)| i as u128 * c as u128).sum();
    let mut best: Option<(usize, u128, u128)> = None;
    for t in 0..hist.len() - 1 {
        let n0: u128 = hist[..=t].iter().map(|&c| c as u128).sum();
        let s0: u128 = hist[..=t].iter().enumerate().map(|(i, &c)| i as u128 * c as u128).sum();
        let (n1, s1) = (total - n0, weighted - s0);
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let diff = (n1 * s0).abs_diff(n0 * s1);
        let num = diff * diff;
        let den = n0 * n1;
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((t, num, den));
        }
    }
    best.map(|(t, _, _)| t)
}

fn map_from_histogram(hist: &[u64]) -> SaliencyMap {
    let bins = hist.len();
    let values: Vec<f64> = hist
        .iter()
        .enumerate()
        .flat_map(|(b, &c)| std::iter::repeat_n((b as f64 + 0.5) / bins as f64, c as usize))
        .collect();
    let n = values.len();
    SaliencyMap::normalized(Plane::from_vec(n, 1, values).unwrap()).unwrap()
}

fn criterion_otsu() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut mismatches = 0;
    for case in 0..200 {
        let density = r.random_range(0.05..1.0);
        let hist: Vec<u64> = (0..256)
            .map(|_| if r.random::<f64>() < density { r.random_range(0..60) } else { 0 })
            .collect();
        let want = otsu_oracle(&hist);
        let got_cut = otsu_cut(&hist);
        let got_map = otsu_threshold(&map_from_histogram(&hist), 256).ok().map(|t| t.cut_bin);
        if got_cut != want || (want.is_some() && got_map != want) {
            mismatches += 1;
            eprintln!("otsu case {case}: oracle {want:?}, cut {got_cut:?}, map {got_map:?}");
        }
    }
    let bimodal = Plane::from_fn(64, 64, |x, _| if x < 32 { 0.2 } else { 0.8 });
    let t = otsu_threshold(&SaliencyMap::normalized(bimodal.clone()).unwrap(), 256).map_err(|e| e.to_string())?;
    let separates = t.level > 0.2 && t.level < 0.8 && {
        let m = t.binarize(&SaliencyMap::normalized(bimodal).unwrap());
        (0..64).all(|x| m.get(x, 10) == (x >= 32))
    };
    let elapsed = start.elapsed();
    check(
        mismatches == 0 && separates && elapsed < Duration::from_secs(1),
        format!("200 histograms, {mismatches} mismatches; bimodal level {:.4}; {elapsed:.2?} (< 1 s)", t.level),
    )
}

// ------------------------------------------------------------ 2. spectral

fn naive_dft2(data: &[Complex64], w: usize, h: usize, inverse: bool) -> Vec<Complex64> {
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut out = vec![Complex64::new(0.0, 0.0); w * h];
    for v in 0..h {
        for u in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let phase = sign * 2.0 * PI * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                    acc += data[y * w + x] * Complex64::from_polar(1.0, phase);
                }
            }
            out[v * w + u] = if inverse { acc / (w * h) as f64 } else { acc };
        }
    }
    out
}

fn oracle_convolve(p: &[f64], w: usize, h: usize, k: &Kernel2d) -> Vec<f64> {
    let r = (k.size() / 2) as isize;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for ky in 0..k.size() {
                for kx in 0..k.size() {
                    let xi = reflect_index(x as isize + kx as isize - r, w);
                    let yi = reflect_index(y as isize + ky as isize - r, h);
                    acc += k.weight(kx, ky) * p[yi * w + xi];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn oracle_normalize(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

fn oracle_spectral(p: &Plane, k: &Kernel2d) -> Vec<f64> {
    let (w, h) = p.dims();
    let input: Vec<Complex64> = p.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let spectrum = naive_dft2(&input, w, h, false);
    let amp: Vec<f64> = spectrum.iter().map(|c| c.norm().max(1e-12).ln()).collect();
    let smoothed = oracle_convolve(&amp, w, h, k);
    let rebuilt: Vec<Complex64> = smoothed
        .iter()
        .zip(&spectrum)
        .map(|(&a, c)| Complex64::from_polar(a.exp(), c.arg()))
        .collect();
    let back = naive_dft2(&rebuilt, w, h, true);
    oracle_normalize(&back.iter().map(|c| c.norm().sqrt()).collect::<Vec<_>>())
}

fn criterion_spectral() -> Outcome {
    let start = Instant::now();
    let params = SpectralParams::for_image(16, 16);
    let k = log_gabor_kernel(params.loggabor_kernel_size, params.loggabor_f0, params.loggabor_sigma_ratio)
        .map_err(|e| e.to_string())?;
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = Plane::from_fn(16, 16, |_, _| r.random::<f64>() * 2.0 - 1.0);
        let got = spectral_map(&gray(p.clone()), &params).map_err(|e| e.to_string())?;
        let want = Plane::from_vec(16, 16, oracle_spectral(&p, &k)).unwrap();
        worst = worst.max(max_abs_diff(got.values(), &want));
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-4 && elapsed < Duration::from_secs(30),
        format!("20 images 16x16, max |FFT - naive DFT| = {worst:.2e} (<= 1e-4); {elapsed:.2?} (< 30 s)"),
    )
}

// ------------------------------------------------------ 3. delta kernel

fn criterion_delta_round_trip() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let p = Plane::from_fn(64, 64, |_, _| r.random::<f64>() * 2.0 - 1.0);
        let got = spectral_map_with_kernel(&gray(p.clone()), &Kernel2d::delta(9).unwrap()).map_err(|e| e.to_string())?;
        let want = minmax_normalize(&SaliencyMap::new(p.map(|v| v.abs().sqrt())).unwrap());
        worst = worst.max(max_abs_diff(got.values(), want.values()));
    }
    check(worst <= 1e-4, format!("5 images 64x64, max error {worst:.2e} (<= 1e-4)"))
}

// ---------------------------------------------------------- 4. guided

#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for rr in 0..n {
            if rr != c {
                let f = a[rr][c] / a[c][c];
                for k in c..n {
                    a[rr][k] -= f * a[c][k];
                }
                b[rr] -= f * b[c];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

fn window(x: usize, y: usize, w: usize, h: usize, r: usize) -> impl Iterator<Item = (usize, usize)> {
    let (x0, x1) = (x.saturating_sub(r), (x + r).min(w - 1));
    let (y0, y1) = (y.saturating_sub(r), (y + r).min(h - 1));
    (y0..=y1).flat_map(move |yy| (x0..=x1).map(move |xx| (xx, yy)))
}

/// Guided filter from explicit windows: per-window least squares for the
/// linear coefficients, then window averages of the coefficients.
fn guided_oracle(guide: &[Plane], p: &Plane, r: usize, eps: f64) -> Plane {
    let (w, h) = p.dims();
    let c = guide.len();
    let mut coeffs = vec![(vec![0.0; c], 0.0); w * h];
    for y in 0..h {
        for x in 0..w {
            let px: Vec<(usize, usize)> = window(x, y, w, h, r).collect();
            let n = px.len() as f64;
            let mu: Vec<f64> = (0..c).map(|k| px.iter().map(|&(a, b)| guide[k].get(a, b)).sum::<f64>() / n).collect();
            let mp = px.iter().map(|&(a, b)| p.get(a, b)).sum::<f64>() / n;
            let mut cov = vec![vec![0.0; c]; c];
            let mut cip = vec![0.0; c];
            for &(a, b) in &px {
                for i in 0..c {
                    let di = guide[i].get(a, b) - mu[i];
                    cip[i] += di * (p.get(a, b) - mp) / n;
                    for j in 0..c {
                        cov[i][j] += di * (guide[j].get(a, b) - mu[j]) / n;
                    }
                }
            }
            for (i, row) in cov.iter_mut().enumerate() {
                row[i] += eps;
            }
            let a = solve(cov, cip);
            let b = mp - a.iter().zip(&mu).map(|(ai, mi)| ai * mi).sum::<f64>();
            coeffs[y * w + x] = (a, b);
        }
    }
    Plane::from_fn(w, h, |x, y| {
        let px: Vec<(usize, usize)> = window(x, y, w, h, r).collect();
        let n = px.len() as f64;
        let mut q = 0.0;
        for &(a, b) in &px {
            let (ak, bk) = &coeffs[b * w + a];
            q += bk / n;
            for k in 0..c {
                q += ak[k] * guide[k].get(x, y) / n;
            }
        }
        q
    })
}

fn box_oracle(p: &Plane, r: usize) -> Plane {
    let (w, h) = p.dims();
    Plane::from_fn(w, h, |x, y| {
        let px: Vec<(usize, usize)> = window(x, y, w, h, r).collect();
        px.iter().map(|&(a, b)| p.get(a, b)).sum::<f64>() / px.len() as f64
    })
}

fn criterion_guided() -> Outcome {
    let mut r = rng(4);
    let (w, h) = (37, 29);
    let mut worst_exact = 0.0f64;
    for (radius, eps) in [(2, 1e-3), (4, 1e-2), (3, 1e-4)] {
        let input = random_plane(w, h, &mut r);
        let g = random_plane(w, h, &mut r);
        let params = GuidedFilterParams::new(radius, eps, 1).unwrap();
        let got = fast_guided_filter(&gray(g.clone()), &map(input.clone()), &params).unwrap();
        worst_exact = worst_exact.max(max_abs_diff(got.plane(0), &guided_oracle(&[g], &input, radius, eps)));
        let rgb: Vec<Plane> = (0..3).map(|_| random_plane(w, h, &mut r)).collect();
        let guide = Raster::rgb(rgb[0].clone(), rgb[1].clone(), rgb[2].clone()).unwrap();
        let got = fast_guided_filter(&guide, &map(input.clone()), &params).unwrap();
        worst_exact = worst_exact.max(max_abs_diff(got.plane(0), &guided_oracle(&rgb, &input, radius, eps)));
    }
    let input = random_plane(w, h, &mut r);
    let g = random_plane(w, h, &mut r);
    let params = GuidedFilterParams::new(3, 1e6, 1).unwrap();
    let got = fast_guided_filter(&gray(g), &map(input.clone()), &params).unwrap();
    // With a → 0 every window contributes its mean, so the output is the
    // window average of window means.
    let limit = max_abs_diff(got.plane(0), &box_oracle(&box_oracle(&input, 3), 3));
    check(
        worst_exact <= 1e-6 && limit <= 1e-3,
        format!("subsample=1 vs direct: {worst_exact:.2e} (<= 1e-6); eps=1e6 vs box mean: {limit:.2e} (<= 1e-3)"),
    )
}

// --------------------------------------------------------- 5. metrics

fn criterion_metrics() -> Outcome {
    let c = ConfusionCounts {
        tp: 50,
        fp: 10,
        fn_: 10,
        tn: 30,
    };
    let m = metrics(&c, "hand").map_err(|e| e.to_string())?;
    let close = |v: Option<f64>, want: f64| v.is_some_and(|x| (x - want).abs() <= 1e-4);
    let hand = close(m.sensitivity, 50.0 / 60.0)
        && close(m.specificity, 0.75)
        && close(m.dsc, 100.0 / 120.0)
        && close(m.accuracy, 80.0);
    let mut r = rng(5);
    let mut asymmetric = 0;
    for _ in 0..50 {
        let (p, q) = (r.random::<f64>(), r.random::<f64>());
        let a = BinaryMask::from_fn(32, 24, |_, _| r.random::<f64>() < p);
        let b = BinaryMask::from_fn(32, 24, |_, _| r.random::<f64>() < q);
        let ab = metrics(&confusion(&a, &b).unwrap(), "ab").unwrap().dsc;
        let ba = metrics(&confusion(&b, &a).unwrap(), "ba").unwrap().dsc;
        if ab != ba {
            asymmetric += 1;
        }
    }
    check(
        hand && asymmetric == 0,
        format!(
            "sens {:.4} specificity {:.4} dsc {:.4} acc {:.2}; dsc asymmetric on {asymmetric}/50 pairs",
            m.sensitivity.unwrap_or(f64::NAN),
            m.specificity.unwrap_or(f64::NAN),
            m.dsc.unwrap_or(f64::NAN),
            m.accuracy.unwrap_or(f64::NAN)
        ),
    )
}

// ------------------------------------------------------- 6. synthetic

fn criterion_synthetic() -> Outcome {
    let params = SyntheticParams::default();
    let cfg = PipelineConfig::default();
    let mut dscs = Vec::new();
    let mut slowest = Duration::ZERO;
    for (i, case) in corpus(&params, 2024, 50).iter().enumerate() {
        let start = Instant::now();
        let seg = pipeline::segment(&case.image, &cfg).map_err(|e| format!("image {i}: {e}"))?;
        slowest = slowest.max(start.elapsed());
        let dsc = metrics(&confusion(&seg.mask, &case.truth).unwrap(), "").unwrap().dsc.unwrap_or(0.0);
        if dsc < 0.8 {
            eprintln!("synthetic image {i}: dsc {dsc:.4} ({} hair strokes)", case.hair_strokes);
        }
        dscs.push(dsc);
    }
    let mean = dscs.iter().sum::<f64>() / dscs.len() as f64;
    let worst = dscs.iter().copied().fold(1.0, f64::min);
    check(
        mean >= 0.90 && slowest <= Duration::from_secs(2),
        format!("50 images 256x256, mean dsc {mean:.4} (>= 0.90, worst {worst:.4}); slowest {slowest:.2?} (<= 2 s)"),
    )
}

// ------------------------------------------------------ 7. invariants

fn finite_unit(s: &SaliencyMap) -> bool {
    s.values().data().iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v))
}

fn criterion_invariants() -> Outcome {
    let params = SyntheticParams::default();
    let cfg = PipelineConfig::default();
    let mut failures: Vec<String> = Vec::new();
    let mut r = rng(7);

    for i in 0..4 {
        let case = generate(&params, 77, i);
        let seg = pipeline::segment(&case.image, &cfg).map_err(|e| e.to_string())?;
        let normalized = [
            &seg.col_map,
            &seg.coarse_map,
            &seg.fmap_coc,
            &seg.fmap_lab,
            &seg.feq_map,
            &seg.initial_map,
            &seg.final_map,
        ];
        if !normalized.iter().all(|m| m.is_normalized() && finite_unit(m)) {
            failures.push(format!("image {i}: normalized map outside [0,1]"));
        }
        for m in normalized {
            let e = entropy(m, 256).unwrap();
            if !(0.0..=8.0).contains(&e) {
                failures.push(format!("image {i}: entropy {e}"));
            }
        }
        let again = pipeline::segment(&case.image, &cfg).unwrap();
        let bits = |m: &SaliencyMap| m.values().data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        if again.mask != seg.mask || bits(&again.final_map) != bits(&seg.final_map) {
            failures.push(format!("image {i}: rerun not bit-identical"));
        }
        let twice = postprocess_mask(&seg.mask, 3, true).unwrap();
        let thrice = postprocess_mask(&twice, 3, true).unwrap();
        if twice != thrice {
            failures.push(format!("image {i}: postprocess not idempotent"));
        }
        let scaled = SaliencyMap::new(seg.initial_map.values().map(|v| 3.7 * v)).unwrap();
        let a = final_map(&seg.initial_map, &seg.coarse_map, 256).unwrap();
        let b = final_map(&scaled, &seg.coarse_map, 256).unwrap();
        if a.values().argmax() != b.values().argmax() {
            failures.push(format!("image {i}: final_map argmax moved under scaling"));
        }
    }

    for _ in 0..20 {
        let m = BinaryMask::from_fn(60, 50, |x, y| {
            let d = ((x as f64 - 30.0).powi(2) + (y as f64 - 25.0).powi(2)).sqrt();
            (d < 18.0) ^ (r.random::<f64>() < 0.08)
        });
        let keep = r.random();
        let once = postprocess_mask(&m, 2, keep).unwrap();
        if postprocess_mask(&once, 2, keep).unwrap() != once {
            failures.push("random mask: postprocess not idempotent".into());
        }
    }

    let maps: [SaliencyMap; GROUPS] =
        std::array::from_fn(|_| SaliencyMap::normalized(random_plane(24, 24, &mut r)).unwrap());
    let weights = [0.1, 0.4, 0.3, 0.2];
    let base = coarse_map(&maps, weights).unwrap();
    for s in [0.01, 7.0, 1e4] {
        let other = coarse_map(&maps, weights.map(|w| w * s)).unwrap();
        if max_abs_diff(base.values(), other.values()) > 1e-9 {
            failures.push(format!("coarse map changed under weight scale {s}"));
        }
    }

    let detail = if failures.is_empty() {
        "map ranges, entropy bounds, determinism, idempotence, scale invariances".to_string()
    } else {
        failures.join("; ")
    };
    check(failures.is_empty(), detail)
}

// ------------------------------------------------------------ 8. PH2

fn write_ph2_fixture(root: &Path, count: u64) {
    let params = SyntheticParams {
        width: 192,
        height: 144,
        radius: (25.0, 50.0),
        ..Default::default()
    };
    for i in 0..count {
        let id = format!("IMD{:03}", 2 + i);
        let case = generate(&params, 8, i);
        let img_dir = root.join(&id).join(format!("{id}_Dermoscopic_Image"));
        let gt_dir = root.join(&id).join(format!("{id}_lesion"));
        std::fs::create_dir_all(&img_dir).unwrap();
        std::fs::create_dir_all(&gt_dir).unwrap();
        let (w, h) = case.image.dims();
        let rgb = image::RgbImage::from_raw(w as u32, h as u32, dermsal::io::rgb8(&case.image)).unwrap();
        rgb.save(img_dir.join(format!("{id}.bmp"))).unwrap();
        let mask = image::GrayImage::from_raw(
            w as u32,
            h as u32,
            case.truth.data().iter().map(|&t| if t { 255 } else { 0 }).collect(),
        )
        .unwrap();
        mask.save(gt_dir.join(format!("{id}_lesion.bmp"))).unwrap();
    }
}

fn criterion_ph2() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().join("PH2 Dataset images");
    write_ph2_fixture(&root, 3);
    let report = dir.path().join("report.csv");
    let avg = dermsal::cli::cmd_evaluate(&Layout::Ph2, &root, &root, &report, 2, &PipelineConfig::default())
        .map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(&report).map_err(|e| e.to_string())?;
    let lines: Vec<&str> = text.lines().collect();
    let header_ok = lines.first() == Some(&"image_id,sensitivity,specificity,accuracy,dsc");
    let rows_ok = lines.len() == 5 && lines[1..].iter().all(|l| l.split(',').count() == 5 && !l.contains("error"));
    let avg_ok = lines.last().is_some_and(|l| l.starts_with("average,")) && avg.contains("average,");
    check(
        header_ok && rows_ok && avg_ok,
        format!("3-case PH2 fixture -> {} CSV lines; average row: {}", lines.len(), lines.last().unwrap_or(&"")),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 otsu oracle", criterion_otsu),
        ("2 spectral oracle", criterion_spectral),
        ("3 identity-kernel round trip", criterion_delta_round_trip),
        ("4 guided filter self-consistency", criterion_guided),
        ("5 metrics exactness", criterion_metrics),
        ("6 synthetic lesion corpus", criterion_synthetic),
        ("7 invariant suite", criterion_invariants),
        ("8 PH2-layout evaluation", criterion_ph2),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
