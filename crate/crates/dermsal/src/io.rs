//! PNG/JPEG/BMP decoding into rasters and 8-bit PNG encoding of maps, masks
//! and rgb images.

use std::io::Cursor;
use std::path::Path;

use dermsal_core::{BinaryMask, Plane, Raster};
use image::{GrayImage, ImageReader, RgbImage};

use crate::error::{AppError, Result};

fn decode(path: &Path) -> Result<image::DynamicImage> {
    let bytes = std::fs::read(path).map_err(|e| AppError::io(path, e))?;
    let decode_err = |e: image::ImageError| AppError::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| AppError::io(path, e))?
        .decode()
        .map_err(decode_err)
}

/// Decodes any supported file into an rgb raster with values in `[0, 1]`.
/// Alpha is dropped and gray images are replicated to three channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let rgb = decode(path)?.to_rgb8();
    let (w, h) = rgb.dimensions();
    Ok(Raster::from_rgb8(w as usize, h as usize, rgb.as_raw())?)
}

/// Decodes a mask image; a pixel is set when its 8-bit luma exceeds 127.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let gray = decode(path)?.to_luma8();
    let (w, h) = gray.dimensions();
    let data = gray.as_raw().iter().map(|&v| v > 127).collect();
    Ok(BinaryMask::from_vec(w as usize, h as usize, data)?)
}

/// `round(v · 255)` after clamping to `[0, 1]`; halves round away from zero.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn save<P, C>(img: image::ImageBuffer<P, C>, path: &Path) -> Result<()>
where
    P: image::PixelWithColorType,
    [P::Subpixel]: image::EncodableLayout,
    C: std::ops::Deref<Target = [P::Subpixel]>,
{
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => AppError::io(path, io),
            other => AppError::Encode {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        })
}

/// Writes a `[0, 1]` plane as a single-channel 8-bit PNG.
pub fn save_gray(plane: &Plane, path: impl AsRef<Path>) -> Result<()> {
    let (w, h) = plane.dims();
    let data = plane.data().iter().map(|&v| quantize(v)).collect();
    let img = GrayImage::from_raw(w as u32, h as u32, data).expect("buffer matches dimensions");
    save(img, path.as_ref())
}

/// Writes a mask as a single-channel PNG with values 0 and 255.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    save_gray(&mask.to_plane(), path)
}

pub fn rgb8(img: &Raster) -> Vec<u8> {
    let planes = img.planes();
    let mut out = Vec::with_capacity(img.width() * img.height() * 3);
    for k in 0..img.width() * img.height() {
        for p in planes.iter().take(3) {
            out.push(quantize(p.data()[k]));
        }
    }
    out
}

/// Writes an rgb raster as an 8-bit PNG.
pub fn save_rgb(img: &Raster, path: impl AsRef<Path>) -> Result<()> {
    if img.planes().len() != 3 {
        return Err(AppError::Usage("save_rgb needs a three-plane raster".into()));
    }
    let buf = RgbImage::from_raw(img.width() as u32, img.height() as u32, rgb8(img))
        .expect("buffer matches dimensions");
    save(buf, path.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_rounds_half_up() {
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(-3.0), 0);
        assert_eq!(quantize(7.0), 255);
        for b in 0..=255u8 {
            assert_eq!(quantize(f64::from(b) / 255.0), b);
        }
    }

    #[test]
    fn rgb_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let bytes: Vec<u8> = (0..7 * 5 * 3).map(|i| (i * 37 % 256) as u8).collect();
        let img = Raster::from_rgb8(7, 5, &bytes).unwrap();
        let path = dir.path().join("a.png");
        save_rgb(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back, img);
        assert_eq!(rgb8(&back), bytes);
    }

    #[test]
    fn mask_round_trip_and_threshold() {
        let dir = tempfile::tempdir().unwrap();
        let m = BinaryMask::from_fn(9, 4, |x, y| (x + y) % 3 == 0);
        let path = dir.path().join("m.png");
        save_mask(&m, &path).unwrap();
        assert_eq!(load_mask(&path).unwrap(), m);
        let g = Plane::from_fn(3, 1, |x, _| [127.0, 128.0, 0.0][x] / 255.0);
        save_gray(&g, &path).unwrap();
        let back = load_mask(&path).unwrap();
        assert_eq!(back.data(), &[false, true, false]);
    }

    #[test]
    fn missing_and_corrupt_files() {
        let dir = tempfile::tempdir().unwrap();
        let missing = load_image(dir.path().join("none.png")).unwrap_err();
        assert!(matches!(missing, AppError::Io { .. }));
        let junk = dir.path().join("junk.png");
        std::fs::write(&junk, b"not an image").unwrap();
        assert!(matches!(load_image(&junk).unwrap_err(), AppError::Decode { .. }));
    }
}
