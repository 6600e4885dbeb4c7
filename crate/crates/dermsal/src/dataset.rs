//! Pairing dermoscopy images with ground-truth masks for the common dataset
//! layouts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{AppError, Result};

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layout {
    /// `<root>/<ID>/<ID>_Dermoscopic_Image/<file>` with masks in
    /// `<gt_root>/<ID>/<ID>_lesion/<file>`.
    Ph2,
    /// `<images>/<ID>.jpg` with masks `<gt>/<ID>_Segmentation.png`.
    Isic2016,
    /// File-name templates containing `{id}`, e.g. `{id}.png` and
    /// `{id}_mask.png`.
    Generic { image: String, mask: String },
}

impl Layout {
    pub fn generic(image: impl Into<String>, mask: impl Into<String>) -> Result<Self> {
        let (image, mask) = (image.into(), mask.into());
        for p in [&image, &mask] {
            if p.matches("{id}").count() != 1 {
                return Err(AppError::Usage(format!("pattern `{p}` must contain `{{id}}` exactly once")));
            }
        }
        Ok(Layout::Generic { image, mask })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPair {
    pub image_id: String,
    pub image_path: PathBuf,
    pub ground_truth_path: PathBuf,
}

/// Pairs sorted by id, plus one warning per skipped orphan image.
#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub pairs: Vec<DatasetPair>,
    pub warnings: Vec<String>,
}

fn read_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| AppError::io(dir, e))? {
        out.push(entry.map_err(|e| AppError::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

fn file_name(p: &Path) -> Option<&str> {
    p.file_name().and_then(|n| n.to_str())
}

fn is_image(p: &Path) -> bool {
    p.is_file()
        && p.extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn first_image(dir: &Path) -> Option<PathBuf> {
    read_dir(dir).ok()?.into_iter().find(|p| is_image(p))
}

fn match_template<'a>(template: &str, name: &'a str) -> Option<&'a str> {
    let (pre, post) = template.split_once("{id}")?;
    let id = name.strip_prefix(pre)?.strip_suffix(post)?;
    (!id.is_empty()).then_some(id)
}

fn candidates(layout: &Layout, image_dir: &Path, gt_dir: &Path) -> Result<Vec<(String, PathBuf, Option<PathBuf>)>> {
    let mut out = Vec::new();
    match layout {
        Layout::Ph2 => {
            for case in read_dir(image_dir)?.into_iter().filter(|p| p.is_dir()) {
                let Some(id) = file_name(&case).map(str::to_owned) else { continue };
                let Some(img) = first_image(&case.join(format!("{id}_Dermoscopic_Image"))) else {
                    continue;
                };
                let gt = first_image(&gt_dir.join(&id).join(format!("{id}_lesion")));
                out.push((id, img, gt));
            }
        }
        Layout::Isic2016 => {
            for p in read_dir(image_dir)? {
                if !is_image(&p) {
                    continue;
                }
                let Some(name) = file_name(&p) else { continue };
                let Some((id, _)) = name.rsplit_once('.') else { continue };
                if id.ends_with("_Segmentation") {
                    continue;
                }
                let gt = gt_dir.join(format!("{id}_Segmentation.png"));
                out.push((id.to_owned(), p.clone(), gt.is_file().then_some(gt)));
            }
        }
        Layout::Generic { image, mask } => {
            let same_dir = image_dir == gt_dir;
            for p in read_dir(image_dir)? {
                if !p.is_file() {
                    continue;
                }
                let Some(name) = file_name(&p) else { continue };
                if same_dir && match_template(mask, name).is_some() {
                    continue;
                }
                let Some(id) = match_template(image, name) else { continue };
                let gt = gt_dir.join(mask.replace("{id}", id));
                out.push((id.to_owned(), p.clone(), gt.is_file().then_some(gt)));
            }
        }
    }
    Ok(out)
}

/// Scans `image_dir` (and `gt_dir` for masks) according to `layout`.
/// Images without a mask are skipped with a warning; finding no pair at all
/// is an error.
pub fn ingest_dataset(layout: &Layout, image_dir: &Path, gt_dir: &Path) -> Result<Ingested> {
    for d in [image_dir, gt_dir] {
        if !d.is_dir() {
            return Err(AppError::Dataset(format!("{} is not a directory", d.display())));
        }
    }
    let mut by_id: BTreeMap<String, DatasetPair> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (id, image_path, gt) in candidates(layout, image_dir, gt_dir)? {
        match gt {
            Some(ground_truth_path) => {
                if by_id.contains_key(&id) {
                    warnings.push(format!("duplicate image id `{id}`: keeping {}", by_id[&id].image_path.display()));
                    continue;
                }
                by_id.insert(
                    id.clone(),
                    DatasetPair {
                        image_id: id,
                        image_path,
                        ground_truth_path,
                    },
                );
            }
            None => warnings.push(format!("no ground truth for {}; skipped", image_path.display())),
        }
    }
    if by_id.is_empty() {
        return Err(AppError::Dataset(format!(
            "no image/ground-truth pairs found under {}",
            image_dir.display()
        )));
    }
    Ok(Ingested {
        pairs: by_id.into_values().collect(),
        warnings,
    })
}
