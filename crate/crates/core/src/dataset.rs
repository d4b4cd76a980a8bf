//! On-disk dataset layout: one directory per image holding `image.png`,
//! `mask_union.png`, `mask_<k>.png` and `spline_<k>.json` per object.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::{CableTruth, GroundTruth};
use crate::geometry::Point2;
use crate::model::{SegmentationResult, SplineDocument};
use crate::raster::{Image, Mask};
use crate::synth::Scene;

#[derive(Debug, Clone)]
pub struct Sample {
    pub name: String,
    pub image: Image,
    pub truth: GroundTruth,
}

impl Sample {
    /// Cable endpoints, two seeds per cable, from the point lists.
    pub fn seed_points(&self) -> Vec<Point2> {
        self.truth.endpoints().iter().flat_map(|e| e.iter().copied()).collect()
    }
}

fn write_layout(dir: &Path, image: &Image, union: &Mask, masks: &[&Mask], splines: &[SplineDocument]) -> Result<()> {
    fs::create_dir_all(dir)?;
    image.save_png(dir.join("image.png"))?;
    union.save_png(dir.join("mask_union.png"))?;
    for (k, (mask, spline)) in masks.iter().zip(splines).enumerate() {
        mask.save_png(dir.join(format!("mask_{k}.png")))?;
        fs::write(dir.join(format!("spline_{k}.json")), serde_json::to_string_pretty(spline)?)?;
    }
    Ok(())
}

/// Writes a generated scene as a ground-truth sample.
pub fn write_scene(dir: &Path, scene: &Scene) -> Result<()> {
    let masks: Vec<&Mask> = scene.truth.cables.iter().map(|c| &c.mask).collect();
    let splines: Vec<SplineDocument> =
        scene.truth.cables.iter().map(|c| SplineDocument::from_points(&c.points)).collect();
    write_layout(dir, &scene.image, &scene.truth.union, &masks, &splines)
}

/// Writes a segmentation result in the same layout; spline files carry the
/// full models.
pub fn write_result(dir: &Path, image: &Image, result: &SegmentationResult, max_gap_px: f64) -> Result<()> {
    let masks: Vec<&Mask> = result.objects.iter().map(|o| &o.mask).collect();
    let splines: Vec<SplineDocument> =
        result.objects.iter().map(|o| SplineDocument::from_model(&o.spline, max_gap_px)).collect();
    write_layout(dir, image, &result.union, &masks, &splines)
}

/// Reads one sample directory.
pub fn read_sample(dir: &Path) -> Result<Sample> {
    let image = Image::open(dir.join("image.png"))?;
    let mut cables = Vec::new();
    for k in 0.. {
        let mask_path = dir.join(format!("mask_{k}.png"));
        if !mask_path.exists() {
            break;
        }
        let mask = Mask::open(&mask_path)?;
        if mask.dims() != (image.width(), image.height()) {
            let (w, h) = mask.dims();
            return Err(Error::DimensionMismatch(w, h, image.width(), image.height()));
        }
        let doc: SplineDocument = serde_json::from_str(&fs::read_to_string(dir.join(format!("spline_{k}.json")))?)?;
        if doc.version != 1 {
            return Err(Error::Version(doc.version));
        }
        cables.push(CableTruth { mask, points: doc.points() });
    }
    let truth = GroundTruth::new(image.width(), image.height(), cables)?;
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Sample { name, image, truth })
}

/// Sample directories under `root` in name order. `root` itself counts when
/// it holds an `image.png`.
pub fn list_samples(root: &Path) -> Result<Vec<PathBuf>> {
    if root.join("image.png").is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("image.png").is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}
