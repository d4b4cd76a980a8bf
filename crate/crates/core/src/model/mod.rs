//! Per-object curve models and the refined segmentation built from them.

mod mask;
mod spline;

use serde::{Deserialize, Serialize};

pub use mask::{render_mask, stroke_polyline};
pub use spline::{collapse_duplicates, fit_spline, sample_spline, SplineDocument, SplineModel};

use crate::error::Result;
use crate::graph::RegionGraph;
use crate::raster::Mask;
use crate::walker::Walk;

/// How the stroke width is derived from the regions a walk visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThicknessStrategy {
    /// Mean over walk vertices of `sqrt(area)`.
    SqrtArea,
    /// Total area of the distinct visited regions divided by the length of
    /// the fitted curve.
    #[default]
    AreaPerLength,
}

/// Object width as the mean equivalent side length `sqrt(area)` of the
/// regions along the walk, at least one pixel.
pub fn estimate_thickness(walk: &Walk, graph: &RegionGraph) -> f64 {
    let sides: Vec<f64> = walk.vertices().iter().map(|&v| (graph.vertices()[v as usize].area as f64).sqrt()).collect();
    (sides.iter().sum::<f64>() / sides.len() as f64).max(1.0)
}

/// Object width as covered area over curve length, at least one pixel.
pub fn estimate_thickness_per_length(walk: &Walk, graph: &RegionGraph, curve_length: f64) -> f64 {
    let mut distinct: Vec<u32> = walk.vertices().to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let area: usize = distinct.iter().map(|&v| graph.vertices()[v as usize].area).sum();
    if curve_length <= 0.0 {
        return estimate_thickness(walk, graph);
    }
    (area as f64 / curve_length).max(1.0)
}

/// Mean RGB over the distinct regions of a walk, weighted by area.
pub fn walk_color(walk: &Walk, graph: &RegionGraph) -> [f64; 3] {
    let mut distinct: Vec<u32> = walk.vertices().to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let mut acc = [0.0; 3];
    let mut total = 0.0;
    for v in distinct {
        let vx = &graph.vertices()[v as usize];
        let a = vx.area as f64;
        acc.iter_mut().zip(vx.mean_rgb).for_each(|(s, c)| *s += c * a);
        total += a;
    }
    acc.map(|s| s / total.max(1.0))
}

/// One detected object.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedObject {
    pub walk_id: usize,
    pub seed_start: usize,
    pub seed_end: usize,
    pub spline: SplineModel,
    pub mask: Mask,
}

/// Per-object masks and models for one image. Label 0 is background; object
/// `k` carries label `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub width: u32,
    pub height: u32,
    pub objects: Vec<SegmentedObject>,
    pub union: Mask,
}

impl SegmentationResult {
    pub fn new(width: u32, height: u32, objects: Vec<SegmentedObject>) -> Result<Self> {
        let union = Mask::union_all(width, height, objects.iter().map(|o| &o.mask))?;
        Ok(Self { width, height, objects, union })
    }

    /// Per-pixel object label; where objects overlap the later one wins.
    pub fn label_field(&self) -> Vec<u16> {
        let mut labels = vec![0u16; self.width as usize * self.height as usize];
        for (k, o) in self.objects.iter().enumerate() {
            for (l, &set) in labels.iter_mut().zip(o.mask.as_slice()) {
                if set {
                    *l = k as u16 + 1;
                }
            }
        }
        labels
    }
}

/// Region-level segmentation: every pixel of a region visited by walk `k`
/// gets label `k + 1`, all others 0.
pub fn region_labels(map_labels: &[u32], region_count: usize, walks: &[Walk]) -> Vec<u16> {
    let mut by_region = vec![0u16; region_count];
    for (k, w) in walks.iter().enumerate() {
        for &v in w.vertices() {
            by_region[v as usize] = k as u16 + 1;
        }
    }
    map_labels.iter().map(|&l| by_region[l as usize]).collect()
}
