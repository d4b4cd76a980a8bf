//! Overlap metrics and the per-image evaluation protocol.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::Point2;
use crate::model::SegmentationResult;
use crate::raster::Mask;

/// `|a ∩ b| / |a ∪ b|`; two empty masks score 1.
pub fn iou(prediction: &Mask, truth: &Mask) -> Result<f64> {
    let (inter, union) = prediction.overlap_counts(truth)?;
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Cable-count weighted mean `Σ Cᵢ·IoUᵢ / Σ Cᵢ`.
pub fn weighted_iou(per_image: &[(usize, f64)]) -> Result<f64> {
    if per_image.is_empty() {
        return Err(Error::Empty("weighted_iou needs at least one image"));
    }
    if per_image.iter().any(|&(c, _)| c == 0) {
        return Err(Error::InvalidParameter("cable count must be >= 1".into()));
    }
    let weight: usize = per_image.iter().map(|&(c, _)| c).sum();
    let sum: f64 = per_image.iter().map(|&(c, v)| c as f64 * v).sum();
    Ok(sum / weight as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CableTruth {
    pub mask: Mask,
    /// Centerline discretization in pixel coordinates.
    pub points: Vec<Point2>,
}

/// Hand-labeled (or generated) reference for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub cables: Vec<CableTruth>,
    pub union: Mask,
}

impl GroundTruth {
    pub fn new(width: u32, height: u32, cables: Vec<CableTruth>) -> Result<Self> {
        let union = Mask::union_all(width, height, cables.iter().map(|c| &c.mask))?;
        Ok(Self { cables, union })
    }

    pub fn cable_count(&self) -> usize {
        self.cables.len()
    }

    pub fn dims(&self) -> (u32, u32) {
        self.union.dims()
    }

    /// Centerline endpoints of every cable, in cable order.
    pub fn endpoints(&self) -> Vec<[Point2; 2]> {
        self.cables.iter().filter(|c| !c.points.is_empty()).map(|c| [c.points[0], *c.points.last().unwrap()]).collect()
    }
}

/// Wall time per pipeline stage, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub superpixel_ms: f64,
    pub graph_ms: f64,
    pub walking_ms: f64,
    pub spline_ms: f64,
    pub total_ms: f64,
    /// Walk extension steps taken.
    pub iterations: usize,
    /// Mean wall time of one extension step.
    pub mean_iteration_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEval {
    pub name: String,
    pub cable_count: usize,
    /// Union-mask IoU.
    pub iou: f64,
    /// Best IoU of any predicted object against each cable.
    pub per_cable_iou: Vec<f64>,
    pub predicted_objects: usize,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub images: Vec<ImageEval>,
    pub weighted_iou: f64,
    pub mean_timings: StageTimings,
}

/// Inputs for one evaluated image.
#[derive(Debug, Clone, Copy)]
pub struct EvalCase<'a> {
    pub name: &'a str,
    pub result: &'a SegmentationResult,
    pub truth: &'a GroundTruth,
    pub timings: StageTimings,
}

pub fn evaluate_image(case: &EvalCase<'_>) -> Result<ImageEval> {
    let iou_union = iou(&case.result.union, &case.truth.union)?;
    let per_cable_iou = case
        .truth
        .cables
        .iter()
        .map(|c| {
            case.result.objects.iter().map(|o| iou(&o.mask, &c.mask)).try_fold(0.0f64, |best, v| v.map(|v| best.max(v)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ImageEval {
        name: case.name.to_string(),
        cable_count: case.truth.cable_count(),
        iou: iou_union,
        per_cable_iou,
        predicted_objects: case.result.objects.len(),
        timings: case.timings,
    })
}

/// Evaluates aligned results and truths.
pub fn evaluate_run(results: &[SegmentationResult], truths: &[GroundTruth]) -> Result<EvalReport> {
    if results.len() != truths.len() {
        return Err(Error::InvalidParameter(format!("{} results for {} ground truths", results.len(), truths.len())));
    }
    let names: Vec<String> = (0..results.len()).map(|i| format!("{i:04}")).collect();
    let cases: Vec<EvalCase<'_>> = results
        .iter()
        .zip(truths)
        .zip(&names)
        .map(|((result, truth), name)| EvalCase { name, result, truth, timings: StageTimings::default() })
        .collect();
    evaluate_cases(&cases, Execution::default())
}

pub fn evaluate_cases(cases: &[EvalCase<'_>], exec: Execution) -> Result<EvalReport> {
    if cases.is_empty() {
        return Err(Error::Empty("no images to evaluate"));
    }
    let images = exec::map_slice(exec, cases, evaluate_image).into_iter().collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, f64)> = images.iter().map(|e| (e.cable_count.max(1), e.iou)).collect();
    let weighted = weighted_iou(&pairs)?;

    let n = images.len() as f64;
    let mut mean = StageTimings::default();
    for e in &images {
        let t = &e.timings;
        mean.superpixel_ms += t.superpixel_ms / n;
        mean.graph_ms += t.graph_ms / n;
        mean.walking_ms += t.walking_ms / n;
        mean.spline_ms += t.spline_ms / n;
        mean.total_ms += t.total_ms / n;
        mean.iterations += t.iterations;
    }
    let total_walk_ms: f64 = images.iter().map(|e| e.timings.mean_iteration_ms * e.timings.iterations as f64).sum();
    mean.mean_iteration_ms = if mean.iterations > 0 { total_walk_ms / mean.iterations as f64 } else { 0.0 };

    Ok(EvalReport { version: 1, images, weighted_iou: weighted, mean_timings: mean })
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<24} {:>6} {:>7} {:>8} {:>10}", "image", "cables", "IoU", "objects", "total ms");
        for e in &self.images {
            let _ = writeln!(
                out,
                "{:<24} {:>6} {:>7.3} {:>8} {:>10.1}",
                e.name, e.cable_count, e.iou, e.predicted_objects, e.timings.total_ms
            );
        }
        let t = &self.mean_timings;
        let _ = writeln!(out, "weighted IoU: {:.3}", self.weighted_iou);
        let _ = writeln!(
            out,
            "mean ms: superpixel {:.1}, graph {:.1}, walking {:.1}, spline {:.1}, total {:.1}",
            t.superpixel_ms, t.graph_ms, t.walking_ms, t.spline_ms, t.total_ms
        );
        let _ = writeln!(out, "iterations: {}, mean iteration {:.4} ms", t.iterations, t.mean_iteration_ms);
        out
    }
}
