//! End-to-end segmentation: superpixels, region graph, walks, curve models.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::eval::StageTimings;
use crate::exec;
use crate::geometry::{polyline_length, Point2};
use crate::graph::{build_graph_with, RegionGraph};
use crate::model::{
    collapse_duplicates, estimate_thickness, estimate_thickness_per_length, fit_spline, render_mask, sample_spline,
    walk_color, SegmentationResult, SegmentedObject, SplineDocument, ThicknessStrategy,
};
use crate::raster::Image;
use crate::superpixel::{slic_segment, SuperpixelMap};
use crate::walker::{locate_seeds, run_walks, Seed, StepScore, Walk, WalkRun, WalkStatus, WalkerParams};

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub result: SegmentationResult,
    pub map: SuperpixelMap,
    pub graph: RegionGraph,
    pub seeds: Vec<Seed>,
    pub run: WalkRun,
    pub timings: StageTimings,
}

impl PipelineOutput {
    /// True when at least one walk connected two seeds.
    pub fn any_closed(&self) -> bool {
        !self.run.walks.is_empty()
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Points a curve is fitted through: the walk's region centroids, optionally
/// bracketed by the two seed points it connects.
pub fn fit_points(walk: &Walk, graph: &RegionGraph, seeds: &[Seed], anchor_seeds: bool) -> Vec<Point2> {
    let mut points = walk.centroids(graph);
    if anchor_seeds {
        points.insert(0, seeds[walk.seed_start()].source_point);
        if let Some(end) = walk.seed_end() {
            points.push(seeds[end].source_point);
        }
    }
    collapse_duplicates(&points)
}

/// Fits the curve model of one closed walk and rasterizes it.
pub fn model_walk(
    walk: &Walk,
    graph: &RegionGraph,
    seeds: &[Seed],
    config: &PipelineConfig,
    dims: (u32, u32),
) -> Result<SegmentedObject> {
    let points = fit_points(walk, graph, seeds, config.spline.anchor_seeds);
    if points.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: points.len() });
    }
    let degree = config.spline.degree.min(points.len() - 1);
    let mut spline = fit_spline(&points, degree)?;
    spline.thickness_px = match config.spline.thickness {
        ThicknessStrategy::SqrtArea => estimate_thickness(walk, graph),
        ThicknessStrategy::AreaPerLength => {
            let length = polyline_length(&sample_spline(&spline, config.spline.sample_gap_px));
            estimate_thickness_per_length(walk, graph, length)
        }
    };
    spline.color = walk_color(walk, graph);
    let mask = render_mask(&spline, dims);
    Ok(SegmentedObject {
        walk_id: walk.id,
        seed_start: walk.seed_start(),
        seed_end: walk.seed_end().unwrap_or(walk.seed_start()),
        spline,
        mask,
    })
}

/// Segments the objects connecting the given seed points.
///
/// Fails on fewer than two seeds or a seed outside the image. When no walk
/// closes the result has no objects; check [`PipelineOutput::any_closed`].
pub fn segment(image: &Image, seed_points: &[Point2], config: &PipelineConfig) -> Result<PipelineOutput> {
    let total = Instant::now();
    config.validate()?;
    if seed_points.len() < 2 {
        return Err(Error::InsufficientSeeds { needed: 2, got: seed_points.len() });
    }
    let (w, h) = (image.width(), image.height());
    for p in seed_points {
        let inside = p.is_finite() && p.x > -0.5 && p.y > -0.5 && p.x < w as f64 - 0.5 && p.y < h as f64 - 0.5;
        if !inside {
            return Err(Error::SeedOutOfBounds { x: p.x, y: p.y });
        }
    }

    let t = Instant::now();
    let map = slic_segment(image, &config.slic_params(w, h))?;
    let superpixel_ms = ms(t);

    let t = Instant::now();
    let mut graph = build_graph_with(image, &map, config.histogram_bins, config.graph_order, config.execution)?;
    let seeds = locate_seeds(&map, seed_points)?;
    for s in &seeds {
        graph.mark_seed(s.vertex)?;
    }
    let graph_ms = ms(t);

    let t = Instant::now();
    let run = run_walks(&graph, &seeds, &config.walker_params())?;
    let walking_ms = ms(t);

    let t = Instant::now();
    let objects =
        exec::map_slice(config.execution, &run.walks, |walk| model_walk(walk, &graph, &seeds, config, (w, h)))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
    let result = SegmentationResult::new(w, h, objects)?;
    let spline_ms = ms(t);

    let timings = StageTimings {
        superpixel_ms,
        graph_ms,
        walking_ms,
        spline_ms,
        total_ms: ms(total),
        iterations: run.total_steps,
        mean_iteration_ms: run.mean_step_time().as_secs_f64() * 1e3,
    };
    Ok(PipelineOutput { result, map, graph, seeds, run, timings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkRecord {
    pub id: usize,
    pub seed_start: usize,
    pub seed_end: Option<usize>,
    pub status: WalkStatus,
    pub vertices: Vec<u32>,
    pub centroids: Vec<Point2>,
    pub steps: usize,
    pub log_curvature_score: f64,
    pub mean_log_curvature: f64,
    pub mean_log_visual: f64,
    pub selection_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<StepScore>>,
}

/// Versioned walk dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalksDocument {
    pub version: u32,
    pub seeds: Vec<Seed>,
    pub termination_radius: f64,
    pub walks: Vec<WalkRecord>,
}

impl WalksDocument {
    pub fn new(output: &PipelineOutput, params: &WalkerParams, verbose: bool) -> Self {
        let walks = output
            .run
            .walks
            .iter()
            .map(|w| WalkRecord {
                id: w.id,
                seed_start: w.seed_start(),
                seed_end: w.seed_end(),
                status: w.status(),
                vertices: w.vertices().to_vec(),
                centroids: w.centroids(&output.graph),
                steps: w.steps(),
                log_curvature_score: w.log_curvature_score(),
                mean_log_curvature: w.mean_log_curvature(params.von_mises_m),
                mean_log_visual: w.mean_log_visual(),
                selection_score: w.selection_score(params),
                trace: verbose.then(|| w.trace().to_vec()),
            })
            .collect();
        Self { version: 1, seeds: output.seeds.clone(), termination_radius: output.run.termination_radius, walks }
    }
}

/// Versioned list of fitted object curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplinesDocument {
    pub version: u32,
    pub splines: Vec<SplineDocument>,
}

impl SplinesDocument {
    pub fn new(result: &SegmentationResult, max_gap_px: f64) -> Self {
        Self {
            version: 1,
            splines: result.objects.iter().map(|o| SplineDocument::from_model(&o.spline, max_gap_px)).collect(),
        }
    }
}

const OVERLAY_COLORS: [[u8; 3]; 6] =
    [[255, 0, 255], [0, 255, 255], [255, 255, 0], [0, 255, 0], [255, 128, 0], [0, 128, 255]];

/// The image with object masks tinted and walk centroids marked in white.
pub fn render_overlay(image: &Image, output: &PipelineOutput) -> Image {
    let mut out = image.clone();
    for (k, o) in output.result.objects.iter().enumerate() {
        let tint = OVERLAY_COLORS[k % OVERLAY_COLORS.len()];
        for y in 0..out.height() {
            for x in 0..out.width() {
                if o.mask.get(x, y) {
                    let p = out.pixel(x, y);
                    out.set_pixel(x, y, [0, 1, 2].map(|c| ((p[c] as u16 + tint[c] as u16) / 2) as u8));
                }
            }
        }
    }
    for walk in &output.run.walks {
        for c in walk.centroids(&output.graph) {
            let (cx, cy) = (c.x.round() as i64, c.y.round() as i64);
            for y in cy - 1..=cy + 1 {
                for x in cx - 1..=cx + 1 {
                    if x >= 0 && y >= 0 && (x as u32) < out.width() && (y as u32) < out.height() {
                        out.set_pixel(x as u32, y as u32, [255, 255, 255]);
                    }
                }
            }
        }
    }
    out
}
