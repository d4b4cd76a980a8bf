//! Walk lifecycle: start walks from every seed, extend until they reach
//! another seed, then keep the smoothest closed walk per seed.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{euclidean_distance, Point2};
use crate::graph::RegionGraph;
use crate::superpixel::SuperpixelMap;

use super::walk::{extend_walk, AbortReason, Seed, Walk, WalkStatus, WalkerParams};

/// Resolves seed points to the regions containing them. Seeds are numbered in
/// input order.
pub fn locate_seeds(map: &SuperpixelMap, points: &[Point2]) -> Result<Vec<Seed>> {
    points
        .iter()
        .enumerate()
        .map(|(id, &p)| {
            let vertex = map.region_at(p).ok_or(Error::SeedOutOfBounds { x: p.x, y: p.y })?;
            Ok(Seed { id, vertex, source_point: p })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: usize,
    pub started: usize,
    pub closed: usize,
    pub aborted: usize,
    /// Walk kept for this seed, if any closed.
    pub selected_walk: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct WalkRun {
    /// Surviving closed walks, one per connected seed pair, sorted by start
    /// seed then walk id.
    pub walks: Vec<Walk>,
    pub seed_reports: Vec<SeedReport>,
    /// Seeds for which no walk closed.
    pub unmatched_seeds: Vec<usize>,
    pub walks_started: usize,
    pub total_steps: usize,
    /// Summed wall time spent inside extension loops, across all walks.
    pub extension_time: Duration,
    pub termination_radius: f64,
}

impl WalkRun {
    pub fn mean_step_time(&self) -> Duration {
        if self.total_steps == 0 {
            Duration::ZERO
        } else {
            self.extension_time / self.total_steps as u32
        }
    }
}

/// Mean superpixel spacing of a graph, `sqrt(total area / vertex count)`.
pub fn mean_spacing(graph: &RegionGraph) -> f64 {
    let total: usize = graph.vertices().iter().map(|v| v.area).sum();
    (total as f64 / graph.vertex_count().max(1) as f64).sqrt()
}

/// Other seed closest to `p` within `radius`, or whose region is `vertex`.
fn closing_seed(seeds: &[Seed], own: usize, vertex: u32, p: Point2, radius: f64) -> Option<usize> {
    seeds
        .iter()
        .filter(|s| s.id != own)
        .map(|s| (s, euclidean_distance(p, s.source_point)))
        .filter(|&(s, d)| d < radius || s.vertex == vertex)
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.id.cmp(&b.0.id)))
        .map(|(s, _)| s.id)
}

fn drive(
    mut walk: Walk,
    graph: &RegionGraph,
    seeds: &[Seed],
    params: &WalkerParams,
    radius: f64,
) -> Result<(Walk, Duration)> {
    let started = Instant::now();
    let check = |w: &mut Walk| {
        let last = w.last();
        let p = graph.vertices()[last as usize].centroid;
        if let Some(end) = closing_seed(seeds, w.seed_start(), last, p, radius) {
            w.close(end);
        }
    };
    check(&mut walk);
    while walk.status() == WalkStatus::Active {
        if walk.steps() >= params.max_steps {
            walk.abort(AbortReason::StepLimit);
            break;
        }
        if extend_walk(&mut walk, graph, params)?.is_some() {
            check(&mut walk);
        }
    }
    Ok((walk, started.elapsed()))
}

/// Runs every walk and selects the survivors.
///
/// Each seed starts one walk towards every vertex within `initial_order`
/// hops. A walk closes once its current centroid lies within the
/// termination radius of another seed (or enters another seed's region).
/// Per seed, the closed walk with the best selection score is kept; when
/// both directions of a seed pair survive, the better scoring one wins.
pub fn run_walks(graph: &RegionGraph, seeds: &[Seed], params: &WalkerParams) -> Result<WalkRun> {
    params.validate()?;
    if seeds.len() < 2 {
        return Err(Error::InsufficientSeeds { needed: 2, got: seeds.len() });
    }
    if params.graph_order > graph.order() {
        return Err(Error::InvalidParameter(format!(
            "walker order {} exceeds graph order {}",
            params.graph_order,
            graph.order()
        )));
    }
    for (i, s) in seeds.iter().enumerate() {
        graph.vertex(s.vertex)?;
        if s.id != i {
            return Err(Error::InvalidParameter(format!("seed {} stored at index {i}", s.id)));
        }
    }
    let radius = params.termination_radius_px.unwrap_or_else(|| 2.0 * mean_spacing(graph));

    let mut initial = Vec::new();
    for seed in seeds {
        let start = graph.vertex(seed.vertex)?.centroid;
        for entry in graph.neighborhood(seed.vertex, params.initial_order, &[])? {
            if graph.vertices()[entry.vertex as usize].centroid == start {
                continue;
            }
            let mut walk = Walk::new(initial.len(), seed.id, seed.vertex);
            walk.push(entry.vertex, graph, params)?;
            initial.push(walk);
        }
    }
    let walks_started = initial.len();

    let finished = exec::map_slice(params.execution, &initial, |w| drive(w.clone(), graph, seeds, params, radius))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let total_steps = finished.iter().map(|(w, _)| w.steps()).sum();
    let extension_time = finished.iter().map(|(_, t)| *t).sum();
    let finished: Vec<Walk> = finished.into_iter().map(|(w, _)| w).collect();

    let mut seed_reports = Vec::with_capacity(seeds.len());
    let mut selected: Vec<&Walk> = Vec::new();
    for seed in seeds {
        let own: Vec<&Walk> = finished.iter().filter(|w| w.seed_start() == seed.id).collect();
        let closed: Vec<&Walk> = own.iter().copied().filter(|w| w.status() == WalkStatus::Closed).collect();
        let best = closed.iter().copied().fold(None, |best: Option<&Walk>, w| match best {
            Some(b) if b.selection_score(params) >= w.selection_score(params) => Some(b),
            _ => Some(w),
        });
        seed_reports.push(SeedReport {
            seed: seed.id,
            started: own.len(),
            closed: closed.len(),
            aborted: own.iter().filter(|w| w.status() == WalkStatus::Aborted).count(),
            selected_walk: best.map(|w| w.id),
        });
        selected.extend(best);
    }

    // One walk per unordered seed pair.
    let mut by_pair: BTreeMap<(usize, usize), &Walk> = BTreeMap::new();
    for w in selected {
        let end = w.seed_end().expect("closed walks have an end seed");
        let key = (w.seed_start().min(end), w.seed_start().max(end));
        match by_pair.get(&key) {
            Some(kept) if kept.selection_score(params) >= w.selection_score(params) => {}
            _ => {
                by_pair.insert(key, w);
            }
        }
    }
    let mut walks: Vec<Walk> = by_pair.into_values().cloned().collect();
    walks.sort_by_key(|w| (w.seed_start(), w.id));

    let unmatched_seeds = seed_reports.iter().filter(|r| r.selected_walk.is_none()).map(|r| r.seed).collect();

    Ok(WalkRun {
        walks,
        seed_reports,
        unmatched_seeds,
        walks_started,
        total_steps,
        extension_time,
        termination_radius: radius,
    })
}
