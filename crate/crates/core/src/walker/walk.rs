use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{euclidean_distance, Point2};
use crate::graph::{histogram_similarity, RegionGraph};

use super::likelihood::{bradford_likelihood, edge_angle, log_von_mises, turn_half_angle, von_mises};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkerParams {
    /// Bradford shape of the visual term.
    pub c_visual: f64,
    /// Bradford shape of the distance term.
    pub c_distance: f64,
    /// Von Mises concentration of the curvature term.
    pub von_mises_m: f64,
    /// Neighborhood order searched for candidates.
    pub graph_order: usize,
    /// Neighborhood order of the initial walk directions around a seed.
    pub initial_order: usize,
    pub max_steps: usize,
    /// Closure radius around other seeds; `None` means twice the mean
    /// superpixel spacing.
    pub termination_radius_px: Option<f64>,
    pub min_step_likelihood: f64,
    /// Number of most recent walk vertices barred as candidates.
    pub backtrack_window: usize,
    /// How closed walks are ranked when picking survivors.
    pub selection: SelectionScore,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for WalkerParams {
    fn default() -> Self {
        Self {
            c_visual: 10.0,
            c_distance: 2.0,
            von_mises_m: 4.0,
            graph_order: 3,
            initial_order: 1,
            max_steps: 200,
            termination_radius_px: None,
            min_step_likelihood: 1e-6,
            backtrack_window: 2,
            selection: SelectionScore::default(),
            execution: Execution::default(),
        }
    }
}

impl WalkerParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0")))
            }
        };
        positive(self.c_visual, "c_visual")?;
        positive(self.c_distance, "c_distance")?;
        positive(self.von_mises_m, "von_mises_m")?;
        positive(self.min_step_likelihood, "min_step_likelihood")?;
        if let Some(r) = self.termination_radius_px {
            positive(r, "termination_radius_px")?;
        }
        if self.graph_order < 1 || self.max_steps < 1 || self.backtrack_window < 1 {
            return Err(Error::InvalidParameter("graph_order, max_steps and backtrack_window must be >= 1".into()));
        }
        if self.initial_order < 1 || self.initial_order > self.graph_order {
            return Err(Error::InvalidParameter("initial_order must be in 1..=graph_order".into()));
        }
        Ok(())
    }
}

/// Ranking of closed walks competing for the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionScore {
    /// Mean log von Mises term: the smoothest walk wins.
    Smoothness,
    /// Mean log von Mises term plus mean log visual term over every
    /// transition of the walk.
    #[default]
    Likelihood,
}

/// A walk endpoint: the region containing a clicked or detected point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub id: usize,
    pub vertex: u32,
    pub source_point: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkStatus {
    Active,
    Closed,
    Aborted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortReason {
    NoCandidates,
    BelowLikelihoodFloor,
    StepLimit,
}

/// Likelihood of one candidate extension. Values are densities and may exceed one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepScore {
    pub candidate: u32,
    pub hop_order: u32,
    pub p_visual: f64,
    pub p_curvature: f64,
    pub p_distance: f64,
    pub p_total: f64,
}

/// Ordered vertex sequence over the graph. Vertices may repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Walk {
    pub id: usize,
    vertices: Vec<u32>,
    seed_start: usize,
    seed_end: Option<usize>,
    status: WalkStatus,
    abort_reason: Option<AbortReason>,
    edge_angles: Vec<f64>,
    log_curvature_score: f64,
    curvature_terms: usize,
    log_visual_score: f64,
    steps: usize,
    /// Winning score of every extension step.
    trace: Vec<StepScore>,
}

impl Walk {
    pub fn new(id: usize, seed_start: usize, start_vertex: u32) -> Self {
        Self {
            id,
            vertices: vec![start_vertex],
            seed_start,
            seed_end: None,
            status: WalkStatus::Active,
            abort_reason: None,
            edge_angles: Vec::new(),
            log_curvature_score: 0.0,
            curvature_terms: 0,
            log_visual_score: 0.0,
            steps: 0,
            trace: Vec::new(),
        }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn last(&self) -> u32 {
        *self.vertices.last().expect("walk is never empty")
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn seed_start(&self) -> usize {
        self.seed_start
    }

    pub fn seed_end(&self) -> Option<usize> {
        self.seed_end
    }

    pub fn status(&self) -> WalkStatus {
        self.status
    }

    pub fn abort_reason(&self) -> Option<AbortReason> {
        self.abort_reason
    }

    pub fn edge_angles(&self) -> &[f64] {
        &self.edge_angles
    }

    /// Running `Σ log M(·)` over every angle-difference term of the walk.
    pub fn log_curvature_score(&self) -> f64 {
        self.log_curvature_score
    }

    pub fn curvature_terms(&self) -> usize {
        self.curvature_terms
    }

    /// Extension steps taken so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn trace(&self) -> &[StepScore] {
        &self.trace
    }

    /// Length-normalized smoothness: mean log von Mises term. Walks without
    /// any turn score as perfectly straight.
    pub fn mean_log_curvature(&self, m: f64) -> f64 {
        if self.curvature_terms == 0 {
            log_von_mises(0.0, m)
        } else {
            self.log_curvature_score / self.curvature_terms as f64
        }
    }

    /// Running `Σ log p_V` over every transition of the walk.
    pub fn log_visual_score(&self) -> f64 {
        self.log_visual_score
    }

    /// Mean log visual term per transition, 0 for a single-vertex walk.
    pub fn mean_log_visual(&self) -> f64 {
        let transitions = self.vertices.len() - 1;
        if transitions == 0 {
            0.0
        } else {
            self.log_visual_score / transitions as f64
        }
    }

    pub fn selection_score(&self, params: &WalkerParams) -> f64 {
        let smooth = self.mean_log_curvature(params.von_mises_m);
        match params.selection {
            SelectionScore::Smoothness => smooth,
            SelectionScore::Likelihood => smooth + self.mean_log_visual(),
        }
    }

    pub fn centroids(&self, graph: &RegionGraph) -> Vec<Point2> {
        self.vertices.iter().map(|&v| graph.vertices()[v as usize].centroid).collect()
    }

    /// Appends `vertex`, updating edge orientations and the running scores.
    pub fn push(&mut self, vertex: u32, graph: &RegionGraph, params: &WalkerParams) -> Result<()> {
        let p_visual = visual_likelihood(self, vertex, graph, params)?;
        let from = graph.vertex(self.last())?.centroid;
        let to = graph.vertex(vertex)?.centroid;
        let angle = edge_angle(from, to)?;
        if let Some(&prev) = self.edge_angles.last() {
            self.log_curvature_score += log_von_mises(turn_half_angle(prev, angle), params.von_mises_m);
            self.curvature_terms += 1;
        }
        self.log_visual_score += p_visual.ln();
        self.edge_angles.push(angle);
        self.vertices.push(vertex);
        Ok(())
    }

    pub fn close(&mut self, seed_end: usize) {
        self.status = WalkStatus::Closed;
        self.seed_end = Some(seed_end);
    }

    pub fn abort(&mut self, reason: AbortReason) {
        self.status = WalkStatus::Aborted;
        self.abort_reason = Some(reason);
    }

    /// The most recent `window` vertices.
    pub fn recent(&self, window: usize) -> &[u32] {
        &self.vertices[self.vertices.len().saturating_sub(window)..]
    }
}

pub fn visual_likelihood(walk: &Walk, candidate: u32, graph: &RegionGraph, params: &WalkerParams) -> Result<f64> {
    let last = &graph.vertex(walk.last())?.histogram;
    let next = &graph.vertex(candidate)?.histogram;
    let similarity = histogram_similarity(last, next)?;
    bradford_likelihood(1.0 - similarity, params.c_visual)
}

/// Curvature factor for ranking `candidate`: the single von Mises term of
/// the turn the new edge makes, or 1 when the extended walk is too short to
/// turn. Terms shared by all candidates are left out.
pub fn curvature_likelihood(walk: &Walk, candidate: u32, graph: &RegionGraph, params: &WalkerParams) -> Result<f64> {
    let from = graph.vertex(walk.last())?.centroid;
    let to = graph.vertex(candidate)?.centroid;
    let angle = edge_angle(from, to)?;
    Ok(match walk.edge_angles.last() {
        Some(&prev) => von_mises(turn_half_angle(prev, angle), params.von_mises_m),
        None => 1.0,
    })
}

/// Distance factor with the step distance normalized by the largest distance
/// in the candidate set.
pub fn distance_likelihood(
    walk: &Walk,
    candidate: u32,
    candidate_set: &[u32],
    graph: &RegionGraph,
    params: &WalkerParams,
) -> Result<f64> {
    if candidate_set.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if !candidate_set.contains(&candidate) {
        return Err(Error::InvalidParameter(format!("vertex {candidate} is not a candidate")));
    }
    let origin = graph.vertex(walk.last())?.centroid;
    let dist = |v: u32| graph.vertex(v).map(|x| euclidean_distance(origin, x.centroid));
    let mut max = 0.0f64;
    for &c in candidate_set {
        max = max.max(dist(c)?);
    }
    if max == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    bradford_likelihood(dist(candidate)? / max, params.c_distance)
}

/// Scores every admissible extension of `walk`. Candidates are the order-d
/// neighborhood of the last vertex minus the backtrack window, in ascending
/// (hop order, vertex id); candidates whose centroid coincides with the last
/// centroid have no direction and are skipped.
pub fn score_candidates(walk: &Walk, graph: &RegionGraph, params: &WalkerParams) -> Result<Vec<StepScore>> {
    let last = walk.last();
    let origin = graph.vertex(last)?.centroid;
    let entries = graph.neighborhood(last, params.graph_order, walk.recent(params.backtrack_window))?;
    let located: Vec<_> = entries
        .into_iter()
        .map(|e| (e, euclidean_distance(origin, graph.vertices()[e.vertex as usize].centroid)))
        .filter(|&(_, d)| d > 0.0)
        .collect();
    if located.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let max_distance = located.iter().map(|&(_, d)| d).fold(0.0, f64::max);

    located
        .into_iter()
        .map(|(entry, d)| {
            let p_visual = visual_likelihood(walk, entry.vertex, graph, params)?;
            let p_curvature = curvature_likelihood(walk, entry.vertex, graph, params)?;
            let p_distance = bradford_likelihood(d / max_distance, params.c_distance)?;
            Ok(StepScore {
                candidate: entry.vertex,
                hop_order: entry.hop_order,
                p_visual,
                p_curvature,
                p_distance,
                p_total: p_visual * p_curvature * p_distance,
            })
        })
        .collect()
}

/// Highest `p_total`, ties to the lowest vertex id.
pub fn select_best(scores: &[StepScore]) -> Option<&StepScore> {
    scores.iter().fold(None, |best: Option<&StepScore>, s| match best {
        Some(b) if b.p_total > s.p_total || (b.p_total == s.p_total && b.candidate < s.candidate) => Some(b),
        _ => Some(s),
    })
}

/// Greedy extension by the most likely candidate. Aborts the walk when there
/// is no candidate or the best likelihood falls under the floor. Returns the
/// winning score when the walk was extended.
pub fn extend_walk(walk: &mut Walk, graph: &RegionGraph, params: &WalkerParams) -> Result<Option<StepScore>> {
    if walk.status != WalkStatus::Active {
        return Ok(None);
    }
    let scores = match score_candidates(walk, graph, params) {
        Ok(s) => s,
        Err(Error::EmptyCandidates) => {
            walk.abort(AbortReason::NoCandidates);
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let best = *select_best(&scores).expect("candidate set is non-empty");
    if best.p_total < params.min_step_likelihood {
        walk.abort(AbortReason::BelowLikelihoodFloor);
        return Ok(None);
    }
    walk.push(best.candidate, graph, params)?;
    walk.steps += 1;
    walk.trace.push(best);
    Ok(Some(best))
}
