//! Shared fixtures and independent reference implementations for the
//! integration tests. Nothing here calls the crate's own likelihood code.
#![allow(dead_code)]

use std::collections::VecDeque;

use cablewalk::graph::{ColorHistogram, RegionGraph, Vertex};
use cablewalk::walker::Walk;
use cablewalk::{Image, Point2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// I₀ by trapezoidal quadrature of `(1/π) ∫₀^π exp(m cos t) dt`. The
/// integrand is smooth and periodic, so the rule converges geometrically.
pub fn bessel_i0_quadrature(m: f64) -> f64 {
    let n = 2000;
    let h = std::f64::consts::PI / n as f64;
    let mut sum = 0.5 * (m.exp() + (-m).exp());
    for k in 1..n {
        sum += (m * (k as f64 * h).cos()).exp();
    }
    sum * h / std::f64::consts::PI
}

pub fn bradford_ref(x: f64, c: f64) -> f64 {
    c / ((1.0 + c).ln() * (1.0 + c * x))
}

pub fn von_mises_ref(theta: f64, m: f64) -> f64 {
    (m * theta.cos()).exp() / (2.0 * std::f64::consts::PI * bessel_i0_quadrature(m))
}

pub fn intersection_ref(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| if x < y { *x } else { *y }).sum()
}

/// Hop distances by plain BFS over an explicit edge list.
pub fn bfs_ref(n: usize, edges: &[(u32, u32)], from: u32) -> Vec<Option<u32>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a as usize].push(b as usize);
        adj[b as usize].push(a as usize);
    }
    let mut dist = vec![None; n];
    dist[from as usize] = Some(0);
    let mut q = VecDeque::from([from as usize]);
    while let Some(v) = q.pop_front() {
        for &u in &adj[v] {
            if dist[u].is_none() {
                dist[u] = Some(dist[v].unwrap() + 1);
                q.push_back(u);
            }
        }
    }
    dist
}

pub struct RandomGraph {
    pub graph: RegionGraph,
    pub edges: Vec<(u32, u32)>,
    pub bins: Vec<Vec<f64>>,
}

/// Connected random graph with distinct integer centroids and random
/// normalized 2×2×2 histograms.
pub fn random_graph(rng: &mut impl Rng, n: usize, extra_edges: usize) -> RandomGraph {
    let mut used = std::collections::HashSet::new();
    let mut centroids = Vec::new();
    while centroids.len() < n {
        let p = (rng.random_range(0..200i32), rng.random_range(0..200i32));
        if used.insert(p) {
            centroids.push(Point2::new(p.0 as f64, p.1 as f64));
        }
    }
    let bins: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..8).map(|_| rng.random_range(0..5u32) as f64).collect();
            let mut raw = raw;
            if raw.iter().all(|&v| v == 0.0) {
                raw[rng.random_range(0..8usize)] = 1.0;
            }
            let total: f64 = raw.iter().sum();
            raw.iter().map(|v| v / total).collect()
        })
        .collect();
    let mut edges = Vec::new();
    for i in 1..n as u32 {
        edges.push((rng.random_range(0..i), i));
    }
    for _ in 0..extra_edges {
        let a = rng.random_range(0..n as u32);
        let b = rng.random_range(0..n as u32);
        if a != b {
            edges.push((a, b));
        }
    }
    let vertices = (0..n)
        .map(|i| {
            let mut h = ColorHistogram::from_bins(2, bins[i].clone()).unwrap();
            if !h.is_normalized() {
                h.normalize();
            }
            Vertex { id: i as u32, centroid: centroids[i], area: 100, histogram: h, mean_rgb: [0.0; 3] }
        })
        .collect();
    let graph = RegionGraph::from_parts(vertices, &edges, 3).unwrap();
    let bins = graph.vertices().iter().map(|v| v.histogram.bins().to_vec()).collect();
    RandomGraph { graph, edges, bins }
}

/// Orientation difference wrapped into (−π, π].
pub fn wrapped(d: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut d = d % two_pi;
    if d > std::f64::consts::PI {
        d -= two_pi;
    } else if d <= -std::f64::consts::PI {
        d += two_pi;
    }
    d
}

/// Brute-force next-step choice: every vertex within `order` hops that is not
/// among the last `window` walk vertices and does not share the last
/// centroid, scored by the closed-form product of the three terms.
/// Returns `(vertex, p_visual, p_curvature, p_distance, p_total)` of the
/// winner, ties to the lower id.
pub fn brute_force_step(
    rg: &RandomGraph,
    walk: &[u32],
    order: u32,
    window: usize,
    c_v: f64,
    c_d: f64,
    m: f64,
) -> Option<(u32, f64, f64, f64, f64)> {
    let n = rg.graph.vertex_count();
    let last = *walk.last().unwrap();
    let c = |v: u32| rg.graph.vertices()[v as usize].centroid;
    let hops = bfs_ref(n, &rg.edges, last);
    let recent = &walk[walk.len().saturating_sub(window)..];
    let cands: Vec<u32> = (0..n as u32)
        .filter(|&v| v != last && hops[v as usize].is_some_and(|h| h >= 1 && h <= order))
        .filter(|v| !recent.contains(v))
        .filter(|&v| c(v) != c(last))
        .collect();
    if cands.is_empty() {
        return None;
    }
    let dist = |v: u32| ((c(v).x - c(last).x).powi(2) + (c(v).y - c(last).y).powi(2)).sqrt();
    let dmax = cands.iter().map(|&v| dist(v)).fold(0.0, f64::max);
    let prev_angle = (walk.len() >= 2).then(|| {
        let a = c(walk[walk.len() - 2]);
        let b = c(last);
        (b.y - a.y).atan2(b.x - a.x)
    });
    let mut best: Option<(u32, f64, f64, f64, f64)> = None;
    for &v in &cands {
        let pv = bradford_ref(1.0 - intersection_ref(&rg.bins[last as usize], &rg.bins[v as usize]), c_v);
        let angle = (c(v).y - c(last).y).atan2(c(v).x - c(last).x);
        let pc = prev_angle.map_or(1.0, |p| von_mises_ref(wrapped(p - angle) / 2.0, m));
        let pd = bradford_ref(dist(v) / dmax, c_d);
        let total = pv * pc * pd;
        if best.is_none_or(|b| total > b.4) {
            best = Some((v, pv, pc, pd, total));
        }
    }
    best
}

/// A walk built by appending `path` after `start` without scoring.
pub fn walk_along(graph: &RegionGraph, path: &[u32], params: &cablewalk::WalkerParams) -> Walk {
    let mut w = Walk::new(0, 0, path[0]);
    for &v in &path[1..] {
        w.push(v, graph, params).unwrap();
    }
    w
}

/// Random RGB image with smooth blobs, so SLIC has structure to follow.
pub fn random_image(seed: u64, width: u32, height: u32) -> Image {
    let mut r = rng(seed);
    let blobs: Vec<(f64, f64, f64, [f64; 3])> = (0..6)
        .map(|_| {
            (
                r.random_range(0.0..width as f64),
                r.random_range(0.0..height as f64),
                r.random_range(8.0..30.0),
                [r.random_range(0.0..255.0), r.random_range(0.0..255.0), r.random_range(0.0..255.0)],
            )
        })
        .collect();
    let noise: Vec<i32> = (0..width * height * 3).map(|_| r.random_range(-12..=12)).collect();
    Image::from_fn(width, height, |x, y| {
        let mut c = [128.0, 128.0, 128.0];
        for &(bx, by, rad, col) in &blobs {
            let d2 = (x as f64 - bx).powi(2) + (y as f64 - by).powi(2);
            let w = (-d2 / (2.0 * rad * rad)).exp();
            for k in 0..3 {
                c[k] = c[k] * (1.0 - w) + col[k] * w;
            }
        }
        let i = ((y * width + x) * 3) as usize;
        [0, 1, 2].map(|k| (c[k] as i32 + noise[i + k]).clamp(0, 255) as u8)
    })
    .unwrap()
}

/// Brute-force 4-connectivity check of every label's pixel set.
pub fn labels_connected(labels: &[u32], width: usize, height: usize) -> bool {
    let n_labels = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut seen = vec![false; labels.len()];
    let mut started = vec![false; n_labels];
    for start in 0..labels.len() {
        if seen[start] {
            continue;
        }
        let l = labels[start];
        if started[l as usize] {
            return false;
        }
        started[l as usize] = true;
        let mut q = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = q.pop_front() {
            let (x, y) = (i % width, i / width);
            let mut nb = Vec::with_capacity(4);
            if x > 0 {
                nb.push(i - 1);
            }
            if x + 1 < width {
                nb.push(i + 1);
            }
            if y > 0 {
                nb.push(i - width);
            }
            if y + 1 < height {
                nb.push(i + width);
            }
            for j in nb {
                if !seen[j] && labels[j] == l {
                    seen[j] = true;
                    q.push_back(j);
                }
            }
        }
    }
    true
}

/// Wraps an existing graph for the brute-force oracle.
pub fn oracle_view(graph: RegionGraph) -> RandomGraph {
    let edges = graph.edges().collect();
    let bins = graph.vertices().iter().map(|v| v.histogram.bins().to_vec()).collect();
    RandomGraph { graph, edges, bins }
}

/// Vertex with a single-bin histogram (bin `color` of a 2×2×2 grid).
pub fn solid_vertex(id: u32, x: f64, y: f64, color: usize, area: usize) -> Vertex {
    let mut bins = vec![0.0; 8];
    bins[color] = 1.0;
    Vertex {
        id,
        centroid: Point2::new(x, y),
        area,
        histogram: ColorHistogram::from_bins(2, bins).unwrap(),
        mean_rgb: [0.0; 3],
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Compares one `extend_walk` call against [`brute_force_step`]: same
/// vertex, every term within 1e-9 relative error.
pub fn check_step_against_oracle(rg: &RandomGraph, walk: &Walk, p: &cablewalk::WalkerParams) -> Result<(), String> {
    use cablewalk::walker::{extend_walk, WalkStatus};
    let oracle = brute_force_step(
        rg,
        walk.vertices(),
        p.graph_order as u32,
        p.backtrack_window,
        p.c_visual,
        p.c_distance,
        p.von_mises_m,
    );
    let mut w = walk.clone();
    let got = extend_walk(&mut w, &rg.graph, p).map_err(|e| e.to_string())?;
    match (oracle, got) {
        (None, None) if w.status() == WalkStatus::Aborted => Ok(()),
        (Some(o), Some(s)) => {
            if s.candidate != o.0 {
                return Err(format!("walker chose {}, oracle {}", s.candidate, o.0));
            }
            let terms = [(s.p_visual, o.1), (s.p_curvature, o.2), (s.p_distance, o.3), (s.p_total, o.4)];
            match terms.iter().find(|(a, b)| rel_err(*a, *b) > 1e-9) {
                Some((a, b)) => Err(format!("term {a} vs oracle {b}")),
                None => Ok(()),
            }
        }
        (Some(o), None) if o.4 < p.min_step_likelihood && w.status() == WalkStatus::Aborted => Ok(()),
        (o, s) => Err(format!("oracle {o:?}, walker {s:?}")),
    }
}

/// A random walk prefix of `len` vertices following graph edges.
pub fn random_path(rng: &mut impl Rng, graph: &RegionGraph, len: usize) -> Vec<u32> {
    let mut path = vec![rng.random_range(0..graph.vertex_count() as u32)];
    while path.len() < len {
        let nb = graph.neighbors(*path.last().unwrap());
        path.push(nb[rng.random_range(0..nb.len())]);
    }
    path
}
