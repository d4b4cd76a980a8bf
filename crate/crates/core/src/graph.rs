//! Region adjacency graph over superpixels, HSV color histograms, and
//! bounded-order neighborhood queries.

use std::collections::{HashSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::color::{rgb_to_hsv, HsvPixel};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::Point2;
use crate::raster::Image;
use crate::superpixel::{region_adjacency_pairs, SuperpixelMap};

pub const DEFAULT_BINS: usize = 8;
pub const DEFAULT_ORDER: usize = 3;
const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Joint HSV histogram with `bins_per_channel³` cells, indexed
/// `(h * n + s) * n + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorHistogram {
    bins_per_channel: usize,
    bins: Vec<f64>,
    normalized: bool,
}

impl ColorHistogram {
    pub fn new(bins_per_channel: usize) -> Self {
        Self { bins_per_channel, bins: vec![0.0; bins_per_channel.pow(3)], normalized: false }
    }

    /// Wraps raw bin values. The histogram is flagged normalized when the mass
    /// sums to one.
    pub fn from_bins(bins_per_channel: usize, bins: Vec<f64>) -> Result<Self> {
        if bins.len() != bins_per_channel.pow(3) {
            return Err(Error::HistogramShape(bins.len(), bins_per_channel.pow(3)));
        }
        if bins.iter().any(|&b| !(b.is_finite() && b >= 0.0)) {
            return Err(Error::InvalidParameter("histogram bins must be finite and >= 0".into()));
        }
        let total: f64 = bins.iter().sum();
        Ok(Self { bins_per_channel, bins, normalized: (total - 1.0).abs() <= NORMALIZATION_TOLERANCE })
    }

    pub fn bins_per_channel(&self) -> usize {
        self.bins_per_channel
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Cell index of an HSV value. Values on the upper edge fall into the last bin.
    pub fn bin_index(bins_per_channel: usize, hsv: HsvPixel) -> usize {
        let n = bins_per_channel;
        let q = |v: f64| ((v * n as f64).floor().max(0.0) as usize).min(n - 1);
        (q(hsv.h / 360.0) * n + q(hsv.s)) * n + q(hsv.v)
    }

    pub fn add(&mut self, hsv: HsvPixel, weight: f64) {
        let i = Self::bin_index(self.bins_per_channel, hsv);
        self.bins[i] += weight;
        self.normalized = false;
    }

    /// Scales the mass to one. An empty histogram stays empty and unnormalized.
    pub fn normalize(&mut self) {
        let total: f64 = self.bins.iter().sum();
        if total > 0.0 {
            self.bins.iter_mut().for_each(|b| *b /= total);
            self.normalized = true;
        }
    }
}

/// Histogram intersection `Σ min(a, b)` of two normalized histograms.
pub fn histogram_similarity(a: &ColorHistogram, b: &ColorHistogram) -> Result<f64> {
    if a.bins.len() != b.bins.len() {
        return Err(Error::HistogramShape(a.bins.len(), b.bins.len()));
    }
    if !a.normalized || !b.normalized {
        return Err(Error::UnnormalizedHistogram);
    }
    let s: f64 = a.bins.iter().zip(&b.bins).map(|(x, y)| x.min(*y)).sum();
    Ok(s.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: u32,
    pub centroid: Point2,
    pub area: usize,
    pub histogram: ColorHistogram,
    pub mean_rgb: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodEntry {
    pub vertex: u32,
    pub hop_order: u32,
}

/// Undirected, unweighted adjacency graph with one vertex per superpixel.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGraph {
    vertices: Vec<Vertex>,
    adjacency: Vec<Vec<u32>>,
    order: usize,
    seed_flags: Vec<bool>,
}

/// Builds the graph of `map`, computing per-region HSV histograms from `image`.
pub fn build_graph(image: &Image, map: &SuperpixelMap, bins: usize, order: usize) -> Result<RegionGraph> {
    build_graph_with(image, map, bins, order, Execution::default())
}

pub fn build_graph_with(
    image: &Image,
    map: &SuperpixelMap,
    bins: usize,
    order: usize,
    exec: Execution,
) -> Result<RegionGraph> {
    if bins < 2 {
        return Err(Error::InvalidParameter("histogram bins must be >= 2".into()));
    }
    if order < 1 {
        return Err(Error::InvalidParameter("graph order must be >= 1".into()));
    }
    if (map.width(), map.height()) != (image.width(), image.height()) {
        return Err(Error::DimensionMismatch(map.width(), map.height(), image.width(), image.height()));
    }
    let cells = exec::map_range(exec, image.pixel_count(), |i| {
        ColorHistogram::bin_index(bins, rgb_to_hsv(image.pixel_at(i))) as u32
    });
    let cube = bins.pow(3);
    let mut counts = vec![0u32; map.region_count() * cube];
    for (&label, &cell) in map.labels().iter().zip(&cells) {
        counts[label as usize * cube + cell as usize] += 1;
    }

    let vertices = map
        .regions()
        .iter()
        .map(|r| {
            let row = &counts[r.id as usize * cube..(r.id as usize + 1) * cube];
            let area = r.area as f64;
            let hist = row.iter().map(|&c| c as f64 / area).collect();
            let mut histogram = ColorHistogram::from_bins(bins, hist)?;
            histogram.normalized = true;
            Ok(Vertex { id: r.id, centroid: r.centroid, area: r.area, histogram, mean_rgb: r.mean_rgb })
        })
        .collect::<Result<Vec<_>>>()?;

    let edges: Vec<(u32, u32)> = region_adjacency_pairs(map).into_iter().collect();
    RegionGraph::from_parts(vertices, &edges, order)
}

impl RegionGraph {
    /// Assembles a graph from explicit vertices (ids must equal their index)
    /// and undirected edges.
    pub fn from_parts(vertices: Vec<Vertex>, edges: &[(u32, u32)], order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidParameter("graph order must be >= 1".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.id as usize != i {
                return Err(Error::InvalidParameter(format!("vertex {} stored at index {i}", v.id)));
            }
        }
        let n = vertices.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a as usize >= n {
                return Err(Error::UnknownVertex(a as usize));
            }
            if b as usize >= n {
                return Err(Error::UnknownVertex(b as usize));
            }
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop on vertex {a}")));
            }
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        Ok(Self { vertices, adjacency, order, seed_flags: vec![false; n] })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: u32) -> Result<&Vertex> {
        self.vertices.get(id as usize).ok_or(Error::UnknownVertex(id as usize))
    }

    pub fn neighbors(&self, id: u32) -> &[u32] {
        &self.adjacency[id as usize]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, adj)| adj.iter().filter(move |&&b| b > a as u32).map(move |&b| (a as u32, b)))
    }

    pub fn is_seed(&self, id: u32) -> bool {
        self.seed_flags.get(id as usize).copied().unwrap_or(false)
    }

    pub fn mark_seed(&mut self, id: u32) -> Result<()> {
        let flag = self.seed_flags.get_mut(id as usize).ok_or(Error::UnknownVertex(id as usize))?;
        *flag = true;
        Ok(())
    }

    /// Vertices within `max_order` hops of `vertex`, excluding `vertex` itself
    /// and anything in `excluded`, sorted by hop count then id. Excluded
    /// vertices are still traversed, so hop counts are true graph distances.
    pub fn neighborhood(&self, vertex: u32, max_order: usize, excluded: &[u32]) -> Result<Vec<NeighborhoodEntry>> {
        if vertex as usize >= self.vertices.len() {
            return Err(Error::UnknownVertex(vertex as usize));
        }
        if max_order > self.order {
            return Err(Error::InvalidParameter(format!("order {max_order} exceeds graph order {}", self.order)));
        }
        let mut seen = HashSet::with_capacity(64);
        seen.insert(vertex);
        let mut out = Vec::new();
        let mut frontier = vec![vertex];
        for hop in 1..=max_order as u32 {
            let mut next = Vec::new();
            for &v in &frontier {
                for &u in &self.adjacency[v as usize] {
                    if seen.insert(u) {
                        next.push(u);
                    }
                }
            }
            next.sort_unstable();
            out.extend(
                next.iter().filter(|u| !excluded.contains(u)).map(|&u| NeighborhoodEntry { vertex: u, hop_order: hop }),
            );
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(out)
    }

    /// Shortest hop count from `from` to every vertex (`None` if unreachable).
    pub fn hop_distances(&self, from: u32) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.vertices.len()];
        let mut queue = VecDeque::new();
        dist[from as usize] = Some(0);
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            let d = dist[v as usize].unwrap();
            for &u in &self.adjacency[v as usize] {
                if dist[u as usize].is_none() {
                    dist[u as usize] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            version: 1,
            order: self.order,
            bins_per_channel: self.vertices.first().map_or(DEFAULT_BINS, |v| v.histogram.bins_per_channel),
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexDocument {
                    id: v.id,
                    centroid: v.centroid,
                    area: v.area,
                    mean_rgb: v.mean_rgb,
                    seed: self.is_seed(v.id),
                    histogram: v
                        .histogram
                        .bins
                        .iter()
                        .enumerate()
                        .filter(|(_, &m)| m > 0.0)
                        .map(|(i, &m)| (i as u32, m))
                        .collect(),
                })
                .collect(),
            edges: self.edges().map(|(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_document(doc: &GraphDocument) -> Result<Self> {
        if doc.version != 1 {
            return Err(Error::Version(doc.version));
        }
        let cube = doc.bins_per_channel.pow(3);
        let vertices = doc
            .vertices
            .iter()
            .map(|v| {
                let mut bins = vec![0.0; cube];
                for &(i, m) in &v.histogram {
                    *bins.get_mut(i as usize).ok_or(Error::HistogramShape(i as usize, cube))? = m;
                }
                Ok(Vertex {
                    id: v.id,
                    centroid: v.centroid,
                    area: v.area,
                    histogram: ColorHistogram::from_bins(doc.bins_per_channel, bins)?,
                    mean_rgb: v.mean_rgb,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let edges: Vec<(u32, u32)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut graph = Self::from_parts(vertices, &edges, doc.order)?;
        for v in doc.vertices.iter().filter(|v| v.seed) {
            graph.mark_seed(v.id)?;
        }
        Ok(graph)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_vec(&self.to_document())?)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let doc: GraphDocument = serde_json::from_slice(&std::fs::read(path)?)?;
        Self::from_document(&doc)
    }
}

/// Versioned JSON form of a [`RegionGraph`]. Histograms are stored sparsely
/// as `(cell index, mass)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub version: u32,
    pub order: usize,
    pub bins_per_channel: usize,
    pub vertices: Vec<VertexDocument>,
    pub edges: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexDocument {
    pub id: u32,
    pub centroid: Point2,
    pub area: usize,
    pub mean_rgb: [f64; 3],
    #[serde(default)]
    pub seed: bool,
    pub histogram: Vec<(u32, f64)>,
}
