//! SLIC over-segmentation: k-means in joint CIELAB + image-plane space with a
//! compactness trade-off, followed by connectivity enforcement.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::color::{rgb_to_lab, LabPixel};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::Point2;
use crate::raster::Image;

/// Rows per accumulation band. Fixed so that per-center sums are combined in
/// the same order regardless of the execution strategy.
const BAND_ROWS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlicParams {
    /// Target number of superpixels K.
    pub region_count: usize,
    pub compactness: f64,
    pub max_iterations: usize,
    /// Components smaller than this fraction of S² are merged away.
    pub min_region_fraction: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SlicParams {
    fn default() -> Self {
        Self {
            region_count: 1024,
            compactness: 10.0,
            max_iterations: 10,
            min_region_fraction: 0.25,
            execution: Execution::default(),
        }
    }
}

impl SlicParams {
    pub fn with_region_count(region_count: usize) -> Self {
        Self { region_count, ..Self::default() }
    }

    /// Default region count for an image: one superpixel per 300 pixels.
    pub fn default_region_count(width: u32, height: u32) -> usize {
        ((width as usize * height as usize) / 300).max(2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.region_count < 2 {
            return Err(Error::InvalidParameter("region_count must be >= 2".into()));
        }
        if !(self.compactness > 0.0 && self.compactness.is_finite()) {
            return Err(Error::InvalidParameter("compactness must be > 0".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if !(self.min_region_fraction >= 0.0 && self.min_region_fraction.is_finite()) {
            return Err(Error::InvalidParameter("min_region_fraction must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub id: u32,
    pub centroid: Point2,
    pub area: usize,
    pub mean_lab: LabPixel,
    pub mean_rgb: [f64; 3],
}

/// Label field plus per-region statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelMap {
    width: u32,
    height: u32,
    labels: Vec<u32>,
    regions: Vec<RegionStats>,
    grid_interval: f64,
}

impl SuperpixelMap {
    /// Builds a map from an explicit label field. Labels must be dense in
    /// `0..n`; region statistics are computed from `image`.
    pub fn from_labels(image: &Image, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != image.pixel_count() {
            return Err(Error::InvalidParameter("label field size mismatch".into()));
        }
        let n = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut seen = vec![false; n];
        labels.iter().for_each(|&l| seen[l as usize] = true);
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameter("labels are not dense".into()));
        }
        let regions = region_stats(image, &labels, n, Execution::Sequential);
        let grid_interval = (image.pixel_count() as f64 / n as f64).sqrt();
        Ok(Self { width: image.width(), height: image.height(), labels, regions, grid_interval })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn regions(&self) -> &[RegionStats] {
        &self.regions
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    /// Grid interval S used to seed the clustering.
    pub fn grid_interval(&self) -> f64 {
        self.grid_interval
    }

    /// Mean spacing between superpixels actually produced.
    pub fn mean_spacing(&self) -> f64 {
        (self.labels.len() as f64 / self.regions.len() as f64).sqrt()
    }

    #[inline]
    pub fn label(&self, x: u32, y: u32) -> u32 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    /// Region containing the pixel nearest to `p`, if `p` lies in the image.
    pub fn region_at(&self, p: Point2) -> Option<u32> {
        let x = p.x.round();
        let y = p.y.round();
        if !p.is_finite() || x < 0.0 || y < 0.0 || x >= self.width as f64 || y >= self.height as f64 {
            return None;
        }
        Some(self.label(x as u32, y as u32))
    }

    /// Copy of `image` with region boundaries painted in `color`.
    pub fn boundary_overlay(&self, image: &Image, color: [u8; 3]) -> Image {
        let mut out = image.clone();
        let (w, h) = (self.width, self.height);
        for y in 0..h {
            for x in 0..w {
                let l = self.label(x, y);
                let edge = (x + 1 < w && self.label(x + 1, y) != l) || (y + 1 < h && self.label(x, y + 1) != l);
                if edge {
                    out.set_pixel(x, y, color);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Center {
    lab: [f64; 3],
    x: f64,
    y: f64,
}

/// Segments `image` into roughly `params.region_count` connected superpixels.
pub fn slic_segment(image: &Image, params: &SlicParams) -> Result<SuperpixelMap> {
    params.validate()?;
    let n_pixels = image.pixel_count();
    if params.region_count > n_pixels {
        return Err(Error::InvalidParameter(format!(
            "region_count {} exceeds pixel count {n_pixels}",
            params.region_count
        )));
    }
    let exec = params.execution;
    let width = image.width() as usize;
    let height = image.height() as usize;

    let lab: Vec<[f64; 3]> = exec::map_range(exec, n_pixels, |i| {
        let p = rgb_to_lab(image.pixel_at(i));
        [p.l, p.a, p.b]
    });

    let s = (n_pixels as f64 / params.region_count as f64).sqrt();
    let mut centers = seed_centers(&lab, width, height, s, params.region_count);
    let spatial_weight = (params.compactness / s).powi(2);

    let mut labels = vec![u32::MAX; n_pixels];
    for _ in 0..params.max_iterations {
        let grid = CenterGrid::new(&centers, s, width, height);
        let mut next = vec![0u32; n_pixels];
        exec::for_each_chunk_mut(exec, &mut next, width, |y, row| {
            for (x, out) in row.iter_mut().enumerate() {
                *out = assign_pixel(&lab[y * width + x], x, y, &centers, &grid, s, spatial_weight);
            }
        });

        let changed = next != labels;
        labels = next;
        let sums = accumulate(
            exec,
            width,
            height,
            centers.len(),
            |i, acc: &mut [f64; 6]| {
                let l = &lab[i];
                acc[0] += l[0];
                acc[1] += l[1];
                acc[2] += l[2];
                acc[3] += (i % width) as f64;
                acc[4] += (i / width) as f64;
                acc[5] += 1.0;
            },
            &labels,
        );
        for (c, acc) in centers.iter_mut().zip(&sums) {
            if acc[5] > 0.0 {
                let n = acc[5];
                *c = Center { lab: [acc[0] / n, acc[1] / n, acc[2] / n], x: acc[3] / n, y: acc[4] / n };
            }
        }
        if !changed {
            break;
        }
    }

    let min_size = (params.min_region_fraction * s * s).floor() as usize;
    let (labels, count) = enforce_connectivity(&labels, width, height, min_size);
    let regions = region_stats(image, &labels, count, exec);
    Ok(SuperpixelMap { width: image.width(), height: image.height(), labels, regions, grid_interval: s })
}

fn seed_centers(lab: &[[f64; 3]], width: usize, height: usize, s: f64, k: usize) -> Vec<Center> {
    let nx = ((width as f64 / s).round() as usize).clamp(1, width);
    let ny = ((height as f64 / s).round() as usize).clamp(1, height);
    // At least two centers on degenerate aspect ratios.
    let (nx, ny) = match (nx * ny < 2.min(k), width >= 2) {
        (true, true) => (2, ny),
        (true, false) => (nx, 2.min(height)),
        _ => (nx, ny),
    };
    let step_x = width as f64 / nx as f64;
    let step_y = height as f64 / ny as f64;

    let at = |x: usize, y: usize| &lab[y * width + x];
    let gradient = |x: usize, y: usize| {
        let xl = x.saturating_sub(1);
        let xr = (x + 1).min(width - 1);
        let yu = y.saturating_sub(1);
        let yd = (y + 1).min(height - 1);
        sq_dist3(at(xr, y), at(xl, y)) + sq_dist3(at(x, yd), at(x, yu))
    };

    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            // Cell center in pixel-center coordinates; the center keeps this
            // position unless the gradient search moves it to another pixel.
            let fx = (i as f64 + 0.5) * step_x - 0.5;
            let fy = (j as f64 + 0.5) * step_y - 0.5;
            let cx = fx.round().clamp(0.0, (width - 1) as f64) as usize;
            let cy = fy.round().clamp(0.0, (height - 1) as f64) as usize;
            let (mut bx, mut by) = (cx, cy);
            let mut best = gradient(cx, cy);
            for y in cy.saturating_sub(1)..=(cy + 1).min(height - 1) {
                for x in cx.saturating_sub(1)..=(cx + 1).min(width - 1) {
                    let g = gradient(x, y);
                    if g < best {
                        best = g;
                        bx = x;
                        by = y;
                    }
                }
            }
            let moved = (bx, by) != (cx, cy);
            centers.push(Center {
                lab: *at(bx, by),
                x: if moved { bx as f64 } else { fx },
                y: if moved { by as f64 } else { fy },
            });
        }
    }
    centers
}

#[inline]
fn sq_dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

/// Bucket grid over center positions with cell size S, so each pixel only
/// visits centers whose 2S x 2S window can contain it.
struct CenterGrid {
    cell: f64,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<u32>>,
}

impl CenterGrid {
    fn new(centers: &[Center], s: f64, width: usize, height: usize) -> Self {
        let cols = (width as f64 / s).floor() as usize + 1;
        let rows = (height as f64 / s).floor() as usize + 1;
        let mut cells = vec![Vec::new(); cols * rows];
        for (id, c) in centers.iter().enumerate() {
            let cx = ((c.x / s).floor() as usize).min(cols - 1);
            let cy = ((c.y / s).floor() as usize).min(rows - 1);
            cells[cy * cols + cx].push(id as u32);
        }
        Self { cell: s, cols, rows, cells }
    }

    fn for_each_near(&self, x: f64, y: f64, reach: f64, mut f: impl FnMut(u32)) {
        let clamp = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n - 1);
        let x0 = clamp((x - reach) / self.cell, self.cols);
        let x1 = clamp((x + reach) / self.cell, self.cols);
        let y0 = clamp((y - reach) / self.cell, self.rows);
        let y1 = clamp((y + reach) / self.cell, self.rows);
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                self.cells[cy * self.cols + cx].iter().for_each(|&id| f(id));
            }
        }
    }
}

fn assign_pixel(
    lab: &[f64; 3],
    x: usize,
    y: usize,
    centers: &[Center],
    grid: &CenterGrid,
    s: f64,
    spatial_weight: f64,
) -> u32 {
    let (px, py) = (x as f64, y as f64);
    let dist = |c: &Center| {
        let dx = px - c.x;
        let dy = py - c.y;
        sq_dist3(lab, &c.lab) + spatial_weight * (dx * dx + dy * dy)
    };
    let consider = |best: &mut (f64, u32), id: u32, d: f64| {
        if d < best.0 || (d == best.0 && id < best.1) {
            *best = (d, id);
        }
    };
    let mut best = (f64::INFINITY, u32::MAX);
    grid.for_each_near(px, py, s, |id| {
        let c = &centers[id as usize];
        if (px - c.x).abs() <= s && (py - c.y).abs() <= s {
            consider(&mut best, id, dist(c));
        }
    });
    if best.1 == u32::MAX {
        // No window covers this pixel; fall back to a global search.
        for (id, c) in centers.iter().enumerate() {
            consider(&mut best, id as u32, dist(c));
        }
    }
    best.1
}

/// Per-label sums of `N` accumulators, computed over fixed row bands and
/// combined in band order.
fn accumulate<const N: usize>(
    exec: Execution,
    width: usize,
    height: usize,
    n_labels: usize,
    add: impl Fn(usize, &mut [f64; N]) + Sync + Send,
    labels: &[u32],
) -> Vec<[f64; N]> {
    let bands = height.div_ceil(BAND_ROWS);
    let partial = exec::map_range(exec, bands, |b| {
        let mut acc = vec![[0.0; N]; n_labels];
        let start = b * BAND_ROWS * width;
        let end = ((b + 1) * BAND_ROWS).min(height) * width;
        for i in start..end {
            add(i, &mut acc[labels[i] as usize]);
        }
        acc
    });
    let mut total = vec![[0.0; N]; n_labels];
    for band in partial {
        for (t, a) in total.iter_mut().zip(band) {
            t.iter_mut().zip(a).for_each(|(t, a)| *t += a);
        }
    }
    total
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }
}

/// Splits every label into 4-connected components and merges components
/// smaller than `min_size` into their largest adjacent component. Returns the
/// relabeled field (dense ids in first-appearance scan order) and the count.
pub(crate) fn enforce_connectivity(labels: &[u32], width: usize, height: usize, min_size: usize) -> (Vec<u32>, usize) {
    let n = labels.len();
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let label = labels[start];
        comp[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = (i % width, i / width);
            let mut visit = |j: usize| {
                if comp[j] == usize::MAX && labels[j] == label {
                    comp[j] = id;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < width {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - width);
            }
            if y + 1 < height {
                visit(i + width);
            }
        }
        sizes.push(size);
    }

    let m = sizes.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if x + 1 < width && comp[i] != comp[i + 1] {
                adj[comp[i]].insert(comp[i + 1]);
                adj[comp[i + 1]].insert(comp[i]);
            }
            if y + 1 < height && comp[i] != comp[i + width] {
                adj[comp[i]].insert(comp[i + width]);
                adj[comp[i + width]].insert(comp[i]);
            }
        }
    }

    let mut uf = UnionFind { parent: (0..m).collect() };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&c| (sizes[c], c));
    loop {
        let mut merged = false;
        for &c in &order {
            let r = uf.find(c);
            if sizes[r] >= min_size {
                continue;
            }
            let neighbors: BTreeSet<usize> = adj[r].iter().map(|&a| uf.find(a)).filter(|&a| a != r).collect();
            let Some(&target) = neighbors.iter().max_by_key(|&&a| (sizes[a], std::cmp::Reverse(a))) else {
                continue;
            };
            uf.parent[r] = target;
            sizes[target] += sizes[r];
            let moved = std::mem::take(&mut adj[r]);
            adj[target].extend(moved);
            merged = true;
        }
        if !merged {
            break;
        }
    }

    let mut dense = vec![u32::MAX; m];
    let mut next = 0u32;
    let mut out = vec![0u32; n];
    for i in 0..n {
        let r = uf.find(comp[i]);
        if dense[r] == u32::MAX {
            dense[r] = next;
            next += 1;
        }
        out[i] = dense[r];
    }
    (out, next as usize)
}

fn region_stats(image: &Image, labels: &[u32], count: usize, exec: Execution) -> Vec<RegionStats> {
    let width = image.width() as usize;
    let height = image.height() as usize;
    let sums = accumulate(
        exec,
        width,
        height,
        count,
        |i, acc: &mut [f64; 9]| {
            let p = image.pixel_at(i);
            let lab = rgb_to_lab(p);
            acc[0] += (i % width) as f64;
            acc[1] += (i / width) as f64;
            acc[2] += p[0] as f64;
            acc[3] += p[1] as f64;
            acc[4] += p[2] as f64;
            acc[5] += 1.0;
            acc[6] += lab.l;
            acc[7] += lab.a;
            acc[8] += lab.b;
        },
        labels,
    );
    sums.iter()
        .enumerate()
        .map(|(id, acc)| {
            let n = acc[5];
            RegionStats {
                id: id as u32,
                centroid: Point2::new(acc[0] / n, acc[1] / n),
                area: n as usize,
                mean_lab: LabPixel { l: acc[6] / n, a: acc[7] / n, b: acc[8] / n },
                mean_rgb: [acc[2] / n, acc[3] / n, acc[4] / n],
            }
        })
        .collect()
}

/// Unordered pairs `(j, k)`, `j < k`, of regions sharing a horizontal or
/// vertical pixel edge.
pub fn region_adjacency_pairs(map: &SuperpixelMap) -> BTreeSet<(u32, u32)> {
    let (w, h) = (map.width as usize, map.height as usize);
    let labels = &map.labels;
    let mut pairs = BTreeSet::new();
    let mut add = |a: u32, b: u32| {
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    };
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                add(labels[i], labels[i + 1]);
            }
            if y + 1 < h {
                add(labels[i], labels[i + w]);
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_components_get_distinct_labels() {
        // Label 0 appears in two separate columns.
        #[rustfmt::skip]
        let labels = vec![
            0, 1, 0,
            0, 1, 0,
        ];
        let (out, count) = enforce_connectivity(&labels, 3, 2, 0);
        assert_eq!(count, 3);
        assert_eq!(out, vec![0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn small_components_merge_into_largest_neighbor() {
        #[rustfmt::skip]
        let labels = vec![
            0, 0, 0, 1, 1,
            0, 2, 0, 1, 1,
            0, 0, 0, 1, 1,
        ];
        let (out, count) = enforce_connectivity(&labels, 5, 3, 2);
        assert_eq!(count, 2);
        assert_eq!(out[6], out[0]);
        assert_ne!(out[3], out[0]);
    }

    #[test]
    fn rejects_bad_parameters() {
        let img = Image::filled(8, 8, [10, 20, 30]).unwrap();
        assert!(slic_segment(&img, &SlicParams::with_region_count(65)).is_err());
        assert!(slic_segment(&img, &SlicParams::with_region_count(1)).is_err());
        let mut p = SlicParams::with_region_count(4);
        p.compactness = 0.0;
        assert!(slic_segment(&img, &p).is_err());
        p.compactness = 10.0;
        p.max_iterations = 0;
        assert!(slic_segment(&img, &p).is_err());
    }

    #[test]
    fn region_lookup_rounds_to_pixels() {
        let img = Image::from_fn(4, 2, |x, _| if x < 2 { [0, 0, 0] } else { [255, 255, 255] }).unwrap();
        let labels = vec![0, 0, 1, 1, 0, 0, 1, 1];
        let map = SuperpixelMap::from_labels(&img, labels).unwrap();
        assert_eq!(map.region_at(Point2::new(1.4, 0.0)), Some(0));
        assert_eq!(map.region_at(Point2::new(1.6, 1.0)), Some(1));
        assert_eq!(map.region_at(Point2::new(-0.6, 0.0)), None);
        assert_eq!(map.region_at(Point2::new(3.4, 1.4)), Some(1));
        assert_eq!(map.regions()[1].centroid, Point2::new(2.5, 0.5));
        assert_eq!(map.regions()[1].mean_rgb, [255.0; 3]);
    }
}
