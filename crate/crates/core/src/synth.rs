//! Synthetic cable scenes with complete ground truth.
//!
//! Randomness is drawn as integers from a seeded ChaCha stream, and curve
//! geometry uses only field operations and square roots, so a given seed
//! yields the same bytes on every IEEE-754 platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{CableTruth, GroundTruth};
use crate::geometry::{euclidean_distance, Point2};
use crate::model::stroke_polyline;
use crate::raster::Image;

/// Samples per Bézier piece of a cable centerline.
const SAMPLES_PER_PIECE: usize = 32;

/// Saturated cable colors, pairwise distinct in hue or value.
pub const CABLE_PALETTE: [[u8; 3]; 8] = [
    [200, 30, 30],
    [30, 140, 50],
    [30, 60, 200],
    [235, 130, 20],
    [120, 40, 160],
    [25, 25, 25],
    [20, 160, 180],
    [210, 190, 20],
];

/// Light, desaturated desk-like backgrounds.
pub const BACKGROUND_PALETTE: [[u8; 3]; 5] =
    [[245, 245, 245], [225, 205, 170], [200, 200, 205], [215, 230, 240], [240, 225, 225]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    Uniform {
        color: [u8; 3],
    },
    Checkerboard {
        a: [u8; 3],
        b: [u8; 3],
        cell: u32,
    },
    /// Per-pixel uniform noise of ± `amplitude` around `base`.
    Noise {
        base: [u8; 3],
        amplitude: u8,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CableSpec {
    /// Control polygon of the cubic B-spline (rendered as a Bézier chain).
    pub control_polygon: Vec<Point2>,
    pub width_px: f64,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    /// Drawn in order; later cables cover earlier ones.
    pub cables: Vec<CableSpec>,
    pub background: Background,
    pub rng_seed: u64,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub image: Image,
    pub truth: GroundTruth,
    /// True centerline endpoints per cable.
    pub endpoints: Vec<[Point2; 2]>,
}

impl Scene {
    /// All endpoints flattened, cable `k` contributing seeds `2k` and `2k + 1`.
    pub fn seed_points(&self) -> Vec<Point2> {
        self.endpoints.iter().flat_map(|e| e.iter().copied()).collect()
    }
}

fn bezier(b: [Point2; 4], t: f64) -> Point2 {
    let s = 1.0 - t;
    let (c0, c1, c2, c3) = (s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t);
    Point2::new(
        c0 * b[0].x + c1 * b[1].x + c2 * b[2].x + c3 * b[3].x,
        c0 * b[0].y + c1 * b[1].y + c2 * b[2].y + c3 * b[3].y,
    )
}

impl CableSpec {
    /// Dense centerline: the uniform cubic B-spline of the control polygon
    /// with tripled end points, evaluated piecewise in Bézier form. Starts at
    /// the first and ends at the last control point.
    pub fn centerline(&self) -> Vec<Point2> {
        let p = &self.control_polygon;
        if p.len() < 2 {
            return p.clone();
        }
        let mut q = vec![p[0], p[0]];
        q.extend_from_slice(p);
        q.push(p[p.len() - 1]);
        q.push(p[p.len() - 1]);

        let third = |a: Point2, b: Point2| Point2::new((2.0 * a.x + b.x) / 3.0, (2.0 * a.y + b.y) / 3.0);
        let sixth =
            |a: Point2, b: Point2, c: Point2| Point2::new((a.x + 4.0 * b.x + c.x) / 6.0, (a.y + 4.0 * b.y + c.y) / 6.0);
        let mut out: Vec<Point2> = Vec::new();
        for w in q.windows(4) {
            let piece = [sixth(w[0], w[1], w[2]), third(w[1], w[2]), third(w[2], w[1]), sixth(w[1], w[2], w[3])];
            for k in 0..=SAMPLES_PER_PIECE {
                let pt = bezier(piece, k as f64 / SAMPLES_PER_PIECE as f64);
                if out.last() != Some(&pt) {
                    out.push(pt);
                }
            }
        }
        out
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::SceneBounds("empty image".into()));
        }
        for (k, c) in self.cables.iter().enumerate() {
            if c.width_px.is_nan() || c.width_px < 3.0 {
                return Err(Error::SceneBounds(format!("cable {k} is thinner than 3 px")));
            }
            if c.control_polygon.len() < 2 {
                return Err(Error::SceneBounds(format!("cable {k} needs two control points")));
            }
            let r = c.width_px / 2.0;
            let inside = |p: &Point2| {
                p.is_finite()
                    && p.x - r >= 0.0
                    && p.y - r >= 0.0
                    && p.x + r <= (self.width - 1) as f64
                    && p.y + r <= (self.height - 1) as f64
            };
            if !c.control_polygon.iter().all(inside) {
                return Err(Error::SceneBounds(format!("cable {k} leaves the image")));
            }
        }
        Ok(())
    }
}

fn render_background(spec: &SceneSpec) -> Result<Image> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    match &spec.background {
        Background::Uniform { color } => Image::filled(spec.width, spec.height, *color),
        Background::Checkerboard { a, b, cell } => {
            let cell = (*cell).max(1);
            Image::from_fn(spec.width, spec.height, |x, y| if (x / cell + y / cell) % 2 == 0 { *a } else { *b })
        }
        Background::Noise { base, amplitude } => {
            let amp = *amplitude as i32;
            Image::from_fn(spec.width, spec.height, |_, _| {
                base.map(|c| (c as i32 + rng.random_range(-amp..=amp)).clamp(0, 255) as u8)
            })
        }
    }
}

/// Renders the scene and its ground truth. The ground-truth masks use the
/// same stroke rasterizer as predicted masks.
pub fn generate_scene(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let dims = (spec.width, spec.height);
    let mut image = render_background(spec)?;
    let mut cables = Vec::with_capacity(spec.cables.len());
    let mut endpoints = Vec::with_capacity(spec.cables.len());
    for c in &spec.cables {
        let points = c.centerline();
        let mask = stroke_polyline(&points, c.width_px, dims);
        for y in 0..spec.height {
            for x in 0..spec.width {
                if mask.get(x, y) {
                    image.set_pixel(x, y, c.color);
                }
            }
        }
        endpoints.push([points[0], *points.last().unwrap()]);
        cables.push(CableTruth { mask, points });
    }
    let truth = GroundTruth::new(spec.width, spec.height, cables)?;
    Ok(Scene { image, truth, endpoints })
}

/// Families of random scenes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneKind {
    /// 1 to 3 well separated, non-crossing cables on a uniform background.
    Homogeneous,
    /// Two distinctly colored cables crossing once.
    Crossing,
    /// One cable looping over itself once.
    SelfCrossing,
    /// Turns up to 90° per control segment; violates the smoothness prior.
    Adversarial,
}

struct Draw {
    rng: ChaCha8Rng,
}

impl Draw {
    fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.random_range(lo..=hi.max(lo))
    }

    /// Unit vector within `max_tan_half` (tan of half the angle) of `axis`.
    fn direction_near(&mut self, axis: Point2, max_tan_half_milli: i64) -> Point2 {
        let k = self.int(-max_tan_half_milli, max_tan_half_milli);
        rotate(axis, k)
    }

    fn direction(&mut self) -> Point2 {
        loop {
            let a = self.int(-1000, 1000) as f64;
            let b = self.int(-1000, 1000) as f64;
            let n = (a * a + b * b).sqrt();
            if n > 100.0 {
                return Point2::new(a / n, b / n);
            }
        }
    }
}

/// Rotation by `2·atan(k / 1000)` using the rational half-angle form.
fn rotate(d: Point2, k_milli: i64) -> Point2 {
    let t = k_milli as f64 / 1000.0;
    let den = 1.0 + t * t;
    let c = (1.0 - t * t) / den;
    let s = 2.0 * t / den;
    Point2::new(c * d.x - s * d.y, s * d.x + c * d.y)
}

fn dot(a: Point2, b: Point2) -> f64 {
    a.x * b.x + a.y * b.y
}

/// tan(22.5°) in thousandths: turns of at most 45°.
const TURN_45: i64 = 414;
/// tan(45°) in thousandths: turns of at most 90°.
const TURN_90: i64 = 1000;

fn polyline_from(start: Point2, headings: &[(Point2, f64)]) -> Vec<Point2> {
    let mut pts = vec![start];
    let mut p = start;
    for &(d, len) in headings {
        p = Point2::new(p.x + d.x * len, p.y + d.y * len);
        pts.push(p);
    }
    pts
}

fn min_distance(a: &[Point2], b: &[Point2]) -> f64 {
    a.iter().flat_map(|p| b.iter().map(move |q| euclidean_distance(*p, *q))).fold(f64::INFINITY, f64::min)
}

fn segments_cross(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> bool {
    let cross = |o: Point2, p: Point2, q: Point2| (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
    let d1 = cross(b0, b1, a0);
    let d2 = cross(b0, b1, a1);
    let d3 = cross(a0, a1, b0);
    let d4 = cross(a0, a1, b1);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// Proper self-intersections of a polyline as `(i, j, |sin angle|)`.
fn self_crossings(line: &[Point2]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for i in 0..line.len().saturating_sub(1) {
        for j in i + 2..line.len() - 1 {
            if segments_cross(line[i], line[i + 1], line[j], line[j + 1]) {
                let a = line[i + 1] - line[i];
                let b = line[j + 1] - line[j];
                let sin = (a.x * b.y - a.y * b.x).abs() / (a.x.hypot(a.y) * b.x.hypot(b.y));
                out.push((i, j, sin));
            }
        }
    }
    out
}

fn spec_inside(poly: &[Point2], width_px: f64, w: u32, h: u32, margin: f64) -> bool {
    let r = width_px / 2.0 + margin;
    poly.iter().all(|p| p.x - r >= 0.0 && p.y - r >= 0.0 && p.x + r <= (w - 1) as f64 && p.y + r <= (h - 1) as f64)
}

const MAX_ATTEMPTS: usize = 10_000;

/// Draws a random scene of the given family. Deterministic in `seed`.
/// Separation constraints are tuned for images of 320×240 and larger.
pub fn random_scene(kind: SceneKind, seed: u64, width: u32, height: u32) -> SceneSpec {
    let mut draw = Draw { rng: ChaCha8Rng::seed_from_u64(seed) };
    let bg = BACKGROUND_PALETTE[draw.int(0, BACKGROUND_PALETTE.len() as i64 - 1) as usize];
    let mut colors: Vec<[u8; 3]> = CABLE_PALETTE.to_vec();
    // Deterministic shuffle.
    for i in (1..colors.len()).rev() {
        let j = draw.int(0, i as i64) as usize;
        colors.swap(i, j);
    }
    let cables = match kind {
        SceneKind::Homogeneous => homogeneous_cables(&mut draw, &colors, width, height),
        SceneKind::Crossing => crossing_cables(&mut draw, &colors, width, height),
        SceneKind::SelfCrossing => vec![self_crossing_cable(&mut draw, colors[0], width, height)],
        SceneKind::Adversarial => vec![free_cable(&mut draw, colors[0], width, height, TURN_90, None)],
    };
    SceneSpec { width, height, cables, background: Background::Uniform { color: bg }, rng_seed: seed }
}

/// A cable whose heading stays within `cone_cos` of its initial direction.
fn free_cable(draw: &mut Draw, color: [u8; 3], w: u32, h: u32, max_turn: i64, cone_cos: Option<f64>) -> CableSpec {
    for _ in 0..MAX_ATTEMPTS {
        let width_px = draw.int(8, 15) as f64;
        let segments = draw.int(3, 6) as usize;
        let margin = 60.min(w.min(h) as i64 / 4);
        let start =
            Point2::new(draw.int(margin, w as i64 - margin - 1) as f64, draw.int(margin, h as i64 - margin - 1) as f64);
        let initial = draw.direction();
        let mut d = initial;
        let mut steps = Vec::with_capacity(segments);
        let mut ok = true;
        for i in 0..segments {
            if i > 0 {
                d = draw.direction_near(d, max_turn);
            }
            if cone_cos.is_some_and(|c| dot(d, initial) < c) {
                ok = false;
                break;
            }
            steps.push((d, draw.int(50, 100) as f64));
        }
        if !ok {
            continue;
        }
        let poly = polyline_from(start, &steps);
        if !spec_inside(&poly, width_px, w, h, 4.0) {
            continue;
        }
        let spec = CableSpec { control_polygon: poly, width_px, color };
        let line = spec.centerline();
        if euclidean_distance(line[0], *line.last().unwrap()) < 150f64.min(0.4 * w.min(h) as f64) {
            continue;
        }
        return spec;
    }
    unreachable!("random cable generation exhausted its attempts")
}

fn homogeneous_cables(draw: &mut Draw, colors: &[[u8; 3]], w: u32, h: u32) -> Vec<CableSpec> {
    let count = draw.int(1, 3) as usize;
    let mut cables: Vec<CableSpec> = Vec::new();
    let mut lines: Vec<Vec<Point2>> = Vec::new();
    'cable: for &color in colors.iter().take(count) {
        for _ in 0..200 {
            // Heading within ±60° of the initial direction: no self-approach.
            let c = free_cable(draw, color, w, h, TURN_45, Some(0.5));
            let line = c.centerline();
            let ends = [line[0], *line.last().unwrap()];
            let clear = cables.iter().zip(&lines).all(|(o, ol)| {
                min_distance(&line, ol) >= (c.width_px + o.width_px) / 2.0 + 30.0
                    && min_distance(&ends, ol) >= 80.0
                    && min_distance(&[ol[0], *ol.last().unwrap()], &line) >= 80.0
            });
            if clear {
                lines.push(line);
                cables.push(c);
                continue 'cable;
            }
        }
        break;
    }
    cables
}

fn crossing_cables(draw: &mut Draw, colors: &[[u8; 3]], w: u32, h: u32) -> Vec<CableSpec> {
    let (wf, hf) = (w as f64, h as f64);
    // tan(15°): headings within ±30° of the sweep axis keep each cable
    // monotone along its axis, so the pair crosses exactly once at >= 30°.
    const CONE: i64 = 268;
    let cone_cos = 0.866;
    for _ in 0..MAX_ATTEMPTS {
        let make = |draw: &mut Draw, axis: Point2, start: Point2, span: f64, color: [u8; 3]| {
            let width_px = draw.int(8, 15) as f64;
            let segments = draw.int(4, 6) as usize;
            let mut d = draw.direction_near(axis, CONE / 2);
            let mut steps = Vec::new();
            let seg = span / segments as f64;
            for i in 0..segments {
                if i > 0 {
                    d = draw.direction_near(d, CONE);
                }
                if dot(d, axis) < cone_cos {
                    return None;
                }
                let len = seg * draw.int(85, 115) as f64 / 100.0;
                steps.push((d, len));
            }
            Some(CableSpec { control_polygon: polyline_from(start, &steps), width_px, color })
        };
        let a_start = Point2::new(draw_f(draw, 40.0, 0.15 * wf), draw_f(draw, 0.3 * hf, 0.7 * hf));
        let b_start = Point2::new(draw_f(draw, 0.35 * wf, 0.65 * wf), draw_f(draw, 30.0, 0.12 * hf));
        let a = make(draw, Point2::new(1.0, 0.0), a_start, 0.7 * wf, colors[0]);
        let b = make(draw, Point2::new(0.0, 1.0), b_start, 0.7 * hf, colors[1]);
        let (Some(a), Some(b)) = (a, b) else { continue };
        if !spec_inside(&a.control_polygon, a.width_px, w, h, 4.0)
            || !spec_inside(&b.control_polygon, b.width_px, w, h, 4.0)
        {
            continue;
        }
        let (la, lb) = (a.centerline(), b.centerline());
        let crossings = la
            .windows(2)
            .flat_map(|s| lb.windows(2).map(move |t| segments_cross(s[0], s[1], t[0], t[1])))
            .filter(|&c| c)
            .count();
        if crossings != 1 {
            continue;
        }
        let ends = |l: &[Point2]| [l[0], *l.last().unwrap()];
        if min_distance(&ends(&la), &lb) < 80.0 || min_distance(&ends(&lb), &la) < 80.0 {
            continue;
        }
        return if draw.int(0, 1) == 0 { vec![a, b] } else { vec![b, a] };
    }
    unreachable!("crossing generation exhausted its attempts")
}

fn draw_f(draw: &mut Draw, lo: f64, hi: f64) -> f64 {
    draw.int(lo as i64, hi as i64) as f64
}

/// sin(50°).
const SELF_CROSSING_MIN_SIN: f64 = 0.766;

fn self_crossing_cable(draw: &mut Draw, color: [u8; 3], w: u32, h: u32) -> CableSpec {
    for _ in 0..MAX_ATTEMPTS {
        let width_px = draw.int(8, 15) as f64;
        let sign = if draw.int(0, 1) == 0 { 1 } else { -1 };
        let start = Point2::new(draw_f(draw, 40.0, w as f64 - 41.0), draw_f(draw, 40.0, h as f64 - 41.0));
        let mut d = draw.direction();
        let mut steps = Vec::new();
        for _ in 0..2 {
            steps.push((d, draw.int(60, 90) as f64));
            d = draw.direction_near(d, 88);
        }
        let loop_len = draw.int(45, 60) as f64;
        for _ in 0..8 {
            // 33° to 40° per segment, all to one side: 267° to 317° in total.
            d = rotate(d, sign * draw.int(300, 360));
            steps.push((d, loop_len * draw.int(90, 110) as f64 / 100.0));
        }
        for _ in 0..2 {
            d = draw.direction_near(d, 88);
            steps.push((d, draw.int(60, 90) as f64));
        }
        let poly = polyline_from(start, &steps);
        if !spec_inside(&poly, width_px, w, h, 4.0) {
            continue;
        }
        let spec = CableSpec { control_polygon: poly, width_px, color };
        let line = spec.centerline();
        let crossings = self_crossings(&line);
        // The crossing angle equals the turn a shortcut across the loop would
        // take; below ~45° the two readings are ambiguous.
        if crossings.len() != 1 || crossings[0].2 < SELF_CROSSING_MIN_SIN {
            continue;
        }
        let (a, b) = (line[0], *line.last().unwrap());
        if euclidean_distance(a, b) < 120.0 {
            continue;
        }
        // Endpoints keep clear of the far parts of the cable.
        let n = line.len();
        let far_from_start = &line[n / 4..];
        let far_from_end = &line[..3 * n / 4];
        if min_distance(&[a], far_from_start) < 60.0 || min_distance(&[b], far_from_end) < 60.0 {
            continue;
        }
        return spec;
    }
    unreachable!("self-crossing generation exhausted its attempts")
}
