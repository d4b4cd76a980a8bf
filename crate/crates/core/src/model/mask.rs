use crate::geometry::{point_segment_distance, Point2};
use crate::raster::Mask;

use super::spline::{sample_spline, SplineModel};

/// Sets every pixel whose center lies within `width / 2` of the polyline
/// (round joins and caps). Pixels outside the image are clipped.
pub fn stroke_polyline(points: &[Point2], width_px: f64, dims: (u32, u32)) -> Mask {
    let (w, h) = dims;
    let mut mask = Mask::new(w, h);
    if points.is_empty() || w == 0 || h == 0 {
        return mask;
    }
    let r = width_px / 2.0;
    let segments: Vec<(Point2, Point2)> = if points.len() == 1 {
        vec![(points[0], points[0])]
    } else {
        points.windows(2).map(|s| (s[0], s[1])).collect()
    };
    for (a, b) in segments {
        let x0 = (a.x.min(b.x) - r).floor().max(0.0);
        let x1 = (a.x.max(b.x) + r).ceil().min(w as f64 - 1.0);
        let y0 = (a.y.min(b.y) - r).floor().max(0.0);
        let y1 = (a.y.max(b.y) + r).ceil().min(h as f64 - 1.0);
        if x0 > x1 || y0 > y1 {
            continue;
        }
        for y in y0 as u32..=y1 as u32 {
            for x in x0 as u32..=x1 as u32 {
                if !mask.get(x, y) && point_segment_distance(Point2::new(x as f64, y as f64), a, b) <= r {
                    mask.set(x, y, true);
                }
            }
        }
    }
    mask
}

/// Rasterizes the curve at its estimated thickness.
pub fn render_mask(model: &SplineModel, dims: (u32, u32)) -> Mask {
    stroke_polyline(&sample_spline(model, 1.0), model.thickness_px, dims)
}
