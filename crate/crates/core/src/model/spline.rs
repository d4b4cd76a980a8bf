//! Clamped least-squares B-spline fitting and de Boor evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

const RIDGE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineModel {
    pub degree: usize,
    /// Clamped, non-decreasing, on `[0, 1]`.
    pub knots: Vec<f64>,
    pub control_points: Vec<Point2>,
    pub thickness_px: f64,
    /// Mean RGB of the regions the curve was fitted to.
    pub color: [f64; 3],
}

/// Drops points that coincide with their predecessor.
pub fn collapse_duplicates(points: &[Point2]) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::with_capacity(points.len());
    for &p in points {
        if out.last().is_none_or(|&q| q.distance(p) > 1e-12) {
            out.push(p);
        }
    }
    out
}

fn chord_parameters(points: &[Point2]) -> Vec<f64> {
    let mut t = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    t.push(0.0);
    for w in points.windows(2) {
        acc += w[0].distance(w[1]);
        t.push(acc);
    }
    t.iter_mut().for_each(|v| *v /= acc);
    if let Some(last) = t.last_mut() {
        *last = 1.0;
    }
    t
}

/// Index `k` of the knot span `[knots[k], knots[k+1])` containing `u`, with
/// `u = 1` assigned to the last non-empty span.
fn find_span(knots: &[f64], degree: usize, u: f64) -> usize {
    let n = knots.len() - degree - 2;
    if u >= knots[n + 1] {
        return n;
    }
    let mut lo = degree;
    let mut hi = n + 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if u < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// The `degree + 1` basis functions non-zero on `span`, evaluated at `u`.
fn basis_functions(knots: &[f64], degree: usize, span: usize, u: f64) -> Vec<f64> {
    let mut n = vec![0.0; degree + 1];
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    n[0] = 1.0;
    for j in 1..=degree {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { n[r] / denom };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

/// Solves the symmetric positive definite system `a x = b` (two right-hand
/// sides) by Cholesky factorization restricted to the band `|i - j| <= band`.
/// Returns `None` when a pivot is not safely positive.
#[allow(clippy::needless_range_loop)]
fn banded_cholesky_solve(a: &[Vec<f64>], b: &[Point2], band: usize) -> Option<Vec<Point2>> {
    let n = a.len();
    let max_diag = a.iter().enumerate().map(|(i, r)| r[i]).fold(0.0, f64::max);
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        let lo = i.saturating_sub(band);
        for j in lo..=i {
            let mut s = a[i][j];
            for k in lo.max(j.saturating_sub(band))..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s.is_finite() && s > 1e-12 * max_diag) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![Point2::default(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in i.saturating_sub(band)..i {
            s = s - y[k] * l[i][k];
        }
        y[i] = s * (1.0 / l[i][i]);
    }
    let mut x = vec![Point2::default(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..(i + band + 1).min(n) {
            s = s - x[k] * l[k][i];
        }
        x[i] = s * (1.0 / l[i][i]);
    }
    Some(x)
}

/// Linear interpolation of the data polyline at parameter `u`.
fn polyline_at(points: &[Point2], params: &[f64], u: f64) -> Point2 {
    let i = params.partition_point(|&t| t <= u).clamp(1, points.len() - 1);
    let (t0, t1) = (params[i - 1], params[i]);
    let f = if t1 > t0 { ((u - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 0.0 };
    points[i - 1].lerp(points[i], f)
}

/// Least-squares clamped B-spline through ordered points.
///
/// Consecutive duplicates are collapsed first. Parameters follow chord
/// length; `min(⌊√n⌋, n - degree - 1)` interior knots are spaced uniformly
/// in parameter. The end control points are pinned to the end data points,
/// so the curve interpolates both endpoints. Rank-deficient systems get a
/// small ridge pulling unsupported control points towards the data polyline.
pub fn fit_spline(points: &[Point2], degree: usize) -> Result<SplineModel> {
    if degree < 1 {
        return Err(Error::InvalidParameter("spline degree must be >= 1".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter("non-finite input point".into()));
    }
    let data = collapse_duplicates(points);
    if data.len() == 1 && points.len() > 1 {
        return Err(Error::Degenerate("all input points coincide".into()));
    }
    let n = data.len();
    if n < degree + 1 {
        return Err(Error::TooFewPoints { needed: degree + 1, got: n });
    }

    let params = chord_parameters(&data);
    let interior = ((n as f64).sqrt().floor() as usize).min(n - degree - 1);
    let mut knots = vec![0.0; degree + 1];
    knots.extend((1..=interior).map(|k| k as f64 / (interior + 1) as f64));
    knots.extend(std::iter::repeat_n(1.0, degree + 1));
    let n_ctrl = interior + degree + 1;
    let last = n_ctrl - 1;

    let mut control = vec![Point2::default(); n_ctrl];
    control[0] = data[0];
    control[last] = data[n - 1];

    let unknowns = n_ctrl - 2;
    if unknowns > 0 {
        let mut a = vec![vec![0.0; unknowns]; unknowns];
        let mut rhs = vec![Point2::default(); unknowns];
        for k in 1..n - 1 {
            let u = params[k];
            let span = find_span(&knots, degree, u);
            let basis = basis_functions(&knots, degree, span, u);
            let first = span - degree;
            let mut r = data[k];
            for (j, &b) in basis.iter().enumerate() {
                let idx = first + j;
                if idx == 0 {
                    r = r - data[0] * b;
                } else if idx == last {
                    r = r - data[n - 1] * b;
                }
            }
            for (i, &bi) in basis.iter().enumerate() {
                let ii = first + i;
                if ii == 0 || ii == last {
                    continue;
                }
                rhs[ii - 1] = rhs[ii - 1] + r * bi;
                for (j, &bj) in basis.iter().enumerate() {
                    let jj = first + j;
                    if jj == 0 || jj == last {
                        continue;
                    }
                    a[ii - 1][jj - 1] += bi * bj;
                }
            }
        }
        let solution = match banded_cholesky_solve(&a, &rhs, degree) {
            Some(x) => x,
            None => {
                let scale = a.iter().enumerate().map(|(i, r)| r[i]).fold(0.0, f64::max).max(1.0);
                let ridge = RIDGE * scale;
                for i in 0..unknowns {
                    // Greville abscissa of control point i + 1.
                    let g = knots[i + 2..i + 2 + degree].iter().sum::<f64>() / degree as f64;
                    a[i][i] += ridge;
                    rhs[i] = rhs[i] + polyline_at(&data, &params, g) * ridge;
                }
                banded_cholesky_solve(&a, &rhs, degree)
                    .ok_or_else(|| Error::Degenerate("singular spline system".into()))?
            }
        };
        control[1..last].copy_from_slice(&solution);
    }

    Ok(SplineModel { degree, knots, control_points: control, thickness_px: 1.0, color: [0.0; 3] })
}

impl SplineModel {
    pub fn validate(&self) -> Result<()> {
        let p = self.degree;
        if p < 1 || self.knots.len() != self.control_points.len() + p + 1 {
            return Err(Error::InvalidParameter("knot count must equal control points + degree + 1".into()));
        }
        if self.knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("knots must be non-decreasing".into()));
        }
        let (first, last) = (self.knots[0], self.knots[self.knots.len() - 1]);
        if self.knots[..=p].iter().any(|&k| k != first)
            || self.knots[self.knots.len() - p - 1..].iter().any(|&k| k != last)
        {
            return Err(Error::InvalidParameter("knot vector is not clamped".into()));
        }
        if self.thickness_px.is_nan() || self.thickness_px <= 0.0 {
            return Err(Error::InvalidParameter("thickness must be > 0".into()));
        }
        Ok(())
    }

    /// de Boor evaluation at `u`, clamped to the parameter domain.
    pub fn evaluate(&self, u: f64) -> Point2 {
        let p = self.degree;
        let u = u.clamp(self.knots[p], self.knots[self.knots.len() - p - 1]);
        let k = find_span(&self.knots, p, u);
        let mut d: Vec<Point2> = (0..=p).map(|j| self.control_points[j + k - p]).collect();
        for r in 1..=p {
            for j in (r..=p).rev() {
                let i = j + k - p;
                let denom = self.knots[i + p + 1 - r] - self.knots[i];
                let alpha = if denom == 0.0 { 0.0 } else { (u - self.knots[i]) / denom };
                d[j] = d[j - 1].lerp(d[j], alpha);
            }
        }
        d[p]
    }

    /// Parameters the fitter assigned to `points` (chord length after
    /// collapsing duplicates), paired with the collapsed points.
    pub fn data_parameters(points: &[Point2]) -> (Vec<Point2>, Vec<f64>) {
        let data = collapse_duplicates(points);
        let params = if data.len() > 1 { chord_parameters(&data) } else { vec![0.0] };
        (data, params)
    }

    /// RMS distance between `points` and the curve at their fit parameters.
    pub fn rms_residual(&self, points: &[Point2]) -> f64 {
        let (data, params) = Self::data_parameters(points);
        let sum: f64 = data.iter().zip(&params).map(|(p, &u)| p.distance(self.evaluate(u)).powi(2)).sum();
        (sum / data.len() as f64).sqrt()
    }
}

/// Dense samples along the curve, consecutive samples at most `max_gap_px`
/// apart, endpoints included.
pub fn sample_spline(model: &SplineModel, max_gap_px: f64) -> Vec<Point2> {
    let max_gap = if max_gap_px > 0.0 && max_gap_px.is_finite() { max_gap_px } else { 1.0 };
    let hull: f64 = model.control_points.windows(2).map(|w| w[0].distance(w[1])).sum();
    let n = ((hull / max_gap).ceil() as usize).clamp(1, 1 << 20) + 1;
    let mut params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mut points: Vec<Point2> = params.iter().map(|&u| model.evaluate(u)).collect();

    // Bisect any remaining long gaps.
    let mut i = 0;
    while i + 1 < points.len() {
        if points[i].distance(points[i + 1]) > max_gap && params[i + 1] - params[i] > 1e-12 {
            let u = 0.5 * (params[i] + params[i + 1]);
            params.insert(i + 1, u);
            points.insert(i + 1, model.evaluate(u));
        } else {
            i += 1;
        }
    }
    points
}

/// Versioned JSON form of a fitted spline plus its dense discretization.
/// Ground-truth files carry only `points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineDocument {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_points: Option<Vec<Point2>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness_px: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<[f64; 3]>,
    pub points: Vec<[f64; 2]>,
}

impl SplineDocument {
    pub fn from_model(model: &SplineModel, max_gap_px: f64) -> Self {
        Self {
            version: 1,
            degree: Some(model.degree),
            knots: Some(model.knots.clone()),
            control_points: Some(model.control_points.clone()),
            thickness_px: Some(model.thickness_px),
            color: Some(model.color),
            points: sample_spline(model, max_gap_px).iter().map(|p| [p.x, p.y]).collect(),
        }
    }

    pub fn from_points(points: &[Point2]) -> Self {
        Self {
            version: 1,
            degree: None,
            knots: None,
            control_points: None,
            thickness_px: None,
            color: None,
            points: points.iter().map(|p| [p.x, p.y]).collect(),
        }
    }

    pub fn points(&self) -> Vec<Point2> {
        self.points.iter().map(|p| Point2::new(p[0], p[1])).collect()
    }

    /// The full model, when the document carries one.
    pub fn model(&self) -> Option<SplineModel> {
        Some(SplineModel {
            degree: self.degree?,
            knots: self.knots.clone()?,
            control_points: self.control_points.clone()?,
            thickness_px: self.thickness_px?,
            color: self.color?,
        })
    }
}
