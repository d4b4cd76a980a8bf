//! Closed-form likelihood terms scoring a candidate walk extension.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Bradford density `c / (ln(1 + c) (1 + c x))` on `[0, 1]`.
pub fn bradford_likelihood(x: f64, c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain { value: x, domain: "[0, 1]" });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain { value: c, domain: "(0, inf)" });
    }
    Ok(c / (c.ln_1p() * (1.0 + c * x)))
}

/// Modified Bessel function of the first kind, order zero, by its power
/// series `Σ ((x/2)^k / k!)²`. Converges for every finite `x`; the loop stops
/// once a term drops below 1e-17 of the running sum.
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * k);
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
    }
}

/// Natural log of the von Mises density with concentration `m`.
pub fn log_von_mises(theta: f64, m: f64) -> f64 {
    m * theta.cos() - (2.0 * PI * bessel_i0(m)).ln()
}

/// Von Mises density `exp(m cos θ) / (2π I₀(m))`.
pub fn von_mises(theta: f64, m: f64) -> f64 {
    (m * theta.cos()).exp() / (2.0 * PI * bessel_i0(m))
}

/// Orientation of the segment `from -> to`, in `(-π, π]`.
pub fn edge_angle(from: Point2, to: Point2) -> Result<f64> {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let a = dy.atan2(dx);
    Ok(if a <= -PI { PI } else { a })
}

/// `a - b` wrapped into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Argument handed to the von Mises term for two consecutive edge
/// orientations: half of their wrapped difference.
pub fn turn_half_angle(previous: f64, next: f64) -> f64 {
    wrap_angle(previous - next) / 2.0
}
