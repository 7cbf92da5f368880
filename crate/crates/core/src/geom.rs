//! Small planar geometry kit: axis-aligned rectangles and circle/line
//! intersections used by the scene and mesh code.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Closed axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// Squared distance from `p` to the nearest point of the rectangle (0 inside).
    pub fn min_dist2(&self, p: Point) -> f64 {
        let dx = (self.x0 - p.x).max(0.0).max(p.x - self.x1);
        let dy = (self.y0 - p.y).max(0.0).max(p.y - self.y1);
        dx * dx + dy * dy
    }

    /// Squared distance from `p` to the farthest corner.
    pub fn max_dist2(&self, p: Point) -> f64 {
        let dx = (p.x - self.x0).abs().max((p.x - self.x1).abs());
        let dy = (p.y - self.y0).abs().max((p.y - self.y1).abs());
        dx * dx + dy * dy
    }
}

/// Normalizes an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Angles at which the circle `(c, r)` meets the vertical line `x = at`.
pub fn circle_vertical_line(c: Point, r: f64, at: f64) -> Vec<f64> {
    let d = at - c.x;
    if d.abs() >= r {
        return Vec::new();
    }
    let h = (r * r - d * d).sqrt();
    vec![normalize_angle(h.atan2(d)), normalize_angle((-h).atan2(d))]
}

/// Angles at which the circle `(c, r)` meets the horizontal line `y = at`.
pub fn circle_horizontal_line(c: Point, r: f64, at: f64) -> Vec<f64> {
    let d = at - c.y;
    if d.abs() >= r {
        return Vec::new();
    }
    let h = (r * r - d * d).sqrt();
    vec![normalize_angle(d.atan2(h)), normalize_angle(d.atan2(-h))]
}

/// Angles on circle `(c1, r1)` where it crosses circle `(c2, r2)`.
/// Tangency and containment yield no crossings.
pub fn circle_circle(c1: Point, r1: f64, c2: Point, r2: f64) -> Vec<f64> {
    let dx = c2.x - c1.x;
    let dy = c2.y - c1.y;
    let d = (dx * dx + dy * dy).sqrt();
    if d == 0.0 || d >= r1 + r2 || d <= (r1 - r2).abs() {
        return Vec::new();
    }
    let base = dy.atan2(dx);
    let cos_a = ((r1 * r1 + d * d - r2 * r2) / (2.0 * r1 * d)).clamp(-1.0, 1.0);
    let a = cos_a.acos();
    vec![normalize_angle(base + a), normalize_angle(base - a)]
}

/// Point on circle `(c, r)` at angle `a`.
pub fn on_circle(c: Point, r: f64, a: f64) -> Point {
    Point::new(c.x + r * a.cos(), c.y + r * a.sin())
}

/// Whether angle `a` lies on the counter-clockwise span starting at `start`.
pub fn angle_in_span(a: f64, start: f64, sweep: f64) -> bool {
    if sweep >= TAU {
        return true;
    }
    let rel = (a - start).rem_euclid(TAU);
    rel <= sweep
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn vertical_line_through_center() {
        let mut a = circle_vertical_line(Point::new(0.0, 0.0), 1.0, 0.0);
        a.sort_by(f64::total_cmp);
        assert!((a[0] - FRAC_PI_2).abs() < 1e-12);
        assert!((a[1] - 3.0 * FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn horizontal_line_through_center() {
        let mut a = circle_horizontal_line(Point::new(0.0, 0.0), 1.0, 0.0);
        a.sort_by(f64::total_cmp);
        assert!(a[0].abs() < 1e-12);
        assert!((a[1] - PI).abs() < 1e-12);
    }

    #[test]
    fn circle_circle_symmetric_pair() {
        let a = circle_circle(Point::new(0.0, 0.0), 1.0, Point::new(1.0, 0.0), 1.0);
        assert_eq!(a.len(), 2);
        for ang in a {
            let p = on_circle(Point::new(0.0, 0.0), 1.0, ang);
            let d = ((p.x - 1.0).powi(2) + p.y.powi(2)).sqrt();
            assert!((d - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nested_circles_do_not_cross() {
        assert!(circle_circle(Point::new(0.0, 0.0), 2.0, Point::new(0.1, 0.0), 0.5).is_empty());
    }

    #[test]
    fn rect_distances() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert_eq!(r.min_dist2(Point::new(0.5, 0.5)), 0.0);
        assert!((r.min_dist2(Point::new(2.0, 0.5)) - 1.0).abs() < 1e-15);
        assert!((r.max_dist2(Point::new(0.0, 0.0)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn span_wraps_around_zero() {
        assert!(angle_in_span(0.1, 6.0, 1.0));
        assert!(!angle_in_span(3.0, 6.0, 1.0));
    }
}
