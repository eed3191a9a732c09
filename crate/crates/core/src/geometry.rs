//! Oriented boxes and the geometric primitives built on them.
//!
//! Coordinates are image coordinates: x to the right, y downward. Angles are
//! radians measured from the x-axis and kept in `[0, π)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Points closer than this to a clip edge count as lying on it.
pub const CLIP_EPS: f64 = 1e-12;

/// Polygons with less area than this are treated as empty.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// Eigenvalue gap under which a covariance is considered isotropic.
pub const ISOTROPIC_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        self.dist_sq(other).sqrt()
    }
}

/// Maps any finite angle into `[0, π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    // rem_euclid can round up to exactly π for tiny negative inputs
    if t >= PI {
        0.0
    } else {
        t
    }
}

/// A rotated rectangle `(cx, cy, w, h, θ)`.
///
/// The `w` side points along `(cos θ, sin θ)`, the `h` side along
/// `(-sin θ, cos θ)`. Construction validates sizes and wraps θ into `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct OrientedBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    theta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    theta: f64,
}

impl TryFrom<RawBox> for OrientedBox {
    type Error = GeometryError;

    fn try_from(r: RawBox) -> Result<Self, GeometryError> {
        Self::new(r.cx, r.cy, r.w, r.h, r.theta)
    }
}

impl OrientedBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Result<Self, GeometryError> {
        for (field, v) in [("cx", cx), ("cy", cy), ("w", w), ("h", h), ("theta", theta)] {
            if !v.is_finite() {
                return Err(GeometryError::NonFinite { field });
            }
        }
        if w <= 0.0 {
            return Err(GeometryError::NonPositiveSize { field: "w", value: w });
        }
        if h <= 0.0 {
            return Err(GeometryError::NonPositiveSize { field: "h", value: h });
        }
        Ok(Self {
            cx,
            cy,
            w,
            h,
            theta: normalize_angle(theta),
        })
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }
    pub fn area(&self) -> f64 {
        self.w * self.h
    }
    pub fn diagonal(&self) -> f64 {
        self.w.hypot(self.h)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self, GeometryError> {
        Self::new(self.cx + dx, self.cy + dy, self.w, self.h, self.theta)
    }

    /// Rotates the box by `phi` about `pivot`.
    pub fn rotated_about(&self, pivot: Point, phi: f64) -> Result<Self, GeometryError> {
        let (s, c) = phi.sin_cos();
        let dx = self.cx - pivot.x;
        let dy = self.cy - pivot.y;
        Self::new(
            pivot.x + c * dx - s * dy,
            pivot.y + s * dx + c * dy,
            self.w,
            self.h,
            self.theta + phi,
        )
    }

    /// The same rectangle expressed with θ in `[0, π/2)`, swapping `w` and `h`
    /// when the input angle lies in `[π/2, π)`.
    pub fn canonical(&self) -> Self {
        if self.theta >= FRAC_PI_2 {
            Self {
                w: self.h,
                h: self.w,
                theta: self.theta - FRAC_PI_2,
                ..*self
            }
        } else {
            *self
        }
    }
}

/// An ordered list of at least three points.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    points: Vec<Point>,
}

impl VertexSet {
    pub fn new(points: Vec<Point>) -> Result<Self, GeometryError> {
        if points.len() < 3 {
            return Err(GeometryError::TooFewPoints(points.len()));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeometryError::NonFinite { field: "point" });
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Point {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    }

    /// Signed shoelace area; positive for counter-clockwise order in a y-up frame.
    pub fn signed_area(&self) -> f64 {
        shoelace(&self.points)
    }
}

/// Tight axis-aligned rectangle, stored as center and full extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRect {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
}

impl AxisRect {
    pub fn x_min(&self) -> f64 {
        self.cx - self.width / 2.0
    }
    pub fn x_max(&self) -> f64 {
        self.cx + self.width / 2.0
    }
    pub fn y_min(&self) -> f64 {
        self.cy - self.height / 2.0
    }
    pub fn y_max(&self) -> f64 {
        self.cy + self.height / 2.0
    }
}

/// A 2-D Gaussian `N(μ, Σ)` with a symmetric covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBox {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl GaussianBox {
    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self, GeometryError> {
        let g = Self { mean, cov };
        if (cov[0][1] - cov[1][0]).abs() > 1e-12 {
            return Err(GeometryError::AsymmetricCovariance);
        }
        let (e1, e2) = g.eigenvalues();
        if !(e1 > 0.0 && e2 > 0.0) {
            return Err(GeometryError::NotPositiveDefinite { min_eigenvalue: e2 });
        }
        Ok(g)
    }

    pub fn det(&self) -> f64 {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.cov[0][0] + self.cov[1][1]
    }

    /// Eigenvalues `(e1, e2)` with `e1 >= e2`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let (a, b, d) = (self.cov[0][0], self.cov[0][1], self.cov[1][1]);
        let mid = 0.5 * (a + d);
        let r = (0.5 * (a - d)).hypot(b);
        (mid + r, mid - r)
    }

    /// Inverse covariance, or `None` when singular.
    pub fn inverse_cov(&self) -> Option<[[f64; 2]; 2]> {
        let det = self.det();
        if !(det > 0.0) || !det.is_finite() {
            return None;
        }
        let c = &self.cov;
        Some([
            [c[1][1] / det, -c[0][1] / det],
            [-c[1][0] / det, c[0][0] / det],
        ])
    }
}

/// Corners of the box, one per sign combination of the `w` and `h` terms in
/// the order `(+,+), (+,-), (-,+), (-,-)`.
pub fn box_to_vertices(b: &OrientedBox) -> VertexSet {
    VertexSet {
        points: corner_array(b).to_vec(),
    }
}

pub(crate) fn corner_array(b: &OrientedBox) -> [Point; 4] {
    let (s, c) = b.theta.sin_cos();
    let (hw, hh) = (b.w / 2.0, b.h / 2.0);
    let u = (hw * c, hw * s);
    let v = (-hh * s, hh * c);
    let at = |su: f64, sv: f64| Point::new(b.cx + su * u.0 + sv * v.0, b.cy + su * u.1 + sv * v.1);
    [at(1.0, 1.0), at(1.0, -1.0), at(-1.0, 1.0), at(-1.0, -1.0)]
}

/// Corners in boundary order, suitable for clipping.
pub fn box_polygon(b: &OrientedBox) -> VertexSet {
    let [pp, pm, mp, mm] = corner_array(b);
    VertexSet {
        points: vec![pp, pm, mm, mp],
    }
}

fn shoelace(points: &[Point]) -> f64 {
    let n = points.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    0.5 * acc
}

fn oriented_ccw(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    if shoelace(&pts) < 0.0 {
        pts.reverse();
    }
    pts
}

/// Area of the intersection of two convex polygons.
///
/// The first polygon is clipped against every edge of the second
/// (Sutherland–Hodgman) and the result measured with the shoelace formula.
/// Either winding is accepted.
pub fn convex_intersection_area(a: &VertexSet, b: &VertexSet) -> f64 {
    if shoelace(&a.points).abs() < DEGENERATE_AREA || shoelace(&b.points).abs() < DEGENERATE_AREA
    {
        return 0.0;
    }
    let clip = oriented_ccw(&b.points);
    let mut poly = oriented_ccw(&a.points);

    for i in 0..clip.len() {
        if poly.is_empty() {
            break;
        }
        let e0 = clip[i];
        let e1 = clip[(i + 1) % clip.len()];
        let ex = e1.x - e0.x;
        let ey = e1.y - e0.y;
        let len = ex.hypot(ey);
        if len == 0.0 {
            continue;
        }
        // signed distance to the clip line, positive on the inner side
        let side = |p: Point| (ex * (p.y - e0.y) - ey * (p.x - e0.x)) / len;

        let input = std::mem::take(&mut poly);
        let n = input.len();
        for j in 0..n {
            let cur = input[j];
            let prev = input[(j + n - 1) % n];
            let d_cur = side(cur);
            let d_prev = side(prev);
            let cur_in = d_cur >= -CLIP_EPS;
            let prev_in = d_prev >= -CLIP_EPS;
            if cur_in {
                if !prev_in {
                    poly.push(lerp_crossing(prev, cur, d_prev, d_cur));
                }
                poly.push(cur);
            } else if prev_in {
                poly.push(lerp_crossing(prev, cur, d_prev, d_cur));
            }
        }
    }

    if poly.len() < 3 {
        return 0.0;
    }
    let area = shoelace(&poly).abs();
    if area < DEGENERATE_AREA {
        0.0
    } else {
        area
    }
}

fn lerp_crossing(p: Point, q: Point, dp: f64, dq: f64) -> Point {
    let denom = dp - dq;
    if denom == 0.0 {
        return q;
    }
    let t = dp / denom;
    Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

/// Intersection over union of two oriented boxes.
///
/// Arguments are put into a fixed order before clipping so the result is
/// bit-for-bit symmetric.
pub fn rotated_iou(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let reach = 0.5 * (a.diagonal() + b.diagonal());
    if a.center().dist_sq(b.center()) > reach * reach {
        return 0.0;
    }
    let (first, second) = if box_key(a) <= box_key(b) { (a, b) } else { (b, a) };
    let inter = convex_intersection_area(&box_polygon(first), &box_polygon(second));
    if inter <= 0.0 {
        return 0.0;
    }
    let union = first.area() + second.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

fn box_key(b: &OrientedBox) -> [u64; 5] {
    // total order on the bit patterns is enough for argument canonicalization
    [b.cx, b.cy, b.w, b.h, b.theta].map(f64::to_bits)
}

pub fn box_to_aabb(b: &OrientedBox) -> AxisRect {
    let (s, c) = b.theta.sin_cos();
    let (s, c) = (s.abs(), c.abs());
    AxisRect {
        cx: b.cx,
        cy: b.cy,
        width: b.w * c + b.h * s,
        height: b.w * s + b.h * c,
    }
}

/// Gaussian view of a box: `μ = (cx, cy)`, `Σ = R Λ Rᵀ`.
///
/// Unnormalized, `Λ = diag(w²/4, h²/4)`. Normalized, both sides are divided
/// by `max(w, h)` first and the mean is placed at the origin.
pub fn box_to_gaussian(b: &OrientedBox, normalize: bool) -> GaussianBox {
    let (mean, sw, sh) = if normalize {
        let m = b.w.max(b.h);
        ([0.0, 0.0], b.w / m, b.h / m)
    } else {
        ([b.cx, b.cy], b.w, b.h)
    };
    let l1 = sw * sw / 4.0;
    let l2 = sh * sh / 4.0;
    let (s, c) = b.theta.sin_cos();
    let xx = c * c * l1 + s * s * l2;
    let yy = s * s * l1 + c * c * l2;
    let xy = c * s * (l1 - l2);
    GaussianBox {
        mean,
        cov: [[xx, xy], [xy, yy]],
    }
}

/// Rebuilds a box from a Gaussian by eigendecomposition.
///
/// Sides are `2·√e·scale`. The principal axis fixes the angle up to the usual
/// `w`/`h` relabelling, and the representation whose angle is closest to
/// `theta_hint` is returned. Isotropic covariances carry no angle, so the hint
/// is used directly.
pub fn gaussian_to_box(
    g: &GaussianBox,
    scale: f64,
    theta_hint: f64,
) -> Result<OrientedBox, GeometryError> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(GeometryError::NonPositiveSize {
            field: "scale",
            value: scale,
        });
    }
    let (a, b, d) = (g.cov[0][0], g.cov[0][1], g.cov[1][1]);
    if !(a.is_finite() && b.is_finite() && d.is_finite()) {
        return Err(GeometryError::NonFinite { field: "cov" });
    }
    let (e1, e2) = g.eigenvalues();
    if !(e2 > 0.0) {
        return Err(GeometryError::NotPositiveDefinite { min_eigenvalue: e2 });
    }
    let major = 2.0 * e1.sqrt() * scale;
    let minor = 2.0 * e2.sqrt() * scale;
    let [cx, cy] = g.mean;
    if e1 - e2 <= ISOTROPIC_EPS {
        return OrientedBox::new(cx, cy, major, minor, theta_hint);
    }
    let axis = normalize_angle(0.5 * (2.0 * b).atan2(a - d));
    let hint = normalize_angle(theta_hint);
    if angular_gap(axis, hint) > FRAC_PI_4 {
        OrientedBox::new(cx, cy, minor, major, axis + FRAC_PI_2)
    } else {
        OrientedBox::new(cx, cy, major, minor, axis)
    }
}

/// Distance between two angles modulo π, in `[0, π/2]`.
pub fn angular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn bx(cx: f64, cy: f64, w: f64, h: f64, t: f64) -> OrientedBox {
        OrientedBox::new(cx, cy, w, h, t).unwrap()
    }

    fn assert_points(got: &VertexSet, want: &[(f64, f64)]) {
        assert_eq!(got.len(), want.len());
        for (p, &(x, y)) in got.points().iter().zip(want) {
            assert!((p.x - x).abs() < 1e-12 && (p.y - y).abs() < 1e-12, "{p:?} vs ({x}, {y})");
        }
    }

    #[test]
    fn construction_rejects_bad_fields() {
        assert!(OrientedBox::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(OrientedBox::new(0.0, 0.0, 1.0, -1.0, 0.0).is_err());
        assert!(OrientedBox::new(f64::NAN, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(OrientedBox::new(0.0, 0.0, 1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn angle_wraps_into_half_turn() {
        assert_eq!(bx(0.0, 0.0, 1.0, 1.0, PI).theta(), 0.0);
        assert!((bx(0.0, 0.0, 1.0, 1.0, 3.5).theta() - (3.5 - PI)).abs() < 1e-15);
        assert!((bx(0.0, 0.0, 1.0, 1.0, -0.25).theta() - (PI - 0.25)).abs() < 1e-15);
        assert_eq!(normalize_angle(-1e-18), 0.0);
    }

    #[test]
    fn vertices_axis_aligned() {
        let v = box_to_vertices(&bx(0.0, 0.0, 2.0, 2.0, 0.0));
        assert_points(&v, &[(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]);
    }

    #[test]
    fn vertices_quarter_turn_square() {
        let v = box_to_vertices(&bx(0.0, 0.0, 2.0, 2.0, FRAC_PI_4));
        assert_points(&v, &[(0.0, SQRT_2), (SQRT_2, 0.0), (-SQRT_2, 0.0), (0.0, -SQRT_2)]);
    }

    #[test]
    fn vertices_right_angle() {
        let v = box_to_vertices(&bx(0.0, 0.0, 4.0, 2.0, FRAC_PI_2));
        assert_points(&v, &[(-1.0, 2.0), (1.0, 2.0), (-1.0, -2.0), (1.0, -2.0)]);
    }

    #[test]
    fn intersection_area_basic_cases() {
        let sq = box_polygon(&bx(0.0, 0.0, 2.0, 2.0, 0.0));
        assert!((convex_intersection_area(&sq, &sq) - 4.0).abs() < 1e-12);
        let far = box_polygon(&bx(10.0, 0.0, 2.0, 2.0, 0.0));
        assert_eq!(convex_intersection_area(&sq, &far), 0.0);
        let rot = box_polygon(&bx(0.0, 0.0, 2.0, 2.0, FRAC_PI_4));
        let octagon = 8.0 * SQRT_2 - 8.0;
        assert!((convex_intersection_area(&sq, &rot) - octagon).abs() < 1e-12);
    }

    #[test]
    fn intersection_accepts_either_winding() {
        let a = box_polygon(&bx(0.0, 0.0, 2.0, 2.0, 0.0));
        let mut rev = a.points().to_vec();
        rev.reverse();
        let b = VertexSet::new(rev).unwrap();
        let shifted = box_polygon(&bx(0.5, 0.0, 2.0, 2.0, 0.0));
        let x = convex_intersection_area(&a, &shifted);
        let y = convex_intersection_area(&b, &shifted);
        assert!((x - 3.0).abs() < 1e-12 && (y - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_polygon_has_zero_area() {
        let line = VertexSet::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ])
        .unwrap();
        let sq = box_polygon(&bx(0.0, 0.0, 4.0, 4.0, 0.0));
        assert_eq!(convex_intersection_area(&line, &sq), 0.0);
    }

    #[test]
    fn touching_boxes_have_zero_overlap() {
        let a = bx(0.0, 0.0, 2.0, 2.0, 0.0);
        let b = bx(2.0, 0.0, 2.0, 2.0, 0.0);
        assert_eq!(rotated_iou(&a, &b), 0.0);
    }

    #[test]
    fn iou_examples() {
        let a = bx(0.0, 0.0, 2.0, 2.0, 0.0);
        assert_eq!(rotated_iou(&a, &a), 1.0);
        assert_eq!(rotated_iou(&a, &bx(5.0, 5.0, 2.0, 2.0, 0.3)), 0.0);
        let r = bx(0.0, 0.0, 2.0, 2.0, FRAC_PI_4);
        let want = (8.0 * SQRT_2 - 8.0) / (16.0 - 8.0 * SQRT_2);
        assert!((rotated_iou(&a, &r) - want).abs() < 1e-12);
        assert!((rotated_iou(&a, &r) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let s = bx(0.5, 0.0, 2.0, 2.0, 0.0);
        assert!((rotated_iou(&a, &s) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn aabb_examples() {
        let r = box_to_aabb(&bx(0.0, 0.0, 4.0, 2.0, 0.0));
        assert_eq!((r.width, r.height), (4.0, 2.0));
        let r = box_to_aabb(&bx(0.0, 0.0, 2.0, 2.0, FRAC_PI_4));
        assert!((r.width - 2.0 * SQRT_2).abs() < 1e-12 && (r.height - 2.0 * SQRT_2).abs() < 1e-12);
        let r = box_to_aabb(&bx(0.0, 0.0, 4.0, 2.0, FRAC_PI_2));
        assert!((r.width - 2.0).abs() < 1e-12 && (r.height - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_examples() {
        for t in [0.0, 0.3, 1.2, 2.9] {
            let g = box_to_gaussian(&bx(0.0, 0.0, 2.0, 2.0, t), false);
            assert!((g.cov[0][0] - 1.0).abs() < 1e-12);
            assert!((g.cov[1][1] - 1.0).abs() < 1e-12);
            assert!(g.cov[0][1].abs() < 1e-12);
        }
        let g = box_to_gaussian(&bx(0.0, 0.0, 4.0, 2.0, 0.0), false);
        assert_eq!(g.cov, [[4.0, 0.0], [0.0, 1.0]]);
        let g = box_to_gaussian(&bx(0.0, 0.0, 4.0, 2.0, FRAC_PI_2), false);
        assert!((g.cov[0][0] - 1.0).abs() < 1e-12 && (g.cov[1][1] - 4.0).abs() < 1e-12);
        let g = box_to_gaussian(&bx(3.0, 4.0, 4.0, 2.0, 0.0), true);
        assert_eq!(g.mean, [0.0, 0.0]);
        assert_eq!(g.cov, [[0.25, 0.0], [0.0, 0.0625]]);
    }

    #[test]
    fn gaussian_to_box_examples() {
        let iso = GaussianBox::new([1.0, 2.0], [[0.25, 0.0], [0.0, 0.25]]).unwrap();
        let b = gaussian_to_box(&iso, 2.0, 0.3).unwrap();
        assert_eq!((b.cx(), b.cy(), b.w(), b.h(), b.theta()), (1.0, 2.0, 2.0, 2.0, 0.3));

        let g = GaussianBox::new([0.0, 0.0], [[4.0, 0.0], [0.0, 1.0]]).unwrap();
        let b = gaussian_to_box(&g, 1.0, 0.0).unwrap();
        assert_eq!((b.w(), b.h(), b.theta()), (4.0, 2.0, 0.0));
    }

    #[test]
    fn gaussian_round_trip() {
        for &(w, h, t) in &[(4.0, 2.0, 0.3), (1.0, 3.0, 2.0), (5.0, 4.9, 1.5), (2.0, 7.0, 0.0)] {
            let b = bx(1.0, -2.0, w, h, t);
            let g = box_to_gaussian(&b, true);
            let back = gaussian_to_box(&g, w.max(h), t).unwrap();
            assert!((back.w() - w).abs() < 1e-9, "{back:?}");
            assert!((back.h() - h).abs() < 1e-9, "{back:?}");
            assert!(angular_gap(back.theta(), b.theta()) < 1e-9, "{back:?}");
        }
    }

    #[test]
    fn rejects_singular_covariance() {
        assert!(GaussianBox::new([0.0, 0.0], [[1.0, 1.0], [1.0, 1.0]]).is_err());
        assert!(GaussianBox::new([0.0, 0.0], [[1.0, 0.5], [0.2, 1.0]]).is_err());
        let bad = GaussianBox {
            mean: [0.0, 0.0],
            cov: [[1.0, 0.0], [0.0, -1.0]],
        };
        assert!(gaussian_to_box(&bad, 1.0, 0.0).is_err());
    }

    #[test]
    fn canonical_swaps_sides() {
        let b = bx(0.0, 0.0, 4.0, 2.0, FRAC_PI_2 + 0.1).canonical();
        assert_eq!((b.w(), b.h()), (2.0, 4.0));
        assert!((b.theta() - 0.1).abs() < 1e-12);
    }
}
