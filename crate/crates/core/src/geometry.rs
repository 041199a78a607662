//! Planar convex geometry shared by every other module.
//!
//! Everything here works on `f64` with fixed absolute tolerances. Inputs are
//! produced by continuous random lines, so exact degeneracies have probability
//! zero and tolerance predicates are enough.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Absolute tolerance for identifying two points (window units).
pub const EPS_POINT: f64 = 1e-9;
/// Polygons with area at or below this are degenerate.
pub const EPS_AREA: f64 = 1e-12;
/// Relative turn (sine of the exterior angle) below which a corner is straight.
pub const EPS_ANGLE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    /// Unit vector at angle `phi`.
    #[inline]
    pub fn unit(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Point2 { x: c, y: s }
    }

    fn lex_lt(self, o: Point2) -> bool {
        self.x < o.x || (self.x == o.x && self.y < o.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    #[inline]
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Undirected line `{z : <z, (cos phi, sin phi)> = p}` with `phi` in `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub p: f64,
    pub phi: f64,
}

impl Line {
    /// Builds a line from any normal angle, folding it into `[0, pi)`.
    pub fn new(p: f64, phi: f64) -> Self {
        let mut phi = phi.rem_euclid(2.0 * PI);
        let mut p = p;
        if phi >= PI {
            phi -= PI;
            p = -p;
        }
        // rem_euclid can round up to exactly 2*pi - ulp; keep the invariant strict
        if phi >= PI {
            phi = 0.0;
        }
        Line { p, phi }
    }

    /// Line through two distinct points.
    pub fn through(a: Point2, b: Point2) -> Self {
        let d = b - a;
        let n = Point2::new(-d.y, d.x) * (1.0 / d.norm());
        Line::new(n.dot(a), n.y.atan2(n.x))
    }

    #[inline]
    pub fn normal(&self) -> Point2 {
        Point2::unit(self.phi)
    }

    /// Signed distance of `z` from the line, positive on the normal side.
    #[inline]
    pub fn signed_distance(&self, z: Point2) -> f64 {
        z.dot(self.normal()) - self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Result<Self> {
        if a.dist(b) <= EPS_POINT {
            return Err(Error::DegenerateGeometry("segment endpoints coincide"));
        }
        Ok(Segment { a, b })
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    #[inline]
    pub fn midpoint(&self) -> Point2 {
        (self.a + self.b) * 0.5
    }
}

/// Axis-aligned rectangular observation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectWindow {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl RectWindow {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let finite = [x0, y0, x1, y1].iter().all(|v| v.is_finite());
        if !finite || x0 >= x1 || y0 >= y1 {
            return Err(Error::InvalidParameter(format!(
                "window [{x0}, {x1}] x [{y0}, {y1}] is empty or not finite"
            )));
        }
        Ok(RectWindow { x0, y0, x1, y1 })
    }

    /// The square `[lo, hi]^2`.
    pub fn square(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, lo, hi, hi)
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    #[inline]
    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    #[inline]
    pub fn centre(&self) -> Point2 {
        Point2::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Half the diagonal.
    #[inline]
    pub fn circumradius(&self) -> f64 {
        0.5 * self.width().hypot(self.height())
    }

    #[inline]
    pub fn contains(&self, z: Point2) -> bool {
        z.x >= self.x0 && z.x <= self.x1 && z.y >= self.y0 && z.y <= self.y1
    }

    pub fn contains_window(&self, o: &RectWindow) -> bool {
        o.x0 >= self.x0 && o.x1 <= self.x1 && o.y0 >= self.y0 && o.y1 <= self.y1
    }

    /// Whether `z` lies within `eps` of the window boundary.
    pub fn on_boundary(&self, z: Point2, eps: f64) -> bool {
        let inside = z.x >= self.x0 - eps
            && z.x <= self.x1 + eps
            && z.y >= self.y0 - eps
            && z.y <= self.y1 + eps;
        inside
            && ((z.x - self.x0).abs() <= eps
                || (z.x - self.x1).abs() <= eps
                || (z.y - self.y0).abs() <= eps
                || (z.y - self.y1).abs() <= eps)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> RectWindow {
        RectWindow {
            x0: self.x0 + dx,
            y0: self.y0 + dy,
            x1: self.x1 + dx,
            y1: self.y1 + dy,
        }
    }

    pub fn to_polygon(&self) -> ConvexPolygon {
        ConvexPolygon {
            vertices: vec![
                Point2::new(self.x0, self.y0),
                Point2::new(self.x1, self.y0),
                Point2::new(self.x1, self.y1),
                Point2::new(self.x0, self.y1),
            ],
        }
    }
}

/// Result of cutting a polygon with a line.
#[derive(Debug, Clone, PartialEq)]
pub enum Split {
    /// Part on the positive side of the normal, then the negative part.
    Parts(ConvexPolygon, ConvexPolygon),
    /// The line misses the open interior.
    Miss,
}

/// Strictly convex polygon stored as its counter-clockwise corners.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Normalises orientation, drops straight corners and validates the result.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        let vertices = normalize(vertices)?;
        Ok(ConvexPolygon { vertices })
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Sides as `(start, end)` pairs in CCW order.
    pub fn sides(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.sides().map(|(a, b)| a.dist(b)).sum()
    }

    /// Centre of gravity.
    pub fn centroid(&self) -> Point2 {
        // shift to the first corner to keep the shoelace terms small
        let o = self.vertices[0];
        let mut a2 = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (p, q) in self.sides() {
            let (p, q) = (p - o, q - o);
            let w = p.cross(q);
            a2 += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Point2::new(o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2))
    }

    /// `(min, max)` of `<vertex, (cos phi, sin phi)>`.
    pub fn projection_interval(&self, phi: f64) -> (f64, f64) {
        self.projection_interval_along(Point2::unit(phi))
    }

    /// `(min, max)` of `<vertex, n>`.
    pub fn projection_interval_along(&self, n: Point2) -> (f64, f64) {
        self.vertices
            .iter()
            .map(|v| v.dot(n))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
                (lo.min(t), hi.max(t))
            })
    }

    /// Width of the polygon measured along the normal direction `phi`.
    pub fn support_width(&self, phi: f64) -> f64 {
        self.support_width_along(Point2::unit(phi))
    }

    pub fn support_width_along(&self, n: Point2) -> f64 {
        let (lo, hi) = self.projection_interval_along(n);
        hi - lo
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                d = d.max(v[i].dist(v[j]));
            }
        }
        d
    }

    /// Closed point-in-polygon test with tolerance `eps` (distance units).
    pub fn contains(&self, z: Point2, eps: f64) -> bool {
        self.sides().all(|(a, b)| {
            let e = b - a;
            e.cross(z - a) >= -eps * e.norm()
        })
    }

    /// Whether the line passes through the open interior.
    pub fn is_hit_by(&self, line: &Line) -> bool {
        let (mut pos, mut neg) = (false, false);
        for v in &self.vertices {
            let d = line.signed_distance(*v);
            pos |= d > EPS_POINT;
            neg |= d < -EPS_POINT;
        }
        pos && neg
    }

    /// Cuts the polygon along `line`.
    ///
    /// Chord endpoints are computed from the side endpoints in lexicographic
    /// order, so two cells sharing a side get bit-identical cut points.
    pub fn split(&self, line: &Line) -> Result<Split> {
        let n = self.vertices.len();
        let normal = line.normal();
        let dist: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| v.dot(normal) - line.p)
            .collect();
        let side = |d: f64| {
            if d > EPS_POINT {
                1i8
            } else if d < -EPS_POINT {
                -1
            } else {
                0
            }
        };
        let sides: Vec<i8> = dist.iter().map(|&d| side(d)).collect();
        if !sides.contains(&1) || !sides.contains(&-1) {
            return Ok(Split::Miss);
        }

        let mut pos = Vec::with_capacity(n + 2);
        let mut neg = Vec::with_capacity(n + 2);
        for i in 0..n {
            let j = (i + 1) % n;
            let v = self.vertices[i];
            match sides[i] {
                1 => pos.push(v),
                -1 => neg.push(v),
                _ => {
                    pos.push(v);
                    neg.push(v);
                }
            }
            if sides[i] * sides[j] == -1 {
                let (mut a, mut da, mut b, mut db) = (v, dist[i], self.vertices[j], dist[j]);
                if b.lex_lt(a) {
                    std::mem::swap(&mut a, &mut b);
                    std::mem::swap(&mut da, &mut db);
                }
                let t = da / (da - db);
                let x = a + (b - a) * t;
                pos.push(x);
                neg.push(x);
            }
        }
        Ok(Split::Parts(
            ConvexPolygon::new(pos)?,
            ConvexPolygon::new(neg)?,
        ))
    }

    /// Applies `f` to every corner and re-validates.
    pub fn map(&self, f: impl Fn(Point2) -> Point2) -> Result<Self> {
        ConvexPolygon::new(self.vertices.iter().map(|&v| f(v)).collect())
    }
}

fn signed_area(v: &[Point2]) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    let o = v[0];
    let mut s = 0.0;
    for i in 1..v.len() - 1 {
        s += (v[i] - o).cross(v[i + 1] - o);
    }
    0.5 * s
}

/// Sine of the turn at `b` on the path `a -> b -> c`.
fn turn_sine(a: Point2, b: Point2, c: Point2) -> f64 {
    let (u, w) = (b - a, c - b);
    u.cross(w) / (u.norm() * w.norm())
}

fn normalize(mut v: Vec<Point2>) -> Result<Vec<Point2>> {
    if v.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::DegenerateGeometry("non-finite vertex"));
    }
    if v.len() < 3 {
        return Err(Error::DegenerateGeometry("fewer than 3 vertices"));
    }
    if signed_area(&v) < 0.0 {
        v.reverse();
    }
    let n = v.len();
    for i in 0..n {
        if v[i].dist(v[(i + 1) % n]) <= EPS_POINT {
            return Err(Error::DegenerateGeometry("coincident consecutive vertices"));
        }
    }
    // drop straight corners until none remain
    let mut i = 0;
    while v.len() >= 3 && i < v.len() {
        let n = v.len();
        let s = turn_sine(v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
        if s.abs() <= EPS_ANGLE {
            v.remove(i);
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
    if v.len() < 3 {
        return Err(Error::DegenerateGeometry("collinear vertices"));
    }
    let n = v.len();
    for i in 0..n {
        if turn_sine(v[(i + n - 1) % n], v[i], v[(i + 1) % n]) < 0.0 {
            return Err(Error::DegenerateGeometry("polygon is not convex"));
        }
    }
    if signed_area(&v) <= EPS_AREA {
        return Err(Error::DegenerateGeometry("polygon area below tolerance"));
    }
    Ok(v)
}

/// Positive-length overlap of two collinear segments, `None` for anything
/// else (including a single shared point).
pub fn collinear_overlap(s: &Segment, t: &Segment) -> Option<Segment> {
    let len = s.length();
    let u = (s.b - s.a) * (1.0 / len);
    if u.cross(t.a - s.a).abs() > EPS_POINT || u.cross(t.b - s.a).abs() > EPS_POINT {
        return None;
    }
    let (ta, tb) = (u.dot(t.a - s.a), u.dot(t.b - s.a));
    let (t_lo, p_lo, t_hi, p_hi) = if ta <= tb {
        (ta, t.a, tb, t.b)
    } else {
        (tb, t.b, ta, t.a)
    };
    let (lo, plo) = if t_lo > 0.0 { (t_lo, p_lo) } else { (0.0, s.a) };
    let (hi, phi) = if t_hi < len { (t_hi, p_hi) } else { (len, s.b) };
    if hi - lo > EPS_POINT {
        Some(Segment { a: plo, b: phi })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn poly(pts: &[(f64, f64)]) -> ConvexPolygon {
        ConvexPolygon::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    fn unit_square() -> ConvexPolygon {
        poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    }

    fn triangle() -> ConvexPolygon {
        poly(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    }

    /// Convex polygon with `k` corners at random angles on an ellipse.
    fn random_convex(seed: u64, k: usize) -> ConvexPolygon {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let (ax, ay) = (rng.random_range(0.5..3.0), rng.random_range(0.5..3.0));
        let (cx, cy) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        ConvexPolygon::new(
            angles
                .iter()
                .map(|t| Point2::new(cx + ax * t.cos(), cy + ay * t.sin()))
                .collect(),
        )
        .unwrap()
    }

    // independent oracles: fan triangulation from the vertex mean
    fn fan_area(p: &ConvexPolygon) -> f64 {
        let v = p.vertices();
        let c = v.iter().fold(Point2::default(), |s, &q| s + q) * (1.0 / v.len() as f64);
        p.sides()
            .map(|(a, b)| 0.5 * ((a - c).cross(b - c)).abs())
            .sum()
    }

    fn fan_centroid(p: &ConvexPolygon) -> Point2 {
        let v = p.vertices();
        let c = v.iter().fold(Point2::default(), |s, &q| s + q) * (1.0 / v.len() as f64);
        let mut acc = Point2::default();
        let mut total = 0.0;
        for (a, b) in p.sides() {
            let w = 0.5 * (a - c).cross(b - c);
            acc = acc + (a + b + c) * (w / 3.0);
            total += w;
        }
        acc * (1.0 / total)
    }

    #[test]
    fn area_of_simple_shapes() {
        assert_eq!(unit_square().area(), 1.0);
        assert_eq!(triangle().area(), 0.5);
    }

    #[test]
    fn area_matches_fan_triangulation() {
        for seed in 0..50 {
            let p = random_convex(seed, 7);
            let (a, b) = (p.area(), fan_area(&p));
            assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn perimeter_of_simple_shapes() {
        assert_eq!(unit_square().perimeter(), 4.0);
        assert!((triangle().perimeter() - (2.0 + SQRT_2)).abs() < 1e-15);
    }

    #[test]
    fn perimeter_matches_side_sum() {
        for seed in 0..50 {
            let p = random_convex(seed, 9);
            let v = p.vertices();
            let mut oracle = 0.0;
            for i in 0..v.len() {
                let j = (i + 1) % v.len();
                oracle += ((v[j].x - v[i].x).powi(2) + (v[j].y - v[i].y).powi(2)).sqrt();
            }
            assert!((p.perimeter() - oracle).abs() <= 1e-12 * oracle);
        }
    }

    #[test]
    fn centroid_of_simple_shapes() {
        let c = unit_square().centroid();
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
        let c = triangle().centroid();
        assert!((c.x - 1.0 / 3.0).abs() < 1e-15 && (c.y - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn centroid_matches_triangulated_oracle() {
        for seed in 0..50 {
            let p = random_convex(seed, 8);
            let (c, o) = (p.centroid(), fan_centroid(&p));
            assert!(c.dist(o) <= 1e-12, "{c:?} vs {o:?}");
        }
    }

    #[test]
    fn support_width_of_square() {
        let s = unit_square();
        assert!((s.support_width(0.0) - 1.0).abs() < 1e-15);
        assert!((s.support_width(FRAC_PI_4) - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn mean_width_by_quadrature_is_cauchy_value() {
        let s = unit_square();
        let m = 1024;
        let mean: f64 = (0..m)
            .map(|i| s.support_width((i as f64 + 0.5) * PI / m as f64))
            .sum::<f64>()
            / m as f64;
        assert!((mean - 4.0 / PI).abs() < 1e-5, "{mean}");
    }

    #[test]
    fn split_square_in_half() {
        let Split::Parts(a, b) = unit_square().split(&Line::new(0.5, 0.0)).unwrap() else {
            panic!("expected a hit");
        };
        assert_eq!(a.area(), 0.5);
        assert_eq!(b.area(), 0.5);
        assert_eq!(a.len(), 4);
        assert!(a.vertices().iter().all(|v| v.x >= 0.5));
    }

    #[test]
    fn split_missing_line() {
        assert_eq!(
            unit_square().split(&Line::new(2.0, 0.0)).unwrap(),
            Split::Miss
        );
        // grazing a side
        assert_eq!(
            unit_square().split(&Line::new(1.0, 0.0)).unwrap(),
            Split::Miss
        );
    }

    #[test]
    fn split_through_a_corner() {
        // diagonal x + y = 1 through two corners
        let line = Line::new(FRAC_PI_4.cos(), FRAC_PI_4);
        let Split::Parts(a, b) = unit_square().split(&line).unwrap() else {
            panic!("expected a hit");
        };
        assert_eq!(a.len(), 3);
        assert_eq!(b.len(), 3);
        assert!((a.area() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn line_normalisation() {
        let l = Line::new(2.0, PI + 0.3);
        assert!((l.phi - 0.3).abs() < 1e-15);
        assert_eq!(l.p, -2.0);
        let l = Line::through(Point2::new(0.0, 1.0), Point2::new(1.0, 1.0));
        assert!(l.phi.abs() < 1e-15 || (l.phi - FRAC_PI_2).abs() < 1e-15);
        assert!(l.signed_distance(Point2::new(3.0, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn collinear_overlap_cases() {
        let seg = |a: (f64, f64), b: (f64, f64)| {
            Segment::new(Point2::new(a.0, a.1), Point2::new(b.0, b.1)).unwrap()
        };
        let o = collinear_overlap(&seg((0.0, 0.0), (2.0, 0.0)), &seg((1.0, 0.0), (3.0, 0.0)));
        assert_eq!(o, Some(seg((1.0, 0.0), (2.0, 0.0))));
        assert_eq!(
            collinear_overlap(&seg((0.0, 0.0), (1.0, 0.0)), &seg((1.0, 0.0), (2.0, 0.0))),
            None
        );
        assert_eq!(
            collinear_overlap(&seg((0.0, 0.0), (1.0, 0.0)), &seg((0.0, 1.0), (1.0, 1.0))),
            None
        );
        // reversed orientation, contained
        let o = collinear_overlap(&seg((0.0, 0.0), (4.0, 0.0)), &seg((3.0, 0.0), (1.0, 0.0)));
        assert_eq!(o, Some(seg((1.0, 0.0), (3.0, 0.0))));
    }

    #[test]
    fn rejects_degenerate_input() {
        let pts = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        assert!(ConvexPolygon::new(pts(&[(0.0, 0.0), (1.0, 0.0)])).is_err());
        assert!(ConvexPolygon::new(pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])).is_err());
        assert!(
            ConvexPolygon::new(pts(&[(0.0, 0.0), (2.0, 0.0), (1.0, 0.2), (1.0, 1.0)])).is_err()
        );
    }

    #[test]
    fn normalisation_orients_and_merges() {
        let p = poly(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.5), (1.0, 0.0)]);
        assert_eq!(p.len(), 4);
        assert!(p.area() > 0.0);
    }

    #[test]
    fn window_helpers() {
        let w = RectWindow::square(-100.0, 100.0).unwrap();
        assert_eq!(w.area(), 40000.0);
        assert!((w.circumradius() - 100.0 * SQRT_2).abs() < 1e-12);
        assert!(w.on_boundary(Point2::new(100.0, 3.0), EPS_POINT));
        assert!(!w.on_boundary(Point2::new(99.0, 3.0), EPS_POINT));
        assert!(RectWindow::new(1.0, 0.0, 0.0, 1.0).is_err());
    }

    fn arb_polygon() -> impl Strategy<Value = ConvexPolygon> {
        (any::<u64>(), 3usize..12).prop_map(|(s, k)| random_convex(s, k))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn split_conserves_area_and_perimeter(p in arb_polygon(), phi in 0.0..PI, u in 0.01f64..0.99) {
            let (lo, hi) = p.projection_interval(phi);
            let line = Line::new(lo + u * (hi - lo), phi);
            match p.split(&line) {
                Ok(Split::Parts(a, b)) => {
                    let area = p.area();
                    prop_assert!((a.area() + b.area() - area).abs() <= 1e-9 * area);
                    let shared: Vec<Point2> = a.vertices().iter().copied()
                        .filter(|v| b.vertices().contains(v)).collect();
                    prop_assert_eq!(shared.len(), 2);
                    let chord = shared[0].dist(shared[1]);
                    let per = p.perimeter();
                    prop_assert!((a.perimeter() + b.perimeter() - per - 2.0 * chord).abs() <= 1e-9 * per);
                }
                Ok(Split::Miss) => prop_assert!(false, "interior line missed"),
                // slivers are legitimately rejected
                Err(Error::DegenerateGeometry(_)) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }

    proptest! {
        #[test]
        fn support_width_is_unoriented(p in arb_polygon(), phi in 0.0..PI) {
            let n = Point2::unit(phi);
            prop_assert_eq!(p.support_width_along(n), p.support_width_along(-n));
            let back = p.support_width(phi + PI);
            prop_assert!((back - p.support_width(phi)).abs() <= 1e-12 * back);
        }

        #[test]
        fn centroid_is_inside(p in arb_polygon()) {
            prop_assert!(p.contains(p.centroid(), 0.0));
        }

        #[test]
        fn area_is_rigid_motion_invariant(p in arb_polygon(), r in 0usize..12, theta in 0.0..(2.0 * PI), dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
            let area = p.area();
            let mut v = p.vertices().to_vec();
            let k = r % v.len();
            v.rotate_left(k);
            let rotated = ConvexPolygon::new(v).unwrap();
            prop_assert!((rotated.area() - area).abs() <= 1e-12 * area);
            let (s, c) = theta.sin_cos();
            let moved = p.map(|z| Point2::new(c * z.x - s * z.y + dx, s * z.x + c * z.y + dy)).unwrap();
            prop_assert!((moved.area() - area).abs() <= 1e-12 * area);
        }
    }
}
