//! Planar primitives: points, circular arcs, line segments and sampled
//! curves, plus the piecewise [`BoundaryCurve`] built from them.
//!
//! Angles are radians. Arcs carry a start angle and a signed sweep: a
//! positive sweep runs counterclockwise. Curvature is always signed with
//! respect to the leftward normal of the direction of travel.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Maximum gap allowed between consecutive segment endpoints.
pub const JOIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Point::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2-D cross product.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn distance(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Reflection across the y-axis.
    pub fn mirrored(self) -> Point {
        Point::new(-self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

pub(crate) fn unit(angle: f64) -> Point {
    Point::new(angle.cos(), angle.sin())
}

/// Smallest absolute difference between two directions, in `[0, π]`.
pub fn angle_between(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularArc {
    pub center: Point,
    pub radius: f64,
    pub start_angle: f64,
    /// Signed angular extent; positive is counterclockwise.
    pub sweep: f64,
}

impl CircularArc {
    pub fn new(center: Point, radius: f64, start_angle: f64, sweep: f64) -> Result<Self> {
        if !center.is_finite() || !start_angle.is_finite() || !sweep.is_finite() {
            return invalid("arc parameters must be finite");
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return invalid(format!("arc radius must be positive, got {radius}"));
        }
        if sweep == 0.0 || sweep.abs() > TAU * (1.0 + 1e-12) {
            return invalid(format!(
                "arc sweep must lie in (0, 2π] in magnitude, got {sweep}"
            ));
        }
        Ok(CircularArc {
            center,
            radius,
            start_angle,
            sweep,
        })
    }

    pub fn full_circle(center: Point, radius: f64, ccw: bool) -> Result<Self> {
        let sweep = if ccw { TAU } else { -TAU };
        Self::new(center, radius, 0.0, sweep)
    }

    /// The arc of the circle `(center, radius)` running from `from` to `to`
    /// in the given rotational direction. Both points must lie on the circle.
    pub fn between(center: Point, radius: f64, from: Point, to: Point, ccw: bool) -> Result<Self> {
        for q in [from, to] {
            if (q.distance(center) - radius).abs() > JOIN_TOL * radius.max(1.0) * 10.0 {
                return invalid("arc endpoint is not on the circle");
            }
        }
        let a0 = (from - center).angle();
        let a1 = (to - center).angle();
        let mut sweep = if ccw {
            (a1 - a0).rem_euclid(TAU)
        } else {
            -(a0 - a1).rem_euclid(TAU)
        };
        if sweep == 0.0 {
            sweep = if ccw { TAU } else { -TAU };
        }
        Self::new(center, radius, a0, sweep)
    }

    pub fn end_angle(&self) -> f64 {
        self.start_angle + self.sweep
    }

    pub fn is_ccw(&self) -> bool {
        self.sweep > 0.0
    }

    pub fn point_at(&self, angle: f64) -> Point {
        self.center + unit(angle) * self.radius
    }

    pub fn start(&self) -> Point {
        self.point_at(self.start_angle)
    }

    pub fn end(&self) -> Point {
        self.point_at(self.end_angle())
    }

    /// Direction of travel at the given polar angle about the center.
    pub fn heading_at(&self, angle: f64) -> f64 {
        if self.is_ccw() {
            angle + PI / 2.0
        } else {
            angle - PI / 2.0
        }
    }

    pub fn signed_curvature(&self) -> f64 {
        self.sweep.signum() / self.radius
    }

    pub fn length(&self) -> f64 {
        self.radius * self.sweep.abs()
    }

    /// Polar angle about the center of the circle point nearest the origin,
    /// if that point lies inside the arc's angular range.
    pub fn angle_nearest_origin(&self) -> Option<f64> {
        if self.center.norm() == 0.0 {
            return None;
        }
        let target = (-self.center).angle();
        let off = if self.sweep > 0.0 {
            (target - self.start_angle).rem_euclid(TAU)
        } else {
            (self.start_angle - target).rem_euclid(TAU)
        };
        (off > 0.0 && off < self.sweep.abs()).then_some({
            if self.sweep > 0.0 {
                self.start_angle + off
            } else {
                self.start_angle - off
            }
        })
    }

    pub fn min_radius(&self) -> f64 {
        let mut r = self.start().norm().min(self.end().norm());
        if let Some(a) = self.angle_nearest_origin() {
            r = r.min(self.point_at(a).norm());
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    pub a: Point,
    pub b: Point,
}

impl LineSegment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return invalid("segment endpoints must be finite");
        }
        Ok(LineSegment { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn heading(&self) -> f64 {
        (self.b - self.a).angle()
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.a + (self.b - self.a) * t
    }

    /// Parameter in `[0, 1]` of the point closest to the origin.
    pub fn param_nearest_origin(&self) -> f64 {
        let d = self.b - self.a;
        let len2 = d.norm_sq();
        if len2 == 0.0 {
            return 0.0;
        }
        (-self.a.dot(d) / len2).clamp(0.0, 1.0)
    }

    pub fn min_radius(&self) -> f64 {
        self.point_at(self.param_nearest_origin()).norm()
    }
}

/// One sample of a smooth curve: position, cumulative arclength, tangent
/// direction and signed curvature (with respect to the leftward normal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub point: Point,
    pub s: f64,
    pub heading: f64,
    pub curvature: f64,
}

/// A smooth curve known only through samples, e.g. ODE output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    samples: Vec<CurveSample>,
}

impl Polyline {
    pub fn new(samples: Vec<CurveSample>) -> Result<Self> {
        if samples.len() < 2 {
            return invalid("a polyline needs at least two samples");
        }
        for w in samples.windows(2) {
            if !(w[1].s > w[0].s) {
                return invalid("polyline arclength must be strictly increasing");
            }
        }
        if samples
            .iter()
            .any(|q| !q.point.is_finite() || !q.heading.is_finite() || !q.curvature.is_finite())
        {
            return invalid("polyline samples must be finite");
        }
        Ok(Polyline { samples })
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn start(&self) -> Point {
        self.samples[0].point
    }

    pub fn end(&self) -> Point {
        self.samples[self.samples.len() - 1].point
    }

    /// Arclength covered by the samples.
    pub fn length(&self) -> f64 {
        self.samples[self.samples.len() - 1].s - self.samples[0].s
    }

    fn map(&self, f: impl Fn(&CurveSample) -> CurveSample) -> Polyline {
        Polyline {
            samples: self.samples.iter().map(f).collect(),
        }
    }

    pub fn reversed(&self) -> Polyline {
        let total = self.samples[self.samples.len() - 1].s;
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|q| CurveSample {
                point: q.point,
                s: total - q.s,
                heading: q.heading + PI,
                curvature: -q.curvature,
            })
            .collect();
        Polyline { samples }
    }

    pub fn scaled(&self, k: f64) -> Polyline {
        self.map(|q| CurveSample {
            point: q.point * k,
            s: q.s * k,
            heading: q.heading,
            curvature: q.curvature / k,
        })
    }

    pub fn rotated(&self, angle: f64) -> Polyline {
        self.map(|q| CurveSample {
            point: q.point.rotated(angle),
            s: q.s,
            heading: q.heading + angle,
            curvature: q.curvature,
        })
    }

    pub fn mirrored(&self) -> Polyline {
        self.map(|q| CurveSample {
            point: q.point.mirrored(),
            s: q.s,
            heading: PI - q.heading,
            curvature: -q.curvature,
        })
    }

    pub fn min_radius(&self) -> f64 {
        self.samples
            .iter()
            .map(|q| q.point.norm())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Segment {
    Arc(CircularArc),
    Line(LineSegment),
    Polyline(Polyline),
}

impl Segment {
    pub fn start(&self) -> Point {
        match self {
            Segment::Arc(a) => a.start(),
            Segment::Line(l) => l.a,
            Segment::Polyline(p) => p.start(),
        }
    }

    pub fn end(&self) -> Point {
        match self {
            Segment::Arc(a) => a.end(),
            Segment::Line(l) => l.b,
            Segment::Polyline(p) => p.end(),
        }
    }

    /// Direction of travel at the start point.
    pub fn start_heading(&self) -> f64 {
        match self {
            Segment::Arc(a) => a.heading_at(a.start_angle),
            Segment::Line(l) => l.heading(),
            Segment::Polyline(p) => p.samples()[0].heading,
        }
    }

    /// Direction of travel at the end point.
    pub fn end_heading(&self) -> f64 {
        match self {
            Segment::Arc(a) => a.heading_at(a.end_angle()),
            Segment::Line(l) => l.heading(),
            Segment::Polyline(p) => p.samples()[p.samples().len() - 1].heading,
        }
    }

    pub fn euclidean_length(&self) -> f64 {
        match self {
            Segment::Arc(a) => a.length(),
            Segment::Line(l) => l.length(),
            Segment::Polyline(p) => p.length(),
        }
    }

    pub fn min_radius(&self) -> f64 {
        match self {
            Segment::Arc(a) => a.min_radius(),
            Segment::Line(l) => l.min_radius(),
            Segment::Polyline(p) => p.min_radius(),
        }
    }

    pub fn reversed(&self) -> Segment {
        match self {
            Segment::Arc(a) => Segment::Arc(CircularArc {
                start_angle: a.end_angle(),
                sweep: -a.sweep,
                ..*a
            }),
            Segment::Line(l) => Segment::Line(LineSegment { a: l.b, b: l.a }),
            Segment::Polyline(p) => Segment::Polyline(p.reversed()),
        }
    }

    pub fn scaled(&self, k: f64) -> Segment {
        match self {
            Segment::Arc(a) => Segment::Arc(CircularArc {
                center: a.center * k,
                radius: a.radius * k,
                ..*a
            }),
            Segment::Line(l) => Segment::Line(LineSegment {
                a: l.a * k,
                b: l.b * k,
            }),
            Segment::Polyline(p) => Segment::Polyline(p.scaled(k)),
        }
    }

    pub fn rotated(&self, angle: f64) -> Segment {
        match self {
            Segment::Arc(a) => Segment::Arc(CircularArc {
                center: a.center.rotated(angle),
                start_angle: a.start_angle + angle,
                ..*a
            }),
            Segment::Line(l) => Segment::Line(LineSegment {
                a: l.a.rotated(angle),
                b: l.b.rotated(angle),
            }),
            Segment::Polyline(p) => Segment::Polyline(p.rotated(angle)),
        }
    }

    /// Reflection across the y-axis; the direction of travel is kept.
    pub fn mirrored(&self) -> Segment {
        match self {
            Segment::Arc(a) => Segment::Arc(CircularArc {
                center: a.center.mirrored(),
                radius: a.radius,
                start_angle: PI - a.start_angle,
                sweep: -a.sweep,
            }),
            Segment::Line(l) => Segment::Line(LineSegment {
                a: l.a.mirrored(),
                b: l.b.mirrored(),
            }),
            Segment::Polyline(p) => Segment::Polyline(p.mirrored()),
        }
    }

    /// Points along the segment, endpoints included, roughly `per_turn`
    /// points per full revolution for arcs.
    pub fn trace(&self, per_turn: usize) -> Vec<Point> {
        match self {
            Segment::Arc(a) => {
                let n = ((a.sweep.abs() / TAU) * per_turn as f64).ceil().max(2.0) as usize;
                (0..=n)
                    .map(|i| a.point_at(a.start_angle + a.sweep * i as f64 / n as f64))
                    .collect()
            }
            Segment::Line(l) => vec![l.a, l.b],
            Segment::Polyline(p) => p.samples().iter().map(|q| q.point).collect(),
        }
    }
}

/// A piecewise path of arcs, segments and sampled curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    segments: Vec<Segment>,
    closed: bool,
}

impl BoundaryCurve {
    pub fn open(segments: Vec<Segment>) -> Result<Self> {
        let c = BoundaryCurve {
            segments,
            closed: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn closed(segments: Vec<Segment>) -> Result<Self> {
        let c = BoundaryCurve {
            segments,
            closed: true,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return invalid("a curve needs at least one segment");
        }
        for (i, w) in self.segments.windows(2).enumerate() {
            let gap = w[0].end().distance(w[1].start());
            if !(gap <= JOIN_TOL) {
                return invalid(format!(
                    "segments {i} and {} do not join (gap {gap:e})",
                    i + 1
                ));
            }
        }
        if self.closed {
            let gap = self.end().distance(self.start());
            if !(gap <= JOIN_TOL) {
                return invalid(format!("closed curve does not close (gap {gap:e})"));
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn start(&self) -> Point {
        self.segments[0].start()
    }

    pub fn end(&self) -> Point {
        self.segments[self.segments.len() - 1].end()
    }

    pub fn euclidean_length(&self) -> f64 {
        self.segments.iter().map(Segment::euclidean_length).sum()
    }

    pub fn min_radius(&self) -> f64 {
        self.segments
            .iter()
            .map(Segment::min_radius)
            .fold(f64::INFINITY, f64::min)
    }

    fn map(&self, f: impl Fn(&Segment) -> Segment) -> BoundaryCurve {
        BoundaryCurve {
            segments: self.segments.iter().map(f).collect(),
            closed: self.closed,
        }
    }

    pub fn reversed(&self) -> BoundaryCurve {
        BoundaryCurve {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
            closed: self.closed,
        }
    }

    /// Scale about the origin.
    pub fn scaled(&self, k: f64) -> Result<BoundaryCurve> {
        if !(k > 0.0 && k.is_finite()) {
            return invalid(format!("scale factor must be positive, got {k}"));
        }
        Ok(self.map(|s| s.scaled(k)))
    }

    /// Rotate about the origin.
    pub fn rotated(&self, angle: f64) -> BoundaryCurve {
        self.map(|s| s.rotated(angle))
    }

    pub fn mirrored(&self) -> BoundaryCurve {
        self.map(Segment::mirrored)
    }

    /// Polygonal trace of the whole curve without repeated joint points.
    pub fn trace(&self, per_turn: usize) -> Vec<Point> {
        let mut pts: Vec<Point> = Vec::new();
        for seg in &self.segments {
            let t = seg.trace(per_turn);
            let skip = usize::from(!pts.is_empty());
            pts.extend(t.into_iter().skip(skip));
        }
        if self.closed && pts.len() > 1 {
            pts.pop();
        }
        pts
    }

    /// Axis-aligned bounding box of a polygonal trace: `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let pts = self.trace(256);
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for q in pts {
            lo = Point::new(lo.x.min(q.x), lo.y.min(q.y));
            hi = Point::new(hi.x.max(q.x), hi.y.max(q.y));
        }
        (lo, hi)
    }

    /// Fails when a polygonal approximation of the closed loop crosses
    /// itself. Curves that nearly touch at a distance below the chord sagitta
    /// may be misreported.
    pub fn check_simple(&self) -> Result<()> {
        if !self.closed {
            return invalid("simplicity is only defined for closed loops");
        }
        let mut pts = self.trace(96);
        // Long sampled curves are thinned; the check is coarse by nature.
        if pts.len() > 600 {
            let step = pts.len().div_ceil(600);
            pts = pts.into_iter().step_by(step).collect();
        }
        let n = pts.len();
        if n < 3 {
            return Ok(());
        }
        let edge = |i: usize| (pts[i], pts[(i + 1) % n]);
        for i in 0..n {
            let (a, b) = edge(i);
            let (lo_a, hi_a) = (
                Point::new(a.x.min(b.x), a.y.min(b.y)),
                Point::new(a.x.max(b.x), a.y.max(b.y)),
            );
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = edge(j);
                if c.x.max(d.x) < lo_a.x
                    || c.x.min(d.x) > hi_a.x
                    || c.y.max(d.y) < lo_a.y
                    || c.y.min(d.y) > hi_a.y
                {
                    continue;
                }
                if segments_cross(a, b, c, d) {
                    return Err(Error::SelfIntersecting(format!(
                        "chords {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn arc_between_picks_direction() {
        let c = Point::ORIGIN;
        let a =
            CircularArc::between(c, 1.0, Point::new(1.0, 0.0), Point::new(0.0, 1.0), true).unwrap();
        assert_abs_diff_eq!(a.sweep, PI / 2.0, epsilon = 1e-15);
        let b = CircularArc::between(c, 1.0, Point::new(1.0, 0.0), Point::new(0.0, 1.0), false)
            .unwrap();
        assert_abs_diff_eq!(b.sweep, -1.5 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(b.end().y, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn join_tolerance_enforced() {
        let l1 = Segment::Line(LineSegment::new(Point::ORIGIN, Point::new(1.0, 0.0)).unwrap());
        let l2 =
            Segment::Line(LineSegment::new(Point::new(1.0, 1e-6), Point::new(1.0, 1.0)).unwrap());
        assert!(BoundaryCurve::open(vec![l1.clone(), l2]).is_err());
        let l3 =
            Segment::Line(LineSegment::new(Point::new(1.0, 5e-10), Point::new(1.0, 1.0)).unwrap());
        assert!(BoundaryCurve::open(vec![l1.clone(), l3.clone()]).is_ok());
        assert!(BoundaryCurve::closed(vec![l1, l3]).is_err());
    }

    #[test]
    fn polyline_rejects_nonmonotone_arclength() {
        let q = |s: f64| CurveSample {
            point: Point::new(s, 0.0),
            s,
            heading: 0.0,
            curvature: 0.0,
        };
        assert!(Polyline::new(vec![q(0.0), q(1.0), q(1.0)]).is_err());
        assert!(Polyline::new(vec![q(0.0)]).is_err());
        assert!(Polyline::new(vec![q(0.0), q(0.5), q(1.0)]).is_ok());
    }

    #[test]
    fn reversal_and_mirror_keep_joins() {
        let arc = Segment::Arc(CircularArc::new(Point::new(1.0, 0.0), 1.0, PI, -1.0).unwrap());
        let r = arc.reversed();
        assert_abs_diff_eq!(r.start().distance(arc.end()), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            angle_between(r.start_heading(), arc.end_heading() + PI),
            0.0,
            epsilon = 1e-12
        );
        let m = arc.mirrored();
        assert_abs_diff_eq!(
            m.start().distance(arc.start().mirrored()),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(m.end().distance(arc.end().mirrored()), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn nearest_origin_on_arc() {
        let a = CircularArc::new(Point::new(2.0, 0.0), 1.0, PI / 2.0, PI).unwrap();
        assert_abs_diff_eq!(a.angle_nearest_origin().unwrap(), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(a.min_radius(), 1.0, epsilon = 1e-15);
        let b = CircularArc::new(Point::new(2.0, 0.0), 1.0, -PI / 2.0, PI).unwrap();
        assert!(b.angle_nearest_origin().is_none());
    }

    #[test]
    fn figure_eight_is_not_simple() {
        let p = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let segs = (0..4)
            .map(|i| Segment::Line(LineSegment::new(p[i], p[(i + 1) % 4]).unwrap()))
            .collect();
        let c = BoundaryCurve::closed(segs).unwrap();
        assert!(matches!(c.check_simple(), Err(Error::SelfIntersecting(_))));
        let circle = BoundaryCurve::closed(vec![Segment::Arc(
            CircularArc::full_circle(Point::ORIGIN, 1.0, true).unwrap(),
        )])
        .unwrap();
        assert!(circle.check_simple().is_ok());
    }
}
