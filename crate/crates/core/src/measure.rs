//! Weighted length and area under the radial density `r^p`.
//!
//! Area is never integrated over the plane. The vector field
//! `r^p (x, y) / (p + 2)` has divergence `r^p`, so the weighted area of a
//! positively oriented loop is the boundary integral
//! `(1 / (p + 2)) ∮ r^p (x dy - y dx)`, computed segment by segment.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{BoundaryCurve, CircularArc, LineSegment, Polyline, Segment, JOIN_TOL};
use crate::quadrature::{integrate_pieces, QuadResult};

/// Default absolute tolerance of the measure routines.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Exponent `p` of the radial density `f(r) = r^p`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DensityExponent(f64);

impl DensityExponent {
    pub const EUCLIDEAN: DensityExponent = DensityExponent(0.0);

    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return invalid(format!("density exponent must be finite, got {p}"));
        }
        Ok(DensityExponent(p))
    }

    /// Exponent usable for candidate construction (`p >= 0`).
    pub fn nonnegative(p: f64) -> Result<Self> {
        let d = Self::new(p)?;
        if p < 0.0 {
            return invalid(format!("density exponent must be non-negative, got {p}"));
        }
        Ok(d)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn density(self, r: f64) -> f64 {
        if self.0 == 0.0 {
            1.0
        } else {
            r.powf(self.0)
        }
    }
}

impl std::fmt::Display for DensityExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedMeasureReport {
    pub weighted_length: f64,
    /// Signed: positive for counterclockwise loops.
    pub weighted_area: f64,
    pub quadrature_error_estimate: f64,
}

fn check_integrable(seg: &Segment, p: DensityExponent) -> Result<()> {
    if p.value() < 0.0 && seg.min_radius() <= JOIN_TOL {
        return Err(Error::Singularity(format!(
            "segment reaches the origin with p = {p} < 0"
        )));
    }
    Ok(())
}

/// `∫ r^p ds` over one segment.
pub fn segment_weighted_length(seg: &Segment, p: DensityExponent, tol: f64) -> Result<QuadResult> {
    check_integrable(seg, p)?;
    match seg {
        Segment::Arc(a) => arc_integral(a, tol, |q, _| p.density(q.norm()) * a.radius)
            .map(|r| r.scale(a.sweep.signum())),
        Segment::Line(l) => {
            let len = l.length();
            if len == 0.0 {
                return Ok(QuadResult::ZERO);
            }
            line_integral(l, tol, |q| p.density(q.norm()) * len)
        }
        Segment::Polyline(pl) => polyline_integral(pl, tol, |q| {
            let r2 = q.point.norm_sq();
            let radial = q.point.x * q.heading.cos() + q.point.y * q.heading.sin();
            let g = p.density(r2.sqrt());
            let dg = radial_density_derivative(p, r2)? * radial;
            Ok((g, dg))
        }),
    }
}

/// `(1 / (p + 2)) ∫ r^p (x dy - y dx)` over one segment; summing this over
/// a positively oriented loop gives its weighted area.
pub fn segment_area_term(seg: &Segment, p: DensityExponent, tol: f64) -> Result<QuadResult> {
    let pv = p.value();
    if pv <= -2.0 {
        return invalid(format!("weighted area requires p > -2, got {pv}"));
    }
    check_integrable(seg, p)?;
    let k = 1.0 / (pv + 2.0);
    match seg {
        Segment::Arc(a) => arc_integral(a, tol * (pv + 2.0), |q, theta| {
            let (s, c) = theta.sin_cos();
            p.density(q.norm()) * a.radius * (q.x * c + q.y * s)
        })
        .map(|r| r.scale(k)),
        Segment::Line(l) => {
            let moment = l.a.cross(l.b - l.a);
            if moment == 0.0 {
                return Ok(QuadResult::ZERO);
            }
            line_integral(l, tol * (pv + 2.0), |q| p.density(q.norm()) * moment).map(|r| r.scale(k))
        }
        Segment::Polyline(pl) => polyline_integral(pl, tol, |q| {
            let (sn, cs) = q.heading.sin_cos();
            let (x, y) = (q.point.x, q.point.y);
            let r2 = q.point.norm_sq();
            let moment = x * sn - y * cs;
            let radial = x * cs + y * sn;
            let f = p.density(r2.sqrt());
            let df = radial_density_derivative(p, r2)?;
            Ok((k * f * moment, k * (df * moment + f * q.curvature) * radial))
        }),
    }
}

// d(r^p)/ds = p r^(p-2) (x cos φ + y sin φ); this returns p r^(p-2).
fn radial_density_derivative(p: DensityExponent, r2: f64) -> Result<f64> {
    let pv = p.value();
    if pv == 0.0 {
        return Ok(0.0);
    }
    if r2 == 0.0 {
        return if pv >= 2.0 {
            Ok(if pv == 2.0 { 2.0 } else { 0.0 })
        } else {
            Err(Error::Singularity(
                "sampled curve passes through the origin".into(),
            ))
        };
    }
    Ok(pv * r2.powf(0.5 * pv - 1.0))
}

fn arc_integral(
    a: &CircularArc,
    tol: f64,
    f: impl Fn(crate::geometry::Point, f64) -> f64,
) -> Result<QuadResult> {
    let (t0, t1) = (a.start_angle, a.end_angle());
    let mut breaks = vec![t0];
    if let Some(t) = a.angle_nearest_origin() {
        breaks.push(t);
    }
    breaks.push(t1);
    integrate_pieces(|t| f(a.point_at(t), t), &breaks, tol)
}

fn line_integral(
    l: &LineSegment,
    tol: f64,
    f: impl Fn(crate::geometry::Point) -> f64,
) -> Result<QuadResult> {
    let t = l.param_nearest_origin();
    let breaks: Vec<f64> = if t > 0.0 && t < 1.0 {
        vec![0.0, t, 1.0]
    } else {
        vec![0.0, 1.0]
    };
    integrate_pieces(|t| f(l.point_at(t)), &breaks, tol)
}

/// Endpoint-corrected trapezoid rule in arclength, using the integrand and
/// its arclength derivative at every sample, with a Richardson comparison
/// against the rule on every other sample.
fn polyline_integral(
    pl: &Polyline,
    tol: f64,
    g: impl Fn(&crate::geometry::CurveSample) -> Result<(f64, f64)>,
) -> Result<QuadResult> {
    let samples = pl.samples();
    let vals: Vec<(f64, f64)> = samples.iter().map(&g).collect::<Result<_>>()?;
    let rule = |i: usize, j: usize| {
        let h = samples[j].s - samples[i].s;
        let (gi, di) = vals[i];
        let (gj, dj) = vals[j];
        0.5 * h * (gi + gj) + h * h * (di - dj) / 12.0
    };
    let n = samples.len() - 1;
    let fine: f64 = (0..n).map(|i| rule(i, i + 1)).sum();
    let (value, error) = if n == 1 {
        let h = samples[1].s - samples[0].s;
        (fine, (h * h * (vals[0].1 - vals[1].1) / 12.0).abs())
    } else {
        let mut coarse: f64 = (0..n / 2).map(|i| rule(2 * i, 2 * i + 2)).sum();
        if n % 2 == 1 {
            coarse += rule(n - 1, n);
        }
        let diff = (fine - coarse) / 15.0;
        (fine + diff, diff.abs())
    };
    if !value.is_finite() {
        return Err(Error::Quadrature {
            tol,
            estimate: f64::INFINITY,
        });
    }
    if error > tol {
        return Err(Error::Quadrature {
            tol,
            estimate: error,
        });
    }
    Ok(QuadResult {
        value,
        error,
        evaluations: samples.len(),
    })
}

fn per_segment_tol(curve: &BoundaryCurve, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    Ok(tol / curve.segments().len() as f64)
}

fn sum_segments(
    curve: &BoundaryCurve,
    tol: f64,
    f: impl Fn(&Segment, f64) -> Result<QuadResult>,
) -> Result<QuadResult> {
    let t = per_segment_tol(curve, tol)?;
    curve
        .segments()
        .iter()
        .try_fold(QuadResult::ZERO, |acc, s| Ok(acc.combine(f(s, t)?)))
}

/// `∫_curve r^p ds` with estimated absolute error at most `tol`.
pub fn weighted_length(curve: &BoundaryCurve, p: DensityExponent, tol: f64) -> Result<f64> {
    Ok(weighted_length_detailed(curve, p, tol)?.value)
}

pub fn weighted_length_detailed(
    curve: &BoundaryCurve,
    p: DensityExponent,
    tol: f64,
) -> Result<QuadResult> {
    sum_segments(curve, tol, |s, t| segment_weighted_length(s, p, t))
}

/// Weighted area enclosed by a closed, simple loop; negative when the loop
/// runs clockwise.
pub fn weighted_area(curve: &BoundaryCurve, p: DensityExponent, tol: f64) -> Result<f64> {
    Ok(weighted_area_detailed(curve, p, tol)?.value)
}

pub fn weighted_area_detailed(
    curve: &BoundaryCurve,
    p: DensityExponent,
    tol: f64,
) -> Result<QuadResult> {
    if !curve.is_closed() {
        return invalid("weighted area needs a closed loop");
    }
    curve.check_simple()?;
    sum_segments(curve, tol, |s, t| segment_area_term(s, p, t))
}

/// Length and area of a closed loop in one report.
pub fn measure_loop(
    curve: &BoundaryCurve,
    p: DensityExponent,
    tol: f64,
) -> Result<WeightedMeasureReport> {
    let len = weighted_length_detailed(curve, p, tol / 2.0)?;
    let area = weighted_area_detailed(curve, p, tol / 2.0)?;
    Ok(WeightedMeasureReport {
        weighted_length: len.value,
        weighted_area: area.value,
        quadrature_error_estimate: len.error + area.error,
    })
}

/// Geometry that can be scaled about the origin.
pub trait Scalable: Sized {
    fn scaled_by(&self, lambda: f64) -> Result<Self>;
}

impl Scalable for BoundaryCurve {
    fn scaled_by(&self, lambda: f64) -> Result<Self> {
        self.scaled(lambda)
    }
}

impl Scalable for Segment {
    fn scaled_by(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("scale factor must be positive, got {lambda}"));
        }
        Ok(self.scaled(lambda))
    }
}

/// Scale every point by `lambda` about the origin. Under `r^p` in the plane,
/// weighted length then grows by `lambda^(p+1)` and weighted area by
/// `lambda^(p+2)`.
pub fn scale_geometry<T: Scalable>(geometry: &T, lambda: f64) -> Result<T> {
    geometry.scaled_by(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CurveSample, Point};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn circle(c: Point, r: f64) -> BoundaryCurve {
        BoundaryCurve::closed(vec![Segment::Arc(
            CircularArc::full_circle(c, r, true).unwrap(),
        )])
        .unwrap()
    }

    fn p(v: f64) -> DensityExponent {
        DensityExponent::new(v).unwrap()
    }

    #[test]
    fn origin_circle_length_and_area() {
        let c = circle(Point::ORIGIN, 1.0);
        assert_abs_diff_eq!(
            weighted_length(&c, p(2.0), 1e-12).unwrap(),
            2.0 * PI,
            epsilon = 1e-11
        );
        assert_abs_diff_eq!(
            weighted_area(&c, p(2.0), 1e-12).unwrap(),
            PI / 2.0,
            epsilon = 1e-11
        );
    }

    #[test]
    fn circle_through_origin_area() {
        // ∫ (2R cos θ)^(p+2) / (p+2) dθ over (-π/2, π/2) at p = 2 is 3πR^4/2.
        for r in [0.5, 1.0, 1.7] {
            let c = circle(Point::new(r, 0.0), r);
            assert_relative_eq!(
                weighted_area(&c, p(2.0), 1e-12).unwrap(),
                1.5 * PI * r.powi(4),
                max_relative = 1e-11
            );
        }
    }

    #[test]
    fn radial_segment_length() {
        let l = BoundaryCurve::open(vec![Segment::Line(
            LineSegment::new(Point::ORIGIN, Point::new(1.0, 0.0)).unwrap(),
        )])
        .unwrap();
        assert_abs_diff_eq!(
            weighted_length(&l, p(1.0), 1e-12).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            weighted_length(&l, p(0.5), 1e-12).unwrap(),
            1.0 / 1.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn euclidean_density_gives_plain_measures() {
        let sq: Vec<Point> = vec![
            Point::new(1.0, 1.0),
            Point::new(3.0, 1.0),
            Point::new(3.0, 2.0),
            Point::new(1.0, 2.0),
        ];
        let segs = (0..4)
            .map(|i| Segment::Line(LineSegment::new(sq[i], sq[(i + 1) % 4]).unwrap()))
            .collect();
        let c = BoundaryCurve::closed(segs).unwrap();
        let rep = measure_loop(&c, DensityExponent::EUCLIDEAN, 1e-12).unwrap();
        assert_abs_diff_eq!(rep.weighted_length, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.weighted_area, 2.0, epsilon = 1e-12);
        assert!(rep.quadrature_error_estimate <= 1e-12);
    }

    #[test]
    fn open_loop_area_is_rejected() {
        let l = BoundaryCurve::open(vec![Segment::Line(
            LineSegment::new(Point::ORIGIN, Point::new(1.0, 0.0)).unwrap(),
        )])
        .unwrap();
        assert!(matches!(
            weighted_area(&l, p(1.0), 1e-10),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn negative_p_through_origin_is_singular() {
        let l = BoundaryCurve::open(vec![Segment::Line(
            LineSegment::new(Point::ORIGIN, Point::new(1.0, 0.0)).unwrap(),
        )])
        .unwrap();
        assert!(matches!(
            weighted_length(&l, p(-0.5), 1e-10),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn sampled_circle_matches_arc() {
        // Samples of the circle of radius 1 about (0.3, 0.2), counterclockwise.
        let c = Point::new(0.3, 0.2);
        let n = 400;
        let samples: Vec<CurveSample> = (0..=n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                CurveSample {
                    point: c + Point::polar(1.0, t),
                    s: t,
                    heading: t + PI / 2.0,
                    curvature: 1.0,
                }
            })
            .collect();
        let pl = BoundaryCurve::closed(vec![Segment::Polyline(Polyline::new(samples).unwrap())])
            .unwrap();
        let arc = circle(c, 1.0);
        for pv in [0.0, 1.0, 2.5] {
            let a = weighted_length(&arc, p(pv), 1e-12).unwrap();
            let b = weighted_length(&pl, p(pv), 1e-9).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            let a = weighted_area(&arc, p(pv), 1e-12).unwrap();
            let b = weighted_area(&pl, p(pv), 1e-9).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn scaling_rejects_nonpositive() {
        let c = circle(Point::ORIGIN, 1.0);
        assert!(scale_geometry(&c, 0.0).is_err());
        assert!(scale_geometry(&c, -2.0).is_err());
        assert_eq!(scale_geometry(&c, 1.0).unwrap(), c);
    }
}
