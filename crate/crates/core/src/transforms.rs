//! Conformal maps to cone metrics, geodesics of `r^p |dz|`, and the
//! area-preserving radial map `Φ_ε: (r, θ) ↦ (√(r² − ε), θ)`.
//!
//! `w = z^{p+1}/(p+1)` carries the perimeter density to the flat metric on
//! a cone of angle `(p+1)·2π`; `w = (2/(p+2)) z^{(p+2)/2}` carries the
//! area density to the flat one. Powers are taken in polar form with
//! `arg z ∈ (−π, π]`; paths are developed continuously instead.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    BoundaryCurve, CircularArc, CurveSample, LineSegment, Point, Polyline, Segment,
};
use crate::measure::DensityExponent;
use crate::quadrature::integrate;

/// Samples per segment when a map has no closed-form image.
pub const PUSHFORWARD_INTERVALS: usize = 1024;

/// A point of a flat cone in polar form. The angle ranges over the whole
/// cone, not just `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub radius: f64,
    pub angle: f64,
}

impl ConePoint {
    /// Embedding in the plane; only injective on sectors of angle below `2π`.
    pub fn to_planar(self) -> Point {
        Point::polar(self.radius, self.angle)
    }
}

/// `z ↦ z^k / k` in polar form, principal branch.
fn power_map(z: Point, k: f64) -> ConePoint {
    let r = z.norm();
    if r == 0.0 {
        return ConePoint {
            radius: 0.0,
            angle: 0.0,
        };
    }
    ConePoint {
        radius: r.powf(k) / k,
        angle: k * z.angle(),
    }
}

fn power_inverse(w: ConePoint, k: f64) -> Result<Point> {
    if !(w.radius >= 0.0) || !w.angle.is_finite() {
        return invalid("cone point must have finite angle and nonnegative radius");
    }
    if w.radius == 0.0 {
        return Ok(Point::ORIGIN);
    }
    if w.angle.abs() > k * PI {
        return Err(Error::Domain(format!(
            "cone angle {} lies outside the principal sector ±{}",
            w.angle,
            k * PI
        )));
    }
    Ok(Point::polar((k * w.radius).powf(1.0 / k), w.angle / k))
}

fn area_cone_order(p: DensityExponent) -> Result<f64> {
    let k = p.value() + 1.0;
    if !(k > 0.0) {
        return Err(Error::Domain(format!(
            "the area cone needs p > -1, got {p}"
        )));
    }
    Ok(k)
}

fn perimeter_cone_order(p: DensityExponent) -> Result<f64> {
    let k = (p.value() + 2.0) / 2.0;
    if !(k > 0.0) {
        return Err(Error::Domain(format!(
            "the perimeter cone needs p > -2, got {p}"
        )));
    }
    Ok(k)
}

/// `w = z^{p+1}/(p+1)`: weighted length becomes Euclidean length.
pub fn map_to_area_cone(z: Point, p: DensityExponent) -> Result<ConePoint> {
    Ok(power_map(z, area_cone_order(p)?))
}

pub fn area_cone_inverse(w: ConePoint, p: DensityExponent) -> Result<Point> {
    power_inverse(w, area_cone_order(p)?)
}

/// `w = (2/(p+2)) z^{(p+2)/2}`: weighted area becomes Euclidean area.
pub fn map_to_perimeter_cone(z: Point, p: DensityExponent) -> Result<ConePoint> {
    Ok(power_map(z, perimeter_cone_order(p)?))
}

pub fn perimeter_cone_inverse(w: ConePoint, p: DensityExponent) -> Result<Point> {
    power_inverse(w, perimeter_cone_order(p)?)
}

/// `c(p) = ((p+2)/2)^{p/(p+2)}`: weighted length in the plane is `c(p)`
/// times the length of the image under `map_to_perimeter_cone`, measured
/// with density `|w|^{p/(p+2)}`.
pub fn perimeter_cone_length_factor(p: DensityExponent) -> f64 {
    let k = (p.value() + 2.0) / 2.0;
    k.powf(p.value() / (p.value() + 2.0))
}

/// Image of a path under `z ↦ z^k/k`, developed continuously so that the
/// cone angle accumulates instead of jumping at the cut. Consecutive points
/// must not be antipodal about the origin.
fn develop(points: &[Point], k: f64) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(points.len());
    let mut prev: Option<(Point, f64)> = None;
    for (i, &z) in points.iter().enumerate() {
        let r = z.norm();
        if r == 0.0 {
            out.push(Point::ORIGIN);
            continue;
        }
        let angle = match prev {
            None => z.angle(),
            Some((q, a)) => {
                let d = q.cross(z).atan2(q.dot(z));
                let adjacent = i > 0 && points[i - 1].norm() > 0.0;
                if adjacent && (d.abs() - PI).abs() < 1e-12 {
                    return Err(Error::Domain("path jumps across the origin".into()));
                }
                a + d
            }
        };
        out.push(Point::polar(r.powf(k) / k, k * angle));
        prev = Some((z, angle));
    }
    Ok(out)
}

/// Developed image of a path on the area cone.
pub fn map_path_to_area_cone(points: &[Point], p: DensityExponent) -> Result<Vec<Point>> {
    develop(points, area_cone_order(p)?)
}

/// Developed image of a path on the perimeter cone.
pub fn map_path_to_perimeter_cone(points: &[Point], p: DensityExponent) -> Result<Vec<Point>> {
    develop(points, perimeter_cone_order(p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeodesicKind {
    SegmentToOrigin,
    TwoSegmentsViaOrigin,
    ConeChord,
}

impl GeodesicKind {
    pub fn name(self) -> &'static str {
        match self {
            GeodesicKind::SegmentToOrigin => "segment-to-origin",
            GeodesicKind::TwoSegmentsViaOrigin => "two-segments-via-origin",
            GeodesicKind::ConeChord => "cone-chord",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub kind: GeodesicKind,
    /// Corners of the path; a cone chord lists its pulled-back samples.
    pub waypoints: Vec<Point>,
    pub weighted_length: f64,
    /// Length of the two-segment path, always computed.
    pub via_origin_length: f64,
    /// Length of the cone chord when the unfolded angle is below `π`.
    pub chord_length: Option<f64>,
    /// `None` only for the zero-length path.
    #[serde(skip)]
    pub curve: Option<BoundaryCurve>,
}

/// Shortest path between `a` and `b` for the metric `r^p |dz|`, chosen as
/// the shorter of the path through the origin and the pulled-back cone
/// chord.
pub fn geodesic(p: DensityExponent, a: Point, b: Point) -> Result<GeodesicPath> {
    let k = area_cone_order(p)?;
    if !a.is_finite() || !b.is_finite() {
        return invalid("geodesic endpoints must be finite");
    }
    let (ra, rb) = (a.norm(), b.norm());
    let via = (ra.powf(k) + rb.powf(k)) / k;
    if a == b {
        return Ok(GeodesicPath {
            kind: GeodesicKind::ConeChord,
            waypoints: vec![a, b],
            weighted_length: 0.0,
            via_origin_length: via,
            chord_length: Some(0.0),
            curve: None,
        });
    }
    if ra == 0.0 || rb == 0.0 {
        let seg = Segment::Line(LineSegment::new(a, b)?);
        return Ok(GeodesicPath {
            kind: GeodesicKind::SegmentToOrigin,
            waypoints: vec![a, b],
            weighted_length: via,
            via_origin_length: via,
            chord_length: None,
            curve: Some(BoundaryCurve::open(vec![seg])?),
        });
    }
    let dtheta = a.cross(b).atan2(a.dot(b));
    let unfolded = k * dtheta;
    let chord = (unfolded.abs() < PI).then(|| {
        let (wa, wb) = (ra.powf(k) / k, rb.powf(k) / k);
        (wa * wa + wb * wb - 2.0 * wa * wb * unfolded.cos())
            .max(0.0)
            .sqrt()
    });
    match chord {
        Some(c) if c < via => {
            let samples = pulled_back_chord(a, b, k, p.value())?;
            let waypoints = samples.iter().map(|q| q.point).collect();
            Ok(GeodesicPath {
                kind: GeodesicKind::ConeChord,
                waypoints,
                weighted_length: c,
                via_origin_length: via,
                chord_length: chord,
                curve: Some(BoundaryCurve::open(vec![Segment::Polyline(
                    Polyline::new(samples)?,
                )])?),
            })
        }
        _ => {
            let legs = vec![
                Segment::Line(LineSegment::new(a, Point::ORIGIN)?),
                Segment::Line(LineSegment::new(Point::ORIGIN, b)?),
            ];
            Ok(GeodesicPath {
                kind: GeodesicKind::TwoSegmentsViaOrigin,
                waypoints: vec![a, Point::ORIGIN, b],
                weighted_length: via,
                via_origin_length: via,
                chord_length: chord,
                curve: Some(BoundaryCurve::open(legs)?),
            })
        }
    }
}

/// Samples of the preimage of the straight chord from `w(a)` to `w(b)`,
/// parametrized by Euclidean arclength in the plane. The developed frame
/// puts `a` on the positive axis so the principal branch is continuous.
fn pulled_back_chord(a: Point, b: Point, k: f64, p: f64) -> Result<Vec<CurveSample>> {
    let theta_a = a.angle();
    let dtheta = a.cross(b).atan2(a.dot(b));
    let wa = Point::new(a.norm().powf(k) / k, 0.0);
    let wb = Point::polar(b.norm().powf(k) / k, k * dtheta);
    let d = wb - wa;
    let len = d.norm();
    let dir = d.angle();
    // (point, heading, curvature) at chord parameter u
    let eval = |u: f64| {
        let w = wa + Point::polar(u, dir);
        let (rho, alpha) = (w.norm(), w.angle());
        let r = (k * rho).powf(1.0 / k);
        let theta = alpha / k;
        let heading = dir - p * theta;
        let curvature = p * (theta - heading).sin() / r;
        (
            Point::polar(r, theta + theta_a),
            heading + theta_a,
            curvature,
        )
    };
    // refine until consecutive samples are evenly spaced in the plane
    let mut us: Vec<f64> = (0..=64).map(|i| len * i as f64 / 64.0).collect();
    let mut pts: Vec<Point> = us.iter().map(|&u| eval(u).0).collect();
    for _ in 0..40 {
        let total: f64 = pts.windows(2).map(|w| w[0].distance(w[1])).sum();
        let target = total / PUSHFORWARD_INTERVALS as f64;
        let mut next_u = vec![us[0]];
        let mut next_p = vec![pts[0]];
        let mut split = false;
        for i in 1..us.len() {
            if pts[i].distance(pts[i - 1]) > target {
                let m = 0.5 * (us[i - 1] + us[i]);
                next_u.push(m);
                next_p.push(eval(m).0);
                split = true;
            }
            next_u.push(us[i]);
            next_p.push(pts[i]);
        }
        us = next_u;
        pts = next_p;
        if !split {
            break;
        }
    }
    let speed = |u: f64| {
        let rho = (wa + Point::polar(u, dir)).norm();
        (k * rho).powf(-p / k)
    };
    let mut out = Vec::with_capacity(us.len());
    let mut s = 0.0;
    for (i, &u) in us.iter().enumerate() {
        if i > 0 {
            let h = u - us[i - 1];
            let guess = h * speed(u);
            s += integrate(speed, us[i - 1], u, 1e-14 * guess.max(f64::MIN_POSITIVE))?.value;
        }
        let (q, heading, curvature) = eval(u);
        let point = if i == 0 {
            a
        } else if i + 1 == us.len() {
            b
        } else {
            q
        };
        out.push(CurveSample {
            point,
            s,
            heading,
            curvature,
        });
    }
    Ok(out)
}

/// `Φ_ε` on a single point; `r ≤ √ε` is outside the domain.
pub fn phi_eps_point(z: Point, eps: f64) -> Result<Point> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return invalid(format!("ε must be nonnegative, got {eps}"));
    }
    if eps == 0.0 {
        return Ok(z);
    }
    let r2 = z.norm_sq();
    if !(r2 > eps) {
        return Err(Error::Domain(format!(
            "point at radius {} lies inside B(0, √ε)",
            r2.sqrt()
        )));
    }
    Ok(z * ((r2 - eps) / r2).sqrt())
}

/// Determinant of `DΦ_ε` by central differences, Richardson-extrapolated.
pub fn phi_eps_jacobian_det(z: Point, eps: f64) -> Result<f64> {
    let margin = z.norm() - eps.sqrt();
    if !(margin > 0.0) {
        return Err(Error::Domain("Jacobian requested inside B(0, √ε)".into()));
    }
    let h0 = 1e-3 * margin.min(1.0) * z.norm().max(1.0);
    let det = |h: f64| -> Result<f64> {
        let dx = (phi_eps_point(z + Point::new(h, 0.0), eps)?
            - phi_eps_point(z - Point::new(h, 0.0), eps)?)
            * (0.5 / h);
        let dy = (phi_eps_point(z + Point::new(0.0, h), eps)?
            - phi_eps_point(z - Point::new(0.0, h), eps)?)
            * (0.5 / h);
        Ok(dx.cross(dy))
    };
    let (coarse, fine) = (det(h0)?, det(0.5 * h0)?);
    Ok(fine + (fine - coarse) / 3.0)
}

/// Push a curve forward by `Φ_ε`. Arcs centered at the origin and radial
/// segments map exactly; anything else becomes a sampled curve.
pub fn apply_phi_eps(curve: &BoundaryCurve, eps: f64) -> Result<BoundaryCurve> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return invalid(format!("ε must be nonnegative, got {eps}"));
    }
    if eps == 0.0 {
        return Ok(curve.clone());
    }
    if !(curve.min_radius() > eps.sqrt()) {
        return Err(Error::Domain(format!(
            "curve enters B(0, √ε) with √ε = {}",
            eps.sqrt()
        )));
    }
    let segments = curve
        .segments()
        .iter()
        .map(|s| phi_eps_segment(s, eps))
        .collect::<Result<Vec<_>>>()?;
    if curve.is_closed() {
        BoundaryCurve::closed(segments)
    } else {
        BoundaryCurve::open(segments)
    }
}

fn phi_eps_segment(seg: &Segment, eps: f64) -> Result<Segment> {
    match seg {
        Segment::Arc(a) if a.center.norm() <= 1e-14 * a.radius => {
            Ok(Segment::Arc(CircularArc::new(
                Point::ORIGIN,
                (a.radius * a.radius - eps).sqrt(),
                a.start_angle,
                a.sweep,
            )?))
        }
        Segment::Line(l) if l.a.cross(l.b).abs() <= 1e-14 * l.a.norm() * l.b.norm() => {
            Ok(Segment::Line(LineSegment::new(
                phi_eps_point(l.a, eps)?,
                phi_eps_point(l.b, eps)?,
            )?))
        }
        _ => {
            let src = source_samples(seg);
            Ok(Segment::Polyline(push_samples(&src, eps)?))
        }
    }
}

fn source_samples(seg: &Segment) -> Vec<CurveSample> {
    let n = PUSHFORWARD_INTERVALS;
    match seg {
        Segment::Arc(a) => (0..=n)
            .map(|i| {
                let f = i as f64 / n as f64;
                let t = a.start_angle + a.sweep * f;
                CurveSample {
                    point: a.point_at(t),
                    s: f * a.length(),
                    heading: a.heading_at(t),
                    curvature: a.signed_curvature(),
                }
            })
            .collect(),
        Segment::Line(l) => (0..=n)
            .map(|i| {
                let f = i as f64 / n as f64;
                CurveSample {
                    point: l.point_at(f),
                    s: f * l.length(),
                    heading: l.heading(),
                    curvature: 0.0,
                }
            })
            .collect(),
        Segment::Polyline(pl) => pl.samples().to_vec(),
    }
}

/// Image samples under `Φ_ε`, from the source position, heading and
/// curvature. Works in polar form: `ρ = √(r² − ε)` with `θ` unchanged.
fn push_samples(src: &[CurveSample], eps: f64) -> Result<Polyline> {
    struct Image {
        point: Point,
        heading: f64,
        curvature: f64,
        speed: f64,
        accel: f64,
    }
    let image = |q: &CurveSample| -> Result<Image> {
        let z = q.point;
        let r = z.norm();
        let theta = z.angle();
        let rho = (r * r - eps).sqrt();
        let (sn, cs) = (q.heading - theta).sin_cos();
        let r1 = cs;
        let t1 = sn / r;
        let r2 = -sn * (q.curvature - t1);
        let t2 = (cs * (q.curvature - t1) * r - sn * r1) / (r * r);
        let rho1 = r * r1 / rho;
        let rho2 = (r1 * r1 + r * r2) / rho - r * r1 * rho1 / (rho * rho);
        // image velocity in the polar frame: (a, b) = (ρ', ρθ')
        let (a, b) = (rho1, rho * t1);
        let (a1, b1) = (rho2, rho1 * t1 + rho * t2);
        let speed = a.hypot(b);
        let accel = (a * a1 + b * b1) / speed;
        let heading = theta + b.atan2(a);
        let curvature = (t1 + (a * b1 - b * a1) / (speed * speed)) / speed;
        Ok(Image {
            point: phi_eps_point(z, eps)?,
            heading,
            curvature,
            speed,
            accel,
        })
    };
    let imgs = src.iter().map(image).collect::<Result<Vec<_>>>()?;
    let mut s = 0.0;
    let mut out = Vec::with_capacity(imgs.len());
    for (i, im) in imgs.iter().enumerate() {
        if i > 0 {
            let (a, h) = (&imgs[i - 1], src[i].s - src[i - 1].s);
            s += 0.5 * h * (a.speed + im.speed) + h * h * (a.accel - im.accel) / 12.0;
        }
        out.push(CurveSample {
            point: im.point,
            s,
            heading: im.heading,
            curvature: im.curvature,
        });
    }
    Polyline::new(out)
}
