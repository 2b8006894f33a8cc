//! Equilibrium checks (120° junctions, constant generalized curvature, the
//! curvature cocycle) and the pinch experiment on two tangent circles.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::candidates::DoubleBubbleCandidate;
use crate::cgc::generalized_curvature;
use crate::error::{invalid, Error, Result};
use crate::geometry::{CircularArc, Point, Segment};
use crate::measure::{segment_area_term, segment_weighted_length, DensityExponent};
use crate::roots::bisect;

/// Samples of `κ_f` taken along every edge.
pub const CURVATURE_SAMPLES: usize = 256;

const VERTEX_MATCH: f64 = 1e-7;

/// Generalized curvature of the circle `(center, radius)` at `point`, with
/// the normal pointing into the disk:
/// `1/R + (p/R)(1 - (a x0 + b y0)/(a² + b²))` for `point = (a, b)` and
/// `center = (x0, y0)`.
pub fn circle_generalized_curvature(
    center: Point,
    radius: f64,
    point: Point,
    p: DensityExponent,
) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid(format!("radius must be positive, got {radius}"));
    }
    if (point.distance(center) - radius).abs() > 1e-10 * radius.max(1.0) {
        return invalid("point is not on the circle");
    }
    let r2 = point.norm_sq();
    if r2 == 0.0 {
        return Err(Error::Singularity(
            "generalized curvature is undefined at the origin".into(),
        ));
    }
    Ok(1.0 / radius + (p.value() / radius) * (1.0 - center.dot(point) / r2))
}

/// `κ_f` along a segment, measured against its leftward normal.
pub fn sample_segment_curvature(seg: &Segment, p: DensityExponent, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    match seg {
        Segment::Arc(a) => {
            // half-angle form: stays accurate for samples close to the origin
            let sign = a.sweep.signum();
            let (rc, c) = (a.center.norm(), a.center.y.atan2(a.center.x));
            let gap = a.radius - rc;
            for i in 0..n {
                let t = a.start_angle + a.sweep * (i as f64 + 0.5) / n as f64;
                let half = ((t - c) / 2.0).cos().powi(2);
                let r2 = gap * gap + 4.0 * a.radius * rc * half;
                if r2 > 1e-24 {
                    let along = gap + 2.0 * rc * half;
                    out.push(sign / a.radius + p.value() * sign * along / r2);
                }
            }
        }
        Segment::Line(l) => {
            let h = l.heading();
            for i in 0..n {
                let q = l.point_at((i as f64 + 0.5) / n as f64);
                if q.norm() > 1e-12 {
                    out.push(generalized_curvature(q, h, 0.0, p));
                }
            }
        }
        Segment::Polyline(pl) => {
            let s = pl.samples();
            let m = n.min(s.len());
            for i in 0..m {
                let q = &s[((i as f64 + 0.5) * s.len() as f64 / m as f64) as usize];
                if q.point.norm() > 1e-12 {
                    out.push(generalized_curvature(q.point, q.heading, q.curvature, p));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexAngles {
    pub vertex: Point,
    /// The 120° rule is not enforced here.
    pub at_origin: bool,
    /// Angles between consecutive edges leaving the vertex.
    pub angles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentCurvature {
    pub edge: usize,
    pub name: String,
    /// Mean `κ_f` with the normal pointing into the first region bounded by
    /// the edge.
    pub mean: f64,
    /// Max minus min over the samples.
    pub variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Verdict {
    Equilibrium,
    Violated(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub vertex_angles: Vec<VertexAngles>,
    pub curvature_by_segment: Vec<SegmentCurvature>,
    /// `κ_1 - κ_2 + κ_interface`, with the interface curvature measured
    /// towards region 2. Zero when there is no triple junction.
    pub cocycle_residual: f64,
    pub verdict: Verdict,
}

impl EquilibriumReport {
    pub fn is_equilibrium(&self) -> bool {
        self.verdict == Verdict::Equilibrium
    }

    pub fn max_angle_error(&self) -> f64 {
        self.vertex_angles
            .iter()
            .filter(|v| !v.at_origin)
            .flat_map(|v| v.angles.iter().map(|a| (a - TAU / 3.0).abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_curvature_variation(&self) -> f64 {
        self.curvature_by_segment
            .iter()
            .map(|c| c.variation)
            .fold(0.0, f64::max)
    }
}

/// Orientation of each edge within the first region loop that uses it:
/// `(region, reversed)`.
fn edge_orientation(c: &DoubleBubbleCandidate, edge: usize) -> Option<(usize, bool)> {
    c.regions.iter().enumerate().find_map(|(i, r)| {
        r.loops
            .iter()
            .flatten()
            .find(|e| e.edge == edge)
            .map(|e| (i, e.reversed))
    })
}

fn vertex_angles(c: &DoubleBubbleCandidate) -> Vec<VertexAngles> {
    c.vertices()
        .into_iter()
        .map(|v| {
            let tol = VERTEX_MATCH * (1.0 + v.norm());
            let mut dirs = Vec::new();
            for e in &c.edges {
                if e.segment.start().distance(v) <= tol {
                    dirs.push(e.segment.start_heading().rem_euclid(TAU));
                }
                if e.segment.end().distance(v) <= tol {
                    dirs.push((e.segment.end_heading() + PI).rem_euclid(TAU));
                }
            }
            dirs.sort_by(f64::total_cmp);
            let angles = if dirs.len() < 2 {
                Vec::new()
            } else {
                let mut a: Vec<f64> = dirs.windows(2).map(|w| w[1] - w[0]).collect();
                a.push(dirs[0] + TAU - dirs[dirs.len() - 1]);
                a
            };
            VertexAngles {
                vertex: v,
                at_origin: v.norm() <= 1e-9,
                angles,
            }
        })
        .collect()
}

/// Measure junction angles, per-edge `κ_f` and the cocycle residual.
pub fn check_equilibrium(
    candidate: &DoubleBubbleCandidate,
    tol_angle: f64,
    tol_curv: f64,
) -> Result<EquilibriumReport> {
    if !(tol_angle > 0.0) || !(tol_curv > 0.0) {
        return invalid("tolerances must be positive");
    }
    let p = candidate.p;
    let vertex_angles = vertex_angles(candidate);

    let mut curvature_by_segment = Vec::new();
    for (i, e) in candidate.edges.iter().enumerate() {
        let (_, reversed) = edge_orientation(candidate, i)
            .ok_or_else(|| Error::Validation(format!("edge {} bounds no region", e.name)))?;
        let sign = if reversed { -1.0 } else { 1.0 };
        let ks: Vec<f64> = sample_segment_curvature(&e.segment, p, CURVATURE_SAMPLES)
            .into_iter()
            .map(|k| sign * k)
            .collect();
        if ks.is_empty() {
            return invalid(format!("edge {} has no samples off the origin", e.name));
        }
        let (lo, hi) = ks
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| {
                (a.min(k), b.max(k))
            });
        curvature_by_segment.push(SegmentCurvature {
            edge: i,
            name: e.name.clone(),
            mean: ks.iter().sum::<f64>() / ks.len() as f64,
            variation: hi - lo,
        });
    }

    let triple = vertex_angles.iter().any(|v| v.angles.len() == 3);
    let cocycle_residual = if triple {
        let mean_of = |pred: &dyn Fn(usize) -> bool| -> f64 {
            let v: Vec<f64> = curvature_by_segment
                .iter()
                .filter(|s| pred(s.edge))
                .map(|s| s.mean)
                .collect();
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        let outer_of = |region: usize| {
            move |i: usize| {
                !candidate.edges[i].shared
                    && edge_orientation(candidate, i).map(|o| o.0) == Some(region)
            }
        };
        let k1 = mean_of(&outer_of(0));
        let k2 = mean_of(&outer_of(1));
        // shared edges are first met in region 1; flip towards region 2
        let k_int = -mean_of(&|i| candidate.edges[i].shared);
        k1 - k2 + k_int
    } else {
        0.0
    };

    let mut reasons = Vec::new();
    for v in vertex_angles.iter().filter(|v| !v.at_origin) {
        if v.angles.len() != 3 {
            reasons.push(format!(
                "vertex ({}, {}) joins {} edges",
                v.vertex.x,
                v.vertex.y,
                v.angles.len()
            ));
        } else if v.angles.iter().any(|a| (a - TAU / 3.0).abs() > tol_angle) {
            reasons.push(format!(
                "vertex ({}, {}) angles {:?} are not 120°",
                v.vertex.x, v.vertex.y, v.angles
            ));
        }
    }
    for s in &curvature_by_segment {
        if s.variation > tol_curv {
            reasons.push(format!(
                "edge {} has κ_f variation {:e}",
                s.name, s.variation
            ));
        }
    }
    if cocycle_residual.abs() > tol_curv {
        reasons.push(format!("cocycle residual {cocycle_residual:e}"));
    }
    let verdict = if reasons.is_empty() {
        Verdict::Equilibrium
    } else {
        Verdict::Violated(reasons.join("; "))
    };
    Ok(EquilibriumReport {
        vertex_angles,
        curvature_by_segment,
        cocycle_residual,
        verdict,
    })
}

/// Cocycle of the standard bubble from its radii alone:
/// `(1 + p/2)(1/r2 - 1/r1) - (1 + p/2)/r_m` with `r_m = 1/|1/r2 - 1/r1|`.
pub fn standard_cocycle_symbolic(r1: f64, r2: f64, p: DensityExponent) -> f64 {
    let k = 1.0 + p.value() / 2.0;
    let diff = 1.0 / r2 - 1.0 / r1;
    if diff.abs() < 1e-12 {
        return k * diff;
    }
    let rm = 1.0 / diff.abs();
    k * diff.abs() - k / rm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinchResult {
    pub r: f64,
    /// Weighted length of the upper arc of `C1` inside `B(0, r)`.
    pub saved_perimeter: f64,
    /// Weighted length of the arc of `|z| = r` between `C1` and `C2`.
    pub added_perimeter: f64,
    pub delta: f64,
    /// Weighted area swept into region 1 by the deformation; the proof
    /// restores it with a chord step that is not simulated.
    pub area_imbalance: f64,
}

/// Perimeter change when the upper arc of `C1` inside `B(0, r)` is
/// replaced by an arc of `|z| = r`. `C1` has center `(-R1, 0)`, `C2`
/// center `(R2, 0)`; both pass through the origin.
pub fn pinch_delta(p: DensityExponent, r1: f64, r2: f64, r: f64) -> Result<PinchResult> {
    if !(r1 > 0.0 && r2 > 0.0 && r1.is_finite() && r2.is_finite()) {
        return invalid(format!("radii must be positive, got ({r1}, {r2})"));
    }
    if !(r > 0.0 && r < r1.min(r2)) {
        return invalid(format!("pinch radius {r} must lie in (0, {})", r1.min(r2)));
    }
    let tol = 1e-14 * r.powf(p.value() + 1.0).max(1e-300);
    let psi1 = 2.0 * (r / (2.0 * r1)).asin();
    let psi2 = 2.0 * (r / (2.0 * r2)).asin();
    let c1_arc = Segment::Arc(CircularArc::new(Point::new(-r1, 0.0), r1, 0.0, psi1)?);
    let saved = segment_weighted_length(&c1_arc, p, tol)?.value;
    let theta1 = (-r / (2.0 * r1)).acos();
    let theta2 = (r / (2.0 * r2)).acos();
    let added = r.powf(p.value() + 1.0) * (theta1 - theta2);

    let cap = Segment::Arc(CircularArc::new(Point::ORIGIN, r, theta1, theta2 - theta1)?);
    let c2_arc = Segment::Arc(CircularArc::new(Point::new(r2, 0.0), r2, PI - psi2, psi2)?);
    let mut area = 0.0;
    for s in [&c1_arc, &cap, &c2_arc] {
        area += segment_area_term(s, p, tol)?.value;
    }
    Ok(PinchResult {
        r,
        saved_perimeter: saved,
        added_perimeter: added,
        delta: added - saved,
        area_imbalance: -area,
    })
}

/// `pinch_delta` on `n` log-spaced radii in `[r_min, r_max]`.
pub fn pinch_sweep(
    p: DensityExponent,
    r1: f64,
    r2: f64,
    r_min: f64,
    r_max: f64,
    n: usize,
) -> Result<Vec<PinchResult>> {
    if n < 2 || !(r_min > 0.0 && r_min < r_max) {
        return invalid("sweep needs n >= 2 and 0 < r_min < r_max");
    }
    let (a, b) = (r_min.ln(), r_max.ln());
    (0..n)
        .map(|i| pinch_delta(p, r1, r2, (a + (b - a) * i as f64 / (n - 1) as f64).exp()))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return invalid("slope fit needs two or more paired points");
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return invalid("slope fit needs positive data");
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinchThreshold {
    /// `delta < 0` for every sampled radius below this.
    pub r_star: f64,
    /// False when `delta` stays negative up to the largest admissible radius.
    pub sign_change: bool,
}

/// Largest `r*` with `delta(r) < 0` on `(0, r*)`, found by a log-spaced
/// scan from `1e-6 · min(R1, R2)` and bisection on the first sign change.
pub fn pinch_threshold(p: DensityExponent, r1: f64, r2: f64) -> Result<PinchThreshold> {
    let top = r1.min(r2) * (1.0 - 1e-9);
    let radii: Vec<f64> = {
        let (a, b) = ((1e-6 * top).ln(), top.ln());
        (0..=400)
            .map(|i| (a + (b - a) * i as f64 / 400.0).exp())
            .collect()
    };
    let mut prev = radii[0];
    if pinch_delta(p, r1, r2, prev)?.delta >= 0.0 {
        return Err(Error::Construction(
            "pinch does not reduce perimeter at the smallest radius".into(),
        ));
    }
    for &r in &radii[1..] {
        if pinch_delta(p, r1, r2, r)?.delta >= 0.0 {
            let f = |x: f64| pinch_delta(p, r1, r2, x).map(|q| q.delta);
            let r_star = bisect(f, prev, r, 1e-14 * r, 200)?;
            return Ok(PinchThreshold {
                r_star,
                sign_change: true,
            });
        }
        prev = r;
    }
    Ok(PinchThreshold {
        r_star: top,
        sign_change: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{
        build_concentric, build_standard, build_symmetric, build_two_circles, StandardShape,
    };
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(v: f64) -> DensityExponent {
        DensityExponent::new(v).unwrap()
    }

    #[test]
    fn circle_curvature_examples() {
        let k =
            circle_generalized_curvature(Point::new(0.0, 1.0), 1.0, Point::new(1.0, 1.0), p(2.0))
                .unwrap();
        assert_abs_diff_eq!(k, 2.0, epsilon = 1e-14);
        let k = circle_generalized_curvature(Point::ORIGIN, 2.0, Point::polar(2.0, 0.7), p(3.0))
            .unwrap();
        assert_abs_diff_eq!(k, 2.0, epsilon = 1e-14);
        let c = Point::new(3.0, 0.0);
        let a = circle_generalized_curvature(c, 1.0, Point::new(4.0, 0.0), p(2.0)).unwrap();
        let b = circle_generalized_curvature(c, 1.0, Point::new(3.0, 1.0), p(2.0)).unwrap();
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn circle_curvature_errors() {
        assert!(
            circle_generalized_curvature(Point::ORIGIN, 1.0, Point::new(0.5, 0.0), p(1.0))
                .unwrap_err()
                .is_validation()
        );
        assert!(matches!(
            circle_generalized_curvature(Point::new(1.0, 0.0), 1.0, Point::ORIGIN, p(1.0)),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn sampled_arc_matches_closed_form() {
        let arc = Segment::Arc(CircularArc::full_circle(Point::new(0.0, -1.5), 1.5, true).unwrap());
        for k in sample_segment_curvature(&arc, p(4.0), 64) {
            assert_abs_diff_eq!(k, 3.0 / 1.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn standard_in_equilibrium() {
        for pv in [0.0, 1.0, 3.0] {
            let c = build_standard(p(pv), 1.0, 0.6, 1e-8).unwrap();
            let r = check_equilibrium(&c, 1e-6, 1e-8).unwrap();
            assert!(r.is_equilibrium(), "{:?}", r.verdict);
            assert!(r.cocycle_residual.abs() < 1e-9);
            assert_eq!(r.vertex_angles.iter().filter(|v| v.at_origin).count(), 1);
        }
    }

    #[test]
    fn concentric_and_symmetric_in_equilibrium() {
        let c = build_concentric(p(2.0), 1.0, 1.0, 1e-8).unwrap();
        let r = check_equilibrium(&c, 1e-6, 1e-8).unwrap();
        assert!(r.is_equilibrium());
        assert!(r.vertex_angles.is_empty());

        let s = build_symmetric(p(2.0), 1.0, 1e-8).unwrap();
        let r = check_equilibrium(&s, 1e-6, 1e-7).unwrap();
        assert!(r.is_equilibrium(), "{:?}", r.verdict);
        let k = &r.curvature_by_segment;
        assert_abs_diff_eq!(k[2].mean, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k[0].mean, k[1].mean, epsilon = 1e-8);
    }

    #[test]
    fn displaced_arc_is_flagged() {
        let mut c = build_two_circles(p(2.0), 1.0, 1.0, 1e-8).unwrap();
        if let Segment::Arc(a) = &mut c.edges[0].segment {
            a.center = a.center + Point::new(-0.3, 0.0);
        }
        let r = check_equilibrium(&c, 1e-6, 1e-8).unwrap();
        assert!(!r.is_equilibrium());
    }

    #[test]
    fn pinch_reduces_perimeter() {
        let q = pinch_delta(p(2.0), 1.0, 1.0, 0.05).unwrap();
        assert!(q.delta < 0.0);
        assert!(q.area_imbalance > 0.0);
        assert!(pinch_delta(p(2.0), 1.0, 1.0, 1.5)
            .unwrap_err()
            .is_validation());
    }

    #[test]
    fn pinch_orders() {
        let sweep = pinch_sweep(p(2.0), 1.0, 1.0, 1e-3, 1e-1, 12).unwrap();
        let rs: Vec<f64> = sweep.iter().map(|q| q.r).collect();
        let saved: Vec<f64> = sweep.iter().map(|q| q.saved_perimeter).collect();
        let added: Vec<f64> = sweep.iter().map(|q| q.added_perimeter).collect();
        assert!((loglog_slope(&rs, &saved).unwrap() - 3.0).abs() < 0.1);
        assert!((loglog_slope(&rs, &added).unwrap() - 4.0).abs() < 0.1);
    }

    #[test]
    fn pinch_threshold_is_positive() {
        let t = pinch_threshold(p(2.0), 1.0, 1.0).unwrap();
        assert!(t.r_star > 0.05);
        assert!(pinch_delta(p(2.0), 1.0, 1.0, 0.5 * t.r_star).unwrap().delta < 0.0);
    }

    #[test]
    fn slope_fit_recovers_power() {
        let xs = [0.1, 0.2, 0.4, 0.8];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(2.5)).collect();
        assert_abs_diff_eq!(loglog_slope(&xs, &ys).unwrap(), 2.5, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn curvature_scales_inversely(
            cx in -3.0..3.0f64, cy in -3.0..3.0f64, rad in 0.2..3.0f64, t in 0.0..std::f64::consts::TAU,
            lambda in 0.1..10.0f64, pv in 0.0..10.0f64,
        ) {
            let c = Point::new(cx, cy);
            let q = c + Point::polar(rad, t);
            prop_assume!(q.norm() > 1e-3);
            let k = circle_generalized_curvature(c, rad, q, p(pv)).unwrap();
            let ks = circle_generalized_curvature(c * lambda, rad * lambda, q * lambda, p(pv)).unwrap();
            prop_assert!((ks - k / lambda).abs() <= 1e-9 * (1.0 + k.abs() / lambda));
        }

        #[test]
        fn symbolic_cocycle_vanishes(r1 in 0.1..10.0f64, ratio in 0.01..1.0f64, pv in 0.0..10.0f64) {
            prop_assert!(standard_cocycle_symbolic(r1, r1 * ratio, p(pv)).abs() <= 1e-12 * (1.0 + pv) / (r1 * ratio));
        }

        #[test]
        fn standard_shape_cocycle_from_geometry(ratio in 0.05..0.999f64) {
            let s = StandardShape::new(1.0, ratio).unwrap();
            let (rm, _) = s.interface.unwrap();
            prop_assert!((1.0 / ratio - 1.0 - 1.0 / rm).abs() < 1e-12 / ratio);
        }
    }
}
