//! Self-check suites behind `dbubble verify`. Each check returns a pass or
//! fail with a one-line detail; random inputs come from a fixed seed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::candidates::{
    build_candidate, build_concentric, build_standard, build_symmetric, CandidateKind,
};
use crate::cgc::{integrate_cgc, shoot_symmetric_arc, CurveState, StopRule, DEFAULT_SHOOT_TOL};
use crate::equilibrium::{
    check_equilibrium, circle_generalized_curvature, loglog_slope, pinch_sweep,
    sample_segment_curvature, standard_cocycle_symbolic,
};
use crate::error::Result;
use crate::geometry::{BoundaryCurve, CircularArc, LineSegment, Point, Segment};
use crate::measure::{
    scale_geometry, segment_weighted_length, weighted_area, weighted_length, DensityExponent,
};
use crate::transforms::{
    apply_phi_eps, geodesic, map_path_to_area_cone, map_path_to_perimeter_cone,
    phi_eps_jacobian_det, GeodesicKind,
};

const SEED: u64 = 0x5eed_b0bb1e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Measure,
    Cgc,
    Candidates,
    Equilibrium,
    Transforms,
    Pinch,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Measure,
        Suite::Cgc,
        Suite::Candidates,
        Suite::Equilibrium,
        Suite::Transforms,
        Suite::Pinch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Measure => "measure",
            Suite::Cgc => "cgc",
            Suite::Candidates => "candidates",
            Suite::Equilibrium => "equilibrium",
            Suite::Transforms => "transforms",
            Suite::Pinch => "pinch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{tag} {}/{}: {}",
            self.suite.name(),
            self.name,
            self.detail
        )
    }
}

fn check(
    suite: Suite,
    name: &'static str,
    f: impl FnOnce() -> Result<(bool, String)>,
) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult {
            suite,
            name,
            passed,
            detail,
        },
        Err(e) => CheckResult {
            suite,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn p(v: f64) -> DensityExponent {
    DensityExponent::new(v).expect("suite exponents are valid")
}

fn circle(center: Point, radius: f64) -> Result<BoundaryCurve> {
    BoundaryCurve::closed(vec![Segment::Arc(CircularArc::full_circle(
        center, radius, true,
    )?)])
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Euclidean length of a dense sample, Richardson-extrapolated against
/// every other sample.
fn chord_length(pts: &[Point]) -> f64 {
    let fine: f64 = pts.windows(2).map(|w| w[0].distance(w[1])).sum();
    let half: Vec<Point> = pts.iter().step_by(2).copied().collect();
    let coarse: f64 = half.windows(2).map(|w| w[0].distance(w[1])).sum();
    fine + (fine - coarse) / 3.0
}

/// Signed area swept from the origin by a dense sample, extrapolated the
/// same way.
fn fan_area(pts: &[Point]) -> f64 {
    let sum = |q: &[Point]| q.windows(2).map(|w| 0.5 * w[0].cross(w[1])).sum::<f64>();
    let half: Vec<Point> = pts.iter().step_by(2).copied().collect();
    let (fine, coarse) = (sum(pts), sum(&half));
    fine + (fine - coarse) / 3.0
}

fn subdivide(a: Point, b: Point, n: usize) -> impl Iterator<Item = Point> {
    (0..n).map(move |i| a + (b - a) * (i as f64 / n as f64))
}

pub fn run_suite(suite: Suite) -> Vec<CheckResult> {
    match suite {
        Suite::Measure => measure_suite(),
        Suite::Cgc => cgc_suite(),
        Suite::Candidates => candidates_suite(),
        Suite::Equilibrium => equilibrium_suite(),
        Suite::Transforms => transforms_suite(),
        Suite::Pinch => pinch_suite(),
    }
}

pub fn run_all() -> Vec<CheckResult> {
    Suite::ALL.iter().flat_map(|&s| run_suite(s)).collect()
}

fn measure_suite() -> Vec<CheckResult> {
    let s = Suite::Measure;
    vec![
        check(s, "centered-circle-length", || {
            let mut worst: f64 = 0.0;
            for pv in [0.0, 1.0, 2.0, 5.0, 10.0] {
                let l = weighted_length(&circle(Point::ORIGIN, 1.3)?, p(pv), 1e-12)?;
                worst = worst.max(rel(l, 2.0 * PI * 1.3f64.powf(pv + 1.0)));
            }
            Ok((worst <= 1e-9, format!("max relative error {worst:.2e}")))
        }),
        check(s, "disk-through-origin-area", || {
            let a = weighted_area(&circle(Point::new(0.7, 0.0), 0.7)?, p(2.0), 1e-12)?;
            let e = rel(a, 1.5 * PI * 0.7f64.powi(4));
            Ok((e <= 1e-9, format!("relative error {e:.2e}")))
        }),
        check(s, "scaling-laws", || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let c = circle(
                    Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                    rng.gen_range(0.3..2.0),
                )?;
                let pv = rng.gen_range(0.0..6.0);
                for lambda in [0.5, 2.0] {
                    let sc = scale_geometry(&c, lambda)?;
                    let lr =
                        weighted_length(&sc, p(pv), 1e-12)? / weighted_length(&c, p(pv), 1e-12)?;
                    let ar = weighted_area(&sc, p(pv), 1e-12)? / weighted_area(&c, p(pv), 1e-12)?;
                    worst = worst
                        .max(rel(lr, lambda.powf(pv + 1.0)))
                        .max(rel(ar, lambda.powf(pv + 2.0)));
                }
            }
            Ok((worst <= 1e-8, format!("max relative error {worst:.2e}")))
        }),
        check(s, "orientation-and-rotation", || {
            let c = circle(Point::new(0.4, -0.9), 1.1)?;
            let a = weighted_area(&c, p(3.0), 1e-12)?;
            let ar = weighted_area(&c.reversed(), p(3.0), 1e-12)?;
            let l = weighted_length(&c, p(3.0), 1e-12)?;
            let lr = weighted_length(&c.rotated(1.234), p(3.0), 1e-12)?;
            let e = (a + ar).abs().max((l - lr).abs());
            Ok((e <= 1e-10, format!("max deviation {e:.2e}")))
        }),
        check(s, "additivity", || {
            let whole = Segment::Arc(CircularArc::new(Point::new(1.0, 0.5), 0.8, 0.3, 2.0)?);
            let a = Segment::Arc(CircularArc::new(Point::new(1.0, 0.5), 0.8, 0.3, 0.7)?);
            let b = Segment::Arc(CircularArc::new(Point::new(1.0, 0.5), 0.8, 1.0, 1.3)?);
            let f = |x: &Segment| segment_weighted_length(x, p(2.5), 1e-13).map(|q| q.value);
            let e = (f(&whole)? - f(&a)? - f(&b)?).abs();
            Ok((e <= 1e-11, format!("deviation {e:.2e}")))
        }),
    ]
}

fn cgc_suite() -> Vec<CheckResult> {
    let s = Suite::Cgc;
    vec![
        check(s, "centered-circle-trajectory", || {
            let mut worst: f64 = 0.0;
            for pv in [1.0, 2.0, 4.0] {
                let kappa = (1.0 + pv) / 1.5;
                let c = integrate_cgc(
                    CurveState::new(1.5, 0.0, PI / 2.0),
                    kappa,
                    p(pv),
                    StopRule::ArcLength(1.5 * PI),
                    1e-12,
                )?;
                for q in c.trace(64) {
                    worst = worst.max((q.norm() - 1.5).abs());
                }
            }
            Ok((worst <= 1e-8, format!("max radial deviation {worst:.2e}")))
        }),
        check(s, "circle-through-origin-trajectory", || {
            let kappa = (1.0 + 1.0) / 1.0;
            let c = integrate_cgc(
                CurveState::new(0.0, 2.0, PI),
                kappa,
                p(2.0),
                StopRule::ArcLength(PI - 0.1),
                1e-12,
            )?;
            let worst = c
                .trace(64)
                .iter()
                .map(|q| (q.distance(Point::new(0.0, 1.0)) - 1.0).abs())
                .fold(0.0, f64::max);
            Ok((worst <= 1e-8, format!("max deviation {worst:.2e}")))
        }),
        check(s, "symmetric-shooting", || {
            let mut detail = Vec::new();
            let mut ok = true;
            for (pv, table) in [(1.0, 6.720), (2.0, 7.837)] {
                let r = shoot_symmetric_arc(p(pv), DEFAULT_SHOOT_TOL)?;
                ok &= r.landing_residual.abs() <= DEFAULT_SHOOT_TOL
                    && (r.normalized_perimeter - table).abs() <= 0.01;
                detail.push(format!(
                    "p={pv}: κ_f={:.8} P={:.6}",
                    r.kappa_f, r.normalized_perimeter
                ));
            }
            Ok((ok, detail.join(", ")))
        }),
    ]
}

fn candidates_suite() -> Vec<CheckResult> {
    let s = Suite::Candidates;
    vec![
        check(s, "euclidean-limit", || {
            let exact =
                (8.0 * PI / 3.0 + 3f64.sqrt()) / (2.0 * PI / 3.0 + 3f64.sqrt() / 4.0).sqrt();
            let st = build_standard(p(0.0), 1.0, 1.0, 1e-10)?.weighted_perimeter;
            let sy = build_symmetric(p(0.0), 1.0, 1e-10)?.weighted_perimeter;
            let ok =
                (st - exact).abs() <= 1e-4 && (sy - exact).abs() <= 1e-4 && (st - sy).abs() <= 1e-6;
            Ok((
                ok,
                format!("standard {st:.9}, symmetric {sy:.9}, exact {exact:.9}"),
            ))
        }),
        check(s, "concentric-closed-form", || {
            let mut worst: f64 = 0.0;
            for pv in [0.0, 1.0, 2.0, 5.0, 10.0] {
                let c = build_concentric(p(pv), 1.0, 1.0, 1e-10)?;
                worst = worst.max(rel(
                    c.weighted_perimeter,
                    c.parameters["closed_form_perimeter"],
                ));
            }
            Ok((worst <= 1e-9, format!("max relative error {worst:.2e}")))
        }),
        check(s, "area-targets", || {
            let mut worst: f64 = 0.0;
            for kind in CandidateKind::ALL {
                let a2 = if kind == CandidateKind::Symmetric {
                    1.0
                } else {
                    0.6
                };
                worst = worst.max(build_candidate(kind, p(3.0), 1.0, a2, 1e-8)?.area_defect());
            }
            Ok((
                worst <= 1e-8,
                format!("max relative area defect {worst:.2e}"),
            ))
        }),
        check(s, "scaling-laws", || {
            let mut worst: f64 = 0.0;
            for kind in CandidateKind::ALL {
                let c = build_candidate(kind, p(2.0), 1.0, 1.0, 1e-8)?;
                for lambda in [0.5, 2.0] {
                    let sc = scale_geometry(&c, lambda)?;
                    worst = worst
                        .max(rel(
                            sc.weighted_perimeter / c.weighted_perimeter,
                            lambda.powi(3),
                        ))
                        .max(rel(
                            sc.weighted_areas.0 / c.weighted_areas.0,
                            lambda.powi(4),
                        ))
                        .max(rel(
                            sc.weighted_areas.1 / c.weighted_areas.1,
                            lambda.powi(4),
                        ));
                }
            }
            Ok((worst <= 1e-7, format!("max relative error {worst:.2e}")))
        }),
    ]
}

fn equilibrium_suite() -> Vec<CheckResult> {
    let s = Suite::Equilibrium;
    vec![
        check(s, "standard-equilibrium", || {
            let mut detail = Vec::new();
            let mut ok = true;
            for pv in [0.5, 1.0, 2.0, 5.0, 10.0] {
                let r = check_equilibrium(&build_standard(p(pv), 1.0, 1.0, 1e-10)?, 1e-6, 1e-8)?;
                ok &= r.is_equilibrium() && r.cocycle_residual.abs() <= 1e-9;
                detail.push(format!(
                    "p={pv}: {:.1e}",
                    r.max_curvature_variation().max(r.max_angle_error())
                ));
            }
            Ok((ok, detail.join(", ")))
        }),
        check(s, "circle-curvature", || {
            let spread = |c: Point, r: f64, pv: f64| -> Result<f64> {
                let ks = sample_segment_curvature(
                    &Segment::Arc(CircularArc::full_circle(c, r, true)?),
                    p(pv),
                    256,
                );
                Ok(ks.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
                    - ks.iter().fold(f64::INFINITY, |a, &b| a.min(b)))
            };
            let through = spread(Point::new(0.0, 1.0), 1.0, 2.0)?;
            let centered = spread(Point::ORIGIN, 1.0, 2.0)?;
            let control = spread(Point::new(3.0, 0.0), 1.0, 2.0)?;
            let ok = through <= 1e-10 && centered <= 1e-10 && control >= 1e-3;
            Ok((
                ok,
                format!("through {through:.1e}, centered {centered:.1e}, control {control:.3}"),
            ))
        }),
        check(s, "curvature-scaling", || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let c = Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                let r = rng.gen_range(0.2..3.0);
                let q = c + Point::polar(r, rng.gen_range(0.0..2.0 * PI));
                if q.norm() < 1e-3 {
                    continue;
                }
                let (lambda, pv) = (rng.gen_range(0.1..10.0), rng.gen_range(0.0..10.0));
                let k = circle_generalized_curvature(c, r, q, p(pv))?;
                let ks = circle_generalized_curvature(c * lambda, r * lambda, q * lambda, p(pv))?;
                worst = worst.max((ks * lambda - k).abs() / (1.0 + k.abs()));
            }
            Ok((worst <= 1e-9, format!("max relative deviation {worst:.2e}")))
        }),
        check(s, "symbolic-cocycle", || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let worst = (0..100)
                .map(|_| {
                    let r1 = rng.gen_range(0.1..10.0);
                    let r2 = r1 * rng.gen_range(0.01..1.0);
                    standard_cocycle_symbolic(r1, r2, p(rng.gen_range(0.0..10.0))).abs() * r2
                })
                .fold(0.0, f64::max);
            Ok((worst <= 1e-11, format!("max scaled residual {worst:.2e}")))
        }),
    ]
}

fn random_segment_outside(rng: &mut ChaCha8Rng, radius: f64) -> Result<Segment> {
    loop {
        let seg = if rng.gen_bool(0.5) {
            let a = Point::polar(rng.gen_range(radius..3.0 * radius), rng.gen_range(-PI..PI));
            let b = Point::polar(rng.gen_range(radius..3.0 * radius), rng.gen_range(-PI..PI));
            Segment::Line(LineSegment::new(a, b)?)
        } else {
            let c = Point::polar(rng.gen_range(0.0..3.0 * radius), rng.gen_range(-PI..PI));
            let r = rng.gen_range(0.2..2.0) * radius;
            Segment::Arc(CircularArc::new(
                c,
                r,
                rng.gen_range(-PI..PI),
                rng.gen_range(0.3..2.5),
            )?)
        };
        if seg.min_radius() > radius && seg.euclidean_length() > 1e-3 {
            return Ok(seg);
        }
    }
}

fn transforms_suite() -> Vec<CheckResult> {
    let s = Suite::Transforms;
    vec![
        check(s, "geodesic-examples", || {
            let a = geodesic(p(1.0), Point::new(1.0, 0.0), Point::ORIGIN)?;
            let b = geodesic(p(1.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0))?;
            let c = geodesic(p(1.0), Point::new(1.0, 0.0), Point::polar(1.0, 0.1))?;
            let ok = a.kind == GeodesicKind::SegmentToOrigin
                && (a.weighted_length - 0.5).abs() <= 1e-9
                && b.kind == GeodesicKind::TwoSegmentsViaOrigin
                && (b.weighted_length - 1.0).abs() <= 1e-9
                && c.kind == GeodesicKind::ConeChord
                && (c.weighted_length - 0.1f64.sin()).abs() <= 1e-9;
            Ok((
                ok,
                format!(
                    "{:.12} {:.12} {:.12}",
                    a.weighted_length, b.weighted_length, c.weighted_length
                ),
            ))
        }),
        check(s, "geodesic-continuity", || {
            let mut jump: f64 = 0.0;
            let mut prev: Option<f64> = None;
            for i in 0..=2000 {
                let t = PI / 2.0 - 1e-3 + 2e-3 * i as f64 / 2000.0;
                let l =
                    geodesic(p(1.0), Point::new(1.0, 0.0), Point::polar(1.3, t))?.weighted_length;
                if let Some(q) = prev {
                    jump = jump.max((l - q).abs());
                }
                prev = Some(l);
            }
            Ok((
                jump <= 1e-8,
                format!("max step {jump:.2e} over Δθ steps of 1e-6"),
            ))
        }),
        check(s, "area-cone-isometry", || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let seg = random_segment_outside(&mut rng, 0.2)?;
                let pv = rng.gen_range(0.0..4.0);
                let plane = segment_weighted_length(&seg, p(pv), 1e-13)?.value;
                let dense = dense_trace(&seg, 8192);
                let image = chord_length(&map_path_to_area_cone(&dense, p(pv))?);
                worst = worst.max(rel(image, plane));
            }
            Ok((worst <= 1e-8, format!("max relative error {worst:.2e}")))
        }),
        check(s, "perimeter-cone-area", || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let loop_ = random_star_loop(&mut rng)?;
                let pv = rng.gen_range(0.0..4.0);
                let plane = weighted_area(&loop_, p(pv), 1e-12)?;
                let mut dense: Vec<Point> = loop_
                    .segments()
                    .iter()
                    .flat_map(|q| dense_trace(q, 2048).into_iter().skip(1))
                    .collect();
                dense.insert(0, loop_.start());
                let image = fan_area(&map_path_to_perimeter_cone(&dense, p(pv))?);
                worst = worst.max(rel(image, plane));
            }
            Ok((worst <= 1e-8, format!("max relative error {worst:.2e}")))
        }),
        check(s, "phi-eps-jacobian", || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let eps: f64 = rng.gen_range(0.1..2.0);
                let z = Point::polar(
                    eps.sqrt() * rng.gen_range(1.05..5.0),
                    rng.gen_range(-PI..PI),
                );
                worst = worst.max((phi_eps_jacobian_det(z, eps)? - 1.0).abs());
            }
            Ok((worst <= 1e-10, format!("max |det - 1| {worst:.2e}")))
        }),
        check(s, "phi-eps-annulus", || {
            let outer = apply_phi_eps(&circle(Point::ORIGIN, 3.0)?, 1.0)?;
            let inner = apply_phi_eps(&circle(Point::ORIGIN, 2.0)?, 1.0)?;
            let area =
                weighted_area(&outer, p(0.0), 1e-12)? - weighted_area(&inner, p(0.0), 1e-12)?;
            let e = (area - 5.0 * PI).abs();
            Ok((e <= 1e-9, format!("area {area:.12}")))
        }),
        check(s, "phi-eps-perimeter-decrease", || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let eps: f64 = 0.25;
            let mut worst = f64::NEG_INFINITY;
            for k in [1.5, 2.0, 3.0] {
                for _ in 0..20 {
                    let c = BoundaryCurve::open(vec![random_segment_outside(
                        &mut rng,
                        2.0 * eps.sqrt(),
                    )?])?;
                    let before = weighted_length(&c, p(k), 1e-10)?;
                    let after = weighted_length(&apply_phi_eps(&c, eps)?, p(k), 1e-10)?;
                    worst = worst.max(after - before);
                }
            }
            Ok((worst < 0.0, format!("largest change {worst:.3e}")))
        }),
    ]
}

fn dense_trace(seg: &Segment, n: usize) -> Vec<Point> {
    match seg {
        Segment::Line(l) => subdivide(l.a, l.b, n).chain(std::iter::once(l.b)).collect(),
        Segment::Arc(a) => (0..=n)
            .map(|i| a.point_at(a.start_angle + a.sweep * i as f64 / n as f64))
            .collect(),
        Segment::Polyline(pl) => pl.samples().iter().map(|q| q.point).collect(),
    }
}

fn random_star_loop(rng: &mut ChaCha8Rng) -> Result<BoundaryCurve> {
    let n = rng.gen_range(5..12);
    let center = Point::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
    let pts: Vec<Point> = (0..n)
        .map(|i| {
            center
                + Point::polar(
                    rng.gen_range(0.8..1.6),
                    2.0 * PI * (i as f64 + rng.gen_range(0.0..0.5)) / n as f64,
                )
        })
        .collect();
    let segs = (0..n)
        .map(|i| LineSegment::new(pts[i], pts[(i + 1) % n]).map(Segment::Line))
        .collect::<Result<Vec<_>>>()?;
    BoundaryCurve::closed(segs)
}

fn pinch_suite() -> Vec<CheckResult> {
    let s = Suite::Pinch;
    vec![check(s, "pinch-orders", || {
        let sweep = pinch_sweep(p(2.0), 1.0, 1.0, 1e-3, 0.05, 24)?;
        let rs: Vec<f64> = sweep.iter().map(|q| q.r).collect();
        let saved = loglog_slope(
            &rs,
            &sweep.iter().map(|q| q.saved_perimeter).collect::<Vec<_>>(),
        )?;
        let added = loglog_slope(
            &rs,
            &sweep.iter().map(|q| q.added_perimeter).collect::<Vec<_>>(),
        )?;
        let negative = sweep.iter().all(|q| q.delta < 0.0);
        let ok = negative && (saved - 3.0).abs() <= 0.1 && (added - 4.0).abs() <= 0.1;
        Ok((
            ok,
            format!("delta<0 throughout: {negative}, slopes {saved:.4} and {added:.4}"),
        ))
    })]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass() {
        for r in run_all() {
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn fan_area_of_square() {
        let pts: Vec<Point> = subdivide(Point::new(1.0, -1.0), Point::new(1.0, 1.0), 8)
            .chain(subdivide(Point::new(1.0, 1.0), Point::new(-1.0, 1.0), 8))
            .chain(subdivide(Point::new(-1.0, 1.0), Point::new(-1.0, -1.0), 8))
            .chain(subdivide(Point::new(-1.0, -1.0), Point::new(1.0, -1.0), 8))
            .chain(std::iter::once(Point::new(1.0, -1.0)))
            .collect();
        assert!((fan_area(&pts) - 4.0).abs() < 1e-14);
    }
}
