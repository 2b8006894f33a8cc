//! The four equilibrium double bubbles: standard, symmetric, two tangent
//! circles and concentric circles.
//!
//! A candidate stores each boundary edge once. Regions are lists of loops,
//! each loop a cycle of oriented references to edges; outer loops run
//! counterclockwise and holes clockwise. The perimeter sums every edge once,
//! so shared interface edges are never counted twice.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cgc::{shoot_symmetric_arc, DEFAULT_SHOOT_TOL};
use crate::error::{invalid, Error, Result};
use crate::geometry::{BoundaryCurve, CircularArc, LineSegment, Point, Segment};
use crate::measure::{segment_area_term, segment_weighted_length, DensityExponent, Scalable};
use crate::roots::bisect;

/// Default construction tolerance on weighted areas.
pub const DEFAULT_CANDIDATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateKind {
    Standard,
    Symmetric,
    TwoCircles,
    Concentric,
}

impl CandidateKind {
    pub const ALL: [CandidateKind; 4] = [
        CandidateKind::Standard,
        CandidateKind::Symmetric,
        CandidateKind::TwoCircles,
        CandidateKind::Concentric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CandidateKind::Standard => "standard",
            CandidateKind::Symmetric => "symmetric",
            CandidateKind::TwoCircles => "two-circles",
            CandidateKind::Concentric => "concentric",
        }
    }
}

impl fmt::Display for CandidateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CandidateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CandidateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown candidate kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub name: String,
    pub segment: Segment,
    /// Part of the boundary of both regions.
    pub shared: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRef {
    pub edge: usize,
    pub reversed: bool,
}

impl EdgeRef {
    fn fwd(edge: usize) -> Self {
        EdgeRef {
            edge,
            reversed: false,
        }
    }

    fn rev(edge: usize) -> Self {
        EdgeRef {
            edge,
            reversed: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub loops: Vec<Vec<EdgeRef>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubleBubbleCandidate {
    pub kind: CandidateKind,
    pub p: DensityExponent,
    pub edges: Vec<Edge>,
    pub regions: [Region; 2],
    pub target_areas: (f64, f64),
    pub weighted_areas: (f64, f64),
    pub weighted_perimeter: f64,
    /// Construction constants (radii, solved curvature, ...).
    pub parameters: BTreeMap<String, f64>,
    pub tol: f64,
}

impl DoubleBubbleCandidate {
    fn assemble(
        kind: CandidateKind,
        p: DensityExponent,
        edges: Vec<Edge>,
        regions: [Region; 2],
        target_areas: (f64, f64),
        parameters: BTreeMap<String, f64>,
        tol: f64,
    ) -> Result<Self> {
        let mut c = DoubleBubbleCandidate {
            kind,
            p,
            edges,
            regions,
            target_areas,
            weighted_areas: (0.0, 0.0),
            weighted_perimeter: 0.0,
            parameters,
            tol,
        };
        c.remeasure()?;
        Ok(c)
    }

    /// Recompute weighted areas and perimeter from the geometry.
    pub fn remeasure(&mut self) -> Result<()> {
        let qtol = quad_tol(self.tol, self.edges.len());
        let mut perimeter = 0.0;
        let mut terms = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            perimeter += segment_weighted_length(&e.segment, self.p, qtol)?.value;
            terms.push(segment_area_term(&e.segment, self.p, qtol)?.value);
        }
        let area = |r: &Region| -> f64 {
            r.loops
                .iter()
                .flatten()
                .map(|e| {
                    if e.reversed {
                        -terms[e.edge]
                    } else {
                        terms[e.edge]
                    }
                })
                .sum()
        };
        self.weighted_areas = (area(&self.regions[0]), area(&self.regions[1]));
        self.weighted_perimeter = perimeter;
        Ok(())
    }

    /// Closed loops bounding region `i` (0 or 1), outer loop first.
    pub fn region_loops(&self, i: usize) -> Result<Vec<BoundaryCurve>> {
        let region = self
            .regions
            .get(i)
            .ok_or_else(|| Error::Validation(format!("no region {i}")))?;
        region
            .loops
            .iter()
            .map(|lp| {
                let segs = lp
                    .iter()
                    .map(|e| {
                        let s = &self.edges[e.edge].segment;
                        if e.reversed {
                            s.reversed()
                        } else {
                            s.clone()
                        }
                    })
                    .collect();
                BoundaryCurve::closed(segs)
            })
            .collect()
    }

    pub fn region1(&self) -> Result<BoundaryCurve> {
        Ok(self.region_loops(0)?.remove(0))
    }

    pub fn region2(&self) -> Result<BoundaryCurve> {
        Ok(self.region_loops(1)?.remove(0))
    }

    pub fn interface(&self) -> Vec<&Segment> {
        self.edges
            .iter()
            .filter(|e| e.shared)
            .map(|e| &e.segment)
            .collect()
    }

    /// Points where edges meet, each listed once.
    pub fn vertices(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for e in &self.edges {
            let (a, b) = (e.segment.start(), e.segment.end());
            if a.distance(b) <= crate::geometry::JOIN_TOL {
                continue;
            }
            for q in [a, b] {
                if !out.iter().any(|v| v.distance(q) <= 1e-7 * (1.0 + q.norm())) {
                    out.push(q);
                }
            }
        }
        out
    }

    /// Maximum relative deviation of the areas from their targets.
    pub fn area_defect(&self) -> f64 {
        let rel = |a: f64, t: f64| (a - t).abs() / t.abs().max(1.0);
        rel(self.weighted_areas.0, self.target_areas.0)
            .max(rel(self.weighted_areas.1, self.target_areas.1))
    }

    fn map_edges(&self, f: impl Fn(&Segment) -> Segment) -> Vec<Edge> {
        self.edges
            .iter()
            .map(|e| Edge {
                segment: f(&e.segment),
                ..e.clone()
            })
            .collect()
    }

    /// Rotation about the origin; measures are recomputed.
    pub fn rotated(&self, angle: f64) -> Result<Self> {
        let mut c = DoubleBubbleCandidate {
            edges: self.map_edges(|s| s.rotated(angle)),
            ..self.clone()
        };
        c.remeasure()?;
        Ok(c)
    }
}

impl Scalable for DoubleBubbleCandidate {
    /// Scaling about the origin; targets scale by `λ^(p+2)` and measures are
    /// recomputed.
    fn scaled_by(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("scale factor must be positive, got {lambda}"));
        }
        let k = lambda.powf(self.p.value() + 2.0);
        let mut c = DoubleBubbleCandidate {
            edges: self.map_edges(|s| s.scaled(lambda)),
            target_areas: (self.target_areas.0 * k, self.target_areas.1 * k),
            ..self.clone()
        };
        c.remeasure()?;
        Ok(c)
    }
}

fn quad_tol(tol: f64, n: usize) -> f64 {
    0.01 * tol / n.max(1) as f64
}

fn check_inputs(p: DensityExponent, a1: f64, a2: f64, tol: f64) -> Result<DensityExponent> {
    let p = DensityExponent::nonnegative(p.value())?;
    if !(a1 > 0.0 && a1.is_finite()) || !(a2 > 0.0 && a2.is_finite()) {
        return invalid(format!(
            "areas must be positive and finite, got ({a1}, {a2})"
        ));
    }
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    Ok(p)
}

fn verify_areas(c: DoubleBubbleCandidate) -> Result<DoubleBubbleCandidate> {
    let d = c.area_defect();
    if d > c.tol {
        return Err(Error::Construction(format!(
            "{} candidate areas {:?} miss targets {:?} (relative defect {d:e})",
            c.kind, c.weighted_areas, c.target_areas
        )));
    }
    Ok(c)
}

fn params<const N: usize>(items: [(&str, f64); N]) -> BTreeMap<String, f64> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Inner disk of area `a1` and an annulus of area `a2` around it, both
/// centered at the origin.
pub fn build_concentric(
    p: DensityExponent,
    a1: f64,
    a2: f64,
    tol: f64,
) -> Result<DoubleBubbleCandidate> {
    let p = check_inputs(p, a1, a2, tol)?;
    let q = p.value() + 2.0;
    let r1 = (q * a1 / TAU).powf(1.0 / q);
    let r2 = (q * (a1 + a2) / TAU).powf(1.0 / q);
    let closed = TAU * (r1.powf(q - 1.0) + r2.powf(q - 1.0));
    let edges = vec![
        Edge {
            name: "inner".into(),
            segment: Segment::Arc(CircularArc::full_circle(Point::ORIGIN, r1, true)?),
            shared: true,
        },
        Edge {
            name: "outer".into(),
            segment: Segment::Arc(CircularArc::full_circle(Point::ORIGIN, r2, true)?),
            shared: false,
        },
    ];
    let regions = [
        Region {
            loops: vec![vec![EdgeRef::fwd(0)]],
        },
        Region {
            loops: vec![vec![EdgeRef::fwd(1)], vec![EdgeRef::rev(0)]],
        },
    ];
    let c = DoubleBubbleCandidate::assemble(
        CandidateKind::Concentric,
        p,
        edges,
        regions,
        (a1, a2),
        params([("R1", r1), ("R2", r2), ("closed_form_perimeter", closed)]),
        tol,
    )?;
    if (c.weighted_perimeter - closed).abs() > tol * closed.max(1.0) {
        return Err(Error::Construction(format!(
            "concentric perimeter {} disagrees with closed form {closed}",
            c.weighted_perimeter
        )));
    }
    verify_areas(c)
}

/// Weighted area of the unit disk whose boundary passes through the origin.
pub fn unit_disk_through_origin_area(p: DensityExponent, tol: f64) -> Result<f64> {
    let circle = Segment::Arc(CircularArc::full_circle(Point::new(1.0, 0.0), 1.0, true)?);
    Ok(segment_area_term(&circle, p, tol)?.value)
}

/// Two disks through the origin, tangent there, on opposite sides of the
/// y-axis.
pub fn build_two_circles(
    p: DensityExponent,
    a1: f64,
    a2: f64,
    tol: f64,
) -> Result<DoubleBubbleCandidate> {
    let p = check_inputs(p, a1, a2, tol)?;
    let unit = unit_disk_through_origin_area(p, 1e-3 * tol)?;
    let q = p.value() + 2.0;
    let r1 = (a1 / unit).powf(1.0 / q);
    let r2 = (a2 / unit).powf(1.0 / q);
    let edges = vec![
        Edge {
            name: "circle1".into(),
            segment: Segment::Arc(CircularArc::full_circle(Point::new(-r1, 0.0), r1, true)?),
            shared: false,
        },
        Edge {
            name: "circle2".into(),
            segment: Segment::Arc(CircularArc::full_circle(Point::new(r2, 0.0), r2, true)?),
            shared: false,
        },
    ];
    let regions = [
        Region {
            loops: vec![vec![EdgeRef::fwd(0)]],
        },
        Region {
            loops: vec![vec![EdgeRef::fwd(1)]],
        },
    ];
    let c = DoubleBubbleCandidate::assemble(
        CandidateKind::TwoCircles,
        p,
        edges,
        regions,
        (a1, a2),
        params([("R1", r1), ("R2", r2)]),
        tol,
    )?;
    verify_areas(c)
}

/// Euclidean standard double bubble with outer radii `r1 >= r2`, vertices at
/// the origin and at `(0, 2c)`. Region 1 (radius `r1`) lies left of the
/// vertex chord, region 2 right of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardShape {
    pub r1: f64,
    pub r2: f64,
    /// Distance between the outer centers.
    pub d: f64,
    /// Half the vertex chord.
    pub c: f64,
    pub s1: f64,
    pub s2: f64,
    /// Interface radius and center offset, `None` for a straight interface.
    pub interface: Option<(f64, f64)>,
}

impl StandardShape {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r2 > 0.0 && r1.is_finite() && r2.is_finite()) {
            return invalid(format!(
                "standard bubble radii must be positive, got ({r1}, {r2})"
            ));
        }
        if r2 > r1 {
            return invalid("standard bubble needs r1 >= r2");
        }
        let d = (r1 * r1 + r2 * r2 - r1 * r2).sqrt();
        let c = r1 * r2 * (PI / 3.0).sin() / d;
        let s1 = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
        let s2 = d - s1;
        let curv = 1.0 / r2 - 1.0 / r1;
        let interface = if curv.abs() < 1e-12 {
            None
        } else {
            let rm = 1.0 / curv.abs();
            Some((rm, (rm * rm - c * c).sqrt()))
        };
        Ok(StandardShape {
            r1,
            r2,
            d,
            c,
            s1,
            s2,
            interface,
        })
    }

    pub fn vertices(&self) -> [Point; 2] {
        [Point::ORIGIN, Point::new(0.0, 2.0 * self.c)]
    }

    fn edges(&self) -> Result<Vec<Edge>> {
        let [v0, v1] = self.vertices();
        let c1 = Point::new(-self.s1, self.c);
        let c2 = Point::new(self.s2, self.c);
        let interface = match self.interface {
            None => Segment::Line(LineSegment::new(v0, v1)?),
            Some((rm, sm)) => Segment::Arc(CircularArc::between(
                Point::new(sm, self.c),
                rm,
                v0,
                v1,
                false,
            )?),
        };
        Ok(vec![
            Edge {
                name: "outer1".into(),
                segment: Segment::Arc(CircularArc::between(c1, self.r1, v1, v0, true)?),
                shared: false,
            },
            Edge {
                name: "outer2".into(),
                segment: Segment::Arc(CircularArc::between(c2, self.r2, v0, v1, true)?),
                shared: false,
            },
            Edge {
                name: "interface".into(),
                segment: interface,
                shared: true,
            },
        ])
    }

    fn regions() -> [Region; 2] {
        [
            Region {
                loops: vec![vec![EdgeRef::fwd(0), EdgeRef::fwd(2)]],
            },
            Region {
                loops: vec![vec![EdgeRef::fwd(1), EdgeRef::rev(2)]],
            },
        ]
    }

    /// Weighted areas of both regions.
    pub fn areas(&self, p: DensityExponent, tol: f64) -> Result<(f64, f64)> {
        let edges = self.edges()?;
        let t: Vec<f64> = edges
            .iter()
            .map(|e| segment_area_term(&e.segment, p, tol / 3.0).map(|q| q.value))
            .collect::<Result<_>>()?;
        Ok((t[0] + t[2], t[1] - t[2]))
    }
}

/// Standard double bubble with one vertex at the origin and the other on
/// the positive y-axis. When `a2 > a1` the shape is built for the swapped
/// areas and the region labels are exchanged.
pub fn build_standard(
    p: DensityExponent,
    a1: f64,
    a2: f64,
    tol: f64,
) -> Result<DoubleBubbleCandidate> {
    let p = check_inputs(p, a1, a2, tol)?;
    let swap = a2 > a1;
    let (big, small) = if swap { (a2, a1) } else { (a1, a2) };
    let target = small / big;
    let qtol = 1e-12;
    let t = if target == 1.0 {
        1.0
    } else {
        let ratio = |t: f64| -> Result<f64> {
            let (x1, x2) = StandardShape::new(1.0, t)?.areas(p, qtol)?;
            Ok(x2 / x1 - target)
        };
        bisect(ratio, 1e-3, 1.0, 1e-12, 200).map_err(|e| match e {
            Error::Bracketing { .. } => {
                Error::Construction(format!("area ratio {target} outside the reachable range"))
            }
            other => other,
        })?
    };
    let (x1, _) = StandardShape::new(1.0, t)?.areas(p, qtol)?;
    let lambda = (big / x1).powf(1.0 / (p.value() + 2.0));
    let shape = StandardShape::new(lambda, lambda * t)?;
    let mut edges = shape.edges()?;
    let mut regions = StandardShape::regions();
    if swap {
        regions.swap(0, 1);
        edges.swap(0, 1);
        for r in &mut regions {
            for e in r.loops.iter_mut().flatten() {
                e.edge = match e.edge {
                    0 => 1,
                    1 => 0,
                    k => k,
                };
            }
        }
    }
    let mut parameters = params([
        ("r1", shape.r1),
        ("r2", shape.r2),
        ("center_distance", shape.d),
        ("half_chord", shape.c),
    ]);
    if let Some((rm, _)) = shape.interface {
        parameters.insert("interface_radius".into(), rm);
    }
    let c = DoubleBubbleCandidate::assemble(
        CandidateKind::Standard,
        p,
        edges,
        regions,
        (a1, a2),
        parameters,
        tol,
    )?;
    verify_areas(c)
}

/// Double bubble symmetric about the y-axis with both areas equal to `a`:
/// two constant-curvature arcs and a segment of the y-axis.
pub fn build_symmetric(p: DensityExponent, a: f64, tol: f64) -> Result<DoubleBubbleCandidate> {
    let p = check_inputs(p, a, a, tol)?;
    let shot = shoot_symmetric_arc(p, DEFAULT_SHOOT_TOL)?;
    // normalize before measuring: the raw arc can be large, and r^p then
    // swamps an absolute quadrature tolerance
    let lambda = (a / shot.region_area).powf(1.0 / (p.value() + 2.0));
    let right = shot.arc.segments()[0].scaled(lambda);
    let left = right.mirrored();
    let interface = LineSegment::new(right.end(), right.start())?;
    let edges = vec![
        Edge {
            name: "left".into(),
            segment: left,
            shared: false,
        },
        Edge {
            name: "right".into(),
            segment: right,
            shared: false,
        },
        Edge {
            name: "interface".into(),
            segment: Segment::Line(interface),
            shared: true,
        },
    ];
    let regions = [
        Region {
            loops: vec![vec![EdgeRef::fwd(0), EdgeRef::fwd(2)]],
        },
        Region {
            loops: vec![vec![EdgeRef::rev(2), EdgeRef::rev(1)]],
        },
    ];
    let parameters = params([
        ("kappa_f", shot.kappa_f / lambda),
        ("landing_residual", shot.landing_residual),
        ("bottom_vertex_y", shot.bottom_vertex_y * lambda),
        ("scale", lambda),
    ]);
    let c = DoubleBubbleCandidate::assemble(
        CandidateKind::Symmetric,
        p,
        edges,
        regions,
        (a, a),
        parameters,
        tol,
    )?;
    verify_areas(c)
}

/// Build any kind. The symmetric kind requires `a1 == a2`.
pub fn build_candidate(
    kind: CandidateKind,
    p: DensityExponent,
    a1: f64,
    a2: f64,
    tol: f64,
) -> Result<DoubleBubbleCandidate> {
    match kind {
        CandidateKind::Standard => build_standard(p, a1, a2, tol),
        CandidateKind::TwoCircles => build_two_circles(p, a1, a2, tol),
        CandidateKind::Concentric => build_concentric(p, a1, a2, tol),
        CandidateKind::Symmetric => {
            if a1 != a2 {
                return invalid("the symmetric candidate needs equal areas");
            }
            build_symmetric(p, a1, tol)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell {
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub p: f64,
    /// In the order of `CandidateKind::ALL`.
    pub cells: Vec<TableCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerimeterTable {
    pub rows: Vec<TableRow>,
}

impl PerimeterTable {
    pub fn value(&self, p: f64, kind: CandidateKind) -> Option<f64> {
        let k = CandidateKind::ALL.iter().position(|&x| x == kind)?;
        self.rows
            .iter()
            .find(|r| r.p == p)
            .and_then(|r| r.cells[k].value)
    }

    pub fn failures(&self) -> Vec<(f64, CandidateKind, &str)> {
        let mut out = Vec::new();
        for r in &self.rows {
            for (k, c) in CandidateKind::ALL.iter().zip(&r.cells) {
                if let Some(e) = &c.error {
                    out.push((r.p, *k, e.as_str()));
                }
            }
        }
        out
    }
}

/// Perimeters of all four candidates at unit areas for each `p`, computed
/// in parallel. Failures are recorded per cell.
pub fn perimeter_table(p_values: &[f64], tol: f64) -> Result<PerimeterTable> {
    if p_values.is_empty() {
        return invalid("no p values given");
    }
    for &p in p_values {
        DensityExponent::nonnegative(p)?;
    }
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let rows = p_values
        .par_iter()
        .map(|&p| {
            let d = DensityExponent::new(p).expect("validated above");
            let cells = CandidateKind::ALL
                .par_iter()
                .map(|&k| match build_candidate(k, d, 1.0, 1.0, tol) {
                    Ok(c) => TableCell {
                        value: Some(c.weighted_perimeter),
                        error: None,
                    },
                    Err(e) => TableCell {
                        value: None,
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            TableRow { p, cells }
        })
        .collect();
    Ok(PerimeterTable { rows })
}
