//! Curves of constant generalized curvature under the density `r^p`, and
//! the shooting problem for the symmetric double bubble.
//!
//! Orientation: `N` is the leftward unit normal of the direction of
//! travel, so a counterclockwise loop has `N` pointing inside. Along such a
//! curve
//!
//! ```text
//! dx/ds = cos φ,  dy/ds = sin φ,  dφ/ds = κ_f + p (N · r̂) / r.
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, CurveSample, Point, Polyline, Segment};
use crate::measure::DensityExponent;
use crate::ode::{dopri5_step, step_factor};
use crate::roots::{brent, scan_brackets, Bracket};

/// Integration aborts when the curve comes this close to the origin.
pub const ORIGIN_GUARD: f64 = 1e-8;
pub const DEFAULT_STEP_TOL: f64 = 1e-10;
pub const DEFAULT_SHOOT_TOL: f64 = 1e-10;

/// Heading of the symmetric arc at the top vertex `(0, 1)`.
pub const LAUNCH_HEADING: f64 = PI / 6.0;
/// Heading on arrival at the y-axis after turning clockwise by `4π/3`.
pub const LANDING_HEADING: f64 = -7.0 * PI / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveState {
    pub x: f64,
    pub y: f64,
    /// Tangent angle.
    pub phi: f64,
    pub s: f64,
}

impl CurveState {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        CurveState { x, y, phi, s: 0.0 }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRate {
    pub dx: f64,
    pub dy: f64,
    pub dphi: f64,
}

/// `(N · r̂) / r` for leftward normal `N` at heading `phi`.
fn normal_radial_term(x: f64, y: f64, phi: f64) -> f64 {
    (-x * phi.sin() + y * phi.cos()) / (x * x + y * y)
}

pub fn cgc_derivative(state: &CurveState, kappa_f: f64, p: DensityExponent) -> Result<CurveRate> {
    let r2 = state.x * state.x + state.y * state.y;
    if !(r2 > 0.0) {
        return Err(Error::Singularity(format!(
            "curve state at ({}, {})",
            state.x, state.y
        )));
    }
    Ok(CurveRate {
        dx: state.phi.cos(),
        dy: state.phi.sin(),
        dphi: kappa_f + p.value() * normal_radial_term(state.x, state.y, state.phi),
    })
}

/// `κ_0 - p (N · r̂) / r` for a point with heading `phi` and Euclidean
/// curvature `kappa0`.
pub fn generalized_curvature(point: Point, phi: f64, kappa0: f64, p: DensityExponent) -> f64 {
    kappa0 - p.value() * normal_radial_term(point.x, point.y, phi)
}

/// When integration stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// After exactly this arclength.
    ArcLength(f64),
    /// At the first sign change of `x` after leaving the start; fails if
    /// none occurs within `max_arclength`.
    YAxisCrossing { max_arclength: f64 },
    /// The same for `y`.
    XAxisCrossing { max_arclength: f64 },
}

impl StopRule {
    /// State component whose sign change ends integration.
    fn crossing_component(self) -> Option<usize> {
        match self {
            StopRule::ArcLength(_) => None,
            StopRule::YAxisCrossing { .. } => Some(0),
            StopRule::XAxisCrossing { .. } => Some(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgcOptions {
    pub step_tol: f64,
    pub guard_radius: f64,
    /// Upper bound on the step, which also bounds the sample spacing.
    pub max_step: f64,
    pub max_steps: usize,
    /// Abort once the heading has turned this far from its start.
    pub max_turning: f64,
}

impl Default for CgcOptions {
    fn default() -> Self {
        CgcOptions {
            step_tol: DEFAULT_STEP_TOL,
            guard_radius: ORIGIN_GUARD,
            max_step: 0.0025,
            max_steps: 2_000_000,
            max_turning: f64::INFINITY,
        }
    }
}

/// An integrated arc together with its weighted quadratures, which are
/// carried along as extra ODE components.
#[derive(Debug, Clone, PartialEq)]
pub struct CgcTrajectory {
    pub curve: BoundaryCurve,
    pub end: CurveState,
    /// `∫ r^p ds`.
    pub weighted_length: f64,
    /// `(1/(p+2)) ∫ r^p (x dy - y dx)`: the arc's share of a loop's
    /// weighted area.
    pub area_term: f64,
    pub steps: usize,
}

type State = [f64; 5];

fn rhs(kappa_f: f64, p: DensityExponent, guard: f64) -> impl Fn(&State) -> Result<State> {
    move |u: &State| {
        let (x, y, phi) = (u[0], u[1], u[2]);
        let r2 = x * x + y * y;
        if !(r2 >= guard * guard) {
            return Err(Error::Singularity(format!(
                "trajectory reached ({x:e}, {y:e}), inside the origin guard radius {guard:e}"
            )));
        }
        let (sin, cos) = phi.sin_cos();
        let w = p.density(r2.sqrt());
        Ok([
            cos,
            sin,
            kappa_f + p.value() * (-x * sin + y * cos) / r2,
            w,
            w * (x * sin - y * cos) / (p.value() + 2.0),
        ])
    }
}

fn sample(u: &State, du: &State, s: f64) -> CurveSample {
    CurveSample {
        point: Point::new(u[0], u[1]),
        s,
        heading: u[2],
        curvature: du[2],
    }
}

fn push_sample(samples: &mut Vec<CurveSample>, q: CurveSample) {
    match samples.last_mut() {
        Some(last) if q.s <= last.s + 1e-14 => *last = CurveSample { s: last.s, ..q },
        _ => samples.push(q),
    }
}

/// Integrate a constant-`κ_f` curve; returns the sampled curve.
pub fn integrate_cgc(
    start: CurveState,
    kappa_f: f64,
    p: DensityExponent,
    stop: StopRule,
    step_tol: f64,
) -> Result<BoundaryCurve> {
    let opts = CgcOptions {
        step_tol,
        ..CgcOptions::default()
    };
    integrate_cgc_with(start, kappa_f, p, stop, &opts).map(|t| t.curve)
}

pub fn integrate_cgc_with(
    start: CurveState,
    kappa_f: f64,
    p: DensityExponent,
    stop: StopRule,
    opts: &CgcOptions,
) -> Result<CgcTrajectory> {
    if !(opts.step_tol > 0.0) || !(opts.max_step > 0.0) {
        return Err(Error::Validation(
            "step tolerance and maximum step must be positive".into(),
        ));
    }
    if !kappa_f.is_finite()
        || !start.x.is_finite()
        || !start.y.is_finite()
        || !start.phi.is_finite()
    {
        return Err(Error::Validation(
            "non-finite start state or curvature".into(),
        ));
    }
    let s_max = match stop {
        StopRule::ArcLength(l)
        | StopRule::YAxisCrossing { max_arclength: l }
        | StopRule::XAxisCrossing { max_arclength: l } => l,
    };
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(Error::Validation(format!(
            "stop arclength must be positive and finite, got {s_max}"
        )));
    }
    let f = rhs(kappa_f, p, opts.guard_radius);
    let mut u: State = [start.x, start.y, start.phi, 0.0, 0.0];
    let mut du = f(&u)?;
    let mut s = 0.0;
    let mut samples = vec![sample(&u, &du, start.s)];
    let mut h = opts.max_step.min(0.01).min(s_max);
    let axis = stop.crossing_component();
    let c0 = axis.map_or(0.0, |i| u[i]);
    let mut side = if c0 != 0.0 { c0.signum() } else { 0.0 };
    let mut steps = 0;

    loop {
        if steps >= opts.max_steps {
            return Err(Error::StepLimit(opts.max_steps));
        }
        steps += 1;
        let remaining = s_max - s;
        let h_try = h.min(opts.max_step).min(remaining);
        let st = dopri5_step(&f, &u, &du, h_try, opts.step_tol)?;
        if st.err > 1.0 {
            h = h_try * step_factor(st.err);
            if h < 1e-14 * (1.0 + s) {
                return Err(Error::Singularity("step size underflow".into()));
            }
            continue;
        }
        let last = h_try >= remaining;
        h = h_try * step_factor(st.err);

        if let Some(i) = axis {
            let x_new = st.y[i];
            if side != 0.0 && side * x_new <= 0.0 {
                let (h_event, end, dend) =
                    locate_crossing(&f, &u, &du, h_try, i, side, opts.step_tol)?;
                s += h_event;
                push_sample(&mut samples, sample(&end, &dend, start.s + s));
                return finish(samples, end, s, start.s, steps);
            }
            if side == 0.0 && x_new != 0.0 {
                side = x_new.signum();
            }
        }

        u = st.y;
        du = st.dy;
        s = if last { s_max } else { s + h_try };
        push_sample(&mut samples, sample(&u, &du, start.s + s));
        if (u[2] - start.phi).abs() > opts.max_turning {
            return Err(Error::NoEvent(format!(
                "heading turned more than {} rad",
                opts.max_turning
            )));
        }
        if last {
            return match stop {
                StopRule::ArcLength(_) => finish(samples, u, s, start.s, steps),
                StopRule::YAxisCrossing { max_arclength }
                | StopRule::XAxisCrossing { max_arclength } => Err(Error::NoEvent(format!(
                    "no axis crossing within arclength {max_arclength}"
                ))),
            };
        }
    }
}

/// Find the step `h* ∈ (0, h]` from `u` whose end has `u[i] = 0`.
fn locate_crossing<F>(
    f: &F,
    u: &State,
    du: &State,
    h: f64,
    i: usize,
    side: f64,
    tol: f64,
) -> Result<(f64, State, State)>
where
    F: Fn(&State) -> Result<State>,
{
    let g = |t: f64| -> Result<f64> {
        if t == 0.0 {
            return Ok(side * u[i]);
        }
        Ok(side * dopri5_step(f, u, du, t, tol)?.y[i])
    };
    let bracket = Bracket {
        lo: 0.0,
        hi: h,
        f_lo: g(0.0)?,
        f_hi: g(h)?,
    };
    let (t, _) = brent(g, bracket, 1e-15 * h.max(1e-300), 0.01 * tol, 200)?;
    if t == 0.0 {
        return Ok((0.0, *u, *du));
    }
    let st = dopri5_step(f, u, du, t, tol)?;
    let mut end = st.y;
    // snap to the axis; the residual of the step is far below `tol`
    end[i] = 0.0;
    Ok((t, end, st.dy))
}

fn finish(
    samples: Vec<CurveSample>,
    end: State,
    s: f64,
    s0: f64,
    steps: usize,
) -> Result<CgcTrajectory> {
    let poly = Polyline::new(samples)?;
    Ok(CgcTrajectory {
        curve: BoundaryCurve::open(vec![Segment::Polyline(poly)])?,
        end: CurveState {
            x: end[0],
            y: end[1],
            phi: end[2],
            s: s0 + s,
        },
        weighted_length: end[3],
        area_term: end[4],
        steps,
    })
}

/// How a trial curvature is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShootingMode {
    /// Integrate the whole arc and compare its heading on the y-axis with
    /// the landing heading.
    Full,
    /// Integrate to the x-axis and require a perpendicular crossing; the
    /// arc is completed by reflection in the x-axis. Only outward motion
    /// is integrated, so errors are not amplified by the return towards
    /// the origin.
    Mirror,
}

/// One solution of the symmetric shooting problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingRoot {
    pub kappa_f: f64,
    pub mode: ShootingMode,
    pub landing_residual: f64,
    pub bottom_vertex_y: f64,
    /// Perimeter of the symmetric bubble after scaling both areas to 1.
    pub normalized_perimeter: f64,
    /// Scan interval that contained the root.
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    pub kappa_f: f64,
    pub mode: ShootingMode,
    /// Right arc from `(0, 1)` clockwise to `(0, bottom_vertex_y)`.
    pub arc: BoundaryCurve,
    /// Landing heading defect; in mirror mode, twice the defect at the
    /// x-axis, which is the corner angle of the assembled arc.
    pub landing_residual: f64,
    pub bottom_vertex_y: f64,
    pub bracket: (f64, f64),
    pub normalized_perimeter: f64,
    /// `∫ r^p ds` over the right arc.
    pub arc_weighted_length: f64,
    /// Weighted area of the right region before normalization.
    pub region_area: f64,
    /// Other roots found by the scans.
    pub alternatives: Vec<ShootingRoot>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub shoot_tol: f64,
    pub step_tol: f64,
    pub bracket: (f64, f64),
    pub scan_steps: usize,
    pub max_arclength: f64,
    pub sample_step: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            shoot_tol: DEFAULT_SHOOT_TOL,
            step_tol: 1e-12,
            bracket: (-20.0, 0.0),
            scan_steps: 200,
            max_arclength: 200.0,
            sample_step: 0.0025,
        }
    }
}

/// Weighted length of the y-axis from `y_b` to `1`.
pub fn interface_weighted_length(y_b: f64, p: DensityExponent) -> f64 {
    let q = p.value() + 1.0;
    let prim = |y: f64| y.signum() * y.abs().powf(q) / q;
    prim(1.0) - prim(y_b)
}

struct Landing {
    mode: ShootingMode,
    traj: CgcTrajectory,
    residual: f64,
    /// Whole right arc.
    weighted_length: f64,
    area_term: f64,
    bottom_y: f64,
}

impl Landing {
    fn normalized_perimeter(&self, p: DensityExponent) -> Option<f64> {
        let area = -self.area_term;
        if !(area > 0.0) || !(self.bottom_y < 1.0) {
            return None;
        }
        let perimeter = 2.0 * self.weighted_length + interface_weighted_length(self.bottom_y, p);
        Some(perimeter / area.powf((p.value() + 1.0) / (p.value() + 2.0)))
    }

    fn into_arc(self) -> Result<BoundaryCurve> {
        match self.mode {
            ShootingMode::Full => Ok(self.traj.curve),
            ShootingMode::Mirror => {
                let Segment::Polyline(half) = &self.traj.curve.segments()[0] else {
                    unreachable!("integrated curves are polylines")
                };
                let half = half.samples();
                let total = 2.0 * self.traj.end.s;
                let mut samples = half.to_vec();
                samples.extend(half.iter().rev().skip(1).map(|q| CurveSample {
                    point: Point::new(q.point.x, -q.point.y),
                    s: total - q.s,
                    heading: -PI - q.heading,
                    curvature: q.curvature,
                }));
                BoundaryCurve::open(vec![Segment::Polyline(Polyline::new(samples)?)])
            }
        }
    }
}

fn launch(
    mode: ShootingMode,
    kappa_f: f64,
    p: DensityExponent,
    opts: &ShootingOptions,
    max_step: f64,
    step_tol: f64,
) -> Result<Landing> {
    let cgc = CgcOptions {
        step_tol,
        max_step,
        max_turning: 6.0 * PI,
        max_steps: 200_000,
        ..CgcOptions::default()
    };
    let stop = match mode {
        ShootingMode::Full => StopRule::YAxisCrossing {
            max_arclength: opts.max_arclength,
        },
        ShootingMode::Mirror => StopRule::XAxisCrossing {
            max_arclength: 0.5 * opts.max_arclength,
        },
    };
    let traj = integrate_cgc_with(
        CurveState::new(0.0, 1.0, LAUNCH_HEADING),
        kappa_f,
        p,
        stop,
        &cgc,
    )?;
    match mode {
        ShootingMode::Full => Ok(Landing {
            mode,
            residual: traj.end.phi - LANDING_HEADING,
            weighted_length: traj.weighted_length,
            area_term: traj.area_term,
            bottom_y: traj.end.y,
            traj,
        }),
        ShootingMode::Mirror => {
            let Segment::Polyline(half) = &traj.curve.segments()[0] else {
                unreachable!("integrated curves are polylines")
            };
            if half.samples()[1..].iter().any(|q| q.point.x <= 0.0) {
                return Err(Error::NoEvent(
                    "arc crossed the y-axis before the x-axis".into(),
                ));
            }
            Ok(Landing {
                mode,
                residual: 2.0 * (traj.end.phi + PI / 2.0),
                weighted_length: 2.0 * traj.weighted_length,
                area_term: 2.0 * traj.area_term,
                bottom_y: -1.0,
                traj,
            })
        }
    }
}

/// Landing-angle residual for one trial curvature.
pub fn shooting_residual(mode: ShootingMode, kappa_f: f64, p: DensityExponent) -> Result<f64> {
    let opts = ShootingOptions::default();
    launch(mode, kappa_f, p, &opts, 0.05, opts.step_tol).map(|l| l.residual)
}

/// Full-mode residual: heading on the y-axis minus the landing heading.
pub fn landing_residual(kappa_f: f64, p: DensityExponent) -> Result<f64> {
    shooting_residual(ShootingMode::Full, kappa_f, p)
}

pub fn shoot_symmetric_arc(p: DensityExponent, shoot_tol: f64) -> Result<ShootingResult> {
    shoot_symmetric_arc_with(
        p,
        &ShootingOptions {
            shoot_tol,
            ..ShootingOptions::default()
        },
    )
}

fn find_roots(mode: ShootingMode, p: DensityExponent, opts: &ShootingOptions) -> Vec<ShootingRoot> {
    let scan_tol = opts.step_tol.max(1e-9);
    let residual = |k: f64| launch(mode, k, p, opts, 0.05, opts.step_tol).map(|l| l.residual);
    let brackets = scan_brackets(
        |k| {
            launch(mode, k, p, opts, 0.05, scan_tol)
                .ok()
                .map(|l| l.residual)
        },
        opts.bracket.0,
        opts.bracket.1,
        opts.scan_steps,
    );
    let mut roots = Vec::new();
    for br in brackets {
        let (Ok(f_lo), Ok(f_hi)) = (residual(br.lo), residual(br.hi)) else {
            continue;
        };
        if f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
            continue;
        }
        let refined = Bracket { f_lo, f_hi, ..br };
        let Ok((k, _)) = brent(residual, refined, 1e-15, 0.1 * opts.shoot_tol, 200) else {
            continue;
        };
        let Ok(l) = launch(mode, k, p, opts, 0.05, opts.step_tol) else {
            continue;
        };
        // jump discontinuities of the residual produce spurious sign changes
        if l.residual.abs() > 1e-6 {
            continue;
        }
        if let Some(np) = l.normalized_perimeter(p) {
            roots.push(ShootingRoot {
                kappa_f: k,
                mode,
                landing_residual: l.residual,
                bottom_vertex_y: l.bottom_y,
                normalized_perimeter: np,
                bracket: (br.lo, br.hi),
            });
        }
    }
    roots
}

pub fn shoot_symmetric_arc_with(
    p: DensityExponent,
    opts: &ShootingOptions,
) -> Result<ShootingResult> {
    let p = DensityExponent::nonnegative(p.value())?;
    if !(opts.shoot_tol > 0.0) || opts.scan_steps == 0 || !(opts.bracket.0 < opts.bracket.1) {
        return Err(Error::Validation("invalid shooting options".into()));
    }
    if p.value() == 0.0 {
        // Every negative curvature lands correctly; the problem is
        // translation and scale invariant, so any one will do.
        return finalize(ShootingMode::Full, -1.0, (-1.0, -1.0), p, opts, Vec::new());
    }

    let mut roots = find_roots(ShootingMode::Mirror, p, opts);
    let full = find_roots(ShootingMode::Full, p, opts);
    for r in full {
        // full-mode roots are only accurate to the conditioning of the
        // return leg, so duplicates are matched loosely
        let seen = roots.iter().any(|m| {
            (m.kappa_f - r.kappa_f).abs() <= 1e-4 * (1.0 + r.kappa_f.abs())
                && (m.bottom_vertex_y - r.bottom_vertex_y).abs() <= 1e-3
        });
        if !seen {
            roots.push(r);
        }
    }
    if roots.is_empty() {
        return Err(Error::Bracketing {
            lo: opts.bracket.0,
            hi: opts.bracket.1,
        });
    }
    roots.sort_by(|a, b| a.normalized_perimeter.total_cmp(&b.normalized_perimeter));
    let best = roots.remove(0);
    finalize(best.mode, best.kappa_f, best.bracket, p, opts, roots)
}

fn finalize(
    mode: ShootingMode,
    kappa_f: f64,
    bracket: (f64, f64),
    p: DensityExponent,
    opts: &ShootingOptions,
    alternatives: Vec<ShootingRoot>,
) -> Result<ShootingResult> {
    let l = launch(mode, kappa_f, p, opts, opts.sample_step, opts.step_tol)?;
    if l.residual.abs() > opts.shoot_tol {
        return Err(Error::RootFinding(format!(
            "landing residual {:e} exceeds tolerance {:e}",
            l.residual, opts.shoot_tol
        )));
    }
    let normalized_perimeter = l
        .normalized_perimeter(p)
        .ok_or_else(|| Error::Construction("shooting arc does not bound a region".into()))?;
    Ok(ShootingResult {
        kappa_f,
        mode,
        landing_residual: l.residual,
        bottom_vertex_y: l.bottom_y,
        bracket,
        normalized_perimeter,
        arc_weighted_length: l.weighted_length,
        region_area: -l.area_term,
        arc: l.into_arc()?,
        alternatives,
    })
}
