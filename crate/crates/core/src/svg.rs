//! Static SVG rendering of a candidate: region 1 hatched, region 2 dotted,
//! one stroked path per edge and a marker at the origin.

use std::fmt::Write;

use crate::candidates::DoubleBubbleCandidate;
use crate::error::Result;
use crate::geometry::Point;

const CANVAS: f64 = 600.0;
const PER_TURN: usize = 720;

fn coord(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

fn path_data(loops: &[Vec<Point>]) -> String {
    let mut d = String::new();
    for pts in loops {
        for (i, q) in pts.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            // the y axis points down in SVG
            let _ = write!(d, "{cmd}{} {} ", coord(q.x), coord(-q.y));
        }
        d.push('Z');
    }
    d
}

/// Render `candidate`; the view box fits the cluster and the origin with a
/// 10% margin.
pub fn render_candidate(candidate: &DoubleBubbleCandidate) -> Result<String> {
    let mut region_loops = Vec::new();
    for i in 0..2 {
        let loops = candidate.region_loops(i)?;
        region_loops.push(loops.iter().map(|c| c.trace(PER_TURN)).collect::<Vec<_>>());
    }
    let edge_traces: Vec<Vec<Point>> = candidate
        .edges
        .iter()
        .map(|e| e.segment.trace(PER_TURN))
        .collect();

    let (mut lo, mut hi) = (Point::ORIGIN, Point::ORIGIN);
    for q in edge_traces.iter().flatten() {
        lo = Point::new(lo.x.min(q.x), lo.y.min(q.y));
        hi = Point::new(hi.x.max(q.x), hi.y.max(q.y));
    }
    let size = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let margin = 0.1 * size;
    let (x0, y0) = (lo.x - margin, -hi.y - margin);
    let (w, h) = (hi.x - lo.x + 2.0 * margin, hi.y - lo.y + 2.0 * margin);
    let stroke = 0.004 * size;
    let cell = 0.03 * size;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        coord(CANVAS),
        coord(CANVAS * h / w),
        coord(x0),
        coord(y0),
        coord(w),
        coord(h)
    );
    let _ = writeln!(
        s,
        "  <title>{} double bubble, p = {}</title>",
        candidate.kind, candidate.p
    );
    let _ = writeln!(s, "  <defs>");
    let _ = writeln!(
        s,
        r##"    <pattern id="hatch" patternUnits="userSpaceOnUse" width="{c}" height="{c}" patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="{c}" stroke="#3060a0" stroke-width="{sw}"/></pattern>"##,
        c = coord(cell),
        sw = coord(0.5 * stroke)
    );
    let _ = writeln!(
        s,
        r##"    <pattern id="dots" patternUnits="userSpaceOnUse" width="{c}" height="{c}"><circle cx="{h}" cy="{h}" r="{r}" fill="#b04030"/></pattern>"##,
        c = coord(cell),
        h = coord(0.5 * cell),
        r = coord(0.15 * cell)
    );
    let _ = writeln!(s, "  </defs>");
    for (i, (loops, fill)) in region_loops.iter().zip(["hatch", "dots"]).enumerate() {
        let _ = writeln!(
            s,
            r#"  <path class="region{}" fill="url(#{fill})" fill-rule="evenodd" stroke="none" d="{}"/>"#,
            i + 1,
            path_data(loops).trim_end()
        );
    }
    for (e, pts) in candidate.edges.iter().zip(&edge_traces) {
        let mut d = path_data(std::slice::from_ref(pts));
        d.pop();
        let _ = writeln!(
            s,
            r#"  <path class="edge" id="{}" fill="none" stroke="black" stroke-width="{}" d="{}"/>"#,
            e.name,
            coord(stroke),
            d.trim_end()
        );
    }
    let _ = writeln!(
        s,
        r##"  <circle class="origin" cx="0" cy="0" r="{}" fill="white" stroke="#d02020" stroke-width="{}"/>"##,
        coord(3.0 * stroke),
        coord(stroke)
    );
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{build_concentric, build_standard};
    use crate::measure::DensityExponent;

    #[test]
    fn concentric_has_two_circles_and_marker() {
        let c = build_concentric(DensityExponent::new(2.0).unwrap(), 1.0, 1.0, 1e-8).unwrap();
        let svg = render_candidate(&c).unwrap();
        assert_eq!(svg.matches(r#"class="edge""#).count(), 2);
        assert_eq!(svg.matches(r#"class="origin""#).count(), 1);
        assert!(svg.contains("url(#hatch)") && svg.contains("url(#dots)"));
    }

    #[test]
    fn output_is_deterministic() {
        let c = build_standard(DensityExponent::new(1.0).unwrap(), 1.0, 0.5, 1e-8).unwrap();
        assert_eq!(render_candidate(&c).unwrap(), render_candidate(&c).unwrap());
    }
}
