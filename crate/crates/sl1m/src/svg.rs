//! Top-down SVG rendering of a scenario and its plan.
//!
//! Output is a pure function of its inputs: coordinates are printed with a
//! fixed number of decimals and elements are emitted in index order.

use std::fmt::Write;
use std::fs;
use std::path::Path;

use sl1m_core::geometry::{Mat3, Polytope, Vec3};
use sl1m_core::{Plan, ProblemInstance};

use crate::error::{Error, Result};

/// Pixels per metre.
const SCALE: f64 = 200.0;
/// Blank border around the drawing, in metres.
const MARGIN: f64 = 0.1;
const FOOT_COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Fixed-precision number without a negative zero.
pub(crate) fn num(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    format!("{:.3}", if r == 0.0 { 0.0 } else { r })
}

/// Vertices of a bounded 2-D polytope (rows with no z part), counter-clockwise.
pub fn polygon_vertices(p: &Polytope) -> Vec<(f64, f64)> {
    let rows: Vec<(f64, f64, f64)> = p.rows.iter().zip(&p.rhs).map(|(r, &b)| (r.x, r.y, b)).collect();
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a1, b1, c1) = rows[i];
            let (a2, b2, c2) = rows[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / det;
            let y = (a1 * c2 - a2 * c1) / det;
            let inside = rows.iter().all(|&(a, b, c)| a * x + b * y <= c + 1e-9);
            if inside && !pts.iter().any(|q| (q.0 - x).abs() < 1e-9 && (q.1 - y).abs() < 1e-9) {
                pts.push((x, y));
            }
        }
    }
    if pts.is_empty() {
        return pts;
    }
    let n = pts.len() as f64;
    let (cx, cy) = pts.iter().fold((0.0, 0.0), |s, q| (s.0 + q.0 / n, s.1 + q.1 / n));
    pts.sort_by(|a, b| (a.1 - cy).atan2(a.0 - cx).total_cmp(&(b.1 - cy).atan2(b.0 - cx)));
    pts
}

struct Frame {
    min_x: f64,
    max_y: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(points: impl Iterator<Item = Vec3>) -> Frame {
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points {
            lo = (lo.0.min(p.x), lo.1.min(p.y));
            hi = (hi.0.max(p.x), hi.1.max(p.y));
        }
        if lo.0 > hi.0 {
            lo = (0.0, 0.0);
            hi = (0.0, 0.0);
        }
        Frame {
            min_x: lo.0 - MARGIN,
            max_y: hi.1 + MARGIN,
            width: (hi.0 - lo.0 + 2.0 * MARGIN) * SCALE,
            height: (hi.1 - lo.1 + 2.0 * MARGIN) * SCALE,
        }
    }

    fn point(&self, x: f64, y: f64) -> String {
        format!("{},{}", num((x - self.min_x) * SCALE), num((self.max_y - y) * SCALE))
    }

    fn points(&self, pts: impl Iterator<Item = (f64, f64)>) -> String {
        pts.map(|(x, y)| self.point(x, y)).collect::<Vec<_>>().join(" ")
    }
}

fn foot_outline(inst: &ProblemInstance, effector: usize, yaw: f64, at: Vec3) -> Vec<(f64, f64)> {
    let rot = Mat3::rot_z(yaw);
    polygon_vertices(&inst.effectors[effector].foot)
        .into_iter()
        .map(|(x, y)| {
            let w = rot.mul_vec(Vec3::new(x, y, 0.0));
            (at.x + w.x, at.y + w.y)
        })
        .collect()
}

/// Renders surfaces, the initial foot, every planned foot and the COM
/// polyline. A plan without phases yields the surfaces alone.
pub fn render_svg(inst: &ProblemInstance, plan: &Plan) -> String {
    let mut feet: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    if !plan.phases.is_empty() {
        let init = &inst.initial;
        feet.push((init.effector, foot_outline(inst, init.effector, init.yaw, init.position)));
        for (spec, ph) in inst.phases.iter().zip(&plan.phases) {
            feet.push((spec.effector, foot_outline(inst, spec.effector, spec.yaw, ph.foot)));
        }
    }
    let com = plan.com_polyline();
    let frame = Frame::new(
        inst.surfaces
            .iter()
            .flat_map(|s| s.vertices.iter().copied())
            .chain(feet.iter().flat_map(|f| f.1.iter().map(|&(x, y)| Vec3::new(x, y, 0.0))))
            .chain(com.iter().copied()),
    );

    let mut out = String::new();
    let w = &mut out;
    // Writing into a String cannot fail.
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}">"#,
        num(frame.width),
        num(frame.height)
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(w, r##"<g id="surfaces" stroke="#555555" stroke-width="1">"##);
    for s in &inst.surfaces {
        // Higher surfaces are drawn darker.
        let z = s.centroid().z;
        let shade = (220.0 - 200.0 * z.clamp(0.0, 1.0)).round() as u8;
        let _ = writeln!(
            w,
            r##"<polygon data-id="{}" points="{}" fill="#{shade:02x}{shade:02x}{shade:02x}"/>"##,
            s.id,
            frame.points(s.vertices.iter().map(|v| (v.x, v.y)))
        );
    }
    let _ = writeln!(w, "</g>");
    if !feet.is_empty() {
        let _ = writeln!(w, r#"<g id="feet" fill-opacity="0.6" stroke="black" stroke-width="0.5">"#);
        for (k, (e, poly)) in feet.iter().enumerate() {
            let _ = writeln!(
                w,
                r#"<polygon data-phase="{k}" points="{}" fill="{}"/>"#,
                frame.points(poly.iter().copied()),
                FOOT_COLORS[e % FOOT_COLORS.len()]
            );
        }
        let _ = writeln!(w, "</g>");
        let _ = writeln!(
            w,
            r#"<polyline id="com" points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
            frame.points(com.iter().map(|c| (c.x, c.y)))
        );
    }
    let _ = writeln!(w, "</svg>");
    out
}

pub fn export_svg(inst: &ProblemInstance, plan: &Plan, path: &Path) -> Result<()> {
    fs::write(path, render_svg(inst, plan)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sl1m_core::geometry::Polytope;
    use sl1m_core::{PlanStatus, SolveStats, SolverKind};

    #[test]
    fn numbers_have_fixed_precision() {
        assert_eq!(num(1.0), "1.000");
        assert_eq!(num(-0.0001), "0.000");
        assert_eq!(num(2.34567), "2.346");
    }

    #[test]
    fn rectangle_vertices_are_ordered() {
        let v = polygon_vertices(&Polytope::xy_rect((-0.1, -0.05), (0.1, 0.05)));
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], (-0.1, -0.05));
        assert_eq!(v[2], (0.1, 0.05));
    }

    #[test]
    fn empty_plan_draws_surfaces_only() {
        let inst = crate::generators::gen_toy(4, 1).to_instance().unwrap();
        let plan = Plan::without_solution(SolverKind::Sl1m, PlanStatus::Infeasible, SolveStats::default());
        let svg = render_svg(&inst, &plan);
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert!(!svg.contains("polyline"));
    }
}
