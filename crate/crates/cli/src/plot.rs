//! SVG figures of curve paths: the trajectory of every sample point across
//! `s` as a thin polyline and the two boundary curves drawn heavy.
//!
//! The plane and the half-plane are drawn in chart coordinates. The sphere
//! is projected orthographically, looking along the mean direction of all
//! points, and everything on the far hemisphere is dimmed and dashed.
//! Coordinates are printed with fixed precision so output is deterministic.

use std::fmt::Write as _;

use anyhow::bail;
use curvematch::{Coords, CurvePath, Manifold};

const SIZE: f64 = 640.0;
const MARGIN: f64 = 40.0;
const PALETTE: [(&str, &str); 4] =
    [("blue", "#1f4fa8"), ("red", "#c0392b"), ("green", "#2e8b57"), ("orange", "#d4801f")];

pub struct Series<'a> {
    pub label: String,
    pub path: &'a CurvePath,
}

/// A projected point and whether it faces the viewer.
#[derive(Clone, Copy)]
struct Projected {
    x: f64,
    y: f64,
    front: bool,
}

struct View {
    axes: Option<[[f64; 3]; 3]>,
}

impl View {
    fn new(manifold: Manifold, series: &[Series]) -> Self {
        if manifold != Manifold::Sphere {
            return Self { axes: None };
        }
        let mut sum = [0.0; 3];
        for s in series {
            for row in s.path.rows() {
                for p in row.points() {
                    for j in 0..3 {
                        sum[j] += p[j];
                    }
                }
            }
        }
        let norm = (sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]).sqrt();
        let view = if norm > 1e-9 { sum.map(|x| x / norm) } else { [0.0, 0.0, 1.0] };
        // screen "up" is the projection of the z axis, or of x when looking along z
        let hint = if view[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let d = hint[0] * view[0] + hint[1] * view[1] + hint[2] * view[2];
        let up = [hint[0] - d * view[0], hint[1] - d * view[1], hint[2] - d * view[2]];
        let un = (up[0] * up[0] + up[1] * up[1] + up[2] * up[2]).sqrt();
        let up = up.map(|x| x / un);
        let right =
            [up[1] * view[2] - up[2] * view[1], up[2] * view[0] - up[0] * view[2], up[0] * view[1] - up[1] * view[0]];
        Self { axes: Some([right, up, view]) }
    }

    fn project(&self, p: &Coords) -> Projected {
        match self.axes {
            None => Projected { x: p[0], y: p[1], front: true },
            Some([r, u, v]) => {
                let dot = |a: &[f64; 3]| a[0] * p[0] + a[1] * p[1] + a[2] * p[2];
                Projected { x: dot(&r), y: dot(&u), front: dot(&v) >= 0.0 }
            }
        }
    }
}

/// Maps chart coordinates to the canvas, keeping the aspect ratio.
struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
    offset: [f64; 2],
}

impl Frame {
    fn new(mut lo: [f64; 2], mut hi: [f64; 2]) -> Self {
        for j in 0..2 {
            if hi[j] - lo[j] < 1e-9 {
                lo[j] -= 0.5;
                hi[j] += 0.5;
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        let offset = [
            MARGIN + 0.5 * (SIZE - 2.0 * MARGIN - scale * (hi[0] - lo[0])),
            MARGIN + 0.5 * (SIZE - 2.0 * MARGIN - scale * (hi[1] - lo[1])),
        ];
        Self { x0: lo[0], y1: hi[1], scale, offset }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (self.offset[0] + self.scale * (x - self.x0), self.offset[1] + self.scale * (self.y1 - y))
    }
}

fn num(x: f64) -> String {
    let r = (x * 1000.0).round() / 1000.0;
    format!("{:.3}", if r == 0.0 { 0.0 } else { r })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Polyline runs of consecutive points on the same side of the sphere.
fn runs(points: &[Projected]) -> Vec<(bool, Vec<Projected>)> {
    let mut out: Vec<(bool, Vec<Projected>)> = Vec::new();
    for &p in points {
        match out.last_mut() {
            Some((front, run)) if *front == p.front => run.push(p),
            Some((_, run)) => {
                // share the crossing point so the line stays connected
                let last = *run.last().expect("runs are non-empty");
                out.push((p.front, vec![Projected { front: p.front, ..last }, p]));
            }
            None => out.push((p.front, vec![p])),
        }
    }
    out
}

fn is_degenerate(points: &[Projected], frame: &Frame) -> bool {
    let (x0, y0) = frame.map(points[0].x, points[0].y);
    points.iter().all(|p| {
        let (x, y) = frame.map(p.x, p.y);
        (x - x0).abs() < 5e-4 && (y - y0).abs() < 5e-4
    })
}

fn polyline(out: &mut String, frame: &Frame, points: &[Projected], color: &str, width: f64, front: bool) {
    let coords: Vec<String> = points
        .iter()
        .map(|p| {
            let (x, y) = frame.map(p.x, p.y);
            format!("{},{}", num(x), num(y))
        })
        .collect();
    let style = if front { String::new() } else { " stroke-opacity=\"0.3\" stroke-dasharray=\"3 3\"".to_string() };
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{}\"{style}/>",
        coords.join(" "),
        num(width)
    );
}

fn dot(out: &mut String, frame: &Frame, p: Projected, color: &str, radius: f64) {
    let (x, y) = frame.map(p.x, p.y);
    let opacity = if p.front { "" } else { " fill-opacity=\"0.3\"" };
    let _ =
        writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{color}\"{opacity}/>", num(x), num(y), num(radius));
}

fn draw_line(out: &mut String, frame: &Frame, points: &[Projected], color: &str, width: f64) {
    if is_degenerate(points, frame) {
        dot(out, frame, points[0], color, 0.8 * width + 0.6);
        return;
    }
    for (front, run) in runs(points) {
        polyline(out, frame, &run, color, width, front);
    }
}

/// Renders the paths on one figure, colored blue, red, green, orange in
/// order. All paths must live on the same manifold.
pub fn render(series: &[Series]) -> anyhow::Result<String> {
    let Some(first) = series.first() else { bail!("nothing to plot") };
    let manifold = first.path.manifold();
    if let Some(other) = series.iter().find(|s| s.path.manifold() != manifold) {
        bail!("cannot plot {} and {} paths on one figure", manifold.tag(), other.path.manifold().tag());
    }
    if series.len() > PALETTE.len() {
        bail!("at most {} paths fit on one figure", PALETTE.len());
    }
    let view = View::new(manifold, series);
    let projected: Vec<Vec<Vec<Projected>>> = series
        .iter()
        .map(|s| s.path.rows().iter().map(|row| row.points().iter().map(|p| view.project(p)).collect()).collect())
        .collect();

    let (lo, hi) = if manifold == Manifold::Sphere {
        ([-1.0, -1.0], [1.0, 1.0])
    } else {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in projected.iter().flatten().flatten() {
            lo = [lo[0].min(p.x), lo[1].min(p.y)];
            hi = [hi[0].max(p.x), hi[1].max(p.y)];
        }
        if manifold == Manifold::HyperbolicHalfPlane {
            // keep the boundary line in view
            lo[1] = 0.0;
        }
        (lo, hi)
    };
    let frame = Frame::new(lo, hi);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">",
        s = SIZE
    );
    let _ = writeln!(out, "<title>curve paths on {}</title>", manifold.tag());
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    match manifold {
        Manifold::Sphere => {
            let (cx, cy) = frame.map(0.0, 0.0);
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#999999\" stroke-width=\"1\"/>",
                num(cx),
                num(cy),
                num(frame.scale)
            );
        }
        Manifold::HyperbolicHalfPlane => {
            let (_, y) = frame.map(0.0, 0.0);
            let _ = writeln!(
                out,
                "<line x1=\"0\" y1=\"{y}\" x2=\"{s}\" y2=\"{y}\" stroke=\"#999999\" stroke-width=\"1\"/>",
                y = num(y),
                s = SIZE
            );
        }
        Manifold::Plane => {}
    }

    for (idx, (s, rows)) in series.iter().zip(&projected).enumerate() {
        let (name, color) = PALETTE[idx];
        let _ = writeln!(out, "<g id=\"{name}\" class=\"{}\">", escape(&s.label));
        let samples = rows[0].len();
        for i in 0..samples {
            let trajectory: Vec<Projected> = rows.iter().map(|row| row[i]).collect();
            draw_line(&mut out, &frame, &trajectory, color, 0.6);
        }
        for row in [&rows[0], &rows[rows.len() - 1]] {
            draw_line(&mut out, &frame, row, color, 2.2);
        }
        let _ = writeln!(out, "</g>");
    }

    for (idx, s) in series.iter().enumerate() {
        let y = 20.0 + 16.0 * idx as f64;
        let _ = writeln!(
            out,
            "<text x=\"12\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{}\">{}</text>",
            num(y),
            PALETTE[idx].1,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
