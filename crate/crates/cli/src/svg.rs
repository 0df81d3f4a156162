use std::f64::consts::PI;
use std::fmt::Write as _;

use nmeans::geometry::{BoundaryPiece, Cell, Point2, Support};
use nmeans::measure::PiecewiseConstant1D;

const SIZE: f64 = 1000.0;
const MARGIN: f64 = 50.0;

/// World-to-viewport map: uniform scale, y up, centred.
struct View {
    min: Point2,
    scale: f64,
    offset: Point2,
}

impl View {
    fn fit(min: Point2, max: Point2) -> Self {
        let span = (max.x - min.x).max(max.y - min.y).max(f64::MIN_POSITIVE);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        let offset = Point2::new(
            MARGIN + 0.5 * ((SIZE - 2.0 * MARGIN) - (max.x - min.x) * scale),
            MARGIN + 0.5 * ((SIZE - 2.0 * MARGIN) - (max.y - min.y) * scale),
        );
        Self { min, scale, offset }
    }

    fn x(&self, p: Point2) -> f64 {
        self.offset.x + (p.x - self.min.x) * self.scale
    }

    fn y(&self, p: Point2) -> f64 {
        SIZE - (self.offset.y + (p.y - self.min.y) * self.scale)
    }

    fn xy(&self, p: Point2) -> String {
        format!("{:.3} {:.3}", self.x(p), self.y(p))
    }
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="1000" height="1000" viewBox="0 0 1000 1000">"##
    );
    let _ = writeln!(out, r##"<rect x="0" y="0" width="1000" height="1000" fill="white"/>"##);
}

/// Arcs longer than a half turn are split so every arc command is unambiguous.
fn split_arcs(pieces: Vec<BoundaryPiece>) -> Vec<BoundaryPiece> {
    let mut out = Vec::with_capacity(pieces.len());
    for piece in pieces {
        match piece {
            BoundaryPiece::Arc {
                from,
                to,
                center,
                radius,
                sweep,
            } if sweep.abs() > PI - 1e-9 => {
                let mid = center + (from - center).rotated(0.5 * sweep);
                out.push(BoundaryPiece::Arc {
                    from,
                    to: mid,
                    center,
                    radius,
                    sweep: 0.5 * sweep,
                });
                out.push(BoundaryPiece::Arc {
                    from: mid,
                    to,
                    center,
                    radius,
                    sweep: 0.5 * sweep,
                });
            }
            other => out.push(other),
        }
    }
    out
}

fn path_data(view: &View, pieces: Vec<BoundaryPiece>) -> Option<String> {
    let pieces = split_arcs(pieces);
    let first = match pieces.first()? {
        BoundaryPiece::Segment { from, .. } | BoundaryPiece::Arc { from, .. } => *from,
    };
    let mut d = format!("M {}", view.xy(first));
    for piece in &pieces {
        match *piece {
            BoundaryPiece::Segment { to, .. } => {
                let _ = write!(d, " L {}", view.xy(to));
            }
            BoundaryPiece::Arc { to, radius, sweep, .. } => {
                // y is flipped, so counterclockwise in the plane is sweep-flag 0
                let flag = if sweep > 0.0 { 0 } else { 1 };
                let r = radius * view.scale;
                let _ = write!(d, " A {r:.3} {r:.3} 0 0 {flag} {}", view.xy(to));
            }
        }
    }
    d.push_str(" Z");
    Some(d)
}

/// Support boundary, clipped Voronoi cells and sites; optionally the circle
/// about the sites' mean through the farthest site.
pub fn render_2d(support: &Support, cells: &[Cell], sites: &[Point2], circle: bool) -> String {
    let (min, max) = support.bounding_box();
    let view = View::fit(min, max);
    let mut out = String::new();
    header(&mut out);
    let _ = writeln!(out, r##"<g fill="none" stroke="#888888" stroke-width="2">"##);
    for cell in cells {
        if let Some(d) = path_data(&view, cell.boundary()) {
            let _ = writeln!(out, r##"<path d="{d}"/>"##);
        }
    }
    let _ = writeln!(out, "</g>");
    if let Some(d) = path_data(&view, support.to_cell().boundary()) {
        let _ = writeln!(out, r##"<path d="{d}" fill="none" stroke="black" stroke-width="3"/>"##);
    }
    if circle && !sites.is_empty() {
        let mean = sites.iter().fold(Point2::ORIGIN, |acc, &p| acc + p) / sites.len() as f64;
        let r = sites.iter().map(|p| p.dist(mean)).fold(0.0, f64::max);
        if r > 0.0 {
            let _ = writeln!(
                out,
                r##"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#1f77b4" stroke-width="2" stroke-dasharray="8 6"/>"##,
                view.x(mean),
                view.y(mean),
                r * view.scale
            );
        }
    }
    let _ = writeln!(out, r##"<g fill="#d62728">"##);
    for &p in sites {
        let _ = writeln!(out, r##"<circle cx="{:.3}" cy="{:.3}" r="7"/>"##, view.x(p), view.y(p));
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

/// Step density above a baseline, sites on the baseline and dashed cell
/// boundaries at the midpoints.
pub fn render_1d(m: &PiecewiseConstant1D, sites: &[f64]) -> String {
    let (lo, hi) = (m.lower(), m.upper());
    let top = m.heights().iter().copied().fold(0.0, f64::max);
    let base = 700.0;
    let sx = |x: f64| MARGIN + (x - lo) / (hi - lo) * (SIZE - 2.0 * MARGIN);
    let sy = |h: f64| base - h / top * 400.0;
    let mut out = String::new();
    header(&mut out);
    let bp = m.breakpoints();
    let mut d = format!("M {:.3} {:.3}", sx(lo), base);
    for (j, &h) in m.heights().iter().enumerate() {
        let _ = write!(
            d,
            " L {:.3} {:.3} L {:.3} {:.3}",
            sx(bp[j]),
            sy(h),
            sx(bp[j + 1]),
            sy(h)
        );
    }
    let _ = write!(d, " L {:.3} {:.3} Z", sx(hi), base);
    let _ = writeln!(
        out,
        r##"<path d="{d}" fill="#e8e8e8" stroke="black" stroke-width="3"/>"##
    );
    let _ = writeln!(
        out,
        r##"<line x1="{:.3}" y1="{base:.3}" x2="{:.3}" y2="{base:.3}" stroke="black" stroke-width="2"/>"##,
        sx(lo),
        sx(hi)
    );
    for w in sites.windows(2) {
        let x = sx(0.5 * (w[0] + w[1]));
        let _ = writeln!(
            out,
            r##"<line x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="#888888" stroke-width="2" stroke-dasharray="8 6"/>"##,
            sy(top) - 20.0,
            base + 30.0
        );
    }
    let _ = writeln!(out, r##"<g fill="#d62728">"##);
    for &x in sites {
        let _ = writeln!(out, r##"<circle cx="{:.3}" cy="{base:.3}" r="8"/>"##, sx(x));
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}
