//! Symmetric configuration families on the disc and the square.
//!
//! Each family maps one or two parameters to sites in a unit frame (the unit
//! disc centred at the origin, or `[0,1]²`), which is then carried onto the
//! actual support by its [`Frame`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distortion::{evaluate, Configuration};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Support};
use crate::measure::UniformMeasure2D;
use crate::report::{Method, SolveReport};

const SHAPE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `k` sites on a circle about the centre.
    RegularGon(usize),
    /// The centre plus `k` sites on a circle about it.
    CenterPlusGon(usize),
    AxisPair,
    DiagonalPair,
    DiagonalQuad,
    AxisQuad,
    CenterPlusAxisQuad,
    CenterPlusDiagonalQuad,
    /// One site on a diagonal, two mirrored across it.
    DiagonalSplit,
    /// One site on the vertical midline, two mirrored across it.
    BisectorSplit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameShape {
    Disc,
    Square,
}

impl FamilyKind {
    pub fn shape(&self) -> FrameShape {
        match self {
            FamilyKind::RegularGon(_) | FamilyKind::CenterPlusGon(_) => FrameShape::Disc,
            _ => FrameShape::Square,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            FamilyKind::RegularGon(k) => k,
            FamilyKind::CenterPlusGon(k) => k + 1,
            FamilyKind::AxisPair | FamilyKind::DiagonalPair => 2,
            FamilyKind::DiagonalSplit | FamilyKind::BisectorSplit => 3,
            FamilyKind::DiagonalQuad | FamilyKind::AxisQuad => 4,
            FamilyKind::CenterPlusAxisQuad | FamilyKind::CenterPlusDiagonalQuad => 5,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            FamilyKind::DiagonalSplit | FamilyKind::BisectorSplit => 2,
            _ => 1,
        }
    }

    /// Open parameter interval of a one-parameter family.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            FamilyKind::RegularGon(_) | FamilyKind::CenterPlusGon(_) => (0.0, 1.0),
            FamilyKind::CenterPlusDiagonalQuad => (0.5, 1.0),
            FamilyKind::DiagonalSplit | FamilyKind::BisectorSplit => (0.0, 1.0),
            _ => (0.0, 0.5),
        }
    }

    /// Families worth trying for `n` sites on a support of the given shape.
    pub fn for_n(shape: FrameShape, n: usize) -> Vec<FamilyKind> {
        match shape {
            FrameShape::Disc => {
                let mut out = Vec::new();
                if n >= 2 {
                    out.push(FamilyKind::RegularGon(n));
                }
                if n >= 3 {
                    out.push(FamilyKind::CenterPlusGon(n - 1));
                }
                out
            }
            FrameShape::Square => match n {
                2 => vec![FamilyKind::AxisPair, FamilyKind::DiagonalPair],
                3 => vec![FamilyKind::DiagonalSplit, FamilyKind::BisectorSplit],
                4 => vec![FamilyKind::DiagonalQuad, FamilyKind::AxisQuad],
                5 => vec![FamilyKind::CenterPlusAxisQuad, FamilyKind::CenterPlusDiagonalQuad],
                _ => Vec::new(),
            },
        }
    }

    /// Sites in the unit frame.
    pub fn unit_sites(&self, params: &[f64]) -> Vec<Point2> {
        let p = |x: f64, y: f64| Point2::new(x, y);
        let t = params[0];
        match *self {
            FamilyKind::RegularGon(k) => ring(k, t),
            FamilyKind::CenterPlusGon(k) => {
                let mut sites = vec![Point2::ORIGIN];
                sites.extend(ring(k, t));
                sites
            }
            FamilyKind::AxisPair => vec![p(t, 0.5), p(1.0 - t, 0.5)],
            FamilyKind::DiagonalPair => vec![p(t, t), p(1.0 - t, 1.0 - t)],
            FamilyKind::DiagonalQuad => vec![p(t, t), p(1.0 - t, t), p(1.0 - t, 1.0 - t), p(t, 1.0 - t)],
            FamilyKind::AxisQuad => axis_cross(t),
            FamilyKind::CenterPlusAxisQuad => {
                let mut sites = vec![p(0.5, 0.5)];
                sites.extend(axis_cross(t));
                sites
            }
            FamilyKind::CenterPlusDiagonalQuad => {
                vec![p(0.5, 0.5), p(t, t), p(1.0 - t, t), p(1.0 - t, 1.0 - t), p(t, 1.0 - t)]
            }
            FamilyKind::DiagonalSplit => {
                let [pp, q, r, _, _] = diagonal_split(params[0], params[1]);
                vec![pp, q, r]
            }
            FamilyKind::BisectorSplit => {
                let [pp, q, r, _, _] = bisector_split(params[0], params[1]);
                vec![pp, q, r]
            }
        }
    }

    /// Equal-distance residuals of a two-parameter family: the split sites
    /// must be equidistant from both ends of their shared cell edge.
    fn residuals(&self, a: f64, b: f64) -> [f64; 2] {
        let [p, q, _, d, m] = match self {
            FamilyKind::DiagonalSplit => diagonal_split(a, b),
            FamilyKind::BisectorSplit => bisector_split(a, b),
            _ => unreachable!("one-parameter family"),
        };
        [
            (p - d).norm_sq() - (q - d).norm_sq(),
            (p - m).norm_sq() - (q - m).norm_sq(),
        ]
    }
}

fn ring(k: usize, radius: f64) -> Vec<Point2> {
    let phase = PI / k as f64;
    (0..k)
        .map(|j| Point2::polar(radius, phase + 2.0 * PI * j as f64 / k as f64))
        .collect()
}

fn axis_cross(t: f64) -> Vec<Point2> {
    vec![
        Point2::new(0.5, 0.5 - t),
        Point2::new(0.5 + t, 0.5),
        Point2::new(0.5, 0.5 + t),
        Point2::new(0.5 - t, 0.5),
    ]
}

/// Sites `p, q, r` and the cell-edge ends `d, m` with `d = (1−α, 1)` on the
/// top edge and `m = (1−β, 1−β)` on the diagonal.
fn diagonal_split(a: f64, b: f64) -> [Point2; 5] {
    let d = Point2::new(1.0 - a, 1.0);
    let m = Point2::new(1.0 - b, 1.0 - b);
    let pc = (6.0 - a - 2.0 * b) / 6.0;
    let p = Point2::new(pc, pc);
    let den = 3.0 * a * b - 3.0;
    let q = Point2::new(
        -(a * a * b + a * (b - 3.0) * b + 1.0) / den,
        -(a * (b - 3.0) * b + 2.0) / den,
    );
    let r = Point2::new(q.y, q.x);
    [p, q, r, d, m]
}

/// Sites `p, q, r` and the cell-edge ends `d = (0, α)`, `m = (1/2, β)`.
fn bisector_split(a: f64, b: f64) -> [Point2; 5] {
    let d = Point2::new(0.0, a);
    let m = Point2::new(0.5, b);
    let p = Point2::new(0.5, (a * a + a * b + b * b - 3.0) / (3.0 * (a + b - 2.0)));
    let qy = (a * a + a * b + b * b) / (3.0 * (a + b));
    let q = Point2::new((a + 2.0 * b) / (6.0 * (a + b)), qy);
    let r = Point2::new((5.0 * a + 4.0 * b) / (6.0 * (a + b)), qy);
    [p, q, r, d, m]
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::RegularGon(k) => write!(f, "regular-gon({k})"),
            FamilyKind::CenterPlusGon(k) => write!(f, "center+gon({k})"),
            FamilyKind::AxisPair => f.write_str("axis-pair"),
            FamilyKind::DiagonalPair => f.write_str("diagonal-pair"),
            FamilyKind::DiagonalQuad => f.write_str("diagonal-quad"),
            FamilyKind::AxisQuad => f.write_str("axis-quad"),
            FamilyKind::CenterPlusAxisQuad => f.write_str("center+axis-quad"),
            FamilyKind::CenterPlusDiagonalQuad => f.write_str("center+diagonal-quad"),
            FamilyKind::DiagonalSplit => f.write_str("diagonal-split"),
            FamilyKind::BisectorSplit => f.write_str("bisector-split"),
        }
    }
}

/// A family together with the parameters that pick one member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricFamily {
    pub kind: FamilyKind,
    pub parameters: Vec<f64>,
}

/// Affine placement of the unit frame on a support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Frame {
    Disc { center: Point2, radius: f64 },
    Square { origin: Point2, e1: Point2, e2: Point2 },
}

impl Frame {
    /// Recognizes discs and square polygons; other supports have no frame.
    pub fn of(support: &Support) -> Option<Frame> {
        match support {
            Support::Disc(d) => Some(Frame::Disc {
                center: d.center,
                radius: d.radius,
            }),
            Support::Polygon(p) => {
                let v = p.vertices();
                if v.len() != 4 {
                    return None;
                }
                let (e1, e2) = (v[1] - v[0], v[3] - v[0]);
                let scale = e1.norm_sq();
                let square = (e2.norm_sq() - scale).abs() <= SHAPE_TOL * scale
                    && e1.dot(e2).abs() <= SHAPE_TOL * scale
                    && (v[2] - (v[0] + e1 + e2)).norm_sq() <= SHAPE_TOL * scale;
                square.then_some(Frame::Square { origin: v[0], e1, e2 })
            }
        }
    }

    pub fn shape(&self) -> FrameShape {
        match self {
            Frame::Disc { .. } => FrameShape::Disc,
            Frame::Square { .. } => FrameShape::Square,
        }
    }

    pub fn map(&self, u: Point2) -> Point2 {
        match *self {
            Frame::Disc { center, radius } => center + u * radius,
            Frame::Square { origin, e1, e2 } => origin + e1 * u.x + e2 * u.y,
        }
    }

    /// Length scale of the frame.
    pub fn scale(&self) -> f64 {
        match *self {
            Frame::Disc { radius, .. } => radius,
            Frame::Square { e1, .. } => e1.norm(),
        }
    }
}

impl SymmetricFamily {
    pub fn new(kind: FamilyKind, parameters: Vec<f64>) -> Result<Self> {
        if parameters.len() != kind.param_count() {
            return Err(Error::InvalidInput(format!(
                "{kind} takes {} parameter(s), got {}",
                kind.param_count(),
                parameters.len()
            )));
        }
        let (lo, hi) = kind.bounds();
        if parameters.iter().any(|p| !(*p > lo && *p < hi)) {
            return Err(Error::InvalidInput(format!(
                "{kind} parameters {parameters:?} outside ({lo}, {hi})"
            )));
        }
        if let FamilyKind::RegularGon(k) | FamilyKind::CenterPlusGon(k) = kind {
            if k < 2 {
                return Err(Error::InvalidInput(format!("{kind} needs at least two ring sites")));
            }
        }
        Ok(Self { kind, parameters })
    }

    pub fn configuration(&self, frame: &Frame) -> Result<Configuration> {
        Configuration::new(
            self.kind
                .unit_sites(&self.parameters)
                .into_iter()
                .map(|u| frame.map(u))
                .collect(),
        )
    }
}

fn frame_for(kind: FamilyKind, m: &UniformMeasure2D) -> Result<Frame> {
    let frame =
        Frame::of(m.support()).ok_or_else(|| Error::InvalidInput(format!("{kind} needs a disc or square support")))?;
    if frame.shape() != kind.shape() {
        return Err(Error::InvalidInput(format!(
            "{kind} does not fit a {:?} support",
            frame.shape()
        )));
    }
    Ok(frame)
}

/// Best member of a family on the measure's support.
///
/// One-parameter families are scanned, refined by golden section, then
/// polished by bisection on the derivative of the distortion. Two-parameter
/// families solve their equal-distance system by damped Newton from a 5×5
/// grid of starts, keeping roots that are centroidal.
pub fn solve_family(kind: FamilyKind, m: &UniformMeasure2D) -> Result<SolveReport<Configuration>> {
    let frame = frame_for(kind, m)?;
    let family = match kind.param_count() {
        1 => minimize_one(kind, &frame, m)?,
        _ => solve_two(kind, &frame, m)?,
    };
    let best = family.configuration(&frame)?;
    let value = evaluate(&best, m)?.total;
    Ok(SolveReport::new(best.sorted(), value, Method::Family(family)))
}

fn value_at(kind: FamilyKind, frame: &Frame, m: &UniformMeasure2D, t: f64) -> f64 {
    Configuration::new(kind.unit_sites(&[t]).into_iter().map(|u| frame.map(u)).collect())
        .and_then(|c| evaluate(&c, m))
        .map_or(f64::INFINITY, |e| e.total)
}

/// `dV/dt = Σ 2·mass_i·(s_i − c_i)·ds_i/dt`; every one-parameter family is
/// affine in `t`, so the site velocities are exact differences.
fn slope_at(kind: FamilyKind, frame: &Frame, m: &UniformMeasure2D, t: f64) -> Option<f64> {
    let sites: Vec<Point2> = kind.unit_sites(&[t]).into_iter().map(|u| frame.map(u)).collect();
    let ahead: Vec<Point2> = kind.unit_sites(&[t + 1.0]).into_iter().map(|u| frame.map(u)).collect();
    let eval = evaluate(&Configuration::new(sites.clone()).ok()?, m).ok()?;
    Some(
        eval.cells
            .iter()
            .zip(sites.iter().zip(&ahead))
            .map(|(c, (s, a))| 2.0 * c.mass * (*s - c.centroid).dot(*a - *s))
            .sum(),
    )
}

fn minimize_one(kind: FamilyKind, frame: &Frame, m: &UniformMeasure2D) -> Result<SymmetricFamily> {
    let (lo, hi) = kind.bounds();
    let scan = 64;
    let step = (hi - lo) / scan as f64;
    let grid: Vec<f64> = (1..scan).map(|i| lo + step * i as f64).collect();
    let (best_i, _) = grid
        .iter()
        .map(|&t| value_at(kind, frame, m, t))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    let (mut a, mut b) = (grid[best_i] - step, grid[best_i] + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (value_at(kind, frame, m, x1), value_at(kind, frame, m, x2));
    while b - a > 1e-9 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = value_at(kind, frame, m, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = value_at(kind, frame, m, x2);
        }
    }
    let mut t = 0.5 * (a + b);
    let width = 1e-5;
    let (mut l, mut r) = ((t - width).max(lo + 1e-12), (t + width).min(hi - 1e-12));
    if let (Some(sl), Some(sr)) = (slope_at(kind, frame, m, l), slope_at(kind, frame, m, r)) {
        if sl < 0.0 && sr > 0.0 {
            for _ in 0..200 {
                let mid = 0.5 * (l + r);
                if mid <= l || mid >= r {
                    break;
                }
                match slope_at(kind, frame, m, mid) {
                    Some(s) if s > 0.0 => r = mid,
                    Some(_) => l = mid,
                    None => break,
                }
            }
            t = 0.5 * (l + r);
        }
    }
    SymmetricFamily::new(kind, vec![t])
}

fn solve_two(kind: FamilyKind, frame: &Frame, m: &UniformMeasure2D) -> Result<SymmetricFamily> {
    let mut best: Option<(f64, SymmetricFamily)> = None;
    for i in 0..5 {
        for j in 0..5 {
            let start = [(i as f64 + 0.5) / 5.0, (j as f64 + 0.5) / 5.0];
            let Some([a, b]) = newton(kind, start) else {
                continue;
            };
            let Ok(family) = SymmetricFamily::new(kind, vec![a, b]) else {
                continue;
            };
            let Ok(config) = family.configuration(frame) else {
                continue;
            };
            let Ok(eval) = evaluate(&config, m) else {
                continue;
            };
            if eval.has_empty_cell() || eval.max_centroid_gap(config.sites()) > 1e-7 * frame.scale() {
                continue;
            }
            if best.as_ref().is_none_or(|(v, _)| eval.total < *v) {
                best = Some((eval.total, family));
            }
        }
    }
    best.map(|(_, f)| f)
        .ok_or_else(|| Error::NoRoot(format!("{kind}: no centroidal root from the start grid")))
}

fn newton(kind: FamilyKind, start: [f64; 2]) -> Option<[f64; 2]> {
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut x = start;
    let mut r = kind.residuals(x[0], x[1]);
    for _ in 0..100 {
        if norm(r) < 1e-14 {
            return Some(x);
        }
        let h = 1e-7;
        let ra = kind.residuals(x[0] + h, x[1]);
        let rb = kind.residuals(x[0], x[1] + h);
        let j = [
            [(ra[0] - r[0]) / h, (rb[0] - r[0]) / h],
            [(ra[1] - r[1]) / h, (rb[1] - r[1]) / h],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !det.is_finite() || det.abs() < 1e-300 {
            return None;
        }
        let dx = [
            (j[1][1] * r[0] - j[0][1] * r[1]) / det,
            (j[0][0] * r[1] - j[1][0] * r[0]) / det,
        ];
        let mut lambda = 1.0;
        loop {
            let cand = [x[0] - lambda * dx[0], x[1] - lambda * dx[1]];
            let rc = kind.residuals(cand[0], cand[1]);
            if rc.iter().all(|v| v.is_finite()) && norm(rc) < norm(r) {
                x = cand;
                r = rc;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                return (norm(r) < 1e-12).then_some(x);
            }
        }
    }
    (norm(r) < 1e-12).then_some(x)
}
