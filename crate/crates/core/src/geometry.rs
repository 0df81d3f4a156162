//! Exact geometry of supports and clipped Voronoi cells.
//!
//! Cells are either convex polygons or a disc intersected with a list of
//! half-planes. Area, first moment and second moment are computed in closed
//! form: polygons by a triangle fan about the reference point, disc cells by a
//! fan about the disc center in which every edge contributes a triangle where
//! it runs inside the circle and a circular sector where it runs outside.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two points closer than this are considered coincident.
pub const COINCIDENCE_TOL: f64 = 1e-12;
/// Regions with smaller area are empty.
pub const EMPTY_AREA_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Rotation about the origin.
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn rotated_about(self, pivot: Point2, angle: f64) -> Self {
        (self - pivot).rotated(angle) + pivot
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, other: Point2, t: f64) -> Self {
        self + (other - self) * t
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, rhs: Point2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Point2 {
    type Output = Point2;
    fn div(self, rhs: f64) -> Point2 {
        Point2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// The closed half-plane `{p : normal · p <= offset}` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    normal: Point2,
    offset: f64,
}

impl HalfPlane {
    /// Builds `{p : normal · p <= offset}`, rescaling so the normal has unit length.
    pub fn new(normal: Point2, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len > 0.0) || !len.is_finite() || !offset.is_finite() {
            return Err(Error::InvalidInput(format!(
                "half-plane normal must be finite and nonzero, got {normal:?}"
            )));
        }
        Ok(Self {
            normal: normal / len,
            offset: offset / len,
        })
    }

    /// Points at least as close to `keep` as to `other`.
    pub fn bisector(keep: Point2, other: Point2) -> Result<Self> {
        let d = other - keep;
        if d.norm() <= COINCIDENCE_TOL {
            return Err(Error::InvalidInput("bisector of coincident points".into()));
        }
        Self::new(d, 0.5 * (other.norm_sq() - keep.norm_sq()))
    }

    pub fn normal(&self) -> Point2 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Positive outside, negative inside.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.signed_distance(p) <= 0.0
    }

    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            normal: self.normal.rotated(angle),
            offset: self.offset,
        }
    }

    pub fn translated(&self, by: Point2) -> Self {
        Self {
            normal: self.normal,
            offset: self.offset + self.normal.dot(by),
        }
    }
}

/// Area, first moment and second moment of a region about `reference`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTriple {
    /// Area.
    pub measure0: f64,
    /// `∫ (x - reference) dA`.
    pub measure1: Point2,
    /// `∫ ‖x - reference‖² dA`.
    pub measure2: f64,
    pub reference: Point2,
}

impl MomentTriple {
    pub fn zero(reference: Point2) -> Self {
        Self {
            measure0: 0.0,
            measure1: Point2::ORIGIN,
            measure2: 0.0,
            reference,
        }
    }

    /// Re-expresses the moments about another reference point.
    pub fn shifted(&self, to: Point2) -> Self {
        let d = self.reference - to;
        Self {
            measure0: self.measure0,
            measure1: self.measure1 + d * self.measure0,
            measure2: self.measure2 + 2.0 * d.dot(self.measure1) + self.measure0 * d.norm_sq(),
            reference: to,
        }
    }

    pub fn centroid(&self) -> Option<Point2> {
        (self.measure0 > EMPTY_AREA_TOL).then(|| self.reference + self.measure1 / self.measure0)
    }

    /// Second moment about the centroid.
    pub fn central_second(&self) -> f64 {
        match self.centroid() {
            Some(c) => self.shifted(c).measure2.max(0.0),
            None => 0.0,
        }
    }

    fn accumulate(&mut self, area: f64, first: Point2, second: f64) {
        self.measure0 += area;
        self.measure1 += first;
        self.measure2 += second;
    }
}

impl Add for MomentTriple {
    type Output = MomentTriple;
    fn add(self, rhs: MomentTriple) -> MomentTriple {
        let rhs = rhs.shifted(self.reference);
        MomentTriple {
            measure0: self.measure0 + rhs.measure0,
            measure1: self.measure1 + rhs.measure1,
            measure2: self.measure2 + rhs.measure2,
            reference: self.reference,
        }
    }
}

/// Moments of the triangle `(0, a, b)` about the origin, signed by orientation.
fn origin_triangle(a: Point2, b: Point2) -> (f64, Point2, f64) {
    let area = 0.5 * a.cross(b);
    let first = (a + b) * (area / 3.0);
    let second = area * (a.norm_sq() + b.norm_sq() + a.dot(b)) / 6.0;
    (area, first, second)
}

/// Moments of the circular sector of radius `r` about its apex, swept from
/// angle `theta` by the signed amount `sweep`.
fn origin_sector(r: f64, theta: f64, sweep: f64) -> (f64, Point2, f64) {
    let end = theta + sweep;
    let r2 = r * r;
    let area = 0.5 * r2 * sweep;
    let first = Point2::new(end.sin() - theta.sin(), theta.cos() - end.cos()) * (r2 * r / 3.0);
    let second = 0.25 * r2 * r2 * sweep;
    (area, first, second)
}

fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum::<f64>() * 0.5
}

/// A convex polygon with counterclockwise vertices.
///
/// Polygons produced by clipping may be empty (fewer than three vertices or
/// zero area); [`ConvexPolygon::is_empty`] reports that case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Validates convexity and normalizes the orientation to counterclockwise.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidPolygon(format!("non-finite vertex {p:?}")));
        }
        let area = signed_area(&vertices);
        if area.abs() <= EMPTY_AREA_TOL {
            return Err(Error::InvalidPolygon("zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).norm() <= COINCIDENCE_TOL {
                return Err(Error::InvalidPolygon(format!("repeated vertex {b:?}")));
            }
            let turn = (b - a).cross(c - b);
            if turn < -COINCIDENCE_TOL {
                return Err(Error::InvalidPolygon(format!("reflex vertex at {b:?}")));
            }
        }
        Ok(Self { vertices })
    }

    pub fn unit_square() -> Self {
        Self::rectangle(Point2::ORIGIN, Point2::new(1.0, 1.0))
    }

    pub fn rectangle(min: Point2, max: Point2) -> Self {
        Self {
            vertices: vec![min, Point2::new(max.x, min.y), max, Point2::new(min.x, max.y)],
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        if self.vertices.len() < 3 {
            0.0
        } else {
            signed_area(&self.vertices).max(0.0)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.area() < EMPTY_AREA_TOL
    }

    /// Edges as half-planes, one per edge, normals pointing outward.
    pub fn half_planes(&self) -> Vec<HalfPlane> {
        let n = self.vertices.len();
        (0..n)
            .filter_map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let e = b - a;
                HalfPlane::new(Point2::new(e.y, -e.x), Point2::new(e.y, -e.x).dot(a)).ok()
            })
            .collect()
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.half_planes()
            .iter()
            .all(|h| h.signed_distance(p) <= COINCIDENCE_TOL)
    }

    /// Single-plane Sutherland–Hodgman pass. Vertices on the line are kept.
    pub fn clip(&self, h: &HalfPlane) -> Self {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        if n == 0 {
            return Self { vertices: out };
        }
        for i in 0..n {
            let cur = self.vertices[i];
            let next = self.vertices[(i + 1) % n];
            let dc = h.signed_distance(cur);
            let dn = h.signed_distance(next);
            if dc <= 0.0 {
                push_distinct(&mut out, cur);
            }
            if (dc <= 0.0) != (dn <= 0.0) {
                let t = dc / (dc - dn);
                push_distinct(&mut out, cur.lerp(next, t));
            }
        }
        if out.len() > 1 && out[0].dist(out[out.len() - 1]) <= COINCIDENCE_TOL * 1e-3 {
            out.pop();
        }
        Self { vertices: out }
    }

    /// Closed-form moments by a triangle fan about `reference`.
    pub fn moments(&self, reference: Point2) -> Result<MomentTriple> {
        if self.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let mut m = MomentTriple::zero(reference);
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i] - reference;
            let b = self.vertices[(i + 1) % n] - reference;
            let (area, first, second) = origin_triangle(a, b);
            m.accumulate(area, first, second);
        }
        Ok(m)
    }

    pub fn centroid(&self) -> Option<Point2> {
        let reference = *self.vertices.first()?;
        self.moments(reference).ok()?.centroid()
    }

    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(a.dist(*b));
            }
        }
        best
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = Point2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    pub fn rotated_about(&self, pivot: Point2, angle: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v.rotated_about(pivot, angle)).collect(),
        }
    }

    pub fn translated(&self, by: Point2) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| *v + by).collect(),
        }
    }
}

fn push_distinct(out: &mut Vec<Point2>, p: Point2) {
    if out.last().is_none_or(|q| q.dist(p) > COINCIDENCE_TOL * 1e-3) {
        out.push(p);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Point2,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Point2, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.is_finite() {
            return Err(Error::InvalidInput(format!("invalid disc radius {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn unit() -> Self {
        Self {
            center: Point2::ORIGIN,
            radius: 1.0,
        }
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn contains(&self, p: Point2) -> bool {
        (p - self.center).norm() <= self.radius + COINCIDENCE_TOL
    }
}

/// One piece of a cell boundary, traversed counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryPiece {
    Segment {
        from: Point2,
        to: Point2,
    },
    /// Counterclockwise arc of the circle `(center, radius)`.
    Arc {
        from: Point2,
        to: Point2,
        center: Point2,
        radius: f64,
        sweep: f64,
    },
}

/// A disc intersected with a set of half-planes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscCell {
    pub disc: Disc,
    pub cuts: Vec<HalfPlane>,
}

impl DiscCell {
    pub fn new(disc: Disc) -> Self {
        Self { disc, cuts: Vec::new() }
    }

    pub fn clip(&self, h: &HalfPlane) -> Self {
        let mut cuts = self.cuts.clone();
        cuts.push(*h);
        Self { disc: self.disc, cuts }
    }

    /// The cuts applied to a square circumscribing the disc, in coordinates
    /// relative to the disc center.
    fn core(&self) -> ConvexPolygon {
        let r = 2.0 * self.disc.radius;
        let mut poly = ConvexPolygon::rectangle(Point2::new(-r, -r), Point2::new(r, r));
        for h in &self.cuts {
            poly = poly.clip(&h.translated(-self.disc.center));
            if poly.vertices.len() < 3 {
                break;
            }
        }
        poly
    }

    /// Walks the core polygon edges, splitting each at its circle crossings.
    /// Pieces inside the circle stay segments; pieces outside become arcs.
    /// Coordinates are relative to the disc center.
    fn walk<F: FnMut(Point2, Point2, bool)>(&self, mut visit: F) {
        let core = self.core();
        let r = self.disc.radius;
        let r2 = r * r;
        let n = core.vertices.len();
        if n < 3 {
            return;
        }
        for i in 0..n {
            let p = core.vertices[i];
            let q = core.vertices[(i + 1) % n];
            let d = q - p;
            let a = d.norm_sq();
            if a == 0.0 {
                continue;
            }
            let b = p.dot(d);
            let c = p.norm_sq() - r2;
            let disc = b * b - a * c;
            let mut ts = [0.0, 1.0, 1.0, 1.0];
            let mut len = 1;
            if disc > 0.0 {
                let s = disc.sqrt();
                for t in [(-b - s) / a, (-b + s) / a] {
                    if t > 0.0 && t < 1.0 {
                        ts[len] = t;
                        len += 1;
                    }
                }
            }
            ts[len] = 1.0;
            for k in 0..len {
                let (t0, t1) = (ts[k], ts[k + 1]);
                if t1 <= t0 {
                    continue;
                }
                let s = p + d * t0;
                let e = p + d * t1;
                let mid = p + d * (0.5 * (t0 + t1));
                visit(s, e, mid.norm_sq() < r2);
            }
        }
    }

    /// Closed-form moments: polar antiderivatives about the disc center,
    /// shifted to `reference`.
    pub fn moments(&self, reference: Point2) -> Result<MomentTriple> {
        let r = self.disc.radius;
        let mut m = MomentTriple::zero(self.disc.center);
        self.walk(|s, e, inside| {
            let (area, first, second) = if inside {
                origin_triangle(s, e)
            } else {
                let sweep = s.cross(e).atan2(s.dot(e));
                origin_sector(r, s.y.atan2(s.x), sweep)
            };
            m.accumulate(area, first, second);
        });
        if m.measure0 < EMPTY_AREA_TOL {
            return Err(Error::EmptyRegion);
        }
        Ok(m.shifted(reference))
    }

    pub fn area(&self) -> f64 {
        self.moments(self.disc.center).map_or(0.0, |m| m.measure0)
    }

    pub fn is_empty(&self) -> bool {
        self.area() < EMPTY_AREA_TOL
    }

    /// Boundary as segments and arcs in absolute coordinates.
    pub fn boundary(&self) -> Vec<BoundaryPiece> {
        let c = self.disc.center;
        let radius = self.disc.radius;
        let mut pieces = Vec::new();
        self.walk(|s, e, inside| {
            if inside {
                pieces.push(BoundaryPiece::Segment { from: s + c, to: e + c });
            } else {
                let sweep = s.cross(e).atan2(s.dot(e));
                let from = Point2::polar(radius, s.y.atan2(s.x));
                let to = Point2::polar(radius, e.y.atan2(e.x));
                pieces.push(BoundaryPiece::Arc {
                    from: from + c,
                    to: to + c,
                    center: c,
                    radius,
                    sweep,
                });
            }
        });
        pieces
    }
}

/// A bounded support carrying a uniform distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Support {
    Disc(Disc),
    Polygon(ConvexPolygon),
}

impl Support {
    pub fn to_cell(&self) -> Cell {
        match self {
            Support::Disc(d) => Cell::Disc(DiscCell::new(*d)),
            Support::Polygon(p) => Cell::Polygon(p.clone()),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Support::Disc(d) => d.area(),
            Support::Polygon(p) => p.area(),
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        match self {
            Support::Disc(d) => d.contains(p),
            Support::Polygon(poly) => poly.contains(p),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Support::Disc(d) => 2.0 * d.radius,
            Support::Polygon(p) => p.diameter(),
        }
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        match self {
            Support::Disc(d) => (
                d.center - Point2::new(d.radius, d.radius),
                d.center + Point2::new(d.radius, d.radius),
            ),
            Support::Polygon(p) => p.bounding_box(),
        }
    }

    pub fn moments(&self, reference: Point2) -> Result<MomentTriple> {
        self.to_cell().moments(reference)
    }

    pub fn centroid(&self) -> Point2 {
        match self {
            Support::Disc(d) => d.center,
            Support::Polygon(p) => p.centroid().unwrap_or_default(),
        }
    }

    pub fn translated(&self, by: Point2) -> Self {
        match self {
            Support::Disc(d) => Support::Disc(Disc {
                center: d.center + by,
                radius: d.radius,
            }),
            Support::Polygon(p) => Support::Polygon(p.translated(by)),
        }
    }

    /// Half-planes bounding the support; for a disc these are only its cuts (none).
    pub fn half_planes(&self) -> Vec<HalfPlane> {
        match self {
            Support::Disc(_) => Vec::new(),
            Support::Polygon(p) => p.half_planes(),
        }
    }

    pub fn disc(&self) -> Option<Disc> {
        match self {
            Support::Disc(d) => Some(*d),
            Support::Polygon(_) => None,
        }
    }
}

/// A Voronoi cell clipped to its support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Polygon(ConvexPolygon),
    Disc(DiscCell),
}

impl Cell {
    pub fn clip(&self, h: &HalfPlane) -> Cell {
        match self {
            Cell::Polygon(p) => Cell::Polygon(p.clip(h)),
            Cell::Disc(d) => Cell::Disc(d.clip(h)),
        }
    }

    pub fn moments(&self, reference: Point2) -> Result<MomentTriple> {
        match self {
            Cell::Polygon(p) => p.moments(reference),
            Cell::Disc(d) => d.moments(reference),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Cell::Polygon(p) => p.area(),
            Cell::Disc(d) => d.area(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.area() < EMPTY_AREA_TOL
    }

    /// Every bounding half-plane; polygon edges or disc cuts.
    pub fn half_planes(&self) -> Vec<HalfPlane> {
        match self {
            Cell::Polygon(p) => p.half_planes(),
            Cell::Disc(d) => d.cuts.clone(),
        }
    }

    pub fn disc(&self) -> Option<Disc> {
        match self {
            Cell::Polygon(_) => None,
            Cell::Disc(d) => Some(d.disc),
        }
    }

    pub fn boundary(&self) -> Vec<BoundaryPiece> {
        match self {
            Cell::Polygon(p) => {
                let n = p.vertices.len();
                if n < 3 {
                    return Vec::new();
                }
                (0..n)
                    .map(|i| BoundaryPiece::Segment {
                        from: p.vertices[i],
                        to: p.vertices[(i + 1) % n],
                    })
                    .collect()
            }
            Cell::Disc(d) => d.boundary(),
        }
    }
}

/// Fails with `DuplicateSites` if two sites are within [`COINCIDENCE_TOL`].
pub fn check_distinct(sites: &[Point2]) -> Result<()> {
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            if sites[i].dist(sites[j]) <= COINCIDENCE_TOL {
                return Err(Error::DuplicateSites { first: i, second: j });
            }
        }
    }
    Ok(())
}

/// Voronoi cells of `sites` clipped to `support`, by pairwise bisector clipping.
pub fn voronoi_cells(sites: &[Point2], support: &Support) -> Result<Vec<Cell>> {
    if sites.is_empty() {
        return Err(Error::InvalidInput("at least one site is required".into()));
    }
    check_distinct(sites)?;
    let base = support.to_cell();
    let cells = sites
        .iter()
        .enumerate()
        .map(|(i, &site)| {
            let mut cell = base.clone();
            for (j, &other) in sites.iter().enumerate() {
                if i == j {
                    continue;
                }
                let h = HalfPlane::bisector(site, other).expect("sites checked distinct");
                cell = cell.clip(&h);
                if let Cell::Polygon(p) = &cell {
                    if p.vertices.len() < 3 {
                        break;
                    }
                }
            }
            cell
        })
        .collect();
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hp(nx: f64, ny: f64, c: f64) -> HalfPlane {
        HalfPlane::new(Point2::new(nx, ny), c).unwrap()
    }

    #[test]
    fn square_clipped_to_left_half() {
        let sq = ConvexPolygon::unit_square();
        let half = sq.clip(&hp(1.0, 0.0, 0.5));
        assert_relative_eq!(half.area(), 0.5, epsilon = 1e-15);
        let (lo, hi) = half.bounding_box();
        assert_eq!(lo, Point2::new(0.0, 0.0));
        assert_eq!(hi, Point2::new(0.5, 1.0));
    }

    #[test]
    fn disc_clipped_to_left_half() {
        let cell = DiscCell::new(Disc::unit()).clip(&hp(1.0, 0.0, 0.0));
        assert_relative_eq!(cell.area(), PI / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn triangle_clipped_by_disjoint_plane_is_empty() {
        let tri = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let out = tri.clip(&hp(1.0, 0.0, -1.0));
        assert!(out.is_empty());
        assert!(matches!(out.moments(Point2::ORIGIN), Err(Error::EmptyRegion)));
    }

    #[test]
    fn square_moments_about_center() {
        let m = ConvexPolygon::unit_square().moments(Point2::new(0.5, 0.5)).unwrap();
        assert_relative_eq!(m.measure0, 1.0, epsilon = 1e-15);
        assert!(m.measure1.norm() < 1e-15);
        assert_relative_eq!(m.measure2, 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn disc_moments_about_center() {
        let m = DiscCell::new(Disc::unit()).moments(Point2::ORIGIN).unwrap();
        assert_relative_eq!(m.measure0, PI, epsilon = 1e-14);
        assert!(m.measure1.norm() < 1e-14);
        assert_relative_eq!(m.measure2, PI / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn sector_centroid_from_cuts() {
        // sector 0..2π/3 as the disc cut by two lines through the origin
        let t2 = 2.0 * PI / 3.0;
        let cell = DiscCell::new(Disc::unit())
            .clip(&hp(0.0, -1.0, 0.0))
            .clip(&hp(-t2.sin(), t2.cos(), 0.0));
        let m = cell.moments(Point2::ORIGIN).unwrap();
        assert_relative_eq!(m.measure0, PI / 3.0, epsilon = 1e-14);
        let g = m.centroid().unwrap();
        assert_relative_eq!(g.x, 3f64.sqrt() / (2.0 * PI), epsilon = 1e-14);
        assert_relative_eq!(g.y, 3.0 / (2.0 * PI), epsilon = 1e-14);
    }

    #[test]
    fn triangle_second_moment_about_centroid() {
        // For a triangle, ∫‖x − g‖² = A (a² + b² + c²) / 36 with side lengths a, b, c.
        let tri = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let g = Point2::new(1.0 / 3.0, 1.0 / 3.0);
        let m = tri.moments(g).unwrap();
        let expected = 0.5 * (1.0 + 1.0 + 2.0) / 36.0;
        assert_relative_eq!(m.measure2, expected, epsilon = 1e-15);
        // midpoint-rule check on a 2000×2000 grid
        let k = 2000;
        let h = 1.0 / k as f64;
        let mut acc = 0.0;
        for i in 0..k {
            for j in 0..k {
                let p = Point2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                if p.x + p.y < 1.0 {
                    acc += (p - g).norm_sq() * h * h;
                }
            }
        }
        assert!((acc - expected).abs() < 1e-4);
    }

    #[test]
    fn clockwise_input_is_normalized() {
        let p = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(signed_area(p.vertices()) > 0.0);
    }

    #[test]
    fn reflex_polygon_rejected() {
        let r = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 0.2),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ]);
        assert!(matches!(r, Err(Error::InvalidPolygon(_))));
    }

    #[test]
    fn two_sites_split_square() {
        let cells = voronoi_cells(
            &[Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)],
            &Support::Polygon(ConvexPolygon::unit_square()),
        )
        .unwrap();
        for c in &cells {
            assert_relative_eq!(c.area(), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_sites_split_disc_into_halves() {
        let a = 4.0 / (3.0 * PI);
        let cells = voronoi_cells(
            &[Point2::new(a, 0.0), Point2::new(-a, 0.0)],
            &Support::Disc(Disc::unit()),
        )
        .unwrap();
        for c in &cells {
            assert_relative_eq!(c.area(), PI / 2.0, epsilon = 1e-14);
        }
        let g = cells[0].moments(Point2::ORIGIN).unwrap().centroid().unwrap();
        assert_relative_eq!(g.x, a, epsilon = 1e-14);
    }

    #[test]
    fn single_site_gets_whole_support() {
        let cells = voronoi_cells(&[Point2::new(3.0, -2.0)], &Support::Disc(Disc::unit())).unwrap();
        assert_relative_eq!(cells[0].area(), PI, epsilon = 1e-14);
    }

    #[test]
    fn duplicate_sites_rejected() {
        let r = voronoi_cells(
            &[Point2::new(0.1, 0.1), Point2::new(0.1, 0.1 + 1e-13)],
            &Support::Disc(Disc::unit()),
        );
        assert!(matches!(r, Err(Error::DuplicateSites { first: 0, second: 1 })));
    }

    #[test]
    fn tangent_cut_keeps_full_disc() {
        let full = DiscCell::new(Disc::unit()).clip(&hp(1.0, 0.0, 1.0));
        assert_relative_eq!(full.area(), PI, epsilon = 1e-14);
        let gone = DiscCell::new(Disc::unit()).clip(&hp(1.0, 0.0, -1.0));
        assert!(gone.is_empty());
    }

    #[test]
    fn shift_identity_on_disc_cell() {
        let cell = DiscCell::new(Disc::new(Point2::new(0.3, -0.2), 1.5).unwrap())
            .clip(&hp(1.0, 2.0, 0.4))
            .clip(&hp(-1.0, 0.3, 0.5));
        let p = Point2::new(0.7, 0.1);
        let q = Point2::new(-0.4, 0.9);
        let mp = cell.moments(p).unwrap();
        let mq = cell.moments(q).unwrap();
        let rhs = mq.measure2 + 2.0 * (q - p).dot(mq.measure1) + mq.measure0 * (q - p).norm_sq();
        assert_relative_eq!(mp.measure2, rhs, max_relative = 1e-12);
    }

    #[test]
    fn boundary_closes() {
        let cell = Cell::Disc(DiscCell::new(Disc::unit()).clip(&hp(1.0, 1.0, 0.3)));
        let b = cell.boundary();
        let ends: Vec<(Point2, Point2)> = b
            .iter()
            .map(|p| match *p {
                BoundaryPiece::Segment { from, to } => (from, to),
                BoundaryPiece::Arc { from, to, .. } => (from, to),
            })
            .collect();
        for i in 0..ends.len() {
            let next = ends[(i + 1) % ends.len()].0;
            assert!(ends[i].1.dist(next) < 1e-12);
        }
    }
}
