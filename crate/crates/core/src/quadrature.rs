//! Slice-based adaptive quadrature used to cross-check the closed-form paths.
//!
//! A convex region is described by half-planes and an optional disc, so the
//! vertical slice at any `x` is a single interval. Inner integrals over `y`
//! are taken analytically; the outer integral over `x` is adaptive Simpson.

use crate::geometry::{Cell, Disc, HalfPlane, MomentTriple, Point2};

const MAX_DEPTH: u32 = 60;

/// Adaptive Simpson quadrature of a vector-valued integrand.
pub fn adaptive_simpson<const N: usize, F>(f: &F, a: f64, b: f64, tol: f64) -> [f64; N]
where
    F: Fn(f64) -> [f64; N],
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, &fa, &fm, &fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson<const N: usize>(a: f64, b: f64, fa: &[f64; N], fm: &[f64; N], fb: &[f64; N]) -> [f64; N] {
    let h = (b - a) / 6.0;
    std::array::from_fn(|i| h * (fa[i] + 4.0 * fm[i] + fb[i]))
}

#[allow(clippy::too_many_arguments)]
fn recurse<const N: usize, F>(
    f: &F,
    a: f64,
    b: f64,
    fa: [f64; N],
    fm: [f64; N],
    fb: [f64; N],
    whole: [f64; N],
    tol: f64,
    depth: u32,
) -> [f64; N]
where
    F: Fn(f64) -> [f64; N],
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, &fa, &flm, &fm);
    let right = simpson(m, b, &fm, &frm, &fb);
    let err = (0..N)
        .map(|i| (left[i] + right[i] - whole[i]).abs())
        .fold(0.0, f64::max);
    if depth == 0 || err <= 15.0 * tol || (b - a) < 1e-15 {
        return std::array::from_fn(|i| left[i] + right[i] + (left[i] + right[i] - whole[i]) / 15.0);
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    std::array::from_fn(|i| l[i] + r[i])
}

/// A convex region given by constraints, for slicing.
#[derive(Clone, Debug)]
pub struct SlicedRegion {
    planes: Vec<HalfPlane>,
    disc: Option<Disc>,
}

impl SlicedRegion {
    pub fn new(planes: Vec<HalfPlane>, disc: Option<Disc>) -> Self {
        Self { planes, disc }
    }

    pub fn from_cell(cell: &Cell) -> Self {
        Self::new(cell.half_planes(), cell.disc())
    }

    /// The `y`-interval of the region on the vertical line at `x`.
    pub fn slice(&self, x: f64) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        if let Some(d) = self.disc {
            let dx = x - d.center.x;
            let h2 = d.radius * d.radius - dx * dx;
            if h2 < 0.0 {
                return None;
            }
            let h = h2.sqrt();
            lo = d.center.y - h;
            hi = d.center.y + h;
        }
        for p in &self.planes {
            let n = p.normal();
            let rest = p.offset() - n.x * x;
            if n.y.abs() < 1e-300 {
                if rest < 0.0 {
                    return None;
                }
            } else if n.y > 0.0 {
                hi = hi.min(rest / n.y);
            } else {
                lo = lo.max(rest / n.y);
            }
        }
        (hi > lo && lo.is_finite() && hi.is_finite()).then_some((lo, hi))
    }

    /// Horizontal extent, located by scanning `[xmin, xmax]` and bisecting to the edges.
    pub fn extent(&self, xmin: f64, xmax: f64) -> Option<(f64, f64)> {
        let scan = 4096;
        let step = (xmax - xmin) / scan as f64;
        let inside: Vec<f64> = (0..=scan)
            .map(|i| xmin + step * i as f64)
            .filter(|&x| self.slice(x).is_some())
            .collect();
        let (&first, &last) = (inside.first()?, inside.last()?);
        let feasible = |x: f64| self.slice(x).is_some();
        let edge = |mut good: f64, mut bad: f64| {
            for _ in 0..200 {
                let mid = 0.5 * (good + bad);
                if mid == good || mid == bad {
                    break;
                }
                if feasible(mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        };
        let left = if first > xmin { edge(first, first - step) } else { xmin };
        let right = if last < xmax { edge(last, last + step) } else { xmax };
        Some((left, right))
    }
}

/// Quadrature estimate of a cell's moments about `reference`.
pub fn cell_moments(cell: &Cell, reference: Point2, tol: f64) -> MomentTriple {
    let region = SlicedRegion::from_cell(cell);
    let (lo, hi) = bounding_x(cell);
    let Some((a, b)) = region.extent(lo, hi) else {
        return MomentTriple::zero(reference);
    };
    let f = |x: f64| -> [f64; 4] {
        let Some((y0, y1)) = region.slice(x) else {
            return [0.0; 4];
        };
        let dx = x - reference.x;
        let (u0, u1) = (y0 - reference.y, y1 - reference.y);
        let len = u1 - u0;
        [
            len,
            dx * len,
            0.5 * (u1 * u1 - u0 * u0),
            dx * dx * len + (u1 * u1 * u1 - u0 * u0 * u0) / 3.0,
        ]
    };
    let [m0, mx, my, m2] = adaptive_simpson(&f, a, b, tol);
    MomentTriple {
        measure0: m0,
        measure1: Point2::new(mx, my),
        measure2: m2,
        reference,
    }
}

fn bounding_x(cell: &Cell) -> (f64, f64) {
    match cell {
        Cell::Disc(d) => (d.disc.center.x - d.disc.radius, d.disc.center.x + d.disc.radius),
        Cell::Polygon(p) => {
            let (lo, hi) = p.bounding_box();
            (lo.x, hi.x)
        }
    }
}

/// `∫_{y0}^{y1} min_i ‖(x, y) − s_i‖² dy`, using the lower envelope of the
/// per-site parabolas, which differ only by linear terms in `y`.
pub fn slice_min_distance(x: f64, y0: f64, y1: f64, sites: &[Point2]) -> f64 {
    let c: Vec<f64> = sites.iter().map(|s| s.y * s.y + (x - s.x) * (x - s.x)).collect();
    let mut cuts = vec![y0, y1];
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            let dy = sites[j].y - sites[i].y;
            if dy != 0.0 {
                let y = (c[j] - c[i]) / (2.0 * dy);
                if y > y0 && y < y1 {
                    cuts.push(y);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let best = (0..sites.len())
            .min_by(|&i, &j| {
                let vi = c[i] - 2.0 * sites[i].y * mid;
                let vj = c[j] - 2.0 * sites[j].y * mid;
                vi.total_cmp(&vj)
            })
            .expect("at least one site");
        let s = sites[best];
        let dx2 = (x - s.x) * (x - s.x);
        total += dx2 * (b - a) + ((b - s.y).powi(3) - (a - s.y).powi(3)) / 3.0;
    }
    total
}
