//! Uniform distributions on 2D supports and piecewise-constant densities on an interval.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Disc, Point2, Support};

/// Tolerance on total mass when validating a density.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary2D {
    pub mean: Point2,
    /// Expected squared distance to the mean.
    pub variance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary1D {
    pub mean: f64,
    pub variance: f64,
}

/// Uniform probability on a disc or convex polygon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformMeasure2D {
    support: Support,
    density: f64,
}

impl UniformMeasure2D {
    pub fn new(support: Support) -> Result<Self> {
        let area = support.area();
        if !(area > 0.0) {
            return Err(Error::InvalidMeasure("support has zero area".into()));
        }
        Ok(Self {
            support,
            density: 1.0 / area,
        })
    }

    /// Rejects a density that does not integrate to one.
    pub fn with_density(support: Support, density: f64) -> Result<Self> {
        let mass = density * support.area();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "density {density} integrates to {mass}, not 1"
            )));
        }
        Ok(Self { support, density })
    }

    pub fn unit_disc() -> Self {
        Self::new(Support::Disc(Disc::unit())).expect("unit disc has positive area")
    }

    pub fn unit_square() -> Self {
        Self::new(Support::Polygon(crate::geometry::ConvexPolygon::unit_square()))
            .expect("unit square has positive area")
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn summarize(&self) -> Summary2D {
        let c = self.support.centroid();
        let m = self.support.moments(c).expect("validated support has positive area");
        let mean = m.centroid().unwrap_or(c);
        Summary2D {
            mean,
            variance: self.density * m.shifted(mean).measure2,
        }
    }

    /// Draws a point uniformly from the support.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2 {
        match &self.support {
            Support::Disc(d) => {
                let r = d.radius * rng.gen::<f64>().sqrt();
                let t = rng.gen::<f64>() * std::f64::consts::TAU;
                d.center + Point2::polar(r, t)
            }
            Support::Polygon(p) => {
                let (lo, hi) = p.bounding_box();
                loop {
                    let q = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
                    if p.contains(q) {
                        return q;
                    }
                }
            }
        }
    }

    pub fn translated(&self, by: Point2) -> Self {
        Self {
            support: self.support.translated(by),
            density: self.density,
        }
    }
}

/// Mass, first and second moment of a 1D measure restricted to an interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments1D {
    pub mass: f64,
    /// `∫ (x - reference) dP`.
    pub first: f64,
    /// `∫ (x - reference)² dP`.
    pub second: f64,
    pub reference: f64,
}

impl Moments1D {
    pub fn zero(reference: f64) -> Self {
        Self {
            mass: 0.0,
            first: 0.0,
            second: 0.0,
            reference,
        }
    }

    pub fn shifted(&self, to: f64) -> Self {
        let d = self.reference - to;
        Self {
            mass: self.mass,
            first: self.first + d * self.mass,
            second: self.second + 2.0 * d * self.first + self.mass * d * d,
            reference: to,
        }
    }

    pub fn centroid(&self) -> Option<f64> {
        (self.mass > 0.0).then(|| self.reference + self.first / self.mass)
    }
}

/// A probability density that is constant on each `[b_i, b_{i+1})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant1D {
    breakpoints: Vec<f64>,
    heights: Vec<f64>,
}

impl PiecewiseConstant1D {
    pub fn new(breakpoints: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || heights.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} breakpoints need {} heights, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                heights.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMeasure("breakpoints must be strictly increasing".into()));
        }
        if heights.iter().any(|h| !(*h >= 0.0) || !h.is_finite()) {
            return Err(Error::InvalidMeasure("heights must be finite and >= 0".into()));
        }
        let mass: f64 = heights
            .iter()
            .zip(breakpoints.windows(2))
            .map(|(h, w)| h * (w[1] - w[0]))
            .sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("density integrates to {mass}, not 1")));
        }
        Ok(Self { breakpoints, heights })
    }

    /// 2/5 on [0, 1/2) and 8/5 on [1/2, 1].
    pub fn two_step() -> Self {
        Self::new(vec![0.0, 0.5, 1.0], vec![0.4, 1.6]).expect("two-step density is normalized")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn pieces(&self) -> usize {
        self.heights.len()
    }

    pub fn lower(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn upper(&self) -> f64 {
        *self.breakpoints.last().expect("at least two breakpoints")
    }

    /// Density value; pieces are closed on the left, the last piece also on the right.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.lower() || x > self.upper() {
            return 0.0;
        }
        let i = self.breakpoints[1..].partition_point(|&b| b <= x);
        self.heights[i.min(self.heights.len() - 1)]
    }

    /// Exact moments of the measure restricted to `[lo, hi]` about `reference`.
    pub fn segment_moments(&self, lo: f64, hi: f64, reference: f64) -> Moments1D {
        let mut m = Moments1D::zero(reference);
        if !(hi > lo) {
            return m;
        }
        for (h, w) in self.heights.iter().zip(self.breakpoints.windows(2)) {
            let a = lo.max(w[0]) - reference;
            let b = hi.min(w[1]) - reference;
            if b <= a || *h == 0.0 {
                continue;
            }
            m.mass += h * (b - a);
            m.first += h * (b * b - a * a) / 2.0;
            m.second += h * (b * b * b - a * a * a) / 3.0;
        }
        m
    }

    pub fn summarize(&self) -> Summary1D {
        let m = self.segment_moments(self.lower(), self.upper(), 0.0);
        let mean = m.first / m.mass;
        Summary1D {
            mean,
            variance: m.shifted(mean).second,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.segment_moments(self.lower(), x, 0.0).mass
    }

    /// Inverse of the distribution function on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (h, w) in self.heights.iter().zip(self.breakpoints.windows(2)) {
            let m = h * (w[1] - w[0]);
            if m > 0.0 && acc + m >= u {
                return w[0] + (u - acc) / h;
            }
            acc += m;
        }
        self.upper()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }
}

/// Any measure the crate can quantize.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Measure {
    Uniform2D(UniformMeasure2D),
    Piecewise1D(PiecewiseConstant1D),
}
