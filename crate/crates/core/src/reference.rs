//! Tabulated optimal values and configurations for the unit disc, the unit
//! square and the two-step density on `[0, 1]`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::distortion::{evaluate, evaluate_1d, Configuration};
use crate::error::Result;
use crate::geometry::{ConvexPolygon, Disc, Point2, Support};
use crate::measure::{Measure, PiecewiseConstant1D, UniformMeasure2D};

const TABLE: &str = include_str!("../data/reference.json");

/// Absolute tolerance for closed-form values.
pub const EXACT_TOL: f64 = 1e-12;
/// Absolute tolerance for values printed to six significant figures.
pub const PRINTED_TOL: f64 = 5e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportTag {
    Disc,
    Square,
    Piecewise1d,
}

impl SupportTag {
    /// Tag of a measure that is exactly one of the tabulated ones.
    pub fn of(m: &Measure) -> Option<SupportTag> {
        match m {
            Measure::Uniform2D(u) => Self::of_uniform(u),
            Measure::Piecewise1D(p) => (p == &PiecewiseConstant1D::two_step()).then_some(SupportTag::Piecewise1d),
        }
    }

    pub fn of_uniform(m: &UniformMeasure2D) -> Option<SupportTag> {
        match m.support() {
            Support::Disc(d) if *d == Disc::unit() => Some(SupportTag::Disc),
            Support::Polygon(p) if *p == ConvexPolygon::unit_square() => Some(SupportTag::Square),
            _ => None,
        }
    }
}

impl fmt::Display for SupportTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SupportTag::Disc => "disc",
            SupportTag::Square => "square",
            SupportTag::Piecewise1d => "piecewise1d",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tolerance {
    Exact,
    Printed,
}

impl Tolerance {
    pub fn absolute(&self) -> f64 {
        match self {
            Tolerance::Exact => EXACT_TOL,
            Tolerance::Printed => PRINTED_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub support: SupportTag,
    pub n: usize,
    pub value: f64,
    /// Closed form of `value`, when one is known.
    pub exact: Option<String>,
    pub tolerance: Tolerance,
    /// Sites as `[x, y]` pairs, or one-element lists in 1D.
    pub sites: Vec<Vec<f64>>,
    pub source: String,
    pub conjecture_conditional: bool,
}

impl ReferenceEntry {
    pub fn matches(&self, value: f64) -> bool {
        (value - self.value).abs() <= self.tolerance.absolute()
    }

    pub fn configuration(&self) -> Result<Configuration> {
        Configuration::new(self.sites.iter().map(|s| Point2::new(s[0], s[1])).collect())
    }

    pub fn sites_1d(&self) -> Vec<f64> {
        self.sites.iter().map(|s| s[0]).collect()
    }

    /// Distortion of the tabulated configuration under the tabulated measure.
    pub fn evaluate(&self) -> Result<f64> {
        match self.support {
            SupportTag::Disc => Ok(evaluate(&self.configuration()?, &UniformMeasure2D::unit_disc())?.total),
            SupportTag::Square => Ok(evaluate(&self.configuration()?, &UniformMeasure2D::unit_square())?.total),
            SupportTag::Piecewise1d => Ok(evaluate_1d(&self.sites_1d(), &PiecewiseConstant1D::two_step())?.total),
        }
    }
}

/// Every tabulated entry.
pub fn table() -> &'static [ReferenceEntry] {
    static PARSED: OnceLock<Vec<ReferenceEntry>> = OnceLock::new();
    PARSED.get_or_init(|| serde_json::from_str(TABLE).expect("embedded reference table parses"))
}

pub fn lookup(support: SupportTag, n: usize) -> Option<&'static ReferenceEntry> {
    table().iter().find(|e| e.support == support && e.n == n)
}

/// The raw embedded JSON.
pub fn table_json() -> &'static str {
    TABLE
}
