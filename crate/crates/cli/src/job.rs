use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nmeans::geometry::{ConvexPolygon, Disc, Point2, Support};
use nmeans::measure::{Measure, PiecewiseConstant1D, UniformMeasure2D};
use nmeans::optimize2d::Strategy;
use serde::{Deserialize, Serialize};

/// JSON description of a measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasureDescriptor {
    Disc {
        #[serde(default)]
        center: Option<[f64; 2]>,
        #[serde(default)]
        radius: Option<f64>,
    },
    Square,
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Piecewise1d {
        breakpoints: Vec<f64>,
        heights: Vec<f64>,
    },
}

impl MeasureDescriptor {
    pub fn unit_disc() -> Self {
        MeasureDescriptor::Disc {
            center: None,
            radius: None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MeasureDescriptor::Disc { .. } => "disc",
            MeasureDescriptor::Square => "square",
            MeasureDescriptor::Polygon { .. } => "polygon",
            MeasureDescriptor::Piecewise1d { .. } => "piecewise1d",
        }
    }

    pub fn build(&self) -> Result<Measure, String> {
        let err = |e: nmeans::Error| e.to_string();
        match self {
            MeasureDescriptor::Disc { center, radius } => {
                let c = center.map_or(Point2::ORIGIN, |[x, y]| Point2::new(x, y));
                let disc = Disc::new(c, radius.unwrap_or(1.0)).map_err(err)?;
                Ok(Measure::Uniform2D(
                    UniformMeasure2D::new(Support::Disc(disc)).map_err(err)?,
                ))
            }
            MeasureDescriptor::Square => Ok(Measure::Uniform2D(UniformMeasure2D::unit_square())),
            MeasureDescriptor::Polygon { vertices } => {
                let poly =
                    ConvexPolygon::new(vertices.iter().map(|&[x, y]| Point2::new(x, y)).collect()).map_err(err)?;
                Ok(Measure::Uniform2D(
                    UniformMeasure2D::new(Support::Polygon(poly)).map_err(err)?,
                ))
            }
            MeasureDescriptor::Piecewise1d { breakpoints, heights } => Ok(Measure::Piecewise1D(
                PiecewiseConstant1D::new(breakpoints.clone(), heights.clone()).map_err(err)?,
            )),
        }
    }

    pub fn two_step() -> Self {
        let m = PiecewiseConstant1D::two_step();
        MeasureDescriptor::Piecewise1d {
            breakpoints: m.breakpoints().to_vec(),
            heights: m.heights().to_vec(),
        }
    }

    /// Reads a descriptor file, also accepting a bare vertex list.
    pub fn polygon_file(path: &Path) -> Result<Self, String> {
        let text = read(path)?;
        if let Ok(vertices) = serde_json::from_str::<Vec<[f64; 2]>>(&text) {
            return Ok(MeasureDescriptor::Polygon { vertices });
        }
        match serde_json::from_str(&text) {
            Ok(d @ MeasureDescriptor::Polygon { .. }) => Ok(d),
            Ok(other) => Err(format!(
                "{}: expected a polygon, found {}",
                path.display(),
                other.label()
            )),
            Err(e) => Err(format!("{}: {e}", path.display())),
        }
    }

    /// `builtin:two_step` or a piecewise1d descriptor file.
    pub fn pdf(spec: &str) -> Result<Self, String> {
        if let Some(name) = spec.strip_prefix("builtin:") {
            return match name {
                "two_step" => Ok(Self::two_step()),
                other => Err(format!("unknown builtin density {other:?}")),
            };
        }
        let path = Path::new(spec);
        let text = read(path)?;
        match serde_json::from_str(&text) {
            Ok(d @ MeasureDescriptor::Piecewise1d { .. }) => Ok(d),
            Ok(other) => Err(format!(
                "{spec}: expected a piecewise1d density, found {}",
                other.label()
            )),
            Err(e) => Err(format!("{spec}: {e}")),
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// A single `n` or an inclusive range `a..b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NRange {
    pub lo: usize,
    pub hi: usize,
}

impl NRange {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }

    pub fn is_single(&self) -> bool {
        self.lo == self.hi
    }
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("invalid n {s:?}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if lo == 0 || hi < lo {
            return Err(format!("n range {s:?} must satisfy 1 <= a <= b"));
        }
        Ok(NRange { lo, hi })
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_single() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

impl Serialize for NRange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => NRange::from_str(&n.to_string()),
            Raw::Text(t) => NRange::from_str(&t),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    #[default]
    Auto,
    Lloyd,
    Anneal,
    Families,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Lloyd => Strategy::LloydMultistart,
            StrategyArg::Anneal => Strategy::Anneal,
            StrategyArg::Families => Strategy::Families,
        }
    }
}

/// Everything one invocation needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub measure: MeasureDescriptor,
    pub n: NRange,
    #[serde(default)]
    pub strategy: StrategyArg,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub svg: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

impl JobSpec {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_ranges() {
        assert_eq!("3".parse::<NRange>().unwrap(), NRange { lo: 3, hi: 3 });
        assert_eq!("1..6".parse::<NRange>().unwrap(), NRange { lo: 1, hi: 6 });
        assert_eq!("1..=4".parse::<NRange>().unwrap(), NRange { lo: 1, hi: 4 });
        assert!("0".parse::<NRange>().is_err());
        assert!("5..2".parse::<NRange>().is_err());
        assert!("x".parse::<NRange>().is_err());
    }

    #[test]
    fn descriptors_round_trip() {
        let d: MeasureDescriptor = serde_json::from_str(r#"{"kind":"disc"}"#).unwrap();
        assert_eq!(d, MeasureDescriptor::unit_disc());
        let p: MeasureDescriptor =
            serde_json::from_str(r#"{"kind":"polygon","vertices":[[0,0],[2,0],[0,2]]}"#).unwrap();
        assert!(p.build().is_ok());
        let bad: MeasureDescriptor =
            serde_json::from_str(r#"{"kind":"piecewise1d","breakpoints":[0,1],"heights":[2]}"#).unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn job_spec_accepts_int_or_range() {
        let j: JobSpec = serde_json::from_str(r#"{"measure":{"kind":"square"},"n":"2..3"}"#).unwrap();
        assert_eq!(j.n, NRange { lo: 2, hi: 3 });
        assert_eq!(j.strategy, StrategyArg::Auto);
        let j: JobSpec = serde_json::from_str(r#"{"measure":{"kind":"square"},"n":4,"seed":9}"#).unwrap();
        assert_eq!(j.n.lo, 4);
        assert_eq!(j.seed, 9);
    }
}
