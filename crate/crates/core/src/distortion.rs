//! Distortion `V(P; α)` of a configuration, per-cell centroids, the sector
//! closed forms for the unit disc, and a quadrature cross-check.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_distinct, voronoi_cells, Cell, Point2, EMPTY_AREA_TOL};
use crate::measure::{PiecewiseConstant1D, UniformMeasure2D};
use crate::quadrature::{adaptive_simpson, slice_min_distance, SlicedRegion};

/// An ordered list of distinct candidate quantizers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    sites: Vec<Point2>,
}

impl Configuration {
    pub fn new(sites: Vec<Point2>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidInput("configuration needs at least one site".into()));
        }
        if let Some(p) = sites.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite site {p:?}")));
        }
        check_distinct(&sites)?;
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[Point2] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Sites sorted lexicographically by `(x, y)`.
    pub fn sorted(&self) -> Self {
        let mut sites = self.sites.clone();
        sites.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        Self { sites }
    }

    pub fn rotated_about(&self, pivot: Point2, angle: f64) -> Self {
        Self {
            sites: self.sites.iter().map(|s| s.rotated_about(pivot, angle)).collect(),
        }
    }

    pub fn translated(&self, by: Point2) -> Self {
        Self {
            sites: self.sites.iter().map(|s| *s + by).collect(),
        }
    }

    pub fn into_sites(self) -> Vec<Point2> {
        self.sites
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub site_index: usize,
    /// Probability of the cell; zero flags an empty cell.
    pub mass: f64,
    /// Conditional mean of the cell, or the site itself when the cell is empty.
    pub centroid: Point2,
    pub distortion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub total: f64,
    pub cells: Vec<CellReport>,
}

impl Evaluation {
    pub fn empty_cells(&self) -> Vec<usize> {
        self.cells
            .iter()
            .filter(|c| c.mass <= 0.0)
            .map(|c| c.site_index)
            .collect()
    }

    pub fn has_empty_cell(&self) -> bool {
        self.cells.iter().any(|c| c.mass <= 0.0)
    }

    /// Largest distance between a site of `config` and its cell centroid.
    pub fn max_centroid_gap(&self, sites: &[Point2]) -> f64 {
        self.cells
            .iter()
            .map(|c| sites[c.site_index].dist(c.centroid))
            .fold(0.0, f64::max)
    }
}

/// Exact distortion of `config` under a uniform 2D measure.
pub fn evaluate(config: &Configuration, m: &UniformMeasure2D) -> Result<Evaluation> {
    let cells = voronoi_cells(config.sites(), m.support())?;
    Ok(evaluate_cells(config.sites(), &cells, m.density()))
}

pub(crate) fn evaluate_cells(sites: &[Point2], cells: &[Cell], density: f64) -> Evaluation {
    let reports: Vec<CellReport> = cells
        .iter()
        .zip(sites)
        .enumerate()
        .map(|(i, (cell, &site))| match cell.moments(site) {
            Ok(mt) if mt.measure0 >= EMPTY_AREA_TOL => CellReport {
                site_index: i,
                mass: density * mt.measure0,
                centroid: site + mt.measure1 / mt.measure0,
                distortion: density * mt.measure2,
            },
            _ => CellReport {
                site_index: i,
                mass: 0.0,
                centroid: site,
                distortion: 0.0,
            },
        })
        .collect();
    Evaluation {
        total: reports.iter().map(|c| c.distortion).sum(),
        cells: reports,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport1D {
    pub site_index: usize,
    pub mass: f64,
    pub centroid: f64,
    pub distortion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation1D {
    pub total: f64,
    pub cells: Vec<CellReport1D>,
    /// Cell boundaries: support ends and the midpoints between consecutive sites.
    pub boundaries: Vec<f64>,
}

/// Exact distortion of strictly increasing `sites` under a piecewise-constant density.
pub fn evaluate_1d(sites: &[f64], m: &PiecewiseConstant1D) -> Result<Evaluation1D> {
    if sites.is_empty() {
        return Err(Error::InvalidInput("at least one site is required".into()));
    }
    if sites.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("non-finite site".into()));
    }
    for (i, w) in sites.windows(2).enumerate() {
        if w[1] - w[0] <= crate::geometry::COINCIDENCE_TOL {
            return Err(Error::DuplicateSites {
                first: i,
                second: i + 1,
            });
        }
    }
    let n = sites.len();
    let mut boundaries = Vec::with_capacity(n + 1);
    boundaries.push(m.lower().min(sites[0]));
    boundaries.extend(sites.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    boundaries.push(m.upper().max(sites[n - 1]));
    let cells: Vec<CellReport1D> = (0..n)
        .map(|i| {
            let mt = m.segment_moments(boundaries[i], boundaries[i + 1], sites[i]);
            CellReport1D {
                site_index: i,
                mass: mt.mass,
                centroid: mt.centroid().unwrap_or(sites[i]),
                distortion: mt.second,
            }
        })
        .collect();
    Ok(Evaluation1D {
        total: cells.iter().map(|c| c.distortion).sum(),
        cells,
        boundaries,
    })
}

fn canonical_sweep(theta1: f64, theta2: f64) -> Result<f64> {
    let raw = theta2 - theta1;
    if raw == 0.0 || !raw.is_finite() {
        return Err(Error::DegenerateSector(theta1));
    }
    let d = raw.rem_euclid(TAU);
    Ok(if d == 0.0 { TAU } else { d })
}

/// Centroid of the unit-disc sector from `theta1` counterclockwise to `theta2`.
pub fn sector_centroid(theta1: f64, theta2: f64) -> Result<Point2> {
    let sweep = canonical_sweep(theta1, theta2)?;
    let t2 = theta1 + sweep;
    let d = theta1 - t2;
    Ok(Point2::new(
        2.0 * (theta1.sin() - t2.sin()) / (3.0 * d),
        -2.0 * (theta1.cos() - t2.cos()) / (3.0 * d),
    ))
}

/// Distortion contributed by a unit-disc sector about its own centroid,
/// under the uniform density `1/π`.
pub fn sector_distortion(theta1: f64, theta2: f64) -> Result<f64> {
    let d = canonical_sweep(theta1, theta2)?;
    let s = (0.5 * d).sin();
    Ok((9.0 * d * d - 32.0 * s * s) / (36.0 * PI * d))
}

/// Independent estimate of `V(P; α)` for a uniform 2D measure: vertical
/// slices of the support, exact lower-envelope integration in `y`, adaptive
/// Simpson in `x`. Does not use the Voronoi construction.
pub fn quadrature_check(config: &Configuration, m: &UniformMeasure2D, tol: f64) -> f64 {
    let support = m.support();
    let region = SlicedRegion::new(support.half_planes(), support.disc());
    let (lo, hi) = support.bounding_box();
    let Some((a, b)) = region.extent(lo.x, hi.x) else {
        return 0.0;
    };
    let sites = config.sites();
    let f = |x: f64| -> [f64; 1] {
        match region.slice(x) {
            Some((y0, y1)) => [slice_min_distance(x, y0, y1, sites)],
            None => [0.0],
        }
    };
    let tol = tol.max(1e-14) / m.density();
    let [v] = adaptive_simpson(&f, a, b, tol / (b - a).max(1.0));
    m.density() * v
}

/// Quadrature estimate of the 1D distortion, integrated piece by piece.
pub fn quadrature_check_1d(sites: &[f64], m: &PiecewiseConstant1D, tol: f64) -> f64 {
    let mut total = 0.0;
    for (h, w) in m.heights().iter().zip(m.breakpoints().windows(2)) {
        let f = |x: f64| -> [f64; 1] {
            let d = sites.iter().map(|s| (x - s) * (x - s)).fold(f64::INFINITY, f64::min);
            [h * d]
        };
        // split at midpoints so each panel is a single polynomial
        let mut cuts = vec![w[0], w[1]];
        cuts.extend(
            sites
                .windows(2)
                .map(|p| 0.5 * (p[0] + p[1]))
                .filter(|&x| x > w[0] && x < w[1]),
        );
        cuts.sort_by(f64::total_cmp);
        for c in cuts.windows(2) {
            total += adaptive_simpson(&f, c[0], c[1], tol)[0];
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(pts: &[(f64, f64)]) -> Configuration {
        Configuration::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn disc_center_gives_half() {
        let e = evaluate(&cfg(&[(0.0, 0.0)]), &UniformMeasure2D::unit_disc()).unwrap();
        assert_relative_eq!(e.total, 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.cells[0].mass, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn square_axis_pair() {
        let e = evaluate(&cfg(&[(0.25, 0.5), (0.75, 0.5)]), &UniformMeasure2D::unit_square()).unwrap();
        assert_relative_eq!(e.total, 5.0 / 48.0, epsilon = 1e-15);
    }

    #[test]
    fn square_diagonal_pair() {
        let e = evaluate(
            &cfg(&[(1.0 / 3.0, 1.0 / 3.0), (2.0 / 3.0, 2.0 / 3.0)]),
            &UniformMeasure2D::unit_square(),
        )
        .unwrap();
        assert_relative_eq!(e.total, 1.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn two_step_pair() {
        let e = evaluate_1d(&[11.0 / 32.0, 25.0 / 32.0], &PiecewiseConstant1D::two_step()).unwrap();
        assert_relative_eq!(e.total, 317.0 / 15360.0, epsilon = 1e-15);
    }

    #[test]
    fn sector_centroid_examples() {
        let g = sector_centroid(-PI / 2.0, PI / 2.0).unwrap();
        assert_relative_eq!(g.x, 4.0 / (3.0 * PI), epsilon = 1e-15);
        assert!(g.y.abs() < 1e-15);
        let g = sector_centroid(0.0, PI / 2.0).unwrap();
        assert_relative_eq!(g.x, 4.0 / (3.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(g.y, 4.0 / (3.0 * PI), epsilon = 1e-15);
        let g = sector_centroid(0.0, TAU).unwrap();
        assert!(g.norm() < 1e-15);
        assert!(matches!(sector_centroid(1.0, 1.0), Err(Error::DegenerateSector(_))));
    }

    #[test]
    fn sector_distortion_examples() {
        let pi2 = PI * PI;
        assert_relative_eq!(
            sector_distortion(-PI / 2.0, PI / 2.0).unwrap(),
            (9.0 * pi2 - 32.0) / (36.0 * pi2),
            epsilon = 1e-15
        );
        assert!((3.0 * sector_distortion(0.0, 2.0 * PI / 3.0).unwrap() - 0.196036).abs() < 5e-7);
        assert_relative_eq!(
            4.0 * sector_distortion(0.0, PI / 2.0).unwrap(),
            (9.0 * pi2 - 64.0) / (18.0 * pi2),
            epsilon = 1e-15
        );
        assert!(matches!(sector_distortion(0.3, 0.3), Err(Error::DegenerateSector(_))));
    }

    #[test]
    fn raw_angles_are_canonicalized() {
        let a = sector_distortion(5.0, 5.0 + 1.2).unwrap();
        let b = sector_distortion(5.0 - TAU, 5.0 + 1.2).unwrap();
        let c = sector_distortion(5.0 + 1.2 - TAU, 5.0).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-14);
        assert_relative_eq!(c, sector_distortion(0.0, TAU - 1.2).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn quadrature_examples() {
        let q = quadrature_check(&cfg(&[(0.0, 0.0)]), &UniformMeasure2D::unit_disc(), 1e-10);
        assert!((q - 0.5).abs() < 1e-9);
        let quad = cfg(&[(0.25, 0.25), (0.75, 0.75), (0.75, 0.25), (0.25, 0.75)]);
        let q = quadrature_check(&quad, &UniformMeasure2D::unit_square(), 1e-10);
        assert!((q - 1.0 / 24.0).abs() < 1e-9);
    }

    #[test]
    fn empty_cell_is_flagged() {
        // a site far outside the square owns no mass
        let e = evaluate(&cfg(&[(0.5, 0.5), (5.0, 5.0)]), &UniformMeasure2D::unit_square()).unwrap();
        assert_eq!(e.empty_cells(), vec![1]);
        assert_relative_eq!(e.total, 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn one_d_rejects_unsorted() {
        assert!(evaluate_1d(&[0.5, 0.5], &PiecewiseConstant1D::two_step()).is_err());
    }
}
