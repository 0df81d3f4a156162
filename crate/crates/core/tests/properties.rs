use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use nmeans::distortion::{evaluate, evaluate_1d, sector_centroid, sector_distortion, Configuration};
use nmeans::geometry::{voronoi_cells, ConvexPolygon, Disc, HalfPlane, Point2, Support};
use nmeans::measure::{PiecewiseConstant1D, UniformMeasure2D};
use nmeans::optimize2d::lloyd_step;
use nmeans::quadrature::cell_moments;
use nmeans::quantize1d::solve1d;
use nmeans::reference::{table, SupportTag};
use proptest::prelude::*;

fn square_point() -> impl Strategy<Value = Point2> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| Point2::new(x, y))
}

fn disc_point() -> impl Strategy<Value = Point2> {
    (0.0..1.0f64, 0.0..TAU).prop_map(|(u, t)| Point2::polar(u.sqrt(), t))
}

fn square_sites(max: usize) -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec(square_point(), 1..=max)
}

fn disc_sites(max: usize) -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec(disc_point(), 1..=max)
}

fn config(sites: Vec<Point2>) -> Option<Configuration> {
    Configuration::new(sites).ok()
}

fn half_plane() -> impl Strategy<Value = HalfPlane> {
    (0.0..TAU, -1.0..1.0f64).prop_map(|(t, c)| HalfPlane::new(Point2::polar(1.0, t), c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_identity(sites in square_sites(6), ax in -2.0..2.0f64, ay in -2.0..2.0f64) {
        let Ok(cells) = voronoi_cells(&sites, &Support::Polygon(ConvexPolygon::unit_square())) else {
            return Ok(());
        };
        let a = Point2::new(ax, ay);
        for (cell, &s) in cells.iter().zip(&sites) {
            if cell.is_empty() {
                continue;
            }
            let at_site = cell.moments(s).unwrap();
            let direct = cell.moments(a).unwrap();
            let moved = at_site.shifted(a);
            assert_relative_eq!(moved.measure2, direct.measure2, max_relative = 1e-12);
            let c = direct.centroid().unwrap();
            let parallel = direct.central_second() + direct.measure0 * a.dist(c).powi(2);
            assert_relative_eq!(parallel, direct.measure2, max_relative = 1e-12);
        }
    }

    #[test]
    fn cells_partition_the_square(sites in square_sites(9)) {
        let Some(c) = config(sites) else { return Ok(()) };
        let e = evaluate(&c, &UniformMeasure2D::unit_square()).unwrap();
        let mass: f64 = e.cells.iter().map(|c| c.mass).sum();
        prop_assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cells_partition_the_disc(sites in disc_sites(9)) {
        let Some(c) = config(sites) else { return Ok(()) };
        let e = evaluate(&c, &UniformMeasure2D::unit_disc()).unwrap();
        let mass: f64 = e.cells.iter().map(|c| c.mass).sum();
        prop_assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn clipping_never_grows(h in half_plane(), g in half_plane()) {
        let square = Support::Polygon(ConvexPolygon::unit_square()).to_cell();
        let disc = Support::Disc(Disc::unit()).to_cell();
        for base in [square, disc] {
            let once = base.clip(&h);
            let twice = once.clip(&g);
            prop_assert!(once.area() <= base.area() + 1e-14);
            prop_assert!(twice.area() <= once.area() + 1e-14);
        }
    }

    #[test]
    fn disc_cells_match_quadrature(sites in disc_sites(6), rx in -1.0..1.0f64, ry in -1.0..1.0f64) {
        let Ok(cells) = voronoi_cells(&sites, &Support::Disc(Disc::unit())) else { return Ok(()) };
        let r = Point2::new(rx, ry);
        for cell in cells.iter().filter(|c| !c.is_empty()) {
            let exact = cell.moments(r).unwrap();
            let quad = cell_moments(cell, r, 1e-12);
            prop_assert!((exact.measure0 - quad.measure0).abs() < 1e-8);
            prop_assert!(exact.measure1.dist(quad.measure1) < 1e-8);
            prop_assert!((exact.measure2 - quad.measure2).abs() < 1e-8);
        }
    }

    #[test]
    fn disc_distortion_is_rotation_invariant(sites in disc_sites(7), angle in 0.0..TAU) {
        let Some(c) = config(sites) else { return Ok(()) };
        let m = UniformMeasure2D::unit_disc();
        let v = evaluate(&c, &m).unwrap().total;
        let w = evaluate(&c.rotated_about(Point2::ORIGIN, angle), &m).unwrap().total;
        prop_assert!((v - w).abs() < 1e-10);
    }

    #[test]
    fn translation_invariance(sites in square_sites(6), dx in -5.0..5.0f64, dy in -5.0..5.0f64) {
        let Some(c) = config(sites) else { return Ok(()) };
        let by = Point2::new(dx, dy);
        let m = UniformMeasure2D::unit_square();
        let v = evaluate(&c, &m).unwrap().total;
        let w = evaluate(&c.translated(by), &m.translated(by)).unwrap().total;
        prop_assert!((v - w).abs() < 1e-10);
    }

    #[test]
    fn lloyd_step_never_increases(sites in square_sites(8), on_disc in any::<bool>()) {
        let m = if on_disc { UniformMeasure2D::unit_disc() } else { UniformMeasure2D::unit_square() };
        let sites = if on_disc {
            sites.into_iter().map(|p| Point2::new(2.0 * p.x - 1.0, 2.0 * p.y - 1.0) * 0.7).collect()
        } else {
            sites
        };
        let Some(c) = config(sites) else { return Ok(()) };
        let before = evaluate(&c, &m).unwrap().total;
        let Ok(next) = lloyd_step(&c, &m) else { return Ok(()) };
        let after = evaluate(&next, &m).unwrap().total;
        prop_assert!(after <= before + 1e-12, "{before} -> {after}");
    }

    #[test]
    fn extra_site_never_hurts(sites in square_sites(6), extra in square_point()) {
        let Some(c) = config(sites.clone()) else { return Ok(()) };
        let mut more = sites;
        more.push(extra);
        let Some(d) = config(more) else { return Ok(()) };
        let m = UniformMeasure2D::unit_square();
        prop_assert!(evaluate(&d, &m).unwrap().total <= evaluate(&c, &m).unwrap().total + 1e-12);
    }

    #[test]
    fn sector_matches_voronoi_cell(t1 in 0.0..TAU, width in 0.05..(PI - 0.05)) {
        let t2 = t1 + width;
        let c = sector_centroid(t1, t2).unwrap();
        let mid = t1 + 0.5 * width;
        let r = c.norm();
        let sites = vec![c, Point2::polar(r, mid + width), Point2::polar(r, mid - width)];
        let e = evaluate(&Configuration::new(sites).unwrap(), &UniformMeasure2D::unit_disc()).unwrap();
        prop_assert!(e.cells[0].centroid.dist(c) < 1e-10);
        prop_assert!((e.cells[0].mass - width / TAU).abs() < 1e-10);
        prop_assert!((e.cells[0].distortion - sector_distortion(t1, t2).unwrap()).abs() < 1e-10);
    }
}

fn two_piece_density() -> impl Strategy<Value = PiecewiseConstant1D> {
    (0.2..0.8f64, 0.1..0.9f64).prop_map(|(b, left_mass)| {
        PiecewiseConstant1D::new(vec![0.0, b, 1.0], vec![left_mass / b, (1.0 - left_mass) / (1.0 - b)]).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_d_optimum_is_centroidal(
        m in two_piece_density(),
        n in 1usize..=3,
    ) {
        let r = solve1d(n, &m, 0).unwrap();
        prop_assert!(!r.diverged, "delta {:?}", r.oracle_delta);
        let sites = r.best.sites();
        let e = evaluate_1d(sites, &m).unwrap();
        // sites and midpoints interlace
        for (i, &s) in sites.iter().enumerate() {
            prop_assert!(e.boundaries[i] < s && s < e.boundaries[i + 1]);
            prop_assert!((e.cells[i].centroid - s).abs() < 1e-8);
        }
        let mean = m.summarize().mean;
        let balance: f64 = e.cells.iter().map(|c| c.mass * c.centroid).sum();
        prop_assert!((balance - mean).abs() < 1e-10);
    }
}

#[test]
fn reference_values_decrease_in_n() {
    for tag in [SupportTag::Disc, SupportTag::Square, SupportTag::Piecewise1d] {
        let mut values: Vec<(usize, f64)> = table()
            .iter()
            .filter(|e| e.support == tag)
            .map(|e| (e.n, e.value))
            .collect();
        values.sort_by_key(|&(n, _)| n);
        for w in values.windows(2) {
            assert!(
                w[1].1 < w[0].1,
                "{tag}: V{} = {} not below V{} = {}",
                w[1].0,
                w[1].1,
                w[0].0,
                w[0].1
            );
        }
    }
}
