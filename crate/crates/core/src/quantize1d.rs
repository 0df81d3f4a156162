//! Optimal quantization of piecewise-constant densities on an interval.
//!
//! Besides 1D Lloyd, [`enumerate_cases`] walks every way the interior
//! breakpoints can fall among the ordered unknowns `a₁ < m₁ < a₂ < … < a_n`
//! (sites and cell midpoints). On a fixed pattern the distortion is a
//! polynomial in the sites, and its minimum over the pattern's closed region
//! is found by enumerating which breakpoint constraints are active.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distortion::evaluate_1d;
use crate::error::{Error, Result};
use crate::geometry::COINCIDENCE_TOL;
use crate::measure::PiecewiseConstant1D;
use crate::optimize2d::{start_seed, LloydSettings};
use crate::reference::{lookup, SupportTag};
use crate::report::{Candidate, Method, SolveReport};

/// Slack allowed when checking a solution against its own pattern.
pub const PATTERN_TOL: f64 = 1e-12;
/// Solutions closer than this are the same configuration.
pub const DEDUP_TOL: f64 = 1e-9;
/// Allowed disagreement between case enumeration and Lloyd.
pub const AGREEMENT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config1D {
    sites: Vec<f64>,
}

impl Config1D {
    pub fn new(sites: Vec<f64>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidInput("at least one site is required".into()));
        }
        if sites.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput("non-finite site".into()));
        }
        for (i, w) in sites.windows(2).enumerate() {
            if w[1] - w[0] <= COINCIDENCE_TOL {
                return Err(Error::InvalidInput(format!(
                    "sites must increase strictly (positions {i} and {})",
                    i + 1
                )));
            }
        }
        Ok(Self { sites })
    }

    /// Sorts first, then validates.
    pub fn from_unsorted(mut sites: Vec<f64>) -> Result<Self> {
        sites.sort_by(f64::total_cmp);
        Self::new(sites)
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.sites.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Where each interior breakpoint falls among the ordered unknowns
/// `u = (a₁, m₁, a₂, …, m_{n−1}, a_n)`: `slots[p]` counts the unknowns
/// lying below breakpoint `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CasePattern {
    pub n: usize,
    pub slots: Vec<usize>,
    pub breakpoints: Vec<f64>,
}

impl CasePattern {
    fn unknowns(&self) -> usize {
        2 * self.n - 1
    }

    /// Density piece containing unknown `j`.
    pub fn piece_of(&self, j: usize) -> usize {
        self.slots.iter().filter(|&&s| s <= j).count()
    }

    fn name(j: usize) -> String {
        if j.is_multiple_of(2) {
            format!("a{}", j / 2 + 1)
        } else {
            format!("m{}", j / 2 + 1)
        }
    }
}

impl fmt::Display for CasePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for j in 0..=self.unknowns() {
            for (p, &s) in self.slots.iter().enumerate() {
                if s == j {
                    parts.push(format_number(self.breakpoints[p]));
                }
            }
            if j < self.unknowns() {
                parts.push(Self::name(j));
            }
        }
        f.write_str(&parts.join(" <= "))
    }
}

fn format_number(x: f64) -> String {
    match rational_approx(x, 1000, PATTERN_TOL) {
        Some((p, q)) if q != 1 => format!("{p}/{q}"),
        _ => format!("{x}"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSolution {
    pub pattern: CasePattern,
    pub config: Config1D,
    pub value: f64,
    /// Breakpoint constraints active at the solution, as `(unknown, breakpoint)`.
    pub active: Vec<(usize, usize)>,
}

/// Smallest-denominator fraction within `tol` of `x`, if one has
/// denominator at most `max_den`.
pub fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    (1..=max_den).find_map(|q| {
        let p = (x * q as f64).round();
        ((p / q as f64 - x).abs() <= tol).then_some((p as i64, q))
    })
}

fn interior(m: &PiecewiseConstant1D) -> &[f64] {
    let b = m.breakpoints();
    &b[1..b.len() - 1]
}

/// 1D Lloyd: cells are the intervals between consecutive midpoints.
///
/// Iterates until no site moves more than `settings.move_tol` or the exact
/// per-step decrease `Σ mass_i·Δ_i²` relative to the distortion falls below
/// `settings.value_tol`. Empty cells are repaired by redrawing the site from
/// the measure unless `settings.strict`.
pub fn lloyd1d(config: &Config1D, m: &PiecewiseConstant1D, settings: &LloydSettings) -> Result<SolveReport<Config1D>> {
    settings.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut current = config.clone();
    for iter in 1..=settings.max_iters {
        let eval = evaluate_1d(current.sites(), m)?;
        if let Some(c) = eval.cells.iter().find(|c| c.mass <= 0.0) {
            if settings.strict {
                return Err(Error::EmptyCell(c.site_index));
            }
            let mut sites = current.sites().to_vec();
            sites[c.site_index] = m.sample(&mut rng);
            if let Ok(next) = Config1D::from_unsorted(sites) {
                current = next;
            }
            continue;
        }
        let next: Vec<f64> = eval.cells.iter().map(|c| c.centroid).collect();
        let moved = current
            .sites()
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let decrease: f64 = eval
            .cells
            .iter()
            .zip(current.sites().iter().zip(&next))
            .map(|(c, (a, b))| c.mass * (a - b) * (a - b))
            .sum();
        current = Config1D::new(next)?;
        if moved < settings.move_tol || decrease / eval.total.max(f64::MIN_POSITIVE) < settings.value_tol {
            let value = evaluate_1d(current.sites(), m)?.total;
            let mut report = SolveReport::new(current, value, Method::Lloyd);
            report.iterations = iter;
            report.seeds = vec![settings.seed];
            return Ok(report);
        }
    }
    Err(Error::NoConvergence1D {
        iterations: settings.max_iters,
        last: current.sites().to_vec(),
    })
}

/// Settings used for 1D Lloyd unless the caller overrides them.
pub fn default_settings_1d() -> LloydSettings {
    LloydSettings {
        max_iters: 1_000_000,
        move_tol: 1e-13,
        value_tol: 1e-30,
        strict: false,
        seed: 0,
    }
}

/// Every nondecreasing slot assignment of `k` breakpoints into `0..=u`.
fn slot_assignments(k: usize, u: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(k: usize, u: usize, lo: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for s in lo..=u {
            cur.push(s);
            rec(k, u, s, cur, out);
            cur.pop();
        }
    }
    rec(k, u, 0, &mut cur, &mut out);
    out
}

/// Polynomial model of the distortion on one pattern.
struct PatternModel<'a> {
    pattern: &'a CasePattern,
    m: &'a PiecewiseConstant1D,
}

impl PatternModel<'_> {
    fn n(&self) -> usize {
        self.pattern.n
    }

    /// Unknown values from the sites.
    fn unknowns(&self, a: &[f64]) -> Vec<f64> {
        let mut u = Vec::with_capacity(2 * a.len() - 1);
        for (i, &x) in a.iter().enumerate() {
            if i > 0 {
                u.push(0.5 * (a[i - 1] + x));
            }
            u.push(x);
        }
        u
    }

    /// Mass and first moment (about 0) of cell `i`, integrating each piece
    /// over the limits the pattern dictates even where `a` violates it.
    fn cell(&self, a: &[f64], i: usize) -> (f64, f64, f64) {
        let bp = self.m.breakpoints();
        let h = self.m.heights();
        let n = self.n();
        let (lo, lo_piece) = if i == 0 {
            (self.m.lower(), 0)
        } else {
            (0.5 * (a[i - 1] + a[i]), self.pattern.piece_of(2 * i - 1))
        };
        let (hi, hi_piece) = if i == n - 1 {
            (self.m.upper(), h.len() - 1)
        } else {
            (0.5 * (a[i] + a[i + 1]), self.pattern.piece_of(2 * i + 1))
        };
        let (mut mass, mut first, mut second) = (0.0, 0.0, 0.0);
        for q in lo_piece..=hi_piece {
            let l = if q == lo_piece { lo } else { bp[q] };
            let r = if q == hi_piece { hi } else { bp[q + 1] };
            let (l, r) = (l - a[i], r - a[i]);
            mass += h[q] * (r - l);
            first += h[q] * (r * r - l * l) / 2.0;
            second += h[q] * (r * r * r - l * l * l) / 3.0;
        }
        (mass, first, second)
    }

    fn value(&self, a: &[f64]) -> f64 {
        (0..self.n()).map(|i| self.cell(a, i).2).sum()
    }

    /// `g_i = 2(a_i·mass_i − ∫x dP) = −2·first_i` (first moment about `a_i`).
    fn gradient(&self, a: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|i| -2.0 * self.cell(a, i).1).collect()
    }

    fn hessian(&self, a: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n();
        let h = self.m.heights();
        let mut hess = vec![vec![0.0; n]; n];
        for i in 0..n {
            hess[i][i] = 2.0 * self.cell(a, i).0;
        }
        for i in 0..n.saturating_sub(1) {
            let mid = 0.5 * (a[i] + a[i + 1]);
            let hm = h[self.pattern.piece_of(2 * i + 1)];
            // moving the shared boundary trades mass between cells i and i+1
            hess[i][i] += hm * (a[i] - mid);
            hess[i][i + 1] += hm * (a[i] - mid);
            hess[i + 1][i + 1] -= hm * (a[i + 1] - mid);
            hess[i + 1][i] -= hm * (a[i + 1] - mid);
        }
        hess
    }
}

/// A linear equality `coef·a = rhs` pinning an unknown to a breakpoint.
fn pin(n: usize, j: usize, b: f64) -> (Vec<f64>, f64) {
    let mut coef = vec![0.0; n];
    if j.is_multiple_of(2) {
        coef[j / 2] = 1.0;
        (coef, b)
    } else {
        coef[j / 2] = 1.0;
        coef[j / 2 + 1] = 1.0;
        (coef, 2.0 * b)
    }
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Damped Newton on the KKT system of `min F(a)` subject to `C a = d`.
fn kkt_newton(model: &PatternModel, cons: &[(Vec<f64>, f64)], start: &[f64]) -> Option<Vec<f64>> {
    let n = start.len();
    let k = cons.len();
    let mut a = start.to_vec();
    let mut lambda = vec![0.0; k];
    let residual = |a: &[f64], lambda: &[f64]| -> Vec<f64> {
        let mut r = model.gradient(a);
        for (c, l) in cons.iter().zip(lambda) {
            for i in 0..n {
                r[i] += l * c.0[i];
            }
        }
        for c in cons {
            r.push(c.0.iter().zip(a).map(|(x, y)| x * y).sum::<f64>() - c.1);
        }
        r
    };
    let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut r = residual(&a, &lambda);
    for _ in 0..200 {
        if norm(&r) < 1e-15 {
            break;
        }
        let hess = model.hessian(&a);
        let mut mat = vec![vec![0.0; n + k]; n + k];
        for i in 0..n {
            mat[i][..n].copy_from_slice(&hess[i]);
        }
        for (c, con) in cons.iter().enumerate() {
            for i in 0..n {
                mat[i][n + c] = con.0[i];
                mat[n + c][i] = con.0[i];
            }
        }
        let step = solve_linear(mat, r.iter().map(|v| -v).collect())?;
        let mut t = 1.0;
        loop {
            let ta: Vec<f64> = (0..n).map(|i| a[i] + t * step[i]).collect();
            let tl: Vec<f64> = (0..k).map(|c| lambda[c] + t * step[n + c]).collect();
            let tr = residual(&ta, &tl);
            if norm(&tr) < norm(&r) || t < 1e-3 {
                a = ta;
                lambda = tl;
                r = tr;
                break;
            }
            t *= 0.5;
        }
        if !a.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    (norm(&r) < 1e-11).then_some(a)
}

/// Starting points that respect the pattern: unknowns spread evenly in
/// the gaps the breakpoints leave, plus quantile and uniform spacings.
fn starts(pattern: &CasePattern, m: &PiecewiseConstant1D) -> Vec<Vec<f64>> {
    let n = pattern.n;
    let u = pattern.unknowns();
    let mut anchors = vec![(m.lower(), 0usize)];
    for (p, &s) in pattern.slots.iter().enumerate() {
        anchors.push((pattern.breakpoints[p], s));
    }
    anchors.push((m.upper(), u));
    let mut guided = vec![0.0; u];
    for w in anchors.windows(2) {
        let ((x0, s0), (x1, s1)) = (w[0], w[1]);
        let count = s1 - s0;
        for (t, slot) in (s0..s1).enumerate() {
            guided[slot] = x0 + (x1 - x0) * (t as f64 + 1.0) / (count as f64 + 1.0);
        }
    }
    let sites_of = |u: &[f64]| -> Vec<f64> { u.iter().step_by(2).copied().collect() };
    let (lo, hi) = (m.lower(), m.upper());
    vec![
        sites_of(&guided),
        (0..n).map(|i| m.quantile((i as f64 + 0.5) / n as f64)).collect(),
        (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect(),
    ]
}

fn feasible(pattern: &CasePattern, model: &PatternModel, a: &[f64], m: &PiecewiseConstant1D) -> bool {
    if a.windows(2).any(|w| w[1] - w[0] <= COINCIDENCE_TOL) {
        return false;
    }
    if a[0] < m.lower() - PATTERN_TOL || a[a.len() - 1] > m.upper() + PATTERN_TOL {
        return false;
    }
    let u = model.unknowns(a);
    pattern
        .slots
        .iter()
        .zip(&pattern.breakpoints)
        .all(|(&s, &b)| (s == 0 || u[s - 1] <= b + PATTERN_TOL) && (s == u.len() || u[s] >= b - PATTERN_TOL))
}

/// Centroid balance (`Σ a_i·mass_i = E X`) rules out a pattern with every
/// site below a breakpoint that itself lies below the mean, or at it when the
/// sites are distinct; likewise for the mirror case.
fn excluded(pattern: &CasePattern, mean: f64) -> bool {
    let below = |b: f64| b < mean || (pattern.n >= 2 && b == mean);
    let above = |b: f64| b > mean || (pattern.n >= 2 && b == mean);
    pattern
        .slots
        .iter()
        .zip(&pattern.breakpoints)
        .any(|(&s, &b)| (s == pattern.unknowns() && below(b)) || (s == 0 && above(b)))
}

fn minimize_pattern(pattern: &CasePattern, m: &PiecewiseConstant1D) -> Option<CaseSolution> {
    let n = pattern.n;
    let model = PatternModel { pattern, m };
    let u = pattern.unknowns();
    // each breakpoint may pin the unknown just below it, just above it, or neither
    let options: Vec<Vec<Option<usize>>> = pattern
        .slots
        .iter()
        .map(|&s| {
            let mut o = vec![None];
            if s > 0 {
                o.push(Some(s - 1));
            }
            if s < u {
                o.push(Some(s));
            }
            o
        })
        .collect();
    let mut best: Option<CaseSolution> = None;
    let mut choice = vec![0usize; options.len()];
    loop {
        let active: Vec<(usize, usize)> = choice
            .iter()
            .enumerate()
            .filter_map(|(p, &c)| options[p][c].map(|j| (j, p)))
            .collect();
        let distinct = {
            let mut js: Vec<usize> = active.iter().map(|x| x.0).collect();
            js.sort_unstable();
            js.dedup();
            js.len() == active.len()
        };
        if distinct && active.len() <= n {
            let cons: Vec<(Vec<f64>, f64)> = active.iter().map(|&(j, p)| pin(n, j, pattern.breakpoints[p])).collect();
            for start in starts(pattern, m) {
                let Some(a) = kkt_newton(&model, &cons, &start) else {
                    continue;
                };
                if !feasible(pattern, &model, &a, m) {
                    continue;
                }
                let value = model.value(&a);
                if best.as_ref().is_none_or(|b| value < b.value) {
                    best = Some(CaseSolution {
                        pattern: pattern.clone(),
                        config: Config1D::new(a).ok()?,
                        value,
                        active: active.clone(),
                    });
                }
            }
        }
        let mut p = 0;
        loop {
            if p == choice.len() {
                return best;
            }
            choice[p] += 1;
            if choice[p] < options[p].len() {
                break;
            }
            choice[p] = 0;
            p += 1;
        }
    }
}

/// Minimum distortion on every feasible breakpoint pattern, sorted by value
/// then sites, with coincident configurations merged.
///
/// A pattern's minimum may sit on its boundary (a site or midpoint exactly
/// at a breakpoint); such points are reported with their active constraints.
pub fn enumerate_cases(n: usize, m: &PiecewiseConstant1D) -> Result<Vec<CaseSolution>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if m.pieces() > 4 {
        return Err(Error::InvalidInput(format!(
            "case enumeration supports at most 4 pieces, got {}",
            m.pieces()
        )));
    }
    let mean = m.summarize().mean;
    let breakpoints = interior(m).to_vec();
    let mut found: Vec<CaseSolution> = slot_assignments(breakpoints.len(), 2 * n - 1)
        .into_iter()
        .map(|slots| CasePattern {
            n,
            slots,
            breakpoints: breakpoints.clone(),
        })
        .filter(|p| !excluded(p, mean))
        .filter_map(|p| minimize_pattern(&p, m))
        .collect();
    found.sort_by(|a, b| {
        a.value.total_cmp(&b.value).then_with(|| {
            a.config
                .sites()
                .iter()
                .zip(b.config.sites())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let mut out: Vec<CaseSolution> = Vec::new();
    for s in found {
        let dup = out.iter().any(|o| {
            o.config
                .sites()
                .iter()
                .zip(s.config.sites())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
                < DEDUP_TOL
        });
        if !dup {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(Error::NoFeasibleCase);
    }
    Ok(out)
}

/// Best 1D configuration: the lowest case minimum, cross-checked by Lloyd
/// from several seeded starts. `oracle_delta` holds Lloyd's value minus the
/// case value; `diverged` is set when they differ by more than
/// [`AGREEMENT_TOL`], in which case the lower of the two is returned.
pub fn solve1d(n: usize, m: &PiecewiseConstant1D, seed: u64) -> Result<SolveReport<Config1D>> {
    let cases = enumerate_cases(n, m)?;
    let lloyd = lloyd_multistart_1d(n, m, seed, 16)?;
    let top = &cases[0];
    let delta = lloyd.value - top.value;
    let mut report = if delta < -AGREEMENT_TOL {
        let mut r = SolveReport::new(lloyd.best.clone(), lloyd.value, Method::LloydMultistart);
        r.iterations = lloyd.iterations;
        r
    } else {
        SolveReport::new(top.config.clone(), top.value, Method::CaseEnumeration)
    };
    report.candidates = cases
        .iter()
        .map(|c| Candidate {
            label: c.pattern.to_string(),
            value: c.value,
        })
        .collect();
    report.candidates.push(Candidate {
        label: Method::LloydMultistart.to_string(),
        value: lloyd.value,
    });
    report.starts_used = lloyd.starts_used;
    report.seeds = lloyd.seeds;
    report.oracle_delta = Some(delta);
    report.diverged = delta.abs() > AGREEMENT_TOL;
    report.unverified = !(m == &PiecewiseConstant1D::two_step() && lookup(SupportTag::Piecewise1d, n).is_some());
    Ok(report)
}

/// Best of `starts` 1D Lloyd runs from sites drawn from the measure.
pub fn lloyd_multistart_1d(
    n: usize,
    m: &PiecewiseConstant1D,
    seed: u64,
    starts: usize,
) -> Result<SolveReport<Config1D>> {
    use rand::Rng;
    if n == 0 || starts == 0 {
        return Err(Error::InvalidInput("n and starts must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..starts as u64).map(|k| start_seed(seed, k)).collect();
    let mut best: Option<SolveReport<Config1D>> = None;
    let mut iterations = 0;
    for &s in &seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let start = loop {
            let draw: Vec<f64> = (0..n).map(|_| m.quantile(rng.gen::<f64>())).collect();
            if let Ok(c) = Config1D::from_unsorted(draw) {
                break c;
            }
        };
        let settings = LloydSettings {
            seed: s,
            ..default_settings_1d()
        };
        let r = lloyd1d(&start, m, &settings)?;
        iterations += r.iterations;
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    let mut report = best.expect("at least one start");
    report.method = Method::LloydMultistart;
    report.starts_used = starts;
    report.iterations = iterations;
    report.seeds = seeds;
    Ok(report)
}
