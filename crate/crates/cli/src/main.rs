mod job;
mod output;
mod svg;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nmeans::distortion::Configuration;
use nmeans::geometry::{voronoi_cells, Point2};
use nmeans::measure::{Measure, PiecewiseConstant1D, UniformMeasure2D};
use nmeans::optimize2d::{solve, SolveOptions};
use nmeans::quantize1d::{solve1d, Config1D};
use nmeans::reference::{lookup, table_json, SupportTag};

use job::{JobSpec, MeasureDescriptor, NRange, StrategyArg};
use output::Row;

/// Quadrature tolerance of the 2D cross-check.
const ORACLE_TOL: f64 = 1e-10;
/// Exact and quadrature distortions further apart than this abort with exit 3.
const ORACLE_LIMIT: f64 = 1e-7;

#[derive(Parser)]
#[command(
    name = "nmeans",
    version,
    about = "Optimal n-means of uniform and piecewise-constant distributions"
)]
struct Cli {
    /// Worker threads (default: hardware count)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for optimal sites and write CSV (and optionally SVG)
    Solve(SolveArgs),
    /// Compare solver output with the tabulated reference values
    Verify(JobArgs),
    /// Plot a configuration as SVG
    Plot(PlotArgs),
    /// Print the reference table as JSON
    Reference,
}

#[derive(Args, Clone, Default)]
#[group(id = "measure", multiple = false)]
struct MeasureArgs {
    /// Uniform distribution on the unit disc
    #[arg(long)]
    disc: bool,
    /// Uniform distribution on the unit square
    #[arg(long)]
    square: bool,
    /// Uniform distribution on a convex polygon read from a JSON file
    #[arg(long, value_name = "FILE")]
    polygon: Option<PathBuf>,
    /// Piecewise-constant density on an interval: a JSON file or builtin:two_step
    #[arg(long, value_name = "FILE|builtin:two_step")]
    pdf: Option<String>,
}

impl MeasureArgs {
    fn descriptor(&self) -> Result<Option<MeasureDescriptor>, String> {
        Ok(if self.disc {
            Some(MeasureDescriptor::unit_disc())
        } else if self.square {
            Some(MeasureDescriptor::Square)
        } else if let Some(p) = &self.polygon {
            Some(MeasureDescriptor::polygon_file(p)?)
        } else if let Some(s) = &self.pdf {
            Some(MeasureDescriptor::pdf(s)?)
        } else {
            None
        })
    }
}

#[derive(Args, Clone)]
struct JobArgs {
    #[command(flatten)]
    measure: MeasureArgs,
    /// Number of sites, or an inclusive range a..b
    #[arg(long, value_name = "INT|A..B")]
    n: Option<NRange>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON job file; explicit flags override its fields
    #[arg(long, value_name = "FILE")]
    job: Option<PathBuf>,
}

impl JobArgs {
    fn resolve(&self, svg: Option<PathBuf>, csv: Option<PathBuf>) -> Result<JobSpec, String> {
        self.resolve_or(svg, csv, None)
    }

    /// Like `resolve`, with `fallback` used when neither flags nor job file give `n`.
    fn resolve_or(
        &self,
        svg: Option<PathBuf>,
        csv: Option<PathBuf>,
        fallback: Option<NRange>,
    ) -> Result<JobSpec, String> {
        let base = self.job.as_deref().map(JobSpec::from_file).transpose()?;
        let measure = match (self.measure.descriptor()?, &base) {
            (Some(d), _) => d,
            (None, Some(b)) => b.measure.clone(),
            (None, None) => return Err("one of --disc, --square, --polygon, --pdf or --job is required".into()),
        };
        let n = self
            .n
            .or(base.as_ref().map(|b| b.n))
            .or(fallback)
            .ok_or_else(|| "--n is required".to_string())?;
        Ok(JobSpec {
            measure,
            n,
            strategy: self.strategy.or(base.as_ref().map(|b| b.strategy)).unwrap_or_default(),
            seed: self.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
            svg: svg.or_else(|| base.as_ref().and_then(|b| b.svg.clone())),
            csv: csv.or_else(|| base.as_ref().and_then(|b| b.csv.clone())),
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    job: JobArgs,
    /// SVG output; with an n range, one file per n suffixed `_n<N>`
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    /// CSV output (default: stdout)
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Draw the circle about the sites' mean through the farthest site
    #[arg(long)]
    circle: bool,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    job: JobArgs,
    /// SVG output path
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    /// Take sites from a CSV written by `solve` instead of solving
    #[arg(long, value_name = "FILE")]
    from_csv: Option<PathBuf>,
    #[arg(long)]
    circle: bool,
}

enum Failure {
    Invalid(String),
    Diverged(String),
    Mismatch,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Diverged(_) => 3,
            Failure::Mismatch => 4,
        }
    }
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Invalid(s)
    }
}

fn solver_failure(e: nmeans::Error) -> Failure {
    match e {
        nmeans::Error::InvalidInput(_) | nmeans::Error::InvalidMeasure(_) | nmeans::Error::InvalidPolygon(_) => {
            Failure::Invalid(e.to_string())
        }
        other => Failure::Diverged(other.to_string()),
    }
}

/// A solved configuration and what is needed to plot it.
enum Solved {
    Planar(UniformMeasure2D, Vec<Point2>),
    Line(PiecewiseConstant1D, Vec<f64>),
}

impl Solved {
    fn svg(&self, circle: bool) -> Result<String, Failure> {
        match self {
            Solved::Planar(m, sites) => {
                let cells = voronoi_cells(sites, m.support()).map_err(solver_failure)?;
                Ok(svg::render_2d(m.support(), &cells, sites, circle))
            }
            Solved::Line(m, sites) => Ok(svg::render_1d(m, sites)),
        }
    }
}

fn solve_one(job: &JobSpec, measure: &Measure, n: usize) -> Result<(Row, Solved), Failure> {
    let support = job.measure.label().to_string();
    match measure {
        Measure::Uniform2D(m) => {
            let options = SolveOptions {
                seed: job.seed,
                oracle_tol: Some(ORACLE_TOL),
                ..Default::default()
            };
            let r = solve(n, m, job.strategy.into(), &options).map_err(solver_failure)?;
            let delta = r.oracle_delta.unwrap_or(0.0);
            if delta.abs() > ORACLE_LIMIT {
                return Err(Failure::Diverged(format!(
                    "{support} n={n}: exact and quadrature distortion differ by {delta:e}"
                )));
            }
            let row = Row {
                support,
                n,
                value: r.value,
                method: r.method.to_string(),
                conjecture_conditional: r.conjecture_conditional,
                sites: output::sites_2d(r.best.sites()),
                candidates: r.candidates.iter().map(|c| (c.label.clone(), c.value)).collect(),
                unverified: r.unverified,
                oracle_delta: r.oracle_delta,
            };
            Ok((row, Solved::Planar(m.clone(), r.best.into_sites())))
        }
        Measure::Piecewise1D(m) => {
            let r = solve1d(n, m, job.seed).map_err(solver_failure)?;
            if r.diverged {
                return Err(Failure::Diverged(format!(
                    "{support} n={n}: case enumeration and Lloyd disagree by {:e}",
                    r.oracle_delta.unwrap_or(f64::NAN)
                )));
            }
            let row = Row {
                support,
                n,
                value: r.value,
                method: r.method.to_string(),
                conjecture_conditional: r.conjecture_conditional,
                sites: output::sites_1d(r.best.sites()),
                candidates: r.candidates.iter().map(|c| (c.label.clone(), c.value)).collect(),
                unverified: r.unverified,
                oracle_delta: r.oracle_delta,
            };
            Ok((row, Solved::Line(m.clone(), r.best.sites().to_vec())))
        }
    }
}

/// `out.svg` becomes `out_n3.svg`.
fn suffixed(path: &Path, n: usize) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_n{n}.{}", ext.to_string_lossy()),
        None => format!("{stem}_n{n}"),
    };
    path.with_file_name(name)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn cmd_solve(args: &SolveArgs) -> Result<(), Failure> {
    let job = args.job.resolve(args.svg.clone(), args.csv.clone())?;
    let measure = job.measure.build()?;
    let mut rows = Vec::new();
    let mut summary = String::new();
    for n in job.n.iter() {
        let (row, solved) = solve_one(&job, &measure, n)?;
        if let Some(path) = &job.svg {
            let path = if job.n.is_single() {
                path.clone()
            } else {
                suffixed(path, n)
            };
            write_file(&path, &solved.svg(args.circle)?)?;
        }
        summary.push_str(&row.summary());
        rows.push(row);
    }
    let table = output::csv_table(&rows);
    match &job.csv {
        Some(path) => {
            write_file(path, &table)?;
            print!("{summary}");
        }
        None => {
            print!("{table}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn cmd_verify(args: &JobArgs) -> Result<(), Failure> {
    let job = args.resolve(None, None)?;
    let measure = job.measure.build()?;
    let tag = SupportTag::of(&measure).ok_or_else(|| {
        format!(
            "no reference values for a {} measure other than the tabulated one",
            job.measure.label()
        )
    })?;
    let mut failed = false;
    for n in job.n.iter() {
        let entry = lookup(tag, n).ok_or_else(|| format!("no reference entry for {tag} n={n}"))?;
        let (row, _) = solve_one(&job, &measure, n)?;
        let diff = (row.value - entry.value).abs();
        let tol = entry.tolerance.absolute();
        let pass = diff <= tol;
        failed |= !pass;
        println!(
            "{} {tag} n={n} value={} reference={} |diff|={} tol={}",
            if pass { "PASS" } else { "FAIL" },
            output::sig12(row.value),
            output::sig12(entry.value),
            output::sig(diff, 3),
            output::sig(tol, 3)
        );
    }
    if failed {
        Err(Failure::Mismatch)
    } else {
        Ok(())
    }
}

fn cmd_plot(args: &PlotArgs) -> Result<(), Failure> {
    let explicit_n = args.job.n.is_some() || args.job.job.is_some();
    let fallback = args.from_csv.is_some().then_some(NRange { lo: 1, hi: 1 });
    let job = args.job.resolve_or(args.svg.clone(), None, fallback)?;
    let path = job
        .svg
        .clone()
        .ok_or_else(|| Failure::Invalid("--svg is required".into()))?;
    let measure = job.measure.build()?;
    let solved = match &args.from_csv {
        Some(csv) => {
            let text = fs::read_to_string(csv).map_err(|e| format!("{}: {e}", csv.display()))?;
            let want = (explicit_n && job.n.is_single()).then_some(job.n.lo);
            let (_, sites) = output::sites_from_csv(&text, want)?;
            match measure {
                Measure::Uniform2D(m) => {
                    let pts = sites
                        .iter()
                        .map(|s| match s.as_slice() {
                            [x, y] => Ok(Point2::new(*x, *y)),
                            _ => Err(format!("expected x:y sites for a {} measure", job.measure.label())),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let config = Configuration::new(pts).map_err(solver_failure)?;
                    Solved::Planar(m, config.into_sites())
                }
                Measure::Piecewise1D(m) => {
                    let xs = sites
                        .iter()
                        .map(|s| match s.as_slice() {
                            [x] => Ok(*x),
                            _ => Err("expected scalar sites for a 1D density".to_string()),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let config = Config1D::from_unsorted(xs).map_err(solver_failure)?;
                    Solved::Line(m, config.sites().to_vec())
                }
            }
        }
        None => {
            if !job.n.is_single() {
                return Err(Failure::Invalid("plot takes a single n".into()));
            }
            solve_one(&job, &measure, job.n.lo)?.1
        }
    };
    write_file(&path, &solved.svg(args.circle)?)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Invalid(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Reference => {
            let _ = writeln!(std::io::stdout(), "{}", table_json().trim_end());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = std::io::stdout().flush();
            match &f {
                Failure::Invalid(msg) | Failure::Diverged(msg) => eprintln!("error: {msg}"),
                Failure::Mismatch => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn measure_flags_are_exclusive() {
        assert!(Cli::try_parse_from(["nmeans", "solve", "--disc", "--square", "--n", "2"]).is_err());
        assert!(Cli::try_parse_from(["nmeans", "solve", "--disc", "--n", "2"]).is_ok());
    }

    #[test]
    fn svg_suffix() {
        assert_eq!(suffixed(Path::new("out/plot.svg"), 3), PathBuf::from("out/plot_n3.svg"));
        assert_eq!(suffixed(Path::new("plot"), 12), PathBuf::from("plot_n12"));
    }

    #[test]
    fn flags_override_job_file() {
        let dir = std::env::temp_dir().join(format!("nmeans-job-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("job.json");
        fs::write(&path, r#"{"measure":{"kind":"square"},"n":"1..3","seed":5}"#).unwrap();
        let cli = Cli::try_parse_from(["nmeans", "verify", "--job", path.to_str().unwrap(), "--n", "2"]).unwrap();
        let Command::Verify(args) = cli.command else {
            panic!("verify expected")
        };
        let job = args.resolve(None, None).unwrap();
        assert_eq!(job.measure, MeasureDescriptor::Square);
        assert_eq!(job.n, NRange { lo: 2, hi: 2 });
        assert_eq!(job.seed, 5);
        fs::remove_dir_all(dir).unwrap();
    }
}
